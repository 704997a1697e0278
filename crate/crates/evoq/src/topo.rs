//! 2D hyperplane slices through two minima of an objective, sublevel-set
//! H0 persistence of the sampled field, and the basin barrier estimate.
//!
//! The slice plane is spanned by d1 (unit vector from anchor a to anchor
//! b) and a seeded random unit vector d2 orthogonal to it. Anchors land on
//! grid nodes: rows run along d1 with a 12.5% margin beyond each anchor
//! (total span 1.25x the anchor separation), columns run along d2 over
//! [-extent, +extent].

use crate::error::{Error, Result};
use crate::linalg::random_orthogonal_unit;
use crate::objective::Objective;
use crate::rng::RunRng;
use std::fmt::Write as _;

/// A 2D slice request through two anchor points in parameter space.
#[derive(Debug, Clone)]
pub struct SliceSpec {
    pub anchor_a: Vec<f64>,
    pub anchor_b: Vec<f64>,
    /// Half-width of the second axis; defaults to 0.625x the anchor
    /// separation so both axes cover the same absolute span.
    pub extent: Option<f64>,
    pub resolution: usize,
}

pub const DEFAULT_RESOLUTION: usize = 201;

impl SliceSpec {
    pub fn new(anchor_a: Vec<f64>, anchor_b: Vec<f64>) -> Result<Self> {
        let spec = SliceSpec {
            anchor_a,
            anchor_b,
            extent: None,
            resolution: DEFAULT_RESOLUTION,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_resolution(mut self, resolution: usize) -> Result<Self> {
        self.resolution = resolution;
        self.validate()?;
        Ok(self)
    }

    pub fn with_extent(mut self, extent: f64) -> Result<Self> {
        self.extent = Some(extent);
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.anchor_a.len() != self.anchor_b.len() || self.anchor_a.is_empty() {
            return Err(Error::invalid_argument(
                "anchors must share a nonzero dimension",
            ));
        }
        if self.separation() <= 1e-9 {
            return Err(Error::invalid_argument("anchors must be distinct"));
        }
        if self.resolution < 3 || self.resolution % 2 == 0 {
            return Err(Error::invalid_argument("resolution must be odd and >= 3"));
        }
        if let Some(e) = self.extent {
            if !(e > 0.0) {
                return Err(Error::invalid_argument("extent must be positive"));
            }
        }
        Ok(())
    }

    pub fn separation(&self) -> f64 {
        self.anchor_a
            .iter()
            .zip(&self.anchor_b)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

/// d1 = (b - a)/|b - a| plus a seeded random unit vector orthogonal to it.
pub fn slice_basis(
    anchor_a: &[f64],
    anchor_b: &[f64],
    rng: &mut RunRng,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if anchor_a.len() != anchor_b.len() || anchor_a.len() < 2 {
        return Err(Error::invalid_argument(
            "anchors must share a dimension >= 2",
        ));
    }
    let diff: Vec<f64> = anchor_b.iter().zip(anchor_a).map(|(b, a)| b - a).collect();
    let norm = diff.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm <= 1e-9 {
        return Err(Error::invalid_argument("anchors are degenerate"));
    }
    let d1: Vec<f64> = diff.iter().map(|v| v / norm).collect();
    let d2 = random_orthogonal_unit(&d1, rng);
    Ok((d1, d2))
}

/// Grid of exact objective values over the slice plane, with the
/// parameter-space coordinates of every node retained as axis metadata.
#[derive(Debug, Clone)]
pub struct ScalarField2D {
    values: Vec<f64>,
    rows: usize,
    cols: usize,
    /// Coordinate of each row along d1, in units of the anchor separation
    /// (anchor a at 0, anchor b at 1).
    pub s_axis: Vec<f64>,
    /// Coordinate of each column along d2, in units of the extent.
    pub t_axis: Vec<f64>,
}

impl ScalarField2D {
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::invalid_argument("field must be nonempty"));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid_argument("ragged field rows"));
        }
        let nrows = rows.len();
        let values: Vec<f64> = rows.into_iter().flatten().collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid_argument("field values must be finite"));
        }
        Ok(ScalarField2D {
            values,
            rows: nrows,
            cols,
            s_axis: (0..nrows).map(|i| i as f64).collect(),
            t_axis: (0..cols).map(|j| j as f64).collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Row and column indices of the two anchor nodes for a resolution:
/// row i_a = round(0.1 * (R-1)) holds anchor a, its mirror holds anchor b,
/// and both sit on the center column.
pub fn anchor_nodes(resolution: usize) -> ((usize, usize), (usize, usize)) {
    let m = resolution - 1;
    let i_a = (0.1 * m as f64).round() as usize;
    let i_b = m - i_a;
    let center = m / 2;
    ((i_a, center), (i_b, center))
}

/// Evaluates the objective over the slice grid. Node (i, j) sits at
/// a + s_i * L * d1 + t_j * extent * d2, where s_i is 0 at anchor a's row
/// and 1 at anchor b's row, and t_j runs linearly over [-1, 1].
pub fn grid_eval(
    spec: &SliceSpec,
    d1: &[f64],
    d2: &[f64],
    objective: &mut dyn Objective,
) -> Result<ScalarField2D> {
    spec.validate()?;
    let dim = spec.anchor_a.len();
    if d1.len() != dim || d2.len() != dim || objective.dimension() != dim {
        return Err(Error::invalid_argument(
            "basis and objective dimensions must match the anchors",
        ));
    }
    let r = spec.resolution;
    let l = spec.separation();
    let extent = spec.extent.unwrap_or(0.625 * l);
    let ((i_a, center), (i_b, _)) = anchor_nodes(r);
    let denom = (i_b - i_a) as f64;
    let s_axis: Vec<f64> = (0..r).map(|i| (i as f64 - i_a as f64) / denom).collect();
    let t_axis: Vec<f64> = (0..r)
        .map(|j| (j as f64 - center as f64) / center as f64)
        .collect();
    let mut values = Vec::with_capacity(r * r);
    let mut point = vec![0.0; dim];
    for &s in &s_axis {
        for &t in &t_axis {
            for k in 0..dim {
                point[k] = spec.anchor_a[k] + s * l * d1[k] + t * extent * d2[k];
            }
            let v = objective.evaluate(&point);
            if !v.is_finite() {
                return Err(Error::invalid_state("objective returned non-finite value"));
            }
            values.push(v);
        }
    }
    Ok(ScalarField2D {
        values,
        rows: r,
        cols: r,
        s_axis,
        t_axis,
    })
}

/// One 0-dimensional persistence feature: a basin born at its minimum
/// value that dies when it merges into an older basin (the connected
/// component of the whole field never dies).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PersistencePair {
    pub birth: f64,
    pub death: f64,
}

impl PersistencePair {
    pub fn is_essential(&self) -> bool {
        self.death.is_infinite()
    }

    pub fn persistence(&self) -> f64 {
        self.death - self.birth
    }
}

struct UnionFind {
    parent: Vec<usize>,
    birth_value: Vec<f64>,
    birth_index: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            birth_value: vec![0.0; n],
            birth_index: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns true if root a is the elder: strictly lower birth value, or
    /// equal value with a lower birth node index.
    fn elder(&self, a: usize, b: usize) -> bool {
        match self.birth_value[a].total_cmp(&self.birth_value[b]) {
            std::cmp::Ordering::Less => true,
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => self.birth_index[a] < self.birth_index[b],
        }
    }
}

/// Sublevel-set H0 persistence over the 4-connected grid graph.
///
/// Nodes enter in ascending (value, linear index) order; when two
/// components meet, the younger one dies at the current value (elder
/// rule). Zero-persistence pairs — plateau nodes that join a component
/// born at the same value — are dropped, so the diagram matches a
/// value-level sweep of the filtration. Exactly one pair is essential;
/// its birth is the global field minimum.
pub fn h0_persistence(field: &ScalarField2D) -> Vec<PersistencePair> {
    let (rows, cols) = (field.rows, field.cols);
    let n = rows * cols;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| field.values[a].total_cmp(&field.values[b]).then(a.cmp(&b)));
    let mut uf = UnionFind::new(n);
    let mut active = vec![false; n];
    let mut pairs = Vec::new();
    for &idx in &order {
        let value = field.values[idx];
        active[idx] = true;
        uf.birth_value[idx] = value;
        uf.birth_index[idx] = idx;
        let (i, j) = (idx / cols, idx % cols);
        let mut neighbors = [usize::MAX; 4];
        let mut count = 0;
        if i > 0 {
            neighbors[count] = idx - cols;
            count += 1;
        }
        if i + 1 < rows {
            neighbors[count] = idx + cols;
            count += 1;
        }
        if j > 0 {
            neighbors[count] = idx - 1;
            count += 1;
        }
        if j + 1 < cols {
            neighbors[count] = idx + 1;
            count += 1;
        }
        for &nb in &neighbors[..count] {
            if !active[nb] {
                continue;
            }
            let ra = uf.find(idx);
            let rb = uf.find(nb);
            if ra == rb {
                continue;
            }
            let (old, young) = if uf.elder(ra, rb) { (ra, rb) } else { (rb, ra) };
            if uf.birth_value[young] < value {
                pairs.push(PersistencePair {
                    birth: uf.birth_value[young],
                    death: value,
                });
            }
            uf.parent[young] = old;
        }
    }
    let root = uf.find(order[0]);
    pairs.push(PersistencePair {
        birth: uf.birth_value[root],
        death: f64::INFINITY,
    });
    pairs.sort_by(|a, b| a.birth.total_cmp(&b.birth).then(a.death.total_cmp(&b.death)));
    pairs
}

/// Persistence (death - birth) of the finite pair whose birth is closest
/// to `local_birth` within `tol`; an upper bound on the true saddle
/// height between the basins.
pub fn barrier(pairs: &[PersistencePair], local_birth: f64, tol: f64) -> Result<f64> {
    pairs
        .iter()
        .filter(|p| p.death.is_finite() && (p.birth - local_birth).abs() <= tol)
        .min_by(|a, b| {
            (a.birth - local_birth)
                .abs()
                .total_cmp(&(b.birth - local_birth).abs())
        })
        .map(|p| p.persistence())
        .ok_or_else(|| {
            Error::NotFound(format!(
                "no finite pair with birth within {tol} of {local_birth}"
            ))
        })
}

/// CSV dump of a slice field: one row per node with its grid indices,
/// slice coordinates and value.
pub fn field_to_csv(field: &ScalarField2D) -> String {
    let mut out = String::from("i,j,s,t,value\n");
    for i in 0..field.rows {
        for j in 0..field.cols {
            writeln!(
                out,
                "{i},{j},{:.16e},{:.16e},{:.16e}",
                field.s_axis[i],
                field.t_axis[j],
                field.get(i, j)
            )
            .expect("string write");
        }
    }
    out
}

/// CSV dump of a persistence diagram; the essential pair's death prints
/// as "inf".
pub fn diagram_to_csv(pairs: &[PersistencePair]) -> String {
    let mut out = String::from("birth,death\n");
    for p in pairs {
        if p.death.is_finite() {
            writeln!(out, "{:.16e},{:.16e}", p.birth, p.death).expect("string write");
        } else {
            writeln!(out, "{:.16e},inf", p.birth).expect("string write");
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::objective::FnObjective;
    use crate::rng::rng_from_seed;
    use rand::Rng;

    fn field(rows: &[&[f64]]) -> ScalarField2D {
        ScalarField2D::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn finite(pairs: &[PersistencePair]) -> Vec<(f64, f64)> {
        pairs
            .iter()
            .filter(|p| p.death.is_finite())
            .map(|p| (p.birth, p.death))
            .collect()
    }

    #[test]
    fn hand_example_row() {
        let f = field(&[&[0.0, 2.0, 1.0, 3.0]]);
        let pairs = h0_persistence(&f);
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].birth, 0.0);
        assert!(pairs[0].is_essential());
        assert_eq!(finite(&pairs), vec![(1.0, 2.0)]);
    }

    #[test]
    fn single_basin_grid() {
        let f = field(&[&[3.0, 2.0, 3.0], &[2.0, 0.0, 2.0], &[3.0, 2.0, 3.0]]);
        let pairs = h0_persistence(&f);
        assert_eq!(pairs.len(), 1);
        assert_eq!(pairs[0].birth, 0.0);
        assert!(pairs[0].is_essential());
    }

    #[test]
    fn two_basin_grid() {
        // basins at 0 and 1, ridge at 5 between them
        let f = field(&[&[0.0, 5.0, 1.0], &[4.0, 5.0, 2.0], &[4.0, 4.0, 3.0]]);
        let pairs = h0_persistence(&f);
        assert_eq!(pairs.len(), 2);
        assert_eq!(finite(&pairs), vec![(1.0, 4.0)]);
        assert_eq!(pairs[0].birth, 0.0);
    }

    #[test]
    fn plateau_produces_no_zero_pairs() {
        let f = field(&[&[1.0, 1.0, 1.0], &[1.0, 1.0, 1.0]]);
        let pairs = h0_persistence(&f);
        assert_eq!(pairs.len(), 1);
        assert!(pairs[0].is_essential());
        assert_eq!(pairs[0].birth, 1.0);
    }

    #[test]
    fn essential_pair_births_at_global_min() {
        let mut rng = rng_from_seed(41);
        for _ in 0..20 {
            let rows: Vec<Vec<f64>> = (0..6)
                .map(|_| (0..6).map(|_| rng.random_range(0..10) as f64).collect())
                .collect();
            let min = rows
                .iter()
                .flatten()
                .copied()
                .fold(f64::INFINITY, f64::min);
            let f = ScalarField2D::from_rows(rows).unwrap();
            let pairs = h0_persistence(&f);
            let essential: Vec<_> = pairs.iter().filter(|p| p.is_essential()).collect();
            assert_eq!(essential.len(), 1);
            assert_eq!(essential[0].birth, min);
            assert!(pairs.iter().all(|p| p.death >= p.birth));
        }
    }

    #[test]
    fn filtration_is_shift_equivariant() {
        let base = field(&[&[0.0, 5.0, 1.0], &[4.0, 5.0, 2.0], &[4.0, 4.0, 3.0]]);
        let shifted = field(&[&[7.0, 12.0, 8.0], &[11.0, 12.0, 9.0], &[11.0, 11.0, 10.0]]);
        let a = h0_persistence(&base);
        let b = h0_persistence(&shifted);
        assert_eq!(a.len(), b.len());
        for (pa, pb) in a.iter().zip(&b) {
            assert_eq!(pa.birth + 7.0, pb.birth);
            if pa.death.is_finite() {
                assert_eq!(pa.death + 7.0, pb.death);
            } else {
                assert!(pb.death.is_infinite());
            }
        }
    }

    // Independent oracle: sweep distinct values ascending; at each level
    // flood-fill the sublevel set and match components against the
    // previous level's. Merges kill every contained component except the
    // one with the oldest birth.
    fn oracle_diagram(values: &[Vec<f64>]) -> Vec<(f64, f64)> {
        let rows = values.len();
        let cols = values[0].len();
        let mut levels: Vec<f64> = values.iter().flatten().copied().collect();
        levels.sort_by(f64::total_cmp);
        levels.dedup();
        // previous level: component id per node (usize::MAX = not present)
        let mut prev_comp: Vec<usize> = vec![usize::MAX; rows * cols];
        let mut prev_births: Vec<f64> = Vec::new();
        let mut pairs: Vec<(f64, f64)> = Vec::new();
        for &level in &levels {
            // flood fill the sublevel set <= level
            let mut comp = vec![usize::MAX; rows * cols];
            let mut births: Vec<f64> = Vec::new();
            for start in 0..rows * cols {
                if comp[start] != usize::MAX
                    || values[start / cols][start % cols] > level
                {
                    continue;
                }
                let id = births.len();
                let mut min_v = f64::INFINITY;
                let mut stack = vec![start];
                comp[start] = id;
                while let Some(idx) = stack.pop() {
                    let (i, j) = (idx / cols, idx % cols);
                    min_v = min_v.min(values[i][j]);
                    let mut push = |ni: usize, nj: usize, stack: &mut Vec<usize>| {
                        let nidx = ni * cols + nj;
                        if comp[nidx] == usize::MAX && values[ni][nj] <= level {
                            comp[nidx] = id;
                            stack.push(nidx);
                        }
                    };
                    if i > 0 {
                        push(i - 1, j, &mut stack);
                    }
                    if i + 1 < rows {
                        push(i + 1, j, &mut stack);
                    }
                    if j > 0 {
                        push(i, j - 1, &mut stack);
                    }
                    if j + 1 < cols {
                        push(i, j + 1, &mut stack);
                    }
                }
                births.push(min_v);
            }
            // map every previous component into its containing new one
            let mut contained: Vec<Vec<usize>> = vec![Vec::new(); births.len()];
            for idx in 0..rows * cols {
                if prev_comp[idx] != usize::MAX {
                    let new_id = comp[idx];
                    if !contained[new_id].contains(&prev_comp[idx]) {
                        contained[new_id].push(prev_comp[idx]);
                    }
                }
            }
            for (_, old_ids) in contained.iter().enumerate() {
                if old_ids.len() >= 2 {
                    let oldest = old_ids
                        .iter()
                        .copied()
                        .min_by(|&a, &b| prev_births[a].total_cmp(&prev_births[b]))
                        .unwrap();
                    for &old in old_ids {
                        if old != oldest {
                            pairs.push((prev_births[old], level));
                        }
                    }
                }
            }
            prev_comp = comp;
            prev_births = births;
        }
        pairs.push((prev_births[0], f64::INFINITY));
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        pairs
    }

    #[test]
    fn union_find_matches_flood_fill_oracle() {
        let mut rng = rng_from_seed(42);
        for case in 0..25 {
            let rows: Vec<Vec<f64>> = (0..12)
                .map(|_| (0..12).map(|_| rng.random_range(0..8) as f64).collect())
                .collect();
            let expected = oracle_diagram(&rows);
            let f = ScalarField2D::from_rows(rows).unwrap();
            let got: Vec<(f64, f64)> =
                h0_persistence(&f).iter().map(|p| (p.birth, p.death)).collect();
            assert_eq!(got, expected, "case {case}");
        }
    }

    #[test]
    fn barrier_hand_cases() {
        let pairs = [
            PersistencePair {
                birth: 0.0,
                death: f64::INFINITY,
            },
            PersistencePair {
                birth: 1.0,
                death: 2.0,
            },
        ];
        assert_eq!(barrier(&pairs, 1.0, 0.15).unwrap(), 1.0);
        let deep = [
            PersistencePair {
                birth: -9.0,
                death: f64::INFINITY,
            },
            PersistencePair {
                birth: -8.0,
                death: -2.0,
            },
        ];
        assert_eq!(barrier(&deep, -8.0, 0.15).unwrap(), 6.0);
        let flat = [PersistencePair {
            birth: 3.0,
            death: 3.0,
        }];
        assert_eq!(barrier(&flat, 3.0, 0.01).unwrap(), 0.0);
        assert!(barrier(&pairs, 5.0, 0.15).is_err());
    }

    #[test]
    fn barrier_picks_closest_birth() {
        let pairs = [
            PersistencePair {
                birth: 1.0,
                death: 4.0,
            },
            PersistencePair {
                birth: 1.2,
                death: 2.0,
            },
        ];
        assert_eq!(barrier(&pairs, 1.15, 0.3).unwrap(), 0.8);
    }

    #[test]
    fn slice_basis_axis_aligned() {
        let mut rng = rng_from_seed(43);
        let (d1, d2) = slice_basis(&[0.0, 0.0, 0.0], &[2.0, 0.0, 0.0], &mut rng).unwrap();
        assert_eq!(d1, vec![1.0, 0.0, 0.0]);
        let norm2: f64 = d2.iter().map(|v| v * v).sum();
        assert!((norm2 - 1.0).abs() < 1e-10);
        let dot: f64 = d1.iter().zip(&d2).map(|(a, b)| a * b).sum();
        assert!(dot.abs() < 1e-10);
    }

    #[test]
    fn slice_basis_contract_random_anchors() {
        let mut rng = rng_from_seed(44);
        for _ in 0..20 {
            let a: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
            let b: Vec<f64> = (0..5).map(|_| rng.random_range(-3.0..3.0)).collect();
            if a.iter().zip(&b).map(|(x, y)| (x - y).abs()).sum::<f64>() < 1e-6 {
                continue;
            }
            let (d1, d2) = slice_basis(&a, &b, &mut rng).unwrap();
            let n1: f64 = d1.iter().map(|v| v * v).sum();
            let n2: f64 = d2.iter().map(|v| v * v).sum();
            let dot: f64 = d1.iter().zip(&d2).map(|(x, y)| x * y).sum();
            assert!((n1 - 1.0).abs() < 1e-10);
            assert!((n2 - 1.0).abs() < 1e-10);
            assert!(dot.abs() < 1e-10);
        }
    }

    #[test]
    fn slice_basis_degenerate_anchors_rejected() {
        let mut rng = rng_from_seed(45);
        assert!(slice_basis(&[1.0, 2.0], &[1.0, 2.0], &mut rng).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(SliceSpec::new(vec![0.0, 0.0], vec![1.0, 0.0]).is_ok());
        assert!(SliceSpec::new(vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
        let s = SliceSpec::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert!(s.clone().with_resolution(4).is_err());
        assert!(s.clone().with_resolution(1).is_err());
        assert!(s.clone().with_resolution(5).is_ok());
        assert!(s.with_extent(-1.0).is_err());
    }

    #[test]
    fn grid_eval_constant_objective() {
        let spec = SliceSpec::new(vec![0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0])
            .unwrap()
            .with_resolution(11)
            .unwrap();
        let mut rng = rng_from_seed(46);
        let (d1, d2) = slice_basis(&spec.anchor_a, &spec.anchor_b, &mut rng).unwrap();
        let mut obj = FnObjective::new(3, 10.0, |_| 7.5);
        let f = grid_eval(&spec, &d1, &d2, &mut obj).unwrap();
        assert_eq!(f.rows() * f.cols(), 121);
        assert!(f.values().iter().all(|&v| v == 7.5));
    }

    #[test]
    fn grid_eval_anchors_on_nodes() {
        let a = vec![0.5, -1.0, 2.0, 0.0];
        let b = vec![-0.5, 1.0, 1.0, 0.5];
        let spec = SliceSpec::new(a.clone(), b.clone())
            .unwrap()
            .with_resolution(21)
            .unwrap();
        let mut rng = rng_from_seed(47);
        let (d1, d2) = slice_basis(&a, &b, &mut rng).unwrap();
        let sphere = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let mut obj = FnObjective::new(4, 10.0, sphere);
        let f = grid_eval(&spec, &d1, &d2, &mut obj).unwrap();
        let ((ia, jc), (ib, _)) = anchor_nodes(21);
        assert!((f.s_axis[ia] - 0.0).abs() < 1e-15);
        assert!((f.s_axis[ib] - 1.0).abs() < 1e-15);
        assert!((f.get(ia, jc) - sphere(&a)).abs() < 1e-10);
        assert!((f.get(ib, jc) - sphere(&b)).abs() < 1e-10);
    }

    #[test]
    fn grid_eval_bowl_minimum_at_anchor_a() {
        let a = vec![1.0, 2.0, 3.0];
        let b = vec![2.0, 2.0, 3.0];
        let spec = SliceSpec::new(a.clone(), b.clone())
            .unwrap()
            .with_resolution(15)
            .unwrap();
        let mut rng = rng_from_seed(48);
        let (d1, d2) = slice_basis(&a, &b, &mut rng).unwrap();
        let center = a.clone();
        let mut obj = FnObjective::new(3, 100.0, move |x| {
            x.iter()
                .zip(&center)
                .map(|(v, c)| (v - c) * (v - c))
                .sum::<f64>()
        });
        let f = grid_eval(&spec, &d1, &d2, &mut obj).unwrap();
        let ((ia, jc), _) = anchor_nodes(15);
        let mut argmin = (0, 0);
        let mut min = f64::INFINITY;
        for i in 0..f.rows() {
            for j in 0..f.cols() {
                if f.get(i, j) < min {
                    min = f.get(i, j);
                    argmin = (i, j);
                }
            }
        }
        assert_eq!(argmin, (ia, jc));
        assert!(min.abs() < 1e-20);
    }

    #[test]
    fn csv_emitters_shape() {
        let f = field(&[&[0.0, 2.0], &[1.0, 3.0]]);
        let field_csv = field_to_csv(&f);
        let mut lines = field_csv.lines();
        assert_eq!(lines.next(), Some("i,j,s,t,value"));
        assert_eq!(field_csv.lines().count(), 5);
        let pairs = h0_persistence(&f);
        let diagram = diagram_to_csv(&pairs);
        assert!(diagram.starts_with("birth,death\n"));
        assert!(diagram.contains(",inf"));
    }
}
