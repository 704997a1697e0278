//! Differential-evolution building blocks shared by every optimizer:
//! mutation operators, binomial and eigen-basis crossover, success-history
//! parameter memory, population-size schedules, rank-based selection and
//! success-rate parameter rules.

use crate::error::{Error, Result};
use crate::linalg::{jacobi_eigen_symmetric, OrthogonalMatrix, SquareMatrix};
use crate::rng::RunRng;
use rand::Rng;
use rand_distr::{Cauchy, Distribution, Normal};

/// One candidate solution with its objective value (lower is better).
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub x: Vec<f64>,
    pub fitness: f64,
}

/// Population kept sorted ascending by fitness (index 0 = best), plus an
/// archive of replaced parents used by current-to-pbest mutation.
///
/// The archive is capped at the current population size; pushing into a
/// full archive overwrites a random entry.
#[derive(Debug, Clone)]
pub struct Population {
    pub members: Vec<Individual>,
    pub archive: Vec<Vec<f64>>,
    pub generation: u64,
    pub nfe: u64,
    archive_cap: usize,
}

impl Population {
    pub fn from_members(mut members: Vec<Individual>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::invalid_state("population must be nonempty"));
        }
        members.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
        let cap = members.len();
        Ok(Population {
            members,
            archive: Vec::new(),
            generation: 0,
            nfe: 0,
            archive_cap: cap,
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn best(&self) -> &Individual {
        &self.members[0]
    }

    /// Re-establishes the ascending fitness order after batch updates.
    pub fn sort(&mut self) {
        self.members.sort_by(|a, b| a.fitness.total_cmp(&b.fitness));
    }

    /// Adds a replaced parent, overwriting a random slot when full.
    pub fn push_archive(&mut self, x: Vec<f64>, rng: &mut RunRng) {
        if self.archive_cap == 0 {
            return;
        }
        if self.archive.len() < self.archive_cap {
            self.archive.push(x);
        } else {
            let slot = rng.random_range(0..self.archive.len());
            self.archive[slot] = x;
        }
    }

    /// Shrinks to `n` members by dropping the worst, then trims the
    /// archive cap to the new size (random evictions while over cap).
    pub fn shrink_to(&mut self, n: usize, rng: &mut RunRng) {
        if n == 0 || n >= self.members.len() {
            return;
        }
        self.members.truncate(n);
        self.archive_cap = n;
        while self.archive.len() > self.archive_cap {
            let slot = rng.random_range(0..self.archive.len());
            self.archive.swap_remove(slot);
        }
    }

    /// Rank-weighted selection: member at sorted index i is drawn with
    /// probability proportional to N - i (rank 1 = best is most likely).
    pub fn rsp_select(&self, rng: &mut RunRng) -> usize {
        rsp_index(self.members.len(), rng)
    }
}

/// Rank-proportional index over a best-first sorted list of length n:
/// P(i) = (n - i) / (n(n+1)/2).
pub fn rsp_index(n: usize, rng: &mut RunRng) -> usize {
    debug_assert!(n > 0);
    if n == 1 {
        return 0;
    }
    let total = n * (n + 1) / 2;
    let mut ticket = rng.random_range(0..total);
    for i in 0..n {
        let weight = n - i;
        if ticket < weight {
            return i;
        }
        ticket -= weight;
    }
    n - 1
}

/// v = base + f * (a - b); the index-free core of rand/1 mutation.
pub fn rand1_combine(base: &[f64], a: &[f64], b: &[f64], f: f64) -> Vec<f64> {
    base.iter()
        .zip(a.iter().zip(b))
        .map(|(&x0, (&xa, &xb))| x0 + f * (xa - xb))
        .collect()
}

/// v = x + f * (pbest - x) + f * (r1 - r2); the index-free core of
/// current-to-pbest mutation.
pub fn pbest_combine(x: &[f64], pbest: &[f64], r1: &[f64], r2: &[f64], f: f64) -> Vec<f64> {
    x.iter()
        .zip(pbest)
        .zip(r1.iter().zip(r2))
        .map(|((&xi, &pi), (&ai, &bi))| xi + f * (pi - xi) + f * (ai - bi))
        .collect()
}

fn distinct_index(n: usize, exclude: &[usize], rng: &mut RunRng) -> usize {
    loop {
        let idx = rng.random_range(0..n);
        if !exclude.contains(&idx) {
            return idx;
        }
    }
}

/// DE/rand/1: v = x_r1 + F(x_r2 - x_r3) with r1, r2, r3 distinct and != i.
pub fn mutate_rand1(pop: &Population, i: usize, f: f64, rng: &mut RunRng) -> Result<Vec<f64>> {
    let n = pop.len();
    if n < 4 {
        return Err(Error::invalid_state("rand/1 mutation needs >= 4 members"));
    }
    let r1 = distinct_index(n, &[i], rng);
    let r2 = distinct_index(n, &[i, r1], rng);
    let r3 = distinct_index(n, &[i, r1, r2], rng);
    Ok(rand1_combine(
        &pop.members[r1].x,
        &pop.members[r2].x,
        &pop.members[r3].x,
        f,
    ))
}

/// current-to-pbest/1 with optional archive participation:
/// v = x_i + F(x_pbest - x_i) + F(x_r1 - x_r2), where x_pbest is uniform
/// over the best ceil(p * N) members and x_r2 may come from the archive.
pub fn mutate_current_to_pbest(
    pop: &Population,
    i: usize,
    f: f64,
    p_fraction: f64,
    rng: &mut RunRng,
) -> Result<Vec<f64>> {
    let n = pop.len();
    if n < 4 {
        return Err(Error::invalid_state(
            "current-to-pbest mutation needs >= 4 members",
        ));
    }
    if !(p_fraction > 0.0 && p_fraction <= 1.0) {
        return Err(Error::invalid_argument("p_fraction must be in (0, 1]"));
    }
    let p_num = ((p_fraction * n as f64).ceil() as usize).clamp(1, n);
    let pbest = rng.random_range(0..p_num);
    let r1 = distinct_index(n, &[i], rng);
    let r2 = loop {
        let idx = rng.random_range(0..n + pop.archive.len());
        if idx != i && idx != r1 {
            break idx;
        }
    };
    let r2_x: &[f64] = if r2 < n {
        &pop.members[r2].x
    } else {
        &pop.archive[r2 - n]
    };
    Ok(pbest_combine(
        &pop.members[i].x,
        &pop.members[pbest].x,
        &pop.members[r1].x,
        r2_x,
        f,
    ))
}

/// Binomial crossover with an explicit forced index: u_j = mutant_j when
/// the uniform draw falls below cr or j == j_rand, else target_j.
pub fn binomial_crossover_at(
    target: &[f64],
    mutant: &[f64],
    cr: f64,
    j_rand: usize,
    rng: &mut RunRng,
) -> Vec<f64> {
    debug_assert_eq!(target.len(), mutant.len());
    target
        .iter()
        .zip(mutant)
        .enumerate()
        .map(|(j, (&tj, &mj))| {
            let draw: f64 = rng.random();
            if draw < cr || j == j_rand {
                mj
            } else {
                tj
            }
        })
        .collect()
}

/// Binomial crossover; every output coordinate equals the corresponding
/// coordinate of either target or mutant, and at least one (the forced
/// index) comes from the mutant.
pub fn binomial_crossover(
    target: &[f64],
    mutant: &[f64],
    cr: f64,
    rng: &mut RunRng,
) -> Vec<f64> {
    let j_rand = rng.random_range(0..target.len());
    binomial_crossover_at(target, mutant, cr, j_rand, rng)
}

/// Success-history memory for F and CR; H circular slots.
#[derive(Debug, Clone)]
pub struct ShaMemory {
    pub m_f: Vec<f64>,
    pub m_cr: Vec<f64>,
    pub next_slot: usize,
}

impl ShaMemory {
    pub fn new(h: usize, init_f: f64, init_cr: f64) -> Result<Self> {
        if h == 0 {
            return Err(Error::invalid_argument("memory size must be positive"));
        }
        if !(init_f > 0.0 && init_f <= 1.0) || !(0.0..=1.0).contains(&init_cr) {
            return Err(Error::invalid_argument("memory seeds out of range"));
        }
        Ok(ShaMemory {
            m_f: vec![init_f; h],
            m_cr: vec![init_cr; h],
            next_slot: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.m_f.len()
    }

    pub fn is_empty(&self) -> bool {
        self.m_f.is_empty()
    }
}

/// Per-generation record of parameter values that produced replacements,
/// with the fitness improvement each one achieved.
#[derive(Debug, Clone, Default)]
pub struct SuccessSet {
    pub f_values: Vec<f64>,
    pub cr_values: Vec<f64>,
    pub improvements: Vec<f64>,
}

impl SuccessSet {
    pub fn push(&mut self, f: f64, cr: f64, improvement: f64) {
        self.f_values.push(f);
        self.cr_values.push(cr);
        self.improvements.push(improvement);
    }

    pub fn is_empty(&self) -> bool {
        self.f_values.is_empty()
    }

    pub fn clear(&mut self) {
        self.f_values.clear();
        self.cr_values.clear();
        self.improvements.clear();
    }
}

/// Improvement-weighted Lehmer mean: with w_i = d_i / sum(d), returns
/// sum(w * s^2) / sum(w * s). None when the set is empty, all
/// improvements are zero, or the denominator vanishes. Non-finite
/// improvements (e.g. a finite trial displacing an infinite parent) are
/// ignored; the mean is invariant to weight scaling, so weights are
/// normalized by the largest improvement to keep the sums finite.
pub fn weighted_lehmer_mean(samples: &[f64], improvements: &[f64]) -> Option<f64> {
    if samples.is_empty() || samples.len() != improvements.len() {
        return None;
    }
    let max_d = improvements
        .iter()
        .copied()
        .filter(|d| d.is_finite())
        .fold(0.0_f64, f64::max);
    if !(max_d > 0.0) {
        return None;
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (&s, &d) in samples.iter().zip(improvements) {
        if !d.is_finite() {
            continue;
        }
        let w = d / max_d;
        num += w * s * s;
        den += w * s;
    }
    if den == 0.0 || !(num / den).is_finite() {
        None
    } else {
        Some(num / den)
    }
}

/// Moving-average memory update: slot k <- c * lehmer + (1 - c) * old for
/// both F and CR, then advance k. An empty success set, or one whose
/// improvements are all zero (stagnation), leaves the memory untouched.
pub fn lehmer_update(memory: &mut ShaMemory, s: &SuccessSet, c: f64) {
    if s.is_empty() {
        return;
    }
    let lehmer_f = weighted_lehmer_mean(&s.f_values, &s.improvements);
    let lehmer_cr = weighted_lehmer_mean(&s.cr_values, &s.improvements);
    if lehmer_f.is_none() && lehmer_cr.is_none() {
        return;
    }
    let k = memory.next_slot;
    if let Some(lf) = lehmer_f {
        memory.m_f[k] = (c * lf + (1.0 - c) * memory.m_f[k]).clamp(f64::MIN_POSITIVE, 1.0);
    }
    if let Some(lcr) = lehmer_cr {
        memory.m_cr[k] = (c * lcr + (1.0 - c) * memory.m_cr[k]).clamp(0.0, 1.0);
    }
    memory.next_slot = (k + 1) % memory.len();
}

/// Draws (F, CR) from a uniformly chosen memory slot: F from a Cauchy with
/// scale 0.1 (resampled while <= 0, clipped to 1), CR from a Normal with
/// scale 0.1 clipped to [0, 1].
pub fn sample_params(memory: &ShaMemory, rng: &mut RunRng) -> (f64, f64) {
    let r = rng.random_range(0..memory.len());
    let f = sample_f(memory.m_f[r], rng);
    let cr = sample_cr(memory.m_cr[r], rng);
    (f, cr)
}

/// Cauchy(center, 0.1) resampled while <= 0 and clipped to 1.
pub fn sample_f(center: f64, rng: &mut RunRng) -> f64 {
    assert!(center.is_finite(), "F memory corrupted: center {center}");
    let dist = Cauchy::new(center, 0.1).expect("finite center");
    loop {
        let v: f64 = dist.sample(rng);
        if v > 0.0 {
            return v.min(1.0);
        }
    }
}

/// Normal(center, 0.1) clipped to [0, 1].
pub fn sample_cr(center: f64, rng: &mut RunRng) -> f64 {
    assert!(center.is_finite(), "CR memory corrupted: center {center}");
    let dist = Normal::new(center, 0.1).expect("finite center");
    let v: f64 = dist.sample(rng);
    v.clamp(0.0, 1.0)
}

/// Population-size schedule shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScheduleKind {
    Linear,
    Nonlinear,
}

/// Shrinks the population from n_init down to n_min across the budget.
#[derive(Debug, Clone, Copy)]
pub struct PopulationSchedule {
    pub n_init: usize,
    pub n_min: usize,
    pub nfe_max: u64,
    pub kind: ScheduleKind,
}

impl PopulationSchedule {
    pub fn new(n_init: usize, n_min: usize, nfe_max: u64, kind: ScheduleKind) -> Result<Self> {
        if n_min < 4 || n_min > n_init {
            return Err(Error::invalid_argument("need 4 <= n_min <= n_init"));
        }
        if nfe_max == 0 {
            return Err(Error::invalid_argument("nfe_max must be positive"));
        }
        Ok(PopulationSchedule {
            n_init,
            n_min,
            nfe_max,
            kind,
        })
    }

    pub fn size_at(&self, nfe: u64) -> usize {
        match self.kind {
            ScheduleKind::Linear => lpsr_size(self, nfe),
            ScheduleKind::Nonlinear => nlpsr_size(self, nfe),
        }
    }
}

/// Linear decay: round(((n_min - n_init)/nfe_max) * nfe + n_init), clamped
/// to n_min past the budget.
pub fn lpsr_size(sch: &PopulationSchedule, nfe: u64) -> usize {
    if nfe >= sch.nfe_max {
        return sch.n_min;
    }
    let slope = (sch.n_min as f64 - sch.n_init as f64) / sch.nfe_max as f64;
    let value = (slope * nfe as f64 + sch.n_init as f64).round();
    (value as usize).clamp(sch.n_min, sch.n_init)
}

/// Nonlinear decay: round((n_min - n_init) * r^(1-r) + n_init) with
/// r = nfe/nfe_max, clamped to n_min past the budget.
pub fn nlpsr_size(sch: &PopulationSchedule, nfe: u64) -> usize {
    if nfe >= sch.nfe_max {
        return sch.n_min;
    }
    if nfe == 0 {
        return sch.n_init;
    }
    let r = nfe as f64 / sch.nfe_max as f64;
    let value =
        ((sch.n_min as f64 - sch.n_init as f64) * r.powf(1.0 - r) + sch.n_init as f64).round();
    (value as usize).clamp(sch.n_min, sch.n_init)
}

/// successes / trials, or 0 when no trials happened.
pub fn success_rate(trials: u64, successes: u64) -> f64 {
    if trials == 0 {
        0.0
    } else {
        successes as f64 / trials as f64
    }
}

/// Success-rate-driven Cauchy center for F: 0.4 + 0.25 * tanh(5 * sr).
/// Strictly increasing, range [0.4, 0.65).
pub fn srtde_mf(sr: f64) -> f64 {
    0.4 + 0.25 * (5.0 * sr).tanh()
}

/// Success-rate-driven pbest fraction: 0.7 - 0.5 * sr, clipped to
/// [0.05, 0.7]; selective pressure rises as the success rate drops.
pub fn srtde_pb(sr: f64) -> f64 {
    (0.7 - 0.5 * sr).clamp(0.05, 0.7)
}

/// Principal axes of a point cloud: eigenvectors of the sample covariance
/// as columns, sorted by descending eigenvalue. Falls back to the identity
/// basis when the cloud has fewer than D+1 points or the covariance is
/// (numerically) rank-deficient.
pub fn eigen_basis(points: &[Vec<f64>]) -> OrthogonalMatrix {
    if points.is_empty() {
        return OrthogonalMatrix::identity(0);
    }
    let d = points[0].len();
    let identity = OrthogonalMatrix::identity(d);
    if points.len() < d + 1 {
        return identity;
    }
    let m = points.len() as f64;
    let mut mean = vec![0.0; d];
    for p in points {
        for (mu, &v) in mean.iter_mut().zip(p) {
            *mu += v;
        }
    }
    mean.iter_mut().for_each(|mu| *mu /= m);
    let mut cov = SquareMatrix::zeros(d);
    for p in points {
        for a in 0..d {
            let da = p[a] - mean[a];
            for b in a..d {
                let v = cov.get(a, b) + da * (p[b] - mean[b]);
                cov.set(a, b, v);
            }
        }
    }
    for a in 0..d {
        for b in a..d {
            let v = cov.get(a, b) / (m - 1.0);
            cov.set(a, b, v);
            cov.set(b, a, v);
        }
    }
    let (values, vectors) = jacobi_eigen_symmetric(&cov);
    if values.iter().any(|v| !v.is_finite()) {
        return identity;
    }
    let v_max = values[0];
    let v_min = values[d - 1];
    if v_max <= 0.0 || v_min < 1e-12 * v_max {
        return identity;
    }
    OrthogonalMatrix::new(vectors).unwrap_or(identity)
}

/// Crossover in the eigen-rotated frame: u = B * cross(B^T t, B^T m).
/// With the identity basis this is plain binomial crossover.
pub fn eigen_crossover(
    target: &[f64],
    mutant: &[f64],
    cr: f64,
    basis: &OrthogonalMatrix,
    rng: &mut RunRng,
) -> Vec<f64> {
    let t = basis.apply_transpose(target);
    let m = basis.apply_transpose(mutant);
    let u = binomial_crossover(&t, &m, cr, rng);
    basis.apply(&u)
}

/// Midpoint bound repair: an out-of-bounds trial coordinate is replaced by
/// the midpoint between the violated bound and the parent's coordinate.
pub fn repair_midpoint(trial: &mut [f64], parent: &[f64], bounds: &[(f64, f64)]) {
    for ((t, &p), &(low, high)) in trial.iter_mut().zip(parent).zip(bounds) {
        if *t < low {
            *t = 0.5 * (low + p);
        } else if *t > high {
            *t = 0.5 * (high + p);
        }
    }
}
