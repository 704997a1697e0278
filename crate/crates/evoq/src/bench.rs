//! Shifted, rotated and scaled benchmark landscapes plus Gaussian-weighted
//! composition functions.
//!
//! A problem evaluates `base(M * (scale * (x - shift)))` and adds the
//! optimum value, so the global minimum of every problem sits exactly at
//! the shift vector. The Levy base attains its minimum at the all-ones
//! point rather than the origin, so problem evaluation recenters its
//! input accordingly (see [`BaseFunction::minimizer_coordinate`]).

use crate::error::{Error, Result};
use crate::linalg::{make_rotation, OrthogonalMatrix};
use crate::objective::Objective;
use crate::rng::{derive_seed, rng_from_seed};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Base function tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaseFunction {
    SchafferF3,
    Rastrigin,
    Levy,
}

impl BaseFunction {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "schaffer_f3" | "schaffer" => Ok(BaseFunction::SchafferF3),
            "rastrigin" => Ok(BaseFunction::Rastrigin),
            "levy" => Ok(BaseFunction::Levy),
            other => Err(Error::invalid_argument(format!(
                "unknown base function '{other}'"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            BaseFunction::SchafferF3 => "schaffer_f3",
            BaseFunction::Rastrigin => "rastrigin",
            BaseFunction::Levy => "levy",
        }
    }

    /// Conventional input scale for the transformed variant.
    pub fn default_scale(&self) -> f64 {
        match self {
            BaseFunction::SchafferF3 => 0.5 / 100.0,
            BaseFunction::Rastrigin => 5.12 / 100.0,
            BaseFunction::Levy => 5.12 / 100.0,
        }
    }

    pub fn min_dimension(&self) -> usize {
        match self {
            BaseFunction::SchafferF3 => 2,
            _ => 1,
        }
    }

    /// Coordinate value of the base function's global minimizer: the Levy
    /// base is minimal at the all-ones point, the others at the origin.
    pub fn minimizer_coordinate(&self) -> f64 {
        match self {
            BaseFunction::Levy => 1.0,
            _ => 0.0,
        }
    }

    /// Evaluates the untransformed base function.
    pub fn evaluate(&self, y: &[f64]) -> Result<f64> {
        if y.len() < self.min_dimension() {
            return Err(Error::invalid_argument(format!(
                "{} needs at least {} dimensions, got {}",
                self.name(),
                self.min_dimension(),
                y.len()
            )));
        }
        Ok(match self {
            BaseFunction::SchafferF3 => {
                // cyclic pair sum g(y1,y2) + ... + g(yD,y1)
                let d = y.len();
                (0..d).map(|i| schaffer_pair(y[i], y[(i + 1) % d])).sum()
            }
            BaseFunction::Rastrigin => y
                .iter()
                .map(|&v| v * v - 10.0 * (2.0 * PI * v).cos() + 10.0)
                .sum(),
            BaseFunction::Levy => {
                let w: Vec<f64> = y.iter().map(|&v| 1.0 + (v - 1.0) / 4.0).collect();
                let d = w.len();
                let mut total = (PI * w[0]).sin().powi(2);
                for &wi in &w[..d - 1] {
                    total += (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi - 1.0).sin().powi(2));
                }
                let wd = w[d - 1];
                total += (wd - 1.0).powi(2) * (1.0 + (2.0 * PI * wd).sin().powi(2));
                total
            }
        })
    }

    /// Floating-point residual of the base at its own minimizer (the
    /// Levy term sin²(π·w₁) is not exactly zero in f64 arithmetic).
    fn minimizer_residual(&self) -> f64 {
        match self {
            BaseFunction::Levy => {
                let s = PI.sin();
                s * s
            }
            _ => 0.0,
        }
    }

    /// Base value with the input recentered so the origin evaluates to
    /// exactly zero, as used by problem and composition evaluation.
    fn evaluate_recentered(&self, y: &[f64]) -> Result<f64> {
        let m = self.minimizer_coordinate();
        if m == 0.0 {
            self.evaluate(y)
        } else {
            let shifted: Vec<f64> = y.iter().map(|&v| v + m).collect();
            Ok(self.evaluate(&shifted)? - self.minimizer_residual())
        }
    }
}

fn schaffer_pair(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let s = r2.sqrt().sin();
    0.5 + (s * s - 0.5) / (1.0 + 0.001 * r2).powi(2)
}

/// One shifted, rotated, scaled base function.
#[derive(Debug, Clone)]
pub struct BenchmarkProblem {
    base: BaseFunction,
    shift: Vec<f64>,
    rotation: OrthogonalMatrix,
    input_scale: f64,
    optimum_value: f64,
    bounds: Vec<(f64, f64)>,
}

impl BenchmarkProblem {
    pub fn new(
        base: BaseFunction,
        shift: Vec<f64>,
        rotation: OrthogonalMatrix,
        input_scale: f64,
        optimum_value: f64,
        bounds: (f64, f64),
    ) -> Result<Self> {
        let dimension = shift.len();
        if dimension < base.min_dimension() {
            return Err(Error::invalid_argument(format!(
                "{} needs dimension >= {}",
                base.name(),
                base.min_dimension()
            )));
        }
        if rotation.dim() != dimension {
            return Err(Error::invalid_argument("rotation dimension mismatch"));
        }
        if !(input_scale > 0.0) {
            return Err(Error::invalid_argument("input_scale must be positive"));
        }
        if !(bounds.0 < bounds.1) {
            return Err(Error::invalid_argument("bounds must satisfy low < high"));
        }
        if shift.iter().any(|&s| s <= bounds.0 || s >= bounds.1) {
            return Err(Error::invalid_argument(
                "shift must lie strictly inside the bounds",
            ));
        }
        Ok(BenchmarkProblem {
            base,
            shift,
            rotation,
            input_scale,
            optimum_value,
            bounds: vec![bounds; dimension],
        })
    }

    pub fn base(&self) -> BaseFunction {
        self.base
    }

    pub fn dimension(&self) -> usize {
        self.shift.len()
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    pub fn optimum_value(&self) -> f64 {
        self.optimum_value
    }

    /// y = M * (scale * (x - shift))
    pub fn transform_input(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dimension() {
            return Err(Error::invalid_argument(format!(
                "expected {} coordinates, got {}",
                self.dimension(),
                x.len()
            )));
        }
        let scaled: Vec<f64> = x
            .iter()
            .zip(&self.shift)
            .map(|(&xi, &oi)| self.input_scale * (xi - oi))
            .collect();
        Ok(self.rotation.apply(&scaled))
    }

    /// base(transform(x)) + optimum_value, with the base recentered so
    /// that evaluate(shift) == optimum_value exactly.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let y = self.transform_input(x)?;
        Ok(self.base.evaluate_recentered(&y)? + self.optimum_value)
    }
}

impl Objective for BenchmarkProblem {
    fn dimension(&self) -> usize {
        self.shift.len()
    }

    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn evaluate(&mut self, x: &[f64]) -> f64 {
        BenchmarkProblem::evaluate(self, x).expect("dimension checked by caller")
    }
}

/// One component of a composition landscape.
#[derive(Debug, Clone)]
pub struct CompositionComponent {
    pub base: BaseFunction,
    pub shift: Vec<f64>,
    pub rotation: OrthogonalMatrix,
    pub sigma: f64,
    pub lambda: f64,
    pub bias: f64,
}

/// Gaussian-distance-weighted blend of several rotated base functions.
#[derive(Debug, Clone)]
pub struct CompositionProblem {
    components: Vec<CompositionComponent>,
    optimum_value: f64,
    bounds: Vec<(f64, f64)>,
}

impl CompositionProblem {
    pub fn new(
        components: Vec<CompositionComponent>,
        optimum_value: f64,
        bounds: (f64, f64),
    ) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::invalid_argument(
                "composition needs at least one component",
            ));
        }
        let dimension = components[0].shift.len();
        for c in &components {
            if c.shift.len() != dimension || c.rotation.dim() != dimension {
                return Err(Error::invalid_argument(
                    "composition components must share one dimension",
                ));
            }
            if !(c.sigma > 0.0) {
                return Err(Error::invalid_argument("sigma must be positive"));
            }
            if !(c.lambda > 0.0) {
                return Err(Error::invalid_argument("lambda must be positive"));
            }
        }
        for i in 0..components.len() {
            for j in i + 1..components.len() {
                if components[i].shift == components[j].shift {
                    return Err(Error::invalid_argument(
                        "component shifts must be pairwise distinct",
                    ));
                }
            }
        }
        Ok(CompositionProblem {
            components,
            optimum_value,
            bounds: vec![bounds; dimension],
        })
    }

    pub fn dimension(&self) -> usize {
        self.components[0].shift.len()
    }

    pub fn components(&self) -> &[CompositionComponent] {
        &self.components
    }

    /// Normalized Gaussian coverage weights; they sum to one.
    ///
    /// If every raw weight underflows to zero the nearest component (by
    /// shift distance, lowest index on ties) receives full weight, which
    /// is the continuity limit.
    pub fn weights(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dimension() {
            return Err(Error::invalid_argument("dimension mismatch"));
        }
        let dist_sq: Vec<f64> = self
            .components
            .iter()
            .map(|c| {
                x.iter()
                    .zip(&c.shift)
                    .map(|(&xi, &oi)| (xi - oi) * (xi - oi))
                    .sum()
            })
            .collect();
        let mut raw: Vec<f64> = self
            .components
            .iter()
            .zip(&dist_sq)
            .map(|(c, &d2)| {
                (-d2 / (2.0 * c.sigma * c.sigma)).exp() / (c.sigma * (2.0 * PI).sqrt())
            })
            .collect();
        let total: f64 = raw.iter().sum();
        if total <= 0.0 || !total.is_finite() {
            let nearest = dist_sq
                .iter()
                .enumerate()
                .min_by(|(_, a), (_, b)| a.partial_cmp(b).unwrap())
                .map(|(i, _)| i)
                .unwrap();
            raw.iter_mut().for_each(|w| *w = 0.0);
            raw[nearest] = 1.0;
            return Ok(raw);
        }
        raw.iter_mut().for_each(|w| *w /= total);
        Ok(raw)
    }

    /// Sum over components of weight * (lambda * g_i + bias) plus the
    /// optimum value, each g_i evaluated through its own rotation.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        let weights = self.weights(x)?;
        let mut total = 0.0;
        for (c, &w) in self.components.iter().zip(&weights) {
            if w == 0.0 {
                continue;
            }
            let centered: Vec<f64> = x.iter().zip(&c.shift).map(|(&xi, &oi)| xi - oi).collect();
            let rotated = c.rotation.apply(&centered);
            let g = c.base.evaluate_recentered(&rotated)?;
            total += w * (c.lambda * g + c.bias);
        }
        Ok(total + self.optimum_value)
    }
}

impl Objective for CompositionProblem {
    fn dimension(&self) -> usize {
        CompositionProblem::dimension(self)
    }

    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn evaluate(&mut self, x: &[f64]) -> f64 {
        CompositionProblem::evaluate(self, x).expect("dimension checked by caller")
    }
}

/// JSON-facing description of one benchmark problem.
///
/// Omitted `shift` is drawn uniformly from the inner 80% of the box so
/// it lies strictly inside the bounds; the rotation always comes from
/// the seed. The same config therefore always builds the same problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub base: BaseFunction,
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub scale: Option<f64>,
    #[serde(default)]
    pub shift: Option<Vec<f64>>,
    #[serde(default)]
    pub optimum_value: f64,
    #[serde(default = "default_bounds")]
    pub bounds: (f64, f64),
}

fn default_bounds() -> (f64, f64) {
    (-100.0, 100.0)
}

impl ProblemConfig {
    pub fn build(&self) -> Result<BenchmarkProblem> {
        let rotation = make_rotation(self.dimension, derive_seed(self.seed, 0))?;
        let shift = match &self.shift {
            Some(s) => {
                if s.len() != self.dimension {
                    return Err(Error::Config("shift length != dimension".into()));
                }
                s.clone()
            }
            None => random_shift(self.dimension, self.seed, self.bounds),
        };
        BenchmarkProblem::new(
            self.base,
            shift,
            rotation,
            self.scale.unwrap_or_else(|| self.base.default_scale()),
            self.optimum_value,
            self.bounds,
        )
    }
}

/// JSON-facing description of a composition landscape.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CompositionConfig {
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    pub components: Vec<ComponentConfig>,
    #[serde(default)]
    pub optimum_value: f64,
    #[serde(default = "default_bounds")]
    pub bounds: (f64, f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComponentConfig {
    pub base: BaseFunction,
    pub sigma: f64,
    pub lambda: f64,
    pub bias: f64,
    #[serde(default)]
    pub shift: Option<Vec<f64>>,
}

impl CompositionConfig {
    pub fn build(&self) -> Result<CompositionProblem> {
        let components = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let stream = 2 * i as u64;
                let rotation =
                    make_rotation(self.dimension, derive_seed(self.seed, stream + 2))?;
                let shift = match &c.shift {
                    Some(s) => s.clone(),
                    None => random_shift(
                        self.dimension,
                        derive_seed(self.seed, stream + 3),
                        self.bounds,
                    ),
                };
                Ok(CompositionComponent {
                    base: c.base,
                    shift,
                    rotation,
                    sigma: c.sigma,
                    lambda: c.lambda,
                    bias: c.bias,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        CompositionProblem::new(components, self.optimum_value, self.bounds)
    }
}

fn random_shift(dimension: usize, seed: u64, bounds: (f64, f64)) -> Vec<f64> {
    let mut rng = rng_from_seed(derive_seed(seed, 1));
    let center = 0.5 * (bounds.0 + bounds.1);
    let half = 0.4 * (bounds.1 - bounds.0);
    (0..dimension)
        .map(|_| center + rng.random_range(-half..half))
        .collect()
}
