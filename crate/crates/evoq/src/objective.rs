//! The uniform evaluation interface consumed by every optimizer.

/// A minimization target: a search box plus an evaluation function.
///
/// `evaluate` takes `&mut self` so that objectives with internal state
/// (e.g. a measurement-noise stream or a scratch buffer) fit behind the
/// same interface. Pure objectives simply ignore the mutability. Lower
/// values are better throughout the crate.
pub trait Objective: Send {
    fn dimension(&self) -> usize;
    /// Per-coordinate `[low, high]` search bounds.
    fn bounds(&self) -> &[(f64, f64)];
    fn evaluate(&mut self, x: &[f64]) -> f64;
}

/// Adapter turning a closure into an [`Objective`] with a symmetric box.
pub struct FnObjective<F> {
    bounds: Vec<(f64, f64)>,
    f: F,
}

impl<F: FnMut(&[f64]) -> f64 + Send> FnObjective<F> {
    pub fn new(dimension: usize, half_width: f64, f: F) -> Self {
        FnObjective {
            bounds: vec![(-half_width, half_width); dimension],
            f,
        }
    }
}

impl<F: FnMut(&[f64]) -> f64 + Send> Objective for FnObjective<F> {
    fn dimension(&self) -> usize {
        self.bounds.len()
    }

    fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    fn evaluate(&mut self, x: &[f64]) -> f64 {
        (self.f)(x)
    }
}

/// The sphere function; a convex smoke-test objective.
pub fn sphere(dimension: usize, half_width: f64) -> FnObjective<fn(&[f64]) -> f64> {
    fn sum_sq(x: &[f64]) -> f64 {
        x.iter().map(|v| v * v).sum()
    }
    FnObjective::new(dimension, half_width, sum_sq)
}
