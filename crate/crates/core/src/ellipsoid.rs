//! Central-cut ellipsoid method for minimizing a convex function over the
//! non-negative orthant, given a subgradient oracle.
//!
//! The ellipsoid `{x : (x − c)ᵀ E⁻¹ (x − c) ≤ 1}` always contains a minimizer.
//! Each step keeps the half `{x : aᵀ(x − c) ≤ 0}` and replaces the ellipsoid by
//! the minimum-volume one covering it.

use nalgebra::{SMatrix, SVector};

#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidState<const D: usize> {
    pub center: SVector<f64, D>,
    pub shape: SMatrix<f64, D, D>,
    pub iteration: usize,
}

impl<const D: usize> EllipsoidState<D> {
    pub fn ball(center: SVector<f64, D>, radius: f64) -> Self {
        Self::axis_aligned(center, SVector::repeat(radius))
    }

    pub fn axis_aligned(center: SVector<f64, D>, radii: SVector<f64, D>) -> Self {
        Self {
            center,
            shape: SMatrix::from_diagonal(&radii.component_mul(&radii)),
            iteration: 0,
        }
    }

    pub fn is_positive_definite(&self) -> bool {
        self.shape.cholesky().is_some()
    }

    /// Determinant of the shape matrix via its Cholesky factor; zero when
    /// the matrix is not positive definite.
    pub fn determinant(&self) -> f64 {
        match self.shape.cholesky() {
            Some(c) => c.l_dirty().diagonal().iter().map(|d| d * d).product(),
            None => 0.0,
        }
    }

    /// `√(aᵀ E a)`: the largest decrease of the linear model `aᵀx` inside the
    /// ellipsoid.
    pub fn width(&self, a: &SVector<f64, D>) -> f64 {
        (a.transpose() * self.shape * a)[(0, 0)].max(0.0).sqrt()
    }

    /// Central cut keeping `{x : aᵀ(x − c) ≤ 0}`. Returns `false` (leaving the
    /// state untouched) when `a` has zero width in the current metric.
    pub fn cut(&mut self, a: &SVector<f64, D>) -> bool {
        let n = D as f64;
        let ea = self.shape * a;
        let denom = a.dot(&ea);
        if !(denom > 0.0) || !denom.is_finite() {
            return false;
        }
        let b = ea / denom.sqrt();
        self.center -= b / (n + 1.0);
        let scale = n * n / (n * n - 1.0);
        let mut next = (self.shape - b * b.transpose() * (2.0 / (n + 1.0))) * scale;
        // Re-symmetrize against rounding drift.
        next = (next + next.transpose()) * 0.5;
        self.shape = next;
        self.iteration += 1;
        true
    }

    /// Theoretical per-step determinant ratio `(n²/(n²−1))ⁿ (n−1)/(n+1)`.
    pub fn volume_ratio() -> f64 {
        let n = D as f64;
        (n * n / (n * n - 1.0)).powi(D as i32) * (n - 1.0) / (n + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipsoidConfig {
    pub max_iter: usize,
    /// Stop once `√(sᵀEs) ≤ rel_tol · (1 + |f|)`.
    pub rel_tol: f64,
}

impl Default for EllipsoidConfig {
    fn default() -> Self {
        Self {
            max_iter: 800,
            rel_tol: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EllipsoidOutcome<const D: usize> {
    pub best_point: SVector<f64, D>,
    pub best_value: f64,
    /// Total cuts performed, feasibility cuts included.
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    pub state: EllipsoidState<D>,
}

/// Minimizes a convex function over `x ≥ 0`. `oracle` sees the current
/// ellipsoid and returns the value and a subgradient at its (non-negative)
/// center.
pub fn minimize_nonneg<const D: usize>(
    mut state: EllipsoidState<D>,
    cfg: &EllipsoidConfig,
    mut oracle: impl FnMut(&EllipsoidState<D>) -> (f64, SVector<f64, D>),
) -> EllipsoidOutcome<D> {
    let mut best_point = state.center.map(|v| v.max(0.0));
    let mut best_value = f64::INFINITY;
    let mut evaluations = 0;
    let mut converged = false;

    while state.iteration < cfg.max_iter {
        if let Some(i) = state.center.iter().position(|&v| v < 0.0) {
            let mut a = SVector::<f64, D>::zeros();
            a[i] = -1.0;
            if !state.cut(&a) {
                break;
            }
            continue;
        }
        let (value, sub) = oracle(&state);
        evaluations += 1;
        if value < best_value {
            best_value = value;
            best_point = state.center;
        }
        let width = state.width(&sub);
        if width <= cfg.rel_tol * (1.0 + value.abs()) {
            converged = true;
            break;
        }
        if !state.cut(&sub) {
            converged = true;
            break;
        }
    }
    if evaluations == 0 {
        let probe = EllipsoidState {
            center: best_point,
            ..state.clone()
        };
        best_value = oracle(&probe).0;
        evaluations = 1;
    }
    EllipsoidOutcome {
        best_point,
        best_value,
        iterations: state.iteration,
        evaluations,
        converged,
        state,
    }
}
