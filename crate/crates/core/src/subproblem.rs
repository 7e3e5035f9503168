//! Per-subcarrier maximization of the Lagrangian over the power box
//! `[0, p̄] × [0, q̄]` for fixed multipliers.
//!
//! The box splits at the secrecy threshold `A`:
//!
//! * `q ≥ A` (positive secrecy): `L` is concave in `p` for fixed `q` and
//!   concave in `q` for fixed `p`, but not jointly. The sign pattern of
//!   `f1 = ∂L/∂p` at the corners `(0, A)`, `(0, q̄)`, `(p̄, A)`, `(p̄, q̄)`
//!   selects one of Cases I, II-i/ii/iii and III-i/ii. Each case reduces to a
//!   handful of one-dimensional problems whose best candidate is returned.
//! * `q < A` (zero secrecy): `L` is linear, so the optimum sits at a corner.
//!
//! [`ScSolver::solve_sc`] compares the two branches.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::model::{f1, f2, sc_lagrangian, DualPoint, ScSnapshot, Threshold};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Branch {
    PositiveSecrecy,
    ZeroSecrecy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScSolution {
    pub p: f64,
    pub q: f64,
    /// Lagrangian value at `(p, q)`.
    pub value: f64,
    pub branch: Branch,
    pub case_label: &'static str,
}

/// Which top-level case the corner signs of `f1(0, ·)` select.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PositiveCase {
    /// `f1(0, q̄) ≤ 0`: transmit power is never worth it.
    I,
    /// `f1(0, A) ≥ 0`.
    II,
    /// `f1(0, A) < 0 < f1(0, q̄)`.
    III,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubproblemConfig {
    /// Uniform scan resolution of the profile search in [`ScSolver::joint_root`].
    pub scan_points: usize,
    pub golden_iters: usize,
    pub bisect_max_iter: usize,
    /// Bisection stops once the bracket is below `rel_tol` times the peak.
    pub rel_tol: f64,
}

impl Default for SubproblemConfig {
    fn default() -> Self {
        Self {
            scan_points: 256,
            golden_iters: 48,
            bisect_max_iter: 200,
            rel_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScSolver {
    pub peak_p: f64,
    pub peak_q: f64,
    pub cfg: SubproblemConfig,
}

/// Root of a monotone function on `[lo, hi]` with a known sign change.
fn bisect(mut lo: f64, mut hi: f64, increasing: bool, tol: f64, max_iter: usize, f: impl Fn(f64) -> f64) -> f64 {
    for _ in 0..max_iter {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let v = f(mid);
        if (v < 0.0) == increasing {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for the maximum of `f` on `[a, b]`; returns the best
/// abscissa visited together with its value.
pub(crate) fn golden_max(mut a: f64, mut b: f64, iters: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut v1 = f(x1);
    let mut v2 = f(x2);
    for _ in 0..iters {
        if v1 < v2 {
            a = x1;
            x1 = x2;
            v1 = v2;
            x2 = a + INV_PHI * (b - a);
            v2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            v2 = v1;
            x1 = b - INV_PHI * (b - a);
            v1 = f(x1);
        }
    }
    if v1 >= v2 {
        (x1, v1)
    } else {
        (x2, v2)
    }
}

/// Uniform scan followed by golden-section refinement around the best grid
/// point. Returns `(x, f(x))`.
pub(crate) fn scan_refine_max(lo: f64, hi: f64, points: usize, golden_iters: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    if hi <= lo || points < 2 {
        return (lo, f(lo));
    }
    let step = (hi - lo) / (points - 1) as f64;
    let at = |k: usize| if k + 1 == points { hi } else { lo + step * k as f64 };
    let (mut best_k, mut best_v) = (0, f64::NEG_INFINITY);
    for k in 0..points {
        let v = f(at(k));
        if v > best_v {
            best_k = k;
            best_v = v;
        }
    }
    let a = at(best_k.saturating_sub(1));
    let b = at((best_k + 1).min(points - 1));
    let (x, v) = golden_max(a, b, golden_iters, &f);
    if v > best_v {
        (x, v)
    } else {
        (at(best_k), best_v)
    }
}

impl ScSolver {
    pub fn new(peak_p: f64, peak_q: f64) -> Self {
        Self {
            peak_p,
            peak_q,
            cfg: SubproblemConfig::default(),
        }
    }

    pub fn with_config(mut self, cfg: SubproblemConfig) -> Self {
        self.cfg = cfg;
        self
    }

    fn tol_p(&self) -> f64 {
        self.peak_p * self.cfg.rel_tol
    }

    fn tol_q(&self) -> f64 {
        self.peak_q * self.cfg.rel_tol
    }

    fn check_interval(lo: f64, hi: f64) -> Result<()> {
        if lo > hi || lo.is_nan() || hi.is_nan() {
            return Err(Error::InvalidInterval { lo, hi });
        }
        Ok(())
    }

    /// Root in `q` of `f2(p, ·)` (decreasing) on `[lo, hi]`. Without a sign
    /// change the endpoint the gradient points to is returned, ties going to
    /// `lo`.
    pub fn chi_q_of_f2(&self, p: f64, sc: &ScSnapshot, nu: &DualPoint, lo: f64, hi: f64) -> Result<f64> {
        Self::check_interval(lo, hi)?;
        if f2(p, lo, sc, nu) <= 0.0 {
            return Ok(lo);
        }
        if f2(p, hi, sc, nu) >= 0.0 {
            return Ok(hi);
        }
        Ok(bisect(lo, hi, false, self.tol_q(), self.cfg.bisect_max_iter, |q| f2(p, q, sc, nu)))
    }

    /// Root in `q` of `f1(p, ·)` (increasing) on `[lo, hi]`: `lo` when `f1` is
    /// already non-negative there, `hi` when `f1(p, hi) ≤ 0`.
    pub fn chi_q_of_f1(&self, p: f64, sc: &ScSnapshot, nu: &DualPoint, lo: f64, hi: f64) -> Result<f64> {
        Self::check_interval(lo, hi)?;
        if f1(p, lo, sc, nu) >= 0.0 {
            return Ok(lo);
        }
        if f1(p, hi, sc, nu) <= 0.0 {
            return Ok(hi);
        }
        Ok(bisect(lo, hi, true, self.tol_q(), self.cfg.bisect_max_iter, |q| f1(p, q, sc, nu)))
    }

    /// Root in `p` of `f1(·, q)` (decreasing) on `[0, p̄]`, clamped to the box.
    pub fn chi_p_of_f1(&self, q: f64, sc: &ScSnapshot, nu: &DualPoint) -> f64 {
        if f1(0.0, q, sc, nu) <= 0.0 {
            return 0.0;
        }
        if f1(self.peak_p, q, sc, nu) >= 0.0 {
            return self.peak_p;
        }
        bisect(0.0, self.peak_p, false, self.tol_p(), self.cfg.bisect_max_iter, |p| f1(p, q, sc, nu))
    }

    /// Same point as [`Self::chi_p_of_f1`] for `q ≥ A`, from the quadratic the
    /// stationarity condition reduces to. This is the inner loop of the
    /// profile search.
    pub fn stationary_p(&self, q: f64, sc: &ScSnapshot, nu: &DualPoint) -> f64 {
        // f1 = D / (ln2 (σ² + p h_i)(c + p h_e)) − k
        let k = nu.lambda - nu.beta * sc.h_j - nu.mu * sc.h_e;
        if k <= 0.0 {
            return self.peak_p;
        }
        let s2 = sc.noise_w;
        let c = s2 + q * sc.g_e;
        let d = sc.h_i * c - sc.h_e * s2;
        if d <= 0.0 {
            return 0.0;
        }
        let c0 = s2 * c - d / (k * LN_2);
        if c0 >= 0.0 {
            return 0.0;
        }
        let a = sc.h_i * sc.h_e;
        let b = s2 * sc.h_e + c * sc.h_i;
        let p = -2.0 * c0 / (b + (b * b - 4.0 * a * c0).sqrt());
        p.clamp(0.0, self.peak_p)
    }

    /// Best `(p, q)` on `q ∈ [q_lo, q_hi] ⊂ [A, q̄]` when `p` follows its
    /// stationary point. The one-dimensional profile need not be concave, so
    /// it is scanned before being refined.
    pub fn joint_root(&self, sc: &ScSnapshot, nu: &DualPoint, q_lo: f64, q_hi: f64) -> Result<(f64, f64)> {
        Self::check_interval(q_lo, q_hi)?;
        let profile = |q: f64| sc_lagrangian(self.stationary_p(q, sc, nu), q, sc, nu);
        let (q, _) = scan_refine_max(q_lo, q_hi, self.cfg.scan_points, self.cfg.golden_iters, profile);
        Ok((self.stationary_p(q, sc, nu), q))
    }

    /// Top-level case on the positive branch; `None` when the branch is empty.
    pub fn positive_case(&self, sc: &ScSnapshot, nu: &DualPoint) -> Option<PositiveCase> {
        let a = sc.a_threshold.finite().filter(|a| *a <= self.peak_q)?;
        Some(if f1(0.0, self.peak_q, sc, nu) <= 0.0 {
            PositiveCase::I
        } else if f1(0.0, a, sc, nu) >= 0.0 {
            PositiveCase::II
        } else {
            PositiveCase::III
        })
    }

    fn candidate(&self, p: f64, q: f64, sc: &ScSnapshot, nu: &DualPoint, label: &'static str) -> ScSolution {
        ScSolution {
            p,
            q,
            value: sc_lagrangian(p, q, sc, nu),
            branch: Branch::PositiveSecrecy,
            case_label: label,
        }
    }

    /// Maximizer over `[0, p̄] × [A, q̄]`, or `None` when `A > q̄` or the
    /// subcarrier cannot carry secret information.
    pub fn solve_positive_branch(&self, sc: &ScSnapshot, nu: &DualPoint) -> Option<ScSolution> {
        let case = self.positive_case(sc, nu)?;
        let a = sc.a_threshold.finite()?;
        let (pb, qb) = (self.peak_p, self.peak_q);
        let linear_q = -nu.beta + nu.mu * sc.g_e;
        // Intervals below are all ordered by construction, so the chi_* calls
        // cannot fail.
        let best = |cands: &[ScSolution]| {
            *cands
                .iter()
                .max_by(|x, y| x.value.total_cmp(&y.value))
                .expect("non-empty candidate set")
        };
        let sol = match case {
            PositiveCase::I => {
                let q = if linear_q <= 0.0 { a } else { qb };
                self.candidate(0.0, q, sc, nu, "I")
            }
            PositiveCase::II => {
                if f1(pb, a, sc, nu) >= 0.0 {
                    let q = self.chi_q_of_f2(pb, sc, nu, a, qb).ok()?;
                    self.candidate(pb, q, sc, nu, "II-i")
                } else if f1(pb, qb, sc, nu) <= 0.0 {
                    let (p, q) = self.joint_root(sc, nu, a, qb).ok()?;
                    self.candidate(p, q, sc, nu, "II-ii")
                } else {
                    let q_switch = self.chi_q_of_f1(pb, sc, nu, a, qb).ok()?;
                    let (p1, q1) = self.joint_root(sc, nu, a, q_switch).ok()?;
                    let q2 = self.chi_q_of_f2(pb, sc, nu, q_switch, qb).ok()?;
                    best(&[
                        self.candidate(p1, q1, sc, nu, "II-iii/Region1"),
                        self.candidate(pb, q2, sc, nu, "II-iii/Region2"),
                    ])
                }
            }
            PositiveCase::III => {
                let q_zero = self.chi_q_of_f1(0.0, sc, nu, a, qb).ok()?;
                let q1 = if linear_q <= 0.0 { a } else { q_zero };
                if f1(pb, qb, sc, nu) <= 0.0 {
                    let (p2, q2) = self.joint_root(sc, nu, q_zero, qb).ok()?;
                    best(&[
                        self.candidate(0.0, q1, sc, nu, "III-i/Region1"),
                        self.candidate(p2, q2, sc, nu, "III-i/Region2"),
                    ])
                } else {
                    let q_peak = self.chi_q_of_f1(pb, sc, nu, q_zero, qb).ok()?;
                    let (p2, q2) = self.joint_root(sc, nu, q_zero, q_peak).ok()?;
                    let q3 = self.chi_q_of_f2(pb, sc, nu, q_peak, qb).ok()?;
                    best(&[
                        self.candidate(0.0, q1, sc, nu, "III-ii/Region1"),
                        self.candidate(p2, q2, sc, nu, "III-ii/Region2"),
                        self.candidate(pb, q3, sc, nu, "III-ii/Region3"),
                    ])
                }
            }
        };
        Some(sol)
    }

    /// Corner maximizer of the linear Lagrangian on `q < A`. Ties go to zero
    /// power. Degenerate subcarriers use `q̄` in place of `A`.
    pub fn solve_zero_branch(&self, sc: &ScSnapshot, nu: &DualPoint) -> Option<ScSolution> {
        let (q_cap, label) = match sc.a_threshold {
            Threshold::Unreachable => (self.peak_q, "zero/degenerate"),
            Threshold::Finite(a) if a > 0.0 => (a.min(self.peak_q), "zero"),
            Threshold::Finite(_) => return None,
        };
        let p = if -nu.lambda + nu.beta * sc.h_j + nu.mu * sc.h_e > 0.0 {
            self.peak_p
        } else {
            0.0
        };
        let q = if -nu.beta + nu.mu * sc.g_e > 0.0 { q_cap } else { 0.0 };
        Some(ScSolution {
            p,
            q,
            value: sc_lagrangian(p, q, sc, nu),
            branch: Branch::ZeroSecrecy,
            case_label: label,
        })
    }

    pub fn solve_sc(&self, sc: &ScSnapshot, nu: &DualPoint) -> ScSolution {
        match (self.solve_positive_branch(sc, nu), self.solve_zero_branch(sc, nu)) {
            (Some(pos), Some(zero)) => {
                if pos.value > zero.value {
                    pos
                } else {
                    zero
                }
            }
            (Some(s), None) | (None, Some(s)) => s,
            (None, None) => unreachable!("zero branch exists whenever the positive branch is empty"),
        }
    }
}
