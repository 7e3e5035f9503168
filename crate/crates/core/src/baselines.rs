//! Comparison schemes: equal power allocation, no jammer, and a jammer whose
//! signal the IR cannot cancel (solved by block-coordinate descent).
//!
//! The last two reuse the dual machinery of [`crate::dual`], but their
//! per-subcarrier problems lack the structure the proposed solver exploits, so
//! each inner maximization is a one-dimensional scan with golden-section
//! refinement.

use std::f64::consts::LN_2;
use std::fmt;
use std::str::FromStr;

use nalgebra::SVector;

use crate::dual::{dual_ball, max_harvest_allocation, repair_in_place};
use crate::ellipsoid::{minimize_nonneg, EllipsoidConfig};
use crate::error::Result;
use crate::model::{constraint_slacks, ChannelState, PowerAllocation, SystemParams};
use crate::subproblem::golden_max;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Proposed,
    Epa,
    NoJammer,
    NoCancelBcd,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Proposed, Scheme::Epa, Scheme::NoJammer, Scheme::NoCancelBcd];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::Epa => "epa",
            Scheme::NoJammer => "nojammer",
            Scheme::NoCancelBcd => "nocancel",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown scheme `{s}` (expected proposed|epa|nojammer|nocancel)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BaselineResult {
    pub scheme: Scheme,
    /// Scored with the scheme's own rate model.
    pub allocation: PowerAllocation,
    /// Ellipsoid iterations (no-jammer) or completed rounds (BCD).
    pub iterations: usize,
    /// BCD objective after initialization and after each round.
    pub objective_trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineConfig {
    pub ellipsoid: EllipsoidConfig,
    pub scan_points: usize,
    pub golden_iters: usize,
    pub bcd_max_rounds: usize,
    /// BCD stops once a round improves the objective by less than this.
    pub bcd_tol: f64,
    /// Also run BCD from the equal-power allocation and keep the better end
    /// point. The no-jammer start alone tends to stall with the transmit
    /// power parked on the few subcarriers that are secure without jamming.
    pub bcd_equal_power_start: bool,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self {
            ellipsoid: EllipsoidConfig::default(),
            scan_points: 256,
            golden_iters: 48,
            bcd_max_rounds: 50,
            bcd_tol: 1e-5,
            bcd_equal_power_start: true,
        }
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// Per-subcarrier secrecy rate when the IR cannot cancel the jamming.
pub fn nocancel_sc_rate(p: f64, q: f64, ch: &ChannelState, n: usize, noise: f64) -> f64 {
    let r = log2_1p(p * ch.h_i[n] / (noise + q * ch.g_i[n]));
    let r_e = log2_1p(p * ch.h_e[n] / (noise + q * ch.g_e[n]));
    (r - r_e).max(0.0)
}

pub fn nocancel_rate(p: &[f64], q: &[f64], ch: &ChannelState, params: &SystemParams) -> f64 {
    (0..p.len())
        .map(|n| nocancel_sc_rate(p[n], q[n], ch, n, params.noise_w))
        .sum()
}

fn scored(p: Vec<f64>, q: Vec<f64>, rate: f64, ch: &ChannelState, params: &SystemParams) -> Result<PowerAllocation> {
    let mut alloc = PowerAllocation::evaluate(p, q, ch, params)?;
    alloc.secrecy_rate = rate;
    Ok(alloc)
}

pub fn epa_allocate(ch: &ChannelState, params: &SystemParams) -> Result<BaselineResult> {
    ch.check_len(params.n_sc)?;
    let n = params.n_sc as f64;
    let p = vec![(params.total_power_w / n).min(params.peak_p_w); params.n_sc];
    let budget = params.zeta * p.iter().zip(&ch.h_j).map(|(p, h)| p * h).sum::<f64>();
    let q = vec![(budget / n).min(params.peak_q_w); params.n_sc];
    Ok(BaselineResult {
        scheme: Scheme::Epa,
        allocation: PowerAllocation::evaluate(p, q, ch, params)?,
        iterations: 0,
        objective_trace: Vec::new(),
    })
}

/// `max Σ_n r_n(x_n) + Σ_n x_n a_nᵀν + bᵀν` over `x ∈ [0, x_max]^N`, for a
/// family of one-dimensional rates `r_n`. The dual of every baseline block has
/// this shape; its subgradient is `Σ x_n a_n + b`.
struct SeparableDual<'a, const D: usize, F: Fn(usize, f64) -> f64> {
    rate: F,
    coef: &'a [SVector<f64, D>],
    constant: SVector<f64, D>,
    x_max: f64,
    grid: Vec<f64>,
    /// `rate(n, grid[k])`, cached because only the linear part moves with ν.
    table: Vec<Vec<f64>>,
    golden_iters: usize,
}

impl<'a, const D: usize, F: Fn(usize, f64) -> f64> SeparableDual<'a, D, F> {
    fn new(rate: F, coef: &'a [SVector<f64, D>], constant: SVector<f64, D>, x_max: f64, cfg: &BaselineConfig) -> Self {
        let pts = cfg.scan_points.max(2);
        let grid: Vec<f64> = (0..pts)
            .map(|k| if k + 1 == pts { x_max } else { x_max * k as f64 / (pts - 1) as f64 })
            .collect();
        let table = (0..coef.len())
            .map(|n| grid.iter().map(|&x| rate(n, x)).collect())
            .collect();
        Self {
            rate,
            coef,
            constant,
            x_max,
            grid,
            table,
            golden_iters: cfg.golden_iters,
        }
    }

    fn argmax(&self, n: usize, slope: f64) -> (f64, f64) {
        let row = &self.table[n];
        let (mut best_k, mut best_v) = (0, f64::NEG_INFINITY);
        for (k, (&x, &r)) in self.grid.iter().zip(row).enumerate() {
            let v = r + slope * x;
            if v > best_v {
                best_k = k;
                best_v = v;
            }
        }
        let last = self.grid.len() - 1;
        let lo = self.grid[best_k.saturating_sub(1)];
        let hi = self.grid[(best_k + 1).min(last)];
        let (x, v) = golden_max(lo, hi, self.golden_iters, |x| (self.rate)(n, x) + slope * x);
        if v > best_v {
            (x.clamp(0.0, self.x_max), v)
        } else {
            (self.grid[best_k], best_v)
        }
    }

    fn eval(&self, nu: &SVector<f64, D>) -> (f64, SVector<f64, D>, Vec<f64>) {
        let mut value = self.constant.dot(nu);
        let mut sub = self.constant;
        let mut xs = Vec::with_capacity(self.coef.len());
        for (n, a) in self.coef.iter().enumerate() {
            let (x, v) = self.argmax(n, a.dot(nu));
            value += v;
            sub += a * x;
            xs.push(x);
        }
        (value, sub, xs)
    }
}

fn dual_radius(ch: &ChannelState, params: &SystemParams) -> f64 {
    10.0 * ch.max_gain() / (params.noise_w * LN_2)
}

/// Runs the ellipsoid method on a separable dual and returns the best feasible
/// candidate produced by `repair` along the way, plus the iteration count.
fn solve_block<const D: usize, F: Fn(usize, f64) -> f64>(
    block: &SeparableDual<'_, D, F>,
    radius: f64,
    cfg: &EllipsoidConfig,
    mut repair: impl FnMut(&[f64]) -> Option<(PowerAllocation, f64)>,
) -> (Option<(PowerAllocation, f64)>, usize) {
    let mut best: Option<(PowerAllocation, f64)> = None;
    let outcome = minimize_nonneg(dual_ball::<D>(radius), cfg, |st| {
        let (value, sub, xs) = block.eval(&st.center);
        if let Some((alloc, obj)) = repair(&xs) {
            if best.as_ref().is_none_or(|b| obj > b.1) {
                best = Some((alloc, obj));
            }
        }
        (value, sub)
    });
    (best, outcome.iterations)
}

fn nojammer_sc_rate(p: f64, ch: &ChannelState, n: usize, noise: f64) -> f64 {
    (log2_1p(p * ch.h_i[n] / noise) - log2_1p(p * ch.h_e[n] / noise)).max(0.0)
}

fn nojammer_marginal(p: f64, ch: &ChannelState, n: usize, noise: f64) -> f64 {
    if ch.h_i[n] <= ch.h_e[n] {
        return 0.0;
    }
    (ch.h_i[n] / (noise + p * ch.h_i[n]) - ch.h_e[n] / (noise + p * ch.h_e[n])) / LN_2
}

fn nocancel_marginal_p(p: f64, q: f64, ch: &ChannelState, n: usize, noise: f64) -> f64 {
    if nocancel_sc_rate(p, q, ch, n, noise) <= 0.0 {
        return 0.0;
    }
    let ci = noise + q * ch.g_i[n];
    let ce = noise + q * ch.g_e[n];
    (ch.h_i[n] / (ci + p * ch.h_i[n]) - ch.h_e[n] / (ce + p * ch.h_e[n])).max(0.0) / LN_2
}

fn infeasible_result(scheme: Scheme, ch: &ChannelState, params: &SystemParams, allow_jamming: bool) -> Result<BaselineResult> {
    let (p, q, _) = max_harvest_allocation(ch, params, allow_jamming);
    let rate = match scheme {
        Scheme::NoCancelBcd => nocancel_rate(&p, &q, ch, params),
        _ => crate::model::secrecy_rate_cancel(&p, &q, ch, params)?,
    };
    Ok(BaselineResult {
        scheme,
        allocation: scored(p, q, rate, ch, params)?,
        iterations: 0,
        objective_trace: Vec::new(),
    })
}

pub fn no_jammer_solve(ch: &ChannelState, params: &SystemParams) -> Result<BaselineResult> {
    no_jammer_solve_with(ch, params, &BaselineConfig::default())
}

pub fn no_jammer_solve_with(ch: &ChannelState, params: &SystemParams, cfg: &BaselineConfig) -> Result<BaselineResult> {
    params.validate()?;
    ch.check_len(params.n_sc)?;
    let n = params.n_sc;
    let noise = params.noise_w;
    let max_harvest: f64 = {
        let (_, _, h) = max_harvest_allocation(ch, params, false);
        h
    };
    if max_harvest < params.eh_min_w * (1.0 - 1e-12) {
        return infeasible_result(Scheme::NoJammer, ch, params, false);
    }
    // ν = (λ, μ)
    let coef: Vec<SVector<f64, 2>> = (0..n).map(|k| SVector::from([-1.0, ch.h_e[k]])).collect();
    let constant = SVector::from([params.total_power_w, -params.eh_min_w]);
    let block = SeparableDual::new(|k, p| nojammer_sc_rate(p, ch, k, noise), &coef, constant, params.peak_p_w, cfg);
    let zeros = vec![0.0; n];
    let (best, iterations) = solve_block(&block, dual_radius(ch, params), &cfg.ellipsoid, |xs| {
        let mut p = xs.to_vec();
        let mut q = zeros.clone();
        repair_in_place(&mut p, &mut q, ch, params, false, |k, pk, _| nojammer_marginal(pk, ch, k, noise));
        let rate: f64 = (0..n).map(|k| nojammer_sc_rate(p[k], ch, k, noise)).sum();
        let alloc = scored(p, q, rate, ch, params).ok()?;
        alloc.feasible.then_some((alloc, rate))
    });
    let allocation = match best {
        Some((a, _)) => a,
        None => return infeasible_result(Scheme::NoJammer, ch, params, false),
    };
    Ok(BaselineResult {
        scheme: Scheme::NoJammer,
        allocation,
        iterations,
        objective_trace: Vec::new(),
    })
}

struct BcdRun {
    p: Vec<f64>,
    q: Vec<f64>,
    obj: f64,
    trace: Vec<f64>,
    rounds: usize,
}

/// Alternating block updates from a feasible `(p, q)`.
fn bcd_rounds(mut p: Vec<f64>, mut q: Vec<f64>, ch: &ChannelState, params: &SystemParams, cfg: &BaselineConfig) -> BcdRun {
    let n = params.n_sc;
    let noise = params.noise_w;
    let mut obj = nocancel_rate(&p, &q, ch, params);
    let mut trace = vec![obj];
    let radius = dual_radius(ch, params);
    let mut rounds = 0;

    let feasible_candidate = |p: Vec<f64>, q: Vec<f64>| -> Option<(PowerAllocation, f64)> {
        let mut p = p;
        let mut q = q;
        repair_in_place(&mut p, &mut q, ch, params, true, |k, pk, qk| {
            nocancel_marginal_p(pk, qk, ch, k, noise)
        });
        let rate = nocancel_rate(&p, &q, ch, params);
        let alloc = scored(p, q, rate, ch, params).ok()?;
        alloc.feasible.then_some((alloc, rate))
    };

    for _ in 0..cfg.bcd_max_rounds {
        let before = obj;

        // Transmit powers, jamming fixed. ν = (λ, β, μ).
        {
            let sum_q: f64 = q.iter().sum();
            let jam_harvest: f64 = q.iter().zip(&ch.g_e).map(|(q, g)| q * g).sum();
            let coef: Vec<SVector<f64, 3>> = (0..n)
                .map(|k| SVector::from([-1.0, params.zeta * ch.h_j[k], ch.h_e[k]]))
                .collect();
            let constant = SVector::from([params.total_power_w, -sum_q, jam_harvest - params.eh_min_w]);
            let q_fixed = q.clone();
            let block = SeparableDual::new(
                |k, x| nocancel_sc_rate(x, q_fixed[k], ch, k, noise),
                &coef,
                constant,
                params.peak_p_w,
                cfg,
            );
            let (best, _) = solve_block(&block, radius, &cfg.ellipsoid, |xs| {
                feasible_candidate(xs.to_vec(), q_fixed.clone())
            });
            if let Some((alloc, val)) = best {
                if val > obj {
                    obj = val;
                    p = alloc.p;
                    q = alloc.q;
                }
            }
        }

        // Jamming, transmit powers fixed. ν = (β, μ).
        {
            let budget = params.zeta * p.iter().zip(&ch.h_j).map(|(p, h)| p * h).sum::<f64>();
            let tx_harvest: f64 = p.iter().zip(&ch.h_e).map(|(p, h)| p * h).sum();
            let coef: Vec<SVector<f64, 2>> = (0..n).map(|k| SVector::from([-1.0, ch.g_e[k]])).collect();
            let constant = SVector::from([budget, tx_harvest - params.eh_min_w]);
            let p_fixed = p.clone();
            let block = SeparableDual::new(
                |k, x| nocancel_sc_rate(p_fixed[k], x, ch, k, noise),
                &coef,
                constant,
                // No single jammer power can exceed the whole budget.
                params.peak_q_w.min(budget),
                cfg,
            );
            let (best, _) = solve_block(&block, radius, &cfg.ellipsoid, |xs| {
                feasible_candidate(p_fixed.clone(), xs.to_vec())
            });
            if let Some((alloc, val)) = best {
                if val > obj {
                    obj = val;
                    p = alloc.p;
                    q = alloc.q;
                }
            }
        }

        rounds += 1;
        trace.push(obj);
        if obj - before < cfg.bcd_tol {
            break;
        }
    }

    BcdRun { p, q, obj, trace, rounds }
}

/// Block-coordinate descent for the no-cancellation model: alternately
/// re-optimizes the transmit powers with the jamming fixed and the jamming
/// with the transmit powers fixed. A block result is kept only when it is
/// feasible and improves the objective, so the objective never decreases.
pub fn bcd_nocancel_solve(ch: &ChannelState, params: &SystemParams, cfg: &BaselineConfig) -> Result<BaselineResult> {
    params.validate()?;
    ch.check_len(params.n_sc)?;
    let n = params.n_sc;
    let noise = params.noise_w;

    let (hp, hq, max_harvest) = max_harvest_allocation(ch, params, true);
    if max_harvest < params.eh_min_w * (1.0 - 1e-12) {
        return infeasible_result(Scheme::NoCancelBcd, ch, params, true);
    }
    let start = no_jammer_solve_with(ch, params, cfg)?;
    let (p0, q0) = if start.allocation.feasible {
        (start.allocation.p.clone(), vec![0.0; n])
    } else {
        (hp, hq)
    };
    let mut best = bcd_rounds(p0, q0, ch, params, cfg);
    if cfg.bcd_equal_power_start {
        let epa = epa_allocate(ch, params)?.allocation;
        let (mut p1, mut q1) = (epa.p, epa.q);
        repair_in_place(&mut p1, &mut q1, ch, params, true, |k, pk, qk| {
            nocancel_marginal_p(pk, qk, ch, k, noise)
        });
        if constraint_slacks(&p1, &q1, ch, params)?.is_feasible() {
            let other = bcd_rounds(p1, q1, ch, params, cfg);
            if other.obj > best.obj {
                best = other;
            }
        }
    }
    let BcdRun { p, q, obj, trace, rounds } = best;

    let allocation = scored(p, q, obj, ch, params)?;
    debug_assert!(allocation.feasible || !constraint_slacks(&allocation.p, &allocation.q, ch, params)?.is_feasible());
    Ok(BaselineResult {
        scheme: Scheme::NoCancelBcd,
        allocation,
        iterations: rounds,
        objective_trace: trace,
    })
}
