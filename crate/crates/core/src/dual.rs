//! Dual decomposition of the secrecy-rate problem.
//!
//! For multipliers `ν = (λ, β, μ)` the Lagrangian separates into one
//! subproblem per subcarrier, so the dual function is the sum of the
//! subcarrier optima plus the constants `λP − μQ̄`. The dual is minimized with
//! the ellipsoid method, using the constraint slacks at the subproblem
//! maximizers as subgradients. Subproblem maximizers are rarely feasible, so
//! each iterate is repaired and the best feasible one is reported.

use std::collections::BTreeMap;
use std::f64::consts::LN_2;

use nalgebra::Vector3;

use crate::ellipsoid::{minimize_nonneg, EllipsoidConfig, EllipsoidState};
use crate::error::Result;
use crate::model::{
    constraint_slacks, ChannelState, DualPoint, PowerAllocation, ScSnapshot,
    SystemParams, Threshold,
};
use crate::subproblem::{ScSolver, SubproblemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualConfig {
    pub ellipsoid: EllipsoidConfig,
    pub subproblem: SubproblemConfig,
    /// Overrides the default initial ball radius.
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    IterationCap,
    /// No allocation can deliver the required harvested power.
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterRecord {
    pub duals: DualPoint,
    pub dual_value: f64,
    /// Best feasible secrecy rate found so far (−∞ before the first one).
    pub best_primal: f64,
    pub shape_det: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub allocation: PowerAllocation,
    /// Smallest dual value seen; an upper bound on the optimal secrecy rate.
    pub dual_bound: f64,
    pub gap: f64,
    pub duals: DualPoint,
    pub iterations: usize,
    pub subproblem_case_histogram: BTreeMap<&'static str, usize>,
    pub status: SolveStatus,
    pub trace: Vec<IterRecord>,
}

impl SolveReport {
    pub fn relative_gap(&self) -> f64 {
        self.gap / self.dual_bound.abs().max(f64::MIN_POSITIVE)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DualEval {
    pub value: f64,
    /// Slacks `(P − Σp, ζΣp h_j − Σq, Σ(p h_e + q g_e) − Q̄)`.
    pub subgrad: [f64; 3],
    pub alloc: PowerAllocation,
    pub case_labels: Vec<&'static str>,
}

fn solver_for(params: &SystemParams, cfg: &SubproblemConfig) -> ScSolver {
    ScSolver::new(params.peak_p_w, params.peak_q_w).with_config(*cfg)
}

/// Dual function value and subgradient at `nu`, using the default subproblem
/// settings.
pub fn dual_value_and_subgrad(nu: &DualPoint, ch: &ChannelState, params: &SystemParams) -> Result<DualEval> {
    evaluate_dual(nu, ch, params, &solver_for(params, &SubproblemConfig::default()))
}

fn evaluate_dual(nu: &DualPoint, ch: &ChannelState, params: &SystemParams, solver: &ScSolver) -> Result<DualEval> {
    ch.check_len(params.n_sc)?;
    let n = ch.len();
    let mut p = Vec::with_capacity(n);
    let mut q = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut value = nu.lambda * params.total_power_w - nu.mu * params.eh_min_w;
    for k in 0..n {
        let sol = solver.solve_sc(&ch.snapshot(k, params), nu);
        value += sol.value;
        p.push(sol.p);
        q.push(sol.q);
        labels.push(sol.case_label);
    }
    let slack = constraint_slacks(&p, &q, ch, params)?;
    let alloc = PowerAllocation::evaluate(p, q, ch, params)?;
    Ok(DualEval {
        value,
        subgrad: slack.as_array(),
        alloc,
        case_labels: labels,
    })
}

/// Greedy allocation maximizing harvested power at the ER: transmit power
/// goes to the subcarriers with the largest `h_e + γ ζ h_j`, and the jammer
/// budget to the largest `g_e`. `γ` is the marginal harvest value of jammer
/// energy; every breakpoint candidate is tried.
pub fn max_harvest_allocation(ch: &ChannelState, params: &SystemParams, allow_jamming: bool) -> (Vec<f64>, Vec<f64>, f64) {
    let n = ch.len();
    let mut g_sorted: Vec<f64> = ch.g_e.clone();
    g_sorted.sort_by(|a, b| b.total_cmp(a));
    let mut gammas = vec![0.0];
    if allow_jamming {
        for w in g_sorted.windows(2) {
            gammas.push(w[0]);
            gammas.push(0.5 * (w[0] + w[1]));
        }
        if let Some(&last) = g_sorted.last() {
            gammas.push(last);
        }
        gammas.push(2.0 * g_sorted.first().copied().unwrap_or(0.0));
    }
    let mut q_order: Vec<usize> = (0..n).collect();
    q_order.sort_by(|&a, &b| ch.g_e[b].total_cmp(&ch.g_e[a]));

    let mut best: Option<(Vec<f64>, Vec<f64>, f64)> = None;
    for gamma in gammas {
        let w: Vec<f64> = (0..n).map(|k| ch.h_e[k] + gamma * params.zeta * ch.h_j[k]).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| w[b].total_cmp(&w[a]));
        let mut p = vec![0.0; n];
        let mut left = params.total_power_w;
        for &k in &order {
            if left <= 0.0 {
                break;
            }
            p[k] = params.peak_p_w.min(left);
            left -= p[k];
        }
        let mut q = vec![0.0; n];
        if allow_jamming {
            let mut budget = params.zeta * p.iter().zip(&ch.h_j).map(|(p, h)| p * h).sum::<f64>();
            for &k in &q_order {
                if budget <= 0.0 {
                    break;
                }
                q[k] = params.peak_q_w.min(budget);
                budget -= q[k];
            }
        }
        let harvest: f64 = (0..n).map(|k| p[k] * ch.h_e[k] + q[k] * ch.g_e[k]).sum();
        if best.as_ref().is_none_or(|b| harvest > b.2) {
            best = Some((p, q, harvest));
        }
    }
    best.expect("at least one candidate")
}

/// Marginal secrecy-rate gain of transmit power on one subcarrier (zero when
/// the subcarrier carries no secrecy).
fn marginal_rate_p(p: f64, q: f64, sc: &ScSnapshot) -> f64 {
    match sc.a_threshold {
        Threshold::Finite(a) if q >= a => {
            let s2 = sc.noise_w;
            (sc.h_i / (s2 + p * sc.h_i) - sc.h_e / (s2 + q * sc.g_e + p * sc.h_e)).max(0.0) / LN_2
        }
        _ => 0.0,
    }
}

fn budget_of(p: &[f64], ch: &ChannelState, params: &SystemParams) -> f64 {
    params.zeta * p.iter().zip(&ch.h_j).map(|(p, h)| p * h).sum::<f64>()
}

fn harvest_of(p: &[f64], q: &[f64], ch: &ChannelState) -> f64 {
    (0..p.len()).map(|k| p[k] * ch.h_e[k] + q[k] * ch.g_e[k]).sum()
}

fn rebudget_q(p: &[f64], q: &mut [f64], ch: &ChannelState, params: &SystemParams) {
    let budget = budget_of(p, ch, params);
    let used: f64 = q.iter().sum();
    if used > budget {
        let s = if used > 0.0 { budget / used } else { 0.0 };
        q.iter_mut().for_each(|v| *v *= s);
    }
}

/// Shared repair loop. `marginal_loss(k, p, q)` estimates the rate lost per
/// watt taken from subcarrier `k`.
pub(crate) fn repair_in_place(
    p: &mut [f64],
    q: &mut [f64],
    ch: &ChannelState,
    params: &SystemParams,
    allow_jamming: bool,
    marginal_loss: impl Fn(usize, f64, f64) -> f64,
) {
    let n = p.len();
    let (pb, qb) = (params.peak_p_w, params.peak_q_w);
    for v in p.iter_mut() {
        *v = v.clamp(0.0, pb);
    }
    for v in q.iter_mut() {
        *v = if allow_jamming { v.clamp(0.0, qb) } else { 0.0 };
    }
    let sum_p: f64 = p.iter().sum();
    if sum_p > params.total_power_w {
        let s = params.total_power_w / sum_p;
        p.iter_mut().for_each(|v| *v *= s);
    }
    rebudget_q(p, q, ch, params);

    let mut q_order: Vec<usize> = (0..n).collect();
    q_order.sort_by(|&a, &b| ch.g_e[b].total_cmp(&ch.g_e[a]));
    let target = params.eh_min_w;
    let tiny = 1e-12 * target.max(f64::MIN_POSITIVE);

    for _round in 0..(64 * n + 16) {
        let deficit = target - harvest_of(p, q, ch);
        if deficit <= tiny {
            return;
        }
        // Jamming never lowers the secrecy rate under cancellation, so spend
        // the spare jammer budget on the best jammer→ER links first.
        if allow_jamming {
            let mut spare = budget_of(p, ch, params) - q.iter().sum::<f64>();
            let mut need = deficit;
            for &k in &q_order {
                if spare <= 0.0 || need <= 0.0 || ch.g_e[k] <= 0.0 {
                    break;
                }
                let room = qb - q[k];
                if room <= 0.0 {
                    continue;
                }
                let dq = room.min(spare).min(need / ch.g_e[k]);
                q[k] += dq;
                spare -= dq;
                need -= dq * ch.g_e[k];
            }
            if need <= tiny {
                return;
            }
        }
        let deficit = target - harvest_of(p, q, ch);
        let g_best = if allow_jamming {
            q_order
                .iter()
                .find(|&&k| q[k] < qb)
                .map(|&k| ch.g_e[k])
                .unwrap_or(0.0)
        } else {
            0.0
        };
        let worth = |k: usize| ch.h_e[k] + params.zeta * ch.h_j[k] * g_best;
        let receiver = (0..n)
            .filter(|&k| p[k] < pb)
            .max_by(|&a, &b| worth(a).total_cmp(&worth(b)));
        let Some(recv) = receiver else { return };
        let w_recv = worth(recv);
        if w_recv <= 0.0 {
            return;
        }
        let slack_p = params.total_power_w - p.iter().sum::<f64>();
        if slack_p > 1e-15 * params.total_power_w {
            let dp = (pb - p[recv]).min(slack_p).min(deficit / w_recv);
            p[recv] += dp;
            continue;
        }
        // Power budget binds: move power toward harvesting-efficient
        // subcarriers, cheapest rate loss per harvested watt first.
        let donor = (0..n)
            .filter(|&k| k != recv && p[k] > 0.0 && worth(k) < w_recv)
            .min_by(|&a, &b| {
                let ra = marginal_loss(a, p[a], q[a]) / (w_recv - worth(a));
                let rb = marginal_loss(b, p[b], q[b]) / (w_recv - worth(b));
                ra.total_cmp(&rb)
            });
        let Some(don) = donor else { return };
        let chunk = (pb / 8.0).max(deficit / (w_recv - worth(don)));
        let dp = p[don].min(pb - p[recv]).min(chunk).min(deficit / (w_recv - worth(don)));
        if dp <= 0.0 {
            return;
        }
        p[don] -= dp;
        p[recv] += dp;
        rebudget_q(p, q, ch, params);
    }
}

/// Projects a box-feasible allocation onto the constraint set: scales down
/// transmit power and jamming until the budgets hold, then raises harvested
/// power greedily until the ER requirement is met or nothing more can be done.
/// A feasible input is returned unchanged.
pub fn repair_primal(alloc: &PowerAllocation, ch: &ChannelState, params: &SystemParams) -> Result<PowerAllocation> {
    let slack = constraint_slacks(&alloc.p, &alloc.q, ch, params)?;
    if slack.is_feasible() && alloc.within_box(params) {
        return PowerAllocation::evaluate(alloc.p.clone(), alloc.q.clone(), ch, params);
    }
    let mut p = alloc.p.clone();
    let mut q = alloc.q.clone();
    repair_in_place(&mut p, &mut q, ch, params, true, |k, pk, qk| {
        marginal_rate_p(pk, qk, &ch.snapshot(k, params))
    });
    PowerAllocation::evaluate(p, q, ch, params)
}

fn initial_radius(ch: &ChannelState, params: &SystemParams) -> f64 {
    10.0 * ch.max_gain() / (params.noise_w * LN_2)
}

pub(crate) fn dual_ball<const D: usize>(radius: f64) -> EllipsoidState<D> {
    EllipsoidState::ball(nalgebra::SVector::repeat(0.5 * radius), radius)
}

/// Solves the secrecy-rate problem by minimizing its dual with the ellipsoid
/// method.
pub fn ellipsoid_solve(ch: &ChannelState, params: &SystemParams, cfg: &DualConfig) -> Result<SolveReport> {
    params.validate()?;
    ch.check_len(params.n_sc)?;

    let (hp, hq, max_harvest) = max_harvest_allocation(ch, params, true);
    if max_harvest < params.eh_min_w * (1.0 - 1e-12) {
        return Ok(SolveReport {
            allocation: PowerAllocation::evaluate(hp, hq, ch, params)?,
            dual_bound: f64::NEG_INFINITY,
            gap: f64::NEG_INFINITY,
            duals: DualPoint::default(),
            iterations: 0,
            subproblem_case_histogram: BTreeMap::new(),
            status: SolveStatus::Infeasible,
            trace: Vec::new(),
        });
    }

    let solver = solver_for(params, &cfg.subproblem);
    let radius = cfg.radius.unwrap_or_else(|| initial_radius(ch, params));
    let mut best_alloc: Option<PowerAllocation> = None;
    let mut best_dual: Option<(f64, DualPoint, Vec<&'static str>)> = None;
    let mut trace = Vec::new();
    let mut failure = None;

    let init = dual_ball::<3>(radius);
    let outcome = minimize_nonneg(init, &cfg.ellipsoid, |state| {
        let x = &state.center;
        let nu = DualPoint::new(x[0], x[1], x[2]);
        let eval = match evaluate_dual(&nu, ch, params, &solver) {
            Ok(e) => e,
            Err(e) => {
                failure = Some(e);
                return (0.0, Vector3::zeros());
            }
        };
        if let Ok(repaired) = repair_primal(&eval.alloc, ch, params) {
            if repaired.feasible && best_alloc.as_ref().is_none_or(|b| repaired.secrecy_rate > b.secrecy_rate) {
                best_alloc = Some(repaired);
            }
        }
        if best_dual.as_ref().is_none_or(|b| eval.value < b.0) {
            best_dual = Some((eval.value, nu, eval.case_labels.clone()));
        }
        trace.push(IterRecord {
            duals: nu,
            dual_value: eval.value,
            best_primal: best_alloc.as_ref().map_or(f64::NEG_INFINITY, |a| a.secrecy_rate),
            shape_det: state.determinant(),
        });
        // Subgradient of the dual is the slack vector.
        (eval.value, Vector3::from(eval.subgrad))
    });
    if let Some(e) = failure {
        return Err(e);
    }

    let allocation = match best_alloc {
        Some(a) => a,
        None => PowerAllocation::evaluate(hp, hq, ch, params)?,
    };
    let (dual_bound, duals, labels) = best_dual.expect("at least one dual evaluation");
    let mut hist = BTreeMap::new();
    for l in labels {
        *hist.entry(l).or_insert(0) += 1;
    }
    Ok(SolveReport {
        gap: dual_bound - allocation.secrecy_rate,
        allocation,
        dual_bound,
        duals,
        iterations: outcome.iterations,
        subproblem_case_histogram: hist,
        status: if outcome.converged {
            SolveStatus::Converged
        } else {
            SolveStatus::IterationCap
        },
        trace,
    })
}
