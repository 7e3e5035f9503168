//! Independent reference computations for the integration tests. Nothing here
//! calls the solver code it is used to check.

#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use swipt_core::model::{ChannelState, DualPoint, ScSnapshot, SystemParams};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.random_range(lo_exp..hi_exp))
}

/// Per-subcarrier Lagrangian written straight from the problem statement.
/// The secrecy gate is left implicit: `r − r_e` is negative exactly when the
/// jamming is below threshold, so clipping at zero covers it.
pub fn lagrangian(p: f64, q: f64, sc: &ScSnapshot, nu: &DualPoint) -> f64 {
    let s2 = sc.noise_w;
    let r = (1.0 + p * sc.h_i / s2).log2();
    let r_e = (1.0 + p * sc.h_e / (s2 + q * sc.g_e)).log2();
    let rate = (r - r_e).max(0.0);
    rate - nu.lambda * p + nu.beta * (p * sc.h_j - q) + nu.mu * (p * sc.h_e + q * sc.g_e)
}

/// Maximum of [`lagrangian`] over a `(pts × pts)` grid on `[0, pb] × [q_lo, q_hi]`.
pub fn grid_max(sc: &ScSnapshot, nu: &DualPoint, pb: f64, q_lo: f64, q_hi: f64, pts: usize) -> (f64, f64, f64) {
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..pts {
        let p = pb * i as f64 / (pts - 1) as f64;
        for j in 0..pts {
            let q = q_lo + (q_hi - q_lo) * j as f64 / (pts - 1) as f64;
            let v = lagrangian(p, q, sc, nu);
            if v > best.0 {
                best = (v, p, q);
            }
        }
    }
    best
}

pub struct ScInstance {
    pub sc: ScSnapshot,
    pub nu: DualPoint,
    pub peak_p: f64,
    pub peak_q: f64,
}

/// Gains log-uniform in [1e-5, 1e-2], σ² = 1e-9, peaks in [1e-3, 1e-1],
/// multipliers log-uniform in [1e-2, 1e4]. Every fourth draw rescales the
/// multipliers to the rate-derivative scale `h/σ²` so that interior cases
/// show up often.
pub fn random_sc_instance(rng: &mut ChaCha8Rng, k: usize) -> ScInstance {
    let g = |rng: &mut ChaCha8Rng| log_uniform(rng, -5.0, -2.0);
    let sc = ScSnapshot::new(g(rng), g(rng), g(rng), g(rng), g(rng), 1e-9);
    let peak_p = log_uniform(rng, -3.0, -1.0);
    let peak_q = log_uniform(rng, -3.0, -1.0);
    let mut nu = DualPoint::new(
        log_uniform(rng, -2.0, 4.0),
        log_uniform(rng, -2.0, 4.0),
        log_uniform(rng, -2.0, 4.0),
    );
    if k % 4 == 3 {
        let scale = sc.h_i / (sc.noise_w * std::f64::consts::LN_2);
        nu.lambda = scale * 10f64.powf(rng.random_range(-4.0..0.0));
        nu.beta = nu.lambda / sc.h_j * 10f64.powf(rng.random_range(-3.0..0.0));
        nu.mu = nu.lambda / sc.h_e * 10f64.powf(rng.random_range(-3.0..0.0));
    }
    ScInstance { sc, nu, peak_p, peak_q }
}

/// Random `n`-subcarrier system whose harvesting requirement is a random
/// fraction of what equal power delivers, so the instance is feasible.
pub fn random_system(rng: &mut ChaCha8Rng, n: usize) -> (ChannelState, SystemParams) {
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| log_uniform(rng, -5.0, -2.0)).collect() };
    let ch = ChannelState::new(draw(rng), draw(rng), draw(rng), draw(rng), draw(rng)).unwrap();
    let total = 1.0;
    let peak = 2.0 * total / n as f64;
    let eq_harvest: f64 = ch.h_e.iter().map(|h| h * total / n as f64).sum();
    let params = SystemParams {
        n_sc: n,
        total_power_w: total,
        noise_w: 1e-9,
        peak_p_w: peak,
        peak_q_w: peak,
        eh_min_w: eq_harvest * rng.random_range(0.0..0.9),
        ..SystemParams::default()
    };
    (ch, params)
}

/// Secrecy rate under IR-side cancellation, computed from scratch.
pub fn cancel_rate(p: &[f64], q: &[f64], ch: &ChannelState, params: &SystemParams) -> f64 {
    (0..p.len())
        .map(|k| {
            let r = (1.0 + p[k] * ch.h_i[k] / params.noise_w).log2();
            let r_e = (1.0 + p[k] * ch.h_e[k] / (params.noise_w + q[k] * ch.g_e[k])).log2();
            (r - r_e).max(0.0)
        })
        .sum()
}

/// Constraint check written from the problem statement, with a relative
/// tolerance.
pub fn feasible(p: &[f64], q: &[f64], ch: &ChannelState, params: &SystemParams) -> bool {
    let tol = 1e-9;
    let sp: f64 = p.iter().sum();
    let sq: f64 = q.iter().sum();
    let budget: f64 = params.zeta * p.iter().zip(&ch.h_j).map(|(a, b)| a * b).sum::<f64>();
    let harvest: f64 = (0..p.len()).map(|k| p[k] * ch.h_e[k] + q[k] * ch.g_e[k]).sum();
    let boxed = p.iter().all(|&v| (-tol..=params.peak_p_w * (1.0 + tol)).contains(&v))
        && q.iter().all(|&v| (-tol..=params.peak_q_w * (1.0 + tol)).contains(&v));
    boxed
        && sp <= params.total_power_w * (1.0 + tol)
        && sq <= budget * (1.0 + tol) + 1e-300
        && harvest >= params.eh_min_w * (1.0 - tol)
}

/// Exhaustive search over `levels` values per variable for a two-subcarrier
/// system, keeping only feasible points.
pub fn small_grid_optimum(ch: &ChannelState, params: &SystemParams, levels: usize) -> f64 {
    assert_eq!(ch.len(), 2);
    let ps: Vec<f64> = (0..levels).map(|k| params.peak_p_w * k as f64 / (levels - 1) as f64).collect();
    let qs: Vec<f64> = (0..levels).map(|k| params.peak_q_w * k as f64 / (levels - 1) as f64).collect();
    let mut best = f64::NEG_INFINITY;
    for &p0 in &ps {
        for &p1 in &ps {
            let p = [p0, p1];
            for &q0 in &qs {
                for &q1 in &qs {
                    let q = [q0, q1];
                    if feasible(&p, &q, ch, params) {
                        best = best.max(cancel_rate(&p, &q, ch, params));
                    }
                }
            }
        }
    }
    best
}
