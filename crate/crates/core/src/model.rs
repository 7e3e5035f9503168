//! Domain types and the closed-form per-subcarrier quantities: rates, secrecy
//! threshold, constraint slacks, the per-subcarrier Lagrangian and its two
//! partial derivatives.
//!
//! Every power is in watts. Conversions to and from dBm / µW live at the I/O
//! boundary only ([`dbm_to_watts`], [`watts_to_dbm`]).

use std::f64::consts::LN_2;

use crate::error::{invalid, Error, Result};

/// Relative tolerance used when deciding whether an allocation satisfies a
/// constraint.
pub const FEASIBILITY_RTOL: f64 = 1e-9;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Scenario constants shared by every subcarrier.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub n_sc: usize,
    /// Transmitter sum-power budget `P`.
    pub total_power_w: f64,
    /// Noise power per subcarrier.
    pub noise_w: f64,
    pub peak_p_w: f64,
    pub peak_q_w: f64,
    /// Minimum power the energy receiver must harvest.
    pub eh_min_w: f64,
    /// Energy-conversion efficiency of the jammer's harvester.
    pub zeta: f64,
    pub ploss_exp: f64,
    /// Linear channel gain at 1 m.
    pub ref_gain: f64,
}

impl Default for SystemParams {
    /// 64 subcarriers, P = 30 dBm, σ² = −60 dBm, peaks 2P/N, Q̄ = 100 µW,
    /// exponent 3, reference gain −1.5 dB.
    fn default() -> Self {
        let n_sc = 64;
        let total_power_w = dbm_to_watts(30.0);
        let peak = 2.0 * total_power_w / n_sc as f64;
        Self {
            n_sc,
            total_power_w,
            noise_w: dbm_to_watts(-60.0),
            peak_p_w: peak,
            peak_q_w: peak,
            eh_min_w: 100e-6,
            zeta: 1.0,
            ploss_exp: 3.0,
            ref_gain: db_to_linear(-1.5),
        }
    }
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        fn positive(name: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(name, format!("must be finite and > 0, got {v}")))
            }
        }
        if self.n_sc == 0 {
            return Err(invalid("n_sc", "need at least one subcarrier"));
        }
        positive("total_power_w", self.total_power_w)?;
        positive("noise_w", self.noise_w)?;
        positive("peak_p_w", self.peak_p_w)?;
        positive("peak_q_w", self.peak_q_w)?;
        positive("ploss_exp", self.ploss_exp)?;
        positive("ref_gain", self.ref_gain)?;
        if !(self.eh_min_w.is_finite() && self.eh_min_w >= 0.0) {
            return Err(invalid("eh_min_w", format!("must be finite and >= 0, got {}", self.eh_min_w)));
        }
        if !(self.zeta > 0.0 && self.zeta <= 1.0) {
            return Err(invalid("zeta", format!("must lie in (0, 1], got {}", self.zeta)));
        }
        Ok(())
    }
}

/// Per-subcarrier channel power gains.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    /// Tx → IR.
    pub h_i: Vec<f64>,
    /// Tx → ER.
    pub h_e: Vec<f64>,
    /// Tx → jammer.
    pub h_j: Vec<f64>,
    /// Jammer → IR.
    pub g_i: Vec<f64>,
    /// Jammer → ER.
    pub g_e: Vec<f64>,
}

impl ChannelState {
    pub fn new(h_i: Vec<f64>, h_e: Vec<f64>, h_j: Vec<f64>, g_i: Vec<f64>, g_e: Vec<f64>) -> Result<Self> {
        let n = h_i.len();
        for arr in [&h_e, &h_j, &g_i, &g_e] {
            if arr.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: arr.len(),
                });
            }
        }
        let ch = Self { h_i, h_e, h_j, g_i, g_e };
        for (name, arr) in ch.links() {
            if let Some(bad) = arr.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
                return Err(invalid(name, format!("gains must be finite and >= 0, got {bad}")));
            }
        }
        Ok(ch)
    }

    /// Same gains on every subcarrier.
    pub fn flat(n: usize, h_i: f64, h_e: f64, h_j: f64, g_i: f64, g_e: f64) -> Result<Self> {
        Self::new(vec![h_i; n], vec![h_e; n], vec![h_j; n], vec![g_i; n], vec![g_e; n])
    }

    pub fn len(&self) -> usize {
        self.h_i.len()
    }

    pub fn is_empty(&self) -> bool {
        self.h_i.is_empty()
    }

    pub fn links(&self) -> [(&'static str, &[f64]); 5] {
        [
            ("h_i", &self.h_i),
            ("h_e", &self.h_e),
            ("h_j", &self.h_j),
            ("g_i", &self.g_i),
            ("g_e", &self.g_e),
        ]
    }

    pub fn max_gain(&self) -> f64 {
        self.links()
            .iter()
            .flat_map(|(_, a)| a.iter().copied())
            .fold(0.0, f64::max)
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: self.len(),
            });
        }
        Ok(())
    }

    /// Scalar view of subcarrier `n`. The snapshot's `h_j` is the effective
    /// harvesting gain `zeta * h_j`, so the jammer-budget term needs no extra
    /// factor downstream.
    pub fn snapshot(&self, n: usize, params: &SystemParams) -> ScSnapshot {
        ScSnapshot::new(
            self.h_i[n],
            self.h_e[n],
            params.zeta * self.h_j[n],
            self.g_i[n],
            self.g_e[n],
            params.noise_w,
        )
    }
}

/// Minimum jamming power for positive secrecy on one subcarrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Finite(f64),
    /// No jamming power makes the secrecy rate positive (`h_i = 0`, or
    /// `g_e = 0` with `h_e > h_i`).
    Unreachable,
}

impl Threshold {
    pub fn finite(self) -> Option<f64> {
        match self {
            Threshold::Finite(a) => Some(a),
            Threshold::Unreachable => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("degenerate channel: secrecy threshold is unbounded")]
pub struct DegenerateChannel;

fn compute_threshold(noise_w: f64, h_i: f64, h_e: f64, g_e: f64) -> Threshold {
    if h_i <= 0.0 {
        return Threshold::Unreachable;
    }
    if h_e <= h_i {
        return Threshold::Finite(0.0);
    }
    if g_e <= 0.0 {
        return Threshold::Unreachable;
    }
    Threshold::Finite(noise_w * (h_e - h_i) / (h_i * g_e))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScSnapshot {
    pub h_i: f64,
    pub h_e: f64,
    pub h_j: f64,
    pub g_i: f64,
    pub g_e: f64,
    pub noise_w: f64,
    pub a_threshold: Threshold,
}

impl ScSnapshot {
    pub fn new(h_i: f64, h_e: f64, h_j: f64, g_i: f64, g_e: f64, noise_w: f64) -> Self {
        Self {
            h_i,
            h_e,
            h_j,
            g_i,
            g_e,
            noise_w,
            a_threshold: compute_threshold(noise_w, h_i, h_e, g_e),
        }
    }
}

/// `[σ²(h_e − h_i) / (h_i g_e)]⁺`, recomputed from the snapshot's gains.
pub fn threshold_a(sc: &ScSnapshot) -> std::result::Result<f64, DegenerateChannel> {
    compute_threshold(sc.noise_w, sc.h_i, sc.h_e, sc.g_e)
        .finite()
        .ok_or(DegenerateChannel)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScRates {
    /// IR rate, bits/s/Hz.
    pub r: f64,
    /// Eavesdropping rate at the ER.
    pub r_e: f64,
    pub secrecy: f64,
}

/// Rates on one subcarrier when the IR cancels the jamming signal.
pub fn sc_rates(p: f64, q: f64, sc: &ScSnapshot) -> ScRates {
    let r = (p * sc.h_i / sc.noise_w).ln_1p() / LN_2;
    let r_e = (p * sc.h_e / (sc.noise_w + q * sc.g_e)).ln_1p() / LN_2;
    let secrecy = match sc.a_threshold {
        Threshold::Finite(a) if q >= a => (r - r_e).max(0.0),
        _ => 0.0,
    };
    ScRates { r, r_e, secrecy }
}

/// Multipliers for the power budget, jammer energy budget and harvested-power
/// floor.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DualPoint {
    pub lambda: f64,
    pub beta: f64,
    pub mu: f64,
}

impl DualPoint {
    pub fn new(lambda: f64, beta: f64, mu: f64) -> Self {
        Self { lambda, beta, mu }
    }

    pub fn is_valid(&self) -> bool {
        [self.lambda, self.beta, self.mu]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
    }
}

/// Per-subcarrier Lagrangian `R − λp + β(p h_j − q) + μ(p h_e + q g_e)`.
pub fn sc_lagrangian(p: f64, q: f64, sc: &ScSnapshot, nu: &DualPoint) -> f64 {
    sc_rates(p, q, sc).secrecy - nu.lambda * p + nu.beta * (p * sc.h_j - q) + nu.mu * (p * sc.h_e + q * sc.g_e)
}

/// `∂L/∂p` on the positive-secrecy branch.
pub fn f1(p: f64, q: f64, sc: &ScSnapshot, nu: &DualPoint) -> f64 {
    let s2 = sc.noise_w;
    sc.h_i / (LN_2 * (s2 + p * sc.h_i)) - sc.h_e / (LN_2 * (s2 + q * sc.g_e + p * sc.h_e)) - nu.lambda
        + nu.beta * sc.h_j
        + nu.mu * sc.h_e
}

/// `∂L/∂q` on the positive-secrecy branch.
pub fn f2(p: f64, q: f64, sc: &ScSnapshot, nu: &DualPoint) -> f64 {
    let c = sc.noise_w + q * sc.g_e;
    p * sc.h_e * sc.g_e / (LN_2 * (c + p * sc.h_e) * c) - nu.beta + nu.mu * sc.g_e
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    /// Sum secrecy rate, bits/s/Hz.
    pub secrecy_rate: f64,
    pub feasible: bool,
}

impl PowerAllocation {
    /// Builds an allocation and scores it with IR-side jamming cancellation.
    pub fn evaluate(p: Vec<f64>, q: Vec<f64>, ch: &ChannelState, params: &SystemParams) -> Result<Self> {
        let rate = secrecy_rate_cancel(&p, &q, ch, params)?;
        let mut alloc = Self {
            p,
            q,
            secrecy_rate: rate,
            feasible: false,
        };
        alloc.feasible = eval_constraints(&alloc, ch, params)?.is_feasible() && alloc.within_box(params);
        Ok(alloc)
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            p: vec![0.0; n],
            q: vec![0.0; n],
            secrecy_rate: 0.0,
            feasible: false,
        }
    }

    pub fn within_box(&self, params: &SystemParams) -> bool {
        let tol_p = params.peak_p_w * FEASIBILITY_RTOL;
        let tol_q = params.peak_q_w * FEASIBILITY_RTOL;
        self.p.iter().all(|&p| p >= 0.0 && p <= params.peak_p_w + tol_p)
            && self.q.iter().all(|&q| q >= 0.0 && q <= params.peak_q_w + tol_q)
    }

    pub fn total_p(&self) -> f64 {
        self.p.iter().sum()
    }

    pub fn total_q(&self) -> f64 {
        self.q.iter().sum()
    }
}

/// Σ secrecy rate with IR-side cancellation.
pub fn secrecy_rate_cancel(p: &[f64], q: &[f64], ch: &ChannelState, params: &SystemParams) -> Result<f64> {
    ch.check_len(p.len())?;
    ch.check_len(q.len())?;
    Ok((0..p.len())
        .map(|n| sc_rates(p[n], q[n], &ch.snapshot(n, params)).secrecy)
        .sum())
}

/// Constraint slacks; each is non-negative when the constraint holds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Slacks {
    /// `P − Σp`.
    pub power: f64,
    /// `ζ Σ p h_j − Σ q`.
    pub jammer: f64,
    /// `Σ (p h_e + q g_e) − Q̄`.
    pub eh: f64,
    scale: [f64; 3],
}

impl Slacks {
    pub fn is_feasible(&self) -> bool {
        self.power >= -FEASIBILITY_RTOL * self.scale[0]
            && self.jammer >= -FEASIBILITY_RTOL * self.scale[1]
            && self.eh >= -FEASIBILITY_RTOL * self.scale[2]
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.power, self.jammer, self.eh]
    }
}

pub fn eval_constraints(alloc: &PowerAllocation, ch: &ChannelState, params: &SystemParams) -> Result<Slacks> {
    constraint_slacks(&alloc.p, &alloc.q, ch, params)
}

pub fn constraint_slacks(p: &[f64], q: &[f64], ch: &ChannelState, params: &SystemParams) -> Result<Slacks> {
    for len in [p.len(), q.len()] {
        if len != ch.len() {
            return Err(Error::LengthMismatch {
                expected: ch.len(),
                found: len,
            });
        }
    }
    let sum_p: f64 = p.iter().sum();
    let sum_q: f64 = q.iter().sum();
    let budget: f64 = params.zeta * p.iter().zip(&ch.h_j).map(|(p, h)| p * h).sum::<f64>();
    let harvested: f64 = (0..p.len()).map(|n| p[n] * ch.h_e[n] + q[n] * ch.g_e[n]).sum();
    Ok(Slacks {
        power: params.total_power_w - sum_p,
        jammer: budget - sum_q,
        eh: harvested - params.eh_min_w,
        scale: [
            params.total_power_w,
            budget.max(sum_q).max(f64::MIN_POSITIVE),
            params.eh_min_w.max(harvested).max(f64::MIN_POSITIVE),
        ],
    })
}
