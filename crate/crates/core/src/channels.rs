//! Node placement and per-subcarrier channel gains.
//!
//! Gains follow `ref_gain · d^(−exponent) · X`, with `X` either 1 or a
//! unit-mean exponential (Rayleigh power) variate drawn independently per link
//! and subcarrier. Draws come from ChaCha8 keyed by the seed, with one stream
//! per `(trial, link)` pair, so the fading seen by a link depends only on the
//! seed, the trial index and the link itself.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::error::{invalid, Error, Result};
use crate::model::{ChannelState, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Fixed part of the deployment: the jammer slides along the Tx–IR segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub d_tx_ir_m: f64,
    pub d_tx_er_m: f64,
    pub er_angle_deg: f64,
}

impl Default for Layout {
    fn default() -> Self {
        Self {
            d_tx_ir_m: 20.0,
            d_tx_er_m: 10.0,
            er_angle_deg: 30.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub tx: Point,
    pub ir: Point,
    pub er: Point,
    pub jammer: Point,
}

impl Geometry {
    /// Link lengths in [`LINKS`] order.
    pub fn link_distances(&self) -> [f64; 5] {
        [
            self.tx.distance(&self.ir),
            self.tx.distance(&self.er),
            self.tx.distance(&self.jammer),
            self.jammer.distance(&self.ir),
            self.jammer.distance(&self.er),
        ]
    }
}

/// Link order used for RNG substreams and [`Geometry::link_distances`]:
/// Tx→IR, Tx→ER, Tx→jammer, jammer→IR, jammer→ER.
pub const LINKS: [&str; 5] = ["h_i", "h_e", "h_j", "g_i", "g_e"];

pub fn node_positions(d1: f64, layout: &Layout) -> Result<Geometry> {
    if !(d1 > 0.0 && d1 < layout.d_tx_ir_m) {
        return Err(Error::JammerOutOfRange {
            d1,
            max: layout.d_tx_ir_m,
        });
    }
    let theta = layout.er_angle_deg.to_radians();
    let geom = Geometry {
        tx: Point::new(0.0, 0.0),
        ir: Point::new(layout.d_tx_ir_m, 0.0),
        er: Point::new(layout.d_tx_er_m * theta.cos(), layout.d_tx_er_m * theta.sin()),
        jammer: Point::new(d1, 0.0),
    };
    if geom.link_distances().iter().any(|d| !(*d > 0.0)) {
        return Err(invalid("layout", "nodes must not coincide"));
    }
    Ok(geom)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FadingKind {
    None,
    RayleighUnitMean,
}

impl fmt::Display for FadingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FadingKind::None => "none",
            FadingKind::RayleighUnitMean => "rayleigh",
        })
    }
}

impl FromStr for FadingKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(FadingKind::None),
            "rayleigh" => Ok(FadingKind::RayleighUnitMean),
            other => Err(format!("unknown fading kind `{other}` (expected none|rayleigh)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FadingSpec {
    pub kind: FadingKind,
    pub seed: u64,
    /// Monte-Carlo trial index; selects the substream family.
    pub trial: u64,
}

impl FadingSpec {
    pub fn none() -> Self {
        Self {
            kind: FadingKind::None,
            seed: 0,
            trial: 0,
        }
    }

    pub fn rayleigh(seed: u64, trial: u64) -> Self {
        Self {
            kind: FadingKind::RayleighUnitMean,
            seed,
            trial,
        }
    }
}

/// Power fading factors for one link: `n` unit-mean exponential variates.
pub fn fading_draws(seed: u64, trial: u64, link: usize, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(LINKS.len() as u64).wrapping_add(link as u64));
    (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect()
}

pub fn path_gain(d: f64, params: &SystemParams) -> f64 {
    params.ref_gain * d.powf(-params.ploss_exp)
}

pub fn channel_gains(geom: &Geometry, fading: &FadingSpec, params: &SystemParams) -> Result<ChannelState> {
    let n = params.n_sc;
    let d = geom.link_distances();
    let mut links: [Vec<f64>; 5] = Default::default();
    for (idx, arr) in links.iter_mut().enumerate() {
        let mean = path_gain(d[idx], params);
        *arr = match fading.kind {
            FadingKind::None => vec![mean; n],
            FadingKind::RayleighUnitMean => fading_draws(fading.seed, fading.trial, idx, n)
                .into_iter()
                .map(|x| mean * x)
                .collect(),
        };
    }
    let [h_i, h_e, h_j, g_i, g_e] = links;
    ChannelState::new(h_i, h_e, h_j, g_i, g_e)
}
