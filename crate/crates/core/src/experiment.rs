//! Monte-Carlo sweeps over the required harvested power, the transmit power
//! and the jammer position, with every scheme evaluated on the same channel
//! draw.

use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;

use crate::baselines::{bcd_nocancel_solve, epa_allocate, no_jammer_solve_with, BaselineConfig, Scheme};
use crate::channels::{channel_gains, node_positions, FadingKind, FadingSpec, Layout};
use crate::dual::{ellipsoid_solve, DualConfig};
use crate::error::{invalid, Error, Result};
use crate::model::{db_to_linear, dbm_to_watts, ChannelState, SystemParams};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "SWIPT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Qbar,
    P,
    D1,
    /// Transmit-power sweep repeated for every jammer position.
    PD1,
}

impl fmt::Display for SweepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepKind::Qbar => "qbar",
            SweepKind::P => "p",
            SweepKind::D1 => "d1",
            SweepKind::PD1 => "p_d1",
        })
    }
}

impl FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "qbar" => Ok(SweepKind::Qbar),
            "p" | "p_dbm" => Ok(SweepKind::P),
            "d1" => Ok(SweepKind::D1),
            "p_d1" => Ok(SweepKind::PD1),
            other => Err(format!("unknown sweep `{other}` (expected qbar|p|d1|p_d1)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub n_sc: usize,
    pub sigma2_dbm: f64,
    pub ploss_exp: f64,
    pub layout: Layout,
    pub d1_m: f64,
    pub p_dbm: f64,
    pub qbar_uw: f64,
    /// Peak per-subcarrier powers are `peak_factor · P / N`.
    pub peak_factor: f64,
    pub zeta: f64,
    pub fading: FadingKind,
    pub ref_gain_db: f64,
    pub seed: u64,
    pub trials: u64,
    pub sweep: SweepKind,
    pub qbar_sweep_uw: Vec<f64>,
    pub p_sweep_dbm: Vec<f64>,
    pub d1_sweep_m: Vec<f64>,
    pub schemes: Vec<Scheme>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n_sc: 64,
            sigma2_dbm: -60.0,
            ploss_exp: 3.0,
            layout: Layout::default(),
            d1_m: 10.0,
            p_dbm: 30.0,
            qbar_uw: 100.0,
            peak_factor: 2.0,
            zeta: 1.0,
            fading: FadingKind::RayleighUnitMean,
            ref_gain_db: -1.5,
            seed: 1,
            trials: 50,
            sweep: SweepKind::Qbar,
            qbar_sweep_uw: (0..=7).map(|k| 100.0 * k as f64).collect(),
            p_sweep_dbm: (0..=8).map(|k| 20.0 + 2.0 * k as f64).collect(),
            d1_sweep_m: vec![4.0, 10.0, 16.0],
            schemes: Scheme::ALL.to_vec(),
        }
    }
}

/// One sweep coordinate with every swept quantity resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub name: String,
    pub value: f64,
    pub p_dbm: f64,
    pub qbar_uw: f64,
    pub d1_m: f64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_sc == 0 {
            return Err(invalid("n_sc", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(invalid("trials", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("schemes", "must name at least one scheme"));
        }
        for (name, list) in [
            ("qbar_sweep_uw", &self.qbar_sweep_uw),
            ("p_sweep_dbm", &self.p_sweep_dbm),
            ("d1_sweep_m", &self.d1_sweep_m),
        ] {
            if list.is_empty() {
                return Err(invalid(name, "list must not be empty"));
            }
            if list.iter().any(|v| !v.is_finite()) {
                return Err(invalid(name, "values must be finite"));
            }
        }
        if self.qbar_sweep_uw.iter().chain([&self.qbar_uw]).any(|&q| q < 0.0) {
            return Err(invalid("qbar_uw", "must be non-negative"));
        }
        for d1 in self.d1_sweep_m.iter().chain([&self.d1_m]) {
            node_positions(*d1, &self.layout)?;
        }
        for p in self.p_sweep_dbm.iter().chain([&self.p_dbm]) {
            self.system_params(*p, self.qbar_uw)?;
        }
        Ok(())
    }

    pub fn system_params(&self, p_dbm: f64, qbar_uw: f64) -> Result<SystemParams> {
        let total = dbm_to_watts(p_dbm);
        let peak = self.peak_factor * total / self.n_sc as f64;
        let params = SystemParams {
            n_sc: self.n_sc,
            total_power_w: total,
            noise_w: dbm_to_watts(self.sigma2_dbm),
            peak_p_w: peak,
            peak_q_w: peak,
            eh_min_w: qbar_uw * 1e-6,
            zeta: self.zeta,
            ploss_exp: self.ploss_exp,
            ref_gain: db_to_linear(self.ref_gain_db),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let point = |name: String, value, p_dbm, qbar_uw, d1_m| SweepPoint {
            name,
            value,
            p_dbm,
            qbar_uw,
            d1_m,
        };
        match self.sweep {
            SweepKind::Qbar => self
                .qbar_sweep_uw
                .iter()
                .map(|&q| point("qbar_uw".into(), q, self.p_dbm, q, self.d1_m))
                .collect(),
            SweepKind::P => self
                .p_sweep_dbm
                .iter()
                .map(|&p| point("p_dbm".into(), p, p, self.qbar_uw, self.d1_m))
                .collect(),
            SweepKind::D1 => self
                .d1_sweep_m
                .iter()
                .map(|&d| point("d1_m".into(), d, self.p_dbm, self.qbar_uw, d))
                .collect(),
            SweepKind::PD1 => self
                .d1_sweep_m
                .iter()
                .flat_map(|&d| {
                    self.p_sweep_dbm
                        .iter()
                        .map(move |&p| point(format!("p_dbm@d1_m={d}"), p, p, self.qbar_uw, d))
                })
                .collect(),
        }
    }

    pub fn fading_spec(&self, trial: u64) -> FadingSpec {
        match self.fading {
            FadingKind::None => FadingSpec::none(),
            FadingKind::RayleighUnitMean => FadingSpec::rayleigh(self.seed, trial),
        }
    }

    /// The channel every scheme sees at `point` in `trial`.
    pub fn channel_for(&self, point: &SweepPoint, trial: u64) -> Result<(SystemParams, ChannelState)> {
        let params = self.system_params(point.p_dbm, point.qbar_uw)?;
        let geom = node_positions(point.d1_m, &self.layout)?;
        let ch = channel_gains(&geom, &self.fading_spec(trial), &params)?;
        Ok((params, ch))
    }
}

fn config_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Config {
        line,
        reason: reason.into(),
    }
}

fn parse_num<T: FromStr>(line: usize, key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| config_err(line, format!("`{key}`: cannot parse `{value}` as a number")))
}

fn parse_list(line: usize, key: &str, value: &str) -> Result<Vec<f64>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(line, key, s))
        .collect()
}

/// Parses a flat `key = value` document. Blank lines and `#` comments are
/// ignored; keys left out keep their defaults.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::default();
    let mut seen: Vec<String> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(config_err(line, format!("expected `key = value`, found `{content}`")));
        };
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(config_err(line, format!("`{key}` has no value")));
        }
        if seen.iter().any(|k| k == key) {
            return Err(config_err(line, format!("duplicate key `{key}`")));
        }
        match key {
            "n_sc" => cfg.n_sc = parse_num(line, key, value)?,
            "sigma2_dbm" => cfg.sigma2_dbm = parse_num(line, key, value)?,
            "ploss_exp" => cfg.ploss_exp = parse_num(line, key, value)?,
            "d_tx_ir_m" => cfg.layout.d_tx_ir_m = parse_num(line, key, value)?,
            "d_tx_er_m" => cfg.layout.d_tx_er_m = parse_num(line, key, value)?,
            "er_angle_deg" => cfg.layout.er_angle_deg = parse_num(line, key, value)?,
            "d1_m" => cfg.d1_m = parse_num(line, key, value)?,
            "p_dbm" => cfg.p_dbm = parse_num(line, key, value)?,
            "qbar_uw" => cfg.qbar_uw = parse_num(line, key, value)?,
            "peak_factor" => cfg.peak_factor = parse_num(line, key, value)?,
            "zeta" => cfg.zeta = parse_num(line, key, value)?,
            "ref_gain_db" => cfg.ref_gain_db = parse_num(line, key, value)?,
            "seed" => cfg.seed = parse_num(line, key, value)?,
            "trials" => cfg.trials = parse_num(line, key, value)?,
            "fading" => cfg.fading = value.parse().map_err(|e| config_err(line, e))?,
            "sweep" => cfg.sweep = value.parse().map_err(|e| config_err(line, e))?,
            "qbar_sweep_uw" => cfg.qbar_sweep_uw = parse_list(line, key, value)?,
            "p_sweep_dbm" => cfg.p_sweep_dbm = parse_list(line, key, value)?,
            "d1_sweep_m" => cfg.d1_sweep_m = parse_list(line, key, value)?,
            "schemes" => {
                let mut schemes = Vec::new();
                for name in value.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let s: Scheme = name.parse().map_err(|e| config_err(line, e))?;
                    if !schemes.contains(&s) {
                        schemes.push(s);
                    }
                }
                schemes.sort();
                cfg.schemes = schemes;
            }
            _ => {
                return Err(Error::UnknownKey {
                    line,
                    key: key.to_string(),
                })
            }
        }
        seen.push(key.to_string());
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_name: String,
    pub sweep_value: f64,
    pub trial: u64,
    pub scheme: Scheme,
    /// As computed, even when the allocation is infeasible.
    pub secrecy_rate_bits: f64,
    pub feasible: bool,
    pub iterations: usize,
    pub runtime_ms: f64,
    pub seed: u64,
    pub fading: FadingKind,
}

impl ResultRow {
    /// Rate used for aggregation: infeasible rows count as zero.
    pub fn effective_rate(&self) -> f64 {
        if self.feasible {
            self.secrecy_rate_bits
        } else {
            0.0
        }
    }
}

pub fn run_scheme(scheme: Scheme, ch: &ChannelState, params: &SystemParams) -> Result<(f64, bool, usize)> {
    Ok(match scheme {
        Scheme::Proposed => {
            let r = ellipsoid_solve(ch, params, &DualConfig::default())?;
            (r.allocation.secrecy_rate, r.allocation.feasible, r.iterations)
        }
        Scheme::Epa => {
            let r = epa_allocate(ch, params)?;
            (r.allocation.secrecy_rate, r.allocation.feasible, r.iterations)
        }
        Scheme::NoJammer => {
            let r = no_jammer_solve_with(ch, params, &BaselineConfig::default())?;
            (r.allocation.secrecy_rate, r.allocation.feasible, r.iterations)
        }
        Scheme::NoCancelBcd => {
            let r = bcd_nocancel_solve(ch, params, &BaselineConfig::default())?;
            (r.allocation.secrecy_rate, r.allocation.feasible, r.iterations)
        }
    })
}

fn run_cell(cfg: &ExperimentConfig, point: &SweepPoint, trial: u64) -> Result<Vec<ResultRow>> {
    let (params, ch) = cfg.channel_for(point, trial)?;
    cfg.schemes
        .iter()
        .map(|&scheme| {
            let start = Instant::now();
            let (rate, feasible, iterations) = run_scheme(scheme, &ch, &params)?;
            Ok(ResultRow {
                sweep_name: point.name.clone(),
                sweep_value: point.value,
                trial,
                scheme,
                secrecy_rate_bits: rate,
                feasible,
                iterations,
                runtime_ms: start.elapsed().as_secs_f64() * 1e3,
                seed: cfg.seed,
                fading: cfg.fading,
            })
        })
        .collect()
}

fn thread_count() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

/// Runs every (sweep point, trial) cell in parallel. Rows come back ordered
/// by sweep point, trial and scheme regardless of scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let points = cfg.sweep_points();
    let cells: Vec<(usize, u64)> = (0..points.len())
        .flat_map(|i| (0..cfg.trials).map(move |t| (i, t)))
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| invalid("threads", e.to_string()))?;
    let mut results: Vec<((usize, u64), Vec<ResultRow>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(i, t)| run_cell(cfg, &points[i], t).map(|rows| ((i, t), rows)))
            .collect::<Result<Vec<_>>>()
    })?;
    results.sort_by_key(|(key, _)| *key);
    Ok(results.into_iter().flat_map(|(_, rows)| rows).collect())
}

pub const CSV_HEADER: [&str; 10] = [
    "sweep_name",
    "sweep_value",
    "trial",
    "scheme",
    "secrecy_rate_bits",
    "feasible",
    "iterations",
    "runtime_ms",
    "seed",
    "fading",
];

fn io_err(path: &Path, e: impl fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

/// CSV text for `rows`. Floats use the shortest representation that parses
/// back to the same value.
pub fn to_csv(rows: &[ResultRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Csv {
        line: 0,
        reason: e.to_string(),
    };
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.sweep_name.clone(),
            r.sweep_value.to_string(),
            r.trial.to_string(),
            r.scheme.to_string(),
            r.secrecy_rate_bits.to_string(),
            r.feasible.to_string(),
            r.iterations.to_string(),
            format!("{:.3}", r.runtime_ms),
            r.seed.to_string(),
            r.fading.to_string(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv {
        line: 0,
        reason: e.to_string(),
    })?;
    String::from_utf8(bytes).map_err(|e| Error::Csv {
        line: 0,
        reason: e.to_string(),
    })
}

pub fn write_csv(rows: &[ResultRow], path: &Path) -> Result<()> {
    if rows.is_empty() {
        return Err(invalid("rows", "nothing to write"));
    }
    let text = to_csv(rows)?;
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

fn field<T: FromStr>(rec: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse().map_err(|_| Error::Csv {
        line,
        reason: format!("column `{}`: cannot parse `{raw}`", CSV_HEADER[idx]),
    })
}

/// Parses text produced by [`to_csv`].
pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_reader(text.as_bytes());
    let mut rows = Vec::new();
    let mut header_seen = false;
    for (idx, rec) in rdr.records().enumerate() {
        let line = idx + 1;
        let rec = rec.map_err(|e| Error::Csv {
            line,
            reason: e.to_string(),
        })?;
        if !header_seen {
            if rec.iter().ne(CSV_HEADER.iter().copied()) {
                return Err(Error::Csv {
                    line,
                    reason: "unexpected header".into(),
                });
            }
            header_seen = true;
            continue;
        }
        if rec.len() != CSV_HEADER.len() {
            return Err(Error::Csv {
                line,
                reason: format!("expected {} fields, found {}", CSV_HEADER.len(), rec.len()),
            });
        }
        let scheme: std::result::Result<Scheme, _> = rec[3].parse();
        let fading: std::result::Result<FadingKind, _> = rec[9].parse();
        rows.push(ResultRow {
            sweep_name: rec[0].to_string(),
            sweep_value: field(&rec, 1, line)?,
            trial: field(&rec, 2, line)?,
            scheme: scheme.map_err(|reason| Error::Csv { line, reason })?,
            secrecy_rate_bits: field(&rec, 4, line)?,
            feasible: field(&rec, 5, line)?,
            iterations: field(&rec, 6, line)?,
            runtime_ms: field(&rec, 7, line)?,
            seed: field(&rec, 8, line)?,
            fading: fading.map_err(|reason| Error::Csv { line, reason })?,
        });
    }
    if !header_seen {
        return Err(Error::Csv {
            line: 1,
            reason: "missing header".into(),
        });
    }
    Ok(rows)
}

pub fn read_csv(path: &Path) -> Result<Vec<ResultRow>> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_csv(&text)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub sweep_name: String,
    pub sweep_value: f64,
    pub scheme: Scheme,
    pub trials: usize,
    pub mean_rate: f64,
    /// 95% normal-approximation half-width, `1.96 · s / √n`.
    pub ci_half_width: f64,
    pub feasible_fraction: f64,
}

/// Per (sweep point, scheme) statistics, in first-appearance order of the
/// sweep points and scheme order within each point.
pub fn aggregate(rows: &[ResultRow]) -> Vec<Aggregate> {
    let mut keys: Vec<(String, f64)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|(n, v)| *n == r.sweep_name && v.to_bits() == r.sweep_value.to_bits()) {
            keys.push((r.sweep_name.clone(), r.sweep_value));
        }
    }
    let mut out = Vec::new();
    for (name, value) in keys {
        for scheme in Scheme::ALL {
            let rates: Vec<(f64, bool)> = rows
                .iter()
                .filter(|r| r.sweep_name == name && r.sweep_value.to_bits() == value.to_bits() && r.scheme == scheme)
                .map(|r| (r.effective_rate(), r.feasible))
                .collect();
            if rates.is_empty() {
                continue;
            }
            let n = rates.len() as f64;
            let mean = rates.iter().map(|r| r.0).sum::<f64>() / n;
            let ci = if rates.len() > 1 {
                let var = rates.iter().map(|r| (r.0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
                1.96 * var.sqrt() / n.sqrt()
            } else {
                0.0
            };
            out.push(Aggregate {
                sweep_name: name.clone(),
                sweep_value: value,
                scheme,
                trials: rates.len(),
                mean_rate: mean,
                ci_half_width: ci,
                feasible_fraction: rates.iter().filter(|r| r.1).count() as f64 / n,
            });
        }
    }
    out
}
