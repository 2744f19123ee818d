//! Impulse responses, seeded stochastic simulation, loss-function evaluation
//! and scenario comparisons on top of a solved law of motion.
//!
//! Everything here is pure given (solution, seed): identical inputs give
//! bit-identical output. Innovation draws are generated per period in shock
//! registry order, for active shocks only, from a ChaCha8 stream seeded with
//! the run seed; the first 100 periods of every stochastic run are discarded
//! to remove the zero-state initialization transient.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::calibration::Calibration;
use crate::error::{Error, Result};
use crate::model::{build_system, PolicyRule};
use crate::solver::{solve, Solution, DEFAULT_TOL};

/// Periods discarded at the start of every stochastic simulation.
pub const BURN_IN: usize = 100;

/// Round to 12 significant digits, the precision of every emitted artifact.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{:.11e}", x).parse().unwrap()
}

/// Format a value for CSV output at artifact precision.
pub fn format_sig12(x: f64) -> String {
    let r = round_sig12(x);
    if r == 0.0 {
        "0".to_string()
    } else {
        format!("{}", r)
    }
}

/// Provenance attached to a generated path.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PathMetadata {
    pub scenario: Option<String>,
    pub policy: Option<String>,
    pub shock: Option<String>,
    pub shock_size: Option<f64>,
    pub seed: Option<u64>,
    pub swept_parameter: Option<String>,
    pub swept_value: Option<f64>,
}

/// Labeled time-series matrix in deviation-from-steady-state units.
/// Rows are quarters, columns follow the variable registry.
#[derive(Debug, Clone)]
pub struct PathSet {
    pub labels: Vec<String>,
    pub values: DMatrix<f64>,
    pub metadata: PathMetadata,
}

impl PathSet {
    pub fn zeros(horizon: usize, labels: Vec<String>) -> PathSet {
        let n = labels.len();
        PathSet { labels, values: DMatrix::zeros(horizon, n), metadata: PathMetadata::default() }
    }

    pub fn horizon(&self) -> usize {
        self.values.nrows()
    }

    pub fn n_series(&self) -> usize {
        self.values.ncols()
    }

    pub fn series_index(&self, name: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn series(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.series_index(name)?;
        Ok((0..self.horizon()).map(|t| self.values[(t, j)]).collect())
    }

    pub fn all_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// CSV rendering: header row of labels with the period column first, one
    /// row per quarter, 12 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("period");
        for label in &self.labels {
            out.push(',');
            out.push_str(label);
        }
        out.push('\n');
        for t in 0..self.horizon() {
            out.push_str(&t.to_string());
            for j in 0..self.n_series() {
                out.push(',');
                out.push_str(&format_sig12(self.values[(t, j)]));
            }
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<Vec<f64>> = (0..self.horizon())
            .map(|t| (0..self.n_series()).map(|j| round_sig12(self.values[(t, j)])).collect())
            .collect();
        serde_json::json!({
            "labels": self.labels,
            "values": rows,
            "metadata": self.metadata,
        })
    }
}

/// Innovation matrix for a seeded run: `periods` rows, one column per shock
/// in registry order. Active shocks get independent standard normals scaled
/// by their std dev; inactive shocks are identically zero.
pub fn draw_innovations(
    sol: &Solution,
    periods: usize,
    seed: u64,
    active: &[usize],
) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut eta = DMatrix::<f64>::zeros(periods, sol.n_shocks());
    for t in 0..periods {
        for (k, spec) in sol.shock_specs.iter().enumerate() {
            if active.contains(&k) {
                let draw: f64 = StandardNormal.sample(&mut rng);
                eta[(t, k)] = spec.std_dev * draw;
            }
        }
    }
    eta
}

/// Propagate `x_t = P x_{t-1} + Q eta_t` from rest, discarding the first
/// `discard` periods.
pub fn propagate(sol: &Solution, innovations: &DMatrix<f64>, discard: usize) -> PathSet {
    let total = innovations.nrows();
    let n = sol.n_vars();
    let kept = total.saturating_sub(discard);
    let mut values = DMatrix::<f64>::zeros(kept, n);
    let mut x = DVector::<f64>::zeros(n);
    for t in 0..total {
        let eta = innovations.row(t).transpose();
        x = &sol.transition * &x + &sol.loading * &eta;
        if t >= discard {
            values.set_row(t - discard, &x.transpose());
        }
    }
    PathSet {
        labels: sol.registry.names(),
        values,
        metadata: PathMetadata { policy: Some(sol.policy.name().to_string()), ..Default::default() },
    }
}

fn irf_impulse(sol: &Solution, shock: &str, impulse: f64, horizon: usize) -> Result<PathSet> {
    if horizon < 1 {
        return Err(Error::InvalidArgument("horizon must be at least 1".into()));
    }
    let k = sol.shock_index(shock)?;
    let rows = horizon + 1;
    let mut eta = DMatrix::<f64>::zeros(rows, sol.n_shocks());
    eta[(0, k)] = impulse;
    let mut path = propagate(sol, &eta, 0);
    path.metadata.shock = Some(shock.to_string());
    path.metadata.shock_size = Some(impulse);
    Ok(path)
}

/// Impulse response to a one-time innovation of `size` standard deviations.
/// Periods 0..=horizon; period 0 is the impact response `Q e_k size sigma_k`.
pub fn irf(sol: &Solution, shock: &str, size: f64, horizon: usize) -> Result<PathSet> {
    let k = sol.shock_index(shock)?;
    irf_impulse(sol, shock, size * sol.shock_specs[k].std_dev, horizon)
}

/// Impulse response to a one-time innovation of `size_pp` shock units,
/// independent of the calibrated standard deviation.
pub fn irf_absolute(sol: &Solution, shock: &str, size_pp: f64, horizon: usize) -> Result<PathSet> {
    irf_impulse(sol, shock, size_pp, horizon)
}

/// Innovation path matching [`irf`], for residual verification.
pub fn irf_innovations(sol: &Solution, shock: &str, size: f64, horizon: usize) -> Result<PathSet> {
    let k = sol.shock_index(shock)?;
    let rows = horizon + 1;
    let mut values = DMatrix::<f64>::zeros(rows, sol.n_shocks());
    values[(0, k)] = size * sol.shock_specs[k].std_dev;
    Ok(PathSet {
        labels: sol.shock_names.clone(),
        values,
        metadata: PathMetadata { shock: Some(shock.to_string()), ..Default::default() },
    })
}

fn resolve_active(sol: &Solution, active_shocks: &[String]) -> Result<Vec<usize>> {
    let mut active = Vec::with_capacity(active_shocks.len());
    for name in active_shocks {
        active.push(sol.shock_index(name)?);
    }
    Ok(active)
}

/// Seeded stochastic simulation with the given active shock set. Identical
/// (seed, inputs) give bit-identical output.
pub fn stochastic_simulate(
    sol: &Solution,
    periods: usize,
    seed: u64,
    active_shocks: &[String],
) -> Result<PathSet> {
    if periods < 1 {
        return Err(Error::InvalidArgument("periods must be at least 1".into()));
    }
    let active = resolve_active(sol, active_shocks)?;
    let eta = draw_innovations(sol, periods + BURN_IN, seed, &active);
    let mut path = propagate(sol, &eta, BURN_IN);
    path.metadata.seed = Some(seed);
    Ok(path)
}

/// Loss-function versions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LossVersion {
    V1,
    V2,
    V3,
    V4,
}

impl LossVersion {
    pub const ALL: [LossVersion; 4] = [LossVersion::V1, LossVersion::V2, LossVersion::V3, LossVersion::V4];

    pub fn number(self) -> u8 {
        match self {
            LossVersion::V1 => 1,
            LossVersion::V2 => 2,
            LossVersion::V3 => 3,
            LossVersion::V4 => 4,
        }
    }

    pub fn from_number(k: u8) -> Result<LossVersion> {
        match k {
            1 => Ok(LossVersion::V1),
            2 => Ok(LossVersion::V2),
            3 => Ok(LossVersion::V3),
            4 => Ok(LossVersion::V4),
            other => Err(Error::InvalidArgument(format!("loss version must be 1..4, got {}", other))),
        }
    }
}

fn population_variance(series: &[f64]) -> f64 {
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
}

fn first_difference(series: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(series.len());
    let mut prev = 0.0;
    for &x in series {
        out.push(x - prev);
        prev = x;
    }
    out
}

/// Policy loss on a simulated path.
///
/// Version 1: var(infl) + alpha var(ygap).
/// Version 2: var(infl) + alpha var(growth gap), where the growth gap
///            (actual minus potential growth) equals the change in the
///            output gap in deviation form.
/// Versions 3/4 add beta var(change in the policy rate).
/// Variances are population variances; first differences take a zero
/// pre-sample value, consistent with deviation form.
pub fn loss(paths: &PathSet, version: LossVersion, alpha: f64, beta: f64) -> Result<f64> {
    let infl = paths.series("infl").map_err(|_| Error::MissingSeries("infl".into()))?;
    let v_pi = population_variance(&infl);
    let real_activity = match version {
        LossVersion::V1 | LossVersion::V3 => {
            let ygap = paths.series("ygap").map_err(|_| Error::MissingSeries("ygap".into()))?;
            population_variance(&ygap)
        }
        LossVersion::V2 | LossVersion::V4 => {
            let ygap = paths.series("ygap").map_err(|_| Error::MissingSeries("ygap".into()))?;
            population_variance(&first_difference(&ygap))
        }
    };
    let mut total = v_pi + alpha * real_activity;
    if matches!(version, LossVersion::V3 | LossVersion::V4) {
        let irate = paths.series("irate").map_err(|_| Error::MissingSeries("irate".into()))?;
        total += beta * population_variance(&first_difference(&irate));
    }
    Ok(total)
}

/// One row of a rule-comparison report.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LossEntry {
    pub version: u8,
    pub fi: f64,
    pub pi: f64,
    pub ratio: f64,
}

/// Losses under the fully and partially informative rules with common random
/// numbers, all four versions.
#[derive(Debug, Clone, Serialize)]
pub struct LossReport {
    pub entries: [LossEntry; 4],
    pub v: f64,
    pub alpha: f64,
    pub beta: f64,
    pub periods: usize,
    pub seed: u64,
    pub active_shocks: Vec<String>,
    /// Set when both losses are exactly zero and the ratio defaults to 1.
    pub degenerate: bool,
}

/// Compare the two policy rules by seed-paired stochastic simulation with the
/// credit demand and credit supply shocks active.
pub fn compare_rules(
    cal: &Calibration,
    v: f64,
    alpha: f64,
    beta: f64,
    periods: usize,
    seed: u64,
) -> Result<LossReport> {
    let mut cal = cal.clone();
    cal.set("v", v)?;
    cal.validate()?;

    let fi_sol = solve(&build_system(&cal, PolicyRule::Fi)?, DEFAULT_TOL)?;
    let pi_sol = solve(&build_system(&cal, PolicyRule::Pi)?, DEFAULT_TOL)?;

    let active_names = vec!["credit_supply".to_string(), "credit_demand".to_string()];
    let active = resolve_active(&fi_sol, &active_names)?;
    // Common random numbers: one draw applied to both rules.
    let eta = draw_innovations(&fi_sol, periods + BURN_IN, seed, &active);
    let fi_path = propagate(&fi_sol, &eta, BURN_IN);
    let pi_path = propagate(&pi_sol, &eta, BURN_IN);

    let mut entries = [LossEntry { version: 0, fi: 0.0, pi: 0.0, ratio: 0.0 }; 4];
    let mut degenerate = false;
    for (slot, version) in LossVersion::ALL.into_iter().enumerate() {
        let fi = loss(&fi_path, version, alpha, beta)?;
        let pi = loss(&pi_path, version, alpha, beta)?;
        let ratio = if fi > 0.0 {
            pi / fi
        } else {
            degenerate = true;
            1.0
        };
        entries[slot] = LossEntry { version: version.number(), fi, pi, ratio };
    }
    Ok(LossReport {
        entries,
        v,
        alpha,
        beta,
        periods,
        seed,
        active_shocks: active_names,
        degenerate,
    })
}

/// Impulse-response experiment description for sweeps.
#[derive(Debug, Clone)]
pub struct IrfExperiment {
    pub shock: String,
    /// Size in standard deviations unless `absolute` is set.
    pub size: f64,
    pub absolute: bool,
    pub horizon: usize,
    pub policy: PolicyRule,
}

/// One sweep entry: the parameter value and the outcome for that value.
#[derive(Debug)]
pub struct SweepEntry {
    pub value: f64,
    pub outcome: Result<PathSet>,
}

/// Re-solve and re-run the same impulse-response experiment across a set of
/// values for one calibration key. Solver failures are recorded per entry and
/// the sweep continues; results keep input order.
pub fn scenario_sweep(
    cal: &Calibration,
    parameter: &str,
    values: &[f64],
    experiment: &IrfExperiment,
) -> Result<Vec<SweepEntry>> {
    // Reject unknown keys up front rather than once per entry.
    cal.get(parameter)?;
    let mut out = Vec::with_capacity(values.len());
    for &value in values {
        let outcome = (|| -> Result<PathSet> {
            let mut c = cal.clone();
            c.set(parameter, value)?;
            c.validate()?;
            let sol = solve(&build_system(&c, experiment.policy)?, DEFAULT_TOL)?;
            let mut path = if experiment.absolute {
                irf_absolute(&sol, &experiment.shock, experiment.size, experiment.horizon)?
            } else {
                irf(&sol, &experiment.shock, experiment.size, experiment.horizon)?
            };
            path.metadata.swept_parameter = Some(parameter.to_string());
            path.metadata.swept_value = Some(value);
            path.metadata.policy = Some(experiment.policy.name().to_string());
            Ok(path)
        })();
        out.push(SweepEntry { value, outcome });
    }
    Ok(out)
}
