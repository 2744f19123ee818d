//! Model calibration: the full parameter set, config-document I/O, scenario
//! presets, and the steady-state derivations used by the equation builder.
//!
//! All interest rates, spreads and inflation are annualized percentage points;
//! output, consumption and debt gaps are percent; the leverage gap is in
//! percentage points of GDP. Quarterly gross factors appear only inside
//! [`derive_budget_coefficients`].

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

/// AR(1) shock process: innovation standard deviation (p.p.) and persistence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShockSpec {
    pub std_dev: f64,
    pub persistence: f64,
}

/// Structural shocks recognized by the model, in registry order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Shock {
    Inflation,
    Fx,
    Monetary,
    Growth,
    CreditSupply,
    CreditDemand,
    WorldInflation,
    WorldMonetary,
    WorldGrowth,
    Oil,
}

impl Shock {
    pub const ALL: [Shock; 10] = [
        Shock::Inflation,
        Shock::Fx,
        Shock::Monetary,
        Shock::Growth,
        Shock::CreditSupply,
        Shock::CreditDemand,
        Shock::WorldInflation,
        Shock::WorldMonetary,
        Shock::WorldGrowth,
        Shock::Oil,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shock::Inflation => "inflation",
            Shock::Fx => "fx",
            Shock::Monetary => "monetary",
            Shock::Growth => "growth",
            Shock::CreditSupply => "credit_supply",
            Shock::CreditDemand => "credit_demand",
            Shock::WorldInflation => "world_inflation",
            Shock::WorldMonetary => "world_monetary",
            Shock::WorldGrowth => "world_growth",
            Shock::Oil => "oil",
        }
    }

    pub fn parse(name: &str) -> Result<Shock> {
        Shock::ALL
            .iter()
            .copied()
            .find(|s| s.name() == name)
            .ok_or_else(|| Error::UnknownShock(name.to_string()))
    }

    pub fn index(self) -> usize {
        Shock::ALL.iter().position(|&s| s == self).unwrap()
    }
}

/// Per-shock std dev / persistence table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShockTable {
    pub inflation: ShockSpec,
    pub fx: ShockSpec,
    pub monetary: ShockSpec,
    pub growth: ShockSpec,
    pub credit_supply: ShockSpec,
    pub credit_demand: ShockSpec,
    pub world_inflation: ShockSpec,
    pub world_monetary: ShockSpec,
    pub world_growth: ShockSpec,
    pub oil: ShockSpec,
}

impl ShockTable {
    pub fn spec(&self, shock: Shock) -> ShockSpec {
        match shock {
            Shock::Inflation => self.inflation,
            Shock::Fx => self.fx,
            Shock::Monetary => self.monetary,
            Shock::Growth => self.growth,
            Shock::CreditSupply => self.credit_supply,
            Shock::CreditDemand => self.credit_demand,
            Shock::WorldInflation => self.world_inflation,
            Shock::WorldMonetary => self.world_monetary,
            Shock::WorldGrowth => self.world_growth,
            Shock::Oil => self.oil,
        }
    }

    fn spec_mut(&mut self, shock: Shock) -> &mut ShockSpec {
        match shock {
            Shock::Inflation => &mut self.inflation,
            Shock::Fx => &mut self.fx,
            Shock::Monetary => &mut self.monetary,
            Shock::Growth => &mut self.growth,
            Shock::CreditSupply => &mut self.credit_supply,
            Shock::CreditDemand => &mut self.credit_demand,
            Shock::WorldInflation => &mut self.world_inflation,
            Shock::WorldMonetary => &mut self.world_monetary,
            Shock::WorldGrowth => &mut self.world_growth,
            Shock::Oil => &mut self.oil,
        }
    }
}

/// World-economy block parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorldBlock {
    /// Forward weight in the world inflation equation.
    pub alpha_w: f64,
    /// Output-gap slope of the world inflation equation.
    pub k_w: f64,
    /// Forward weight in the world demand equation.
    pub delta1_w: f64,
    /// Backward weight in the world demand equation.
    pub delta2_w: f64,
    /// Real-rate-gap elasticity in the world demand equation.
    pub delta3_w: f64,
    /// World benchmark-rate constant (levels only; drops out of the gap model).
    pub c0_w: f64,
    /// World benchmark-rate loading on expected potential growth.
    pub c1_w: f64,
    /// World policy-rate smoothing.
    pub gamma_w: f64,
    /// World policy response to expected four-quarter inflation.
    pub beta1_w: f64,
    /// World policy response to the output gap.
    pub beta2_w: f64,
    /// Persistence of world potential growth.
    pub theta_w: f64,
    /// Steady-state world potential growth, annualized percent.
    pub g_nw_ss: f64,
    /// World inflation target, annualized percentage points.
    pub pi_bar_w: f64,
}

/// Steady-state levels used for reporting and for the budget linearization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SteadyState {
    /// Inflation target, annualized percentage points.
    pub pi_bar: f64,
    /// Steady-state credit spread, percentage points (must be positive).
    pub spread_ss: f64,
    /// Steady-state debt-to-GDP ratio (debt over quarterly output).
    pub lev_ss: f64,
    /// Gross quarterly steady-state borrowing rate.
    pub r_b_ss: f64,
    /// Borrowers' steady-state income share of output.
    pub income_share: f64,
}

/// The complete parameter set. Immutable after construction; safe to share
/// across concurrent solver and simulator instances.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Calibration {
    /// Elasticity of the credit spread to the leverage gap (p.p. per p.p.).
    pub beta_lev_delta: f64,
    /// Magnitude of the benchmark-rate response to the spread.
    pub alpha_delta_nri: f64,
    /// Benchmark-rate loading on expected domestic potential growth.
    pub alpha_g_nri: f64,
    /// Benchmark-rate loading on expected world actual growth.
    pub alpha_gw_nri: f64,
    /// Benchmark-rate loading magnitude on the borrower-preference shock change.
    pub alpha_cb_nri: f64,
    /// Borrower debt aversion: penalty per p.p. of leverage gap.
    pub v: f64,
    /// Demand elasticity magnitude to the monetary stance.
    pub beta_r_y: f64,
    /// Borrower rate sensitivity as a multiple of `beta_r_y`.
    pub beta_r_cb_multiplier: f64,
    /// Forward weight in the borrower consumption equation.
    pub beta_ld_cb: f64,
    /// Forward weight in the inflation equation.
    pub a_ld_pi: f64,
    /// Output-gap slope of the inflation equation.
    pub a_y: f64,
    /// Real-depreciation pass-through to inflation.
    pub a_z_pi: f64,
    /// Oil-price pass-through to inflation, contemporaneous.
    pub a_oil_pi: f64,
    /// Oil-price pass-through to inflation, lagged.
    pub a_oil_lag_pi: f64,
    /// Forward weight in the real-exchange-rate parity equation.
    pub d_zld: f64,
    /// Forward weight in the demand equation.
    pub beta_yld_y: f64,
    /// Real-exchange-rate elasticity of demand.
    pub beta_z_y: f64,
    /// World-demand elasticity of domestic demand.
    pub beta_yw_y: f64,
    /// Policy-rate smoothing.
    pub g_lag: f64,
    /// Policy response to the inflation environment.
    pub g_pi: f64,
    /// Policy response to the output gap.
    pub g_y: f64,
    /// Weight on expected (vs realized) inflation in the policy rule.
    pub w_infl: f64,
    /// Persistence of potential growth.
    pub theta1: f64,
    /// Loading of potential growth on natural real depreciation (inert here:
    /// the natural real exchange rate is held constant in the gap model).
    pub theta2: f64,
    /// Loading of potential growth on world actual growth.
    pub theta3: f64,
    /// Steady-state potential growth, annualized percent.
    pub g_n_ss: f64,
    pub world: WorldBlock,
    pub steady: SteadyState,
    pub shocks: ShockTable,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            beta_lev_delta: 0.031,
            alpha_delta_nri: 0.5,
            alpha_g_nri: 0.4,
            alpha_gw_nri: 0.6,
            alpha_cb_nri: 0.4,
            v: 0.0225,
            beta_r_y: 0.1,
            beta_r_cb_multiplier: 5.0,
            beta_ld_cb: 0.45,
            a_ld_pi: 0.3,
            a_y: 0.3,
            a_z_pi: 0.1,
            a_oil_pi: 0.01,
            a_oil_lag_pi: 0.005,
            d_zld: 0.9,
            beta_yld_y: 0.25,
            beta_z_y: 0.05,
            beta_yw_y: 0.2,
            g_lag: 0.7,
            g_pi: 1.5,
            g_y: 0.5,
            w_infl: 0.7,
            theta1: 0.7,
            theta2: 0.1,
            theta3: 0.25,
            g_n_ss: 3.0,
            world: WorldBlock {
                alpha_w: 0.3,
                k_w: 0.2,
                delta1_w: 0.3,
                delta2_w: 0.3,
                delta3_w: 0.3,
                c0_w: 0.5,
                c1_w: 0.8,
                gamma_w: 0.8,
                beta1_w: 1.5,
                beta2_w: 0.5,
                theta_w: 0.75,
                g_nw_ss: 2.0,
                pi_bar_w: 2.0,
            },
            steady: SteadyState {
                pi_bar: 2.0,
                spread_ss: 2.0,
                lev_ss: 1.1,
                r_b_ss: 1.01,
                income_share: 0.3,
            },
            shocks: ShockTable {
                inflation: ShockSpec { std_dev: 0.4, persistence: 0.0 },
                fx: ShockSpec { std_dev: 1.0, persistence: 0.5 },
                monetary: ShockSpec { std_dev: 0.25, persistence: 0.0 },
                growth: ShockSpec { std_dev: 0.3, persistence: 0.0 },
                credit_supply: ShockSpec { std_dev: 0.4, persistence: 0.5 },
                credit_demand: ShockSpec { std_dev: 6.0, persistence: 0.5 },
                world_inflation: ShockSpec { std_dev: 0.3, persistence: 0.0 },
                world_monetary: ShockSpec { std_dev: 0.25, persistence: 0.0 },
                world_growth: ShockSpec { std_dev: 0.3, persistence: 0.0 },
                oil: ShockSpec { std_dev: 0.0, persistence: 0.5 },
            },
        }
    }
}

/// Canonical key list of the flat config document, sorted.
pub fn canonical_keys() -> Vec<String> {
    let mut keys: Vec<String> = SCALAR_KEYS.iter().map(|k| k.to_string()).collect();
    for shock in Shock::ALL {
        keys.push(format!("shocks.{}.std_dev", shock.name()));
        keys.push(format!("shocks.{}.persistence", shock.name()));
    }
    keys.sort();
    keys
}

const SCALAR_KEYS: &[&str] = &[
    "alpha_cb_nri",
    "alpha_delta_nri",
    "alpha_g_nri",
    "alpha_gw_nri",
    "a_ld_pi",
    "a_oil_lag_pi",
    "a_oil_pi",
    "a_y",
    "a_z_pi",
    "beta_ld_cb",
    "beta_lev_delta",
    "beta_r_cb_multiplier",
    "beta_r_y",
    "beta_yld_y",
    "beta_yw_y",
    "beta_z_y",
    "d_zld",
    "g_lag",
    "g_n_ss",
    "g_pi",
    "g_y",
    "steady.income_share",
    "steady.lev_ss",
    "steady.pi_bar",
    "steady.r_b_ss",
    "steady.spread_ss",
    "theta1",
    "theta2",
    "theta3",
    "v",
    "w_infl",
    "world.alpha_w",
    "world.beta1_w",
    "world.beta2_w",
    "world.c0_w",
    "world.c1_w",
    "world.delta1_w",
    "world.delta2_w",
    "world.delta3_w",
    "world.gamma_w",
    "world.g_nw_ss",
    "world.k_w",
    "world.pi_bar_w",
    "world.theta_w",
];

/// Parameters whose values are printed in the source material; all other
/// defaults are artifact choices and get flagged in the provenance log.
const PRINTED_KEYS: &[&str] = &[
    "beta_lev_delta",
    "alpha_delta_nri",
    "alpha_g_nri",
    "alpha_gw_nri",
    "alpha_cb_nri",
    "v",
    "beta_r_y",
    "beta_r_cb_multiplier",
    "shocks.credit_supply.std_dev",
];

impl Calibration {
    /// Look a parameter up by its flat config key.
    pub fn get(&self, key: &str) -> Result<f64> {
        if let Some(rest) = key.strip_prefix("shocks.") {
            let (name, field) = rest
                .rsplit_once('.')
                .ok_or_else(|| Error::UnknownKey(key.to_string()))?;
            let spec = self.shocks.spec(Shock::parse(name).map_err(|_| Error::UnknownKey(key.to_string()))?);
            return match field {
                "std_dev" => Ok(spec.std_dev),
                "persistence" => Ok(spec.persistence),
                _ => Err(Error::UnknownKey(key.to_string())),
            };
        }
        let v = match key {
            "beta_lev_delta" => self.beta_lev_delta,
            "alpha_delta_nri" => self.alpha_delta_nri,
            "alpha_g_nri" => self.alpha_g_nri,
            "alpha_gw_nri" => self.alpha_gw_nri,
            "alpha_cb_nri" => self.alpha_cb_nri,
            "v" => self.v,
            "beta_r_y" => self.beta_r_y,
            "beta_r_cb_multiplier" => self.beta_r_cb_multiplier,
            "beta_ld_cb" => self.beta_ld_cb,
            "a_ld_pi" => self.a_ld_pi,
            "a_y" => self.a_y,
            "a_z_pi" => self.a_z_pi,
            "a_oil_pi" => self.a_oil_pi,
            "a_oil_lag_pi" => self.a_oil_lag_pi,
            "d_zld" => self.d_zld,
            "beta_yld_y" => self.beta_yld_y,
            "beta_z_y" => self.beta_z_y,
            "beta_yw_y" => self.beta_yw_y,
            "g_lag" => self.g_lag,
            "g_pi" => self.g_pi,
            "g_y" => self.g_y,
            "w_infl" => self.w_infl,
            "theta1" => self.theta1,
            "theta2" => self.theta2,
            "theta3" => self.theta3,
            "g_n_ss" => self.g_n_ss,
            "world.alpha_w" => self.world.alpha_w,
            "world.k_w" => self.world.k_w,
            "world.delta1_w" => self.world.delta1_w,
            "world.delta2_w" => self.world.delta2_w,
            "world.delta3_w" => self.world.delta3_w,
            "world.c0_w" => self.world.c0_w,
            "world.c1_w" => self.world.c1_w,
            "world.gamma_w" => self.world.gamma_w,
            "world.beta1_w" => self.world.beta1_w,
            "world.beta2_w" => self.world.beta2_w,
            "world.theta_w" => self.world.theta_w,
            "world.g_nw_ss" => self.world.g_nw_ss,
            "world.pi_bar_w" => self.world.pi_bar_w,
            "steady.pi_bar" => self.steady.pi_bar,
            "steady.spread_ss" => self.steady.spread_ss,
            "steady.lev_ss" => self.steady.lev_ss,
            "steady.r_b_ss" => self.steady.r_b_ss,
            "steady.income_share" => self.steady.income_share,
            _ => return Err(Error::UnknownKey(key.to_string())),
        };
        Ok(v)
    }

    /// Set a parameter by its flat config key.
    pub fn set(&mut self, key: &str, value: f64) -> Result<()> {
        if let Some(rest) = key.strip_prefix("shocks.") {
            let (name, field) = rest
                .rsplit_once('.')
                .ok_or_else(|| Error::UnknownKey(key.to_string()))?;
            let shock = Shock::parse(name).map_err(|_| Error::UnknownKey(key.to_string()))?;
            let spec = self.shocks.spec_mut(shock);
            match field {
                "std_dev" => spec.std_dev = value,
                "persistence" => spec.persistence = value,
                _ => return Err(Error::UnknownKey(key.to_string())),
            }
            return Ok(());
        }
        match key {
            "beta_lev_delta" => self.beta_lev_delta = value,
            "alpha_delta_nri" => self.alpha_delta_nri = value,
            "alpha_g_nri" => self.alpha_g_nri = value,
            "alpha_gw_nri" => self.alpha_gw_nri = value,
            "alpha_cb_nri" => self.alpha_cb_nri = value,
            "v" => self.v = value,
            "beta_r_y" => self.beta_r_y = value,
            "beta_r_cb_multiplier" => self.beta_r_cb_multiplier = value,
            "beta_ld_cb" => self.beta_ld_cb = value,
            "a_ld_pi" => self.a_ld_pi = value,
            "a_y" => self.a_y = value,
            "a_z_pi" => self.a_z_pi = value,
            "a_oil_pi" => self.a_oil_pi = value,
            "a_oil_lag_pi" => self.a_oil_lag_pi = value,
            "d_zld" => self.d_zld = value,
            "beta_yld_y" => self.beta_yld_y = value,
            "beta_z_y" => self.beta_z_y = value,
            "beta_yw_y" => self.beta_yw_y = value,
            "g_lag" => self.g_lag = value,
            "g_pi" => self.g_pi = value,
            "g_y" => self.g_y = value,
            "w_infl" => self.w_infl = value,
            "theta1" => self.theta1 = value,
            "theta2" => self.theta2 = value,
            "theta3" => self.theta3 = value,
            "g_n_ss" => self.g_n_ss = value,
            "world.alpha_w" => self.world.alpha_w = value,
            "world.k_w" => self.world.k_w = value,
            "world.delta1_w" => self.world.delta1_w = value,
            "world.delta2_w" => self.world.delta2_w = value,
            "world.delta3_w" => self.world.delta3_w = value,
            "world.c0_w" => self.world.c0_w = value,
            "world.c1_w" => self.world.c1_w = value,
            "world.gamma_w" => self.world.gamma_w = value,
            "world.beta1_w" => self.world.beta1_w = value,
            "world.beta2_w" => self.world.beta2_w = value,
            "world.theta_w" => self.world.theta_w = value,
            "world.g_nw_ss" => self.world.g_nw_ss = value,
            "world.pi_bar_w" => self.world.pi_bar_w = value,
            "steady.pi_bar" => self.steady.pi_bar = value,
            "steady.spread_ss" => self.steady.spread_ss = value,
            "steady.lev_ss" => self.steady.lev_ss = value,
            "steady.r_b_ss" => self.steady.r_b_ss = value,
            "steady.income_share" => self.steady.income_share = value,
            _ => return Err(Error::UnknownKey(key.to_string())),
        }
        Ok(())
    }

    /// Check every documented invariant; errors name the offending key and bound.
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("beta_lev_delta", self.beta_lev_delta),
            ("alpha_delta_nri", self.alpha_delta_nri),
        ];
        for (key, v) in nonneg {
            if v.is_nan() || v < 0.0 {
                return Err(Error::Invariant { key: key.into(), bound: "≥ 0".into() });
            }
        }
        let positive = [
            ("v", self.v),
            ("steady.spread_ss", self.steady.spread_ss),
            ("steady.lev_ss", self.steady.lev_ss),
        ];
        for (key, v) in positive {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::Invariant { key: key.into(), bound: "> 0".into() });
            }
        }
        let weights = [
            ("a_ld_pi", self.a_ld_pi),
            ("d_zld", self.d_zld),
            ("beta_yld_y", self.beta_yld_y),
            ("beta_ld_cb", self.beta_ld_cb),
            ("world.alpha_w", self.world.alpha_w),
            ("world.gamma_w", self.world.gamma_w),
            ("g_lag", self.g_lag),
            ("w_infl", self.w_infl),
        ];
        for (key, v) in weights {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Invariant { key: key.into(), bound: "in [0, 1]".into() });
            }
        }
        for shock in Shock::ALL {
            let spec = self.shocks.spec(shock);
            if spec.std_dev.is_nan() || spec.std_dev < 0.0 {
                return Err(Error::Invariant {
                    key: format!("shocks.{}.std_dev", shock.name()),
                    bound: "≥ 0".into(),
                });
            }
            if !(0.0..1.0).contains(&spec.persistence) {
                return Err(Error::Invariant {
                    key: format!("shocks.{}.persistence", shock.name()),
                    bound: "in [0, 1)".into(),
                });
            }
        }
        let growth_persistence = self.theta1 + self.theta3;
        if growth_persistence.is_nan() || growth_persistence >= 1.0 {
            return Err(Error::Invariant {
                key: "theta1 + theta3".into(),
                bound: "< 1 (stationary potential growth)".into(),
            });
        }
        Ok(())
    }

    /// Gross quarterly inflation and growth factors implied by the annualized
    /// steady-state settings.
    pub fn quarterly_gross(&self) -> (f64, f64) {
        (1.0 + self.steady.pi_bar / 400.0, 1.0 + self.g_n_ss / 400.0)
    }

    /// Budget-constraint coefficients at this calibration's steady state.
    pub fn budget_coefficients(&self) -> Result<BudgetCoefficients> {
        let (pi_gross, g_gross) = self.quarterly_gross();
        derive_budget_coefficients(
            self.steady.lev_ss,
            self.steady.r_b_ss,
            pi_gross,
            g_gross,
            self.steady.income_share,
        )
    }

    /// Borrower interest-rate sensitivity implied by the multiplier.
    pub fn beta_r_cb(&self) -> f64 {
        self.beta_r_y * self.beta_r_cb_multiplier
    }

    /// Serialize to the canonical flat config document (sorted keys, one
    /// `key = value` per line). Byte-stable for a given calibration.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        for key in canonical_keys() {
            let value = self.get(&key).expect("canonical key");
            writeln!(out, "{} = {}", key, value).unwrap();
        }
        out
    }
}

/// One defaulted entry in the provenance log.
#[derive(Debug, Clone, Serialize)]
pub struct DefaultedKey {
    pub key: String,
    pub value: f64,
    /// True when the default is an artifact choice rather than a printed value.
    pub unprinted: bool,
}

/// Records which keys were filled from the default table during a load.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Provenance {
    pub defaulted: Vec<DefaultedKey>,
}

/// Parse a flat `key = value` config document. Omitted keys are filled from
/// the default table and recorded in the provenance log; unknown keys are
/// rejected.
pub fn load_calibration(source: &str) -> Result<(Calibration, Provenance)> {
    let mut seen: BTreeMap<String, f64> = BTreeMap::new();
    for (idx, raw) in source.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::ConfigParse {
            line: idx + 1,
            message: format!("expected `key = value`, got `{}`", line),
        })?;
        let key = key.trim().to_string();
        let value: f64 = value.trim().parse().map_err(|_| Error::ConfigParse {
            line: idx + 1,
            message: format!("`{}` is not a number", value.trim()),
        })?;
        if !value.is_finite() {
            return Err(Error::ConfigParse { line: idx + 1, message: "value must be finite".into() });
        }
        if seen.insert(key.clone(), value).is_some() {
            return Err(Error::ConfigParse { line: idx + 1, message: format!("duplicate key `{}`", key) });
        }
    }

    let mut cal = Calibration::default();
    let known = canonical_keys();
    for key in seen.keys() {
        if !known.iter().any(|k| k == key) {
            return Err(Error::UnknownKey(key.clone()));
        }
    }
    let mut provenance = Provenance::default();
    for key in &known {
        match seen.get(key) {
            Some(&value) => cal.set(key, value)?,
            None => provenance.defaulted.push(DefaultedKey {
                key: key.clone(),
                value: cal.get(key)?,
                unprinted: !PRINTED_KEYS.contains(&key.as_str()),
            }),
        }
    }
    cal.validate()?;
    Ok((cal, provenance))
}

/// Linearization coefficients of the borrower budget constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetCoefficients {
    /// Coefficient on lagged debt (and on the inflation/growth erosion terms).
    pub beta_lag: f64,
    /// Coefficient on borrower consumption.
    pub beta_b_cb: f64,
    /// Coefficient on output.
    pub beta_b_y: f64,
}

/// Linearize the borrower budget identity
/// `lev_t / R_t = c_t/y_t + lev_{t-1} / (pi_t * g_t) - income_share`
/// around the steady state given by gross quarterly factors.
pub fn derive_budget_coefficients(
    lev_ss: f64,
    r_b_ss: f64,
    pi_bar: f64,
    g_ss: f64,
    income_share: f64,
) -> Result<BudgetCoefficients> {
    for (name, v) in [
        ("lev_ss", lev_ss),
        ("r_b_ss", r_b_ss),
        ("pi_bar", pi_bar),
        ("g_ss", g_ss),
        ("income_share", income_share),
    ] {
        if v.is_nan() || v <= 0.0 {
            return Err(Error::InvalidArgument(format!("{} must be positive", name)));
        }
    }
    let beta_lag = r_b_ss / (pi_bar * g_ss);
    let consumption_share = lev_ss * (1.0 / r_b_ss - 1.0 / (pi_bar * g_ss)) + income_share;
    if consumption_share <= 0.0 {
        return Err(Error::NonPositiveConsumption);
    }
    let beta_b = consumption_share * r_b_ss / lev_ss;
    Ok(BudgetCoefficients { beta_lag, beta_b_cb: beta_b, beta_b_y: beta_b })
}

/// Total spread elasticity from market-level elasticities and the mortgage
/// share of total debt.
pub fn aggregate_spread_elasticity(beta_h: f64, w_h: f64, beta_nh: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&w_h) {
        return Err(Error::InvalidArgument("w_h must be in [0, 1]".into()));
    }
    Ok(beta_h * w_h * w_h + beta_nh * (1.0 - w_h) * (1.0 - w_h))
}

/// Named scenario presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PresetName {
    NoFriction,
    BaselineFriction,
    Macroprudential,
    Accelerator,
    Custom,
}

impl PresetName {
    pub const ALL: [PresetName; 5] = [
        PresetName::NoFriction,
        PresetName::BaselineFriction,
        PresetName::Macroprudential,
        PresetName::Accelerator,
        PresetName::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PresetName::NoFriction => "no_friction",
            PresetName::BaselineFriction => "baseline_friction",
            PresetName::Macroprudential => "macroprudential",
            PresetName::Accelerator => "accelerator",
            PresetName::Custom => "custom",
        }
    }

    pub fn parse(name: &str) -> Result<PresetName> {
        PresetName::ALL
            .iter()
            .copied()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown scenario: {}", name)))
    }

    /// Parameter overrides the preset applies on top of a base calibration.
    pub fn preset_overrides(self) -> Vec<(&'static str, f64)> {
        match self {
            PresetName::NoFriction => vec![("beta_lev_delta", 0.0)],
            PresetName::BaselineFriction => vec![("beta_lev_delta", 0.031)],
            PresetName::Macroprudential => vec![("beta_lev_delta", 0.1)],
            PresetName::Accelerator => vec![("beta_r_y", 0.5), ("beta_r_cb_multiplier", 0.2)],
            PresetName::Custom => vec![],
        }
    }
}

/// A preset plus user-supplied key overrides.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub preset: PresetName,
    pub overrides: BTreeMap<String, f64>,
}

impl Scenario {
    pub fn preset(preset: PresetName) -> Scenario {
        Scenario { preset, overrides: BTreeMap::new() }
    }

    pub fn with_override(mut self, key: &str, value: f64) -> Scenario {
        self.overrides.insert(key.to_string(), value);
        self
    }

    /// Apply preset overrides, then user overrides, then re-validate.
    pub fn apply(&self, base: &Calibration) -> Result<Calibration> {
        let mut cal = base.clone();
        for (key, value) in self.preset.preset_overrides() {
            cal.set(key, value)?;
        }
        for (key, value) in &self.overrides {
            cal.set(key, *value)?;
        }
        cal.validate()?;
        Ok(cal)
    }
}
