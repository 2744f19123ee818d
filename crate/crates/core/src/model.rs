//! Assembly of the model equations into a canonical stacked first-order
//! linear expectational system
//!
//! ```text
//! A · E_t[x_{t+1}] + B · x_t + C · x_{t-1} + D · eta_t = 0
//! ```
//!
//! where `x` stacks every variable in deviation-from-steady-state form and
//! `eta` holds the shock innovations (in shock units; standard deviations are
//! applied at simulation time, so the system matrices are independent of
//! shock scale). Leads beyond one quarter are realized through auxiliary
//! forward-chain variables, lags beyond one quarter through lag chains, and
//! every expectation term is materialized as a dedicated lead variable so
//! structural rows carry no expectation entries of their own.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::calibration::{Calibration, Shock};
use crate::error::{Error, Result};
use crate::simulate::PathSet;

/// Which benchmark-rate concept the policy rule reacts to: the full rate with
/// credit-spread and borrower-preference terms, or the stripped-down rate
/// that ignores the credit market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PolicyRule {
    /// Fully informative: the policy rule sees the complete benchmark rate.
    Fi,
    /// Partially informative: the policy rule ignores spread and preference terms.
    Pi,
}

impl PolicyRule {
    pub fn name(self) -> &'static str {
        match self {
            PolicyRule::Fi => "fi",
            PolicyRule::Pi => "pi",
        }
    }

    pub fn parse(s: &str) -> Result<PolicyRule> {
        match s {
            "fi" => Ok(PolicyRule::Fi),
            "pi" => Ok(PolicyRule::Pi),
            other => Err(Error::InvalidArgument(format!("unknown policy rule: {}", other))),
        }
    }
}

/// Role of a variable in the saddle-path partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum VarKind {
    /// Carries an initial condition (appears dated t-1 in a dynamic equation).
    Predetermined,
    /// Forward-determined; contributes one unstable root to the counting rule.
    Jump,
    /// Static identity or lead/lag bookkeeping variable.
    Auxiliary,
    /// AR(1) shock state driven by an innovation.
    Exogenous,
}

/// One registry entry.
#[derive(Debug, Clone, Serialize)]
pub struct VarInfo {
    pub name: &'static str,
    pub kind: VarKind,
    pub description: &'static str,
}

/// Ordered variable registry with name lookup.
#[derive(Debug, Clone, Serialize)]
pub struct VariableRegistry {
    pub entries: Vec<VarInfo>,
}

impl VariableRegistry {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.entries
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn names(&self) -> Vec<String> {
        self.entries.iter().map(|v| v.name.to_string()).collect()
    }

    pub fn count_kind(&self, kind: VarKind) -> usize {
        self.entries.iter().filter(|v| v.kind == kind).count()
    }
}

/// Indices of every model variable, fixed at build time.
#[derive(Debug, Clone, Copy)]
pub struct VarIdx {
    pub infl: usize,
    pub infl_lag1: usize,
    pub infl_lag2: usize,
    pub infl_lag3: usize,
    pub infl_4q: usize,
    pub infl_lead1: usize,
    pub infl_lead2: usize,
    pub infl_lead3: usize,
    pub infl_lead4: usize,
    pub infl_4q_exp: usize,
    pub ygap: usize,
    pub ygap_lead1: usize,
    pub rer: usize,
    pub rer_lead1: usize,
    pub risk_premium: usize,
    pub rreal: usize,
    pub rgap: usize,
    pub nri: usize,
    pub nri_policy: usize,
    pub irate: usize,
    pub pot_growth: usize,
    pub pot_growth_lead1: usize,
    pub leverage: usize,
    pub spread: usize,
    pub rate_b: usize,
    pub cons_b: usize,
    pub cons_b_lead1: usize,
    pub debt: usize,
    pub credit_demand_lead1: usize,
    pub infl_w: usize,
    pub infl_w_lag1: usize,
    pub infl_w_lag2: usize,
    pub infl_w_lag3: usize,
    pub infl_w_4q: usize,
    pub infl_w_lead1: usize,
    pub infl_w_lead2: usize,
    pub infl_w_lead3: usize,
    pub infl_w_lead4: usize,
    pub infl_w_4q_exp: usize,
    pub ygap_w: usize,
    pub ygap_w_lead1: usize,
    pub rreal_w: usize,
    pub rgap_w: usize,
    pub nri_w: usize,
    pub irate_w: usize,
    pub pot_growth_w: usize,
    pub pot_growth_w_lead1: usize,
    pub growth_w: usize,
    pub growth_w_lead1: usize,
    pub shock_state: [usize; 10],
}

/// The canonical system plus registries and the saddle partition counts.
#[derive(Debug, Clone)]
pub struct ModelSystem {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub registry: VariableRegistry,
    pub shock_names: Vec<&'static str>,
    pub row_tags: Vec<&'static str>,
    pub n_predetermined: usize,
    pub n_jump: usize,
    pub policy: PolicyRule,
    pub idx: VarIdx,
    pub calibration: Calibration,
}

impl ModelSystem {
    pub fn n_vars(&self) -> usize {
        self.registry.len()
    }

    pub fn n_shocks(&self) -> usize {
        self.shock_names.len()
    }

    pub fn shock_index(&self, name: &str) -> Result<usize> {
        self.shock_names
            .iter()
            .position(|s| *s == name)
            .ok_or_else(|| Error::UnknownShock(name.to_string()))
    }

    /// Serialize matrices, registry and row tags as a JSON document.
    pub fn to_json(&self) -> serde_json::Value {
        let mat = |m: &DMatrix<f64>| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
        };
        serde_json::json!({
            "variables": self.registry.entries,
            "shocks": self.shock_names,
            "row_tags": self.row_tags,
            "n_predetermined": self.n_predetermined,
            "n_jump": self.n_jump,
            "policy": self.policy.name(),
            "lead": mat(&self.a),
            "current": mat(&self.b),
            "lag": mat(&self.c),
            "innovation": mat(&self.d),
        })
    }
}

struct SystemBuilder {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    d: DMatrix<f64>,
    tags: Vec<&'static str>,
    row: usize,
}

impl SystemBuilder {
    fn new(n: usize, n_shocks: usize) -> Self {
        SystemBuilder {
            a: DMatrix::zeros(n, n),
            b: DMatrix::zeros(n, n),
            c: DMatrix::zeros(n, n),
            d: DMatrix::zeros(n, n_shocks),
            tags: Vec::with_capacity(n),
            row: 0,
        }
    }

    fn eq(&mut self, tag: &'static str) -> RowBuilder<'_> {
        let row = self.row;
        self.row += 1;
        self.tags.push(tag);
        RowBuilder { sys: self, row }
    }
}

struct RowBuilder<'a> {
    sys: &'a mut SystemBuilder,
    row: usize,
}

impl RowBuilder<'_> {
    /// Coefficient on E_t[x_{t+1}].
    fn lead(self, var: usize, coef: f64) -> Self {
        self.sys.a[(self.row, var)] += coef;
        self
    }

    /// Coefficient on x_t.
    fn cur(self, var: usize, coef: f64) -> Self {
        self.sys.b[(self.row, var)] += coef;
        self
    }

    /// Coefficient on x_{t-1}.
    fn lag(self, var: usize, coef: f64) -> Self {
        self.sys.c[(self.row, var)] += coef;
        self
    }

    /// Coefficient on an innovation.
    fn innovation(self, shock: usize, coef: f64) -> Self {
        self.sys.d[(self.row, shock)] += coef;
        self
    }
}

fn registry() -> (VariableRegistry, VarIdx) {
    use VarKind::*;
    let mut entries: Vec<VarInfo> = Vec::new();
    let mut push = |name: &'static str, kind: VarKind, description: &'static str| -> usize {
        entries.push(VarInfo { name, kind, description });
        entries.len() - 1
    };

    let infl = push("infl", Jump, "quarterly CPI inflation, annualized p.p. deviation from target");
    let infl_lag1 = push("infl_lag1", Predetermined, "inflation lagged one quarter (lag chain)");
    let infl_lag2 = push("infl_lag2", Predetermined, "inflation lagged two quarters (lag chain)");
    let infl_lag3 = push("infl_lag3", Predetermined, "inflation lagged three quarters (lag chain)");
    let infl_4q = push("infl_4q", Auxiliary, "four-quarter average inflation ending this quarter");
    let infl_lead1 = push("infl_lead1", Jump, "expected inflation one quarter ahead (lead chain)");
    let infl_lead2 = push("infl_lead2", Jump, "expected inflation two quarters ahead (lead chain)");
    let infl_lead3 = push("infl_lead3", Jump, "expected inflation three quarters ahead (lead chain)");
    let infl_lead4 = push("infl_lead4", Auxiliary, "expected inflation four quarters ahead (lead chain)");
    let infl_4q_exp = push("infl_4q_exp", Auxiliary, "expected four-quarter inflation over the next year");
    let ygap = push("ygap", Jump, "output gap, percent");
    let ygap_lead1 = push("ygap_lead1", Auxiliary, "expected output gap next quarter");
    let rer = push("rer", Jump, "real exchange rate gap (positive = depreciated)");
    let rer_lead1 = push("rer_lead1", Auxiliary, "expected real exchange rate next quarter");
    let risk_premium = push("risk_premium", Auxiliary, "country risk premium in the parity condition");
    let rreal = push("rreal", Auxiliary, "ex-ante real policy rate");
    let rgap = push("rgap", Auxiliary, "monetary stance: real rate minus benchmark rate");
    let nri = push("nri", Auxiliary, "benchmark real rate with credit-market terms");
    let nri_policy = push("nri_policy", Auxiliary, "benchmark rate as perceived inside the policy rule");
    let irate = push("irate", Predetermined, "policy interest rate, annualized p.p. deviation");
    let pot_growth = push("pot_growth", Predetermined, "potential output growth gap");
    let pot_growth_lead1 = push("pot_growth_lead1", Auxiliary, "expected potential growth next quarter");
    let leverage = push("leverage", Auxiliary, "household leverage-ratio gap: debt gap minus output gap");
    let spread = push("spread", Auxiliary, "credit spread gap, p.p.");
    let rate_b = push("rate_b", Auxiliary, "borrower nominal rate gap: policy rate plus spread");
    let cons_b = push("cons_b", Jump, "borrower consumption gap, percent");
    let cons_b_lead1 = push("cons_b_lead1", Auxiliary, "expected borrower consumption next quarter");
    let debt = push("debt", Predetermined, "household real debt gap, percent");
    let credit_demand_lead1 = push(
        "credit_demand_lead1",
        Auxiliary,
        "expected borrower-preference shock next quarter",
    );
    let infl_w = push("infl_w", Jump, "world inflation, annualized p.p. deviation");
    let infl_w_lag1 = push("infl_w_lag1", Predetermined, "world inflation lagged one quarter (lag chain)");
    let infl_w_lag2 = push("infl_w_lag2", Predetermined, "world inflation lagged two quarters (lag chain)");
    let infl_w_lag3 = push("infl_w_lag3", Predetermined, "world inflation lagged three quarters (lag chain)");
    let infl_w_4q = push("infl_w_4q", Auxiliary, "world four-quarter average inflation");
    let infl_w_lead1 = push("infl_w_lead1", Jump, "expected world inflation one quarter ahead (lead chain)");
    let infl_w_lead2 = push("infl_w_lead2", Jump, "expected world inflation two quarters ahead (lead chain)");
    let infl_w_lead3 = push("infl_w_lead3", Jump, "expected world inflation three quarters ahead (lead chain)");
    let infl_w_lead4 = push("infl_w_lead4", Auxiliary, "expected world inflation four quarters ahead (lead chain)");
    let infl_w_4q_exp = push("infl_w_4q_exp", Auxiliary, "expected world four-quarter inflation");
    let ygap_w = push("ygap_w", Jump, "world output gap, percent");
    let ygap_w_lead1 = push("ygap_w_lead1", Auxiliary, "expected world output gap next quarter");
    let rreal_w = push("rreal_w", Auxiliary, "world ex-ante real rate");
    let rgap_w = push("rgap_w", Auxiliary, "world monetary stance");
    let nri_w = push("nri_w", Auxiliary, "world benchmark real rate");
    let irate_w = push("irate_w", Predetermined, "world policy rate, annualized p.p. deviation");
    let pot_growth_w = push("pot_growth_w", Predetermined, "world potential growth gap");
    let pot_growth_w_lead1 = push("pot_growth_w_lead1", Auxiliary, "expected world potential growth next quarter");
    let growth_w = push("growth_w", Auxiliary, "world actual growth gap");
    let growth_w_lead1 = push("growth_w_lead1", Auxiliary, "expected world actual growth next quarter");

    let mut shock_state = [0usize; 10];
    let shock_descriptions: [(&'static str, &'static str); 10] = [
        ("shk_inflation", "cost-push shock state"),
        ("shk_fx", "country risk premium shock state"),
        ("shk_monetary", "domestic monetary shock state"),
        ("shk_growth", "potential growth shock state"),
        ("shk_credit_supply", "credit supply (spread) shock state"),
        ("shk_credit_demand", "borrower preference (credit demand) shock state"),
        ("shk_world_inflation", "world cost-push shock state"),
        ("shk_world_monetary", "world monetary shock state"),
        ("shk_world_growth", "world potential growth shock state"),
        ("oil_price", "oil price inflation, exogenous state"),
    ];
    for (k, (name, desc)) in shock_descriptions.into_iter().enumerate() {
        shock_state[k] = push(name, Exogenous, desc);
    }

    let idx = VarIdx {
        infl,
        infl_lag1,
        infl_lag2,
        infl_lag3,
        infl_4q,
        infl_lead1,
        infl_lead2,
        infl_lead3,
        infl_lead4,
        infl_4q_exp,
        ygap,
        ygap_lead1,
        rer,
        rer_lead1,
        risk_premium,
        rreal,
        rgap,
        nri,
        nri_policy,
        irate,
        pot_growth,
        pot_growth_lead1,
        leverage,
        spread,
        rate_b,
        cons_b,
        cons_b_lead1,
        debt,
        credit_demand_lead1,
        infl_w,
        infl_w_lag1,
        infl_w_lag2,
        infl_w_lag3,
        infl_w_4q,
        infl_w_lead1,
        infl_w_lead2,
        infl_w_lead3,
        infl_w_lead4,
        infl_w_4q_exp,
        ygap_w,
        ygap_w_lead1,
        rreal_w,
        rgap_w,
        nri_w,
        irate_w,
        pot_growth_w,
        pot_growth_w_lead1,
        growth_w,
        growth_w_lead1,
        shock_state,
    };
    (VariableRegistry { entries }, idx)
}

/// Assemble the full system for a calibration and policy-rule choice. The
/// two policy variants share every row except the definition of the
/// benchmark rate perceived inside the policy rule.
pub fn build_system(cal: &Calibration, policy: PolicyRule) -> Result<ModelSystem> {
    cal.validate()?;
    let budget = cal.budget_coefficients()?;
    let (registry, v) = registry();
    let n = registry.len();
    let mut sb = SystemBuilder::new(n, Shock::ALL.len());

    let shk = |s: Shock| v.shock_state[s.index()];
    let beta_r_cb = cal.beta_r_cb();

    // Inflation: forward/backward four-quarter mix, demand pressure, real
    // depreciation and oil pass-through, plus the cost-push state.
    sb.eq("inflation")
        .cur(v.infl, -1.0)
        .cur(v.infl_4q_exp, cal.a_ld_pi)
        .lag(v.infl_4q, 1.0 - cal.a_ld_pi)
        .lag(v.ygap, cal.a_y)
        .cur(v.rer, cal.a_z_pi)
        .lag(v.rer, -cal.a_z_pi)
        .cur(shk(Shock::Oil), cal.a_oil_pi)
        .lag(shk(Shock::Oil), cal.a_oil_lag_pi)
        .cur(shk(Shock::Inflation), 1.0);

    sb.eq("inflation_lag1").cur(v.infl_lag1, -1.0).lag(v.infl, 1.0);
    sb.eq("inflation_lag2").cur(v.infl_lag2, -1.0).lag(v.infl_lag1, 1.0);
    sb.eq("inflation_lag3").cur(v.infl_lag3, -1.0).lag(v.infl_lag2, 1.0);
    sb.eq("inflation_4q")
        .cur(v.infl_4q, -1.0)
        .cur(v.infl, 0.25)
        .cur(v.infl_lag1, 0.25)
        .cur(v.infl_lag2, 0.25)
        .cur(v.infl_lag3, 0.25);
    sb.eq("inflation_lead1").cur(v.infl_lead1, -1.0).lead(v.infl, 1.0);
    sb.eq("inflation_lead2").cur(v.infl_lead2, -1.0).lead(v.infl_lead1, 1.0);
    sb.eq("inflation_lead3").cur(v.infl_lead3, -1.0).lead(v.infl_lead2, 1.0);
    sb.eq("inflation_lead4").cur(v.infl_lead4, -1.0).lead(v.infl_lead3, 1.0);
    sb.eq("inflation_4q_exp")
        .cur(v.infl_4q_exp, -1.0)
        .cur(v.infl_lead1, 0.25)
        .cur(v.infl_lead2, 0.25)
        .cur(v.infl_lead3, 0.25)
        .cur(v.infl_lead4, 0.25);

    // Aggregate demand: expected and past output, lagged monetary stance,
    // lagged real exchange rate, world demand.
    sb.eq("demand")
        .cur(v.ygap, -1.0)
        .cur(v.ygap_lead1, cal.beta_yld_y)
        .lag(v.ygap, 1.0 - cal.beta_yld_y)
        .lag(v.rgap, -cal.beta_r_y)
        .lag(v.rer, cal.beta_z_y)
        .cur(v.ygap_w, cal.beta_yw_y);
    sb.eq("demand_lead1").cur(v.ygap_lead1, -1.0).lead(v.ygap, 1.0);

    // Real exchange rate parity with risk premium. The natural real exchange
    // rate is constant in the gap model, so the rate gap equals the rate
    // itself. The rate differential is annualized while the exchange rate
    // moves per quarter, hence the factor of one quarter.
    sb.eq("parity")
        .cur(v.rer, -1.0)
        .cur(v.rer_lead1, cal.d_zld)
        .lag(v.rer, 1.0 - cal.d_zld)
        .cur(v.rreal, -0.25)
        .cur(v.rreal_w, 0.25)
        .cur(v.risk_premium, 0.25);
    sb.eq("parity_lead1").cur(v.rer_lead1, -1.0).lead(v.rer, 1.0);
    sb.eq("risk_premium")
        .cur(v.risk_premium, -1.0)
        .cur(v.nri, 1.0)
        .cur(v.nri_w, -1.0)
        .cur(shk(Shock::Fx), 1.0);

    // Fisher relation and monetary stance.
    sb.eq("fisher").cur(v.rreal, -1.0).cur(v.irate, 1.0).cur(v.infl_lead1, -1.0);
    sb.eq("stance").cur(v.rgap, -1.0).cur(v.rreal, 1.0).cur(v.nri, -1.0);

    // Benchmark real rate: expected potential growth at home, expected actual
    // growth abroad, minus spread and the expected change in borrower preference.
    sb.eq("benchmark_rate")
        .cur(v.nri, -1.0)
        .cur(v.pot_growth_lead1, cal.alpha_g_nri)
        .cur(v.growth_w_lead1, cal.alpha_gw_nri)
        .cur(v.spread, -cal.alpha_delta_nri)
        .cur(v.credit_demand_lead1, -cal.alpha_cb_nri)
        .cur(shk(Shock::CreditDemand), cal.alpha_cb_nri);

    // The rate the policy rule reacts to. Under the partially informative
    // rule it omits the spread and preference terms; everything else in the
    // model is unchanged.
    match policy {
        PolicyRule::Fi => {
            sb.eq("benchmark_rate_policy")
                .cur(v.nri_policy, -1.0)
                .cur(v.pot_growth_lead1, cal.alpha_g_nri)
                .cur(v.growth_w_lead1, cal.alpha_gw_nri)
                .cur(v.spread, -cal.alpha_delta_nri)
                .cur(v.credit_demand_lead1, -cal.alpha_cb_nri)
                .cur(shk(Shock::CreditDemand), cal.alpha_cb_nri);
        }
        PolicyRule::Pi => {
            sb.eq("benchmark_rate_policy")
                .cur(v.nri_policy, -1.0)
                .cur(v.pot_growth_lead1, cal.alpha_g_nri)
                .cur(v.growth_w_lead1, cal.alpha_gw_nri);
        }
    }

    // Policy rule with smoothing; reacts to the perceived benchmark rate, the
    // inflation environment and the output gap.
    let g1 = 1.0 - cal.g_lag;
    sb.eq("policy_rule")
        .cur(v.irate, -1.0)
        .lag(v.irate, cal.g_lag)
        .cur(v.nri_policy, g1)
        .cur(v.infl_4q_exp, g1 * cal.g_pi * cal.w_infl)
        .cur(v.infl_4q, g1 * cal.g_pi * (1.0 - cal.w_infl))
        .cur(v.ygap, g1 * cal.g_y)
        .cur(shk(Shock::Monetary), 1.0);

    // Potential growth. The natural-real-exchange-rate term is identically
    // zero in the gap model, so theta2 does not enter.
    sb.eq("potential_growth")
        .cur(v.pot_growth, -1.0)
        .lag(v.pot_growth, cal.theta1)
        .cur(v.growth_w, cal.theta3)
        .cur(shk(Shock::Growth), 1.0);
    sb.eq("potential_growth_lead1").cur(v.pot_growth_lead1, -1.0).lead(v.pot_growth, 1.0);

    // Financial block.
    sb.eq("leverage").cur(v.leverage, -1.0).cur(v.debt, 1.0).cur(v.ygap, -1.0);
    sb.eq("spread_supply")
        .cur(v.spread, -1.0)
        .cur(v.leverage, cal.beta_lev_delta)
        .cur(shk(Shock::CreditSupply), 1.0);
    sb.eq("borrower_rate").cur(v.rate_b, -1.0).cur(v.irate, 1.0).cur(v.spread, 1.0);

    // Borrower consumption: smoothing, effective real borrowing cost with the
    // leverage penalty, expected potential growth, and the preference change.
    sb.eq("borrower_demand")
        .cur(v.cons_b, -1.0)
        .cur(v.cons_b_lead1, cal.beta_ld_cb)
        .lag(v.cons_b, 1.0 - cal.beta_ld_cb)
        .cur(v.rate_b, -beta_r_cb)
        .cur(v.infl_lead1, beta_r_cb)
        .cur(v.leverage, -beta_r_cb * cal.v)
        .cur(v.pot_growth_lead1, beta_r_cb)
        .cur(v.credit_demand_lead1, -1.0)
        .cur(shk(Shock::CreditDemand), 1.0);
    sb.eq("borrower_demand_lead1").cur(v.cons_b_lead1, -1.0).lead(v.cons_b, 1.0);

    // Borrower budget: new debt finances old debt (eroded by inflation and
    // potential growth) plus the consumption-income gap. Rate, inflation and
    // growth terms are quarterly gross-factor deviations, so the annualized
    // series enter divided by four; stock gaps are already in percent.
    sb.eq("borrower_budget")
        .cur(v.debt, -1.0)
        .cur(v.rate_b, 0.25)
        .lag(v.debt, budget.beta_lag)
        .cur(v.infl, -0.25 * budget.beta_lag)
        .cur(v.pot_growth, -0.25 * budget.beta_lag)
        .cur(v.cons_b, budget.beta_b_cb)
        .cur(v.ygap, -budget.beta_b_y);

    sb.eq("credit_demand_lead1")
        .cur(v.credit_demand_lead1, -1.0)
        .lead(shk(Shock::CreditDemand), 1.0);

    // World block.
    sb.eq("world_inflation")
        .cur(v.infl_w, -1.0)
        .cur(v.infl_w_4q_exp, cal.world.alpha_w)
        .lag(v.infl_w_4q, 1.0 - cal.world.alpha_w)
        .lag(v.ygap_w, cal.world.k_w)
        .cur(shk(Shock::WorldInflation), 1.0);
    sb.eq("world_inflation_lag1").cur(v.infl_w_lag1, -1.0).lag(v.infl_w, 1.0);
    sb.eq("world_inflation_lag2").cur(v.infl_w_lag2, -1.0).lag(v.infl_w_lag1, 1.0);
    sb.eq("world_inflation_lag3").cur(v.infl_w_lag3, -1.0).lag(v.infl_w_lag2, 1.0);
    sb.eq("world_inflation_4q")
        .cur(v.infl_w_4q, -1.0)
        .cur(v.infl_w, 0.25)
        .cur(v.infl_w_lag1, 0.25)
        .cur(v.infl_w_lag2, 0.25)
        .cur(v.infl_w_lag3, 0.25);
    sb.eq("world_inflation_lead1").cur(v.infl_w_lead1, -1.0).lead(v.infl_w, 1.0);
    sb.eq("world_inflation_lead2").cur(v.infl_w_lead2, -1.0).lead(v.infl_w_lead1, 1.0);
    sb.eq("world_inflation_lead3").cur(v.infl_w_lead3, -1.0).lead(v.infl_w_lead2, 1.0);
    sb.eq("world_inflation_lead4").cur(v.infl_w_lead4, -1.0).lead(v.infl_w_lead3, 1.0);
    sb.eq("world_inflation_4q_exp")
        .cur(v.infl_w_4q_exp, -1.0)
        .cur(v.infl_w_lead1, 0.25)
        .cur(v.infl_w_lead2, 0.25)
        .cur(v.infl_w_lead3, 0.25)
        .cur(v.infl_w_lead4, 0.25);

    sb.eq("world_demand")
        .cur(v.ygap_w, -1.0)
        .cur(v.ygap_w_lead1, cal.world.delta1_w)
        .lag(v.ygap_w, cal.world.delta2_w)
        .lag(v.rgap_w, -cal.world.delta3_w);
    sb.eq("world_demand_lead1").cur(v.ygap_w_lead1, -1.0).lead(v.ygap_w, 1.0);

    sb.eq("world_fisher").cur(v.rreal_w, -1.0).cur(v.irate_w, 1.0).cur(v.infl_w_lead1, -1.0);
    sb.eq("world_stance").cur(v.rgap_w, -1.0).cur(v.rreal_w, 1.0).cur(v.nri_w, -1.0);
    sb.eq("world_benchmark_rate")
        .cur(v.nri_w, -1.0)
        .cur(v.pot_growth_w_lead1, cal.world.c1_w);

    let gw1 = 1.0 - cal.world.gamma_w;
    sb.eq("world_policy_rule")
        .cur(v.irate_w, -1.0)
        .lag(v.irate_w, cal.world.gamma_w)
        .cur(v.nri_w, gw1)
        .cur(v.infl_w_4q_exp, gw1 * cal.world.beta1_w)
        .cur(v.ygap_w, gw1 * cal.world.beta2_w)
        .cur(shk(Shock::WorldMonetary), 1.0);

    sb.eq("world_potential_growth")
        .cur(v.pot_growth_w, -1.0)
        .lag(v.pot_growth_w, cal.world.theta_w)
        .cur(shk(Shock::WorldGrowth), 1.0);
    sb.eq("world_potential_growth_lead1")
        .cur(v.pot_growth_w_lead1, -1.0)
        .lead(v.pot_growth_w, 1.0);

    // World actual growth: potential growth plus the change in the output gap.
    sb.eq("world_growth")
        .cur(v.growth_w, -1.0)
        .cur(v.pot_growth_w, 1.0)
        .cur(v.ygap_w, 1.0)
        .lag(v.ygap_w, -1.0);
    sb.eq("world_growth_lead1").cur(v.growth_w_lead1, -1.0).lead(v.growth_w, 1.0);

    // Exogenous AR(1) shock states. Innovations are in shock units; the
    // simulator applies standard deviations at draw time.
    for shock in Shock::ALL {
        let state = shk(shock);
        let rho = cal.shocks.spec(shock).persistence;
        sb.eq(SHOCK_ROW_TAGS[shock.index()])
            .cur(state, -1.0)
            .lag(state, rho)
            .innovation(shock.index(), 1.0);
    }

    assert_eq!(sb.row, n, "every variable must have exactly one defining row");

    let n_predetermined = registry.count_kind(VarKind::Predetermined);
    let n_jump = registry.count_kind(VarKind::Jump);
    Ok(ModelSystem {
        a: sb.a,
        b: sb.b,
        c: sb.c,
        d: sb.d,
        registry,
        shock_names: Shock::ALL.iter().map(|s| s.name()).collect(),
        row_tags: sb.tags,
        n_predetermined,
        n_jump,
        policy,
        idx: v,
        calibration: cal.clone(),
    })
}

const SHOCK_ROW_TAGS: [&str; 10] = [
    "shock_inflation",
    "shock_fx",
    "shock_monetary",
    "shock_growth",
    "shock_credit_supply",
    "shock_credit_demand",
    "shock_world_inflation",
    "shock_world_monetary",
    "shock_world_growth",
    "shock_oil",
];

/// Per-equation sup-norm residuals of a path under realized-next-period
/// expectations (a perfect-foresight check for deterministic paths). The
/// pre-sample state is taken as zero, consistent with deviation form.
pub fn residuals(sys: &ModelSystem, path: &PathSet, shocks: &PathSet) -> Result<Vec<(String, f64)>> {
    let n = sys.n_vars();
    let horizon = path.horizon();
    if path.n_series() != n {
        return Err(Error::DimensionMismatch(format!(
            "path has {} series, system has {} variables",
            path.n_series(),
            n
        )));
    }
    if shocks.n_series() != sys.n_shocks() || shocks.horizon() != horizon {
        return Err(Error::DimensionMismatch("shock path does not match system/horizon".into()));
    }
    if horizon < 3 {
        return Err(Error::DimensionMismatch("path horizon must be at least 3".into()));
    }

    let mut worst = vec![0.0f64; n];
    let zero = nalgebra::DVector::<f64>::zeros(n);
    for t in 0..horizon - 1 {
        let x_next = path.values.row(t + 1).transpose();
        let x_cur = path.values.row(t).transpose();
        let x_prev =
            if t == 0 { zero.clone() } else { path.values.row(t - 1).transpose() };
        let eta = shocks.values.row(t).transpose();
        let res = &sys.a * x_next + &sys.b * x_cur + &sys.c * x_prev + &sys.d * eta;
        for (i, w) in worst.iter_mut().enumerate() {
            *w = w.max(res[i].abs());
        }
    }
    Ok(sys
        .row_tags
        .iter()
        .zip(worst)
        .map(|(tag, r)| (tag.to_string(), r))
        .collect())
}
