//! OLS with Newey-West HAC standard errors, plus the spread-leverage and
//! spread-on-monetary-shock regression designs, for user-supplied CSV data.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

/// Column-labeled numeric table. An optional leading non-numeric column is
/// kept as date labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub columns: Vec<String>,
    /// T x k, column order matching `columns`.
    pub data: DMatrix<f64>,
    pub dates: Option<Vec<String>>,
}

impl Dataset {
    pub fn n_obs(&self) -> usize {
        self.data.nrows()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Dataset(format!("column `{}` not found", name)))
    }

    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let j = self.column_index(name)?;
        Ok((0..self.n_obs()).map(|t| self.data[(t, j)]).collect())
    }

    /// Build from labeled columns of equal length.
    pub fn from_columns(named: Vec<(String, Vec<f64>)>) -> Result<Dataset> {
        let t = named.first().map(|(_, v)| v.len()).unwrap_or(0);
        if named.iter().any(|(_, v)| v.len() != t) {
            return Err(Error::Dataset("columns must have equal length".into()));
        }
        let mut data = DMatrix::zeros(t, named.len());
        let mut columns = Vec::with_capacity(named.len());
        for (j, (name, values)) in named.into_iter().enumerate() {
            for (i, v) in values.into_iter().enumerate() {
                data[(i, j)] = v;
            }
            columns.push(name);
        }
        Ok(Dataset { columns, data, dates: None })
    }

    /// Parse CSV text: first row headers, decimal point, UTF-8. If the first
    /// column is not numeric it is treated as a date column.
    pub fn from_csv_str(text: &str) -> Result<Dataset> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let headers: Vec<String> = reader.headers()?.iter().map(|h| h.to_string()).collect();
        if headers.is_empty() {
            return Err(Error::Dataset("empty header row".into()));
        }
        let mut rows: Vec<Vec<String>> = Vec::new();
        for record in reader.records() {
            let record = record?;
            if record.len() != headers.len() {
                return Err(Error::Dataset("ragged row: table must be rectangular".into()));
            }
            rows.push(record.iter().map(|s| s.to_string()).collect());
        }
        let first_numeric = rows.iter().all(|r| r[0].parse::<f64>().is_ok());
        let (date_col, start) = if first_numeric { (None, 0) } else { (Some(0), 1) };

        let t = rows.len();
        let k = headers.len() - start;
        let mut data = DMatrix::zeros(t, k);
        for (i, row) in rows.iter().enumerate() {
            for j in 0..k {
                let cell = &row[start + j];
                data[(i, j)] = cell.parse::<f64>().map_err(|_| {
                    Error::Dataset(format!(
                        "non-numeric cell `{}` in column `{}`, row {}",
                        cell,
                        headers[start + j],
                        i + 2
                    ))
                })?;
            }
        }
        let dates = date_col.map(|j| rows.iter().map(|r| r[j].clone()).collect());
        Ok(Dataset { columns: headers[start..].to_vec(), data, dates })
    }

    pub fn from_csv_path(path: &std::path::Path) -> Result<Dataset> {
        Dataset::from_csv_str(&std::fs::read_to_string(path)?)
    }
}

/// OLS coefficients with HAC inference.
#[derive(Debug, Clone, Serialize)]
pub struct RegressionResult {
    /// Regressor names; `const` first, then the requested columns in order.
    pub terms: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_stats: Vec<f64>,
    pub p_values: Vec<f64>,
    pub r_squared: f64,
    pub durbin_watson: f64,
    pub lag_truncation: usize,
    pub n_obs: usize,
}

impl RegressionResult {
    pub fn coefficient(&self, term: &str) -> Result<f64> {
        let i = self
            .terms
            .iter()
            .position(|t| t == term)
            .ok_or_else(|| Error::Dataset(format!("no regressor named `{}`", term)))?;
        Ok(self.coefficients[i])
    }
}

/// Plug-in lag truncation: floor(4 (T/100)^{2/9}).
pub fn default_lag_truncation(t: usize) -> usize {
    (4.0 * (t as f64 / 100.0).powf(2.0 / 9.0)).floor() as usize
}

fn check_finite(design: &DMatrix<f64>, y: &DVector<f64>, names: &[String]) -> Result<()> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Dataset("dependent column contains non-finite values".into()));
    }
    for j in 0..design.ncols() {
        if (0..design.nrows()).any(|i| !design[(i, j)].is_finite()) {
            return Err(Error::Dataset(format!("column `{}` contains non-finite values", names[j])));
        }
    }
    Ok(())
}

/// Identify a collinear subset by the dominant entries of the right singular
/// vector attached to the smallest singular value.
fn collinear_columns(design: &DMatrix<f64>, names: &[String]) -> Vec<String> {
    let svd = design.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let row = v_t.nrows() - 1;
    let weights: Vec<f64> = (0..v_t.ncols()).map(|j| v_t[(row, j)].abs()).collect();
    let max = weights.iter().cloned().fold(0.0f64, f64::max).max(1e-300);
    let mut cols: Vec<String> = weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w > 0.1 * max)
        .map(|(j, _)| names[j].clone())
        .collect();
    if cols.is_empty() {
        cols = names.to_vec();
    }
    cols
}

/// Core OLS + Newey-West estimator on an already-built design (no intercept
/// appended here).
fn ols_core(
    y: &DVector<f64>,
    design: &DMatrix<f64>,
    names: &[String],
    lag_truncation: usize,
) -> Result<RegressionResult> {
    let t = design.nrows();
    let k = design.ncols();
    if t <= k {
        return Err(Error::Dataset(format!(
            "need more observations ({}) than regressors ({})",
            t, k
        )));
    }
    check_finite(design, y, names)?;

    let xtx = design.transpose() * design;
    let svd = design.clone().svd(false, false);
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
    if smax <= 0.0 || smin / smax < 1e-10 {
        return Err(Error::CollinearColumns(collinear_columns(design, names)));
    }

    let xtx_inv = xtx
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::CollinearColumns(collinear_columns(design, names)))?;
    let beta = &xtx_inv * design.transpose() * y;
    let fitted = design * &beta;
    let resid = y - fitted;

    // Newey-West: S = Gamma_0 + sum_l w_l (Gamma_l + Gamma_l'), Bartlett
    // weights w_l = 1 - l/(L+1), Gamma_l = sum_t u_t u_{t-l} x_t x_{t-l}'.
    let mut s = DMatrix::<f64>::zeros(k, k);
    for i in 0..t {
        let x_i = design.row(i).transpose();
        s += &x_i * x_i.transpose() * (resid[i] * resid[i]);
    }
    for l in 1..=lag_truncation {
        let w = 1.0 - l as f64 / (lag_truncation as f64 + 1.0);
        let mut gamma = DMatrix::<f64>::zeros(k, k);
        for i in l..t {
            let x_i = design.row(i).transpose();
            let x_lag = design.row(i - l).transpose();
            gamma += &x_i * x_lag.transpose() * (resid[i] * resid[i - l]);
        }
        s += (&gamma + gamma.transpose()) * w;
    }
    let cov = &xtx_inv * s * &xtx_inv;

    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut std_errors = Vec::with_capacity(k);
    let mut t_stats = Vec::with_capacity(k);
    let mut p_values = Vec::with_capacity(k);
    for i in 0..k {
        let se = cov[(i, i)].max(0.0).sqrt();
        std_errors.push(se);
        let tv = if se > 0.0 { beta[i] / se } else { f64::INFINITY * beta[i].signum() };
        t_stats.push(tv);
        p_values.push(2.0 * (1.0 - normal.cdf(tv.abs())));
    }

    let mean_y = y.iter().sum::<f64>() / t as f64;
    let sst: f64 = y.iter().map(|v| (v - mean_y) * (v - mean_y)).sum();
    let ssr: f64 = resid.iter().map(|u| u * u).sum();
    let r_squared = if sst > 0.0 { 1.0 - ssr / sst } else { 1.0 };

    let dw_num: f64 = (1..t).map(|i| (resid[i] - resid[i - 1]).powi(2)).sum();
    let durbin_watson = if ssr > 0.0 { dw_num / ssr } else { 2.0 };

    Ok(RegressionResult {
        terms: names.to_vec(),
        coefficients: beta.iter().copied().collect(),
        std_errors,
        t_stats,
        p_values,
        r_squared,
        durbin_watson,
        lag_truncation,
        n_obs: t,
    })
}

/// OLS of `y` on an intercept and the given columns, with Newey-West
/// (Bartlett-weighted) HAC standard errors up to lag `lags`; `None` selects
/// the plug-in truncation. P-values are asymptotic normal.
pub fn ols_hac(
    data: &Dataset,
    y: &str,
    x_columns: &[&str],
    lags: Option<usize>,
) -> Result<RegressionResult> {
    let t = data.n_obs();
    let yv = DVector::from_vec(data.column(y)?);
    let mut names = vec!["const".to_string()];
    let mut design = DMatrix::<f64>::zeros(t, x_columns.len() + 1);
    for i in 0..t {
        design[(i, 0)] = 1.0;
    }
    for (j, col) in x_columns.iter().enumerate() {
        let values = data.column(col)?;
        for i in 0..t {
            design[(i, j + 1)] = values[i];
        }
        names.push(col.to_string());
    }
    let lag_truncation = lags.unwrap_or_else(|| default_lag_truncation(t));
    ols_core(&yv, &design, &names, lag_truncation)
}

/// Spread-on-leverage design: intercept, leverage, house-price inflation at
/// lags 0..=3, and optionally the leverage-dummy interaction. Pass either a
/// single house-price column (lags are constructed, initial rows dropped
/// listwise) or four pre-built lag columns.
pub fn spread_leverage_regression(
    data: &Dataset,
    spread: &str,
    leverage: &str,
    hp_columns: &[&str],
    dummy: Option<&str>,
    lags: Option<usize>,
) -> Result<RegressionResult> {
    let t = data.n_obs();
    let spread_v = data.column(spread)?;
    let leverage_v = data.column(leverage)?;

    let (hp_lags, drop): (Vec<(String, Vec<f64>)>, usize) = match hp_columns {
        [single] => {
            let hp = data.column(single)?;
            let mut cols = Vec::new();
            for lag in 0..=3usize {
                let name = format!("{}_lag{}", single, lag);
                let series: Vec<f64> = (3..t).map(|i| hp[i - lag]).collect();
                cols.push((name, series));
            }
            (cols, 3)
        }
        [c0, c1, c2, c3] => {
            let cols = [*c0, *c1, *c2, *c3]
                .iter()
                .map(|c| Ok((c.to_string(), data.column(c)?)))
                .collect::<Result<Vec<_>>>()?;
            (cols, 0)
        }
        other => {
            return Err(Error::Dataset(format!(
                "expected 1 or 4 house-price columns, got {}",
                other.len()
            )))
        }
    };

    let trimmed = |v: &[f64]| v[drop..].to_vec();
    let mut named: Vec<(String, Vec<f64>)> = vec![
        (spread.to_string(), trimmed(&spread_v)),
        (leverage.to_string(), trimmed(&leverage_v)),
    ];
    named.extend(hp_lags);

    let mut x_names: Vec<String> =
        named.iter().skip(1).map(|(n, _)| n.clone()).collect();

    if let Some(dummy_col) = dummy {
        let dummy_v = trimmed(&data.column(dummy_col)?);
        // A dummy that never switches on adds nothing; keep the design
        // identical to the no-dummy call.
        if dummy_v.iter().any(|d| *d != 0.0) {
            let lev = trimmed(&leverage_v);
            let interaction: Vec<f64> =
                lev.iter().zip(&dummy_v).map(|(l, d)| l * d).collect();
            let name = format!("{}_x_{}", leverage, dummy_col);
            named.push((name.clone(), interaction));
            x_names.push(name);
        }
    }

    let table = Dataset::from_columns(named)?;
    let x_refs: Vec<&str> = x_names.iter().map(|s| s.as_str()).collect();
    ols_hac(&table, spread, &x_refs, lags)
}

/// Spread on a monetary-shock series plus lagged own controls and exogenous
/// controls. The shock coefficient comes first after the intercept; a
/// negative estimate flags decelerator dynamics, a positive one accelerator
/// dynamics.
pub fn decelerator_regression(
    data: &Dataset,
    spread: &str,
    shock: &str,
    x_lagged: &[&str],
    z_exog: &[&str],
    lags: Option<usize>,
) -> Result<RegressionResult> {
    let t = data.n_obs();
    if t < 2 {
        return Err(Error::Dataset("need at least two observations".into()));
    }
    let trimmed = |v: &[f64]| v[1..].to_vec();
    let mut named: Vec<(String, Vec<f64>)> = vec![
        (spread.to_string(), trimmed(&data.column(spread)?)),
        (shock.to_string(), trimmed(&data.column(shock)?)),
    ];
    let mut x_names = vec![shock.to_string()];
    for col in x_lagged {
        let series = data.column(col)?;
        let name = format!("{}_lag1", col);
        named.push((name.clone(), series[..t - 1].to_vec()));
        x_names.push(name);
    }
    for col in z_exog {
        named.push((col.to_string(), trimmed(&data.column(col)?)));
        x_names.push(col.to_string());
    }
    let table = Dataset::from_columns(named)?;
    let x_refs: Vec<&str> = x_names.iter().map(|s| s.as_str()).collect();
    ols_hac(&table, spread, &x_refs, lags)
}
