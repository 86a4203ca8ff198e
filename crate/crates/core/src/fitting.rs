//! Pump-power bookkeeping and least-squares fits of measured phonon
//! linewidths.
//!
//! Physical units enter only here: pump powers are detuning-corrected
//! powers P̃ in μW and linewidths are in kHz. The conversion constant
//! `eta_conv` maps power to pump amplitude squared, α² = η P̃.
//!
//! Three models are fitted:
//!
//! * `co_linear`: `y = p0 + p1 x` for the co-propagating phonon,
//! * `counter_low_linear`: `y = q0 + q1 x` for the counter-propagating phonon
//!   below the breakpoint power,
//! * `counter_high_inverse`: `y = q2 + q3 / x` above it, with `q2` held fixed
//!   at the low-power extrapolation `q0 + P0 q1`.
//!
//! Uncertainties are reported as 2σ from the parameter covariance scaled by
//! the unbiased residual variance `Σ w r² / (n - k)`.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::closedform::{linewidth_at_resonance, Direction};
use crate::error::FitError;
use crate::model::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub direction: Direction,
    /// Detuning-corrected pump power P̃₊ in μW.
    pub power: f64,
    /// Linewidth in kHz.
    pub linewidth: f64,
    /// Optional inverse-variance weight.
    pub weight: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FitDataset {
    rows: Vec<Observation>,
}

#[derive(Debug, Deserialize)]
#[allow(non_snake_case)]
struct CsvRow {
    direction: String,
    power_uW: f64,
    linewidth_kHz: f64,
    #[serde(default)]
    weight: Option<f64>,
}

const REQUIRED_COLUMNS: [&str; 3] = ["direction", "power_uW", "linewidth_kHz"];

impl FitDataset {
    pub fn new(rows: Vec<Observation>) -> Result<Self, FitError> {
        for (i, r) in rows.iter().enumerate() {
            let bad = |message: &str| FitError::BadRow { row: i + 1, message: message.to_string() };
            if !(r.power.is_finite() && r.power >= 0.0) {
                return Err(bad("power must be a finite, non-negative number"));
            }
            if !(r.linewidth.is_finite() && r.linewidth > 0.0) {
                return Err(bad("linewidth must be a finite, positive number"));
            }
            if let Some(w) = r.weight {
                if !(w.is_finite() && w > 0.0) {
                    return Err(bad("weight must be a finite, positive number"));
                }
            }
        }
        Ok(FitDataset { rows })
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn filter(&self, keep: impl Fn(&Observation) -> bool) -> FitDataset {
        FitDataset { rows: self.rows.iter().copied().filter(|r| keep(r)).collect() }
    }

    pub fn direction(&self, d: Direction) -> FitDataset {
        self.filter(|r| r.direction == d)
    }

    /// Reads `direction,power_uW,linewidth_kHz[,weight]` with a header row.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, FitError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        for col in REQUIRED_COLUMNS {
            if !headers.iter().any(|h| h == col) {
                return Err(FitError::BadRow { row: 0, message: format!("missing column '{col}'") });
            }
        }
        if let Some(extra) = headers.iter().find(|h| !REQUIRED_COLUMNS.contains(h) && *h != "weight") {
            return Err(FitError::BadRow { row: 0, message: format!("unknown column '{extra}'") });
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.deserialize::<CsvRow>().enumerate() {
            let rec = rec.map_err(|e| FitError::BadRow { row: i + 1, message: e.to_string() })?;
            let direction = rec
                .direction
                .parse::<Direction>()
                .map_err(|message| FitError::BadRow { row: i + 1, message })?;
            rows.push(Observation { direction, power: rec.power_uW, linewidth: rec.linewidth_kHz, weight: rec.weight });
        }
        FitDataset::new(rows)
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self, FitError> {
        FitDataset::from_csv(std::fs::File::open(path)?)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), FitError> {
        let mut w = csv::Writer::from_writer(writer);
        let weighted = self.rows.iter().any(|r| r.weight.is_some());
        if weighted {
            w.write_record(["direction", "power_uW", "linewidth_kHz", "weight"])?;
        } else {
            w.write_record(REQUIRED_COLUMNS)?;
        }
        for r in &self.rows {
            let mut rec = vec![r.direction.symbol().to_string(), r.power.to_string(), r.linewidth.to_string()];
            if weighted {
                rec.push(r.weight.map(|x| x.to_string()).unwrap_or_default());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    fn single_direction(&self) -> Result<Direction, FitError> {
        let first = self.rows.first().ok_or(FitError::TooFewPoints { needed: 1, got: 0 })?.direction;
        if self.rows.iter().any(|r| r.direction != first) {
            return Err(FitError::MixedDirections);
        }
        Ok(first)
    }

    fn weights(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.weight.unwrap_or(1.0)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelId {
    CoLinear,
    CounterLowLinear,
    CounterHighInverse,
    /// Three-parameter `q2 + q3 / (q4 + x)`.
    CounterHighGeneral,
}

impl ModelId {
    pub fn direction(self) -> Direction {
        match self {
            ModelId::CoLinear => Direction::CoPropagating,
            _ => Direction::CounterPropagating,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model_id: ModelId,
    pub params: BTreeMap<String, f64>,
    /// 2σ per parameter; `null` when there are no residual degrees of
    /// freedom, `0` for parameters held fixed.
    pub two_sigma: BTreeMap<String, Option<f64>>,
    pub residual_norm: f64,
    pub n_points: usize,
}

impl FitResult {
    pub fn param(&self, name: &str) -> f64 {
        self.params.get(name).copied().unwrap_or(f64::NAN)
    }

    pub fn sigma2(&self, name: &str) -> Option<f64> {
        self.two_sigma.get(name).copied().flatten()
    }

    /// Model prediction in kHz at power `x` (μW).
    pub fn evaluate(&self, x: f64) -> f64 {
        let p = |n: &str| self.param(n);
        match self.model_id {
            ModelId::CoLinear => linear_model(p("p0"), p("p1"), x),
            ModelId::CounterLowLinear => linear_model(p("q0"), p("q1"), x),
            ModelId::CounterHighInverse => inverse_model(p("q2"), p("q3"), 0.0, x),
            ModelId::CounterHighGeneral => inverse_model(p("q2"), p("q3"), p("q4"), x),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("FitResult serializes")
    }
}

pub fn linear_model(intercept: f64, slope: f64, x: f64) -> f64 {
    intercept + slope * x
}

pub fn inverse_model(q2: f64, q3: f64, q4: f64, x: f64) -> f64 {
    q2 + q3 / (q4 + x)
}

/// Weighted linear least squares solved through the normal equations.
struct Solution {
    coef: DVector<f64>,
    /// `(Xᵀ W X)⁻¹`.
    normal_inverse: DMatrix<f64>,
    weighted_rss: f64,
}

fn solve_normal(design: &DMatrix<f64>, y: &[f64], w: &[f64]) -> Option<Solution> {
    let n = design.nrows();
    let wd = DMatrix::from_fn(n, design.ncols(), |i, j| w[i] * design[(i, j)]);
    let normal = design.transpose() * &wd;
    let rhs = wd.transpose() * DVector::from_column_slice(y);
    let normal_inverse = normal.clone().try_inverse()?;
    let coef = normal.lu().solve(&rhs)?;
    let fitted = design * &coef;
    let weighted_rss = (0..n).map(|i| w[i] * (y[i] - fitted[i]).powi(2)).sum();
    Some(Solution { coef, normal_inverse, weighted_rss })
}

fn two_sigma(sol: &Solution, n: usize) -> Vec<Option<f64>> {
    let k = sol.coef.len();
    if n <= k {
        return vec![None; k];
    }
    let s2 = sol.weighted_rss / (n - k) as f64;
    (0..k).map(|i| Some(2.0 * (s2 * sol.normal_inverse[(i, i)]).max(0.0).sqrt())).collect()
}

fn build_result(model_id: ModelId, names: &[&str], values: &[f64], sig: &[Option<f64>], rss: f64, n: usize) -> FitResult {
    FitResult {
        model_id,
        params: names.iter().zip(values).map(|(k, v)| (k.to_string(), *v)).collect(),
        two_sigma: names.iter().zip(sig).map(|(k, s)| (k.to_string(), *s)).collect(),
        residual_norm: rss.sqrt(),
        n_points: n,
    }
}

/// Straight-line fit `y = c0 + c1 x` to single-direction data: `(p0, p1)`
/// for co-propagating rows, `(q0, q1)` for counter-propagating rows.
pub fn fit_linear(data: &FitDataset) -> Result<FitResult, FitError> {
    let dir = data.single_direction()?;
    let n = data.len();
    if n < 2 {
        return Err(FitError::TooFewPoints { needed: 2, got: n });
    }
    let x0 = data.rows[0].power;
    if data.rows.iter().all(|r| r.power == x0) {
        return Err(FitError::Singular("all powers are identical"));
    }
    let design = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { data.rows[i].power });
    let y: Vec<f64> = data.rows.iter().map(|r| r.linewidth).collect();
    let sol = solve_normal(&design, &y, &data.weights()).ok_or(FitError::Singular("normal equations"))?;
    let (model_id, names) = match dir {
        Direction::CoPropagating => (ModelId::CoLinear, ["p0", "p1"]),
        Direction::CounterPropagating => (ModelId::CounterLowLinear, ["q0", "q1"]),
    };
    let sig = two_sigma(&sol, n);
    Ok(build_result(model_id, &names, sol.coef.as_slice(), &sig, sol.weighted_rss, n))
}

fn check_positive_powers(data: &FitDataset) -> Result<(), FitError> {
    match data.rows.iter().find(|r| r.power <= 0.0) {
        Some(r) => Err(FitError::NonPositivePower(r.power)),
        None => Ok(()),
    }
}

/// One-parameter fit `y = q2 + q3 / x` with `q2` held fixed:
/// `q3 = Σ w (y - q2)/x / Σ w/x²`.
pub fn fit_high_power_counter(data: &FitDataset, q2_fixed: f64) -> Result<FitResult, FitError> {
    data.single_direction()?;
    check_positive_powers(data)?;
    if !q2_fixed.is_finite() {
        return Err(FitError::Invalid("q2 must be finite".into()));
    }
    let n = data.len();
    let w = data.weights();
    let (mut num, mut den) = (0.0, 0.0);
    for (r, wi) in data.rows.iter().zip(&w) {
        num += wi * (r.linewidth - q2_fixed) / r.power;
        den += wi / (r.power * r.power);
    }
    let q3 = num / den;
    let rss: f64 = data
        .rows
        .iter()
        .zip(&w)
        .map(|(r, wi)| wi * (r.linewidth - inverse_model(q2_fixed, q3, 0.0, r.power)).powi(2))
        .sum();
    let sig = if n > 1 { Some(2.0 * (rss / (n - 1) as f64 / den).sqrt()) } else { None };
    Ok(build_result(ModelId::CounterHighInverse, &["q2", "q3"], &[q2_fixed, q3], &[Some(0.0), sig], rss, n))
}

/// Full three-parameter fit of `y = q2 + q3 / (q4 + x)` with `q4 ≥ 0`,
/// together with the parameter correlation matrix. Strong correlations
/// (see [`GeneralFit::max_correlation`]) are expected on typical data.
#[derive(Debug, Clone)]
pub struct GeneralFit {
    pub result: FitResult,
    /// Correlation matrix in the order (q2, q3, q4); absent without residual
    /// degrees of freedom.
    pub correlation: Option<[[f64; 3]; 3]>,
}

impl GeneralFit {
    pub fn max_correlation(&self) -> f64 {
        self.correlation.map_or(f64::NAN, |c| {
            let mut m: f64 = 0.0;
            for (i, row) in c.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    if i != j {
                        m = m.max(v.abs());
                    }
                }
            }
            m
        })
    }
}

pub fn fit_high_power_counter_general(data: &FitDataset) -> Result<GeneralFit, FitError> {
    data.single_direction()?;
    check_positive_powers(data)?;
    let n = data.len();
    if n < 3 {
        return Err(FitError::TooFewPoints { needed: 3, got: n });
    }
    let y: Vec<f64> = data.rows.iter().map(|r| r.linewidth).collect();
    let w = data.weights();
    // For fixed q4 the model is linear in (q2, q3); minimize the profiled
    // residual over q4.
    let profile = |q4: f64| -> Option<Solution> {
        let design = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { 1.0 / (q4 + data.rows[i].power) });
        solve_normal(&design, &y, &w)
    };
    let rss = |q4: f64| profile(q4).map_or(f64::INFINITY, |s| s.weighted_rss);

    let x_min = data.rows.iter().map(|r| r.power).fold(f64::INFINITY, f64::min);
    let x_max = data.rows.iter().map(|r| r.power).fold(0.0, f64::max);
    let mut grid = vec![0.0];
    let (lo, hi) = ((1e-3 * x_min).ln(), (1e3 * x_max).ln());
    grid.extend((0..=240).map(|i| (lo + (hi - lo) * i as f64 / 240.0).exp()));
    let values: Vec<f64> = grid.iter().map(|&q| rss(q)).collect();
    let best = (0..grid.len()).min_by(|&a, &b| values[a].total_cmp(&values[b])).unwrap();
    let (mut a, mut b) = (grid[best.saturating_sub(1)], grid[(best + 1).min(grid.len() - 1)]);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if rss(c) <= rss(d) {
            b = d;
        } else {
            a = c;
        }
        if (b - a).abs() <= 1e-14 * b.abs().max(1e-300) {
            break;
        }
    }
    let q4 = if rss(0.5 * (a + b)) <= values[best] { 0.5 * (a + b) } else { grid[best] };
    let sol = profile(q4).ok_or(FitError::Singular("inverse-model design"))?;
    let (q2, q3) = (sol.coef[0], sol.coef[1]);

    let jac = DMatrix::from_fn(n, 3, |i, j| {
        let t = q4 + data.rows[i].power;
        match j {
            0 => 1.0,
            1 => 1.0 / t,
            _ => -q3 / (t * t),
        }
    });
    let wj = DMatrix::from_fn(n, 3, |i, j| w[i] * jac[(i, j)]);
    let info = jac.transpose() * wj;
    let (sig, correlation) = match (n > 3, info.try_inverse()) {
        (true, Some(cov)) => {
            let s2 = sol.weighted_rss / (n - 3) as f64;
            let sig: Vec<Option<f64>> = (0..3).map(|i| Some(2.0 * (s2 * cov[(i, i)]).max(0.0).sqrt())).collect();
            let mut corr = [[0.0; 3]; 3];
            for (i, row) in corr.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = cov[(i, j)] / (cov[(i, i)] * cov[(j, j)]).sqrt();
                }
            }
            (sig, Some(corr))
        }
        _ => (vec![None; 3], None),
    };
    Ok(GeneralFit {
        result: build_result(ModelId::CounterHighGeneral, &["q2", "q3", "q4"], &[q2, q3, q4], &sig, sol.weighted_rss, n),
        correlation,
    })
}

/// Counter-propagating pump strength as a function of the co-propagating
/// one: `α²/r` up to the breakpoint `α0²`, `s α0²` beyond it. The two
/// pieces join continuously only when `s = 1/r`.
pub fn piecewise_beta_squared(alpha_sq: f64, alpha0_sq: f64, r: f64, s: f64) -> Result<f64, FitError> {
    if r.is_nan() || r <= 0.0 {
        return Err(FitError::Invalid(format!("pump ratio r must be positive, got {r}")));
    }
    if [s, alpha0_sq, alpha_sq].iter().any(|v| v.is_nan() || *v < 0.0) {
        return Err(FitError::Invalid("s, alpha0^2 and alpha^2 must be non-negative".into()));
    }
    Ok(if alpha_sq <= alpha0_sq { alpha_sq / r } else { s * alpha0_sq })
}

/// Relation between the two pumps while the co-propagating power is swept.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PumpSchedule {
    /// α²/β² below the breakpoint.
    pub ratio: f64,
    /// Breakpoint α0².
    pub alpha0_sq: f64,
    /// β² = s α0² above the breakpoint.
    pub s: f64,
}

/// Physical parameters (rates in kHz) plus the power conversion and pump
/// schedule needed to predict measured linewidths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardModel {
    pub params: SystemParams,
    /// α² per μW of detuning-corrected power.
    pub eta_conv: f64,
    pub schedule: PumpSchedule,
}

/// Linear-model coefficients implied by a [`ForwardModel`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitCoefficients {
    /// γ_eff = γ + 4V0²/Γ.
    pub p0: f64,
    /// 4ηλ²/κ.
    pub p1: f64,
    /// γ.
    pub q0: f64,
    /// 4ηλ²/(κ r).
    pub q1: f64,
    /// κV0²/(ηg²).
    pub q3: f64,
    /// Breakpoint power α0²/η.
    pub breakpoint_power: f64,
}

impl ForwardModel {
    pub fn fit_coefficients(&self) -> FitCoefficients {
        let p = &self.params;
        let p1 = 4.0 * self.eta_conv * p.lambda_c * p.lambda_c / p.kappa;
        FitCoefficients {
            p0: p.gamma + 4.0 * p.v0 * p.v0 / p.gamma_q,
            p1,
            q0: p.gamma,
            q1: p1 / self.schedule.ratio,
            q3: p.kappa * p.v0 * p.v0 / (self.eta_conv * p.g_c * p.g_c),
            breakpoint_power: self.schedule.alpha0_sq / self.eta_conv,
        }
    }

    /// Pump amplitudes at co-propagating power `power` (μW).
    pub fn pumps(&self, power: f64) -> Result<(f64, f64), FitError> {
        if power.is_nan() || power < 0.0 {
            return Err(FitError::Invalid(format!("power must be non-negative, got {power}")));
        }
        let a2 = self.eta_conv * power;
        let b2 = piecewise_beta_squared(a2, self.schedule.alpha0_sq, self.schedule.ratio, self.schedule.s)?;
        Ok((a2.sqrt(), b2.sqrt()))
    }
}

/// `(power, γ_a+, γ_a-)` in kHz at each co-propagating power, evaluated at
/// the optical resonance.
pub fn predict_linewidths(model: &ForwardModel, powers: &[f64]) -> Result<Vec<(f64, f64, f64)>, FitError> {
    powers
        .iter()
        .map(|&x| {
            let (a, b) = model.pumps(x)?;
            let p = model.params.with_pumps(a, b);
            Ok((
                x,
                linewidth_at_resonance(&p, Direction::CoPropagating),
                linewidth_at_resonance(&p, Direction::CounterPropagating),
            ))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn line(dir: Direction, xs: &[f64], f: impl Fn(f64) -> f64) -> FitDataset {
        FitDataset::new(xs.iter().map(|&x| Observation { direction: dir, power: x, linewidth: f(x), weight: None }).collect())
            .unwrap()
    }

    #[test]
    fn piecewise_examples() {
        assert_relative_eq!(piecewise_beta_squared(9.15, 100.0, 9.15, 0.0).unwrap(), 1.0);
        assert_eq!(piecewise_beta_squared(0.0, 1.0, 9.15, 0.5).unwrap(), 0.0);
        let r = 4.0;
        assert_eq!(piecewise_beta_squared(20.0, 8.0, r, 1.0 / r).unwrap(), 8.0 / r);
        assert_eq!(piecewise_beta_squared(8.0, 8.0, r, 1.0 / r).unwrap(), 8.0 / r);
        assert_eq!(piecewise_beta_squared(20.0, 8.0, r, 3.0).unwrap(), 24.0);
        assert!(piecewise_beta_squared(1.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn linear_recovers_noiseless_line() {
        let xs: Vec<f64> = (1..=10).map(|i| 10.0 * i as f64).collect();
        let fit = fit_linear(&line(Direction::CoPropagating, &xs, |x| 11.25 + 0.36 * x)).unwrap();
        assert_eq!(fit.model_id, ModelId::CoLinear);
        assert_relative_eq!(fit.param("p0"), 11.25, max_relative = 1e-9);
        assert_relative_eq!(fit.param("p1"), 0.36, max_relative = 1e-9);
        assert!(fit.residual_norm < 1e-9);
        assert_eq!(fit.n_points, 10);
    }

    #[test]
    fn two_point_flat_line() {
        let fit = fit_linear(&line(Direction::CounterPropagating, &[0.0, 1.0], |_| 4.5)).unwrap();
        assert_eq!(fit.model_id, ModelId::CounterLowLinear);
        assert_relative_eq!(fit.param("q0"), 4.5, max_relative = 1e-14);
        assert!(fit.param("q1").abs() < 1e-14);
        assert_eq!(fit.sigma2("q0"), None);
    }

    #[test]
    fn linear_errors() {
        let same = line(Direction::CoPropagating, &[3.0, 3.0, 3.0], |x| x);
        assert!(matches!(fit_linear(&same), Err(FitError::Singular(_))));
        let one = line(Direction::CoPropagating, &[3.0], |x| x);
        assert!(matches!(fit_linear(&one), Err(FitError::TooFewPoints { .. })));
        let mut rows = line(Direction::CoPropagating, &[1.0, 2.0], |x| x).rows;
        rows.push(Observation { direction: Direction::CounterPropagating, power: 3.0, linewidth: 1.0, weight: None });
        assert!(matches!(fit_linear(&FitDataset::new(rows).unwrap()), Err(FitError::MixedDirections)));
    }

    #[test]
    fn affine_equivariance() {
        let xs = [5.0, 17.0, 23.0, 40.0, 41.0, 66.0];
        let noise = [0.3, -0.7, 0.1, 0.9, -0.4, 0.2];
        let base = line(Direction::CoPropagating, &xs, |x| {
            2.0 + 0.5 * x + noise[xs.iter().position(|&v| v == x).unwrap()]
        });
        let f0 = fit_linear(&base).unwrap();
        let scaled = FitDataset::new(base.rows().iter().map(|r| Observation { linewidth: 3.0 * r.linewidth, ..*r }).collect()).unwrap();
        let f1 = fit_linear(&scaled).unwrap();
        assert_relative_eq!(f1.param("p0"), 3.0 * f0.param("p0"), max_relative = 1e-10);
        assert_relative_eq!(f1.param("p1"), 3.0 * f0.param("p1"), max_relative = 1e-10);
        let shifted = FitDataset::new(base.rows().iter().map(|r| Observation { power: r.power + 7.5, ..*r }).collect()).unwrap();
        let f2 = fit_linear(&shifted).unwrap();
        assert_relative_eq!(f2.param("p1"), f0.param("p1"), max_relative = 1e-10);
        assert_relative_eq!(f2.param("p0"), f0.param("p0") - 7.5 * f0.param("p1"), max_relative = 1e-10);
    }

    #[test]
    fn weighted_fit_ignores_downweighted_outlier() {
        let mut rows: Vec<Observation> = (1..=6)
            .map(|i| Observation { direction: Direction::CoPropagating, power: i as f64, linewidth: 1.0 + 2.0 * i as f64, weight: Some(1.0) })
            .collect();
        rows.push(Observation { direction: Direction::CoPropagating, power: 3.5, linewidth: 100.0, weight: Some(1e-12) });
        let fit = fit_linear(&FitDataset::new(rows).unwrap()).unwrap();
        assert_relative_eq!(fit.param("p1"), 2.0, max_relative = 1e-6);
    }

    #[test]
    fn inverse_model_examples() {
        let xs: Vec<f64> = (1..=10).map(|i| 100.0 * i as f64).collect();
        let data = line(Direction::CounterPropagating, &xs, |x| 15.0 + 2324.0 / x);
        let fit = fit_high_power_counter(&data, 15.0).unwrap();
        assert_relative_eq!(fit.param("q3"), 2324.0, max_relative = 1e-9);
        assert_eq!(fit.param("q2"), 15.0);
        assert_eq!(fit.sigma2("q2"), Some(0.0));

        let single = line(Direction::CounterPropagating, &[100.0], |_| 25.0);
        let fit = fit_high_power_counter(&single, 15.0).unwrap();
        assert_relative_eq!(fit.param("q3"), 1000.0, max_relative = 1e-14);
        assert_eq!(fit.sigma2("q3"), None);

        let zero = line(Direction::CounterPropagating, &[0.0, 100.0], |_| 25.0);
        assert!(matches!(fit_high_power_counter(&zero, 15.0), Err(FitError::NonPositivePower(_))));
    }

    #[test]
    fn inverse_residuals_orthogonal_to_regressor() {
        let xs = [120.0, 180.0, 260.0, 300.0, 410.0, 520.0, 700.0];
        let noise = [0.5, -1.1, 0.3, 0.8, -0.2, -0.6, 0.4];
        let data = FitDataset::new(
            xs.iter()
                .zip(noise)
                .map(|(&x, e)| Observation { direction: Direction::CounterPropagating, power: x, linewidth: 14.0 + 2000.0 / x + e, weight: None })
                .collect(),
        )
        .unwrap();
        let fit = fit_high_power_counter(&data, 14.0).unwrap();
        let dot: f64 = data.rows().iter().map(|r| (r.linewidth - fit.evaluate(r.power)) / r.power).sum();
        assert!(dot.abs() < 1e-12, "{dot}");
    }

    #[test]
    fn general_inverse_fit_recovers_offset() {
        let xs: Vec<f64> = (1..=12).map(|i| 80.0 * i as f64).collect();
        let truth = |x: f64| inverse_model(14.0, 2300.0, 60.0, x);
        let noise = [0.02, -0.01, 0.015, -0.02, 0.0, 0.01, -0.015, 0.005, 0.02, -0.005, 0.0, -0.01];
        let data = FitDataset::new(
            xs.iter()
                .zip(noise)
                .map(|(&x, e)| Observation { direction: Direction::CounterPropagating, power: x, linewidth: truth(x) + e, weight: None })
                .collect(),
        )
        .unwrap();
        let g = fit_high_power_counter_general(&data).unwrap();
        assert_relative_eq!(g.result.param("q4"), 60.0, max_relative = 0.2);
        assert_relative_eq!(g.result.param("q3"), 2300.0, max_relative = 0.05);
        assert!(g.max_correlation() > 0.9);
        let exact = line(Direction::CounterPropagating, &xs, truth);
        let g = fit_high_power_counter_general(&exact).unwrap();
        assert_relative_eq!(g.result.param("q4"), 60.0, max_relative = 1e-6);
    }

    fn forward() -> ForwardModel {
        // κ and Γ in kHz; chosen so that 4ηλ²/κ = 0.36 and γ + 4V0²/Γ = 11.25.
        let params = SystemParams {
            delta: -1.0e4,
            omega_m: 1.0e4,
            kappa: 5200.0,
            gamma: 3.25,
            gamma_q: 2000.0,
            lambda_c: (0.36 * 5200.0 / 4.0f64).sqrt(),
            g_c: 0.0,
            v0: (8.0 * 2000.0 / 4.0f64).sqrt(),
            v1: 0.0,
            alpha: 0.0,
            beta: 0.0,
            t_a_plus: 1.0,
            t_a_minus: 1.0,
            t_b_plus: 1.0,
            t_b_minus: 1.0,
        };
        ForwardModel { params, eta_conv: 1.0, schedule: PumpSchedule { ratio: 9.15, alpha0_sq: 1e9, s: 0.0 } }
    }

    #[test]
    fn prediction_examples() {
        let m = forward();
        let tp = m.fit_coefficients();
        assert_relative_eq!(tp.p0, 11.25, max_relative = 1e-12);
        assert_relative_eq!(tp.p1, 0.36, max_relative = 1e-12);
        let out = predict_linewidths(&m, &[0.0, 100.0]).unwrap();
        assert_relative_eq!(out[0].1, 11.25, max_relative = 1e-12);
        assert_eq!(out[0].1, out[0].2);
        assert_relative_eq!(out[1].1, 47.25, max_relative = 1e-12);
    }

    #[test]
    fn counter_linewidth_saturates_at_high_power() {
        let mut m = forward();
        m.params.g_c = 0.5;
        m.schedule = PumpSchedule { ratio: 9.15, alpha0_sq: 200.0, s: 0.05 };
        let beta0_sq = 0.05 * 200.0;
        let floor = m.params.gamma + 4.0 * beta0_sq * m.params.lambda_c.powi(2) / m.params.kappa;
        let out = predict_linewidths(&m, &[1e16]).unwrap();
        assert_relative_eq!(out[0].2, floor, max_relative = 1e-6);
        // The approach follows q2 + q3/(q4 + x) with q4 = Γκ/(4ηg²).
        let tp = m.fit_coefficients();
        let q4 = m.params.gamma_q * m.params.kappa / (4.0 * m.eta_conv * m.params.g_c.powi(2));
        for x in [500.0, 5000.0, 50000.0] {
            let got = predict_linewidths(&m, &[x]).unwrap()[0].2;
            assert_relative_eq!(got, inverse_model(floor, tp.q3, q4, x), max_relative = 1e-12);
        }
    }

    #[test]
    fn slope_maps_to_physical_parameters() {
        let m = forward();
        let xs: Vec<f64> = (0..8).map(|i| 25.0 * i as f64).collect();
        let pred = predict_linewidths(&m, &xs).unwrap();
        let data = FitDataset::new(
            pred.iter().map(|&(x, y, _)| Observation { direction: Direction::CoPropagating, power: x, linewidth: y, weight: None }).collect(),
        )
        .unwrap();
        let fit = fit_linear(&data).unwrap();
        let p = &m.params;
        assert_relative_eq!(fit.param("p1"), 4.0 * m.eta_conv * p.lambda_c * p.lambda_c / p.kappa, max_relative = 1e-9);
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let text = "direction,power_uW,linewidth_kHz\n+,10,14.85\n-,10,13.1\n";
        let d = FitDataset::from_csv(text.as_bytes()).unwrap();
        assert_eq!(d.len(), 2);
        assert_eq!(d.rows()[1].direction, Direction::CounterPropagating);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(FitDataset::from_csv(buf.as_slice()).unwrap(), d);

        let weighted = "direction,power_uW,linewidth_kHz,weight\n+,10,14.85,2\n+,20,18,\n";
        let d = FitDataset::from_csv(weighted.as_bytes()).unwrap();
        assert_eq!(d.rows()[0].weight, Some(2.0));
        assert_eq!(d.rows()[1].weight, None);

        for bad in [
            "power_uW,linewidth_kHz\n1,2\n",
            "direction,power_uW,linewidth_kHz,extra\n+,1,2,3\n",
            "direction,power_uW,linewidth_kHz\n*,1,2\n",
            "direction,power_uW,linewidth_kHz\n+,abc,2\n",
            "direction,power_uW,linewidth_kHz\n+,-1,2\n",
            "direction,power_uW,linewidth_kHz\n+,1,0\n",
        ] {
            assert!(FitDataset::from_csv(bad.as_bytes()).is_err(), "{bad}");
        }
    }

    #[test]
    fn result_json_shape() {
        let xs = [1.0, 2.0, 3.0];
        let fit = fit_linear(&line(Direction::CoPropagating, &xs, |x| 1.0 + x)).unwrap();
        let v: serde_json::Value = serde_json::from_str(&fit.to_json()).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["model_id", "n_points", "params", "residual_norm", "two_sigma"]);
        assert_eq!(v["model_id"], "co_linear");
        let back: FitResult = serde_json::from_value(v).unwrap();
        assert_eq!(back, fit);
    }
}
