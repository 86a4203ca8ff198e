use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use quasimode::fitting::{
    fit_high_power_counter, fit_high_power_counter_general, fit_linear, FitDataset, FitResult, ModelId,
};
use quasimode::response::frequency_grid;
use quasimode::Direction;

use crate::error::CliError;
use crate::output;
use crate::OutArgs;

const CURVE_POINTS: usize = 201;
const CORRELATION_WARNING: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Regime {
    Low,
    High,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// CSV with columns direction, power_uW, linewidth_kHz and optional weight.
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "low")]
    pub regime: Regime,
    /// Fixed offset q2 of the high-power counter-propagating model (kHz).
    #[arg(long)]
    pub q2: Option<f64>,
    /// Breakpoint power P0 (μW). Restricts rows to the chosen regime and
    /// turns a low-power fit into q2 = q0 + P0 q1.
    #[arg(long)]
    pub p0: Option<f64>,
    /// Low-regime JSON report supplying q0 and q1 for q2 (needs --p0).
    #[arg(long)]
    pub low_fit: Option<PathBuf>,
    /// Also fit the three-parameter model q2 + q3/(q4 + x).
    #[arg(long)]
    pub general: bool,
    /// Also write model predictions as CSV (to `<out>.curve.csv`, or after the JSON on stdout).
    #[arg(long)]
    pub curve: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

fn q2_from_low_fit(path: &Path, p0: f64) -> Result<f64, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    let reports: Vec<FitResult> = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("{}: not a fit report: {e}", path.display())))?;
    let low = reports
        .iter()
        .find(|r| r.model_id == ModelId::CounterLowLinear)
        .ok_or_else(|| CliError::Input(format!("{} has no counter_low_linear result", path.display())))?;
    Ok(low.param("q0") + p0 * low.param("q1"))
}

fn resolve_q2(args: &FitArgs) -> Result<f64, CliError> {
    match (args.q2, &args.low_fit, args.p0) {
        (Some(q2), None, _) if q2.is_finite() => Ok(q2),
        (Some(q2), None, _) => Err(CliError::Input(format!("--q2 must be finite, got {q2}"))),
        (None, Some(path), Some(p0)) => q2_from_low_fit(path, p0),
        (None, Some(_), None) => Err(CliError::Input("--low-fit needs --p0 to form q2 = q0 + P0 q1".into())),
        (Some(_), Some(_), _) => Err(CliError::Input("give either --q2 or --low-fit, not both".into())),
        (None, None, _) => Err(CliError::Input(
            "high regime needs q2: pass --q2, or --low-fit with --p0".into(),
        )),
    }
}

fn fit_all(args: &FitArgs, data: &FitDataset) -> Result<Vec<FitResult>, CliError> {
    let q2 = match args.regime {
        Regime::High if !data.direction(Direction::CounterPropagating).is_empty() => Some(resolve_q2(args)?),
        _ => None,
    };
    let mut results = Vec::new();
    for dir in Direction::BOTH {
        let subset = data.direction(dir);
        if subset.is_empty() {
            continue;
        }
        match (args.regime, dir, q2) {
            (Regime::High, Direction::CounterPropagating, Some(q2)) => {
                results.push(fit_high_power_counter(&subset, q2)?);
                if args.general {
                    let general = fit_high_power_counter_general(&subset)?;
                    let corr = general.max_correlation();
                    if corr.is_nan() {
                        eprintln!("warning: general inverse fit has no residual degrees of freedom; correlations unavailable");
                    } else if corr >= CORRELATION_WARNING {
                        eprintln!("warning: general inverse fit is strongly correlated (max |corr| = {corr:.3}); treat its parameters with caution");
                    }
                    results.push(general.result);
                }
            }
            _ => results.push(fit_linear(&subset)?),
        }
    }
    if results.is_empty() {
        return Err(CliError::Input("no observations to fit".into()));
    }
    Ok(results)
}

fn write_curve<W: Write>(w: W, results: &[FitResult], data: &FitDataset) -> Result<(), CliError> {
    let lo = data.rows().iter().map(|r| r.power).fold(f64::INFINITY, f64::min);
    let hi = data.rows().iter().map(|r| r.power).fold(f64::NEG_INFINITY, f64::max);
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["power_uW".to_string()];
    header.extend(results.iter().map(|r| serde_json::to_value(r.model_id).unwrap().as_str().unwrap().to_string()));
    csv.write_record(&header)?;
    for x in frequency_grid(lo, hi, CURVE_POINTS) {
        let mut row = vec![output::num(x)];
        row.extend(results.iter().map(|r| output::num(r.evaluate(x))));
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

pub fn run(args: &FitArgs) -> Result<(), CliError> {
    let mut data = FitDataset::from_csv_path(&args.data)?;
    if let Some(p0) = args.p0 {
        if !(p0 >= 0.0 && p0.is_finite()) {
            return Err(CliError::Input(format!("--p0 must be a non-negative number, got {p0}")));
        }
        data = match args.regime {
            Regime::Low => data.filter(|r| r.power <= p0),
            Regime::High => data.filter(|r| r.power >= p0),
        };
    }
    let results = fit_all(args, &data)?;
    let json = serde_json::to_string_pretty(&results).map_err(|e| CliError::Numerical(e.to_string()))?;

    let mut w = output::writer(args.out.out.as_deref())?;
    writeln!(w, "{json}")?;
    if args.curve {
        match &args.out.out {
            Some(path) => {
                let mut curve_path = path.clone().into_os_string();
                curve_path.push(".curve.csv");
                write_curve(output::writer(Some(Path::new(&curve_path)))?, &results, &data)?;
            }
            None => write_curve(&mut w, &results, &data)?,
        }
    }
    w.flush()?;
    Ok(())
}
