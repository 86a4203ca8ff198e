use std::path::PathBuf;

use clap::{Args, ValueEnum};
use quasimode::closedform::{self, Direction};
use quasimode::response::frequency_grid;
use quasimode::SystemParams;
use rayon::prelude::*;

use crate::error::CliError;
use crate::output;
use crate::OutArgs;

const BUNDLED_CONFIG: &str = include_str!("../configs/reference.json");

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepVariable {
    /// Co-propagating cooperativity C_α; evaluated at ν = -Δ.
    #[value(name = "cooperativity_alpha")]
    CooperativityAlpha,
    /// Probe frequency ν at the configured pumps.
    #[value(name = "nu")]
    Nu,
    /// Co-propagating power (α² = eta · x); evaluated at ν = -Δ.
    #[value(name = "power")]
    Power,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Quantity {
    #[value(name = "gamma_a_plus_over_gamma")]
    GammaPlus,
    #[value(name = "gamma_a_minus_over_gamma")]
    GammaMinus,
    #[value(name = "T_plus_over_T")]
    TPlus,
    #[value(name = "T_minus_over_T")]
    TMinus,
    #[value(name = "shift_plus")]
    ShiftPlus,
    #[value(name = "shift_minus")]
    ShiftMinus,
}

impl Quantity {
    const ALL: [Quantity; 6] = [
        Quantity::GammaPlus,
        Quantity::GammaMinus,
        Quantity::TPlus,
        Quantity::TMinus,
        Quantity::ShiftPlus,
        Quantity::ShiftMinus,
    ];

    fn name(self) -> String {
        self.to_possible_value().expect("no skipped variants").get_name().to_string()
    }
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// SystemParams JSON; defaults to the bundled cooperativity-plot parameters.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "var", value_enum, default_value = "cooperativity_alpha")]
    pub variable: SweepVariable,
    /// First sweep value (default: 0, or ω_m - 5κ for `nu`).
    #[arg(long)]
    pub start: Option<f64>,
    /// Last sweep value (default: 5 for `cooperativity_alpha`, ω_m + 5κ for `nu`, 1000 for `power`).
    #[arg(long)]
    pub stop: Option<f64>,
    #[arg(long, default_value_t = 101)]
    pub points: usize,
    /// α² per unit power for `--var power`.
    #[arg(long, default_value_t = 1.0)]
    pub eta: f64,
    /// Fixed α²/β² during `power` and `cooperativity_alpha` sweeps; β from the config otherwise.
    #[arg(long)]
    pub ratio: Option<f64>,
    /// Comma-separated subset of output columns (x is always written).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub columns: Vec<Quantity>,
    #[command(flatten)]
    pub out: OutArgs,
}

fn point(base: &SystemParams, args: &SweepArgs, x: f64) -> Result<(SystemParams, f64), CliError> {
    let beta_for = |alpha: f64| match args.ratio {
        Some(r) => alpha / r.sqrt(),
        None => base.beta,
    };
    Ok(match args.variable {
        SweepVariable::CooperativityAlpha => {
            let alpha = base.pump_for_cooperativity(x)?;
            (base.with_pumps(alpha, beta_for(alpha)), -base.delta)
        }
        SweepVariable::Power => {
            if x < 0.0 {
                return Err(CliError::Input(format!("power must be non-negative, got {x}")));
            }
            let alpha = (args.eta * x).sqrt();
            (base.with_pumps(alpha, beta_for(alpha)), -base.delta)
        }
        SweepVariable::Nu => (*base, x),
    })
}

fn evaluate(p: &SystemParams, nu: f64, q: Quantity) -> f64 {
    use Direction::{CoPropagating as Co, CounterPropagating as Counter};
    match q {
        Quantity::GammaPlus => closedform::linewidth(p, Co, nu) / p.gamma,
        Quantity::GammaMinus => closedform::linewidth(p, Counter, nu) / p.gamma,
        Quantity::TPlus => closedform::effective_temperature_closed(p, Co, nu) / p.t_a_plus,
        Quantity::TMinus => closedform::effective_temperature_closed(p, Counter, nu) / p.t_a_minus,
        Quantity::ShiftPlus => closedform::frequency_shift(p, Co, nu),
        Quantity::ShiftMinus => closedform::frequency_shift(p, Counter, nu),
    }
}

pub fn run(args: &SweepArgs) -> Result<(), CliError> {
    let base = match &args.config {
        Some(path) => output::load_params(path)?,
        None => SystemParams::from_json(BUNDLED_CONFIG)?,
    };
    let quantities: Vec<Quantity> = if args.columns.is_empty() { Quantity::ALL.to_vec() } else { args.columns.clone() };
    if quantities.iter().any(|q| matches!(q, Quantity::TPlus | Quantity::TMinus))
        && !(base.t_a_plus > 0.0 && base.t_a_minus > 0.0)
    {
        return Err(CliError::Input("temperature ratios need positive T_a_plus and T_a_minus".into()));
    }
    if args.points < 2 {
        return Err(CliError::Input(format!("--points must be at least 2, got {}", args.points)));
    }
    if !(args.eta > 0.0 && args.eta.is_finite()) {
        return Err(CliError::Input(format!("--eta must be positive, got {}", args.eta)));
    }
    if let Some(r) = args.ratio {
        if !(r > 0.0 && r.is_finite()) {
            return Err(CliError::Input(format!("--ratio must be positive, got {r}")));
        }
    }
    let (default_start, default_stop) = match args.variable {
        SweepVariable::CooperativityAlpha => (0.0, 5.0),
        SweepVariable::Nu => (base.omega_m - 5.0 * base.kappa, base.omega_m + 5.0 * base.kappa),
        SweepVariable::Power => (0.0, 1000.0),
    };
    let start = args.start.unwrap_or(default_start);
    let stop = args.stop.unwrap_or(default_stop);
    if !(start.is_finite() && stop.is_finite()) {
        return Err(CliError::Input("sweep range must be finite".into()));
    }

    let xs = frequency_grid(start, stop, args.points);
    let rows: Vec<Vec<f64>> = xs
        .par_iter()
        .map(|&x| {
            let (p, nu) = point(&base, args, x)?;
            let mut row = vec![x];
            row.extend(quantities.iter().map(|&q| evaluate(&p, nu, q)));
            Ok(row)
        })
        .collect::<Result<_, CliError>>()?;
    if let Some(row) = rows.iter().find(|r| r.iter().any(|v| !v.is_finite())) {
        return Err(CliError::Numerical(format!("non-finite value in sweep at x = {}", row[0])));
    }

    let mut w = csv::Writer::from_writer(output::writer(args.out.out.as_deref())?);
    let mut header = vec!["x".to_string()];
    header.extend(quantities.iter().map(|q| q.name()));
    w.write_record(&header)?;
    for row in &rows {
        w.write_record(row.iter().map(|&v| output::num(v)))?;
    }
    w.flush()?;
    Ok(())
}
