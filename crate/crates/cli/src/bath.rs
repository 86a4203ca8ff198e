use clap::Args;
use quasimode::bath::{band_integral, discrete_bath_sum, BathSpec, CouplingProduct};

use crate::error::CliError;
use crate::output;
use crate::OutArgs;

#[derive(Debug, Args)]
pub struct BathArgs {
    /// Grid sizes N to tabulate.
    #[arg(long = "modes", value_delimiter = ',', default_values_t = [1000usize, 10_000, 100_000])]
    pub modes: Vec<usize>,
    /// Density of states ρ.
    #[arg(long, default_value_t = 100.0)]
    pub rho: f64,
    /// Bath coupling λ_k to the optical beat note.
    #[arg(long, default_value_t = 0.01)]
    pub lambda: f64,
    /// Bath coupling μ_k to a-.
    #[arg(long, default_value_t = 0.01)]
    pub mu: f64,
    /// Thermalization rate η of each bath mode.
    #[arg(long, default_value_t = 0.01)]
    pub eta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub center: f64,
    /// Band half-width W.
    #[arg(long, default_value_t = 0.5)]
    pub halfwidth: f64,
    /// Pump amplitude α.
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Probe frequency; the band center when omitted.
    #[arg(long)]
    pub nu: Option<f64>,
    #[command(flatten)]
    pub out: OutArgs,
}

const HEADER: [&str; 11] = [
    "N",
    "Re_sum",
    "Im_sum",
    "analytic_Re",
    "analytic_Im",
    "rel_error",
    "Lambda",
    "gamma_a_minus",
    "chi_cross",
    "in_band",
    "flag",
];

pub fn run(args: &BathArgs) -> Result<(), CliError> {
    if args.modes.is_empty() {
        return Err(CliError::Input("--modes needs at least one grid size".into()));
    }
    let nu = args.nu.unwrap_or(args.center);
    if !nu.is_finite() {
        return Err(CliError::Input(format!("--nu must be finite, got {nu}")));
    }
    let mut rows = Vec::with_capacity(args.modes.len());
    for &n in &args.modes {
        let spec = BathSpec {
            rho: args.rho,
            lambda_k: args.lambda,
            mu_k: args.mu,
            eta_th: args.eta,
            band_center: args.center,
            band_halfwidth: args.halfwidth,
            n_modes: n,
            alpha: args.alpha,
        };
        let lam = discrete_bath_sum(&spec, nu, CouplingProduct::LambdaSquared)?;
        let mu = discrete_bath_sum(&spec, nu, CouplingProduct::MuSquared)?;
        let cross = discrete_bath_sum(&spec, nu, CouplingProduct::LambdaMu)?;
        let exact = band_integral(&spec, nu, CouplingProduct::LambdaSquared);
        let rel_error = if exact.norm() > 0.0 { (lam.value - exact).norm() / exact.norm() } else { 0.0 };
        if !lam.resolved {
            eprintln!("warning: N = {n}: grid spacing {:.3e} is not below eta = {}", spec.spacing(), spec.eta_th);
        }
        rows.push(vec![
            n.to_string(),
            output::num(lam.value.re),
            output::num(lam.value.im),
            output::num(exact.re),
            output::num(exact.im),
            output::num(rel_error),
            output::num(2.0 * args.alpha * args.alpha * lam.value.re),
            output::num(2.0 * mu.value.re),
            output::num(2.0 * cross.value.re),
            lam.in_band.to_string(),
            if lam.resolved { "ok" } else { "underresolved" }.to_string(),
        ]);
    }
    let mut w = csv::Writer::from_writer(output::writer(args.out.out.as_deref())?);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}
