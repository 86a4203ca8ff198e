use std::fmt::Write as _;
use std::io::Write;

use clap::Args;
use quasimode::closedform::{self, Direction};
use quasimode::model::{build_backscatter_pair, build_cut_system, build_full_system};
use quasimode::response::{bath_temperatures, effective_inverse_susceptibility, effective_temperature, frequency_grid, poles};
use quasimode::{DynamicalMatrix, ModeIndex, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::CliError;
use crate::output;
use crate::OutArgs;

const FREQUENCIES_PER_TRIAL: usize = 64;

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    /// Flip the sign of one directed a- -> b+ coupling in the elimination systems.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy)]
struct Check {
    name: &'static str,
    tolerance: f64,
}

const CHECKS: [Check; 5] = [
    Check { name: "chi_inv_vs_elimination", tolerance: 1e-10 },
    Check { name: "linewidth_vs_2re_chi_inv", tolerance: 1e-10 },
    Check { name: "temperature_vs_elimination", tolerance: 1e-10 },
    Check { name: "input_weight_sum", tolerance: 1e-10 },
    Check { name: "backscatter_poles", tolerance: 1e-10 },
];

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn trial_params(seed: u64, trial: u64) -> SystemParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    let mut log = |lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
    let omega_m = log(-0.5, 0.5);
    let detune = log(-0.1, 0.1);
    SystemParams {
        delta: -omega_m * detune,
        omega_m,
        kappa: log(-2.0, 0.0),
        gamma: log(-5.0, -2.0),
        gamma_q: log(-3.0, -0.5),
        lambda_c: log(-4.0, -2.0),
        g_c: log(-4.0, -2.0),
        v0: log(-3.0, -1.0),
        v1: log(-4.0, -2.0),
        alpha: log(-1.0, 2.0),
        beta: log(-1.0, 2.0),
        t_a_plus: log(-1.0, 1.0),
        t_a_minus: log(-1.0, 1.0),
        t_b_plus: log(-1.0, 1.0),
        t_b_minus: log(-1.0, 1.0),
    }
}

fn with_fault(mut m: DynamicalMatrix, fault: bool) -> Result<DynamicalMatrix, CliError> {
    if fault {
        m.inject_sign_fault(ModeIndex::AMinus, ModeIndex::BPlus)?;
    }
    Ok(m)
}

/// Worst deviation of each check for one parameter set.
fn run_trial(p: &SystemParams, fault: bool) -> Result<[f64; 5], CliError> {
    let mut dev = [0.0f64; 5];
    let cut = SystemParams { v1: 0.0, ..*p };
    let grid = frequency_grid(p.omega_m - 5.0 * p.kappa, p.omega_m + 5.0 * p.kappa, FREQUENCIES_PER_TRIAL);
    let temps = bath_temperatures(p);
    let full = with_fault(build_full_system(p), fault)?;
    for dir in Direction::BOTH {
        let m = with_fault(build_cut_system(&cut, dir.cut()), fault && dir == Direction::CounterPropagating)?;
        for &nu in &grid {
            let oracle = effective_inverse_susceptibility(&m, dir.phonon(), nu)?;
            let closed = closedform::chi_inv(&cut, dir, nu);
            dev[0] = dev[0].max((closed - oracle.chi_inv_eff).norm() / oracle.chi_inv_eff.norm());
            dev[1] = dev[1].max(rel(closedform::linewidth(&cut, dir, nu), 2.0 * closed.re));
            let t_oracle = effective_temperature(&m, dir.phonon(), nu, &temps)?;
            dev[2] = dev[2].max(rel(closedform::effective_temperature_closed(&cut, dir, nu), t_oracle));
            let r = effective_inverse_susceptibility(&full, dir.phonon(), nu)?;
            let total: f64 = r.input_coeffs.iter().map(|(_, c)| c.norm_sqr()).sum();
            dev[3] = dev[3].max(rel(total, r.linewidth));
        }
    }
    let eig = poles(&build_backscatter_pair(p))?;
    let (lo, hi) = closedform::v1_poles(p);
    let mut closed = [lo, hi];
    closed.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    for (e, c) in eig.iter().zip(&closed) {
        dev[4] = dev[4].max((e - c).norm() / c.norm());
    }
    Ok(dev)
}

pub fn run(args: &ValidateArgs) -> Result<(), CliError> {
    if args.trials == 0 {
        return Err(CliError::Input("--trials must be at least 1".into()));
    }
    let results: Vec<(SystemParams, [f64; 5])> = (0..args.trials as u64)
        .into_par_iter()
        .map(|t| {
            let p = trial_params(args.seed, t);
            run_trial(&p, args.inject_fault).map(|d| (p, d))
        })
        .collect::<Result<_, CliError>>()?;

    let mut report = String::new();
    writeln!(report, "validate seed={} trials={}", args.seed, args.trials).unwrap();
    writeln!(report, "{:<28} {:>12} {:>10}  status", "check", "max_rel_dev", "tolerance").unwrap();
    let mut failures = Vec::new();
    for (k, check) in CHECKS.iter().enumerate() {
        // First trial attaining the maximum, so the report is order-independent.
        let (worst_trial, worst) = results
            .iter()
            .enumerate()
            .map(|(i, (_, d))| (i, d[k]))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 || x.1.is_nan() && !acc.1.is_nan() { x } else { acc });
        let ok = worst <= check.tolerance;
        writeln!(
            report,
            "{:<28} {:>12.3e} {:>10.1e}  {}",
            check.name,
            worst,
            check.tolerance,
            if ok { "ok" } else { "FAIL" }
        )
        .unwrap();
        if !ok {
            failures.push((check.name, worst_trial));
        }
    }
    for (name, trial) in &failures {
        writeln!(report, "\nfailing parameter set for {name} (trial {trial}):").unwrap();
        writeln!(report, "{}", results[*trial].0.to_json()).unwrap();
    }
    writeln!(report, "result: {}", if failures.is_empty() { "pass" } else { "fail" }).unwrap();

    let mut w = output::writer(args.out.out.as_deref())?;
    w.write_all(report.as_bytes())?;
    w.flush()?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Property(format!("{} check(s) exceeded tolerance", failures.len())))
    }
}
