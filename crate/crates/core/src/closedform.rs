//! Analytic susceptibilities, linewidths, shifts and temperatures of the
//! high-Q phonons a± in the loop-free diagrams, and the pole pair produced
//! by direct a+ ↔ a- back-scattering.
//!
//! Conventions: `x = ν + Δ` is the offset from the optical resonance,
//! `C_α = 4α²g²/(Γκ)` and `C_β = 4β²g²/(Γκ)`. For the co-propagating phonon
//! a+ the "own" pump is α and the "other" pump (which cools through the
//! quasi-mode b-) is β; the counter-propagating phonon a- swaps the roles.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::{CutTopology, ModeIndex, SystemParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    /// `+`: phonon a+ travelling with the strong pump.
    #[serde(rename = "+")]
    CoPropagating,
    /// `-`: phonon a- travelling against it.
    #[serde(rename = "-")]
    CounterPropagating,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::CoPropagating, Direction::CounterPropagating];

    pub fn symbol(self) -> &'static str {
        match self {
            Direction::CoPropagating => "+",
            Direction::CounterPropagating => "-",
        }
    }

    pub fn phonon(self) -> ModeIndex {
        match self {
            Direction::CoPropagating => ModeIndex::APlus,
            Direction::CounterPropagating => ModeIndex::AMinus,
        }
    }

    /// The four-mode diagram that contains this phonon.
    pub fn cut(self) -> CutTopology {
        match self {
            Direction::CoPropagating => CutTopology::CutC,
            Direction::CounterPropagating => CutTopology::CutB,
        }
    }

    /// `(own pump, other pump)` amplitudes.
    fn pumps(self, p: &SystemParams) -> (f64, f64) {
        match self {
            Direction::CoPropagating => (p.alpha, p.beta),
            Direction::CounterPropagating => (p.beta, p.alpha),
        }
    }

    /// `(T of the phonon's own bath, T of the partner quasi-mode bath)`.
    fn temperatures(self, p: &SystemParams) -> (f64, f64) {
        match self {
            Direction::CoPropagating => (p.t_a_plus, p.t_b_minus),
            Direction::CounterPropagating => (p.t_a_minus, p.t_b_plus),
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+" => Ok(Direction::CoPropagating),
            "-" => Ok(Direction::CounterPropagating),
            other => Err(format!("direction must be '+' or '-', got '{other}'")),
        }
    }
}

/// Cooperativity of the pump that damps this direction's quasi-mode partner.
fn other_cooperativity(p: &SystemParams, dir: Direction) -> f64 {
    let (_, other) = dir.pumps(p);
    4.0 * other * other * p.g_c * p.g_c / (p.gamma_q * p.kappa)
}

/// Inverse susceptibility of a± to its input fields.
pub fn chi_inv(p: &SystemParams, dir: Direction, nu: f64) -> Complex64 {
    let (own, other) = dir.pumps(p);
    let x = nu + p.delta;
    let optical = -I * x + p.kappa / 2.0;
    let pumped_quasi = 2.0 * other * other * p.g_c * p.g_c / p.gamma_q;
    let kappa_tilde = optical + pumped_quasi;
    -I * (nu - p.omega_m)
        + p.gamma / 2.0
        + own * own * p.lambda_c * p.lambda_c / optical
        + (2.0 * p.v0 * p.v0 / p.gamma_q) * (1.0 - pumped_quasi / kappa_tilde)
}

/// Phonon linewidth `γ_a±(ν) = 2 Re χ⁻¹`, written out as a sum of Lorentzians.
pub fn linewidth(p: &SystemParams, dir: Direction, nu: f64) -> f64 {
    let (own, other) = dir.pumps(p);
    let x = nu + p.delta;
    let k2 = p.kappa * p.kappa / 4.0;
    let c = other_cooperativity(p, dir);
    let broadened = (1.0 + c) * p.kappa / 2.0;
    p.gamma
        + own * own * p.lambda_c * p.lambda_c * p.kappa / (x * x + k2)
        + (4.0 * p.v0 * p.v0 / p.gamma_q)
            * (1.0 - (2.0 * other * other * p.g_c * p.g_c / p.gamma_q) * broadened / (x * x + broadened * broadened))
}

/// Linewidth at the optical resonance ν = -Δ:
/// `γ + 4(own)²λ²/κ + (4V0²/Γ)/(1 + C_other)`.
pub fn linewidth_at_resonance(p: &SystemParams, dir: Direction) -> f64 {
    let (own, _) = dir.pumps(p);
    let c = other_cooperativity(p, dir);
    p.gamma + 4.0 * own * own * p.lambda_c * p.lambda_c / p.kappa + (4.0 * p.v0 * p.v0 / p.gamma_q) / (1.0 + c)
}

/// Resonance displacement `Im χ⁻¹ + (ν - ω_m)`.
///
/// The direct optical-spring term is positive above the optical resonance.
/// The quasi-mode term enters with the opposite sign: it is the imaginary
/// part of `-(2V0²/Γ)(2g²(other)²/Γ)/κ̃`. Both vanish at ν = -Δ.
pub fn frequency_shift(p: &SystemParams, dir: Direction, nu: f64) -> f64 {
    let (own, other) = dir.pumps(p);
    let x = nu + p.delta;
    let c = other_cooperativity(p, dir);
    let broadened = (1.0 + c) * p.kappa / 2.0;
    own * own * p.lambda_c * p.lambda_c * x / (x * x + p.kappa * p.kappa / 4.0)
        - (2.0 * p.v0 * p.v0 / p.gamma_q) * (2.0 * other * other * p.g_c * p.g_c / p.gamma_q) * x
            / (x * x + broadened * broadened)
}

/// Maximum of the direct optical-spring shift, reached at ν = -Δ + κ/2.
pub fn peak_optical_shift(p: &SystemParams, dir: Direction) -> f64 {
    let (own, _) = dir.pumps(p);
    own * own * p.lambda_c * p.lambda_c / p.kappa
}

/// Effective temperature with optical noise neglected:
///
/// ```text
/// T_eff = [γ T_a + (4V0²/Γ) (x² + κ²/4) / (x² + (κ/2 + 2(other)²g²/Γ)²) T_b] / γ_a(ν)
/// ```
pub fn effective_temperature_closed(p: &SystemParams, dir: Direction, nu: f64) -> f64 {
    let (_, other) = dir.pumps(p);
    let (t_a, t_b) = dir.temperatures(p);
    let x = nu + p.delta;
    let bare = x * x + p.kappa * p.kappa / 4.0;
    let pumped = p.kappa / 2.0 + 2.0 * other * other * p.g_c * p.g_c / p.gamma_q;
    let suppression = bare / (x * x + pumped * pumped);
    (p.gamma * t_a + (4.0 * p.v0 * p.v0 / p.gamma_q) * suppression * t_b) / linewidth(p, dir, nu)
}

/// `(γ_Σ, δγ)`: the mean linewidth of a± and the difference of their
/// amplitude decay rates, `(γ_a+ - γ_a-)/2 = 2|α² - β²|λ²/κ`.
pub fn damping_split(p: &SystemParams) -> (f64, f64) {
    let l2k = p.lambda_c * p.lambda_c / p.kappa;
    let sigma = p.gamma + 2.0 * (p.alpha * p.alpha + p.beta * p.beta) * l2k;
    let delta = 2.0 * (p.alpha * p.alpha - p.beta * p.beta).abs() * l2k;
    (sigma, delta)
}

/// Poles `ω_∓ = ω_m - iγ_Σ/2 ∓ sqrt(V1² - δγ²/4)` of the V1-coupled pair
/// (V0 ignored). A negative radicand gives `+i sqrt(|·|)`, so the second
/// pole is always the less damped one when the split is imaginary.
pub fn v1_poles(p: &SystemParams) -> (Complex64, Complex64) {
    let (sigma, delta) = damping_split(p);
    let center = Complex64::new(p.omega_m, -sigma / 2.0);
    let radicand = p.v1 * p.v1 - delta * delta / 4.0;
    let root = if radicand >= 0.0 {
        Complex64::new(radicand.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, (-radicand).sqrt())
    };
    (center - root, center + root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use Direction::*;

    fn reference(alpha_sq: f64, beta_sq: f64) -> SystemParams {
        SystemParams::reference().with_pumps(alpha_sq.sqrt(), beta_sq.sqrt())
    }

    #[test]
    fn bare_susceptibility() {
        let mut p = reference(0.0, 0.0);
        p.v0 = 0.0;
        for nu in [0.7, 1.0, 1.2] {
            for d in Direction::BOTH {
                assert_eq!(chi_inv(&p, d, nu), Complex64::new(p.gamma / 2.0, -(nu - p.omega_m)));
            }
        }
    }

    #[test]
    fn resonance_linewidths_reference_set() {
        let p = reference(0.0, 0.0);
        for d in Direction::BOTH {
            assert_relative_eq!(linewidth_at_resonance(&p, d), 0.033, max_relative = 1e-12);
            assert_relative_eq!(linewidth(&p, d, 1.0), 0.033, max_relative = 1e-12);
        }
        let p = reference(50.0, 0.0);
        assert_relative_eq!(linewidth_at_resonance(&p, CoPropagating), 0.035, max_relative = 1e-12);
        assert_relative_eq!(linewidth_at_resonance(&p, CounterPropagating), 0.017, max_relative = 1e-12);
        for d in Direction::BOTH {
            assert_relative_eq!(
                linewidth_at_resonance(&p, d),
                2.0 * chi_inv(&p, d, -p.delta).re,
                max_relative = 1e-14
            );
            assert_relative_eq!(linewidth_at_resonance(&p, d), linewidth(&p, d, -p.delta), max_relative = 1e-14);
        }
    }

    #[test]
    fn equal_pumps_restore_symmetry() {
        let p = reference(20.0, 20.0);
        assert_eq!(linewidth_at_resonance(&p, CoPropagating), linewidth_at_resonance(&p, CounterPropagating));
    }

    #[test]
    fn strong_pump_limit() {
        let p = reference(1e15, 3.0);
        let floor = p.gamma + 4.0 * 3.0 * p.lambda_c * p.lambda_c / p.kappa;
        assert_relative_eq!(linewidth_at_resonance(&p, CounterPropagating), floor, max_relative = 1e-9);
    }

    #[test]
    fn co_linewidth_linear_in_pump_power() {
        let base = linewidth_at_resonance(&reference(0.0, 1.0), CoPropagating);
        let slope = 4.0 * 1e-6 / 0.1;
        for a2 in [10.0, 100.0, 1000.0] {
            let got = linewidth_at_resonance(&reference(a2, 1.0), CoPropagating);
            assert_relative_eq!(got - base, slope * a2, max_relative = 1e-9);
        }
    }

    #[test]
    fn shift_examples() {
        let p = reference(50.0, 3.0);
        for d in Direction::BOTH {
            assert_eq!(frequency_shift(&p, d, -p.delta), 0.0);
        }
        let p = reference(50.0, 0.0);
        let nu = -p.delta + p.kappa / 2.0;
        assert_relative_eq!(frequency_shift(&p, CoPropagating, nu), 5.0e-4, max_relative = 1e-12);
        assert_relative_eq!(peak_optical_shift(&p, CoPropagating), 5.0e-4, max_relative = 1e-12);
    }

    #[test]
    fn shift_at_half_linewidth_offset() {
        // At x = κ/2 the quasi-mode term is -(2V0²/Γ) C/(1 + (1 + C)²).
        let p = reference(50.0, 20.0);
        let nu = -p.delta + p.kappa / 2.0;
        let cb = 4.0 * 20.0 * p.g_c * p.g_c / (p.gamma_q * p.kappa);
        let expect = 50.0 * p.lambda_c * p.lambda_c / p.kappa
            - (2.0 * p.v0 * p.v0 / p.gamma_q) * cb / (1.0 + (1.0 + cb) * (1.0 + cb));
        assert_relative_eq!(frequency_shift(&p, CoPropagating, nu), expect, max_relative = 1e-12);
    }

    #[test]
    fn temperature_examples() {
        let p = reference(0.0, 0.0);
        for d in Direction::BOTH {
            assert_relative_eq!(effective_temperature_closed(&p, d, 1.0), 1.0, max_relative = 1e-14);
        }
        let p = reference(50.0, 0.0);
        assert_relative_eq!(
            effective_temperature_closed(&p, CounterPropagating, 1.0),
            0.009 / 0.017,
            max_relative = 1e-12
        );
        // β = 0 leaves the heating weight of a+ untouched; only γ_a+ grows.
        assert_relative_eq!(effective_temperature_closed(&p, CoPropagating, 1.0), 0.033 / 0.035, max_relative = 1e-12);
    }

    #[test]
    fn pole_examples() {
        let mut p = reference(0.0, 0.0);
        p.v1 = 0.02;
        let (lo, hi) = v1_poles(&p);
        assert_relative_eq!(lo.re, 0.98, max_relative = 1e-15);
        assert_relative_eq!(hi.re, 1.02, max_relative = 1e-15);
        assert_eq!(lo.im, -0.0005);
        assert_eq!(hi.im, -0.0005);

        // δγ = 2V1 exactly: dyadic values keep every operation exact.
        let p = SystemParams {
            kappa: 0.125,
            lambda_c: 0.0625,
            gamma: 1.0 / 1024.0,
            v1: 0.09375,
            ..SystemParams::reference().with_pumps(2.0, 1.0)
        };
        assert_eq!(damping_split(&p).1, 2.0 * p.v1);
        let (lo, hi) = v1_poles(&p);
        assert_eq!(lo, hi);
        assert_eq!(lo, Complex64::new(1.0, -damping_split(&p).0 / 2.0));

        let p = SystemParams { v1: 0.05, ..p };
        let (lo, hi) = v1_poles(&p);
        assert_eq!(lo.re, hi.re);
        assert!(lo.im < hi.im);
    }

    #[test]
    fn direction_parsing() {
        assert_eq!("+".parse::<Direction>().unwrap(), CoPropagating);
        assert_eq!(" - ".parse::<Direction>().unwrap(), CounterPropagating);
        assert!("x".parse::<Direction>().is_err());
    }
}
