//! Elimination of a continuum of bulk phonons `b_k` coupled to the optical
//! beat note (strength λ) and to the counter-propagating phonon a- (strength μ).
//!
//! The band is a flat density of states ρ over `[center - W, center + W]`,
//! discretized on a uniform midpoint grid. Each grid point stands for
//! `ρ Δω` bath modes, so the discrete sum
//!
//! ```text
//! Σ_k ρ Δω c² / (i(ω_k - ν) + η/2)
//! ```
//!
//! converges to the band integral as `Δω → 0`, and to `π ρ c² + i·PV` once
//! the band is wide compared to η.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::BathError;

const PAIRWISE_BLOCK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSpec {
    /// Density of states ρ (modes per unit angular frequency).
    pub rho: f64,
    /// Coupling λ of each bath mode to the optical beat note.
    pub lambda_k: f64,
    /// Coupling μ of each bath mode to a-.
    pub mu_k: f64,
    /// Thermalization rate η of each bath mode.
    pub eta_th: f64,
    pub band_center: f64,
    /// Half-width W of the band.
    pub band_halfwidth: f64,
    /// Number of grid points N.
    pub n_modes: usize,
    /// Pump amplitude α.
    pub alpha: f64,
}

/// Which product of couplings weights the sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingProduct {
    LambdaSquared,
    MuSquared,
    LambdaMu,
}

/// Result of a discrete sum together with its validity flags.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BathSum {
    pub value: Complex64,
    /// ν lies inside the band; outside it the real part is suppressed.
    pub in_band: bool,
    /// Grid spacing is below η, so the Lorentzian is resolved.
    pub resolved: bool,
}

/// Continuum-limit rates of the reduced c / a- dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuasiModeRates {
    /// Λ = 2π α² ρ λ², the optomechanical damping of c.
    pub lambda_rate: f64,
    /// γ_a- = 2π ρ μ², the backscatter loss of a-.
    pub gamma_a_minus: f64,
    /// χ = 2π λ μ ρ, the cross-damping per unit pump amplitude.
    pub chi_cross: f64,
    /// Principal-value displacement of the optical resonance, α² ρ λ² ln|(W+δ)/(W-δ)|
    /// with δ = ν - center.
    pub pv_shift: f64,
}

impl BathSpec {
    pub fn validate(&self) -> Result<(), BathError> {
        for (name, value) in [("rho", self.rho), ("eta_th", self.eta_th), ("band_halfwidth", self.band_halfwidth)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(BathError::NonPositive { name, value });
            }
        }
        for (name, value) in [("lambda_k", self.lambda_k), ("mu_k", self.mu_k), ("alpha", self.alpha)] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(BathError::Negative { name, value });
            }
        }
        if !self.band_center.is_finite() {
            return Err(BathError::Negative { name: "band_center", value: self.band_center });
        }
        if self.n_modes < 2 {
            return Err(BathError::TooFewModes(self.n_modes));
        }
        Ok(())
    }

    /// Grid spacing Δω = 2W / N.
    pub fn spacing(&self) -> f64 {
        2.0 * self.band_halfwidth / self.n_modes as f64
    }

    pub fn coupling(&self, product: CouplingProduct) -> f64 {
        match product {
            CouplingProduct::LambdaSquared => self.lambda_k * self.lambda_k,
            CouplingProduct::MuSquared => self.mu_k * self.mu_k,
            CouplingProduct::LambdaMu => self.lambda_k * self.mu_k,
        }
    }

    /// Bath mode frequencies (cell midpoints).
    pub fn frequencies(&self) -> impl Iterator<Item = f64> + '_ {
        let h = self.spacing();
        let start = self.band_center - self.band_halfwidth;
        (0..self.n_modes).map(move |k| start + (k as f64 + 0.5) * h)
    }

    pub fn contains(&self, nu: f64) -> bool {
        (nu - self.band_center).abs() < self.band_halfwidth
    }
}

fn pairwise_sum(terms: &[Complex64]) -> Complex64 {
    if terms.len() <= PAIRWISE_BLOCK {
        terms.iter().sum()
    } else {
        let (lo, hi) = terms.split_at(terms.len() / 2);
        pairwise_sum(lo) + pairwise_sum(hi)
    }
}

/// `Σ_k ρΔω c² / (i(ω_k - ν) + η/2)` over the midpoint grid, summed pairwise
/// so the result does not depend on evaluation order.
pub fn discrete_bath_sum(spec: &BathSpec, nu: f64, product: CouplingProduct) -> Result<BathSum, BathError> {
    spec.validate()?;
    let weight = spec.rho * spec.spacing() * spec.coupling(product);
    let half_eta = spec.eta_th / 2.0;
    let terms: Vec<Complex64> =
        spec.frequencies().map(|w| weight / Complex64::new(half_eta, w - nu)).collect();
    Ok(BathSum {
        value: pairwise_sum(&terms),
        in_band: spec.contains(nu),
        resolved: spec.spacing() < spec.eta_th,
    })
}

/// Exact band integral `∫ ρ c² / (i(ω - ν) + η/2) dω` over the finite band;
/// the `N → ∞` limit of [`discrete_bath_sum`].
pub fn band_integral(spec: &BathSpec, nu: f64, product: CouplingProduct) -> Complex64 {
    let h = spec.eta_th / 2.0;
    let scale = spec.rho * spec.coupling(product);
    let lo = spec.band_center - spec.band_halfwidth - nu;
    let hi = spec.band_center + spec.band_halfwidth - nu;
    let re = (hi / h).atan() - (lo / h).atan();
    let im = -0.5 * ((hi * hi + h * h) / (lo * lo + h * h)).ln();
    Complex64::new(scale * re, scale * im)
}

/// Narrow-line (η → 0) principal value of the flat band, `ρ c² ln|(W+δ)/(W-δ)|`.
pub fn principal_value(spec: &BathSpec, nu: f64, product: CouplingProduct) -> f64 {
    let d = nu - spec.band_center;
    let w = spec.band_halfwidth;
    spec.rho * spec.coupling(product) * ((w + d) / (w - d)).abs().ln()
}

/// Continuum rates Λ, γ_a-, χ and the optical principal-value shift.
pub fn quasimode_reduction(spec: &BathSpec, nu: f64) -> Result<QuasiModeRates, BathError> {
    spec.validate()?;
    let a2 = spec.alpha * spec.alpha;
    Ok(QuasiModeRates {
        lambda_rate: 2.0 * PI * a2 * spec.rho * spec.lambda_k * spec.lambda_k,
        gamma_a_minus: 2.0 * PI * spec.rho * spec.mu_k * spec.mu_k,
        chi_cross: 2.0 * PI * spec.lambda_k * spec.mu_k * spec.rho,
        pv_shift: a2 * principal_value(spec, nu, CouplingProduct::LambdaSquared),
    })
}

/// Damping quadratic form over `(c, a-)`: `[[Λ, αχ], [αχ, γ_a-]]`.
/// With constant couplings αχ = sqrt(Λ γ_a-), so the matrix has rank one:
/// only the superposition `sqrt(Λ) c + sqrt(γ_a-) a-` decays.
pub fn induced_damping_matrix(spec: &BathSpec, nu: f64) -> Result<[[f64; 2]; 2], BathError> {
    let r = quasimode_reduction(spec, nu)?;
    let cross = spec.alpha * r.chi_cross;
    Ok([[r.lambda_rate, cross], [cross, r.gamma_a_minus]])
}

/// Thermalization rate η = π/ρ at which the continuum reproduces a single
/// quasi-mode.
pub fn eta_correspondence(rho: f64) -> Result<f64, BathError> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(BathError::NonPositive { name: "rho", value: rho });
    }
    Ok(PI / rho)
}

/// Single-photon quasi-mode coupling g whose pumped damping `4α²g²/Γ`
/// equals the continuum Λ for a quasi-mode of linewidth `gamma_q`.
pub fn matched_quasimode_coupling(spec: &BathSpec, gamma_q: f64) -> f64 {
    (gamma_q * PI * spec.rho * spec.lambda_k * spec.lambda_k / 2.0).sqrt()
}
