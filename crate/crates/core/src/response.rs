//! Generic frequency-domain linear response of a [`DynamicalMatrix`].
//!
//! Nothing here knows about the analytic susceptibilities in
//! [`crate::closedform`]; the two are compared against each other in tests.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;

use crate::error::ResponseError;
use crate::model::{DynamicalMatrix, ModeIndex, SystemParams};

/// Pivots smaller than this fraction of the largest pivot count as zero.
const SINGULAR_PIVOT_RATIO: f64 = 1e-15;

/// Effective single-mode response after eliminating every other mode.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveResponse {
    pub mode: ModeIndex,
    pub nu: f64,
    /// Scalar inverse susceptibility of the selected mode.
    pub chi_inv_eff: Complex64,
    /// `2 Re(chi_inv_eff)`.
    pub linewidth: f64,
    /// Optically induced displacement of the resonance, `Im(chi_inv_eff) + (ν - ω_mode)`.
    pub shift: f64,
    /// Coefficient of each input field in the eliminated scalar equation,
    /// `chi_inv_eff · x = Σ_j c_j x_j,in`.
    pub input_coeffs: Vec<(ModeIndex, Complex64)>,
}

impl EffectiveResponse {
    pub fn coeff(&self, input: ModeIndex) -> Option<Complex64> {
        self.input_coeffs.iter().find(|(m, _)| *m == input).map(|&(_, c)| c)
    }
}

fn pivot_ratio(lu: &nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>) -> f64 {
    let u = lu.u();
    let mags = u.diagonal().map(|z| z.norm());
    let max = mags.max();
    if max == 0.0 {
        0.0
    } else {
        mags.min() / max
    }
}

/// Full susceptibility `χ(ν) = M(ν)⁻¹`; amplitudes follow from
/// `x = χ(ν) · diag(sqrt(rates)) · x_in`.
pub fn susceptibility_matrix(m: &DynamicalMatrix, nu: f64) -> Result<DMatrix<Complex64>, ResponseError> {
    let lu = m.coefficient_matrix(Complex64::new(nu, 0.0)).lu();
    let ratio = pivot_ratio(&lu);
    if ratio < SINGULAR_PIVOT_RATIO {
        return Err(ResponseError::Singular { nu, pivot_ratio: ratio });
    }
    lu.try_inverse().ok_or(ResponseError::Singular { nu, pivot_ratio: ratio })
}

/// `det M(ν)` at a complex frequency; vanishes at the poles of the response.
pub fn determinant(m: &DynamicalMatrix, nu: Complex64) -> Complex64 {
    m.coefficient_matrix(nu).lu().determinant()
}

/// Eliminates every mode except `mode` (Schur complement of the remaining
/// block) and returns the scalar inverse susceptibility together with the
/// per-input transfer coefficients.
pub fn effective_inverse_susceptibility(
    m: &DynamicalMatrix,
    mode: ModeIndex,
    nu: f64,
) -> Result<EffectiveResponse, ResponseError> {
    let a = m.index_of(mode).ok_or(crate::error::ModelError::MissingMode(mode))?;
    let mat = m.coefficient_matrix(Complex64::new(nu, 0.0));
    let rates = m.input_rates();
    let n = m.len();
    let rest: Vec<usize> = (0..n).filter(|&i| i != a).collect();
    let k = rest.len();

    let mut chi_inv = mat[(a, a)];
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n];
    coeffs[a] = Complex64::new(rates[a].sqrt(), 0.0);

    if k > 0 {
        let block = DMatrix::from_fn(k, k, |i, j| mat[(rest[i], rest[j])]);
        // Right-hand sides: the column coupling the rest to `mode`, then the
        // scaled input of each remaining mode.
        let rhs = DMatrix::from_fn(k, k + 1, |i, j| {
            if j == 0 {
                mat[(rest[i], a)]
            } else if i == j - 1 {
                Complex64::new(rates[rest[i]].sqrt(), 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let lu = block.lu();
        let singular = || ResponseError::SingularBlock { modes: rest.iter().map(|&i| m.modes()[i]).collect(), nu };
        if pivot_ratio(&lu) < SINGULAR_PIVOT_RATIO {
            return Err(singular());
        }
        let x = lu.solve(&rhs).ok_or_else(singular)?;
        for (pos, &i) in rest.iter().enumerate() {
            let row = mat[(a, i)];
            chi_inv -= row * x[(pos, 0)];
            for (col, &j) in rest.iter().enumerate() {
                coeffs[j] -= row * x[(pos, col + 1)];
            }
        }
    }

    let kind = m.kinds()[a];
    let shift = chi_inv.im + kind.frequency().map_or(0.0, |w| nu - w);
    Ok(EffectiveResponse {
        mode,
        nu,
        chi_inv_eff: chi_inv,
        linewidth: 2.0 * chi_inv.re,
        shift,
        input_coeffs: m.modes().iter().copied().zip(coeffs).collect(),
    })
}

/// Bath temperatures of the four mechanical inputs.
pub fn bath_temperatures(p: &SystemParams) -> [(ModeIndex, f64); 4] {
    [
        (ModeIndex::APlus, p.t_a_plus),
        (ModeIndex::AMinus, p.t_a_minus),
        (ModeIndex::BPlus, p.t_b_plus),
        (ModeIndex::BMinus, p.t_b_minus),
    ]
}

/// Noise-weighted temperature `(1/γ_mode(ν)) Σ_j |c_j(ν)|² T_j`.
///
/// Optical inputs are treated as noiseless regardless of `temps`. Every
/// mechanical input of `m` needs an entry in `temps`.
pub fn effective_temperature(
    m: &DynamicalMatrix,
    mode: ModeIndex,
    nu: f64,
    temps: &[(ModeIndex, f64)],
) -> Result<f64, ResponseError> {
    for &(mode, value) in temps {
        if value < 0.0 || value.is_nan() {
            return Err(ResponseError::NegativeTemperature { mode, value });
        }
    }
    let resp = effective_inverse_susceptibility(m, mode, nu)?;
    let mut weighted = 0.0;
    for &(input, c) in &resp.input_coeffs {
        if input.is_optical() {
            continue;
        }
        let t = temps
            .iter()
            .find(|(m, _)| *m == input)
            .map(|&(_, t)| t)
            .ok_or(ResponseError::MissingTemperature(input))?;
        weighted += c.norm_sqr() * t;
    }
    Ok(weighted / resp.linewidth)
}

/// Poles of the response: eigenvalues of `H - iD/2`, sorted by real part
/// then imaginary part.
pub fn poles(m: &DynamicalMatrix) -> Result<Vec<Complex64>, ResponseError> {
    let h = m.effective_hamiltonian()?;
    let mut out = if h.nrows() == 2 {
        let (x, y) = eigenvalues_2x2(h[(0, 0)], h[(0, 1)], h[(1, 0)], h[(1, 1)]);
        vec![x, y]
    } else {
        let schur = Schur::try_new(h, 1e-15, 10_000).ok_or(ResponseError::NoConvergence)?;
        schur.eigenvalues().ok_or(ResponseError::NoConvergence)?.iter().copied().collect()
    };
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

/// Roots of the characteristic polynomial of `[[a, b], [c, d]]`.
pub fn eigenvalues_2x2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let mean = (a + d) * 0.5;
    let half_diff = (a - d) * 0.5;
    let root = (half_diff * half_diff + b * c).sqrt();
    (mean - root, mean + root)
}

/// `n` evenly spaced points from `start` to `stop` inclusive.
pub fn frequency_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n).map(|i| start + (stop - start) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// 2001 points over `[ω_m - 5κ, ω_m + 5κ]`.
pub fn default_grid(p: &SystemParams) -> Vec<f64> {
    frequency_grid(p.omega_m - 5.0 * p.kappa, p.omega_m + 5.0 * p.kappa, 2001)
}
