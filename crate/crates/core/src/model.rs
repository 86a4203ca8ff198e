//! Physical parameters and assembly of the frequency-domain coefficient
//! matrices for the cut four-mode diagrams and the full six-mode system.
//!
//! Every mode obeys a Heisenberg–Langevin equation of the form
//!
//! ```text
//! -iν x_j = -i H_jj x_j - (r_j/2) x_j + sqrt(r_j) x_j,in - i Σ_k G_jk x_k
//! ```
//!
//! which we rewrite as `M(ν) x = B x_in` with
//! `M(ν) = diag(-i(ν - H_jj) + r_j/2) + i G` and `B = diag(sqrt(r_j))`.
//! Quasi-modes track the evaluation frequency (`H_bb = ν`), so their
//! diagonal entry is `Γ/2` at every ν.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::ModelError;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// All rates and frequencies of the effective model in rescaled angular units.
///
/// Field names in JSON match the symbols used throughout the documentation:
/// `delta, omega_m, kappa, gamma, Gamma, lambda_c, g_c, V0, V1, alpha, beta,
/// T_a_plus, T_a_minus, T_b_plus, T_b_minus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemParams {
    /// Optical detuning Δ (negative for anti-Stokes pumping).
    pub delta: f64,
    pub omega_m: f64,
    /// Optical linewidth κ.
    pub kappa: f64,
    /// Intrinsic linewidth γ of the high-Q phonons a±.
    pub gamma: f64,
    /// Quasi-mode linewidth Γ.
    #[serde(rename = "Gamma")]
    pub gamma_q: f64,
    /// Single-photon coupling λ to the high-Q modes.
    pub lambda_c: f64,
    /// Single-photon coupling g to the quasi-modes.
    pub g_c: f64,
    /// Cross-type back-scattering a± ↔ b∓.
    #[serde(rename = "V0")]
    pub v0: f64,
    /// Same-type back-scattering a+ ↔ a-, b+ ↔ b-.
    #[serde(rename = "V1")]
    pub v1: f64,
    /// Co-propagating pump amplitude α.
    pub alpha: f64,
    /// Counter-propagating pump amplitude β.
    pub beta: f64,
    #[serde(rename = "T_a_plus")]
    pub t_a_plus: f64,
    #[serde(rename = "T_a_minus")]
    pub t_a_minus: f64,
    #[serde(rename = "T_b_plus")]
    pub t_b_plus: f64,
    #[serde(rename = "T_b_minus")]
    pub t_b_minus: f64,
}

/// Conditions under which the quasi-mode or rotating-wave treatment is
/// questionable. These never make a parameter set invalid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeWarning {
    /// Γ < 10γ: the quasi-mode no longer dominates the intrinsic damping.
    QuasiModeNotBroad,
    /// Δ ≥ 0 or |Δ| < 5κ: counter-rotating terms are not negligible.
    RotatingWaveMarginal,
}

impl fmt::Display for RegimeWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RegimeWarning::QuasiModeNotBroad => {
                write!(f, "quasi-mode linewidth Gamma is below 10*gamma")
            }
            RegimeWarning::RotatingWaveMarginal => {
                write!(f, "detuning is not red-detuned by at least 5*kappa")
            }
        }
    }
}

impl SystemParams {
    /// The rescaled parameter set used for the cooperativity plots:
    /// ω_m = 1, γ = 0.001, κ = 0.1, λ = 0.001, g = 0.005, Γ = 0.05, V0 = 0.02,
    /// with the pump on the mechanical resonance (Δ = -ω_m), no pumps, V1 = 0
    /// and unit bath temperatures.
    pub fn reference() -> Self {
        SystemParams {
            delta: -1.0,
            omega_m: 1.0,
            kappa: 0.1,
            gamma: 0.001,
            gamma_q: 0.05,
            lambda_c: 0.001,
            g_c: 0.005,
            v0: 0.02,
            v1: 0.0,
            alpha: 0.0,
            beta: 0.0,
            t_a_plus: 1.0,
            t_a_minus: 1.0,
            t_b_plus: 1.0,
            t_b_minus: 1.0,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("delta", self.delta),
            ("omega_m", self.omega_m),
            ("kappa", self.kappa),
            ("gamma", self.gamma),
            ("Gamma", self.gamma_q),
            ("lambda_c", self.lambda_c),
            ("g_c", self.g_c),
            ("V0", self.v0),
            ("V1", self.v1),
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("T_a_plus", self.t_a_plus),
            ("T_a_minus", self.t_a_minus),
            ("T_b_plus", self.t_b_plus),
            ("T_b_minus", self.t_b_minus),
        ];
        for (name, value) in fields {
            if !value.is_finite() {
                return Err(ModelError::NonFinite { name });
            }
        }
        for (name, value) in [("kappa", self.kappa), ("gamma", self.gamma), ("Gamma", self.gamma_q)] {
            if value <= 0.0 {
                return Err(ModelError::NonPositiveRate { name, value });
            }
        }
        for (name, value) in &fields[5..] {
            if *value < 0.0 {
                return Err(ModelError::Negative { name, value: *value });
            }
        }
        Ok(())
    }

    pub fn regime_warnings(&self) -> Vec<RegimeWarning> {
        let mut out = Vec::new();
        if self.gamma_q < 10.0 * self.gamma {
            out.push(RegimeWarning::QuasiModeNotBroad);
        }
        if !(self.delta < 0.0 && self.delta.abs() >= 5.0 * self.kappa) {
            out.push(RegimeWarning::RotatingWaveMarginal);
        }
        out
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let params: SystemParams = serde_json::from_str(text)?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("SystemParams serializes")
    }

    pub fn with_pumps(mut self, alpha: f64, beta: f64) -> Self {
        self.alpha = alpha;
        self.beta = beta;
        self
    }

    /// Pump amplitude that produces quasi-mode cooperativity `c`.
    pub fn pump_for_cooperativity(&self, c: f64) -> Result<f64, ModelError> {
        if self.g_c <= 0.0 {
            return Err(ModelError::NonPositiveRate { name: "g_c", value: self.g_c });
        }
        if c < 0.0 {
            return Err(ModelError::Negative { name: "cooperativity", value: c });
        }
        Ok((c * self.gamma_q * self.kappa / (4.0 * self.g_c * self.g_c)).sqrt())
    }

    /// Time-reversed parameter set: α ↔ β and every `+` bath with its `-` partner.
    pub fn mirrored(&self) -> Self {
        SystemParams {
            alpha: self.beta,
            beta: self.alpha,
            t_a_plus: self.t_a_minus,
            t_a_minus: self.t_a_plus,
            t_b_plus: self.t_b_minus,
            t_b_minus: self.t_b_plus,
            ..*self
        }
    }
}

/// α² = η P̃₊ and β² = η P̃₋ for detuning-corrected pump powers.
pub fn pump_amplitudes(p_plus: f64, p_minus: f64, eta_conv: f64) -> Result<(f64, f64), ModelError> {
    for (name, value) in [("P_plus", p_plus), ("P_minus", p_minus)] {
        if !value.is_finite() {
            return Err(ModelError::NonFinite { name });
        }
        if value < 0.0 {
            return Err(ModelError::Negative { name, value });
        }
    }
    if !(eta_conv > 0.0 && eta_conv.is_finite()) {
        return Err(ModelError::NonPositiveRate { name: "eta_conv", value: eta_conv });
    }
    Ok(((eta_conv * p_plus).sqrt(), (eta_conv * p_minus).sqrt()))
}

/// Quasi-mode cooperativities `(C_α, C_β) = 4(α², β²) g² / (Γκ)`.
pub fn cooperativities(p: &SystemParams) -> (f64, f64) {
    let scale = 4.0 * p.g_c * p.g_c / (p.gamma_q * p.kappa);
    (scale * p.alpha * p.alpha, scale * p.beta * p.beta)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModeIndex {
    CPlus,
    CMinus,
    APlus,
    AMinus,
    BPlus,
    BMinus,
}

impl ModeIndex {
    pub const ALL: [ModeIndex; 6] = [
        ModeIndex::CPlus,
        ModeIndex::CMinus,
        ModeIndex::APlus,
        ModeIndex::AMinus,
        ModeIndex::BPlus,
        ModeIndex::BMinus,
    ];

    pub fn is_optical(self) -> bool {
        matches!(self, ModeIndex::CPlus | ModeIndex::CMinus)
    }

    /// Partner with the opposite propagation direction.
    pub fn reversed(self) -> ModeIndex {
        match self {
            ModeIndex::CPlus => ModeIndex::CMinus,
            ModeIndex::CMinus => ModeIndex::CPlus,
            ModeIndex::APlus => ModeIndex::AMinus,
            ModeIndex::AMinus => ModeIndex::APlus,
            ModeIndex::BPlus => ModeIndex::BMinus,
            ModeIndex::BMinus => ModeIndex::BPlus,
        }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ModeIndex::CPlus => "c+",
            ModeIndex::CMinus => "c-",
            ModeIndex::APlus => "a+",
            ModeIndex::AMinus => "a-",
            ModeIndex::BPlus => "b+",
            ModeIndex::BMinus => "b-",
        };
        f.write_str(s)
    }
}

/// Diagonal structure of one mode's equation of motion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DiagKind {
    /// Cavity mode at frequency -Δ with linewidth κ.
    Optical { delta: f64, kappa: f64 },
    /// Resonant mode at `omega` with linewidth `damping`.
    Mechanical { omega: f64, damping: f64 },
    /// Broad quasi-mode; its frequency follows ν so only the damping remains.
    QuasiMode { damping: f64 },
}

impl DiagKind {
    pub fn damping(&self) -> f64 {
        match *self {
            DiagKind::Optical { kappa, .. } => kappa,
            DiagKind::Mechanical { damping, .. } => damping,
            DiagKind::QuasiMode { damping } => damping,
        }
    }

    /// Bare resonance frequency, `None` for quasi-modes.
    pub fn frequency(&self) -> Option<f64> {
        match *self {
            DiagKind::Optical { delta, .. } => Some(-delta),
            DiagKind::Mechanical { omega, .. } => Some(omega),
            DiagKind::QuasiMode { .. } => None,
        }
    }

    /// Diagonal entry of the coefficient matrix at (possibly complex) ν.
    pub fn entry(&self, nu: Complex64) -> Complex64 {
        match *self {
            DiagKind::Optical { delta, kappa } => -I * (nu + delta) + kappa / 2.0,
            DiagKind::Mechanical { omega, damping } => -I * (nu - omega) + damping / 2.0,
            DiagKind::QuasiMode { damping } => Complex64::new(damping / 2.0, 0.0),
        }
    }
}

/// Which loop-free sub-diagram to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutTopology {
    /// {c+, c-, a-, b+}: the counter-propagating phonon a- and its damping chain.
    CutB,
    /// {c-, c+, a+, b-}: the mirror image, describing a+.
    CutC,
}

/// Frequency-domain coefficient operator of a set of coupled modes.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalMatrix {
    modes: Vec<ModeIndex>,
    kinds: Vec<DiagKind>,
    couplings: DMatrix<f64>,
    faults: Vec<(usize, usize)>,
}

impl DynamicalMatrix {
    pub fn new(modes: impl IntoIterator<Item = (ModeIndex, DiagKind)>) -> Result<Self, ModelError> {
        let (modes, kinds): (Vec<_>, Vec<_>) = modes.into_iter().unzip();
        for (i, m) in modes.iter().enumerate() {
            if modes[..i].contains(m) {
                return Err(ModelError::DuplicateMode(*m));
            }
        }
        let n = modes.len();
        Ok(DynamicalMatrix { modes, kinds, couplings: DMatrix::zeros(n, n), faults: Vec::new() })
    }

    /// Sets the real, symmetric coupling between two distinct modes.
    pub fn set_coupling(&mut self, a: ModeIndex, b: ModeIndex, strength: f64) -> Result<(), ModelError> {
        let i = self.require(a)?;
        let j = self.require(b)?;
        if i == j {
            return Err(ModelError::SelfCoupling(a));
        }
        self.couplings[(i, j)] = strength;
        self.couplings[(j, i)] = strength;
        Ok(())
    }

    fn require(&self, m: ModeIndex) -> Result<usize, ModelError> {
        self.index_of(m).ok_or(ModelError::MissingMode(m))
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    pub fn kinds(&self) -> &[DiagKind] {
        &self.kinds
    }

    pub fn index_of(&self, m: ModeIndex) -> Option<usize> {
        self.modes.iter().position(|&x| x == m)
    }

    pub fn kind(&self, m: ModeIndex) -> Option<DiagKind> {
        self.index_of(m).map(|i| self.kinds[i])
    }

    pub fn coupling(&self, a: ModeIndex, b: ModeIndex) -> f64 {
        match (self.index_of(a), self.index_of(b)) {
            (Some(i), Some(j)) => self.couplings[(i, j)],
            _ => 0.0,
        }
    }

    /// Real symmetric coupling matrix in mode order.
    pub fn coupling_matrix(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    /// Input-coupling rates (κ, γ or Γ) in mode order.
    pub fn input_rates(&self) -> Vec<f64> {
        self.kinds.iter().map(DiagKind::damping).collect()
    }

    /// Nonzero coupling edges `(a, b, strength)` with `a` listed before `b`.
    pub fn edges(&self) -> Vec<(ModeIndex, ModeIndex, f64)> {
        let n = self.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let s = self.couplings[(i, j)];
                if s != 0.0 {
                    out.push((self.modes[i], self.modes[j], s));
                }
            }
        }
        out
    }

    /// `M(ν)` such that `M(ν) x = diag(sqrt(rates)) x_in`.
    pub fn coefficient_matrix(&self, nu: Complex64) -> DMatrix<Complex64> {
        let n = self.len();
        let mut m = DMatrix::from_fn(n, n, |i, j| I * self.couplings[(i, j)]);
        for (i, kind) in self.kinds.iter().enumerate() {
            m[(i, i)] = kind.entry(nu);
        }
        for &(i, j) in &self.faults {
            m[(i, j)] = -m[(i, j)];
        }
        m
    }

    /// Non-Hermitian effective Hamiltonian `H - iD/2` whose eigenvalues are
    /// the poles of the response. Quasi-modes have no fixed frequency, so
    /// systems containing them have no such representation.
    pub fn effective_hamiltonian(&self) -> Result<DMatrix<Complex64>, ModelError> {
        let n = self.len();
        let mut h = DMatrix::from_fn(n, n, |i, j| Complex64::new(self.couplings[(i, j)], 0.0));
        for (i, kind) in self.kinds.iter().enumerate() {
            let freq = kind.frequency().ok_or(ModelError::QuasiModePoles(self.modes[i]))?;
            h[(i, i)] = Complex64::new(freq, -kind.damping() / 2.0);
        }
        for &(i, j) in &self.faults {
            h[(i, j)] = -h[(i, j)];
        }
        Ok(h)
    }

    /// Sub-system on the listed modes, keeping only couplings among them.
    pub fn restrict(&self, keep: &[ModeIndex]) -> Result<DynamicalMatrix, ModelError> {
        let idx: Vec<usize> = keep.iter().map(|&m| self.require(m)).collect::<Result<_, _>>()?;
        let mut sub = DynamicalMatrix::new(idx.iter().map(|&i| (self.modes[i], self.kinds[i])))?;
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                sub.couplings[(a, b)] = self.couplings[(i, j)];
            }
        }
        Ok(sub)
    }

    /// Test hook: flips the sign of the directed `a -> b` coupling only,
    /// breaking Hermiticity. Used by the validation canary.
    #[doc(hidden)]
    pub fn inject_sign_fault(&mut self, a: ModeIndex, b: ModeIndex) -> Result<(), ModelError> {
        let i = self.require(a)?;
        let j = self.require(b)?;
        self.faults.push((i, j));
        Ok(())
    }
}

fn optical(p: &SystemParams) -> DiagKind {
    DiagKind::Optical { delta: p.delta, kappa: p.kappa }
}

fn mechanical(p: &SystemParams) -> DiagKind {
    DiagKind::Mechanical { omega: p.omega_m, damping: p.gamma }
}

fn quasi(p: &SystemParams) -> DiagKind {
    DiagKind::QuasiMode { damping: p.gamma_q }
}

/// Four-mode loop-free diagram. V1 plays no role here.
///
/// The mode order is `(pumped optical, other optical, target phonon,
/// partner quasi-mode)` for both topologies, so `CutC` at `(α, β)` is
/// entry-for-entry identical to `CutB` at `(β, α)`.
pub fn build_cut_system(p: &SystemParams, topology: CutTopology) -> DynamicalMatrix {
    let (c_main, c_other, a, b, main_pump, other_pump) = match topology {
        CutTopology::CutB => (ModeIndex::CPlus, ModeIndex::CMinus, ModeIndex::AMinus, ModeIndex::BPlus, p.alpha, p.beta),
        CutTopology::CutC => (ModeIndex::CMinus, ModeIndex::CPlus, ModeIndex::APlus, ModeIndex::BMinus, p.beta, p.alpha),
    };
    let mut m = DynamicalMatrix::new([
        (c_main, optical(p)),
        (c_other, optical(p)),
        (a, mechanical(p)),
        (b, quasi(p)),
    ])
    .expect("distinct modes");
    m.set_coupling(c_main, b, main_pump * p.g_c).expect("present");
    m.set_coupling(c_other, a, other_pump * p.lambda_c).expect("present");
    m.set_coupling(a, b, p.v0).expect("present");
    m
}

/// All six modes with the eight coupling edges of the effective Hamiltonian.
pub fn build_full_system(p: &SystemParams) -> DynamicalMatrix {
    use ModeIndex::*;
    let mut m = DynamicalMatrix::new([
        (CPlus, optical(p)),
        (CMinus, optical(p)),
        (APlus, mechanical(p)),
        (AMinus, mechanical(p)),
        (BPlus, quasi(p)),
        (BMinus, quasi(p)),
    ])
    .expect("distinct modes");
    let edges = [
        (CPlus, APlus, p.alpha * p.lambda_c),
        (CPlus, BPlus, p.alpha * p.g_c),
        (CMinus, AMinus, p.beta * p.lambda_c),
        (CMinus, BMinus, p.beta * p.g_c),
        (APlus, BMinus, p.v0),
        (AMinus, BPlus, p.v0),
        (APlus, AMinus, p.v1),
        (BPlus, BMinus, p.v1),
    ];
    for (a, b, s) in edges {
        m.set_coupling(a, b, s).expect("present");
    }
    m
}

/// The a+/a- pair coupled only by V1, after adiabatic elimination of c±:
/// each phonon carries its optically broadened linewidth γ + 4(pump)²λ²/κ.
/// V0 is ignored.
pub fn build_backscatter_pair(p: &SystemParams) -> DynamicalMatrix {
    let opt = 4.0 * p.lambda_c * p.lambda_c / p.kappa;
    let mut m = DynamicalMatrix::new([
        (ModeIndex::APlus, DiagKind::Mechanical { omega: p.omega_m, damping: p.gamma + opt * p.alpha * p.alpha }),
        (ModeIndex::AMinus, DiagKind::Mechanical { omega: p.omega_m, damping: p.gamma + opt * p.beta * p.beta }),
    ])
    .expect("distinct modes");
    m.set_coupling(ModeIndex::APlus, ModeIndex::AMinus, p.v1).expect("present");
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pump_amplitudes_examples() {
        assert_eq!(pump_amplitudes(0.0, 0.0, 1.0).unwrap(), (0.0, 0.0));
        let (a, b) = pump_amplitudes(9.15, 1.0, 1.0).unwrap();
        assert_relative_eq!(a, 3.024896692450835, max_relative = 1e-15);
        assert_eq!(b, 1.0);
        assert_relative_eq!(a * a / (b * b), 9.15, max_relative = 1e-15);
        assert_eq!(pump_amplitudes(50.0, 2.0, 2.0).unwrap(), (10.0, 2.0));
    }

    #[test]
    fn pump_amplitudes_reject_bad_input() {
        assert!(matches!(pump_amplitudes(-1.0, 0.0, 1.0), Err(ModelError::Negative { .. })));
        assert!(matches!(pump_amplitudes(1.0, -0.5, 1.0), Err(ModelError::Negative { .. })));
        assert!(pump_amplitudes(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn cooperativity_examples() {
        let p = SystemParams::reference();
        assert_eq!(cooperativities(&p), (0.0, 0.0));
        let a = 50f64.sqrt();
        let (ca, cb) = cooperativities(&p.with_pumps(a, 0.0));
        assert_relative_eq!(ca, 1.0, max_relative = 1e-14);
        assert_eq!(cb, 0.0);
        let (ca, cb) = cooperativities(&p.with_pumps(a, a));
        assert_relative_eq!(ca, 1.0, max_relative = 1e-14);
        assert_eq!(ca, cb);
        assert_relative_eq!(p.pump_for_cooperativity(1.0).unwrap(), a, max_relative = 1e-15);
    }

    #[test]
    fn validation_rejects_degenerate_rates() {
        let mut p = SystemParams::reference();
        p.gamma_q = 0.0;
        assert!(matches!(p.validate(), Err(ModelError::NonPositiveRate { name: "Gamma", .. })));
        let mut p = SystemParams::reference();
        p.kappa = 0.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::reference();
        p.v0 = -0.1;
        assert!(matches!(p.validate(), Err(ModelError::Negative { name: "V0", .. })));
        let mut p = SystemParams::reference();
        p.t_b_plus = -1.0;
        assert!(p.validate().is_err());
        let mut p = SystemParams::reference();
        p.delta = f64::NAN;
        assert!(matches!(p.validate(), Err(ModelError::NonFinite { name: "delta" })));
        assert!(SystemParams::reference().validate().is_ok());
    }

    #[test]
    fn regime_flags() {
        let p = SystemParams::reference();
        assert!(p.regime_warnings().is_empty());
        let mut q = p;
        q.gamma_q = 0.005;
        q.delta = -0.3;
        assert_eq!(q.regime_warnings(), vec![RegimeWarning::QuasiModeNotBroad, RegimeWarning::RotatingWaveMarginal]);
        q.delta = 1.0;
        assert!(q.regime_warnings().contains(&RegimeWarning::RotatingWaveMarginal));
    }

    #[test]
    fn json_keys_match_symbols() {
        let p = SystemParams::reference();
        let v: serde_json::Value = serde_json::from_str(&p.to_json()).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        let mut want = vec![
            "delta", "omega_m", "kappa", "gamma", "Gamma", "lambda_c", "g_c", "V0", "V1", "alpha", "beta",
            "T_a_plus", "T_a_minus", "T_b_plus", "T_b_minus",
        ];
        want.sort();
        assert_eq!(keys, want);
        assert_eq!(SystemParams::from_json(&p.to_json()).unwrap(), p);
        assert!(SystemParams::from_json("{}").is_err());
        assert!(SystemParams::from_json("").is_err());
    }

    #[test]
    fn cut_b_without_cross_couplings_is_block_diagonal() {
        let mut p = SystemParams::reference().with_pumps(2.0, 1.0);
        p.v0 = 0.0;
        p.g_c = 0.0;
        let m = build_cut_system(&p, CutTopology::CutB);
        let edges = m.edges();
        assert_eq!(edges.len(), 1);
        assert_eq!((edges[0].0, edges[0].1), (ModeIndex::CMinus, ModeIndex::AMinus));
        assert_eq!(m.coupling(ModeIndex::CPlus, ModeIndex::BPlus), 0.0);
    }

    #[test]
    fn cut_b_reference_couplings() {
        let p = SystemParams::reference().with_pumps(50f64.sqrt(), 0.0);
        let m = build_cut_system(&p, CutTopology::CutB);
        assert_eq!(m.modes(), &[ModeIndex::CPlus, ModeIndex::CMinus, ModeIndex::AMinus, ModeIndex::BPlus]);
        assert_relative_eq!(m.coupling(ModeIndex::CPlus, ModeIndex::BPlus), 0.035355339059327376, max_relative = 1e-15);
        assert_eq!(m.input_rates(), vec![0.1, 0.1, 0.001, 0.05]);
        assert_eq!(m.coupling(ModeIndex::AMinus, ModeIndex::BPlus), 0.02);
    }

    #[test]
    fn cut_c_is_relabelled_cut_b_with_pumps_swapped() {
        let p = SystemParams::reference().with_pumps(3.0, 0.7);
        let b = build_cut_system(&p.mirrored(), CutTopology::CutB);
        let c = build_cut_system(&p, CutTopology::CutC);
        assert_eq!(c.coupling_matrix(), b.coupling_matrix());
        assert_eq!(c.kinds(), b.kinds());
        let relabelled: Vec<_> = b.modes().iter().map(|m| m.reversed()).collect();
        assert_eq!(c.modes(), relabelled.as_slice());
        let nu = Complex64::new(0.97, 0.0);
        assert_eq!(c.coefficient_matrix(nu), b.coefficient_matrix(nu));
    }

    #[test]
    fn full_system_edges() {
        let mut p = SystemParams::reference().with_pumps(2.0, 1.5);
        p.v1 = 0.01;
        let m = build_full_system(&p);
        let edges = m.edges();
        assert_eq!(edges.len(), 8);
        assert_eq!(m.coupling(ModeIndex::APlus, ModeIndex::AMinus), 0.01);
        assert_eq!(m.coupling(ModeIndex::BPlus, ModeIndex::BMinus), 0.01);
        assert_eq!(m.coupling(ModeIndex::CPlus, ModeIndex::AMinus), 0.0);
        assert_eq!(m.coupling(ModeIndex::APlus, ModeIndex::BPlus), 0.0);
        assert_eq!(m.coupling_matrix().transpose(), *m.coupling_matrix());

        let zero = SystemParams { v0: 0.0, v1: 0.0, ..SystemParams::reference() };
        let m = build_full_system(&zero);
        assert!(m.edges().is_empty());
    }

    #[test]
    fn full_system_restricts_to_cut_b() {
        let mut p = SystemParams::reference().with_pumps(2.0, 1.5);
        p.lambda_c = 0.0;
        let full = build_full_system(&p);
        let sub = full
            .restrict(&[ModeIndex::CPlus, ModeIndex::CMinus, ModeIndex::AMinus, ModeIndex::BPlus])
            .unwrap();
        let cut = build_cut_system(&p, CutTopology::CutB);
        assert_eq!(sub, cut);
    }

    #[test]
    fn quasi_mode_diagonal_is_frequency_independent() {
        let p = SystemParams::reference();
        let m = build_cut_system(&p, CutTopology::CutB);
        let b = m.index_of(ModeIndex::BPlus).unwrap();
        for nu in [-3.0, 0.0, 0.9, 1.0, 42.0] {
            let mat = m.coefficient_matrix(Complex64::new(nu, 0.0));
            assert_eq!(mat[(b, b)], Complex64::new(0.025, 0.0));
            assert!(mat.iter().all(|z| z.re.is_finite() && z.im.is_finite()));
        }
        let a = m.index_of(ModeIndex::AMinus).unwrap();
        let mat = m.coefficient_matrix(Complex64::new(1.0, 0.0));
        assert_eq!(mat[(a, a)], Complex64::new(0.0005, 0.0));
    }

    #[test]
    fn construction_errors() {
        let k = DiagKind::QuasiMode { damping: 1.0 };
        assert!(matches!(
            DynamicalMatrix::new([(ModeIndex::BPlus, k), (ModeIndex::BPlus, k)]),
            Err(ModelError::DuplicateMode(ModeIndex::BPlus))
        ));
        let mut m = DynamicalMatrix::new([(ModeIndex::BPlus, k)]).unwrap();
        assert!(m.set_coupling(ModeIndex::BPlus, ModeIndex::BPlus, 1.0).is_err());
        assert!(m.set_coupling(ModeIndex::BPlus, ModeIndex::AMinus, 1.0).is_err());
        assert!(m.effective_hamiltonian().is_err());
    }
}
