//! Qubit and two-qubit states.
//!
//! Basis convention: `|+> = |H> = (1, 0)`, `|-> = |V> = (0, 1)`, and
//! two-qubit operators are indexed `left ⊗ right` in row-major order.
//! Bloch vectors are stored in the standard `(sigma^1, sigma^2, sigma^3)`
//! component order.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, kron, ComplexMatrix, HERMITIAN_TOL, ONE, ZERO};

pub const UNIT_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = 1e-10;
pub const WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitVector3 {
    x: f64,
    y: f64,
    z: f64,
}

impl UnitVector3 {
    pub const X: Self = Self { x: 1.0, y: 0.0, z: 0.0 };
    pub const Y: Self = Self { x: 0.0, y: 1.0, z: 0.0 };
    pub const Z: Self = Self { x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitVector { norm });
        }
        Ok(Self { x, y, z })
    }

    /// Rescale an arbitrary nonzero vector to unit length.
    pub fn normalized(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::NonUnitVector { norm });
        }
        Ok(Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// `(sin t cos p, sin t sin p, cos t)` for polar angle `t`, azimuth `p`.
    pub fn from_spherical(polar: f64, azimuth: f64) -> Self {
        let (st, ct) = polar.sin_cos();
        let (sp, cp) = azimuth.sin_cos();
        Self {
            x: st * cp,
            y: st * sp,
            z: ct,
        }
    }

    /// Construct without the norm check. Callers guarantee unit length up to rounding.
    pub(crate) fn new_unchecked(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    pub fn to_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    /// `a · sigma` as a 2x2 matrix.
    pub fn dot_sigma(&self) -> ComplexMatrix {
        ComplexMatrix::from_rows([
            [Complex64::new(self.z, 0.0), Complex64::new(self.x, -self.y)],
            [Complex64::new(self.x, self.y), Complex64::new(-self.z, 0.0)],
        ])
    }
}

impl std::ops::Neg for UnitVector3 {
    type Output = Self;

    fn neg(self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

/// Normalized single-qubit state vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    amplitudes: [Complex64; 2],
}

impl QubitState {
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self> {
        let norm = (a0.norm_sqr() + a1.norm_sqr()).sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitVector { norm });
        }
        Ok(Self { amplitudes: [a0, a1] })
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        self.amplitudes
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes)
    }

    /// Bloch vector `s` with `|psi><psi| = (1 + s·sigma)/2`.
    pub fn bloch_vector(&self) -> UnitVector3 {
        let [a0, a1] = self.amplitudes;
        let off = a0 * a1.conj();
        UnitVector3::new_unchecked(2.0 * off.re, -2.0 * off.im, a0.norm_sqr() - a1.norm_sqr())
    }
}

/// Qubit state whose projector is `(1 + s·sigma)/2`, phase fixed so the
/// first nonzero amplitude is real and non-negative.
pub fn bloch_qubit(s: UnitVector3) -> Result<QubitState> {
    let s = UnitVector3::new(s.x, s.y, s.z)?;
    let upper = Complex64::new(s.x, -s.y) * 0.5; // a0 * conj(a1)
    let (a0, a1) = if s.z >= 0.0 {
        let a0 = ((1.0 + s.z) / 2.0).sqrt();
        (Complex64::new(a0, 0.0), (upper / a0).conj())
    } else {
        let m1 = ((1.0 - s.z) / 2.0).sqrt();
        let a0 = upper / m1;
        // rotate the global phase onto a0
        let r = a0.norm();
        if r == 0.0 {
            (ZERO, Complex64::new(m1, 0.0))
        } else {
            let phase = a0.conj() / r;
            (Complex64::new(r, 0.0), Complex64::new(m1, 0.0) * phase)
        }
    };
    Ok(QubitState { amplitudes: [a0, a1] })
}

/// Single-photon polarization wavefunction `cos(alpha) e^{-i gamma} u_+ + sin(alpha) u_-`.
pub fn photon_qubit(alpha: f64, gamma: f64) -> QubitState {
    let (s, c) = alpha.sin_cos();
    QubitState {
        amplitudes: [Complex64::from_polar(c, -gamma), Complex64::new(s, 0.0)],
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NamedState {
    /// `(|+->-|-+>)/sqrt2` for two spins.
    Singlet,
    /// `(|HH>+|VV>)/sqrt2` for two photons.
    Scalar,
    /// `(|HV>-|VH>)/sqrt2` for two photons; same vector as the singlet.
    Pseudoscalar,
}

impl NamedState {
    pub fn vector(self) -> [Complex64; 4] {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match self {
            NamedState::Singlet | NamedState::Pseudoscalar => [ZERO, h, -h, ZERO],
            NamedState::Scalar => [h, ZERO, ZERO, h],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedState::Singlet => "singlet",
            NamedState::Scalar => "scalar",
            NamedState::Pseudoscalar => "pseudoscalar",
        }
    }
}

impl fmt::Display for NamedState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Validated two-qubit density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if matrix.rows() != 4 || matrix.cols() != 4 {
            return Err(Error::Dimension(format!(
                "density matrix must be 4x4, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let dev = matrix.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidDensity(format!(
                "not Hermitian (deviation {dev:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} differs from 1")));
        }
        let min = linalg::hermitian_eigenvalues(&matrix)?.min();
        if min < -PSD_TOL {
            return Err(Error::InvalidDensity(format!(
                "not positive semidefinite (minimum eigenvalue {min:e})"
            )));
        }
        Ok(Self { matrix })
    }

    pub fn from_pure(psi: &[Complex64; 4]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NonUnitVector { norm });
        }
        Ok(Self {
            matrix: ComplexMatrix::outer(psi),
        })
    }

    pub fn product(left: &QubitState, right: &QubitState) -> Self {
        Self {
            matrix: kron(&left.projector(), &right.projector()),
        }
    }

    pub fn maximally_mixed() -> Self {
        Self {
            matrix: ComplexMatrix::identity(4).scale_real(0.25),
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    /// Entry `(row, col)` of the underlying matrix.
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.matrix[(row, col)]
    }
}

pub fn named_two_qubit(kind: NamedState) -> DensityMatrix {
    DensityMatrix {
        matrix: ComplexMatrix::outer(&kind.vector()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WernerParams {
    pub beta: f64,
    pub base: NamedState,
}

impl WernerParams {
    pub fn new(beta: f64, base: NamedState) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::BetaOutOfRange(beta));
        }
        Ok(Self { beta, base })
    }

    pub fn singlet(beta: f64) -> Result<Self> {
        Self::new(beta, NamedState::Singlet)
    }
}

/// `(1 - beta)/4 · 1 + beta |psi><psi|` for the chosen base state.
pub fn werner_state(p: WernerParams) -> Result<DensityMatrix> {
    let p = WernerParams::new(p.beta, p.base)?;
    let mixed = ComplexMatrix::identity(4).scale_real((1.0 - p.beta) / 4.0);
    let pure = named_two_qubit(p.base).matrix.scale_real(p.beta);
    Ok(DensityMatrix {
        matrix: &mixed + &pure,
    })
}

/// Parameters of one side of a product state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QubitParams {
    /// Bloch vector of a spin-1/2 state.
    Spin(UnitVector3),
    /// Photon state `|theta/2, phi>`, i.e. `cos(theta/2) e^{-i phi} |H> + sin(theta/2) |V>`.
    Photon { theta: f64, phi: f64 },
}

impl QubitParams {
    pub fn qubit(&self) -> Result<QubitState> {
        match *self {
            QubitParams::Spin(s) => bloch_qubit(s),
            QubitParams::Photon { theta, phi } => Ok(photon_qubit(theta / 2.0, phi)),
        }
    }

    /// Bloch vector in standard component order. For photon parameters this
    /// is `(sin t cos p, sin t sin p, cos t)`.
    pub fn bloch_vector(&self) -> UnitVector3 {
        match *self {
            QubitParams::Spin(s) => s,
            QubitParams::Photon { theta, phi } => UnitVector3::from_spherical(theta, phi),
        }
    }

    pub fn mode(&self) -> EnsembleMode {
        match self {
            QubitParams::Spin(_) => EnsembleMode::Spin,
            QubitParams::Photon { .. } => EnsembleMode::Photon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleMode {
    Spin,
    Photon,
}

impl fmt::Display for EnsembleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EnsembleMode::Spin => "spin",
            EnsembleMode::Photon => "photon",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleEntry {
    pub weight: f64,
    pub left: QubitParams,
    pub right: QubitParams,
}

/// A finite separable mixture `sum_k w_k |l_k><l_k| ⊗ |r_k><r_k|`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSpec {
    mode: EnsembleMode,
    entries: Vec<EnsembleEntry>,
}

impl EnsembleSpec {
    pub fn new(mode: EnsembleMode, entries: Vec<EnsembleEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::UnnormalizedWeights { deficit: 1.0 });
        }
        for e in &entries {
            if e.weight < 0.0 || !e.weight.is_finite() {
                return Err(Error::NegativeWeight(e.weight));
            }
            for side in [&e.left, &e.right] {
                if side.mode() != mode {
                    return Err(Error::ModeMismatch {
                        mode: mode.to_string(),
                        other: format!("{} entry", side.mode()),
                    });
                }
                if let QubitParams::Spin(s) = side {
                    UnitVector3::new(s.x, s.y, s.z)?;
                }
            }
        }
        let deficit = 1.0 - entries.iter().map(|e| e.weight).sum::<f64>();
        if deficit.abs() > WEIGHT_TOL {
            return Err(Error::UnnormalizedWeights { deficit });
        }
        Ok(Self { mode, entries })
    }

    /// A single product state as a one-entry ensemble.
    pub fn product(left: QubitParams, right: QubitParams) -> Result<Self> {
        Self::new(left.mode(), vec![EnsembleEntry { weight: 1.0, left, right }])
    }

    pub fn mode(&self) -> EnsembleMode {
        self.mode
    }

    pub fn entries(&self) -> &[EnsembleEntry] {
        &self.entries
    }

    /// Swap the roles of the two parties in every entry.
    pub fn swapped(&self) -> Self {
        Self {
            mode: self.mode,
            entries: self
                .entries
                .iter()
                .map(|e| EnsembleEntry {
                    weight: e.weight,
                    left: e.right,
                    right: e.left,
                })
                .collect(),
        }
    }
}

pub fn ensemble_density(e: &EnsembleSpec) -> Result<DensityMatrix> {
    let mut acc = ComplexMatrix::zeros(4, 4);
    for entry in &e.entries {
        let prod = DensityMatrix::product(&entry.left.qubit()?, &entry.right.qubit()?);
        acc = &acc + &prod.matrix.scale_real(entry.weight);
    }
    // Hermitian by construction; remove rounding asymmetry.
    let acc = acc.hermitian_part();
    debug_assert!((acc.trace() - ONE).norm() <= 1e-12);
    Ok(DensityMatrix { matrix: acc })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, pauli_vector, trace_product};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn close(a: Complex64, b: Complex64) -> bool {
        (a - b).norm() <= 1e-12
    }

    #[test]
    fn bloch_qubit_axis_states() {
        let up = bloch_qubit(UnitVector3::Z).unwrap().amplitudes();
        assert!(close(up[0], ONE) && close(up[1], ZERO));
        let plus = bloch_qubit(UnitVector3::X).unwrap().amplitudes();
        assert!(close(plus[0], Complex64::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(plus[1], Complex64::new(FRAC_1_SQRT_2, 0.0)));
        let down = bloch_qubit(-UnitVector3::Z).unwrap().amplitudes();
        assert_eq!(down[0], ZERO);
        assert!(close(down[1], ONE));
    }

    #[test]
    fn bloch_qubit_phase_convention() {
        for s in [
            UnitVector3::normalized(0.3, -0.4, -0.8).unwrap(),
            UnitVector3::normalized(-0.1, 0.9, 0.2).unwrap(),
        ] {
            let a = bloch_qubit(s).unwrap().amplitudes();
            assert_eq!(a[0].im, 0.0);
            assert!(a[0].re >= 0.0);
        }
    }

    #[test]
    fn bloch_qubit_rejects_non_unit() {
        assert!(matches!(
            bloch_qubit(UnitVector3::new_unchecked(1.0, 1.0, 0.0)),
            Err(Error::NonUnitVector { .. })
        ));
    }

    #[test]
    fn photon_qubit_examples() {
        let h = photon_qubit(0.0, 0.0).amplitudes();
        assert!(close(h[0], ONE) && close(h[1], ZERO));
        let v = photon_qubit(FRAC_PI_2, 1.234).amplitudes();
        assert!(v[0].norm() < 1e-15 && close(v[1], ONE));
        let d = photon_qubit(FRAC_PI_4, 0.0).amplitudes();
        assert!(close(d[0], Complex64::new(FRAC_1_SQRT_2, 0.0)));
        assert!(close(d[1], Complex64::new(FRAC_1_SQRT_2, 0.0)));
    }

    #[test]
    fn scalar_state_entries() {
        let rho = named_two_qubit(NamedState::Scalar);
        for i in 0..4 {
            for j in 0..4 {
                let want = if [0, 3].contains(&i) && [0, 3].contains(&j) { 0.5 } else { 0.0 };
                assert_abs_diff_eq!(rho.entry(i, j).re, want, epsilon = 1e-15);
                assert_eq!(rho.entry(i, j).im, 0.0);
            }
        }
    }

    #[test]
    fn singlet_is_pure() {
        let spec = hermitian_eigenvalues(named_two_qubit(NamedState::Singlet).matrix()).unwrap();
        for (g, w) in spec.eigenvalues.iter().zip([1.0, 0.0, 0.0, 0.0]) {
            assert_abs_diff_eq!(*g, w, epsilon = 1e-12);
        }
    }

    #[test]
    fn pseudoscalar_xx_plus_zz() {
        let rho = named_two_qubit(NamedState::Pseudoscalar);
        let [sx, _, sz] = pauli_vector();
        let op = &kron(&sx, &sx) + &kron(&sz, &sz);
        assert_abs_diff_eq!(trace_product(rho.matrix(), &op).unwrap().re, -2.0, epsilon = 1e-12);
    }

    #[test]
    fn werner_examples() {
        let w = werner_state(WernerParams::singlet(0.5).unwrap()).unwrap();
        for (i, d) in [0.125, 0.375, 0.375, 0.125].into_iter().enumerate() {
            assert_abs_diff_eq!(w.entry(i, i).re, d, epsilon = 1e-15);
        }
        let w0 = werner_state(WernerParams::singlet(0.0).unwrap()).unwrap();
        assert_eq!(w0, DensityMatrix::maximally_mixed());
        let w1 = werner_state(WernerParams::new(1.0, NamedState::Scalar).unwrap()).unwrap();
        assert!(w1.matrix().max_abs_diff(named_two_qubit(NamedState::Scalar).matrix()) < 1e-15);
        assert!(DensityMatrix::new(w.into_matrix()).is_ok());
    }

    #[test]
    fn werner_beta_out_of_range() {
        assert!(matches!(WernerParams::singlet(1.5), Err(Error::BetaOutOfRange(_))));
        let bad = WernerParams { beta: -0.1, base: NamedState::Singlet };
        assert!(werner_state(bad).is_err());
    }

    #[test]
    fn ensemble_examples() {
        let up = QubitParams::Spin(UnitVector3::Z);
        let down = QubitParams::Spin(-UnitVector3::Z);
        let one = EnsembleSpec::product(up, up).unwrap();
        assert_eq!(
            ensemble_density(&one).unwrap().into_matrix(),
            ComplexMatrix::from_real_diagonal(&[1.0, 0.0, 0.0, 0.0])
        );
        let two = EnsembleSpec::new(
            EnsembleMode::Spin,
            vec![
                EnsembleEntry { weight: 0.5, left: up, right: up },
                EnsembleEntry { weight: 0.5, left: down, right: down },
            ],
        )
        .unwrap();
        assert!(ensemble_density(&two)
            .unwrap()
            .matrix()
            .max_abs_diff(&ComplexMatrix::from_real_diagonal(&[0.5, 0.0, 0.0, 0.5]))
            < 1e-15);
    }

    #[test]
    fn ensemble_rejects_bad_weights_and_modes() {
        let up = QubitParams::Spin(UnitVector3::Z);
        let err = EnsembleSpec::new(
            EnsembleMode::Spin,
            vec![EnsembleEntry { weight: 0.7, left: up, right: up }],
        )
        .unwrap_err();
        match err {
            Error::UnnormalizedWeights { deficit } => assert_abs_diff_eq!(deficit, 0.3, epsilon = 1e-15),
            other => panic!("unexpected {other:?}"),
        }
        let photon = QubitParams::Photon { theta: 0.0, phi: 0.0 };
        assert!(matches!(
            EnsembleSpec::new(
                EnsembleMode::Spin,
                vec![EnsembleEntry { weight: 1.0, left: up, right: photon }]
            ),
            Err(Error::ModeMismatch { .. })
        ));
        assert!(matches!(
            EnsembleSpec::new(
                EnsembleMode::Spin,
                vec![
                    EnsembleEntry { weight: 1.5, left: up, right: up },
                    EnsembleEntry { weight: -0.5, left: up, right: up }
                ]
            ),
            Err(Error::NegativeWeight(_))
        ));
    }

    #[test]
    fn density_matrix_validation() {
        let mut m = ComplexMatrix::from_real_diagonal(&[1.2, -0.2, 0.0, 0.0]);
        assert!(matches!(DensityMatrix::new(m.clone()), Err(Error::InvalidDensity(_))));
        m[(0, 0)] = Complex64::new(0.5, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }
}
