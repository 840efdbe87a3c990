//! Averages of two-point correlations over direction pairs with a fixed
//! relative angle.
//!
//! Three averaging modes share one code path and differ only in how the
//! pair of measurement directions is sampled and which projector family the
//! directions select:
//!
//! | mode               | pairs                      | kernel                             | coefficient |
//! |--------------------|----------------------------|------------------------------------|-------------|
//! | `Spin`             | cone pairs on the sphere    | `Tr rho (n1·sigma ⊗ n2·sigma)`     | 1/3         |
//! | `PhotonGeometric`  | planar pairs `ta - tb = phi` | `4 Tr rho (P(ta) ⊗ P(tb))`         | 1/2         |
//! | `PhotonHilbert`    | cone pairs on the sphere    | `4 Tr rho (P_h(na) ⊗ P_h(nb))`     | 1/3         |
//!
//! Monte Carlo estimates are reproducible: a curve point with index `k` draws
//! from a ChaCha8 stream seeded with `seed ^ splitmix64(k)`, so grid points
//! can be evaluated in parallel without changing the output.

use std::f64::consts::{PI, TAU};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::pauli_vector;
use crate::observables::{bloch_projector_mat, dot_sigma_mat, expect_product, linear_polarizer_mat, IDENTITY2};
use crate::states::{DensityMatrix, EnsembleMode, EnsembleSpec, QubitParams, UnitVector3};

pub const MIN_MC_SAMPLES: usize = 1000;
pub const MIN_CURVE_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AveragingMode {
    Spin,
    PhotonGeometric,
    PhotonHilbert,
}

impl AveragingMode {
    pub const ALL: [AveragingMode; 3] = [
        AveragingMode::Spin,
        AveragingMode::PhotonGeometric,
        AveragingMode::PhotonHilbert,
    ];

    /// Harmonic of the averaged separable prediction (in `phi`, or `phi~` for Hilbert mode).
    pub fn harmonic(self) -> u32 {
        match self {
            AveragingMode::PhotonGeometric => 2,
            AveragingMode::Spin | AveragingMode::PhotonHilbert => 1,
        }
    }

    /// Coefficient multiplying `C` in the separable band.
    pub fn coefficient(self) -> f64 {
        match self {
            AveragingMode::PhotonGeometric => 0.5,
            AveragingMode::Spin | AveragingMode::PhotonHilbert => 1.0 / 3.0,
        }
    }

    pub fn expected_constant(self) -> f64 {
        match self {
            AveragingMode::Spin => 0.0,
            AveragingMode::PhotonGeometric | AveragingMode::PhotonHilbert => 1.0,
        }
    }

    /// The `phi` range covering half a period of the mode's harmonic.
    pub fn phi_range(self) -> (f64, f64) {
        (0.0, PI / self.harmonic() as f64)
    }

    pub fn ensemble_mode(self) -> EnsembleMode {
        match self {
            AveragingMode::Spin => EnsembleMode::Spin,
            AveragingMode::PhotonGeometric | AveragingMode::PhotonHilbert => EnsembleMode::Photon,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            AveragingMode::Spin => "spin",
            AveragingMode::PhotonGeometric => "photon-geometric",
            AveragingMode::PhotonHilbert => "photon-hilbert",
        }
    }
}

impl fmt::Display for AveragingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for AveragingMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spin" => Ok(AveragingMode::Spin),
            "photon-geometric" => Ok(AveragingMode::PhotonGeometric),
            "photon-hilbert" => Ok(AveragingMode::PhotonHilbert),
            other => Err(Error::ModeMismatch {
                mode: other.into(),
                other: "spin|photon-geometric|photon-hilbert".into(),
            }),
        }
    }
}

/// Tag carried by a correlation curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMode {
    Spin,
    PhotonGeometric,
    PhotonHilbert,
    External,
}

impl From<AveragingMode> for CurveMode {
    fn from(m: AveragingMode) -> Self {
        match m {
            AveragingMode::Spin => CurveMode::Spin,
            AveragingMode::PhotonGeometric => CurveMode::PhotonGeometric,
            AveragingMode::PhotonHilbert => CurveMode::PhotonHilbert,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DirectionPair {
    Sphere { n1: UnitVector3, n2: UnitVector3, relative: f64 },
    Plane { theta_a: f64, theta_b: f64, relative: f64 },
}

impl DirectionPair {
    /// Cosine of the fixed relative angle.
    pub fn relative(&self) -> f64 {
        match *self {
            DirectionPair::Sphere { relative, .. } | DirectionPair::Plane { relative, .. } => relative,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub phi: f64,
    pub value: f64,
    pub stderr: Option<f64>,
}

/// A sampled function `phi -> value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationCurve {
    points: Vec<CurvePoint>,
    mode: CurveMode,
}

impl CorrelationCurve {
    /// Requires at least 8 points with strictly increasing `phi`.
    pub fn new(points: Vec<CurvePoint>, mode: CurveMode) -> Result<Self> {
        if points.len() < MIN_CURVE_POINTS {
            return Err(Error::InvalidCurve(format!(
                "{} points, need at least {MIN_CURVE_POINTS}",
                points.len()
            )));
        }
        if let Some(w) = points.windows(2).find(|w| w[1].phi.is_nan() || w[1].phi <= w[0].phi) {
            return Err(Error::InvalidCurve(format!(
                "phi not strictly increasing at {} -> {}",
                w[0].phi, w[1].phi
            )));
        }
        if points.iter().any(|p| !p.value.is_finite() || p.stderr.is_some_and(|s| s.is_nan() || s < 0.0)) {
            return Err(Error::InvalidCurve("non-finite value or negative stderr".into()));
        }
        Ok(Self { points, mode })
    }

    /// Evaluate `f` on the grid, without error bars.
    pub fn from_fn(phis: &[f64], mode: CurveMode, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(
            phis.iter()
                .map(|&phi| CurvePoint { phi, value: f(phi), stderr: None })
                .collect(),
            mode,
        )
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn mode(&self) -> CurveMode {
        self.mode
    }

    pub fn span(&self) -> f64 {
        self.points.last().unwrap().phi - self.points[0].phi
    }

    /// Root-mean-square of the point standard errors (0 when none are given).
    pub fn rms_stderr(&self) -> f64 {
        let n = self.points.len() as f64;
        (self.points.iter().map(|p| p.stderr.unwrap_or(0.0).powi(2)).sum::<f64>() / n).sqrt()
    }
}

/// Inclusive, equally spaced grid of `n` points on `[start, end]`.
pub fn phi_grid(start: f64, end: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "grid needs at least two points");
    let step = (end - start) / (n - 1) as f64;
    (0..n)
        .map(|i| if i == n - 1 { end } else { start + step * i as f64 })
        .collect()
}

/// Grid over the half period natural to the averaging mode.
pub fn mode_grid(mode: AveragingMode, n: usize) -> Vec<f64> {
    let (a, b) = mode.phi_range();
    phi_grid(a, b, n)
}

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Seed of the stream used for curve point `index`.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    seed ^ splitmix64(index)
}

pub fn stream(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform direction on the unit sphere: `z` uniform on `[-1, 1]`, azimuth uniform.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R) -> UnitVector3 {
    let z: f64 = 2.0 * rng.random::<f64>() - 1.0;
    let az: f64 = TAU * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    let (s, c) = az.sin_cos();
    UnitVector3::new_unchecked(r * c, r * s, z)
}

/// Orthonormal pair completing `n` to a right-handed frame. The Gram-Schmidt
/// seed is the coordinate axis along which `n` has its smallest component.
pub fn orthonormal_frame(n: &UnitVector3) -> (UnitVector3, UnitVector3) {
    let [x, y, z] = n.to_array();
    let (ax, ay, az) = (x.abs(), y.abs(), z.abs());
    let seed = if ax <= ay && ax <= az {
        [1.0, 0.0, 0.0]
    } else if ay <= az {
        [0.0, 1.0, 0.0]
    } else {
        [0.0, 0.0, 1.0]
    };
    let d = seed[0] * x + seed[1] * y + seed[2] * z;
    let u = [seed[0] - d * x, seed[1] - d * y, seed[2] - d * z];
    let un = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
    let e1 = [u[0] / un, u[1] / un, u[2] / un];
    let e2 = [
        y * e1[2] - z * e1[1],
        z * e1[0] - x * e1[2],
        x * e1[1] - y * e1[0],
    ];
    (
        UnitVector3::new_unchecked(e1[0], e1[1], e1[2]),
        UnitVector3::new_unchecked(e2[0], e2[1], e2[2]),
    )
}

/// `n1` uniform on the sphere, `n2` uniform on the cone `n2·n1 = cos phi`.
pub fn sample_cone_pair<R: Rng + ?Sized>(phi: f64, rng: &mut R) -> DirectionPair {
    let n1 = random_unit_vector(rng);
    let psi: f64 = TAU * rng.random::<f64>();
    let (sp, cp) = phi.sin_cos();
    let (e1, e2) = orthonormal_frame(&n1);
    let (s, c) = psi.sin_cos();
    let n2 = UnitVector3::new_unchecked(
        cp * n1.x() + sp * (c * e1.x() + s * e2.x()),
        cp * n1.y() + sp * (c * e1.y() + s * e2.y()),
        cp * n1.z() + sp * (c * e1.z() + s * e2.z()),
    );
    DirectionPair::Sphere { n1, n2, relative: cp }
}

/// `theta_a` uniform on `[0, 2 pi)` and `theta_b = theta_a - phi`.
pub fn sample_planar_pair<R: Rng + ?Sized>(phi: f64, rng: &mut R) -> DirectionPair {
    let theta_a: f64 = TAU * rng.random::<f64>();
    DirectionPair::Plane {
        theta_a,
        theta_b: theta_a - phi,
        relative: phi.cos(),
    }
}

fn kernel_sample<R: Rng + ?Sized>(rho: &DensityMatrix, mode: AveragingMode, phi: f64, rng: &mut R) -> f64 {
    match mode {
        AveragingMode::Spin => match sample_cone_pair(phi, rng) {
            DirectionPair::Sphere { n1, n2, .. } => {
                expect_product(rho, &dot_sigma_mat(&n1), &dot_sigma_mat(&n2)).re
            }
            DirectionPair::Plane { .. } => unreachable!(),
        },
        AveragingMode::PhotonGeometric => match sample_planar_pair(phi, rng) {
            DirectionPair::Plane { theta_a, theta_b, .. } => {
                4.0 * expect_product(rho, &linear_polarizer_mat(theta_a), &linear_polarizer_mat(theta_b)).re
            }
            DirectionPair::Sphere { .. } => unreachable!(),
        },
        AveragingMode::PhotonHilbert => match sample_cone_pair(phi, rng) {
            DirectionPair::Sphere { n1, n2, .. } => {
                4.0 * expect_product(rho, &bloch_projector_mat(&n1), &bloch_projector_mat(&n2)).re
            }
            DirectionPair::Plane { .. } => unreachable!(),
        },
    }
}

/// Monte Carlo mean of the mode's kernel at fixed relative angle `phi`,
/// drawn from the stream seeded with `seed`.
pub fn mc_average_correlation(
    rho: &DensityMatrix,
    mode: AveragingMode,
    phi: f64,
    n_samples: usize,
    seed: u64,
) -> Result<McEstimate> {
    if n_samples < MIN_MC_SAMPLES {
        return Err(Error::TooFewSamples {
            min: MIN_MC_SAMPLES,
            got: n_samples,
        });
    }
    let mut rng = stream(seed);
    // Welford accumulation
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for k in 0..n_samples {
        let x = kernel_sample(rho, mode, phi, &mut rng);
        let delta = x - mean;
        mean += delta / (k + 1) as f64;
        m2 += delta * (x - mean);
    }
    let var = m2 / (n_samples - 1) as f64;
    Ok(McEstimate {
        mean,
        stderr: (var.max(0.0) / n_samples as f64).sqrt(),
        samples: n_samples,
        seed,
    })
}

/// Monte Carlo curve over `phis`; point `k` uses `point_seed(seed, k)`.
pub fn mc_curve(
    rho: &DensityMatrix,
    mode: AveragingMode,
    phis: &[f64],
    n_samples: usize,
    seed: u64,
) -> Result<CorrelationCurve> {
    let points = phis
        .par_iter()
        .enumerate()
        .map(|(k, &phi)| {
            mc_average_correlation(rho, mode, phi, n_samples, point_seed(seed, k as u64)).map(|e| CurvePoint {
                phi,
                value: e.mean,
                stderr: Some(e.stderr),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    CorrelationCurve::new(points, mode.into())
}

/// Closed-form average for a single product state.
pub fn analytic_average(mode: AveragingMode, left: &QubitParams, right: &QubitParams, phi: f64) -> f64 {
    let s1 = left.bloch_vector();
    let s2 = right.bloch_vector();
    match mode {
        AveragingMode::Spin => s1.dot(&s2) * phi.cos() / 3.0,
        AveragingMode::PhotonHilbert => 1.0 + s1.dot(&s2) * phi.cos() / 3.0,
        AveragingMode::PhotonGeometric => {
            // In photon angles: z = cos t, x = sin t cos p.
            let (z1, x1, z2, x2) = (s1.z(), s1.x(), s2.z(), s2.x());
            let (s2p, c2p) = (2.0 * phi).sin_cos();
            1.0 + 0.5 * (z1 * z2 + x1 * x2) * c2p - 0.5 * (z1 * x2 - z2 * x1) * s2p
        }
    }
}

/// Weighted sum of [`analytic_average`] over an ensemble.
pub fn ensemble_analytic_average(e: &EnsembleSpec, mode: AveragingMode, phi: f64) -> f64 {
    e.entries()
        .iter()
        .map(|en| en.weight * analytic_average(mode, &en.left, &en.right, phi))
        .sum()
}

/// Analytic curve of an ensemble on the given grid.
pub fn ensemble_analytic_curve(e: &EnsembleSpec, mode: AveragingMode, phis: &[f64]) -> Result<CorrelationCurve> {
    CorrelationCurve::from_fn(phis, mode.into(), |phi| ensemble_analytic_average(e, mode, phi))
}

/// Local Bloch vectors and correlation tensor of a two-qubit state:
/// `left[i] = Tr rho (sigma_i ⊗ 1)`, `tensor[i][j] = Tr rho (sigma_i ⊗ sigma_j)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationTensor {
    pub left: [f64; 3],
    pub right: [f64; 3],
    pub tensor: [[f64; 3]; 3],
}

impl CorrelationTensor {
    pub fn of(rho: &DensityMatrix) -> Self {
        let sig = pauli_vector();
        let m: Vec<_> = sig
            .iter()
            .map(|s| [[s[(0, 0)], s[(0, 1)]], [s[(1, 0)], s[(1, 1)]]])
            .collect();
        let mut out = CorrelationTensor {
            left: [0.0; 3],
            right: [0.0; 3],
            tensor: [[0.0; 3]; 3],
        };
        for i in 0..3 {
            out.left[i] = expect_product(rho, &m[i], &IDENTITY2).re;
            out.right[i] = expect_product(rho, &IDENTITY2, &m[i]).re;
            for j in 0..3 {
                out.tensor[i][j] = expect_product(rho, &m[i], &m[j]).re;
            }
        }
        out
    }

    pub fn trace(&self) -> f64 {
        self.tensor[0][0] + self.tensor[1][1] + self.tensor[2][2]
    }

    /// `E(a, b) = a^T T b`.
    pub fn spin_correlation(&self, a: &UnitVector3, b: &UnitVector3) -> f64 {
        let (a, b) = (a.to_array(), b.to_array());
        (0..3).map(|i| (0..3).map(|j| a[i] * self.tensor[i][j] * b[j]).sum::<f64>()).sum()
    }
}

/// Exact average for an arbitrary state, from its correlation tensor.
///
/// Over cone pairs `E[n1 n2^T] = cos(phi) I / 3`, so only `Tr T` survives;
/// over planar pairs only the `x`/`z` block of `T` does.
pub fn exact_average(rho: &DensityMatrix, mode: AveragingMode, phi: f64) -> f64 {
    let t = CorrelationTensor::of(rho);
    match mode {
        AveragingMode::Spin => t.trace() * phi.cos() / 3.0,
        AveragingMode::PhotonHilbert => 1.0 + t.trace() * phi.cos() / 3.0,
        AveragingMode::PhotonGeometric => {
            let tt = &t.tensor;
            let (s2p, c2p) = (2.0 * phi).sin_cos();
            1.0 + 0.5 * (tt[0][0] + tt[2][2]) * c2p + 0.5 * (tt[0][2] - tt[2][0]) * s2p
        }
    }
}

pub fn exact_curve(rho: &DensityMatrix, mode: AveragingMode, phis: &[f64]) -> Result<CorrelationCurve> {
    CorrelationCurve::from_fn(phis, mode.into(), |phi| exact_average(rho, mode, phi))
}

/// The band parameter `C` of a separable ensemble: the weighted pair kernel
/// `s1·s2` (spin, photon-Hilbert) or `v1·v2` with `v = (cos t, sin t cos p)`
/// (photon-geometric).
pub fn ensemble_c(e: &EnsembleSpec, mode: AveragingMode) -> Result<f64> {
    if e.mode() != mode.ensemble_mode() {
        return Err(Error::ModeMismatch {
            mode: mode.to_string(),
            other: format!("{} ensemble", e.mode()),
        });
    }
    Ok(e.entries()
        .iter()
        .map(|en| {
            let (s1, s2) = (en.left.bloch_vector(), en.right.bloch_vector());
            let k = match mode {
                AveragingMode::Spin | AveragingMode::PhotonHilbert => s1.dot(&s2),
                AveragingMode::PhotonGeometric => s1.z() * s2.z() + s1.x() * s2.x(),
            };
            en.weight * k
        })
        .sum())
}

/// Least-squares fit `c0 + A cos(h phi) + B sin(h phi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierFit {
    pub harmonic: u32,
    pub constant: f64,
    pub amplitude: f64,
    /// Coefficient of `sin(h phi)`.
    pub sine: f64,
    pub residual_rms: f64,
    pub constant_stderr: f64,
    pub amplitude_stderr: f64,
    pub sine_stderr: f64,
}

/// Fit the curve to `c0 + A cos(h phi) + B sin(h phi)` by least squares.
///
/// The curve must span at least half a period of `cos(h phi)`. Parameter
/// standard errors propagate the point errors when the curve carries them,
/// otherwise they come from the residual variance.
pub fn fourier_project(curve: &CorrelationCurve, harmonic: u32) -> Result<FourierFit> {
    if harmonic == 0 {
        return Err(Error::InvalidCurve("harmonic must be positive".into()));
    }
    let pts = curve.points();
    let n = pts.len();
    if n < MIN_CURVE_POINTS {
        return Err(Error::InvalidCurve(format!("{n} points, need {MIN_CURVE_POINTS}")));
    }
    let half_period = PI / harmonic as f64;
    if curve.span() < half_period * (1.0 - 1e-9) {
        return Err(Error::InvalidCurve(format!(
            "span {:.6} shorter than half period {:.6}",
            curve.span(),
            half_period
        )));
    }
    let h = harmonic as f64;
    let rows: Vec<[f64; 3]> = pts
        .iter()
        .map(|p| {
            let (s, c) = (h * p.phi).sin_cos();
            [1.0, c, s]
        })
        .collect();
    let mut xtx = [[0.0; 3]; 3];
    let mut xty = [0.0; 3];
    for (r, p) in rows.iter().zip(pts) {
        for i in 0..3 {
            xty[i] += r[i] * p.value;
            for j in 0..3 {
                xtx[i][j] += r[i] * r[j];
            }
        }
    }
    let inv = invert3(&xtx).ok_or(Error::DegenerateFit)?;
    let beta = mat3_vec(&inv, &xty);
    let rss: f64 = rows
        .iter()
        .zip(pts)
        .map(|(r, p)| (p.value - (beta[0] * r[0] + beta[1] * r[1] + beta[2] * r[2])).powi(2))
        .sum();
    let residual_rms = (rss / n as f64).sqrt();

    let has_errors = pts.iter().any(|p| p.stderr.is_some());
    let cov = if has_errors {
        // (X^T X)^-1 X^T diag(sigma^2) X (X^T X)^-1
        let mut meat = [[0.0; 3]; 3];
        for (r, p) in rows.iter().zip(pts) {
            let s2 = p.stderr.unwrap_or(0.0).powi(2);
            for i in 0..3 {
                for j in 0..3 {
                    meat[i][j] += r[i] * r[j] * s2;
                }
            }
        }
        mat3_mul(&mat3_mul(&inv, &meat), &inv)
    } else {
        let s2 = if n > 3 { rss / (n - 3) as f64 } else { 0.0 };
        inv.map(|row| row.map(|x| x * s2))
    };
    let se = |i: usize| cov[i][i].max(0.0).sqrt();
    Ok(FourierFit {
        harmonic,
        constant: beta[0],
        amplitude: beta[1],
        sine: beta[2],
        residual_rms,
        constant_stderr: se(0),
        amplitude_stderr: se(1),
        sine_stderr: se(2),
    })
}

fn invert3(m: &[[f64; 3]; 3]) -> Option<[[f64; 3]; 3]> {
    let c = |r1: usize, c1: usize, r2: usize, c2: usize| m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1];
    let cof = [
        [c(1, 1, 2, 2), -c(1, 0, 2, 2), c(1, 0, 2, 1)],
        [-c(0, 1, 2, 2), c(0, 0, 2, 2), -c(0, 0, 2, 1)],
        [c(0, 1, 1, 2), -c(0, 0, 1, 2), c(0, 0, 1, 1)],
    ];
    let det = m[0][0] * cof[0][0] + m[0][1] * cof[0][1] + m[0][2] * cof[0][2];
    let scale = m.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max);
    if !det.is_finite() || det.abs() <= 1e-12 * scale.powi(3) {
        return None;
    }
    let mut inv = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            inv[i][j] = cof[j][i] / det;
        }
    }
    Some(inv)
}

fn mat3_vec(m: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

fn mat3_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::{named_two_qubit, NamedState};
    use approx::assert_abs_diff_eq;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn cone_pair_degenerate_angles() {
        let mut rng = stream(7);
        for _ in 0..1000 {
            let DirectionPair::Sphere { n1, n2, relative } = sample_cone_pair(0.0, &mut rng) else {
                panic!()
            };
            assert_eq!(n1, n2);
            assert_eq!(relative, 1.0);
            let DirectionPair::Sphere { n1, n2, .. } = sample_cone_pair(PI, &mut rng) else {
                panic!()
            };
            for (a, b) in n1.to_array().iter().zip(n2.to_array()) {
                assert!((a + b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cone_pair_constraint_holds_per_sample() {
        let mut rng = stream(11);
        for k in 0..5000 {
            let phi = 0.001 * k as f64;
            let DirectionPair::Sphere { n1, n2, relative } = sample_cone_pair(phi, &mut rng) else {
                panic!()
            };
            assert!((n1.dot(&n2) - relative).abs() <= 1e-12);
            assert!((n2.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn sphere_sampler_mean_is_zero() {
        let mut rng = stream(2024);
        let n = 1_000_000;
        let mut sum = [0.0; 3];
        let mut sum2 = [0.0; 3];
        for _ in 0..n {
            let DirectionPair::Sphere { n1, .. } = sample_cone_pair(0.5, &mut rng) else { panic!() };
            for (i, c) in n1.to_array().into_iter().enumerate() {
                sum[i] += c;
                sum2[i] += c * c;
            }
        }
        for i in 0..3 {
            let mean = sum[i] / n as f64;
            let var = sum2[i] / n as f64 - mean * mean;
            let se = (var / n as f64).sqrt();
            assert!(mean.abs() <= 4.0 * se, "component {i}: mean {mean}, se {se}");
        }
    }

    #[test]
    fn planar_pairs() {
        let mut rng = stream(3);
        let n = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for k in 0..n {
            let phi = if k % 2 == 0 { 0.0 } else { 0.77 };
            let DirectionPair::Plane { theta_a, theta_b, .. } = sample_planar_pair(phi, &mut rng) else {
                panic!()
            };
            assert!((0.0..TAU).contains(&theta_a));
            assert_eq!(theta_a - theta_b, theta_a - (theta_a - phi));
            if phi == 0.0 {
                assert_eq!(theta_a, theta_b);
            }
            let c = (2.0 * theta_a).cos();
            s += c;
            s2 += c * c;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!(mean.abs() <= 4.0 * se);
    }

    #[test]
    fn frame_is_orthonormal() {
        let mut rng = stream(5);
        for _ in 0..1000 {
            let n = random_unit_vector(&mut rng);
            let (e1, e2) = orthonormal_frame(&n);
            assert!(e1.dot(&n).abs() < 1e-14 && e2.dot(&n).abs() < 1e-14 && e1.dot(&e2).abs() < 1e-14);
            assert!((e1.norm() - 1.0).abs() < 1e-14 && (e2.norm() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn singlet_spin_kernel_is_constant() {
        let rho = named_two_qubit(NamedState::Singlet);
        for phi in [0.0, 0.4, 1.3, 2.9] {
            let est = mc_average_correlation(&rho, AveragingMode::Spin, phi, 2000, 1).unwrap();
            assert_abs_diff_eq!(est.mean, -phi.cos(), epsilon = 1e-12);
            assert!(est.stderr <= 1e-12);
        }
    }

    #[test]
    fn scalar_geometric_kernel_is_constant() {
        let rho = named_two_qubit(NamedState::Scalar);
        for phi in [0.0, 0.3, 1.1] {
            let est = mc_average_correlation(&rho, AveragingMode::PhotonGeometric, phi, 2000, 9).unwrap();
            assert_abs_diff_eq!(est.mean, 1.0 + (2.0 * phi).cos(), epsilon = 1e-12);
            assert!(est.stderr <= 1e-12);
        }
    }

    #[test]
    fn product_state_spin_average_is_one_third() {
        let up = QubitParams::Spin(UnitVector3::Z);
        let rho = crate::states::ensemble_density(&EnsembleSpec::product(up, up).unwrap()).unwrap();
        let est = mc_average_correlation(&rho, AveragingMode::Spin, 0.0, 1_000_000, 42).unwrap();
        assert!((est.mean - 1.0 / 3.0).abs() <= 4.0 * est.stderr, "{est:?}");
    }

    #[test]
    fn too_few_samples() {
        let rho = DensityMatrix::maximally_mixed();
        assert!(matches!(
            mc_average_correlation(&rho, AveragingMode::Spin, 0.0, 999, 0),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn mc_is_deterministic() {
        let rho = crate::states::werner_state(crate::states::WernerParams::new(0.4, NamedState::Scalar).unwrap()).unwrap();
        for mode in AveragingMode::ALL {
            let a = mc_average_correlation(&rho, mode, 0.6, 5000, 99).unwrap();
            let b = mc_average_correlation(&rho, mode, 0.6, 5000, 99).unwrap();
            assert_eq!(a.mean.to_bits(), b.mean.to_bits());
            assert_eq!(a.stderr.to_bits(), b.stderr.to_bits());
        }
    }

    #[test]
    fn analytic_examples() {
        let s = QubitParams::Spin(UnitVector3::normalized(0.2, 0.4, -0.1).unwrap());
        for phi in [0.0, 0.5, 2.0] {
            assert_abs_diff_eq!(analytic_average(AveragingMode::Spin, &s, &s, phi), phi.cos() / 3.0, epsilon = 1e-15);
            let h = QubitParams::Photon { theta: 0.0, phi: 0.0 };
            assert_abs_diff_eq!(
                analytic_average(AveragingMode::PhotonGeometric, &h, &h, phi),
                1.0 + 0.5 * (2.0 * phi).cos(),
                epsilon = 1e-15
            );
        }
        let a = QubitParams::Spin(UnitVector3::X);
        let b = QubitParams::Spin(-UnitVector3::X);
        assert_abs_diff_eq!(analytic_average(AveragingMode::PhotonHilbert, &a, &b, 0.0), 2.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn exact_average_agrees_with_analytic_on_products() {
        let l = QubitParams::Photon { theta: 0.7, phi: 1.9 };
        let r = QubitParams::Photon { theta: 2.1, phi: -0.6 };
        let rho = crate::states::ensemble_density(&EnsembleSpec::product(l, r).unwrap()).unwrap();
        for mode in AveragingMode::ALL {
            for phi in [0.0, 0.4, 1.0, 2.5] {
                assert_abs_diff_eq!(exact_average(&rho, mode, phi), analytic_average(mode, &l, &r, phi), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn ensemble_c_examples() {
        let up = QubitParams::Spin(UnitVector3::Z);
        let down = QubitParams::Spin(-UnitVector3::Z);
        let single = EnsembleSpec::product(up, up).unwrap();
        assert_abs_diff_eq!(ensemble_c(&single, AveragingMode::Spin).unwrap(), 1.0);
        let mix = EnsembleSpec::new(
            EnsembleMode::Spin,
            vec![
                crate::states::EnsembleEntry { weight: 0.5, left: up, right: up },
                crate::states::EnsembleEntry { weight: 0.5, left: up, right: down },
            ],
        )
        .unwrap();
        assert_abs_diff_eq!(ensemble_c(&mix, AveragingMode::Spin).unwrap(), 0.0);
        assert!(matches!(
            ensemble_c(&mix, AveragingMode::PhotonGeometric),
            Err(Error::ModeMismatch { .. })
        ));
    }

    #[test]
    fn fourier_examples() {
        let grid = phi_grid(0.0, FRAC_PI_2, 64);
        let aspect = CorrelationCurve::from_fn(&grid, CurveMode::External, |p| 0.996 + 0.88 * (2.0 * p).cos()).unwrap();
        let fit = fourier_project(&aspect, 2).unwrap();
        assert_abs_diff_eq!(fit.constant, 0.996, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.amplitude, 0.88, epsilon = 1e-12);
        assert!(fit.residual_rms < 1e-12);

        let grid = phi_grid(0.0, PI, 64);
        let sakai = CorrelationCurve::from_fn(&grid, CurveMode::External, |p| -p.cos()).unwrap();
        let fit = fourier_project(&sakai, 1).unwrap();
        assert_abs_diff_eq!(fit.constant, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.amplitude, -1.0, epsilon = 1e-12);
        assert!(fit.residual_rms < 1e-12);

        // Full period of cos(phi), sampled without the duplicated endpoint.
        let grid: Vec<f64> = (0..64).map(|k| TAU * k as f64 / 64.0).collect();
        let c1 = CorrelationCurve::from_fn(&grid, CurveMode::External, f64::cos).unwrap();
        let fit = fourier_project(&c1, 2).unwrap();
        let rms = (grid.iter().map(|p| p.cos().powi(2)).sum::<f64>() / 64.0).sqrt();
        assert_abs_diff_eq!(fit.amplitude, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.residual_rms, rms, epsilon = 1e-12);
    }

    #[test]
    fn fourier_rejects_short_curves() {
        let grid = phi_grid(0.0, 1.0, 16);
        let c = CorrelationCurve::from_fn(&grid, CurveMode::External, f64::cos).unwrap();
        assert!(matches!(fourier_project(&c, 1), Err(Error::InvalidCurve(_))));
        let few = phi_grid(0.0, PI, 7);
        assert!(CorrelationCurve::from_fn(&few, CurveMode::External, f64::cos).is_err());
        let pts = vec![CurvePoint { phi: 0.0, value: 0.0, stderr: None }; 8];
        assert!(CorrelationCurve::new(pts, CurveMode::External).is_err());
    }
}
