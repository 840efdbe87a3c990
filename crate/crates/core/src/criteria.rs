//! Separability verdicts.
//!
//! Only [`ppt_check`] decides separability outright (in dimension 2x2). The
//! averaged-band and diagonal-sum criteria are necessary conditions, so a
//! non-violating outcome is reported as `ConsistentWithSeparable`.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::averaging::{
    exact_curve, fourier_project, mode_grid, point_seed, random_unit_vector, stream, AveragingMode,
    CorrelationCurve, CorrelationTensor, CurveMode, FourierFit,
};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, kron, partial_transpose_second, pauli_vector, trace_product};
use crate::observables::{g_quantity, spin_projector};
use crate::states::{werner_state, DensityMatrix, NamedState, UnitVector3, WernerParams};

pub const PURITY_TOL: f64 = 1e-6;
pub const G_TOL: f64 = 1e-6;
pub const PPT_TOL: f64 = 1e-10;
pub const DIAGONAL_SUM_TOL: f64 = 1e-10;
pub const CHSH_TOL: f64 = 1e-10;
pub const CHSH_LOCAL_BOUND: f64 = 2.0;
pub const TSIRELSON_BOUND: f64 = 2.0 * SQRT_2;
pub const DEFAULT_CHSH_RESTARTS: usize = 16;

const AMP_TOL_FLOOR: f64 = 0.01;
const CONST_TOL_FLOOR: f64 = 0.02;
const RESIDUAL_TOL_FLOOR: f64 = 0.02;
const SIGMA_MULTIPLIER: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Inseparable,
    ConsistentWithSeparable,
    ModelMismatch,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Inseparable => "INSEPARABLE",
            Status::ConsistentWithSeparable => "CONSISTENT_WITH_SEPARABLE",
            Status::ModelMismatch => "MODEL_MISMATCH",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub status: Status,
    pub criterion: String,
    pub statistic: f64,
    pub bound: f64,
    /// `statistic - bound`, positive when the bound is violated.
    pub margin: f64,
    pub details: BTreeMap<String, Value>,
}

impl Verdict {
    fn new(status: Status, criterion: &str, statistic: f64, bound: f64, margin: f64) -> Self {
        Self {
            status,
            criterion: criterion.to_string(),
            statistic,
            bound,
            margin,
            details: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    pub fn is_inseparable(&self) -> bool {
        self.status == Status::Inseparable
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: {} (statistic {:.6}, bound {:.6}, margin {:+.6})",
            self.criterion, self.status, self.statistic, self.bound, self.margin
        )
    }
}

/// Pure-state test: the maximum of `|G(a, b)|` over random projector pairs.
pub fn pure_state_check(rho: &DensityMatrix, n_directions: usize, seed: u64) -> Result<Verdict> {
    let largest = hermitian_eigenvalues(rho.matrix())?.max();
    if largest < 1.0 - PURITY_TOL {
        return Err(Error::NotPure { largest });
    }
    let mut rng = stream(seed);
    let mut max_g = 0.0f64;
    for _ in 0..n_directions.max(1) {
        let a = spin_projector(random_unit_vector(&mut rng))?;
        let b = spin_projector(random_unit_vector(&mut rng))?;
        max_g = max_g.max(g_quantity(rho, &a, &b)?.abs());
    }
    let status = if max_g > G_TOL {
        Status::Inseparable
    } else {
        Status::ConsistentWithSeparable
    };
    Ok(Verdict::new(status, "pure-state-g", max_g, 0.0, max_g)
        .with("directions", n_directions)
        .with("largest_eigenvalue", largest)
        .with("tolerance", G_TOL))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandCheckReport {
    pub mode: AveragingMode,
    pub constant: f64,
    pub amplitude: f64,
    /// `sin` coefficient absorbed by the fit; zero for 1<->2 symmetric mixtures.
    pub sine: f64,
    pub residual_rms: f64,
    pub c_bound: f64,
    pub fit: FourierFit,
    pub verdict: Verdict,
}

/// Compare a correlation curve with the separable band
/// `c0 + coefficient · C · cos(h phi)`, `|C| <= 1`.
pub fn band_check(curve: &CorrelationCurve, mode: AveragingMode) -> Result<BandCheckReport> {
    if curve.mode() != CurveMode::External && curve.mode() != CurveMode::from(mode) {
        return Err(Error::ModeMismatch {
            mode: mode.to_string(),
            other: format!("{:?} curve", curve.mode()),
        });
    }
    let fit = fourier_project(curve, mode.harmonic())?;
    let c_bound = mode.coefficient();
    let expected_constant = mode.expected_constant();

    let tol_const = CONST_TOL_FLOOR.max(SIGMA_MULTIPLIER * fit.constant_stderr);
    let tol_res = RESIDUAL_TOL_FLOOR.max(SIGMA_MULTIPLIER * curve.rms_stderr());
    let tol_amp = AMP_TOL_FLOOR.max(SIGMA_MULTIPLIER * fit.amplitude_stderr);

    let statistic = fit.amplitude.abs();
    let margin = statistic - c_bound;
    let status = if (fit.constant - expected_constant).abs() > tol_const || fit.residual_rms >= tol_res {
        Status::ModelMismatch
    } else if statistic > c_bound + tol_amp {
        Status::Inseparable
    } else {
        Status::ConsistentWithSeparable
    };
    let verdict = Verdict::new(status, &format!("band-{mode}"), statistic, c_bound, margin)
        .with("constant", fit.constant)
        .with("expected_constant", expected_constant)
        .with("amplitude", fit.amplitude)
        .with("sine", fit.sine)
        .with("residual_rms", fit.residual_rms)
        .with("tol_constant", tol_const)
        .with("tol_residual", tol_res)
        .with("tol_amplitude", tol_amp)
        .with("harmonic", mode.harmonic());
    Ok(BandCheckReport {
        mode,
        constant: fit.constant,
        amplitude: fit.amplitude,
        sine: fit.sine,
        residual_rms: fit.residual_rms,
        c_bound,
        fit,
        verdict,
    })
}

/// Peres test: negative eigenvalues of the partial transpose.
pub fn ppt_check(rho: &DensityMatrix) -> Result<Verdict> {
    let pt = partial_transpose_second(rho.matrix())?;
    let spec = hermitian_eigenvalues(&pt)?;
    let min = spec.min();
    let statistic = -min;
    let inseparable = statistic > PPT_TOL;
    let status = if inseparable {
        Status::Inseparable
    } else {
        Status::ConsistentWithSeparable
    };
    Ok(Verdict::new(status, "ppt", statistic, 0.0, statistic)
        .with("min_eigenvalue", min)
        .with("eigenvalues", spec.eigenvalues.clone())
        .with("separable", !inseparable))
}

fn diagonal_sum(rho: &DensityMatrix, axes: &[usize], name: &str) -> Result<Verdict> {
    let sig = pauli_vector();
    let mut terms = Vec::with_capacity(axes.len());
    for &i in axes {
        terms.push(trace_product(rho.matrix(), &kron(&sig[i], &sig[i]))?.re);
    }
    let statistic: f64 = terms.iter().sum();
    let status = if statistic.abs() > 1.0 + DIAGONAL_SUM_TOL {
        Status::Inseparable
    } else {
        Status::ConsistentWithSeparable
    };
    Ok(Verdict::new(status, name, statistic, 1.0, statistic.abs() - 1.0).with("terms", terms))
}

/// `<s1 s1> + <s2 s2> + <s3 s3>`; separable states lie in `[-1, 1]`.
pub fn diagonal_sum_spin(rho: &DensityMatrix) -> Result<Verdict> {
    diagonal_sum(rho, &[0, 1, 2], "diagonal-sum-spin")
}

/// `<s1 s1> + <s3 s3>`; separable photon states lie in `[-1, 1]`.
pub fn diagonal_sum_photon(rho: &DensityMatrix) -> Result<Verdict> {
    diagonal_sum(rho, &[0, 2], "diagonal-sum-photon")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChshSettings {
    pub a: UnitVector3,
    pub a_prime: UnitVector3,
    pub b: UnitVector3,
    pub b_prime: UnitVector3,
}

fn checked(v: UnitVector3) -> Result<UnitVector3> {
    UnitVector3::new(v.x(), v.y(), v.z())
}

/// `S = E(a,b) + E(a,b') + E(a',b) - E(a',b')` with `E` the spin correlation.
pub fn chsh_value(
    rho: &DensityMatrix,
    a: UnitVector3,
    a_prime: UnitVector3,
    b: UnitVector3,
    b_prime: UnitVector3,
) -> Result<f64> {
    let (a, a_prime, b, b_prime) = (checked(a)?, checked(a_prime)?, checked(b)?, checked(b_prime)?);
    let t = CorrelationTensor::of(rho);
    let s = chsh_from_tensor(&t, &ChshSettings { a, a_prime, b, b_prime });
    debug_assert!(s.abs() <= TSIRELSON_BOUND + 1e-9, "Tsirelson bound exceeded: {s}");
    Ok(s)
}

fn chsh_from_tensor(t: &CorrelationTensor, s: &ChshSettings) -> f64 {
    t.spin_correlation(&s.a, &s.b) + t.spin_correlation(&s.a, &s.b_prime) + t.spin_correlation(&s.a_prime, &s.b)
        - t.spin_correlation(&s.a_prime, &s.b_prime)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChshOptimum {
    pub settings: ChshSettings,
    /// Best `|S|` found.
    pub s: f64,
    pub restarts: usize,
}

impl ChshOptimum {
    pub fn violates_local_bound(&self) -> bool {
        self.s > CHSH_LOCAL_BOUND + CHSH_TOL
    }
}

fn apply(t: &[[f64; 3]; 3], v: [f64; 3], transpose: bool) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += if transpose { t[j][i] } else { t[i][j] } * v[j];
        }
    }
    out
}

fn unit_or(v: [f64; 3], fallback: UnitVector3) -> UnitVector3 {
    UnitVector3::normalized(v[0], v[1], v[2]).unwrap_or(fallback)
}

/// Coordinate ascent from `start`: each step maximizes `S` exactly over one
/// of the four directions with the others held fixed. Returns the final
/// settings and the value of `S` after every step.
pub fn chsh_ascent(rho: &DensityMatrix, start: ChshSettings, max_steps: usize) -> (ChshSettings, Vec<f64>) {
    let t = CorrelationTensor::of(rho);
    let m = &t.tensor;
    let mut s = start;
    let mut trace = vec![chsh_from_tensor(&t, &s)];
    let add = |u: UnitVector3, v: UnitVector3, sign: f64| {
        let (u, v) = (u.to_array(), v.to_array());
        [u[0] + sign * v[0], u[1] + sign * v[1], u[2] + sign * v[2]]
    };
    for _ in 0..max_steps {
        s.a = unit_or(apply(m, add(s.b, s.b_prime, 1.0), false), s.a);
        s.a_prime = unit_or(apply(m, add(s.b, s.b_prime, -1.0), false), s.a_prime);
        s.b = unit_or(apply(m, add(s.a, s.a_prime, 1.0), true), s.b);
        s.b_prime = unit_or(apply(m, add(s.a, s.a_prime, -1.0), true), s.b_prime);
        let value = chsh_from_tensor(&t, &s);
        let prev = *trace.last().unwrap();
        trace.push(value);
        if value - prev <= 1e-15 * value.abs().max(1.0) {
            break;
        }
    }
    (s, trace)
}

/// Best `|S|` over `restarts` random starting settings.
pub fn chsh_optimize(rho: &DensityMatrix, restarts: usize, seed: u64) -> ChshOptimum {
    let restarts = restarts.max(1);
    let best = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(point_seed(seed, r as u64));
            let start = ChshSettings {
                a: random_unit_vector(&mut rng),
                a_prime: random_unit_vector(&mut rng),
                b: random_unit_vector(&mut rng),
                b_prime: random_unit_vector(&mut rng),
            };
            let (settings, trace) = chsh_ascent(rho, start, 10_000);
            (r, settings, *trace.last().unwrap())
        })
        .reduce_with(|x, y| if y.2 > x.2 || (y.2 == x.2 && y.0 < x.0) { y } else { x })
        .expect("at least one restart");
    ChshOptimum {
        settings: best.1,
        s: best.2.abs(),
        restarts,
    }
}

/// Smallest `x` in `[lo, hi]` where `pred` switches from false to true,
/// located to within `tol`. Requires `!pred(lo)` and `pred(hi)`.
pub fn bisect_flip(mut lo: f64, mut hi: f64, tol: f64, mut pred: impl FnMut(f64) -> bool) -> Option<f64> {
    if pred(lo) || !pred(hi) {
        return None;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Werner-family thresholds (singlet base) located by bisection on `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WernerThresholds {
    /// PPT verdict flips to inseparable.
    pub ppt: f64,
    /// Spin diagonal-sum verdict flips.
    pub diagonal_sum: f64,
    /// Fitted spin band amplitude first exceeds the 1/3 bound.
    pub band_spin_amplitude: f64,
    /// Spin band verdict flips (bound plus the amplitude tolerance).
    pub band_spin_verdict: f64,
    /// Optimized CHSH value first exceeds 2.
    pub chsh: f64,
}

fn werner(beta: f64) -> DensityMatrix {
    werner_state(WernerParams { beta, base: NamedState::Singlet }).expect("beta within [0, 1]")
}

fn spin_band(beta: f64, grid: &[f64]) -> BandCheckReport {
    let curve = exact_curve(&werner(beta), AveragingMode::Spin, grid).expect("valid grid");
    band_check(&curve, AveragingMode::Spin).expect("well-formed curve")
}

pub fn werner_thresholds(restarts: usize, seed: u64) -> WernerThresholds {
    let tol = 1e-12;
    let grid = mode_grid(AveragingMode::Spin, 64);
    let ppt = bisect_flip(0.0, 1.0, tol, |b| ppt_check(&werner(b)).unwrap().is_inseparable());
    let diag = bisect_flip(0.0, 1.0, tol, |b| diagonal_sum_spin(&werner(b)).unwrap().is_inseparable());
    let amp = bisect_flip(0.0, 1.0, tol, |b| spin_band(b, &grid).verdict.margin > 0.0);
    let band = bisect_flip(0.0, 1.0, tol, |b| spin_band(b, &grid).verdict.is_inseparable());
    let chsh = bisect_flip(0.0, 1.0, 1e-9, |b| chsh_optimize(&werner(b), restarts, seed).violates_local_bound());
    WernerThresholds {
        ppt: ppt.unwrap_or(f64::NAN),
        diagonal_sum: diag.unwrap_or(f64::NAN),
        band_spin_amplitude: amp.unwrap_or(f64::NAN),
        band_spin_verdict: band.unwrap_or(f64::NAN),
        chsh: chsh.unwrap_or(f64::NAN),
    }
}

/// Summary of every applicable criterion, as run by the `check` command.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub pure_state: Option<Verdict>,
    pub ppt: Verdict,
    pub diagonal_sum_spin: Verdict,
    pub diagonal_sum_photon: Verdict,
}

pub fn check_all(rho: &DensityMatrix, n_directions: usize, seed: u64) -> Result<CheckReport> {
    let pure_state = match pure_state_check(rho, n_directions, seed) {
        Ok(v) => Some(v),
        Err(Error::NotPure { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(CheckReport {
        pure_state,
        ppt: ppt_check(rho)?,
        diagonal_sum_spin: diagonal_sum_spin(rho)?,
        diagonal_sum_photon: diagonal_sum_photon(rho)?,
    })
}
