//! Published experimental curves and the figure comparisons built on them.
//!
//! Two photon-polarization datasets (a calcium cascade, 1981) and one
//! proton-spin dataset (2006) are carried as fitted closed forms. No per-point
//! uncertainties are attached, so the absolute tolerance floors of
//! [`band_check`] apply.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use serde::Serialize;

use crate::averaging::{phi_grid, AveragingMode, CorrelationCurve, CurveMode};
use crate::criteria::{band_check, Status, Verdict, G_TOL};
use crate::error::{Error, Result};

pub const MIN_FIGURE_GRID: usize = 32;

/// `c0 + A cos(h phi)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentCurve {
    pub name: &'static str,
    pub constant: f64,
    pub amplitude: f64,
    pub harmonic: u32,
    pub source: &'static str,
}

impl ExperimentCurve {
    pub fn eval(&self, phi: f64) -> f64 {
        self.constant + self.amplitude * (self.harmonic as f64 * phi).cos()
    }

    pub fn sample(&self, phis: &[f64]) -> Result<CorrelationCurve> {
        CorrelationCurve::from_fn(phis, CurveMode::External, |p| self.eval(p))
    }
}

/// Pure-state witness `G(phi)` of the 1981 photon experiment: the three
/// printed efficiency/contrast factors multiply `cos 2 phi`.
pub fn aspect_g_curve() -> ExperimentCurve {
    ExperimentCurve {
        name: "aspect1981_g",
        constant: 0.0,
        amplitude: (0.971 - 0.029) * (0.968 - 0.028) * 0.984,
        harmonic: 2,
        source: "Aspect, Grangier, Roger 1981",
    }
}

/// Correlation `4 <P(a) ⊗ P(b)>` of the same experiment.
pub fn aspect_c_curve() -> ExperimentCurve {
    ExperimentCurve {
        name: "aspect1981_c",
        constant: 0.996,
        amplitude: 0.88,
        harmonic: 2,
        source: "Aspect, Grangier, Roger 1981",
    }
}

/// Spin correlation measured with randomly rotated analyzers.
pub fn sakai_curve() -> ExperimentCurve {
    ExperimentCurve {
        name: "sakai2006_c",
        constant: 0.0,
        amplitude: -1.0,
        harmonic: 1,
        source: "Sakai et al. 2006",
    }
}

/// `G = 4[R(phi)/R0 - R1 R2 / R0^2]` from coincidence and single rates.
pub fn raw_rates_to_g(r_phi: f64, r1: f64, r2: f64, r0: f64) -> Result<f64> {
    if r0.is_nan() || r0 <= 0.0 {
        return Err(Error::NonPositiveR0(r0));
    }
    for r in [r_phi, r1, r2] {
        if r.is_nan() || r < 0.0 {
            return Err(Error::NegativeRate(r));
        }
    }
    Ok(4.0 * (r_phi / r0 - r1 * r2 / (r0 * r0)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedCurve {
    pub series: String,
    pub curve: CorrelationCurve,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FigureReport {
    pub figure: u32,
    pub curves: Vec<NamedCurve>,
    pub verdict: Verdict,
}

fn named(series: &str, curve: CorrelationCurve) -> NamedCurve {
    NamedCurve {
        series: series.to_string(),
        curve,
    }
}

fn band_envelope(phis: &[f64], mode: AveragingMode) -> Result<(CorrelationCurve, CorrelationCurve)> {
    let c0 = mode.expected_constant();
    let k = mode.coefficient();
    let h = mode.harmonic() as f64;
    let upper = CorrelationCurve::from_fn(phis, CurveMode::from(mode), |p| c0 + k * (h * p).cos().abs())?;
    let lower = CorrelationCurve::from_fn(phis, CurveMode::from(mode), |p| c0 - k * (h * p).cos().abs())?;
    Ok((upper, lower))
}

/// Curves and verdict of figure 1 (pure-state witness), 2 (spin band) or 3
/// (photon geometric band).
pub fn reproduce_figure(n: u32, grid: usize) -> Result<FigureReport> {
    if grid < MIN_FIGURE_GRID {
        return Err(Error::GridTooSmall {
            min: MIN_FIGURE_GRID,
            got: grid,
        });
    }
    match n {
        1 => {
            let phis = phi_grid(0.0, FRAC_PI_2, grid);
            let g = aspect_g_curve().sample(&phis)?;
            let zero = CorrelationCurve::from_fn(&phis, CurveMode::External, |_| 0.0)?;
            let statistic = g.points().iter().map(|p| p.value.abs()).fold(0.0, f64::max);
            let status = if statistic > G_TOL {
                Status::Inseparable
            } else {
                Status::ConsistentWithSeparable
            };
            let mut verdict = Verdict {
                status,
                criterion: "pure-state-g".into(),
                statistic,
                bound: 0.0,
                margin: statistic,
                details: Default::default(),
            };
            verdict.details.insert("tolerance".into(), G_TOL.into());
            Ok(FigureReport {
                figure: 1,
                curves: vec![named("experiment", g), named("separable_pure", zero)],
                verdict,
            })
        }
        2 | 3 => {
            let (mode, exp) = if n == 2 {
                (AveragingMode::Spin, sakai_curve())
            } else {
                (AveragingMode::PhotonGeometric, aspect_c_curve())
            };
            let phis = phi_grid(0.0, if n == 2 { PI } else { FRAC_PI_2 }, grid);
            let curve = exp.sample(&phis)?;
            let report = band_check(&curve, mode)?;
            let (upper, lower) = band_envelope(&phis, mode)?;
            Ok(FigureReport {
                figure: n,
                curves: vec![named("experiment", curve), named("band_upper", upper), named("band_lower", lower)],
                verdict: report.verdict,
            })
        }
        other => Err(Error::UnknownFigure(other)),
    }
}

/// Format a float with 9 significant digits, `%g` style.
pub fn format_sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent in scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

pub const CSV_HEADER: &str = "phi_rad,value,stderr,series";

/// Curves as CSV: `phi_rad,value,stderr,series`, an empty stderr field when absent.
pub fn curves_to_csv(curves: &[NamedCurve]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for nc in curves {
        for p in nc.curve.points() {
            let se = p.stderr.map(format_sig9).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{}", format_sig9(p.phi), format_sig9(p.value), se, nc.series);
        }
    }
    out
}
