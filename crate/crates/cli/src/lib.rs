//! Subcommands of the `sepavg` binary. Each command returns an [`Outcome`];
//! `main` only routes it to files and streams.

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use sepavg::averaging::{
    ensemble_analytic_curve, exact_curve, fourier_project, mc_curve, mode_grid, phi_grid, MIN_CURVE_POINTS,
    MIN_MC_SAMPLES,
};
use sepavg::criteria::{
    band_check, chsh_optimize, check_all, diagonal_sum_photon, diagonal_sum_spin, ppt_check, werner_thresholds,
    BandCheckReport, DEFAULT_CHSH_RESTARTS,
};
use sepavg::expdata::{curves_to_csv, format_sig9, reproduce_figure, NamedCurve, MIN_FIGURE_GRID};
use sepavg::spec::parse_spec;
use sepavg::states::{werner_state, EnsembleSpec, QubitParams, UnitVector3};
use sepavg::{AngleUnit, AveragingMode, Error, ResolvedState, WernerParams};

/// Random projector pairs drawn by the pure-state test in `check`.
pub const PURE_STATE_DIRECTIONS: usize = 1000;
/// Smallest grid accepted by the curve commands.
pub const MIN_GRID: usize = 32;
const _: () = assert!(MIN_GRID >= MIN_CURVE_POINTS && MIN_GRID >= MIN_FIGURE_GRID);

#[derive(Debug, Parser)]
#[command(name = "sepavg", version, about = "Separability checks for two-qubit states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON state description.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Monte Carlo samples per grid point.
    #[arg(long, global = true, default_value_t = 100_000)]
    pub samples: usize,
    /// Grid points per curve or sweep.
    #[arg(long, global = true, default_value_t = 64)]
    pub grid: usize,
    /// spin | photon-geometric | photon-hilbert
    #[arg(long, global = true, value_parser = parse_mode)]
    pub mode: Option<AveragingMode>,
    /// Write CSV here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Read photon angles in the state description as degrees.
    #[arg(long, global = true)]
    pub degrees: bool,
}

fn parse_mode(s: &str) -> Result<AveragingMode, String> {
    s.parse()
        .map_err(|_| format!("unknown mode `{s}`, expected spin, photon-geometric or photon-hilbert"))
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Run every state criterion on the input state.
    Check,
    /// Averaged correlation curve of the input state and its band verdict.
    BandScan,
    /// Criteria across the singlet Werner family, with refined thresholds.
    WernerSweep,
    /// Curves and verdict for one of the experimental comparisons (1, 2 or 3).
    Figure { n: u32 },
    /// Monte Carlo self-test of the three band coefficients.
    McVerify,
}

#[derive(Debug)]
pub struct Outcome {
    pub csv: Option<String>,
    pub report: String,
    pub exit_code: u8,
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidDensity(_)
            | Error::NonHermitianInput { .. }
            | Error::NonProjectorInput { .. }
            | Error::ImaginaryResidue { .. } => 3,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let c = &cli.common;
    match &cli.command {
        Command::Check => cmd_check(c),
        Command::BandScan => cmd_band_scan(c),
        Command::WernerSweep => cmd_werner_sweep(c),
        Command::Figure { n } => cmd_figure(c, *n),
        Command::McVerify => cmd_mc_verify(c),
    }
}

fn load_state(c: &Common) -> Result<ResolvedState, CliError> {
    let path = c.input.as_ref().ok_or_else(|| CliError::usage("--input is required"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    let unit = if c.degrees { AngleUnit::Degrees } else { AngleUnit::Radians };
    let spec = parse_spec(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    Ok(spec.resolve(unit)?)
}

fn check_grid(c: &Common) -> Result<(), CliError> {
    if c.grid < MIN_GRID {
        return Err(CliError::usage(format!("--grid must be at least {MIN_GRID}, got {}", c.grid)));
    }
    Ok(())
}

fn check_samples(c: &Common) -> Result<(), CliError> {
    if c.samples < MIN_MC_SAMPLES {
        return Err(CliError::usage(format!(
            "--samples must be at least {MIN_MC_SAMPLES}, got {}",
            c.samples
        )));
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize") + "\n"
}

fn cmd_check(c: &Common) -> Result<Outcome, CliError> {
    let state = load_state(c)?;
    let report = check_all(&state.density, PURE_STATE_DIRECTIONS, c.seed)?;
    let text = if c.json {
        to_json(&report)
    } else {
        let mut s = String::new();
        match &report.pure_state {
            Some(v) => writeln!(s, "{v}").unwrap(),
            None => writeln!(s, "pure-state-g: skipped (state is mixed)").unwrap(),
        }
        for v in [&report.ppt, &report.diagonal_sum_spin, &report.diagonal_sum_photon] {
            writeln!(s, "{v}").unwrap();
        }
        s
    };
    Ok(Outcome {
        csv: None,
        report: text,
        exit_code: 0,
    })
}

fn band_text(r: &BandCheckReport) -> String {
    format!(
        "mode {}: constant {:.6}, amplitude {:.6} ± {:.6}, sine {:.6}, residual {:.3e}, bound {:.6}\n{}\n",
        r.mode, r.constant, r.amplitude, r.fit.amplitude_stderr, r.sine, r.residual_rms, r.c_bound, r.verdict
    )
}

fn cmd_band_scan(c: &Common) -> Result<Outcome, CliError> {
    let mode = c.mode.ok_or_else(|| CliError::usage("--mode is required for band-scan"))?;
    check_grid(c)?;
    check_samples(c)?;
    let state = load_state(c)?;
    let phis = mode_grid(mode, c.grid);
    let mc = mc_curve(&state.density, mode, &phis, c.samples, c.seed)?;
    let report = band_check(&mc, mode)?;
    let mut curves = vec![NamedCurve {
        series: "mc".into(),
        curve: mc,
    }];
    if let Some(e) = &state.ensemble {
        curves.push(NamedCurve {
            series: "analytic".into(),
            curve: ensemble_analytic_curve(e, mode, &phis)?,
        });
    }
    Ok(Outcome {
        csv: Some(curves_to_csv(&curves)),
        report: if c.json { to_json(&report) } else { band_text(&report) },
        exit_code: 0,
    })
}

pub const SWEEP_HEADER: &str = "beta,ppt_min_eigenvalue,diagonal_sum_spin,diagonal_sum_photon,\
band_amplitude_spin,band_amplitude_photon_geometric,band_amplitude_photon_hilbert,chsh_max";

fn cmd_werner_sweep(c: &Common) -> Result<Outcome, CliError> {
    check_grid(c)?;
    let grids: Vec<(AveragingMode, Vec<f64>)> = AveragingMode::ALL.iter().map(|&m| (m, mode_grid(m, 64))).collect();
    let mut csv = String::from(SWEEP_HEADER);
    csv.push('\n');
    for beta in phi_grid(0.0, 1.0, c.grid) {
        let rho = werner_state(WernerParams::singlet(beta)?)?;
        let ppt = ppt_check(&rho)?;
        let min_eig = ppt.details["min_eigenvalue"].as_f64().unwrap_or(f64::NAN);
        let mut fields = vec![
            beta,
            min_eig,
            diagonal_sum_spin(&rho)?.statistic,
            diagonal_sum_photon(&rho)?.statistic,
        ];
        for (mode, phis) in &grids {
            fields.push(fourier_project(&exact_curve(&rho, *mode, phis)?, mode.harmonic())?.amplitude);
        }
        fields.push(chsh_optimize(&rho, DEFAULT_CHSH_RESTARTS, c.seed).s);
        let row: Vec<String> = fields.into_iter().map(format_sig9).collect();
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    let t = werner_thresholds(DEFAULT_CHSH_RESTARTS, c.seed);
    for (name, v) in [
        ("ppt", t.ppt),
        ("diagonal_sum", t.diagonal_sum),
        ("band_spin_amplitude", t.band_spin_amplitude),
        ("band_spin_verdict", t.band_spin_verdict),
        ("chsh", t.chsh),
    ] {
        writeln!(csv, "#threshold,{name},{v}").unwrap();
    }
    let report = if c.json {
        to_json(&t)
    } else {
        format!(
            "thresholds: ppt {:.12}, diagonal-sum {:.12}, spin band amplitude {:.12}, spin band verdict {:.9}, chsh {:.9}\n",
            t.ppt, t.diagonal_sum, t.band_spin_amplitude, t.band_spin_verdict, t.chsh
        )
    };
    Ok(Outcome {
        csv: Some(csv),
        report,
        exit_code: 0,
    })
}

fn cmd_figure(c: &Common, n: u32) -> Result<Outcome, CliError> {
    let f = reproduce_figure(n, c.grid)?;
    let report = if c.json {
        to_json(&json!({ "figure": f.figure, "verdict": f.verdict }))
    } else {
        format!("figure {}: {}\n", f.figure, f.verdict)
    };
    Ok(Outcome {
        csv: Some(curves_to_csv(&f.curves)),
        report,
        exit_code: 0,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CoefficientCheck {
    pub mode: AveragingMode,
    pub state: String,
    pub expected: f64,
    pub estimate: f64,
    pub stderr: f64,
    pub z: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct McVerifyReport {
    pub samples: usize,
    pub grid: usize,
    pub seed: u64,
    pub checks: Vec<CoefficientCheck>,
    pub pass: bool,
}

/// Fitted band amplitude of an aligned product state against the mode's
/// coefficient, on `grid` points with `samples` draws each.
pub fn coefficient_check(mode: AveragingMode, samples: usize, grid: usize, seed: u64) -> sepavg::Result<CoefficientCheck> {
    let (side, label) = match mode {
        AveragingMode::Spin => (QubitParams::Spin(UnitVector3::Z), "z ⊗ z"),
        _ => (QubitParams::Photon { theta: 0.0, phi: 0.0 }, "H ⊗ H"),
    };
    let rho = sepavg::states::ensemble_density(&EnsembleSpec::product(side, side)?)?;
    let curve = mc_curve(&rho, mode, &mode_grid(mode, grid), samples, seed)?;
    let fit = fourier_project(&curve, mode.harmonic())?;
    let expected = mode.coefficient();
    let z = (fit.amplitude - expected) / fit.amplitude_stderr;
    Ok(CoefficientCheck {
        mode,
        state: label.into(),
        expected,
        estimate: fit.amplitude,
        stderr: fit.amplitude_stderr,
        z,
        pass: z.abs() <= 4.0,
    })
}

fn cmd_mc_verify(c: &Common) -> Result<Outcome, CliError> {
    check_grid(c)?;
    check_samples(c)?;
    let checks = AveragingMode::ALL
        .iter()
        .enumerate()
        .map(|(k, &m)| coefficient_check(m, c.samples, c.grid, c.seed.wrapping_add(k as u64)))
        .collect::<sepavg::Result<Vec<_>>>()?;
    let pass = checks.iter().all(|k| k.pass);
    let report = McVerifyReport {
        samples: c.samples,
        grid: c.grid,
        seed: c.seed,
        checks,
        pass,
    };
    let text = if c.json {
        to_json(&report)
    } else {
        let mut s = String::new();
        for k in &report.checks {
            writeln!(
                s,
                "{:<17} {}: {:.5} ± {:.5} (expected {:.5}, z {:+.2}) {}",
                k.mode.name(),
                k.state,
                k.estimate,
                k.stderr,
                k.expected,
                k.z,
                if k.pass { "pass" } else { "FAIL" }
            )
            .unwrap();
        }
        s
    };
    Ok(Outcome {
        csv: None,
        report: text,
        exit_code: if pass { 0 } else { 1 },
    })
}
