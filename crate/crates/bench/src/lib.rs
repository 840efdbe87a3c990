//! Fixtures shared by the benchmarks.

use sepavg::linalg::ComplexMatrix;
use sepavg::states::{ensemble_density, werner_state, EnsembleEntry, EnsembleMode, EnsembleSpec, QubitParams};
use sepavg::{DensityMatrix, WernerParams};

pub fn werner(beta: f64) -> DensityMatrix {
    werner_state(WernerParams::singlet(beta).expect("beta in range")).expect("valid state")
}

/// Deterministic photon mixture with `n` components.
pub fn photon_mixture(n: usize) -> DensityMatrix {
    let w = 1.0 / n as f64;
    let entries = (0..n)
        .map(|k| {
            let t = k as f64 / n as f64;
            EnsembleEntry {
                weight: w,
                left: QubitParams::Photon { theta: 3.0 * t, phi: 6.0 * t },
                right: QubitParams::Photon { theta: 3.0 * (1.0 - t), phi: 1.0 + 5.0 * t },
            }
        })
        .collect();
    ensemble_density(&EnsembleSpec::new(EnsembleMode::Photon, entries).expect("valid ensemble")).expect("valid state")
}

/// Partial transpose of a photon mixture: a dense Hermitian 4x4 input for the eigensolver.
pub fn hermitian_input() -> ComplexMatrix {
    let rho = photon_mixture(7);
    sepavg::linalg::partial_transpose_second(rho.matrix()).expect("4x4")
}
