#![allow(dead_code)]

use num_complex::Complex64;
use proptest::prelude::*;
use sepavg::linalg::ComplexMatrix;
use sepavg::states::{EnsembleEntry, EnsembleMode, EnsembleSpec, QubitParams, UnitVector3};
use std::f64::consts::{PI, TAU};

pub fn unit_vector() -> impl Strategy<Value = UnitVector3> {
    (-1.0f64..=1.0, 0.0..TAU).prop_map(|(z, az)| UnitVector3::from_spherical(z.acos(), az))
}

pub fn photon_side() -> impl Strategy<Value = QubitParams> {
    (0.0..=PI, 0.0..TAU).prop_map(|(theta, phi)| QubitParams::Photon { theta, phi })
}

pub fn side(mode: EnsembleMode) -> BoxedStrategy<QubitParams> {
    match mode {
        EnsembleMode::Spin => unit_vector().prop_map(QubitParams::Spin).boxed(),
        EnsembleMode::Photon => photon_side().boxed(),
    }
}

/// Weights normalized to sum to one; the last weight absorbs rounding.
pub fn normalize(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let head: f64 = w[..w.len() - 1].iter().sum();
    *w.last_mut().unwrap() = (1.0 - head).max(0.0);
    w
}

pub fn ensemble_in(mode: EnsembleMode, max_components: usize) -> impl Strategy<Value = EnsembleSpec> {
    prop::collection::vec((0.01f64..1.0, side(mode), side(mode)), 1..=max_components).prop_map(move |parts| {
        let w = normalize(&parts.iter().map(|p| p.0).collect::<Vec<_>>());
        let entries = parts
            .into_iter()
            .zip(w)
            .map(|((_, left, right), weight)| EnsembleEntry { weight, left, right })
            .collect();
        EnsembleSpec::new(mode, entries).expect("valid ensemble")
    })
}

pub fn ensemble(max_components: usize) -> impl Strategy<Value = EnsembleSpec> {
    prop_oneof![
        ensemble_in(EnsembleMode::Spin, max_components),
        ensemble_in(EnsembleMode::Photon, max_components)
    ]
}

pub fn complex() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

/// Random Hermitian `n x n` matrix from `H = (A + A^dagger) / 2`.
pub fn hermitian(n: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec(complex(), n * n).prop_map(move |data| {
        let a = ComplexMatrix::new(n, n, data).unwrap();
        (&a + &a.dagger()).scale_real(0.5)
    })
}

pub fn pure_vector() -> impl Strategy<Value = [Complex64; 4]> {
    prop::array::uniform4(complex())
        .prop_filter("nonzero", |v| v.iter().map(|c| c.norm_sqr()).sum::<f64>() > 1e-3)
        .prop_map(|v| {
            let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            v.map(|c| c / n)
        })
}

/// Eigenvalues of a real symmetric 3x3 matrix, descending (trigonometric closed form).
pub fn sym3_eigenvalues(m: [[f64; 3]; 3]) -> [f64; 3] {
    let p1 = m[0][1].powi(2) + m[0][2].powi(2) + m[1][2].powi(2);
    let q = (m[0][0] + m[1][1] + m[2][2]) / 3.0;
    if p1 < 1e-300 {
        let mut d = [m[0][0], m[1][1], m[2][2]];
        d.sort_by(|a, b| b.partial_cmp(a).unwrap());
        return d;
    }
    let p2 = (m[0][0] - q).powi(2) + (m[1][1] - q).powi(2) + (m[2][2] - q).powi(2) + 2.0 * p1;
    let p = (p2 / 6.0).sqrt();
    let mut b = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            b[i][j] = (m[i][j] - if i == j { q } else { 0.0 }) / p;
        }
    }
    let det = b[0][0] * (b[1][1] * b[2][2] - b[1][2] * b[2][1]) - b[0][1] * (b[1][0] * b[2][2] - b[1][2] * b[2][0])
        + b[0][2] * (b[1][0] * b[2][1] - b[1][1] * b[2][0]);
    let r = (det / 2.0).clamp(-1.0, 1.0);
    let phi = r.acos() / 3.0;
    let e1 = q + 2.0 * p * phi.cos();
    let e3 = q + 2.0 * p * (phi + 2.0 * PI / 3.0).cos();
    [e1, 3.0 * q - e1 - e3, e3]
}

/// Correlation tensor `T_ij = Tr rho (sigma_i ⊗ sigma_j)` by explicit matrix products.
pub fn correlation_tensor_oracle(rho: &ComplexMatrix) -> [[f64; 3]; 3] {
    let s = sepavg::linalg::pauli_vector();
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let op = sepavg::linalg::kron(&s[i], &s[j]);
            t[i][j] = rho.matmul(&op).unwrap().trace().re;
        }
    }
    t
}

/// Largest CHSH value of a two-qubit state: `2 sqrt(u1 + u2)` over the two
/// largest eigenvalues of `T^T T`.
pub fn chsh_max_oracle(rho: &ComplexMatrix) -> f64 {
    let t = correlation_tensor_oracle(rho);
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = (0..3).map(|k| t[k][i] * t[k][j]).sum();
        }
    }
    let u = sym3_eigenvalues(m);
    2.0 * (u[0] + u[1]).max(0.0).sqrt()
}
