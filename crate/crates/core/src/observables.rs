//! Single-qubit observables and two-point correlation functionals.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, HERMITIAN_TOL, ONE, ZERO};
use crate::states::{photon_qubit, DensityMatrix, UnitVector3};

/// Dense 2x2 complex matrix used on the sampling hot path.
pub type Mat2 = [[Complex64; 2]; 2];

pub const PROJECTOR_TOL: f64 = 1e-12;
pub const IMAG_TOL: f64 = 1e-10;

pub const IDENTITY2: Mat2 = [[ONE, ZERO], [ZERO, ONE]];

/// `(1 + a·sigma)/2` with no allocation.
#[inline]
pub fn bloch_projector_mat(a: &UnitVector3) -> Mat2 {
    [
        [Complex64::new(0.5 * (1.0 + a.z()), 0.0), Complex64::new(0.5 * a.x(), -0.5 * a.y())],
        [Complex64::new(0.5 * a.x(), 0.5 * a.y()), Complex64::new(0.5 * (1.0 - a.z()), 0.0)],
    ]
}

/// `a·sigma` with no allocation.
#[inline]
pub fn dot_sigma_mat(a: &UnitVector3) -> Mat2 {
    [
        [Complex64::new(a.z(), 0.0), Complex64::new(a.x(), -a.y())],
        [Complex64::new(a.x(), a.y()), Complex64::new(-a.z(), 0.0)],
    ]
}

/// Projector onto the linear polarization `(cos t, sin t)`.
#[inline]
pub fn linear_polarizer_mat(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    [
        [Complex64::new(c * c, 0.0), Complex64::new(c * s, 0.0)],
        [Complex64::new(c * s, 0.0), Complex64::new(s * s, 0.0)],
    ]
}

/// `Tr rho (A ⊗ B)` evaluated directly from the entries of `rho`.
#[inline]
pub fn expect_product(rho: &DensityMatrix, a: &Mat2, b: &Mat2) -> Complex64 {
    let m = rho.matrix().data();
    let mut acc = ZERO;
    for i in 0..2 {
        for j in 0..2 {
            let aij = a[i][j];
            for k in 0..2 {
                for l in 0..2 {
                    // rho[(j,l), (i,k)] * A_ij * B_kl
                    acc += m[(2 * j + l) * 4 + 2 * i + k] * aij * b[k][l];
                }
            }
        }
    }
    acc
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observable {
    matrix: ComplexMatrix,
    label: String,
}

impl Observable {
    pub fn new(matrix: ComplexMatrix, label: impl Into<String>) -> Result<Self> {
        if matrix.rows() != 2 || matrix.cols() != 2 {
            return Err(Error::Dimension("observable must be 2x2".into()));
        }
        let deviation = matrix.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::NonHermitianInput {
                deviation,
                tolerance: HERMITIAN_TOL,
            });
        }
        Ok(Self {
            matrix,
            label: label.into(),
        })
    }

    fn from_mat(m: &Mat2, label: String) -> Self {
        Self {
            matrix: ComplexMatrix::from_rows(*m),
            label,
        }
    }

    pub fn identity() -> Self {
        Self::from_mat(&IDENTITY2, "1".into())
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn to_mat2(&self) -> Mat2 {
        let m = &self.matrix;
        [[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]
    }

    /// `max |P^2 - P|`.
    pub fn projector_deviation(&self) -> f64 {
        (&self.matrix * &self.matrix).max_abs_diff(&self.matrix)
    }

    pub fn is_projector(&self) -> bool {
        self.projector_deviation() <= PROJECTOR_TOL
    }
}

/// `P(a) = (1 + a·sigma)/2`.
pub fn spin_projector(a: UnitVector3) -> Result<Observable> {
    let a = UnitVector3::new(a.x(), a.y(), a.z())?;
    Ok(Observable::from_mat(
        &bloch_projector_mat(&a),
        format!("P({:.4},{:.4},{:.4})", a.x(), a.y(), a.z()),
    ))
}

/// `a·sigma`.
pub fn spin_observable(a: UnitVector3) -> Result<Observable> {
    let a = UnitVector3::new(a.x(), a.y(), a.z())?;
    Ok(Observable::from_mat(
        &dot_sigma_mat(&a),
        format!("sigma.({:.4},{:.4},{:.4})", a.x(), a.y(), a.z()),
    ))
}

/// Linear polarizer `P(theta) = |theta,0><theta,0|`.
pub fn polarizer_geometric(theta: f64) -> Observable {
    Observable::from_mat(&linear_polarizer_mat(theta), format!("P(theta={theta:.6})"))
}

/// Hilbert-space polarizer `P(theta/2, phi) = |theta/2,phi><theta/2,phi|`,
/// projecting onto `(cos(theta/2) e^{-i phi}, sin(theta/2))`.
pub fn polarizer_hilbert(theta: f64, phi: f64) -> Observable {
    let proj = photon_qubit(theta / 2.0, phi).projector();
    Observable {
        matrix: proj,
        label: format!("P(theta/2={:.6},phi={phi:.6})", theta / 2.0),
    }
}

fn real_part_checked(z: Complex64) -> Result<f64> {
    if z.im.abs() > IMAG_TOL {
        return Err(Error::ImaginaryResidue { residue: z.im });
    }
    Ok(z.re)
}

/// `Re Tr rho (A ⊗ B)`, rejecting results with an imaginary part above `1e-10`.
pub fn correlation(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<f64> {
    real_part_checked(expect_product(rho, &a.to_mat2(), &b.to_mat2()))
}

/// `G = 4[<A ⊗ B> - <A ⊗ 1><1 ⊗ B>]` for projectors `A`, `B`.
pub fn g_quantity(rho: &DensityMatrix, a: &Observable, b: &Observable) -> Result<f64> {
    for p in [a, b] {
        let deviation = p.projector_deviation();
        if deviation > PROJECTOR_TOL {
            return Err(Error::NonProjectorInput { deviation });
        }
    }
    let (am, bm) = (a.to_mat2(), b.to_mat2());
    let joint = real_part_checked(expect_product(rho, &am, &bm))?;
    let left = real_part_checked(expect_product(rho, &am, &IDENTITY2))?;
    let right = real_part_checked(expect_product(rho, &IDENTITY2, &bm))?;
    Ok(4.0 * (joint - left * right))
}
