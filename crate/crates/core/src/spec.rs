//! JSON state descriptions.
//!
//! ```json
//! {"kind": "werner", "beta": 0.25, "base": "singlet"}
//! {"kind": "product", "mode": "spin", "left": [0, 0, 1], "right": [1, 0, 0]}
//! {"kind": "ensemble", "mode": "photon",
//!  "entries": [{"w": 0.5, "left": [0, 0], "right": [3.14159, 0]}, ...]}
//! {"kind": "matrix", "matrix": [[[0.25, 0], [0, 0], [0, 0], [0, 0]], ...]}
//! ```
//!
//! Spin sides are Bloch vectors `[x, y, z]`; photon sides are `[theta, phi]`
//! and denote `|theta/2, phi>`. Angles are radians unless resolved with
//! [`AngleUnit::Degrees`]. Matrix entries are `[re, im]` pairs, row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::states::{
    ensemble_density, named_two_qubit, werner_state, DensityMatrix, EnsembleEntry, EnsembleMode, EnsembleSpec,
    NamedState, QubitParams, UnitVector3, WernerParams,
};
use num_complex::Complex64;

/// Bloch vectors read from text are renormalized when within this distance of unit norm.
pub const INPUT_UNIT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum StateSpec {
    Product {
        mode: EnsembleMode,
        left: Vec<f64>,
        right: Vec<f64>,
    },
    Named {
        name: NamedState,
    },
    Werner {
        beta: f64,
        base: NamedState,
    },
    Ensemble {
        mode: EnsembleMode,
        entries: Vec<EntrySpec>,
    },
    Matrix {
        matrix: Vec<Vec<[f64; 2]>>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntrySpec {
    pub w: f64,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AngleUnit {
    #[default]
    Radians,
    Degrees,
}

impl AngleUnit {
    fn to_radians(self, x: f64) -> f64 {
        match self {
            AngleUnit::Radians => x,
            AngleUnit::Degrees => x.to_radians(),
        }
    }
}

/// A resolved state. `ensemble` is kept for product and ensemble inputs so
/// callers can use the analytic averaging path.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedState {
    pub density: DensityMatrix,
    pub ensemble: Option<EnsembleSpec>,
}

/// Parse a state spec. Syntax errors carry the line and column, schema errors
/// the offending field or value.
pub fn parse_spec(text: &str) -> Result<StateSpec> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Spec(format!("syntax: {e}")))?;
    serde_json::from_value(value).map_err(|e| Error::Spec(format!("schema: {e}")))
}

fn side(mode: EnsembleMode, values: &[f64], field: &str, unit: AngleUnit) -> Result<QubitParams> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Spec(format!("{field}: non-finite component")));
    }
    match mode {
        EnsembleMode::Spin => {
            let &[x, y, z] = values else {
                return Err(Error::Spec(format!(
                    "{field}: spin side needs 3 components, got {}",
                    values.len()
                )));
            };
            let norm = (x * x + y * y + z * z).sqrt();
            if (norm - 1.0).abs() > INPUT_UNIT_TOL {
                return Err(Error::Spec(format!("{field}: Bloch vector norm {norm} is not 1")));
            }
            Ok(QubitParams::Spin(UnitVector3::normalized(x, y, z)?))
        }
        EnsembleMode::Photon => {
            let &[theta, phi] = values else {
                return Err(Error::Spec(format!(
                    "{field}: photon side needs [theta, phi], got {} components",
                    values.len()
                )));
            };
            Ok(QubitParams::Photon {
                theta: unit.to_radians(theta),
                phi: unit.to_radians(phi),
            })
        }
    }
}

fn matrix_from_pairs(rows: &[Vec<[f64; 2]>]) -> Result<ComplexMatrix> {
    if rows.len() != 4 {
        return Err(Error::Spec(format!("matrix: expected 4 rows, got {}", rows.len())));
    }
    let mut data = Vec::with_capacity(16);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != 4 {
            return Err(Error::Spec(format!("matrix[{i}]: expected 4 entries, got {}", row.len())));
        }
        for (j, &[re, im]) in row.iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::Spec(format!("matrix[{i}][{j}]: non-finite entry")));
            }
            data.push(Complex64::new(re, im));
        }
    }
    ComplexMatrix::new(4, 4, data)
}

impl StateSpec {
    pub fn resolve(&self, unit: AngleUnit) -> Result<ResolvedState> {
        match self {
            StateSpec::Product { mode, left, right } => {
                let e = EnsembleSpec::product(side(*mode, left, "left", unit)?, side(*mode, right, "right", unit)?)?;
                Ok(ResolvedState {
                    density: ensemble_density(&e)?,
                    ensemble: Some(e),
                })
            }
            StateSpec::Named { name } => Ok(ResolvedState {
                density: named_two_qubit(*name),
                ensemble: None,
            }),
            StateSpec::Werner { beta, base } => Ok(ResolvedState {
                density: werner_state(WernerParams::new(*beta, *base)?)?,
                ensemble: None,
            }),
            StateSpec::Ensemble { mode, entries } => {
                let parsed = entries
                    .iter()
                    .enumerate()
                    .map(|(k, e)| {
                        Ok(EnsembleEntry {
                            weight: e.w,
                            left: side(*mode, &e.left, &format!("entries[{k}].left"), unit)?,
                            right: side(*mode, &e.right, &format!("entries[{k}].right"), unit)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let e = EnsembleSpec::new(*mode, parsed)?;
                Ok(ResolvedState {
                    density: ensemble_density(&e)?,
                    ensemble: Some(e),
                })
            }
            StateSpec::Matrix { matrix } => Ok(ResolvedState {
                density: DensityMatrix::new(matrix_from_pairs(matrix)?)?,
                ensemble: None,
            }),
        }
    }
}
