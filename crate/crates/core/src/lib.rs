//! Separability tests for two-qubit states built on averaged two-point
//! correlations, plus the reference criteria they are compared against
//! (partial transpose, diagonal sums, CHSH).

pub mod averaging;
pub mod criteria;
pub mod error;
pub mod expdata;
pub mod linalg;
pub mod observables;
pub mod spec;
pub mod states;

pub use averaging::{AveragingMode, CorrelationCurve, CurveMode, CurvePoint, FourierFit, McEstimate};
pub use criteria::{BandCheckReport, CheckReport, ChshOptimum, ChshSettings, Status, Verdict, WernerThresholds};
pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use observables::Observable;
pub use spec::{AngleUnit, ResolvedState, StateSpec};
pub use states::{
    DensityMatrix, EnsembleEntry, EnsembleMode, EnsembleSpec, NamedState, QubitParams, QubitState, UnitVector3,
    WernerParams,
};
