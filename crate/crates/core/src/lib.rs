//! Ground-state Hanle resonances of degenerate two-level atoms driven by
//! elliptically polarized light.
//!
//! [`gobe`] solves the full steady-state Bloch equations for arbitrary
//! angular momenta, [`reduced`] the low-saturation closed equations and the
//! closed-form 1 → 2 lineshape, [`lineshape`] extracts Lorentzian parameters
//! and [`doppler`] averages over a thermal velocity distribution.

pub mod angular;
pub mod doppler;
pub mod error;
pub mod gobe;
mod hermitian;
pub mod lineshape;
pub mod reduced;
pub mod scan;
pub mod validate;

pub use angular::{AngularMomentum, Level, Operator, Polarization, ZeemanBasis, C64};
pub use doppler::{DopplerParams, QuadratureRule};
pub use error::{HanleError, Result};
pub use gobe::{DensityMatrix, SteadyStateSolution, SystemParams};
pub use lineshape::{FitOutcome, LorentzianParams, ResonanceKind};
pub use reduced::{NormalizedParams, PolyCoeffs};
pub use scan::{ScanMeta, ScanResult, SolverPath};
