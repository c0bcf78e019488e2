//! Shortcut-to-adiabaticity workbench for a single driven spin-½.
//!
//! The crate covers the reference and counter-diabatic field schedules,
//! pure and Lindblad propagation, two-point-measurement work statistics,
//! the quantum geometric tensor and a virtual laboratory that reconstructs
//! eigenenergies and populations from simulated Ramsey fringes.
//!
//! Internal units: `ħ = 1`, time in ns, fields and energies in rad/ns.
//! Reporting helpers in [`units`] convert to MHz and `h·MHz`.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod evolution;
pub mod fit;
pub mod geometry;
pub mod lab;
pub mod protocol;
pub mod quantum;
pub mod units;
pub mod verify;
pub mod work;

pub use error::{Result, StaError};
pub use evolution::{DissipationParams, FieldSource, Method, PropagatorConfig};
pub use protocol::{Branch, DragSchedule, Schedule, StandardSchedule};
pub use quantum::{DensityMatrix, FieldVector, Mat2, PureState, SpectralDecomposition};
pub use work::{MomentRecord, WorkDistribution};

pub use num_complex::Complex64;
