pub mod boundary;
pub mod cli;
pub mod contour;
pub mod error;
pub mod geometry;
pub mod linearization;
pub mod solver;
pub mod spectral;
pub mod stream;

pub use boundary::{FourierBoundary, PatchFile, PatchState};
pub use contour::{ContourOperator, QuadratureConfig, ResidualField, SingularRule};
pub use error::{Result, VStateError};
pub use geometry::{Classification, ShapeReport};
pub use linearization::{DiskLinearization, JacobianMatrix, KernelMode, SpectrumReport};
pub use stream::{StreamField, StreamSample};
pub use solver::{Branch, BranchRecord, ScanConfig, ScanReport, SolveConfig, SolveOutcome, Symmetry};
