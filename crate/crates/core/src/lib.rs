//! Numerical verification of the structural equations of supermanifolds
//! immersed in Euclidean, spherical and hyperbolic superspaces.

pub mod cases;
pub mod error;
pub mod field;
pub mod frames;
pub mod grassmann;
pub mod grid;
pub mod integrator;
pub mod io;
pub mod report;
pub mod theta;
pub mod verify;

pub use cases::{CaseSpec, CaseTag, GeometryBundle};
pub use error::{Error, Result};
pub use field::{Axis, Field, NilpotencyReport, Stencil, XDir, EXACT};
pub use frames::{
    assemble, gauss_codazzi_residual, zero_curvature_residual, FieldMatrix, FrameSystem,
};
pub use grassmann::{
    decompose, gr_mul, reassemble, super_inner, Blade, ComponentMaps, GrassmannValue,
    SectorMetricSignature, SuperField, SuperVector,
};
pub use grid::{ConformalGrid, GridSpec};
pub use integrator::{
    holonomy, initial_frame, integrate_case, propagate, reconstruct, FrameState, HolonomyReport,
    IntegrateOptions, Integration, SectorMat, SweepOrder,
};
pub use report::{ResidualEntry, ResidualReport, Tolerance};
pub use theta::{ThetaConj, ThetaPoly, ThetaVar, THETA_CAP};
pub use verify::verify_case;
