//! Simulation and verification of the generalized curve shortening flow
//! `v = G(k)k` for closed strictly convex plane curves.
//!
//! The curve is represented by its curvature `k(θ)` or support function
//! `h(θ)` on a uniform grid in the tangent angle `θ`. [`flow`] integrates either
//! form up to an area floor near the blow-up time, [`geometry`] computes the
//! observables of each snapshot, and [`diagnostics`] checks the inequalities
//! and asymptotic laws along a trajectory.

// `!(x > 0.0)` is used on purpose so that NaN fails positivity checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod error;
pub mod flow;
pub mod geometry;
pub mod io;
pub mod oracle;
pub mod spectral;
pub mod speed_law;

pub use error::{DiagnosticsError, FlowError, GeometryError, IoError, LawError, OracleError};
pub use geometry::{CurvatureProfile, GeometrySummary, PlaneCurve, SupportProfile};
pub use spectral::{AngleGrid, DiffScheme};
pub use speed_law::{HypothesisReport, SpeedLaw};
