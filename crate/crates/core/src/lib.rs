//! Geodesics on Gödel-type spacetimes.
//!
//! A Gödel-type spacetime is a product `M0 x R^2` with metric
//! `<.,.>_R + A(x) dy^2 + 2 B(x) dy dt - C(x) dt^2`, where the coefficients
//! depend only on the base point `x` and satisfy `H = B^2 + A C > 0`. The two
//! fiber directions are Killing fields, which makes both boundary-value and
//! initial-value geodesic problems reducible to the base:
//!
//! * [`connect`] minimizes a reduced action over base paths and reconstructs
//!   the fiber components by quadrature,
//! * [`shoot`] integrates the reduced initial-value system with the two
//!   Killing constants and the energy as built-in drift monitors,
//! * [`hypotheses`] runs sampling-based checks of the sufficient conditions
//!   for geodesic connectedness and completeness.
//!
//! Coefficients are arithmetic expressions ([`exprfield`]) with exact
//! forward-mode derivatives; [`spacetime`] holds the metric data and its
//! pointwise spectral quantities; [`pathspace`] evaluates the reduced action
//! and its gradient on discrete paths.

pub mod connect;
pub mod error;
pub mod exprfield;
pub mod hypotheses;
pub mod linalg;
pub mod pathspace;
pub mod shoot;
pub mod spacetime;

pub use connect::{Event, FiberCurves, GeodesicSolution, SolverConfig, StopReason};
pub use error::{Error, Result};
pub use exprfield::{parse_expression, parse_with_constants, ExprAst, FieldSample};
pub use hypotheses::{
    GrowthWitness, HypothesisReport, LinearWitness, Region, RouteReport, TheoremSummary,
    Verdict, WitnessInfo, WitnessSet,
};
pub use pathspace::{BoundaryData, DiagonalizedAction, DiscretePath, PathFunctionals};
pub use shoot::{
    ConservedQuantities, InitialData, ProbeConfig, ProbeReport, ShootConfig, StepControl,
    Termination, Trajectory,
};
pub use spacetime::{BaseMetric, CoefficientSample, SpacetimeSpec, SpectralData, Zoo};
