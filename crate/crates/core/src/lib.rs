//! Diagonal Fisher information for exponential-family networks.
//!
//! * [`expfam`]: output heads and their cumulants up to fourth order
//! * [`network`]: MLPs with exact per-parameter Jacobian rows and diagonal Hessians
//! * [`estimators`]: the two sampling estimators, their closed-form variances,
//!   the joint decomposition and the empirical Fisher
//! * [`bounds`]: eigenvalue and Z-eigenvalue bounds on all of the above
//! * [`oracle`]: finite differences, enumeration and Monte Carlo references

pub mod bounds;
pub mod error;
pub mod estimators;
pub mod expfam;
pub mod linalg;
pub mod network;
pub mod oracle;
pub mod rng;
pub mod tensor;

pub use bounds::{BoundKind, BoundPair, DiagFimReport, ZEigResult};
pub use error::{Error, Result};
pub use estimators::{DiagFimSample, EstimatorKind, ExactConditionalReport, InputMode};
pub use expfam::{Family, MomentSet, NaturalParamHead};
pub use linalg::Matrix;
pub use network::{Activation, Checkpoint, DerivativeBundle, MlpNetwork, ParamGroup};
pub use oracle::McSummary;
pub use tensor::Tensor4;
