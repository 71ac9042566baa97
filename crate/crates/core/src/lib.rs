//! Numerical laboratory for tilted empirical risk minimization over quantum
//! samples: risk functionals for classical losses and projector-valued
//! hypotheses, single-copy measurement simulation, threshold search, the
//! block binary-search learner with its agnostic variant, closed-form
//! concentration/PAC bound evaluators with Monte Carlo tail verification,
//! and the tilted Hamiltonian risk functional.
//!
//! All numerics are generic over the scalar type (`f32` or `f64`) through
//! [`scalar::Real`]; the `*F64` aliases at the crate root pin the default
//! double-precision instantiation.

pub mod bounds;
pub mod error;
pub mod learner;
pub mod operator;
pub mod qtr;
pub mod risk;
pub mod scalar;
pub mod search;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Real;

/// Default scalar for the laboratory.
pub type Scalar = f64;

pub type CMatrixF64 = operator::CMatrix<f64>;
pub type DensityOperatorF64 = operator::DensityOperator<f64>;
pub type ProjectorF64 = operator::Projector<f64>;
pub type HermitianOperatorF64 = operator::HermitianOperator<f64>;
pub type LossVectorF64 = risk::LossVector<f64>;
pub type TiltConfigF64 = risk::TiltConfig<f64>;
pub type HypothesisEnsembleF64 = risk::HypothesisEnsemble<f64>;
pub type ProductSampleF64 = sim::ProductSample<f64>;
pub type LearnerParamsF64 = learner::LearnerParams<f64>;
pub type LearnerResultF64 = learner::LearnerResult<f64>;
pub type BoundSpecF64 = bounds::BoundSpec<f64>;
pub type BoundReportF64 = bounds::BoundReport<f64>;
pub type TiltedHamiltonianModelF64 = qtr::TiltedHamiltonianModel<f64>;
