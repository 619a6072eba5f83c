//! Growth majorants Λ, outer functions with prescribed boundary decay,
//! harmonic measure of arcs, and the moment weights they induce.

use thiserror::Error;

use crate::quad::QuadError;
use crate::weights::WeightError;

pub mod keldys;
pub mod lambda;
pub mod moments;
pub mod outer;

pub use keldys::{keldys_outer_f, KeldysResult};
pub use lambda::{
    integrability_partials, parse_lambda, BoundarySet, IntegrabilityPartial, LambdaMajorant,
    LambdaSpec,
};
pub use moments::moment_weights;
pub use outer::{
    bnorm_estimate, check_lemma4, check_lemma5, harmonic_floor, harmonic_measure_arc,
    harmonic_measure_arc_quad, outer_fdelta, BnormEstimate, HarmonicFloor, Lemma4Report,
    Lemma5Report, OuterFdelta,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GrowthError {
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("unknown lambda family '{0}'")]
    UnknownFamily(String),
    #[error("lambda increases between t = {t1} and t = {t2}")]
    NonMonotone { t1: f64, t2: f64 },
    #[error("lambda is not positive at t = {t}")]
    NonPositive { t: f64 },
    #[error(transparent)]
    Quad(#[from] QuadError),
    #[error("integral diverges: dyadic pieces {prev} then {last} after {levels} levels")]
    Divergent { prev: f64, last: f64, levels: usize },
    #[error("hypothesis 4π²cn ≤ Λ(1/n) violated: ratio 4π²cn/Λ(1/n) = {ratio}")]
    HypothesisViolated { ratio: f64 },
    #[error("sample region |1−z|²/(1−|z|²) ≤ {k} is too small for the grid")]
    EmptyRegion { k: f64 },
    #[error("point outside the open unit disk")]
    OutsideDisk,
    #[error(transparent)]
    Weight(#[from] WeightError),
}
