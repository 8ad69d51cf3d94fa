//! Eventological decision-making over finite set-event universes.
//!
//! Market history is turned into occurred circumstance sets, circumstance
//! sets into value matrices and E-distributions, and those into three kinds
//! of recommendation: a singular policy, a mixed strategy, and the
//! relative-entropy minimizing Gibbs family.
//!
//! Numeric types are generic over [`Scalar`] (`f32` or `f64`); prices and
//! increments are exact decimals ([`Exact`]). The `*64` aliases below fix the
//! scalar to `f64`, which is what the service layer uses.

pub mod decision;
pub mod edist;
pub mod error;
pub mod event_algebra;
pub mod market;
pub mod scalar;
pub mod valuation;

pub use error::{Error, Result};
pub use event_algebra::{
    enumerate_terraces, event_from_terraces, indicator_event, indicator_policy, zeta,
    DerivedEvent, EventFamily, EventSet, JointLayout, PolicyMap, TerraceSet,
};
pub use scalar::{exact_to_scalar, Exact, Scalar};

pub type EDistribution64 = edist::EDistribution<f64>;
pub type JointEDistribution64 = edist::JointEDistribution<f64>;
pub type ConditionalEDistribution64 = edist::ConditionalEDistribution<f64>;
pub type ValueMatrix64 = valuation::ValueMatrix<f64>;
pub type SetValueMatrix64 = valuation::SetValueMatrix<f64>;
pub type ValueFunction64 = valuation::ValueFunction<f64>;
pub type GibbsParams64 = decision::GibbsParams<f64>;
pub type Recommendation64 = decision::Recommendation<f64>;

pub type EDistribution32 = edist::EDistribution<f32>;
pub type ValueFunction32 = valuation::ValueFunction<f32>;
