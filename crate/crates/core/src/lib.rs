//! Achievable-rate toolkit for the two-user Gaussian multiple access channel
//! with finite-alphabet (QAM-family) inputs.
//!
//! The crate computes
//!
//! * sum rates `I(X1,X2;Y)` of the two-user GMAC,
//! * secrecy sum rates of its degraded wiretap variant (an eavesdropper
//!   observing the same superposition through a noisier channel),
//!
//! for inputs drawn uniformly from finite constellations: square QAM,
//! cross QAM, hexagonal QAM, star QAM and APSK, plus arbitrary custom
//! point sets.
//!
//! Two independent evaluation routes are provided: reproducible Monte
//! Carlo estimators ([`mi`]) driven by counter-based noise substreams
//! ([`channel`]), and a Gauss-Hermite quadrature oracle ([`oracle`]) that
//! is exact to ~1e-6 bits for small joint alphabets. The [`optimizer`]
//! module sweeps and refines the relative rotation between the two users'
//! constellations, the degree of freedom that controls how many distinct
//! superposition points the receiver sees.
//!
//! All core math is generic over the working scalar via [`Scalar`];
//! concrete `f64`/`f32` aliases are exported at the crate root.

pub mod channel;
pub mod constellation;
pub mod mi;
pub mod optimizer;
pub mod oracle;
mod scalar;

pub use scalar::Scalar;

use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A generator was asked for a modulation order its family cannot produce.
    #[error("invalid order {m} for {family}: admissible orders are {expected}")]
    InvalidOrder {
        family: &'static str,
        m: usize,
        expected: &'static str,
    },
    /// A ring specification is inconsistent (radii, counts or phases).
    #[error("invalid ring spec: {0}")]
    InvalidRingSpec(String),
    /// Normalization of an all-zero constellation was requested.
    #[error("constellation has zero average energy and cannot be normalized")]
    DegenerateEnergy,
    /// Generic precondition violation on an operation's input.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A rate estimator received a constellation that is not unit-energy.
    #[error("constellation '{0}' must be normalized to unit average energy")]
    NotNormalized(String),
    /// Wiretap computations require the eavesdropper channel to be degraded.
    #[error("wiretap channel not degraded: eve noise {sigma2_sq} < main noise {sigma1_sq}")]
    NotDegraded { sigma1_sq: f64, sigma2_sq: f64 },
    /// Joint alphabet too large for the quadrature oracle.
    #[error("joint constellation size {joint} exceeds quadrature limit {limit}")]
    QuadratureTooLarge { joint: usize, limit: usize },
    /// A non-finite value surfaced where the numerics guarantee finiteness.
    /// Reaching this variant indicates a defect, not a user error.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

// Concrete type aliases for the two supported precisions.

pub type Constellation64 = constellation::Constellation<f64>;
pub type Constellation32 = constellation::Constellation<f32>;
pub type RingSpec64 = constellation::RingSpec<f64>;
pub type RingSpec32 = constellation::RingSpec<f32>;
pub type ChannelParams64 = channel::ChannelParams<f64>;
pub type ChannelParams32 = channel::ChannelParams<f32>;
pub type MIEstimate64 = mi::MIEstimate<f64>;
pub type MIEstimate32 = mi::MIEstimate<f32>;
pub type RatePair64 = mi::RatePair<f64>;
pub type SecrecyRates64 = mi::SecrecyRates<f64>;
pub type QuadMiTerms64 = oracle::QuadMiTerms<f64>;
pub type SweepResult64 = optimizer::SweepResult<f64>;
