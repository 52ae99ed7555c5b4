//! Polar secrecy codes over binary erasure wiretap channels.
//!
//! The crate covers code construction from exact bit-channel erasure
//! probabilities, encoding and successive-cancellation decoding, lower and
//! upper bounds on the mutual-information leakage to the eavesdropper, exact
//! and Monte Carlo leakage evaluation, and finite-length scaling sweeps.

pub mod bec;
pub mod codec;
pub mod error;
pub mod gf2;
pub mod leakage;
pub mod scaling;
pub mod scheme;

pub use bec::{BecParam, BitChannelTable};
pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector};
pub use leakage::{LeakageBounds, McEstimate};
pub use scaling::{ExponentFit, ScalingPoint};
pub use scheme::{ReliabilityEstimate, SecrecyPartition, WiretapConfig};
