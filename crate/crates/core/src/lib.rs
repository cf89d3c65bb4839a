//! Logical error rate estimation for stabilizer error-correction circuits.
//!
//! The crate is organised bottom-up:
//!
//! - [`circuit`]: circuit model, text format, code generators, fault locations
//! - [`qepg`]: per-fault detector/observable flip table, evaluated by XOR
//! - [`decoder`]: lookup and minimum-weight matching decoders
//! - [`sampling`]: fixed-weight and i.i.d. fault injection with reproducible RNG
//! - [`scurve`]: S-curve models, Y-curve fitting, sweet spot and saturation weights
//! - [`pipeline`]: the adaptive sampling driver and the binomially weighted estimate

pub mod circuit;
pub mod decoder;
pub mod pipeline;
pub mod qepg;
pub mod sampling;
pub mod scurve;

pub use circuit::{Circuit, CodeFamily, CodeSpec};
pub use decoder::{Decoder, LookupDecoder, MatchingDecoder};
pub use qepg::{Pauli, Qepg};
pub use sampling::{SamplerConfig, SubspaceStats};
pub use scurve::{FitResult, SCurveModel, Variant};
