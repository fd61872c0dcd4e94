//! Asymmetric numeral systems: uABS, rANS, streaming rANS and tANS, with
//! length-bound analysis and a byte-exact container.

pub mod abs;
pub mod analysis;
pub mod container;
pub mod error;
pub mod model;
pub mod rans;
pub mod source;
pub mod stream;
pub mod tans;

pub use error::{Error, Result};
pub use model::{QuantizedModel, SourceDistribution};
