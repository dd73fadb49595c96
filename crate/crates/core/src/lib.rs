//! Autocorrelation recovery from one-bit measurements with time-varying thresholds.

pub mod arcsine;
pub mod bussgang;
pub mod error;
pub mod integrate;
pub mod io;
pub mod optimize;
pub mod pade;
pub mod protocol;
pub mod quadrature;
pub mod recovery;
pub mod rng;
pub mod signal;
pub mod special;

pub use bussgang::BussgangConstants;
pub use arcsine::{EffectiveParams, LagParams, TailFn};
pub use error::{Error, Result};
pub use quadrature::{GLRule, McNodes};
pub use recovery::{Forward, Method, RecoveryOptions, RecoveryResult};
pub use pade::{PadeApproximant, PadeOptions, PiecewiseModel};
pub use signal::{SampleStats, SignDataset, SignalModel, ThresholdModel};
pub use special::Probability;
