//! Numerics for hybrid classical-quantum wiretap channels: channel
//! families, private-information envelopes, classification, thresholds,
//! preprocessing-boosted rates and an additivity probe for qcc channels.

// `!(x >= 0.0)` is used on purpose so NaN fails validation; indexed loops
// mirror the matrix formulas.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod additivity;
pub mod channels;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod optim;
pub mod preprocessing;
pub mod private_info;
pub mod random;
pub mod tolerances;

pub use additivity::{AdditivityReport, QccChannel, QuantumEnsemble};
pub use channels::{
    quantum_bob, quantum_eve, ChannelConfig, ClassicalChannel, CqChannel, Family,
    InputDistribution, WiretapChannel,
};
pub use error::{Error, Result};
pub use linalg::{DensityMatrix, HermitianMatrix, PureState, C64};
pub use preprocessing::{CurveFamily, CurvePoint, OptimizedRate, Preprocessor, RepRateBreakdown};
pub use private_info::{ClassificationReport, EnvelopeResult, Flag, ThresholdKind};
pub use tolerances::Tolerances;
