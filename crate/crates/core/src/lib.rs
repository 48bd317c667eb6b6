//! Blow-acoustic and face multi-factor authentication.
//!
//! A session is a short recording of a user blowing at a microphone. It is
//! reduced to an RMS envelope, smoothed, and compared against enrolled
//! sessions with one of several elastic distance kernels. A face embedding
//! channel can be fused with the blow channel after min-max normalisation.
//! Per-user thresholds are calibrated from leave-one-out genuine scores.
//!
//! ```
//! use blowmatch::{BlowSeries, Kernel};
//!
//! let a = BlowSeries::new(vec![0.0, 1.0, 2.0, 1.0], 0.02).unwrap();
//! let b = BlowSeries::new(vec![0.0, 0.0, 1.0, 2.0, 1.0], 0.02).unwrap();
//! let d = Kernel::default().distance(&a, &b).unwrap();
//! assert_eq!(d, 0.0);
//! ```

pub mod artifacts;
pub mod cli;
pub mod dataset;
pub mod dba;
pub mod error;
pub mod evaluation;
pub mod face;
pub mod fusion;
pub mod kernels;
pub mod report;
pub mod signal;

pub use dataset::{Dataset, Mode, ModeFilter, SessionRecord, SynthParams};
pub use error::{Error, Result};
pub use evaluation::{eer, Evaluator, ReportRow, TargetRecall};
pub use face::{cosine_distance, FaceEmbedding, EMBEDDING_DIM};
pub use fusion::{
    authenticate, Channel, Decision, DecisionConfig, FusionWeights, KnnAggregation, Threshold,
};
pub use kernels::{Kernel, ScoreMatrix};
pub use report::EvalReport;
pub use signal::{preprocess_session, BlowSeries, PreprocessConfig, RawAudio};
