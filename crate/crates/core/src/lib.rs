//! Exact-arithmetic Pythagorean triple factory with a hard-negative attack
//! suite, a binary64 representability analyzer and feature extraction.

pub mod cli;
pub mod error;
pub mod exact_num;
pub mod factory;
pub mod features;
pub mod float_wall;
pub mod hnd;
pub mod rng;
pub mod triple_gen;

pub use error::{Error, Result};
pub use exact_num::{DigitSeq, ExactInt};
pub use factory::{DatasetConfig, Plan, ShardManifest};
pub use features::{FeatureVector, NumericPath};
pub use float_wall::{DoubleImage, FloatWallReport, WallRow};
pub use hnd::{apply_attack, Attack, Base, LabeledSample, Registry};
pub use rng::SampleRng;
pub use triple_gen::{classify, stifel, verify_equation, GenParams, Label, Triple};
