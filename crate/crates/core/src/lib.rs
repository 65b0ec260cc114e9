//! Stance classification for microblog posts about Traditional Chinese
//! Medicine (TCM).
//!
//! The pipeline ingests posts and user profiles, flattens retweet chains,
//! normalizes and segments the text, labels posts through the stance
//! implied by their author's profile tags, ranks unigram features with the
//! chi-square statistic and trains a class-weighted linear SVM. Predictions
//! can then be smoothed per user and aggregated into time series and
//! keyword reports.
//!
//! A seeded synthetic corpus generator ([`synth`]) makes every stage
//! testable without access to real microblog data.

pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod pipeline;
pub mod preprocess;
pub mod report;
pub mod resources;
pub mod stance;
pub mod supervision;
pub mod svm;
pub mod synth;

pub use error::{Error, Result};
pub use stance::Stance;
