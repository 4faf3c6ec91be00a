//! Measure how well a set of phishing bait documents was matched to its
//! recipients.
//!
//! The pipeline is: [`corpus`] turns document text into n-gram streams,
//! [`vectorizer`] builds a boolean-tf / smoothed-idf matrix over the joint
//! corpus, [`similarity`] compares the cosine-similarity distribution of the
//! observed attack pairs to that of all possible pairs, and [`lsa`] projects
//! the documents onto truncated-SVD components to look for attacker
//! clusters. [`report`] runs all of it end to end; [`synth`] generates
//! campaigns with a known targeting strength.

pub mod corpus;
pub mod error;
pub mod lsa;
pub mod report;
pub mod similarity;
pub mod stats;
pub mod synth;
pub mod vectorizer;

pub use error::{Error, Result};
