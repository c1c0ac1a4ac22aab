//! Bounds on the achievable region of distributed information-theoretic
//! biclustering.
//!
//! Two encoders see correlated sources `x` and `z` and must produce
//! descriptions whose mutual information (the *co-information*) is as large
//! as possible at given rates. This crate evaluates the single-letter inner
//! and outer bounds on the region of `(mu, R1, R2)` triples, their
//! multi-source and CEO/information-bottleneck specializations, and checks
//! them against exhaustive small-blocklength code searches.
//!
//! All quantities are in nats.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`probability`] | labeled joint pmfs, channels, entropy and (conditional) mutual information |
//! | [`regions`] | point evaluators and membership tests for every bound |
//! | [`optimize`] | seeded sampling, support functions, concave envelopes, binary-source curves |
//! | [`typicality`] | method of types and the brute-force code oracle |

pub mod error;
pub mod optimize;
pub mod probability;
pub mod regions;
pub mod typicality;

pub use error::{Error, Result};
