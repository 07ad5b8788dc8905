//! Significant pattern mining with rigorous family-wise error control.
//!
//! Given a transaction database and a binary class label per transaction,
//! this crate searches for itemsets whose occurrence is significantly
//! associated with the label, correcting for the enormous number of
//! candidate patterns. The corrected significance threshold is calibrated
//! by permutation: the engine computes, for a set of random label
//! permutations, the distribution of the most extreme p-value any pattern
//! attains, and picks the largest threshold whose empirical family-wise
//! error rate stays within the target level.
//!
//! The expensive part, a full mining pass per permutation, is avoided by
//! processing all permutations in one mining pass and pruning the search
//! with minimum attainable p-values: a pattern whose support makes even its
//! best-case p-value exceed the current threshold can be skipped, along with
//! every superset, without affecting the result. Bonferroni, Tarone-style
//! testability correction, and a per-permutation re-mining scheme are
//! implemented as baselines, and a brute-force oracle certifies the whole
//! pipeline on small instances.

pub mod analysis;
pub mod baselines;
pub mod cli;
pub mod engine;
pub mod error;
pub mod miner;
pub mod oracle;
pub mod permutation;
pub mod testability;

#[cfg(test)]
pub(crate) mod test_support;

pub use error::{Error, Result};
