//! End-to-end calibration: one mining pass over the database computes, for
//! every permutation at once, the minimum p-value any testable pattern
//! attains, while the significance threshold adapts downward whenever the
//! empirical FWER overshoots the target.
//!
//! Correctness hinges on one invariant: a pattern skipped as untestable at
//! ladder rung k can only carry p-values at or above the previous rung's
//! threshold. The final minima are therefore exact for every entry below
//! `delta_{k-1}`, and those are the only entries the final threshold can
//! come from, so pruning never changes the answer, bit for bit.

use crate::error::{Error, Result};
use crate::exact_test::{pvalue_table_with, LogFactorials, Margins, PValueMode, PsiTable};
use crate::miner::{enumerate_frequent, ConstantFloor, PatternEvent, PatternVisitor, TransactionDatabase};
use crate::permutation::{cell_counts, LabelVector, MinPValues, PermutationMatrix};
use crate::testability::ThresholdState;

/// Everything a calibration run produced. `min_pvalues` entries at or below
/// `delta_k_minus_1` are exact per-permutation minima over all patterns;
/// larger entries are only guaranteed to exceed `delta_k_minus_1`.
#[derive(Clone, Debug)]
pub struct CalibrationResult {
    pub delta_star: f64,
    pub delta_k_final: f64,
    pub delta_k_minus_1: f64,
    pub k_star: usize,
    pub sigma_l_final: usize,
    pub sigma_u_final: usize,
    pub min_pvalues: MinPValues,
    pub fwer_at_delta_star: f64,
    pub patterns_visited: u64,
    pub testable_visited: u64,
    pub alpha: f64,
    pub permutations: usize,
    pub mode: PValueMode,
    pub flipped: bool,
    /// True when even the smallest attainable threshold failed the FWER
    /// condition; `delta_star` is then necessarily 0.
    pub exhausted: bool,
}

struct CalibrationSink<'a> {
    psi: &'a PsiTable,
    lf: &'a LogFactorials,
    matrix: &'a PermutationMatrix,
    state: ThresholdState,
    mins: MinPValues,
    alpha: f64,
    mode: PValueMode,
    class_size: usize,
    db_size: usize,
    testable_visited: u64,
    exhausted: bool,
}

impl PatternVisitor for CalibrationSink<'_> {
    fn visit(&mut self, event: &PatternEvent) {
        if !self.state.is_testable(event.support) {
            return;
        }
        self.testable_visited += 1;
        let margins = Margins::new(event.support, self.class_size, self.db_size);
        // one table for all J permutations of this pattern
        let table = pvalue_table_with(self.lf, &margins, self.mode);
        let counts = cell_counts(event.occurrences, self.matrix);
        self.mins.update_minimums(&table, &counts);
        // re-check after the full J-wide update, never inside it
        while !self.exhausted && self.mins.empirical_fwer(self.state.delta()) > self.alpha {
            if self.state.update(self.psi).is_err() {
                // smallest threshold still fails; keep mining at the floor
                // so the minima stay exact, the final threshold is 0
                self.exhausted = true;
            }
        }
    }

    fn support_floor(&self) -> usize {
        self.state.sigma_l()
    }
}

pub(crate) fn validate_inputs(
    db: &TransactionDatabase,
    labels: &LabelVector,
    matrix: &PermutationMatrix,
    alpha: f64,
) -> Result<()> {
    if labels.db_size() != db.transaction_count() {
        return Err(Error::InvalidConfig {
            reason: format!(
                "{} labels for {} transactions",
                labels.db_size(),
                db.transaction_count()
            ),
        });
    }
    if matrix.db_size() != labels.db_size() || matrix.class_size() != labels.class_size() {
        return Err(Error::InvalidConfig {
            reason: "permutation matrix does not match the label vector".into(),
        });
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidConfig { reason: format!("alpha {alpha} outside (0, 1]") });
    }
    Ok(())
}

/// Calibrate the corrected significance threshold on one database and one
/// permutation matrix.
pub fn compute_threshold(
    db: &TransactionDatabase,
    labels: &LabelVector,
    matrix: &PermutationMatrix,
    alpha: f64,
    mode: PValueMode,
) -> Result<CalibrationResult> {
    validate_inputs(db, labels, matrix, alpha)?;

    let psi = PsiTable::new(labels.class_size(), labels.db_size());
    let lf = LogFactorials::new(labels.db_size());
    let mut sink = CalibrationSink {
        psi: &psi,
        lf: &lf,
        matrix,
        state: ThresholdState::init(&psi),
        mins: MinPValues::new(matrix.permutations()),
        alpha,
        mode,
        class_size: labels.class_size(),
        db_size: labels.db_size(),
        testable_visited: 0,
        exhausted: false,
    };
    let patterns_visited = enumerate_frequent(db, &mut sink);

    let delta_star = final_delta(&sink.mins, sink.state.delta(), sink.state.prev_delta(), alpha);
    let fwer_at_delta_star = sink.mins.empirical_fwer(delta_star);
    debug_assert!(fwer_at_delta_star <= alpha);
    Ok(CalibrationResult {
        delta_star,
        delta_k_final: sink.state.delta(),
        delta_k_minus_1: sink.state.prev_delta(),
        k_star: sink.state.k(),
        sigma_l_final: sink.state.sigma_l(),
        sigma_u_final: sink.state.sigma_u(),
        min_pvalues: sink.mins,
        fwer_at_delta_star,
        patterns_visited,
        testable_visited: sink.testable_visited,
        alpha,
        permutations: matrix.permutations(),
        mode,
        flipped: labels.flipped(),
        exhausted: sink.exhausted,
    })
}

/// The largest threshold the samples can justify: max over `{0}` and every
/// minimum below `delta_k_minus_1` of the values whose empirical FWER stays
/// within `alpha`. Values at or above `delta_k_minus_1` are not candidates;
/// they may be inexact and their FWER provably overshoots.
///
/// The FWER estimate jumps only at sample values, so this maximum over
/// samples is the exact maximizer over all of `[0, delta_k_minus_1)`
/// restricted to thresholds that change the rejection set.
pub fn final_delta(mins: &MinPValues, delta_k: f64, delta_k_minus_1: f64, alpha: f64) -> f64 {
    debug_assert!(delta_k <= delta_k_minus_1);
    let total = mins.len() as f64;
    let mut sorted = mins.values().to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("p-values are finite"));
    let mut best = 0.0f64;
    for (i, &v) in sorted.iter().enumerate() {
        if v >= delta_k_minus_1 {
            break;
        }
        // evaluate each distinct value once, at its last occurrence, where
        // i + 1 is the full count of entries <= v
        if sorted.get(i + 1) == Some(&v) {
            continue;
        }
        if (i + 1) as f64 / total <= alpha {
            best = v;
        }
    }
    best
}

/// One discovery: a pattern whose observed association clears the
/// calibrated threshold. Items ascend.
#[derive(Clone, Debug, PartialEq)]
pub struct SignificantPattern {
    pub itemset: Vec<u32>,
    pub support: usize,
    pub minor_count: usize,
    pub pvalue: f64,
}

/// Second enumeration pass reporting every significant pattern at the
/// calibrated threshold, sorted by ascending p-value, ties by itemset.
///
/// Only supports with `Psi(x) <= delta_star` can produce a p-value that
/// small, so enumerating from the matching support floor is exhaustive.
pub fn extract_significant(
    db: &TransactionDatabase,
    labels: &LabelVector,
    result: &CalibrationResult,
) -> Vec<SignificantPattern> {
    let psi = PsiTable::new(labels.class_size(), labels.db_size());
    let Some(floor) = psi.support_floor(result.delta_star) else {
        return Vec::new();
    };
    let lf = LogFactorials::new(labels.db_size());
    let mut found = Vec::new();
    let mut visitor = ConstantFloor {
        floor,
        callback: |event: &PatternEvent| {
            if psi.value(event.support) > result.delta_star {
                return;
            }
            let margins = Margins::new(event.support, labels.class_size(), labels.db_size());
            let table = pvalue_table_with(&lf, &margins, result.mode);
            let minor_count =
                event.occurrences.iter().filter(|&&t| labels.labels()[t] == 1).count();
            let pvalue = table.lookup(minor_count);
            if pvalue <= result.delta_star {
                let mut itemset = event.itemset.to_vec();
                itemset.sort_unstable();
                found.push(SignificantPattern {
                    itemset,
                    support: event.support,
                    minor_count,
                    pvalue,
                });
            }
        },
    };
    enumerate_frequent(db, &mut visitor);
    found.sort_by(|a, b| {
        a.pvalue.partial_cmp(&b.pvalue).expect("p-values are finite").then(a.itemset.cmp(&b.itemset))
    });
    found
}
