//! Cost-model and experiment-support computations: how many patterns live
//! at each support, what a testability region costs to process, analytic
//! memory estimates for both calibration strategies, and the FWER-vs-J
//! sweep behind the calibration-quality plots.

use crate::engine::compute_threshold;
use crate::error::{Error, Result};
use crate::exact_test::PValueMode;
use crate::miner::{enumerate_frequent, ConstantFloor, PatternEvent, TransactionDatabase};
use crate::oracle::{brute_force_all_patterns, OracleLimits};
use crate::permutation::{generate_permutations, LabelVector};
use crate::testability::ThresholdState;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pattern count per support value. `exhaustive` records whether every
/// itemset was counted (oracle enumeration) or only the ones a floored
/// mining pass visits; partial histograms undercount low supports.
#[derive(Clone, Debug)]
pub struct SupportHistogram {
    counts: Vec<u64>,
    exhaustive: bool,
}

impl SupportHistogram {
    /// Counts every itemset with nonzero support. Exponential in the
    /// alphabet, hence limited to oracle-sized inputs.
    pub fn exhaustive(db: &TransactionDatabase, limits: &OracleLimits) -> Result<Self> {
        let mut counts = vec![0u64; db.transaction_count() + 1];
        for pattern in brute_force_all_patterns(db, limits)? {
            if pattern.support >= 1 {
                counts[pattern.support] += 1;
            }
        }
        Ok(SupportHistogram { counts, exhaustive: true })
    }

    /// Counts the patterns a single mining pass at `floor` visits.
    pub fn mined(db: &TransactionDatabase, floor: usize) -> Self {
        let mut counts = vec![0u64; db.transaction_count() + 1];
        let mut visitor = ConstantFloor {
            floor,
            callback: |event: &PatternEvent| {
                counts[event.support] += 1;
            },
        };
        enumerate_frequent(db, &mut visitor);
        SupportHistogram { counts, exhaustive: false }
    }

    pub fn count(&self, support: usize) -> u64 {
        self.counts.get(support).copied().unwrap_or(0)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn is_exhaustive(&self) -> bool {
        self.exhaustive
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    #[cfg(test)]
    pub(crate) fn from_counts(counts: Vec<u64>, exhaustive: bool) -> Self {
        SupportHistogram { counts, exhaustive }
    }
}

/// Weighted and unweighted pattern mass inside a testability region:
/// the weighted sum prices each pattern by its occurrence-list length,
/// the unweighted sum just counts region members.
pub fn dataset_cost(hist: &SupportHistogram, region: &ThresholdState) -> (u64, u64) {
    let mut weighted = 0u64;
    let mut members = 0u64;
    for (support, &count) in hist.counts.iter().enumerate() {
        if count > 0 && region.is_testable(support) {
            weighted += support as u64 * count;
            members += count;
        }
    }
    (weighted, members)
}

/// Analytic peak-memory models, not measurements: the shared-matrix
/// strategy stores one byte per transaction and permutation; the
/// per-permutation strategy stores occurrence lists costing four bytes
/// per occurrence over the priced region.
pub fn memory_estimates(db_size: usize, permutations: usize, region_cost: u64) -> (u64, u64) {
    (db_size as u64 * permutations as u64, 4 * region_cost)
}

/// One aggregate of `fwer_sweep`: the spread of the empirical FWER at the
/// calibrated threshold across repetitions at a fixed permutation count.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub permutations: usize,
    pub median_fwer: f64,
    pub p05: f64,
    pub p95: f64,
}

/// Linear-interpolation quantile on an ascending slice.
pub(crate) fn quantile(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let position = q * (sorted.len() - 1) as f64;
    let lower = position.floor() as usize;
    let upper = position.ceil() as usize;
    let fraction = position - lower as f64;
    sorted[lower] + fraction * (sorted[upper] - sorted[lower])
}

/// Repeatedly calibrates with fresh matrices at each permutation count and
/// aggregates the empirical FWER at the resulting thresholds. Matrix seeds
/// are drawn from one stream keyed by `seed`, so the whole sweep is
/// reproducible and rows stay independent of each other's repetition
/// counts.
pub fn fwer_sweep(
    db: &TransactionDatabase,
    labels: &LabelVector,
    alpha: f64,
    j_values: &[usize],
    repetitions: usize,
    seed: u64,
) -> Result<Vec<SweepRow>> {
    if repetitions == 0 {
        return Err(Error::InvalidConfig { reason: "repetitions must be at least 1".into() });
    }
    if j_values.iter().any(|&j| j == 0) {
        return Err(Error::InvalidConfig { reason: "permutation counts must be positive".into() });
    }
    let mut seeder = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(j_values.len());
    for &j in j_values {
        let mut fwers = Vec::with_capacity(repetitions);
        for _ in 0..repetitions {
            let matrix = generate_permutations(labels, j, seeder.next_u64());
            let result = compute_threshold(db, labels, &matrix, alpha, PValueMode::OneTailed)?;
            fwers.push(result.fwer_at_delta_star);
        }
        fwers.sort_by(|a, b| a.partial_cmp(b).expect("FWER values are finite"));
        rows.push(SweepRow {
            permutations: j,
            median_fwer: quantile(&fwers, 0.5),
            p05: quantile(&fwers, 0.05),
            p95: quantile(&fwers, 0.95),
        });
    }
    Ok(rows)
}

/// CSV for the sweep: a header and one row per permutation count.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("J,median_fwer,p05,p95\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.permutations, row.median_fwer, row.p05, row.p95
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact_test::PsiTable;
    use crate::miner::parse_fimi;
    use crate::test_support::{random_db, random_labels};
    use rand::rngs::StdRng;

    #[test]
    fn exhaustive_histogram_counts_every_itemset() {
        let db = parse_fimi("1 2\n1 2 3\n2\n").unwrap();
        let hist = SupportHistogram::exhaustive(&db, &OracleLimits::default()).unwrap();
        // {3},{1,3},{2,3},{1,2,3} live only in the middle transaction;
        // {1},{1,2} appear twice; {2} is everywhere
        assert_eq!(hist.count(1), 4);
        assert_eq!(hist.count(2), 2);
        assert_eq!(hist.count(3), 1);
        assert_eq!(hist.total(), 7);
        assert!(hist.is_exhaustive());
    }

    #[test]
    fn mined_histogram_matches_exhaustive_at_floor_one() {
        let mut rng = StdRng::seed_from_u64(8);
        let db = random_db(&mut rng, 10, 6, 0.5);
        let full = SupportHistogram::exhaustive(&db, &OracleLimits::default()).unwrap();
        let mined = SupportHistogram::mined(&db, 1);
        assert_eq!(full.counts(), mined.counts());
        assert!(!mined.is_exhaustive());

        // a raised floor drops exactly the low-support patterns
        let floored = SupportHistogram::mined(&db, 3);
        for x in 0..3 {
            assert_eq!(floored.count(x), 0);
        }
        for x in 3..=10 {
            assert_eq!(floored.count(x), full.count(x));
        }
    }

    #[test]
    fn cost_of_the_three_transaction_example() {
        // db {1}, {1 2}, {2}: one support-1 pattern and two support-2
        let db = parse_fimi("1\n1 2\n2\n").unwrap();
        let hist = SupportHistogram::exhaustive(&db, &OracleLimits::default()).unwrap();
        assert_eq!(hist.count(1), 1);
        assert_eq!(hist.count(2), 2);
        let psi = PsiTable::new(1, 3);
        let region = ThresholdState::init(&psi);
        // region spans supports 1 and 2: C = 1*1 + 2*2, member count 3
        assert_eq!(dataset_cost(&hist, &region), (5, 3));
    }

    #[test]
    fn empty_or_disjoint_regions_cost_nothing() {
        let psi = PsiTable::new(1, 3);
        let region = ThresholdState::init(&psi);
        let empty = SupportHistogram::from_counts(vec![0; 4], false);
        assert_eq!(dataset_cost(&empty, &region), (0, 0));

        // all mass on untestable supports 0 and N
        let disjoint = SupportHistogram::from_counts(vec![5, 0, 0, 7], false);
        assert_eq!(dataset_cost(&disjoint, &region), (0, 0));
    }

    #[test]
    fn cost_shrinks_as_the_region_narrows() {
        let mut rng = StdRng::seed_from_u64(21);
        let db = random_db(&mut rng, 16, 6, 0.5);
        let hist = SupportHistogram::exhaustive(&db, &OracleLimits::default()).unwrap();
        let psi = PsiTable::new(6, 16);
        let mut state = ThresholdState::init(&psi);
        let (mut weighted, mut members) = dataset_cost(&hist, &state);
        while state.update(&psi).is_ok() {
            let (w, m) = dataset_cost(&hist, &state);
            assert!(w <= weighted && m <= members, "cost grew at k={}", state.k());
            weighted = w;
            members = m;
        }
    }

    #[test]
    fn memory_models_are_products() {
        let (wy, fw) = memory_estimates(958, 10_000, 123);
        assert_eq!(wy, 9_580_000);
        assert_eq!(fw, 492);
        assert_eq!(memory_estimates(958, 0, 7).0, 0);
    }

    #[test]
    fn quantiles_interpolate_linearly() {
        assert_eq!(quantile(&[4.0], 0.5), 4.0);
        assert_eq!(quantile(&[1.0, 3.0], 0.5), 2.0);
        assert_eq!(quantile(&[1.0, 3.0], 0.0), 1.0);
        assert_eq!(quantile(&[1.0, 3.0], 1.0), 3.0);
        // position 0.05 * 2 = 0.1 between the first two entries
        let v = quantile(&[0.0, 1.0, 2.0], 0.05);
        assert!((v - 0.1).abs() < 1e-12);
    }

    #[test]
    fn single_repetition_sweep_reports_the_value_everywhere() {
        let mut rng = StdRng::seed_from_u64(40);
        let db = random_db(&mut rng, 12, 5, 0.5);
        let labels = random_labels(&mut rng, 12, 6);
        let rows = fwer_sweep(&db, &labels, 0.1, &[20], 1, 5).unwrap();
        assert_eq!(rows.len(), 1);
        let row = &rows[0];
        assert_eq!(row.permutations, 20);
        assert_eq!(row.median_fwer, row.p05);
        assert_eq!(row.median_fwer, row.p95);
        assert!(row.median_fwer <= 0.1);
    }

    #[test]
    fn sweep_rows_stay_within_alpha_and_serialize() {
        let mut rng = StdRng::seed_from_u64(41);
        let db = random_db(&mut rng, 14, 5, 0.5);
        let labels = random_labels(&mut rng, 14, 7);
        let rows = fwer_sweep(&db, &labels, 0.25, &[20, 40], 3, 11).unwrap();
        assert_eq!(rows.len(), 2);
        for row in &rows {
            assert!(row.p05 <= row.median_fwer && row.median_fwer <= row.p95);
            assert!(row.p95 <= 0.25);
        }
        let csv = sweep_csv(&rows);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "J,median_fwer,p05,p95");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("20,"));
        assert!(lines[2].starts_with("40,"));
    }

    #[test]
    fn sweep_rejects_degenerate_requests() {
        let mut rng = StdRng::seed_from_u64(42);
        let db = random_db(&mut rng, 8, 3, 0.5);
        let labels = random_labels(&mut rng, 8, 4);
        assert!(fwer_sweep(&db, &labels, 0.1, &[10], 0, 0).is_err());
        assert!(fwer_sweep(&db, &labels, 0.1, &[0], 2, 0).is_err());
    }
}
