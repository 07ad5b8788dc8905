//! Brute-force reference implementations used to certify the optimized code.
//!
//! Nothing here calls into `exact_test`, `testability`, `miner`, or `engine`;
//! the point is to recompute their answers from scratch. Two levels of
//! reference exist:
//!
//! * [`rational`]: exact big-rational hypergeometric arithmetic, compared
//!   against the float code with small tolerances;
//! * the private f64 routines below, which follow the same evaluation-order
//!   contract as `exact_test` (see that module's docs) in separately written
//!   code, so brute-force calibration results can be compared to the engine
//!   with zero tolerance.

use crate::error::{Error, Result};
use crate::miner::TransactionDatabase;
use crate::permutation::{LabelVector, PermutationMatrix};

/// Exact hypergeometric arithmetic over big rationals. Slow and only for
/// tiny margins, which is all the tests need.
pub mod rational {
    use num::{BigInt, BigRational, Zero};

    pub fn binom(a: usize, b: usize) -> BigInt {
        if b > a {
            return BigInt::zero();
        }
        num::integer::binomial(BigInt::from(a), BigInt::from(b))
    }

    /// `Pr(cell = a)` for margins (x, n, N), as an exact rational.
    pub fn pmf(x: usize, n: usize, db_size: usize, a: usize) -> BigRational {
        if a > x || a > n || x - a > db_size - n {
            return BigRational::zero();
        }
        let num = binom(n, a) * binom(db_size - n, x - a);
        BigRational::new(num, binom(db_size, x))
    }

    /// One-tailed Fisher p-value: the smaller of the two tail masses.
    pub fn pvalue(x: usize, n: usize, db_size: usize, a: usize) -> BigRational {
        let a_min = (x + n).saturating_sub(db_size);
        let a_max = x.min(n);
        assert!(a >= a_min && a <= a_max, "cell {a} not attainable");
        let left: BigRational = (a_min..=a).map(|k| pmf(x, n, db_size, k)).sum();
        let right: BigRational = (a..=a_max).map(|k| pmf(x, n, db_size, k)).sum();
        left.min(right)
    }

    /// Minimum attainable one-tailed p-value at support `x`, straight from
    /// the definition: minimize over every attainable cell count.
    pub fn min_attainable(x: usize, n: usize, db_size: usize) -> BigRational {
        let a_min = (x + n).saturating_sub(db_size);
        let a_max = x.min(n);
        (a_min..=a_max)
            .map(|a| pvalue(x, n, db_size, a))
            .min()
            .expect("margin range is never empty")
    }
}

// f64 reference path. Deliberately mirrors the numeric contract of the
// optimized code (cumulative log-factorials, symmetric log-binomials, tails
// summed from the outside in) without sharing any of it.

struct LnFact(Vec<f64>);

impl LnFact {
    fn new(max: usize) -> Self {
        let mut v = vec![0.0f64; max + 1];
        for i in 1..=max {
            v[i] = v[i - 1] + (i as f64).ln();
        }
        LnFact(v)
    }

    fn lchoose(&self, a: usize, b: usize) -> f64 {
        self.0[a] - (self.0[b] + self.0[a - b])
    }
}

/// All Fisher p-values attainable at the given margins, indexed by
/// `cell - a_min`. Returns `(a_min, values)`.
fn fisher_pvalues(lf: &LnFact, x: usize, n: usize, db_size: usize, two_tailed: bool) -> (usize, Vec<f64>) {
    let a_min = (x + n).saturating_sub(db_size);
    let a_max = x.min(n);
    let probs: Vec<f64> = (a_min..=a_max)
        .map(|a| (lf.lchoose(n, a) + lf.lchoose(db_size - n, x - a) - lf.lchoose(db_size, x)).exp())
        .collect();
    let mut lower = 0.0f64;
    let mut out = vec![0.0f64; probs.len()];
    for (i, p) in probs.iter().enumerate() {
        lower += p;
        out[i] = lower;
    }
    let mut upper = 0.0f64;
    for (i, p) in probs.iter().enumerate().rev() {
        upper += p;
        if upper < out[i] {
            out[i] = upper;
        }
    }
    if two_tailed {
        for v in &mut out {
            *v = (2.0 * *v).min(1.0);
        }
    }
    (a_min, out)
}

/// Guard rails for the exponential-time routines below.
#[derive(Clone, Copy, Debug)]
pub struct OracleLimits {
    pub max_items: usize,
    pub max_db_size: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_items: 12, max_db_size: 32 }
    }
}

impl OracleLimits {
    fn check(&self, db: &TransactionDatabase) -> Result<()> {
        if db.items().len() > self.max_items {
            return Err(Error::LimitsExceeded {
                reason: format!("{} items exceed the cap of {}", db.items().len(), self.max_items),
            });
        }
        if db.transaction_count() > self.max_db_size {
            return Err(Error::LimitsExceeded {
                reason: format!(
                    "{} transactions exceed the cap of {}",
                    db.transaction_count(),
                    self.max_db_size
                ),
            });
        }
        Ok(())
    }
}

/// A pattern found by exhaustive enumeration. Items ascend.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BruteForcePattern {
    pub itemset: Vec<u32>,
    pub support: usize,
    pub occurrences: Vec<usize>,
}

/// Every one of the 2^M - 1 non-empty itemsets with its exact support,
/// support-0 itemsets included; downstream consumers filter as needed.
pub fn brute_force_all_patterns(
    db: &TransactionDatabase,
    limits: &OracleLimits,
) -> Result<Vec<BruteForcePattern>> {
    limits.check(db)?;
    let items = db.items();
    let mut out = Vec::with_capacity((1usize << items.len()).saturating_sub(1));
    for mask in 1u32..(1u32 << items.len()) {
        let mut itemset = Vec::new();
        let mut occurrences: Vec<usize> = (0..db.transaction_count()).collect();
        for (idx, &item) in items.iter().enumerate() {
            if mask & (1 << idx) != 0 {
                itemset.push(item);
                let base = db.occurrences_of(item);
                occurrences.retain(|t| base.binary_search(t).is_ok());
            }
        }
        let support = occurrences.len();
        out.push(BruteForcePattern { itemset, support, occurrences });
    }
    Ok(out)
}

/// The naive calibration: every pattern's p-value under every permutation,
/// exact columnwise minima over patterns with support in [1, N-1], then the
/// largest sample value whose empirical FWER passes. Returns
/// `(delta_star, min_pvalues)`.
pub fn brute_force_delta(
    db: &TransactionDatabase,
    labels: &LabelVector,
    matrix: &PermutationMatrix,
    alpha: f64,
    two_tailed: bool,
    limits: &OracleLimits,
) -> Result<(f64, Vec<f64>)> {
    let n = labels.class_size();
    let db_size = labels.db_size();
    let permutations = matrix.permutations();
    let lf = LnFact::new(db_size);

    let mut mins = vec![1.0f64; permutations];
    for pattern in brute_force_all_patterns(db, limits)? {
        if pattern.support == 0 || pattern.support == db_size {
            continue;
        }
        let (a_min, pvals) = fisher_pvalues(&lf, pattern.support, n, db_size, two_tailed);
        for (j, m) in mins.iter_mut().enumerate() {
            let mut a = 0usize;
            for &t in &pattern.occurrences {
                a += matrix.entry(t, j) as usize;
            }
            let p = pvals[a - a_min];
            if p < *m {
                *m = p;
            }
        }
    }

    let mut delta_star = 0.0f64;
    for &candidate in &mins {
        if candidate < 1.0 && candidate > delta_star && brute_force_fwer(&mins, candidate) <= alpha {
            delta_star = candidate;
        }
    }
    Ok((delta_star, mins))
}

/// Independent re-count of the empirical FWER estimator.
pub fn brute_force_fwer(min_pvalues: &[f64], delta: f64) -> f64 {
    let mut hits = 0usize;
    for &p in min_pvalues {
        if p <= delta {
            hits += 1;
        }
    }
    hits as f64 / min_pvalues.len() as f64
}

/// A significant pattern per the exhaustive scan.
#[derive(Clone, Debug, PartialEq)]
pub struct BruteForceSignificant {
    pub itemset: Vec<u32>,
    pub support: usize,
    pub minor_count: usize,
    pub pvalue: f64,
}

/// Every pattern whose observed p-value clears `delta`, by scanning all of
/// them; sorted by ascending p-value, ties by itemset.
pub fn brute_force_significant(
    db: &TransactionDatabase,
    labels: &LabelVector,
    delta: f64,
    two_tailed: bool,
    limits: &OracleLimits,
) -> Result<Vec<BruteForceSignificant>> {
    let n = labels.class_size();
    let db_size = labels.db_size();
    let lf = LnFact::new(db_size);
    let mut out = Vec::new();
    for pattern in brute_force_all_patterns(db, limits)? {
        if pattern.support == 0 || pattern.support == db_size {
            continue;
        }
        let (a_min, pvals) = fisher_pvalues(&lf, pattern.support, n, db_size, two_tailed);
        let mut a = 0usize;
        for &t in &pattern.occurrences {
            a += labels.labels()[t] as usize;
        }
        let pvalue = pvals[a - a_min];
        if pvalue <= delta {
            out.push(BruteForceSignificant {
                itemset: pattern.itemset,
                support: pattern.support,
                minor_count: a,
                pvalue,
            });
        }
    }
    out.sort_by(|x, y| {
        x.pvalue.partial_cmp(&y.pvalue).expect("p-values are finite").then(x.itemset.cmp(&y.itemset))
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::miner::parse_fimi;
    use crate::permutation::load_permutations;
    use num::ToPrimitive;

    #[test]
    fn rational_pmf_tiny() {
        let p = rational::pmf(2, 2, 4, 1);
        assert_eq!(p, num::BigRational::new(4.into(), 6.into()));
    }

    #[test]
    fn rational_pvalue_tiny() {
        let p = rational::pvalue(2, 2, 4, 2);
        assert_eq!(p, num::BigRational::new(1.into(), 6.into()));
    }

    #[test]
    fn rational_min_attainable_tiny() {
        // Psi(2) for n=2, N=6 is 1/15.
        let p = rational::min_attainable(2, 2, 6);
        assert_eq!(p, num::BigRational::new(1.into(), 15.into()));
    }

    #[test]
    fn f64_reference_tracks_rationals() {
        let lf = LnFact::new(20);
        for &(x, n, db) in &[(3usize, 4usize, 13usize), (6, 5, 20), (2, 2, 4), (10, 7, 18)] {
            let (a_min, vals) = fisher_pvalues(&lf, x, n, db, false);
            for (i, &v) in vals.iter().enumerate() {
                let exact = rational::pvalue(x, n, db, a_min + i).to_f64().unwrap();
                assert!((v - exact).abs() <= 1e-9 * exact.max(1e-300));
            }
        }
    }

    #[test]
    fn all_patterns_of_three_items() {
        let db = parse_fimi("1 2\n1\n2\n").unwrap();
        let all = brute_force_all_patterns(&db, &OracleLimits::default()).unwrap();
        assert_eq!(all.len(), 3);
        let support = |items: &[u32]| {
            all.iter().find(|p| p.itemset == items).map(|p| p.support).unwrap()
        };
        assert_eq!(support(&[1]), 2);
        assert_eq!(support(&[2]), 2);
        assert_eq!(support(&[1, 2]), 1);

        let db = parse_fimi("1 2 3\n").unwrap();
        assert_eq!(brute_force_all_patterns(&db, &OracleLimits::default()).unwrap().len(), 7);

        let db = parse_fimi("\n\n").unwrap();
        assert!(brute_force_all_patterns(&db, &OracleLimits::default()).unwrap().is_empty());
    }

    #[test]
    fn limits_are_enforced() {
        let items: Vec<String> = (1..=13).map(|i| i.to_string()).collect();
        let db = parse_fimi(&items.join(" ")).unwrap();
        assert!(matches!(
            brute_force_all_patterns(&db, &OracleLimits::default()),
            Err(Error::LimitsExceeded { .. })
        ));

        let text = "1\n".repeat(33);
        let db = parse_fimi(&text).unwrap();
        assert!(matches!(
            brute_force_all_patterns(&db, &OracleLimits::default()),
            Err(Error::LimitsExceeded { .. })
        ));
    }

    #[test]
    fn fwer_recount() {
        let mins = [0.01, 0.2, 0.03, 0.5];
        assert!((brute_force_fwer(&mins, 0.05) - 0.5).abs() < 1e-15);
        assert_eq!(brute_force_fwer(&mins, 0.0), 0.0);
        assert_eq!(brute_force_fwer(&mins, 1.0), 1.0);
    }

    #[test]
    fn identical_columns_give_identical_minima() {
        let db = parse_fimi("1\n1 2\n2\n\n").unwrap();
        let y = LabelVector::from_raw(vec![1, 0, 1, 0]).unwrap();
        let m = load_permutations("1 0 1 0\n1 0 1 0\n1 0 1 0\n", &y).unwrap();
        let (_, mins) = brute_force_delta(&db, &y, &m, 0.05, false, &OracleLimits::default()).unwrap();
        assert_eq!(mins.len(), 3);
        assert_eq!(mins[0], mins[1]);
        assert_eq!(mins[1], mins[2]);
    }

    #[test]
    fn single_pattern_database_minimum_is_its_pvalue() {
        // one item with support 2 in N=4; each column's minimum must be the
        // p-value of that single pattern under that column.
        let db = parse_fimi("1\n1\n\n\n").unwrap();
        let y = LabelVector::from_raw(vec![1, 0, 1, 0]).unwrap();
        let m = load_permutations("1 0 1 0\n0 0 1 1\n", &y).unwrap();
        let (_, mins) = brute_force_delta(&db, &y, &m, 0.05, false, &OracleLimits::default()).unwrap();

        let lf = LnFact::new(4);
        let (a_min, pvals) = fisher_pvalues(&lf, 2, 2, 4, false);
        // column 0: occurrences {0,1} hit labels {1,0} -> a=1
        assert_eq!(mins[0], pvals[1 - a_min]);
        // column 1: occurrences {0,1} hit labels {0,0} -> a=0
        assert_eq!(mins[1], pvals[0 - a_min]);
    }
}
