//! Reference correction procedures the calibrated threshold is compared
//! against: plain Bonferroni, the testability-counting search (Tarone/LAMP
//! style), and the per-permutation decremental search (FastWY style).
//!
//! All three share the exact-test machinery with the main engine, so any
//! disagreement between methods is algorithmic, never numerical.

use crate::engine::{final_delta, validate_inputs};
use crate::error::Result;
use crate::exact_test::{pvalue_table_with, LogFactorials, Margins, PValueMode, PsiTable};
use crate::miner::{enumerate_frequent, ConstantFloor, PatternEvent, PatternVisitor, TransactionDatabase};
use crate::permutation::{LabelVector, MinPValues, PermutationMatrix};
use crate::testability::ThresholdState;

/// Independence-based correction: each of the `count` tests gets an equal
/// share of the error budget.
pub fn bonferroni_threshold(count: u64, alpha: f64) -> f64 {
    debug_assert!(count >= 1);
    alpha / count as f64
}

/// Lower bound on the minimum attainable p-value that ignores the upper
/// tail of the support range: exact for supports up to the class size,
/// flat at the global minimum beyond it. Cheap to invert, looser than the
/// exact bound, hence larger testable regions.
#[derive(Clone, Debug)]
pub struct SurrogatePsi {
    values: Vec<f64>,
    class_size: usize,
    db_size: usize,
}

impl SurrogatePsi {
    pub fn new(class_size: usize, db_size: usize) -> Self {
        let psi = PsiTable::new(class_size, db_size);
        let mut values = Vec::with_capacity(db_size + 1);
        values.extend_from_slice(&psi.values()[..=class_size]);
        values.resize(db_size + 1, psi.min_value());
        SurrogatePsi { values, class_size, db_size }
    }

    pub fn value(&self, support: usize) -> f64 {
        self.values[support]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn class_size(&self) -> usize {
        self.class_size
    }

    pub fn db_size(&self) -> usize {
        self.db_size
    }
}

/// Which lower bound the testability search uses: the exact two-armed
/// regions, or the one-interval surrogate bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TaroneVariant {
    ExactRegions,
    SurrogateInterval,
}

/// Largest threshold `delta` on the attainable ladder whose product with
/// the number of testable patterns stays within `alpha`, using exact
/// regions. Returns the threshold and the count; `(0, 0)` when even the
/// smallest rung fails.
pub fn tarone_lamp_threshold(
    db: &TransactionDatabase,
    class_size: usize,
    db_size: usize,
    alpha: f64,
) -> (f64, u64) {
    tarone_lamp_threshold_with(db, class_size, db_size, alpha, TaroneVariant::ExactRegions)
}

pub fn tarone_lamp_threshold_with(
    db: &TransactionDatabase,
    class_size: usize,
    db_size: usize,
    alpha: f64,
    variant: TaroneVariant,
) -> (f64, u64) {
    match variant {
        TaroneVariant::ExactRegions => tarone_exact(db, class_size, db_size, alpha),
        TaroneVariant::SurrogateInterval => tarone_surrogate(db, class_size, db_size, alpha),
    }
}

/// `delta * m(delta)` is non-decreasing in `delta` (both factors are), so
/// the rungs that satisfy the budget form a bottom segment of the ladder
/// and the answer is the first passing rung from the top. Stepping down on
/// a partial count is sound because the count only grows as mining
/// proceeds; a rung that fails early fails finally.
struct TaroneSink<'a> {
    psi: &'a PsiTable,
    state: ThresholdState,
    histogram: Vec<u64>,
    testable: u64,
    alpha: f64,
    exhausted: bool,
}

impl TaroneSink<'_> {
    fn recount(&self) -> u64 {
        self.histogram
            .iter()
            .enumerate()
            .filter(|&(x, _)| self.psi.value(x) <= self.state.delta())
            .map(|(_, &c)| c)
            .sum()
    }
}

impl PatternVisitor for TaroneSink<'_> {
    fn visit(&mut self, event: &PatternEvent) {
        self.histogram[event.support] += 1;
        if self.psi.value(event.support) <= self.state.delta() {
            self.testable += 1;
        }
        while !self.exhausted && self.state.delta() * self.testable as f64 > self.alpha {
            if self.state.update(self.psi).is_ok() {
                self.testable = self.recount();
            } else {
                self.exhausted = true;
            }
        }
    }

    fn support_floor(&self) -> usize {
        // once every rung has failed nothing can be testable again; an
        // unreachable floor prunes the rest of the traversal
        if self.exhausted {
            usize::MAX
        } else {
            self.state.sigma_l()
        }
    }
}

fn tarone_exact(db: &TransactionDatabase, class_size: usize, db_size: usize, alpha: f64) -> (f64, u64) {
    let psi = PsiTable::new(class_size, db_size);
    let mut sink = TaroneSink {
        psi: &psi,
        state: ThresholdState::init(&psi),
        histogram: vec![0; db_size + 1],
        testable: 0,
        alpha,
        exhausted: false,
    };
    enumerate_frequent(db, &mut sink);
    if sink.exhausted {
        return (0.0, 0);
    }
    // the remaining regions nest inside the already-mined one, so the
    // histogram stays complete and the walk can finish without the miner
    loop {
        if sink.state.delta() * sink.testable as f64 <= alpha {
            return (sink.state.delta(), sink.testable);
        }
        if sink.state.update(&psi).is_err() {
            return (0.0, 0);
        }
        sink.testable = sink.recount();
    }
}

struct SurrogateSink {
    spsi: SurrogatePsi,
    sigma: usize,
    histogram: Vec<u64>,
    testable: u64,
    alpha: f64,
    exhausted: bool,
}

impl SurrogateSink {
    fn recount(&self) -> u64 {
        self.histogram[self.sigma..].iter().sum()
    }
}

impl PatternVisitor for SurrogateSink {
    fn visit(&mut self, event: &PatternEvent) {
        self.histogram[event.support] += 1;
        if event.support >= self.sigma {
            self.testable += 1;
        }
        while !self.exhausted && self.spsi.value(self.sigma) * self.testable as f64 > self.alpha {
            if self.sigma < self.spsi.class_size() {
                self.sigma += 1;
                self.testable = self.recount();
            } else {
                self.exhausted = true;
            }
        }
    }

    fn support_floor(&self) -> usize {
        if self.exhausted {
            usize::MAX
        } else {
            self.sigma
        }
    }
}

fn tarone_surrogate(db: &TransactionDatabase, class_size: usize, db_size: usize, alpha: f64) -> (f64, u64) {
    let mut sink = SurrogateSink {
        spsi: SurrogatePsi::new(class_size, db_size),
        sigma: 1,
        histogram: vec![0; db_size + 1],
        testable: 0,
        alpha,
        exhausted: false,
    };
    enumerate_frequent(db, &mut sink);
    if sink.exhausted {
        return (0.0, 0);
    }
    loop {
        if sink.spsi.value(sink.sigma) * sink.testable as f64 <= alpha {
            return (sink.spsi.value(sink.sigma), sink.testable);
        }
        if sink.sigma >= sink.spsi.class_size() {
            return (0.0, 0);
        }
        sink.sigma += 1;
        sink.testable = sink.recount();
    }
}

/// One permutation's decremental search: lower the support bound from the
/// class size until the running minimum p-value drops to the bound's own
/// attainability floor. Everything left unmined at that point has a larger
/// floor than the minimum already in hand, so the sample is the exact
/// whole-lattice minimum.
fn decremental_minimum(
    db: &TransactionDatabase,
    column: &[u8],
    spsi: &SurrogatePsi,
    lf: &LogFactorials,
    mode: PValueMode,
) -> (f64, usize) {
    let class_size = spsi.class_size();
    let db_size = spsi.db_size();
    let mut sigma = class_size;
    let mut pmin = 1.0f64;
    loop {
        // supports above sigma were already measured in earlier rounds
        let first_round = sigma == class_size;
        let mut visitor = ConstantFloor {
            floor: sigma,
            callback: |event: &PatternEvent| {
                if !first_round && event.support != sigma {
                    return;
                }
                let margins = Margins::new(event.support, class_size, db_size);
                let table = pvalue_table_with(lf, &margins, mode);
                let a = event.occurrences.iter().filter(|&&t| column[t] == 1).count();
                let p = table.lookup(a);
                if p < pmin {
                    pmin = p;
                }
            },
        };
        enumerate_frequent(db, &mut visitor);
        if pmin <= spsi.value(sigma) || sigma == 1 {
            return (pmin, sigma);
        }
        sigma -= 1;
    }
}

/// Permutation-based calibration without threshold sharing: every
/// permutation column runs its own decremental search for its exact
/// minimum p-value, and the final threshold comes from the same rule the
/// main engine applies, here over a complete, unpruned sample set.
pub fn fastwy_threshold(
    db: &TransactionDatabase,
    labels: &LabelVector,
    matrix: &PermutationMatrix,
    alpha: f64,
    mode: PValueMode,
) -> Result<(f64, MinPValues, usize)> {
    validate_inputs(db, labels, matrix, alpha)?;
    let spsi = SurrogatePsi::new(labels.class_size(), labels.db_size());
    let lf = LogFactorials::new(labels.db_size());
    let mut samples = Vec::with_capacity(matrix.permutations());
    let mut sigma_worst = labels.class_size();
    for j in 0..matrix.permutations() {
        let column = matrix.column(j);
        let (pmin, sigma) = decremental_minimum(db, &column, &spsi, &lf, mode);
        samples.push(pmin);
        sigma_worst = sigma_worst.min(sigma);
    }
    let mins = MinPValues::from_values(samples);
    let delta_star = final_delta(&mins, 0.0, 1.0, alpha);
    Ok((delta_star, mins, sigma_worst))
}
