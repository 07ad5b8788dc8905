//! Testability ladder: the decreasing sequence of candidate significance
//! thresholds and the support regions testable at each.
//!
//! A pattern with support `x` can only reach p-values at or above `Psi(x)`
//! ([`crate::exact_test::PsiTable`]), so at threshold `delta` the only
//! supports worth testing form the region `[sigma_l, sigma_u] ∪
//! [N-sigma_u, N-sigma_l]`. Lowering the threshold one attainable `Psi`
//! value at a time shrinks the region monotonically; [`ThresholdState`]
//! walks that ladder. The walk tolerates two quirks of real margins that a
//! naive alternating scheme mishandles: `Psi` values from the lower and
//! upper branch can tie exactly, and `Psi(N/2)` can exceed `Psi(1)`, in
//! which case the upper boundary has to slide several steps to catch up
//! before it contributes candidate values.

use crate::error::{Error, Result};
use crate::exact_test::PsiTable;

/// Support-region membership at boundaries `sigma_l..=sigma_u` (mirrored
/// around `N/2`). The mirror image of the region covers high supports;
/// `x = N` is never a member since `sigma_l >= 1`.
#[inline]
pub fn is_testable(x: usize, sigma_l: usize, sigma_u: usize, db_size: usize) -> bool {
    (sigma_l <= x && x <= sigma_u) || (db_size - sigma_u <= x && x <= db_size - sigma_l)
}

/// Every threshold the ladder can emit for the margins behind `psi`: the
/// distinct values of `Psi` over supports `1..=N/2` that do not exceed the
/// starting threshold `Psi(1) = n/N`, in decreasing order.
///
/// (Values above `Psi(1)` exist for some margins, always near `N/2`; the
/// walk never emits them because the threshold would have to increase.)
pub fn distinct_thresholds(psi: &PsiTable) -> Vec<f64> {
    let start = psi.value(1);
    let mut vals: Vec<f64> =
        (1..=psi.db_size() / 2).map(|x| psi.value(x)).filter(|&v| v <= start).collect();
    vals.sort_by(|a, b| b.partial_cmp(a).expect("psi values are finite"));
    vals.dedup();
    vals
}

/// Position on the threshold ladder: step index `k`, current threshold
/// `delta_k`, the previous threshold `delta_{k-1}` (1 at the start), and the
/// testable-region boundaries for `delta_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdState {
    k: usize,
    delta: f64,
    prev_delta: f64,
    sigma_l: usize,
    sigma_u: usize,
    // 1 when the lower boundary produced the current threshold and is the
    // next to advance, 0 when the upper boundary did.
    flag: u8,
    class_size: usize,
    db_size: usize,
}

impl ThresholdState {
    /// First rung of the ladder: `delta_1 = Psi(1) = n/N`, with the region
    /// wide open (`sigma_l = 1`, `sigma_u = N/2`, i.e. every support in
    /// `[1, N-1]` testable). For most margins that region is already exact
    /// for `delta_1`; for the quirky ones it is a superset, which only
    /// costs a few extra table builds before the first update catches up.
    pub fn init(psi: &PsiTable) -> ThresholdState {
        ThresholdState {
            k: 1,
            delta: psi.value(1),
            prev_delta: 1.0,
            sigma_l: 1,
            sigma_u: psi.db_size() / 2,
            flag: 1,
            class_size: psi.class_size(),
            db_size: psi.db_size(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Threshold one rung up, `delta_{k-1}`; 1 when `k == 1`.
    pub fn prev_delta(&self) -> f64 {
        self.prev_delta
    }

    pub fn sigma_l(&self) -> usize {
        self.sigma_l
    }

    pub fn sigma_u(&self) -> usize {
        self.sigma_u
    }

    pub fn flag(&self) -> u8 {
        self.flag
    }

    pub fn is_testable(&self, x: usize) -> bool {
        is_testable(x, self.sigma_l, self.sigma_u, self.db_size)
    }

    /// Step down to the next attainable threshold, shrinking the region
    /// accordingly. The candidate values are `Psi(sigma_l + 1)` going down
    /// the lower branch and `Psi(sigma_u)` after sliding past everything
    /// the upper branch already emitted (or never could emit, for the
    /// quirky margins where `Psi` near `N/2` starts above `Psi(1)`); ties
    /// across branches are consumed together so each value appears once.
    ///
    /// Fails with [`Error::Exhausted`], leaving the state untouched, once
    /// both branches have reached the global minimum `Psi(n)`.
    pub fn update(&mut self, psi: &PsiTable) -> Result<()> {
        debug_assert_eq!(psi.db_size(), self.db_size);
        debug_assert_eq!(psi.class_size(), self.class_size);
        let old = self.delta;
        let n = self.class_size;

        let mut sigma_l = self.sigma_l;
        let mut sigma_u = self.sigma_u;
        if self.flag == 1 && sigma_l < n {
            sigma_l += 1;
        }
        while sigma_u > n && psi.value(sigma_u) >= old {
            sigma_u -= 1;
        }

        let lower = Some(psi.value(sigma_l)).filter(|&v| v < old);
        let upper = Some(psi.value(sigma_u)).filter(|&v| v < old);
        let (delta, flag) = match (lower, upper) {
            (None, None) => return Err(Error::Exhausted),
            (Some(l), None) => (l, 1),
            (None, Some(u)) => (u, 0),
            (Some(l), Some(u)) => {
                if l >= u {
                    (l, 1)
                } else {
                    (u, 0)
                }
            }
        };

        self.prev_delta = old;
        self.delta = delta;
        self.sigma_l = sigma_l;
        self.sigma_u = sigma_u;
        self.flag = flag;
        self.k += 1;
        Ok(())
    }
}
