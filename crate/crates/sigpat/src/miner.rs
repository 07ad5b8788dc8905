//! Transaction-database ingestion and depth-first itemset enumeration with
//! a dynamically raisable support floor.
//!
//! The database is vertical: per item, the sorted list of transaction
//! indices containing it. Enumeration extends a prefix itemset one item at
//! a time, intersecting occurrence lists, visiting items in ascending
//! support order and extending only with items later in that order, so
//! every itemset is delivered exactly once. The visitor can raise the
//! support floor between visits; since a child's support never exceeds its
//! parent's, raising the floor prunes whole subtrees without a restart and
//! without losing any pattern whose support clears the final floor.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::permutation::LabelVector;

/// Vertical transaction database: item alphabet plus per-item occurrence
/// lists. Transactions are numbered by file order.
pub struct TransactionDatabase {
    transaction_count: usize,
    items: Vec<u32>,
    occurrences: Vec<Vec<usize>>,
}

impl TransactionDatabase {
    pub fn transaction_count(&self) -> usize {
        self.transaction_count
    }

    /// Item alphabet, ascending.
    pub fn items(&self) -> &[u32] {
        &self.items
    }

    pub fn occurrences_of(&self, item: u32) -> &[usize] {
        match self.items.binary_search(&item) {
            Ok(idx) => &self.occurrences[idx],
            Err(_) => &[],
        }
    }
}

/// Parse the FIMI transaction format: one transaction per line, items as
/// space-separated non-negative integers. Duplicate items within a line
/// collapse; blank lines are empty transactions.
pub fn parse_fimi(text: &str) -> Result<TransactionDatabase> {
    let mut lists: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    let mut transaction_count = 0usize;
    for (i, line) in text.lines().enumerate() {
        let t = transaction_count;
        transaction_count += 1;
        for token in line.split_whitespace() {
            let item: u32 = token.parse().map_err(|_| {
                Error::malformed(i + 1, format!("invalid item id {token:?}"))
            })?;
            let list = lists.entry(item).or_default();
            // duplicates within one line arrive consecutively
            if list.last() != Some(&t) {
                list.push(t);
            }
        }
    }
    let (items, occurrences) = lists.into_iter().unzip();
    Ok(TransactionDatabase { transaction_count, items, occurrences })
}

/// Parse one 0/1 label per line and minor-class encode the result.
pub fn parse_labels(text: &str, transaction_count: usize) -> Result<LabelVector> {
    let mut labels = Vec::with_capacity(transaction_count);
    for (i, line) in text.lines().enumerate() {
        match line.trim() {
            "0" => labels.push(0u8),
            "1" => labels.push(1u8),
            other => {
                return Err(Error::malformed(i + 1, format!("expected 0 or 1, found {other:?}")))
            }
        }
    }
    if labels.len() != transaction_count {
        return Err(Error::MalformedInput {
            line: None,
            reason: format!(
                "label count {} does not match transaction count {transaction_count}",
                labels.len()
            ),
        });
    }
    LabelVector::from_raw(labels)
}

/// One enumerated itemset. `itemset` lists the items in enumeration order
/// (ascending base support, not ascending id); `occurrences` is the exact
/// intersection of the members' occurrence lists.
pub struct PatternEvent<'a> {
    pub itemset: &'a [u32],
    pub support: usize,
    pub occurrences: &'a [usize],
}

/// Receiver for enumerated patterns. `support_floor` is re-read before
/// every extension and must be >= 1 and non-decreasing over the run.
pub trait PatternVisitor {
    fn visit(&mut self, event: &PatternEvent);
    fn support_floor(&self) -> usize;
}

/// A visitor with a fixed floor, for plain frequent-itemset enumeration.
pub struct ConstantFloor<F: FnMut(&PatternEvent)> {
    pub floor: usize,
    pub callback: F,
}

impl<F: FnMut(&PatternEvent)> PatternVisitor for ConstantFloor<F> {
    fn visit(&mut self, event: &PatternEvent) {
        (self.callback)(event)
    }

    fn support_floor(&self) -> usize {
        self.floor
    }
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len().min(b.len()));
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// Depth-first enumeration of every itemset whose support clears the
/// visitor's floor at the moment it is reached. Returns the number of
/// patterns delivered.
pub fn enumerate_frequent(db: &TransactionDatabase, visitor: &mut dyn PatternVisitor) -> u64 {
    // ascending support, ties by item id; fixes the traversal order
    let mut order: Vec<usize> = (0..db.items.len()).collect();
    order.sort_by_key(|&idx| (db.occurrences[idx].len(), db.items[idx]));

    let mut prefix: Vec<u32> = Vec::new();
    let mut visited = 0u64;
    descend(db, &order, None, &mut prefix, visitor, &mut visited);
    visited
}

fn descend(
    db: &TransactionDatabase,
    tail: &[usize],
    prefix_occ: Option<&[usize]>,
    prefix: &mut Vec<u32>,
    visitor: &mut dyn PatternVisitor,
    visited: &mut u64,
) {
    for (pos, &idx) in tail.iter().enumerate() {
        let base = &db.occurrences[idx];
        let child_occ: Vec<usize> = match prefix_occ {
            None => base.clone(),
            Some(po) => intersect(po, base),
        };
        debug_assert!(prefix_occ.is_none_or(|po| child_occ.len() <= po.len()));
        if child_occ.len() < visitor.support_floor() {
            continue;
        }
        prefix.push(db.items[idx]);
        *visited += 1;
        visitor.visit(&PatternEvent {
            itemset: prefix,
            support: child_occ.len(),
            occurrences: &child_occ,
        });
        descend(db, &tail[pos + 1..], Some(&child_occ), prefix, visitor, visited);
        prefix.pop();
    }
}
