//! Shared generators for in-crate tests: small random databases, label
//! vectors, and permutation matrices with reproducible contents.

use crate::miner::{parse_fimi, TransactionDatabase};
use crate::permutation::{load_permutations, LabelVector, PermutationMatrix};
use rand::rngs::StdRng;
use rand::Rng;

/// In-test Fisher-Yates so instances depend only on the seed, not on any
/// library's shuffle implementation.
pub fn shuffle<T>(values: &mut [T], rng: &mut StdRng) {
    for i in (1..values.len()).rev() {
        let j = rng.gen_range(0..=i);
        values.swap(i, j);
    }
}

pub fn random_db(rng: &mut StdRng, transactions: usize, items: u32, density: f64) -> TransactionDatabase {
    let mut text = String::new();
    for _ in 0..transactions {
        let row: Vec<String> = (1..=items)
            .filter(|_| rng.gen_bool(density))
            .map(|i| i.to_string())
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    parse_fimi(&text).unwrap()
}

pub fn random_labels(rng: &mut StdRng, transactions: usize, minor: usize) -> LabelVector {
    let mut raw = vec![0u8; transactions];
    for slot in raw.iter_mut().take(minor) {
        *slot = 1;
    }
    shuffle(&mut raw, rng);
    LabelVector::from_raw(raw).unwrap()
}

/// Builds the matrix through the text loader so the file format and the
/// generator stay on the same code path as production inputs.
pub fn random_matrix(rng: &mut StdRng, labels: &LabelVector, permutations: usize) -> PermutationMatrix {
    let mut text = String::new();
    for _ in 0..permutations {
        let mut column = vec![0u8; labels.db_size()];
        for slot in column.iter_mut().take(labels.raw_ones()) {
            *slot = 1;
        }
        shuffle(&mut column, rng);
        let row: Vec<String> = column.iter().map(|b| b.to_string()).collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    load_permutations(&text, labels).unwrap()
}

/// One self-consistent tiny instance: database, labels, and a matching
/// matrix of 10 to 50 permutations.
pub fn random_instance(
    rng: &mut StdRng,
    balanced: bool,
) -> (TransactionDatabase, LabelVector, PermutationMatrix) {
    let n = 2 * rng.gen_range(4..=12);
    let items = rng.gen_range(3..=8);
    let db = random_db(rng, n, items, 0.4);
    let minor = if balanced { n / 2 } else { n / 4 };
    let labels = random_labels(rng, n, minor);
    let j = rng.gen_range(10..=50);
    let matrix = random_matrix(rng, &labels, j);
    (db, labels, matrix)
}
