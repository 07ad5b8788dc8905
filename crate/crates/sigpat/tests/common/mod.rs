//! Helpers shared by the integration suites: reproducible random
//! databases, label vectors, and explicit permutation-matrix files built
//! through the same loaders production inputs use.

// each test binary compiles this module separately and uses a subset
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::Rng;
use sigpat::miner::{parse_fimi, TransactionDatabase};
use sigpat::permutation::{load_permutations, LabelVector, PermutationMatrix};

/// Deterministic Fisher-Yates, independent of library shuffle details.
pub fn shuffle<T>(values: &mut [T], rng: &mut StdRng) {
    for i in (1..values.len()).rev() {
        let j = rng.gen_range(0..=i);
        values.swap(i, j);
    }
}

pub fn random_db_text(rng: &mut StdRng, transactions: usize, items: u32, density: f64) -> String {
    let mut text = String::new();
    for _ in 0..transactions {
        let row: Vec<String> = (1..=items)
            .filter(|_| rng.gen_bool(density))
            .map(|i| i.to_string())
            .collect();
        text.push_str(&row.join(" "));
        text.push('\n');
    }
    text
}

pub fn random_db(rng: &mut StdRng, transactions: usize, items: u32, density: f64) -> TransactionDatabase {
    parse_fimi(&random_db_text(rng, transactions, items, density)).unwrap()
}

pub fn random_labels(rng: &mut StdRng, transactions: usize, minor: usize) -> LabelVector {
    let mut raw = vec![0u8; transactions];
    for slot in raw.iter_mut().take(minor) {
        *slot = 1;
    }
    shuffle(&mut raw, rng);
    LabelVector::from_raw(raw).unwrap()
}

pub fn random_matrix_text(rng: &mut StdRng, labels: &LabelVector, permutations: usize) -> String {
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
    text
}

pub fn random_matrix(rng: &mut StdRng, labels: &LabelVector, permutations: usize) -> PermutationMatrix {
    load_permutations(&random_matrix_text(rng, labels, permutations), labels).unwrap()
}

/// One tiny randomized instance in the acceptance grid: even N in
/// [8, 24], 3 to 8 items, an explicit 10-to-50-column matrix, and either
/// a balanced or a quarter-minor label split.
pub fn tiny_instance(
    rng: &mut StdRng,
    balanced: bool,
) -> (TransactionDatabase, LabelVector, PermutationMatrix) {
    let transactions = 2 * rng.gen_range(4..=12);
    let items = rng.gen_range(3..=8);
    let db = random_db(rng, transactions, items, 0.4);
    let minor = if balanced { transactions / 2 } else { transactions / 4 };
    let labels = random_labels(rng, transactions, minor);
    let permutations = rng.gen_range(10..=50);
    let matrix = random_matrix(rng, &labels, permutations);
    (db, labels, matrix)
}
