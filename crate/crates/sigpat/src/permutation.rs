//! Class labels, the permuted-label matrix, and the empirical FWER
//! estimator.
//!
//! Labels are minor-class encoded on construction: if the raw labels have
//! more ones than zeros, the encoding is inverted so that `n <= N - n`
//! always holds downstream (Fisher p-values are invariant under the swap,
//! the testability machinery assumes it). The permutation matrix stores the
//! full N x J table of shuffled labels up front: one byte per entry by
//! default, or packed bits under the `packed-matrix` feature, with identical
//! observable behavior.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact_test::PValueTable;

/// Binary class labels over N transactions, minor-class encoded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelVector {
    labels: Vec<u8>,
    class_size: usize,
    flipped: bool,
}

impl LabelVector {
    /// Encode raw 0/1 labels, inverting if ones outnumber zeros. Fails when
    /// the minor class would be empty: with all labels equal there is no
    /// association to test.
    pub fn from_raw(mut labels: Vec<u8>) -> Result<LabelVector> {
        debug_assert!(labels.iter().all(|&b| b <= 1));
        let ones = labels.iter().filter(|&&b| b == 1).count();
        let flipped = 2 * ones > labels.len();
        if flipped {
            for b in &mut labels {
                *b = 1 - *b;
            }
        }
        let class_size = if flipped { labels.len() - ones } else { ones };
        if class_size == 0 {
            return Err(Error::DegenerateLabels {
                reason: "all labels belong to one class".into(),
            });
        }
        Ok(LabelVector { labels, class_size, flipped })
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    /// Minor-class size n.
    pub fn class_size(&self) -> usize {
        self.class_size
    }

    pub fn db_size(&self) -> usize {
        self.labels.len()
    }

    pub fn flipped(&self) -> bool {
        self.flipped
    }

    /// Ones-count of the labels as they were before encoding; external
    /// permutation files are validated against this.
    pub fn raw_ones(&self) -> usize {
        if self.flipped {
            self.db_size() - self.class_size
        } else {
            self.class_size
        }
    }
}

/// Where a matrix's columns came from; reproducibility metadata for reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixSeed {
    Generated(u64),
    External,
}

#[cfg(not(feature = "packed-matrix"))]
type MatrixWord = u8;
#[cfg(feature = "packed-matrix")]
type MatrixWord = u64;

/// N x J table of permuted labels, row per transaction, column per
/// permutation. Stored row-major so a pattern's cell-count pass reads each
/// touched transaction's J entries contiguously.
pub struct PermutationMatrix {
    data: Vec<MatrixWord>,
    words_per_row: usize,
    db_size: usize,
    permutations: usize,
    class_size: usize,
    seed: MatrixSeed,
}

impl PermutationMatrix {
    fn empty(db_size: usize, permutations: usize, class_size: usize, seed: MatrixSeed) -> Self {
        #[cfg(not(feature = "packed-matrix"))]
        let words_per_row = permutations;
        #[cfg(feature = "packed-matrix")]
        let words_per_row = permutations.div_ceil(64);
        PermutationMatrix {
            data: vec![0; db_size * words_per_row],
            words_per_row,
            db_size,
            permutations,
            class_size,
            seed,
        }
    }

    #[inline]
    fn set(&mut self, t: usize, j: usize, value: u8) {
        #[cfg(not(feature = "packed-matrix"))]
        {
            self.data[t * self.words_per_row + j] = value;
        }
        #[cfg(feature = "packed-matrix")]
        {
            let word = t * self.words_per_row + (j >> 6);
            let bit = 1u64 << (j & 63);
            if value == 1 {
                self.data[word] |= bit;
            } else {
                self.data[word] &= !bit;
            }
        }
    }

    #[inline]
    pub fn entry(&self, t: usize, j: usize) -> u8 {
        #[cfg(not(feature = "packed-matrix"))]
        {
            self.data[t * self.words_per_row + j]
        }
        #[cfg(feature = "packed-matrix")]
        {
            ((self.data[t * self.words_per_row + (j >> 6)] >> (j & 63)) & 1) as u8
        }
    }

    fn write_column(&mut self, j: usize, labels: &[u8]) {
        for (t, &b) in labels.iter().enumerate() {
            self.set(t, j, b);
        }
    }

    pub fn column(&self, j: usize) -> Vec<u8> {
        (0..self.db_size).map(|t| self.entry(t, j)).collect()
    }

    pub fn db_size(&self) -> usize {
        self.db_size
    }

    /// Number of permutation columns J.
    pub fn permutations(&self) -> usize {
        self.permutations
    }

    pub fn class_size(&self) -> usize {
        self.class_size
    }

    pub fn seed(&self) -> MatrixSeed {
        self.seed
    }

    /// Actual bytes held by the label table.
    pub fn memory_bytes(&self) -> usize {
        self.data.len() * std::mem::size_of::<MatrixWord>()
    }
}

/// J uniform reshuffles of `y`, deterministic in `(y, J, seed)`.
pub fn generate_permutations(y: &LabelVector, permutations: usize, seed: u64) -> PermutationMatrix {
    assert!(permutations >= 1);
    let mut matrix =
        PermutationMatrix::empty(y.db_size(), permutations, y.class_size(), MatrixSeed::Generated(seed));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut column = y.labels().to_vec();
    for j in 0..permutations {
        column.shuffle(&mut rng);
        matrix.write_column(j, &column);
    }
    matrix
}

/// Like [`generate_permutations`] but with the unpermuted labels as column
/// 0, so the observed contingency counts appear as permutation 0.
pub fn generate_permutations_with_identity(
    y: &LabelVector,
    permutations: usize,
    seed: u64,
) -> PermutationMatrix {
    let mut matrix = generate_permutations(y, permutations, seed);
    matrix.write_column(0, y.labels());
    matrix
}

/// Parse an externally supplied matrix: J lines, each a permutation of the
/// raw labels (N space-separated 0/1 values). Columns are validated against
/// the raw ones-count and re-encoded to match `y`'s minor-class encoding.
pub fn load_permutations(text: &str, y: &LabelVector) -> Result<PermutationMatrix> {
    let lines: Vec<&str> = text.lines().collect();
    if lines.is_empty() {
        return Err(Error::MalformedMatrix { line: None, reason: "empty matrix file".into() });
    }
    let mut matrix =
        PermutationMatrix::empty(y.db_size(), lines.len(), y.class_size(), MatrixSeed::External);
    for (i, line) in lines.iter().enumerate() {
        let lineno = i + 1;
        let mut column = Vec::with_capacity(y.db_size());
        for token in line.split_whitespace() {
            match token {
                "0" => column.push(0u8),
                "1" => column.push(1u8),
                other => {
                    return Err(Error::MalformedMatrix {
                        line: Some(lineno),
                        reason: format!("expected 0 or 1, found {other:?}"),
                    })
                }
            }
        }
        if column.len() != y.db_size() {
            return Err(Error::MalformedMatrix {
                line: Some(lineno),
                reason: format!("expected {} values, found {}", y.db_size(), column.len()),
            });
        }
        let ones = column.iter().filter(|&&b| b == 1).count();
        if ones != y.raw_ones() {
            return Err(Error::MalformedMatrix {
                line: Some(lineno),
                reason: format!("expected {} ones per permutation, found {ones}", y.raw_ones()),
            });
        }
        if y.flipped() {
            for b in &mut column {
                *b = 1 - *b;
            }
        }
        matrix.write_column(i, &column);
    }
    Ok(matrix)
}

/// Cell counts of one pattern under every permutation: result[j] is the
/// number of occurrence transactions labeled 1 in column j. O(x * J).
pub fn cell_counts(occurrences: &[usize], matrix: &PermutationMatrix) -> Vec<usize> {
    let mut counts = vec![0usize; matrix.permutations];
    #[cfg(not(feature = "packed-matrix"))]
    for &t in occurrences {
        let row = &matrix.data[t * matrix.words_per_row..(t + 1) * matrix.words_per_row];
        for (c, &b) in counts.iter_mut().zip(row) {
            *c += b as usize;
        }
    }
    #[cfg(feature = "packed-matrix")]
    for &t in occurrences {
        let row = &matrix.data[t * matrix.words_per_row..(t + 1) * matrix.words_per_row];
        for (j, c) in counts.iter_mut().enumerate() {
            *c += ((row[j >> 6] >> (j & 63)) & 1) as usize;
        }
    }
    counts
}

/// Running minimum p-value per permutation; the empirical null sample the
/// final threshold is read from.
#[derive(Clone, Debug, PartialEq)]
pub struct MinPValues {
    values: Vec<f64>,
}

impl MinPValues {
    /// All entries start at 1, the p-value every pattern trivially attains.
    pub fn new(permutations: usize) -> Self {
        MinPValues { values: vec![1.0; permutations] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub(crate) fn from_values(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| (0.0..=1.0).contains(v)));
        MinPValues { values }
    }

    /// Fold one pattern's p-values in: entries only ever decrease.
    pub fn update_minimums(&mut self, table: &PValueTable, counts: &[usize]) {
        debug_assert_eq!(counts.len(), self.values.len());
        for (v, &a) in self.values.iter_mut().zip(counts) {
            let p = table.lookup(a);
            if p < *v {
                *v = p;
            }
        }
    }

    /// Fraction of permutations whose minimum p-value is at or below
    /// `delta`: the empirical family-wise error rate at that threshold.
    pub fn empirical_fwer(&self, delta: f64) -> f64 {
        let hits = self.values.iter().filter(|&&v| v <= delta).count();
        hits as f64 / self.values.len() as f64
    }
}
