//! Dense matrices over GF(2) with at most 64 columns; each row is one word.

use std::fmt;

use crate::error::{Result, WirecutError};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BinaryMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<u64>,
}

impl BinaryMatrix {
    pub const MAX_COLS: usize = 64;

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(cols <= Self::MAX_COLS, "at most 64 columns");
        BinaryMatrix {
            rows,
            cols,
            bits: vec![0; rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix whose column `j` holds the low `rows` bits of
    /// `columns[j]` (bit `i` is row `i`).
    pub fn from_columns(rows: usize, columns: &[u64]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, &col) in columns.iter().enumerate() {
            for i in 0..rows {
                if (col >> i) & 1 == 1 {
                    m.set(i, j, true);
                }
            }
        }
        m
    }

    pub fn from_rows(cols: usize, rows: &[u64]) -> Result<Self> {
        if cols > Self::MAX_COLS {
            return Err(WirecutError::invalid("at most 64 columns"));
        }
        let mask = col_mask(cols);
        if rows.iter().any(|r| r & !mask != 0) {
            return Err(WirecutError::invalid(
                "row word wider than the column count",
            ));
        }
        Ok(BinaryMatrix {
            rows: rows.len(),
            cols,
            bits: rows.to_vec(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        assert!(r < self.rows && c < self.cols);
        (self.bits[r] >> c) & 1 == 1
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        assert!(r < self.rows && c < self.cols);
        if v {
            self.bits[r] |= 1 << c;
        } else {
            self.bits[r] &= !(1 << c);
        }
    }

    pub fn row_word(&self, r: usize) -> u64 {
        self.bits[r]
    }

    pub fn column_word(&self, c: usize) -> u64 {
        assert!(self.rows <= 64);
        (0..self.rows).fold(0, |acc, r| acc | (((self.bits[r] >> c) & 1) << r))
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for row in &mut self.bits {
            let ba = (*row >> a) & 1;
            let bb = (*row >> b) & 1;
            if ba != bb {
                *row ^= (1 << a) | (1 << b);
            }
        }
    }

    /// Column `dst` ^= column `src`.
    pub fn add_col(&mut self, src: usize, dst: usize) {
        for row in &mut self.bits {
            if (*row >> src) & 1 == 1 {
                *row ^= 1 << dst;
            }
        }
    }

    pub fn transpose(&self) -> BinaryMatrix {
        let mut t = BinaryMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols && *self == self.transpose()
    }

    /// Submatrix of rows `start..start + len`.
    pub fn row_block(&self, start: usize, len: usize) -> BinaryMatrix {
        BinaryMatrix {
            rows: len,
            cols: self.cols,
            bits: self.bits[start..start + len].to_vec(),
        }
    }

    pub fn mul(&self, other: &BinaryMatrix) -> Result<BinaryMatrix> {
        if self.cols != other.rows {
            return Err(WirecutError::invalid(format!(
                "shape mismatch {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = BinaryMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            let mut acc = 0u64;
            for k in 0..self.cols {
                if self.get(r, k) {
                    acc ^= other.bits[k];
                }
            }
            out.bits[r] = acc;
        }
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        rank_of_words(&self.bits)
    }
}

impl fmt::Debug for BinaryMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BinaryMatrix {}x{}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '1' } else { '0' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

fn col_mask(cols: usize) -> u64 {
    if cols == 64 {
        u64::MAX
    } else {
        (1u64 << cols) - 1
    }
}

/// Rank of a set of GF(2) vectors packed as words.
pub fn rank_of_words(words: &[u64]) -> usize {
    let mut basis: Vec<u64> = Vec::new();
    for &w in words {
        let mut v = w;
        for &b in &basis {
            v = v.min(v ^ b);
        }
        if v != 0 {
            basis.push(v);
            basis.sort_unstable_by(|a, b| b.cmp(a));
        }
    }
    basis.len()
}

/// Reduced row echelon form of the span of `words`, with pivot priority
/// given by `priority` (bit positions, highest priority first). Returns the
/// nonzero reduced vectors ordered by pivot priority.
pub fn reduced_basis(words: &[u64], priority: &[usize]) -> Vec<u64> {
    let mut rows: Vec<u64> = words.to_vec();
    let mut out: Vec<u64> = Vec::new();
    for &bit in priority {
        let Some(pos) = rows.iter().position(|r| (r >> bit) & 1 == 1) else {
            continue;
        };
        let pivot = rows.swap_remove(pos);
        for r in rows.iter_mut() {
            if (*r >> bit) & 1 == 1 {
                *r ^= pivot;
            }
        }
        for r in out.iter_mut() {
            if (*r >> bit) & 1 == 1 {
                *r ^= pivot;
            }
        }
        out.push(pivot);
    }
    out
}
