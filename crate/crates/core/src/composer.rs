//! Sparse form of a single weighted Pauli string.
//!
//! Every Pauli string has exactly one nonzero per row and per column, so its
//! matrix is fully described by a column index and a value for each row.
//! Writing `Y = i Y~` with the real matrix `Y~ = [[0, -1], [1, 0]]` turns the
//! string into a global phase `i^{n_Y}` times a signed permutation, which is
//! built in `O(2^n)` by doubling one wire at a time.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::{Matrix, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct SparsePauliMatrix {
    pub n: usize,
    /// `cols[r]` is the column of the nonzero in row `r`.
    pub cols: Vec<usize>,
    pub vals: Vec<C64>,
}

impl SparsePauliMatrix {
    pub fn dim(&self) -> usize {
        self.cols.len()
    }

    pub fn is_diagonal(&self) -> bool {
        self.cols.iter().enumerate().all(|(r, &c)| r == c)
    }
}

/// Bit masks over basis-state bits: wires holding X or Y, wires holding Y,
/// and wires holding Y or Z. Wire `j` is bit `n - 1 - j`.
fn masks(index: usize, n: usize) -> (usize, usize, usize) {
    let (mut flip, mut y, mut sign) = (0, 0, 0);
    for wire in 0..n {
        let bit = 1 << (n - 1 - wire);
        match (index >> (2 * (n - 1 - wire))) & 3 {
            1 => flip |= bit,
            2 => {
                flip |= bit;
                y |= bit;
                sign |= bit;
            }
            3 => sign |= bit,
            _ => {}
        }
    }
    (flip, y, sign)
}

/// Sparse matrix of `lambda * P_index`.
pub fn compose_sparse(lambda: f64, index: usize, n: usize) -> Result<SparsePauliMatrix> {
    if index >= 1 << (2 * n) {
        return Err(Error::IndexOutOfRange { index, n });
    }
    let (flip, y, sign) = masks(index, n);
    let n_y = y.count_ones();
    let dim = 1usize << n;

    // Row 0 picks the (0, 1) entry of every Y~, which is -1, so the seed
    // value is lambda * i^{n_Y} * (-1)^{n_Y} = lambda * (-i)^{n_Y}.
    let seed = C64::new(lambda, 0.0) * C64::new(0.0, -1.0).powu(n_y);

    let mut cols = Vec::with_capacity(dim);
    let mut vals = Vec::with_capacity(dim);
    cols.push(flip);
    vals.push(seed);
    if flip == 0 {
        // diagonal string: only signs change
        for b in 0..n {
            let s = 1usize << b;
            let negate = sign & s != 0;
            for r in 0..s {
                cols.push(r + s);
                let v = vals[r];
                vals.push(if negate { -v } else { v });
            }
        }
    } else {
        for b in 0..n {
            let s = 1usize << b;
            let down = flip & s != 0;
            let negate = sign & s != 0;
            for r in 0..s {
                let c = cols[r];
                cols.push(if down { c - s } else { c + s });
                let v = vals[r];
                vals.push(if negate { -v } else { v });
            }
        }
    }
    Ok(SparsePauliMatrix { n, cols, vals })
}

pub fn dense_from_sparse(m: &SparsePauliMatrix) -> Matrix {
    let d = m.dim();
    let mut out = Array2::zeros((d, d));
    for (r, (&c, &v)) in m.cols.iter().zip(&m.vals).enumerate() {
        out[[r, c]] = v;
    }
    out
}
