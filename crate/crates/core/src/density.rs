//! Decode stage: `rho = 2^-n * prod_j (I + P_j)`.
//!
//! Each generator is turned into `M_j = I + sum_i lambda_i P_i` by a balanced
//! binary tree of additions over the sparse term matrices; partial sums stay
//! sparse until more than half of the entries are filled. The `n` matrices
//! are then multiplied as a balanced tree. Both trees are evaluated depth
//! first with `rayon::join`, so their shape, and hence the floating-point
//! result, depends only on the input size.

use std::io::{self, Write};

use ndarray::Array2;

use crate::composer::{compose_sparse, SparsePauliMatrix};
use crate::engine::StabilizerState;
use crate::error::{Error, Result};
use crate::{Matrix, C64};

/// Subtrees with fewer leaves than this are reduced on the current thread.
const PAR_MIN_LEAVES: usize = 64;

/// Tolerance used when validating a density matrix before it is written.
pub const CHECK_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    pub n: usize,
    pub rho: Matrix,
}

impl DensityMatrix {
    pub fn from_matrix(n: usize, rho: Matrix) -> Self {
        debug_assert_eq!(rho.dim(), (1 << n, 1 << n));
        DensityMatrix { n, rho }
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.rho.diag().iter().sum()
    }

    /// Largest `|rho - rho^dagger|` entry.
    pub fn hermiticity_error(&self) -> f64 {
        let d = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in r..d {
                worst = worst.max((self.rho[[r, c]] - self.rho[[c, r]].conj()).norm());
            }
        }
        worst
    }

    /// `||rho^2 - rho||_F`.
    pub fn purity_defect(&self) -> f64 {
        frobenius(&(self.rho.dot(&self.rho) - &self.rho))
    }

    pub fn frobenius_distance(&self, other: &DensityMatrix) -> f64 {
        frobenius(&(&self.rho - &other.rho))
    }

    /// Trace, Hermiticity and purity within `tol`.
    pub fn check(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > tol {
            return Err(Error::Invalid(format!("trace {tr} differs from 1")));
        }
        let herm = self.hermiticity_error();
        if herm > tol {
            return Err(Error::Invalid(format!("not Hermitian (error {herm:e})")));
        }
        let purity = self.purity_defect();
        if purity > tol {
            return Err(Error::Invalid(format!("not a projector (||rho^2 - rho|| = {purity:e})")));
        }
        Ok(())
    }

    /// Probability of reading 0 on `wire`: `tr(1/2 (I + Z_wire) rho)`.
    pub fn measure_z(&self, wire: usize) -> Result<f64> {
        if wire >= self.n {
            return Err(Error::WireOutOfRange { wire, n: self.n });
        }
        let bit = 1 << (self.n - 1 - wire);
        Ok((0..self.dim())
            .filter(|r| r & bit == 0)
            .map(|r| self.rho[[r, r]].re)
            .sum())
    }

    pub fn rho00(&self) -> f64 {
        self.rho[[0, 0]].re
    }

    /// `row,col,re,im` with one line per entry, row-major.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "row,col,re,im")?;
        for ((r, c), z) in self.rho.indexed_iter() {
            writeln!(w, "{r},{c},{},{}", z.re, z.im)?;
        }
        w.flush()
    }

    /// Little-endian `f64` pairs `(re, im)`, row-major, no header.
    pub fn write_bin<W: Write>(&self, mut w: W) -> io::Result<()> {
        for z in self.rho.iter() {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        w.flush()
    }

    pub fn read_bin(n: usize, bytes: &[u8]) -> Result<Self> {
        let d = 1usize << n;
        if bytes.len() != d * d * 16 {
            return Err(Error::ShapeMismatch(format!(
                "{} bytes for a {d}x{d} complex matrix",
                bytes.len()
            )));
        }
        let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().expect("8 bytes"));
        let rho = Array2::from_shape_fn((d, d), |(r, c)| {
            let o = (r * d + c) * 16;
            C64::new(f(o), f(o + 8))
        });
        Ok(DensityMatrix { n, rho })
    }
}

pub fn frobenius(m: &Matrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Row-compressed sparse matrix, columns sorted within each row.
#[derive(Clone, Debug)]
struct Csr {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl Csr {
    fn identity(dim: usize) -> Self {
        Csr {
            dim,
            row_ptr: (0..=dim).collect(),
            cols: (0..dim).collect(),
            vals: vec![C64::new(1.0, 0.0); dim],
        }
    }

    fn from_pauli(m: SparsePauliMatrix) -> Self {
        let dim = m.dim();
        Csr {
            dim,
            row_ptr: (0..=dim).collect(),
            cols: m.cols,
            vals: m.vals,
        }
    }

    fn nnz(&self) -> usize {
        self.cols.len()
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[span.clone()].iter().copied().zip(self.vals[span].iter().copied())
    }

    fn add(&self, other: &Csr) -> Csr {
        let mut out = Csr {
            dim: self.dim,
            row_ptr: Vec::with_capacity(self.dim + 1),
            cols: Vec::with_capacity(self.nnz() + other.nnz()),
            vals: Vec::with_capacity(self.nnz() + other.nnz()),
        };
        out.row_ptr.push(0);
        for r in 0..self.dim {
            let (mut a, mut b) = (self.row(r).peekable(), other.row(r).peekable());
            loop {
                let next = match (a.peek(), b.peek()) {
                    (Some(&(ca, va)), Some(&(cb, vb))) => {
                        if ca == cb {
                            a.next();
                            b.next();
                            (ca, va + vb)
                        } else if ca < cb {
                            a.next();
                            (ca, va)
                        } else {
                            b.next();
                            (cb, vb)
                        }
                    }
                    (Some(_), None) => a.next().expect("peeked"),
                    (None, Some(_)) => b.next().expect("peeked"),
                    (None, None) => break,
                };
                out.cols.push(next.0);
                out.vals.push(next.1);
            }
            out.row_ptr.push(out.cols.len());
        }
        out
    }

    fn add_into(&self, dense: &mut Matrix) {
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                dense[[r, c]] += v;
            }
        }
    }

    fn to_dense(&self) -> Matrix {
        let mut m = Array2::zeros((self.dim, self.dim));
        self.add_into(&mut m);
        m
    }
}

enum Partial {
    Sparse(Csr),
    Dense(Matrix),
}

impl Partial {
    fn merge(self, other: Partial) -> Partial {
        match (self, other) {
            (Partial::Sparse(a), Partial::Sparse(b)) => {
                let sum = a.add(&b);
                if 2 * sum.nnz() > sum.dim * sum.dim {
                    Partial::Dense(sum.to_dense())
                } else {
                    Partial::Sparse(sum)
                }
            }
            (Partial::Dense(mut a), Partial::Sparse(b)) => {
                b.add_into(&mut a);
                Partial::Dense(a)
            }
            (Partial::Sparse(a), Partial::Dense(b)) => {
                let mut m = a.to_dense();
                m += &b;
                Partial::Dense(m)
            }
            (Partial::Dense(mut a), Partial::Dense(b)) => {
                a += &b;
                Partial::Dense(a)
            }
        }
    }

    fn into_dense(self) -> Matrix {
        match self {
            Partial::Sparse(s) => s.to_dense(),
            Partial::Dense(m) => m,
        }
    }
}

fn reduce_terms(n: usize, leaves: &[(usize, f64)]) -> Partial {
    match leaves {
        [] => Partial::Sparse(Csr {
            dim: 1 << n,
            row_ptr: vec![0; (1 << n) + 1],
            cols: Vec::new(),
            vals: Vec::new(),
        }),
        [(i, l)] => Partial::Sparse(Csr::from_pauli(
            compose_sparse(*l, *i, n).expect("index from a stabilizer of matching size"),
        )),
        _ => {
            let (left, right) = leaves.split_at(leaves.len() / 2);
            let (a, b) = if leaves.len() >= PAR_MIN_LEAVES {
                rayon::join(|| reduce_terms(n, left), || reduce_terms(n, right))
            } else {
                (reduce_terms(n, left), reduce_terms(n, right))
            };
            a.merge(b)
        }
    }
}

/// `I + sum_i lambda_i P_i` for one generator.
pub fn add_terms(s: &StabilizerState) -> Matrix {
    let n = s.num_qubits();
    let terms: Vec<(usize, f64)> = s.terms().collect();
    let sum = Partial::Sparse(Csr::identity(1 << n)).merge(reduce_terms(n, &terms));
    sum.into_dense()
}

fn tree_product(ms: &[Matrix]) -> Matrix {
    match ms {
        [m] => m.clone(),
        _ => {
            let (left, right) = ms.split_at(ms.len() / 2);
            let (a, b) = rayon::join(|| tree_product(left), || tree_product(right));
            a.dot(&b)
        }
    }
}

/// Balanced-tree product of equally shaped square matrices.
pub fn multiply_chain(ms: &[Matrix]) -> Result<Matrix> {
    let Some(first) = ms.first() else {
        return Err(Error::ShapeMismatch("empty matrix chain".into()));
    };
    let shape = first.dim();
    if shape.0 != shape.1 {
        return Err(Error::ShapeMismatch(format!("{}x{} is not square", shape.0, shape.1)));
    }
    if let Some(m) = ms.iter().find(|m| m.dim() != shape) {
        return Err(Error::ShapeMismatch(format!(
            "{}x{} next to {}x{}",
            m.nrows(),
            m.ncols(),
            shape.0,
            shape.1
        )));
    }
    Ok(tree_product(ms))
}

pub fn to_density(stabs: &[StabilizerState]) -> Result<DensityMatrix> {
    use rayon::prelude::*;
    let Some(first) = stabs.first() else {
        return Err(Error::Invalid("no stabilizer generators".into()));
    };
    let n = first.num_qubits();
    if stabs.len() != n || stabs.iter().any(|s| s.num_qubits() != n) {
        return Err(Error::ShapeMismatch(format!(
            "{} generators for {n} qubits",
            stabs.len()
        )));
    }
    let ms: Vec<Matrix> = stabs.par_iter().map(add_terms).collect();
    let scale = C64::new(1.0 / (1u64 << n) as f64, 0.0);
    let rho = multiply_chain(&ms)?.mapv(|z| z * scale);
    Ok(DensityMatrix { n, rho })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{random_circuit, split_operators, Circuit, Instructor};
    use crate::engine::{init_stabilizers, run_map_stage};
    use crate::lut::construct_lut;
    use crate::oracle::{dense_pauli, density_from_statevector, simulate_statevector};

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn pipeline(circ: &Circuit) -> DensityMatrix {
        let seq = split_operators(circ);
        let luts = construct_lut(&seq).unwrap();
        let stabs = run_map_stage(&init_stabilizers(circ.num_qubits()).unwrap(), &seq, &luts).unwrap();
        to_density(&stabs).unwrap()
    }

    fn max_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn add_terms_initial_generator() {
        let m = add_terms(&init_stabilizers(1).unwrap()[0]);
        assert_eq!(m, ndarray::arr2(&[[c(2.0), c(0.0)], [c(0.0), c(0.0)]]));
    }

    #[test]
    fn add_terms_after_rotation() {
        let theta: f64 = 0.6;
        let mut s = StabilizerState::zeros(1);
        s.lambda_mut()[1] = theta.cos();
        s.lambda_mut()[3] = -theta.sin();
        let expected = dense_pauli(0, 1).unwrap() + dense_pauli(1, 1).unwrap() * c(theta.cos())
            - dense_pauli(3, 1).unwrap() * c(theta.sin());
        assert!(max_diff(&add_terms(&s), &expected) < 1e-15);
    }

    #[test]
    fn add_terms_matches_naive_sum_at_full_order() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        for n in 1..=4 {
            let lambda: Vec<f64> = (0..1 << (2 * n)).map(|_| rng.random_range(-1.0..1.0)).collect();
            let s = StabilizerState::from_lambda(n, lambda.clone()).unwrap();
            assert_eq!(s.order(), 1 << (2 * n));
            let mut naive = Array2::from_diag_elem(1 << n, c(1.0));
            for (i, l) in lambda.iter().enumerate() {
                naive = naive + dense_pauli(i, n).unwrap() * c(*l);
            }
            assert!(max_diff(&add_terms(&s), &naive) < 1e-12);
        }
    }

    #[test]
    fn multiply_chain_cases() {
        let m = ndarray::arr2(&[[c(1.0), c(2.0)], [c(3.0), c(4.0)]]);
        assert_eq!(multiply_chain(std::slice::from_ref(&m)).unwrap(), m);

        let ms: Vec<Matrix> = init_stabilizers(2).unwrap().iter().map(add_terms).collect();
        let prod = multiply_chain(&ms).unwrap();
        let mut expected = Array2::zeros((4, 4));
        expected[[0, 0]] = c(4.0);
        assert_eq!(prod, expected);

        assert!(multiply_chain(&[]).is_err());
        assert!(multiply_chain(&[m.clone(), Array2::zeros((4, 4))]).is_err());
        assert!(multiply_chain(&[Array2::zeros((2, 3))]).is_err());
    }

    #[test]
    fn tree_product_matches_left_fold() {
        for seed in 0..10 {
            let circ = random_circuit(4, 120, 300 + seed);
            let seq = split_operators(&circ);
            let stabs = run_map_stage(&init_stabilizers(4).unwrap(), &seq, &construct_lut(&seq).unwrap()).unwrap();
            let ms: Vec<Matrix> = stabs.iter().map(add_terms).collect();
            let tree = multiply_chain(&ms).unwrap();
            let fold = ms[1..].iter().fold(ms[0].clone(), |acc, m| acc.dot(m));
            let reversed = ms.iter().rev().skip(1).fold(ms[3].clone(), |acc, m| acc.dot(m));
            assert!(max_diff(&tree, &fold) < 1e-10);
            assert!(max_diff(&tree, &reversed) < 1e-10);
        }
    }

    #[test]
    fn density_of_simple_circuits() {
        let rho = pipeline(&Circuit::new(2));
        let mut expected = Array2::zeros((4, 4));
        expected[[0, 0]] = c(1.0);
        assert_eq!(rho.rho, expected);
        assert_eq!(rho.rho00(), 1.0);

        let h = Circuit::from_instructors(1, vec![Instructor::h(0)]).unwrap();
        let rho = pipeline(&h);
        assert!(rho.rho.iter().all(|z| (z - c(0.5)).norm() < 1e-15));
        assert!((rho.measure_z(0).unwrap() - 0.5).abs() < 1e-15);
        assert!((rho.rho00() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn measurement_after_ry() {
        let theta: f64 = 1.234;
        let ry = Circuit::from_instructors(1, vec![Instructor::ry(0, theta)]).unwrap();
        let rho = pipeline(&ry);
        assert!((rho.measure_z(0).unwrap() - (theta / 2.0).cos().powi(2)).abs() < 1e-12);
        assert!(rho.measure_z(1).is_err());
        let zero = pipeline(&Circuit::new(3));
        for k in 0..3 {
            assert_eq!(zero.measure_z(k).unwrap(), 1.0);
        }
    }

    #[test]
    fn random_circuits_match_oracle() {
        for seed in 0..40u64 {
            let n = 1 + (seed as usize % 4);
            let circ = random_circuit(n, 1 + (seed as usize * 53) % 200, 500 + seed);
            let rho = pipeline(&circ);
            let psi = simulate_statevector(&circ);
            let oracle = density_from_statevector(&psi);
            assert!(rho.frobenius_distance(&oracle) <= 1e-9, "seed {seed}");
            rho.check(1e-9).unwrap();
            assert!((rho.rho00() - psi.amp[0].norm_sqr()).abs() <= 1e-9);
            for k in 0..n {
                let bit = 1 << (n - 1 - k);
                let p1: f64 = (0..1 << n).filter(|r| r & bit != 0).map(|r| rho.rho[[r, r]].re).sum();
                assert!((rho.measure_z(k).unwrap() + p1 - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn pauli_sum_form_reconstructs_rho() {
        let circ = random_circuit(3, 50, 8);
        let rho = pipeline(&circ);
        let coeffs = crate::oracle::pauli_coefficients(&rho.rho, 3);
        let mut sum: Matrix = Array2::zeros((8, 8));
        for (i, k) in coeffs.iter().enumerate() {
            sum = sum + dense_pauli(i, 3).unwrap() * *k;
        }
        assert!((coeffs[0] - c(1.0 / 8.0)).norm() < 1e-12);
        assert!(max_diff(&sum, &rho.rho) < 1e-12);
    }

    #[test]
    fn binary_round_trip() {
        let rho = pipeline(&random_circuit(2, 30, 1));
        let mut buf = Vec::new();
        rho.write_bin(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 * 16);
        assert_eq!(DensityMatrix::read_bin(2, &buf).unwrap(), rho);
        assert!(DensityMatrix::read_bin(3, &buf).is_err());
    }

    #[test]
    fn csv_layout() {
        let h = Circuit::from_instructors(1, vec![Instructor::h(0)]).unwrap();
        let mut buf = Vec::new();
        pipeline(&h).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "row,col,re,im");
        assert_eq!(lines.len(), 5);
        assert!(lines[2].starts_with("0,1,"));
    }
}
