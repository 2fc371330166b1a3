//! Encode and Map stages.
//!
//! A stabilizer generator is a dense array `lambda` of length `4^n` holding
//! the weight of every Pauli string. A non-CX group is applied by gathering
//! the fused per-wire images from [`LutNonCx`] into a [`WeightTensor`] and
//! flattening it back; a CX group is a chain of signed permutations from
//! [`LutCx`]. Generators are independent and are mapped in parallel; within
//! one generator the groups form a strict sequential chain.

use rayon::prelude::*;

use crate::circuit::{OperatorGroup, OperatorSequence};
use crate::error::{Error, Result};
use crate::lut::{LutCx, LutNonCx, Luts, MAX_QUBITS};
use crate::pauli::{digit, Pauli, WeightVector, IDENTITY_WEIGHTS};

/// Weights with magnitude below this are set to exactly zero after flatten.
pub const PRUNE_EPSILON: f64 = 1e-14;

/// Arrays shorter than this are processed on the calling thread.
const PAR_MIN_LEN: usize = 1 << 12;
/// Flatten splits its rows into at most this many fixed chunks.
const FLATTEN_MAX_CHUNKS: usize = 16;
const FLATTEN_MIN_ROWS: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct StabilizerState {
    n: usize,
    lambda: Vec<f64>,
}

impl StabilizerState {
    pub fn zeros(n: usize) -> Self {
        StabilizerState {
            n,
            lambda: vec![0.0; 1 << (2 * n)],
        }
    }

    pub fn one_hot(n: usize, index: usize, value: f64) -> Self {
        let mut s = Self::zeros(n);
        s.lambda[index] = value;
        s
    }

    pub fn from_lambda(n: usize, lambda: Vec<f64>) -> Result<Self> {
        if lambda.len() != 1 << (2 * n) {
            return Err(Error::ShapeMismatch(format!(
                "lambda has {} entries, expected 4^{n}",
                lambda.len()
            )));
        }
        Ok(StabilizerState { n, lambda })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn lambda_mut(&mut self) -> &mut [f64] {
        &mut self.lambda
    }

    /// `(index, weight)` for every nonzero weight, in index order.
    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.lambda
            .iter()
            .enumerate()
            .filter(|(_, l)| **l != 0.0)
            .map(|(i, l)| (i, *l))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.lambda.iter().map(|l| l * l).sum()
    }

    pub fn order(&self) -> usize {
        stabilizer_order(self)
    }
}

/// Number of Pauli strings with nonzero weight.
pub fn stabilizer_order(s: &StabilizerState) -> usize {
    s.lambda.iter().filter(|l| **l != 0.0).count()
}

/// Generators of `|0...0>`: `Z` on wire `j`, identity elsewhere.
pub fn init_stabilizers(n: usize) -> Result<Vec<StabilizerState>> {
    if n == 0 {
        return Err(Error::TooFewQubits { min: 1, got: 0 });
    }
    if n > MAX_QUBITS {
        return Err(Error::Invalid(format!(
            "{n} qubits exceeds the supported maximum of {MAX_QUBITS}"
        )));
    }
    Ok((0..n)
        .map(|j| StabilizerState::one_hot(n, Pauli::Z.code() << (2 * (n - 1 - j)), 1.0))
        .collect())
}

/// Product-of-sums form: one row per source string, each row an `n x 4`
/// weight matrix stored contiguously.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTensor {
    pub n: usize,
    pub index: Vec<usize>,
    pub lambda: Vec<f64>,
    pub weights: Vec<WeightVector>,
}

impl WeightTensor {
    pub fn new(n: usize) -> Self {
        WeightTensor {
            n,
            index: Vec::new(),
            lambda: Vec::new(),
            weights: Vec::new(),
        }
    }

    pub fn push_row(&mut self, index: usize, lambda: f64, weights: &[WeightVector]) {
        assert_eq!(weights.len(), self.n);
        self.index.push(index);
        self.lambda.push(lambda);
        self.weights.extend_from_slice(weights);
    }

    pub fn len(&self) -> usize {
        self.lambda.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambda.is_empty()
    }

    pub fn row(&self, r: usize) -> &[WeightVector] {
        &self.weights[r * self.n..(r + 1) * self.n]
    }
}

/// Gathers the fused images of group `k` for every nonzero string of `s`.
pub fn expand_noncx(s: &StabilizerState, lut: &LutNonCx, k: usize) -> WeightTensor {
    let mut t = WeightTensor::new(s.n);
    expand_noncx_into(s, lut, k, &mut t);
    t
}

/// [`expand_noncx`] into a reused tensor.
pub fn expand_noncx_into(s: &StabilizerState, lut: &LutNonCx, k: usize, t: &mut WeightTensor) {
    let n = s.n;
    t.n = n;
    t.index.clear();
    t.lambda.clear();
    t.weights.clear();
    for (i, l) in s.terms() {
        t.index.push(i);
        t.lambda.push(l);
        for wire in 0..n {
            t.weights.push(lut.image(k, wire, digit(i, n, wire)));
        }
    }
}

fn scatter_row(weights: &[WeightVector], wire: usize, index: usize, value: f64, out: &mut [f64]) {
    let Some(w) = weights.get(wire) else {
        out[index] += value;
        return;
    };
    if *w == IDENTITY_WEIGHTS {
        return scatter_row(weights, wire + 1, index << 2, value, out);
    }
    for (a, &wa) in w.iter().enumerate() {
        if wa != 0.0 {
            scatter_row(weights, wire + 1, (index << 2) | a, value * wa, out);
        }
    }
}

fn flatten_rows(t: &WeightTensor, rows: std::ops::Range<usize>, out: &mut [f64]) {
    for r in rows {
        scatter_row(t.row(r), 0, 0, t.lambda[r], out);
    }
}

/// Pairwise merge in a fixed tree: `((p0 + p1) + (p2 + p3)) + ...`.
fn tree_sum(mut parts: Vec<Vec<f64>>) -> Vec<f64> {
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().unwrap_or_default()
}

/// Expands every row over the Cartesian product of its per-wire letter
/// choices and sums the products into a dense weight array.
///
/// Wires that carry the identity contribute only `I`, and zero weights are
/// never enumerated. Rows are split into a fixed number of chunks that
/// depends only on the row count, so the floating-point result does not
/// depend on the number of workers.
pub fn flatten(t: &WeightTensor) -> StabilizerState {
    let mut lambda = Vec::new();
    flatten_into(t, &mut lambda);
    StabilizerState { n: t.n, lambda }
}

/// [`flatten`] into a reused buffer, pruned.
pub fn flatten_into(t: &WeightTensor, out: &mut Vec<f64>) {
    let rows = t.len();
    let size = 1usize << (2 * t.n);
    let chunks = (rows / FLATTEN_MIN_ROWS).clamp(1, FLATTEN_MAX_CHUNKS);
    out.clear();
    if chunks == 1 {
        out.resize(size, 0.0);
        flatten_rows(t, 0..rows, out);
    } else {
        let per = rows.div_ceil(chunks);
        let parts = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut part = vec![0.0; size];
                flatten_rows(t, c * per..((c + 1) * per).min(rows), &mut part);
                part
            })
            .collect();
        *out = tree_sum(parts);
    }
    prune(out);
}

fn prune(lambda: &mut [f64]) {
    for l in lambda {
        if l.abs() < PRUNE_EPSILON {
            *l = 0.0;
        }
    }
}

/// Applies the CX gates of one group in order.
pub fn apply_cx_group(s: &StabilizerState, gates: &[(usize, usize)], lut: &LutCx) -> Result<StabilizerState> {
    let mut out = s.clone();
    apply_cx_in_place(&mut out.lambda, &mut Vec::new(), gates, lut)?;
    Ok(out)
}

fn apply_cx_in_place(cur: &mut Vec<f64>, spare: &mut Vec<f64>, gates: &[(usize, usize)], lut: &LutCx) -> Result<()> {
    spare.resize(cur.len(), 0.0);
    for &(c, t) in gates {
        let table = lut
            .get(c, t)
            .ok_or_else(|| Error::Invalid(format!("no CX table for ({c}, {t})")))?;
        // The permutation is an involution with sign[i] == sign[index[i]], so
        // the scatter next[index[i]] = sign[i] * cur[i] is the gather below.
        let src: &[f64] = cur;
        let gather = |(j, out): (usize, &mut f64)| {
            let v = src[table.index[j] as usize];
            *out = if table.sign[j] < 0 { -v } else { v };
        };
        if src.len() >= PAR_MIN_LEN {
            spare.par_iter_mut().enumerate().for_each(gather);
        } else {
            spare.iter_mut().enumerate().for_each(gather);
        }
        std::mem::swap(cur, spare);
    }
    Ok(())
}

/// Scratch buffers reused across the groups of one generator.
#[derive(Default)]
struct Scratch {
    tensor: Option<WeightTensor>,
    spare: Vec<f64>,
}

impl Scratch {
    fn apply(&mut self, s: &mut StabilizerState, group_pos: usize, seq: &OperatorSequence, luts: &Luts) -> Result<()> {
        match &seq.groups[group_pos] {
            OperatorGroup::NonCx { .. } => {
                let k = luts.noncx_slot[group_pos].expect("non-CX group has a table slot");
                let t = self.tensor.get_or_insert_with(|| WeightTensor::new(s.n));
                expand_noncx_into(s, &luts.noncx, k, t);
                flatten_into(t, &mut self.spare);
                std::mem::swap(&mut s.lambda, &mut self.spare);
                Ok(())
            }
            OperatorGroup::Cx { gates, .. } => apply_cx_in_place(&mut s.lambda, &mut self.spare, gates, &luts.cx),
        }
    }
}

/// Applies one group to one generator.
pub fn apply_group(s: &StabilizerState, group_pos: usize, seq: &OperatorSequence, luts: &Luts) -> Result<StabilizerState> {
    let mut out = s.clone();
    Scratch::default().apply(&mut out, group_pos, seq, luts)?;
    Ok(out)
}

/// Runs one generator through every group, calling `on_group` with the
/// position of each group and the state after it.
pub fn map_stabilizer(
    s: &StabilizerState,
    seq: &OperatorSequence,
    luts: &Luts,
    mut on_group: impl FnMut(usize, &StabilizerState),
) -> Result<StabilizerState> {
    let mut cur = s.clone();
    let mut scratch = Scratch::default();
    for pos in 0..seq.groups.len() {
        scratch.apply(&mut cur, pos, seq, luts)?;
        on_group(pos, &cur);
    }
    Ok(cur)
}

/// Map stage over all generators, one worker per generator.
pub fn run_map_stage(stabs: &[StabilizerState], seq: &OperatorSequence, luts: &Luts) -> Result<Vec<StabilizerState>> {
    stabs
        .par_iter()
        .map(|s| map_stabilizer(s, seq, luts, |_, _| {}))
        .collect()
}
