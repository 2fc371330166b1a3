//! Lookup tables for fused operator groups.
//!
//! [`LutNonCx`] holds, for every non-CX group `k` and wire `j`, the images of
//! `X`, `Y` and `Z` under the whole per-wire gate list `U_{k,j}`. `I` is fixed
//! by every single-qubit conjugation and is not stored.
//!
//! [`LutCx`] holds, for each ordered `(control, target)` pair, the signed
//! permutation that CX conjugation induces on string indices. Indices and
//! signs live in parallel arrays so the index array can be used directly as
//! a scatter offset.

use rayon::prelude::*;

use crate::circuit::{Instructor, OperatorGroup, OperatorSequence};
use crate::error::{Error, Result};
use crate::pauli::{apply_gate_to_weights, cx_pair_map, digit, Pauli, WeightVector, IDENTITY_WEIGHTS};

/// Largest qubit count the dense index tables support.
pub const MAX_QUBITS: usize = 12;

const CX_MIN_CHUNK: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub struct LutNonCx {
    n: usize,
    groups: usize,
    // [k * n + j][letter - 1]
    table: Vec<[WeightVector; 3]>,
}

impl LutNonCx {
    pub fn num_qubits(&self) -> usize {
        self.n
    }

    /// Number of non-CX groups covered (`K`).
    pub fn num_groups(&self) -> usize {
        self.groups
    }

    /// Images of `X`, `Y`, `Z` under `U_{k,j}`.
    pub fn rows(&self, k: usize, wire: usize) -> &[WeightVector; 3] {
        &self.table[k * self.n + wire]
    }

    pub fn image(&self, k: usize, wire: usize, letter: Pauli) -> WeightVector {
        match letter {
            Pauli::I => IDENTITY_WEIGHTS,
            p => self.rows(k, wire)[p.code() - 1],
        }
    }
}

/// Signed permutation for one `(control, target)` placement.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CxTable {
    pub control: usize,
    pub target: usize,
    pub index: Vec<u32>,
    pub sign: Vec<i8>,
}

impl CxTable {
    pub fn build(control: usize, target: usize, n: usize) -> Result<Self> {
        check_cx_args(0, control, target, n)?;
        let (index, sign) = (0..1usize << (2 * n))
            .into_par_iter()
            .with_min_len(CX_MIN_CHUNK)
            .map(|i| {
                let (j, s) = map_cx_unchecked(i, control, target, n);
                (j as u32, s)
            })
            .unzip();
        Ok(CxTable {
            control,
            target,
            index,
            sign,
        })
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LutCx {
    n: usize,
    // [control * n + target]
    tables: Vec<Option<CxTable>>,
}

impl LutCx {
    /// Tables for the given pairs only.
    pub fn for_pairs(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut tables: Vec<Option<CxTable>> = vec![None; n * n];
        let built = pairs
            .par_iter()
            .map(|&(c, t)| CxTable::build(c, t, n))
            .collect::<Result<Vec<_>>>()?;
        for table in built {
            let slot = table.control * n + table.target;
            tables[slot] = Some(table);
        }
        Ok(LutCx { n, tables })
    }

    /// All `n (n - 1)` placements.
    pub fn full(n: usize) -> Result<Self> {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|c| (0..n).filter(move |&t| t != c).map(move |t| (c, t)))
            .collect();
        Self::for_pairs(n, &pairs)
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, control: usize, target: usize) -> Option<&CxTable> {
        self.tables.get(control * self.n + target)?.as_ref()
    }

    pub fn tables(&self) -> impl Iterator<Item = &CxTable> {
        self.tables.iter().flatten()
    }

    /// Total number of signed entries, one CX pair-rule evaluation each.
    pub fn entry_count(&self) -> usize {
        self.tables().map(CxTable::len).sum()
    }
}

/// Both tables for one operator sequence.
#[derive(Clone, Debug)]
pub struct Luts {
    pub noncx: LutNonCx,
    pub cx: LutCx,
    /// Position of each group's table inside `noncx`, indexed like
    /// `OperatorSequence::groups`; `None` for CX groups.
    pub noncx_slot: Vec<Option<usize>>,
}

/// Images of `X`, `Y`, `Z` under a per-wire gate list, folded in order.
pub fn fuse_wire(gates: &[Instructor]) -> [WeightVector; 3] {
    [Pauli::X, Pauli::Y, Pauli::Z].map(|p| {
        gates.iter().fold(p.one_hot(), |w, g| {
            apply_gate_to_weights(w, g.gate, g.theta).expect("non-CX group holds single-qubit gates")
        })
    })
}

pub fn construct_noncx(seq: &OperatorSequence) -> LutNonCx {
    let n = seq.n;
    let groups: Vec<&Vec<Vec<Instructor>>> = seq
        .groups
        .iter()
        .filter_map(|g| match g {
            OperatorGroup::NonCx { by_wire, .. } => Some(by_wire),
            OperatorGroup::Cx { .. } => None,
        })
        .collect();
    let table = (0..groups.len() * n)
        .into_par_iter()
        .with_min_len(16)
        .map(|cell| fuse_wire(&groups[cell / n][cell % n]))
        .collect();
    LutNonCx {
        n,
        groups: groups.len(),
        table,
    }
}

/// Builds both tables. CX tables are only built for pairs that occur in
/// `seq`.
pub fn construct_lut(seq: &OperatorSequence) -> Result<Luts> {
    if seq.n > MAX_QUBITS {
        return Err(Error::Invalid(format!(
            "{} qubits exceeds the supported maximum of {MAX_QUBITS}",
            seq.n
        )));
    }
    let (noncx, cx) = rayon::join(|| construct_noncx(seq), || LutCx::for_pairs(seq.n, &seq.cx_pairs()));
    let mut next = 0;
    let noncx_slot = seq
        .groups
        .iter()
        .map(|g| {
            (!g.is_cx()).then(|| {
                next += 1;
                next - 1
            })
        })
        .collect();
    Ok(Luts {
        noncx,
        cx: cx?,
        noncx_slot,
    })
}

fn check_cx_args(index: usize, control: usize, target: usize, n: usize) -> Result<()> {
    if control >= n {
        return Err(Error::WireOutOfRange { wire: control, n });
    }
    if target >= n {
        return Err(Error::WireOutOfRange { wire: target, n });
    }
    if control == target {
        return Err(Error::EqualWires(control));
    }
    if index >= 1 << (2 * n) {
        return Err(Error::IndexOutOfRange { index, n });
    }
    Ok(())
}

/// Image of string `index` under `CX(control, target)` conjugation.
pub fn map_cx_index(index: usize, control: usize, target: usize, n: usize) -> Result<(usize, i8)> {
    check_cx_args(index, control, target, n)?;
    Ok(map_cx_unchecked(index, control, target, n))
}

#[inline]
fn map_cx_unchecked(index: usize, control: usize, target: usize, n: usize) -> (usize, i8) {
    let shift_c = 2 * (n - 1 - control);
    let shift_t = 2 * (n - 1 - target);
    let r = cx_pair_map(digit(index, n, control), digit(index, n, target));
    let cleared = index & !(3 << shift_c) & !(3 << shift_t);
    let out = cleared | (r.control.code() << shift_c) | (r.target.code() << shift_t);
    (out, r.sign)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{random_circuit, split_operators, Circuit};
    use crate::oracle::{conjugate_pauli, pauli_coefficients};

    #[test]
    fn single_ry_matches_worked_example() {
        let theta: f64 = 0.3;
        let c = Circuit::from_instructors(1, vec![Instructor::ry(0, theta)]).unwrap();
        let luts = construct_lut(&split_operators(&c)).unwrap();
        assert_eq!(luts.noncx.image(0, 0, Pauli::X), [0.0, theta.cos(), 0.0, -theta.sin()]);
        assert_eq!(luts.noncx.image(0, 0, Pauli::I), IDENTITY_WEIGHTS);
    }

    #[test]
    fn empty_wire_gives_identity_rows() {
        let c = Circuit::from_instructors(2, vec![Instructor::h(1)]).unwrap();
        let luts = construct_lut(&split_operators(&c)).unwrap();
        assert_eq!(
            luts.noncx.rows(0, 0),
            &[Pauli::X.one_hot(), Pauli::Y.one_hot(), Pauli::Z.one_hot()]
        );
        assert_eq!(luts.noncx.image(0, 1, Pauli::X), Pauli::Z.one_hot());
    }

    #[test]
    fn cx_examples() {
        assert_eq!(map_cx_index(4, 0, 1, 2).unwrap(), (5, 1));
        assert_eq!(map_cx_index(7, 0, 1, 2).unwrap(), (10, -1));
        for (c, t) in [(0, 1), (1, 0), (2, 0), (1, 2)] {
            assert_eq!(map_cx_index(0, c, t, 3).unwrap(), (0, 1));
        }
        assert_eq!(map_cx_index(16, 0, 2, 3).unwrap(), (17, 1));
        let cx = Circuit::from_instructors(3, vec![Instructor::cx(0, 2)]).unwrap();
        let coeffs = pauli_coefficients(&conjugate_pauli(16, &cx), 3);
        assert!((coeffs[17].re - 1.0).abs() < 1e-12);

        let table = LutCx::full(2).unwrap();
        let t01 = table.get(0, 1).unwrap();
        assert_eq!((t01.index[4], t01.sign[4]), (5, 1));
    }

    #[test]
    fn cx_precondition_errors() {
        assert!(map_cx_index(0, 1, 1, 2).is_err());
        assert!(map_cx_index(0, 2, 1, 2).is_err());
        assert!(map_cx_index(16, 0, 1, 2).is_err());
    }

    #[test]
    fn cx_tables_are_signed_involutions() {
        for n in 2..=4 {
            let lut = LutCx::full(n).unwrap();
            assert_eq!(lut.tables().count(), n * (n - 1));
            assert_eq!(lut.entry_count(), n * (n - 1) * (1 << (2 * n)));
            for table in lut.tables() {
                let mut seen = vec![false; table.len()];
                for (i, &j) in table.index.iter().enumerate() {
                    let j = j as usize;
                    assert!(!seen[j]);
                    seen[j] = true;
                    assert_eq!(table.index[j] as usize, i);
                    assert_eq!(table.sign[i] * table.sign[j], 1);
                }
                assert_eq!((table.index[0], table.sign[0]), (0, 1));
            }
        }
    }

    #[test]
    fn noncx_rows_match_dense_oracle() {
        for seed in 0..12 {
            let n = 1 + (seed as usize % 4);
            let c = random_circuit(n, 50 * n, seed);
            let seq = split_operators(&c);
            let luts = construct_lut(&seq).unwrap();
            for (g, slot) in seq.groups.iter().zip(&luts.noncx_slot) {
                let OperatorGroup::NonCx { by_wire, .. } = g else { continue };
                let k = slot.unwrap();
                for (wire, gates) in by_wire.iter().enumerate() {
                    let one = Circuit::from_instructors(
                        1,
                        gates.iter().map(|g| Instructor { wire: 0, ..*g }).collect(),
                    )
                    .unwrap();
                    for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                        let expected = pauli_coefficients(&conjugate_pauli(p.code(), &one), 1);
                        let got = luts.noncx.image(k, wire, p);
                        let norm: f64 = got.iter().map(|v| v * v).sum();
                        assert!((norm - 1.0).abs() < 1e-12);
                        for a in 0..4 {
                            assert!((expected[a].re - got[a]).abs() < 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn lazy_cx_covers_used_pairs_only() {
        let c = Circuit::from_instructors(
            3,
            vec![Instructor::cx(0, 1), Instructor::h(0), Instructor::cx(0, 1), Instructor::cx(2, 0)],
        )
        .unwrap();
        let luts = construct_lut(&split_operators(&c)).unwrap();
        assert_eq!(luts.cx.tables().count(), 2);
        assert!(luts.cx.get(0, 1).is_some() && luts.cx.get(2, 0).is_some());
        assert!(luts.cx.get(1, 0).is_none());
        assert_eq!(luts.noncx_slot, vec![None, Some(0), None]);
    }

    #[test]
    fn construction_independent_of_worker_count() {
        let seq = split_operators(&random_circuit(4, 300, 9));
        let build = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| construct_lut(&seq).unwrap())
        };
        let (a, b) = (build(1), build(4));
        assert_eq!(a.noncx, b.noncx);
        assert_eq!(a.cx, b.cx);
    }
}
