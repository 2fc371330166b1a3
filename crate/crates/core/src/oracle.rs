//! Brute-force dense references: a state-vector simulator and literal
//! Kronecker products of Pauli strings.
//!
//! Nothing here shares code with the stabilizer pipeline; it exists so the
//! pipeline can be checked against something independent. Rotations follow
//! `R_a(theta) = exp(-i theta sigma_a / 2)`.

use std::f64::consts::FRAC_1_SQRT_2;

use ndarray::Array2;

use crate::circuit::{Circuit, GateKind, Instructor};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::{Matrix, C64};

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub n: usize,
    pub amp: Vec<C64>,
}

impl StateVector {
    pub fn zero_state(n: usize) -> Self {
        let mut amp = vec![C64::new(0.0, 0.0); 1 << n];
        amp[0] = C64::new(1.0, 0.0);
        StateVector { n, amp }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply(&mut self, ins: &Instructor) {
        let n = self.n;
        let bit = |wire: usize| 1usize << (n - 1 - wire);
        match ins.gate {
            GateKind::Cx => {
                let cb = bit(ins.wire);
                let tb = bit(ins.target.expect("CX has a target"));
                for r in 0..self.amp.len() {
                    if r & cb != 0 && r & tb == 0 {
                        self.amp.swap(r, r | tb);
                    }
                }
            }
            g => {
                let m = single_qubit_matrix(g, ins.theta);
                let b = bit(ins.wire);
                for r in 0..self.amp.len() {
                    if r & b == 0 {
                        let a0 = self.amp[r];
                        let a1 = self.amp[r | b];
                        self.amp[r] = m[0][0] * a0 + m[0][1] * a1;
                        self.amp[r | b] = m[1][0] * a0 + m[1][1] * a1;
                    }
                }
            }
        }
    }
}

/// Textbook 2x2 unitary of a single-qubit gate.
pub fn single_qubit_matrix(gate: GateKind, theta: f64) -> [[C64; 2]; 2] {
    let r = |x: f64| C64::new(x, 0.0);
    let z = r(0.0);
    let (s, c) = (theta / 2.0).sin_cos();
    match gate {
        GateKind::H => [[r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)], [r(FRAC_1_SQRT_2), r(-FRAC_1_SQRT_2)]],
        GateKind::S => [[r(1.0), z], [z, C64::new(0.0, 1.0)]],
        GateKind::Rx => [[r(c), C64::new(0.0, -s)], [C64::new(0.0, -s), r(c)]],
        GateKind::Ry => [[r(c), r(-s)], [r(s), r(c)]],
        GateKind::Rz => [[C64::new(c, -s), z], [z, C64::new(c, s)]],
        GateKind::Cx => panic!("CX is a two-qubit gate"),
    }
}

pub fn simulate_statevector(c: &Circuit) -> StateVector {
    let mut psi = StateVector::zero_state(c.num_qubits());
    for ins in c.instructors() {
        psi.apply(ins);
    }
    psi
}

/// `|psi><psi|`.
pub fn density_from_statevector(psi: &StateVector) -> DensityMatrix {
    let d = psi.amp.len();
    let rho = Array2::from_shape_fn((d, d), |(r, c)| psi.amp[r] * psi.amp[c].conj());
    DensityMatrix::from_matrix(psi.n, rho)
}

fn pauli_2x2(code: usize) -> [[C64; 2]; 2] {
    let r = |x: f64| C64::new(x, 0.0);
    let i = |x: f64| C64::new(0.0, x);
    match code {
        0 => [[r(1.0), r(0.0)], [r(0.0), r(1.0)]],
        1 => [[r(0.0), r(1.0)], [r(1.0), r(0.0)]],
        2 => [[r(0.0), i(-1.0)], [i(1.0), r(0.0)]],
        3 => [[r(1.0), r(0.0)], [r(0.0), r(-1.0)]],
        _ => unreachable!(),
    }
}

fn kron(a: &Matrix, b: &[[C64; 2]; 2]) -> Matrix {
    let d = a.nrows();
    Array2::from_shape_fn((2 * d, 2 * d), |(r, c)| a[[r / 2, c / 2]] * b[r % 2][c % 2])
}

/// Literal Kronecker product `p_0 (x) p_1 (x) ... (x) p_{n-1}`.
pub fn dense_pauli(index: usize, n: usize) -> Result<Matrix> {
    if index >= 1 << (2 * n) {
        return Err(Error::IndexOutOfRange { index, n });
    }
    let mut m = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
    for wire in 0..n {
        let code = (index >> (2 * (n - 1 - wire))) & 3;
        m = kron(&m, &pauli_2x2(code));
    }
    Ok(m)
}

/// Dense unitary of a circuit, column by column.
pub fn circuit_unitary(c: &Circuit) -> Matrix {
    let d = 1usize << c.num_qubits();
    let mut u = Array2::zeros((d, d));
    for col in 0..d {
        let mut psi = StateVector {
            n: c.num_qubits(),
            amp: vec![C64::new(0.0, 0.0); d],
        };
        psi.amp[col] = C64::new(1.0, 0.0);
        for ins in c.instructors() {
            psi.apply(ins);
        }
        for (row, a) in psi.amp.into_iter().enumerate() {
            u[[row, col]] = a;
        }
    }
    u
}

/// `U P U^dagger` for the Pauli string `index` and the circuit unitary `U`.
pub fn conjugate_pauli(index: usize, c: &Circuit) -> Matrix {
    let u = circuit_unitary(c);
    let p = dense_pauli(index, c.num_qubits()).expect("index within range");
    let udag = u.t().mapv(|z| z.conj());
    u.dot(&p).dot(&udag)
}

/// Pauli-basis expansion `m = sum_i c_i P_i`, with `c_i = tr(P_i m) / 2^n`.
pub fn pauli_coefficients(m: &Matrix, n: usize) -> Vec<C64> {
    let d = (1usize << n) as f64;
    (0..1usize << (2 * n))
        .map(|i| {
            let p = dense_pauli(i, n).expect("index within range");
            let mut tr = C64::new(0.0, 0.0);
            for r in 0..p.nrows() {
                for k in 0..p.ncols() {
                    tr += p[[r, k]] * m[[k, r]];
                }
            }
            tr / d
        })
        .collect()
}
