//! Base-4 Pauli-string codec and the elementary gate actions on Pauli
//! letters.
//!
//! A Pauli string `p_0 p_1 ... p_{n-1}` is stored as the integer whose
//! base-4 digits, most significant first, are the letters with
//! `I = 0, X = 1, Y = 2, Z = 3`. Wire 0 is the leftmost letter.

use std::fmt;

use crate::circuit::GateKind;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Pauli {
    I = 0,
    X = 1,
    Y = 2,
    Z = 3,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_code(code: usize) -> Pauli {
        Pauli::ALL[code & 3]
    }

    pub fn code(self) -> usize {
        self as usize
    }

    pub fn from_char(c: char) -> Option<Pauli> {
        match c.to_ascii_uppercase() {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    /// One-hot weight vector of this letter.
    pub fn one_hot(self) -> WeightVector {
        let mut w = [0.0; 4];
        w[self.code()] = 1.0;
        w
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = ['I', 'X', 'Y', 'Z'][self.code()];
        write!(f, "{c}")
    }
}

/// Coefficients `[w_I, w_X, w_Y, w_Z]` of a single-qubit Pauli sum.
pub type WeightVector = [f64; 4];

/// Identity letter as a weight vector.
pub const IDENTITY_WEIGHTS: WeightVector = [1.0, 0.0, 0.0, 0.0];

/// Big-endian base-4 value of a Pauli string.
pub fn string_to_index(letters: &[Pauli]) -> usize {
    letters.iter().fold(0, |acc, p| acc * 4 + p.code())
}

/// Inverse of [`string_to_index`] for an `n`-qubit string; short indices are
/// left-padded with `I`.
pub fn index_to_string(index: usize, n: usize) -> Result<Vec<Pauli>> {
    if n < usize::BITS as usize / 2 && index >= 1 << (2 * n) {
        return Err(Error::IndexOutOfRange { index, n });
    }
    Ok((0..n).map(|wire| digit(index, n, wire)).collect())
}

/// Letter on `wire` of the `n`-qubit string `index`.
#[inline]
pub fn digit(index: usize, n: usize, wire: usize) -> Pauli {
    Pauli::from_code(index >> (2 * (n - 1 - wire)))
}

/// Parses strings such as `"XYZ"`.
pub fn parse_string(s: &str) -> Result<Vec<Pauli>> {
    s.chars()
        .map(|c| Pauli::from_char(c).ok_or_else(|| Error::Invalid(format!("bad Pauli letter `{c}`"))))
        .collect()
}

pub fn format_string(letters: &[Pauli]) -> String {
    letters.iter().map(ToString::to_string).collect()
}

/// Conjugation `g P g^dagger` of a single-qubit Pauli sum, acting on its
/// weight vector.
///
/// | gate | output |
/// |------|--------|
/// | H  | `[w0, w3, -w2, w1]` |
/// | S  | `[w0, -w2, w1, w3]` |
/// | RX | `[w0, w1, w2 c - w3 s, w2 s + w3 c]` |
/// | RY | `[w0, w1 c + w3 s, w2, w3 c - w1 s]` |
/// | RZ | `[w0, w1 c - w2 s, w2 c + w1 s, w3]` |
///
/// with `c = cos(theta)`, `s = sin(theta)`.
pub fn apply_gate_to_weights(w: WeightVector, gate: GateKind, theta: f64) -> Result<WeightVector> {
    let [w0, w1, w2, w3] = w;
    let out = match gate {
        GateKind::H => [w0, w3, -w2, w1],
        GateKind::S => [w0, -w2, w1, w3],
        GateKind::Rx => {
            let (s, c) = theta.sin_cos();
            [w0, w1, w2 * c - w3 * s, w2 * s + w3 * c]
        }
        GateKind::Ry => {
            let (s, c) = theta.sin_cos();
            [w0, w1 * c + w3 * s, w2, w3 * c - w1 * s]
        }
        GateKind::Rz => {
            let (s, c) = theta.sin_cos();
            [w0, w1 * c - w2 * s, w2 * c + w1 * s, w3]
        }
        GateKind::Cx => {
            return Err(Error::Invalid("CX has no single-qubit weight map".into()))
        }
    };
    Ok(out)
}

/// Image of a (control, target) letter pair under CX conjugation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CxPairResult {
    pub control: Pauli,
    pub target: Pauli,
    pub sign: i8,
}

// Indexed by 4 * control + target.
const CX_RULES: [(Pauli, Pauli, i8); 16] = {
    use Pauli::*;
    [
        (I, I, 1),  // II
        (I, X, 1),  // IX
        (Z, Y, 1),  // IY
        (Z, Z, 1),  // IZ
        (X, X, 1),  // XI
        (X, I, 1),  // XX
        (Y, Z, 1),  // XY
        (Y, Y, -1), // XZ
        (Y, X, 1),  // YI
        (Y, I, 1),  // YX
        (X, Z, -1), // YY
        (X, Y, 1),  // YZ
        (Z, I, 1),  // ZI
        (Z, X, 1),  // ZX
        (I, Y, 1),  // ZY
        (I, Z, 1),  // ZZ
    ]
};

pub fn cx_pair_map(control: Pauli, target: Pauli) -> CxPairResult {
    let (c, t, sign) = CX_RULES[control.code() * 4 + target.code()];
    CxPairResult {
        control: c,
        target: t,
        sign,
    }
}
