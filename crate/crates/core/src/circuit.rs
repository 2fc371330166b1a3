//! Circuits as ordered instructor lists, their text format, the benchmark
//! ansatz, and the split into alternating operator groups.

use std::f64::consts::TAU;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    H,
    S,
    Rx,
    Ry,
    Rz,
    Cx,
}

impl GateKind {
    pub const ALL: [GateKind; 6] = [
        GateKind::H,
        GateKind::S,
        GateKind::Rx,
        GateKind::Ry,
        GateKind::Rz,
        GateKind::Cx,
    ];

    pub fn is_rotation(self) -> bool {
        matches!(self, GateKind::Rx | GateKind::Ry | GateKind::Rz)
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::H => "h",
            GateKind::S => "s",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::Rz => "rz",
            GateKind::Cx => "cx",
        }
    }
}

impl FromStr for GateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "h" => Ok(GateKind::H),
            "s" => Ok(GateKind::S),
            "rx" => Ok(GateKind::Rx),
            "ry" => Ok(GateKind::Ry),
            "rz" => Ok(GateKind::Rz),
            "cx" => Ok(GateKind::Cx),
            _ => Err(Error::UnknownGate(s.to_string())),
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One gate application: `{gate, wire, angle}`, plus the target wire for CX.
///
/// `theta` is exactly `0.0` for every gate that is not a rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Instructor {
    pub gate: GateKind,
    pub wire: usize,
    pub target: Option<usize>,
    pub theta: f64,
}

impl Instructor {
    pub fn h(wire: usize) -> Self {
        Self::single(GateKind::H, wire, 0.0)
    }

    pub fn s(wire: usize) -> Self {
        Self::single(GateKind::S, wire, 0.0)
    }

    pub fn rx(wire: usize, theta: f64) -> Self {
        Self::single(GateKind::Rx, wire, theta)
    }

    pub fn ry(wire: usize, theta: f64) -> Self {
        Self::single(GateKind::Ry, wire, theta)
    }

    pub fn rz(wire: usize, theta: f64) -> Self {
        Self::single(GateKind::Rz, wire, theta)
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Instructor {
            gate: GateKind::Cx,
            wire: control,
            target: Some(target),
            theta: 0.0,
        }
    }

    /// Single-qubit gate; the angle is dropped for non-rotations.
    pub fn single(gate: GateKind, wire: usize, theta: f64) -> Self {
        debug_assert!(gate != GateKind::Cx);
        Instructor {
            gate,
            wire,
            target: None,
            theta: if gate.is_rotation() { theta } else { 0.0 },
        }
    }

    pub fn is_cx(&self) -> bool {
        self.gate == GateKind::Cx
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.wire >= n {
            return Err(Error::WireOutOfRange { wire: self.wire, n });
        }
        match (self.gate, self.target) {
            (GateKind::Cx, Some(t)) => {
                if t >= n {
                    return Err(Error::WireOutOfRange { wire: t, n });
                }
                if t == self.wire {
                    return Err(Error::EqualWires(t));
                }
            }
            (GateKind::Cx, None) => return Err(Error::Invalid("CX without target".into())),
            (_, Some(_)) => {
                return Err(Error::Invalid(format!("{} takes a single wire", self.gate)))
            }
            (_, None) => {}
        }
        if !self.gate.is_rotation() && self.theta != 0.0 {
            return Err(Error::Invalid(format!("{} takes no angle", self.gate)));
        }
        if !self.theta.is_finite() {
            return Err(Error::Invalid("non-finite angle".into()));
        }
        Ok(())
    }
}

impl fmt::Display for Instructor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.gate {
            GateKind::H | GateKind::S => write!(f, "{} {}", self.gate, self.wire),
            GateKind::Rx | GateKind::Ry | GateKind::Rz => {
                write!(f, "{} {} {}", self.gate, self.wire, self.theta)
            }
            GateKind::Cx => write!(f, "cx {} {}", self.wire, self.target.unwrap_or(self.wire)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    n: usize,
    instructors: Vec<Instructor>,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Circuit {
            n,
            instructors: Vec::new(),
        }
    }

    pub fn from_instructors(n: usize, instructors: Vec<Instructor>) -> Result<Self> {
        let mut c = Circuit::new(n);
        for ins in instructors {
            c.push(ins)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, ins: Instructor) -> Result<()> {
        ins.check(self.n)?;
        self.instructors.push(ins);
        Ok(())
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn instructors(&self) -> &[Instructor] {
        &self.instructors
    }

    pub fn len(&self) -> usize {
        self.instructors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructors.is_empty()
    }

    /// Writes the circuit in the text format read by [`parse_circuit`].
    pub fn serialize(&self) -> String {
        let mut out = format!("qubits {}\n", self.n);
        for ins in &self.instructors {
            // writing to a String cannot fail
            let _ = writeln!(out, "{ins}");
        }
        out
    }
}

/// Parses the line-oriented circuit format.
///
/// ```text
/// # comment
/// qubits 3
/// h 0
/// rx 1 0.25
/// cx 0 2
/// ```
pub fn parse_circuit(text: &str) -> Result<Circuit> {
    let mut circuit: Option<Circuit> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line, msg };
        let tokens: Vec<&str> = body.split_whitespace().collect();

        let Some(c) = circuit.as_mut() else {
            if tokens.len() != 2 || !tokens[0].eq_ignore_ascii_case("qubits") {
                return Err(err("expected `qubits N` header".into()));
            }
            let n = tokens[1]
                .parse::<usize>()
                .map_err(|_| err(format!("bad qubit count `{}`", tokens[1])))?;
            if n == 0 {
                return Err(err("qubit count must be positive".into()));
            }
            circuit = Some(Circuit::new(n));
            continue;
        };

        let gate: GateKind = tokens[0].parse().map_err(|e: Error| err(e.to_string()))?;
        let wire = |tok: Option<&&str>| -> Result<usize> {
            let tok = tok.ok_or_else(|| err("missing wire".into()))?;
            tok.parse::<usize>()
                .map_err(|_| err(format!("bad wire `{tok}`")))
        };
        let expected = match gate {
            GateKind::H | GateKind::S => 2,
            _ => 3,
        };
        if gate.is_rotation() && tokens.len() == 2 {
            return Err(err(format!("missing angle for {gate}")));
        }
        if tokens.len() != expected {
            return Err(err(format!(
                "{gate} expects {} operands, got {}",
                expected - 1,
                tokens.len() - 1
            )));
        }
        let w = wire(tokens.get(1))?;
        let ins = match gate {
            GateKind::Cx => Instructor::cx(w, wire(tokens.get(2))?),
            g if g.is_rotation() => {
                let theta = tokens[2]
                    .parse::<f64>()
                    .map_err(|_| err(format!("bad angle `{}`", tokens[2])))?;
                Instructor::single(g, w, theta)
            }
            g => Instructor::single(g, w, 0.0),
        };
        c.push(ins).map_err(|e| err(e.to_string()))?;
    }
    circuit.ok_or(Error::Parse {
        line: text.lines().count().max(1),
        msg: "missing `qubits N` header".into(),
    })
}

/// Builds the `W_chain + ZXZ` benchmark ansatz.
///
/// Each layer is the rotation block (`RZ RX RZ` on every wire, `repeats`
/// times) followed by the chain block (`RY` on wires `0..n-1`, then the CX
/// ladder `CX(j, j+1)`). The rotation block comes first so that every layer
/// contributes exactly one non-CX group and one CX group, giving
/// `K = K' = layers`. All angles are uniform in `[0, 2pi)` from a ChaCha8
/// stream seeded with `seed`.
pub fn generate_wchain_zxz(n: usize, layers: usize, repeats: usize, seed: u64) -> Result<Circuit> {
    if n < 2 {
        return Err(Error::TooFewQubits { min: 2, got: n });
    }
    if layers == 0 || repeats == 0 {
        return Err(Error::Invalid("layers and repeats must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut angle = || rng.random_range(0.0..TAU);
    let per_layer = 3 * n * repeats + 2 * (n - 1);
    let mut ins = Vec::with_capacity(layers * per_layer);
    for _ in 0..layers {
        for _ in 0..repeats {
            for j in 0..n {
                ins.push(Instructor::rz(j, angle()));
                ins.push(Instructor::rx(j, angle()));
                ins.push(Instructor::rz(j, angle()));
            }
        }
        for j in 0..n - 1 {
            ins.push(Instructor::ry(j, angle()));
        }
        for j in 0..n - 1 {
            ins.push(Instructor::cx(j, j + 1));
        }
    }
    Circuit::from_instructors(n, ins)
}

/// Random circuit over the full gate set, used by tests and `verify`.
pub fn random_circuit(n: usize, gates: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    for _ in 0..gates {
        let kinds: &[GateKind] = if n >= 2 {
            &GateKind::ALL
        } else {
            &GateKind::ALL[..5]
        };
        let gate = kinds[rng.random_range(0..kinds.len())];
        let wire = rng.random_range(0..n);
        let ins = match gate {
            GateKind::Cx => {
                let mut t = rng.random_range(0..n - 1);
                if t >= wire {
                    t += 1;
                }
                Instructor::cx(wire, t)
            }
            g => Instructor::single(g, wire, rng.random_range(0.0..TAU)),
        };
        c.push(ins).expect("generated instructor is valid");
    }
    c
}

/// A maximal run of same-kind gates.
#[derive(Clone, Debug, PartialEq)]
pub enum OperatorGroup {
    /// `U_k`: single-qubit gates, partitioned per wire in circuit order.
    NonCx {
        k: usize,
        by_wire: Vec<Vec<Instructor>>,
    },
    /// `V_k`: CX gates as `(control, target)` in circuit order.
    Cx { k: usize, gates: Vec<(usize, usize)> },
}

impl OperatorGroup {
    pub fn is_cx(&self) -> bool {
        matches!(self, OperatorGroup::Cx { .. })
    }

    pub fn index(&self) -> usize {
        match self {
            OperatorGroup::NonCx { k, .. } | OperatorGroup::Cx { k, .. } => *k,
        }
    }

    pub fn gate_count(&self) -> usize {
        match self {
            OperatorGroup::NonCx { by_wire, .. } => by_wire.iter().map(Vec::len).sum(),
            OperatorGroup::Cx { gates, .. } => gates.len(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSequence {
    pub n: usize,
    pub groups: Vec<OperatorGroup>,
    /// Number of non-CX groups (`K`).
    pub k_noncx: usize,
    /// Number of CX groups (`K'`).
    pub k_cx: usize,
}

impl OperatorSequence {
    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn noncx_groups(&self) -> impl Iterator<Item = &OperatorGroup> {
        self.groups.iter().filter(|g| !g.is_cx())
    }

    pub fn cx_pairs(&self) -> Vec<(usize, usize)> {
        let mut pairs: Vec<(usize, usize)> = self
            .groups
            .iter()
            .filter_map(|g| match g {
                OperatorGroup::Cx { gates, .. } => Some(gates.iter().copied()),
                _ => None,
            })
            .flatten()
            .collect();
        pairs.sort_unstable();
        pairs.dedup();
        pairs
    }

    /// Concatenates the groups back into a circuit; per-wire lists of a
    /// non-CX group are emitted wire by wire.
    pub fn to_circuit(&self) -> Circuit {
        let mut ins = Vec::new();
        for g in &self.groups {
            match g {
                OperatorGroup::NonCx { by_wire, .. } => {
                    ins.extend(by_wire.iter().flatten().copied());
                }
                OperatorGroup::Cx { gates, .. } => {
                    ins.extend(gates.iter().map(|&(c, t)| Instructor::cx(c, t)));
                }
            }
        }
        Circuit {
            n: self.n,
            instructors: ins,
        }
    }
}

/// Splits a circuit into maximal alternating runs of non-CX and CX gates.
pub fn split_operators(c: &Circuit) -> OperatorSequence {
    split_with(c, |prev, next| prev.is_cx() == next.is_cx())
}

/// One group per instructor. This is the gate-by-gate baseline: consecutive
/// groups may share a kind, so the result does not alternate.
pub fn split_gate_by_gate(c: &Circuit) -> OperatorSequence {
    split_with(c, |_, _| false)
}

fn split_with(c: &Circuit, same_group: impl Fn(&Instructor, &Instructor) -> bool) -> OperatorSequence {
    let n = c.num_qubits();
    let mut seq = OperatorSequence {
        n,
        groups: Vec::new(),
        k_noncx: 0,
        k_cx: 0,
    };
    let mut prev: Option<&Instructor> = None;
    for ins in c.instructors() {
        let extend = prev.is_some_and(|p| same_group(p, ins));
        if !extend {
            let group = if ins.is_cx() {
                seq.k_cx += 1;
                OperatorGroup::Cx {
                    k: seq.k_cx - 1,
                    gates: Vec::new(),
                }
            } else {
                seq.k_noncx += 1;
                OperatorGroup::NonCx {
                    k: seq.k_noncx - 1,
                    by_wire: vec![Vec::new(); n],
                }
            };
            seq.groups.push(group);
        }
        match seq.groups.last_mut() {
            Some(OperatorGroup::Cx { gates, .. }) => {
                gates.push((ins.wire, ins.target.expect("CX has a target")))
            }
            Some(OperatorGroup::NonCx { by_wire, .. }) => by_wire[ins.wire].push(*ins),
            None => unreachable!(),
        }
        prev = Some(ins);
    }
    seq
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_single_gate() {
        let c = parse_circuit("qubits 1\nh 0").unwrap();
        assert_eq!(c.num_qubits(), 1);
        assert_eq!(c.instructors(), &[Instructor::h(0)]);
    }

    #[test]
    fn parse_rotation_and_cx() {
        let c = parse_circuit("qubits 3\nrx 0 0.5\ncx 0 1").unwrap();
        assert_eq!(c.num_qubits(), 3);
        assert_eq!(c.instructors(), &[Instructor::rx(0, 0.5), Instructor::cx(0, 1)]);
    }

    #[test]
    fn parse_comments_and_case() {
        let text = "# header\n\nQUBITS 2  # two\n  RY 1 -0.25 # rot\nCx 1 0\n";
        let c = parse_circuit(text).unwrap();
        assert_eq!(c.instructors(), &[Instructor::ry(1, -0.25), Instructor::cx(1, 0)]);
    }

    fn parse_err(text: &str) -> (usize, String) {
        match parse_circuit(text) {
            Err(Error::Parse { line, msg }) => (line, msg),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let (line, msg) = parse_err("qubits 2\ncx 1 1");
        assert_eq!(line, 2);
        assert!(msg.contains("CX with equal wires"), "{msg}");

        let (line, msg) = parse_err("qubits 2\nh 0\nt 1");
        assert_eq!(line, 3);
        assert!(msg.contains("unknown gate"), "{msg}");

        let (line, msg) = parse_err("qubits 2\n\nh 2");
        assert_eq!(line, 3);
        assert!(msg.contains("out of range"), "{msg}");

        let (line, msg) = parse_err("qubits 2\nrz 0");
        assert_eq!(line, 2);
        assert!(msg.contains("missing angle"), "{msg}");

        let (line, _) = parse_err("qubits 2\nrz 0 abc");
        assert_eq!(line, 2);
        let (line, _) = parse_err("qubits 2\nh 0 1");
        assert_eq!(line, 2);
        let (line, _) = parse_err("h 0");
        assert_eq!(line, 1);
        let (_, msg) = parse_err("# nothing\n");
        assert!(msg.contains("header"));
    }

    #[test]
    fn serialize_round_trip() {
        let c = random_circuit(3, 60, 11);
        assert_eq!(parse_circuit(&c.serialize()).unwrap(), c);
    }

    #[test]
    fn ansatz_gate_count() {
        let c = generate_wchain_zxz(2, 1, 1, 0).unwrap();
        assert_eq!(c.len(), 8);
        let count = |g| c.instructors().iter().filter(|i| i.gate == g).count();
        assert_eq!(count(GateKind::Ry), 1);
        assert_eq!(count(GateKind::Cx), 1);
        assert_eq!(count(GateKind::Rz), 4);
        assert_eq!(count(GateKind::Rx), 2);
    }

    #[test]
    fn ansatz_k_equals_layers() {
        let seq = split_operators(&generate_wchain_zxz(2, 5, 1, 0).unwrap());
        assert_eq!((seq.k_noncx, seq.k_cx), (5, 5));
        for n in 2..=5 {
            for repeats in 1..=3 {
                let seq = split_operators(&generate_wchain_zxz(n, 7, repeats, 3).unwrap());
                assert_eq!((seq.k_noncx, seq.k_cx), (7, 7));
            }
        }
    }

    #[test]
    fn ansatz_deterministic_and_angles_in_range() {
        let a = generate_wchain_zxz(3, 4, 2, 42).unwrap();
        let b = generate_wchain_zxz(3, 4, 2, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate_wchain_zxz(3, 4, 2, 43).unwrap());
        assert!(a
            .instructors()
            .iter()
            .filter(|i| i.gate.is_rotation())
            .all(|i| (0.0..TAU).contains(&i.theta)));
        assert!(generate_wchain_zxz(1, 1, 1, 0).is_err());
    }

    #[test]
    fn split_mixed() {
        let c = Circuit::from_instructors(
            2,
            vec![
                Instructor::h(0),
                Instructor::rx(0, 0.1),
                Instructor::cx(0, 1),
                Instructor::h(1),
            ],
        )
        .unwrap();
        let seq = split_operators(&c);
        assert_eq!((seq.k_noncx, seq.k_cx), (2, 1));
        assert_eq!(
            seq.groups,
            vec![
                OperatorGroup::NonCx {
                    k: 0,
                    by_wire: vec![vec![Instructor::h(0), Instructor::rx(0, 0.1)], vec![]],
                },
                OperatorGroup::Cx {
                    k: 0,
                    gates: vec![(0, 1)]
                },
                OperatorGroup::NonCx {
                    k: 1,
                    by_wire: vec![vec![], vec![Instructor::h(1)]],
                },
            ]
        );
    }

    #[test]
    fn split_starting_with_cx() {
        let c = Circuit::from_instructors(2, vec![Instructor::cx(0, 1), Instructor::h(0)]).unwrap();
        let seq = split_operators(&c);
        assert!(seq.groups[0].is_cx());
        assert!(!seq.groups[1].is_cx());
        assert_eq!((seq.k_noncx, seq.k_cx), (1, 1));
    }

    #[test]
    fn split_empty() {
        let seq = split_operators(&Circuit::new(3));
        assert!(seq.is_empty());
        assert_eq!((seq.k_noncx, seq.k_cx), (0, 0));
    }

    #[test]
    fn split_alternates_and_is_idempotent() {
        for seed in 0..20 {
            let c = random_circuit(4, 120, seed);
            let seq = split_operators(&c);
            assert!(seq.groups.windows(2).all(|w| w[0].is_cx() != w[1].is_cx()));
            assert!(seq.k_noncx.abs_diff(seq.k_cx) <= 1);
            assert_eq!(seq.groups.iter().map(OperatorGroup::gate_count).sum::<usize>(), c.len());
            let again = split_operators(&seq.to_circuit());
            assert_eq!(again, seq);
        }
    }

    #[test]
    fn gate_by_gate_has_one_gate_per_group() {
        let c = random_circuit(3, 40, 5);
        let seq = split_gate_by_gate(&c);
        assert_eq!(seq.groups.len(), 40);
        assert!(seq.groups.iter().all(|g| g.gate_count() == 1));
        assert_eq!(seq.to_circuit(), c);
    }
}
