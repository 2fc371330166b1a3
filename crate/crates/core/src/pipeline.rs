//! Encode -> Map -> Decode with per-stage wall-clock timing.

use std::time::{Duration, Instant};

use crate::circuit::{split_gate_by_gate, split_operators, Circuit, OperatorSequence};
use crate::density::{to_density, DensityMatrix};
use crate::engine::{init_stabilizers, run_map_stage, StabilizerState};
use crate::error::Result;
use crate::lut::{construct_lut, Luts};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Mode {
    /// Maximal runs of same-kind gates fused into one group.
    #[default]
    Grouped,
    /// Every gate is its own group.
    GateByGate,
}

impl Mode {
    pub fn split(self, c: &Circuit) -> OperatorSequence {
        match self {
            Mode::Grouped => split_operators(c),
            Mode::GateByGate => split_gate_by_gate(c),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub encode: Duration,
    pub map: Duration,
    pub decode: Duration,
}

impl StageTimings {
    pub fn total(&self) -> Duration {
        self.encode + self.map + self.decode
    }
}

#[derive(Clone, Debug)]
pub struct Simulation {
    pub rho: DensityMatrix,
    pub stabilizers: Vec<StabilizerState>,
    pub timings: StageTimings,
    pub k_noncx: usize,
    pub k_cx: usize,
}

pub fn simulate(c: &Circuit, mode: Mode) -> Result<Simulation> {
    simulate_inner(c, mode, false)
}

/// Same as [`simulate`] but silently skips the last operator group. Only
/// meant as a negative control for verification tooling.
pub fn simulate_faulty(c: &Circuit, mode: Mode) -> Result<Simulation> {
    simulate_inner(c, mode, true)
}

fn simulate_inner(c: &Circuit, mode: Mode, drop_last: bool) -> Result<Simulation> {
    let t0 = Instant::now();
    let mut seq = mode.split(c);
    if drop_last {
        seq.groups.pop();
    }
    let luts: Luts = construct_lut(&seq)?;
    let init = init_stabilizers(c.num_qubits())?;
    let t1 = Instant::now();
    let stabilizers = run_map_stage(&init, &seq, &luts)?;
    let t2 = Instant::now();
    let rho = to_density(&stabilizers)?;
    let t3 = Instant::now();
    Ok(Simulation {
        rho,
        stabilizers,
        timings: StageTimings {
            encode: t1 - t0,
            map: t2 - t1,
            decode: t3 - t2,
        },
        k_noncx: seq.k_noncx,
        k_cx: seq.k_cx,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::random_circuit;

    #[test]
    fn modes_agree() {
        let c = random_circuit(3, 90, 2);
        let a = simulate(&c, Mode::Grouped).unwrap();
        let b = simulate(&c, Mode::GateByGate).unwrap();
        assert!(a.rho.frobenius_distance(&b.rho) < 1e-10);
        assert!(a.timings.total() >= a.timings.map);
    }

    #[test]
    fn faulty_run_differs() {
        let c = random_circuit(2, 40, 6);
        let good = simulate(&c, Mode::Grouped).unwrap();
        let bad = simulate_faulty(&c, Mode::Grouped).unwrap();
        assert!(good.rho.frobenius_distance(&bad.rho) > 1e-6);
    }
}
