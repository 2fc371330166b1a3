//! Parallel extended-stabilizer simulation of deep, few-qubit parameterized
//! circuits.
//!
//! A circuit over `{H, S, RX, RY, RZ, CX}` is split into alternating runs of
//! single-qubit gates and CX gates. Each run is fused into a lookup table, the
//! `n` stabilizer generators are pushed through the tables as dense arrays of
//! Pauli-string weights, and the density matrix is rebuilt from the final
//! generators as `2^-n * prod_j (I + P_j)`.
//!
//! The pipeline stages map onto modules:
//!
//! * [`circuit`]: instructors, the text format, the benchmark ansatz and the
//!   operator split.
//! * [`pauli`]: base-4 Pauli codec and the elementary gate maps.
//! * [`lut`]: the fused per-wire tables and the signed CX permutations.
//! * [`engine`]: encode and map stages.
//! * [`composer`] and [`density`]: decode stage.
//! * [`oracle`]: dense state-vector reference used for verification.
//! * [`cli`]: the `pstab` command-line front end.

pub mod circuit;
pub mod cli;
pub mod composer;
pub mod density;
pub mod engine;
pub mod error;
pub mod lut;
pub mod oracle;
pub mod pauli;
pub mod pipeline;

pub use circuit::{Circuit, GateKind, Instructor, OperatorGroup, OperatorSequence};
pub use density::DensityMatrix;
pub use engine::StabilizerState;
pub use error::{Error, Result};
pub use pipeline::{simulate, Mode, StageTimings};

/// Complex scalar used by all dense matrices.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix, row-major.
pub type Matrix = ndarray::Array2<C64>;
