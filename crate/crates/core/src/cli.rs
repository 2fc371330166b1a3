//! `pstab` command-line front end.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 verification failure,
//! 3 I/O error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::circuit::{generate_wchain_zxz, parse_circuit, random_circuit, Circuit};
use crate::density::CHECK_TOLERANCE;
use crate::engine::{init_stabilizers, map_stabilizer};
use crate::error::Error;
use crate::lut::construct_lut;
use crate::oracle::{density_from_statevector, simulate_statevector};
use crate::pipeline::{simulate, simulate_faulty, Mode, Simulation};

/// Largest qubit count `verify` will run the dense oracle on.
pub const VERIFY_MAX_QUBITS: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "pstab", version, about = "Parallel extended-stabilizer circuit simulator")]
pub struct Cli {
    /// Worker threads (default: all available cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Seed for generated circuits.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a circuit and write its density matrix.
    Run(RunArgs),
    /// Compare the pipeline against the dense state-vector oracle.
    Verify(VerifyArgs),
    /// Trace the stabilizer order after every gate.
    Order(OrderArgs),
    /// Time the pipeline and the gate-by-gate baseline on the ansatz.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Ansatz {
    #[value(name = "wchain-zxz")]
    WchainZxz,
    Random,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Circuit file.
    #[arg(long, conflicts_with = "ansatz")]
    pub circuit: Option<PathBuf>,

    /// Generated circuit instead of a file.
    #[arg(long, value_enum)]
    pub ansatz: Option<Ansatz>,

    #[arg(long, default_value_t = 2)]
    pub qubits: usize,

    #[arg(long, default_value_t = 1)]
    pub layers: usize,

    #[arg(long, default_value_t = 1)]
    pub repeats: usize,

    /// Gate count for `--ansatz random`.
    #[arg(long, default_value_t = 200)]
    pub gates: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Bin,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    #[arg(long)]
    pub out: PathBuf,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Drop the last operator group before comparing (negative control).
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Args)]
pub struct OrderArgs {
    #[command(flatten)]
    pub source: SourceArgs,

    /// Output CSV (default: stdout).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![2, 3, 4])]
    pub qubits: Vec<usize>,

    #[arg(long, value_delimiter = ',', default_values_t = vec![100, 200, 300, 400, 500])]
    pub layers: Vec<usize>,

    #[arg(long, value_delimiter = ',', default_values_t = vec![1])]
    pub repeats: Vec<usize>,

    #[arg(long, default_value_t = 10)]
    pub runs: usize,

    #[arg(long)]
    pub csv: PathBuf,

    #[arg(long, value_enum, default_value_t = Switch::On)]
    pub baseline: Switch,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Parse(Error),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Parse(_) => 1,
            CliError::Verify(_) => 2,
            CliError::Io(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(io) => CliError::Io(io),
            other => CliError::Parse(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Parses `args` and runs the command, writing reports to `out`.
pub fn run_from_args<I, T>(args: I, out: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let threads = pool.current_num_threads();
    pool.install(|| match &cli.command {
        Command::Run(a) => cmd_run(a, cli.seed, out),
        Command::Verify(a) => cmd_verify(a, cli.seed, out),
        Command::Order(a) => cmd_order(a, cli.seed, out),
        Command::Bench(a) => cmd_bench(a, cli.seed, threads, out),
    })
}

pub fn load_circuit(src: &SourceArgs, seed: u64) -> CliResult<Circuit> {
    match (&src.circuit, src.ansatz) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path)?;
            Ok(parse_circuit(&text)?)
        }
        (None, Some(Ansatz::WchainZxz)) => Ok(generate_wchain_zxz(src.qubits, src.layers, src.repeats, seed)?),
        (None, Some(Ansatz::Random)) => {
            if src.qubits == 0 {
                return Err(CliError::Usage("--qubits must be at least 1".into()));
            }
            Ok(random_circuit(src.qubits, src.gates, seed))
        }
        (None, None) => Err(CliError::Usage("one of --circuit or --ansatz is required".into())),
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

pub fn cmd_run(args: &RunArgs, seed: u64, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let circuit = load_circuit(&args.source, seed)?;
    let sim: Simulation = simulate(&circuit, Mode::Grouped)?;
    sim.rho
        .check(CHECK_TOLERANCE)
        .map_err(|e| CliError::Verify(e.to_string()))?;
    let file = create(&args.out)?;
    match args.format {
        Format::Csv => sim.rho.write_csv(file)?,
        Format::Bin => sim.rho.write_bin(file)?,
    }
    let t = sim.timings;
    writeln!(out, "qubits={} gates={} K={} K'={}", circuit.num_qubits(), circuit.len(), sim.k_noncx, sim.k_cx)?;
    writeln!(out, "trace={:.12} rho00={:.12}", sim.rho.trace().re, sim.rho.rho00())?;
    for k in 0..circuit.num_qubits() {
        writeln!(out, "p0[{k}]={:.12}", sim.rho.measure_z(k)?)?;
    }
    writeln!(
        out,
        "encode_ms={:.3} map_ms={:.3} decode_ms={:.3} total_ms={:.3}",
        ms(t.encode),
        ms(t.map),
        ms(t.decode),
        ms(t.total())
    )?;
    Ok(())
}

pub fn cmd_verify(args: &VerifyArgs, seed: u64, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let circuit = load_circuit(&args.source, seed)?;
    if circuit.num_qubits() > VERIFY_MAX_QUBITS {
        return Err(CliError::Usage(format!(
            "oracle limited to {VERIFY_MAX_QUBITS} qubits, circuit has {}",
            circuit.num_qubits()
        )));
    }
    let sim = if args.inject_fault {
        simulate_faulty(&circuit, Mode::Grouped)?
    } else {
        simulate(&circuit, Mode::Grouped)?
    };
    let oracle = density_from_statevector(&simulate_statevector(&circuit));
    let dist = sim.rho.frobenius_distance(&oracle);
    writeln!(out, "qubits={} gates={} frobenius_distance={dist:e}", circuit.num_qubits(), circuit.len())?;
    if dist <= CHECK_TOLERANCE {
        writeln!(out, "PASS")?;
        Ok(())
    } else {
        writeln!(out, "FAIL")?;
        Err(CliError::Verify(format!("distance {dist:e} exceeds {CHECK_TOLERANCE:e}")))
    }
}

/// Stabilizer order of every generator after every gate, replayed one gate
/// per group. Rows are `(gate_idx, stabilizer_idx, order)`.
pub fn order_trace(circuit: &Circuit) -> crate::error::Result<Vec<(usize, usize, usize)>> {
    let seq = Mode::GateByGate.split(circuit);
    let luts = construct_lut(&seq)?;
    let mut rows = Vec::new();
    for (j, s) in init_stabilizers(circuit.num_qubits())?.iter().enumerate() {
        map_stabilizer(s, &seq, &luts, |gate, st| rows.push((gate, j, st.order())))?;
    }
    rows.sort_unstable();
    Ok(rows)
}

pub fn cmd_order(args: &OrderArgs, seed: u64, out: &mut (dyn Write + Send)) -> CliResult<()> {
    let circuit = load_circuit(&args.source, seed)?;
    let rows = order_trace(&circuit)?;
    let write_rows = |w: &mut dyn Write| -> io::Result<()> {
        writeln!(w, "gate_idx,stabilizer_idx,order")?;
        for (g, s, o) in &rows {
            writeln!(w, "{g},{s},{o}")?;
        }
        w.flush()
    };
    match &args.csv {
        Some(path) => write_rows(&mut create(path)?)?,
        None => write_rows(out)?,
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Encode,
    Map,
    Decode,
    Total,
    BaselineTotal,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Encode => "encode",
            Stage::Map => "map",
            Stage::Decode => "decode",
            Stage::Total => "total",
            Stage::BaselineTotal => "baseline_total",
        }
    }
}

/// One timed stage of one benchmark repetition.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub n: usize,
    pub layers: usize,
    pub repeats: usize,
    pub gates: usize,
    pub k: usize,
    pub kp: usize,
    pub stage: Stage,
    pub time_ms: f64,
    pub run_idx: usize,
    pub threads: usize,
}

impl BenchRecord {
    pub const CSV_HEADER: &'static str = "n,layers,repeats,gates,K,Kp,stage,time_ms,run_idx,threads";

    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{:.6},{},{}",
            self.n,
            self.layers,
            self.repeats,
            self.gates,
            self.k,
            self.kp,
            self.stage.name(),
            self.time_ms,
            self.run_idx,
            self.threads
        )
    }
}

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub qubits: Vec<usize>,
    pub layers: Vec<usize>,
    pub repeats: Vec<usize>,
    pub runs: usize,
    pub baseline: bool,
    pub seed: u64,
}

/// Runs the sweep on the current rayon pool; `threads` is only recorded.
///
/// Every configuration gets one untimed warm-up, then repetitions are taken
/// round-robin across configurations so that a transient slowdown of the
/// host is spread over the sweep instead of landing on one configuration.
pub fn run_bench(cfg: &BenchConfig, threads: usize) -> crate::error::Result<Vec<BenchRecord>> {
    let mut configs = Vec::new();
    for &n in &cfg.qubits {
        for &layers in &cfg.layers {
            for &repeats in &cfg.repeats {
                let circuit = generate_wchain_zxz(n, layers, repeats, cfg.seed)?;
                simulate(&circuit, Mode::Grouped)?;
                configs.push((n, layers, repeats, circuit));
            }
        }
    }
    let mut records = Vec::new();
    for run_idx in 0..cfg.runs {
        for (n, layers, repeats, circuit) in &configs {
            let sim = simulate(circuit, Mode::Grouped)?;
            let rec = |stage, d: Duration| BenchRecord {
                n: *n,
                layers: *layers,
                repeats: *repeats,
                gates: circuit.len(),
                k: sim.k_noncx,
                kp: sim.k_cx,
                stage,
                time_ms: ms(d),
                run_idx,
                threads,
            };
            let t = sim.timings;
            records.push(rec(Stage::Encode, t.encode));
            records.push(rec(Stage::Map, t.map));
            records.push(rec(Stage::Decode, t.decode));
            records.push(rec(Stage::Total, t.total()));
            if cfg.baseline {
                let base = simulate(circuit, Mode::GateByGate)?;
                records.push(rec(Stage::BaselineTotal, base.timings.total()));
            }
        }
    }
    Ok(records)
}

pub fn cmd_bench(args: &BenchArgs, seed: u64, threads: usize, out: &mut (dyn Write + Send)) -> CliResult<()> {
    if args.runs == 0 {
        return Err(CliError::Usage("--runs must be at least 1".into()));
    }
    let cfg = BenchConfig {
        qubits: args.qubits.clone(),
        layers: args.layers.clone(),
        repeats: args.repeats.clone(),
        runs: args.runs,
        baseline: args.baseline == Switch::On,
        seed,
    };
    let records = run_bench(&cfg, threads)?;
    let mut w = create(&args.csv)?;
    writeln!(w, "{}", BenchRecord::CSV_HEADER)?;
    for r in &records {
        writeln!(w, "{}", r.csv_line())?;
    }
    w.flush()?;
    writeln!(out, "wrote {} rows to {}", records.len(), args.csv.display())?;
    Ok(())
}
