use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use muss_ti_core::harness::{ideal, sweep, write_sweep_csv, CircuitInfo, DeviceSpec, IdealMode, SweepAxis};
use muss_ti_core::oracle::{optimal_shuttles, random_tiny_instance, OracleError};
use muss_ti_core::{
    parse_qasm, run_schedule, trivial_mapping, Benchmark, Circuit, CompileOptions, Compiled, CostParams,
    DeviceTopology, FiberTopology, MappingStrategy, ModuleTemplate, Report, SchedulerConfig,
};

#[derive(Parser, Debug)]
#[command(name = "muss-ti", version, about = "Shuttle scheduler for modular trapped-ion devices")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Map and schedule one circuit, then write the schedule and a report.
    Compile(CompileArgs),
    /// Recompile across values of one parameter and emit CSV.
    Sweep(SweepArgs),
    /// Compare against the exhaustive optimum on tiny instances.
    Oracle(OracleArgs),
    /// Compile with gate or shuttle errors idealized away.
    Ideal(IdealArgs),
}

#[derive(Args, Debug)]
struct Input {
    /// OpenQASM 2.0 file.
    #[arg(long, conflicts_with = "bench")]
    circuit: Option<PathBuf>,

    /// Built-in generator: ghz, bv, qft, qaoa, adder, sqrt, mixed, random.
    #[arg(long, requires = "qubits")]
    bench: Option<Benchmark>,

    #[arg(long)]
    qubits: Option<usize>,

    /// Seed for the randomized generators.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Fiber {
    Ring,
    AllToAll,
}

#[derive(Args, Debug)]
struct Device {
    /// Device config JSON.
    #[arg(long, conflicts_with_all = ["auto_size", "grid"])]
    device: Option<PathBuf>,

    /// Instantiate modules from the standard template; the value is the
    /// trap capacity. This is the default with capacity 16.
    #[arg(long, value_name = "CAP", num_args = 0..=1, default_missing_value = "16")]
    auto_size: Option<usize>,

    /// Plain QCCD grid, e.g. `2x2`.
    #[arg(long, value_name = "RxC", conflicts_with = "auto_size")]
    grid: Option<Grid>,

    /// Trap capacity for `--grid`.
    #[arg(long, default_value_t = 12)]
    trap_capacity: usize,

    #[arg(long, default_value_t = 1)]
    optical_zones: usize,

    #[arg(long, value_enum, default_value_t = Fiber::AllToAll)]
    fiber: Fiber,
}

#[derive(Clone, Copy, Debug)]
struct Grid {
    rows: usize,
    cols: usize,
}

impl std::str::FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (r, c) = s
            .split_once(['x', 'X'])
            .ok_or_else(|| format!("expected RxC, got `{s}`"))?;
        let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("`{v}`: {e}"));
        Ok(Grid {
            rows: parse(r)?,
            cols: parse(c)?,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args, Debug)]
struct Tuning {
    #[arg(long, default_value = "sabre")]
    mapping: MappingStrategy,

    #[arg(long, value_enum, default_value_t = Switch::On)]
    swap_insert: Switch,

    #[arg(long, default_value_t = 8)]
    lookahead: usize,

    #[arg(long, default_value_t = 4)]
    threshold: usize,

    /// JSON object overriding cost-model fields.
    #[arg(long, value_name = "FILE")]
    cost: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CompileArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    device: Device,
    #[command(flatten)]
    tuning: Tuning,
    /// Directory for schedule.jsonl, report.json and placement.json.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    device: Device,
    #[command(flatten)]
    tuning: Tuning,
    #[arg(long)]
    axis: SweepAxis,
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<usize>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    /// Tiny circuit; paired with `--device`.
    #[arg(long, requires = "device", conflicts_with = "tiny")]
    circuit: Option<PathBuf>,
    #[arg(long)]
    device: Option<PathBuf>,
    /// First seed of generated tiny instances.
    #[arg(long, default_value_t = 0)]
    tiny: u64,
    #[arg(long, default_value_t = 20)]
    count: u64,
}

#[derive(Args, Debug)]
struct IdealArgs {
    #[command(flatten)]
    input: Input,
    #[command(flatten)]
    device: Device,
    #[command(flatten)]
    tuning: Tuning,
    /// perfect_gate or perfect_shuttle; repeat for both.
    #[arg(long, required = true)]
    mode: Vec<IdealMode>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Process exit status per failure class.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Status {
    Validation = 2,
    Config = 3,
    Limits = 4,
}

#[derive(Debug)]
struct Failure {
    status: Status,
    error: anyhow::Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.error)
    }
}

trait OrStatus<T> {
    fn or_status(self, status: Status) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> OrStatus<T> for Result<T, E> {
    fn or_status(self, status: Status) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            status,
            error: e.into(),
        })
    }
}

fn config<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.or_status(Status::Config)
}

fn load_circuit(input: &Input) -> anyhow::Result<(Circuit, CircuitInfo)> {
    match (&input.circuit, input.bench) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let circuit = parse_qasm(&text).with_context(|| format!("parsing {}", path.display()))?;
            let name = path.file_stem().map_or("circuit".into(), |s| s.to_string_lossy());
            let info = CircuitInfo::new(&name, "file", &circuit);
            Ok((circuit, info))
        }
        (None, Some(b)) => {
            let n = input.qubits.context("--bench needs --qubits")?;
            let circuit = b.generate(n, input.seed);
            let info = CircuitInfo::new(&format!("{b}_{n}"), "synthetic", &circuit);
            Ok((circuit, info))
        }
        (None, None) => anyhow::bail!("one of --circuit or --bench is required"),
    }
}

fn device_spec(d: &Device) -> anyhow::Result<DeviceSpec> {
    if let Some(path) = &d.device {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let topology = DeviceTopology::from_json(&text).with_context(|| format!("loading {}", path.display()))?;
        return Ok(DeviceSpec::Fixed(topology));
    }
    if let Some(g) = d.grid {
        return Ok(DeviceSpec::Grid {
            rows: g.rows,
            cols: g.cols,
            trap_capacity: d.trap_capacity,
        });
    }
    let mut t = ModuleTemplate::with_optical_zones(d.optical_zones, d.auto_size.unwrap_or(16));
    t.fiber = match d.fiber {
        Fiber::Ring => FiberTopology::Ring,
        Fiber::AllToAll => FiberTopology::AllToAll,
    };
    Ok(DeviceSpec::Auto(t))
}

fn options(t: &Tuning) -> anyhow::Result<CompileOptions> {
    let cost = match &t.cost {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<CostParams>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => CostParams::default(),
    };
    let scheduler = SchedulerConfig {
        swap_insert: t.swap_insert == Switch::On,
        lookahead: t.lookahead,
        threshold: t.threshold,
        cost,
    };
    scheduler.validate()?;
    Ok(CompileOptions {
        mapping: t.mapping,
        scheduler,
    })
}

fn write_outputs(
    dir: Option<&Path>,
    info: CircuitInfo,
    topology: &DeviceTopology,
    options: &CompileOptions,
    compiled: &Compiled,
) -> anyhow::Result<()> {
    let report = Report::new(info, topology, options, compiled);
    let json = serde_json::to_string_pretty(&report)?;
    match dir {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            fs::write(dir.join("report.json"), json + "\n")?;
            fs::write(
                dir.join("schedule.jsonl"),
                compiled.outcome.schedule.to_jsonl(compiled.summary()),
            )?;
            fs::write(dir.join("placement.json"), compiled.initial.to_json(topology))?;
            info!("wrote outputs to {}", dir.display());
        }
        None => writeln!(io::stdout(), "{json}")?,
    }
    Ok(())
}

fn finish(compiled: &Compiled) -> Result<(), Failure> {
    let s = compiled.summary();
    eprintln!(
        "shuttles {}  makespan {:.0} us  fidelity {:.6e}  log10 {}",
        s.shuttle_count,
        s.makespan_us,
        s.fidelity,
        s.log10_fidelity.map_or("-inf".into(), |v| format!("{v:.4}")),
    );
    if compiled.is_valid() {
        return Ok(());
    }
    for v in &compiled.violations {
        warn!("{v:?}");
    }
    Err(Failure {
        status: Status::Validation,
        error: anyhow::anyhow!("schedule failed validation with {} violations", compiled.violations.len()),
    })
}

fn run_compile(
    input: &Input,
    device: &Device,
    tuning: &Tuning,
    modes: &[IdealMode],
    out: Option<&Path>,
) -> Result<(), Failure> {
    let (circuit, info) = config(load_circuit(input))?;
    let topology = config(device_spec(device).and_then(|s| Ok(s.build(circuit.num_qubits)?)))?;
    let options = config(options(tuning))?;
    info!(
        "{}: {} qubits, {} gates on {} zones",
        info.name,
        circuit.num_qubits,
        circuit.gates.len(),
        topology.num_zones()
    );
    let compiled = ideal(&circuit, &topology, &options, modes).or_status(Status::Config)?;
    let mut applied = options.clone();
    for m in modes {
        applied.scheduler.cost = m.apply(&applied.scheduler.cost);
    }
    config(write_outputs(out, info, &topology, &applied, &compiled))?;
    finish(&compiled)
}

fn run_sweep(args: &SweepArgs) -> Result<(), Failure> {
    let (circuit, _) = config(load_circuit(&args.input))?;
    let spec = config(device_spec(&args.device))?;
    let options = config(options(&args.tuning))?;
    let points = sweep(&circuit, &spec, &options, args.axis, &args.values);
    for p in &points {
        if let Some(e) = &p.error {
            warn!("{:?}={}: {e}", args.axis, p.value);
        }
    }
    let written = match &args.csv {
        Some(path) => fs::File::create(path)
            .with_context(|| format!("creating {}", path.display()))
            .and_then(|f| Ok(write_sweep_csv(args.axis, &points, f)?)),
        None => write_sweep_csv(args.axis, &points, io::stdout().lock()).map_err(Into::into),
    };
    config(written)?;
    if points.iter().any(|p| p.valid == Some(false)) {
        return Err(Failure {
            status: Status::Validation,
            error: anyhow::anyhow!("some sweep points failed validation"),
        });
    }
    Ok(())
}

fn oracle_row(label: &str, circuit: &Circuit, topology: &DeviceTopology, placement: &muss_ti_core::Placement) -> Result<(), Failure> {
    let optimum = match optimal_shuttles(circuit, topology, placement) {
        Ok(v) => v.to_string(),
        Err(e @ OracleError::LimitsExceeded(_)) => return Err(e).or_status(Status::Limits),
        Err(OracleError::Infeasible) => "infeasible".into(),
    };
    let ours = run_schedule(circuit, topology, placement, &SchedulerConfig::default())
        .map_or_else(|e| format!("error: {e}"), |o| o.schedule.shuttle_count.to_string());
    println!("{label:<12} {ours:>8} {optimum:>8}");
    Ok(())
}

fn run_oracle(args: &OracleArgs) -> Result<(), Failure> {
    println!("{:<12} {:>8} {:>8}", "instance", "muss-ti", "optimum");
    if let (Some(c), Some(d)) = (&args.circuit, &args.device) {
        let input = Input {
            circuit: Some(c.clone()),
            bench: None,
            qubits: None,
            seed: 0,
        };
        let (circuit, info) = config(load_circuit(&input))?;
        let topology = config(
            fs::read_to_string(d)
                .with_context(|| format!("reading {}", d.display()))
                .and_then(|t| Ok(DeviceTopology::from_json(&t)?)),
        )?;
        let placement = trivial_mapping(circuit.num_qubits, &topology).or_status(Status::Config)?;
        return oracle_row(&info.name, &circuit, &topology, &placement);
    }
    for seed in args.tiny..args.tiny + args.count {
        let inst = random_tiny_instance(seed);
        oracle_row(&format!("seed {seed}"), &inst.circuit, &inst.topology, &inst.placement)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("MUSS_TI_LOG", "warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Compile(a) => run_compile(&a.input, &a.device, &a.tuning, &[], a.out.as_deref()),
        Command::Ideal(a) => run_compile(&a.input, &a.device, &a.tuning, &a.mode, a.out.as_deref()),
        Command::Sweep(a) => run_sweep(a),
        Command::Oracle(a) => run_oracle(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.status as u8)
        }
    }
}
