//! End-to-end compilation, reports, parameter sweeps and idealized runs.

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, IgnoredTally};
use crate::cost::{CostParams, Summary};
use crate::device::{auto_size_device, grid_device, DeviceError, DeviceMode, DeviceTopology, ModuleTemplate};
use crate::mapper::{initial_mapping, MappingStrategy};
use crate::placement::Placement;
use crate::schedule::Decision;
use crate::scheduler::{run_schedule, ScheduleError, ScheduleOutcome, SchedulerConfig};
use crate::validate::{validate_schedule, Violation};

pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CompileOptions {
    pub mapping: MappingStrategy,
    pub scheduler: SchedulerConfig,
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub initial: Placement,
    pub outcome: ScheduleOutcome,
    pub violations: Vec<Violation>,
    pub wall_time: Duration,
}

impl Compiled {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn summary(&self) -> &Summary {
        &self.outcome.summary
    }
}

/// Map, schedule, price and validate.
pub fn compile(
    circuit: &Circuit,
    topology: &DeviceTopology,
    options: &CompileOptions,
) -> Result<Compiled, ScheduleError> {
    let started = Instant::now();
    options.scheduler.validate()?;
    let initial = initial_mapping(options.mapping, circuit, topology, &options.scheduler)?;
    let outcome = run_schedule(circuit, topology, &initial, &options.scheduler)?;
    let wall_time = started.elapsed();
    let violations = validate_schedule(
        &outcome.schedule.events,
        circuit,
        topology,
        &initial,
        &options.scheduler.cost,
    );
    Ok(Compiled {
        initial,
        outcome,
        violations,
        wall_time,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitInfo {
    pub name: String,
    /// `synthetic` for built-in generators, `file` for parsed input.
    pub source: String,
    pub num_qubits: usize,
    pub gates: usize,
    pub two_qubit_gates: usize,
    pub ignored: IgnoredTally,
}

impl CircuitInfo {
    pub fn new(name: &str, source: &str, circuit: &Circuit) -> Self {
        CircuitInfo {
            name: name.to_string(),
            source: source.to_string(),
            num_qubits: circuit.num_qubits,
            gates: circuit.gates.len(),
            two_qubit_gates: circuit.num_two_qubit(),
            ignored: circuit.ignored.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceInfo {
    pub mode: DeviceMode,
    pub modules: usize,
    pub zones: usize,
    pub links: usize,
    pub hop_distance_um: f64,
    pub max_qubits_per_module: usize,
}

impl From<&DeviceTopology> for DeviceInfo {
    fn from(d: &DeviceTopology) -> Self {
        DeviceInfo {
            mode: d.mode,
            modules: d.modules.len(),
            zones: d.num_zones(),
            links: d.links.len(),
            hop_distance_um: d.hop_distance_um,
            max_qubits_per_module: d.max_qubits_per_module,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub version: u32,
    pub circuit: CircuitInfo,
    pub device: DeviceInfo,
    pub options: CompileOptions,
    pub summary: Summary,
    pub valid: bool,
    pub violations: Vec<Violation>,
    pub wall_time_ms: f64,
    pub decisions: Vec<Decision>,
}

impl Report {
    pub fn new(circuit: CircuitInfo, topology: &DeviceTopology, options: &CompileOptions, compiled: &Compiled) -> Self {
        Report {
            version: REPORT_VERSION,
            circuit,
            device: DeviceInfo::from(topology),
            options: options.clone(),
            summary: compiled.outcome.summary.clone(),
            valid: compiled.is_valid(),
            violations: compiled.violations.clone(),
            wall_time_ms: compiled.wall_time.as_secs_f64() * 1e3,
            decisions: compiled.outcome.schedule.decisions.clone(),
        }
    }
}

/// How a sweep instantiates the device for each point.
#[derive(Debug, Clone, PartialEq)]
pub enum DeviceSpec {
    Auto(ModuleTemplate),
    Grid { rows: usize, cols: usize, trap_capacity: usize },
    Fixed(DeviceTopology),
}

impl DeviceSpec {
    pub fn build(&self, num_qubits: usize) -> Result<DeviceTopology, DeviceError> {
        match self {
            DeviceSpec::Auto(t) => auto_size_device(num_qubits, t),
            DeviceSpec::Grid {
                rows,
                cols,
                trap_capacity,
            } => grid_device(*rows, *cols, *trap_capacity),
            DeviceSpec::Fixed(d) => Ok(d.clone()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Capacity,
    Lookahead,
    OpticalZones,
}

impl std::str::FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "capacity" => Ok(SweepAxis::Capacity),
            "lookahead" => Ok(SweepAxis::Lookahead),
            "optical_zones" | "optical-zones" => Ok(SweepAxis::OpticalZones),
            other => Err(format!("unknown sweep axis `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: usize,
    pub shuttles: Option<usize>,
    pub makespan_us: Option<f64>,
    pub fidelity: Option<f64>,
    pub log10_fidelity: Option<f64>,
    pub valid: Option<bool>,
    pub wall_ms: f64,
    pub error: Option<String>,
}

fn point_setup(
    axis: SweepAxis,
    value: usize,
    device: &DeviceSpec,
    options: &CompileOptions,
) -> Result<(DeviceSpec, CompileOptions), String> {
    let mut device = device.clone();
    let mut options = options.clone();
    match (axis, &mut device) {
        (SweepAxis::Capacity, DeviceSpec::Auto(t)) => {
            for z in &mut t.zones {
                z.1 = value;
            }
        }
        (SweepAxis::Capacity, DeviceSpec::Grid { trap_capacity, .. }) => *trap_capacity = value,
        (SweepAxis::OpticalZones, DeviceSpec::Auto(t)) => {
            let capacity = t.zones.first().map_or(16, |z| z.1);
            *t = ModuleTemplate {
                max_qubits_per_module: t.max_qubits_per_module,
                hop_distance_um: t.hop_distance_um,
                fiber: t.fiber,
                ..ModuleTemplate::with_optical_zones(value, capacity)
            };
        }
        (SweepAxis::Lookahead, _) => options.scheduler.lookahead = value,
        (axis, _) => return Err(format!("{axis:?} sweeps need an auto-sized device")),
    }
    Ok((device, options))
}

/// One compilation per value, run in parallel. Failures are recorded in
/// their row and do not stop the sweep.
pub fn sweep(
    circuit: &Circuit,
    device: &DeviceSpec,
    options: &CompileOptions,
    axis: SweepAxis,
    values: &[usize],
) -> Vec<SweepPoint> {
    values
        .par_iter()
        .map(|&value| {
            let started = Instant::now();
            let result = point_setup(axis, value, device, options).and_then(|(device, options)| {
                let topology = device.build(circuit.num_qubits).map_err(|e| e.to_string())?;
                compile(circuit, &topology, &options).map_err(|e| e.to_string())
            });
            let wall_ms = started.elapsed().as_secs_f64() * 1e3;
            match result {
                Ok(c) => SweepPoint {
                    value,
                    shuttles: Some(c.outcome.summary.shuttle_count),
                    makespan_us: Some(c.outcome.summary.makespan_us),
                    fidelity: Some(c.outcome.summary.fidelity),
                    log10_fidelity: c.outcome.summary.log10_fidelity,
                    valid: Some(c.is_valid()),
                    wall_ms,
                    error: None,
                },
                Err(e) => SweepPoint {
                    value,
                    shuttles: None,
                    makespan_us: None,
                    fidelity: None,
                    log10_fidelity: None,
                    valid: None,
                    wall_ms,
                    error: Some(e),
                },
            }
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(axis: SweepAxis, points: &[SweepPoint], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let axis = serde_json::to_value(axis).expect("axis serializes");
    let axis = axis.as_str().unwrap_or("value");
    w.write_record([
        axis,
        "shuttles",
        "makespan_us",
        "fidelity",
        "log10_fidelity",
        "valid",
        "wall_ms",
        "error",
    ])?;
    let opt = |v: Option<String>| v.unwrap_or_default();
    for p in points {
        w.write_record([
            p.value.to_string(),
            opt(p.shuttles.map(|v| v.to_string())),
            opt(p.makespan_us.map(|v| v.to_string())),
            opt(p.fidelity.map(|v| v.to_string())),
            opt(p.log10_fidelity.map(|v| v.to_string())),
            opt(p.valid.map(|v| v.to_string())),
            format!("{:.3}", p.wall_ms),
            opt(p.error.clone()),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdealMode {
    PerfectGate,
    PerfectShuttle,
}

impl std::str::FromStr for IdealMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "perfect_gate" | "perfect-gate" => Ok(IdealMode::PerfectGate),
            "perfect_shuttle" | "perfect-shuttle" => Ok(IdealMode::PerfectShuttle),
            other => Err(format!("unknown ideal mode `{other}`")),
        }
    }
}

impl IdealMode {
    pub fn apply(self, cost: &CostParams) -> CostParams {
        let mut cost = cost.clone();
        match self {
            IdealMode::PerfectGate => cost.perfect_gate = true,
            IdealMode::PerfectShuttle => cost.perfect_shuttle = true,
        }
        cost
    }
}

/// Compiles with one physical error source idealized away.
pub fn ideal(
    circuit: &Circuit,
    topology: &DeviceTopology,
    options: &CompileOptions,
    modes: &[IdealMode],
) -> Result<Compiled, ScheduleError> {
    let mut options = options.clone();
    for m in modes {
        options.scheduler.cost = m.apply(&options.scheduler.cost);
    }
    compile(circuit, topology, &options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench;

    #[test]
    fn empty_circuit_report() {
        let d = auto_size_device(4, &ModuleTemplate::default()).unwrap();
        let c = Circuit::new(4);
        let opts = CompileOptions::default();
        let out = compile(&c, &d, &opts).unwrap();
        let s = out.summary();
        assert_eq!((s.shuttle_count, s.makespan_us, s.fidelity), (0, 0.0, 1.0));
        assert!(out.is_valid());
    }

    #[test]
    fn perfect_shuttle_keeps_background_pristine() {
        let c = bench::random_circuit(40, 300, 0.8, 1);
        let d = auto_size_device(40, &ModuleTemplate::default()).unwrap();
        let out = ideal(&c, &d, &CompileOptions::default(), &[IdealMode::PerfectShuttle]).unwrap();
        assert!(out.summary().shuttle_count > 0);
        assert!(out.summary().zone_heat.iter().all(|&h| h == 0.0));
    }

    #[test]
    fn ideal_with_no_modes_matches_compile() {
        let c = bench::qft(12);
        let d = auto_size_device(12, &ModuleTemplate::default()).unwrap();
        let opts = CompileOptions::default();
        let a = compile(&c, &d, &opts).unwrap();
        let b = ideal(&c, &d, &opts, &[]).unwrap();
        assert_eq!(a.outcome.schedule, b.outcome.schedule);
        assert_eq!(a.outcome.summary, b.outcome.summary);
    }

    #[test]
    fn sweep_records_failures_and_keeps_going() {
        let c = bench::ghz(20);
        let spec = DeviceSpec::Grid {
            rows: 1,
            cols: 2,
            trap_capacity: 16,
        };
        // capacity 4 cannot hold 20 qubits in two traps
        let points = sweep(&c, &spec, &CompileOptions::default(), SweepAxis::Capacity, &[4, 16]);
        assert_eq!(points.len(), 2);
        assert!(points[0].error.is_some());
        assert_eq!(points[1].valid, Some(true));
        let mut buf = Vec::new();
        write_sweep_csv(SweepAxis::Capacity, &points, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.starts_with("capacity,"));
    }
}
