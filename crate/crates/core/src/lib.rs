//! Shuttle scheduling for modular trapped-ion devices.
//!
//! The pipeline parses a circuit, builds a dependency DAG, maps logical
//! qubits onto zones of a multi-module QCCD device, and schedules gates
//! together with the ion shuttles they require. Each schedule is priced by
//! a time and fidelity model and can be replayed for legality checks.

pub mod bench;
pub mod circuit;
pub mod cost;
pub mod dag;
pub mod device;
pub mod harness;
pub mod mapper;
pub mod oracle;
pub mod placement;
pub mod qasm;
pub mod schedule;
pub mod scheduler;
pub mod swap;
pub mod validate;

pub use circuit::{Circuit, CircuitError, GateKind, GateOp, Qubit};
pub use cost::{shuttle_fidelity, twoq_gate_fidelity, CostError, CostParams, FidelityLedger, HeatLaw, Summary};
pub use dag::{DagError, DependencyDag};
pub use device::{
    auto_size_device, grid_device, load_device, DeviceConfig, DeviceError, DeviceMode, DeviceTopology,
    FiberTopology, ModuleId, ModuleTemplate, ZoneId,
};
pub use mapper::{initial_mapping, sabre_mapping, MappingStrategy};
pub use placement::{trivial_mapping, Placement, PlacementError};
pub use qasm::{parse_qasm, QasmError};
pub use schedule::{Decision, EventKind, Schedule, ScheduleEvent};
pub use scheduler::{run_schedule, ScheduleError, ScheduleOutcome, SchedulerConfig};
pub use validate::{validate_schedule, Violation};
pub use harness::{compile, CompileOptions, Compiled, Report};
pub use bench::Benchmark;
