//! Initial placements: trivial level-ordered filling and the two-pass
//! forward/reverse refinement.

use serde::{Deserialize, Serialize};

use crate::circuit::Circuit;
use crate::device::DeviceTopology;
use crate::placement::{trivial_mapping, Placement};
use crate::scheduler::{run_schedule, ScheduleError, SchedulerConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingStrategy {
    Trivial,
    #[default]
    Sabre,
}

impl std::str::FromStr for MappingStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "trivial" => Ok(MappingStrategy::Trivial),
            "sabre" => Ok(MappingStrategy::Sabre),
            other => Err(format!("unknown mapping `{other}`; expected trivial or sabre")),
        }
    }
}

/// Schedules the circuit forward from the trivial placement, then the
/// reversed circuit from where that left off, and returns the final
/// placement of the reverse pass. SWAP insertion is off in both passes.
pub fn sabre_mapping(
    circuit: &Circuit,
    topology: &DeviceTopology,
    config: &SchedulerConfig,
) -> Result<Placement, ScheduleError> {
    let start = trivial_mapping(circuit.num_qubits, topology)?;
    if circuit.gates.is_empty() {
        return Ok(start);
    }
    let pass = SchedulerConfig {
        swap_insert: false,
        ..config.clone()
    };
    let forward = run_schedule(circuit, topology, &start, &pass)?;
    let backward = run_schedule(&circuit.reversed(), topology, &forward.final_placement, &pass)?;
    Ok(backward.final_placement)
}

pub fn initial_mapping(
    strategy: MappingStrategy,
    circuit: &Circuit,
    topology: &DeviceTopology,
    config: &SchedulerConfig,
) -> Result<Placement, ScheduleError> {
    match strategy {
        MappingStrategy::Trivial => Ok(trivial_mapping(circuit.num_qubits, topology)?),
        MappingStrategy::Sabre => sabre_mapping(circuit, topology, config),
    }
}
