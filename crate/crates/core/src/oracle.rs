//! Exhaustive minimum-shuttle search for tiny single-module instances.
//!
//! States are (executed two-qubit gates, zone of every qubit). Running a
//! ready colocated gate costs nothing and moving one ion costs one
//! shuttle, so a 0-1 BFS finds the optimum. Chain order is irrelevant to
//! the count and single-qubit gates never constrain it.

use std::collections::{HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::Circuit;
use crate::device::{load_device, DeviceConfig, DeviceTopology, ModuleConfig, ZoneConfig, ZoneId};
use crate::placement::{trivial_mapping, Placement};

pub const MAX_QUBITS: usize = 5;
pub const MAX_TWO_QUBIT_GATES: usize = 6;
pub const MAX_ZONES: usize = 2;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("instance exceeds oracle limits: {0}")]
    LimitsExceeded(String),
    #[error("no legal schedule exists")]
    Infeasible,
}

fn check_limits(circuit: &Circuit, topology: &DeviceTopology) -> Result<(), OracleError> {
    if circuit.num_qubits > MAX_QUBITS {
        return Err(OracleError::LimitsExceeded(format!(
            "{} qubits (max {MAX_QUBITS})",
            circuit.num_qubits
        )));
    }
    let two = circuit.num_two_qubit();
    if two > MAX_TWO_QUBIT_GATES {
        return Err(OracleError::LimitsExceeded(format!(
            "{two} two-qubit gates (max {MAX_TWO_QUBIT_GATES})"
        )));
    }
    if topology.modules.len() != 1 || topology.num_zones() > MAX_ZONES {
        return Err(OracleError::LimitsExceeded(format!(
            "{} modules / {} zones (max 1 / {MAX_ZONES})",
            topology.modules.len(),
            topology.num_zones()
        )));
    }
    Ok(())
}

/// Fewest shuttles over every legal schedule starting from `placement`.
pub fn optimal_shuttles(
    circuit: &Circuit,
    topology: &DeviceTopology,
    placement: &Placement,
) -> Result<usize, OracleError> {
    check_limits(circuit, topology)?;
    let gates: Vec<(usize, usize)> = circuit
        .gates
        .iter()
        .filter(|g| g.is_two_qubit())
        .map(|g| g.pair())
        .collect();
    let n = circuit.num_qubits;
    // two-qubit predecessors by last use of each operand
    let mut last: Vec<Option<usize>> = vec![None; n];
    let mut preds = vec![0u32; gates.len()];
    for (i, &(a, b)) in gates.iter().enumerate() {
        for q in [a, b] {
            if let Some(p) = last[q] {
                preds[i] |= 1u32 << p;
            }
            last[q] = Some(i);
        }
    }
    let zones = topology.num_zones();
    let capacity: Vec<usize> = (0..zones).map(|z| topology.zone(ZoneId(z)).capacity).collect();
    let capable: Vec<bool> = (0..zones)
        .map(|z| topology.zone(ZoneId(z)).gate_capable())
        .collect();
    let full = (1u32 << gates.len()) - 1;

    type State = (u32, Vec<u8>);
    let start: State = (0, (0..n).map(|q| placement.zone_of(q).0 as u8).collect());
    let mut dist: HashMap<State, usize> = HashMap::from([(start.clone(), 0)]);
    let mut queue = VecDeque::from([(start, 0usize)]);
    while let Some(((done, at), d)) = queue.pop_front() {
        if dist.get(&(done, at.clone())).is_some_and(|&best| best < d) {
            continue;
        }
        if done == full {
            return Ok(d);
        }
        let mut relax = |next: State, cost: usize, queue: &mut VecDeque<(State, usize)>| {
            let nd = d + cost;
            if dist.get(&next).is_none_or(|&best| nd < best) {
                dist.insert(next.clone(), nd);
                if cost == 0 {
                    queue.push_front((next, nd));
                } else {
                    queue.push_back((next, nd));
                }
            }
        };
        for (i, &(a, b)) in gates.iter().enumerate() {
            let ready = done & (1 << i) == 0 && preds[i] & !done == 0;
            if ready && at[a] == at[b] && capable[at[a] as usize] {
                relax((done | (1 << i), at.clone()), 0, &mut queue);
            }
        }
        let mut load = vec![0usize; zones];
        for &z in &at {
            load[z as usize] += 1;
        }
        for q in 0..n {
            for z in 0..zones {
                if z != at[q] as usize && load[z] < capacity[z] {
                    let mut next = at.clone();
                    next[q] = z as u8;
                    relax((done, next), 1, &mut queue);
                }
            }
        }
    }
    Err(OracleError::Infeasible)
}

#[derive(Debug, Clone)]
pub struct TinyInstance {
    pub circuit: Circuit,
    pub topology: DeviceTopology,
    pub placement: Placement,
}

/// Two-zone module with the given `(level, capacity)` per zone.
pub fn two_zone_module(zones: [(u8, usize); 2]) -> DeviceTopology {
    load_device(&DeviceConfig {
        mode: Default::default(),
        modules: vec![ModuleConfig {
            id: 0,
            zones: zones
                .iter()
                .enumerate()
                .map(|(i, &(level, capacity))| ZoneConfig {
                    id: i,
                    level,
                    capacity,
                    position: i,
                    standalone: level == 2,
                })
                .collect(),
            adjacency: None,
        }],
        links: vec![],
        hop_distance_um: crate::device::DEFAULT_HOP_DISTANCE_UM,
        max_qubits_per_module: None,
        grid: None,
    })
    .expect("two-zone module is valid")
}

/// Random instance within the oracle limits, starting from the trivial
/// placement. Zones are either both gate-capable or storage plus operation.
pub fn random_tiny_instance(seed: u64) -> TinyInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=MAX_QUBITS);
    let storage = rng.gen_bool(0.5);
    // the gate zone must hold a pair; together the zones keep one slot spare
    let cap_gate = rng.gen_range(2..=n);
    let cap_other = (n + 1 - cap_gate).max(1) + rng.gen_range(0..=1);
    let levels = if storage { [0u8, 1] } else { [1u8, 1] };
    let caps = if storage || rng.gen_bool(0.5) {
        [cap_other, cap_gate]
    } else {
        [cap_gate, cap_other]
    };
    let topology = two_zone_module([(levels[0], caps[0]), (levels[1], caps[1])]);
    let mut circuit = Circuit::new(n);
    for _ in 0..rng.gen_range(1..=MAX_TWO_QUBIT_GATES) {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        if rng.gen_bool(0.2) {
            circuit.one("h", a);
        }
        circuit.cx(a, b);
    }
    let placement = trivial_mapping(n, &topology).expect("instance leaves a spare slot");
    TinyInstance {
        circuit,
        topology,
        placement,
    }
}
