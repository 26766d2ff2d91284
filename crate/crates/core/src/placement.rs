//! Logical-to-physical placement: which zone each qubit sits in and the
//! order of ions inside every zone's chain.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::Qubit;
use crate::device::{DeviceTopology, ModuleId, ZoneId};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PlacementError {
    #[error("{needed} qubits do not fit: device admits at most {available}")]
    CapacityExceeded { needed: usize, available: usize },
    #[error("zone {zone} holds {len} ions but has capacity {capacity}")]
    ZoneOverflow { zone: usize, len: usize, capacity: usize },
    #[error("module {module} holds {count} qubits, above the limit of {limit}")]
    ModuleOverflow { module: usize, count: usize, limit: usize },
    #[error("qubit {0} is placed more than once or not at all")]
    NotBijective(Qubit),
    #[error("placement names zone {0}, which the device lacks")]
    UnknownZone(usize),
    #[error("malformed placement document: {0}")]
    Format(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Placement {
    zone_of: Vec<ZoneId>,
    chains: Vec<Vec<Qubit>>,
}

impl Placement {
    /// Builds a placement from per-zone chains, checking it against the device.
    pub fn from_chains(
        topology: &DeviceTopology,
        num_qubits: usize,
        chains: Vec<Vec<Qubit>>,
    ) -> Result<Self, PlacementError> {
        if chains.len() > topology.num_zones() {
            return Err(PlacementError::UnknownZone(chains.len() - 1));
        }
        let mut chains = chains;
        chains.resize(topology.num_zones(), Vec::new());
        let mut zone_of = vec![None; num_qubits];
        for (z, chain) in chains.iter().enumerate() {
            for &q in chain {
                match zone_of.get_mut(q) {
                    Some(slot @ None) => *slot = Some(ZoneId(z)),
                    _ => return Err(PlacementError::NotBijective(q)),
                }
            }
        }
        let zone_of = zone_of
            .iter()
            .enumerate()
            .map(|(q, z)| z.ok_or(PlacementError::NotBijective(q)))
            .collect::<Result<Vec<_>, _>>()?;
        let p = Placement { zone_of, chains };
        p.validate(topology)?;
        Ok(p)
    }

    pub fn num_qubits(&self) -> usize {
        self.zone_of.len()
    }

    pub fn zone_of(&self, q: Qubit) -> ZoneId {
        self.zone_of[q]
    }

    pub fn module_of(&self, q: Qubit, topology: &DeviceTopology) -> ModuleId {
        topology.module_of(self.zone_of[q])
    }

    pub fn chain(&self, z: ZoneId) -> &[Qubit] {
        &self.chains[z.0]
    }

    pub fn chains(&self) -> &[Vec<Qubit>] {
        &self.chains
    }

    pub fn occupancy(&self, z: ZoneId) -> usize {
        self.chains[z.0].len()
    }

    pub fn free(&self, topology: &DeviceTopology, z: ZoneId) -> usize {
        topology.zone(z).capacity.saturating_sub(self.occupancy(z))
    }

    pub fn position(&self, q: Qubit) -> usize {
        let z = self.zone_of[q];
        self.chains[z.0]
            .iter()
            .position(|&x| x == q)
            .expect("placement index out of sync")
    }

    pub fn module_count(&self, topology: &DeviceTopology, m: ModuleId) -> usize {
        topology
            .module(m)
            .zones
            .iter()
            .map(|&z| self.occupancy(z))
            .sum()
    }

    /// Takes an ion out of its chain. The caller must re-insert it.
    pub(crate) fn detach(&mut self, q: Qubit) -> ZoneId {
        let z = self.zone_of[q];
        let pos = self.position(q);
        self.chains[z.0].remove(pos);
        z
    }

    pub(crate) fn attach(&mut self, q: Qubit, z: ZoneId) {
        self.chains[z.0].push(q);
        self.zone_of[q] = z;
    }

    /// Exchanges chain positions `i` and `i + 1` of a zone.
    pub(crate) fn swap_adjacent(&mut self, z: ZoneId, i: usize) {
        self.chains[z.0].swap(i, i + 1);
    }

    /// Two logical qubits trade physical slots.
    pub(crate) fn exchange(&mut self, a: Qubit, b: Qubit) {
        let (za, pa) = (self.zone_of[a], self.position(a));
        let (zb, pb) = (self.zone_of[b], self.position(b));
        self.chains[za.0][pa] = b;
        self.chains[zb.0][pb] = a;
        self.zone_of[a] = zb;
        self.zone_of[b] = za;
    }

    pub fn validate(&self, topology: &DeviceTopology) -> Result<(), PlacementError> {
        if self.chains.len() != topology.num_zones() {
            return Err(PlacementError::UnknownZone(self.chains.len()));
        }
        for (z, chain) in self.chains.iter().enumerate() {
            let capacity = topology.zone(ZoneId(z)).capacity;
            if chain.len() > capacity {
                return Err(PlacementError::ZoneOverflow {
                    zone: z,
                    len: chain.len(),
                    capacity,
                });
            }
            for &q in chain {
                if self.zone_of.get(q) != Some(&ZoneId(z)) {
                    return Err(PlacementError::NotBijective(q));
                }
            }
        }
        let placed: usize = self.chains.iter().map(Vec::len).sum();
        if placed != self.zone_of.len() {
            return Err(PlacementError::NotBijective(0));
        }
        for m in &topology.modules {
            let count = self.module_count(topology, m.id);
            if count > topology.max_qubits_per_module {
                return Err(PlacementError::ModuleOverflow {
                    module: m.id.0,
                    count,
                    limit: topology.max_qubits_per_module,
                });
            }
        }
        Ok(())
    }

    pub fn to_document(&self, topology: &DeviceTopology) -> PlacementDocument {
        PlacementDocument {
            qubits: (0..self.num_qubits())
                .map(|q| QubitSlot {
                    qubit: q,
                    module: self.module_of(q, topology).0,
                    zone: self.zone_of[q].0,
                    position: self.position(q),
                })
                .collect(),
            chains: self.chains.clone(),
        }
    }

    pub fn to_json(&self, topology: &DeviceTopology) -> String {
        serde_json::to_string_pretty(&self.to_document(topology)).expect("placement serializes")
    }

    pub fn from_json(topology: &DeviceTopology, text: &str) -> Result<Self, PlacementError> {
        let doc: PlacementDocument =
            serde_json::from_str(text).map_err(|e| PlacementError::Format(e.to_string()))?;
        Self::from_chains(topology, doc.qubits.len(), doc.chains)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QubitSlot {
    pub qubit: Qubit,
    pub module: usize,
    pub zone: usize,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlacementDocument {
    pub qubits: Vec<QubitSlot>,
    pub chains: Vec<Vec<Qubit>>,
}

/// Fills modules one after another; inside a module, zones are filled from
/// the highest level down, each to capacity, up to the module's load limit.
pub fn trivial_mapping(num_qubits: usize, topology: &DeviceTopology) -> Result<Placement, PlacementError> {
    let available = topology.total_load_limit();
    if num_qubits > available {
        return Err(PlacementError::CapacityExceeded {
            needed: num_qubits,
            available,
        });
    }
    let mut chains = vec![Vec::new(); topology.num_zones()];
    let mut next = 0;
    for m in &topology.modules {
        let mut budget = topology.module_load_limit(m.id);
        let mut order = m.zones.clone();
        order.sort_by_key(|&z| (std::cmp::Reverse(topology.zone(z).level), z));
        for z in order {
            while next < num_qubits && budget > 0 && chains[z.0].len() < topology.zone(z).capacity {
                chains[z.0].push(next);
                next += 1;
                budget -= 1;
            }
        }
    }
    debug_assert_eq!(next, num_qubits);
    Placement::from_chains(topology, num_qubits, chains)
}
