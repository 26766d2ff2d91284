//! Look-ahead weight table and the cross-module SWAP insertion rule.
//!
//! After a fiber gate, a qubit with no upcoming work on its own module but
//! heavy upcoming work on another module trades places with an idle qubit
//! over there, so the remaining gates run locally.

use std::collections::HashMap;

use crate::circuit::Qubit;
use crate::dag::DependencyDag;
use crate::device::{DeviceTopology, ModuleId, ZoneId};
use crate::placement::Placement;

pub const DEFAULT_LOOKAHEAD: usize = 8;
pub const DEFAULT_THRESHOLD: usize = 4;
/// A SWAP costs three entangling gates, so lower thresholds cannot pay off.
pub const MIN_THRESHOLD: usize = 3;

/// `W(q, c)`: two-qubit gates within the look-ahead window pairing `q`
/// with a qubit currently on module `c`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WeightTable {
    weights: HashMap<(Qubit, ModuleId), usize>,
    window: Vec<(Qubit, Qubit)>,
}

impl WeightTable {
    pub fn get(&self, q: Qubit, module: ModuleId) -> usize {
        self.weights.get(&(q, module)).copied().unwrap_or(0)
    }

    /// Window gates acting on both qubits.
    pub fn shared(&self, a: Qubit, b: Qubit) -> usize {
        self.window
            .iter()
            .filter(|&&(x, y)| (x == a && y == b) || (x == b && y == a))
            .count()
    }

    pub fn window_len(&self) -> usize {
        self.window.len()
    }

    pub fn is_empty(&self) -> bool {
        self.window.is_empty()
    }
}

pub fn compute_weight_table(
    dag: &DependencyDag,
    placement: &Placement,
    topology: &DeviceTopology,
    lookahead: usize,
) -> WeightTable {
    let mut table = WeightTable::default();
    for layer in dag.two_qubit_layers(lookahead) {
        for g in layer {
            let (a, b) = dag.gate(g).pair();
            *table.weights.entry((a, placement.module_of(b, topology))).or_default() += 1;
            *table.weights.entry((b, placement.module_of(a, topology))).or_default() += 1;
            table.window.push((a, b));
        }
    }
    table
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapDirective {
    pub qubit: Qubit,
    pub partner: Qubit,
    pub home: ModuleId,
    pub target: ModuleId,
    pub weight_home: usize,
    pub weight_target: usize,
    /// Optical zone on the target module, fiber-linked to the qubit's zone,
    /// where the partner must sit for the SWAP.
    pub partner_zone: ZoneId,
}

/// Decides whether `qubit` should trade places with a qubit on another
/// module. `lru` holds the last-use tick of every qubit.
pub fn maybe_insert_swap(
    qubit: Qubit,
    placement: &Placement,
    topology: &DeviceTopology,
    table: &WeightTable,
    lru: &[u64],
    threshold: usize,
) -> Option<SwapDirective> {
    let zone = placement.zone_of(qubit);
    let home = topology.module_of(zone);
    let weight_home = table.get(qubit, home);
    if weight_home != 0 {
        return None;
    }
    let mut targets: Vec<(ModuleId, usize, ZoneId)> = topology
        .modules
        .iter()
        .filter(|m| m.id != home)
        .filter_map(|m| {
            let w = table.get(qubit, m.id);
            let link = topology
                .fiber_partners(zone)
                .iter()
                .copied()
                .filter(|&z| topology.module_of(z) == m.id)
                .min()?;
            (w > threshold).then_some((m.id, w, link))
        })
        .collect();
    targets.sort_by_key(|&(m, w, _)| (std::cmp::Reverse(w), m));
    let (target, weight_target, partner_zone) = *targets.first()?;
    let partner = topology
        .module(target)
        .zones
        .iter()
        .flat_map(|&z| placement.chain(z).iter().copied())
        .filter(|&c| table.get(c, target) == 0 && table.shared(qubit, c) == 0)
        .min_by_key(|&c| (lru[c], c))?;
    Some(SwapDirective {
        qubit,
        partner,
        home,
        target,
        weight_home,
        weight_target,
        partner_zone,
    })
}
