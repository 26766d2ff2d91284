//! The scheduling loop: drain executable gates, otherwise pick the oldest
//! frontier gate, choose a zone for it, evict least-recently-used ions as
//! needed, and shuttle operands in.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{Circuit, GateOp, Qubit};
use crate::cost::{summarize, CostError, CostParams, FidelityLedger, Summary};
use crate::dag::DependencyDag;
use crate::device::{DeviceTopology, ModuleId, ZoneId};
use crate::placement::{Placement, PlacementError};
use crate::schedule::{Decision, EventKind, Schedule, ScheduleEvent};
use crate::swap::{compute_weight_table, maybe_insert_swap, DEFAULT_LOOKAHEAD, DEFAULT_THRESHOLD, MIN_THRESHOLD};

#[derive(Debug, Error, PartialEq)]
pub enum ScheduleError {
    #[error("gate {gate}: no fiber-linked optical zones join modules {a} and {b}")]
    NoFeasibleZone { gate: usize, a: ModuleId, b: ModuleId },
    #[error("gate {gate}: module {module} has no free slot to evict into")]
    DeviceFull { gate: usize, module: ModuleId },
    #[error("qubit {qubit}: no path from {from} to {to}")]
    NoPath { qubit: Qubit, from: ZoneId, to: ZoneId },
    #[error("circuit uses {circuit} qubits but the placement holds {placement}")]
    WidthMismatch { circuit: usize, placement: usize },
    #[error("invalid scheduler config: {0}")]
    Config(String),
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchedulerConfig {
    pub swap_insert: bool,
    pub lookahead: usize,
    pub threshold: usize,
    pub cost: CostParams,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig {
            swap_insert: true,
            lookahead: DEFAULT_LOOKAHEAD,
            threshold: DEFAULT_THRESHOLD,
            cost: CostParams::default(),
        }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<(), ScheduleError> {
        if self.lookahead == 0 {
            return Err(ScheduleError::Config("lookahead must be at least 1".into()));
        }
        if self.threshold < MIN_THRESHOLD {
            return Err(ScheduleError::Config(format!(
                "threshold must be at least {MIN_THRESHOLD}, got {}",
                self.threshold
            )));
        }
        self.cost.validate()?;
        Ok(())
    }
}

/// Where a non-executable two-qubit gate will run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZoneTarget {
    Local(ZoneId),
    /// Optical zones for the first and second operand.
    Remote(ZoneId, ZoneId),
}

/// Zone preference for a local gate; smaller is better.
type LocalKey = (bool, usize, u32, std::cmp::Reverse<u8>, std::cmp::Reverse<usize>, ZoneId);

#[derive(Debug, Clone)]
pub struct MachineState {
    pub placement: Placement,
    pub lru: Vec<u64>,
    pub zone_clock: Vec<f64>,
    pub qubit_clock: Vec<f64>,
    pub tick: u64,
    pub shuttle_count: usize,
    pub ledger: FidelityLedger,
    pub events: Vec<ScheduleEvent>,
    pub decisions: Vec<Decision>,
    /// Partners of each qubit's remaining circuit two-qubit gates, in order.
    pub upcoming: Vec<VecDeque<Qubit>>,
    pub lookahead: usize,
}

impl MachineState {
    pub fn new(placement: Placement, topology: &DeviceTopology, cost: CostParams) -> Self {
        let n = placement.num_qubits();
        MachineState {
            placement,
            lru: vec![0; n],
            zone_clock: vec![0.0; topology.num_zones()],
            qubit_clock: vec![0.0; n],
            tick: 0,
            shuttle_count: 0,
            ledger: FidelityLedger::new(cost, topology.num_zones()),
            events: Vec::new(),
            decisions: Vec::new(),
            upcoming: vec![VecDeque::new(); n],
            lookahead: DEFAULT_LOOKAHEAD,
        }
    }

    /// Loads the per-qubit partner queues used to break zone ties.
    pub fn with_circuit(mut self, circuit: &Circuit, lookahead: usize) -> Self {
        for g in circuit.gates.iter().filter(|g| g.is_two_qubit()) {
            let (a, b) = g.pair();
            self.upcoming[a].push_back(b);
            self.upcoming[b].push_back(a);
        }
        self.lookahead = lookahead;
        self
    }

    /// Upcoming gates of `q`, past the one being placed, whose partner sits in `zone`.
    fn affinity(&self, q: Qubit, zone: ZoneId) -> usize {
        self.upcoming[q]
            .iter()
            .skip(1)
            .take(self.lookahead)
            .filter(|&&p| self.placement.zone_of(p) == zone)
            .count()
    }

    /// Two-qubit gates run when both operands share a gate-capable zone or
    /// sit in fiber-linked optical zones. Single-qubit gates always run.
    pub fn executable(&self, gate: &GateOp, topology: &DeviceTopology) -> bool {
        if !gate.is_two_qubit() {
            return true;
        }
        let (a, b) = gate.pair();
        let (za, zb) = (self.placement.zone_of(a), self.placement.zone_of(b));
        if za == zb {
            topology.zone(za).gate_capable()
        } else {
            topology.linked(za, zb)
        }
    }

    fn free_outside(&self, topology: &DeviceTopology, zone: ZoneId) -> usize {
        topology
            .module(topology.module_of(zone))
            .zones
            .iter()
            .filter(|&&z| z != zone)
            .map(|&z| self.placement.free(topology, z))
            .sum()
    }

    /// Whether `incoming` ions can be admitted into `zone`, evicting one
    /// resident per missing slot. Operands leave their old zones as they
    /// arrive, so a single free slot elsewhere suffices.
    fn admissible(&self, topology: &DeviceTopology, zone: ZoneId, incoming: usize) -> bool {
        incoming <= self.placement.free(topology, zone) || self.free_outside(topology, zone) > 0
    }

    fn evictions_needed(&self, topology: &DeviceTopology, zone: ZoneId, incoming: usize) -> usize {
        incoming.saturating_sub(self.placement.free(topology, zone))
    }

    /// Destination for a gate whose operands are not yet colocated.
    pub fn select_zone(&self, gate: &GateOp, topology: &DeviceTopology) -> Result<ZoneTarget, ScheduleError> {
        let (a, b) = gate.pair();
        let (za, zb) = (self.placement.zone_of(a), self.placement.zone_of(b));
        let (ma, mb) = (topology.module_of(za), topology.module_of(zb));
        if ma != mb {
            let mut best: Option<((u32, usize, ZoneId, ZoneId), ZoneTarget)> = None;
            for oa in topology.optical_zones(ma) {
                for &ob in topology.fiber_partners(oa) {
                    if topology.module_of(ob) != mb {
                        continue;
                    }
                    let in_a = usize::from(za != oa);
                    let in_b = usize::from(zb != ob);
                    if !self.admissible(topology, oa, in_a) || !self.admissible(topology, ob, in_b) {
                        continue;
                    }
                    let hops = topology.hops(za, oa) + topology.hops(zb, ob);
                    let evictions =
                        self.evictions_needed(topology, oa, in_a) + self.evictions_needed(topology, ob, in_b);
                    let key = (hops, evictions, oa, ob);
                    if best.as_ref().is_none_or(|(k, _)| key < *k) {
                        best = Some((key, ZoneTarget::Remote(oa, ob)));
                    }
                }
            }
            return match best {
                Some((_, t)) => Ok(t),
                None if topology
                    .optical_zones(ma)
                    .any(|oa| topology.fiber_partners(oa).iter().any(|&ob| topology.module_of(ob) == mb)) =>
                {
                    Err(ScheduleError::DeviceFull { gate: gate.id, module: ma })
                }
                None => Err(ScheduleError::NoFeasibleZone { gate: gate.id, a: ma, b: mb }),
            };
        }

        let mut best: Option<(LocalKey, ZoneId)> = None;
        for &z in &topology.module(ma).zones {
            let spec = topology.zone(z);
            if !spec.gate_capable() || spec.capacity < 2 {
                continue;
            }
            let incoming = usize::from(za != z) + usize::from(zb != z);
            if !self.admissible(topology, z, incoming) {
                continue;
            }
            let hops = if za != z { topology.hops(za, z) } else { 0 } + if zb != z { topology.hops(zb, z) } else { 0 };
            let key = (
                incoming == 2,
                self.evictions_needed(topology, z, incoming),
                hops,
                std::cmp::Reverse(spec.level),
                std::cmp::Reverse(
                    [(a, za), (b, zb)]
                        .iter()
                        .filter(|&&(_, from)| from != z)
                        .map(|&(q, _)| self.affinity(q, z))
                        .sum(),
                ),
                z,
            );
            if best.as_ref().is_none_or(|(k, _)| key < *k) {
                best = Some((key, z));
            }
        }
        best.map(|(_, z)| ZoneTarget::Local(z))
            .ok_or(ScheduleError::DeviceFull { gate: gate.id, module: ma })
    }

    /// Least-recently-used resident of `zone` outside `exclude`, and the
    /// zone it should go to: nearest lower level first, then same level,
    /// then higher, each by hop distance.
    pub fn evict_lru(
        &self,
        zone: ZoneId,
        exclude: &[Qubit],
        topology: &DeviceTopology,
    ) -> Option<(Qubit, ZoneId)> {
        let victim = self
            .placement
            .chain(zone)
            .iter()
            .copied()
            .filter(|q| !exclude.contains(q))
            .min_by_key(|&q| (self.lru[q], q))?;
        let level = topology.zone(zone).level;
        let dest = topology
            .module(topology.module_of(zone))
            .zones
            .iter()
            .copied()
            .filter(|&z| z != zone && self.placement.free(topology, z) > 0)
            .min_by_key(|&z| {
                let l = topology.zone(z).level;
                let rank = match l.cmp(&level) {
                    std::cmp::Ordering::Less => (0, level - l),
                    std::cmp::Ordering::Equal => (1, 0),
                    std::cmp::Ordering::Greater => (2, l - level),
                };
                (rank, topology.hops(zone, z), z)
            })?;
        Some((victim, dest))
    }

    /// Makes one slot free in `zone` if it is full.
    fn make_room(
        &mut self,
        zone: ZoneId,
        exclude: &[Qubit],
        gate: usize,
        topology: &DeviceTopology,
    ) -> Result<(), ScheduleError> {
        if self.placement.free(topology, zone) > 0 {
            return Ok(());
        }
        let module = topology.module_of(zone);
        let (victim, dest) = self
            .evict_lru(zone, exclude, topology)
            .ok_or(ScheduleError::DeviceFull { gate, module })?;
        self.decisions.push(Decision::Evict {
            gate,
            victim,
            from: zone,
            to: dest,
            lru: self.lru[victim],
        });
        log::debug!("gate {gate}: evict q{victim} {zone} -> {dest}");
        self.plan_shuttle(victim, dest, topology)?;
        Ok(())
    }

    fn emit(&mut self, mut event: ScheduleEvent) -> Result<(), ScheduleError> {
        self.ledger.apply(&mut event)?;
        self.events.push(event);
        Ok(())
    }

    /// Moves an ion to `to`: swaps it to the nearer chain edge, splits it
    /// off, moves it hop by hop, and merges it onto the end of the target
    /// chain. Returns the number of events emitted.
    pub fn plan_shuttle(&mut self, q: Qubit, to: ZoneId, topology: &DeviceTopology) -> Result<usize, ScheduleError> {
        let from = self.placement.zone_of(q);
        if from == to {
            return Ok(0);
        }
        let path = topology
            .path(from, to)
            .ok_or(ScheduleError::NoPath { qubit: q, from, to })?;
        let params = self.ledger.params().clone();
        let before = self.events.len();
        let mut t = self.qubit_clock[q].max(self.zone_clock[from.0]);

        let len = self.placement.occupancy(from);
        let pos = self.placement.position(q);
        let toward_front = pos <= len - 1 - pos;
        let swaps = pos.min(len - 1 - pos);
        for _ in 0..swaps {
            let p = self.placement.position(q);
            let np = if toward_front { p - 1 } else { p + 1 };
            let neighbor = self.placement.chain(from)[np];
            t = t.max(self.qubit_clock[neighbor]);
            self.emit(ScheduleEvent {
                kind: EventKind::PhysSwap,
                gate: None,
                qubits: vec![q, neighbor],
                zones: vec![from],
                start: t,
                duration: params.phys_swap_us,
                fidelity: 0.0,
                heat: 0.0,
                ions: None,
            })?;
            t += params.phys_swap_us;
            self.qubit_clock[neighbor] = t;
            self.placement.swap_adjacent(from, p.min(np));
        }

        self.emit(ScheduleEvent {
            kind: EventKind::Split,
            gate: None,
            qubits: vec![q],
            zones: vec![from],
            start: t,
            duration: params.split_us,
            fidelity: 0.0,
            heat: 0.0,
            ions: None,
        })?;
        t += params.split_us;
        self.zone_clock[from.0] = t;
        self.placement.detach(q);

        let move_us = params.move_us(topology.hop_distance_um);
        let mut at = from;
        for &next in &path {
            self.emit(ScheduleEvent {
                kind: EventKind::Move,
                gate: None,
                qubits: vec![q],
                zones: vec![at, next],
                start: t,
                duration: move_us,
                fidelity: 0.0,
                heat: 0.0,
                ions: None,
            })?;
            t += move_us;
            at = next;
        }

        t = t.max(self.zone_clock[to.0]);
        self.emit(ScheduleEvent {
            kind: EventKind::Merge,
            gate: None,
            qubits: vec![q],
            zones: vec![to],
            start: t,
            duration: params.merge_us,
            fidelity: 0.0,
            heat: 0.0,
            ions: None,
        })?;
        t += params.merge_us;
        self.zone_clock[to.0] = t;
        self.qubit_clock[q] = t;
        self.placement.attach(q, to);
        self.shuttle_count += 1;
        Ok(self.events.len() - before)
    }

    /// Runs a gate whose operands are already in place.
    fn execute(&mut self, gate: &GateOp, topology: &DeviceTopology) -> Result<EventKind, ScheduleError> {
        let params = self.ledger.params().clone();
        let zones: Vec<ZoneId> = gate.qubits.iter().map(|&q| self.placement.zone_of(q)).collect();
        let (kind, zones, duration, ions) = match *zones.as_slice() {
            [z] => (EventKind::Gate1q, vec![z], params.oneq_us, None),
            [za, zb] if za == zb => (
                EventKind::Gate2q,
                vec![za],
                params.twoq_us,
                Some(self.placement.occupancy(za)),
            ),
            [za, zb] => (EventKind::FiberGate, vec![za, zb], params.fiber_us, None),
            _ => unreachable!("gates have one or two operands"),
        };
        debug_assert!(self.executable(gate, topology));
        let start = gate
            .qubits
            .iter()
            .map(|&q| self.qubit_clock[q])
            .chain(zones.iter().map(|z| self.zone_clock[z.0]))
            .fold(0.0, f64::max);
        self.emit(ScheduleEvent {
            kind,
            gate: Some(gate.id),
            qubits: gate.qubits.clone(),
            zones: zones.clone(),
            start,
            duration,
            fidelity: 0.0,
            heat: 0.0,
            ions,
        })?;
        let end = start + duration;
        for z in zones {
            self.zone_clock[z.0] = end;
        }
        self.tick += 1;
        for &q in &gate.qubits {
            self.qubit_clock[q] = end;
            self.lru[q] = self.tick;
        }
        if let &[a, b] = gate.qubits.as_slice() {
            for (q, p) in [(a, b), (b, a)] {
                if self.upcoming[q].front() == Some(&p) {
                    self.upcoming[q].pop_front();
                }
            }
        }
        Ok(kind)
    }

    /// Post-fiber-gate hook: for each operand, trade places with an idle
    /// qubit on a module where it has heavy upcoming work.
    fn insert_swaps(
        &mut self,
        gate: &GateOp,
        dag: &DependencyDag,
        topology: &DeviceTopology,
        config: &SchedulerConfig,
    ) -> Result<(), ScheduleError> {
        for &x in &gate.qubits {
            let table = compute_weight_table(dag, &self.placement, topology, config.lookahead);
            if table.is_empty() {
                return Ok(());
            }
            let Some(d) = maybe_insert_swap(x, &self.placement, topology, &table, &self.lru, config.threshold)
            else {
                continue;
            };
            let oz = d.partner_zone;
            if self.placement.zone_of(d.partner) != oz {
                if !self.admissible(topology, oz, 1) {
                    continue;
                }
                self.make_room(oz, &[d.partner, x], gate.id, topology)?;
                self.plan_shuttle(d.partner, oz, topology)?;
            }
            self.decisions.push(Decision::InsertSwap {
                after_gate: gate.id,
                qubit: x,
                partner: d.partner,
                home: d.home,
                target: d.target,
                weight_home: d.weight_home,
                weight_target: d.weight_target,
            });
            log::debug!(
                "after gate {}: swap q{x} <-> q{} (W home {}, W target {})",
                gate.id,
                d.partner,
                d.weight_home,
                d.weight_target
            );
            let zx = self.placement.zone_of(x);
            let duration = self.ledger.params().swap_gate_us();
            let start = [
                self.qubit_clock[x],
                self.qubit_clock[d.partner],
                self.zone_clock[zx.0],
                self.zone_clock[oz.0],
            ]
            .into_iter()
            .fold(0.0, f64::max);
            self.emit(ScheduleEvent {
                kind: EventKind::InsertedSwapGate,
                gate: None,
                qubits: vec![x, d.partner],
                zones: vec![zx, oz],
                start,
                duration,
                fidelity: 0.0,
                heat: 0.0,
                ions: None,
            })?;
            let end = start + duration;
            self.zone_clock[zx.0] = end;
            self.zone_clock[oz.0] = end;
            self.qubit_clock[x] = end;
            self.qubit_clock[d.partner] = end;
            self.tick += 1;
            self.lru[x] = self.tick;
            self.lru[d.partner] = self.tick;
            self.placement.exchange(x, d.partner);
        }
        Ok(())
    }
}

/// First executable frontier gate, else the oldest frontier gate.
pub fn select_gate(dag: &DependencyDag, state: &MachineState, topology: &DeviceTopology) -> Option<usize> {
    dag.frontier()
        .iter()
        .copied()
        .find(|&g| state.executable(dag.gate(g), topology))
        .or_else(|| dag.frontier().first().copied())
}

#[derive(Debug, Clone)]
pub struct ScheduleOutcome {
    pub schedule: Schedule,
    pub final_placement: Placement,
    pub summary: Summary,
}

pub fn run_schedule(
    circuit: &Circuit,
    topology: &DeviceTopology,
    placement: &Placement,
    config: &SchedulerConfig,
) -> Result<ScheduleOutcome, ScheduleError> {
    config.validate()?;
    placement.validate(topology)?;
    if circuit.num_qubits > placement.num_qubits() {
        return Err(ScheduleError::WidthMismatch {
            circuit: circuit.num_qubits,
            placement: placement.num_qubits(),
        });
    }
    let mut dag = DependencyDag::build(circuit);
    let mut state =
        MachineState::new(placement.clone(), topology, config.cost.clone()).with_circuit(circuit, config.lookahead);

    while !dag.is_empty() {
        drain(&mut dag, &mut state, topology, config)?;
        let Some(&g) = dag.frontier().first() else { break };
        let gate = dag.gate(g).clone();
        let (a, b) = gate.pair();
        match state.select_zone(&gate, topology)? {
            ZoneTarget::Local(z) => {
                for op in [a, b] {
                    if state.placement.zone_of(op) != z {
                        state.make_room(z, &[a, b], g, topology)?;
                        state.plan_shuttle(op, z, topology)?;
                    }
                }
            }
            ZoneTarget::Remote(oa, ob) => {
                for (op, o) in [(a, oa), (b, ob)] {
                    if state.placement.zone_of(op) != o {
                        state.make_room(o, &[a, b], g, topology)?;
                        state.plan_shuttle(op, o, topology)?;
                    }
                }
            }
        }
        run_gate(&gate, &mut dag, &mut state, topology, config)?;
    }

    let schedule = Schedule {
        makespan: state.events.iter().map(ScheduleEvent::end).fold(0.0, f64::max),
        shuttle_count: state.shuttle_count,
        events: std::mem::take(&mut state.events),
        decisions: std::mem::take(&mut state.decisions),
    };
    let summary = summarize(&state.ledger, &schedule, placement.num_qubits());
    Ok(ScheduleOutcome {
        schedule,
        final_placement: state.placement,
        summary,
    })
}

fn run_gate(
    gate: &GateOp,
    dag: &mut DependencyDag,
    state: &mut MachineState,
    topology: &DeviceTopology,
    config: &SchedulerConfig,
) -> Result<(), ScheduleError> {
    let kind = state.execute(gate, topology)?;
    dag.pop_gate(gate.id).expect("executed gate was in the frontier");
    if kind == EventKind::FiberGate && config.swap_insert {
        state.insert_swaps(gate, dag, topology, config)?;
    }
    Ok(())
}

/// Executes ready gates in ascending id until none remain.
fn drain(
    dag: &mut DependencyDag,
    state: &mut MachineState,
    topology: &DeviceTopology,
    config: &SchedulerConfig,
) -> Result<(), ScheduleError> {
    loop {
        let ready: Vec<usize> = dag
            .frontier()
            .iter()
            .copied()
            .filter(|&g| state.executable(dag.gate(g), topology))
            .collect();
        if ready.is_empty() {
            return Ok(());
        }
        for g in ready {
            let gate = dag.gate(g).clone();
            if state.executable(&gate, topology) {
                run_gate(&gate, dag, state, topology, config)?;
            }
        }
    }
}
