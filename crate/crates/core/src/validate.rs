//! Independent replay of a schedule against the circuit and device.

use serde::Serialize;

use crate::circuit::{Circuit, Qubit};
use crate::cost::CostParams;
use crate::device::{DeviceTopology, ZoneId};
use crate::placement::Placement;
use crate::schedule::{EventKind, ScheduleEvent};

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    MissingGate { gate: usize },
    DuplicateGate { event: usize, gate: usize },
    UnknownGate { event: usize, gate: usize },
    WrongOperands { event: usize, gate: usize },
    Dependency { event: usize, gate: usize, qubit: Qubit },
    Capacity { event: usize, zone: ZoneId, len: usize, capacity: usize },
    NotColocated { event: usize },
    NotGateCapable { event: usize, zone: ZoneId },
    NotLinked { event: usize },
    NotAtChainEdge { event: usize, qubit: Qubit },
    NotAdjacent { event: usize },
    BadHop { event: usize },
    Misplaced { event: usize, qubit: Qubit },
    InTransitAtEnd { qubit: Qubit },
    Occupancy { event: usize, recorded: Option<usize>, actual: usize },
    Malformed { event: usize },
    Clock { event: usize, start: f64, free_at: f64 },
    Duration { event: usize, expected: f64, got: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Loc {
    Zone(ZoneId),
    Transit(ZoneId),
}

struct Replay<'a> {
    topology: &'a DeviceTopology,
    chains: Vec<Vec<Qubit>>,
    loc: Vec<Loc>,
    zone_free: Vec<f64>,
    qubit_free: Vec<f64>,
    out: Vec<Violation>,
}

impl Replay<'_> {
    fn in_zone(&mut self, event: usize, q: Qubit, z: ZoneId) -> bool {
        if self.loc.get(q) == Some(&Loc::Zone(z)) {
            true
        } else {
            self.out.push(Violation::Misplaced { event, qubit: q });
            false
        }
    }

    fn position(&self, q: Qubit, z: ZoneId) -> usize {
        self.chains[z.0].iter().position(|&x| x == q).expect("replay index in sync")
    }
}

/// Replays `events` from `initial` and lists every rule they break. An
/// empty list means the schedule is legal.
pub fn validate_schedule(
    events: &[ScheduleEvent],
    circuit: &Circuit,
    topology: &DeviceTopology,
    initial: &Placement,
    params: &CostParams,
) -> Vec<Violation> {
    let n = initial.num_qubits();
    let mut r = Replay {
        topology,
        chains: initial.chains().to_vec(),
        loc: (0..n).map(|q| Loc::Zone(initial.zone_of(q))).collect(),
        zone_free: vec![0.0; topology.num_zones()],
        qubit_free: vec![0.0; n],
        out: Vec::new(),
    };

    // rank[g][i]: index of gate g in the gate sequence of its i-th operand
    let mut per_qubit = vec![0usize; circuit.num_qubits];
    let rank: Vec<Vec<usize>> = circuit
        .gates
        .iter()
        .map(|g| {
            g.qubits
                .iter()
                .map(|&q| {
                    per_qubit[q] += 1;
                    per_qubit[q] - 1
                })
                .collect()
        })
        .collect();
    let mut next_rank = vec![0usize; circuit.num_qubits];
    let mut seen = vec![false; circuit.gates.len()];

    for (i, e) in events.iter().enumerate() {
        let well_formed = e.zones.iter().all(|z| z.0 < topology.num_zones())
            && e.qubits.iter().all(|&q| q < n)
            && match e.kind {
                EventKind::Gate1q | EventKind::Split | EventKind::Merge => e.qubits.len() == 1 && e.zones.len() == 1,
                EventKind::Move => e.qubits.len() == 1 && e.zones.len() == 2,
                EventKind::Gate2q | EventKind::PhysSwap => e.qubits.len() == 2 && e.zones.len() == 1,
                EventKind::FiberGate | EventKind::InsertedSwapGate => e.qubits.len() == 2 && e.zones.len() == 2,
            };
        if !well_formed {
            r.out.push(Violation::Malformed { event: i });
            continue;
        }

        let expected = match e.kind {
            EventKind::Gate1q => params.oneq_us,
            EventKind::Gate2q => params.twoq_us,
            EventKind::FiberGate => params.fiber_us,
            EventKind::InsertedSwapGate => params.swap_gate_us(),
            EventKind::Split => params.split_us,
            EventKind::Merge => params.merge_us,
            EventKind::PhysSwap => params.phys_swap_us,
            EventKind::Move => params.move_us(topology.hop_distance_um),
        };
        if (e.duration - expected).abs() > EPS {
            r.out.push(Violation::Duration {
                event: i,
                expected,
                got: e.duration,
            });
        }
        let occupied: &[ZoneId] = if e.kind == EventKind::Move { &[] } else { &e.zones };
        for &z in occupied {
            if e.start + EPS < r.zone_free[z.0] {
                r.out.push(Violation::Clock {
                    event: i,
                    start: e.start,
                    free_at: r.zone_free[z.0],
                });
            }
            r.zone_free[z.0] = e.end();
        }
        for &q in &e.qubits {
            if e.start + EPS < r.qubit_free[q] {
                r.out.push(Violation::Clock {
                    event: i,
                    start: e.start,
                    free_at: r.qubit_free[q],
                });
            }
            r.qubit_free[q] = e.end();
        }

        if let Some(g) = e.gate {
            match circuit.gates.get(g) {
                None => r.out.push(Violation::UnknownGate { event: i, gate: g }),
                Some(_) if seen[g] => r.out.push(Violation::DuplicateGate { event: i, gate: g }),
                Some(gate) => {
                    seen[g] = true;
                    if gate.qubits != e.qubits {
                        r.out.push(Violation::WrongOperands { event: i, gate: g });
                    }
                    for (k, &q) in gate.qubits.iter().enumerate() {
                        if next_rank[q] != rank[g][k] {
                            r.out.push(Violation::Dependency { event: i, gate: g, qubit: q });
                        }
                        next_rank[q] = rank[g][k] + 1;
                    }
                }
            }
        } else if e.kind != EventKind::InsertedSwapGate && e.kind.is_gate() {
            r.out.push(Violation::Malformed { event: i });
        }

        match e.kind {
            EventKind::Gate1q => {
                r.in_zone(i, e.qubits[0], e.zones[0]);
            }
            EventKind::Gate2q => {
                let z = e.zones[0];
                let ok = r.in_zone(i, e.qubits[0], z) & r.in_zone(i, e.qubits[1], z);
                if !ok {
                    r.out.push(Violation::NotColocated { event: i });
                }
                if !topology.zone(z).gate_capable() {
                    r.out.push(Violation::NotGateCapable { event: i, zone: z });
                }
                let actual = r.chains[z.0].len();
                if e.ions != Some(actual) {
                    r.out.push(Violation::Occupancy {
                        event: i,
                        recorded: e.ions,
                        actual,
                    });
                }
            }
            EventKind::FiberGate | EventKind::InsertedSwapGate => {
                let (za, zb) = (e.zones[0], e.zones[1]);
                let (a, b) = (e.qubits[0], e.qubits[1]);
                let ok = r.in_zone(i, a, za) & r.in_zone(i, b, zb);
                if !topology.linked(za, zb) {
                    r.out.push(Violation::NotLinked { event: i });
                }
                if ok && e.kind == EventKind::InsertedSwapGate {
                    let (pa, pb) = (r.position(a, za), r.position(b, zb));
                    r.chains[za.0][pa] = b;
                    r.chains[zb.0][pb] = a;
                    r.loc[a] = Loc::Zone(zb);
                    r.loc[b] = Loc::Zone(za);
                }
            }
            EventKind::PhysSwap => {
                let z = e.zones[0];
                let (a, b) = (e.qubits[0], e.qubits[1]);
                if r.in_zone(i, a, z) & r.in_zone(i, b, z) {
                    let (pa, pb) = (r.position(a, z), r.position(b, z));
                    if pa.abs_diff(pb) == 1 {
                        r.chains[z.0].swap(pa, pb);
                    } else {
                        r.out.push(Violation::NotAdjacent { event: i });
                    }
                }
            }
            EventKind::Split => {
                let (q, z) = (e.qubits[0], e.zones[0]);
                if r.in_zone(i, q, z) {
                    let p = r.position(q, z);
                    if p != 0 && p + 1 != r.chains[z.0].len() {
                        r.out.push(Violation::NotAtChainEdge { event: i, qubit: q });
                    }
                    r.chains[z.0].remove(p);
                    r.loc[q] = Loc::Transit(z);
                }
            }
            EventKind::Move => {
                let (q, from, to) = (e.qubits[0], e.zones[0], e.zones[1]);
                if r.loc[q] != Loc::Transit(from) {
                    r.out.push(Violation::Misplaced { event: i, qubit: q });
                } else if r.topology.zone_distance(from, to) != Ok(Some(1)) {
                    r.out.push(Violation::BadHop { event: i });
                } else {
                    r.loc[q] = Loc::Transit(to);
                }
            }
            EventKind::Merge => {
                let (q, z) = (e.qubits[0], e.zones[0]);
                if r.loc[q] != Loc::Transit(z) {
                    r.out.push(Violation::Misplaced { event: i, qubit: q });
                } else {
                    r.chains[z.0].push(q);
                    r.loc[q] = Loc::Zone(z);
                    let capacity = topology.zone(z).capacity;
                    if r.chains[z.0].len() > capacity {
                        r.out.push(Violation::Capacity {
                            event: i,
                            zone: z,
                            len: r.chains[z.0].len(),
                            capacity,
                        });
                    }
                }
            }
        }
    }

    for (g, s) in seen.iter().enumerate() {
        if !s {
            r.out.push(Violation::MissingGate { gate: g });
        }
    }
    for (q, l) in r.loc.iter().enumerate() {
        if matches!(l, Loc::Transit(_)) {
            r.out.push(Violation::InTransitAtEnd { qubit: q });
        }
    }
    r.out
}
