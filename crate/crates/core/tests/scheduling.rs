mod common;

use muss_ti_core::bench;
use muss_ti_core::device::{auto_size_device, ModuleTemplate};
use muss_ti_core::{
    run_schedule, Circuit, Decision, DependencyDag, DeviceTopology, EventKind, Placement, SchedulerConfig,
    ScheduleEvent, ZoneId,
};

fn no_swaps() -> SchedulerConfig {
    SchedulerConfig {
        swap_insert: false,
        ..SchedulerConfig::default()
    }
}

/// Compact trace: gate ids and `(qubit, from, to)` per shuttle.
#[derive(Debug, PartialEq)]
enum Step {
    Gate(usize),
    Shuttle(usize, usize, usize),
}

fn trace(events: &[ScheduleEvent]) -> Vec<Step> {
    let mut out = Vec::new();
    let mut from = 0;
    for e in events {
        match e.kind {
            EventKind::Split => from = e.zones[0].0,
            EventKind::Merge => out.push(Step::Shuttle(e.qubits[0], from, e.zones[0].0)),
            k if k.is_gate() => out.push(Step::Gate(e.gate.unwrap_or(usize::MAX))),
            _ => {}
        }
    }
    out
}

#[test]
fn lru_eviction_walkthrough() {
    // storage(0) - operation(1) - optical(2) - storage(3), four ions each
    let d = auto_size_device(6, &ModuleTemplate::standard(4)).unwrap();
    let p = Placement::from_chains(&d, 6, vec![vec![], vec![5], vec![0, 2, 4], vec![1, 3]]).unwrap();
    let mut c = Circuit::new(6);
    c.cx(0, 2);
    c.cx(0, 1);
    c.cx(2, 3);
    let out = run_schedule(&c, &d, &p, &SchedulerConfig::default()).unwrap();
    assert_eq!(
        trace(&out.schedule.events),
        vec![
            Step::Gate(0),
            Step::Shuttle(1, 3, 2),
            Step::Gate(1),
            Step::Shuttle(4, 2, 1),
            Step::Shuttle(3, 3, 2),
            Step::Gate(2),
        ]
    );
    assert_eq!(out.schedule.shuttle_count, 3);
    // q4 sat between q2 and q1, one swap from the far edge
    let swaps = out.schedule.events.iter().filter(|e| e.kind == EventKind::PhysSwap).count();
    assert_eq!(swaps, 1);
    assert!(matches!(
        out.schedule.decisions.as_slice(),
        [Decision::Evict { victim: 4, from: ZoneId(2), to: ZoneId(1), .. }]
    ));
    assert_eq!(out.final_placement.chain(ZoneId(1)), &[5, 4]);
}

#[test]
fn remote_swap_cuts_shuttles() {
    let (c, d, p) = common::remote_swap_scenario();
    let with = run_schedule(&c, &d, &p, &SchedulerConfig::default()).unwrap();
    let without = run_schedule(&c, &d, &p, &no_swaps()).unwrap();
    assert_eq!(with.schedule.shuttle_count, 1);
    assert!(without.schedule.shuttle_count >= 3);
    assert_eq!(with.schedule.inserted_swaps(), 1);
    assert!(matches!(
        with.schedule.decisions.last(),
        Some(Decision::InsertSwap { qubit: 0, weight_home: 0, weight_target: 5, .. })
    ));
    // the SWAP is one event of three fiber gates
    let swap = with
        .schedule
        .events
        .iter()
        .find(|e| e.kind == EventKind::InsertedSwapGate)
        .unwrap();
    assert_eq!(swap.duration, 600.0);
}

#[test]
fn threshold_is_strict() {
    let (mut c, d, p) = common::remote_swap_scenario();
    // four follow-up gates give W = 4, not above the default threshold
    c.gates.pop();
    let out = run_schedule(&c, &d, &p, &SchedulerConfig::default()).unwrap();
    assert_eq!(out.schedule.inserted_swaps(), 0);
}

#[test]
fn inserted_swaps_are_conservative() {
    for seed in 0..20 {
        let c = bench::random_circuit(70, 400, 0.8, seed);
        let d = auto_size_device(70, &ModuleTemplate::standard(8)).unwrap();
        let p = muss_ti_core::trivial_mapping(70, &d).unwrap();
        let cfg = SchedulerConfig::default();
        let out = run_schedule(&c, &d, &p, &cfg).unwrap();
        for dec in &out.schedule.decisions {
            if let Decision::InsertSwap {
                weight_home,
                weight_target,
                home,
                target,
                ..
            } = dec
            {
                assert_eq!(*weight_home, 0, "seed {seed}");
                assert!(*weight_target > cfg.threshold, "seed {seed}");
                assert_ne!(home, target);
            }
        }
    }
}

#[test]
fn swap_off_matches_baseline_on_single_module() {
    // no fiber gates, so the hook never fires
    for seed in 0..10 {
        let c = bench::random_circuit(20, 150, 0.7, seed);
        let d = auto_size_device(20, &ModuleTemplate::standard(6)).unwrap();
        let p = muss_ti_core::trivial_mapping(20, &d).unwrap();
        let on = run_schedule(&c, &d, &p, &SchedulerConfig::default()).unwrap();
        let off = run_schedule(&c, &d, &p, &no_swaps()).unwrap();
        assert_eq!(on.schedule, off.schedule);
    }
}

#[test]
fn swap_off_emits_no_swaps() {
    let c = bench::random_circuit(90, 500, 0.8, 3);
    let d = auto_size_device(90, &ModuleTemplate::standard(8)).unwrap();
    let p = muss_ti_core::trivial_mapping(90, &d).unwrap();
    let off = run_schedule(&c, &d, &p, &no_swaps()).unwrap();
    assert_eq!(off.schedule.inserted_swaps(), 0);
    assert!(off.schedule.decisions.iter().all(|d| matches!(d, Decision::Evict { .. })));
}

fn executable(zone_of: &[ZoneId], d: &DeviceTopology, a: usize, b: usize) -> bool {
    let (za, zb) = (zone_of[a], zone_of[b]);
    if za == zb {
        d.zone(za).gate_capable()
    } else {
        d.linked(za, zb)
    }
}

#[test]
fn ready_gates_drain_before_any_shuttle() {
    for seed in 0..15 {
        let n = 12 + seed as usize * 5;
        let c = bench::random_circuit(n, 200, 0.7, seed);
        let d = auto_size_device(n, &ModuleTemplate::standard(4)).unwrap();
        let p = muss_ti_core::trivial_mapping(n, &d).unwrap();
        let out = run_schedule(&c, &d, &p, &no_swaps()).unwrap();

        let mut dag = DependencyDag::build(&c);
        let mut zone_of: Vec<ZoneId> = (0..n).map(|q| p.zone_of(q)).collect();
        // a gate's shuttles are planned together, right after the last drain
        let mut planning = false;
        for e in &out.schedule.events {
            match e.kind {
                EventKind::Split if !planning => {
                    planning = true;
                    let ready = dag.frontier().iter().find(|&&g| {
                        let gate = dag.gate(g);
                        gate.is_two_qubit() && {
                            let (a, b) = gate.pair();
                            executable(&zone_of, &d, a, b)
                        }
                    });
                    assert_eq!(ready, None, "seed {seed}: shuttle planned while a gate was ready");
                }
                EventKind::Merge => zone_of[e.qubits[0]] = e.zones[0],
                _ => {}
            }
            if let Some(g) = e.gate {
                dag.pop_gate(g).unwrap();
                planning = false;
            }
        }
        assert!(dag.is_empty());
    }
}

#[test]
fn colocated_gates_never_shuttle() {
    let d = auto_size_device(30, &ModuleTemplate::standard(16)).unwrap();
    let p = muss_ti_core::trivial_mapping(30, &d).unwrap();
    // q0..q15 share the optical zone
    let c = bench::qft(16);
    let out = run_schedule(&c, &d, &p, &SchedulerConfig::default()).unwrap();
    assert_eq!(out.schedule.shuttle_count, 0);
}

#[test]
fn shuttle_count_matches_splits() {
    for seed in 0..10 {
        let c = bench::random_circuit(50, 300, 0.8, seed);
        let d = auto_size_device(50, &ModuleTemplate::standard(6)).unwrap();
        let p = muss_ti_core::trivial_mapping(50, &d).unwrap();
        let out = run_schedule(&c, &d, &p, &SchedulerConfig::default()).unwrap();
        let splits = out.schedule.events.iter().filter(|e| e.kind == EventKind::Split).count();
        assert_eq!(out.schedule.shuttle_count, splits);
        assert_eq!(out.summary.shuttle_count, splits);
    }
}
