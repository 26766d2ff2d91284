//! Time and fidelity pricing of schedule events.
//!
//! Shuttle-class events cost `exp(-t/T1) - k * nbar`; gate events cost
//! their intrinsic fidelity scaled by the background fidelity `B` of the
//! zone they run in, where `B` falls as shuttles deposit heat there.
//! Totals are accumulated in log space.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::device::ZoneId;
use crate::schedule::{EventKind, Schedule, ScheduleEvent};

#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("two-qubit gate on a chain of {ions} ions: epsilon * N^2 >= 1")]
    Occupancy { ions: usize },
    #[error("invalid cost parameter: {0}")]
    InvalidParam(String),
    #[error("{kind:?} event lists {got} zones")]
    MalformedEvent { kind: EventKind, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeatLaw {
    /// `B = max(0, 1 - k * heat)`
    #[default]
    Linear,
    /// `B = (1 - k) ^ heat`
    Multiplicative,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CostParams {
    pub t1_us: f64,
    pub k_heat: f64,
    pub epsilon: f64,
    pub split_us: f64,
    pub merge_us: f64,
    pub phys_swap_us: f64,
    pub move_speed_um_per_us: f64,
    pub oneq_us: f64,
    pub twoq_us: f64,
    pub fiber_us: f64,
    pub split_nbar: f64,
    pub merge_nbar: f64,
    pub phys_swap_nbar: f64,
    pub move_nbar: f64,
    pub oneq_fidelity: f64,
    pub fiber_fidelity: f64,
    /// Fiber gates per inserted cross-module SWAP.
    pub swap_fiber_gates: u32,
    pub heat_law: HeatLaw,
    pub perfect_gate: bool,
    pub perfect_gate_fidelity: f64,
    pub perfect_shuttle: bool,
    pub idle_decay: bool,
}

impl Default for CostParams {
    fn default() -> Self {
        CostParams {
            t1_us: 6.0e8,
            k_heat: 0.001,
            epsilon: 1.0 / 25600.0,
            split_us: 80.0,
            merge_us: 80.0,
            phys_swap_us: 40.0,
            move_speed_um_per_us: 2.0,
            oneq_us: 5.0,
            twoq_us: 40.0,
            fiber_us: 200.0,
            split_nbar: 1.0,
            merge_nbar: 1.0,
            phys_swap_nbar: 0.3,
            move_nbar: 0.1,
            oneq_fidelity: 0.9999,
            fiber_fidelity: 0.99,
            swap_fiber_gates: 3,
            heat_law: HeatLaw::Linear,
            perfect_gate: false,
            perfect_gate_fidelity: 0.9999,
            perfect_shuttle: false,
            idle_decay: false,
        }
    }
}

impl CostParams {
    pub fn validate(&self) -> Result<(), CostError> {
        let positive = [
            ("t1_us", self.t1_us),
            ("epsilon", self.epsilon),
            ("split_us", self.split_us),
            ("merge_us", self.merge_us),
            ("phys_swap_us", self.phys_swap_us),
            ("move_speed_um_per_us", self.move_speed_um_per_us),
            ("oneq_us", self.oneq_us),
            ("twoq_us", self.twoq_us),
            ("fiber_us", self.fiber_us),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CostError::InvalidParam(format!("{name} must be positive, got {v}")));
            }
        }
        let non_negative = [
            ("k_heat", self.k_heat),
            ("split_nbar", self.split_nbar),
            ("merge_nbar", self.merge_nbar),
            ("phys_swap_nbar", self.phys_swap_nbar),
            ("move_nbar", self.move_nbar),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(CostError::InvalidParam(format!("{name} must be non-negative, got {v}")));
            }
        }
        for (name, v) in [
            ("oneq_fidelity", self.oneq_fidelity),
            ("fiber_fidelity", self.fiber_fidelity),
            ("perfect_gate_fidelity", self.perfect_gate_fidelity),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(CostError::InvalidParam(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        if self.swap_fiber_gates == 0 {
            return Err(CostError::InvalidParam("swap_fiber_gates must be at least 1".into()));
        }
        Ok(())
    }

    pub fn move_us(&self, hop_distance_um: f64) -> f64 {
        hop_distance_um / self.move_speed_um_per_us
    }

    pub fn swap_gate_us(&self) -> f64 {
        self.fiber_us * f64::from(self.swap_fiber_gates)
    }

    /// Phonons deposited by a shuttle-class event.
    pub fn nbar(&self, kind: EventKind) -> f64 {
        if self.perfect_shuttle {
            return 0.0;
        }
        match kind {
            EventKind::Split => self.split_nbar,
            EventKind::Merge => self.merge_nbar,
            EventKind::PhysSwap => self.phys_swap_nbar,
            EventKind::Move => self.move_nbar,
            _ => 0.0,
        }
    }

    pub fn background(&self, heat: f64) -> f64 {
        match self.heat_law {
            HeatLaw::Linear => (1.0 - self.k_heat * heat).max(0.0),
            HeatLaw::Multiplicative => (1.0 - self.k_heat).max(0.0).powf(heat),
        }
    }
}

pub fn shuttle_fidelity(t_us: f64, nbar: f64, params: &CostParams) -> f64 {
    ((-t_us / params.t1_us).exp() - params.k_heat * nbar).clamp(0.0, 1.0)
}

pub fn twoq_gate_fidelity(ions: usize, params: &CostParams) -> Result<f64, CostError> {
    let n = ions as f64;
    let loss = params.epsilon * n * n;
    if loss >= 1.0 {
        return Err(CostError::Occupancy { ions });
    }
    Ok(1.0 - loss)
}

/// Heat deposits of an event as `(zone, nbar)` pairs.
fn deposits(event: &ScheduleEvent, nbar: f64) -> Vec<(ZoneId, f64)> {
    match (event.kind, event.zones.as_slice()) {
        (EventKind::Move, &[a, b]) => vec![(a, nbar / 2.0), (b, nbar / 2.0)],
        (k, zones) if k.is_shuttle() && !zones.is_empty() => vec![(zones[0], nbar)],
        _ => Vec::new(),
    }
}

/// Running fidelity product plus per-zone heat.
#[derive(Debug, Clone)]
pub struct FidelityLedger {
    params: CostParams,
    heat: Vec<f64>,
    log_total: f64,
    zero: bool,
}

impl FidelityLedger {
    pub fn new(params: CostParams, num_zones: usize) -> Self {
        FidelityLedger {
            params,
            heat: vec![0.0; num_zones],
            log_total: 0.0,
            zero: false,
        }
    }

    pub fn params(&self) -> &CostParams {
        &self.params
    }

    pub fn heat(&self) -> &[f64] {
        &self.heat
    }

    pub fn background(&self, z: ZoneId) -> f64 {
        self.params.background(self.heat[z.0])
    }

    /// Fidelity the event would contribute in the current state.
    pub fn price(&self, event: &ScheduleEvent) -> Result<f64, CostError> {
        let p = &self.params;
        let zones = &event.zones;
        let need = |n: usize| {
            if zones.len() == n {
                Ok(())
            } else {
                Err(CostError::MalformedEvent {
                    kind: event.kind,
                    got: zones.len(),
                })
            }
        };
        Ok(match event.kind {
            EventKind::Gate1q => {
                need(1)?;
                p.oneq_fidelity * self.background(zones[0])
            }
            EventKind::Gate2q => {
                need(1)?;
                let intrinsic = if p.perfect_gate {
                    p.perfect_gate_fidelity
                } else {
                    twoq_gate_fidelity(event.ions.unwrap_or(2), p)?
                };
                intrinsic * self.background(zones[0])
            }
            EventKind::FiberGate => {
                need(2)?;
                p.fiber_fidelity * (self.background(zones[0]) * self.background(zones[1])).sqrt()
            }
            EventKind::InsertedSwapGate => {
                need(2)?;
                let one = p.fiber_fidelity * (self.background(zones[0]) * self.background(zones[1])).sqrt();
                one.powi(p.swap_fiber_gates as i32)
            }
            EventKind::Move => {
                need(2)?;
                shuttle_fidelity(event.duration, p.nbar(event.kind), p)
            }
            EventKind::Split | EventKind::Merge | EventKind::PhysSwap => {
                need(1)?;
                shuttle_fidelity(event.duration, p.nbar(event.kind), p)
            }
        })
    }

    /// Prices the event, records its fidelity and heat on it, and folds both
    /// into the ledger. Gates are priced before the event's own heat lands.
    pub fn apply(&mut self, event: &mut ScheduleEvent) -> Result<f64, CostError> {
        let f = self.price(event)?;
        let nbar = self.params.nbar(event.kind);
        for (z, dn) in deposits(event, nbar) {
            self.heat[z.0] += dn;
        }
        event.fidelity = f;
        event.heat = if event.kind.is_shuttle() { nbar } else { 0.0 };
        self.fold(f);
        Ok(f)
    }

    fn fold(&mut self, f: f64) {
        if f <= 0.0 {
            self.zero = true;
        } else {
            self.log_total += f.ln();
        }
    }

    pub fn log_total(&self) -> Option<f64> {
        (!self.zero).then_some(self.log_total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub shuttle_count: usize,
    pub makespan_us: f64,
    pub fidelity: f64,
    /// `None` when some event contributed exactly zero.
    pub log10_fidelity: Option<f64>,
    /// Set when the fidelity is positive but too small for an f64.
    pub underflow: bool,
    pub zone_heat: Vec<f64>,
    pub events: usize,
    pub gates_1q: usize,
    pub gates_2q: usize,
    pub fiber_gates: usize,
    pub inserted_swaps: usize,
}

impl Summary {
    /// Compares fidelities in log space so underflowed runs still order.
    pub fn log10_or_neg_inf(&self) -> f64 {
        self.log10_fidelity.unwrap_or(f64::NEG_INFINITY)
    }
}

fn build_summary(
    events: &[ScheduleEvent],
    shuttle_count: usize,
    log_total: Option<f64>,
    zone_heat: Vec<f64>,
    params: &CostParams,
    num_qubits: usize,
) -> Summary {
    let makespan = events.iter().map(ScheduleEvent::end).fold(0.0, f64::max);
    let mut log_total = log_total;
    if params.idle_decay {
        let mut busy = vec![0.0; num_qubits];
        for e in events {
            for &q in &e.qubits {
                if let Some(b) = busy.get_mut(q) {
                    *b += e.duration;
                }
            }
        }
        let idle: f64 = busy.iter().map(|b| (makespan - b).max(0.0)).sum();
        log_total = log_total.map(|l| l - idle / params.t1_us);
    }
    let fidelity = log_total.map_or(0.0, f64::exp);
    let count = |k: EventKind| events.iter().filter(|e| e.kind == k).count();
    Summary {
        shuttle_count,
        makespan_us: makespan,
        fidelity,
        log10_fidelity: log_total.map(|l| l / std::f64::consts::LN_10),
        underflow: log_total.is_some() && fidelity == 0.0,
        zone_heat,
        events: events.len(),
        gates_1q: count(EventKind::Gate1q),
        gates_2q: count(EventKind::Gate2q),
        fiber_gates: count(EventKind::FiberGate),
        inserted_swaps: count(EventKind::InsertedSwapGate),
    }
}

pub fn summarize(ledger: &FidelityLedger, schedule: &Schedule, num_qubits: usize) -> Summary {
    build_summary(
        &schedule.events,
        schedule.shuttle_count,
        ledger.log_total(),
        ledger.heat.clone(),
        &ledger.params,
        num_qubits,
    )
}

/// Recomputes report totals from recorded event fields alone, as read back
/// from a schedule file. Every shuttle has exactly one Split.
pub fn rederive_summary(
    events: &[ScheduleEvent],
    params: &CostParams,
    num_zones: usize,
    num_qubits: usize,
) -> Summary {
    let mut heat = vec![0.0; num_zones];
    let mut log_total = Some(0.0);
    for e in events {
        for (z, dn) in deposits(e, e.heat) {
            if let Some(h) = heat.get_mut(z.0) {
                *h += dn;
            }
        }
        log_total = match log_total {
            Some(l) if e.fidelity > 0.0 => Some(l + e.fidelity.ln()),
            _ => None,
        };
    }
    let shuttles = events.iter().filter(|e| e.kind == EventKind::Split).count();
    build_summary(events, shuttles, log_total, heat, params, num_qubits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ev(kind: EventKind, zones: &[usize], duration: f64, ions: Option<usize>) -> ScheduleEvent {
        ScheduleEvent {
            kind,
            gate: None,
            qubits: vec![0],
            zones: zones.iter().map(|&z| ZoneId(z)).collect(),
            start: 0.0,
            duration,
            fidelity: 0.0,
            heat: 0.0,
            ions,
        }
    }

    fn close(a: f64, b: f64, rel: f64) -> bool {
        (a - b).abs() <= rel * b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn shuttle_fidelity_examples() {
        let p = CostParams::default();
        let split = shuttle_fidelity(80.0, 1.0, &p);
        assert!(close(split, (-80.0f64 / 6e8).exp() - 0.001, 1e-12));
        assert!((split - 0.9989999).abs() < 1e-7);
        assert_eq!(shuttle_fidelity(0.0, 0.0, &p), 1.0);
        let mv = shuttle_fidelity(50.0, 0.1, &p);
        assert!((mv - 0.9998999).abs() < 1e-7);
        assert_eq!(shuttle_fidelity(1.0, 5000.0, &p), 0.0);
    }

    #[test]
    fn twoq_examples() {
        let p = CostParams::default();
        assert_eq!(twoq_gate_fidelity(16, &p).unwrap(), 0.99);
        assert_eq!(twoq_gate_fidelity(2, &p).unwrap(), 0.99984375);
        assert_eq!(twoq_gate_fidelity(12, &p).unwrap(), 0.994375);
        assert_eq!(twoq_gate_fidelity(160, &p), Err(CostError::Occupancy { ions: 160 }));
    }

    #[test]
    fn apply_gate_in_pristine_and_heated_zone() {
        let p = CostParams::default();
        let mut ledger = FidelityLedger::new(p.clone(), 2);
        let mut g = ev(EventKind::Gate2q, &[0], 40.0, Some(4));
        assert_eq!(ledger.apply(&mut g).unwrap(), 0.999375);
        let mut split = ev(EventKind::Split, &[1], 80.0, None);
        ledger.apply(&mut split).unwrap();
        assert_eq!(ledger.background(ZoneId(1)), 0.999);
        let mut g = ev(EventKind::Gate2q, &[1], 40.0, Some(4));
        assert_eq!(ledger.apply(&mut g).unwrap(), 0.999 * 0.999375);
        let mut one = ev(EventKind::Gate1q, &[1], 5.0, None);
        assert_eq!(ledger.apply(&mut one).unwrap(), 0.9999 * 0.999);
    }

    #[test]
    fn move_heat_splits_between_endpoints() {
        let mut ledger = FidelityLedger::new(CostParams::default(), 3);
        let mut mv = ev(EventKind::Move, &[1, 2], 50.0, None);
        ledger.apply(&mut mv).unwrap();
        assert_eq!(ledger.heat(), &[0.0, 0.05, 0.05]);
        assert_eq!(mv.heat, 0.1);
    }

    #[test]
    fn perfect_modes() {
        let p = CostParams {
            perfect_gate: true,
            ..CostParams::default()
        };
        let ledger = FidelityLedger::new(p, 1);
        assert_eq!(ledger.price(&ev(EventKind::Gate2q, &[0], 40.0, Some(16))).unwrap(), 0.9999);
        let p = CostParams {
            perfect_shuttle: true,
            ..CostParams::default()
        };
        let mut ledger = FidelityLedger::new(p, 1);
        let mut split = ev(EventKind::Split, &[0], 80.0, None);
        ledger.apply(&mut split).unwrap();
        assert_eq!(ledger.background(ZoneId(0)), 1.0);
    }

    #[test]
    fn empty_summary() {
        let ledger = FidelityLedger::new(CostParams::default(), 3);
        let s = summarize(&ledger, &Schedule::default(), 0);
        assert_eq!(s.shuttle_count, 0);
        assert_eq!(s.makespan_us, 0.0);
        assert_eq!(s.fidelity, 1.0);
        assert_eq!(s.zone_heat, vec![0.0; 3]);
    }

    #[test]
    fn single_gate_summary() {
        let mut ledger = FidelityLedger::new(CostParams::default(), 1);
        let mut g = ev(EventKind::Gate2q, &[0], 40.0, Some(12));
        ledger.apply(&mut g).unwrap();
        let schedule = Schedule {
            events: vec![g],
            ..Schedule::default()
        };
        let s = summarize(&ledger, &schedule, 2);
        assert!(close(s.fidelity, 0.994375, 1e-12));
        assert_eq!(s.makespan_us, 40.0);
    }

    #[test]
    fn heat_laws_and_zero_k() {
        let p = CostParams {
            heat_law: HeatLaw::Multiplicative,
            ..CostParams::default()
        };
        assert!(close(p.background(2.0), 0.999 * 0.999, 1e-15));
        let p = CostParams {
            k_heat: 0.0,
            ..CostParams::default()
        };
        assert_eq!(p.background(1e6), 1.0);
    }

    #[test]
    fn underflow_is_flagged() {
        let mut ledger = FidelityLedger::new(CostParams::default(), 1);
        for _ in 0..200_000 {
            let mut g = ev(EventKind::Gate2q, &[0], 40.0, Some(16));
            ledger.apply(&mut g).unwrap();
        }
        let s = summarize(&ledger, &Schedule::default(), 0);
        assert_eq!(s.fidelity, 0.0);
        assert!(s.underflow);
        assert!(s.log10_fidelity.unwrap() < -300.0);
    }

    #[test]
    fn idle_decay_lowers_fidelity() {
        let p = CostParams {
            idle_decay: true,
            ..CostParams::default()
        };
        let mut ledger = FidelityLedger::new(p, 1);
        let mut g = ev(EventKind::Gate1q, &[0], 5.0, None);
        ledger.apply(&mut g).unwrap();
        let schedule = Schedule {
            events: vec![g],
            ..Schedule::default()
        };
        // qubit 1 idles for the whole 5 us
        let s = summarize(&ledger, &schedule, 2);
        assert!(close(s.fidelity, 0.9999 * (-5.0f64 / 6e8).exp(), 1e-12));
    }

    #[test]
    fn params_validate() {
        assert!(CostParams::default().validate().is_ok());
        let bad = CostParams {
            t1_us: 0.0,
            ..CostParams::default()
        };
        assert!(bad.validate().is_err());
    }
}
