#![allow(dead_code)]

use muss_ti_core::device::{load_device, DeviceConfig, ModuleConfig, ZoneConfig};
use muss_ti_core::{Circuit, DeviceTopology, Placement};

fn zone(id: usize, level: u8, capacity: usize, position: usize) -> ZoneConfig {
    ZoneConfig {
        id,
        level,
        capacity,
        position,
        standalone: false,
    }
}

/// Two modules joined by one fiber. Qubit 0 sits alone on module A; the
/// optical zone of module B holds only qubit 1, and qubits 2 and 3 wait in
/// B's operation zone. After the first remote gate, qubit 0 has only work
/// on module B left.
pub fn remote_swap_scenario() -> (Circuit, DeviceTopology, Placement) {
    let device = load_device(&DeviceConfig {
        mode: Default::default(),
        modules: vec![
            ModuleConfig {
                id: 0,
                zones: vec![zone(0, 1, 4, 0), zone(1, 2, 2, 1)],
                adjacency: None,
            },
            ModuleConfig {
                id: 1,
                zones: vec![zone(2, 1, 4, 0), zone(3, 2, 1, 1)],
                adjacency: None,
            },
        ],
        links: vec![[1, 3]],
        hop_distance_um: 100.0,
        max_qubits_per_module: None,
        grid: None,
    })
    .expect("scenario device is valid");
    let placement = Placement::from_chains(&device, 4, vec![vec![], vec![0], vec![2, 3], vec![1]])
        .expect("scenario placement is valid");
    let mut circuit = Circuit::new(4);
    circuit.cx(0, 1);
    for q in [2, 3, 2, 3, 2] {
        circuit.cx(0, q);
    }
    (circuit, device, placement)
}

/// Least-squares slope of log(y) against log(x).
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let var: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    cov / var
}
