//! Built-in benchmark generators. These are synthetic stand-ins for the
//! usual suite and are labelled as such in reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, Qubit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Benchmark {
    Ghz,
    Bv,
    Qft,
    Qaoa,
    Adder,
    Sqrt,
    Mixed,
    Random,
}

impl Benchmark {
    pub const SUITE: [Benchmark; 6] = [
        Benchmark::Ghz,
        Benchmark::Bv,
        Benchmark::Qft,
        Benchmark::Qaoa,
        Benchmark::Adder,
        Benchmark::Sqrt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Benchmark::Ghz => "ghz",
            Benchmark::Bv => "bv",
            Benchmark::Qft => "qft",
            Benchmark::Qaoa => "qaoa",
            Benchmark::Adder => "adder",
            Benchmark::Sqrt => "sqrt",
            Benchmark::Mixed => "mixed",
            Benchmark::Random => "random",
        }
    }

    /// `seed` only matters for the randomized generators.
    pub fn generate(self, n: usize, seed: u64) -> Circuit {
        match self {
            Benchmark::Ghz => ghz(n),
            Benchmark::Bv => bv(n),
            Benchmark::Qft => qft(n),
            Benchmark::Qaoa => qaoa(n, 1),
            Benchmark::Adder => adder(n),
            Benchmark::Sqrt => sqrt(n),
            Benchmark::Mixed => mixed(n, seed),
            Benchmark::Random => random_circuit(n, 10 * n, 0.7, seed),
        }
    }
}

impl std::str::FromStr for Benchmark {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [
            Benchmark::Ghz,
            Benchmark::Bv,
            Benchmark::Qft,
            Benchmark::Qaoa,
            Benchmark::Adder,
            Benchmark::Sqrt,
            Benchmark::Mixed,
            Benchmark::Random,
        ]
        .into_iter()
        .find(|b| b.name() == s.to_ascii_lowercase())
        .ok_or_else(|| format!("unknown benchmark `{s}`"))
    }
}

impl std::fmt::Display for Benchmark {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// H on q0, then a CX chain.
pub fn ghz(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    if n == 0 {
        return c;
    }
    c.one("h", 0);
    for i in 0..n.saturating_sub(1) {
        c.cx(i, i + 1);
    }
    c
}

/// Bernstein-Vazirani with an all-ones secret: every data qubit targets the
/// ancilla on the last wire.
pub fn bv(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    if n < 2 {
        return c;
    }
    let anc = n - 1;
    c.one("x", anc);
    c.one("h", anc);
    for q in 0..anc {
        c.one("h", q);
    }
    for q in 0..anc {
        c.cx(q, anc);
    }
    for q in 0..anc {
        c.one("h", q);
    }
    c
}

fn cphase(c: &mut Circuit, control: Qubit, target: Qubit) {
    c.one("rz", control);
    c.cx(control, target);
    c.one("rz", target);
    c.cx(control, target);
    c.one("rz", target);
}

/// Textbook QFT ladder with each controlled phase as two CX.
pub fn qft(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for i in 0..n {
        c.one("h", i);
        for j in i + 1..n {
            cphase(&mut c, j, i);
        }
    }
    c
}

/// Ring-graph QAOA: `layers` rounds of ZZ phases on neighbours plus mixers.
pub fn qaoa(n: usize, layers: usize) -> Circuit {
    let mut c = Circuit::new(n);
    for q in 0..n {
        c.one("h", q);
    }
    if n < 2 {
        return c;
    }
    let edges: Vec<(Qubit, Qubit)> = if n == 2 {
        vec![(0, 1)]
    } else {
        (0..n).map(|i| (i, (i + 1) % n)).collect()
    };
    for _ in 0..layers {
        for &(a, b) in &edges {
            c.cx(a, b);
            c.one("rz", b);
            c.cx(a, b);
        }
        for q in 0..n {
            c.one("rx", q);
        }
    }
    c
}

/// Toffoli as six CX plus single-qubit phases.
pub fn toffoli(c: &mut Circuit, a: Qubit, b: Qubit, t: Qubit) {
    c.one("h", t);
    c.cx(b, t);
    c.one("tdg", t);
    c.cx(a, t);
    c.one("t", t);
    c.cx(b, t);
    c.one("tdg", t);
    c.cx(a, t);
    c.one("t", b);
    c.one("t", t);
    c.one("h", t);
    c.cx(a, b);
    c.one("t", a);
    c.one("tdg", b);
    c.cx(a, b);
}

/// Cuccaro ripple-carry adder over interleaved wires
/// `cin, b0, a0, b1, a1, ..., cout`. Leftover wires stay idle.
pub fn adder(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    if n < 4 {
        return c;
    }
    let m = (n - 2) / 2;
    let cin = 0;
    let b = |i: usize| 1 + 2 * i;
    let a = |i: usize| 2 + 2 * i;
    let cout = 2 * m + 1;
    let maj = |c: &mut Circuit, x: Qubit, y: Qubit, z: Qubit| {
        c.cx(z, y);
        c.cx(z, x);
        toffoli(c, x, y, z);
    };
    let uma = |c: &mut Circuit, x: Qubit, y: Qubit, z: Qubit| {
        toffoli(c, x, y, z);
        c.cx(z, x);
        c.cx(x, y);
    };
    maj(&mut c, cin, b(0), a(0));
    for i in 1..m {
        maj(&mut c, a(i - 1), b(i), a(i));
    }
    c.cx(a(m - 1), cout);
    for i in (1..m).rev() {
        uma(&mut c, a(i - 1), b(i), a(i));
    }
    uma(&mut c, cin, b(0), a(0));
    c
}

/// Toffoli-heavy pattern with long-range operands, in the spirit of a
/// reversible square-root circuit: two sweeps of Toffolis pairing each
/// qubit in the lower half with its mirror in the upper half.
pub fn sqrt(n: usize) -> Circuit {
    let mut c = Circuit::new(n);
    if n < 3 {
        return c;
    }
    let half = n / 2;
    for _ in 0..2 {
        for i in 0..half {
            let mirror = n - 1 - i;
            let target = (i + 1) % half;
            if target != mirror && target != i {
                toffoli(&mut c, i, mirror, target);
            }
        }
        for i in 0..half {
            c.cx(i, n - 1 - i);
        }
    }
    c
}

/// Uniform random gates; `two_qubit_fraction` of them act on random pairs.
pub fn random_circuit(n: usize, gates: usize, two_qubit_fraction: f64, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    for _ in 0..gates {
        if n >= 2 && rng.gen_bool(two_qubit_fraction) {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            c.cx(a, b);
        } else if n >= 1 {
            c.one("h", rng.gen_range(0..n));
        }
    }
    c
}

/// Mostly local random interactions: each qubit talks to partners within a
/// small window, with an occasional long-range gate.
pub fn local_random_circuit(n: usize, gates: usize, window: usize, seed: u64) -> Circuit {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = Circuit::new(n);
    if n < 2 {
        return c;
    }
    let window = window.clamp(1, n - 1);
    for _ in 0..gates {
        let a = rng.gen_range(0..n);
        let b = if rng.gen_bool(0.1) {
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            b
        } else {
            (a + rng.gen_range(1..=window)) % n
        };
        if rng.gen_bool(0.3) {
            c.one("rz", a);
        }
        c.cx(a, b);
    }
    c
}

/// Concatenation of structured kernels over the full register: GHZ
/// preparation, a QAOA round, a BV fan-in, and mostly-local random work.
pub fn mixed(n: usize, seed: u64) -> Circuit {
    let mut c = Circuit::new(n);
    for part in [ghz(n), qaoa(n, 1), bv(n), local_random_circuit(n, 4 * n, 4, seed)] {
        for g in part.gates {
            c.push(&g.label, &g.qubits).expect("kernels share the register");
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_counts() {
        assert_eq!(ghz(32).num_two_qubit(), 31);
        assert_eq!(bv(32).num_two_qubit(), 31);
        assert_eq!(qft(5).num_two_qubit(), 20);
        assert_eq!(qaoa(8, 1).num_two_qubit(), 16);
        // 15-bit adder: 2 * 15 MAJ/UMA blocks of 2 CX + a Toffoli, plus the carry CX
        assert_eq!(adder(32).num_two_qubit(), 30 * 8 + 1);
    }

    #[test]
    fn generators_produce_valid_circuits() {
        for b in Benchmark::SUITE.into_iter().chain([Benchmark::Mixed, Benchmark::Random]) {
            for n in [1, 2, 3, 5, 32, 33] {
                let c = b.generate(n, 7);
                assert_eq!(c.validate(), Ok(()), "{b} n={n}");
                assert_eq!(c.num_qubits, n);
            }
        }
    }

    #[test]
    fn random_is_seeded() {
        assert_eq!(random_circuit(10, 50, 0.5, 3), random_circuit(10, 50, 0.5, 3));
        assert_ne!(random_circuit(10, 50, 0.5, 3), random_circuit(10, 50, 0.5, 4));
    }

    #[test]
    fn names_round_trip() {
        for b in Benchmark::SUITE {
            assert_eq!(b.name().parse::<Benchmark>(), Ok(b));
        }
    }
}
