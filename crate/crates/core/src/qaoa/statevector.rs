//! Exact statevector simulation of the alternating phase/mixer ansatz for
//! small instances. This is the validation oracle for the closed-form
//! depth-1 expectations; anything above 14 qubits is rejected.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::graph::{Edge, IsingInstance};

/// Hard qubit limit (memory guard: 2^14 amplitudes).
pub const MAX_STATEVECTOR_QUBITS: usize = 14;

/// Exact expectations from a full 2^n-amplitude simulation.
#[derive(Debug, Clone)]
pub struct StatevectorExpectations {
    /// `<Z_u>` per alive vertex, in label order.
    pub z: Vec<(u32, f64)>,
    /// `<Z_u Z_v>` per edge, in edge order.
    pub zz: Vec<(Edge, f64)>,
    /// State norm after all layers (should be 1 up to rounding).
    pub norm: f64,
}

/// Simulates `prod_k exp(-i a_k H_b) exp(-i g_k H) |+^n>` for the given
/// `(alpha, gamma)` schedule (the schedule length is the depth; an empty
/// schedule leaves the uniform superposition).
pub fn statevector_expectations(
    instance: &IsingInstance,
    schedule: &[(f64, f64)],
) -> Result<StatevectorExpectations> {
    let vertices = instance.vertices();
    let n = vertices.len();
    if n > MAX_STATEVECTOR_QUBITS {
        return Err(Error::SizeLimit { n, max: MAX_STATEVECTOR_QUBITS });
    }

    let dim = 1usize << n;
    let qubit_of = |label: u32| vertices.binary_search(&label).expect("alive vertex");

    // Diagonal Hamiltonian values per basis state, offset excluded (it only
    // contributes a global phase). Bit = 0 encodes spin +1.
    let mut diag = vec![0.0f64; dim];
    for (edge, w) in instance.edges() {
        let bu = qubit_of(edge.u);
        let bv = qubit_of(edge.v);
        for (x, d) in diag.iter_mut().enumerate() {
            let parity = (x >> bu ^ x >> bv) & 1;
            *d += if parity == 0 { w } else { -w };
        }
    }
    for (u, h) in instance.fields() {
        let bu = qubit_of(u);
        for (x, d) in diag.iter_mut().enumerate() {
            *d += if x >> bu & 1 == 0 { h } else { -h };
        }
    }

    let amp0 = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    let mut state = vec![amp0; dim];

    for &(alpha, gamma) in schedule {
        // Phase layer: amp[x] *= exp(-i * gamma * H(x)).
        for (x, amp) in state.iter_mut().enumerate() {
            let phase = -gamma * diag[x];
            *amp *= Complex64::new(phase.cos(), phase.sin());
        }
        // Mixer layer: exp(-i * alpha * X) on every qubit.
        let c = Complex64::new(alpha.cos(), 0.0);
        let mis = Complex64::new(0.0, -alpha.sin());
        for q in 0..n {
            let bit = 1usize << q;
            for x in 0..dim {
                if x & bit == 0 {
                    let a = state[x];
                    let b = state[x | bit];
                    state[x] = c * a + mis * b;
                    state[x | bit] = mis * a + c * b;
                }
            }
        }
    }

    let probs: Vec<f64> = state.iter().map(|a| a.norm_sqr()).collect();
    let norm = probs.iter().sum::<f64>();

    let z_of = |q: usize| {
        let bit = 1usize << q;
        probs
            .iter()
            .enumerate()
            .map(|(x, p)| if x & bit == 0 { *p } else { -*p })
            .sum::<f64>()
    };
    let z: Vec<(u32, f64)> = vertices.iter().map(|&u| (u, z_of(qubit_of(u)))).collect();
    let zz: Vec<(Edge, f64)> = instance
        .edges()
        .map(|(edge, _)| {
            let bu = qubit_of(edge.u);
            let bv = qubit_of(edge.v);
            let val = probs
                .iter()
                .enumerate()
                .map(|(x, p)| if (x >> bu ^ x >> bv) & 1 == 0 { *p } else { -*p })
                .sum::<f64>();
            (edge, val)
        })
        .collect();

    Ok(StatevectorExpectations { z, zz, norm })
}
