//! The CNOT gate and the two-qubit depolarizing channel that follows it.

use crate::error::{Error, Result};
use crate::qlinalg::{
    apply_two_qubit_unitary, check_pair, qubit_mask, reduce, ComplexMatrix, DensityMatrix,
};

/// Depolarizing probability applied after every gate.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GateNoise(f64);

impl GateNoise {
    pub fn new(p_gate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_gate) {
            return Err(Error::Domain(format!("gate error rate {p_gate} not in [0, 1]")));
        }
        Ok(Self(p_gate))
    }

    pub const fn noiseless() -> Self {
        Self(0.0)
    }

    pub fn p_gate(self) -> f64 {
        self.0
    }
}

/// Control is the more significant slot: `|10> <-> |11>`.
pub fn cnot_unitary() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 1.0, 0.0],
    ])
}

/// `ρ' = (1-p)ρ + p · (I/4)_{ab} ⊗ tr_{ab}(ρ)`
pub fn depolarize_two_qubits(
    rho: &DensityMatrix,
    q_a: usize,
    q_b: usize,
    p: f64,
) -> Result<DensityMatrix> {
    let n = rho.n_qubits();
    check_pair(n, q_a, q_b)?;
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("depolarizing probability {p} not in [0, 1]")));
    }
    if p == 0.0 {
        return Ok(rho.clone());
    }
    let pair_mask = qubit_mask(n, q_a) | qubit_mask(n, q_b);
    let rest: Vec<usize> = (0..n).filter(|&q| q != q_a && q != q_b).collect();
    let mut pair = vec![q_a, q_b];
    pair.sort_unstable();

    // Reduced state of the spectator qubits, indexed by full basis labels with
    // the pair bits cleared.
    let reduced = if rest.is_empty() {
        ComplexMatrix::identity(1)
    } else {
        reduce(rho.matrix(), n, &rest, &pair)
    };
    let rest_index = |i: usize| -> usize {
        rest.iter()
            .fold(0, |acc, &q| acc << 1 | usize::from(i & qubit_mask(n, q) != 0))
    };

    let dim = rho.dim();
    let m = rho.matrix();
    let mut out = m.scale(1.0 - p);
    for r in 0..dim {
        for c in 0..dim {
            if r & pair_mask == c & pair_mask {
                out[(r, c)] += reduced[(rest_index(r), rest_index(c))] * (p / 4.0);
            }
        }
    }
    Ok(DensityMatrix::from_map_output(out))
}

/// CNOT(control → target) followed by depolarization of both gate qubits.
pub fn noisy_cnot(
    rho: &DensityMatrix,
    control: usize,
    target: usize,
    noise: GateNoise,
) -> Result<DensityMatrix> {
    let gated = apply_two_qubit_unitary(rho, &cnot_unitary(), control, target)?;
    depolarize_two_qubits(&gated, control, target, noise.p_gate())
}
