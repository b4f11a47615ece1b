#![allow(dead_code)]

use purify_core::qlinalg::{ComplexMatrix, DensityMatrix, C64};
use purify_core::states::BellCoefficients;
use rand::Rng;

/// `A A† / tr(A A†)` for a matrix `A` with entries uniform in the unit square.
pub fn random_density_matrix<R: Rng>(rng: &mut R, n_qubits: usize) -> DensityMatrix {
    let dim = 1 << n_qubits;
    let a = ComplexMatrix::from_entries(
        (0..dim * dim)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect(),
    );
    density_from_factor(&a)
}

pub fn density_from_factor(a: &ComplexMatrix) -> DensityMatrix {
    let aa = a.matmul(&a.adjoint());
    let tr = aa.trace().re;
    DensityMatrix::new(aa.hermitian_part().scale(1.0 / tr)).unwrap()
}

pub fn random_bell_weights<R: Rng>(rng: &mut R) -> BellCoefficients {
    let raw: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
    let total: f64 = raw.iter().sum();
    BellCoefficients::diagonal(raw[0] / total, raw[1] / total, raw[2] / total, raw[3] / total)
}
