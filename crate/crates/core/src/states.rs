//! Bell states, Werner-form inputs and the random input ensemble.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::qlinalg::{ComplexMatrix, DensityMatrix, PureStateVector, C64};

/// The four Bell states, labelled by (amplitude bit, phase bit).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BellKind {
    /// `(|00> + |11>)/√2`, bits (0, 0)
    PhiPlus,
    /// `(|00> - |11>)/√2`, bits (0, 1)
    PhiMinus,
    /// `(|01> + |10>)/√2`, bits (1, 0); the purification target
    PsiPlus,
    /// `(|01> - |10>)/√2`, bits (1, 1)
    PsiMinus,
}

impl BellKind {
    pub const ALL: [BellKind; 4] = [
        BellKind::PhiPlus,
        BellKind::PhiMinus,
        BellKind::PsiPlus,
        BellKind::PsiMinus,
    ];

    /// `(amplitude_bit, phase_bit)`
    pub fn bits(self) -> (u8, u8) {
        match self {
            BellKind::PhiPlus => (0, 0),
            BellKind::PhiMinus => (0, 1),
            BellKind::PsiPlus => (1, 0),
            BellKind::PsiMinus => (1, 1),
        }
    }

    pub fn from_bits(amplitude: u8, phase: u8) -> Self {
        match (amplitude & 1, phase & 1) {
            (0, 0) => BellKind::PhiPlus,
            (0, 1) => BellKind::PhiMinus,
            (1, 0) => BellKind::PsiPlus,
            _ => BellKind::PsiMinus,
        }
    }
}

pub fn bell_state(kind: BellKind) -> PureStateVector {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let (amplitude, phase) = kind.bits();
    let sign = if phase == 0 { s } else { -s };
    let mut amps = vec![C64::new(0.0, 0.0); 4];
    if amplitude == 0 {
        amps[0b00] = C64::new(s, 0.0);
        amps[0b11] = C64::new(sign, 0.0);
    } else {
        amps[0b01] = C64::new(s, 0.0);
        amps[0b10] = C64::new(sign, 0.0);
    }
    PureStateVector::new(amps).expect("Bell states are normalized")
}

/// The purification target `|Ψ+>`.
pub fn target_state() -> PureStateVector {
    bell_state(BellKind::PsiPlus)
}

/// Bell-diagonal state with the given weights on (Ψ+, Ψ-, Φ+, Φ-).
fn bell_diagonal(psi_plus: f64, psi_minus: f64, phi_plus: f64, phi_minus: f64) -> ComplexMatrix {
    [
        (BellKind::PsiPlus, psi_plus),
        (BellKind::PsiMinus, psi_minus),
        (BellKind::PhiPlus, phi_plus),
        (BellKind::PhiMinus, phi_minus),
    ]
    .into_iter()
    .fold(ComplexMatrix::zeros(4), |acc, (kind, w)| {
        acc.linear_combination(1.0, bell_state(kind).projector().matrix(), w)
    })
}

/// `f·|Ψ+><Ψ+| + (1-f)/3 · (the other three Bell projectors)`
pub fn werner_from_fidelity(f: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::Domain(format!("Werner fidelity {f} not in [0, 1]")));
    }
    let rest = (1.0 - f) / 3.0;
    Ok(DensityMatrix::from_map_output(bell_diagonal(
        f, rest, rest, rest,
    )))
}

/// `(1-q)|Ψ+><Ψ+| + q·I/4`, which has fidelity `1 - 3q/4`.
pub fn depolarized_bell(q: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::Domain(format!("depolarizing strength {q} not in [0, 1]")));
    }
    target_state()
        .projector()
        .mix(1.0 - q, &DensityMatrix::maximally_mixed(2))
}

/// Generator behind [`random_input_state`]: ChaCha8 seeded through
/// `SeedableRng::seed_from_u64`, which is platform independent.
pub type InputRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> InputRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A depolarized Bell pair with strength `q ~ Uniform[0, 1)`.
pub fn random_input_state<R: Rng + ?Sized>(rng: &mut R) -> DensityMatrix {
    let q: f64 = rng.random();
    depolarized_bell(q).expect("uniform draw lies in [0, 1)")
}

/// Diagonal weights of a two-qubit state in the Bell basis plus the largest
/// off-diagonal magnitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellCoefficients {
    pub psi_plus: f64,
    pub psi_minus: f64,
    pub phi_plus: f64,
    pub phi_minus: f64,
    pub off_diag_norm: f64,
}

impl BellCoefficients {
    /// A Bell-diagonal weight vector (no coherences).
    pub fn diagonal(psi_plus: f64, psi_minus: f64, phi_plus: f64, phi_minus: f64) -> Self {
        Self {
            psi_plus,
            psi_minus,
            phi_plus,
            phi_minus,
            off_diag_norm: 0.0,
        }
    }

    pub fn werner(f: f64) -> Self {
        let rest = (1.0 - f) / 3.0;
        Self::diagonal(f, rest, rest, rest)
    }

    pub fn weight(&self, kind: BellKind) -> f64 {
        match kind {
            BellKind::PsiPlus => self.psi_plus,
            BellKind::PsiMinus => self.psi_minus,
            BellKind::PhiPlus => self.phi_plus,
            BellKind::PhiMinus => self.phi_minus,
        }
    }

    pub fn weight_mut(&mut self, kind: BellKind) -> &mut f64 {
        match kind {
            BellKind::PsiPlus => &mut self.psi_plus,
            BellKind::PsiMinus => &mut self.psi_minus,
            BellKind::PhiPlus => &mut self.phi_plus,
            BellKind::PhiMinus => &mut self.phi_minus,
        }
    }

    pub fn total(&self) -> f64 {
        self.psi_plus + self.psi_minus + self.phi_plus + self.phi_minus
    }

    /// Largest weight difference against `other`, ignoring coherences.
    pub fn max_weight_diff(&self, other: &Self) -> f64 {
        BellKind::ALL
            .iter()
            .map(|&k| (self.weight(k) - other.weight(k)).abs())
            .fold(0.0, f64::max)
    }

    /// The Bell-diagonal density matrix with these weights.
    pub fn to_density_matrix(&self) -> Result<DensityMatrix> {
        DensityMatrix::new(bell_diagonal(
            self.psi_plus,
            self.psi_minus,
            self.phi_plus,
            self.phi_minus,
        ))
    }
}

pub fn bell_basis_coefficients(rho: &DensityMatrix) -> Result<BellCoefficients> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: rho.n_qubits(),
        });
    }
    let basis: Vec<PureStateVector> = BellKind::ALL.iter().map(|&k| bell_state(k)).collect();
    let m = rho.matrix();
    let element = |a: &PureStateVector, b: &PureStateVector| -> C64 {
        let (x, y) = (a.amplitudes(), b.amplitudes());
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                acc += x[i].conj() * m[(i, j)] * y[j];
            }
        }
        acc
    };
    let mut coeffs = BellCoefficients::diagonal(0.0, 0.0, 0.0, 0.0);
    for (k, kind) in BellKind::ALL.iter().enumerate() {
        *coeffs.weight_mut(*kind) = element(&basis[k], &basis[k]).re;
        for (j, other) in basis.iter().enumerate() {
            if j != k {
                coeffs.off_diag_norm = coeffs.off_diag_norm.max(element(&basis[k], other).norm());
            }
        }
    }
    Ok(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{check_physical, fidelity_with_pure};

    #[test]
    fn psi_plus_amplitudes() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let amps = bell_state(BellKind::PsiPlus);
        let expected = [0.0, s, s, 0.0];
        for (a, e) in amps.amplitudes().iter().zip(expected) {
            assert_eq!(*a, C64::new(e, 0.0));
        }
        let phi = bell_state(BellKind::PhiPlus);
        let expected = [s, 0.0, 0.0, s];
        for (a, e) in phi.amplitudes().iter().zip(expected) {
            assert_eq!(*a, C64::new(e, 0.0));
        }
    }

    #[test]
    fn bell_basis_is_orthonormal() {
        for a in BellKind::ALL {
            for b in BellKind::ALL {
                let ip = bell_state(a).inner(&bell_state(b)).norm();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-14, "{a:?} {b:?}");
            }
        }
    }

    #[test]
    fn bits_round_trip() {
        for k in BellKind::ALL {
            let (a, p) = k.bits();
            assert_eq!(BellKind::from_bits(a, p), k);
        }
    }

    #[test]
    fn werner_limits() {
        let pure = werner_from_fidelity(1.0).unwrap();
        assert!(pure.max_abs_diff(&target_state().projector()) < 1e-15);
        let mixed = werner_from_fidelity(0.25).unwrap();
        assert!(mixed.max_abs_diff(&DensityMatrix::maximally_mixed(2)) < 1e-15);
        let f = fidelity_with_pure(&werner_from_fidelity(0.6).unwrap(), &target_state()).unwrap();
        assert!((f - 0.6).abs() < 1e-12);
        assert!(werner_from_fidelity(1.01).is_err());
        assert!(werner_from_fidelity(-0.1).is_err());
        assert!(werner_from_fidelity(f64::NAN).is_err());
    }

    #[test]
    fn depolarized_bell_matches_werner() {
        for step in 0..=10 {
            let q = step as f64 / 10.0;
            let rho = depolarized_bell(q).unwrap();
            let werner = werner_from_fidelity(1.0 - 0.75 * q).unwrap();
            assert!(rho.max_abs_diff(&werner) < 1e-12, "q={q}");
            let f = fidelity_with_pure(&rho, &target_state()).unwrap();
            assert!((f - (1.0 - 0.75 * q)).abs() < 1e-12);
            assert!(bell_basis_coefficients(&rho).unwrap().off_diag_norm <= 1e-12);
        }
        assert!(depolarized_bell(1.5).is_err());
    }

    #[test]
    fn depolarized_bell_at_0_4_has_fidelity_0_7() {
        let f = fidelity_with_pure(&depolarized_bell(0.4).unwrap(), &target_state()).unwrap();
        assert!((f - 0.7).abs() < 1e-12);
    }

    #[test]
    fn random_inputs_are_reproducible_and_physical() {
        let mut a = seeded_rng(42);
        let mut b = seeded_rng(42);
        for _ in 0..20 {
            let x = random_input_state(&mut a);
            let y = random_input_state(&mut b);
            assert_eq!(x, y);
            assert!(check_physical(&x, 1e-10).passes());
        }
    }

    #[test]
    fn random_input_fidelity_is_uniform_on_quarter_to_one() {
        let mut rng = seeded_rng(7);
        let psi = target_state();
        let n = 100_000;
        let mean = (0..n)
            .map(|_| fidelity_with_pure(&random_input_state(&mut rng), &psi).unwrap())
            .sum::<f64>()
            / n as f64;
        assert!((mean - 0.625).abs() < 0.01, "mean {mean}");
    }

    #[test]
    fn coefficients_of_reference_states() {
        let c = bell_basis_coefficients(&werner_from_fidelity(0.7).unwrap()).unwrap();
        assert!(c.max_weight_diff(&BellCoefficients::diagonal(0.7, 0.1, 0.1, 0.1)) < 1e-12);
        assert!(c.off_diag_norm <= 1e-12);

        let c = bell_basis_coefficients(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(c.max_weight_diff(&BellCoefficients::werner(0.25)) < 1e-14);

        let c = bell_basis_coefficients(&bell_state(BellKind::PhiMinus).projector()).unwrap();
        assert!(c.max_weight_diff(&BellCoefficients::diagonal(0.0, 0.0, 0.0, 1.0)) < 1e-14);

        assert!(bell_basis_coefficients(&DensityMatrix::maximally_mixed(1)).is_err());
    }

    #[test]
    fn coefficients_detect_coherence() {
        // |01><01| = (Ψ+ + Ψ-)(Ψ+ + Ψ-)†/2 has a Ψ+/Ψ- coherence of 1/2.
        let mut m = ComplexMatrix::zeros(4);
        m[(1, 1)] = C64::new(1.0, 0.0);
        let c = bell_basis_coefficients(&DensityMatrix::new(m).unwrap()).unwrap();
        assert!((c.off_diag_norm - 0.5).abs() < 1e-14);
        assert!((c.psi_plus - 0.5).abs() < 1e-14);
    }
}
