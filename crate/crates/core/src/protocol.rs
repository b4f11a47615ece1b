//! One purification round and its iteration on identical copies.
//!
//! A round acts on `ρ ⊗ ρ` with qubits ordered `(A1, B1, A2, B2)`. Pair 1
//! `(A1, B1)` is kept, pair 2 `(A2, B2)` is measured. Alice applies a noisy
//! CNOT `A1 → A2`, Bob applies `B1 → B2`, and the round succeeds when the
//! measured qubits agree.

use crate::channels::{noisy_cnot, GateNoise};
use crate::error::{Error, Result};
use crate::qlinalg::{
    fidelity_with_pure, postselect_equal_outcomes, tensor_product, ComplexMatrix, DensityMatrix,
    C64,
};
use crate::states::{target_state, werner_from_fidelity};

pub const DEFAULT_MAX_ROUNDS: usize = 10_000;
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-9;
pub const DEFAULT_ZERO_PROB_TOL: f64 = 1e-14;

const KEPT: (usize, usize) = (0, 1);
const MEASURED: (usize, usize) = (2, 3);

/// Local operation applied to the kept pair between rounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalOperation {
    /// Alice applies `Rx(π/2)`, Bob `Rx(-π/2)`. This swaps the `Φ-` and `Ψ-`
    /// weights and leaves `Ψ+` and `Φ+` fixed, so phase errors that the CNOT
    /// parity check cannot see become detectable amplitude errors next round.
    #[default]
    BilateralRotation,
    /// Project onto the Werner state of equal `Ψ+` fidelity.
    Twirl,
    /// Literal circuit only.
    None,
}

impl LocalOperation {
    pub fn apply(self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        match self {
            LocalOperation::BilateralRotation => rho.conjugate(&bilateral_rotation_unitary()),
            LocalOperation::Twirl => twirl_to_werner(rho),
            LocalOperation::None => Ok(rho.clone()),
        }
    }
}

fn rx(theta: f64) -> ComplexMatrix {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    ComplexMatrix::from_entries(vec![
        C64::new(c, 0.0),
        C64::new(0.0, -s),
        C64::new(0.0, -s),
        C64::new(c, 0.0),
    ])
}

/// `Rx(π/2) ⊗ Rx(-π/2)` on (Alice, Bob).
pub fn bilateral_rotation_unitary() -> ComplexMatrix {
    let quarter = std::f64::consts::FRAC_PI_2;
    tensor_product(&rx(quarter), &rx(-quarter))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolConfig {
    pub noise: GateNoise,
    pub local_operation: LocalOperation,
    pub max_rounds: usize,
    pub convergence_tol: f64,
    pub zero_prob_tol: f64,
}

impl ProtocolConfig {
    pub fn new(noise: GateNoise) -> Self {
        Self {
            noise,
            local_operation: LocalOperation::default(),
            max_rounds: DEFAULT_MAX_ROUNDS,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            zero_prob_tol: DEFAULT_ZERO_PROB_TOL,
        }
    }

    pub fn with_p_gate(p_gate: f64) -> Result<Self> {
        Ok(Self::new(GateNoise::new(p_gate)?))
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_rounds == 0 {
            return Err(Error::Domain("max_rounds must be at least 1".into()));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(Error::Domain(format!(
                "convergence_tol {} must be positive",
                self.convergence_tol
            )));
        }
        if !(self.zero_prob_tol >= 0.0) {
            return Err(Error::Domain(format!(
                "zero_prob_tol {} must be non-negative",
                self.zero_prob_tol
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    pub output_state: DensityMatrix,
    pub success_probability: f64,
    pub output_fidelity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxRounds,
    ZeroProbability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub input_fidelity: f64,
    /// Fidelity after each completed round.
    pub fidelities: Vec<f64>,
    pub terminated_by: Termination,
    /// State after the last completed round (the input if none completed).
    pub final_state: DensityMatrix,
}

impl TrajectoryRecord {
    /// Fidelity after the last completed round, or the input fidelity.
    pub fn final_fidelity(&self) -> f64 {
        self.fidelities.last().copied().unwrap_or(self.input_fidelity)
    }
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.n_qubits() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: rho.n_qubits(),
        });
    }
    Ok(())
}

/// Runs the bilateral CNOT and parity check on a prepared 4-qubit state.
/// `kept` pair holds the controls, `measured` pair the targets.
pub(crate) fn round_on_pairs(
    joint: &DensityMatrix,
    kept: (usize, usize),
    measured: (usize, usize),
    config: &ProtocolConfig,
    observer: &mut dyn FnMut(&DensityMatrix),
) -> Result<RoundOutcome> {
    observer(joint);
    let after_alice = noisy_cnot(joint, kept.0, measured.0, config.noise)?;
    observer(&after_alice);
    let after_bob = noisy_cnot(&after_alice, kept.1, measured.1, config.noise)?;
    observer(&after_bob);
    let (output_state, success_probability) =
        postselect_equal_outcomes(&after_bob, measured.0, measured.1)?;
    if success_probability < config.zero_prob_tol {
        return Err(Error::ZeroProbability(success_probability));
    }
    observer(&output_state);
    let output_fidelity = fidelity_with_pure(&output_state, &target_state())?;
    Ok(RoundOutcome {
        output_state,
        success_probability,
        output_fidelity,
    })
}

pub fn purification_round(rho: &DensityMatrix, config: &ProtocolConfig) -> Result<RoundOutcome> {
    purification_round_observed(rho, config, &mut |_| {})
}

/// As [`purification_round`], reporting every intermediate state to `observer`:
/// the 4-qubit state before the gates, after each noisy CNOT, then the kept pair.
pub fn purification_round_observed(
    rho: &DensityMatrix,
    config: &ProtocolConfig,
    observer: &mut dyn FnMut(&DensityMatrix),
) -> Result<RoundOutcome> {
    require_two_qubits(rho)?;
    config.validate()?;
    round_on_pairs(&rho.tensor(rho), KEPT, MEASURED, config, observer)
}

/// Werner state with the same `Ψ+` fidelity.
pub fn twirl_to_werner(rho: &DensityMatrix) -> Result<DensityMatrix> {
    require_two_qubits(rho)?;
    let f = fidelity_with_pure(rho, &target_state())?;
    werner_from_fidelity(f.clamp(0.0, 1.0))
}

pub fn iterate_trajectory(rho0: &DensityMatrix, config: &ProtocolConfig) -> Result<TrajectoryRecord> {
    iterate_trajectory_observed(rho0, config, &mut |_| {})
}

/// As [`iterate_trajectory`], reporting every intermediate state to `observer`.
pub fn iterate_trajectory_observed(
    rho0: &DensityMatrix,
    config: &ProtocolConfig,
    observer: &mut dyn FnMut(&DensityMatrix),
) -> Result<TrajectoryRecord> {
    require_two_qubits(rho0)?;
    config.validate()?;
    let input_fidelity = fidelity_with_pure(rho0, &target_state())?;
    let mut state = rho0.clone();
    let mut previous = input_fidelity;
    let mut fidelities = Vec::new();
    let mut terminated_by = Termination::MaxRounds;

    for _ in 0..config.max_rounds {
        let outcome = match purification_round_observed(&state, config, observer) {
            Ok(outcome) => outcome,
            Err(Error::ZeroProbability(_)) => {
                terminated_by = Termination::ZeroProbability;
                break;
            }
            Err(e) => return Err(e),
        };
        state = config.local_operation.apply(&outcome.output_state)?;
        observer(&state);
        fidelities.push(outcome.output_fidelity);
        if (outcome.output_fidelity - previous).abs() < config.convergence_tol {
            terminated_by = Termination::Converged;
            break;
        }
        previous = outcome.output_fidelity;
    }

    Ok(TrajectoryRecord {
        input_fidelity,
        fidelities,
        terminated_by,
        final_state: state,
    })
}
