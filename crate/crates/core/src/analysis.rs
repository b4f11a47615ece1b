//! Minimum purifiable fidelity, asymptotic fidelity, and the gate-noise
//! threshold where the two meet.
//!
//! Both quantities are defined through trajectories of Werner inputs:
//!
//! * `F_∞` is the limit reached from the ideal input `|Ψ+>`. It only exists
//!   while that limit is an entangled state (fidelity above 1/2).
//! * `F_min` is the boundary, below `F_∞`, between inputs whose fidelity
//!   rises under iteration and inputs whose fidelity falls.
//!
//! Inputs above `F_∞` fall back onto it, so the `F_min` bisection is bracketed
//! by `[1/4, F_∞]` rather than by `[1/4, 1]`.

use rayon::prelude::*;

use crate::channels::GateNoise;
use crate::error::{Error, Result};
use crate::protocol::{
    iterate_trajectory_observed, LocalOperation, ProtocolConfig, Termination, TrajectoryRecord,
    DEFAULT_CONVERGENCE_TOL, DEFAULT_MAX_ROUNDS, DEFAULT_ZERO_PROB_TOL,
};
use crate::qlinalg::DensityMatrix;
use crate::states::{target_state, werner_from_fidelity};

type Observer<'a> = &'a mut dyn FnMut(&DensityMatrix);

/// Net fidelity change below which a trajectory counts as stalled.
pub const CLASSIFY_TOL: f64 = 1e-6;

/// Fidelity of the maximally mixed two-qubit state.
pub const MIXED_FIDELITY: f64 = 0.25;

/// Bell-diagonal states at or below this fidelity are separable.
pub const SEPARABLE_FIDELITY: f64 = 0.5;

pub const DEFAULT_F_TOL: f64 = 5e-4;
pub const DEFAULT_P_TOL: f64 = 2e-3;
pub const DEFAULT_GAP_TOL: f64 = 1e-3;

/// Largest gate error rate accepted by [`sweep`].
pub const MAX_SWEEP_P: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrajectoryClass {
    Purified,
    Degraded,
    Stalled,
}

/// Tolerances and protocol knobs shared by every analysis routine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisSettings {
    pub local_operation: LocalOperation,
    pub max_rounds: usize,
    pub convergence_tol: f64,
    pub zero_prob_tol: f64,
    /// Final bracket width of the `F_min` bisection.
    pub f_tol: f64,
    /// Final bracket width of the threshold bisection.
    pub p_tol: f64,
    /// Minimum `F_∞ - F_min` required at the lower threshold bracket edge.
    pub gap_tol: f64,
}

impl Default for AnalysisSettings {
    fn default() -> Self {
        Self {
            local_operation: LocalOperation::default(),
            max_rounds: DEFAULT_MAX_ROUNDS,
            convergence_tol: DEFAULT_CONVERGENCE_TOL,
            zero_prob_tol: DEFAULT_ZERO_PROB_TOL,
            f_tol: DEFAULT_F_TOL,
            p_tol: DEFAULT_P_TOL,
            gap_tol: DEFAULT_GAP_TOL,
        }
    }
}

impl AnalysisSettings {
    pub fn protocol(&self, p_gate: f64) -> Result<ProtocolConfig> {
        let config = ProtocolConfig {
            noise: GateNoise::new(p_gate)?,
            local_operation: self.local_operation,
            max_rounds: self.max_rounds,
            convergence_tol: self.convergence_tol,
            zero_prob_tol: self.zero_prob_tol,
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("f_tol", self.f_tol),
            ("p_tol", self.p_tol),
            ("gap_tol", self.gap_tol),
        ] {
            if !(value > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {value}")));
            }
        }
        Ok(())
    }
}

pub fn classify_trajectory(record: &TrajectoryRecord) -> TrajectoryClass {
    let change = record.final_fidelity() - record.input_fidelity;
    if record.terminated_by == Termination::ZeroProbability || change < -CLASSIFY_TOL {
        TrajectoryClass::Degraded
    } else if change > CLASSIFY_TOL && record.terminated_by == Termination::Converged {
        TrajectoryClass::Purified
    } else {
        TrajectoryClass::Stalled
    }
}

/// Bisection predicate: stalled trajectories follow the sign of their last
/// nonzero fidelity change, exact ties count as not purified.
fn purifies(record: &TrajectoryRecord) -> bool {
    match classify_trajectory(record) {
        TrajectoryClass::Purified => true,
        TrajectoryClass::Degraded => false,
        TrajectoryClass::Stalled => {
            let mut prev = record.input_fidelity;
            let mut last_change = 0.0;
            for &f in &record.fidelities {
                if f != prev {
                    last_change = f - prev;
                }
                prev = f;
            }
            last_change > 0.0
        }
    }
}

fn check_p(p_gate: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p_gate) {
        return Err(Error::Domain(format!("gate error rate {p_gate} not in [0, 1]")));
    }
    Ok(())
}

/// Trajectory of the Werner input with fidelity `f0` at the given noise level.
pub fn werner_trajectory(
    f0: f64,
    p_gate: f64,
    settings: &AnalysisSettings,
) -> Result<TrajectoryRecord> {
    werner_trajectory_observed(f0, p_gate, settings, &mut |_| {})
}

fn werner_trajectory_observed(
    f0: f64,
    p_gate: f64,
    settings: &AnalysisSettings,
    observer: Observer<'_>,
) -> Result<TrajectoryRecord> {
    let rho0 = werner_from_fidelity(f0)?;
    observer(&rho0);
    iterate_trajectory_observed(&rho0, &settings.protocol(p_gate)?, observer)
}

/// Limit fidelity from the ideal input, or `None` when the trajectory does
/// not settle on an entangled fixed point.
pub fn find_f_infty(p_gate: f64, settings: &AnalysisSettings) -> Result<Option<f64>> {
    find_f_infty_observed(p_gate, settings, &mut |_| {})
}

fn find_f_infty_observed(
    p_gate: f64,
    settings: &AnalysisSettings,
    observer: Observer<'_>,
) -> Result<Option<f64>> {
    check_p(p_gate)?;
    let rho0 = target_state().projector();
    observer(&rho0);
    let record = iterate_trajectory_observed(&rho0, &settings.protocol(p_gate)?, observer)?;
    let limit = record.final_fidelity();
    Ok((record.terminated_by == Termination::Converged && limit > SEPARABLE_FIDELITY)
        .then_some(limit))
}

/// Bisects `[1/4, f_infty]` for the purified/degraded boundary.
fn bisect_f_min(
    p_gate: f64,
    f_infty: f64,
    settings: &AnalysisSettings,
    observer: Observer<'_>,
) -> Result<Option<f64>> {
    let (mut lo, mut hi) = (MIXED_FIDELITY, f_infty);
    let mut found_purified = false;
    while hi - lo > settings.f_tol {
        let mid = 0.5 * (lo + hi);
        if purifies(&werner_trajectory_observed(mid, p_gate, settings, observer)?) {
            hi = mid;
            found_purified = true;
        } else {
            lo = mid;
        }
    }
    Ok(found_purified.then_some(0.5 * (lo + hi)))
}

/// Minimum purifiable Werner input fidelity, or `None` when no input purifies.
pub fn find_f_min(p_gate: f64, settings: &AnalysisSettings) -> Result<Option<f64>> {
    Ok(sweep_row(p_gate, settings)?.f_min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub p_gate: f64,
    pub f_min: Option<f64>,
    pub f_infty: Option<f64>,
}

impl SweepRow {
    pub fn purifiable(&self) -> bool {
        self.f_min.is_some()
    }
}

pub fn sweep_row(p_gate: f64, settings: &AnalysisSettings) -> Result<SweepRow> {
    sweep_row_observed(p_gate, settings, &mut |_| {})
}

/// As [`sweep_row`], passing every state produced along the way (inputs,
/// 4-qubit intermediates, round outputs) to `observer`.
pub fn sweep_row_observed(
    p_gate: f64,
    settings: &AnalysisSettings,
    observer: Observer<'_>,
) -> Result<SweepRow> {
    check_p(p_gate)?;
    settings.validate()?;
    let f_infty = find_f_infty_observed(p_gate, settings, observer)?;
    let f_min = match f_infty {
        Some(limit) => bisect_f_min(p_gate, limit, settings, observer)?,
        None => None,
    };
    Ok(SweepRow {
        p_gate,
        f_min,
        f_infty,
    })
}

/// One row per gate error rate, evaluated in parallel, returned in ascending `p_gate`.
pub fn sweep(p_values: &[f64], settings: &AnalysisSettings) -> Result<Vec<SweepRow>> {
    if let Some(&bad) = p_values
        .iter()
        .find(|p| !(0.0..=MAX_SWEEP_P).contains(*p))
    {
        return Err(Error::Domain(format!(
            "sweep value {bad} not in [0, {MAX_SWEEP_P}]"
        )));
    }
    let mut sorted = p_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .par_iter()
        .map(|&p| sweep_row(p, settings))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdReport {
    /// Every row evaluated during the search, sorted by `p_gate`.
    pub rows: Vec<SweepRow>,
    pub p_th: f64,
    /// Midpoint of `F_min` and `F_∞` at the last purifiable error rate.
    pub f_at_threshold: f64,
    /// Final bisection bracket.
    pub bracket: (f64, f64),
}

/// Bisects `[p_lo, p_hi]` for the error rate at which `F_min` disappears.
pub fn find_threshold(p_lo: f64, p_hi: f64, settings: &AnalysisSettings) -> Result<ThresholdReport> {
    check_p(p_lo)?;
    check_p(p_hi)?;
    settings.validate()?;
    if p_lo >= p_hi {
        return Err(Error::Bracket(format!("empty bracket [{p_lo}, {p_hi}]")));
    }
    let lower = sweep_row(p_lo, settings)?;
    match (lower.f_min, lower.f_infty) {
        (Some(f_min), Some(f_infty)) if f_infty - f_min > settings.gap_tol => {}
        _ => {
            return Err(Error::Bracket(format!(
                "purification is not possible at p_lo = {p_lo}"
            )))
        }
    }
    let upper = sweep_row(p_hi, settings)?;
    if upper.purifiable() {
        return Err(Error::Bracket(format!(
            "purification is still possible at p_hi = {p_hi}"
        )));
    }

    let mut rows = vec![lower, upper];
    let (mut lo, mut hi) = (p_lo, p_hi);
    let mut last_purifiable = lower;
    while hi - lo > settings.p_tol {
        let mid = 0.5 * (lo + hi);
        let row = sweep_row(mid, settings)?;
        rows.push(row);
        if row.purifiable() {
            lo = mid;
            last_purifiable = row;
        } else {
            hi = mid;
        }
    }
    rows.sort_by(|a, b| a.p_gate.total_cmp(&b.p_gate));

    let f_at_threshold = match (last_purifiable.f_min, last_purifiable.f_infty) {
        (Some(a), Some(b)) => 0.5 * (a + b),
        _ => unreachable!("the lower bracket edge is always purifiable"),
    };
    Ok(ThresholdReport {
        rows,
        p_th: 0.5 * (lo + hi),
        f_at_threshold,
        bracket: (lo, hi),
    })
}
