//! Matrix-free reference for the noiseless round on Bell-diagonal states.
//!
//! Bell states are labelled by an amplitude bit (Φ = 0, Ψ = 1) and a phase
//! bit (+ = 0, − = 1). A bilateral CNOT copies the source amplitude bit into
//! the target and the target phase bit back into the source; the parity
//! check keeps the source exactly when the target ends with amplitude bit 0.

use crate::error::{Error, Result};
use crate::states::{BellCoefficients, BellKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BellBitLabel {
    pub amplitude_bit: u8,
    pub phase_bit: u8,
}

impl From<BellKind> for BellBitLabel {
    fn from(kind: BellKind) -> Self {
        let (amplitude_bit, phase_bit) = kind.bits();
        Self {
            amplitude_bit,
            phase_bit,
        }
    }
}

impl From<BellBitLabel> for BellKind {
    fn from(label: BellBitLabel) -> Self {
        BellKind::from_bits(label.amplitude_bit, label.phase_bit)
    }
}

/// `(a₁, p₁), (a₂, p₂) -> (a₁, p₁ ⊕ p₂), (a₁ ⊕ a₂, p₂)`
pub fn bilateral_cnot_action(
    source: BellBitLabel,
    target: BellBitLabel,
) -> (BellBitLabel, BellBitLabel) {
    (
        BellBitLabel {
            amplitude_bit: source.amplitude_bit,
            phase_bit: source.phase_bit ^ target.phase_bit,
        },
        BellBitLabel {
            amplitude_bit: source.amplitude_bit ^ target.amplitude_bit,
            phase_bit: target.phase_bit,
        },
    )
}

/// `Rx(π/2) ⊗ Rx(-π/2)` in bit language: `a ⊕= p`.
pub fn bilateral_rotation_action(label: BellBitLabel) -> BellBitLabel {
    BellBitLabel {
        amplitude_bit: label.amplitude_bit ^ label.phase_bit,
        phase_bit: label.phase_bit,
    }
}

/// Kept weights (unnormalized, by [`BellKind`] order in `BellKind::ALL`) and
/// the discarded weight.
fn enumerate_round(weights: &BellCoefficients) -> ([f64; 4], f64) {
    let mut kept = [0.0; 4];
    let mut discarded = 0.0;
    for source in BellKind::ALL {
        for target in BellKind::ALL {
            let w = weights.weight(source) * weights.weight(target);
            let (src_out, tgt_out) = bilateral_cnot_action(source.into(), target.into());
            if tgt_out.amplitude_bit == 0 {
                let kind = BellKind::from(src_out);
                let slot = BellKind::ALL.iter().position(|&k| k == kind).unwrap();
                kept[slot] += w;
            } else {
                discarded += w;
            }
        }
    }
    (kept, discarded)
}

/// Output Bell weights and success probability of one noiseless round.
pub fn noiseless_round_bell_diagonal(
    weights: &BellCoefficients,
) -> Result<(BellCoefficients, f64)> {
    let all = BellKind::ALL.map(|k| weights.weight(k));
    if all.iter().any(|&w| !(w >= -1e-12)) || (weights.total() - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!(
            "Bell weights {all:?} are not a probability vector"
        )));
    }
    let (kept, _) = enumerate_round(weights);
    let success: f64 = kept.iter().sum();
    if success <= 0.0 {
        return Err(Error::ZeroProbability(success));
    }
    let mut out = BellCoefficients::diagonal(0.0, 0.0, 0.0, 0.0);
    for (kind, w) in BellKind::ALL.iter().zip(kept) {
        *out.weight_mut(*kind) = w / success;
    }
    Ok((out, success))
}
