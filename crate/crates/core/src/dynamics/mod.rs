//! Propagation of both interferometer arms through the seven stages.

mod forces;
mod propagate;
mod segment;
mod trajectory;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

pub use forces::{acceleration, potential, stage_center, StaticStage};
pub use propagate::{
    detect_removal_event, detect_restore_event, integrate_window, simulate, tau6_given_tau5, Closing,
    EventPlan, EventTimes, Prelude,
};
pub use segment::{harmonic_segment, segment_kinetic_action, Arc, DriftSegment, NumericArc, SegmentSolution};
pub use trajectory::{Sample, Stage, StagedArc, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ArmLabel {
    /// The arm whose initial well centre is B0/η + α.
    Plus,
    Minus,
}

impl ArmLabel {
    pub const BOTH: [ArmLabel; 2] = [ArmLabel::Plus, ArmLabel::Minus];

    /// Sign s of the spin–field coupling −μ_eff·s·Bx before the flip.
    ///
    /// A negative s pushes the initial well centre to larger x, so the
    /// outward ("plus") arm starts with s = −1.
    pub fn initial_spin_sign<T: Real>(self) -> T {
        match self {
            ArmLabel::Plus => -T::one(),
            ArmLabel::Minus => T::one(),
        }
    }

    pub fn index(self) -> usize {
        match self {
            ArmLabel::Plus => 0,
            ArmLabel::Minus => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ArmLabel::Plus => "plus",
            ArmLabel::Minus => "minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArmState<T> {
    pub label: ArmLabel,
    pub spin_sign: T,
    pub x: T,
    pub v: T,
    pub t: T,
}

impl<T: Real> ArmState<T> {
    pub fn initial(label: ArmLabel, x0: T, v0: T) -> Self {
        Self {
            label,
            spin_sign: label.initial_spin_sign(),
            x: x0,
            v: v0,
            t: T::zero(),
        }
    }

    pub fn flipped(self) -> Self {
        Self {
            spin_sign: -self.spin_sign,
            ..self
        }
    }
}

/// Instantaneous reversal of both spins; position and velocity are untouched.
pub fn apply_spin_flip<T: Real>(arms: [ArmState<T>; 2]) -> [ArmState<T>; 2] {
    arms.map(ArmState::flipped)
}
