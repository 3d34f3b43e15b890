use thiserror::Error;

use crate::model::Violation;

/// Failure of a simulation, closure solve or calibration.
///
/// Values are carried as `f64` regardless of the scalar type of the run.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid run specification: {}", format_violations(.0))]
    InvalidSpec(Vec<Violation>),

    #[error("invalid particle: {0}")]
    InvalidParticle(String),

    #[error("{what}: denominator is zero")]
    DivisionByZero { what: &'static str },

    #[error("no {event} event: {reason}")]
    NoEvent { event: &'static str, reason: String },

    #[error("integration step underflow at t = {t:e} s (h = {h:e} s); check delta and tolerances")]
    StepUnderflow { t: f64, h: f64 },

    #[error("{arm} arm entered the low-field region at t = {t:e} s (x = {x:e} m, |Bx| = {field:e} T)")]
    ForbiddenRegion {
        arm: &'static str,
        t: f64,
        x: f64,
        field: f64,
    },

    #[error("switching windows overlap: gradient restore starts at {restore_start:e} s before removal ends at {removal_end:e} s")]
    WindowOverlap { removal_end: f64, restore_start: f64 },

    #[error("no closure: {0}")]
    NoClosure(String),

    #[error("end-state constraint violated: x+(tau6) = {x_plus:e} m is not beyond {bound:e} m")]
    EndConstraint { x_plus: f64, bound: f64 },

    #[error("interval [{from:e}, {to:e}] s lies outside segment [{start:e}, {end:e}] s")]
    OutsideSegment {
        from: f64,
        to: f64,
        start: f64,
        end: f64,
    },

    #[error("calibration target not bracketed: {0}")]
    NotBracketed(String),

    #[error("empty trajectory")]
    EmptyTrajectory,
}

impl SimError {
    /// True for failures caused by the inputs rather than the physics.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            SimError::InvalidSpec(_) | SimError::InvalidParticle(_) | SimError::DivisionByZero { .. }
        )
    }
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = SimError> = std::result::Result<T, E>;
