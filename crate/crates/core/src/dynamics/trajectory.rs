use serde::{Deserialize, Serialize};

use crate::field::FieldSchedule;
use crate::model::{RunSpec, StageTimes};
use crate::scalar::Real;

use super::propagate::EventTimes;
use super::segment::Arc;
use super::ArmLabel;

/// Interferometer stage an arc belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    /// Initial gradient, t < τ1.
    Accelerate,
    /// Gradient removal window [τ1, τ2].
    Removal,
    /// Uniform bridge field [τ2, τ3].
    Drift,
    /// Gradient restore window [τ3, τ4].
    Restore,
    /// Reversed gradient before the spin flip [τ4, τ5].
    Separate,
    /// Reversed gradient after the spin flip [τ5, τ6].
    Recombine,
}

impl Stage {
    pub fn is_static(self) -> bool {
        matches!(self, Stage::Accelerate | Stage::Separate | Stage::Recombine)
    }

    pub fn is_switching(self) -> bool {
        matches!(self, Stage::Removal | Stage::Restore)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StagedArc<T> {
    pub stage: Stage,
    pub spin_sign: T,
    pub arc: Arc<T>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub x: T,
    pub v: T,
}

/// Both arms of one run, sampled on a common grid, together with the arcs
/// they were assembled from.
#[derive(Debug, Clone)]
pub struct Trajectory<T> {
    pub run: RunSpec<T>,
    pub schedule: FieldSchedule<T>,
    pub stage_times: StageTimes<T>,
    pub events: EventTimes<T>,
    pub omega: T,
    pub alpha: T,
    /// k·sample_dt for k = 0, 1, … up to τ6, with τ6 appended.
    pub times: Vec<T>,
    pub plus: Vec<Sample<T>>,
    pub minus: Vec<Sample<T>>,
    pub dx: Vec<T>,
    pub dv: Vec<T>,
    pub plus_arcs: Vec<StagedArc<T>>,
    pub minus_arcs: Vec<StagedArc<T>>,
    /// Both arms coincide, so no closure time could be found.
    pub degenerate: bool,
}

impl<T: Real> Trajectory<T> {
    pub fn arcs(&self, arm: ArmLabel) -> &[StagedArc<T>] {
        match arm {
            ArmLabel::Plus => &self.plus_arcs,
            ArmLabel::Minus => &self.minus_arcs,
        }
    }

    pub fn samples(&self, arm: ArmLabel) -> &[Sample<T>] {
        match arm {
            ArmLabel::Plus => &self.plus,
            ArmLabel::Minus => &self.minus,
        }
    }

    /// Arc covering time t; boundaries resolve to the later arc.
    pub fn arc_at(&self, arm: ArmLabel, t: T) -> &StagedArc<T> {
        let arcs = self.arcs(arm);
        let idx = arcs.partition_point(|a| a.arc.t_start() <= t);
        &arcs[idx.saturating_sub(1)]
    }

    /// (x, v) of one arm at any t in [0, τ6].
    pub fn state_at(&self, arm: ArmLabel, t: T) -> (T, T) {
        self.arc_at(arm, t).arc.state(t)
    }

    /// Spin sign in effect at t.
    pub fn spin_at(&self, arm: ArmLabel, t: T) -> T {
        self.arc_at(arm, t).spin_sign
    }

    /// Largest mismatch of x and v across consecutive arcs, relative to the
    /// arm's peak |x| and peak |v|.
    pub fn boundary_mismatch(&self) -> (T, T) {
        let mut worst = (T::zero(), T::zero());
        for arm in ArmLabel::BOTH {
            let samples = self.samples(arm);
            let x_scale = samples.iter().fold(T::zero(), |m, s| m.max(s.x.abs()));
            let v_scale = samples.iter().fold(T::zero(), |m, s| m.max(s.v.abs()));
            for pair in self.arcs(arm).windows(2) {
                let t = pair[1].arc.t_start();
                let (xa, va) = pair[0].arc.state(t);
                let (xb, vb) = pair[1].arc.state(t);
                if x_scale > T::zero() {
                    worst.0 = worst.0.max((xa - xb).abs() / x_scale);
                }
                if v_scale > T::zero() {
                    worst.1 = worst.1.max((va - vb).abs() / v_scale);
                }
            }
        }
        worst
    }

    /// Smallest |Bx| seen by either arm at the samples and integration nodes.
    pub fn min_field(&self) -> T {
        let mut min = T::infinity();
        for arm in ArmLabel::BOTH {
            for (t, s) in self.times.iter().zip(self.samples(arm)) {
                min = min.min(self.schedule.field_at(s.x, T::zero(), *t).0.abs());
            }
            for staged in self.arcs(arm) {
                if let Arc::Numeric(n) = &staged.arc {
                    for node in &n.nodes {
                        min = min.min(self.schedule.field_at(node.y[0], T::zero(), node.t).0.abs());
                    }
                }
            }
        }
        min
    }

    pub fn max_abs_dv(&self) -> T {
        self.dv.iter().fold(T::zero(), |m, d| m.max(d.abs()))
    }

    /// Residuals (Δx, Δv) at τ6.
    pub fn closure_residuals(&self) -> (T, T) {
        let t6 = self.stage_times.tau6;
        let (xp, vp) = self.state_at(ArmLabel::Plus, t6);
        let (xm, vm) = self.state_at(ArmLabel::Minus, t6);
        (xp - xm, vp - vm)
    }
}
