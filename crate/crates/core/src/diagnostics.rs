//! Post-run checks: energy conservation on static stages, stage-boundary
//! continuity, the field floor and adiabaticity margins.

use serde::{Deserialize, Serialize};

use crate::dynamics::{potential, Arc, ArmLabel, Trajectory};
use crate::error::{Result, SimError};
use crate::field::larmor_frequency;
use crate::scalar::Real;

/// Limit on |dω_L/dt|/ω_L² and on δ/min ω_L.
pub const ADIABATIC_LIMIT: f64 = 0.1;

/// Largest relative energy drift over the static-field arcs of both arms.
///
/// E = ½mv² + U(x) is evaluated at the sample times inside each arc and at
/// its ends; the spread is measured against the arc's oscillation energy
/// ½mω²A².
pub fn energy_drift<T: Real>(traj: &Trajectory<T>) -> T {
    let run = &traj.run;
    let p = &run.particle;
    let c = &run.constants;
    let mut worst = T::zero();
    for arm in ArmLabel::BOTH {
        for staged in traj.arcs(arm) {
            let Arc::Harmonic(seg) = &staged.arc else {
                continue;
            };
            let scale = T::half() * p.mass * (seg.omega * seg.amplitude).powi(2);
            if scale == T::zero() {
                continue;
            }
            let (a, b) = (seg.t_start, seg.t_end);
            let mut times: Vec<T> = traj.times.iter().copied().filter(|&t| t > a && t < b).collect();
            times.push(a);
            times.push(b);
            let energy = |t: T| {
                let (x, v) = seg.state(t);
                T::half() * p.mass * v * v + potential(x, t, staged.spin_sign, &traj.schedule, p, c)
            };
            let (mut lo, mut hi) = (T::infinity(), T::neg_infinity());
            for t in times {
                let e = energy(t);
                lo = lo.min(e);
                hi = hi.max(e);
            }
            worst = worst.max((hi - lo) / scale);
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticityReport<T> {
    pub min_field: T,
    pub min_larmor: T,
    /// max |dω_L/dt| / ω_L² along both arms.
    pub max_larmor_rate_ratio: T,
    /// δ / min ω_L.
    pub switch_to_larmor: T,
    pub field_floor_ok: bool,
    pub rate_ok: bool,
    pub switch_ok: bool,
}

impl<T> AdiabaticityReport<T> {
    pub fn passed(&self) -> bool {
        self.field_floor_ok && self.rate_ok && self.switch_ok
    }
}

/// Larmor margins along both arms, at every sample and integration node.
pub fn adiabaticity_report<T: Real>(traj: &Trajectory<T>) -> Result<AdiabaticityReport<T>> {
    if traj.times.is_empty() {
        return Err(SimError::EmptyTrajectory);
    }
    let run = &traj.run;
    let c = &run.constants;
    let schedule = &traj.schedule;
    let mut min_field = T::infinity();
    let mut max_ratio = T::zero();
    let mut visit = |t: T, x: T, v: T| {
        let bx = schedule.field_at(x, T::zero(), t).0;
        let rate = schedule.field_rate_at(x, t) + schedule.field_gradient_at(x, T::zero(), t) * v;
        min_field = min_field.min(bx.abs());
        let wl = larmor_frequency(c, bx.abs());
        let dwl = c.larmor_ratio() * rate.abs();
        let ratio = if wl > T::zero() { dwl / (wl * wl) } else { T::infinity() };
        max_ratio = max_ratio.max(ratio);
    };
    for arm in ArmLabel::BOTH {
        for (t, s) in traj.times.iter().zip(traj.samples(arm)) {
            visit(*t, s.x, s.v);
        }
        for staged in traj.arcs(arm) {
            if let Arc::Numeric(n) = &staged.arc {
                for node in &n.nodes {
                    visit(node.t, node.y[0], node.y[1]);
                }
            }
        }
    }
    let min_larmor = larmor_frequency(c, min_field);
    let switch = if min_larmor > T::zero() {
        run.field.delta / min_larmor
    } else {
        T::infinity()
    };
    let limit = T::lit(ADIABATIC_LIMIT);
    Ok(AdiabaticityReport {
        min_field,
        min_larmor,
        max_larmor_rate_ratio: max_ratio,
        switch_to_larmor: switch,
        field_floor_ok: min_field >= run.epsilon(),
        rate_ok: max_ratio < limit,
        switch_ok: switch < limit,
    })
}

/// Pass/fail summary of the per-run invariants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunFlags {
    pub closure: bool,
    pub field_floor: bool,
    pub continuity: bool,
    pub energy: bool,
    pub adiabatic: bool,
    pub max_in_separation_stage: bool,
}

impl RunFlags {
    pub fn all(&self) -> bool {
        self.closure && self.field_floor && self.continuity && self.energy && self.adiabatic && self.max_in_separation_stage
    }
}

/// Relative limits used by [`RunFlags`].
pub const CONTINUITY_LIMIT: f64 = 1e-9;
pub const ENERGY_LIMIT: f64 = 1e-9;
