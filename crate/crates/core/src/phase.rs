//! Path-phase difference θ⁺ − θ⁻ from the kinetic action (m/2ħ)∫v² dt, and
//! the timing and bias-field stability it implies.

use serde::{Deserialize, Serialize};

use crate::dynamics::{Arc, ArmLabel, Stage, Trajectory};
use crate::error::{Result, SimError};
use crate::model::{PhysicalConstants, StageTimes};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseReport<T> {
    /// Sum of per-arc actions, closed form on analytic arcs.
    pub dtheta_exact: T,
    /// Composite Simpson quadrature of the same integral.
    pub dtheta_numeric: T,
    /// Three-term stage-time approximation.
    pub dtheta_approx: T,
    /// dtheta_approx / (B0·τ6) in rad/(T·s).
    pub prefactor: T,
    /// (2τ1 − 2τ5 + τ6)/τ6.
    pub duty_factor: T,
    /// Part of dtheta_exact accrued inside the switching windows.
    pub window_contribution: T,
    /// Exact Δθ over [0, τ1].
    pub dtheta_tau1: T,
    /// (g·e·B0/2m_e)·τ1.
    pub dtheta_tau1_closed_form: T,
    pub tau_total: T,
    pub dt_max: T,
    #[serde(rename = "dB0_max")]
    pub db0_max: T,
}

/// Δθ over [0, t_end] from the per-arc actions, with the switching-window part
/// returned separately: (total, windows).
pub fn phase_difference_until<T: Real>(traj: &Trajectory<T>, t_end: T) -> Result<(T, T)> {
    if traj.times.is_empty() {
        return Err(SimError::EmptyTrajectory);
    }
    let mass = traj.run.particle.mass;
    let hbar = traj.run.constants.hbar;
    // Each arm is summed on its own so identical arms cancel exactly.
    let mut total = [T::zero(); 2];
    let mut windows = [T::zero(); 2];
    for arm in ArmLabel::BOTH {
        let i = arm.index();
        for staged in traj.arcs(arm) {
            let a = staged.arc.t_start();
            let b = staged.arc.t_end().min(t_end);
            if b <= a {
                continue;
            }
            let theta = staged.arc.action(a, b, mass, hbar);
            total[i] = total[i] + theta;
            if staged.stage.is_switching() {
                windows[i] = windows[i] + theta;
            }
        }
    }
    Ok((total[0] - total[1], windows[0] - windows[1]))
}

/// Δθ = θ⁺ − θ⁻ over the whole closed trajectory.
pub fn phase_difference_exact<T: Real>(traj: &Trajectory<T>) -> Result<T> {
    Ok(phase_difference_until(traj, traj.stage_times.tau6)?.0)
}

/// Simpson quadrature of (m/2ħ)v² on every arc, from the arc states only.
pub fn phase_difference_numeric<T: Real>(traj: &Trajectory<T>) -> Result<T> {
    if traj.times.is_empty() {
        return Err(SimError::EmptyTrajectory);
    }
    let mass = traj.run.particle.mass;
    let hbar = traj.run.constants.hbar;
    let h_target = (T::TAU() / traj.omega) / T::lit(4000.0);
    let mut total = [T::zero(); 2];
    for arm in ArmLabel::BOTH {
        for staged in traj.arcs(arm) {
            let (a, b) = (staged.arc.t_start(), staged.arc.t_end());
            if !(b > a) {
                continue;
            }
            let integral = simpson(|t| staged.arc.state(t).1.powi(2), a, b, h_target, &staged.arc);
            total[arm.index()] = total[arm.index()] + mass / (T::two() * hbar) * integral;
        }
    }
    Ok(total[0] - total[1])
}

fn simpson<T: Real>(f: impl Fn(T) -> T, a: T, b: T, h_target: T, arc: &Arc<T>) -> T {
    // Integration arcs are resolved node by node, so Simpson panels follow
    // the integrator nodes there.
    if let Arc::Numeric(n) = arc {
        let mut s = T::zero();
        for w in n.nodes.windows(2) {
            s = s + simpson_uniform(&f, w[0].t, w[1].t, 4);
        }
        return s;
    }
    let n = ((b - a) / h_target).ceil().to_usize().unwrap_or(2).max(2);
    simpson_uniform(&f, a, b, n + n % 2)
}

fn simpson_uniform<T: Real>(f: &impl Fn(T) -> T, a: T, b: T, n: usize) -> T {
    let h = (b - a) / T::from_usize(n).expect("panel count");
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { T::lit(4.0) } else { T::two() };
        s = s + w * f(a + h * T::from_usize(i).expect("panel index"));
    }
    s * h / T::lit(3.0)
}

/// (2τ1 − 2τ5 + τ6)/τ6: time spent accelerating apart minus time spent
/// attracted back, as a fraction of the total.
pub fn duty_factor<T: Real>(st: &StageTimes<T>) -> T {
    (T::two() * st.tau1 - T::two() * st.tau5 + st.tau6) / st.tau6
}

/// Δθ ≈ (g·e·B0/2m_e)·(2τ1 − 2τ5 + τ6).
pub fn phase_difference_approx<T: Real>(st: &StageTimes<T>, b0: T, constants: &PhysicalConstants<T>) -> T {
    constants.larmor_ratio() * b0 * duty_factor(st) * st.tau6
}

/// (dt_max, dB0_max) keeping the phase uncertainty below `tolerance`.
pub fn stability_budget<T: Real>(b0: T, tau_total: T, tolerance: T, constants: &PhysicalConstants<T>) -> (T, T) {
    let k = constants.larmor_ratio() * T::half();
    (tolerance / (k * b0), tolerance / (k * tau_total))
}

pub fn phase_report<T: Real>(traj: &Trajectory<T>) -> Result<PhaseReport<T>> {
    let run = &traj.run;
    let c = &run.constants;
    let st = traj.stage_times;
    let b0 = run.field.b0;
    let (exact, windows) = phase_difference_until(traj, st.tau6)?;
    let numeric = phase_difference_numeric(traj)?;
    let approx = phase_difference_approx(&st, b0, c);
    let (tau1_exact, _) = phase_difference_until(traj, st.tau1)?;
    let (dt_max, db0_max) = stability_budget(b0, st.tau6, run.numerics.phase_tolerance, c);
    Ok(PhaseReport {
        dtheta_exact: exact,
        dtheta_numeric: numeric,
        dtheta_approx: approx,
        prefactor: approx / (b0 * st.tau6),
        duty_factor: duty_factor(&st),
        window_contribution: windows,
        dtheta_tau1: tau1_exact,
        dtheta_tau1_closed_form: c.larmor_ratio() * b0 * st.tau1,
        tau_total: st.tau6,
        dt_max,
        db0_max,
    })
}

/// Secular part of Δθ over [0, τ1] for arms released at rest:
/// (mω²τ1/4ħ)·(A⁺² − A⁻²), the oscillating sin(2ωτ1) terms dropped.
pub fn secular_tau1_phase<T: Real>(traj: &Trajectory<T>) -> Option<T> {
    let run = &traj.run;
    let amp = |arm: ArmLabel| {
        traj.arcs(arm).iter().find(|a| a.stage == Stage::Accelerate).and_then(|a| match &a.arc {
            Arc::Harmonic(s) => Some(s.amplitude),
            _ => None,
        })
    };
    let (ap, am) = (amp(ArmLabel::Plus)?, amp(ArmLabel::Minus)?);
    let w = traj.omega;
    Some(run.particle.mass * w * w * traj.stage_times.tau1 / (T::lit(4.0) * run.constants.hbar) * (ap * ap - am * am))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::close_run;
    use crate::model::RunSpec;
    use approx::assert_relative_eq;

    const EPS: f64 = 2.0895e-6;

    #[test]
    fn exact_matches_quadrature() {
        let closed = close_run(&RunSpec::reference(1e-17, 40.0, EPS)).unwrap();
        let r = phase_report(&closed.trajectory).unwrap();
        assert_relative_eq!(r.dtheta_exact, r.dtheta_numeric, max_relative = 1e-4);
        assert!(r.window_contribution.abs() < 0.05 * r.dtheta_exact.abs());
    }

    #[test]
    fn duty_factor_near_half() {
        let closed = close_run(&RunSpec::reference(1e-17, 40.0, EPS)).unwrap();
        let r = phase_report(&closed.trajectory).unwrap();
        assert!((r.duty_factor - 0.5).abs() < 0.05, "{}", r.duty_factor);
        // g·e/(4 m_e) ≈ 8.8e10
        assert_relative_eq!(r.prefactor, 8.794e10, max_relative = 0.05);
    }

    #[test]
    fn secular_tau1_phase_is_closed_form() {
        let closed = close_run(&RunSpec::reference(1e-17, 40.0, EPS)).unwrap();
        let r = phase_report(&closed.trajectory).unwrap();
        let secular = secular_tau1_phase(&closed.trajectory).unwrap();
        assert_relative_eq!(secular, r.dtheta_tau1_closed_form, max_relative = 1e-9);
        // B0 = 1e-2 T, τ1 = 0.534 s
        assert_relative_eq!(r.dtheta_tau1_closed_form, 9.39e8, max_relative = 1e-3);
    }

    #[test]
    fn budget_values() {
        let c = PhysicalConstants::<f64>::codata();
        let (dt, db) = stability_budget(1e-2, 1.48, 1.0, &c);
        assert_relative_eq!(dt, 1.137e-9, max_relative = 1e-3);
        assert_relative_eq!(db, 7.68e-12, max_relative = 1e-3);
        let (dt2, db2) = stability_budget(1e-2, 1.48, 2.0, &c);
        assert_relative_eq!(dt2, 2.0 * dt, max_relative = 1e-15);
        assert_relative_eq!(db2, 2.0 * db, max_relative = 1e-15);
    }

    #[test]
    fn approx_is_linear_in_b0() {
        let c = PhysicalConstants::<f64>::codata();
        let st = StageTimes { tau1: 0.534, tau2: 0.539, tau3: 0.578, tau4: 0.583, tau5: 0.902, tau6: 1.483 };
        assert_eq!(phase_difference_approx(&st, 0.0, &c), 0.0);
        assert_relative_eq!(
            phase_difference_approx(&st, 2e-2, &c),
            2.0 * phase_difference_approx(&st, 1e-2, &c),
            max_relative = 1e-15
        );
    }
}
