//! Stage machine: analytic arcs where the field is static, adaptive
//! integration across the switching windows, and event detection.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::field::FieldSchedule;
use crate::integrator::{DormandPrince, IntegrationError, Tolerances};
use crate::model::{derive_alpha, derive_omega, RunSpec, StageTimes};
use crate::roots::{brent, first_sign_change};
use crate::scalar::Real;

use super::forces::{acceleration, stage_center, StaticStage};
use super::segment::{harmonic_segment, Arc, DriftSegment, NumericArc, SegmentSolution};
use super::trajectory::{Sample, Stage, StagedArc, Trajectory};
use super::{apply_spin_flip, ArmLabel, ArmState};

/// Times of the two field-switching triggers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventTimes<T> {
    /// Plus arm reaches (B0 − B1)/η on its initial arc.
    pub removal: T,
    /// Minus arm reaches (B0 + B1)/η while drifting.
    pub restore: T,
}

/// Optional overrides of the detected events, for runs on a fixed schedule.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EventPlan<T> {
    pub removal: Option<T>,
    pub restore: Option<T>,
}

/// Smallest t > t_start at which the arc reaches `target`.
pub fn detect_removal_event<T: Real>(seg: &SegmentSolution<T>, target: T) -> Result<T> {
    let reach_lo = seg.center - seg.amplitude.abs();
    let reach_hi = seg.center + seg.amplitude.abs();
    if target < reach_lo || target > reach_hi {
        return Err(SimError::NoEvent {
            event: "tau1",
            reason: format!(
                "target x = {:e} m outside the reachable range [{:e}, {:e}] m",
                target.as_f64(),
                reach_lo.as_f64(),
                reach_hi.as_f64()
            ),
        });
    }
    let period = T::TAU() / seg.omega;
    let start = seg.t_start;
    let gap = |t: T| seg.position(t) - target;
    // Skip an exact hit at the start so the event lies strictly after it.
    let from = start + period * T::lit(1e-12);
    let (a, b) = first_sign_change(gap, from, from + period, period / T::lit(256.0)).ok_or_else(|| SimError::NoEvent {
        event: "tau1",
        reason: "no crossing within one trap period".into(),
    })?;
    if a == b {
        return Ok(a);
    }
    brent(gap, a, b, T::lit(1e-12) * b.abs().max(T::epsilon()), 200).map_err(|e| SimError::NoEvent {
        event: "tau1",
        reason: e.to_string(),
    })
}

/// Time at which a drifting arm reaches `target`.
pub fn detect_restore_event<T: Real>(state: &ArmState<T>, target: T) -> Result<T> {
    if !(state.v > T::zero()) {
        return Err(SimError::NoEvent {
            event: "tau3",
            reason: format!("minus arm velocity {:e} m/s is not positive", state.v.as_f64()),
        });
    }
    Ok(state.t + (target - state.x) / state.v)
}

fn integration_error(err: IntegrationError) -> SimError {
    match err {
        IntegrationError::StepUnderflow { t, h } => SimError::StepUnderflow { t, h },
        IntegrationError::TooManySteps(_) | IntegrationError::NonFinite(_) => SimError::StepUnderflow {
            t: f64::NAN,
            h: f64::NAN,
        },
    }
}

/// Integrates both arms from their current time to `t_to` through the
/// blended field. Integration nodes land exactly on every time in `outputs`.
pub fn integrate_window<T: Real>(
    arms: [ArmState<T>; 2],
    schedule: &FieldSchedule<T>,
    run: &RunSpec<T>,
    t_to: T,
    outputs: &[T],
) -> Result<([ArmState<T>; 2], [NumericArc<T>; 2])> {
    let constants = run.constants;
    let particle = run.particle;
    let rtol = run.numerics.integrator_rel_tol;
    let length = run.field.b0 / run.field.eta;
    let omega = run.omega()?;
    let tiny = T::lit(1e-3) * rtol;
    let tol = Tolerances {
        rtol,
        atol: [tiny * length, tiny * omega * length, T::infinity()],
    };
    let solver = DormandPrince::new(tol);
    let action_rate = particle.mass / (T::two() * constants.hbar);

    let mut out_states = arms;
    let mut arcs = Vec::with_capacity(2);
    for (slot, arm) in arms.iter().enumerate() {
        let spin = arm.spin_sign;
        let rhs = |t: T, y: &[T; 3]| {
            [
                y[1],
                acceleration(y[0], t, spin, schedule, &particle, &constants),
                action_rate * y[1] * y[1],
            ]
        };
        let sol = solver
            .integrate(rhs, arm.t, [arm.x, arm.v, T::zero()], t_to, outputs)
            .map_err(integration_error)?;
        let last = sol.last();
        out_states[slot] = ArmState {
            x: last.y[0],
            v: last.y[1],
            t: t_to,
            ..*arm
        };
        arcs.push(NumericArc { nodes: sol.nodes });
    }
    let minus = arcs.pop().expect("two arms");
    let plus = arcs.pop().expect("two arms");
    Ok((out_states, [plus, minus]))
}

/// Smallest t > τ5 with Δv(t) = 0 on the two post-flip arcs, and whether
/// the arms are identical (Δv ≡ 0), in which case τ5 itself is returned.
pub fn tau6_given_tau5<T: Real>(plus: &SegmentSolution<T>, minus: &SegmentSolution<T>, tau5: T) -> Result<(T, bool)> {
    let omega = plus.omega;
    let period = T::TAU() / omega;
    let dv = |t: T| plus.velocity(t) - minus.velocity(t);
    let scale = (plus.amplitude.abs() + minus.amplitude.abs()) * omega;
    let probes = 64;
    let mut max_dv = T::zero();
    for k in 0..probes {
        let t = tau5 + period * T::lit(k as f64 / probes as f64);
        max_dv = max_dv.max(dv(t).abs());
    }
    if max_dv <= T::epsilon() * T::lit(16.0) * scale || scale == T::zero() {
        return Ok((tau5, true));
    }
    let from = tau5 + period * T::lit(1e-9);
    let (a, b) = first_sign_change(dv, from, tau5 + period, period / T::lit(512.0))
        .ok_or_else(|| SimError::NoClosure("no zero of the velocity difference within one period after tau5".into()))?;
    if a == b {
        return Ok((a, false));
    }
    let root = brent(dv, a, b, T::tol_floor() * b.abs(), 200)
        .map_err(|e| SimError::NoClosure(format!("tau6 root: {e}")))?;
    Ok((root, false))
}

/// Post-flip arcs for one trial τ5.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Closing<T> {
    pub tau5: T,
    pub tau6: T,
    pub plus: SegmentSolution<T>,
    pub minus: SegmentSolution<T>,
    pub degenerate: bool,
}

impl<T: Real> Closing<T> {
    /// (Δx, Δv) at τ6.
    pub fn residuals(&self) -> (T, T) {
        let (xp, vp) = self.plus.state(self.tau6);
        let (xm, vm) = self.minus.state(self.tau6);
        (xp - xm, vp - vm)
    }
}

/// Everything up to the start of the reversed-gradient stage. The part of the
/// run that does not depend on τ5 is computed once here, so closure searches
/// only re-evaluate the final analytic arcs.
#[derive(Debug, Clone)]
pub struct Prelude<T> {
    pub run: RunSpec<T>,
    pub schedule: FieldSchedule<T>,
    pub omega: T,
    pub alpha: T,
    pub events: EventTimes<T>,
    /// τ1..τ4.
    pub tau: [T; 4],
    pub sample_dt: T,
    arcs: [Vec<StagedArc<T>>; 2],
    /// Reversed-gradient arcs starting at τ4, open-ended.
    separate: [SegmentSolution<T>; 2],
    spins: [T; 2],
}

fn grid_times<T: Real>(from: T, to: T, dt: T) -> Vec<T> {
    let first = (from / dt).ceil().to_usize().unwrap_or(0);
    let mut out = Vec::new();
    let mut k = first;
    loop {
        let t = T::from_usize(k).expect("grid index") * dt;
        if t > to {
            break;
        }
        if t >= from {
            out.push(t);
        }
        k += 1;
    }
    out
}

impl<T: Real> Prelude<T> {
    pub fn build(run: &RunSpec<T>) -> Result<Self> {
        Self::build_with(run, EventPlan::default())
    }

    pub fn build_with(run: &RunSpec<T>, plan: EventPlan<T>) -> Result<Self> {
        let c = run.constants;
        let p = run.particle;
        let f = run.field;
        let omega = derive_omega(&c, &p, &f)?;
        if !(omega > T::zero()) {
            return Err(SimError::DivisionByZero { what: "trap frequency" });
        }
        let alpha = derive_alpha(&c, &p, &f, T::one())?;
        let b1 = run.b1();
        let window = run.switch_window();
        let sample_dt = run.sample_dt()?;
        let n = run.numerics;

        // Stage 1: both arms released from (x0, v0) at t = 0.
        let mut states = ArmLabel::BOTH.map(|label| ArmState::initial(label, n.x0, n.v0));
        let mut initial = [None, None];
        for (slot, st) in states.iter().enumerate() {
            let center = stage_center(StaticStage::Initial, st.spin_sign, &p, &c, f.b0, f.eta)?;
            initial[slot] = Some(harmonic_segment(st.x, st.v, T::zero(), center, omega, st.label));
        }
        let initial = initial.map(|s| s.expect("both arms"));

        let removal_event = match plan.removal {
            Some(t) => t,
            None => detect_removal_event(&initial[0], (f.b0 - b1) / f.eta)?,
        };
        let tau1 = removal_event - n.removal_alignment.lead_fraction::<T>() * window;
        if !(tau1 > T::zero()) {
            return Err(SimError::NoEvent {
                event: "tau1",
                reason: format!(
                    "gradient removal would start at {:e} s, before release",
                    tau1.as_f64()
                ),
            });
        }
        let tau2 = tau1 + window;
        let schedule = FieldSchedule::for_run(run).with_removal(tau1 + window * T::half());

        let mut arcs: [Vec<StagedArc<T>>; 2] = [Vec::new(), Vec::new()];
        for (slot, seg) in initial.iter().enumerate() {
            let (x, v) = seg.state(tau1);
            states[slot] = ArmState { x, v, t: tau1, ..states[slot] };
            arcs[slot].push(StagedArc {
                stage: Stage::Accelerate,
                spin_sign: states[slot].spin_sign,
                arc: Arc::Harmonic(seg.ending_at(tau1)),
            });
        }

        // Stage 2: gradient removal.
        let outputs = grid_times(tau1, tau2, sample_dt);
        let (after_removal, removal_arcs) = integrate_window(states, &schedule, run, tau2, &outputs)?;
        states = after_removal;
        for (slot, arc) in removal_arcs.into_iter().enumerate() {
            arcs[slot].push(StagedArc {
                stage: Stage::Removal,
                spin_sign: states[slot].spin_sign,
                arc: Arc::Numeric(arc),
            });
        }

        // Stage 3: force-free drift until the minus arm reaches the far side.
        let restore_event = match plan.restore {
            Some(t) => t,
            None => detect_restore_event(&states[1], (f.b0 + b1) / f.eta)?,
        };
        let tau3 = restore_event - n.restore_alignment.lead_fraction::<T>() * window;
        if tau3 < tau2 {
            return Err(SimError::WindowOverlap {
                removal_end: tau2.as_f64(),
                restore_start: tau3.as_f64(),
            });
        }
        let tau4 = tau3 + window;
        let schedule = schedule.with_restore(tau3 + window * T::half());
        for (slot, st) in states.iter_mut().enumerate() {
            arcs[slot].push(StagedArc {
                stage: Stage::Drift,
                spin_sign: st.spin_sign,
                arc: Arc::Drift(DriftSegment {
                    x0: st.x,
                    v0: st.v,
                    t_start: tau2,
                    t_end: tau3,
                }),
            });
            st.x = st.x + st.v * (tau3 - tau2);
            st.t = tau3;
        }

        // Stage 4: gradient restore, reversed sign.
        let outputs = grid_times(tau3, tau4, sample_dt);
        let (after_restore, restore_arcs) = integrate_window(states, &schedule, run, tau4, &outputs)?;
        states = after_restore;
        for (slot, arc) in restore_arcs.into_iter().enumerate() {
            arcs[slot].push(StagedArc {
                stage: Stage::Restore,
                spin_sign: states[slot].spin_sign,
                arc: Arc::Numeric(arc),
            });
        }

        // Stage 5: reversed gradient, open-ended until the flip.
        let mut separate = [None, None];
        for (slot, st) in states.iter().enumerate() {
            let center = stage_center(StaticStage::Final, st.spin_sign, &p, &c, f.b0, f.eta)?;
            separate[slot] = Some(harmonic_segment(st.x, st.v, tau4, center, omega, st.label));
        }

        Ok(Self {
            run: *run,
            schedule,
            omega,
            alpha,
            events: EventTimes {
                removal: removal_event,
                restore: restore_event,
            },
            tau: [tau1, tau2, tau3, tau4],
            sample_dt,
            arcs,
            separate: separate.map(|s| s.expect("both arms")),
            spins: states.map(|s| s.spin_sign),
        })
    }

    pub fn tau4(&self) -> T {
        self.tau[3]
    }

    pub fn period(&self) -> T {
        T::TAU() / self.omega
    }

    /// Pre-flip reversed-gradient arcs (open-ended).
    pub fn separating_arcs(&self) -> &[SegmentSolution<T>; 2] {
        &self.separate
    }

    /// Flips both spins at τ5 and finds τ6.
    pub fn close(&self, tau5: T) -> Result<Closing<T>> {
        if !(tau5 > self.tau4()) {
            return Err(SimError::NoClosure(format!(
                "tau5 = {:e} s must follow tau4 = {:e} s",
                tau5.as_f64(),
                self.tau4().as_f64()
            )));
        }
        let c = &self.run.constants;
        let p = &self.run.particle;
        let f = &self.run.field;
        let before = [0, 1].map(|slot| {
            let (x, v) = self.separate[slot].state(tau5);
            ArmState {
                label: ArmLabel::BOTH[slot],
                spin_sign: self.spins[slot],
                x,
                v,
                t: tau5,
            }
        });
        let after = apply_spin_flip(before);
        let mut post = [None, None];
        for (slot, st) in after.iter().enumerate() {
            let center = stage_center(StaticStage::Final, st.spin_sign, p, c, f.b0, f.eta)?;
            post[slot] = Some(harmonic_segment(st.x, st.v, tau5, center, self.omega, st.label));
        }
        let [plus, minus] = post.map(|s| s.expect("both arms"));
        let (tau6, degenerate) = tau6_given_tau5(&plus, &minus, tau5)?;
        Ok(Closing {
            tau5,
            tau6,
            plus: plus.ending_at(tau6),
            minus: minus.ending_at(tau6),
            degenerate,
        })
    }

    /// Full dense trajectory for a given τ5, with the field-floor check applied
    /// to every sample and integration node.
    pub fn trajectory(&self, tau5: T) -> Result<Trajectory<T>> {
        let closing = self.close(tau5)?;
        self.assemble(&closing)
    }

    pub fn assemble(&self, closing: &Closing<T>) -> Result<Trajectory<T>> {
        let [tau1, tau2, tau3, tau4] = self.tau;
        let (tau5, tau6) = (closing.tau5, closing.tau6);
        let mut arcs = self.arcs.clone();
        for slot in 0..2 {
            arcs[slot].push(StagedArc {
                stage: Stage::Separate,
                spin_sign: self.spins[slot],
                arc: Arc::Harmonic(self.separate[slot].ending_at(tau5)),
            });
            let post = if slot == 0 { closing.plus } else { closing.minus };
            arcs[slot].push(StagedArc {
                stage: Stage::Recombine,
                spin_sign: -self.spins[slot],
                arc: Arc::Harmonic(post),
            });
        }
        let [plus_arcs, minus_arcs] = arcs;

        let mut times = grid_times(T::zero(), tau6, self.sample_dt);
        if times.last().map_or(true, |&t| t < tau6) {
            times.push(tau6);
        }

        let mut traj = Trajectory {
            run: self.run,
            schedule: self.schedule,
            stage_times: StageTimes {
                tau1,
                tau2,
                tau3,
                tau4,
                tau5,
                tau6,
            },
            events: self.events,
            omega: self.omega,
            alpha: self.alpha,
            times: Vec::new(),
            plus: Vec::new(),
            minus: Vec::new(),
            dx: Vec::new(),
            dv: Vec::new(),
            plus_arcs,
            minus_arcs,
            degenerate: closing.degenerate,
        };
        let mut plus = Vec::with_capacity(times.len());
        let mut minus = Vec::with_capacity(times.len());
        for &t in &times {
            let (xp, vp) = traj.state_at(ArmLabel::Plus, t);
            let (xm, vm) = traj.state_at(ArmLabel::Minus, t);
            plus.push(Sample { x: xp, v: vp });
            minus.push(Sample { x: xm, v: vm });
        }
        traj.dx = plus.iter().zip(&minus).map(|(a, b)| a.x - b.x).collect();
        traj.dv = plus.iter().zip(&minus).map(|(a, b)| a.v - b.v).collect();
        traj.times = times;
        traj.plus = plus;
        traj.minus = minus;

        self.check_field_floor(&traj)?;
        Ok(traj)
    }

    fn check_field_floor(&self, traj: &Trajectory<T>) -> Result<()> {
        let eps = self.run.epsilon();
        let check = |arm: ArmLabel, t: T, x: T| -> Result<()> {
            let bx = self.schedule.field_at(x, T::zero(), t).0;
            if bx.abs() < eps {
                return Err(SimError::ForbiddenRegion {
                    arm: arm.name(),
                    t: t.as_f64(),
                    x: x.as_f64(),
                    field: bx.abs().as_f64(),
                });
            }
            Ok(())
        };
        for arm in ArmLabel::BOTH {
            for (t, s) in traj.times.iter().zip(traj.samples(arm)) {
                check(arm, *t, s.x)?;
            }
            for staged in traj.arcs(arm) {
                if let Arc::Numeric(n) = &staged.arc {
                    for node in &n.nodes {
                        check(arm, node.t, node.y[0])?;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Propagates both arms through all seven stages for the given flip time.
pub fn simulate<T: Real>(run: &RunSpec<T>, tau5: T) -> Result<Trajectory<T>> {
    Prelude::build(run)?.trajectory(tau5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::FieldSchedule;
    use crate::model::RunSpec;
    use approx::assert_relative_eq;

    const EPS: f64 = 2.09e-6;

    fn run(eta: f64) -> RunSpec<f64> {
        RunSpec::reference(1e-17, eta, EPS)
    }

    #[test]
    fn removal_event_from_rest() {
        let r = run(40.0);
        let omega = r.omega().unwrap();
        let c = 2.5e-4 + derive_alpha(&r.constants, &r.particle, &r.field, 1.0).unwrap();
        let seg = harmonic_segment(0.0, 0.0, 0.0, c, omega, ArmLabel::Plus);
        let target = (1e-2 - r.b1()) / 40.0;
        let t = detect_removal_event(&seg, target).unwrap();
        // closed form: C(1 − cos ωt) = target
        let expected = (1.0 - target / c).acos() / omega;
        assert_relative_eq!(t, expected, max_relative = 1e-11);
    }

    #[test]
    fn removal_event_unreachable() {
        let seg = harmonic_segment(0.0, 0.0, 0.0, 2.594e-4, 2.8, ArmLabel::Plus);
        // B1 >= 2 B0 puts the target at negative x
        let target = (1e-2 - 2.1e-2) / 40.0;
        assert!(matches!(detect_removal_event(&seg, target), Err(SimError::NoEvent { .. })));
    }

    #[test]
    fn restore_event_is_linear_and_rejects_stalled_arm() {
        let st = ArmState { label: ArmLabel::Minus, spin_sign: 1.0, x: 2.4e-4, v: 7e-4, t: 0.54 };
        let t = detect_restore_event(&st, 2.6e-4).unwrap();
        assert_relative_eq!(t, 0.54 + 2e-5 / 7e-4, max_relative = 1e-14);
        let stalled = ArmState { v: 0.0, ..st };
        assert!(detect_restore_event(&stalled, 2.6e-4).is_err());
    }

    #[test]
    fn window_inside_static_stage_matches_analytic() {
        let r = run(40.0);
        let omega = r.omega().unwrap();
        let schedule = FieldSchedule::for_run(&r);
        let c = &r.constants;
        let p = &r.particle;
        let mut arms = ArmLabel::BOTH.map(|l| ArmState::initial(l, 0.0, 0.0));
        let mut segs = Vec::new();
        for st in arms.iter_mut() {
            let center = stage_center(StaticStage::Initial, st.spin_sign, p, c, 1e-2, 40.0).unwrap();
            let seg = harmonic_segment(0.0, 0.0, 0.0, center, omega, st.label);
            let (x, v) = seg.state(0.2);
            *st = ArmState { x, v, t: 0.2, ..*st };
            segs.push(seg);
        }
        let (out, arcs) = integrate_window(arms, &schedule, &r, 0.45, &[0.3]).unwrap();
        for (slot, seg) in segs.iter().enumerate() {
            let (x, v) = seg.state(0.45);
            assert_relative_eq!(out[slot].x, x, max_relative = 1e-8);
            assert_relative_eq!(out[slot].v, v, max_relative = 1e-8);
            let mid = arcs[slot].state(0.3);
            assert_relative_eq!(mid.0, seg.position(0.3), max_relative = 1e-8);
            // integrated action matches the closed form
            let exact = super::super::segment_kinetic_action(seg, 0.2, 0.45, p.mass, c.hbar).unwrap();
            assert_relative_eq!(arcs[slot].action(0.2, 0.45), exact, max_relative = 1e-8);
        }
    }

    #[test]
    fn window_in_uniform_field_is_free_drift() {
        let r = run(40.0);
        let schedule = FieldSchedule::for_run(&r).with_removal(0.1);
        let arms = [
            ArmState { label: ArmLabel::Plus, spin_sign: -1.0, x: 2.4e-4, v: 7.3e-4, t: 0.2 },
            ArmState { label: ArmLabel::Minus, spin_sign: 1.0, x: 2.2e-4, v: 6.1e-4, t: 0.2 },
        ];
        let (out, _) = integrate_window(arms, &schedule, &r, 0.25, &[]).unwrap();
        for (a, b) in arms.iter().zip(out.iter()) {
            assert_relative_eq!(b.x, a.x + a.v * 0.05, max_relative = 1e-13);
            assert_eq!(b.v, a.v);
        }
    }

    #[test]
    fn tau6_matches_closed_form_minimum() {
        let omega: f64 = 2.8;
        let plus = harmonic_segment(3.1e-4, -2e-4, 0.9, 2.6e-4, omega, ArmLabel::Plus);
        let minus = harmonic_segment(2.9e-4, 1e-4, 0.9, 2.4e-4, omega, ArmLabel::Minus);
        let (t6, degenerate) = tau6_given_tau5(&plus, &minus, 0.9).unwrap();
        assert!(!degenerate);
        // Δx(t) = D + a cos(ωs) + b sin(ωs); Δv = 0 at tan(ωs) = b/a.
        let d: f64 = 2e-4 * 0.1;
        let a = (3.1e-4 - 2.9e-4) - d;
        let b = (-2e-4 - 1e-4) / omega;
        let mut s = (b / a).atan() / omega;
        while s <= 0.0 {
            s += std::f64::consts::PI / omega;
        }
        assert_relative_eq!(t6, 0.9 + s, max_relative = 1e-12);
    }

    #[test]
    fn tau6_degenerate_when_arms_coincide() {
        let seg = harmonic_segment(3e-4, -2e-4, 0.9, 2.5e-4, 2.8, ArmLabel::Plus);
        let (t6, degenerate) = tau6_given_tau5(&seg, &seg, 0.9).unwrap();
        assert!(degenerate);
        assert_eq!(t6, 0.9);
    }

    #[test]
    fn grid_is_uniform_and_bounded() {
        let g = grid_times(0.1, 0.2, 0.03);
        assert_eq!(g.len(), 3);
        assert_relative_eq!(g[0], 0.12, max_relative = 1e-12);
        assert!(g.iter().all(|&t| (0.1..=0.2).contains(&t)));
    }

    #[test]
    fn flip_before_tau4_is_rejected() {
        let prelude = Prelude::build(&run(40.0)).unwrap();
        assert!(prelude.close(prelude.tau4() * 0.99).is_err());
    }

    #[test]
    fn window_overlap_is_reported() {
        let mut r = run(40.0);
        r.numerics.switch_window_over_delta = 60.0;
        r.numerics.restore_alignment = crate::model::SwitchAlignment::End;
        assert!(matches!(Prelude::build(&r), Err(SimError::WindowOverlap { .. })));
    }
}
