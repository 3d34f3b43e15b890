//! Pieces of one arm's path: analytic harmonic arcs, force-free drift and
//! numerically integrated switching windows.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::integrator::{hermite, Node};
use crate::scalar::{sign_or_one, Real};

use super::ArmLabel;

/// x(t) = A·cos(ωt + φ) + C on [t_start, t_end].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSolution<T> {
    pub amplitude: T,
    pub phi: T,
    pub center: T,
    pub omega: T,
    pub t_start: T,
    pub t_end: T,
    pub arm: ArmLabel,
    /// ω·t_start + φ, kept separately so evaluation near t_start does not lose
    /// digits to a large ω·t.
    start_phase: T,
}

/// Builds the harmonic arc through (x0, v0) at t0 around centre `center`.
///
/// The amplitude carries the sign of x0 − C, so the phase stays in
/// (−π/2, π/2]; x0 = C is handled by the two-argument angle.
pub fn harmonic_segment<T: Real>(x0: T, v0: T, t0: T, center: T, omega: T, arm: ArmLabel) -> SegmentSolution<T> {
    let offset = x0 - center;
    let scaled_v = v0 / omega;
    let radius = offset.hypot(scaled_v);
    let sign = sign_or_one(offset);
    let start_phase = (-sign * scaled_v).atan2(offset.abs());
    SegmentSolution {
        amplitude: sign * radius,
        phi: start_phase - omega * t0,
        center,
        omega,
        t_start: t0,
        t_end: T::infinity(),
        arm,
        start_phase,
    }
}

impl<T: Real> SegmentSolution<T> {
    #[inline]
    pub fn phase_at(&self, t: T) -> T {
        self.omega * (t - self.t_start) + self.start_phase
    }

    pub fn position(&self, t: T) -> T {
        self.amplitude * self.phase_at(t).cos() + self.center
    }

    pub fn velocity(&self, t: T) -> T {
        -self.amplitude * self.omega * self.phase_at(t).sin()
    }

    pub fn state(&self, t: T) -> (T, T) {
        let (s, c) = self.phase_at(t).sin_cos();
        (self.amplitude * c + self.center, -self.amplitude * self.omega * s)
    }

    pub fn ending_at(mut self, t_end: T) -> Self {
        self.t_end = t_end;
        self
    }

    pub fn contains(&self, t_a: T, t_b: T) -> bool {
        let slack = T::tol_floor() * (self.t_start.abs() + self.t_end.abs().min(t_b.abs()) + T::one());
        t_a >= self.t_start - slack && t_b <= self.t_end + slack && t_a <= t_b
    }
}

/// Closed-form kinetic action (m/2ħ)∫v² dt of a harmonic arc over [t_a, t_b].
pub fn segment_kinetic_action<T: Real>(seg: &SegmentSolution<T>, t_a: T, t_b: T, mass: T, hbar: T) -> Result<T> {
    if !seg.contains(t_a, t_b) {
        return Err(SimError::OutsideSegment {
            from: t_a.as_f64(),
            to: t_b.as_f64(),
            start: seg.t_start.as_f64(),
            end: seg.t_end.as_f64(),
        });
    }
    Ok(harmonic_action(seg, t_a, t_b, mass, hbar))
}

fn harmonic_action<T: Real>(seg: &SegmentSolution<T>, t_a: T, t_b: T, mass: T, hbar: T) -> T {
    let w = seg.omega;
    let amp = seg.amplitude;
    let prefactor = mass * w * w * amp * amp / (T::lit(4.0) * hbar);
    let pa = seg.phase_at(t_a);
    let pb = seg.phase_at(t_b);
    // sin 2b − sin 2a = 2 cos(a + b) sin(b − a)
    let sine_diff = T::two() * (pa + pb).cos() * (w * (t_b - t_a)).sin();
    prefactor * ((t_b - t_a) - sine_diff / (T::two() * w))
}

/// Force-free motion x(t) = x0 + v0·(t − t_start).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriftSegment<T> {
    pub x0: T,
    pub v0: T,
    pub t_start: T,
    pub t_end: T,
}

impl<T: Real> DriftSegment<T> {
    pub fn state(&self, t: T) -> (T, T) {
        (self.x0 + self.v0 * (t - self.t_start), self.v0)
    }
}

/// Integrated path through a switching window. Node state is (x, v, θ) with
/// θ the kinetic action accumulated since the window opened.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericArc<T> {
    pub nodes: Vec<Node<T, 3>>,
}

impl<T: Real> NumericArc<T> {
    pub fn t_start(&self) -> T {
        self.nodes[0].t
    }

    pub fn t_end(&self) -> T {
        self.nodes[self.nodes.len() - 1].t
    }

    fn interpolate(&self, t: T) -> [T; 3] {
        let n = &self.nodes;
        if t <= n[0].t {
            return n[0].y;
        }
        if t >= n[n.len() - 1].t {
            return n[n.len() - 1].y;
        }
        let idx = n.partition_point(|node| node.t <= t);
        let a = &n[idx - 1];
        if a.t == t {
            return a.y;
        }
        hermite(a, &n[idx], t)
    }

    pub fn state(&self, t: T) -> (T, T) {
        let y = self.interpolate(t);
        (y[0], y[1])
    }

    pub fn action(&self, t_a: T, t_b: T) -> T {
        self.interpolate(t_b)[2] - self.interpolate(t_a)[2]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Arc<T> {
    Harmonic(SegmentSolution<T>),
    Drift(DriftSegment<T>),
    Numeric(NumericArc<T>),
}

impl<T: Real> Arc<T> {
    pub fn t_start(&self) -> T {
        match self {
            Arc::Harmonic(s) => s.t_start,
            Arc::Drift(d) => d.t_start,
            Arc::Numeric(n) => n.t_start(),
        }
    }

    pub fn t_end(&self) -> T {
        match self {
            Arc::Harmonic(s) => s.t_end,
            Arc::Drift(d) => d.t_end,
            Arc::Numeric(n) => n.t_end(),
        }
    }

    pub fn state(&self, t: T) -> (T, T) {
        match self {
            Arc::Harmonic(s) => s.state(t),
            Arc::Drift(d) => d.state(t),
            Arc::Numeric(n) => n.state(t),
        }
    }

    /// Kinetic action over [t_a, t_b] ⊆ the arc.
    pub fn action(&self, t_a: T, t_b: T, mass: T, hbar: T) -> T {
        match self {
            Arc::Harmonic(s) => harmonic_action(s, t_a, t_b, mass, hbar),
            Arc::Drift(d) => mass * d.v0 * d.v0 / (T::two() * hbar) * (t_b - t_a),
            Arc::Numeric(n) => n.action(t_a, t_b),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const OMEGA: f64 = 2.809_641_5;

    #[test]
    fn rest_at_origin_matches_closed_form() {
        let c = 2.594e-4;
        let seg = harmonic_segment(0.0, 0.0, 0.0, c, OMEGA, ArmLabel::Plus);
        assert_relative_eq!(seg.amplitude, -c);
        assert_eq!(seg.phi, 0.0);
        for t in [0.0, 0.1, 0.37, 1.2] {
            assert_relative_eq!(seg.position(t), -c * (OMEGA * t).cos() + c, max_relative = 1e-14, epsilon = 1e-20);
        }
    }

    #[test]
    fn equilibrium_is_stationary() {
        let seg = harmonic_segment(2.5e-4, 0.0, 0.3, 2.5e-4, OMEGA, ArmLabel::Minus);
        assert_eq!(seg.amplitude, 0.0);
        assert_eq!(seg.position(5.0), 2.5e-4);
        assert_eq!(seg.velocity(5.0), 0.0);
    }

    #[test]
    fn start_on_center_with_velocity() {
        let seg = harmonic_segment(2.5e-4, 7e-4, 0.3, 2.5e-4, OMEGA, ArmLabel::Minus);
        let (x, v) = seg.state(0.3);
        assert_relative_eq!(x, 2.5e-4, max_relative = 1e-15);
        assert_relative_eq!(v, 7e-4, max_relative = 1e-15);
    }

    #[test]
    fn action_over_full_period() {
        let (m, hbar) = (1e-17, 1.054_571_817e-34);
        let seg = harmonic_segment(1e-4, 3e-4, 0.2, 2.5e-4, OMEGA, ArmLabel::Plus);
        let period = std::f64::consts::TAU / OMEGA;
        let got = segment_kinetic_action(&seg, 0.7, 0.7 + period, m, hbar).unwrap();
        let expected = m * OMEGA * OMEGA * seg.amplitude.powi(2) / (4.0 * hbar) * period;
        assert_relative_eq!(got, expected, max_relative = 1e-12);
        let still = harmonic_segment(2.5e-4, 0.0, 0.0, 2.5e-4, OMEGA, ArmLabel::Plus);
        assert_eq!(segment_kinetic_action(&still, 0.0, 1.0, m, hbar).unwrap(), 0.0);
    }

    #[test]
    fn action_rejects_interval_outside_segment() {
        let seg = harmonic_segment(0.0, 0.0, 1.0, 2.5e-4, OMEGA, ArmLabel::Plus).ending_at(2.0);
        assert!(segment_kinetic_action(&seg, 0.5, 1.5, 1e-17, 1e-34).is_err());
        assert!(segment_kinetic_action(&seg, 1.5, 2.5, 1e-17, 1e-34).is_err());
    }

    /// Composite Simpson quadrature of p²/(2mħ) from sampled velocities.
    fn simpson_action(seg: &SegmentSolution<f64>, a: f64, b: f64, m: f64, hbar: f64) -> f64 {
        let n = 20_000;
        let h = (b - a) / n as f64;
        let f = |t: f64| m * seg.velocity(t).powi(2) / (2.0 * hbar);
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    proptest! {
        #[test]
        fn inversion_identity(x0 in -5e-4f64..5e-4, v0 in -2e-3f64..2e-3, t0 in 0.0f64..10.0, c in 1e-4f64..4e-4) {
            let seg = harmonic_segment(x0, v0, t0, c, OMEGA, ArmLabel::Plus);
            let (x, v) = seg.state(t0);
            let xs = x0.abs().max(c);
            let vs = v0.abs().max(OMEGA * xs);
            prop_assert!((x - x0).abs() <= 1e-12 * xs);
            prop_assert!((v - v0).abs() <= 1e-12 * vs);
            // the φ form and the start-phase form agree
            let direct = seg.amplitude * (OMEGA * (t0 + 0.3) + seg.phi).cos() + seg.center;
            prop_assert!((direct - seg.position(t0 + 0.3)).abs() <= 1e-11 * xs);
        }

        #[test]
        fn action_matches_quadrature(x0 in 0.0f64..5e-4, v0 in -1e-3f64..1e-3, span in 0.05f64..3.0) {
            let (m, hbar) = (1e-17, 1.054_571_817e-34);
            let seg = harmonic_segment(x0, v0, 0.4, 2.5e-4, OMEGA, ArmLabel::Minus);
            let exact = segment_kinetic_action(&seg, 0.5, 0.5 + span, m, hbar).unwrap();
            let numeric = simpson_action(&seg, 0.5, 0.5 + span, m, hbar);
            prop_assume!(numeric > 1e-6 * m * (OMEGA * 5e-4).powi(2) / hbar);
            prop_assert!(((exact - numeric) / numeric).abs() < 1e-8);
        }
    }
}
