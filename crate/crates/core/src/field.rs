//! Time-dependent magnetic field in the x–y plane.
//!
//! Three linear profiles are used in sequence: a gradient with its zero on the
//! positive x axis, a uniform bridge field, and the negated gradient. The
//! schedule blends them with tanh ramps that are rescaled to reach exactly
//! 0 and 1 at the window edges, so outside a switching window the field is
//! exactly one profile.

use serde::{Deserialize, Serialize};

use crate::model::{PhysicalConstants, RunSpec};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    /// (B0 − η·x, η·y)
    GradientPositive,
    /// (B1, 0)
    Uniform,
    /// (−(B0 − η·x), −η·y)
    GradientNegative,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldProfile<T> {
    pub kind: ProfileKind,
    pub b0: T,
    pub b1: T,
    pub eta: T,
}

impl<T: Real> FieldProfile<T> {
    pub fn eval(&self, x: T, y: T) -> (T, T) {
        match self.kind {
            ProfileKind::GradientPositive => (self.b0 - self.eta * x, self.eta * y),
            ProfileKind::Uniform => (self.b1, T::zero()),
            ProfileKind::GradientNegative => (-(self.b0 - self.eta * x), -self.eta * y),
        }
    }

    /// ∂Bx/∂x
    pub fn gradient(&self) -> T {
        match self.kind {
            ProfileKind::GradientPositive => -self.eta,
            ProfileKind::Uniform => T::zero(),
            ProfileKind::GradientNegative => self.eta,
        }
    }
}

/// The paper-form switching function
/// Sw = ¼·(tanh[δ(t − t_on)] + 1)·(tanh[δ(t_off − t)] + 1).
pub fn switching_weight<T: Real>(t: T, t_on: T, t_off: T, delta: T) -> T {
    let quarter = T::lit(0.25);
    quarter * ((delta * (t - t_on)).tanh() + T::one()) * ((delta * (t_off - t)).tanh() + T::one())
}

/// Weight falling from 1 to 0 across [mid − half, mid + half], with its time
/// derivative.
fn ramp_down<T: Real>(t: T, mid: T, half: T, delta: T) -> (T, T) {
    let s = t - mid;
    if s <= -half {
        return (T::one(), T::zero());
    }
    if s >= half {
        return (T::zero(), T::zero());
    }
    let norm = (delta * half).tanh();
    let th = (delta * s).tanh();
    (
        T::half() * (T::one() - th / norm),
        -T::half() * delta * (T::one() - th * th) / norm,
    )
}

/// Blend of the three profiles. Switching windows are attached as the
/// corresponding events are found.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSchedule<T> {
    pub b0: T,
    pub b1: T,
    pub eta: T,
    pub delta: T,
    /// Switching window length T_sw (s).
    pub window: T,
    /// Crossover midpoint of the gradient-removal window.
    pub removal_mid: Option<T>,
    /// Crossover midpoint of the gradient-restore window.
    pub restore_mid: Option<T>,
}

/// Blend weights (w1, w2, w3) and their time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Weights<T> {
    pub w: [T; 3],
    pub dw: [T; 3],
}

impl<T: Real> FieldSchedule<T> {
    pub fn for_run(run: &RunSpec<T>) -> Self {
        Self {
            b0: run.field.b0,
            b1: run.b1(),
            eta: run.field.eta,
            delta: run.field.delta,
            window: run.switch_window(),
            removal_mid: None,
            restore_mid: None,
        }
    }

    pub fn with_removal(mut self, mid: T) -> Self {
        self.removal_mid = Some(mid);
        self
    }

    pub fn with_restore(mut self, mid: T) -> Self {
        self.restore_mid = Some(mid);
        self
    }

    pub fn profiles(&self) -> [FieldProfile<T>; 3] {
        let make = |kind| FieldProfile {
            kind,
            b0: self.b0,
            b1: self.b1,
            eta: self.eta,
        };
        [
            make(ProfileKind::GradientPositive),
            make(ProfileKind::Uniform),
            make(ProfileKind::GradientNegative),
        ]
    }

    /// (start, end) of the removal window, if placed.
    pub fn removal_window(&self) -> Option<(T, T)> {
        let half = self.window * T::half();
        self.removal_mid.map(|m| (m - half, m + half))
    }

    pub fn restore_window(&self) -> Option<(T, T)> {
        let half = self.window * T::half();
        self.restore_mid.map(|m| (m - half, m + half))
    }

    pub fn weights(&self, t: T) -> Weights<T> {
        let half = self.window * T::half();
        let (w1, dw1) = match self.removal_mid {
            Some(mid) => ramp_down(t, mid, half, self.delta),
            None => (T::one(), T::zero()),
        };
        let (w3, dw3) = match self.restore_mid {
            Some(mid) => {
                let (down, ddown) = ramp_down(t, mid, half, self.delta);
                (T::one() - down, -ddown)
            }
            None => (T::zero(), T::zero()),
        };
        Weights {
            w: [w1, T::one() - w1 - w3, w3],
            dw: [dw1, -dw1 - dw3, dw3],
        }
    }

    /// (Bx, By) at (x, y, t).
    pub fn field_at(&self, x: T, y: T, t: T) -> (T, T) {
        let w = self.weights(t).w;
        let mut bx = T::zero();
        let mut by = T::zero();
        for (wi, profile) in w.iter().zip(self.profiles().iter()) {
            if *wi != T::zero() {
                let (px, py) = profile.eval(x, y);
                bx = bx + *wi * px;
                by = by + *wi * py;
            }
        }
        (bx, by)
    }

    /// Analytic ∂Bx/∂x = −η·w1 + η·w3.
    pub fn field_gradient_at(&self, _x: T, _y: T, t: T) -> T {
        let w = self.weights(t).w;
        self.eta * (w[2] - w[0])
    }

    /// ∂Bx/∂t at fixed position, on the x axis.
    pub fn field_rate_at(&self, x: T, t: T) -> T {
        let dw = self.weights(t).dw;
        let p = self.profiles();
        dw[0] * p[0].eval(x, T::zero()).0 + dw[1] * p[1].eval(x, T::zero()).0 + dw[2] * p[2].eval(x, T::zero()).0
    }

    /// On-axis field written as Bx(x) = b − p·x; returns (b, p).
    pub fn on_axis(&self, t: T) -> (T, T) {
        let [w1, w2, w3] = self.weights(t).w;
        (w1 * self.b0 + w2 * self.b1 - w3 * self.b0, self.eta * (w1 - w3))
    }

    /// Interval of x where |Bx| < ε at time t, or `None` in a uniform field.
    pub fn forbidden_interval(&self, t: T, epsilon: T) -> Option<(T, T)> {
        let (b, p) = self.on_axis(t);
        forbidden_interval(b, p, epsilon)
    }
}

/// [(b − ε)/p, (b + ε)/p] sorted ascending, for Bx(x) = b − p·x with p ≠ 0.
pub fn forbidden_interval<T: Real>(b: T, p: T, epsilon: T) -> Option<(T, T)> {
    if p == T::zero() {
        return None;
    }
    let lo = (b - epsilon) / p;
    let hi = (b + epsilon) / p;
    Some(if lo <= hi { (lo, hi) } else { (hi, lo) })
}

/// ω_L = (g·e/2m_e)·|B|.
pub fn larmor_frequency<T: Real>(constants: &PhysicalConstants<T>, bmag: T) -> T {
    constants.larmor_ratio() * bmag.abs()
}

/// Largest |∇·B| and |(∇×B)_z| over the points, from central differences with
/// spacing `h` applied to an arbitrary planar field.
pub fn maxwell_residuals_of<T, F>(field: F, points: &[(T, T, T)], h: T) -> (T, T)
where
    T: Real,
    F: Fn(T, T, T) -> (T, T),
{
    let two_h = T::two() * h;
    let mut max_div = T::zero();
    let mut max_curl = T::zero();
    for &(x, y, t) in points {
        let (bx_xp, by_xp) = field(x + h, y, t);
        let (bx_xm, by_xm) = field(x - h, y, t);
        let (bx_yp, by_yp) = field(x, y + h, t);
        let (bx_ym, by_ym) = field(x, y - h, t);
        let div = (bx_xp - bx_xm) / two_h + (by_yp - by_ym) / two_h;
        let curl = (by_xp - by_xm) / two_h - (bx_yp - bx_ym) / two_h;
        max_div = max_div.max(div.abs());
        max_curl = max_curl.max(curl.abs());
    }
    (max_div, max_curl)
}

/// [`maxwell_residuals_of`] for the blended schedule.
pub fn maxwell_residuals<T: Real>(schedule: &FieldSchedule<T>, points: &[(T, T, T)], h: T) -> (T, T) {
    maxwell_residuals_of(|x, y, t| schedule.field_at(x, y, t), points, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn schedule() -> FieldSchedule<f64> {
        FieldSchedule {
            b0: 1e-2,
            b1: 3.5e-4,
            eta: 40.0,
            delta: 1e3,
            window: 5e-3,
            removal_mid: Some(0.5),
            restore_mid: Some(0.6),
        }
    }

    #[test]
    fn switching_weight_limits() {
        assert_relative_eq!(switching_weight(0.5, 0.0, 1.0, 1e3), 1.0, max_relative = 1e-12);
        assert_relative_eq!(switching_weight(0.0, 0.0, 1.0, 1e3), 0.5, max_relative = 1e-12);
        assert!(switching_weight(-50.0, 0.0, 1.0, 1e3) < 1e-300);
        assert!(switching_weight(50.0, 0.0, 1.0, 1e3) < 1e-300);
    }

    #[test]
    fn field_in_each_stage() {
        let s = schedule();
        assert_eq!(s.field_at(0.0, 0.0, 0.1), (1e-2, 0.0));
        assert_eq!(s.field_at(1.3e-4, -2e-5, 0.55), (3.5e-4, 0.0));
        let (bx, by) = s.field_at(1e-2 / 40.0, 0.0, 0.9);
        assert!(bx.abs() < 1e-18 && by == 0.0);
        let (bx, by) = s.field_at(1e-4, 2e-5, 0.1);
        assert_relative_eq!(bx, 1e-2 - 40.0 * 1e-4, max_relative = 1e-12);
        assert_relative_eq!(by, 40.0 * 2e-5, max_relative = 1e-12);
    }

    #[test]
    fn gradient_in_each_stage() {
        let s = schedule();
        assert_eq!(s.field_gradient_at(0.0, 0.0, 0.1), -40.0);
        assert_eq!(s.field_gradient_at(0.0, 0.0, 0.55), 0.0);
        assert_eq!(s.field_gradient_at(0.0, 0.0, 0.9), 40.0);
    }

    #[test]
    fn weights_are_exact_outside_windows_and_partition_inside() {
        let s = schedule();
        assert_eq!(s.weights(0.4974).w, [1.0, 0.0, 0.0]);
        assert_eq!(s.weights(0.5026).w, [0.0, 1.0, 0.0]);
        assert_eq!(s.weights(0.6026).w, [0.0, 0.0, 1.0]);
        for i in 0..=2000 {
            let t = 0.49 + i as f64 * 1.2e-4 / 2.0;
            let w = s.weights(t).w;
            assert!((w[0] + w[1] + w[2] - 1.0).abs() < 1e-12);
            assert!(w.iter().all(|&wi| (-1e-15..=1.0 + 1e-15).contains(&wi)));
        }
        assert_relative_eq!(s.weights(0.5).w[0], 0.5, max_relative = 1e-12);
    }

    #[test]
    fn weight_derivative_matches_finite_difference() {
        let s = schedule();
        for t in [0.4990, 0.5, 0.5012, 0.5995, 0.6013] {
            let h = 1e-8;
            let fd = (s.weights(t + h).w[0] - s.weights(t - h).w[0]) / (2.0 * h);
            let fd3 = (s.weights(t + h).w[2] - s.weights(t - h).w[2]) / (2.0 * h);
            let dw = s.weights(t).dw;
            assert!((fd - dw[0]).abs() < 1e-5 * 1e3, "t={t} fd={fd} dw={}", dw[0]);
            assert!((fd3 - dw[2]).abs() < 1e-5 * 1e3);
        }
    }

    #[test]
    fn forbidden_interval_cases() {
        let mut s = schedule();
        s.removal_mid = None;
        let (lo, hi) = s.forbidden_interval(0.1, 3.5e-6).unwrap();
        assert_relative_eq!(lo, 2.499125e-4, max_relative = 1e-12);
        assert_relative_eq!(hi, 2.500875e-4, max_relative = 1e-12);
        assert!(schedule().forbidden_interval(0.55, 3.5e-6).is_none());
        let (lo, hi) = s.forbidden_interval(0.1, 0.0).unwrap();
        assert_eq!(lo, hi);
        assert_relative_eq!(lo, 2.5e-4, max_relative = 1e-12);
        let (lo, hi) = schedule().forbidden_interval(0.9, 3.5e-6).unwrap();
        assert!(lo < hi);
        assert_relative_eq!(0.5 * (lo + hi), 2.5e-4, max_relative = 1e-12);
    }

    #[test]
    fn maxwell_residuals_vanish_and_control_fails() {
        let s = schedule();
        let pts: Vec<_> = [0.1, 0.4985, 0.5, 0.55, 0.6, 0.6011, 0.9]
            .iter()
            .flat_map(|&t| [(0.0, 0.0, t), (2.4e-4, 1e-5, t), (-1e-3, -3e-4, t)])
            .collect();
        let (div, curl) = maxwell_residuals(&s, &pts, 1e-6);
        assert!(div <= 1e-9 * 40.0 && curl <= 1e-9 * 40.0, "div={div} curl={curl}");

        let corrupted = |x: f64, y: f64, _t: f64| (1e-2 - 40.0 * x, -40.0 * y);
        let (div, _) = maxwell_residuals_of(corrupted, &pts, 1e-6);
        assert_relative_eq!(div, 80.0, max_relative = 1e-6);
    }

    #[test]
    fn larmor_frequency_of_ten_millitesla() {
        let c = PhysicalConstants::<f64>::codata();
        assert_relative_eq!(larmor_frequency(&c, 1e-2), 1.7588e9, max_relative = 1e-4);
        let eps = 3.5e-6;
        let omega = larmor_frequency(&c, eps);
        assert_relative_eq!(crate::model::derive_epsilon(&c, omega), eps, max_relative = 1e-14);
    }

    #[test]
    fn field_rate_matches_finite_difference() {
        let s = schedule();
        for t in [0.4992, 0.5003, 0.5998, 0.6009] {
            let x = 2.45e-4;
            let h = 1e-9;
            let fd = (s.field_at(x, 0.0, t + h).0 - s.field_at(x, 0.0, t - h).0) / (2.0 * h);
            assert_relative_eq!(s.field_rate_at(x, t), fd, max_relative = 1e-5, epsilon = 1e-9);
        }
    }

    #[test]
    fn single_precision_blend() {
        let s = FieldSchedule::<f32> {
            b0: 1e-2,
            b1: 3.5e-4,
            eta: 40.0,
            delta: 1e3,
            window: 5e-3,
            removal_mid: Some(0.5),
            restore_mid: None,
        };
        let w = s.weights(0.5).w;
        assert!((w[0] - 0.5).abs() < 1e-6);
        assert_eq!(s.field_gradient_at(0.0, 0.0, 0.1), -40.0);
    }
}
