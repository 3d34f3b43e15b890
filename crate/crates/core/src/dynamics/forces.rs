//! Potential and force of the spin-carrying diamagnet on the x axis.

use crate::error::{Result, SimError};
use crate::field::FieldSchedule;
use crate::model::{ParticleSpec, PhysicalConstants};
use crate::scalar::Real;

/// U = −(χ_m·m/2μ0)·Bx² − μ_eff·s·Bx at y = 0.
pub fn potential<T: Real>(
    x: T,
    t: T,
    spin_sign: T,
    schedule: &FieldSchedule<T>,
    particle: &ParticleSpec<T>,
    constants: &PhysicalConstants<T>,
) -> T {
    let (bx, _) = schedule.field_at(x, T::zero(), t);
    -(particle.chi_m * particle.mass / (T::two() * constants.mu0)) * bx * bx - particle.mu_eff * spin_sign * bx
}

/// a = −(1/m)·∂U/∂x = (χ_m/μ0)·Bx·∂xBx + (μ_eff·s/m)·∂xBx.
pub fn acceleration<T: Real>(
    x: T,
    t: T,
    spin_sign: T,
    schedule: &FieldSchedule<T>,
    particle: &ParticleSpec<T>,
    constants: &PhysicalConstants<T>,
) -> T {
    let (bx, _) = schedule.field_at(x, T::zero(), t);
    let gradient = schedule.field_gradient_at(x, T::zero(), t);
    (particle.chi_m / constants.mu0) * bx * gradient + (particle.mu_eff * spin_sign / particle.mass) * gradient
}

/// The two static-gradient stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StaticStage {
    /// Profile (B0 − ηx, ηy), before τ1.
    Initial,
    /// Profile −(B0 − ηx, ηy), after τ4.
    Final,
}

/// Minimum of U for a static stage. The field there is Bx = c0 + g·x and the
/// force vanishes where Bx = −μ_eff·s·μ0/(χ_m·m).
pub fn stage_center<T: Real>(
    stage: StaticStage,
    spin_sign: T,
    particle: &ParticleSpec<T>,
    constants: &PhysicalConstants<T>,
    b0: T,
    eta: T,
) -> Result<T> {
    let (c0, g) = match stage {
        StaticStage::Initial => (b0, -eta),
        StaticStage::Final => (-b0, eta),
    };
    if g == T::zero() {
        return Err(SimError::DivisionByZero { what: "well centre (uniform field)" });
    }
    let denominator = particle.chi_m * particle.mass;
    if denominator == T::zero() {
        return Err(SimError::DivisionByZero { what: "well centre" });
    }
    let balance = -particle.mu_eff * spin_sign * constants.mu0 / denominator;
    Ok((balance - c0) / g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{derive_alpha, derive_omega, FieldSpec};
    use approx::assert_relative_eq;

    struct Setup {
        c: PhysicalConstants<f64>,
        p: ParticleSpec<f64>,
        s: FieldSchedule<f64>,
    }

    fn setup() -> Setup {
        let c = PhysicalConstants::codata();
        let p = ParticleSpec::diamond(1e-17, &c);
        let s = FieldSchedule {
            b0: 1e-2,
            b1: 2e-4,
            eta: 40.0,
            delta: 1e3,
            window: 5e-3,
            removal_mid: Some(0.5),
            restore_mid: Some(0.6),
        };
        Setup { c, p, s }
    }

    #[test]
    fn centers_in_initial_stage() {
        let Setup { c, p, .. } = setup();
        let plus = stage_center(StaticStage::Initial, -1.0, &p, &c, 1e-2, 40.0).unwrap();
        let minus = stage_center(StaticStage::Initial, 1.0, &p, &c, 1e-2, 40.0).unwrap();
        assert_relative_eq!(plus, 2.594e-4, max_relative = 1e-3);
        assert_relative_eq!(minus, 2.406e-4, max_relative = 1e-3);
        let alpha = derive_alpha(&c, &p, &FieldSpec::new(1e-2, 40.0, 1e3, 2e-6), 1.0).unwrap();
        assert_relative_eq!(plus, 2.5e-4 + alpha, max_relative = 1e-12);
        assert_relative_eq!(minus, 2.5e-4 - alpha, max_relative = 1e-12);
    }

    #[test]
    fn final_stage_swaps_centers() {
        let Setup { c, p, .. } = setup();
        let init = stage_center(StaticStage::Initial, -1.0, &p, &c, 1e-2, 40.0).unwrap();
        let fin = stage_center(StaticStage::Final, -1.0, &p, &c, 1e-2, 40.0).unwrap();
        let flipped = stage_center(StaticStage::Final, 1.0, &p, &c, 1e-2, 40.0).unwrap();
        assert_relative_eq!(fin + init, 5e-4, max_relative = 1e-12);
        assert_relative_eq!(flipped, init, max_relative = 1e-12);
    }

    #[test]
    fn zero_coupling_centers_coincide() {
        let Setup { c, mut p, .. } = setup();
        p.mu_eff = 0.0;
        let a = stage_center(StaticStage::Initial, -1.0, &p, &c, 1e-2, 40.0).unwrap();
        let b = stage_center(StaticStage::Initial, 1.0, &p, &c, 1e-2, 40.0).unwrap();
        assert_eq!(a, b);
        assert_relative_eq!(a, 2.5e-4, max_relative = 1e-15);
    }

    #[test]
    fn force_vanishes_at_center_and_is_linear() {
        let Setup { c, p, s } = setup();
        let omega = derive_omega(&c, &p, &FieldSpec::new(1e-2, 40.0, 1e3, 2e-6)).unwrap();
        for spin in [-1.0, 1.0] {
            let center = stage_center(StaticStage::Initial, spin, &p, &c, 1e-2, 40.0).unwrap();
            let a0 = acceleration(center, 0.1, spin, &s, &p, &c);
            assert!(a0.abs() < 1e-12 * omega * omega * center);
            let slope = (acceleration(center + 1e-5, 0.1, spin, &s, &p, &c) - acceleration(center - 1e-5, 0.1, spin, &s, &p, &c)) / 2e-5;
            assert_relative_eq!(slope, -omega * omega, max_relative = 1e-8);
            // U has its minimum at the centre
            let u0 = potential(center, 0.1, spin, &s, &p, &c);
            for dx in [-1e-5, -1e-7, 1e-7, 1e-5] {
                assert!(potential(center + dx, 0.1, spin, &s, &p, &c) > u0);
            }
        }
    }

    #[test]
    fn uniform_stage_is_force_free() {
        let Setup { c, p, s } = setup();
        for x in [0.0, 2.5e-4, 1e-3] {
            assert_eq!(acceleration(x, 0.55, 1.0, &s, &p, &c), 0.0);
        }
        assert_eq!(potential(0.0, 0.55, 1.0, &s, &p, &c), potential(1e-3, 0.55, 1.0, &s, &p, &c));
    }

    #[test]
    fn potential_difference_is_harmonic() {
        let Setup { c, p, s } = setup();
        let omega = derive_omega(&c, &p, &FieldSpec::new(1e-2, 40.0, 1e3, 2e-6)).unwrap();
        let center = stage_center(StaticStage::Initial, -1.0, &p, &c, 1e-2, 40.0).unwrap();
        let du = potential(0.0, 0.1, -1.0, &s, &p, &c) - potential(center, 0.1, -1.0, &s, &p, &c);
        assert_relative_eq!(du, 0.5 * p.mass * omega * omega * center * center, max_relative = 1e-9);
    }
}
