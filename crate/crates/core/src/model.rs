//! Physical constants, run parameters and the quantities derived from them.
//!
//! Everything here is a plain value record. A [`RunSpec`] is the complete
//! input of one interferometer run; [`validate_spec`] checks it and reports
//! every violated invariant at once.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::scalar::Real;

/// Mass magnetic susceptibility of diamond (m³/kg).
pub const CHI_DIAMOND: f64 = -6.2e-9;

/// Lightest mass for which the default field schedule keeps both arms clear of
/// the field zero (kg).
pub const MASS_FLOOR_KG: f64 = 1e-17;

/// Largest accepted ratio of switching frequency to minimum Larmor frequency.
pub const MAX_SWITCH_TO_LARMOR: f64 = 1e-2;

/// Smallest accepted bridge-field to field-floor ratio.
pub const MIN_B1_OVER_EPSILON: f64 = 10.0;

/// CODATA 2018 values plus the Landé factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants<T> {
    /// Vacuum permeability (T·m/A).
    pub mu0: T,
    /// Bohr magneton (J/T).
    pub mu_b: T,
    /// Elementary charge (C).
    pub e: T,
    /// Electron mass (kg).
    pub m_e: T,
    /// Reduced Planck constant (J·s).
    pub hbar: T,
    /// Landé g-factor.
    pub g: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn codata() -> Self {
        Self {
            mu0: T::lit(1.256_637_062_12e-6),
            mu_b: T::lit(9.274_010_078_3e-24),
            e: T::lit(1.602_176_634e-19),
            m_e: T::lit(9.109_383_701_5e-31),
            hbar: T::lit(1.054_571_817e-34),
            g: T::two(),
        }
    }

    /// g·e/(2·m_e), the factor mapping |B| to the Larmor frequency (rad/(s·T)).
    pub fn larmor_ratio(&self) -> T {
        self.g * self.e / (T::two() * self.m_e)
    }

    /// g·e·ħ/(2·m_e), the effective spin moment magnitude (J/T).
    pub fn spin_moment(&self) -> T {
        self.larmor_ratio() * self.hbar
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::codata()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticleSpec<T> {
    /// kg
    pub mass: T,
    /// Mass magnetic susceptibility (m³/kg); negative for a diamagnet.
    pub chi_m: T,
    /// Effective spin magnetic moment magnitude (J/T).
    pub mu_eff: T,
}

impl<T: Real> ParticleSpec<T> {
    /// Diamond crystal carrying one electronic spin with moment g·μ_B.
    pub fn diamond(mass: T, constants: &PhysicalConstants<T>) -> Self {
        Self {
            mass,
            chi_m: T::lit(CHI_DIAMOND),
            mu_eff: constants.spin_moment(),
        }
    }
}

/// The minimum allowable field, given either directly or through the minimum
/// Larmor frequency it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldFloor<T> {
    /// ε in tesla.
    Epsilon(T),
    /// ω_L^min in rad/s.
    LarmorFrequency(T),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec<T> {
    /// Bias field B0 (T).
    pub b0: T,
    /// Gradient magnitude η (T/m).
    pub eta: T,
    /// Switching frequency δ (1/s).
    pub delta: T,
    pub floor: FieldFloor<T>,
    /// B1/ε.
    pub b1_over_epsilon: T,
}

impl<T: Real> FieldSpec<T> {
    pub fn new(b0: T, eta: T, delta: T, epsilon: T) -> Self {
        Self {
            b0,
            eta,
            delta,
            floor: FieldFloor::Epsilon(epsilon),
            b1_over_epsilon: T::lit(100.0),
        }
    }

    pub fn epsilon(&self, constants: &PhysicalConstants<T>) -> T {
        match self.floor {
            FieldFloor::Epsilon(eps) => eps,
            FieldFloor::LarmorFrequency(omega) => derive_epsilon(constants, omega),
        }
    }

    pub fn omega_l_min(&self, constants: &PhysicalConstants<T>) -> T {
        match self.floor {
            FieldFloor::Epsilon(eps) => larmor_of(constants, eps),
            FieldFloor::LarmorFrequency(omega) => omega,
        }
    }

    /// Bridge field B1 (T).
    pub fn b1(&self, constants: &PhysicalConstants<T>) -> T {
        self.b1_over_epsilon * self.epsilon(constants)
    }
}

/// Where a switching window sits relative to the event that triggers it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchAlignment {
    /// Window opens at the event.
    Start,
    /// Window is centred on the event.
    Center,
    /// Window closes at the event.
    End,
}

impl SwitchAlignment {
    /// Fraction of the window that precedes the event.
    pub fn lead_fraction<T: Real>(self) -> T {
        match self {
            SwitchAlignment::Start => T::zero(),
            SwitchAlignment::Center => T::half(),
            SwitchAlignment::End => T::one(),
        }
    }
}

impl fmt::Display for SwitchAlignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SwitchAlignment::Start => "start",
            SwitchAlignment::Center => "center",
            SwitchAlignment::End => "end",
        })
    }
}

/// Numerical and protocol settings of a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Numerics<T> {
    /// Switching window length in units of 1/δ.
    pub switch_window_over_delta: T,
    /// Placement of the gradient-removal window around the τ1 event.
    pub removal_alignment: SwitchAlignment,
    /// Placement of the gradient-restore window around the τ3 event.
    pub restore_alignment: SwitchAlignment,
    /// Dense output spacing (s); defaults to one trap period / 2000.
    pub sample_dt: Option<T>,
    pub integrator_rel_tol: T,
    /// Closure residual tolerance relative to the peak separation.
    pub closure_rel_tol: T,
    /// Phase tolerance used for the stability budget (rad).
    pub phase_tolerance: T,
    /// Initial position of both arms (m).
    pub x0: T,
    /// Initial velocity of both arms (m/s).
    pub v0: T,
}

impl<T: Real> Default for Numerics<T> {
    fn default() -> Self {
        Self {
            switch_window_over_delta: T::lit(5.0),
            removal_alignment: SwitchAlignment::End,
            restore_alignment: SwitchAlignment::Center,
            sample_dt: None,
            integrator_rel_tol: T::lit(1e-10),
            closure_rel_tol: T::lit(1e-3),
            phase_tolerance: T::one(),
            x0: T::zero(),
            v0: T::zero(),
        }
    }
}

/// Every physical and numerical parameter of one interferometer run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunSpec<T> {
    pub constants: PhysicalConstants<T>,
    pub particle: ParticleSpec<T>,
    pub field: FieldSpec<T>,
    pub numerics: Numerics<T>,
}

impl<T: Real> RunSpec<T> {
    pub fn new(particle: ParticleSpec<T>, field: FieldSpec<T>) -> Self {
        Self {
            constants: PhysicalConstants::codata(),
            particle,
            field,
            numerics: Numerics::default(),
        }
    }

    /// Diamond of the given mass in the reference schedule: B0 = 10 mT,
    /// δ = 1 kHz, B1 = 100ε.
    pub fn reference(mass: T, eta: T, epsilon: T) -> Self {
        let constants = PhysicalConstants::codata();
        Self {
            constants,
            particle: ParticleSpec::diamond(mass, &constants),
            field: FieldSpec::new(T::lit(1e-2), eta, T::lit(1e3), epsilon),
            numerics: Numerics::default(),
        }
    }

    pub fn with_eta(mut self, eta: T) -> Self {
        self.field.eta = eta;
        self
    }

    pub fn with_mass(mut self, mass: T) -> Self {
        self.particle.mass = mass;
        self
    }

    pub fn epsilon(&self) -> T {
        self.field.epsilon(&self.constants)
    }

    pub fn omega_l_min(&self) -> T {
        self.field.omega_l_min(&self.constants)
    }

    pub fn b1(&self) -> T {
        self.field.b1(&self.constants)
    }

    /// Trap angular frequency ω (rad/s).
    pub fn omega(&self) -> Result<T> {
        derive_omega(&self.constants, &self.particle, &self.field)
    }

    /// Trap period 2π/ω (s).
    pub fn period(&self) -> Result<T> {
        let omega = self.omega()?;
        if omega <= T::zero() {
            return Err(SimError::DivisionByZero { what: "trap period" });
        }
        Ok(T::TAU() / omega)
    }

    /// Switching window length (s).
    pub fn switch_window(&self) -> T {
        self.numerics.switch_window_over_delta / self.field.delta
    }

    pub fn sample_dt(&self) -> Result<T> {
        match self.numerics.sample_dt {
            Some(dt) => Ok(dt),
            None => Ok(self.period()? / T::lit(2000.0)),
        }
    }
}

/// Boundaries of the seven interferometer stages (s).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTimes<T> {
    pub tau1: T,
    pub tau2: T,
    pub tau3: T,
    pub tau4: T,
    pub tau5: T,
    pub tau6: T,
}

impl<T: Real> StageTimes<T> {
    pub fn as_array(&self) -> [T; 6] {
        [self.tau1, self.tau2, self.tau3, self.tau4, self.tau5, self.tau6]
    }

    /// Checks 0 < τ1 ≤ τ2 ≤ τ3 ≤ τ4 < τ5 ≤ τ6 and equal window lengths.
    ///
    /// τ5 = τ6 is accepted for the degenerate zero-separation run.
    pub fn is_ordered(&self) -> bool {
        let t = self.as_array();
        t[0] > T::zero()
            && t[0] <= t[1]
            && t[1] <= t[2]
            && t[2] <= t[3]
            && t[3] < t[4]
            && t[4] <= t[5]
    }

    /// Sum of the two switching window lengths.
    pub fn switching_time(&self) -> T {
        (self.tau2 - self.tau1) + (self.tau4 - self.tau3)
    }
}

/// Trap frequency ω = sqrt(−χ_m/μ0)·η.
pub fn derive_omega<T: Real>(
    constants: &PhysicalConstants<T>,
    particle: &ParticleSpec<T>,
    field: &FieldSpec<T>,
) -> Result<T> {
    if !(particle.chi_m < T::zero()) {
        return Err(SimError::InvalidParticle(format!(
            "chi_m = {:e} must be negative",
            particle.chi_m.as_f64()
        )));
    }
    Ok((-particle.chi_m / constants.mu0).sqrt() * field.eta)
}

/// Spin-induced displacement α = −μ_eff·μ0/(χ_m·m·s·η) of the well centre,
/// where `eta_sign` is the sign of the active gradient.
pub fn derive_alpha<T: Real>(
    constants: &PhysicalConstants<T>,
    particle: &ParticleSpec<T>,
    field: &FieldSpec<T>,
    eta_sign: T,
) -> Result<T> {
    let denominator = particle.chi_m * particle.mass * eta_sign * field.eta;
    if denominator == T::zero() {
        return Err(SimError::DivisionByZero { what: "alpha" });
    }
    Ok(-particle.mu_eff * constants.mu0 / denominator)
}

/// Minimum field magnitude ε = 2·m_e·ω_L^min/(g·e).
pub fn derive_epsilon<T: Real>(constants: &PhysicalConstants<T>, omega_l_min: T) -> T {
    omega_l_min / constants.larmor_ratio()
}

fn larmor_of<T: Real>(constants: &PhysicalConstants<T>, field: T) -> T {
    constants.larmor_ratio() * field.abs()
}

/// One violated invariant of a [`RunSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub invariant: &'static str,
    pub value: f64,
    pub message: String,
}

impl Violation {
    fn new(invariant: &'static str, value: f64, message: impl Into<String>) -> Self {
        Self {
            invariant,
            value,
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({:e}): {}", self.invariant, self.value, self.message)
    }
}

/// Checks every invariant of the run and returns all violations.
pub fn validate_spec<T: Real>(run: &RunSpec<T>) -> std::result::Result<RunSpec<T>, Vec<Violation>> {
    let mut out = Vec::new();
    let mut positive = |name: &'static str, value: T| {
        if !(value > T::zero()) || !value.is_finite() {
            out.push(Violation::new(name, value.as_f64(), "must be finite and strictly positive"));
        }
    };

    let c = &run.constants;
    positive("constants.mu0", c.mu0);
    positive("constants.mu_b", c.mu_b);
    positive("constants.e", c.e);
    positive("constants.m_e", c.m_e);
    positive("constants.hbar", c.hbar);
    positive("constants.g", c.g);

    let p = &run.particle;
    positive("particle.mass", p.mass);
    positive("particle.mu_eff", p.mu_eff);
    let f = &run.field;
    positive("field.b0", f.b0);
    positive("field.eta", f.eta);
    positive("field.delta", f.delta);
    positive("field.b1_over_epsilon", f.b1_over_epsilon);
    match f.floor {
        FieldFloor::Epsilon(eps) => positive("field.epsilon", eps),
        FieldFloor::LarmorFrequency(omega) => positive("field.omega_l_min", omega),
    }
    let n = &run.numerics;
    positive("numerics.switch_window_over_delta", n.switch_window_over_delta);
    positive("numerics.integrator_rel_tol", n.integrator_rel_tol);
    positive("numerics.closure_rel_tol", n.closure_rel_tol);
    positive("numerics.phase_tolerance", n.phase_tolerance);
    if let Some(dt) = n.sample_dt {
        positive("numerics.sample_dt", dt);
    }

    if !(p.chi_m < T::zero()) {
        out.push(Violation::new(
            "particle.chi_m",
            p.chi_m.as_f64(),
            "particle must be diamagnetic (chi_m < 0)",
        ));
    }
    if p.mass > T::zero() && p.mass < T::lit(MASS_FLOOR_KG) {
        out.push(Violation::new(
            "particle.mass_floor",
            p.mass.as_f64(),
            format!("mass below {MASS_FLOOR_KG:e} kg leaves the arms exposed to the field zero"),
        ));
    }
    if f.b1_over_epsilon < T::lit(MIN_B1_OVER_EPSILON) {
        out.push(Violation::new(
            "field.bridge_field",
            f.b1_over_epsilon.as_f64(),
            format!("B1 must be at least {MIN_B1_OVER_EPSILON} epsilon"),
        ));
    }
    let b1 = run.b1();
    if b1 >= f.b0 {
        out.push(Violation::new(
            "field.bridge_below_bias",
            b1.as_f64(),
            "B1 must be smaller than B0 for the tau1 event to exist",
        ));
    }
    let omega_l = run.omega_l_min();
    if omega_l > T::zero() && f.delta / omega_l > T::lit(MAX_SWITCH_TO_LARMOR) {
        out.push(Violation::new(
            "field.adiabatic_switching",
            (f.delta / omega_l).as_f64(),
            format!("delta / omega_L_min must not exceed {MAX_SWITCH_TO_LARMOR:e}"),
        ));
    }
    if n.integrator_rel_tol >= T::one() {
        out.push(Violation::new(
            "numerics.integrator_rel_tol",
            n.integrator_rel_tol.as_f64(),
            "must be below 1",
        ));
    }
    if n.closure_rel_tol >= T::one() {
        out.push(Violation::new(
            "numerics.closure_rel_tol",
            n.closure_rel_tol.as_f64(),
            "must be below 1",
        ));
    }
    if !n.x0.is_finite() || !n.v0.is_finite() {
        out.push(Violation::new("numerics.initial_state", n.x0.as_f64(), "must be finite"));
    }

    if out.is_empty() {
        Ok(*run)
    } else {
        Err(out)
    }
}
