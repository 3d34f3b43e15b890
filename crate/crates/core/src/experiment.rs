//! Calibration of the field floor, parameter sweeps and scaling-law fits.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closure::{close_run, ClosedRun};
use crate::diagnostics::{adiabaticity_report, energy_drift, RunFlags, CONTINUITY_LIMIT, ENERGY_LIMIT};
use crate::dynamics::{detect_removal_event, harmonic_segment, stage_center, ArmLabel, ArmState, StaticStage};
use crate::error::{Result, SimError};
use crate::model::{derive_omega, FieldFloor, RunSpec, StageTimes, MASS_FLOOR_KG};
use crate::phase::phase_report;
use crate::roots::brent;
use crate::scalar::Real;

/// Superposition-law coefficient K in dx_max ≈ K·τ6/m (kg·m/s).
pub const PAPER_SUPERPOSITION_COEFFICIENT: f64 = 1.6e-22;

/// τ6·η reported for the reference schedule (T·s/m).
pub const PAPER_TAU6_ETA: f64 = 59.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration<T> {
    pub epsilon: T,
    pub omega_l_min: T,
    /// Stage τ1 reached with the calibrated ε.
    pub tau1: T,
}

/// Start of the gradient-removal stage for `run`, without integrating past it.
pub fn stage_tau1<T: Real>(run: &RunSpec<T>) -> Result<T> {
    let c = &run.constants;
    let p = &run.particle;
    let f = &run.field;
    let omega = derive_omega(c, p, f)?;
    let arm = ArmState::initial(ArmLabel::Plus, run.numerics.x0, run.numerics.v0);
    let center = stage_center(StaticStage::Initial, arm.spin_sign, p, c, f.b0, f.eta)?;
    let seg = harmonic_segment(arm.x, arm.v, T::zero(), center, omega, ArmLabel::Plus);
    let event = detect_removal_event(&seg, (f.b0 - run.b1()) / f.eta)?;
    Ok(event - run.numerics.removal_alignment.lead_fraction::<T>() * run.switch_window())
}

/// Finds ε so that the stage τ1 of `template` at gradient `eta` equals
/// `target_tau1`. τ1 falls as ε grows, since B1 = (B1/ε)·ε moves the
/// removal threshold towards the release point.
pub fn calibrate_epsilon<T: Real>(target_tau1: T, eta: T, template: &RunSpec<T>) -> Result<Calibration<T>> {
    if !(target_tau1 > T::zero()) {
        return Err(SimError::NotBracketed(format!(
            "target tau1 = {:e} s must be positive",
            target_tau1.as_f64()
        )));
    }
    let base = template.with_eta(eta);
    let with_eps = |eps: T| {
        let mut run = base;
        run.field.floor = FieldFloor::Epsilon(eps);
        run
    };
    let eps_hi = base.field.b0 / base.field.b1_over_epsilon * (T::one() - T::lit(1e-9));
    let eps_lo = eps_hi * T::lit(1e-9);
    let gap = |eps: T| stage_tau1(&with_eps(eps)).map(|t| t - target_tau1);
    let (g_lo, g_hi) = (gap(eps_lo)?, gap(eps_hi)?);
    if g_lo.signum() == g_hi.signum() {
        return Err(SimError::NotBracketed(format!(
            "tau1 spans [{:e}, {:e}] s for epsilon in ({:e}, {:e}) T; target {:e} s",
            (g_hi + target_tau1).as_f64(),
            (g_lo + target_tau1).as_f64(),
            eps_lo.as_f64(),
            eps_hi.as_f64(),
            target_tau1.as_f64()
        )));
    }
    let mut failure = None;
    let eps = brent(
        |e| match gap(e) {
            Ok(g) => g,
            Err(err) => {
                failure.get_or_insert(err);
                T::nan()
            }
        },
        eps_lo,
        eps_hi,
        T::tol_floor() * eps_hi,
        200,
    );
    if let Some(err) = failure {
        return Err(err);
    }
    let eps = eps.map_err(|e| SimError::NotBracketed(e.to_string()))?;
    let run = with_eps(eps);
    let tau1 = stage_tau1(&run)?;
    if (tau1 - target_tau1).abs() > T::lit(1e-4) * target_tau1 {
        return Err(SimError::NotBracketed(format!(
            "calibration stalled at tau1 = {:e} s",
            tau1.as_f64()
        )));
    }
    Ok(Calibration {
        epsilon: eps,
        omega_l_min: run.omega_l_min(),
        tau1,
    })
}

/// Summary of one run inside a sweep. A failed run keeps its parameters and
/// the error message; every derived field is then `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord<T> {
    pub mass: T,
    pub eta: T,
    pub b0: T,
    pub b1: T,
    pub epsilon: T,
    pub stage_times: Option<StageTimes<T>>,
    pub dx_max: Option<T>,
    pub t_at_dx_max: Option<T>,
    pub dtheta_exact: Option<T>,
    pub flags: Option<RunFlags>,
    pub error: Option<String>,
}

impl<T: Real> SweepRecord<T> {
    pub fn ok(&self) -> bool {
        self.error.is_none() && self.flags.map_or(false, |f| f.all())
    }

    pub fn tau6(&self) -> Option<T> {
        self.stage_times.map(|s| s.tau6)
    }
}

/// Invariant flags of a closed run.
pub fn run_flags<T: Real>(closed: &ClosedRun<T>) -> Result<RunFlags> {
    let traj = &closed.trajectory;
    let c = &closed.closure;
    let tol = traj.run.numerics.closure_rel_tol;
    let (rx, rv) = c.residual_ratios();
    let (mx, mv) = traj.boundary_mismatch();
    let adiabatic = adiabaticity_report(traj)?;
    let st = traj.stage_times;
    Ok(RunFlags {
        closure: rx <= tol && rv <= tol,
        field_floor: traj.min_field() >= traj.run.epsilon(),
        continuity: mx <= T::lit(CONTINUITY_LIMIT) && mv <= T::lit(CONTINUITY_LIMIT),
        energy: energy_drift(traj) <= T::lit(ENERGY_LIMIT),
        adiabatic: adiabatic.passed(),
        max_in_separation_stage: c.degenerate || (c.t_at_dx_max > st.tau4 && c.t_at_dx_max < st.tau5),
    })
}

/// Solves one run and condenses it into a record.
pub fn evaluate<T: Real>(run: &RunSpec<T>) -> SweepRecord<T> {
    let mut record = SweepRecord {
        mass: run.particle.mass,
        eta: run.field.eta,
        b0: run.field.b0,
        b1: run.b1(),
        epsilon: run.epsilon(),
        stage_times: None,
        dx_max: None,
        t_at_dx_max: None,
        dtheta_exact: None,
        flags: None,
        error: None,
    };
    let outcome = close_run(run).and_then(|closed| {
        let phase = phase_report(&closed.trajectory)?;
        let flags = run_flags(&closed)?;
        Ok((closed, phase, flags))
    });
    match outcome {
        Ok((closed, phase, flags)) => {
            record.stage_times = Some(closed.trajectory.stage_times);
            record.dx_max = Some(closed.closure.dx_max);
            record.t_at_dx_max = Some(closed.closure.t_at_dx_max);
            record.dtheta_exact = Some(phase.dtheta_exact);
            record.flags = Some(flags);
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    record
}

/// Mean, sample standard deviation and (max − min)/mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Spread<T> {
    pub mean: T,
    pub std_dev: T,
    pub relative_range: T,
    pub count: usize,
}

pub fn spread<T: Real>(values: &[T]) -> Option<Spread<T>> {
    if values.is_empty() {
        return None;
    }
    let n = T::from_usize(values.len()).expect("count");
    let mean = values.iter().fold(T::zero(), |s, &v| s + v) / n;
    let var = if values.len() > 1 {
        values.iter().fold(T::zero(), |s, &v| s + (v - mean) * (v - mean)) / (n - T::one())
    } else {
        T::zero()
    };
    let lo = values.iter().copied().fold(T::infinity(), T::min);
    let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
    Some(Spread {
        mean,
        std_dev: var.sqrt(),
        relative_range: (hi - lo) / mean.abs(),
        count: values.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaSweep<T> {
    pub records: Vec<SweepRecord<T>>,
    /// τ6·η over the successful runs.
    pub tau6_eta: Option<Spread<T>>,
}

/// Runs `template` at each gradient, in parallel; records keep input order.
pub fn sweep_eta<T: Real>(values: &[T], template: &RunSpec<T>) -> EtaSweep<T> {
    let records: Vec<_> = values.par_iter().map(|&eta| evaluate(&template.with_eta(eta))).collect();
    let products: Vec<T> = records
        .iter()
        .filter(|r| r.error.is_none())
        .filter_map(|r| r.tau6().map(|t| t * r.eta))
        .collect();
    EtaSweep {
        tau6_eta: spread(&products),
        records,
    }
}

/// Least-squares fits of the superposition law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionFit<T> {
    /// K in dx_max = K·τ6/m (kg·m/s).
    pub coefficient: T,
    /// Exponent p in dx_max/τ6 ∝ m^p, from a log–log regression.
    pub mass_exponent: Option<T>,
    pub count: usize,
}

/// Fits dx_max = K·τ6/m through the origin, and the mass exponent.
pub fn fit_superposition<T: Real>(points: &[(T, T, T)]) -> Option<SuperpositionFit<T>> {
    if points.is_empty() {
        return None;
    }
    let (mut num, mut den) = (T::zero(), T::zero());
    for &(m, tau6, dx) in points {
        let u = tau6 / m;
        num = num + dx * u;
        den = den + u * u;
    }
    let xs: Vec<T> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<T> = points.iter().map(|p| (p.2 / p.1).ln()).collect();
    Some(SuperpositionFit {
        coefficient: num / den,
        mass_exponent: linear_fit(&xs, &ys).map(|f| f.slope),
        count: points.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit<T> {
    pub slope: T,
    pub intercept: T,
    pub r_squared: T,
}

/// Ordinary least squares y = slope·x + intercept; needs two distinct x.
pub fn linear_fit<T: Real>(xs: &[T], ys: &[T]) -> Option<LinearFit<T>> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = T::from_usize(xs.len()).expect("count");
    let mx = xs.iter().fold(T::zero(), |s, &v| s + v) / n;
    let my = ys.iter().fold(T::zero(), |s, &v| s + v) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
        syy = syy + (y - my) * (y - my);
    }
    if sxx == T::zero() {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == T::zero() { T::one() } else { sxy * sxy / (sxx * syy) };
    Some(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassSweep<T> {
    pub records: Vec<SweepRecord<T>>,
    pub fit: Option<SuperpositionFit<T>>,
}

/// Runs `template` at each mass. Masses below the validity floor reject the
/// whole sweep before anything runs.
pub fn sweep_mass<T: Real>(values: &[T], template: &RunSpec<T>) -> Result<MassSweep<T>> {
    if let Some(&m) = values.iter().find(|&&m| !(m >= T::lit(MASS_FLOOR_KG))) {
        return Err(SimError::InvalidParticle(format!(
            "mass {:e} kg is below the {:e} kg validity floor",
            m.as_f64(),
            MASS_FLOOR_KG
        )));
    }
    let records: Vec<_> = values.par_iter().map(|&m| evaluate(&template.with_mass(m))).collect();
    let points: Vec<(T, T, T)> = records
        .iter()
        .filter(|r| r.error.is_none())
        .filter_map(|r| Some((r.mass, r.tau6()?, r.dx_max?)))
        .collect();
    Ok(MassSweep {
        fit: fit_superposition(&points),
        records,
    })
}

/// A headed numeric table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table<T> {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<T>>,
}

impl<T> Table<T> {
    fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }
}

/// Path series (t, x⁺, v⁺, x⁻, v⁻).
pub fn paths_table<T: Real>(closed: &ClosedRun<T>) -> Table<T> {
    let traj = &closed.trajectory;
    let mut table = Table::new(&["t_s", "x_plus_m", "v_plus_mps", "x_minus_m", "v_minus_mps"]);
    for (i, &t) in traj.times.iter().enumerate() {
        let (p, m) = (traj.plus[i], traj.minus[i]);
        table.rows.push(vec![t, p.x, p.v, m.x, m.v]);
    }
    table
}

/// Separation series (t, Δx).
pub fn separation_table<T: Real>(closed: &ClosedRun<T>) -> Table<T> {
    let traj = &closed.trajectory;
    let mut table = Table::new(&["t_s", "dx_m"]);
    for (&t, &dx) in traj.times.iter().zip(&traj.dx) {
        table.rows.push(vec![t, dx]);
    }
    table
}

/// (m, τ6, dx_max) over the successful records.
pub fn superposition_table<T: Real>(records: &[SweepRecord<T>]) -> Table<T> {
    let mut table = Table::new(&["mass_kg", "tau6_s", "dx_max_m"]);
    for r in records {
        if let (Some(t6), Some(dx)) = (r.tau6(), r.dx_max) {
            table.rows.push(vec![r.mass, t6, dx]);
        }
    }
    table
}

/// (m, τ_total, |Δθ|) over the successful records.
pub fn phase_table<T: Real>(records: &[SweepRecord<T>]) -> Table<T> {
    let mut table = Table::new(&["mass_kg", "tau_total_s", "abs_dtheta_rad"]);
    for r in records {
        if let (Some(t6), Some(dth)) = (r.tau6(), r.dtheta_exact) {
            table.rows.push(vec![r.mass, t6, dth.abs()]);
        }
    }
    table
}
