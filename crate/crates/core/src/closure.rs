//! Choice of the spin-flip time τ5 so that both arms overlap in position and
//! velocity at τ6.

use std::cell::Cell;

use serde::{Deserialize, Serialize};

use crate::dynamics::{ArmLabel, Closing, Prelude, Trajectory};
use crate::error::{Result, SimError};
use crate::model::RunSpec;
use crate::roots::{brent, RootError};
use crate::scalar::Real;

/// Brent iterations allowed for the outer τ5 search.
pub const MAX_CLOSURE_ITERATIONS: usize = 60;

/// Bracket scan step, as a fraction of the trap period.
const SCAN_FRACTION: f64 = 1.0 / 64.0;

/// Bracket expansion limit beyond τ4, in trap periods.
const BRACKET_PERIODS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureResult<T> {
    pub tau5: T,
    pub tau6: T,
    /// Δx(τ6).
    pub residual_dx: T,
    /// Δv(τ6).
    pub residual_dv: T,
    pub dx_max: T,
    pub t_at_dx_max: T,
    /// max_t |Δv(t)| on the sample grid.
    pub max_abs_dv: T,
    /// Outer-loop function evaluations spent inside Brent.
    pub iterations: usize,
    /// Both arms coincide, so any τ5 closes the loop.
    pub degenerate: bool,
    pub warnings: Vec<String>,
}

impl<T: Real> ClosureResult<T> {
    /// (|Δx(τ6)|/dx_max, |Δv(τ6)|/max|Δv|), zero for degenerate runs.
    pub fn residual_ratios(&self) -> (T, T) {
        let ratio = |r: T, s: T| if s > T::zero() { r.abs() / s } else { r.abs() };
        (ratio(self.residual_dx, self.dx_max), ratio(self.residual_dv, self.max_abs_dv))
    }
}

/// A solved run: closure data plus the trajectory it was read from.
#[derive(Debug, Clone)]
pub struct ClosedRun<T> {
    pub closure: ClosureResult<T>,
    pub trajectory: Trajectory<T>,
}

/// Largest |Δx| over the samples, refined by a parabola through the peak
/// sample and its neighbours. Returns (dx_max, t_at).
pub fn max_superposition<T: Real>(traj: &Trajectory<T>) -> (T, T) {
    let dx = &traj.dx;
    let t = &traj.times;
    if dx.is_empty() {
        return (T::zero(), T::zero());
    }
    let mut k = 0;
    for i in 1..dx.len() {
        if dx[i].abs() > dx[k].abs() {
            k = i;
        }
    }
    if k == 0 || k + 1 >= dx.len() {
        return (dx[k].abs(), t[k]);
    }
    let (t0, t1, t2) = (t[k - 1], t[k], t[k + 1]);
    let (y0, y1, y2) = (dx[k - 1].abs(), dx[k].abs(), dx[k + 1].abs());
    // Divided differences of the interpolating parabola.
    let d01 = (y1 - y0) / (t1 - t0);
    let d12 = (y2 - y1) / (t2 - t1);
    let curvature = (d12 - d01) / (t2 - t0);
    if !(curvature < T::zero()) {
        return (y1, t1);
    }
    let t_peak = (T::half() * (t0 + t1) - d01 / (T::two() * curvature)).max(t0).min(t2);
    let y_peak = y0 + d01 * (t_peak - t0) + curvature * (t_peak - t0) * (t_peak - t1);
    (y_peak.max(y1), t_peak)
}

/// Solves the closure conditions for `run`.
pub fn solve_closure<T: Real>(run: &RunSpec<T>) -> Result<ClosureResult<T>> {
    Ok(close_run(run)?.closure)
}

/// Solves the closure conditions and keeps the closed trajectory.
pub fn close_run<T: Real>(run: &RunSpec<T>) -> Result<ClosedRun<T>> {
    let prelude = Prelude::build(run)?;
    close_prelude(&prelude)
}

/// First sign change of `f` going from `from` towards `to` in steps of `step`
/// (negative steps walk backwards). Returns the bracket ordered (lo, hi).
fn walk<T: Real>(f: &mut impl FnMut(T) -> Result<T>, from: T, f_from: T, to: T, step: T) -> Result<Option<(T, T)>> {
    let mut a = from;
    let mut fa = f_from;
    loop {
        let forward = step > T::zero();
        let mut b = a + step;
        let last = if forward { b >= to } else { b <= to };
        if last {
            b = to;
        }
        let fb = f(b)?;
        if fb == T::zero() || fb.signum() != fa.signum() {
            return Ok(Some(if forward { (a, b) } else { (b, a) }));
        }
        if last {
            return Ok(None);
        }
        a = b;
        fa = fb;
    }
}

pub fn close_prelude<T: Real>(prelude: &Prelude<T>) -> Result<ClosedRun<T>> {
    let tau4 = prelude.tau4();
    let period = prelude.period();
    let upper = tau4 + period * T::lit(BRACKET_PERIODS);
    let guess = (T::two() * tau4).min(upper);
    let mut warnings = Vec::new();

    let first = prelude.close(guess)?;
    if first.degenerate {
        warnings.push("arms are identical; closure is trivial and tau6 = tau5".to_string());
        return finish(prelude, first, 0, true, warnings);
    }

    let mut f = |tau5: T| -> Result<T> { Ok(prelude.close(tau5)?.residuals().0) };
    let f_guess = first.residuals().0;
    let step = period * T::lit(SCAN_FRACTION);
    // Just above τ4 so that the flip stays strictly inside the final stage.
    let lower = tau4 + step * T::lit(1e-6);

    let bracket = if f_guess == T::zero() {
        Some((guess, guess))
    } else if f_guess < T::zero() {
        // Δx(τ6) decreases with τ5, so a negative value means the flip is late.
        match walk(&mut f, guess, f_guess, lower, -step)? {
            Some(b) => Some(b),
            None => walk(&mut f, guess, f_guess, upper, step)?,
        }
    } else {
        walk(&mut f, guess, f_guess, upper, step)?
    };
    let (lo, hi) = bracket.ok_or_else(|| {
        SimError::NoClosure(format!(
            "no sign change of dx(tau6) for tau5 in ({:e}, {:e}] s",
            tau4.as_f64(),
            upper.as_f64()
        ))
    })?;

    if lo < hi {
        let f_lo = f(lo)?;
        let sub = 8;
        let mut crossings = 0;
        let mut prev = f_lo;
        for k in 1..=sub {
            let tk = lo + (hi - lo) * T::lit(k as f64 / sub as f64);
            let fk = f(tk)?;
            if fk.signum() != prev.signum() {
                crossings += 1;
            }
            prev = fk;
        }
        if crossings > 1 {
            warnings.push(format!("{crossings} sign changes of dx(tau6) inside the closure bracket"));
        }
        if f_lo < T::zero() {
            warnings.push("dx(tau6) increases across the closure bracket".to_string());
        }
    }

    let calls = Cell::new(0usize);
    let root = if lo == hi {
        lo
    } else {
        let mut failure = None;
        let objective = |tau5: T| {
            calls.set(calls.get() + 1);
            match prelude.close(tau5) {
                Ok(c) => c.residuals().0,
                Err(e) => {
                    failure.get_or_insert(e);
                    T::nan()
                }
            }
        };
        let found = brent(objective, lo, hi, T::tol_floor() * hi.abs(), MAX_CLOSURE_ITERATIONS);
        if let Some(e) = failure {
            return Err(e);
        }
        match found {
            Ok(r) => r,
            Err(RootError::MaxIterations(n)) => {
                return Err(SimError::NoClosure(format!("tau5 search did not converge in {n} iterations")))
            }
            Err(RootError::NotBracketed) => {
                return Err(SimError::NoClosure("tau5 bracket lost its sign change".into()))
            }
        }
    };
    let closing = prelude.close(root)?;
    finish(prelude, closing, calls.get(), false, warnings)
}

fn finish<T: Real>(
    prelude: &Prelude<T>,
    closing: Closing<T>,
    iterations: usize,
    degenerate: bool,
    mut warnings: Vec<String>,
) -> Result<ClosedRun<T>> {
    let run = &prelude.run;
    let trajectory = prelude.assemble(&closing)?;
    let (dx_max, t_at) = max_superposition(&trajectory);
    let (residual_dx, residual_dv) = closing.residuals();
    let max_abs_dv = trajectory.max_abs_dv();
    let st = trajectory.stage_times;
    if !degenerate && !(t_at > st.tau4 && t_at < st.tau5) {
        warnings.push(format!(
            "maximum separation at t = {:e} s lies outside (tau4, tau5)",
            t_at.as_f64()
        ));
    }
    let result = ClosureResult {
        tau5: closing.tau5,
        tau6: closing.tau6,
        residual_dx,
        residual_dv,
        dx_max,
        t_at_dx_max: t_at,
        max_abs_dv,
        iterations,
        degenerate,
        warnings,
    };

    if !degenerate {
        let tol = run.numerics.closure_rel_tol;
        let (rx, rv) = result.residual_ratios();
        if !(rx <= tol && rv <= tol) {
            return Err(SimError::NoClosure(format!(
                "residuals |dx|/dx_max = {:e}, |dv|/max|dv| = {:e} exceed {:e}",
                rx.as_f64(),
                rv.as_f64(),
                tol.as_f64()
            )));
        }
    }
    let bound = (run.field.b0 + run.epsilon()) / run.field.eta;
    let x_plus = trajectory.state_at(ArmLabel::Plus, closing.tau6).0;
    if !(x_plus > bound) {
        return Err(SimError::EndConstraint {
            x_plus: x_plus.as_f64(),
            bound: bound.as_f64(),
        });
    }
    Ok(ClosedRun {
        closure: result,
        trajectory,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const EPS: f64 = 2.0895e-6;

    #[test]
    fn parabola_refines_peak() {
        let prelude = Prelude::build(&RunSpec::reference(1e-17, 40.0, EPS)).unwrap();
        let mut traj = prelude.trajectory(0.9).unwrap();
        // replace the series with a known parabola peaking between samples
        let n = 11;
        traj.times = (0..n).map(|i| i as f64 * 0.1).collect();
        traj.dx = traj.times.iter().map(|t| 2.0 - (t - 0.537f64).powi(2)).collect();
        let (peak, at) = max_superposition(&traj);
        assert_relative_eq!(at, 0.537, max_relative = 1e-12);
        assert_relative_eq!(peak, 2.0, max_relative = 1e-12);
    }

    #[test]
    fn closes_reference_run() {
        let closed = close_run(&RunSpec::reference(1e-17, 40.0, EPS)).unwrap();
        let c = &closed.closure;
        assert!(!c.degenerate);
        assert!(c.iterations <= MAX_CLOSURE_ITERATIONS);
        let (rx, rv) = c.residual_ratios();
        assert!(rx <= 1e-3 && rv <= 1e-3, "{rx} {rv}");
        let st = closed.trajectory.stage_times;
        assert!(st.tau4 < c.tau5 && c.tau5 < c.tau6);
        assert!(c.t_at_dx_max > st.tau4 && c.t_at_dx_max < st.tau5);
    }

    #[test]
    fn zero_coupling_is_degenerate() {
        let mut run = RunSpec::reference(1e-17, 40.0, EPS);
        run.particle.mu_eff = 0.0;
        let closed = close_run(&run).unwrap();
        assert!(closed.closure.degenerate);
        assert_eq!(closed.closure.tau6, closed.closure.tau5);
        assert_eq!(closed.closure.dx_max, 0.0);
        assert!(closed.trajectory.dx.iter().all(|&d| d == 0.0));
    }
}
