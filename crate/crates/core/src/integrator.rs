//! Adaptive Dormand–Prince 5(4) integrator for small fixed-size systems.
//!
//! The solver lands exactly on every requested output time and records each
//! accepted step as a node `(t, y, dy/dt)`, which is enough for cubic Hermite
//! interpolation between nodes.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum IntegrationError {
    #[error("step size underflow at t = {t:e} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
    #[error("non-finite state at t = {0:e}")]
    NonFinite(f64),
}

/// Mixed error weights: component i is scaled by atol[i] + rtol·|y_i|.
/// An infinite `atol` removes the component from step-size control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<T, const N: usize> {
    pub rtol: T,
    pub atol: [T; N],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node<T, const N: usize> {
    pub t: T,
    pub y: [T; N],
    pub dydt: [T; N],
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone)]
pub struct Solution<T, const N: usize> {
    /// Start node, every accepted step, and every output time, in order.
    pub nodes: Vec<Node<T, N>>,
    pub stats: Stats,
}

impl<T: Real, const N: usize> Solution<T, N> {
    pub fn last(&self) -> &Node<T, N> {
        self.nodes.last().expect("solution always holds the start node")
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DormandPrince<T, const N: usize> {
    pub tol: Tolerances<T, N>,
    pub max_steps: usize,
    pub safety: T,
}

impl<T: Real, const N: usize> DormandPrince<T, N> {
    pub fn new(tol: Tolerances<T, N>) -> Self {
        let rtol = tol.rtol.max(T::tol_floor());
        Self {
            tol: Tolerances { rtol, atol: tol.atol },
            max_steps: 2_000_000,
            safety: T::lit(0.9),
        }
    }

    /// Integrates dy/dt = f(t, y) from (t0, y0) to t1, stopping exactly at each
    /// time in `outputs` that falls inside (t0, t1).
    pub fn integrate<F>(&self, f: F, t0: T, y0: [T; N], t1: T, outputs: &[T]) -> Result<Solution<T, N>, IntegrationError>
    where
        F: Fn(T, &[T; N]) -> [T; N],
    {
        let mut stats = Stats::default();
        let mut stops: Vec<T> = outputs.iter().copied().filter(|&s| s > t0 && s < t1).collect();
        stops.push(t1);

        let mut t = t0;
        let mut y = y0;
        let mut k1 = f(t, &y);
        stats.evaluations += 1;
        let mut nodes = vec![Node { t, y, dydt: k1 }];
        if t1 <= t0 {
            return Ok(Solution { nodes, stats });
        }

        let mut h = (t1 - t0) * T::lit(1e-3);
        let underflow = T::epsilon() * T::lit(16.0);
        let fifth = T::lit(0.2);
        let min_factor = T::lit(0.2);
        let max_factor = T::lit(5.0);

        for stop in stops {
            while t < stop {
                if stats.accepted + stats.rejected >= self.max_steps {
                    return Err(IntegrationError::TooManySteps(self.max_steps));
                }
                let remaining = stop - t;
                let landing = h >= remaining;
                let step = if landing { remaining } else { h };
                if step <= underflow * t.abs().max(T::one() * (t1 - t0)) {
                    return Err(IntegrationError::StepUnderflow { t: t.as_f64(), h: step.as_f64() });
                }

                let (y_new, k7, err_vec) = dp_step(&f, t, &y, &k1, step);
                stats.evaluations += 6;
                let err = self.error_norm(&y, &y_new, &err_vec);
                if !err.is_finite() {
                    return Err(IntegrationError::NonFinite(t.as_f64()));
                }

                if err <= T::one() {
                    stats.accepted += 1;
                    t = if landing { stop } else { t + step };
                    y = y_new;
                    k1 = k7;
                    nodes.push(Node { t, y, dydt: k1 });
                    let factor = if err == T::zero() {
                        max_factor
                    } else {
                        (self.safety * err.powf(-fifth)).min(max_factor).max(min_factor)
                    };
                    // Keep the controller's step after a truncated landing step.
                    h = if landing { h.max(step * factor) } else { step * factor };
                } else {
                    stats.rejected += 1;
                    let factor = (self.safety * err.powf(-fifth)).max(min_factor);
                    h = step * factor;
                }
            }
        }
        Ok(Solution { nodes, stats })
    }

    fn error_norm(&self, y: &[T; N], y_new: &[T; N], err: &[T; N]) -> T {
        let mut worst = T::zero();
        for i in 0..N {
            let scale = self.tol.atol[i] + self.tol.rtol * y[i].abs().max(y_new[i].abs());
            if scale.is_infinite() {
                continue;
            }
            worst = worst.max(err[i].abs() / scale);
        }
        worst
    }
}

fn axpy<T: Real, const N: usize>(y: &[T; N], h: T, terms: &[(T, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = T::zero();
        for (coef, k) in terms {
            acc = acc + *coef * k[i];
        }
        out[i] = out[i] + h * acc;
    }
    out
}

/// One Dormand–Prince step. Returns (5th-order state, f at the new state,
/// embedded error estimate).
fn dp_step<T, F, const N: usize>(f: &F, t: T, y: &[T; N], k1: &[T; N], h: T) -> ([T; N], [T; N], [T; N])
where
    T: Real,
    F: Fn(T, &[T; N]) -> [T; N],
{
    let c = |v: f64| T::lit(v);
    let k2 = f(t + c(0.2) * h, &axpy(y, h, &[(c(0.2), k1)]));
    let k3 = f(
        t + c(0.3) * h,
        &axpy(y, h, &[(c(3.0 / 40.0), k1), (c(9.0 / 40.0), &k2)]),
    );
    let k4 = f(
        t + c(0.8) * h,
        &axpy(y, h, &[(c(44.0 / 45.0), k1), (c(-56.0 / 15.0), &k2), (c(32.0 / 9.0), &k3)]),
    );
    let k5 = f(
        t + c(8.0 / 9.0) * h,
        &axpy(
            y,
            h,
            &[
                (c(19372.0 / 6561.0), k1),
                (c(-25360.0 / 2187.0), &k2),
                (c(64448.0 / 6561.0), &k3),
                (c(-212.0 / 729.0), &k4),
            ],
        ),
    );
    let k6 = f(
        t + h,
        &axpy(
            y,
            h,
            &[
                (c(9017.0 / 3168.0), k1),
                (c(-355.0 / 33.0), &k2),
                (c(46732.0 / 5247.0), &k3),
                (c(49.0 / 176.0), &k4),
                (c(-5103.0 / 18656.0), &k5),
            ],
        ),
    );
    let y_new = axpy(
        y,
        h,
        &[
            (c(35.0 / 384.0), k1),
            (c(500.0 / 1113.0), &k3),
            (c(125.0 / 192.0), &k4),
            (c(-2187.0 / 6784.0), &k5),
            (c(11.0 / 84.0), &k6),
        ],
    );
    let k7 = f(t + h, &y_new);
    let zero = [T::zero(); N];
    let err = axpy(
        &zero,
        h,
        &[
            (c(71.0 / 57600.0), k1),
            (c(-71.0 / 16695.0), &k3),
            (c(71.0 / 1920.0), &k4),
            (c(-17253.0 / 339200.0), &k5),
            (c(22.0 / 525.0), &k6),
            (c(-1.0 / 40.0), &k7),
        ],
    );
    (y_new, k7, err)
}

/// Cubic Hermite interpolation between two nodes.
pub fn hermite<T: Real, const N: usize>(a: &Node<T, N>, b: &Node<T, N>, t: T) -> [T; N] {
    let h = b.t - a.t;
    if h == T::zero() {
        return a.y;
    }
    let s = (t - a.t) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let two = T::two();
    let three = T::lit(3.0);
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    let mut out = [T::zero(); N];
    for i in 0..N {
        out[i] = h00 * a.y[i] + h10 * h * a.dydt[i] + h01 * b.y[i] + h11 * h * b.dydt[i];
    }
    out
}
