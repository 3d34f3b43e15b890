//! CSV and JSON writers. Every float is written with 17 significant digits
//! and a '.' decimal point, so identical runs give identical bytes.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::Value;

use crate::closure::ClosedRun;
use crate::diagnostics::{adiabaticity_report, AdiabaticityReport};
use crate::dynamics::Trajectory;
use crate::error::Result;
use crate::experiment::Table;
use crate::phase::{phase_report, PhaseReport};
use crate::scalar::Real;

pub const TRAJECTORY_COLUMNS: [&str; 9] = [
    "t_s",
    "x_plus_m",
    "v_plus_mps",
    "x_minus_m",
    "v_minus_mps",
    "Bx_plus_T",
    "Bx_minus_T",
    "dx_m",
    "dv_mps",
];

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

fn push_row(out: &mut String, cells: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for c in cells {
        if !first {
            out.push(',');
        }
        first = false;
        out.push_str(&fmt_f64(c));
    }
    out.push('\n');
}

pub fn trajectory_csv<T: Real>(traj: &Trajectory<T>) -> String {
    let mut out = TRAJECTORY_COLUMNS.join(",");
    out.push('\n');
    for (i, &t) in traj.times.iter().enumerate() {
        let (p, m) = (traj.plus[i], traj.minus[i]);
        let bp = traj.schedule.field_at(p.x, T::zero(), t).0;
        let bm = traj.schedule.field_at(m.x, T::zero(), t).0;
        push_row(
            &mut out,
            [t, p.x, p.v, m.x, m.v, bp, bm, traj.dx[i], traj.dv[i]].map(|v| v.as_f64()),
        );
    }
    out
}

pub fn table_csv<T: Real>(table: &Table<T>) -> String {
    let mut out = table.headers.join(",");
    out.push('\n');
    for row in &table.rows {
        push_row(&mut out, row.iter().map(|v| v.as_f64()));
    }
    out
}

/// Pretty JSON of any serializable value, with floats at 17 significant
/// digits and integers kept as integers.
pub fn to_json<S: Serialize>(value: &S) -> String {
    let v = serde_json::to_value(value).expect("value serializes");
    let mut out = String::new();
    write_value(&mut out, &v, 0);
    out.push('\n');
    out
}

fn write_value(out: &mut String, v: &Value, depth: usize) {
    let pad = |n: usize| "  ".repeat(n);
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_f64() {
                out.push_str(&fmt_f64(n.as_f64().unwrap_or(f64::NAN)));
            } else {
                let _ = write!(out, "{n}");
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string serializes")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return;
            }
            out.push_str("[\n");
            for (i, item) in items.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                write_value(out, item, depth + 1);
                out.push_str(if i + 1 < items.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return;
            }
            out.push_str("{\n");
            for (i, (k, item)) in map.iter().enumerate() {
                out.push_str(&pad(depth + 1));
                out.push_str(&serde_json::to_string(k).expect("key serializes"));
                out.push_str(": ");
                write_value(out, item, depth + 1);
                out.push_str(if i + 1 < map.len() { ",\n" } else { "\n" });
            }
            out.push_str(&pad(depth));
            out.push('}');
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageTimesOut {
    pub tau1_s: f64,
    pub tau2_s: f64,
    pub tau3_s: f64,
    pub tau4_s: f64,
    pub tau5_s: f64,
    pub tau6_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct RunSummary {
    pub stage_times: StageTimesOut,
    pub removal_event_s: f64,
    pub restore_event_s: f64,
    pub residual_dx_m: f64,
    pub residual_dv_mps: f64,
    pub max_abs_dv_mps: f64,
    pub dx_max_m: f64,
    pub t_at_dx_max_s: f64,
    pub closure_iterations: usize,
    pub degenerate: bool,
    pub dtheta_exact_rad: f64,
    pub dtheta_numeric_rad: f64,
    pub dtheta_approx_rad: f64,
    pub duty_factor: f64,
    pub epsilon_T: f64,
    #[serde(rename = "B1_T")]
    pub b1_t: f64,
    pub omega_rad_s: f64,
    pub alpha_m: f64,
    pub adiabaticity: AdiabaticityReport<f64>,
    pub warnings: Vec<String>,
}

fn adiabaticity_f64<T: Real>(r: &AdiabaticityReport<T>) -> AdiabaticityReport<f64> {
    AdiabaticityReport {
        min_field: r.min_field.as_f64(),
        min_larmor: r.min_larmor.as_f64(),
        max_larmor_rate_ratio: r.max_larmor_rate_ratio.as_f64(),
        switch_to_larmor: r.switch_to_larmor.as_f64(),
        field_floor_ok: r.field_floor_ok,
        rate_ok: r.rate_ok,
        switch_ok: r.switch_ok,
    }
}

pub fn phase_f64<T: Real>(r: &PhaseReport<T>) -> PhaseReport<f64> {
    PhaseReport {
        dtheta_exact: r.dtheta_exact.as_f64(),
        dtheta_numeric: r.dtheta_numeric.as_f64(),
        dtheta_approx: r.dtheta_approx.as_f64(),
        prefactor: r.prefactor.as_f64(),
        duty_factor: r.duty_factor.as_f64(),
        window_contribution: r.window_contribution.as_f64(),
        dtheta_tau1: r.dtheta_tau1.as_f64(),
        dtheta_tau1_closed_form: r.dtheta_tau1_closed_form.as_f64(),
        tau_total: r.tau_total.as_f64(),
        dt_max: r.dt_max.as_f64(),
        db0_max: r.db0_max.as_f64(),
    }
}

pub fn run_summary<T: Real>(closed: &ClosedRun<T>) -> Result<RunSummary> {
    let traj = &closed.trajectory;
    let c = &closed.closure;
    let st = traj.stage_times;
    let phase = phase_report(traj)?;
    let adiabatic = adiabaticity_report(traj)?;
    Ok(RunSummary {
        stage_times: StageTimesOut {
            tau1_s: st.tau1.as_f64(),
            tau2_s: st.tau2.as_f64(),
            tau3_s: st.tau3.as_f64(),
            tau4_s: st.tau4.as_f64(),
            tau5_s: st.tau5.as_f64(),
            tau6_s: st.tau6.as_f64(),
        },
        removal_event_s: traj.events.removal.as_f64(),
        restore_event_s: traj.events.restore.as_f64(),
        residual_dx_m: c.residual_dx.as_f64(),
        residual_dv_mps: c.residual_dv.as_f64(),
        max_abs_dv_mps: c.max_abs_dv.as_f64(),
        dx_max_m: c.dx_max.as_f64(),
        t_at_dx_max_s: c.t_at_dx_max.as_f64(),
        closure_iterations: c.iterations,
        degenerate: c.degenerate,
        dtheta_exact_rad: phase.dtheta_exact.as_f64(),
        dtheta_numeric_rad: phase.dtheta_numeric.as_f64(),
        dtheta_approx_rad: phase.dtheta_approx.as_f64(),
        duty_factor: phase.duty_factor.as_f64(),
        epsilon_T: traj.run.epsilon().as_f64(),
        b1_t: traj.run.b1().as_f64(),
        omega_rad_s: traj.omega.as_f64(),
        alpha_m: traj.alpha.as_f64(),
        adiabaticity: adiabaticity_f64(&adiabatic),
        warnings: c.warnings.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::close_run;
    use crate::model::RunSpec;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(fmt_f64(1.0), "1.0000000000000000e0");
        assert_eq!(fmt_f64(-0.25), "-2.5000000000000000e-1");
        let x = 0.1 + 0.2;
        assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
    }

    #[test]
    fn json_keeps_integers_and_nesting() {
        #[derive(Serialize)]
        struct S {
            n: usize,
            x: f64,
            v: Vec<f64>,
            e: Vec<f64>,
            s: &'static str,
        }
        let text = to_json(&S { n: 3, x: 0.5, v: vec![1.0], e: vec![], s: "a\"b" });
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["n"], 3);
        assert_eq!(back["x"], 0.5);
        assert_eq!(back["s"], "a\"b");
        assert!(text.contains("\"x\": 5.0000000000000000e-1"));
    }

    #[test]
    fn csv_is_reproducible() {
        let run = RunSpec::reference(1e-17, 400.0, 2.0895e-6);
        let a = trajectory_csv(&close_run(&run).unwrap().trajectory);
        let b = trajectory_csv(&close_run(&run).unwrap().trajectory);
        assert_eq!(a, b);
        let mut lines = a.lines();
        assert_eq!(lines.next().unwrap(), TRAJECTORY_COLUMNS.join(","));
        assert!(lines.all(|l| l.split(',').count() == 9 && !l.contains(' ')));
    }
}
