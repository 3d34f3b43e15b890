//! JSON run configuration with units in the key names.

use serde::{Deserialize, Serialize};

use crate::model::{
    validate_spec, FieldFloor, FieldSpec, Numerics, ParticleSpec, PhysicalConstants, RunSpec, SwitchAlignment,
    CHI_DIAMOND,
};
use crate::scalar::Real;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("give exactly one of epsilon_T and omega_L_min_rad_s")]
    FieldFloor,
}

fn default_chi() -> f64 {
    CHI_DIAMOND
}
fn default_b1_ratio() -> f64 {
    100.0
}
fn default_window() -> f64 {
    5.0
}
fn default_integrator_tol() -> f64 {
    1e-10
}
fn default_closure_tol() -> f64 {
    1e-3
}
fn default_phase_tol() -> f64 {
    1.0
}
fn removal_default() -> SwitchAlignment {
    SwitchAlignment::End
}
fn restore_default() -> SwitchAlignment {
    SwitchAlignment::Center
}

/// On-disk form of a run. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[allow(non_snake_case)]
pub struct RunConfigFile {
    pub mass_kg: f64,
    #[serde(default = "default_chi")]
    pub chi_m_m3_per_kg: f64,
    #[serde(rename = "B0_T")]
    pub b0_t: f64,
    pub eta_T_per_m: f64,
    #[serde(rename = "delta_Hz")]
    pub delta_hz: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_T: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_L_min_rad_s: Option<f64>,
    #[serde(rename = "B1_over_epsilon", default = "default_b1_ratio")]
    pub b1_over_epsilon: f64,
    #[serde(default = "default_window")]
    pub switch_window_over_delta: f64,
    #[serde(default = "removal_default")]
    pub removal_alignment: SwitchAlignment,
    #[serde(default = "restore_default")]
    pub restore_alignment: SwitchAlignment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_dt_s: Option<f64>,
    #[serde(default = "default_integrator_tol")]
    pub integrator_rel_tol: f64,
    #[serde(default = "default_closure_tol")]
    pub closure_rel_tol: f64,
    #[serde(default = "default_phase_tol")]
    pub phase_tolerance_rad: f64,
    #[serde(default)]
    pub x0_m: f64,
    #[serde(default)]
    pub v0_mps: f64,
}

impl RunConfigFile {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = serde_json::from_str(text)?;
        if cfg.epsilon_T.is_some() == cfg.omega_L_min_rad_s.is_some() {
            return Err(ConfigError::FieldFloor);
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Builds the run without validating it; see [`validate_spec`].
    pub fn to_run_spec<T: Real>(&self) -> Result<RunSpec<T>, ConfigError> {
        let constants = PhysicalConstants::<T>::codata();
        let floor = match (self.epsilon_T, self.omega_L_min_rad_s) {
            (Some(eps), None) => FieldFloor::Epsilon(T::lit(eps)),
            (None, Some(w)) => FieldFloor::LarmorFrequency(T::lit(w)),
            _ => return Err(ConfigError::FieldFloor),
        };
        let mut particle = ParticleSpec::diamond(T::lit(self.mass_kg), &constants);
        particle.chi_m = T::lit(self.chi_m_m3_per_kg);
        Ok(RunSpec {
            constants,
            particle,
            field: FieldSpec {
                b0: T::lit(self.b0_t),
                eta: T::lit(self.eta_T_per_m),
                delta: T::lit(self.delta_hz),
                floor,
                b1_over_epsilon: T::lit(self.b1_over_epsilon),
            },
            numerics: Numerics {
                switch_window_over_delta: T::lit(self.switch_window_over_delta),
                removal_alignment: self.removal_alignment,
                restore_alignment: self.restore_alignment,
                sample_dt: self.sample_dt_s.map(T::lit),
                integrator_rel_tol: T::lit(self.integrator_rel_tol),
                closure_rel_tol: T::lit(self.closure_rel_tol),
                phase_tolerance: T::lit(self.phase_tolerance_rad),
                x0: T::lit(self.x0_m),
                v0: T::lit(self.v0_mps),
            },
        })
    }

    /// Inverse of [`to_run_spec`](Self::to_run_spec) for the configurable fields.
    #[allow(non_snake_case)]
    pub fn from_run_spec<T: Real>(run: &RunSpec<T>) -> Self {
        let (epsilon_T, omega_L_min_rad_s) = match run.field.floor {
            FieldFloor::Epsilon(e) => (Some(e.as_f64()), None),
            FieldFloor::LarmorFrequency(w) => (None, Some(w.as_f64())),
        };
        let n = &run.numerics;
        Self {
            mass_kg: run.particle.mass.as_f64(),
            chi_m_m3_per_kg: run.particle.chi_m.as_f64(),
            b0_t: run.field.b0.as_f64(),
            eta_T_per_m: run.field.eta.as_f64(),
            delta_hz: run.field.delta.as_f64(),
            epsilon_T,
            omega_L_min_rad_s,
            b1_over_epsilon: run.field.b1_over_epsilon.as_f64(),
            switch_window_over_delta: n.switch_window_over_delta.as_f64(),
            removal_alignment: n.removal_alignment,
            restore_alignment: n.restore_alignment,
            sample_dt_s: n.sample_dt.map(|d| d.as_f64()),
            integrator_rel_tol: n.integrator_rel_tol.as_f64(),
            closure_rel_tol: n.closure_rel_tol.as_f64(),
            phase_tolerance_rad: n.phase_tolerance.as_f64(),
            x0_m: n.x0.as_f64(),
            v0_mps: n.v0.as_f64(),
        }
    }
}

/// Parses and validates in one step.
pub fn load_run<T: Real>(text: &str) -> Result<RunSpec<T>, LoadError> {
    let cfg = RunConfigFile::from_json(text)?;
    let run = cfg.to_run_spec()?;
    validate_spec(&run).map_err(LoadError::Invalid)
}

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n"))]
    Invalid(Vec<crate::model::Violation>),
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const MINIMAL: &str = r#"{"mass_kg": 1e-17, "B0_T": 0.01, "eta_T_per_m": 40, "delta_Hz": 1000, "epsilon_T": 2.0895e-6}"#;

    #[test]
    fn defaults_fill_missing_keys() {
        let cfg = RunConfigFile::from_json(MINIMAL).unwrap();
        assert_eq!(cfg.b1_over_epsilon, 100.0);
        assert_eq!(cfg.chi_m_m3_per_kg, -6.2e-9);
        assert_eq!(cfg.closure_rel_tol, 1e-3);
        let run: RunSpec<f64> = cfg.to_run_spec().unwrap();
        assert_eq!(run, RunSpec::reference(1e-17, 40.0, 2.0895e-6));
    }

    #[test]
    fn unknown_key_rejected() {
        let text = MINIMAL.replace("}", r#", "B0_mT": 10}"#);
        assert!(matches!(RunConfigFile::from_json(&text), Err(ConfigError::Parse(_))));
    }

    #[test]
    fn floor_must_be_given_once() {
        let none = MINIMAL.replace(r#", "epsilon_T": 2.0895e-6"#, "");
        assert!(matches!(RunConfigFile::from_json(&none), Err(ConfigError::FieldFloor)));
        let both = MINIMAL.replace("}", r#", "omega_L_min_rad_s": 3.6e5}"#);
        assert!(matches!(RunConfigFile::from_json(&both), Err(ConfigError::FieldFloor)));
    }

    #[test]
    fn paramagnet_fails_validation() {
        let text = MINIMAL.replace("}", r#", "chi_m_m3_per_kg": 1e-9}"#);
        match load_run::<f64>(&text) {
            Err(LoadError::Invalid(v)) => assert!(v.iter().any(|v| v.invariant == "particle.chi_m")),
            other => panic!("{other:?}"),
        }
    }

    fn alignment() -> impl Strategy<Value = SwitchAlignment> {
        prop_oneof![Just(SwitchAlignment::Start), Just(SwitchAlignment::Center), Just(SwitchAlignment::End)]
    }

    proptest! {
        #[test]
        fn round_trip(
            mass in 1e-17f64..1e-14,
            eta in 0.5f64..1e3,
            eps in 1e-7f64..1e-4,
            use_omega in any::<bool>(),
            window in 1.0f64..20.0,
            dt in proptest::option::of(1e-5f64..1e-2),
            removal in alignment(),
            restore in alignment(),
            x0 in -1e-4f64..1e-4,
        ) {
            let cfg = RunConfigFile {
                mass_kg: mass,
                chi_m_m3_per_kg: -6.2e-9,
                b0_t: 1e-2,
                eta_T_per_m: eta,
                delta_hz: 1e3,
                epsilon_T: (!use_omega).then_some(eps),
                omega_L_min_rad_s: use_omega.then_some(eps * 1.76e11),
                b1_over_epsilon: 100.0,
                switch_window_over_delta: window,
                removal_alignment: removal,
                restore_alignment: restore,
                sample_dt_s: dt,
                integrator_rel_tol: 1e-10,
                closure_rel_tol: 1e-3,
                phase_tolerance_rad: 1.0,
                x0_m: x0,
                v0_mps: 0.0,
            };
            let run: RunSpec<f64> = RunConfigFile::from_json(&cfg.to_json()).unwrap().to_run_spec().unwrap();
            let again = RunConfigFile::from_run_spec(&run);
            let run2: RunSpec<f64> = RunConfigFile::from_json(&again.to_json()).unwrap().to_run_spec().unwrap();
            prop_assert_eq!(run, run2);
            prop_assert_eq!(again, cfg);
        }
    }
}
