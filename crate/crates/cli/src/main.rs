use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sgi_core::config::{load_run, ConfigError, LoadError, RunConfigFile};
use sgi_core::experiment::{calibrate_epsilon, sweep_eta, sweep_mass, Spread, SuperpositionFit, SweepRecord};
use sgi_core::model::{validate_spec, RunSpec};
use sgi_core::output::{fmt_f64, phase_f64, run_summary, to_json, trajectory_csv};
use sgi_core::{close_run, phase_report, SimError};

/// Full-loop Stern-Gerlach interferometer simulator.
#[derive(Debug, Parser)]
#[command(name = "sgi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the closure conditions and write the trajectory and a summary.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve one run per parameter value and print a summary table.
    Sweep {
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated values (T/m for eta, kg for mass).
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// Template run. Defaults to the reference diamond with ε
        /// calibrated to τ1 = 0.534 s at η = 40 T/m.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write sweep.csv and fit.json here instead of printing.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find the field floor ε that puts τ1 at the requested time.
    CalibrateEpsilon {
        #[arg(long = "target-tau1")]
        target_tau1: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the phase report of the closed run as JSON.
    Phase {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check a configuration and list every violated invariant.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SweepParam {
    Eta,
    Mass,
}

enum Failure {
    Config(String),
    Physics(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Physics(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Physics(m) | Failure::Io(m) => m,
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        if e.is_config_error() {
            Failure::Config(e.to_string())
        } else {
            Failure::Physics(e.to_string())
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<RunSpec<f64>, Failure> {
    Ok(load_run(&read(path)?)?)
}

fn reference_template() -> Result<RunSpec<f64>, Failure> {
    let base = RunSpec::reference(1e-17, 40.0, 1e-6);
    let cal = calibrate_epsilon(0.534, 40.0, &base)?;
    Ok(RunSpec::reference(1e-17, 40.0, cal.epsilon))
}

fn simulate(config: &Path, out: &Path) -> Result<(), Failure> {
    let run = load(config)?;
    let closed = close_run(&run)?;
    let summary = run_summary(&closed)?;
    fs::create_dir_all(out).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    write(&out.join("trajectory.csv"), &trajectory_csv(&closed.trajectory))?;
    write(&out.join("summary.json"), &to_json(&summary))?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    println!("tau6_s = {}", fmt_f64(summary.stage_times.tau6_s));
    Ok(())
}

const SWEEP_COLUMNS: [&str; 15] = [
    "mass_kg",
    "eta_T_per_m",
    "epsilon_T",
    "tau1_s",
    "tau2_s",
    "tau3_s",
    "tau4_s",
    "tau5_s",
    "tau6_s",
    "tau6_eta_Ts_per_m",
    "dx_max_m",
    "t_at_dx_max_s",
    "dtheta_exact_rad",
    "ok",
    "error",
];

fn sweep_csv(records: &[SweepRecord<f64>]) -> String {
    let mut out = SWEEP_COLUMNS.join(",");
    out.push('\n');
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for r in records {
        let mut cells = vec![fmt_f64(r.mass), fmt_f64(r.eta), fmt_f64(r.epsilon)];
        let taus = r.stage_times.map(|s| s.as_array());
        for k in 0..6 {
            cells.push(opt(taus.map(|t| t[k])));
        }
        cells.push(opt(r.tau6().map(|t| t * r.eta)));
        cells.push(opt(r.dx_max));
        cells.push(opt(r.t_at_dx_max));
        cells.push(opt(r.dtheta_exact));
        cells.push(r.ok().to_string());
        // Error text is quoted and stripped of quotes so the row stays parseable.
        cells.push(r.error.as_ref().map(|e| format!("\"{}\"", e.replace('"', "'"))).unwrap_or_default());
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct SweepFit {
    parameter: &'static str,
    runs: usize,
    failed: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    tau6_eta: Option<Spread<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    superposition: Option<SuperpositionFit<f64>>,
}

fn sweep(param: SweepParam, values: &[f64], config: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let template = match config {
        Some(path) => load(path)?,
        None => reference_template()?,
    };
    let (records, fit) = match param {
        SweepParam::Eta => {
            let s = sweep_eta(values, &template);
            let fit = SweepFit {
                parameter: "eta",
                runs: s.records.len(),
                failed: s.records.iter().filter(|r| !r.ok()).count(),
                tau6_eta: s.tau6_eta,
                superposition: None,
            };
            (s.records, fit)
        }
        SweepParam::Mass => {
            let s = sweep_mass(values, &template)?;
            let fit = SweepFit {
                parameter: "mass",
                runs: s.records.len(),
                failed: s.records.iter().filter(|r| !r.ok()).count(),
                tau6_eta: None,
                superposition: s.fit,
            };
            (s.records, fit)
        }
    };
    let csv = sweep_csv(&records);
    let fit_json = to_json(&fit);
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
            write(&dir.join("sweep.csv"), &csv)?;
            write(&dir.join("fit.json"), &fit_json)?;
        }
        None => {
            print!("{csv}");
            println!();
            print!("{fit_json}");
        }
    }
    Ok(())
}

#[derive(Serialize)]
#[allow(non_snake_case)]
struct CalibrationOut {
    eta_T_per_m: f64,
    target_tau1_s: f64,
    tau1_s: f64,
    epsilon_T: f64,
    omega_L_min_rad_s: f64,
}

fn calibrate(target: f64, eta: f64, config: Option<&Path>) -> Result<(), Failure> {
    let template = match config {
        Some(path) => {
            let cfg = RunConfigFile::from_json(&read(path)?)?;
            cfg.to_run_spec::<f64>()?
        }
        None => RunSpec::reference(1e-17, eta, 1e-6),
    };
    let cal = calibrate_epsilon(target, eta, &template)?;
    print!(
        "{}",
        to_json(&CalibrationOut {
            eta_T_per_m: eta,
            target_tau1_s: target,
            tau1_s: cal.tau1,
            epsilon_T: cal.epsilon,
            omega_L_min_rad_s: cal.omega_l_min,
        })
    );
    Ok(())
}

fn phase(config: &Path) -> Result<(), Failure> {
    let run = load(config)?;
    let closed = close_run(&run)?;
    let report = phase_report(&closed.trajectory)?;
    print!("{}", to_json(&phase_f64(&report)));
    Ok(())
}

fn validate(config: &Path) -> Result<(), Failure> {
    let cfg = RunConfigFile::from_json(&read(config)?)?;
    let run = cfg.to_run_spec::<f64>()?;
    match validate_spec(&run) {
        Ok(_) => {
            println!("ok");
            Ok(())
        }
        Err(violations) => {
            for v in &violations {
                println!("{v}");
            }
            Err(Failure::Config(format!("{} violation(s)", violations.len())))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Simulate { config, out } => simulate(config, out),
        Command::Sweep { param, values, config, out } => sweep(*param, values, config.as_deref(), out.as_deref()),
        Command::CalibrateEpsilon { target_tau1, eta, config } => calibrate(*target_tau1, *eta, config.as_deref()),
        Command::Phase { config } => phase(config),
        Command::Validate { config } => validate(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
