//! Command-line front end: run device scenarios, fit spectra, and build
//! consolidated reports.
//!
//! Exit codes: 0 success, 2 usage error, 3 configuration error,
//! 4 execution/numerical failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use snvsim::config::{apply_override, ConfigError, DeviceConfig};
use snvsim::scenario::{emit_report, run_scenario, ScenarioError};
use snvsim::spectroscopy::{
    fit_linear, fit_lorentzian, fit_sideband_comb, PLESpectrum,
};

/// Environment variable holding the default device config path.
pub const CONFIG_ENV: &str = "SNVSIM_CONFIG";

const EXIT_USAGE: u8 = 2;
const EXIT_CONFIG: u8 = 3;
const EXIT_FAILURE: u8 = 4;

#[derive(Parser)]
#[command(
    name = "snvsim",
    about = "Strain-tuned color-center spin-photon interface simulator",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named scenario end to end and write CSV + JSON outputs.
    Sim {
        /// One of: dc-tuning, ac-broadening, resonance-enhancement,
        /// sideband-comb, phonon-number, spin-odmr, gsm-sweep,
        /// power-budget, route-and-switch, g2
        scenario: String,
        /// Device config JSON; defaults to $SNVSIM_CONFIG or the built-in
        /// device fixture.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (the scenario writes into `<out>/<scenario>`).
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Random seed; defaults to the config's default_seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Dotted-path config overrides, e.g. --set settings.default_seed=9
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Fit a curve from a CSV file and print the result as JSON.
    Fit {
        #[arg(value_enum)]
        fit_type: FitType,
        /// Input CSV: `detuning_ghz,signal` for line fits, `x,y[,sigma]`
        /// for linear regression.
        #[arg(long = "in")]
        input: PathBuf,
        /// Drive frequency for sideband fits.
        #[arg(long)]
        omega_d_mhz: Option<f64>,
        /// Also write the JSON result to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate scenario summaries under a directory into one report.
    Report {
        #[arg(long = "in", default_value = "out")]
        input: PathBuf,
        /// Also write the consolidated JSON report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FitType {
    Lorentzian,
    Sideband,
    Linear,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, message)) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

type CliError = (u8, String);

fn usage(message: impl std::fmt::Display) -> CliError {
    (EXIT_USAGE, message.to_string())
}

fn config_error(message: impl std::fmt::Display) -> CliError {
    (EXIT_CONFIG, message.to_string())
}

fn failure(message: impl std::fmt::Display) -> CliError {
    (EXIT_FAILURE, message.to_string())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Sim {
            scenario,
            config,
            out,
            seed,
            overrides,
        } => sim(scenario, config, out, seed, overrides),
        Command::Fit {
            fit_type,
            input,
            omega_d_mhz,
            out,
        } => fit(fit_type, input, omega_d_mhz, out),
        Command::Report { input, out } => report(input, out),
    }
}

fn load_config_value(path: Option<PathBuf>) -> Result<serde_json::Value, CliError> {
    let path = path.or_else(|| std::env::var(CONFIG_ENV).ok().map(PathBuf::from));
    let text = match path {
        Some(p) => std::fs::read_to_string(&p)
            .map_err(|e| config_error(format!("cannot read {}: {e}", p.display())))?,
        None => DeviceConfig::default().to_json_string(),
    };
    serde_json::from_str(&text).map_err(|e| config_error(format!("config is not valid JSON: {e}")))
}

fn sim(
    scenario: String,
    config_path: Option<PathBuf>,
    out: PathBuf,
    seed: Option<u64>,
    overrides: Vec<String>,
) -> Result<(), CliError> {
    let mut value = load_config_value(config_path)?;
    for entry in &overrides {
        let (key, raw) = entry
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got '{entry}'")))?;
        apply_override(&mut value, key, raw).map_err(config_error)?;
    }
    let config = DeviceConfig::from_value(value).map_err(|e| match e {
        ConfigError::Version { .. } | ConfigError::Schema(_) | ConfigError::Parse(_) | ConfigError::Io(_) => {
            config_error(e)
        }
    })?;
    let seed = seed.unwrap_or(config.settings.default_seed);

    let dir = out.join(&scenario);
    let result = run_scenario(&scenario, &config, seed, &dir).map_err(|e| match e {
        ScenarioError::UnknownScenario(_) => usage(e),
        other => failure(other),
    })?;

    println!(
        "{}: wrote {} files to {} (seed {seed})",
        result.scenario,
        result.files.len() + 1,
        dir.display()
    );
    for check in &result.checks {
        println!(
            "  [{}] {} = {:.6e}",
            if check.pass { "PASS" } else { "FAIL" },
            check.name,
            check.value
        );
    }
    Ok(())
}

fn fit(
    fit_type: FitType,
    input: PathBuf,
    omega_d_mhz: Option<f64>,
    out: Option<PathBuf>,
) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&input)
        .map_err(|e| usage(format!("cannot read {}: {e}", input.display())))?;

    let json = match fit_type {
        FitType::Lorentzian => {
            let spec = PLESpectrum::from_csv(&text).map_err(usage)?;
            let fit = fit_lorentzian(&spec).map_err(failure)?;
            serde_json::to_value(&fit).expect("fit serializes")
        }
        FitType::Sideband => {
            let omega = omega_d_mhz
                .ok_or_else(|| usage("sideband fits need --omega-d-mhz"))?;
            let spec = PLESpectrum::from_csv(&text).map_err(usage)?;
            let fit = fit_sideband_comb(&spec, omega / 1e3).map_err(failure)?;
            serde_json::to_value(&fit).expect("fit serializes")
        }
        FitType::Linear => {
            let (xs, ys, sigmas) = parse_xy_csv(&text).map_err(usage)?;
            let fit = fit_linear(&xs, &ys, sigmas.as_deref()).map_err(failure)?;
            serde_json::to_value(&fit).expect("fit serializes")
        }
    };
    let pretty = serde_json::to_string_pretty(&json).expect("json prints");
    println!("{pretty}");
    if let Some(path) = out {
        std::fs::write(&path, pretty).map_err(|e| failure(format!("cannot write: {e}")))?;
    }
    Ok(())
}

type XySigma = (Vec<f64>, Vec<f64>, Option<Vec<f64>>);

/// Parse `x,y` or `x,y,sigma` rows with a header line.
fn parse_xy_csv(text: &str) -> Result<XySigma, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty file")?;
    let cols = header.split(',').count();
    if !(2..=3).contains(&cols) {
        return Err(format!("expected 2 or 3 columns, header has {cols}"));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut sigmas = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols {
            return Err(format!("row {}: expected {cols} fields", i + 2));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| format!("row {}: bad number '{s}'", i + 2))
        };
        xs.push(parse(fields[0])?);
        ys.push(parse(fields[1])?);
        if cols == 3 {
            sigmas.push(parse(fields[2])?);
        }
    }
    Ok((xs, ys, if sigmas.is_empty() { None } else { Some(sigmas) }))
}

fn report(input: PathBuf, out: Option<PathBuf>) -> Result<(), CliError> {
    let report = emit_report(&input).map_err(|e| match e {
        ScenarioError::EmptyReport(_) => usage(e),
        other => failure(other),
    })?;
    print!("{}", report.table());
    if let Some(path) = out {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(&path, json).map_err(|e| failure(format!("cannot write: {e}")))?;
    }
    Ok(())
}
