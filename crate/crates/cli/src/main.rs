//! Command-line driver: correlation and secret-key-rate sweeps, admissible
//! distance solving and Monte Carlo validation, all from one JSON config.
//!
//! Exit codes: 0 success, 1 configuration error, 2 numerical failure,
//! 3 validation failure.

use clap::{Args, Parser, Subcommand};
use skc_cli::config::{self, parse_config, ResolvedConfig, SweepSpec};
use skc_cli::csvfmt::{fmt_f64, write_csv};
use skc_cli::sweep::{self, DistanceSolution, RhoRow, SkcRow};
use skc_cli::CliError;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "skc",
    version,
    about = "Spatial-correlation and secret-key-rate analysis under realistic propagation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Correlation coefficient against distance for every configured spectrum
    RhoSweep(RunArgs),
    /// Mutual informations and secret-key-rate bounds against distance
    SkcSweep(RunArgs),
    /// Smallest Bob-Eve distance satisfying the configured secrecy criterion
    Distance(RunArgs),
    /// Monte Carlo cross-validation of the closed forms
    McValidate(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// JSON configuration file
    #[arg(long)]
    config: PathBuf,
    /// Output path (CSV; JSON for mc-validate). A `<out>.config.json`
    /// sidecar records the resolved configuration.
    #[arg(long)]
    out: PathBuf,
    /// Override the Monte Carlo seed from the config
    #[arg(long)]
    seed: Option<u64>,
    /// Override the Monte Carlo observation count from the config
    #[arg(long)]
    samples: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version arrive here as non-error displays
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::RhoSweep(args) => {
            let spec = parse_config(&args.config)?;
            let rows = sweep::run_rho_sweep(&spec)?;
            write_rho_csv(&args.out, &rows)?;
            write_sidecar(&args.out, "rho-sweep", &spec)
        }
        Command::SkcSweep(args) => {
            let spec = parse_config(&args.config)?;
            let rows = sweep::run_skc_sweep(&spec)?;
            write_skc_csv(&args.out, &spec, &rows)?;
            write_sidecar(&args.out, "skc-sweep", &spec)
        }
        Command::Distance(args) => {
            let spec = parse_config(&args.config)?;
            let rows = solve_distances(&spec)?;
            write_distance_csv(&args.out, &spec, &rows)?;
            write_sidecar(&args.out, "distance", &spec)
        }
        Command::McValidate(args) => {
            let spec = parse_config(&args.config)?;
            let output = sweep::run_mc_validate(&spec, args.seed, args.samples)?;
            let json = serde_json::to_string_pretty(&output)
                .map_err(|e| CliError::Numerical(format!("report serialization: {e}")))?;
            std::fs::write(&args.out, json.as_bytes())
                .map_err(|e| CliError::Config(format!("cannot write output: {e}")))?;
            write_sidecar(&args.out, "mc-validate", &spec)?;
            if output.all_pass {
                Ok(())
            } else {
                Err(CliError::Validation(
                    "Monte Carlo validation failed; see the report for per-quantity detail"
                        .to_string(),
                ))
            }
        }
    }
}

fn write_sidecar(out: &Path, command: &str, spec: &SweepSpec) -> Result<(), CliError> {
    let resolved = ResolvedConfig::new(command, spec);
    let json = serde_json::to_string_pretty(&resolved)
        .map_err(|e| CliError::Numerical(format!("sidecar serialization: {e}")))?;
    let mut path = out.as_os_str().to_owned();
    path.push(".config.json");
    std::fs::write(PathBuf::from(path), json.as_bytes())
        .map_err(|e| CliError::Config(format!("cannot write sidecar: {e}")))
}

fn write_rho_csv(out: &Path, rows: &[RhoRow]) -> Result<(), CliError> {
    let header: Vec<String> = ["spectrum", "distance_wl", "distance_m", "rho_abs", "rho_arg", "status"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.spectrum.clone(),
                fmt_f64(r.distance_wl),
                fmt_f64(r.distance_m),
                fmt_f64(r.rho_abs),
                fmt_f64(r.rho_arg),
                r.status.clone(),
            ]
        })
        .collect();
    write_csv(out, &header, &cells).map_err(|e| CliError::Config(format!("cannot write output: {e}")))
}

fn write_skc_csv(out: &Path, spec: &SweepSpec, rows: &[SkcRow]) -> Result<(), CliError> {
    let mut header = vec!["spectrum".to_string(), "distance_wl".to_string(), "distance_m".to_string()];
    if spec.outputs.rho {
        header.push("rho_abs".to_string());
        header.push("rho_arg".to_string());
    }
    if spec.outputs.bounds {
        for name in ["i_xy", "i_xz", "i_yz", "i_xy_given_z", "lower_bound", "upper_bound"] {
            header.push(name.to_string());
        }
    }
    if spec.outputs.threshold {
        header.push("nz_threshold".to_string());
        header.push("rho_sq_max".to_string());
    }
    header.push("status".to_string());

    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut row = vec![r.spectrum.clone(), fmt_f64(r.distance_wl), fmt_f64(r.distance_m)];
            if spec.outputs.rho {
                row.push(fmt_f64(r.rho_abs));
                row.push(fmt_f64(r.rho_arg));
            }
            if spec.outputs.bounds {
                match &r.report {
                    Some(rep) => {
                        row.push(fmt_f64(rep.i_xy));
                        row.push(fmt_f64(rep.i_xz));
                        row.push(fmt_f64(rep.i_yz));
                        row.push(fmt_f64(rep.i_xy_given_z));
                        row.push(fmt_f64(rep.lower_bound));
                        row.push(fmt_f64(rep.upper_bound));
                    }
                    None => {
                        for _ in 0..6 {
                            row.push(fmt_f64(f64::NAN));
                        }
                    }
                }
            }
            if spec.outputs.threshold {
                row.push(fmt_f64(r.nz_threshold));
                row.push(fmt_f64(r.rho_sq_max));
            }
            row.push(r.status.clone());
            row
        })
        .collect();
    write_csv(out, &header, &cells).map_err(|e| CliError::Config(format!("cannot write output: {e}")))
}

fn solve_distances(spec: &SweepSpec) -> Result<Vec<(String, DistanceSolution)>, CliError> {
    let mut rows = Vec::new();
    for (label, spectrum) in &spec.spectra {
        let lb_at = sweep::lb_of_distance(spec, spectrum);
        let sol = sweep::solve_admissible_distance(
            &lb_at,
            &spec.criterion,
            spec.grid_start,
            spec.grid_stop,
        )?;
        rows.push((label.clone(), sol));
    }
    Ok(rows)
}

fn write_distance_csv(
    out: &Path,
    spec: &SweepSpec,
    rows: &[(String, DistanceSolution)],
) -> Result<(), CliError> {
    let header: Vec<String> = [
        "spectrum",
        "criterion",
        "target_bits",
        "status",
        "distance_wl",
        "distance_m",
        "lb_bits",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    let (crit_name, target) = match spec.criterion {
        config::CriterionConfig::PositiveLb => ("positive_lb", 0.0),
        config::CriterionConfig::LbAtLeast { bits } => ("lb_at_least", bits),
    };
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|(label, sol)| {
            vec![
                label.clone(),
                crit_name.to_string(),
                fmt_f64(target),
                if sol.achievable { "ok" } else { "unachievable" }.to_string(),
                fmt_f64(sol.distance_wl),
                fmt_f64(sol.distance_wl * spec.scenario.wavelength),
                fmt_f64(sol.lb_bits),
            ]
        })
        .collect();
    write_csv(out, &header, &cells).map_err(|e| CliError::Config(format!("cannot write output: {e}")))
}
