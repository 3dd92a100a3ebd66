//! `qig`: thermal-state metric scans, self-verification, and figure data.
//!
//! Exit codes: 0 success, 1 verification failure, 2 config error,
//! 3 I/O error, 4 numerical failure (degeneracy or solver breakdown).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qig::check::{all_passed, run_all, CheckConfig};
use qig::closed_form::{closed_form_flux, flux_ground_projector};
use qig::metrics::{fubini_study_metric, DEFAULT_FD_STEP};
use qig::scan::{
    format_float, render, run_scan, Engine, MetricSelection, OutputFormat, RangeSpec, ScanConfig,
    Threads,
};
use qig::Error;

#[derive(Parser)]
#[command(
    name = "qig",
    version,
    about = "Bures, Sjöqvist, Fisher-Rao, and Fubini-Study metrics over thermal-state manifolds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan a (beta, h) parameter grid and write metric tensors
    Scan(ScanArgs),
    /// Run the self-verification suites (engines vs oracles vs closed forms)
    Check(CheckArgs),
    /// Write the flux-qubit metric-discrepancy curves (beta in [0, 10],
    /// 201 points, for eps = 1, 1.25, 1.5 at hbar = 1, delta = 1)
    Fig2(Fig2Args),
    /// Write the flux-qubit zero-temperature limit table against the
    /// Fubini-Study values
    Limits(LimitsArgs),
}

#[derive(Args)]
struct ScanArgs {
    /// Model name: spin-z, spin-xz, flux-qubit, or generic
    #[arg(long)]
    model: Option<String>,
    /// JSON config file mirroring the scan configuration; flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Flux-qubit gap parameter
    #[arg(long)]
    delta: Option<f64>,
    /// Reduced Planck constant (natural units)
    #[arg(long)]
    hbar: Option<f64>,
    /// Fixed transverse field for spin-xz
    #[arg(long = "omega-x")]
    omega_x: Option<f64>,
    /// Inverse-temperature grid as start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<RangeSpec>,
    /// Tunable-parameter grid as start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    h: Option<RangeSpec>,
    /// Comma-separated subset of bures, sjoqvist, fisher-rao, both
    #[arg(long)]
    metrics: Option<String>,
    /// Engine: closed-form, general, or both
    #[arg(long)]
    engine: Option<Engine>,
    /// Step for finite-difference derivative checks
    #[arg(long = "fd-step")]
    fd_step: Option<f64>,
    /// Output file path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output format: csv or json
    #[arg(long)]
    format: Option<OutputFormat>,
    /// Worker threads: a count or auto
    #[arg(long)]
    threads: Option<Threads>,
    /// Tabulated-Hamiltonian JSON file for the generic model
    #[arg(long = "model-file")]
    model_file: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Seed for the sampled point sets
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Override every suite tolerance (sensitivity/negative-control runs)
    #[arg(long)]
    tol: Option<f64>,
    /// Finite-difference step for the engine cross-check
    #[arg(long = "fd-step", default_value_t = DEFAULT_FD_STEP)]
    fd_step: f64,
}

#[derive(Args)]
struct Fig2Args {
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LimitsArgs {
    /// Model; only flux-qubit has the tabulated limit
    #[arg(long, default_value = "flux-qubit")]
    model: String,
    /// Bias grid as start:stop:count
    #[arg(long, allow_hyphen_values = true)]
    h: RangeSpec,
    /// Flux-qubit gap parameter
    #[arg(long, default_value_t = 1.0)]
    delta: f64,
    /// Output CSV path
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for(&e))
        }
    }
}

fn exit_code_for(error: &Error) -> u8 {
    match error {
        Error::Config(_) => 2,
        Error::Io(_) => 3,
        _ => 4,
    }
}

fn run(cli: Cli) -> qig::Result<ExitCode> {
    match cli.command {
        Command::Scan(args) => cmd_scan(args),
        Command::Check(args) => cmd_check(args),
        Command::Fig2(args) => cmd_fig2(args),
        Command::Limits(args) => cmd_limits(args),
    }
}

fn parse_metrics(text: &str) -> qig::Result<Vec<MetricSelection>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::parse)
        .collect()
}

/// Builds the effective scan configuration: config file first (when given),
/// then flag overrides, then model-specific defaults for missing fixed
/// parameters.
fn build_scan_config(args: &ScanArgs) -> qig::Result<ScanConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            serde_json::from_str::<ScanConfig>(&text)
                .map_err(|e| Error::Config(format!("scan config {}: {e}", path.display())))?
        }
        None => ScanConfig {
            model: String::new(),
            fixed_params: BTreeMap::new(),
            beta_range: args
                .beta
                .ok_or_else(|| Error::Config("missing --beta range (or --config)".into()))?,
            h_range: args
                .h
                .ok_or_else(|| Error::Config("missing --h range (or --config)".into()))?,
            metrics: vec![MetricSelection::Both],
            engine: Engine::General,
            output_path: None,
            format: OutputFormat::Csv,
            fd_step: DEFAULT_FD_STEP,
            threads: Threads::Auto,
            model_file: None,
        },
    };

    if let Some(model) = &args.model {
        config.model = model.clone();
    }
    if config.model.is_empty() {
        return Err(Error::Config("missing --model (or --config)".into()));
    }
    if let Some(beta) = args.beta {
        config.beta_range = beta;
    }
    if let Some(h) = args.h {
        config.h_range = h;
    }
    if let Some(metrics) = &args.metrics {
        config.metrics = parse_metrics(metrics)?;
    }
    if let Some(engine) = args.engine {
        config.engine = engine;
    }
    if let Some(step) = args.fd_step {
        config.fd_step = step;
    }
    if let Some(out) = &args.out {
        config.output_path = Some(out.clone());
    }
    if let Some(format) = args.format {
        config.format = format;
    }
    if let Some(threads) = args.threads {
        config.threads = threads;
    }
    if let Some(model_file) = &args.model_file {
        config.model_file = Some(model_file.clone());
    }
    if let Some(hbar) = args.hbar {
        config.fixed_params.insert("hbar".into(), hbar);
    }
    if let Some(delta) = args.delta {
        config.fixed_params.insert("delta".into(), delta);
    }
    if let Some(omega_x) = args.omega_x {
        config.fixed_params.insert("omega_x".into(), omega_x);
    }
    // Paper defaults for required fixed parameters left unset.
    if config.model == "flux-qubit" {
        config.fixed_params.entry("delta".into()).or_insert(1.0);
    }
    if config.model == "spin-xz" {
        config.fixed_params.entry("omega_x".into()).or_insert(1.0);
    }

    config.validate()?;
    if config.output_path.is_none() {
        return Err(Error::Config("missing --out path".into()));
    }
    Ok(config)
}

/// Writes the fully rendered output in one call; a partially written file is
/// removed on failure.
fn write_output(path: &Path, text: &str) -> qig::Result<()> {
    if let Err(e) = std::fs::write(path, text) {
        let _ = std::fs::remove_file(path);
        return Err(e.into());
    }
    Ok(())
}

fn cmd_scan(args: ScanArgs) -> qig::Result<ExitCode> {
    let config = build_scan_config(&args)?;
    let rows = run_scan(&config)?;
    let text = render(&config, &rows)?;
    let path = config.output_path.as_ref().expect("validated above");
    write_output(path, &text)?;
    let degenerate = rows.iter().filter(|r| r.status == "degenerate").count();
    println!(
        "wrote {} rows ({} degenerate) to {}",
        rows.len(),
        degenerate,
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_check(args: CheckArgs) -> qig::Result<ExitCode> {
    if !(args.fd_step > 0.0 && args.fd_step <= 1e-1) {
        return Err(Error::Config(format!(
            "fd-step must lie in (0, 1e-1], got {}",
            args.fd_step
        )));
    }
    let config = CheckConfig {
        seed: args.seed,
        tol_override: args.tol,
        fd_step: args.fd_step,
    };
    let reports = run_all(&config)?;
    for report in &reports {
        println!(
            "[{}] {:<26} worst residual {:>12.5e} (tolerance {:.1e}) at {}",
            if report.passed { "PASS" } else { "FAIL" },
            report.name,
            report.worst_residual,
            report.tolerance,
            report.worst_case
        );
    }
    if all_passed(&reports) {
        println!("all {} suites passed (seed {})", reports.len(), args.seed);
        Ok(ExitCode::SUCCESS)
    } else {
        let failed = reports.iter().filter(|r| !r.passed).count();
        eprintln!("{failed} suite(s) failed");
        Ok(ExitCode::from(1))
    }
}

fn cmd_fig2(args: Fig2Args) -> qig::Result<ExitCode> {
    let betas = RangeSpec::new(0.0, 10.0, 201)?.values();
    let eps_values = [1.0, 1.25, 1.5];
    let mut text = String::from("beta,dg_eps1,dg_eps1_25,dg_eps1_5\n");
    for &beta in &betas {
        let mut fields = vec![format_float(beta)];
        for &eps in &eps_values {
            fields.push(format_float(qig::closed_form::discrepancy_nc(
                beta, eps, 1.0, 1.0,
            )?));
        }
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    write_output(&args.out, &text)?;
    println!("wrote {} rows to {}", betas.len(), args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_limits(args: LimitsArgs) -> qig::Result<ExitCode> {
    if args.model != "flux-qubit" {
        return Err(Error::Config(format!(
            "limits are tabulated for the flux-qubit model only, got '{}'",
            args.model
        )));
    }
    let mut text = String::from("eps,limit_hh,fs_value,ratio\n");
    for eps in args.h.values() {
        let limit = closed_form_flux(0.0, eps, args.delta, 1.0)?.beta_inf_limit_hh;
        let (rho_inf, drho_inf) = flux_ground_projector(args.delta, eps)?;
        let fs = fubini_study_metric(&rho_inf, &drho_inf)?;
        let fields = [
            format_float(eps),
            format_float(limit),
            format_float(fs),
            format_float(fs / limit),
        ];
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    write_output(&args.out, &text)?;
    println!("wrote {} rows to {}", args.h.count, args.out.display());
    Ok(ExitCode::SUCCESS)
}
