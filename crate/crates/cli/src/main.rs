//! `telsim`: run teleportation protocol simulations from the command line.
//!
//! Exit codes: 0 on success, 1 for configuration problems, 2 for internal
//! invariant violations (a detector pattern that cannot occur behind a
//! calibrated splitter, or disagreeing heralded branches).

mod render;

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;
use std::path::PathBuf;
use std::process::ExitCode;

use telsim_core::{
    run_event_ready, run_exact, run_sampled, run_sequential_swap, Comparison, Error, InputSpec,
    ProtocolConfig, RunMode, RunReport,
};

const USAGE: &str = "\
telsim - linear-optics teleportation simulator

USAGE:
  telsim <COMMAND> [FLAGS]

COMMANDS:
  teleport       Run the direct scheme (exact enumeration or sampling)
  event-ready    Run the heralded-source variant (one particle, exact)
  compare-swap   Compare the direct scheme against two sequential Bell
                 measurements (one particle)

FLAGS:
  --n N              Number of entangled input particles (default: 1)
  --alpha-re X       Real part of the first input amplitude (default: 1/sqrt(2))
  --alpha-im X       Imaginary part of the first input amplitude (default: 0)
  --beta-re X        Real part of the second input amplitude (default: 1/sqrt(2))
  --beta-im X        Imaginary part of the second input amplitude (default: 0)
  --alpha X          Shorthand for --alpha-re X with zero imaginary part
  --beta X           Shorthand for --beta-re X with zero imaginary part
  --mode exact|sample   Outcome mode (default: exact)
  --shots N          Monte Carlo shots for --mode sample (default: 100000)
  --seed N           Master seed for sampling (default: 1)
  --format json|csv  Machine-readable report format
  --out PATH         Write the report to PATH instead of stdout
  --help             Show this help

Amplitudes are normalized automatically; a deviation beyond 1e-6 is recorded
as a warning in the report. Detector labels follow the usual convention in
reports: D11/D12/D21/D22 for one particle, D1..D6 for two, DG*/DH* for the
heralding stage.

EXIT CODES:
  0 success, 1 configuration error, 2 internal invariant violation
";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    Teleport,
    EventReady,
    CompareSwap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone)]
struct CliConfig {
    command: Command,
    particles: u32,
    alpha: Complex64,
    beta: Complex64,
    mode: RunMode,
    seed: u64,
    format: Option<Format>,
    out: Option<PathBuf>,
    explicit_n: bool,
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.iter().any(|a| a == "--help" || a == "-h") {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let config = match parse(&args) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            eprintln!("run `telsim --help` for usage");
            return ExitCode::from(1);
        }
    };
    match execute(&config) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Config(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
        Err(other) => {
            eprintln!("internal error: {other}");
            ExitCode::from(2)
        }
    }
}

fn parse(args: &[String]) -> Result<CliConfig, String> {
    let mut iter = args.iter().peekable();
    let command = match iter.next().map(String::as_str) {
        Some("teleport") => Command::Teleport,
        Some("event-ready") => Command::EventReady,
        Some("compare-swap") => Command::CompareSwap,
        Some(other) => return Err(format!("unknown command `{other}`")),
        None => return Err("missing command".into()),
    };

    let mut config = CliConfig {
        command,
        particles: 1,
        alpha: Complex64::new(FRAC_1_SQRT_2, 0.0),
        beta: Complex64::new(FRAC_1_SQRT_2, 0.0),
        mode: RunMode::Exact,
        seed: 1,
        format: None,
        out: None,
        explicit_n: false,
    };
    let mut shots: u64 = 100_000;
    let mut sample_mode = false;

    while let Some(flag) = iter.next() {
        let (name, inline_value) = match flag.split_once('=') {
            Some((name, value)) => (name, Some(value.to_string())),
            None => (flag.as_str(), None),
        };
        let mut value = || -> Result<String, String> {
            if let Some(v) = &inline_value {
                return Ok(v.clone());
            }
            iter.next()
                .cloned()
                .ok_or_else(|| format!("flag `{name}` needs a value"))
        };
        match name {
            "--n" => {
                config.particles = parse_number(&value()?, "--n")?;
                config.explicit_n = true;
            }
            "--alpha-re" => config.alpha.re = parse_number(&value()?, "--alpha-re")?,
            "--alpha-im" => config.alpha.im = parse_number(&value()?, "--alpha-im")?,
            "--beta-re" => config.beta.re = parse_number(&value()?, "--beta-re")?,
            "--beta-im" => config.beta.im = parse_number(&value()?, "--beta-im")?,
            "--alpha" => {
                config.alpha = Complex64::new(parse_number(&value()?, "--alpha")?, 0.0);
            }
            "--beta" => {
                config.beta = Complex64::new(parse_number(&value()?, "--beta")?, 0.0);
            }
            "--mode" => match value()?.as_str() {
                "exact" => sample_mode = false,
                "sample" => sample_mode = true,
                other => return Err(format!("unknown mode `{other}` (exact|sample)")),
            },
            "--shots" => shots = parse_number(&value()?, "--shots")?,
            "--seed" => config.seed = parse_number(&value()?, "--seed")?,
            "--format" => match value()?.as_str() {
                "json" => config.format = Some(Format::Json),
                "csv" => config.format = Some(Format::Csv),
                other => return Err(format!("unknown format `{other}` (json|csv)")),
            },
            "--out" => config.out = Some(PathBuf::from(value()?)),
            other => return Err(format!("unknown flag `{other}`")),
        }
    }

    if sample_mode {
        config.mode = RunMode::MonteCarlo { shots };
    }
    Ok(config)
}

fn parse_number<T: std::str::FromStr>(text: &str, flag: &str) -> Result<T, String> {
    text.parse()
        .map_err(|_| format!("cannot parse `{text}` for {flag}"))
}

fn execute(cli: &CliConfig) -> telsim_core::Result<()> {
    let mut warnings = Vec::new();
    let (alpha, beta) = normalize_input(cli.alpha, cli.beta, &mut warnings)?;

    match cli.command {
        Command::Teleport => {
            let input = InputSpec::new(alpha, beta, cli.particles)?;
            let config = ProtocolConfig {
                particles: cli.particles,
                input,
                mode: cli.mode,
                event_ready: false,
                seed: cli.seed,
                comparison: None,
            };
            let mut report = match cli.mode {
                RunMode::Exact => run_exact(&config)?,
                RunMode::MonteCarlo { .. } => run_sampled(&config)?,
            };
            report.warnings.extend(warnings);
            emit_report(cli, &report, false)
        }
        Command::EventReady => {
            if cli.explicit_n && cli.particles != 1 {
                return Err(Error::Config(
                    "the event-ready variant runs with one particle (--n 1)".into(),
                ));
            }
            let input = InputSpec::new(alpha, beta, 1)?;
            let config = ProtocolConfig {
                particles: 1,
                input,
                mode: cli.mode,
                event_ready: true,
                seed: cli.seed,
                comparison: None,
            };
            let mut report = run_event_ready(&config)?;
            report.warnings.extend(warnings);
            emit_report(cli, &report, true)
        }
        Command::CompareSwap => {
            if cli.explicit_n && cli.particles != 1 {
                return Err(Error::Config(
                    "the sequential-swap comparison runs with one particle (--n 1)".into(),
                ));
            }
            let input = InputSpec::new(alpha, beta, 1)?;
            let config = ProtocolConfig {
                particles: 1,
                input,
                mode: cli.mode,
                event_ready: false,
                seed: cli.seed,
                comparison: Some(Comparison::SequentialSwap),
            };
            let mut direct = match cli.mode {
                RunMode::Exact => run_exact(&config)?,
                RunMode::MonteCarlo { .. } => run_sampled(&config)?,
            };
            direct.warnings.extend(warnings);
            let sequential = run_sequential_swap(&config)?;

            let map = render::detector_display_map(1, false);
            let direct_view = render::with_display_names(&direct, &map);
            let sequential_view = render::with_display_names(&sequential, &map);

            let document = match cli.format {
                Some(Format::Json) | None => {
                    serde_json::to_string_pretty(&render::comparison_json(
                        &direct_view,
                        &sequential_view,
                    ))
                    .expect("comparison serialization")
                        + "\n"
                }
                Some(Format::Csv) => {
                    let mut text = render::csv(&direct_view);
                    text.push_str(&render::csv(&sequential_view));
                    text
                }
            };
            let table = render::comparison_table(&direct_view, &sequential_view);
            write_outputs(cli, &table, &document, cli.format.is_some())
        }
    }
}

fn normalize_input(
    alpha: Complex64,
    beta: Complex64,
    warnings: &mut Vec<String>,
) -> telsim_core::Result<(Complex64, Complex64)> {
    let norm_sqr = alpha.norm_sqr() + beta.norm_sqr();
    if norm_sqr < 1e-24 {
        return Err(Error::Config("input amplitudes are both zero".into()));
    }
    if (norm_sqr - 1.0).abs() > 1e-6 {
        warnings.push(format!(
            "input amplitudes renormalized (|α|²+|β|² was {norm_sqr})"
        ));
    }
    let norm = norm_sqr.sqrt();
    Ok((alpha / norm, beta / norm))
}

fn emit_report(cli: &CliConfig, report: &RunReport, event_ready: bool) -> telsim_core::Result<()> {
    let map = render::detector_display_map(report.config.particles, event_ready);
    let view = render::with_display_names(report, &map);
    let document = match cli.format {
        Some(Format::Csv) => render::csv(&view),
        _ => view.to_json() + "\n",
    };
    let table = render::table(&view);
    write_outputs(cli, &table, &document, cli.format.is_some())
}

/// The summary table goes to stdout. With `--out` the machine document goes
/// to the file; with `--format` alone it goes to stdout and the table moves
/// to stderr so the output stays parseable.
fn write_outputs(
    cli: &CliConfig,
    table: &str,
    document: &str,
    format_requested: bool,
) -> telsim_core::Result<()> {
    match (&cli.out, format_requested) {
        (Some(path), _) => {
            std::fs::write(path, document).map_err(|e| {
                Error::Config(format!("cannot write report to {}: {e}", path.display()))
            })?;
            print!("{table}");
            println!("report written to {}", path.display());
        }
        (None, true) => {
            eprint!("{table}");
            print!("{document}");
        }
        (None, false) => {
            print!("{table}");
        }
    }
    Ok(())
}
