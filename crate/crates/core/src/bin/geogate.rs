use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use geogate::experiments::{
    emit_results, run_fig3_sweep, run_gate_suite, run_prep_check, run_tomography, ExperimentConfig, GateKind,
    OutputFormat,
};
use geogate::sequence::{compile_sequence, parse_sequence, parse_sequence_file, pretty_print};
use geogate::spin::{FrameSpec, NoiseConfig};
use geogate::Error;

#[derive(Parser, Debug)]
#[command(name = "geogate", version, about = "Two-spin NMR simulator for unconventional geometric gates")]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured RNG seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Gate {
    U1,
    U2,
    Uc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Frame {
    OnResonance,
    ConditionalB,
    SingleA,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Interferometer phase over the θ grid for both loop variants.
    Fig3Sweep {
        /// Output file; falls back to the config's [output] table, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
        /// Enable T2 dephasing (and any configured pulse error).
        #[arg(long)]
        noise: bool,
    },
    /// Pseudo-pure preparation from the thermal state.
    PrepCheck,
    /// Fidelities of the three compiled gate procedures.
    GateSuite {
        #[arg(long)]
        noise: bool,
    },
    /// Process tomography of one compiled gate.
    Tomo {
        #[arg(long, value_enum)]
        gate: Gate,
        #[arg(long)]
        noise: bool,
    },
    /// Parse, pretty-print and compile a pulse sequence.
    Sequence {
        /// Inline sequence text.
        #[arg(conflicts_with = "file", required_unless_present = "file")]
        text: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "on-resonance")]
        frame: Frame,
        /// Symbol bindings such as `theta=0.5`.
        #[arg(long = "bind", value_parser = parse_binding)]
        bindings: Vec<(String, f64)>,
    },
}

fn parse_binding(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("bad value in `{s}`: {e}"))?;
    Ok((k.trim().to_string(), v))
}

/// Writes to stdout; a closed pipe ends output quietly.
fn emit(text: &str) -> geogate::Result<()> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|()| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn print_json<T: Serialize>(value: &T) -> geogate::Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn load_config(cli: &Cli) -> geogate::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::from_file(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn noisy(cfg: ExperimentConfig, noise: bool) -> ExperimentConfig {
    if noise {
        cfg.with_noise()
    } else {
        cfg
    }
}

#[derive(Serialize)]
struct SequenceSummary {
    canonical: String,
    total_duration_s: f64,
    events: usize,
    /// Row-major `[re, im]` entries, absent when the program is not unitary.
    net_unitary: Option<Vec<Vec<[f64; 2]>>>,
}

fn run(cli: Cli) -> geogate::Result<()> {
    let cfg = load_config(&cli)?;
    log::debug!("config: {cfg:?}");
    match cli.command {
        Command::Fig3Sweep { out, format, noise } => {
            let cfg = noisy(cfg, noise);
            let result = run_fig3_sweep(&cfg)?;
            log::info!(
                "fit: alpha_g = {}, eta = {}, max residual = {:e}",
                result.fit.alpha_g,
                result.fit.eta,
                result.fit.max_residual
            );
            let format = match format {
                Some(Format::Csv) => OutputFormat::Csv,
                Some(Format::Json) => OutputFormat::Json,
                None => cfg.output.as_ref().map_or(OutputFormat::Csv, |o| o.format),
            };
            match out.or_else(|| cfg.output.as_ref().map(|o| o.path.clone())) {
                Some(path) => {
                    emit_results(&result.records, &path, format)?;
                    print_json(&result.fit)?;
                }
                None => match format {
                    OutputFormat::Csv => emit(&geogate::experiments::render_csv(&result.records))?,
                    OutputFormat::Json => emit(&geogate::experiments::render_json(&result.records)?)?,
                },
            }
        }
        Command::PrepCheck => print_json(&run_prep_check(&cfg)?)?,
        Command::GateSuite { noise } => print_json(&run_gate_suite(&noisy(cfg, noise))?)?,
        Command::Tomo { gate, noise } => {
            let gate = match gate {
                Gate::U1 => GateKind::U1,
                Gate::U2 => GateKind::U2,
                Gate::Uc => GateKind::Uc,
            };
            print_json(&run_tomography(gate, &noisy(cfg, noise))?)?
        }
        Command::Sequence { text, file, frame, bindings } => {
            let ast = match (text, file) {
                (Some(t), _) => parse_sequence(&t)?,
                (None, Some(f)) => parse_sequence_file(&f)?,
                (None, None) => unreachable!("clap requires one source"),
            };
            let sys = cfg.system;
            let frame = match frame {
                Frame::OnResonance => FrameSpec::on_resonance(),
                Frame::ConditionalB => FrameSpec::conditional_b(&sys),
                Frame::SingleA => FrameSpec::single_qubit_a(&sys),
            };
            let bindings: HashMap<String, f64> = bindings.into_iter().collect();
            let prog = compile_sequence(&ast, &sys, &frame, &bindings)?;
            let net_unitary = match prog.net_unitary(&sys, &NoiseConfig::none()) {
                Ok(u) => Some(
                    (0..4).map(|r| (0..4).map(|c| [u.matrix()[(r, c)].re, u.matrix()[(r, c)].im]).collect()).collect(),
                ),
                Err(Error::NonUnitaryEvent) => None,
                Err(e) => return Err(e),
            };
            print_json(&SequenceSummary {
                canonical: pretty_print(&ast),
                total_duration_s: prog.total_duration(),
                events: prog.events().len(),
                net_unitary,
            })?
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_check_failure() { 2 } else { 1 })
        }
    }
}
