use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fourlevel::config::{parse_config, RunConfig, SweepKind};
use fourlevel::presets::{preset, with_amplitude, PRESET_NAMES};
use fourlevel::propagation::{ControlSource, FieldId, PumpMode};
use fourlevel::run::{run_to_dir, SIDECAR_NAME};

/// Four-level atom simulator: spectra, switching, cavity bistability,
/// pulse transmission and SA/RSA curves.
#[derive(Parser)]
#[command(name = "simulate", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Probe transmission versus probe detuning.
    Spectrum(RunArgs),
    /// Probe transmission versus control intensity.
    Switch(RunArgs),
    /// Ring-cavity input-output curve and bistability thresholds.
    Cavity(RunArgs),
    /// Gaussian pulse through the medium.
    Pulse(RunArgs),
    /// Transmission versus probe intensity with the control off and on.
    SaRsa(RunArgs),
    /// Steady-state density matrix at the entry fields.
    SteadyState(RunArgs),
    /// List the built-in presets.
    Presets,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceArg {
    Rho43,
    Rho42,
}

#[derive(Clone, Copy, ValueEnum)]
enum PumpArg {
    Fixed,
    Depleted,
}

#[derive(Args)]
struct RunArgs {
    /// Built-in parameter set (see `simulate presets`).
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory (default: the config's `output`, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long)]
    threads: Option<usize>,
    /// Spatial integration steps.
    #[arg(long)]
    steps: Option<usize>,
    /// Coupling amplitude G₁ in units of γ.
    #[arg(long)]
    g1: Option<f64>,
    /// Probe amplitude G₂ (or g) in units of γ.
    #[arg(long)]
    g2: Option<f64>,
    /// Control amplitude G in units of γ.
    #[arg(long)]
    g: Option<f64>,
    /// Coherence sourcing the Y-type control equation.
    #[arg(long, value_enum)]
    control_source: Option<SourceArg>,
    /// Whether coupling and control propagate.
    #[arg(long, value_enum)]
    pumps: Option<PumpArg>,
    /// Print the effective config and exit.
    #[arg(long)]
    print_config: bool,
}

fn load(kind: SweepKind, args: &RunArgs) -> Result<RunConfig, String> {
    let mut config = match (&args.preset, &args.config) {
        (Some(name), _) => {
            let c = preset(name).ok_or_else(|| {
                format!(
                    "unknown preset `{name}`; available: {}",
                    PRESET_NAMES.join(", ")
                )
            })?;
            if c.sweep.kind != kind && kind != SweepKind::SteadyState {
                return Err(format!(
                    "preset `{name}` is a {} preset, not {}",
                    c.sweep.kind.name(),
                    kind.name()
                ));
            }
            c
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
            parse_config(&text).map_err(|e| e.to_string())?
        }
        (None, None) => return Err("either --preset or --config is required".into()),
    };
    config.sweep.kind = kind;
    for (field, value) in [
        (FieldId::Coupling, args.g1),
        (FieldId::Probe, args.g2),
        (FieldId::Control, args.g),
    ] {
        if let Some(v) = value {
            config = with_amplitude(config, field, v);
        }
    }
    if let Some(steps) = args.steps {
        config.medium.steps = steps;
    }
    if let Some(s) = args.control_source {
        config.medium.ytype_control_source = match s {
            SourceArg::Rho43 => ControlSource::Rho43,
            SourceArg::Rho42 => ControlSource::Rho42,
        };
    }
    if let Some(p) = args.pumps {
        config.medium.pumps = match p {
            PumpArg::Fixed => PumpMode::Fixed,
            PumpArg::Depleted => PumpMode::Depleted,
        };
    }
    config.validate().map_err(|e| e.to_string())?;
    Ok(config)
}

fn execute(kind: SweepKind, args: RunArgs) -> ExitCode {
    let config = match load(kind, &args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if args.print_config {
        println!("{}", config.to_json());
        return ExitCode::SUCCESS;
    }
    let dir = args
        .out
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    match run_to_dir(&config, &dir, args.threads) {
        Ok(report) => {
            println!("wrote {}", dir.join(&report.artifact.file_name).display());
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("details in {}", dir.join(SIDECAR_NAME).display());
            ExitCode::FAILURE
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match cli.command {
        Command::Spectrum(a) => (SweepKind::Spectrum, a),
        Command::Switch(a) => (SweepKind::Switch, a),
        Command::Cavity(a) => (SweepKind::Cavity, a),
        Command::Pulse(a) => (SweepKind::Pulse, a),
        Command::SaRsa(a) => (SweepKind::SaRsa, a),
        Command::SteadyState(a) => (SweepKind::SteadyState, a),
        Command::Presets => {
            for name in PRESET_NAMES {
                let c = preset(name).expect("listed preset exists");
                println!("{name:<12} {:<8} {}", c.scheme.name(), c.sweep.kind.name());
            }
            return ExitCode::SUCCESS;
        }
    };
    execute(kind, args)
}
