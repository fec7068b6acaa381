use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use mbm_cli::error::CliError;
use mbm_cli::{load_experiment, output, presets, report};
use mbm_core::complexity::FlopModelInput;

#[derive(Parser)]
#[command(
    name = "mbm",
    version,
    about = "MBM massive-MIMO detection experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a preset or a TOML experiment file.
    Run {
        /// Preset name (see `list-presets`) or path to a TOML file.
        target: String,
        /// CSV output path; CSV goes to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        max_frames: Option<u64>,
        /// Worker threads; 0 uses all cores.
        #[arg(long, env = "MBM_THREADS", default_value_t = 0)]
        threads: usize,
        /// Target BERs for the SNR-gap summary.
        #[arg(long, value_delimiter = ',', default_values_t = report::DEFAULT_TARGETS)]
        target_ber: Vec<f64>,
    },
    /// List the built-in presets.
    ListPresets,
    /// Print the closed-form FLOP models of a preset without simulating.
    Flops { preset: String },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            target,
            out,
            seed,
            max_frames,
            threads,
            target_ber,
        } => {
            let mut exp = load_experiment(&target)?;
            if let Some(seed) = seed {
                exp.set_seed(seed);
            }
            if let Some(m) = max_frames {
                if m == 0 {
                    return Err(CliError::Usage("--max-frames must be >= 1".into()));
                }
                exp.set_max_frames(m);
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
            eprintln!("running {} ({} system(s))", exp.name, exp.runs.len());
            let records = pool.install(|| exp.run())?;
            match &out {
                Some(path) => output::emit_csv(&records, path)?,
                None => output::write_csv(&records, std::io::stdout().lock())?,
            }
            let summary = report::report_summary(&records, &target_ber);
            if out.is_some() {
                print!("{summary}");
            } else {
                eprint!("{summary}");
            }
            Ok(())
        }
        Command::ListPresets => {
            let mut stdout = std::io::stdout().lock();
            for exp in presets::all() {
                let _ = writeln!(stdout, "{:<6} {}", exp.name, exp.note);
            }
            Ok(())
        }
        Command::Flops { preset } => {
            let exp = presets::preset(&preset).ok_or(CliError::UnknownTarget(preset))?;
            let mut stdout = std::io::stdout().lock();
            for run in &exp.runs {
                let m = &run.sweep.mbm;
                let _ = writeln!(
                    stdout,
                    "{}N_r={} U={} M={} |A|={}",
                    run.tag
                        .as_ref()
                        .map(|t| format!("{t}: "))
                        .unwrap_or_default(),
                    m.n_r(),
                    m.users(),
                    m.maps(),
                    m.constellation().len()
                );
                for det in &run.sweep.detectors {
                    let Some(model) = det.flop_model(m) else {
                        continue;
                    };
                    let cfg = det.configure(m)?;
                    let l = FlopModelInput::from_config(&cfg).iterations;
                    let _ = writeln!(
                        stdout,
                        "  {:<16} once {:>10}  per-iter {:>10}  total(L={l}) {:>11}",
                        det.label(),
                        model.once,
                        model.per_iter,
                        model.total(l)
                    );
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
