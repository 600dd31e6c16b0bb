//! The `evolve`, `replay` and `export-dot` commands.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::dot::to_dot;
use crate::env::{EnvSpec, Environment};
use crate::error::{CgpError, EnvError};
use crate::evolution::{run_episode, run_evolution, Parallelism, PIXEL_INPUTS};
use crate::graph::Genome;
use crate::persist::{parse_genome, write_genome, RunConfig};
use crate::value::Value;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_ENV: i32 = 3;
pub const EXIT_GENOME: i32 = 4;

pub const BEST_FILE: &str = "best.cgp";
pub const LOG_FILE: &str = "log.txt";
pub const SUMMARY_FILE: &str = "summary.txt";

#[derive(Debug, Parser)]
#[command(
    name = "cgp",
    version,
    about = "Evolve and inspect CGP game controllers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run 1+λ evolution and write best.cgp, log.txt and summary.txt
    Evolve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        env: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Play one episode with a saved genome
    Replay {
        genome: PathBuf,
        #[arg(long)]
        env: Option<String>,
        /// Evaluation seed, as reported in summary.txt
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Frame-skip and frame-cap settings; defaults apply without one
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print every active node's output after each frame
        #[arg(long)]
        trace: bool,
    },
    /// Print the active graph in Graphviz DOT format
    ExportDot { genome: PathBuf },
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{e}");
                return EXIT_CONFIG;
            }
            let _ = write!(out, "{e}");
            return EXIT_OK;
        }
    };
    let result = match cli.command {
        Command::Evolve {
            config,
            seed,
            env,
            out: out_dir,
        } => evolve(&config, seed, env, out_dir, out),
        Command::Replay {
            genome,
            env,
            seed,
            config,
            trace,
        } => replay(&genome, env, seed, config.as_deref(), trace, out),
        Command::ExportDot { genome } => {
            load_genome(&genome).and_then(|g| write_out(out, &to_dot(&g.decode())))
        }
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(failure) => {
            let _ = writeln!(err, "error: {}", failure.message);
            failure.code
        }
    }
}

/// Error message paired with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

fn fail(code: i32, message: impl ToString) -> Failure {
    Failure {
        code,
        message: message.to_string(),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), Failure> {
    out.write_all(text.as_bytes())
        .map_err(|e| fail(EXIT_ENV, format!("writing output: {e}")))
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| fail(EXIT_CONFIG, format!("{}: {e}", path.display())))?;
    RunConfig::parse(&text).map_err(|e| fail(EXIT_CONFIG, format!("{}: {e}", path.display())))
}

fn load_genome(path: &Path) -> Result<Genome, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| fail(EXIT_GENOME, format!("{}: {e}", path.display())))?;
    parse_genome(&text).map_err(|e| fail(EXIT_GENOME, format!("{}: {e}", path.display())))
}

fn env_failure(e: impl ToString) -> Failure {
    fail(EXIT_ENV, e)
}

fn run_error(e: CgpError) -> Failure {
    match e {
        CgpError::ActionCount { .. } | CgpError::InputCount { .. } => fail(EXIT_GENOME, e),
        _ => env_failure(e),
    }
}

fn evolve(
    config_path: &Path,
    seed: Option<u64>,
    env: Option<String>,
    out_dir: Option<PathBuf>,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let mut config = load_config(config_path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if let Some(env) = env {
        config.env = env;
    }
    if let Some(dir) = out_dir {
        config.out_dir = dir;
    }
    let spec = EnvSpec::parse(&config.env).map_err(|e| fail(EXIT_CONFIG, e))?;
    let bridge = config.bridge_config();
    if matches!(spec, EnvSpec::Ale { .. }) && bridge.is_none() {
        return Err(fail(
            EXIT_CONFIG,
            EnvError::MissingBridgeConfig(config.env.clone()),
        ));
    }
    let n_actions = spec
        .build(bridge.as_ref())
        .map_err(env_failure)?
        .n_actions();
    let evo = config.evolution_config(n_actions);
    let factory = || spec.build(bridge.as_ref());
    let state = run_evolution(&evo, &factory, Parallelism::Parallel).map_err(env_failure)?;

    fs::create_dir_all(&config.out_dir).map_err(env_failure)?;
    let log: String = state.log.iter().map(|r| format!("{r}\n")).collect();
    let summary = format!(
        "best {} evals {}",
        state.elite_fitness, state.evaluations_used
    );
    let files = [
        (BEST_FILE, write_genome(&state.elite)),
        (LOG_FILE, log),
        (
            SUMMARY_FILE,
            format!("{summary}\neval_seed {}\n", state.elite_eval_seed),
        ),
    ];
    for (name, contents) in files {
        let path = config.out_dir.join(name);
        fs::write(&path, contents).map_err(|e| env_failure(format!("{}: {e}", path.display())))?;
    }
    write_out(out, &format!("{summary}\n"))
}

fn describe(value: &Value) -> String {
    match value {
        Value::Scalar(s) => format!("{s}"),
        Value::Matrix(m) => format!("matrix {}x{} mean {}", m.rows(), m.cols(), m.mean()),
    }
}

fn replay(
    genome_path: &Path,
    env: Option<String>,
    seed: u64,
    config_path: Option<&Path>,
    trace: bool,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    let genome = load_genome(genome_path)?;
    let config = match config_path {
        Some(p) => load_config(p)?,
        None => RunConfig::default(),
    };
    let env_name = env.unwrap_or_else(|| config.env.clone());
    let spec = EnvSpec::parse(&env_name).map_err(|e| fail(EXIT_CONFIG, e))?;
    let mut environment = spec
        .build(config.bridge_config().as_ref())
        .map_err(env_failure)?;
    if genome.n_input() != PIXEL_INPUTS || genome.n_output() != environment.n_actions() {
        return Err(fail(
            EXIT_GENOME,
            format!(
                "genome has {} inputs and {} outputs; `{env_name}` needs {PIXEL_INPUTS} inputs and {} outputs",
                genome.n_input(),
                genome.n_output(),
                environment.n_actions()
            ),
        ));
    }
    let mut program = genome.decode();
    let settings = config.eval_settings();
    let mut text = String::new();
    let summary = run_episode(
        &mut program,
        &mut environment,
        &settings,
        seed,
        0,
        |event, program| {
            text.push_str(&format!(
                "frame {} action {} reward {}\n",
                event.frame, event.action, event.reward
            ));
            if trace {
                for i in program.active_nodes() {
                    let label = match program.node(i) {
                        Some(node) => node.function.name(),
                        None => "INPUT",
                    };
                    text.push_str(&format!(
                        "  node {i} {label} {}\n",
                        describe(program.state(i))
                    ));
                }
            }
        },
    )
    .map_err(run_error)?;
    text.push_str(&format!("total {}\n", summary.total_reward));
    write_out(out, &text)
}
