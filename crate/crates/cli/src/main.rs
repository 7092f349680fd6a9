use std::path::{Path, PathBuf};
use std::process::ExitCode;

use carpenter_cli::commands::{demo_problem, DEFAULT_GRID};
use carpenter_cli::{
    cmd_check, cmd_construct, cmd_demo, cmd_export, cmd_verify, CliError, Outcome, Overrides,
    Problem, RunConfig, EXIT_IO,
};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "carpenter",
    version,
    about = "Realize prescribed diagonals by chains of 2x2 rotations"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct ProblemArgs {
    /// Run configuration (JSON).
    #[arg(long, value_name = "PATH", conflicts_with = "demo")]
    config: Option<PathBuf>,
    /// Use a built-in demo problem instead of a config.
    #[arg(long, value_name = "NAME")]
    demo: Option<String>,
    #[arg(long, value_name = "N")]
    window: Option<usize>,
    /// Cap on the number of moves of any single chain.
    #[arg(long, value_name = "N")]
    steps: Option<usize>,
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    #[command(flatten)]
    tol: TolArgs,
}

#[derive(Args, Clone, Default)]
struct TolArgs {
    #[arg(long = "tol-gram", value_name = "X")]
    gram: Option<f64>,
    #[arg(long = "tol-diag", value_name = "X")]
    diag: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate majorization and the declared tail regime.
    Check(ProblemArgs),
    /// Build the orthonormal family and write a result directory.
    Construct(ProblemArgs),
    /// Re-verify a result directory.
    Verify {
        #[arg(value_name = "DIR")]
        dir: PathBuf,
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[command(flatten)]
        tol: TolArgs,
    },
    /// Run a named demo (neumann-dirichlet, sine-cosine-table).
    Demo {
        #[arg(value_name = "NAME", required_unless_present = "demo")]
        name: Option<String>,
        #[arg(long, value_name = "N", default_value_t = DEFAULT_GRID)]
        grid: usize,
        #[command(flatten)]
        args: ProblemArgs,
    },
    /// Write a self-contained config with all sequences inline.
    Export(ProblemArgs),
}

impl ProblemArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            window: self.window,
            steps: self.steps,
            tol_gram: self.tol.gram,
            tol_diag: self.tol.diag,
            seed: self.seed,
            out: self.out.clone(),
        }
    }

    fn problem(&self) -> Result<Problem, CliError> {
        let ov = self.overrides();
        match (&self.config, &self.demo) {
            (Some(path), _) => {
                let base = path.parent().unwrap_or(Path::new("."));
                RunConfig::load(path)?.resolve(base, &ov)
            }
            (None, Some(name)) => demo_problem(name, &ov),
            (None, None) => Err(CliError::Format(
                "either --config or --demo is required".into(),
            )),
        }
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Check(a) => cmd_check(&a.problem()?),
        Command::Construct(a) => cmd_construct(&a.problem()?),
        Command::Verify { dir, out, tol } => cmd_verify(
            &dir,
            &Overrides {
                tol_gram: tol.gram,
                tol_diag: tol.diag,
                out,
                ..Default::default()
            },
        ),
        Command::Demo { name, grid, args } => {
            let name = name.or_else(|| args.demo.clone()).unwrap_or_default();
            cmd_demo(&name, grid, &args.overrides())
        }
        Command::Export(a) => {
            let mut problem = a.problem()?;
            problem.output_dir = None;
            cmd_export(&problem, a.out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("CARPENTER_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_IO as u8 } else { 0 });
        }
    };
    let outcome = run(cli).unwrap_or_else(|e| {
        log::error!("{e}");
        Outcome {
            code: e.exit_code(),
            json: e.to_json(),
        }
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&outcome.json).expect("serializable")
    );
    ExitCode::from(outcome.code as u8)
}
