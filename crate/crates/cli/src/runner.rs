use std::io::Write;
use std::path::{Path, PathBuf};

use clap::Parser;
use ringlaw::rng::GENERATOR_ID;

use crate::commands::{CommandRegistry, Kind, RunContext};
use crate::config::{config_hash, load_config, Config};
use crate::error::{CliError, CliResult, EXIT_OK};
use crate::manifest::{timestamp, ExperimentManifest, MANIFEST_FILE};

#[derive(Debug, Clone, Parser)]
#[command(name = "ringlaw", version, about = "Single-ring and free convolution experiments")]
pub struct Args {
    /// Command to run; see the command list in the usage text.
    pub command: Option<String>,
    /// Run directories (for `report`).
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Run directory for CSV files and the manifest.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `ensemble.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, env = "RINGLAW_THREADS")]
    pub threads: Option<usize>,
    /// Allow writing into a nonempty run directory.
    #[arg(long)]
    pub overwrite: bool,
}

fn check_out_dir(out: &Path, overwrite: bool) -> CliResult<()> {
    if out.exists() && !overwrite {
        let nonempty = match std::fs::read_dir(out) {
            Ok(mut it) => it.next().is_some(),
            Err(_) => true,
        };
        if nonempty {
            return Err(CliError::validation(
                "--out",
                format!("{} already exists and is not empty; pass --overwrite to reuse it", out.display()),
            ));
        }
    }
    Ok(())
}

fn thread_pool(threads: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::validation("--threads", "must be positive"));
        }
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Io(e.to_string()))
}

/// Runs one invocation, writing command output to `stdout`.
pub fn execute(args: &Args, registry: &CommandRegistry, stdout: &mut dyn Write) -> CliResult<()> {
    let name = args.command.as_deref().ok_or_else(|| CliError::Usage(registry.usage()))?;
    let command = registry
        .get(name)
        .ok_or_else(|| CliError::Usage(format!("unknown command `{name}`\n\n{}", registry.usage())))?;
    let kind = command.kind();
    if kind != Kind::Aggregate && !args.inputs.is_empty() {
        return Err(CliError::Usage(format!("`{name}` takes no positional arguments\n\n{}", registry.usage())));
    }

    let config = match kind {
        Kind::Aggregate => Config::default(),
        _ => {
            let path = args.config.as_ref().ok_or_else(|| CliError::validation("--config", "a config file is required"))?;
            let mut cfg = load_config(path)?;
            if let Some(seed) = args.seed {
                cfg.ensemble.seed = seed;
            }
            cfg
        }
    };
    if kind == Kind::Experiment {
        if let Some(e) = config.validate().into_iter().next() {
            return Err(e);
        }
    }
    let writes = kind != Kind::Check;
    if let (true, Some(out)) = (writes, &args.out) {
        check_out_dir(out, args.overwrite)?;
    }

    let seed = match kind {
        Kind::Aggregate => args.seed.unwrap_or(0),
        _ => config.ensemble.seed,
    };
    let pool = thread_pool(args.threads)?;
    let started = timestamp();
    let ctx = RunContext { config: &config, seed, inputs: &args.inputs };
    let outcome = pool.install(|| command.run(&ctx))?;
    let finished = timestamp();
    stdout.write_all(outcome.stdout.as_bytes())?;

    if let (true, Some(out)) = (writes, &args.out) {
        std::fs::create_dir_all(out)?;
        for (file, bytes) in &outcome.files {
            std::fs::write(out.join(file), bytes)?;
        }
        let echo = match outcome.echo {
            Some(v) => v,
            None => serde_json::to_value(&config).map_err(|e| CliError::Io(e.to_string()))?,
        };
        let manifest = ExperimentManifest {
            command: name.to_string(),
            config_hash: config_hash(&echo),
            seed,
            generator_id: GENERATOR_ID.to_string(),
            config: echo,
            started,
            finished,
            outputs: outcome.files.iter().map(|(f, _)| f.clone()).collect(),
            version: ringlaw::VERSION.to_string(),
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))?;
        std::fs::write(out.join(MANIFEST_FILE), text + "\n")?;
    }
    Ok(())
}

/// Parses `argv`, runs the command and returns the exit status.
pub fn main_with<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let registry = CommandRegistry::default();
    let args = match Args::try_parse_from(argv) {
        Ok(a) => a,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                if e.kind() == ErrorKind::DisplayHelp {
                    let _ = write!(stdout, "\n{}", registry.usage());
                }
                return EXIT_OK;
            }
            let _ = write!(stderr, "{e}\n{}", registry.usage());
            return CliError::Usage(String::new()).exit_code();
        }
    };
    match execute(&args, &registry, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
