//! Subcommands, looked up by name in a [`CommandRegistry`].

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::Value;

use crate::config::Config;
use crate::error::CliResult;

mod analytic;
mod montecarlo;
mod report;
mod validate;

pub use analytic::{Certificate, FreeConv, RadiiCmd, RingDensity};
pub use montecarlo::{BlockLaw, GreenSub, LocalLaw, MainGap, SsvTail};
pub use report::Report;
pub use validate::Validate;

/// What a command reads and whether it persists results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    /// Reads `--config`, writes CSV files and a manifest.
    Experiment,
    /// Reads run directories, writes a summary and a manifest.
    Aggregate,
    /// Reads `--config`, writes nothing.
    Check,
}

pub struct RunContext<'a> {
    /// Effective config, with any `--seed` override applied.
    pub config: &'a Config,
    pub seed: u64,
    pub inputs: &'a [PathBuf],
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub stdout: String,
    /// `(file name, contents)`, written to the run directory in order.
    pub files: Vec<(String, Vec<u8>)>,
    /// Parameter echo for commands that take no config.
    pub echo: Option<Value>,
}

impl Outcome {
    pub fn file(&mut self, name: &str, contents: Vec<u8>) {
        self.files.push((name.to_string(), contents));
    }

    pub fn say(&mut self, line: impl AsRef<str>) {
        self.stdout.push_str(line.as_ref());
        self.stdout.push('\n');
    }
}

pub trait Command: Send + Sync {
    fn name(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    fn kind(&self) -> Kind {
        Kind::Experiment
    }
    fn run(&self, ctx: &RunContext) -> CliResult<Outcome>;
}

pub struct CommandRegistry {
    commands: BTreeMap<&'static str, Box<dyn Command>>,
}

impl CommandRegistry {
    pub fn empty() -> Self {
        CommandRegistry { commands: BTreeMap::new() }
    }

    pub fn register(&mut self, command: Box<dyn Command>) {
        self.commands.insert(command.name(), command);
    }

    pub fn get(&self, name: &str) -> Option<&dyn Command> {
        self.commands.get(name).map(|c| c.as_ref())
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.commands.keys().copied()
    }

    pub fn usage(&self) -> String {
        let mut s = String::from(
            "usage: ringlaw <COMMAND> [--config PATH] [--out DIR] [--seed N] [--threads N] [--overwrite] [RUN_DIR...]\n\ncommands:\n",
        );
        for c in self.commands.values() {
            s.push_str(&format!("  {:<13} {}\n", c.name(), c.summary()));
        }
        s
    }
}

impl Default for CommandRegistry {
    fn default() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(RadiiCmd));
        r.register(Box::new(FreeConv));
        r.register(Box::new(Certificate));
        r.register(Box::new(RingDensity));
        r.register(Box::new(LocalLaw));
        r.register(Box::new(MainGap));
        r.register(Box::new(SsvTail));
        r.register(Box::new(BlockLaw));
        r.register(Box::new(GreenSub));
        r.register(Box::new(Report));
        r.register(Box::new(Validate));
        r
    }
}
