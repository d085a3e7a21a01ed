use super::{Command, Kind, Outcome, RunContext};
use crate::error::{CliError, CliResult};

pub struct Validate;

impl Command for Validate {
    fn name(&self) -> &'static str {
        "validate"
    }

    fn summary(&self) -> &'static str {
        "check a config without running any numerics"
    }

    fn kind(&self) -> Kind {
        Kind::Check
    }

    fn run(&self, ctx: &RunContext) -> CliResult<Outcome> {
        let mut errors = ctx.config.validate();
        match errors.len() {
            0 => Ok(Outcome::default()),
            1 => Err(errors.remove(0)),
            _ => {
                let message = errors.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("; ");
                Err(CliError::validation("", message))
            }
        }
    }
}
