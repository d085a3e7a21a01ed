use std::collections::BTreeSet;
use std::path::Path;

use num_complex::Complex64;
use ringlaw::locallaw::{DeviationRecord, DominationReport};
use serde_json::json;

use super::montecarlo::domination_outputs;
use super::{Command, Kind, Outcome, RunContext};
use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::manifest::ExperimentManifest;

pub struct Report;

/// Data file and header of each command whose runs can be merged.
fn schema(command: &str) -> Option<(&'static str, &'static [&'static str])> {
    match command {
        "local-law" => Some(("local_law.csv", &["N", "trial", "w_re", "w_im", "eta", "dev"])),
        "block-law" => Some(("block.csv", &["N", "trial", "E", "eta", "dev"])),
        _ => None,
    }
}

fn bad(dir: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::validation("", format!("{}: {msg}", dir.display()))
}

fn read_records(dir: &Path, file: &str, header: &[&str]) -> CliResult<Vec<DeviationRecord>> {
    let path = dir.join(file);
    let mut reader = csv::Reader::from_path(&path).map_err(|e| bad(dir, format!("cannot read {file}: {e}")))?;
    let found: Vec<String> = reader.headers().map_err(|e| bad(dir, e))?.iter().map(String::from).collect();
    if found != header {
        return Err(bad(dir, format!("{file} has columns {found:?}, expected {header:?}")));
    }
    let block = header.len() == 5;
    let mut out = Vec::new();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| bad(dir, e))?;
        let num = |i: usize| -> CliResult<f64> {
            rec[i].parse::<f64>().map_err(|e| bad(dir, format!("{file} row {}: column {}: {e}", line + 1, header[i])))
        };
        let int = |i: usize| -> CliResult<usize> {
            rec[i].parse::<usize>().map_err(|e| bad(dir, format!("{file} row {}: column {}: {e}", line + 1, header[i])))
        };
        let (point, eta, dev) = if block {
            (Complex64::new(num(2)?, 0.0), num(3)?, num(4)?)
        } else {
            (Complex64::new(num(2)?, num(3)?), num(4)?, num(5)?)
        };
        out.push(DeviationRecord {
            n: int(0)?,
            trial: int(1)?,
            seed: 0,
            point,
            eta,
            dev,
            flag: dev.is_nan().then(|| "flagged in the source run".to_string()),
        });
    }
    Ok(out)
}

impl Command for Report {
    fn name(&self) -> &'static str {
        "report"
    }

    fn summary(&self) -> &'static str {
        "merge local-law or block-law runs and fit the size dependence"
    }

    fn kind(&self) -> Kind {
        Kind::Aggregate
    }

    fn run(&self, ctx: &RunContext) -> CliResult<Outcome> {
        if ctx.inputs.is_empty() {
            return Err(CliError::validation("", "report needs at least one run directory"));
        }
        let mut source: Option<String> = None;
        let mut thresholds = None;
        let mut records = Vec::new();
        for dir in ctx.inputs {
            let manifest = ExperimentManifest::read(dir)?;
            if !manifest.hash_matches() {
                return Err(bad(dir, "config_hash does not match the echoed config"));
            }
            let (file, header) = schema(&manifest.command)
                .ok_or_else(|| bad(dir, format!("`{}` runs cannot be merged", manifest.command)))?;
            match &source {
                Some(c) if *c != manifest.command => {
                    return Err(bad(dir, format!("incompatible schemas: `{}` run mixed with `{c}` runs", manifest.command)));
                }
                _ => source = Some(manifest.command.clone()),
            }
            if thresholds.is_none() {
                let cfg: Config = serde_json::from_value(manifest.config.clone()).map_err(|e| bad(dir, e))?;
                thresholds = Some(cfg.thresholds);
            }
            records.extend(read_records(dir, file, header)?);
        }
        let thresholds = thresholds.unwrap_or_default();
        let report = DominationReport::from_records(records, thresholds.slope_pass);
        let mut out = Outcome::default();
        let sizes: BTreeSet<usize> = report.per_n.iter().map(|s| s.n).collect();
        out.say(format!("{} runs of `{}`, sizes {:?}", ctx.inputs.len(), source.as_deref().unwrap_or(""), sizes));
        domination_outputs(&report, &thresholds, &mut out)?;
        let mut dat = String::from("# N max q95\n");
        for s in &report.per_n {
            dat.push_str(&format!("{} {:.16e} {:.16e}\n", s.n, s.max, s.q95));
        }
        out.file("report.dat", dat.into_bytes());
        let runs: Vec<String> = ctx.inputs.iter().map(|p| p.display().to_string()).collect();
        out.echo = Some(json!({ "runs": runs, "source": source }));
        Ok(out)
    }
}
