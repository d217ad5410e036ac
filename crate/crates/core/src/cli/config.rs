//! Flat JSON scenario configuration merged with command-line flags.

use std::fs;
use std::path::Path;

use clap::Args;
use serde::{Deserialize, Serialize};

use super::CliError;
use crate::distributions::ArrivalDistribution;
use crate::model::Scenario;

pub const SEED_ENV: &str = "WALKWAIT_SEED";
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRIALS: u64 = 1_000_000;

/// Keys accepted in a config file; every one is optional so flags can fill in.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tw: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tb: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dist: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Scenario flags shared by every subcommand; each overrides the same key
/// from `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct ScenarioFlags {
    /// Flat JSON config file with keys d, d2, vw, vb, tw, tb, dist, trials, seed
    #[arg(long, global = true)]
    pub config: Option<std::path::PathBuf>,
    /// Distance from stop 1 to the destination
    #[arg(long, global = true)]
    pub d: Option<f64>,
    /// Distance from stop 1 to stop 2
    #[arg(long, global = true)]
    pub d2: Option<f64>,
    /// Walking speed
    #[arg(long, global = true)]
    pub vw: Option<f64>,
    /// Bus speed
    #[arg(long, global = true)]
    pub vb: Option<f64>,
    /// Maximum wait at the chosen stop
    #[arg(long, global = true)]
    pub tw: Option<f64>,
    /// Uniform headway for the residual-term diagnostics
    #[arg(long, global = true)]
    pub tb: Option<f64>,
    /// Arrival law at stop 1: `uniform:<a>,<b>` or `exp:<rate>`
    #[arg(long, global = true)]
    pub dist: Option<String>,
    /// Monte Carlo trials
    #[arg(long, global = true)]
    pub trials: Option<u64>,
    /// Master seed (falls back to $WALKWAIT_SEED, then 42)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

/// Validated, merged configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub dist: ArrivalDistribution,
    pub tb: Option<f64>,
    pub trials: u64,
    pub seed: u64,
}

impl ScenarioConfig {
    /// Headway for residual diagnostics: explicit `tb`, else the width of a
    /// `uniform:0,<b>` arrival law.
    pub fn headway(&self) -> Option<f64> {
        self.tb.or_else(|| self.dist.headway())
    }

    /// One-line JSON echo of the merged configuration.
    pub fn echo(&self) -> String {
        let s = &self.scenario;
        let file = ConfigFile {
            d: Some(s.d()),
            d2: Some(s.d2()),
            vw: Some(s.vw()),
            vb: Some(s.vb()),
            tw: Some(s.tw()),
            tb: self.tb,
            dist: Some(self.dist.to_string()),
            trials: Some(self.trials),
            seed: Some(self.seed),
        };
        serde_json::to_string(&file).expect("config serialises")
    }
}

pub fn parse_config_text(text: &str) -> Result<ConfigFile, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Parse(format!("config: {e}")))
}

pub fn load_config_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_config_text(&text)
}

/// Overlays flags on the file values and validates the result, reporting
/// every problem at once.
pub fn merge(file: ConfigFile, flags: &ScenarioFlags, env_seed: Option<&str>) -> Result<ScenarioConfig, CliError> {
    let pick = |flag: Option<f64>, val: Option<f64>| flag.or(val);
    let d = pick(flags.d, file.d);
    let d2 = pick(flags.d2, file.d2);
    let vw = pick(flags.vw, file.vw);
    let vb = pick(flags.vb, file.vb);
    let tw = pick(flags.tw, file.tw);
    let tb = pick(flags.tb, file.tb);
    let dist = flags.dist.clone().or(file.dist);

    let mut problems = Vec::new();
    for (key, v) in [("d", d), ("d2", d2), ("vw", vw), ("vb", vb), ("tw", tw)] {
        if v.is_none() {
            problems.push(format!("missing required key `{key}`"));
        }
    }
    let dist = match dist {
        None => {
            problems.push("missing required key `dist`".to_string());
            None
        }
        Some(spec) => match spec.parse::<ArrivalDistribution>() {
            Ok(dist) => Some(dist),
            Err(e) => {
                problems.push(e.to_string());
                None
            }
        },
    };
    if let Some(tb) = tb {
        if !(tb > 0.0 && tb.is_finite()) {
            problems.push(format!("tb must be > 0 (got {tb})"));
        }
    }
    let trials = flags.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        problems.push("trials must be >= 1".to_string());
    }
    let seed = match flags.seed.or(file.seed) {
        Some(seed) => seed,
        None => match env_seed {
            Some(raw) => raw.trim().parse().unwrap_or_else(|_| {
                problems.push(format!("{SEED_ENV} must be an unsigned 64-bit integer (got {raw:?})"));
                0
            }),
            None => DEFAULT_SEED,
        },
    };

    let scenario = match (d, d2, vw, vb, tw) {
        (Some(d), Some(d2), Some(vw), Some(vb), Some(tw)) => {
            let violations = Scenario::violations(d, d2, vw, vb, tw);
            problems.extend(violations.iter().map(|v| v.to_string()));
            Scenario::new(d, d2, vw, vb, tw).ok()
        }
        _ => None,
    };

    match (scenario, dist) {
        (Some(scenario), Some(dist)) if problems.is_empty() => Ok(ScenarioConfig { scenario, dist, tb, trials, seed }),
        _ => Err(CliError::Validation(problems)),
    }
}

/// Reads `--config` (if any), overlays flags, and falls back to the seed
/// environment variable.
pub fn resolve(flags: &ScenarioFlags) -> Result<ScenarioConfig, CliError> {
    let file = match &flags.config {
        Some(path) => load_config_file(path)?,
        None => ConfigFile::default(),
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    merge(file, flags, env_seed.as_deref())
}
