use std::fs;
use std::path::{Path, PathBuf};

use devlab_core::deviations::DeviationSpec;
use devlab_core::montecarlo::{CalibrationConfig, ExperimentConfig, GoalConfig, ThresholdSource};
use devlab_core::random_walk::SurrogateThresholds;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Command-line values that replace the matching config fields.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub horizon: Option<usize>,
}

/// Input to `enumerate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnumerateConfig {
    pub goal: GoalConfig,
    /// Candidate deviation per player; players not listed are hypothesized honest.
    #[serde(default)]
    pub hypothesis: Vec<DeviationSpec>,
    pub horizon: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
}

/// Files a `thresholds` path may point at: a calibrated goal fragment or
/// the bare thresholds.
#[derive(Deserialize)]
#[serde(untagged)]
enum ThresholdFile {
    Goal(GoalConfig),
    Bare(SurrogateThresholds),
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path)
        .map_err(|source| CliError::Parse { path: path.to_path_buf(), message: format!("cannot read: {source}") })
}

pub fn parse_file<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
}

fn base_dir(config_path: &Path) -> PathBuf {
    config_path.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Replaces a thresholds file reference with the thresholds it contains.
/// Relative paths are taken from `base`.
pub fn resolve_goal(goal: &mut GoalConfig, base: &Path) -> CliResult<()> {
    let GoalConfig::RandomWalk { start, thresholds } = goal else {
        return Ok(());
    };
    let Some(ThresholdSource::File(rel)) = thresholds else {
        return Ok(());
    };
    let path = if rel.is_absolute() { rel.clone() } else { base.join(&*rel) };
    let text = read(&path)?;
    let parsed: ThresholdFile = serde_json::from_str(&text).map_err(|e| CliError::Parse {
        path: path.clone(),
        message: format!("expected a random_walk goal fragment or bare thresholds: {e}"),
    })?;
    let loaded = match parsed {
        ThresholdFile::Bare(t) => t,
        ThresholdFile::Goal(GoalConfig::RandomWalk {
            start: fragment_start,
            thresholds: Some(ThresholdSource::Inline(t)),
        }) => {
            if fragment_start != *start {
                return Err(CliError::Parse {
                    path,
                    message: format!("thresholds were calibrated for start {fragment_start}, not {start}"),
                });
            }
            t
        }
        ThresholdFile::Goal(_) => {
            return Err(CliError::Parse { path, message: "fragment holds no inline random_walk thresholds".into() })
        }
    };
    *thresholds = Some(ThresholdSource::Inline(loaded));
    Ok(())
}

pub fn load_experiments(path: &Path, overrides: Overrides) -> CliResult<Vec<ExperimentConfig>> {
    let value: serde_json::Value = parse_file(path)?;
    let parsed = match value {
        serde_json::Value::Array(items) => items
            .into_iter()
            .enumerate()
            .map(|(i, item)| serde_json::from_value(item).map_err(|e| format!("experiment {i}: {e}")))
            .collect::<Result<Vec<ExperimentConfig>, _>>(),
        other => serde_json::from_value(other).map(|e| vec![e]).map_err(|e| e.to_string()),
    };
    let mut experiments = parsed.map_err(|message| CliError::Parse { path: path.to_path_buf(), message })?;
    if experiments.is_empty() {
        return Err(CliError::Parse { path: path.to_path_buf(), message: "no experiments listed".into() });
    }
    let base = base_dir(path);
    for e in &mut experiments {
        resolve_goal(&mut e.goal, &base)?;
        if let Some(seed) = overrides.seed {
            e.seed = seed;
        }
        if let Some(trials) = overrides.trials {
            e.trials = trials;
        }
        if let Some(horizon) = overrides.horizon {
            e.horizon = horizon;
        }
        e.validate()?;
    }
    Ok(experiments)
}

pub fn load_enumerate(path: &Path, overrides: Overrides) -> CliResult<EnumerateConfig> {
    if overrides.seed.is_some() || overrides.trials.is_some() {
        return Err(CliError::Usage("enumerate is exact; --seed and --trials do not apply".into()));
    }
    let mut config: EnumerateConfig = parse_file(path)?;
    resolve_goal(&mut config.goal, &base_dir(path))?;
    if let Some(horizon) = overrides.horizon {
        config.horizon = horizon;
    }
    if config.horizon == 0 {
        return Err(CliError::Usage("horizon must be at least 1".into()));
    }
    Ok(config)
}

pub fn load_calibration(path: &Path, overrides: Overrides) -> CliResult<CalibrationConfig> {
    let mut config: CalibrationConfig = parse_file(path)?;
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    if let Some(trials) = overrides.trials {
        config.trials = trials;
    }
    if let Some(horizon) = overrides.horizon {
        config.horizon = horizon;
    }
    config.validate()?;
    Ok(config)
}
