//! Run configuration: a TOML file with flag overrides on top.

use std::fs;
use std::path::{Path, PathBuf};

use considerate_core::model::{BehaviorParams, CognitiveParams, InternalState};
use considerate_core::sim::{Condition, FieldLayout, ParticipantPreset, TrialConfig, WorldParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "CONSIDERATE_OUT";
pub const DEFAULT_OUT: &str = "runs";
pub const RESOLVED_CONFIG_FILE: &str = "run_config.toml";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Participant that drifts away from the robot.
    Rejection,
    /// Participant that seeks interaction throughout.
    Approach,
    /// Rejecting on pole tasks, approaching on object tasks.
    Experiment,
}

impl Scenario {
    pub fn preset(self) -> ParticipantPreset {
        match self {
            Scenario::Rejection => ParticipantPreset::Rejecting,
            Scenario::Approach => ParticipantPreset::Approaching,
            Scenario::Experiment => ParticipantPreset::Mixed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_scenario")]
    pub scenario: Scenario,
    /// Robot condition for `simulate`; `experiment` runs all four.
    #[serde(default = "default_condition")]
    pub condition: Condition,
    /// Overrides the preset implied by the scenario.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant: Option<ParticipantPreset>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_seed")]
    pub base_seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant_psi: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robot_s0: Option<InternalState>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<FieldLayout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robot_phi: Option<BehaviorParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant_phi: Option<BehaviorParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub robot_cog: Option<CognitiveParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub participant_cog: Option<CognitiveParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub world: Option<WorldParams>,
}

fn default_scenario() -> Scenario {
    Scenario::Rejection
}

fn default_condition() -> Condition {
    Condition::Psi0001
}

fn default_seed() -> u64 {
    1
}

fn default_trials() -> usize {
    20
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config uses defaults")
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: {}", path.display(), e.message())))
    }

    pub fn preset(&self) -> ParticipantPreset {
        self.participant.unwrap_or(self.scenario.preset())
    }

    /// Output directory: config value, else the environment, else `runs`.
    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(default_out_dir)
    }

    pub fn trial_config(&self) -> Result<TrialConfig, CliError> {
        let mut cfg = TrialConfig::new(self.condition, self.preset());
        if let Some(layout) = &self.layout {
            cfg.layout = layout.clone();
        }
        if let Some(phi) = self.robot_phi {
            cfg.robot_phi = phi;
        }
        if let Some(phi) = self.participant_phi {
            cfg.participant_phi = phi;
        }
        if let Some(cog) = self.robot_cog {
            cfg.robot_cog = cog;
        }
        if let Some(cog) = self.participant_cog {
            cfg.participant_cog = cog;
        }
        if let Some(s0) = self.robot_s0 {
            cfg.robot_s0 = s0;
        }
        if let Some(world) = self.world {
            cfg.world = world;
        }
        cfg.participant_psi = self.participant_psi;
        cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(cfg)
    }

    /// Writes the effective configuration next to the outputs.
    pub fn write_resolved(&self, dir: &Path) -> Result<(), CliError> {
        let mut resolved = self.clone();
        resolved.out = Some(dir.to_path_buf());
        let text = toml::to_string_pretty(&resolved).expect("config serializes");
        let path = dir.join(RESOLVED_CONFIG_FILE);
        fs::create_dir_all(dir)
            .and_then(|_| fs::write(&path, text))
            .map_err(|e| CliError::io(&path, e))
    }
}

pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.scenario, Scenario::Rejection);
        assert_eq!(cfg.condition, Condition::Psi0001);
        assert_eq!(cfg.trials, 20);
        assert_eq!(cfg.preset(), ParticipantPreset::Rejecting);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(toml::from_str::<RunConfig>("sead = 3").is_err());
        assert!(toml::from_str::<RunConfig>("[robot_phi]\nv_max = 1.0\nspeed = 2").is_err());
    }

    #[test]
    fn sections_override_trial_parameters() {
        let cfg: RunConfig = toml::from_str(
            r#"
            scenario = "approach"
            condition = "random_walk"
            participant_psi = -0.002

            [world]
            capture_radius = 0.5
            max_ticks_per_task = 400
            goal_blend = 1.0

            [world.random_walk]
            speed_fraction = 0.5
            heading_sd = 0.2
            "#,
        )
        .unwrap();
        let trial = cfg.trial_config().unwrap();
        assert_eq!(trial.participant, ParticipantPreset::Approaching);
        assert_eq!(trial.condition, Condition::RandomWalk);
        assert_eq!(trial.participant_psi, Some(-0.002));
        assert_eq!(trial.world.max_ticks_per_task, 400);
    }

    #[test]
    fn resolved_config_round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = RunConfig {
            layout: Some(FieldLayout::default()),
            robot_cog: Some(CognitiveParams::default()),
            ..RunConfig::default()
        };
        cfg.write_resolved(dir.path()).unwrap();
        let back = RunConfig::load(Some(&dir.path().join(RESOLVED_CONFIG_FILE))).unwrap();
        assert_eq!(back.layout, cfg.layout);
        assert_eq!(back.robot_cog, cfg.robot_cog);
        assert_eq!(back.out.as_deref(), Some(dir.path()));
    }
}
