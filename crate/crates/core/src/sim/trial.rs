use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::agent::{AgentSpec, Condition, ParticipantPreset, Policy};
use super::layout::{FieldLayout, POLE_COUNT};
use super::log::{LogMeta, ManifestEntry, TrajectoryLog};
use super::schedule::{designate_targets, TaskSchedule};
use super::world::{World, WorldParams, WorldSpec};
use crate::error::ConfigError;
use crate::model::{BehaviorParams, CognitiveParams, InternalState, Pose, TICK_SECONDS};

pub const ROBOT_ID: &str = "robot";
pub const PARTICIPANT_ID: &str = "participant";

/// Robot Control/Acceptance at the start of every task.
pub const ROBOT_S0: InternalState = InternalState { c: 0.5, a: 0.5 };

/// Full description of one simulated trial apart from its seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialConfig {
    pub condition: Condition,
    pub participant: ParticipantPreset,
    #[serde(default)]
    pub layout: FieldLayout,
    #[serde(default)]
    pub robot_phi: BehaviorParams,
    #[serde(default)]
    pub participant_phi: BehaviorParams,
    /// Estimator settings of the robot; `psi` comes from the condition.
    #[serde(default)]
    pub robot_cog: CognitiveParams,
    /// Estimator settings of the participant; `psi` comes from the preset
    /// unless `participant_psi` overrides it.
    #[serde(default)]
    pub participant_cog: CognitiveParams,
    #[serde(default)]
    pub participant_psi: Option<f64>,
    #[serde(default = "default_robot_s0")]
    pub robot_s0: InternalState,
    #[serde(default)]
    pub world: WorldParams,
}

fn default_robot_s0() -> InternalState {
    ROBOT_S0
}

impl TrialConfig {
    pub fn new(condition: Condition, participant: ParticipantPreset) -> Self {
        TrialConfig {
            condition,
            participant,
            layout: FieldLayout::default(),
            robot_phi: BehaviorParams::default(),
            participant_phi: BehaviorParams::default(),
            robot_cog: CognitiveParams::default(),
            participant_cog: CognitiveParams::default(),
            participant_psi: None,
            robot_s0: ROBOT_S0,
            world: WorldParams::default(),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.layout.validate()?;
        self.robot_phi.validate()?;
        self.participant_phi.validate()?;
        self.robot_cog.validate()?;
        self.participant_cog.validate()?;
        if !(self.world.capture_radius > 0.0) {
            return Err(ConfigError::invalid("capture_radius", "must be > 0"));
        }
        if self.world.max_ticks_per_task == 0 {
            return Err(ConfigError::invalid("max_ticks_per_task", "must be > 0"));
        }
        Ok(())
    }

    pub fn robot_spec(&self) -> AgentSpec {
        let policy = match self.condition.psi() {
            Some(_) => Policy::Model,
            None => Policy::RandomWalk,
        };
        AgentSpec {
            id: ROBOT_ID.into(),
            policy,
            phi: self.robot_phi,
            cog: CognitiveParams {
                psi: self.condition.psi().unwrap_or(0.0),
                ..self.robot_cog
            },
            s0: self.robot_s0,
            start_pose: Pose::new(
                self.layout.robot_home.x,
                self.layout.robot_home.y,
                self.layout.robot_home_heading,
            ),
        }
    }

    /// Participant spec for a scripted (`GoalSeek`) or live (`Remote`) participant.
    pub fn participant_spec(&self, schedule: &TaskSchedule, policy: Policy) -> AgentSpec {
        let profile = self.participant.pole_profile();
        AgentSpec {
            id: PARTICIPANT_ID.into(),
            policy,
            phi: self.participant_phi,
            cog: CognitiveParams {
                psi: self.participant_psi.unwrap_or(profile.psi),
                ..self.participant_cog
            },
            s0: profile.s0,
            start_pose: participant_start(&self.layout, schedule),
        }
    }

    pub fn world_spec(&self, seed: u64, participant_policy: Policy) -> WorldSpec {
        let schedule = designate_targets(seed, &self.layout);
        let participant = self.participant_spec(&schedule, participant_policy);
        let profiles = if participant_policy.is_cognitive() {
            let mut pole = self.participant.pole_profile();
            let mut object = self.participant.object_profile();
            if let Some(psi) = self.participant_psi {
                pole.psi = psi;
                if self.participant != ParticipantPreset::Mixed {
                    object.psi = psi;
                }
            }
            Some((pole, object))
        } else {
            None
        };
        WorldSpec {
            layout: self.layout.clone(),
            robot: self.robot_spec(),
            participant,
            participant_profiles: profiles,
            params: self.world,
            seed,
            schedule,
        }
    }

    pub fn log_name(&self, seed: u64) -> String {
        format!("{}_{}_s{seed}", self.participant.label(), self.condition.label())
    }
}

/// The participant starts at the pole facing the first pole target across
/// the field, looking toward the robot.
pub fn participant_start(layout: &FieldLayout, schedule: &TaskSchedule) -> Pose {
    let first = schedule.first_pole().unwrap_or(0);
    let start = layout.poles[(first + POLE_COUNT / 2) % POLE_COUNT];
    let heading = (layout.robot_home - start).angle();
    let heading = if heading.is_finite() { heading } else { PI };
    Pose::new(start.x, start.y, heading)
}

pub fn meta_for(config: &TrialConfig, world: &World, name: String, seed: u64) -> LogMeta {
    LogMeta {
        name,
        condition: Some(config.condition),
        psi_robot: config.condition.psi(),
        psi_participant: Some(world.participant.spec.cog.psi),
        participant: Some(config.participant),
        seed,
        tick_seconds: TICK_SECONDS,
        layout: world.layout.clone(),
        schedule: world.schedule.entries.clone(),
        agents: vec![world.robot.spec.clone(), world.participant.spec.clone()],
        robot_id: ROBOT_ID.into(),
        participant_id: PARTICIPANT_ID.into(),
        tasks: world.tasks.clone(),
    }
}

/// Simulates one trial of ten tasks with a scripted participant.
pub fn run_trial(config: &TrialConfig, seed: u64) -> TrajectoryLog {
    let mut world = World::new(config.world_spec(seed, Policy::GoalSeek));
    world.run_to_end();
    let mut meta = meta_for(config, &world, config.log_name(seed), seed);
    // The participant's gain is the pole-task one; report it rather than the
    // gain of whichever task ran last.
    meta.psi_participant = Some(
        config
            .participant_psi
            .unwrap_or(config.participant.pole_profile().psi),
    );
    TrajectoryLog {
        meta,
        samples: world.into_samples(),
    }
}

/// Runs every condition `n_trials` times with seeds `base_seed + i`.
///
/// Trials run in parallel; the output order is condition-major, then trial.
pub fn run_experiment(
    config: &TrialConfig,
    n_trials: usize,
    base_seed: u64,
) -> Vec<(ManifestEntry, TrajectoryLog)> {
    let jobs: Vec<(Condition, usize)> = Condition::ALL
        .into_iter()
        .flat_map(|c| (0..n_trials).map(move |i| (c, i)))
        .collect();
    jobs.into_par_iter()
        .map(|(condition, trial)| {
            let cfg = TrialConfig {
                condition,
                ..config.clone()
            };
            let seed = base_seed + trial as u64;
            let log = run_trial(&cfg, seed);
            let entry = ManifestEntry {
                log: log.meta.name.clone(),
                trial,
                condition: Some(condition),
                participant: Some(cfg.participant),
                seed,
            };
            (entry, log)
        })
        .collect()
}
