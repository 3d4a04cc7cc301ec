//! Field layout, task protocol, agent policies and trajectory logging.

pub mod agent;
pub mod layout;
pub mod log;
pub mod schedule;
pub mod trial;
pub mod world;

pub use agent::{AgentSpec, Condition, ParticipantPreset, ParticipantProfile, Policy, RandomWalkParams};
pub use layout::FieldLayout;
pub use log::{AgentSample, LogMeta, ManifestEntry, Sample, TaskRecord, TrajectoryLog};
pub use schedule::{designate_targets, TaskSchedule, Target};
pub use trial::{run_experiment, run_trial, TrialConfig, PARTICIPANT_ID, ROBOT_ID};
pub use world::{TickOutcome, World, WorldParams, WorldSpec};
