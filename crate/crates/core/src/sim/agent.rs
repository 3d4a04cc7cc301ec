use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::{BehaviorParams, CognitiveParams, InternalState, Pose};

/// How an agent chooses its motion each tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// Behavior field driven by the estimate-and-update loop.
    Model,
    /// Heads for the current target while reacting to the other agent.
    GoalSeek,
    /// Random walk; ignores internal state.
    RandomWalk,
    /// Driven by remote input (live sessions).
    Remote,
    /// Does not move (practice phase).
    Stationary,
}

impl Policy {
    /// Whether the agent runs the estimate/update loop.
    pub fn is_cognitive(self) -> bool {
        matches!(self, Policy::Model | Policy::GoalSeek)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSpec {
    pub id: String,
    pub policy: Policy,
    pub phi: BehaviorParams,
    pub cog: CognitiveParams,
    pub s0: InternalState,
    pub start_pose: Pose,
}

/// The four robot conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "psi_0.001")]
    Psi0001,
    #[serde(rename = "psi_0.005")]
    Psi0005,
    #[serde(rename = "psi_0.01")]
    Psi001,
    #[serde(rename = "random_walk")]
    RandomWalk,
}

impl Condition {
    pub const ALL: [Condition; 4] = [
        Condition::Psi0001,
        Condition::Psi0005,
        Condition::Psi001,
        Condition::RandomWalk,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Condition::Psi0001 => "psi_0.001",
            Condition::Psi0005 => "psi_0.005",
            Condition::Psi001 => "psi_0.01",
            Condition::RandomWalk => "random_walk",
        }
    }

    /// The robot's consideration gain, or `None` for the random walker.
    pub fn psi(self) -> Option<f64> {
        match self {
            Condition::Psi0001 => Some(0.001),
            Condition::Psi0005 => Some(0.005),
            Condition::Psi001 => Some(0.01),
            Condition::RandomWalk => None,
        }
    }

    /// Maps a gain onto one of the three model conditions.
    pub fn from_psi(psi: f64) -> Option<Condition> {
        Condition::ALL
            .into_iter()
            .find(|c| c.psi().is_some_and(|p| (p - psi).abs() < 1e-12))
    }
}

impl fmt::Display for Condition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Condition {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "psi_0.001" | "0.001" => Ok(Condition::Psi0001),
            "psi_0.005" | "0.005" => Ok(Condition::Psi0005),
            "psi_0.01" | "0.01" => Ok(Condition::Psi001),
            "random_walk" | "rw" | "RW" => Ok(Condition::RandomWalk),
            other => Err(ConfigError::UnknownCondition(other.to_string())),
        }
    }
}

/// Internal state and consideration of the scripted participant for one kind of task.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticipantProfile {
    pub s0: InternalState,
    pub psi: f64,
}

/// Scripted participant behaviors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParticipantPreset {
    /// Starts neutral and drifts away from the robot's preference.
    Rejecting,
    /// Wants to interact and keeps that preference.
    Approaching,
    /// Rejecting on pole tasks, approaching on object tasks.
    Mixed,
}

impl ParticipantPreset {
    pub const REJECTING: ParticipantProfile = ParticipantProfile {
        s0: InternalState { c: 0.0, a: 0.0 },
        psi: -0.005,
    };
    pub const APPROACHING: ParticipantProfile = ParticipantProfile {
        s0: InternalState { c: 0.5, a: 0.5 },
        psi: 0.0,
    };

    pub fn pole_profile(self) -> ParticipantProfile {
        match self {
            ParticipantPreset::Rejecting | ParticipantPreset::Mixed => Self::REJECTING,
            ParticipantPreset::Approaching => Self::APPROACHING,
        }
    }

    pub fn object_profile(self) -> ParticipantProfile {
        match self {
            ParticipantPreset::Rejecting => Self::REJECTING,
            ParticipantPreset::Approaching | ParticipantPreset::Mixed => Self::APPROACHING,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ParticipantPreset::Rejecting => "rejecting",
            ParticipantPreset::Approaching => "approaching",
            ParticipantPreset::Mixed => "mixed",
        }
    }
}

impl FromStr for ParticipantPreset {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rejecting" | "rejection" => Ok(ParticipantPreset::Rejecting),
            "approaching" | "approach" => Ok(ParticipantPreset::Approaching),
            "mixed" | "experiment" => Ok(ParticipantPreset::Mixed),
            _ => Err(ConfigError::invalid("participant", format!("unknown preset `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomWalkParams {
    /// Standard deviation of the per-tick heading perturbation, rad.
    pub heading_sd: f64,
    /// Walking speed as a fraction of `v_max`.
    pub speed_fraction: f64,
}

impl Default for RandomWalkParams {
    fn default() -> Self {
        RandomWalkParams {
            heading_sd: 0.1,
            speed_fraction: 0.8,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_labels_round_trip() {
        for c in Condition::ALL {
            assert_eq!(c.label().parse::<Condition>().unwrap(), c);
            let json = serde_json::to_string(&c).unwrap();
            assert_eq!(json, format!("\"{}\"", c.label()));
        }
        assert!("psi_0.02".parse::<Condition>().is_err());
        assert_eq!(Condition::from_psi(0.005), Some(Condition::Psi0005));
        assert_eq!(Condition::RandomWalk.psi(), None);
    }

    #[test]
    fn mixed_preset_switches_profiles() {
        let m = ParticipantPreset::Mixed;
        assert_eq!(m.pole_profile(), ParticipantPreset::REJECTING);
        assert_eq!(m.object_profile(), ParticipantPreset::APPROACHING);
    }
}
