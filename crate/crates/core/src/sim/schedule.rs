use rand::seq::IndexedRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::layout::{FieldLayout, POLE_COUNT};

pub const TASKS_PER_TRIAL: usize = 10;
pub const OBJECT_TASKS: usize = 2;

/// What the participant is asked to reach.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Pole { index: usize },
    /// The object held by the robot.
    Object,
}

impl Target {
    pub fn is_pole(&self) -> bool {
        matches!(self, Target::Pole { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskSchedule {
    pub entries: Vec<Target>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScheduleViolation {
    #[error("schedule has {0} entries, expected {TASKS_PER_TRIAL}")]
    Length(usize),
    #[error("schedule has {0} object targets, expected {OBJECT_TASKS}")]
    ObjectCount(usize),
    #[error("object targets at consecutive entries {0} and {next}", next = .0 + 1)]
    ConsecutiveObjects(usize),
    #[error("pole {next} at entry {entry} is not opposite the previous pole {prev}")]
    NotOpposite { entry: usize, prev: usize, next: usize },
    #[error("pole index {0} out of range")]
    BadPole(usize),
}

impl TaskSchedule {
    pub fn validate(&self, layout: &FieldLayout) -> Result<(), ScheduleViolation> {
        if self.entries.len() != TASKS_PER_TRIAL {
            return Err(ScheduleViolation::Length(self.entries.len()));
        }
        let objects = self.entries.iter().filter(|t| !t.is_pole()).count();
        if objects != OBJECT_TASKS {
            return Err(ScheduleViolation::ObjectCount(objects));
        }
        for (i, pair) in self.entries.windows(2).enumerate() {
            if pair[0] == Target::Object && pair[1] == Target::Object {
                return Err(ScheduleViolation::ConsecutiveObjects(i));
            }
        }
        let mut prev = None;
        for (entry, target) in self.entries.iter().enumerate() {
            if let Target::Pole { index } = *target {
                if index >= POLE_COUNT {
                    return Err(ScheduleViolation::BadPole(index));
                }
                if let Some(p) = prev {
                    if !layout.opposite_poles(p).contains(&index) {
                        return Err(ScheduleViolation::NotOpposite {
                            entry,
                            prev: p,
                            next: index,
                        });
                    }
                }
                prev = Some(index);
            }
        }
        Ok(())
    }

    pub fn first_pole(&self) -> Option<usize> {
        self.entries.iter().find_map(|t| match t {
            Target::Pole { index } => Some(*index),
            Target::Object => None,
        })
    }
}

/// Admissible object-slot pairs: two of ten positions, never adjacent.
fn object_slot_pairs() -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..TASKS_PER_TRIAL {
        for j in (i + 2)..TASKS_PER_TRIAL {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Draws a trial's target order, deterministically from `seed`.
pub fn designate_targets(seed: u64, layout: &FieldLayout) -> TaskSchedule {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = object_slot_pairs();
    let &(o1, o2) = pairs.choose(&mut rng).expect("non-empty");
    let all: Vec<usize> = (0..POLE_COUNT).collect();
    let mut prev: Option<usize> = None;
    let entries = (0..TASKS_PER_TRIAL)
        .map(|slot| {
            if slot == o1 || slot == o2 {
                return Target::Object;
            }
            let index = match prev {
                None => *all.choose(&mut rng).expect("non-empty"),
                Some(p) => *layout.opposite_poles(p).choose(&mut rng).expect("three poles"),
            };
            prev = Some(index);
            Target::Pole { index }
        })
        .collect();
    TaskSchedule { entries }
}
