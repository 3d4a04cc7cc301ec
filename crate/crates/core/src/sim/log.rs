//! Trajectory logs: one JSON record per 50 ms tick plus a JSON meta header.

use std::fs::{self, File};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::agent::{AgentSpec, Condition, ParticipantPreset};
use super::layout::FieldLayout;
use super::schedule::Target;
use crate::error::LogError;
use crate::model::{Pose, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSample {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub heading: f64,
    pub c: f64,
    pub a: f64,
    pub c_hat: f64,
    pub a_hat: f64,
    pub informative: bool,
}

impl AgentSample {
    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }

    pub fn pose(&self) -> Pose {
        Pose::new(self.x, self.y, self.heading)
    }
}

/// World state at one tick.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tick: u64,
    pub task: usize,
    pub target: Target,
    pub agents: Vec<AgentSample>,
    /// The previous task finished on the step that produced this sample.
    #[serde(default)]
    pub task_done: bool,
    #[serde(default)]
    pub trial_done: bool,
}

impl Sample {
    pub fn agent(&self, id: &str) -> Option<&AgentSample> {
        self.agents.iter().find(|a| a.id == id)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub index: usize,
    pub target: Target,
    pub start_tick: u64,
    pub end_tick: u64,
    pub timed_out: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogMeta {
    pub name: String,
    pub condition: Option<Condition>,
    pub psi_robot: Option<f64>,
    pub psi_participant: Option<f64>,
    pub participant: Option<ParticipantPreset>,
    pub seed: u64,
    pub tick_seconds: f64,
    pub layout: FieldLayout,
    pub schedule: Vec<Target>,
    pub agents: Vec<AgentSpec>,
    pub robot_id: String,
    pub participant_id: String,
    pub tasks: Vec<TaskRecord>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryLog {
    pub meta: LogMeta,
    pub samples: Vec<Sample>,
}

impl TrajectoryLog {
    /// Samples belonging to `task`, in tick order.
    pub fn task_samples(&self, task: usize) -> impl Iterator<Item = (usize, &Sample)> {
        self.samples
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.task == task)
    }

    /// Participant positions for a task, including the first position of the
    /// following sample so that the final step of the task is counted.
    pub fn participant_path(&self, task: usize) -> Vec<Vec2> {
        let id = &self.meta.participant_id;
        let mut path = Vec::new();
        let mut last_idx = None;
        for (i, s) in self.task_samples(task) {
            if let Some(a) = s.agent(id) {
                path.push(a.position());
            }
            last_idx = Some(i);
        }
        if let Some(i) = last_idx {
            if let Some(next) = self.samples.get(i + 1) {
                if let Some(a) = next.agent(id) {
                    path.push(a.position());
                }
            }
        }
        path
    }

    pub fn task_target(&self, task: usize) -> Option<Target> {
        self.meta.schedule.get(task).copied()
    }

    pub fn jsonl_path(dir: &Path, name: &str) -> PathBuf {
        dir.join(format!("{name}.jsonl"))
    }

    pub fn meta_path(dir: &Path, name: &str) -> PathBuf {
        dir.join(format!("{name}.meta.json"))
    }

    /// Serialized JSONL body, one record per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&serde_json::to_string(s).expect("samples serialize"));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: &Path) -> Result<(), LogError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| LogError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let meta_path = Self::meta_path(dir, &self.meta.name);
        let meta = serde_json::to_string_pretty(&self.meta).expect("meta serializes");
        fs::write(&meta_path, meta + "\n").map_err(io(&meta_path))?;

        let path = Self::jsonl_path(dir, &self.meta.name);
        let file = File::create(&path).map_err(io(&path))?;
        let mut w = BufWriter::new(file);
        for s in &self.samples {
            serde_json::to_writer(&mut w, s).expect("samples serialize");
            w.write_all(b"\n").map_err(io(&path))?;
        }
        w.flush().map_err(io(&path))?;
        Ok(())
    }

    pub fn read(dir: &Path, name: &str) -> Result<Self, LogError> {
        let meta_path = Self::meta_path(dir, name);
        let text = fs::read_to_string(&meta_path).map_err(|source| LogError::Io {
            path: meta_path.clone(),
            source,
        })?;
        let meta: LogMeta = serde_json::from_str(&text).map_err(|source| LogError::Parse {
            path: meta_path.clone(),
            line: 0,
            source,
        })?;
        let path = Self::jsonl_path(dir, name);
        let file = File::open(&path).map_err(|source| LogError::Io {
            path: path.clone(),
            source,
        })?;
        let mut samples = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|source| LogError::Io {
                path: path.clone(),
                source,
            })?;
            if line.trim().is_empty() {
                continue;
            }
            samples.push(serde_json::from_str(&line).map_err(|source| LogError::Parse {
                path: path.clone(),
                line: i + 1,
                source,
            })?);
        }
        if samples.is_empty() {
            return Err(LogError::Empty(path));
        }
        Ok(TrajectoryLog { meta, samples })
    }
}

/// One manifest row per log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub log: String,
    pub trial: usize,
    pub condition: Option<Condition>,
    pub participant: Option<ParticipantPreset>,
    pub seed: u64,
}

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn write_manifest(dir: &Path, entries: &[ManifestEntry]) -> Result<(), LogError> {
    let path = dir.join(MANIFEST_FILE);
    let text = serde_json::to_string_pretty(entries).expect("manifest serializes");
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, text + "\n"))
        .map_err(|source| LogError::Io { path, source })
}

pub fn read_manifest(dir: &Path) -> Result<Vec<ManifestEntry>, LogError> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path).map_err(|source| LogError::Io {
        path: path.clone(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| LogError::Parse {
        path,
        line: 0,
        source,
    })
}
