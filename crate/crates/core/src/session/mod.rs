//! Real-time session host: one simulated world with a remotely steered
//! participant, advanced one 50 ms tick at a time.
//!
//! The host is transport-agnostic. A server feeds it inbound text frames via
//! [`Session::handle_text`], calls [`Session::tick`] on a fixed period and
//! broadcasts the returned messages.

pub mod protocol;

use serde::{Deserialize, Serialize};

use crate::analysis::TrialMetrics;
use crate::error::ConfigError;
use crate::model::{Vec2, TICK_SECONDS};
use crate::sim::trial::meta_for;
use crate::sim::{
    Condition, FieldLayout, ParticipantPreset, Policy, Sample, TrajectoryLog, TrialConfig, World,
};
pub use protocol::{
    parse_client_message, AgentDebug, AgentPose, ClientMessage, ConfigFrame, ErrorCode,
    ServerMessage, StateFrame, TaskSummary, TrialSummary,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionConfig {
    pub condition: Condition,
    pub seed: u64,
    #[serde(default)]
    pub layout: FieldLayout,
    /// Include internal states and estimates in state frames.
    #[serde(default)]
    pub debug: bool,
    /// Practice run: the robot stays put while the participant learns the
    /// controls.
    #[serde(default)]
    pub practice: bool,
}

impl SessionConfig {
    pub fn new(condition: Condition, seed: u64) -> Self {
        SessionConfig {
            condition,
            seed,
            layout: FieldLayout::default(),
            debug: false,
            practice: false,
        }
    }

    fn trial_config(&self) -> TrialConfig {
        TrialConfig {
            layout: self.layout.clone(),
            // The preset is irrelevant for a remote participant.
            ..TrialConfig::new(self.condition, ParticipantPreset::Approaching)
        }
    }

    pub fn log_name(&self, id: &str) -> String {
        format!("session_{id}_{}_s{}", self.condition.label(), self.seed)
    }
}

/// One accepted input, stamped with the tick it first applies to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputEvent {
    /// Number of ticks completed when the input arrived.
    pub tick: u64,
    pub seq: u64,
    #[serde(rename = "move")]
    pub mv: [f64; 2],
}

/// Everything needed to re-simulate a session offline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub id: String,
    pub config: SessionConfig,
    pub inputs: Vec<InputEvent>,
}

pub struct Session {
    id: String,
    config: SessionConfig,
    trial: TrialConfig,
    world: World,
    clients: usize,
    last_seq: Option<u64>,
    inputs: Vec<InputEvent>,
}

fn build_world(config: &SessionConfig, trial: &TrialConfig) -> World {
    let mut spec = trial.world_spec(config.seed, Policy::Remote);
    if config.practice {
        spec.robot.policy = Policy::Stationary;
    }
    World::new(spec)
}

impl Session {
    pub fn new(id: impl Into<String>, config: SessionConfig) -> Result<Self, ConfigError> {
        let trial = config.trial_config();
        trial.validate()?;
        let world = build_world(&config, &trial);
        Ok(Session {
            id: id.into(),
            config,
            trial,
            world,
            clients: 0,
            last_seq: None,
            inputs: Vec::new(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn config(&self) -> &SessionConfig {
        &self.config
    }

    /// Ticking starts with the first join and stops when the trial ends.
    pub fn is_running(&self) -> bool {
        self.clients > 0 && !self.world.finished
    }

    pub fn is_finished(&self) -> bool {
        self.world.finished
    }

    pub fn clients(&self) -> usize {
        self.clients
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn config_frame(&self) -> ConfigFrame {
        ConfigFrame {
            session: self.id.clone(),
            condition: self.config.condition,
            seed: self.config.seed,
            tick_seconds: TICK_SECONDS,
            v_max: self.world.participant.spec.phi.v_max,
            layout: self.config.layout.clone(),
            participant_id: self.world.participant.spec.id.clone(),
            robot_id: self.world.robot.spec.id.clone(),
            debug: self.config.debug,
            practice: self.config.practice,
        }
    }

    /// Handles one inbound text frame. Returns the direct replies for the
    /// sending client: a config frame on join, an error frame on bad input,
    /// nothing otherwise.
    pub fn handle_text(&mut self, text: &str) -> Vec<ServerMessage> {
        match parse_client_message(text) {
            Ok(msg) => self.handle(msg),
            Err((code, message)) => vec![ServerMessage::Error { code, message }],
        }
    }

    pub fn handle(&mut self, msg: ClientMessage) -> Vec<ServerMessage> {
        match msg {
            ClientMessage::Join { .. } => {
                self.clients += 1;
                vec![ServerMessage::Config(self.config_frame())]
            }
            ClientMessage::Leave => {
                self.clients = self.clients.saturating_sub(1);
                // With nobody steering, the participant stops and the clock
                // pauses until the next join.
                if self.clients == 0 && self.world.remote_move() != Vec2::ZERO {
                    self.inputs.push(InputEvent {
                        tick: self.world.tick,
                        seq: self.last_seq.unwrap_or(0),
                        mv: [0.0, 0.0],
                    });
                    self.world.set_remote_move(Vec2::ZERO);
                }
                Vec::new()
            }
            ClientMessage::Input { seq, mv } => {
                if self.clients == 0 {
                    return vec![ServerMessage::Error {
                        code: ErrorCode::NotJoined,
                        message: "join before sending input".into(),
                    }];
                }
                if !(mv[0].is_finite() && mv[1].is_finite()) {
                    return vec![ServerMessage::Error {
                        code: ErrorCode::BadMessage,
                        message: "move components must be finite".into(),
                    }];
                }
                if self.last_seq.is_some_and(|last| seq <= last) {
                    return Vec::new();
                }
                self.last_seq = Some(seq);
                let mv = [mv[0].clamp(-1.0, 1.0), mv[1].clamp(-1.0, 1.0)];
                self.inputs.push(InputEvent {
                    tick: self.world.tick,
                    seq,
                    mv,
                });
                self.world.set_remote_move(Vec2::new(mv[0], mv[1]));
                Vec::new()
            }
        }
    }

    /// Advances one tick if running and returns the frames to broadcast.
    pub fn tick(&mut self) -> Vec<ServerMessage> {
        if !self.is_running() {
            return Vec::new();
        }
        let outcome = self.world.tick();
        let mut out = vec![ServerMessage::State(self.state_frame(self.world.last_sample()))];
        if outcome.trial_done {
            out.push(ServerMessage::TrialDone {
                summary: self.summary(),
            });
        }
        out
    }

    fn state_frame(&self, s: &Sample) -> StateFrame {
        StateFrame {
            t: s.tick,
            task: s.task,
            target: s.target,
            agents: s
                .agents
                .iter()
                .map(|a| AgentPose {
                    id: a.id.clone(),
                    x: a.x,
                    y: a.y,
                    heading: a.heading,
                })
                .collect(),
            task_done: s.task_done,
            trial_done: s.trial_done,
            debug: self.config.debug.then(|| {
                s.agents
                    .iter()
                    .map(|a| AgentDebug {
                        id: a.id.clone(),
                        c: a.c,
                        a: a.a,
                        c_hat: a.c_hat,
                        a_hat: a.a_hat,
                        informative: a.informative,
                    })
                    .collect()
            }),
        }
    }

    /// Per-task summary computed from the session log.
    pub fn summary(&self) -> TrialSummary {
        let log = self.log();
        let metrics = TrialMetrics::from_log(&log, 0);
        TrialSummary {
            mean_a_void: metrics.mean_a_void(),
            tasks: metrics
                .tasks
                .iter()
                .map(|t| TaskSummary {
                    task: t.task,
                    target: t.target,
                    ticks: t.ticks,
                    timed_out: log.meta.tasks.get(t.task).is_some_and(|r| r.timed_out),
                    a_void: t.a_void,
                    path_length: t.path_length,
                })
                .collect(),
        }
    }

    /// The session's trajectory log so far.
    pub fn log(&self) -> TrajectoryLog {
        session_log(&self.id, &self.config, &self.trial, &self.world)
    }

    pub fn record(&self) -> SessionRecord {
        SessionRecord {
            id: self.id.clone(),
            config: self.config.clone(),
            inputs: self.inputs.clone(),
        }
    }
}

fn session_log(id: &str, config: &SessionConfig, trial: &TrialConfig, world: &World) -> TrajectoryLog {
    let mut meta = meta_for(trial, world, config.log_name(id), config.seed);
    meta.participant = None;
    meta.psi_participant = None;
    TrajectoryLog {
        meta,
        samples: world.samples().to_vec(),
    }
}

/// Re-simulates a session from its record, ticking until the recorded
/// inputs are exhausted and then `ticks` total ticks have run (or the trial
/// ends).
pub fn replay(record: &SessionRecord, ticks: u64) -> Result<TrajectoryLog, ConfigError> {
    let trial = record.config.trial_config();
    trial.validate()?;
    let mut world = build_world(&record.config, &trial);
    let mut inputs = record.inputs.iter().peekable();
    while world.tick < ticks && !world.finished {
        while let Some(ev) = inputs.next_if(|ev| ev.tick <= world.tick) {
            world.set_remote_move(Vec2::new(ev.mv[0], ev.mv[1]));
        }
        world.tick();
    }
    Ok(session_log(&record.id, &record.config, &trial, &world))
}
