use std::collections::VecDeque;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::agent::{AgentSpec, ParticipantProfile, Policy, RandomWalkParams};
use super::layout::FieldLayout;
use super::log::{AgentSample, Sample, TaskRecord};
use super::schedule::{TaskSchedule, Target};
use crate::model::{
    behavior_field, estimate_internal, field_drive, relational_state, step_kinematics,
    update_internal, wrap_angle, BehaviorParams, EstimatedState, InternalState, MotionCommand,
    Pose, Vec2, WindowObservation, TICK_SECONDS,
};

/// Protocol constants of the task loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldParams {
    /// Distance at which a target counts as reached, m.
    pub capture_radius: f64,
    /// Tick cap per task (40 s at 50 ms).
    pub max_ticks_per_task: u64,
    /// Weight of the social drive against goal attraction.
    pub goal_blend: f64,
    pub random_walk: RandomWalkParams,
}

impl Default for WorldParams {
    fn default() -> Self {
        WorldParams {
            capture_radius: 0.8,
            max_ticks_per_task: 800,
            goal_blend: 1.0,
            random_walk: RandomWalkParams::default(),
        }
    }
}

/// Everything needed to build a [`World`].
#[derive(Debug, Clone)]
pub struct WorldSpec {
    pub layout: FieldLayout,
    pub schedule: TaskSchedule,
    pub robot: AgentSpec,
    pub participant: AgentSpec,
    /// Participant state per task kind: `(pole, object)`. The participant
    /// starts every task from the profile of that task's kind.
    pub participant_profiles: Option<(ParticipantProfile, ParticipantProfile)>,
    pub params: WorldParams,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct AgentState {
    pub spec: AgentSpec,
    pub pose: Pose,
    pub state: InternalState,
    pub estimate: EstimatedState,
    /// Recent poses of the other agent, oldest first.
    observed: VecDeque<Pose>,
}

impl AgentState {
    fn new(spec: AgentSpec) -> Self {
        let state = if spec.policy.is_cognitive() {
            spec.s0
        } else {
            InternalState::NEUTRAL
        };
        AgentState {
            pose: spec.start_pose,
            state,
            estimate: EstimatedState::default(),
            observed: VecDeque::with_capacity(spec.cog.window + 1),
            spec,
        }
    }

    fn observe(&mut self, other: Pose) {
        self.observed.push_back(other);
        while self.observed.len() > self.spec.cog.window + 1 {
            self.observed.pop_front();
        }
    }

    /// Estimate of the other for this tick, or the held previous one while
    /// the observation window is still filling.
    fn next_estimate(&self, phi_hat: &BehaviorParams) -> EstimatedState {
        if self.observed.len() < self.spec.cog.window + 1 {
            return self.estimate.held();
        }
        let obs = WindowObservation {
            observer: self.pose,
            other_start: self.observed[0],
            other_end: self.observed[self.observed.len() - 1],
        };
        estimate_internal(&obs, phi_hat, &self.spec.cog, &self.estimate)
    }

    pub fn sample(&self) -> AgentSample {
        AgentSample {
            id: self.spec.id.clone(),
            x: self.pose.position.x,
            y: self.pose.position.y,
            heading: self.pose.heading,
            c: self.state.c,
            a: self.state.a,
            c_hat: self.estimate.s_hat.c,
            a_hat: self.estimate.s_hat.a,
            informative: self.estimate.informative,
        }
    }
}

/// What happened on one tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TickOutcome {
    /// Index of the task that ended on this tick.
    pub task_done: Option<usize>,
    pub timed_out: bool,
    pub trial_done: bool,
}

/// Two-agent world advanced in 50 ms ticks.
#[derive(Debug, Clone)]
pub struct World {
    pub layout: FieldLayout,
    pub schedule: TaskSchedule,
    pub params: WorldParams,
    pub robot: AgentState,
    pub participant: AgentState,
    profiles: Option<(ParticipantProfile, ParticipantProfile)>,
    pub tick: u64,
    pub task: usize,
    task_start: u64,
    pub tasks: Vec<TaskRecord>,
    pub finished: bool,
    remote_move: Vec2,
    rng: ChaCha8Rng,
    samples: Vec<Sample>,
}

/// Turn rate that brings `heading` onto `bearing` within one tick, capped at `omega_max`.
fn steer(heading: f64, bearing: f64, omega_max: f64) -> f64 {
    (wrap_angle(bearing - heading) / TICK_SECONDS).clamp(-omega_max, omega_max)
}

impl World {
    pub fn new(spec: WorldSpec) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        rng.set_stream(1);
        let mut world = World {
            robot: AgentState::new(spec.robot),
            participant: AgentState::new(spec.participant),
            layout: spec.layout,
            schedule: spec.schedule,
            params: spec.params,
            profiles: spec.participant_profiles,
            tick: 0,
            task: 0,
            task_start: 0,
            tasks: Vec::new(),
            finished: false,
            remote_move: Vec2::ZERO,
            rng,
            samples: Vec::new(),
        };
        world.load_participant_profile();
        world.robot.observe(world.participant.pose);
        world.participant.observe(world.robot.pose);
        let first = world.snapshot(false, false);
        world.samples.push(first);
        world
    }

    pub fn current_target(&self) -> Target {
        self.schedule.entries[self.task.min(self.schedule.entries.len() - 1)]
    }

    pub fn target_position(&self, target: Target) -> Vec2 {
        match target {
            Target::Pole { index } => self.layout.poles[index],
            Target::Object => self.robot.pose.position,
        }
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Sample> {
        self.samples
    }

    pub fn last_sample(&self) -> &Sample {
        self.samples.last().expect("initial sample exists")
    }

    /// Desired velocity of a remote participant as a fraction of `v_max`;
    /// norms above 1 are scaled back onto the unit circle.
    pub fn set_remote_move(&mut self, mv: Vec2) {
        let n = mv.norm();
        self.remote_move = if n.is_finite() && n > 1.0 {
            mv * (1.0 / n)
        } else if n.is_finite() {
            mv
        } else {
            Vec2::ZERO
        };
    }

    pub fn remote_move(&self) -> Vec2 {
        self.remote_move
    }

    fn snapshot(&self, task_done: bool, trial_done: bool) -> Sample {
        Sample {
            tick: self.tick,
            task: self.task,
            target: self.current_target(),
            agents: vec![self.robot.sample(), self.participant.sample()],
            task_done,
            trial_done,
        }
    }

    fn load_participant_profile(&mut self) {
        if let Some((pole, object)) = self.profiles {
            let target = self.current_target();
            let profile = if target.is_pole() { pole } else { object };
            self.participant.state = profile.s0;
            self.participant.spec.cog.psi = profile.psi;
            self.participant.estimate = EstimatedState::default();
        }
    }

    fn command(&mut self, is_robot: bool) -> MotionCommand {
        let (me, other) = if is_robot {
            (&self.robot, &self.participant)
        } else {
            (&self.participant, &self.robot)
        };
        let phi = &me.spec.phi;
        match me.spec.policy {
            Policy::Model => behavior_field(&me.pose, &other.pose, me.state, phi),
            Policy::GoalSeek => {
                let target = self.current_target();
                let goal = self.target_position(target);
                // Reaching for the robot's object overrides the social reaction.
                let social = if target.is_pole() {
                    self.params.goal_blend
                } else {
                    0.0
                };
                goal_seek_command(me, other, goal, social)
            }
            Policy::RandomWalk => {
                let rw = self.params.random_walk;
                let noise = Normal::new(0.0, rw.heading_sd).expect("finite sd");
                let turn = noise.sample(&mut self.rng);
                let heading = wrap_angle(me.pose.heading + turn);
                MotionCommand {
                    speed: rw.speed_fraction * phi.v_max,
                    turn_rate: turn / TICK_SECONDS,
                    move_bearing: heading,
                }
            }
            Policy::Remote => {
                let mv = self.remote_move;
                let n = mv.norm();
                if n == 0.0 {
                    MotionCommand::idle(me.pose.heading)
                } else {
                    let bearing = mv.angle();
                    MotionCommand {
                        speed: n.min(1.0) * phi.v_max,
                        turn_rate: steer(me.pose.heading, bearing, phi.omega_max),
                        move_bearing: bearing,
                    }
                }
            }
            Policy::Stationary => MotionCommand::idle(me.pose.heading),
        }
    }

    fn advance(&self, agent: &AgentState, cmd: &MotionCommand) -> Pose {
        if agent.spec.policy == Policy::RandomWalk {
            reflect_step(&agent.pose, cmd, &self.layout)
        } else {
            step_kinematics(&agent.pose, cmd, TICK_SECONDS, &self.layout.bounds)
        }
    }

    /// Advances the world by one tick and appends a log sample.
    pub fn tick(&mut self) -> TickOutcome {
        if self.finished {
            return TickOutcome {
                trial_done: true,
                ..Default::default()
            };
        }

        // Estimate the other and update own internal state.
        if self.robot.spec.policy.is_cognitive() {
            let est = self.robot.next_estimate(&self.participant.spec.phi);
            self.robot.state = update_internal(self.robot.state, &est, &self.robot.spec.cog);
            self.robot.estimate = est;
        }
        if self.participant.spec.policy.is_cognitive() {
            let est = self.participant.next_estimate(&self.robot.spec.phi);
            self.participant.state =
                update_internal(self.participant.state, &est, &self.participant.spec.cog);
            self.participant.estimate = est;
        }

        // Both agents act on the same snapshot.
        let robot_cmd = self.command(true);
        let participant_cmd = self.command(false);
        let robot_pose = self.advance(&self.robot, &robot_cmd);
        let participant_pose = self.advance(&self.participant, &participant_cmd);
        self.robot.pose = robot_pose;
        self.participant.pose = participant_pose;
        self.robot.observe(participant_pose);
        self.participant.observe(robot_pose);
        self.tick += 1;

        let target = self.current_target();
        let reached = self.participant.pose.position.distance(self.target_position(target))
            <= self.params.capture_radius;
        let timed_out = !reached && self.tick - self.task_start >= self.params.max_ticks_per_task;
        let mut outcome = TickOutcome::default();
        if reached || timed_out {
            self.tasks.push(TaskRecord {
                index: self.task,
                target,
                start_tick: self.task_start,
                end_tick: self.tick,
                timed_out,
            });
            outcome.task_done = Some(self.task);
            outcome.timed_out = timed_out;
            if self.task + 1 >= self.schedule.entries.len() {
                self.finished = true;
                outcome.trial_done = true;
            } else {
                self.start_next_task();
            }
        }
        let sample = self.snapshot(outcome.task_done.is_some(), outcome.trial_done);
        self.samples.push(sample);
        outcome
    }

    fn start_next_task(&mut self) {
        self.task += 1;
        self.task_start = self.tick;
        self.load_participant_profile();

        // The robot returns home with its initial internal state.
        self.robot.pose = Pose::new(
            self.layout.robot_home.x,
            self.layout.robot_home.y,
            self.layout.robot_home_heading,
        );
        self.robot.state = if self.robot.spec.policy.is_cognitive() {
            self.robot.spec.s0
        } else {
            InternalState::NEUTRAL
        };
        self.robot.estimate = EstimatedState::default();
        // The teleport is not motion: restart the participant's view of the robot.
        self.participant.observed.clear();
        self.participant.observe(self.robot.pose);
    }

    /// Runs until the trial finishes.
    pub fn run_to_end(&mut self) {
        while !self.finished {
            self.tick();
        }
    }
}

/// Goal attraction blended with the social drive toward/away from the other.
///
/// A retreat also sidesteps around the other on the side where the goal
/// lies, so a blocked straight line turns into a detour instead of a stall.
fn goal_seek_command(me: &AgentState, other: &AgentState, goal: Vec2, blend: f64) -> MotionCommand {
    let phi = &me.spec.phi;
    let to_goal = (goal - me.pose.position).normalized();
    let mut desired = to_goal;
    if blend != 0.0 {
        let x = relational_state(&me.pose, &other.pose);
        let k = field_drive(&x, me.state, phi);
        let toward = (other.pose.position - me.pose.position).normalized();
        let mut social = toward * k;
        if k < 0.0 {
            let side = toward.perp();
            let sign = if to_goal.dot(side) >= 0.0 { 1.0 } else { -1.0 };
            social = social + side * (sign * -k);
        }
        desired = desired + social * blend;
    }
    if desired.norm() < 1e-9 {
        return MotionCommand::idle(me.pose.heading);
    }
    let bearing = desired.angle();
    MotionCommand {
        speed: phi.v_max,
        turn_rate: steer(me.pose.heading, bearing, phi.omega_max),
        move_bearing: bearing,
    }
}

/// Straight step along the heading with specular reflection at the bounds.
fn reflect_step(p: &Pose, cmd: &MotionCommand, layout: &FieldLayout) -> Pose {
    let b = &layout.bounds;
    let mut heading = cmd.move_bearing;
    let mut pos = p.position + Vec2::from_angle(heading) * (cmd.speed * TICK_SECONDS);
    if pos.x > b.max.x {
        pos.x = 2.0 * b.max.x - pos.x;
        heading = std::f64::consts::PI - heading;
    } else if pos.x < b.min.x {
        pos.x = 2.0 * b.min.x - pos.x;
        heading = std::f64::consts::PI - heading;
    }
    if pos.y > b.max.y {
        pos.y = 2.0 * b.max.y - pos.y;
        heading = -heading;
    } else if pos.y < b.min.y {
        pos.y = 2.0 * b.min.y - pos.y;
        heading = -heading;
    }
    Pose {
        position: b.clamp(pos),
        heading: wrap_angle(heading),
    }
}
