//! Per-task trajectory metrics and the per-trial metrics table.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::model::Vec2;
use crate::sim::{Condition, Target, TrajectoryLog};

/// Mean |sin α| over a path heading for `target`.
///
/// α is the angle between each step and the vector from the step's start
/// to the target. Steps shorter than `min_step` are skipped. Returns `None`
/// when no step qualifies.
pub fn avoidance_of_path(path: &[Vec2], target: Vec2, min_step: f64) -> Option<AvoidanceSeries> {
    let mut gaps = Vec::new();
    for w in path.windows(2) {
        let step = w[1] - w[0];
        let to_target = target - w[0];
        let (ls, lt) = (step.norm(), to_target.norm());
        if ls < min_step || lt == 0.0 || !(ls.is_finite() && lt.is_finite()) {
            continue;
        }
        let sin = (step.cross(to_target) / (ls * lt)).clamp(-1.0, 1.0);
        gaps.push(sin.abs());
    }
    if gaps.is_empty() {
        return None;
    }
    let a_void = gaps.iter().sum::<f64>() / gaps.len() as f64;
    Some(AvoidanceSeries { a_void, gaps })
}

/// Sum of step lengths along a path.
pub fn path_length(path: &[Vec2]) -> f64 {
    path.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AvoidanceSeries {
    pub a_void: f64,
    /// |sin α_t| of every qualifying step.
    pub gaps: Vec<f64>,
}

impl AvoidanceSeries {
    pub fn n(&self) -> usize {
        self.gaps.len()
    }
}

fn min_step(log: &TrajectoryLog) -> f64 {
    let eps_v = log
        .meta
        .agents
        .iter()
        .find(|a| a.id == log.meta.participant_id)
        .map(|a| a.cog.eps_v)
        .unwrap_or(crate::model::CognitiveParams::default().eps_v);
    eps_v * log.meta.tick_seconds
}

/// Participant avoidance on a pole task, or `None` for object tasks and
/// tasks without any qualifying movement.
pub fn compute_avoidance(log: &TrajectoryLog, task: usize) -> Option<AvoidanceSeries> {
    let Target::Pole { index } = log.task_target(task)? else {
        return None;
    };
    let pole = *log.meta.layout.poles.get(index)?;
    avoidance_of_path(&log.participant_path(task), pole, min_step(log))
}

/// Distance walked by the participant during a task.
pub fn compute_path_length(log: &TrajectoryLog, task: usize) -> f64 {
    path_length(&log.participant_path(task))
}

/// Metrics of one trial, one entry per task.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub log: String,
    pub trial: usize,
    pub condition: Option<Condition>,
    pub tasks: Vec<TaskMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskMetrics {
    pub task: usize,
    pub target: Target,
    pub a_void: Option<f64>,
    pub path_length: f64,
    pub ticks: u64,
}

impl TrialMetrics {
    pub fn from_log(log: &TrajectoryLog, trial: usize) -> Self {
        let tasks = log
            .meta
            .schedule
            .iter()
            .enumerate()
            .map(|(task, &target)| {
                let ticks = log
                    .meta
                    .tasks
                    .get(task)
                    .map(|r| r.end_tick.saturating_sub(r.start_tick))
                    .unwrap_or(0);
                TaskMetrics {
                    task,
                    target,
                    a_void: compute_avoidance(log, task).map(|s| s.a_void),
                    path_length: compute_path_length(log, task),
                    ticks,
                }
            })
            .collect();
        TrialMetrics {
            log: log.meta.name.clone(),
            trial,
            condition: log.meta.condition,
            tasks,
        }
    }

    /// Mean a_void over pole tasks with a defined value.
    pub fn mean_a_void(&self) -> Option<f64> {
        mean(self.tasks.iter().filter_map(|t| t.a_void))
    }

    /// Mean path length over object tasks.
    pub fn mean_object_path(&self) -> Option<f64> {
        mean(
            self.tasks
                .iter()
                .filter(|t| !t.target.is_pole())
                .map(|t| t.path_length),
        )
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Long-format CSV with header `trial,condition,task,metric,value`.
pub fn metrics_csv(trials: &[TrialMetrics]) -> String {
    let mut out = String::from("trial,condition,task,metric,value\n");
    for t in trials {
        let cond = t.condition.map(|c| c.label()).unwrap_or("");
        for task in &t.tasks {
            if let Some(v) = task.a_void {
                let _ = writeln!(out, "{},{},{},a_void,{}", t.trial, cond, task.task, v);
            }
            let _ = writeln!(
                out,
                "{},{},{},path_length,{}",
                t.trial, cond, task.task, task.path_length
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn line(from: Vec2, dir: Vec2, steps: usize, step: f64) -> Vec<Vec2> {
        let d = dir.normalized();
        (0..=steps).map(|i| from + d * (step * i as f64)).collect()
    }

    #[test]
    fn straight_run_has_no_avoidance() {
        let path = line(Vec2::ZERO, Vec2::new(1.0, 0.0), 50, 0.05);
        let s = avoidance_of_path(&path, Vec2::new(10.0, 0.0), 1e-3).unwrap();
        assert_eq!(s.a_void, 0.0);
        assert_eq!(s.n(), 50);
    }

    #[test]
    fn constant_thirty_degree_offset_gives_half() {
        // Every step points 30 degrees off the current line of sight.
        let target = Vec2::new(0.0, 0.0);
        let mut p = Vec2::new(10.0, 0.0);
        let mut path = vec![p];
        for _ in 0..100 {
            let sight = (target - p).angle();
            p = p + Vec2::from_angle(sight + 30f64.to_radians()) * 0.05;
            path.push(p);
        }
        let s = avoidance_of_path(&path, target, 1e-3).unwrap();
        assert!((s.a_void - 0.5).abs() < 1e-12, "{}", s.a_void);
    }

    #[test]
    fn semicircle_matches_numeric_integral() {
        // Walk a half circle of radius R from (-R,0) to (R,0) over the top;
        // the target sits at (R,0). Sampled at 50 ms with speed 1 m/s.
        let r = 2.0;
        let target = Vec2::new(r, 0.0);
        let n = ((std::f64::consts::PI * r) / 0.05).round() as usize;
        let pt = |k: usize| {
            let th = std::f64::consts::PI * (1.0 - k as f64 / n as f64);
            Vec2::new(r * th.cos(), r * th.sin())
        };
        let path: Vec<Vec2> = (0..=n).map(pt).collect();
        let got = avoidance_of_path(&path, target, 1e-6).unwrap().a_void;

        // Oracle: for a point at angle th on the circle, the tangent
        // direction (clockwise) and the chord to (R,0) meet at angle th/2,
        // so the continuous mean of |sin α| over th in (0, pi) is
        // (1/pi) * integral of sin(th/2) = 2/pi.
        let continuous = 2.0 / std::f64::consts::PI;
        assert!((got - continuous).abs() < 0.01, "{got} vs {continuous}");
    }

    #[test]
    fn stationary_path_is_undefined() {
        let path = vec![Vec2::new(1.0, 1.0); 20];
        assert!(avoidance_of_path(&path, Vec2::ZERO, 1e-3).is_none());
        assert_eq!(path_length(&path), 0.0);
    }

    #[test]
    fn path_lengths() {
        let path = line(Vec2::ZERO, Vec2::new(0.0, 1.0), 100, 0.05);
        assert!((path_length(&path) - 5.0).abs() < 1e-12);
        let l = 3.0;
        let square = [
            Vec2::ZERO,
            Vec2::new(l, 0.0),
            Vec2::new(l, l),
            Vec2::new(0.0, l),
            Vec2::ZERO,
        ];
        assert!((path_length(&square) - 4.0 * l).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn a_void_bounded_and_rigid_invariant(
            pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..40),
            tx in -10.0f64..10.0, ty in -10.0f64..10.0,
            rot in -3.2f64..3.2, dx in -50.0f64..50.0, dy in -50.0f64..50.0,
        ) {
            let path: Vec<Vec2> = pts.iter().map(|&(x, y)| Vec2::new(x, y)).collect();
            let target = Vec2::new(tx, ty);
            let (c, s) = (rot.cos(), rot.sin());
            let tf = |p: Vec2| Vec2::new(c * p.x - s * p.y + dx, s * p.x + c * p.y + dy);
            let moved: Vec<Vec2> = path.iter().copied().map(tf).collect();
            let a = avoidance_of_path(&path, target, 1e-6);
            let b = avoidance_of_path(&moved, tf(target), 1e-6);
            if let (Some(a), Some(b)) = (&a, &b) {
                prop_assert!((0.0..=1.0).contains(&a.a_void));
                prop_assert!((a.a_void - b.a_void).abs() < 1e-9);
            }
        }
    }
}
