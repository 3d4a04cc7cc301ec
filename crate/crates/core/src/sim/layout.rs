use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;
use crate::model::{wrap_angle, Rect, Vec2};

pub const POLE_COUNT: usize = 6;

/// Poles, the robot's home position and the walkable rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldLayout {
    pub poles: [Vec2; POLE_COUNT],
    pub robot_home: Vec2,
    /// Heading the robot is given at every task start.
    #[serde(default)]
    pub robot_home_heading: f64,
    pub bounds: Rect,
}

impl Default for FieldLayout {
    fn default() -> Self {
        FieldLayout::hexagon(Vec2::ZERO, 8.0, 20.0, 20.0)
    }
}

impl FieldLayout {
    /// Poles on a regular hexagon around `center`, pole 0 on the +x axis and
    /// numbered counter-clockwise.
    pub fn hexagon(center: Vec2, radius: f64, width: f64, height: f64) -> Self {
        let poles = std::array::from_fn(|i| {
            let angle = i as f64 * PI / 3.0;
            center + Vec2::from_angle(angle) * radius
        });
        FieldLayout {
            poles,
            robot_home: center,
            robot_home_heading: 0.0,
            bounds: Rect::centered(center, width, height),
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.bounds.width() > 0.0 && self.bounds.height() > 0.0) {
            return Err(ConfigError::invalid("bounds", "must have positive size"));
        }
        if !self.bounds.contains(self.robot_home) {
            return Err(ConfigError::invalid("robot_home", "must lie inside bounds"));
        }
        if self.poles.iter().any(|p| !self.bounds.contains(*p)) {
            return Err(ConfigError::invalid("poles", "must lie inside bounds"));
        }
        if self.poles.iter().any(|p| p.distance(self.robot_home) == 0.0) {
            return Err(ConfigError::invalid("poles", "must not coincide with robot_home"));
        }
        Ok(())
    }

    /// Angular position of a pole around the robot's home.
    pub fn pole_angle(&self, index: usize) -> f64 {
        (self.poles[index] - self.robot_home).angle()
    }

    /// Poles whose angular distance from pole `index` exceeds 90°, in index order.
    pub fn opposite_poles(&self, index: usize) -> Vec<usize> {
        let base = self.pole_angle(index);
        (0..POLE_COUNT)
            .filter(|&j| wrap_angle(self.pole_angle(j) - base).abs() > FRAC_PI_2 + 1e-9)
            .collect()
    }
}
