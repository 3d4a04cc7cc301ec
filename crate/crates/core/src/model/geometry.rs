use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    let wrapped = (angle + PI).rem_euclid(TAU) - PI;
    if wrapped <= -PI {
        wrapped + TAU
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn from_angle(angle: f64) -> Self {
        Vec2::new(angle.cos(), angle.sin())
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3D cross product.
    pub fn cross(self, other: Vec2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    /// Unit vector, or zero for the zero vector.
    pub fn normalized(self) -> Vec2 {
        let n = self.norm();
        if n > 0.0 {
            self * (1.0 / n)
        } else {
            Vec2::ZERO
        }
    }

    /// Rotates by +90°.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }

    pub fn distance(self, other: Vec2) -> f64 {
        (other - self).norm()
    }
}

impl std::ops::Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, rhs: f64) -> Vec2 {
        Vec2::new(self.x * rhs, self.y * rhs)
    }
}

impl std::ops::Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Axis-aligned rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min: Vec2,
    pub max: Vec2,
}

impl Rect {
    pub fn centered(center: Vec2, width: f64, height: f64) -> Self {
        Rect {
            min: Vec2::new(center.x - width / 2.0, center.y - height / 2.0),
            max: Vec2::new(center.x + width / 2.0, center.y + height / 2.0),
        }
    }

    pub fn unbounded() -> Self {
        Rect {
            min: Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
            max: Vec2::new(f64::INFINITY, f64::INFINITY),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn clamp(&self, p: Vec2) -> Vec2 {
        Vec2::new(
            p.x.clamp(self.min.x, self.max.x),
            p.y.clamp(self.min.y, self.max.y),
        )
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }
}

/// World-frame position and heading of an agent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec2,
    /// Radians in `(-π, π]`.
    pub heading: f64,
}

impl Pose {
    pub fn new(x: f64, y: f64, heading: f64) -> Self {
        Pose {
            position: Vec2::new(x, y),
            heading: wrap_angle(heading),
        }
    }

    /// World-frame bearing from this pose to `point`; falls back to the
    /// heading when the points coincide.
    pub fn bearing_to(&self, point: Vec2) -> f64 {
        let d = point - self.position;
        if d.x == 0.0 && d.y == 0.0 {
            self.heading
        } else {
            d.angle()
        }
    }

    /// Signed angle of the direction to `point` measured from the heading.
    pub fn relative_bearing(&self, point: Vec2) -> f64 {
        wrap_angle(self.bearing_to(point) - self.heading)
    }
}

/// Distance and the two absolute relative angles between a pair of agents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RelationalState {
    pub r: f64,
    /// How far the observer's heading is from facing the other, in `[0, π]`.
    pub theta12: f64,
    /// How far the other's heading is from facing the observer, in `[0, π]`.
    pub theta21: f64,
}

impl RelationalState {
    /// The same pair seen from the other agent.
    pub fn swapped(self) -> Self {
        RelationalState {
            r: self.r,
            theta12: self.theta21,
            theta21: self.theta12,
        }
    }
}

/// Relational state of `other` as seen from `me`.
///
/// Coincident positions yield `r = 0` with both angles defined as 0.
pub fn relational_state(me: &Pose, other: &Pose) -> RelationalState {
    let d = other.position - me.position;
    let r = d.norm();
    if r == 0.0 {
        return RelationalState {
            r: 0.0,
            theta12: 0.0,
            theta21: 0.0,
        };
    }
    let to_other = d.angle();
    let to_me = (-d).angle();
    RelationalState {
        r,
        theta12: wrap_angle(to_other - me.heading).abs(),
        theta21: wrap_angle(to_me - other.heading).abs(),
    }
}
