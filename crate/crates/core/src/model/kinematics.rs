use super::field::MotionCommand;
use super::geometry::{wrap_angle, Pose, Rect, Vec2};

/// Advances a pose by one command held for `dt` seconds, then clamps the
/// position into `bounds`.
pub fn step_kinematics(p: &Pose, cmd: &MotionCommand, dt: f64, bounds: &Rect) -> Pose {
    debug_assert!(dt > 0.0);
    let heading = wrap_angle(p.heading + cmd.turn_rate * dt);
    let position = if cmd.speed > 0.0 {
        p.position + Vec2::from_angle(cmd.move_bearing) * (cmd.speed * dt)
    } else {
        p.position
    };
    Pose {
        position: bounds.clamp(position),
        heading,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn straight_advance() {
        let p = Pose::new(1.0, 2.0, 0.5);
        let cmd = MotionCommand {
            speed: 1.2,
            turn_rate: 0.0,
            move_bearing: 0.5,
        };
        let q = step_kinematics(&p, &cmd, 0.05, &Rect::unbounded());
        assert!((q.position.distance(p.position) - 1.2 * 0.05).abs() < 1e-12);
        assert!((q.position - p.position).angle() - 0.5 < 1e-12);
        assert_eq!(q.heading, 0.5);
    }

    #[test]
    fn turn_in_place() {
        let p = Pose::new(0.0, 0.0, 0.2);
        let cmd = MotionCommand {
            speed: 0.0,
            turn_rate: 2.0,
            move_bearing: 0.0,
        };
        let q = step_kinematics(&p, &cmd, 0.05, &Rect::unbounded());
        assert_eq!(q.position, p.position);
        assert!((q.heading - 0.3).abs() < 1e-12);
    }

    #[test]
    fn heading_wraps_past_pi() {
        let p = Pose::new(0.0, 0.0, PI - 0.01);
        let cmd = MotionCommand {
            speed: 0.0,
            turn_rate: 0.4,
            move_bearing: 0.0,
        };
        let q = step_kinematics(&p, &cmd, 0.05, &Rect::unbounded());
        assert!((q.heading - (-PI + 0.01)).abs() < 1e-12);
    }

    #[test]
    fn clamps_to_bounds() {
        let bounds = Rect::centered(Vec2::ZERO, 2.0, 2.0);
        let p = Pose::new(0.99, 0.0, 0.0);
        let cmd = MotionCommand {
            speed: 1.0,
            turn_rate: 0.0,
            move_bearing: 0.0,
        };
        let q = step_kinematics(&p, &cmd, 0.05, &bounds);
        assert_eq!(q.position.x, 1.0);
    }
}
