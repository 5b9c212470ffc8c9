use std::f64::consts::PI;

pub type Vec2 = nalgebra::Vector2<f64>;
pub type Vec3 = nalgebra::Vector3<f64>;

/// Wraps an angle into (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    if in_wrapped_range(angle) {
        return angle;
    }
    let wrapped = (angle + PI).rem_euclid(2.0 * PI) - PI;
    if wrapped <= -PI {
        wrapped + 2.0 * PI
    } else {
        wrapped
    }
}

pub fn in_wrapped_range(angle: f64) -> bool {
    angle > -PI && angle <= PI
}

/// Rotates a world-frame vector into a body frame with the given yaw.
pub fn world_to_body(v: Vec2, yaw: f64) -> Vec2 {
    let (s, c) = yaw.sin_cos();
    Vec2::new(c * v.x + s * v.y, -s * v.x + c * v.y)
}

/// Limits the Euclidean norm of `v` to `max`.
pub fn clamp_norm(v: Vec2, max: f64) -> Vec2 {
    let n = v.norm();
    if n > max {
        v * (max / n)
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wrap_boundaries() {
        assert_eq!(wrap_angle(PI), PI);
        assert_eq!(wrap_angle(-PI), PI);
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert!((wrap_angle(PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
        assert_eq!(wrap_angle(0.0), 0.0);
    }

    #[test]
    fn body_rotation() {
        let b = world_to_body(Vec2::new(0.0, 1.0), PI / 2.0);
        assert!((b.x - 1.0).abs() < 1e-12 && b.y.abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn wrap_stays_in_range_and_preserves_direction(a in -1.0e3f64..1.0e3) {
            let w = wrap_angle(a);
            prop_assert!(in_wrapped_range(w));
            prop_assert!((w.sin() - a.sin()).abs() < 1e-9);
            prop_assert!((w.cos() - a.cos()).abs() < 1e-9);
        }
    }
}
