//! Shared physical constants and unit conversions.

/// Fixed simulation time step (s).
pub const DT: f64 = 0.01;

/// Steps per full run (100 s at 100 Hz).
pub const RUN_STEPS: usize = 10_000;

/// Full-brake deceleration denominator (m/s^2), also the traction ceiling at
/// friction 1.0.
pub const A_MAX_PHYSICAL: f64 = 9.8;

/// Maximum propulsive acceleration at friction 1.0 (m/s^2).
pub const A_PROP_MAX: f64 = 2.0;

/// Vehicle wheelbase (m).
pub const WHEELBASE: f64 = 2.7;

/// Maximum steering angle (rad); 10 degrees.
pub const STEER_MAX: f64 = 10.0 * std::f64::consts::PI / 180.0;

/// Default lane width (m).
pub const LANE_WIDTH: f64 = 3.7;

/// Lead-detection range limit (m).
pub const DETECTION_RANGE: f64 = 250.0;

/// Close-range detection floor (m): below this true gap the camera surrogate
/// loses the lead vehicle.
pub const DETECTION_FLOOR: f64 = 2.0;

/// Curvature corresponding to the maximum steering angle (1/m).
pub fn kappa_max() -> f64 {
    STEER_MAX.tan() / WHEELBASE
}

/// Convert miles per hour to meters per second.
pub fn mph(v: f64) -> f64 {
    v * 0.44704
}

/// Steering angle (rad) implied by a path curvature on the bicycle geometry.
pub fn steer_of_curvature(kappa: f64) -> f64 {
    (kappa * WHEELBASE).atan()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mph_anchors() {
        assert!((mph(50.0) - 22.352).abs() < 1e-9);
        assert!((mph(30.0) - 13.4112).abs() < 1e-9);
        assert!((mph(40.0) - 17.8816).abs() < 1e-9);
    }

    #[test]
    fn kappa_max_from_steering_geometry() {
        let k = kappa_max();
        assert!((k - (10f64.to_radians().tan() / 2.7)).abs() < 1e-15);
        assert!((steer_of_curvature(k) - 10f64.to_radians()).abs() < 1e-12);
    }
}
