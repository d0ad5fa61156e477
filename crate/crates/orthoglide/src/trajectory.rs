//! Raised-cosine platform trajectory used by the simulation sweeps.

use crate::kinematics::PlatformState;
use crate::math::Vec3;

/// Platform motion `r_i(t) = amplitude_i * (1 - cos(angular_rate * t))`,
/// starting at rest from the central configuration. Velocity and
/// acceleration come from exact differentiation.
#[derive(Debug, Clone, Copy)]
pub struct CosineTrajectory {
    pub amplitude: Vec3,
    /// rad/s.
    pub angular_rate: f64,
    /// Default sweep window, s.
    pub duration: f64,
}

impl Default for CosineTrajectory {
    /// Reference sweep: amplitudes (0.05, 0.10, -0.20) m, angular rate
    /// pi/3 rad/s, 2 s window.
    fn default() -> Self {
        CosineTrajectory {
            amplitude: Vec3::new(0.05, 0.10, -0.20),
            angular_rate: std::f64::consts::PI / 3.0,
            duration: 2.0,
        }
    }
}

impl CosineTrajectory {
    pub fn state(&self, t: f64) -> PlatformState {
        let w = self.angular_rate;
        let (s, c) = (w * t).sin_cos();
        PlatformState {
            r: self.amplitude * (1.0 - c),
            v: self.amplitude * (w * s),
            a: self.amplitude * (w * w * c),
        }
    }
}
