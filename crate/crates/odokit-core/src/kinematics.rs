//! Differential-drive motion model: wheel speeds <-> body twist, plus the
//! first-order dead-reckoning pose integrator and the closed-form arc step
//! used as ground truth.
//!
//! Conventions: x/y in meters in a fixed world frame, headings in radians
//! counter-clockwise from the world x-axis and normalized to `[-PI, PI)`,
//! wheel rates in rad/s.

use core::f64::consts::PI;

/// Wheel radius of the reference platform (30 cm diameter drive wheels).
pub const DEFAULT_WHEEL_RADIUS: f64 = 0.15;

/// Track width default. The reference platform does not document its track
/// width; 0.56 m is typical for a powered wheelchair and is configurable.
pub const DEFAULT_TRACK_WIDTH: f64 = 0.56;

/// Wheel speed limit in rad/s, from the 106 rpm rating of the drive motors.
pub const DEFAULT_MAX_WHEEL_SPEED: f64 = 106.0 * 2.0 * PI / 60.0;

/// Below this rotation per step, `exact_arc_step` takes its straight-line
/// branch; the circular and linear formulas agree to double precision there.
pub const ARC_STEP_MIN_ROTATION: f64 = 1e-9;

/// A planar pose `(x, y, theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose2D {
    /// World-frame x position (m).
    pub x: f64,
    /// World-frame y position (m).
    pub y: f64,
    /// Heading (rad), normalized to `[-PI, PI)` by every operation that
    /// writes it.
    pub theta: f64,
}

impl Pose2D {
    /// Construct a pose, normalizing the heading.
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        Pose2D {
            x,
            y,
            theta: wrap_angle(theta),
        }
    }

    /// Origin pose with zero heading.
    pub const fn origin() -> Self {
        Pose2D {
            x: 0.0,
            y: 0.0,
            theta: 0.0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Body-frame velocity: forward linear speed and yaw rate.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Twist2D {
    /// Forward linear speed (m/s).
    pub v: f64,
    /// Yaw rate (rad/s), counter-clockwise positive.
    pub omega: f64,
}

impl Twist2D {
    pub const fn new(v: f64, omega: f64) -> Self {
        Twist2D { v, omega }
    }
}

/// Left/right wheel angular rates (rad/s). Positive rates drive forward.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelAngularSpeeds {
    pub left: f64,
    pub right: f64,
}

impl WheelAngularSpeeds {
    pub const fn new(left: f64, right: f64) -> Self {
        WheelAngularSpeeds { left, right }
    }

    /// True when both rates are finite and within `max_speed` in magnitude.
    pub fn is_within_limit(&self, max_speed: f64) -> bool {
        self.left.is_finite()
            && self.right.is_finite()
            && libm::fabs(self.left) <= max_speed
            && libm::fabs(self.right) <= max_speed
    }
}

/// Per-interval wheel travel along the ground (m). The center displacement
/// is always the midpoint of the wheel displacements, so it is exposed as a
/// derived quantity rather than a stored field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct WheelDisplacements {
    pub left: f64,
    pub right: f64,
}

impl WheelDisplacements {
    pub const fn new(left: f64, right: f64) -> Self {
        WheelDisplacements { left, right }
    }

    /// Center displacement `(left + right) / 2`.
    pub fn center(&self) -> f64 {
        (self.left + self.right) / 2.0
    }
}

/// Validated drive geometry: wheel radius `R` and track width `L`.
///
/// Both lengths are checked at construction, so downstream kinematics never
/// see a non-positive radius or track width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleGeometry {
    wheel_radius: f64,
    track_width: f64,
}

/// Invalid kinematic configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KinematicsError {
    /// Wheel radius must be positive and finite.
    InvalidWheelRadius,
    /// Track width must be positive and finite.
    InvalidTrackWidth,
}

impl core::fmt::Display for KinematicsError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            KinematicsError::InvalidWheelRadius => {
                write!(f, "wheel radius must be positive and finite")
            }
            KinematicsError::InvalidTrackWidth => {
                write!(f, "track width must be positive and finite")
            }
        }
    }
}

impl core::error::Error for KinematicsError {}

impl VehicleGeometry {
    pub fn new(wheel_radius: f64, track_width: f64) -> Result<Self, KinematicsError> {
        if !(wheel_radius.is_finite() && wheel_radius > 0.0) {
            return Err(KinematicsError::InvalidWheelRadius);
        }
        if !(track_width.is_finite() && track_width > 0.0) {
            return Err(KinematicsError::InvalidTrackWidth);
        }
        Ok(VehicleGeometry {
            wheel_radius,
            track_width,
        })
    }

    pub fn wheel_radius(&self) -> f64 {
        self.wheel_radius
    }

    pub fn track_width(&self) -> f64 {
        self.track_width
    }
}

impl Default for VehicleGeometry {
    fn default() -> Self {
        VehicleGeometry {
            wheel_radius: DEFAULT_WHEEL_RADIUS,
            track_width: DEFAULT_TRACK_WIDTH,
        }
    }
}

/// Which heading the translation of a pose update is evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HeadingConvention {
    /// Heading at the start of the interval (strict first-order step).
    #[default]
    PreUpdate,
    /// Heading advanced by half the interval's rotation before translating.
    Midpoint,
}

/// Body twist from wheel rates: `v = (R/2)(V_r + V_l)`,
/// `omega = (R/L)(V_r - V_l)`.
pub fn forward_kinematics(speeds: WheelAngularSpeeds, geom: &VehicleGeometry) -> Twist2D {
    let r = geom.wheel_radius();
    Twist2D {
        v: r / 2.0 * (speeds.right + speeds.left),
        omega: r / geom.track_width() * (speeds.right - speeds.left),
    }
}

/// Wheel rates realizing a body twist; exact algebraic inverse of
/// [`forward_kinematics`].
pub fn inverse_kinematics(twist: Twist2D, geom: &VehicleGeometry) -> WheelAngularSpeeds {
    let r = geom.wheel_radius();
    let half_l = geom.track_width() / 2.0;
    WheelAngularSpeeds {
        left: (twist.v - twist.omega * half_l) / r,
        right: (twist.v + twist.omega * half_l) / r,
    }
}

/// One first-order dead-reckoning step from per-interval wheel displacements,
/// translating along the pre-update heading.
pub fn integrate_pose(pose: Pose2D, disp: WheelDisplacements, geom: &VehicleGeometry) -> Pose2D {
    integrate_pose_with(pose, disp, geom, HeadingConvention::PreUpdate)
}

/// [`integrate_pose`] with an explicit heading convention.
pub fn integrate_pose_with(
    pose: Pose2D,
    disp: WheelDisplacements,
    geom: &VehicleGeometry,
    convention: HeadingConvention,
) -> Pose2D {
    debug_assert!(disp.left.is_finite() && disp.right.is_finite());
    let d_center = disp.center();
    let d_theta = (disp.right - disp.left) / geom.track_width();
    let heading = match convention {
        HeadingConvention::PreUpdate => pose.theta,
        HeadingConvention::Midpoint => pose.theta + d_theta / 2.0,
    };
    Pose2D {
        x: pose.x + d_center * libm::cos(heading),
        y: pose.y + d_center * libm::sin(heading),
        theta: wrap_angle(pose.theta + d_theta),
    }
}

/// Normalize an angle to `[-PI, PI)`; the result is congruent to the input
/// modulo 2*PI.
pub fn wrap_angle(theta: f64) -> f64 {
    // IEEE remainder lands in [-PI, PI]; fold the single +PI case down.
    let r = libm::remainder(theta, 2.0 * PI);
    if r >= PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Exact pose after constant-twist motion for `dt` seconds: straight-line
/// advance when the step rotation is below [`ARC_STEP_MIN_ROTATION`],
/// otherwise rotation of radius `v/omega` about the instantaneous center of
/// curvature. Used as ground truth for the first-order integrator.
pub fn exact_arc_step(pose: Pose2D, twist: Twist2D, dt: f64) -> Pose2D {
    debug_assert!(dt >= 0.0);
    let d_theta = twist.omega * dt;
    if libm::fabs(d_theta) < ARC_STEP_MIN_ROTATION {
        return Pose2D {
            x: pose.x + twist.v * dt * libm::cos(pose.theta),
            y: pose.y + twist.v * dt * libm::sin(pose.theta),
            theta: wrap_angle(pose.theta + d_theta),
        };
    }
    let radius = twist.v / twist.omega;
    let new_theta = pose.theta + d_theta;
    Pose2D {
        x: pose.x + radius * (libm::sin(new_theta) - libm::sin(pose.theta)),
        y: pose.y - radius * (libm::cos(new_theta) - libm::cos(pose.theta)),
        theta: wrap_angle(new_theta),
    }
}
