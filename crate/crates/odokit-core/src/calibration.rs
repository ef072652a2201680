//! The three sensor corrections fitted from bench data: an rpm correction
//! table against a tachometer reference, left/right wheel balance factors,
//! and a proportional heading gain.
//!
//! A [`CalibrationProfile`] bundles all three. Corrections compose in a fixed
//! order: rpm correction first (in the rpm domain), then balance scaling;
//! the heading gain is applied by the odometry loop to per-step heading
//! change only, never to forward distance.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::kinematics::{WheelAngularSpeeds, WheelDisplacements};

const RAD_S_PER_RPM: f64 = 2.0 * PI / 60.0;

/// Calibration fitting or validation failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CalibrationError {
    /// Fits need data; rpm fits need at least two pairs.
    NotEnoughData,
    /// Two anchors share the same measured rpm.
    DuplicateMeasuredRpm,
    /// Anchor list is not strictly increasing in measured rpm, or a table
    /// maps a positive measurement to a non-positive reference.
    InvalidTable,
    /// Wheel-balance data must be nonzero and of a single sign.
    MixedSignOrZeroSpeed,
    /// Heading fit needs a nonzero mean estimate and a nonzero actual angle.
    ZeroHeading,
    /// Balance scales and heading gain must be positive and finite.
    InvalidFactor,
}

impl core::fmt::Display for CalibrationError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let msg = match self {
            CalibrationError::NotEnoughData => "not enough data points for this fit",
            CalibrationError::DuplicateMeasuredRpm => "duplicate measured rpm in anchor data",
            CalibrationError::InvalidTable => "rpm table anchors are invalid",
            CalibrationError::MixedSignOrZeroSpeed => {
                "wheel-balance data must be nonzero speeds of one sign"
            }
            CalibrationError::ZeroHeading => "heading fit requires nonzero mean and actual angle",
            CalibrationError::InvalidFactor => "correction factors must be positive and finite",
        };
        f.write_str(msg)
    }
}

impl core::error::Error for CalibrationError {}

/// Piecewise-linear rpm correction anchored at `(measured, reference)`
/// pairs. An empty anchor list is the identity correction.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RpmCalibrationTable {
    anchors: Vec<(f64, f64)>,
}

impl RpmCalibrationTable {
    /// Identity correction: every rpm maps to itself.
    pub fn identity() -> Self {
        RpmCalibrationTable::default()
    }

    /// Build a table from `(measured, reference)` anchors, which must be
    /// strictly increasing in the measured value. At least two anchors are
    /// required (use [`identity`](Self::identity) for none).
    pub fn from_anchors(anchors: Vec<(f64, f64)>) -> Result<Self, CalibrationError> {
        if anchors.len() < 2 {
            return Err(CalibrationError::NotEnoughData);
        }
        let table = RpmCalibrationTable { anchors };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        if self.anchors.len() == 1 {
            return Err(CalibrationError::NotEnoughData);
        }
        for pair in self.anchors.windows(2) {
            if !(pair[0].0 < pair[1].0) {
                return Err(CalibrationError::InvalidTable);
            }
        }
        for &(measured, reference) in &self.anchors {
            if !(measured.is_finite() && reference.is_finite()) {
                return Err(CalibrationError::InvalidTable);
            }
            if measured > 0.0 && reference <= 0.0 {
                return Err(CalibrationError::InvalidTable);
            }
        }
        Ok(())
    }

    pub fn is_identity(&self) -> bool {
        self.anchors.is_empty()
    }

    pub fn anchors(&self) -> &[(f64, f64)] {
        &self.anchors
    }

    /// Correct one rpm reading: exact at anchors, linear between them,
    /// linearly extrapolated beyond the ends. The mapping is applied to the
    /// magnitude with the sign restored, so reverse motion is corrected the
    /// same way as forward motion (and 0 always maps to 0).
    pub fn apply(&self, raw_rpm: f64) -> f64 {
        if self.anchors.is_empty() || raw_rpm == 0.0 {
            return raw_rpm;
        }
        let magnitude = libm::fabs(raw_rpm);
        let corrected = self.interpolate(magnitude);
        if raw_rpm < 0.0 {
            -corrected
        } else {
            corrected
        }
    }

    fn interpolate(&self, m: f64) -> f64 {
        for &(measured, reference) in &self.anchors {
            if m == measured {
                return reference;
            }
        }
        let last = self.anchors.len() - 1;
        let (lo, hi) = if m < self.anchors[0].0 {
            (self.anchors[0], self.anchors[1])
        } else if m > self.anchors[last].0 {
            (self.anchors[last - 1], self.anchors[last])
        } else {
            let hi_idx = self
                .anchors
                .iter()
                .position(|&(measured, _)| measured > m)
                .expect("m lies inside the anchor span");
            (self.anchors[hi_idx - 1], self.anchors[hi_idx])
        };
        lo.1 + (m - lo.0) * (hi.1 - lo.1) / (hi.0 - lo.0)
    }
}

/// Fit an rpm correction from `(encoder_rpm, tachometer_rpm)` pairs; pairs
/// are sorted by encoder reading to form the anchor list.
pub fn fit_rpm_correction(
    pairs: &[(f64, f64)],
) -> Result<RpmCalibrationTable, CalibrationError> {
    if pairs.len() < 2 {
        return Err(CalibrationError::NotEnoughData);
    }
    let mut anchors: Vec<(f64, f64)> = pairs.to_vec();
    anchors.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite anchor rpm"));
    for pair in anchors.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(CalibrationError::DuplicateMeasuredRpm);
        }
    }
    RpmCalibrationTable::from_anchors(anchors)
}

/// See [`RpmCalibrationTable::apply`].
pub fn apply_rpm_correction(table: &RpmCalibrationTable, raw_rpm: f64) -> f64 {
    table.apply(raw_rpm)
}

/// Multiplicative per-wheel speed corrections (`corrected = raw * scale`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WheelBalanceFactors {
    pub left_scale: f64,
    pub right_scale: f64,
}

impl Default for WheelBalanceFactors {
    fn default() -> Self {
        WheelBalanceFactors {
            left_scale: 1.0,
            right_scale: 1.0,
        }
    }
}

impl WheelBalanceFactors {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        if self.left_scale.is_finite()
            && self.left_scale > 0.0
            && self.right_scale.is_finite()
            && self.right_scale > 0.0
        {
            Ok(())
        } else {
            Err(CalibrationError::InvalidFactor)
        }
    }
}

/// Fit balance factors from `(left_rad_s, right_rad_s)` pairs recorded while
/// commanding straight motion. Both wheels are normalized to the mean of the
/// per-pair midpoints, so neither encoder is privileged and the mean forward
/// speed is preserved; after correction the two wheel means are equal.
pub fn fit_wheel_balance(
    paired_speeds: &[(f64, f64)],
) -> Result<WheelBalanceFactors, CalibrationError> {
    if paired_speeds.is_empty() {
        return Err(CalibrationError::NotEnoughData);
    }
    let sign = paired_speeds[0].0;
    for &(left, right) in paired_speeds {
        if left == 0.0 || right == 0.0 || left * sign <= 0.0 || right * sign <= 0.0 {
            return Err(CalibrationError::MixedSignOrZeroSpeed);
        }
    }
    let n = paired_speeds.len() as f64;
    let mean_left = paired_speeds.iter().map(|p| p.0).sum::<f64>() / n;
    let mean_right = paired_speeds.iter().map(|p| p.1).sum::<f64>() / n;
    let mean_mid = paired_speeds
        .iter()
        .map(|&(l, r)| (l + r) / 2.0)
        .sum::<f64>()
        / n;
    Ok(WheelBalanceFactors {
        left_scale: mean_mid / mean_left,
        right_scale: mean_mid / mean_right,
    })
}

/// Proportional correction multiplying each step's integrated heading change.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadingGain {
    pub gain: f64,
}

impl Default for HeadingGain {
    fn default() -> Self {
        HeadingGain { gain: 1.0 }
    }
}

impl HeadingGain {
    pub fn validate(&self) -> Result<(), CalibrationError> {
        if self.gain.is_finite() && self.gain > 0.0 {
            Ok(())
        } else {
            Err(CalibrationError::InvalidFactor)
        }
    }
}

/// Fit the heading gain from repeated fixed-angle turn trials:
/// `gain = actual / mean(raw_estimates)` (angles in degrees).
pub fn fit_heading_gain(
    raw_estimates: &[f64],
    actual: f64,
) -> Result<HeadingGain, CalibrationError> {
    if raw_estimates.is_empty() {
        return Err(CalibrationError::NotEnoughData);
    }
    let mean = raw_estimates.iter().sum::<f64>() / raw_estimates.len() as f64;
    if mean == 0.0 || actual == 0.0 {
        return Err(CalibrationError::ZeroHeading);
    }
    let gain = HeadingGain { gain: actual / mean };
    gain.validate()?;
    Ok(gain)
}

/// The full correction set. The default profile is the identity: empty rpm
/// tables, unit balance, unit heading gain.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CalibrationProfile {
    pub rpm_table_left: RpmCalibrationTable,
    pub rpm_table_right: RpmCalibrationTable,
    pub balance: WheelBalanceFactors,
    pub heading: HeadingGain,
    /// Free-form provenance notes, carried through serialization untouched.
    pub metadata: Vec<alloc::string::String>,
}

impl CalibrationProfile {
    pub fn identity() -> Self {
        CalibrationProfile::default()
    }

    pub fn validate(&self) -> Result<(), CalibrationError> {
        self.rpm_table_left.validate()?;
        self.rpm_table_right.validate()?;
        self.balance.validate()?;
        self.heading.validate()
    }

    /// Correct one wheel-speed reading: rpm correction in the rpm domain,
    /// then the balance scale. Identity tables skip the rpm round-trip so
    /// an identity profile returns its input bitwise.
    pub fn correct_speeds(&self, raw: WheelAngularSpeeds) -> WheelAngularSpeeds {
        WheelAngularSpeeds {
            left: correct_wheel(&self.rpm_table_left, self.balance.left_scale, raw.left),
            right: correct_wheel(&self.rpm_table_right, self.balance.right_scale, raw.right),
        }
    }

    /// Scale the differential component of a displacement pair by the
    /// heading gain, leaving the center displacement alone. Feeding the
    /// result to the pose integrator multiplies its heading change by the
    /// gain without touching forward travel.
    pub fn apply_heading_gain(&self, disp: WheelDisplacements) -> WheelDisplacements {
        let g = self.heading.gain;
        if g == 1.0 {
            return disp;
        }
        let center = disp.center();
        let half_diff = (disp.right - disp.left) / 2.0 * g;
        WheelDisplacements::new(center - half_diff, center + half_diff)
    }
}

fn correct_wheel(table: &RpmCalibrationTable, scale: f64, raw_rad_s: f64) -> f64 {
    let corrected = if table.is_identity() {
        raw_rad_s
    } else {
        table.apply(raw_rad_s / RAD_S_PER_RPM) * RAD_S_PER_RPM
    };
    corrected * scale
}

/// Correct a timestamped wheel-speed stream with a profile; timestamps pass
/// through untouched.
pub fn apply_profile(
    profile: &CalibrationProfile,
    raw: &[(f64, WheelAngularSpeeds)],
) -> Vec<(f64, WheelAngularSpeeds)> {
    raw.iter()
        .map(|&(t, speeds)| (t, profile.correct_speeds(speeds)))
        .collect()
}
