//! Incremental-encoder processing: quadrature decoding, count/angle/rpm
//! conversions, and turning timestamped tick logs into wheel speeds and
//! lossless per-interval displacements.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::kinematics::{VehicleGeometry, WheelAngularSpeeds, WheelDisplacements};

/// Edge-counting mode relative to the encoder's pulse count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadratureMode {
    X1,
    X2,
    #[default]
    X4,
}

impl QuadratureMode {
    pub fn multiplier(self) -> u32 {
        match self {
            QuadratureMode::X1 => 1,
            QuadratureMode::X2 => 2,
            QuadratureMode::X4 => 4,
        }
    }

    pub fn from_multiplier(m: u32) -> Option<Self> {
        match m {
            1 => Some(QuadratureMode::X1),
            2 => Some(QuadratureMode::X2),
            4 => Some(QuadratureMode::X4),
            _ => None,
        }
    }
}

/// Encoder and transmission constants plus the nominal sampling period.
///
/// The default matches the reference platform: a 600-pulse 2-phase encoder
/// counted x4, geared 1:5 to the wheel (20/100 tooth pulleys), sampled every
/// 1000 ms. That yields exactly 12000 counts per wheel revolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncoderConfig {
    /// Encoder pulses per encoder-shaft revolution, before edge counting.
    pub pulses_per_rev: u32,
    pub quadrature: QuadratureMode,
    /// Encoder-shaft revolutions per wheel revolution.
    pub transmission_ratio: f64,
    /// Nominal log sampling period (s).
    pub sample_period: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            pulses_per_rev: 600,
            quadrature: QuadratureMode::X4,
            transmission_ratio: 5.0,
            sample_period: 1.0,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<(), EncoderError> {
        if self.pulses_per_rev == 0 {
            return Err(EncoderError::InvalidConfig("pulses_per_rev must be > 0"));
        }
        if !(self.transmission_ratio.is_finite() && self.transmission_ratio > 0.0) {
            return Err(EncoderError::InvalidConfig(
                "transmission_ratio must be positive and finite",
            ));
        }
        if !(self.sample_period.is_finite() && self.sample_period > 0.0) {
            return Err(EncoderError::InvalidConfig(
                "sample_period must be positive and finite",
            ));
        }
        Ok(())
    }

    /// Counts registered per full wheel revolution.
    pub fn counts_per_wheel_rev(&self) -> f64 {
        self.pulses_per_rev as f64 * self.quadrature.multiplier() as f64 * self.transmission_ratio
    }

    /// Ground distance of a single count for a wheel of the given radius.
    pub fn count_arc(&self, wheel_radius: f64) -> f64 {
        2.0 * PI * wheel_radius / self.counts_per_wheel_rev()
    }
}

/// One row of an encoder log: cumulative signed counts per wheel at an
/// integer-millisecond timestamp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderSample {
    pub t_ms: u64,
    pub left_count: i64,
    pub right_count: i64,
}

/// Decoder state for one 2-phase channel pair.
///
/// `glitches` counts illegal transitions (both phases flipping at once);
/// those leave `count` untouched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QuadratureState {
    pub phase_a: bool,
    pub phase_b: bool,
    pub count: i64,
    pub glitches: u64,
}

// Position of an (A, B) pair in the forward Gray sequence 00 -> 10 -> 11 -> 01.
fn phase_index(a: bool, b: bool) -> u8 {
    match (a, b) {
        (false, false) => 0,
        (true, false) => 1,
        (true, true) => 2,
        (false, true) => 3,
    }
}

/// Standard x4 quadrature step. Forward transitions count +1, reverse -1,
/// no change 0. A double transition skips a state and cannot be attributed
/// to either direction, so it contributes 0 and bumps the glitch counter.
pub fn decode_quadrature(
    state: QuadratureState,
    new_a: bool,
    new_b: bool,
) -> (QuadratureState, i8) {
    let from = phase_index(state.phase_a, state.phase_b);
    let to = phase_index(new_a, new_b);
    let mut next = QuadratureState {
        phase_a: new_a,
        phase_b: new_b,
        ..state
    };
    let delta: i8 = match (4 + to - from) % 4 {
        0 => 0,
        1 => 1,
        3 => -1,
        _ => {
            next.glitches += 1;
            0
        }
    };
    next.count += delta as i64;
    (next, delta)
}

/// Wheel rotation (rad) represented by a count delta.
pub fn counts_to_wheel_angle(delta_counts: i64, cfg: &EncoderConfig) -> f64 {
    2.0 * PI * delta_counts as f64 / cfg.counts_per_wheel_rev()
}

/// Wheel speed in rpm from a count delta over `dt` seconds.
pub fn counts_to_rpm(delta_counts: i64, dt: f64, cfg: &EncoderConfig) -> Result<f64, EncoderError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(EncoderError::InvalidInterval);
    }
    Ok(counts_to_wheel_angle(delta_counts, cfg) / (2.0 * PI) / dt * 60.0)
}

/// Smoothing applied to wheel speeds (never to displacements).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpeedFilterConfig {
    /// Pass speeds through unchanged.
    None,
    /// Mean of the last `window` speed samples (partial mean while filling).
    MovingAverage { window: usize },
    /// First-order IIR: `y = alpha * x + (1 - alpha) * y_prev`.
    Exponential { alpha: f64 },
}

impl Default for SpeedFilterConfig {
    fn default() -> Self {
        SpeedFilterConfig::MovingAverage { window: 3 }
    }
}

impl SpeedFilterConfig {
    pub fn validate(&self) -> Result<(), EncoderError> {
        match *self {
            SpeedFilterConfig::None => Ok(()),
            SpeedFilterConfig::MovingAverage { window } => {
                if window >= 1 {
                    Ok(())
                } else {
                    Err(EncoderError::InvalidConfig("filter window must be >= 1"))
                }
            }
            SpeedFilterConfig::Exponential { alpha } => {
                if alpha.is_finite() && alpha > 0.0 && alpha <= 1.0 {
                    Ok(())
                } else {
                    Err(EncoderError::InvalidConfig(
                        "filter alpha must be in (0, 1]",
                    ))
                }
            }
        }
    }
}

/// Streaming scalar filter; one instance per wheel.
#[derive(Debug, Clone)]
pub struct SpeedFilter {
    cfg: SpeedFilterConfig,
    history: Vec<f64>,
    next_slot: usize,
    filled: usize,
    state: Option<f64>,
}

impl SpeedFilter {
    pub fn new(cfg: SpeedFilterConfig) -> Self {
        let capacity = match cfg {
            SpeedFilterConfig::MovingAverage { window } => window,
            _ => 0,
        };
        SpeedFilter {
            cfg,
            history: alloc::vec![0.0; capacity],
            next_slot: 0,
            filled: 0,
            state: None,
        }
    }

    pub fn apply(&mut self, x: f64) -> f64 {
        match self.cfg {
            SpeedFilterConfig::None => x,
            SpeedFilterConfig::MovingAverage { window } => {
                self.history[self.next_slot] = x;
                self.next_slot = (self.next_slot + 1) % window;
                self.filled = (self.filled + 1).min(window);
                self.history[..self.filled].iter().sum::<f64>() / self.filled as f64
            }
            SpeedFilterConfig::Exponential { alpha } => {
                let y = match self.state {
                    None => x,
                    Some(prev) => alpha * x + (1.0 - alpha) * prev,
                };
                self.state = Some(y);
                y
            }
        }
    }
}

/// One log interval: filtered speeds for reporting, plus the exact count
/// deltas and the displacements derived from them.
///
/// Displacements always come straight from the raw count deltas; the filter
/// only ever touches `speeds`, so summing displacements over a stream loses
/// nothing to smoothing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalMeasurement {
    /// Interval end time (s).
    pub t: f64,
    /// Interval length (s).
    pub dt: f64,
    pub delta_counts_left: i64,
    pub delta_counts_right: i64,
    /// Filtered wheel angular speeds (rad/s).
    pub speeds: WheelAngularSpeeds,
    /// Unfiltered wheel angular speeds (rad/s).
    pub raw_speeds: WheelAngularSpeeds,
    /// Ground displacements (m) from the raw count deltas.
    pub displacements: WheelDisplacements,
}

/// Encoder-stream processing failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncoderError {
    InvalidConfig(&'static str),
    /// Interval length must be positive.
    InvalidInterval,
    /// Fewer than two samples; no interval can be formed.
    StreamTooShort,
    /// Timestamps must be strictly increasing; holds the offending index.
    NonMonotonicTimestamp { index: usize },
}

impl core::fmt::Display for EncoderError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EncoderError::InvalidConfig(msg) => write!(f, "invalid encoder config: {msg}"),
            EncoderError::InvalidInterval => write!(f, "interval length must be positive"),
            EncoderError::StreamTooShort => {
                write!(f, "encoder stream needs at least two samples")
            }
            EncoderError::NonMonotonicTimestamp { index } => {
                write!(f, "non-monotonic timestamp at sample index {index}")
            }
        }
    }
}

impl core::error::Error for EncoderError {}

/// Convert a cumulative tick log into per-interval speeds and displacements.
///
/// Speeds are difference quotients of the wheel angle, smoothed per wheel by
/// `filt`; displacements are `R * delta_angle` from the raw counts and are
/// never filtered.
pub fn samples_to_speeds(
    stream: &[EncoderSample],
    cfg: &EncoderConfig,
    filt: &SpeedFilterConfig,
    geom: &VehicleGeometry,
) -> Result<Vec<IntervalMeasurement>, EncoderError> {
    cfg.validate()?;
    filt.validate()?;
    if stream.len() < 2 {
        return Err(EncoderError::StreamTooShort);
    }
    let mut left_filter = SpeedFilter::new(*filt);
    let mut right_filter = SpeedFilter::new(*filt);
    let mut out = Vec::with_capacity(stream.len() - 1);
    for (i, pair) in stream.windows(2).enumerate() {
        let (prev, cur) = (pair[0], pair[1]);
        if cur.t_ms <= prev.t_ms {
            return Err(EncoderError::NonMonotonicTimestamp { index: i + 1 });
        }
        let dt = (cur.t_ms - prev.t_ms) as f64 / 1000.0;
        let dl = cur.left_count - prev.left_count;
        let dr = cur.right_count - prev.right_count;
        let angle_l = counts_to_wheel_angle(dl, cfg);
        let angle_r = counts_to_wheel_angle(dr, cfg);
        let raw = WheelAngularSpeeds::new(angle_l / dt, angle_r / dt);
        out.push(IntervalMeasurement {
            t: cur.t_ms as f64 / 1000.0,
            dt,
            delta_counts_left: dl,
            delta_counts_right: dr,
            speeds: WheelAngularSpeeds::new(left_filter.apply(raw.left), right_filter.apply(raw.right)),
            raw_speeds: raw,
            displacements: WheelDisplacements::new(
                angle_l * geom.wheel_radius(),
                angle_r * geom.wheel_radius(),
            ),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(t_ms: u64, left: i64, right: i64) -> EncoderSample {
        EncoderSample {
            t_ms,
            left_count: left,
            right_count: right,
        }
    }

    #[test]
    fn default_config_counts_per_rev_is_exact_integer() {
        let cfg = EncoderConfig::default();
        assert_eq!(cfg.counts_per_wheel_rev(), 12000.0);
    }

    #[test]
    fn quadrature_forward_reverse_and_glitch() {
        let s0 = QuadratureState::default();

        let (s1, d) = decode_quadrature(s0, true, false);
        assert_eq!(d, 1);
        assert_eq!(s1.count, 1);

        let (s1, d) = decode_quadrature(s0, false, true);
        assert_eq!(d, -1);
        assert_eq!(s1.count, -1);

        let (s1, d) = decode_quadrature(s0, true, true);
        assert_eq!(d, 0);
        assert_eq!(s1.count, 0);
        assert_eq!(s1.glitches, 1);

        // No transition at all.
        let (s1, d) = decode_quadrature(s0, false, false);
        assert_eq!(d, 0);
        assert_eq!(s1.glitches, 0);
    }

    #[test]
    fn quadrature_full_cycles_accumulate_four_counts_each() {
        let forward = [(true, false), (true, true), (false, true), (false, false)];
        let mut s = QuadratureState::default();
        for _ in 0..25 {
            for &(a, b) in &forward {
                s = decode_quadrature(s, a, b).0;
            }
        }
        assert_eq!(s.count, 100);
        assert_eq!(s.glitches, 0);

        // Reverse order: 00 -> 01 -> 11 -> 10 -> 00.
        let reverse = [(false, true), (true, true), (true, false), (false, false)];
        let mut s = QuadratureState::default();
        for _ in 0..25 {
            for &(a, b) in &reverse {
                s = decode_quadrature(s, a, b).0;
            }
        }
        assert_eq!(s.count, -100);
        assert_eq!(s.glitches, 0);
    }

    #[test]
    fn counts_to_wheel_angle_full_revolution() {
        let cfg = EncoderConfig::default();
        assert!((counts_to_wheel_angle(12000, &cfg) - 2.0 * PI).abs() < 1e-12);
        assert_eq!(counts_to_wheel_angle(0, &cfg), 0.0);
        assert!((counts_to_wheel_angle(6000, &cfg) - PI).abs() < 1e-12);
    }

    #[test]
    fn counts_to_rpm_reference_points() {
        let cfg = EncoderConfig::default();
        assert!((counts_to_rpm(12000, 1.0, &cfg).unwrap() - 60.0).abs() < 1e-12);
        assert_eq!(counts_to_rpm(0, 1.0, &cfg).unwrap(), 0.0);
        assert!((counts_to_rpm(200, 1.0, &cfg).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(
            counts_to_rpm(100, 0.0, &cfg),
            Err(EncoderError::InvalidInterval)
        );
    }

    #[test]
    fn samples_to_speeds_one_rev_per_second() {
        let cfg = EncoderConfig::default();
        let geom = VehicleGeometry::default();
        let stream = [sample(0, 0, 0), sample(1000, 12000, 12000)];
        let out =
            samples_to_speeds(&stream, &cfg, &SpeedFilterConfig::None, &geom).unwrap();
        assert_eq!(out.len(), 1);
        assert!((out[0].speeds.left - 2.0 * PI).abs() < 1e-12);
        assert!((out[0].speeds.right - 2.0 * PI).abs() < 1e-12);
        assert!((out[0].displacements.left - 2.0 * PI * 0.15).abs() < 1e-12);
    }

    #[test]
    fn samples_to_speeds_constant_counts_give_zero() {
        let cfg = EncoderConfig::default();
        let geom = VehicleGeometry::default();
        let stream = [sample(0, 500, -3), sample(1000, 500, -3), sample(2000, 500, -3)];
        let out =
            samples_to_speeds(&stream, &cfg, &SpeedFilterConfig::default(), &geom).unwrap();
        for m in &out {
            assert_eq!(m.speeds, WheelAngularSpeeds::new(0.0, 0.0));
            assert_eq!(m.displacements, WheelDisplacements::new(0.0, 0.0));
        }
    }

    #[test]
    fn filter_none_is_identity() {
        let cfg = EncoderConfig::default();
        let geom = VehicleGeometry::default();
        let stream = [
            sample(0, 0, 0),
            sample(1000, 900, 1100),
            sample(2000, 2100, 1900),
            sample(3000, 2700, 3400),
        ];
        let out =
            samples_to_speeds(&stream, &cfg, &SpeedFilterConfig::None, &geom).unwrap();
        for m in &out {
            assert_eq!(m.speeds, m.raw_speeds);
        }
    }

    #[test]
    fn moving_average_reaches_constant_within_window() {
        let mut f = SpeedFilter::new(SpeedFilterConfig::MovingAverage { window: 4 });
        for _ in 0..4 {
            f.apply(2.5);
        }
        assert!((f.apply(2.5) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn exponential_filter_tracks_step() {
        let mut f = SpeedFilter::new(SpeedFilterConfig::Exponential { alpha: 0.5 });
        assert_eq!(f.apply(1.0), 1.0);
        assert_eq!(f.apply(2.0), 1.5);
        assert_eq!(f.apply(2.0), 1.75);
    }

    #[test]
    fn non_monotonic_stream_reports_offending_index() {
        let cfg = EncoderConfig::default();
        let geom = VehicleGeometry::default();
        let stream = [sample(0, 0, 0), sample(1000, 10, 10), sample(1000, 20, 20)];
        assert_eq!(
            samples_to_speeds(&stream, &cfg, &SpeedFilterConfig::None, &geom),
            Err(EncoderError::NonMonotonicTimestamp { index: 2 })
        );
    }

    #[test]
    fn too_short_stream_is_rejected() {
        let cfg = EncoderConfig::default();
        let geom = VehicleGeometry::default();
        assert_eq!(
            samples_to_speeds(&[sample(0, 0, 0)], &cfg, &SpeedFilterConfig::None, &geom),
            Err(EncoderError::StreamTooShort)
        );
    }

    #[test]
    fn displacements_do_not_depend_on_filter() {
        let cfg = EncoderConfig::default();
        let geom = VehicleGeometry::default();
        let stream = [
            sample(0, 0, 0),
            sample(1000, 300, -200),
            sample(2000, 1500, 400),
            sample(2500, 1800, 900),
        ];
        let filters = [
            SpeedFilterConfig::None,
            SpeedFilterConfig::MovingAverage { window: 1 },
            SpeedFilterConfig::MovingAverage { window: 3 },
            SpeedFilterConfig::Exponential { alpha: 0.25 },
        ];
        let reference =
            samples_to_speeds(&stream, &cfg, &SpeedFilterConfig::None, &geom).unwrap();
        for filt in &filters {
            let out = samples_to_speeds(&stream, &cfg, filt, &geom).unwrap();
            for (a, b) in out.iter().zip(reference.iter()) {
                assert_eq!(a.displacements, b.displacements);
                assert_eq!(a.delta_counts_left, b.delta_counts_left);
                assert_eq!(a.delta_counts_right, b.delta_counts_right);
            }
        }
    }
}
