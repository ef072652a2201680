//! Wheel-odometry core for differential-drive vehicles: kinematics, encoder
//! decoding, calibration fitting, a deterministic simulator, and trajectory
//! evaluation. The crate is `no_std` (with `alloc`); all file and process
//! interfaces live in the companion `odokit` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod encoder;
pub mod kinematics;
