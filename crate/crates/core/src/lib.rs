//! Heading decomposition and world-frame trajectory reconstruction.
//!
//! The crate factors camera orientations into a heading (rotation about the
//! gravity axis) and a roll-pitch remainder, integrates heading angular
//! velocities and body-frame local velocities into world trajectories, and
//! provides the trajectory losses and motion-evaluation metrics built on top.
//! A deterministic scene simulator and a small finite-difference solver are
//! included as test substrates.
//!
//! Frame convention: right-handed, +Y points down (gravity), +Z is forward.
//!
//! The crate is `no_std` and only requires `alloc`.

#![cfg_attr(not(feature = "std"), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;

mod error;
mod linalg;

pub mod heading;
pub mod losses;
pub mod metrics;
pub mod simulator;
pub mod so3;
pub mod solver;
pub mod trajectory;

pub use error::{Error, Result};
pub use heading::{HeadingConfig, HeadingDecomp, HeadingSequence};
pub use so3::{Mat3, Rotation, Vec3};
pub use trajectory::{MotionSequence, Observations, Scene};
