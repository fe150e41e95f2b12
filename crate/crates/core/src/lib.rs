//! Nuclear coherent population transfer in a three-level Λ system driven by
//! x-ray pulses on relativistic nuclei.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod constants;
pub mod csvio;
pub mod dynamics;
pub mod kinematics;
pub mod nuclear;
pub mod presets;
pub mod scan;
