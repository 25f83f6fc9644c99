//! Simulation and inversion of one- and two-photon interference patterns:
//! forward models for MZI, HOM and NOON interferometers, Fourier recovery of
//! single-photon and sum/difference-frequency spectra, envelope fitting, and
//! projections of measured two-photon spectral intensities.

// `!(x > 0.0)` is used on purpose so that NaN fails the check too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod extract;
pub mod formats;
pub mod interference;
pub mod models;
pub mod pipeline;
pub mod spectral;
pub mod tsi;

pub use error::{Result, WktError};
