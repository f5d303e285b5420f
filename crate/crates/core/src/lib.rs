//! Integration-free transient stability assessment.
//!
//! Time is compressed onto a finite interval, the Taylor coefficients of a
//! distance-based indicator are generated by differential transformation at
//! the initial state, and a Padé approximant of that series is searched for a
//! pole at the end of the interval: a pole there means the trajectory reaches
//! the equilibrium.

pub mod benchmark;
pub mod classifier;
pub mod dtengine;
pub mod error;
pub mod linalg;
pub mod manifest;
pub mod models;
pub mod pade;
pub mod precision;
pub mod scenarios;
pub mod timewarp;

pub use error::{Error, Result};
