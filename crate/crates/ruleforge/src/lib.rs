//! Command-line tool and HTTP service for example-driven rule synthesis.

pub mod cli;
pub mod config;
pub mod error;
pub mod formats;
pub mod remote;
pub mod service;
pub mod synth;

pub use error::{Error, Result};
