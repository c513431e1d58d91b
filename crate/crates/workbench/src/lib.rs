//! Workspace persistence, batch commands and the local HTTP service.

pub mod api;
pub mod cli;
pub mod config;
pub mod error;
pub mod ops;
pub mod server;
pub mod workspace;

pub use config::Config;
pub use error::{Error, Result};
pub use workspace::{atomic_write, atomic_write_with, Workspace};
