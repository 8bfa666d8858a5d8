//! HTTP service and batch CLI over a [`kgdedup::workspace::Workspace`].
//!
//! The service exposes graphs, indices, index pairs, detection runs, labels,
//! metrics and strategies as JSON resources. Long operations run as jobs that
//! clients poll.

pub mod api;
pub mod cli;

pub use api::{router, serve, AppState};
