//! HTTP API and command-line front end over `charonette-core`.

pub mod api;
pub mod cli;
pub mod error;
pub mod views;

pub use api::{router, AppState};
pub use error::ApiError;
