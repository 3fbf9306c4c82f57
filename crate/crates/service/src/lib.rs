//! HTTP service and command line for `trifocal-core`.
//!
//! [`api`] holds the JSON bodies and the handlers; [`http`] mounts them on an
//! axum router; [`cli`] drives the same handlers from the command line and
//! writes through [`export`].

pub mod api;
pub mod cli;
pub mod export;
pub mod http;
