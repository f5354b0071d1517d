//! Service layer around `gamify-core`: durable command log with snapshots,
//! the HTTP API used by reporting tools and the player site, bundled
//! fixtures, and the pieces behind the `gamify` command line.

pub use gamify_core as core;

pub mod api;
pub mod clock;
pub mod envdoc;
pub mod fixtures;
pub mod report;
pub mod service;
pub mod store;
