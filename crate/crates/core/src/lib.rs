//! Core of a centralized gamification engine.
//!
//! External tools report player behaviors; the engine evaluates
//! administrator-defined rules over them and grants points, badges and
//! resources. Everything in this crate is pure computation over owned data:
//! no IO, no clock, no threads. The std companion crate (`gamify`) adds
//! persistence, the HTTP API and the command line.
//!
//! The [`engine::Engine`] type is the single entry point that ties the
//! modules together. It is a deterministic fold over [`engine::Command`]s,
//! which is what makes log replay and crash recovery possible.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod assistant;
pub mod customize;
pub mod engine;
pub mod error;
pub mod expr;
pub mod graph;
pub mod ids;
pub mod model;
pub mod rules;
pub mod sentiment;
pub mod social;

mod pairs;

pub use engine::{Command, Engine, EngineState};
pub use error::Error;
pub use ids::*;
