//! Mechanic-targeted scene generation for a tile platformer.
//!
//! Scenes are short fixed-width levels built from vertical slices of a
//! level corpus. A best-first agent plays them on a deterministic forward
//! model, and constrained evolutionary search looks for scenes whose
//! playthroughs require, punish or exhibit chosen mechanics.

pub mod agent;
pub mod corpus;
pub mod engine;
pub mod evaluators;
pub mod experiment;
pub mod scene;
pub mod search;
