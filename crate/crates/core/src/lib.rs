//! Seedable simulator for interactive object search in procedurally generated
//! houses, with built-in planners, a reward model, a teacher/student training
//! loop, an evaluation harness and a line-delimited JSON environment server.

pub mod actionlang;
pub mod canonical;
pub mod cli;
pub mod config;
pub mod envserver;
pub mod fixtures;
pub mod harness;
pub mod navgraph;
pub mod planner;
pub mod reward;
pub mod scenegraph;
pub mod seeds;
pub mod trainer;
pub mod world;
