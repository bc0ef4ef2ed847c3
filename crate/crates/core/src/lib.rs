pub mod apply;
pub mod cli;
pub mod discrete;
pub mod error;
pub mod group;
pub mod lie;
pub mod linalg;
pub mod problem;
pub mod samples;
