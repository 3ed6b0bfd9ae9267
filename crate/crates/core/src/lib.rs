//! Mixed static/diagonal guard teams that track a variable-speed intruder in a
//! simple polygon.

pub mod activation;
pub mod corpus;
pub mod deployment;
pub mod geometry;
pub mod guard_model;
pub mod scene;
pub mod service;
pub mod simulator;

pub use geometry::{Point, Polygon, Region, Segment, TriangulationGraph};
pub use scene::Scene;
