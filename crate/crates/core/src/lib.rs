//! Precedence-constrained TSP toolkit: instance model and validation,
//! instance generation from TSPLIB point clouds, tour construction
//! heuristics, an exact dynamic-programming oracle, MILP export and a small
//! benchmark harness.

pub mod bench;
pub mod exact;
pub mod generator;
pub mod geometry;
pub mod heuristics;
pub mod io;
pub mod milp;
pub mod model;
pub mod par;
pub mod random;

pub use generator::{generate, Direction, GeneratorConfig};
pub use heuristics::{achci, nearest_neighbor, AchciOptions, Evaluation, Orientation};
pub use model::{validate_tour, Commodity, Instance, Metric, NodeId, Point, Tour};
