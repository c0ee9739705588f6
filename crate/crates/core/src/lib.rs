//! Ghost layer construction for adaptive, non-conforming, hybrid
//! forest-of-trees meshes, with ranks simulated in one process.

pub mod cli;
pub mod cmesh;
pub mod element;
pub mod forest;
pub mod ghost;
pub mod harness;
pub mod search;
pub mod tabulate;
pub mod vtk;

pub use element::{Element, ElementError, Scheme, Shape};
