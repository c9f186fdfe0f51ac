//! Graph machine learning with Rydberg-atom feature maps.
//!
//! Graphs are embedded as atom registers, evolved under the Rydberg
//! Hamiltonian, and compared through the Jensen-Shannon divergence of their
//! excitation-count distributions. The crate also carries the classical graph
//! kernels used as baselines, an SMO-based SVM, and the geometric-difference
//! tooling that compares kernel feature spaces.

pub mod error;
pub mod experiments;
pub mod geometry;
pub mod graphs;
pub mod kernels;
pub mod layout;
pub mod numeric;
pub mod ml;
pub mod rydsim;

pub use error::{Error, Result};
