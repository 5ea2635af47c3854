//! Interface forces and reconstructed stress fields in jammed packings of
//! rigid convex polygonal cells under Tresca friction.
//!
//! The library is organized as a pipeline:
//!
//! 1. [`geometry`] builds polygonal meshes (loaded, grid, brick-wall or
//!    Voronoi) and derives the edge topology and per-cell fan triangulations.
//! 2. [`primal`] assembles the friction equilibrium linear program from a
//!    mesh, a Tresca coefficient and boundary tractions.
//! 3. [`lp`] solves the linear program with a primal-dual interior-point
//!    method and classifies the packing as jammed or a collapse mechanism.
//! 4. [`forces`] maps the LP dual variables to physical interface forces and
//!    audits contact, friction and equilibrium conditions.
//! 5. [`reconstruct`] solves a small mixed finite-element problem per cell to
//!    produce a divergence-free, weakly symmetric stress field matching the
//!    interface forces.

pub mod forces;
pub mod geometry;
pub mod lp;
pub mod primal;
pub mod reconstruct;

pub use forces::{AuditReport, BalanceReport, InterfaceForces};
pub use geometry::{Cell, CellTriangulation, Edge, EdgeKind, PolygonalMesh};
pub use lp::{LpSolution, LpStandardForm, LpStatus, Stability};
pub use primal::FrictionProblem;
pub use reconstruct::{CellStressField, ReconstructionSummary};

/// 2D point, in length units.
pub type Point = nalgebra::Point2<f64>;
/// 2D vector.
pub type Vec2 = nalgebra::Vector2<f64>;
/// 2x2 tensor (stress, boundary condition matrices).
pub type Mat2 = nalgebra::Matrix2<f64>;
