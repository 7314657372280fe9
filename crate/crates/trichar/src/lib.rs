//! Growth analysis of meromorphic functions with exactly three critical values.
//!
//! The crate has two halves that meet in the middle:
//!
//! * An **analytic** half: Weierstrass elliptic functions on the equiharmonic
//!   lattice ([`elliptic`]), the conformal triangle-to-half-plane map and the
//!   flat metric it induces on the thrice-punctured sphere ([`triangle_map`]),
//!   the extremal functions built from them ([`extremal`]), and growth
//!   measurement of those functions via spherical-area sheet counts and the
//!   Ahlfors–Shimizu characteristic ([`nevanlinna`]).
//! * A **combinatorial** half ([`trinet`]): labeled, two-colored triangular
//!   nets on surfaces, their gluing constructions, exact-arithmetic developing
//!   maps into the hexagonal tiling, holonomy, and systole certification for
//!   flat cylinders.
//!
//! Everything numeric is deterministic: quadratures have fixed node sets and
//! refinement rules, Monte Carlo sampling requires a caller-provided seed, and
//! parallel reductions use fixed summation orders.

pub mod cnum;
pub mod elliptic;
pub mod error;
pub mod extremal;
pub mod nevanlinna;
pub mod quad;
pub mod triangle_map;
pub mod trinet;

pub use cnum::{ExtComplex, C};
pub use elliptic::{EquiharmonicConstants, EquiharmonicLattice, Wp};
pub use error::{Error, Result};
pub use extremal::{BranchPath, ContinuedValue, ExtremalMap};
pub use nevanlinna::{GrowthFit, GrowthFn, GrowthSeries, SphereMeasure};
pub use triangle_map::{CriticalTriple, FlatMetricRho0, TriangleDomain, TriangleMap};
pub use trinet::{Isometry, NetColor, TriangularNet, VertexLabel};
