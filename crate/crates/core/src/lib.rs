//! Geometric invariants of analytic symbol curves.
//!
//! A symbol is a rational map `φ` with no poles on the closed unit disk. The
//! crate computes four integers attached to `φ`:
//!
//! * `n`: the least winding of `φ(𝕋)` around `φ(a)` over interior points `a`,
//! * `N`: the least number of circle points sharing a value of `φ`,
//! * `o`: the order of the group of circle maps `ρ` with `φ ∘ ρ = φ`,
//! * `b`: the order of the Blaschke factor in `φ = h ∘ B`,
//!
//! and checks that they coincide. `φ` is totally Abelian exactly when they
//! equal 1.

pub mod blaschke;
pub mod contour;
pub mod decomp;
pub mod error;
pub mod fibers;
pub mod fit;
pub mod fixtures;
pub mod group;
pub mod poly;
pub mod rational;
pub mod suite;
pub mod symbol;
pub mod tol;

pub use blaschke::{blaschke_eval, BlaschkeProduct, DiskAutomorphism};
pub use contour::{count_zeros, curve_samples, min_winding, winding_number, Region};
pub use decomp::{analyze, cowen_thomson, recover_cofactor, DecompositionResult, InvariantReport, RunConfig};
pub use error::{Error, Result};
pub use fibers::{fiber_on_circle, fsi_classify, min_self_intersection, self_intersection_multiplicity};
pub use group::{group_order_check, symmetry_group, track_local_inverse, CircleMap, SymmetryGroup};
pub use poly::{cluster_roots, poly_roots, Polynomial, Root, C64};
pub use rational::{rational_normalize, RationalMap};
pub use symbol::{symbol_compile, SymbolSpec};
pub use tol::Tolerances;
