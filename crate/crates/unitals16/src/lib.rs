//! Projective planes of order 16 and their unitals.
//!
//! A *unital* in a projective plane of order q² is a set of q³+1 points
//! meeting every line in either 1 or q+1 points. At q = 4 that is a 65-point
//! set in a 273-point plane, and the 5-point line sections form a Steiner
//! 2-(65,5,1) design. This crate ships the line sets of the known planes of
//! order 16 together with a catalog of unitals in them, and re-derives the
//! invariants that identify each unital: the setwise stabilizer inside the
//! plane's collineation group, the full design automorphism group, the 5-rank
//! of the incidence matrix, parallel-class counts for the design and its dual
//! unital's design, and canonical certificates deciding isomorphism.
//!
//! The crate also implements the search that produced many of the cataloged
//! unitals in the first place: fixing a small subgroup of the plane's
//! automorphism group and looking for unitals among unions of its orbits.
//!
//! Modules, bottom up:
//!
//! * [`bits`] — fixed-width bitset rows backing all incidence tests.
//! * [`incidence`] — incidence structures, design parameters, planes, duality.
//! * [`permgroup`] — permutations, orbits, stabilizer chains, small subgroups.
//! * [`autom`] — partition-refinement canonical labeling: automorphism
//!   groups, certificates, isomorphism, setwise stabilizers.
//! * [`unitals`] — unital validation, dual unitals, the orbit-union search,
//!   and design-into-plane embedding.
//! * [`analytics`] — p-ranks, parallel-class counting, per-unital reports.
//! * [`catalog`] — vendored plane and unital data, expected invariants, and
//!   the Hermitian unital built from an explicit GF(16) model.
//!
//! Start with the examples directory: each example is a runnable walkthrough
//! of one capability (`cargo run --release --example verify_planes`, ...).

pub mod analytics;
pub mod autom;
pub mod bits;
pub mod catalog;
pub mod cli;
pub mod incidence;
pub mod permgroup;
pub mod unitals;

pub use analytics::{analyze, count_distinct_designs, parallel_classes, p_rank, DesignIndex, DesignReport};
pub use autom::{automorphism_group, canonical_certificate, is_isomorphic, setwise_stabilizer, Certificate, Coloring};
pub use incidence::{dual, verify_design, verify_plane, DesignParams, IncidenceStructure, ProjectivePlane};
pub use permgroup::{enumerate_small_subgroups, Perm, PermGroup, Subgroup};
pub use unitals::{design_from_unital, dual_unital, embed_design_in_plane, is_unital, search_orbit_unions, search_plane, tangent_lines, SearchBudget, Unital};
