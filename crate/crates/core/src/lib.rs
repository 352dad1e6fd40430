//! Square-tiled surfaces encoded as triples of involutions, together with
//! the cylinder-shear reconfiguration moves acting on them.
//!
//! A surface is a triple `(tau_R, tau_G, tau_B)` of involutions on `{1..n}`
//! acting transitively; fixed points are folded edges.  The crate provides
//! the face/profile machinery, canonical labelling and isomorphism,
//! automorphisms and quotients, cylinder shears and half shears with
//! replayable move certificates, weighted stable graphs, decorated plane
//! trees of one-cylinder configurations, the constructive connectivity
//! pipelines, and exhaustive stratum exploration.

pub mod connectivity;
pub mod explore;
pub mod io;
pub mod moves;
pub mod perm;
pub mod plane_tree;
pub mod stable_graph;
pub mod surface;

pub use perm::Perm;
pub use surface::{Color, Profile, Surface};
