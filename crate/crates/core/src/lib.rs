//! Enumeration of closed 3-manifold triangulations.
//!
//! The search glues tetrahedron faces pair by pair and keeps every partial
//! vertex link a punctured sphere, pruning as soon as a link acquires genus,
//! loses orientability, or an edge is identified with itself in reverse.

pub mod dsu;
pub mod format;
pub mod fpg;
pub mod isosig;
pub mod linktrack;
pub mod perm;
pub mod search;
pub mod skiplist;
pub mod triangulation;
pub mod validate;

pub use dsu::{Sign, SignedDsu, Union};
pub use fpg::{enumerate_pairings, FacePairing, FacePairingGraph};
pub use format::{parse_table, parse_tri, to_table, to_tri, ParseError};
pub use isosig::{canonical, decode_signature, iso_signature, Canonical};
pub use linktrack::{Glue, LinkEdge, LinkState, PruneReason};
pub use perm::{Perm3, Perm4, PermError};
pub use search::{
    enumerate, enumerate_with, run_job, split_jobs, CensusResult, Counts, JobDescriptor, Mode, PairingResult, SearchConfig,
    SearchStats,
};
pub use skiplist::CyclicSkipList;
pub use triangulation::{EdgeClass, EdgeSlot, FaceSlot, Gluing, Isomorphism, TriError, Triangulation};
