//! Decoders that approximate maximum-likelihood decoding of surface codes
//! and surface-GKP codes by enumerating the first K minimum-weight matchings
//! of a decoding graph.
//!
//! The crate is `no_std` (with `alloc`); all IO, file formats and the
//! simulation CLI live in the companion `kmwm-cli` crate.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bits;
pub mod code;
pub mod enumerate;
pub mod gkp;
pub mod graph;
pub mod matching;
pub(crate) mod math;
pub mod oracle;
pub mod qubit;

pub use bits::Bits;
pub use code::{ClassLabel, CssCode, ErrorSector, SectorCode};
pub use enumerate::{enumerate_mwms, MwmEnumerator, TreeNode};
pub use graph::{DecodingGraph, Edge, EdgeId, GraphError, Vertex, VertexId};
pub use matching::{mwc, mwm, shortest_path, MatchingSolution, PathResult, SolutionKind};
