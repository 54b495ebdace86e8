//! Surface-based hereditary stratigraphy.
//!
//! The crate is organised around four pieces:
//!
//! - [`surface`]: fixed-width annotations whose slots are overwritten in a
//!   policy-dependent order, with closed-form recovery of each slot's rank.
//! - [`oracle`]: brute-force replay used to validate the closed forms.
//! - [`phylo`]: trie-based reconstruction, phylometrics, and tree formats.
//! - [`sim`]: an asynchronous island-model GA over a grid of processing
//!   elements, with an optional perfect lineage tracker.
//!
//! The [`cli`] module wires these into the `hsurf` binary.

pub mod cli;
pub mod oracle;
pub mod phylo;
pub mod rng;
pub mod sim;
pub mod surface;

pub use surface::{
    hanoi_value, Annotation, CounterWidth, Differentia, Genome, GenomeHeader, GenomeLayout,
    HeaderKind, Placement, Policy, RecordSet, SlotCount, SurfaceError,
};
