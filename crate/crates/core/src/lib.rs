//! Finite quandles, qualgebras and squandles; colorings and 2-cocycle weights of
//! well-oriented knotted trivalent graph diagrams; exact integer cohomology; and the
//! rewriting calculus of free associative qualgebras.

pub mod algebra;
pub mod builtins;
pub mod classify;
pub mod cohomology;
pub mod coloring;
pub mod diagram;
pub mod error;
pub mod freeqa;
pub mod invariants;
pub mod moves;

pub use algebra::{
    Carrier, Elem, FiniteQualgebra, FiniteSquandle, GroupTable, Kind, LocalData, Quandle,
    Structure,
};
pub use cohomology::{AbelianGroupPresentation, CocyclePair, Coeff, IntMatrix};
pub use coloring::{Coloring, Mode};
pub use diagram::{AbstractGraph, Boundary, Crossing, Diagram, Sign, Vertex};
pub use error::{Error, Result};
pub use invariants::WeightMultiset;
pub use moves::{Direction, MoveId, MovePair, Site};
