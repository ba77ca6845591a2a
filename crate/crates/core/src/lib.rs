//! Symbolic and numerical machinery for C*-algebras generated by finitely
//! many partial isometries.
//!
//! The pipeline: a family of partial isometries (given symbolically as
//! unitary / shift descriptions, or concretely as complex matrices) is Wold
//! decomposed, each member gets a *-isomorphic index and a corresponding
//! graph, the graphs are conditionally glued along the admissibility map π
//! into one graph, that graph induces a groupoid of reduced words, and the
//! generated C*-algebra is classified as a free-product/direct-sum
//! expression over scalar, continuous-function, matrix, and Toeplitz blocks.
//! The [`numeric`] module is the matrix oracle that cross-checks every
//! symbolic prediction at desk scale.

pub mod blocks;
pub mod confluence;
pub mod graph;
pub mod groupoid;
pub mod index;
pub mod numeric;
pub mod par;

pub use blocks::AlgebraExpr;
pub use graph::{DirectedGraph, GenId, GeneratorKind, GeneratorSpec, Pi, SpectrumTag};
pub use groupoid::{GroupoidElement, ShadowedGraph};
pub use index::{ExtNat, StarIndex};
