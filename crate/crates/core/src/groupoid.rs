//! The graph groupoid: reduced words over the shadowed graph, admissible
//! concatenation with full cancellation, inverses, and bounded enumeration.
//!
//! Elements are stored only in normal form (no adjacent e·e⁻¹ pair), so
//! equality is structural. Words are written in traversal order: in a path
//! e₁e₂…, the target of eᵢ is the source of eᵢ₊₁.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DirectedGraph, EdgeId, VertexId};
use crate::par;

/// An edge of the shadowed graph: a base edge or its shadow e⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SignedEdge {
    pub edge: EdgeId,
    pub inverted: bool,
}

impl SignedEdge {
    pub fn plain(edge: EdgeId) -> Self {
        SignedEdge { edge, inverted: false }
    }

    pub fn shadow(edge: EdgeId) -> Self {
        SignedEdge { edge, inverted: true }
    }

    pub fn inverse(self) -> Self {
        SignedEdge { edge: self.edge, inverted: !self.inverted }
    }
}

/// A graph together with its shadow: every edge has an opposite partner and
/// (e⁻¹)⁻¹ = e. Vertices are shared.
#[derive(Debug, Clone)]
pub struct ShadowedGraph {
    base: DirectedGraph,
}

impl ShadowedGraph {
    pub fn new(base: DirectedGraph) -> Self {
        ShadowedGraph { base }
    }

    pub fn base(&self) -> &DirectedGraph {
        &self.base
    }

    pub fn source(&self, e: SignedEdge) -> VertexId {
        let edge = self.edge(e.edge);
        if e.inverted {
            edge.1
        } else {
            edge.0
        }
    }

    pub fn target(&self, e: SignedEdge) -> VertexId {
        let edge = self.edge(e.edge);
        if e.inverted {
            edge.0
        } else {
            edge.1
        }
    }

    fn edge(&self, id: EdgeId) -> (VertexId, VertexId) {
        let e = self
            .base
            .edges()
            .iter()
            .find(|e| e.id == id)
            .expect("signed edge refers to a declared edge");
        (e.src, e.dst)
    }

    pub fn has_edge(&self, id: EdgeId) -> bool {
        self.base.edges().iter().any(|e| e.id == id)
    }

    /// All signed edges (base and shadow).
    pub fn signed_edges(&self) -> Vec<SignedEdge> {
        self.base
            .edges()
            .iter()
            .flat_map(|e| [SignedEdge::plain(e.id), SignedEdge::shadow(e.id)])
            .collect()
    }

    /// Display name of a signed edge, e.g. `s` or `s^-1`.
    pub fn edge_name(&self, e: SignedEdge) -> String {
        let tag = self
            .base
            .edges()
            .iter()
            .find(|edge| edge.id == e.edge)
            .map(|edge| edge.tag.to_string())
            .unwrap_or_else(|| format!("e{}", e.edge.0));
        if e.inverted {
            format!("{tag}^-1")
        } else {
            tag
        }
    }
}

/// Normal form of a groupoid word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GroupoidElement {
    /// The absorbing element; also stands for the empty word ∅.
    Zero,
    Vertex(VertexId),
    /// A nonempty reduced admissible path.
    Path(Vec<SignedEdge>),
}

impl GroupoidElement {
    pub fn path_len(&self) -> usize {
        match self {
            GroupoidElement::Path(p) => p.len(),
            _ => 0,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, GroupoidElement::Zero)
    }

    /// Source vertex (initial), if not Zero.
    pub fn source(&self, g: &ShadowedGraph) -> Option<VertexId> {
        match self {
            GroupoidElement::Zero => None,
            GroupoidElement::Vertex(v) => Some(*v),
            GroupoidElement::Path(p) => Some(g.source(p[0])),
        }
    }

    /// Target vertex (terminal), if not Zero.
    pub fn target(&self, g: &ShadowedGraph) -> Option<VertexId> {
        match self {
            GroupoidElement::Zero => None,
            GroupoidElement::Vertex(v) => Some(*v),
            GroupoidElement::Path(p) => Some(g.target(*p.last().expect("paths are nonempty"))),
        }
    }

    pub fn display(&self, g: &ShadowedGraph) -> String {
        match self {
            GroupoidElement::Zero => "0".into(),
            GroupoidElement::Vertex(v) => format!("[v{}]", v.0),
            GroupoidElement::Path(p) => {
                p.iter().map(|&e| g.edge_name(e)).collect::<Vec<_>>().join(" ")
            }
        }
    }
}

impl fmt::Display for GroupoidElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupoidElement::Zero => write!(f, "0"),
            GroupoidElement::Vertex(v) => write!(f, "[v{}]", v.0),
            GroupoidElement::Path(p) => {
                let parts: Vec<String> = p
                    .iter()
                    .map(|e| {
                        if e.inverted {
                            format!("e{}^-1", e.edge.0)
                        } else {
                            format!("e{}", e.edge.0)
                        }
                    })
                    .collect();
                write!(f, "{}", parts.join(" "))
            }
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupoidError {
    #[error("element references edge {0:?} not present in the graph")]
    UnknownEdge(EdgeId),
    #[error("the zero element has no inverse")]
    ZeroInverse,
    #[error("enumeration exceeded the cap of {0} elements")]
    EnumerationCap(usize),
}

fn check_element(g: &ShadowedGraph, a: &GroupoidElement) -> Result<(), GroupoidError> {
    if let GroupoidElement::Path(p) = a {
        for e in p {
            if !g.has_edge(e.edge) {
                return Err(GroupoidError::UnknownEdge(e.edge));
            }
        }
    }
    Ok(())
}

/// Admissible concatenation followed by full cancellation. Returns Zero when
/// the target of `a` differs from the source of `b`; returns a Vertex when
/// everything cancels.
pub fn multiply(
    g: &ShadowedGraph,
    a: &GroupoidElement,
    b: &GroupoidElement,
) -> Result<GroupoidElement, GroupoidError> {
    check_element(g, a)?;
    check_element(g, b)?;
    use GroupoidElement::*;
    Ok(match (a, b) {
        (Zero, _) | (_, Zero) => Zero,
        (Vertex(v), Vertex(w)) => {
            if v == w {
                Vertex(*v)
            } else {
                Zero
            }
        }
        (Vertex(v), Path(p)) => {
            if g.source(p[0]) == *v {
                Path(p.clone())
            } else {
                Zero
            }
        }
        (Path(p), Vertex(v)) => {
            if g.target(*p.last().expect("nonempty")) == *v {
                Path(p.clone())
            } else {
                Zero
            }
        }
        (Path(p), Path(q)) => {
            if g.target(*p.last().expect("nonempty")) != g.source(q[0]) {
                return Ok(Zero);
            }
            let mut stack: Vec<SignedEdge> = p.clone();
            for &letter in q {
                if stack.last().copied() == Some(letter.inverse()) {
                    stack.pop();
                } else {
                    stack.push(letter);
                }
            }
            if stack.is_empty() {
                Vertex(g.source(p[0]))
            } else {
                Path(stack)
            }
        }
    })
}

/// Groupoid inverse: the reversed path with every edge sign flipped.
/// Vertices are self-inverse; Zero has none.
pub fn inverse(a: &GroupoidElement) -> Result<GroupoidElement, GroupoidError> {
    match a {
        GroupoidElement::Zero => Err(GroupoidError::ZeroInverse),
        GroupoidElement::Vertex(v) => Ok(GroupoidElement::Vertex(*v)),
        GroupoidElement::Path(p) => Ok(GroupoidElement::Path(
            p.iter().rev().map(|e| e.inverse()).collect(),
        )),
    }
}

/// Hard cap on enumeration size.
pub const ENUMERATION_CAP: usize = 1_000_000;

/// Zero, every vertex, and every reduced path of length ≤ `max_len`.
///
/// Words are grown breadth-first by length; a word built from admissible
/// signed edges with no adjacent inverse pair is already in normal form, so
/// deduplication is structural. Sharded by starting edge when the `parallel`
/// feature is on.
pub fn enumerate(
    g: &ShadowedGraph,
    max_len: usize,
) -> Result<BTreeSet<GroupoidElement>, GroupoidError> {
    let mut out: BTreeSet<GroupoidElement> = BTreeSet::new();
    out.insert(GroupoidElement::Zero);
    for v in g.base().vertex_ids() {
        out.insert(GroupoidElement::Vertex(v));
    }
    if max_len == 0 {
        return Ok(out);
    }
    let letters = g.signed_edges();
    let shards: Vec<BTreeSet<GroupoidElement>> = par::map_collect(&letters, |&first| {
        let mut shard = BTreeSet::new();
        let mut frontier = vec![vec![first]];
        shard.insert(GroupoidElement::Path(vec![first]));
        for _ in 1..max_len {
            let mut next = Vec::new();
            for word in frontier {
                let last = *word.last().expect("nonempty");
                for &l in &letters {
                    if l == last.inverse() || g.source(l) != g.target(last) {
                        continue;
                    }
                    let mut w = word.clone();
                    w.push(l);
                    shard.insert(GroupoidElement::Path(w.clone()));
                    next.push(w);
                }
            }
            frontier = next;
            if shard.len() > ENUMERATION_CAP {
                break;
            }
        }
        shard
    });
    for shard in shards {
        out.extend(shard);
        if out.len() > ENUMERATION_CAP {
            return Err(GroupoidError::EnumerationCap(ENUMERATION_CAP));
        }
    }
    Ok(out)
}

/// Element counts per path length, with vertices at length 0.
pub fn counts_by_length(set: &BTreeSet<GroupoidElement>) -> Vec<(usize, usize)> {
    let mut counts: std::collections::BTreeMap<usize, usize> = std::collections::BTreeMap::new();
    for el in set {
        match el {
            GroupoidElement::Zero => {}
            GroupoidElement::Vertex(_) => *counts.entry(0).or_default() += 1,
            GroupoidElement::Path(p) => *counts.entry(p.len()).or_default() += 1,
        }
    }
    counts.into_iter().collect()
}
