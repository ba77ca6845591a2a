//! Directed multigraphs, corresponding graphs of Wold-family members,
//! vertex gluing, the admissibility map π, and the conditional iterated
//! glued graph (the 𝒢-graph).
//!
//! Vertices carry sets of projection tokens (x*x, xx*, (xⁿ)(xⁿ)*, …); a
//! glued vertex is a fresh combinatorial object holding the union of the
//! tokens it identified. Edges carry the generator name and chain position.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::index::{ExtNat, StarIndex};

/// Name of a generator in the Wold family.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GenId(pub String);

impl GenId {
    pub fn new(s: impl Into<String>) -> Self {
        GenId(s.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for GenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Opaque spectrum identifier for a unitary part; compared by equality only.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SpectrumTag(pub String);

impl SpectrumTag {
    pub fn new(s: impl Into<String>) -> Self {
        SpectrumTag(s.into())
    }
}

impl fmt::Display for SpectrumTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Kind of one Wold-family member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeneratorKind {
    /// A unitary part with the given spectrum tag (ε⁻ = 0).
    Unitary { spectrum: SpectrumTag },
    /// A shift part with ε⁻ = ∞.
    InfiniteShift,
    /// A shift part with finite defect ε⁻ = k ≥ 1.
    FiniteShift { defect: u64 },
}

/// Symbolic description of one partial isometry in the Wold family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub id: GenId,
    pub kind: GeneratorKind,
}

impl GeneratorSpec {
    pub fn unitary(id: impl Into<String>, spectrum: impl Into<String>) -> Self {
        GeneratorSpec {
            id: GenId::new(id),
            kind: GeneratorKind::Unitary { spectrum: SpectrumTag::new(spectrum) },
        }
    }

    pub fn infinite_shift(id: impl Into<String>) -> Self {
        GeneratorSpec { id: GenId::new(id), kind: GeneratorKind::InfiniteShift }
    }

    pub fn finite_shift(id: impl Into<String>, defect: u64) -> Self {
        GeneratorSpec { id: GenId::new(id), kind: GeneratorKind::FiniteShift { defect } }
    }

    /// The *-isomorphic index derived from the kind. Unitary parts default to
    /// ε₀ = ∞ (the dimension of the unitary space is not symbolic data).
    pub fn index(&self) -> StarIndex {
        match &self.kind {
            GeneratorKind::Unitary { .. } => StarIndex {
                eps0: ExtNat::Inf,
                eps_plus: ExtNat::Fin(0),
                eps_minus: ExtNat::Fin(0),
                eps_minus_minus: ExtNat::Fin(0),
            },
            GeneratorKind::InfiniteShift => StarIndex {
                eps0: ExtNat::Fin(0),
                eps_plus: ExtNat::Fin(0),
                eps_minus: ExtNat::Inf,
                eps_minus_minus: ExtNat::Fin(0),
            },
            GeneratorKind::FiniteShift { defect } => StarIndex {
                eps0: ExtNat::Fin(0),
                eps_plus: ExtNat::Fin(0),
                eps_minus: ExtNat::Fin(*defect),
                eps_minus_minus: ExtNat::Fin(0),
            },
        }
    }
}

/// A generator or its adjoint.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Signed {
    pub id: GenId,
    pub adjoint: bool,
}

impl Signed {
    pub fn plain(id: &GenId) -> Self {
        Signed { id: id.clone(), adjoint: false }
    }

    pub fn star(id: &GenId) -> Self {
        Signed { id: id.clone(), adjoint: true }
    }

    pub fn conjugate(&self) -> Self {
        Signed { id: self.id.clone(), adjoint: !self.adjoint }
    }

    /// Parses `"x"` or `"x*"`.
    pub fn parse(s: &str) -> Self {
        match s.strip_suffix('*') {
            Some(base) => Signed { id: GenId::new(base.trim()), adjoint: true },
            None => Signed { id: GenId::new(s.trim()), adjoint: false },
        }
    }
}

impl fmt::Display for Signed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.adjoint {
            write!(f, "{}*", self.id)
        } else {
            write!(f, "{}", self.id)
        }
    }
}

/// Formal projection token labelling a vertex of a corresponding graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ProjToken {
    pub gen: GenId,
    pub kind: TokenKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TokenKind {
    /// u*u = uu* of a unitary part.
    Unit,
    /// x*x, the initial projection.
    Init,
    /// (xⁿ)(xⁿ)*, the final projection of the n-th power, n ≥ 1.
    Fin(u32),
}

impl fmt::Display for ProjToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g = &self.gen;
        match self.kind {
            TokenKind::Unit => write!(f, "{g}*{g}={g}{g}*"),
            TokenKind::Init => write!(f, "{g}*{g}"),
            TokenKind::Fin(1) => write!(f, "{g}{g}*"),
            TokenKind::Fin(n) => write!(f, "{g}^{n}{g}^{n}*"),
        }
    }
}

/// Label of a vertex: the set of projection tokens it stands for. A freshly
/// constructed vertex holds one token; glued vertices hold the union of the
/// tokens they identified.
pub type VertexLabel = BTreeSet<ProjToken>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VertexId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

/// Edge label: which generator, and where in its corresponding graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeTag {
    pub gen: GenId,
    /// 1-based chain position; 1 for the loop/one-edge cases.
    pub step: u32,
}

impl fmt::Display for EdgeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.step == 1 {
            write!(f, "{}", self.gen)
        } else {
            write!(f, "{}^({})", self.gen, self.step)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub src: VertexId,
    pub dst: VertexId,
    pub tag: EdgeTag,
}

/// What a graph structurally is; used to short-circuit the full-subgraph
/// order on corresponding graphs of finite shifts (divisibility of defects).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphShape {
    UnitaryLoop { gen: GenId },
    InfiniteEdge { gen: GenId },
    FiniteChain { gen: GenId, defect: u64, depth: u32 },
    Composite,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("depth must be at least 1")]
    ZeroDepth,
    #[error("vertex {0:?} not in graph")]
    MissingVertex(VertexId),
    #[error("graph too large for brute-force isomorphism (> {0} vertices)")]
    IsomorphismBound(usize),
    #[error("unknown generator `{0}` referenced by the admissibility table")]
    UnknownGenerator(GenId),
}

/// A finite directed multigraph with labelled vertices and edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DirectedGraph {
    vertices: BTreeMap<VertexId, VertexLabel>,
    edges: Vec<Edge>,
    next_vertex: u32,
    next_edge: u32,
    pub shape: GraphShape,
    /// Vertices at which a truncated infinite chain continues.
    pub open_ends: BTreeSet<VertexId>,
}

impl DirectedGraph {
    pub fn new() -> Self {
        DirectedGraph {
            vertices: BTreeMap::new(),
            edges: Vec::new(),
            next_vertex: 0,
            next_edge: 0,
            shape: GraphShape::Composite,
            open_ends: BTreeSet::new(),
        }
    }

    pub fn add_vertex(&mut self, label: VertexLabel) -> VertexId {
        let id = VertexId(self.next_vertex);
        self.next_vertex += 1;
        self.vertices.insert(id, label);
        id
    }

    pub fn add_edge(&mut self, src: VertexId, dst: VertexId, tag: EdgeTag) -> EdgeId {
        assert!(self.vertices.contains_key(&src), "edge source must be a declared vertex");
        assert!(self.vertices.contains_key(&dst), "edge target must be a declared vertex");
        let id = EdgeId(self.next_edge);
        self.next_edge += 1;
        self.edges.push(Edge { id, src, dst, tag });
        id
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.keys().copied()
    }

    pub fn vertex_label(&self, v: VertexId) -> Option<&VertexLabel> {
        self.vertices.get(&v)
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of weakly connected components.
    pub fn component_count(&self) -> usize {
        let ids: Vec<VertexId> = self.vertex_ids().collect();
        let mut uf = UnionFind::new(ids.len());
        let pos: BTreeMap<VertexId, usize> = ids.iter().copied().enumerate().map(|(i, v)| (v, i)).collect();
        for e in &self.edges {
            uf.union(pos[&e.src], pos[&e.dst]);
        }
        (0..ids.len()).filter(|&i| uf.find(i) == i).count()
    }

    /// Disjoint union; the second graph's ids are renamed on entry.
    pub fn disjoint_union(&self, other: &DirectedGraph) -> DirectedGraph {
        let mut out = self.clone();
        out.shape = GraphShape::Composite;
        let mut map = BTreeMap::new();
        for (v, label) in &other.vertices {
            let nv = out.add_vertex(label.clone());
            map.insert(*v, nv);
        }
        for e in &other.edges {
            out.add_edge(map[&e.src], map[&e.dst], e.tag.clone());
        }
        for v in &other.open_ends {
            out.open_ends.insert(map[v]);
        }
        out
    }

    /// Finds the unique vertex carrying `token`, if any.
    pub fn vertex_with_token(&self, token: &ProjToken) -> Option<VertexId> {
        self.vertices.iter().find(|(_, l)| l.contains(token)).map(|(v, _)| *v)
    }

    /// Merges vertex `b` into vertex `a`: edges are re-targeted and the
    /// labels united. Used by gluing.
    fn merge_vertices(&mut self, a: VertexId, b: VertexId) {
        if a == b {
            return;
        }
        let label_b = self.vertices.remove(&b).expect("merge target must exist");
        self.vertices.get_mut(&a).expect("merge survivor must exist").extend(label_b);
        for e in &mut self.edges {
            if e.src == b {
                e.src = a;
            }
            if e.dst == b {
                e.dst = a;
            }
        }
        if self.open_ends.remove(&b) {
            self.open_ends.insert(a);
        }
    }

    /// DOT rendering; vertices as circles labelled with their projection
    /// tokens, edges labelled with generator names. Shadow edges (dashed,
    /// labelled `e^-1`) are included only on request.
    pub fn to_dot(&self, include_shadow: bool) -> String {
        let mut s = String::from("digraph G {\n  node [shape=circle];\n");
        for (v, label) in &self.vertices {
            let text: Vec<String> = label.iter().map(|t| t.to_string()).collect();
            let mut text = text.join(" = ");
            if self.open_ends.contains(v) {
                text.push_str(" ...");
            }
            s.push_str(&format!("  v{} [label=\"{}\"];\n", v.0, text));
        }
        for e in &self.edges {
            s.push_str(&format!("  v{} -> v{} [label=\"{}\"];\n", e.src.0, e.dst.0, e.tag));
            if include_shadow {
                s.push_str(&format!(
                    "  v{} -> v{} [label=\"{}^-1\", style=dashed];\n",
                    e.dst.0, e.src.0, e.tag
                ));
            }
        }
        s.push_str("}\n");
        s
    }
}

impl Default for DirectedGraph {
    fn default() -> Self {
        Self::new()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, i: usize) -> usize {
        if self.parent[i] != i {
            let r = self.find(self.parent[i]);
            self.parent[i] = r;
        }
        self.parent[i]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[rb] = ra;
        }
    }
}

fn singleton(token: ProjToken) -> VertexLabel {
    let mut s = BTreeSet::new();
    s.insert(token);
    s
}

/// Builds the corresponding graph of one Wold-family member:
///
/// * unitary — one vertex (u*u = uu*) with one loop edge;
/// * infinite shift — two vertices s*s, ss* and one edge;
/// * finite shift — the countable linear chain x*x → xx* → x²x²* → …,
///   truncated to `depth` edges with an open-end marker on the last vertex.
pub fn corresponding_graph(gen: &GeneratorSpec, depth: u32) -> Result<DirectedGraph, GraphError> {
    if depth == 0 {
        return Err(GraphError::ZeroDepth);
    }
    let mut g = DirectedGraph::new();
    match &gen.kind {
        GeneratorKind::Unitary { .. } => {
            let v = g.add_vertex(singleton(ProjToken { gen: gen.id.clone(), kind: TokenKind::Unit }));
            g.add_edge(v, v, EdgeTag { gen: gen.id.clone(), step: 1 });
            g.shape = GraphShape::UnitaryLoop { gen: gen.id.clone() };
        }
        GeneratorKind::InfiniteShift => {
            let a = g.add_vertex(singleton(ProjToken { gen: gen.id.clone(), kind: TokenKind::Init }));
            let b = g.add_vertex(singleton(ProjToken { gen: gen.id.clone(), kind: TokenKind::Fin(1) }));
            g.add_edge(a, b, EdgeTag { gen: gen.id.clone(), step: 1 });
            g.shape = GraphShape::InfiniteEdge { gen: gen.id.clone() };
        }
        GeneratorKind::FiniteShift { defect } => {
            let mut prev = g.add_vertex(singleton(ProjToken { gen: gen.id.clone(), kind: TokenKind::Init }));
            for n in 1..=depth {
                let v = g.add_vertex(singleton(ProjToken { gen: gen.id.clone(), kind: TokenKind::Fin(n) }));
                g.add_edge(prev, v, EdgeTag { gen: gen.id.clone(), step: n });
                prev = v;
            }
            g.open_ends.insert(prev);
            g.shape = GraphShape::FiniteChain { gen: gen.id.clone(), defect: *defect, depth };
        }
    }
    Ok(g)
}

/// Glues `g1` and `g2` by identifying `v1` with `v2`. The identified vertex
/// is a fresh combinatorial token carrying the union of the labels it
/// merged; it is never resolved back to a single operator.
pub fn glue(
    g1: &DirectedGraph,
    v1: VertexId,
    g2: &DirectedGraph,
    v2: VertexId,
) -> Result<DirectedGraph, GraphError> {
    if !g1.vertices.contains_key(&v1) {
        return Err(GraphError::MissingVertex(v1));
    }
    if !g2.vertices.contains_key(&v2) {
        return Err(GraphError::MissingVertex(v2));
    }
    let offset = g1.next_vertex;
    let mut out = g1.disjoint_union(g2);
    out.merge_vertices(v1, VertexId(offset + v2.0));
    Ok(out)
}

// ---------------------------------------------------------------------------
// Admissibility map π
// ---------------------------------------------------------------------------

/// A raw table of declared values for π(x, y) = (x*x)(yy*) over signed
/// generators. Unspecified pairs default to "zero" (no gluing); the closure
/// adds entries forced by adjoint symmetry, self rows, unitarity, and chain
/// monotonicity of finite shifts.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pi {
    pub entries: BTreeMap<(Signed, Signed), bool>,
}

impl Pi {
    pub fn new() -> Self {
        Pi::default()
    }

    pub fn declare(&mut self, x: Signed, y: Signed, nonzero: bool) {
        self.entries.insert((x, y), nonzero);
    }

    pub fn declare_pair(&mut self, x: &str, y: &str, nonzero: bool) {
        self.declare(Signed::parse(x), Signed::parse(y), nonzero);
    }

    /// Validates the table against the family and, when clean, returns the
    /// closed table. Violations are data, not errors.
    pub fn close(&self, family: &[GeneratorSpec]) -> (ClosedPi, Vec<PiViolation>) {
        let kinds: BTreeMap<GenId, GeneratorKind> =
            family.iter().map(|g| (g.id.clone(), g.kind.clone())).collect();
        let mut violations = Vec::new();
        for (x, y) in self.entries.keys() {
            for id in [&x.id, &y.id] {
                if !kinds.contains_key(id) {
                    violations.push(PiViolation::UnknownGenerator { gen: id.clone() });
                }
            }
        }

        let signed: Vec<Signed> = family
            .iter()
            .flat_map(|g| [Signed::plain(&g.id), Signed::star(&g.id)])
            .collect();

        // Saturate the "true" set.
        let mut map: BTreeMap<(Signed, Signed), bool> = BTreeMap::new();
        for x in &signed {
            for y in &signed {
                let mut t = self.entries.get(&(x.clone(), y.clone())).copied().unwrap_or(false);
                // π(x, x*) = x*x and π(x*, x) = xx* are the generator's own
                // vertices, never zero.
                if x.id == y.id && x.adjoint != y.adjoint {
                    t = true;
                }
                map.insert((x.clone(), y.clone()), t);
            }
        }
        let is_unitary = |id: &GenId| matches!(kinds.get(id), Some(GeneratorKind::Unitary { .. }));
        let is_finite_shift =
            |id: &GenId| matches!(kinds.get(id), Some(GeneratorKind::FiniteShift { .. }));
        // For a finite shift x we have xx* ≤ x*x, so (x*x)(xx*) = xx* ≠ 0.
        for x in &signed {
            if is_finite_shift(&x.id) && !x.adjoint {
                map.insert((Signed::plain(&x.id), Signed::plain(&x.id)), true);
                map.insert((Signed::star(&x.id), Signed::star(&x.id)), true);
            }
        }
        loop {
            let mut changed = false;
            let set = |map: &mut BTreeMap<(Signed, Signed), bool>, k: (Signed, Signed)| {
                if !map[&k] {
                    map.insert(k, true);
                    true
                } else {
                    false
                }
            };
            let keys: Vec<(Signed, Signed)> =
                map.iter().filter(|(_, &v)| v).map(|(k, _)| k.clone()).collect();
            for (x, y) in keys {
                // π(x, y)* = π(y*, x*)
                changed |= set(&mut map, (y.conjugate(), x.conjugate()));
                // Unitaries: u*u = uu*, so the sign of a unitary is immaterial.
                if is_unitary(&x.id) {
                    changed |= set(&mut map, (x.conjugate(), y.clone()));
                }
                if is_unitary(&y.id) {
                    changed |= set(&mut map, (x.clone(), y.conjugate()));
                }
                // Finite shifts: xx* ≤ x*x propagates upward.
                if is_finite_shift(&x.id) && x.adjoint {
                    changed |= set(&mut map, (x.conjugate(), y.clone()));
                }
                if is_finite_shift(&y.id) && !y.adjoint {
                    changed |= set(&mut map, (x.clone(), y.conjugate()));
                }
            }
            if !changed {
                break;
            }
        }

        // A declared zero that the closure forces nonzero is a violation:
        // one per bad declaration, named as an adjoint asymmetry when the
        // conjugate pair was explicitly declared nonzero.
        for ((x, y), declared) in &self.entries {
            if *declared || !map.get(&(x.clone(), y.clone())).copied().unwrap_or(false) {
                continue;
            }
            let conjugate = (y.conjugate(), x.conjugate());
            if self.entries.get(&conjugate).copied().unwrap_or(false) {
                violations.push(PiViolation::AdjointAsymmetry { x: conjugate.0, y: conjugate.1 });
            } else {
                violations.push(PiViolation::ForcedNonzero { x: x.clone(), y: y.clone() });
            }
        }

        (ClosedPi { kinds, map }, violations)
    }
}

/// Inconsistency found in a declared admissibility table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PiViolation {
    /// π(x,y) declared nonzero but π(y*,x*) declared zero.
    AdjointAsymmetry { x: Signed, y: Signed },
    /// A declared zero contradicts a value forced by self rows, unitarity,
    /// adjoint symmetry, or finite-shift chain monotonicity.
    ForcedNonzero { x: Signed, y: Signed },
    UnknownGenerator { gen: GenId },
}

impl fmt::Display for PiViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PiViolation::AdjointAsymmetry { x, y } => {
                write!(f, "pi({x}, {y}) != 0 but pi({}, {}) declared 0", y.conjugate(), x.conjugate())
            }
            PiViolation::ForcedNonzero { x, y } => {
                write!(f, "pi({x}, {y}) declared 0 but is forced nonzero")
            }
            PiViolation::UnknownGenerator { gen } => write!(f, "unknown generator `{gen}`"),
        }
    }
}

/// Validates a table; the empty list means adjoint symmetry and monotone
/// propagation are consistent.
pub fn pi_validate(family: &[GeneratorSpec], pi: &Pi) -> Vec<PiViolation> {
    pi.close(family).1
}

/// A saturated admissibility table with the family's kinds attached.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedPi {
    kinds: BTreeMap<GenId, GeneratorKind>,
    map: BTreeMap<(Signed, Signed), bool>,
}

impl ClosedPi {
    /// π(x, y) ≠ 0 for signed generators.
    pub fn pair(&self, x: &Signed, y: &Signed) -> bool {
        self.map.get(&(x.clone(), y.clone())).copied().unwrap_or(false)
    }

    pub fn signed_gens(&self) -> Vec<Signed> {
        self.kinds
            .keys()
            .flat_map(|id| [Signed::plain(id), Signed::star(id)])
            .collect()
    }

    pub fn kind(&self, id: &GenId) -> Option<&GeneratorKind> {
        self.kinds.get(id)
    }

    /// Whether the product of two labelled projections is (declared) nonzero.
    ///
    /// Tokens of one generator multiply along its chain; cross-generator
    /// products reduce to the signed table via x*x = proj⁺(x) = proj⁻(x*) and
    /// xx* = proj⁻(x) = proj⁺(x*). Deep chain tokens (n ≥ 2) have no
    /// signed-table representative and are conservatively not admissible
    /// across generators.
    pub fn tokens_admissible(&self, p: &ProjToken, q: &ProjToken) -> bool {
        if p == q {
            return true;
        }
        if p.gen == q.gen {
            return match self.kinds.get(&p.gen) {
                Some(GeneratorKind::Unitary { .. }) => true,
                // Chain projections of one finite shift are totally ordered.
                Some(GeneratorKind::FiniteShift { .. }) => true,
                // s*s and ss* of an infinite shift need not overlap.
                Some(GeneratorKind::InfiniteShift) => {
                    self.pair(&Signed::plain(&p.gen), &Signed::plain(&p.gen))
                }
                None => false,
            };
        }
        let left = match p.kind {
            TokenKind::Unit | TokenKind::Init => Signed::plain(&p.gen),
            TokenKind::Fin(1) => Signed::star(&p.gen),
            TokenKind::Fin(_) => return false,
        };
        let right = match q.kind {
            TokenKind::Unit | TokenKind::Fin(1) => Signed::plain(&q.gen),
            TokenKind::Init => Signed::star(&q.gen),
            TokenKind::Fin(_) => return false,
        };
        self.pair(&left, &right)
    }

    /// Whether two vertex labels contain an admissible token pair. The
    /// product of projections vanishes symmetrically, so one orientation
    /// suffices.
    pub fn labels_admissible(&self, a: &VertexLabel, b: &VertexLabel) -> bool {
        a.iter().any(|p| b.iter().any(|q| self.tokens_admissible(p, q) || self.tokens_admissible(q, p)))
    }
}

// ---------------------------------------------------------------------------
// Full-subgraph partial order
// ---------------------------------------------------------------------------

/// The full-subgraph order: `g1 ≤ g2` iff g1's edges inject into g2's edges
/// preserving labels and endpoints and g1's vertices are exactly the
/// endpoints of those edges. Corresponding graphs of finite shifts compare by
/// the divisibility of their defects (the deeper chain sits inside the finer
/// one), independently of the truncation depth.
pub fn full_subgraph_leq(g1: &DirectedGraph, g2: &DirectedGraph) -> bool {
    if let (GraphShape::FiniteChain { defect: k1, .. }, GraphShape::FiniteChain { defect: k2, .. }) =
        (&g1.shape, &g2.shape)
    {
        return *k2 != 0 && k1 % k2 == 0;
    }
    if g1.edge_count() > g2.edge_count() || g1.vertex_count() > g2.vertex_count() {
        return false;
    }
    // Try label-preserving injections, backtracking over edges.
    let mut used = vec![false; g2.edges.len()];
    let mut vmap: BTreeMap<VertexId, VertexId> = BTreeMap::new();
    if !embed_edges(g1, g2, 0, &mut used, &mut vmap) {
        return false;
    }
    true
}

fn embed_edges(
    g1: &DirectedGraph,
    g2: &DirectedGraph,
    i: usize,
    used: &mut Vec<bool>,
    vmap: &mut BTreeMap<VertexId, VertexId>,
) -> bool {
    if i == g1.edges.len() {
        // Every g1 vertex must be an endpoint of a mapped edge, and the
        // vertex map injective.
        let endpoint_cover: BTreeSet<VertexId> =
            g1.edges.iter().flat_map(|e| [e.src, e.dst]).collect();
        if !g1.vertex_ids().all(|v| endpoint_cover.contains(&v)) {
            return false;
        }
        let images: BTreeSet<VertexId> = vmap.values().copied().collect();
        return images.len() == vmap.len();
    }
    let e = &g1.edges[i];
    for (j, cand) in g2.edges.iter().enumerate() {
        if used[j] || cand.tag != e.tag {
            continue;
        }
        let mut added = Vec::new();
        let mut ok = true;
        for (from, to) in [(e.src, cand.src), (e.dst, cand.dst)] {
            match vmap.get(&from) {
                Some(&m) if m != to => {
                    ok = false;
                    break;
                }
                Some(_) => {}
                None => {
                    vmap.insert(from, to);
                    added.push(from);
                }
            }
        }
        if ok {
            used[j] = true;
            if embed_edges(g1, g2, i + 1, used, vmap) {
                return true;
            }
            used[j] = false;
        }
        for a in added {
            vmap.remove(&a);
        }
    }
    false
}

// ---------------------------------------------------------------------------
// Conditional gluing
// ---------------------------------------------------------------------------

/// The conditional (π-dependent) glued graph of `g1` and `g2`:
///
/// * no vertex pair is admissible — the disjoint union;
/// * the graphs are comparable under the full-subgraph order — the larger
///   absorbs the smaller;
/// * otherwise every admissible vertex pair is identified.
///
/// The identifications are taken simultaneously (union-find over the
/// disjoint union), so the result does not depend on pair order.
pub fn conditional_glue(g1: &DirectedGraph, g2: &DirectedGraph, pi: &ClosedPi) -> DirectedGraph {
    let mut pairs = Vec::new();
    for v1 in g1.vertex_ids() {
        for v2 in g2.vertex_ids() {
            if pi.labels_admissible(&g1.vertices[&v1], &g2.vertices[&v2]) {
                pairs.push((v1, v2));
            }
        }
    }
    if pairs.is_empty() {
        return g1.disjoint_union(g2);
    }
    if full_subgraph_leq(g1, g2) {
        return g2.clone();
    }
    if full_subgraph_leq(g2, g1) {
        return g1.clone();
    }
    let offset = g1.next_vertex;
    let base = g1.disjoint_union(g2);
    let pairs: Vec<(VertexId, VertexId)> =
        pairs.into_iter().map(|(a, b)| (a, VertexId(offset + b.0))).collect();
    identify_pairs(&base, &pairs)
}

fn identify_pairs(base: &DirectedGraph, pairs: &[(VertexId, VertexId)]) -> DirectedGraph {
    let ids: Vec<VertexId> = base.vertex_ids().collect();
    let pos: BTreeMap<VertexId, usize> =
        ids.iter().copied().enumerate().map(|(i, v)| (v, i)).collect();
    let mut uf = UnionFind::new(ids.len());
    for (a, b) in pairs {
        uf.union(pos[a], pos[b]);
    }
    let mut out = DirectedGraph::new();
    let mut class_vertex: BTreeMap<usize, VertexId> = BTreeMap::new();
    for (i, v) in ids.iter().enumerate() {
        let root = uf.find(i);
        let label = base.vertices[v].clone();
        match class_vertex.get(&root) {
            Some(&nv) => {
                out.vertices.get_mut(&nv).expect("class vertex").extend(label);
            }
            None => {
                let nv = out.add_vertex(label);
                class_vertex.insert(root, nv);
            }
        }
    }
    let map = |uf: &mut UnionFind, v: VertexId| class_vertex[&uf.find(pos[&v])];
    for e in &base.edges {
        let (s, d) = (map(&mut uf, e.src), map(&mut uf, e.dst));
        out.add_edge(s, d, e.tag.clone());
    }
    for &v in &base.open_ends {
        let nv = map(&mut uf, v);
        out.open_ends.insert(nv);
    }
    out
}

/// The 𝒢-graph: the left fold of the conditional gluing over the
/// corresponding graphs of the family, in input order. Order independence up
/// to graph isomorphism is a tested property, not an assumption: chain
/// absorption only fires on bare chains, so listing comparable finite shifts
/// adjacently (before unrelated members join the fold) keeps the result
/// canonical.
pub fn g_graph(
    family: &[GeneratorSpec],
    pi: &ClosedPi,
    depth: u32,
) -> Result<DirectedGraph, GraphError> {
    let mut acc: Option<DirectedGraph> = None;
    for gen in family {
        let g = corresponding_graph(gen, depth)?;
        acc = Some(match acc {
            None => g,
            Some(prev) => conditional_glue(&prev, &g, pi),
        });
    }
    Ok(acc.unwrap_or_default())
}

// ---------------------------------------------------------------------------
// Graph isomorphism (brute force, small graphs)
// ---------------------------------------------------------------------------

const ISO_BOUND: usize = 10;

/// Label-blind graph isomorphism: a vertex bijection under which the
/// multiplicity of edges between every ordered vertex pair agrees. Brute
/// force with a degree-profile pruning; bounded at 10 vertices.
pub fn graphs_isomorphic(g1: &DirectedGraph, g2: &DirectedGraph) -> Result<bool, GraphError> {
    if g1.vertex_count() > ISO_BOUND || g2.vertex_count() > ISO_BOUND {
        return Err(GraphError::IsomorphismBound(ISO_BOUND));
    }
    if g1.vertex_count() != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return Ok(false);
    }
    let v1: Vec<VertexId> = g1.vertex_ids().collect();
    let v2: Vec<VertexId> = g2.vertex_ids().collect();
    let profile = |g: &DirectedGraph, v: VertexId| {
        let outd = g.edges.iter().filter(|e| e.src == v).count();
        let ind = g.edges.iter().filter(|e| e.dst == v).count();
        (outd, ind)
    };
    let p1: Vec<(usize, usize)> = v1.iter().map(|&v| profile(g1, v)).collect();
    let p2: Vec<(usize, usize)> = v2.iter().map(|&v| profile(g2, v)).collect();
    {
        let mut s1 = p1.clone();
        let mut s2 = p2.clone();
        s1.sort_unstable();
        s2.sort_unstable();
        if s1 != s2 {
            return Ok(false);
        }
    }
    let mult = |g: &DirectedGraph, a: VertexId, b: VertexId| {
        g.edges.iter().filter(|e| e.src == a && e.dst == b).count()
    };
    let n = v1.len();
    let mut assignment: Vec<usize> = Vec::with_capacity(n);
    let mut taken = vec![false; n];
    fn search(
        k: usize,
        n: usize,
        assignment: &mut Vec<usize>,
        taken: &mut Vec<bool>,
        p1: &[(usize, usize)],
        p2: &[(usize, usize)],
        consistent: &dyn Fn(&[usize]) -> bool,
    ) -> bool {
        if k == n {
            return true;
        }
        for cand in 0..n {
            if taken[cand] || p1[k] != p2[cand] {
                continue;
            }
            assignment.push(cand);
            taken[cand] = true;
            if consistent(assignment) && search(k + 1, n, assignment, taken, p1, p2, consistent) {
                return true;
            }
            taken[cand] = false;
            assignment.pop();
        }
        false
    }
    let consistent = |assignment: &[usize]| {
        let k = assignment.len();
        let last = k - 1;
        for i in 0..k {
            for (a, b) in [(i, last), (last, i)] {
                if mult(g1, v1[a], v1[b]) != mult(g2, v2[assignment[a]], v2[assignment[b]]) {
                    return false;
                }
            }
        }
        true
    };
    Ok(search(0, n, &mut assignment, &mut taken, &p1, &p2, &consistent))
}
