//! The classified-algebra AST and the block-structure decomposition: Wold
//! partition, minimal finite shifts, π-components, the free-product block
//! decomposition, the matricial representation of a connected graph, and the
//! odd-orbit fixture family.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{
    corresponding_graph, full_subgraph_leq, ClosedPi, DirectedGraph, EdgeId, GenId,
    GeneratorKind, GeneratorSpec, GraphError, Pi, Signed, SpectrumTag, VertexId,
};
use crate::groupoid::{GroupoidElement, SignedEdge};
use crate::numeric::CMatrix;

/// Closure marker on a free product; a symbolic annotation only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Closure {
    Algebraic,
    /// The norm closure of the algebraic free product.
    TopologicalReduced,
}

/// AST of a classified C*-algebra.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AlgebraExpr {
    /// ℂ·1 on some space; the tag is display-only and erased by
    /// normalization.
    ScalarUnit { space: Option<String> },
    /// C(spec); the spectrum tag is semantic and preserved.
    ContinuousFunctions { spectrum: SpectrumTag },
    MatrixAlg { dim: u32 },
    /// The Toeplitz algebra; the space tag is display-only.
    Toeplitz { space: Option<String> },
    Tensor { left: Box<AlgebraExpr>, right: Box<AlgebraExpr> },
    DirectSum { summands: Vec<AlgebraExpr> },
    FreeProduct { factors: Vec<AlgebraExpr>, closure: Closure },
}

impl AlgebraExpr {
    pub fn scalar_unit() -> Self {
        AlgebraExpr::ScalarUnit { space: None }
    }

    pub fn scalar_unit_on(tag: impl Into<String>) -> Self {
        AlgebraExpr::ScalarUnit { space: Some(tag.into()) }
    }

    pub fn continuous_functions(spectrum: SpectrumTag) -> Self {
        AlgebraExpr::ContinuousFunctions { spectrum }
    }

    pub fn matrix_alg(dim: u32) -> Self {
        AlgebraExpr::MatrixAlg { dim }
    }

    pub fn toeplitz() -> Self {
        AlgebraExpr::Toeplitz { space: None }
    }

    pub fn toeplitz_on(tag: impl Into<String>) -> Self {
        AlgebraExpr::Toeplitz { space: Some(tag.into()) }
    }

    pub fn tensor(left: AlgebraExpr, right: AlgebraExpr) -> Self {
        AlgebraExpr::Tensor { left: Box::new(left), right: Box::new(right) }
    }

    pub fn direct_sum(summands: Vec<AlgebraExpr>) -> Self {
        assert!(!summands.is_empty(), "direct sums are nonempty");
        AlgebraExpr::DirectSum { summands }
    }

    pub fn free_product(factors: Vec<AlgebraExpr>, closure: Closure) -> Self {
        assert!(!factors.is_empty(), "free products are nonempty");
        AlgebraExpr::FreeProduct { factors, closure }
    }

    /// Canonical form: space tags erased, nested sums/products of the same
    /// kind flattened, singletons collapsed, commutative operands sorted,
    /// and repeated ℂ·1 tensor factors merged. Idempotent.
    pub fn normalize(&self) -> AlgebraExpr {
        match self {
            AlgebraExpr::ScalarUnit { .. } => AlgebraExpr::scalar_unit(),
            AlgebraExpr::ContinuousFunctions { spectrum } => {
                AlgebraExpr::continuous_functions(spectrum.clone())
            }
            AlgebraExpr::MatrixAlg { dim } => AlgebraExpr::matrix_alg(*dim),
            AlgebraExpr::Toeplitz { .. } => AlgebraExpr::toeplitz(),
            AlgebraExpr::Tensor { left, right } => {
                let l = left.normalize();
                let r = right.normalize();
                match (&l, &r) {
                    // ℂ ⊗ ℂ ⊗ X collapses to ℂ ⊗ X.
                    (AlgebraExpr::ScalarUnit { .. }, AlgebraExpr::Tensor { left: rl, .. })
                        if matches!(**rl, AlgebraExpr::ScalarUnit { .. }) =>
                    {
                        r
                    }
                    _ => AlgebraExpr::tensor(l, r),
                }
            }
            AlgebraExpr::DirectSum { summands } => {
                let mut flat = Vec::new();
                for s in summands {
                    match s.normalize() {
                        AlgebraExpr::DirectSum { summands: inner } => flat.extend(inner),
                        other => flat.push(other),
                    }
                }
                flat.sort();
                if flat.len() == 1 {
                    flat.pop().expect("nonempty")
                } else {
                    AlgebraExpr::DirectSum { summands: flat }
                }
            }
            AlgebraExpr::FreeProduct { factors, closure } => {
                let mut flat = Vec::new();
                for x in factors {
                    match x.normalize() {
                        AlgebraExpr::FreeProduct { factors: inner, closure: c }
                            if c == *closure =>
                        {
                            flat.extend(inner)
                        }
                        other => flat.push(other),
                    }
                }
                flat.sort();
                if flat.len() == 1 {
                    flat.pop().expect("nonempty")
                } else {
                    AlgebraExpr::FreeProduct { factors: flat, closure: *closure }
                }
            }
        }
    }

    /// Canonical text rendering, e.g. `cl((C·1 ⊗ M2) *alg T)`.
    pub fn render(&self) -> String {
        match self {
            AlgebraExpr::ScalarUnit { space: None } => "C·1".into(),
            AlgebraExpr::ScalarUnit { space: Some(t) } => format!("C·1_{t}"),
            AlgebraExpr::ContinuousFunctions { spectrum } => format!("C({spectrum})"),
            AlgebraExpr::MatrixAlg { dim } => format!("M{dim}"),
            AlgebraExpr::Toeplitz { space: None } => "T".into(),
            AlgebraExpr::Toeplitz { space: Some(t) } => format!("T({t})"),
            AlgebraExpr::Tensor { left, right } => {
                format!("({} ⊗ {})", left.render(), right.render())
            }
            AlgebraExpr::DirectSum { summands } => {
                let parts: Vec<String> = summands.iter().map(|s| s.render()).collect();
                format!("({})", parts.join(" ⊕ "))
            }
            AlgebraExpr::FreeProduct { factors, closure } => {
                let parts: Vec<String> = factors.iter().map(|s| s.render()).collect();
                let body = parts.join(" *alg ");
                match closure {
                    Closure::Algebraic => format!("({body})"),
                    Closure::TopologicalReduced => format!("cl({body})"),
                }
            }
        }
    }
}

impl fmt::Display for AlgebraExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

#[derive(Debug, Error)]
pub enum BlocksError {
    #[error("graph must be connected")]
    NotConnected,
    #[error("loop phases must be distinct and nonzero")]
    BadThetas,
    #[error("need {needed} loop phases, got {got}")]
    NotEnoughThetas { needed: usize, got: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

// ---------------------------------------------------------------------------
// Wold partition and the block decomposition
// ---------------------------------------------------------------------------

/// The Wold family split into unitary parts, infinite shifts, and finite
/// shifts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WoldPartition {
    pub unitaries: Vec<GeneratorSpec>,
    pub infinite_shifts: Vec<GeneratorSpec>,
    pub finite_shifts: Vec<GeneratorSpec>,
}

pub fn wold_partition(family: &[GeneratorSpec]) -> WoldPartition {
    let mut p = WoldPartition {
        unitaries: Vec::new(),
        infinite_shifts: Vec::new(),
        finite_shifts: Vec::new(),
    };
    for g in family {
        match g.kind {
            GeneratorKind::Unitary { .. } => p.unitaries.push(g.clone()),
            GeneratorKind::InfiniteShift => p.infinite_shifts.push(g.clone()),
            GeneratorKind::FiniteShift { .. } => p.finite_shifts.push(g.clone()),
        }
    }
    p
}

/// Whether any signed π entry between two distinct generators is nonzero.
fn pi_related(pi: &ClosedPi, x: &GenId, y: &GenId) -> bool {
    let xs = [Signed::plain(x), Signed::star(x)];
    let ys = [Signed::plain(y), Signed::star(y)];
    xs.iter().any(|a| ys.iter().any(|b| pi.pair(a, b) || pi.pair(b, a)))
}

/// Finite shifts that survive absorption: a shift is dropped when another
/// π-related finite shift strictly dominates its corresponding graph (its
/// defect is a proper multiple of the other's). Per divisibility chain this
/// retains the minimal-defect generator, whose chain graph absorbs the rest.
pub fn minimal_finite_shifts(
    finite_shifts: &[GeneratorSpec],
    pi: &ClosedPi,
    depth: u32,
) -> Result<Vec<GeneratorSpec>, GraphError> {
    let graphs: Vec<DirectedGraph> = finite_shifts
        .iter()
        .map(|g| corresponding_graph(g, depth))
        .collect::<Result<_, _>>()?;
    let mut kept = Vec::new();
    for (i, x) in finite_shifts.iter().enumerate() {
        let dominated = finite_shifts.iter().enumerate().any(|(j, y)| {
            i != j
                && pi_related(pi, &x.id, &y.id)
                && full_subgraph_leq(&graphs[i], &graphs[j])
                && !full_subgraph_leq(&graphs[j], &graphs[i])
        });
        if !dominated {
            kept.push(x.clone());
        }
    }
    Ok(kept)
}

/// Connected components of the relation "some π between the pair is
/// nonzero", in input order.
pub fn pi_components(gens: &[GeneratorSpec], pi: &ClosedPi) -> Vec<Vec<GeneratorSpec>> {
    let n = gens.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut Vec<usize>, i: usize) -> usize {
        if parent[i] != i {
            let r = find(parent, parent[i]);
            parent[i] = r;
        }
        parent[i]
    }
    for i in 0..n {
        for j in i + 1..n {
            if pi_related(pi, &gens[i].id, &gens[j].id) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[rj] = ri;
                }
            }
        }
    }
    let mut classes: BTreeMap<usize, Vec<GeneratorSpec>> = BTreeMap::new();
    for (i, gen) in gens.iter().enumerate() {
        let r = find(&mut parent, i);
        classes.entry(r).or_default().push(gen.clone());
    }
    classes.into_values().collect()
}

/// The block-structure decomposition of C*(𝒢):
///
/// (ℂ·1) ⊗ closure( [one (ℂ·1)⊗C(spec) block per unitary]
///                  *alg [one (ℂ·1)⊗M₂ block per infinite shift]
///                  *alg [⊕ over π-components of the minimal finite shifts,
///                        one Toeplitz block each] ).
///
/// Returned in normalized form. The empty family yields ℂ·1.
pub fn block_structure(
    family: &[GeneratorSpec],
    pi: &ClosedPi,
    depth: u32,
) -> Result<AlgebraExpr, GraphError> {
    let part = wold_partition(family);
    let mut blocks: Vec<AlgebraExpr> = Vec::new();
    for u in &part.unitaries {
        let spectrum = match &u.kind {
            GeneratorKind::Unitary { spectrum } => spectrum.clone(),
            _ => unreachable!("partitioned"),
        };
        blocks.push(AlgebraExpr::tensor(
            AlgebraExpr::scalar_unit_on(format!("H_{}", u.id)),
            AlgebraExpr::continuous_functions(spectrum),
        ));
    }
    for s in &part.infinite_shifts {
        blocks.push(AlgebraExpr::tensor(
            AlgebraExpr::scalar_unit_on(format!("H_{}", s.id)),
            AlgebraExpr::matrix_alg(2),
        ));
    }
    if !part.finite_shifts.is_empty() {
        let minimal = minimal_finite_shifts(&part.finite_shifts, pi, depth)?;
        let toeplitz: Vec<AlgebraExpr> = pi_components(&minimal, pi)
            .into_iter()
            .map(|component| {
                // Space tag: the component's minimal-defect chain.
                let least = component
                    .iter()
                    .min_by_key(|g| match g.kind {
                        GeneratorKind::FiniteShift { defect } => defect,
                        _ => u64::MAX,
                    })
                    .expect("components are nonempty");
                AlgebraExpr::toeplitz_on(format!("H_{}", least.id))
            })
            .collect();
        blocks.push(AlgebraExpr::direct_sum(toeplitz));
    }
    if blocks.is_empty() {
        return Ok(AlgebraExpr::scalar_unit());
    }
    Ok(AlgebraExpr::tensor(
        AlgebraExpr::scalar_unit_on("H_G"),
        AlgebraExpr::free_product(blocks, Closure::TopologicalReduced),
    )
    .normalize())
}

// ---------------------------------------------------------------------------
// Matricial representation of a connected graph
// ---------------------------------------------------------------------------

/// Matrices of the matricial graph representation: one diagonal unit
/// projection per vertex and one single-entry (or phase-diagonal, for loops)
/// partial isometry per edge.
#[derive(Debug, Clone)]
pub struct MatricialRep {
    pub dim: usize,
    pub vertex_index: BTreeMap<VertexId, usize>,
    pub vertex_projections: BTreeMap<VertexId, CMatrix>,
    pub edge_ops: BTreeMap<EdgeId, CMatrix>,
}

impl MatricialRep {
    /// Matrix assigned to a groupoid element: the product of its letters,
    /// with shadows acting by adjoints.
    pub fn element_matrix(&self, el: &GroupoidElement) -> CMatrix {
        match el {
            GroupoidElement::Zero => CMatrix::zeros(self.dim, self.dim),
            GroupoidElement::Vertex(v) => self.vertex_projections[v].clone(),
            GroupoidElement::Path(p) => {
                let mut m = self.letter_matrix(p[0]);
                for &l in &p[1..] {
                    m *= self.letter_matrix(l);
                }
                m
            }
        }
    }

    fn letter_matrix(&self, l: SignedEdge) -> CMatrix {
        let base = &self.edge_ops[&l.edge];
        if l.inverted {
            base.adjoint()
        } else {
            base.clone()
        }
    }
}

/// Builds the matricial representation of a finite connected graph. Loop
/// edges consume phases from `thetas` (distinct, nonzero); the m-th of the
/// k parallel edges between two vertices carries ωᵐ with ω a primitive k-th
/// root of unity.
pub fn matricial_representation(
    g: &DirectedGraph,
    thetas: &[f64],
) -> Result<MatricialRep, BlocksError> {
    if g.vertex_count() == 0 || g.component_count() != 1 {
        return Err(BlocksError::NotConnected);
    }
    for (i, a) in thetas.iter().enumerate() {
        if *a == 0.0 {
            return Err(BlocksError::BadThetas);
        }
        if thetas[..i].iter().any(|b| b == a) {
            return Err(BlocksError::BadThetas);
        }
    }
    let n = g.vertex_count();
    let vertex_index: BTreeMap<VertexId, usize> =
        g.vertex_ids().enumerate().map(|(i, v)| (v, i)).collect();
    let mut vertex_projections = BTreeMap::new();
    for (v, &i) in &vertex_index {
        let mut p = CMatrix::zeros(n, n);
        p[(i, i)] = Complex64::new(1.0, 0.0);
        vertex_projections.insert(*v, p);
    }

    let loop_count = g.edges().iter().filter(|e| e.src == e.dst).count();
    if loop_count > thetas.len() {
        return Err(BlocksError::NotEnoughThetas { needed: loop_count, got: thetas.len() });
    }

    // Multiplicity of each ordered non-loop vertex pair.
    let mut pair_sizes: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    for e in g.edges() {
        if e.src != e.dst {
            *pair_sizes.entry((vertex_index[&e.src], vertex_index[&e.dst])).or_default() += 1;
        }
    }

    let mut edge_ops = BTreeMap::new();
    let mut pair_seen: BTreeMap<(usize, usize), u32> = BTreeMap::new();
    let mut next_theta = 0usize;
    for e in g.edges() {
        let i = vertex_index[&e.src];
        let j = vertex_index[&e.dst];
        let mut m = CMatrix::zeros(n, n);
        if i == j {
            let theta = thetas[next_theta];
            next_theta += 1;
            m[(i, i)] = Complex64::from_polar(1.0, theta);
        } else {
            let k = pair_sizes[&(i, j)];
            let seen = pair_seen.entry((i, j)).or_default();
            *seen += 1;
            let omega = 2.0 * std::f64::consts::PI * f64::from(*seen) / f64::from(k);
            m[(i, j)] = Complex64::from_polar(1.0, omega);
        }
        edge_ops.insert(e.id, m);
    }
    Ok(MatricialRep { dim: n, vertex_index, vertex_projections, edge_ops })
}

// ---------------------------------------------------------------------------
// Odd-orbit fixture family (f(m) = 2m + 1)
// ---------------------------------------------------------------------------

/// Orbits of f(m) = 2m + 1 truncated at `n_max`, their containment order,
/// the maximal orbit indices, and the matching generator family with its
/// admissibility table (π(y_{2n+1}, y_n) ≠ 0).
#[derive(Debug, Clone)]
pub struct OddOrbitFamily {
    pub family: Vec<GeneratorSpec>,
    pub pi: Pi,
    /// X_(n) ∩ [0, n_max] for each n ≤ n_max.
    pub orbits: BTreeMap<u64, BTreeSet<u64>>,
    /// Proper containments (n, m) with X_(n) ⊂ X_(m).
    pub containments: Vec<(u64, u64)>,
    /// Indices n whose orbit is maximal under set inclusion.
    pub maximal: Vec<u64>,
}

pub fn generate_odd_orbit_family(n_max: u64) -> OddOrbitFamily {
    assert!(n_max >= 1, "n_max must be positive");
    let orbit = |n: u64| {
        let mut set = BTreeSet::new();
        let mut k = n;
        while k <= n_max {
            set.insert(k);
            match k.checked_mul(2).and_then(|d| d.checked_add(1)) {
                Some(next) => k = next,
                None => break,
            }
        }
        set
    };
    let orbits: BTreeMap<u64, BTreeSet<u64>> = (0..=n_max).map(|n| (n, orbit(n))).collect();
    let mut containments = Vec::new();
    for n in 0..=n_max {
        for m in 0..=n_max {
            if m != n && orbits[&n].is_subset(&orbits[&m]) {
                containments.push((n, m));
            }
        }
    }
    let maximal: Vec<u64> =
        (0..=n_max).filter(|&n| !containments.iter().any(|&(a, _)| a == n)).collect();

    let gen_name = |n: u64| format!("y{n}");
    let family: Vec<GeneratorSpec> =
        (0..=n_max).map(|n| GeneratorSpec::infinite_shift(gen_name(n))).collect();
    let mut pi = Pi::new();
    for n in 0..=n_max {
        let image = 2 * n + 1;
        if image <= n_max {
            // final space of y_n = initial space of y_{2n+1}
            pi.declare(
                Signed::plain(&GenId::new(gen_name(image))),
                Signed::plain(&GenId::new(gen_name(n))),
                true,
            );
        }
    }
    OddOrbitFamily { family, pi, orbits, containments, maximal }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::pi_validate;
    use crate::groupoid::{enumerate, ShadowedGraph};
    use crate::numeric::operator_norm;

    fn closed(family: &[GeneratorSpec], pi: &Pi) -> ClosedPi {
        let (c, v) = pi.close(family);
        assert!(v.is_empty(), "violations: {v:?}");
        c
    }

    #[test]
    fn normalize_idempotent_and_sorted() {
        let e = AlgebraExpr::free_product(
            vec![
                AlgebraExpr::toeplitz_on("A"),
                AlgebraExpr::free_product(
                    vec![AlgebraExpr::matrix_alg(2), AlgebraExpr::toeplitz()],
                    Closure::TopologicalReduced,
                ),
            ],
            Closure::TopologicalReduced,
        );
        let n1 = e.normalize();
        assert_eq!(n1, n1.normalize());
        let swapped = AlgebraExpr::free_product(
            vec![
                AlgebraExpr::free_product(
                    vec![AlgebraExpr::toeplitz(), AlgebraExpr::matrix_alg(2)],
                    Closure::TopologicalReduced,
                ),
                AlgebraExpr::toeplitz_on("B"),
            ],
            Closure::TopologicalReduced,
        );
        assert_eq!(n1, swapped.normalize());
    }

    #[test]
    fn partition_examples() {
        let fam = vec![
            GeneratorSpec::unitary("u", "T"),
            GeneratorSpec::infinite_shift("s"),
            GeneratorSpec::finite_shift("x", 2),
        ];
        let p = wold_partition(&fam);
        assert_eq!(p.unitaries.len(), 1);
        assert_eq!(p.infinite_shifts.len(), 1);
        assert_eq!(p.finite_shifts.len(), 1);
        let empty = wold_partition(&[]);
        assert!(empty.unitaries.is_empty());
        assert!(empty.infinite_shifts.is_empty());
        assert!(empty.finite_shifts.is_empty());
    }

    fn all_pairs_pi(fam: &[GeneratorSpec]) -> Pi {
        let mut pi = Pi::new();
        for a in fam {
            for b in fam {
                if a.id != b.id {
                    for x in [Signed::plain(&a.id), Signed::star(&a.id)] {
                        for y in [Signed::plain(&b.id), Signed::star(&b.id)] {
                            pi.declare(x.clone(), y, true);
                        }
                    }
                }
            }
        }
        pi
    }

    #[test]
    fn minimal_shift_examples() {
        // Incomparable defects: both retained.
        let fam = vec![GeneratorSpec::finite_shift("a", 3), GeneratorSpec::finite_shift("b", 5)];
        let pi = all_pairs_pi(&fam);
        let c = closed(&fam, &pi);
        assert_eq!(minimal_finite_shifts(&fam, &c, 4).unwrap().len(), 2);

        // 2 | 4: the defect-2 chain absorbs the other.
        let fam = vec![GeneratorSpec::finite_shift("a", 4), GeneratorSpec::finite_shift("b", 2)];
        let pi = all_pairs_pi(&fam);
        let c = closed(&fam, &pi);
        let kept = minimal_finite_shifts(&fam, &c, 4).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, GenId::new("b"));

        // Singleton.
        let fam = vec![GeneratorSpec::finite_shift("a", 7)];
        let c = closed(&fam, &Pi::new());
        assert_eq!(minimal_finite_shifts(&fam, &c, 4).unwrap(), fam);
    }

    #[test]
    fn component_examples() {
        let fam = vec![
            GeneratorSpec::finite_shift("x", 2),
            GeneratorSpec::finite_shift("y", 3),
            GeneratorSpec::finite_shift("z", 5),
        ];
        // Chain x–y, y–z admissible; x–z not: still one class.
        let mut pi = Pi::new();
        pi.declare_pair("x", "y", true);
        pi.declare_pair("y", "z", true);
        let c = closed(&fam, &pi);
        let comps = pi_components(&fam, &c);
        assert_eq!(comps.len(), 1);
        assert_eq!(comps[0].len(), 3);

        // No declared pairs: singleton classes.
        let c = closed(&fam, &Pi::new());
        assert_eq!(pi_components(&fam, &c).len(), 3);
    }

    #[test]
    fn singleton_family_matches_classify() {
        use crate::index::classify_single;
        let cases = vec![
            GeneratorSpec::unitary("u", "T"),
            GeneratorSpec::infinite_shift("s"),
            GeneratorSpec::finite_shift("x", 3),
        ];
        for g in cases {
            let fam = vec![g.clone()];
            let c = closed(&fam, &Pi::new());
            let got = block_structure(&fam, &c, 4).unwrap();
            let spectrum = match &g.kind {
                GeneratorKind::Unitary { spectrum } => spectrum.clone(),
                _ => SpectrumTag::new("T"),
            };
            let expected = AlgebraExpr::tensor(
                AlgebraExpr::scalar_unit(),
                classify_single(&g.index(), &spectrum),
            )
            .normalize();
            assert_eq!(got, expected, "family {:?}", g.id);
        }
    }

    #[test]
    fn block_structure_permutation_invariant() {
        let fam = vec![
            GeneratorSpec::unitary("u", "T"),
            GeneratorSpec::infinite_shift("s"),
            GeneratorSpec::finite_shift("x", 2),
            GeneratorSpec::finite_shift("y", 4),
        ];
        let pi = all_pairs_pi(&fam);
        let c = closed(&fam, &pi);
        let reference = block_structure(&fam, &c, 4).unwrap();
        let mut permuted = fam.clone();
        permuted.reverse();
        assert_eq!(block_structure(&permuted, &c, 4).unwrap(), reference);
        let rotated: Vec<_> = fam[1..].iter().chain(&fam[..1]).cloned().collect();
        assert_eq!(block_structure(&rotated, &c, 4).unwrap(), reference);
    }

    #[test]
    fn matricial_two_vertex_edge() {
        let g = corresponding_graph(&GeneratorSpec::infinite_shift("s"), 1).unwrap();
        let rep = matricial_representation(&g, &[]).unwrap();
        assert_eq!(rep.dim, 2);
        let e = g.edges()[0].id;
        let m = &rep.edge_ops[&e];
        // Single nonzero entry at (source, target) with omega = 1 (k = 1).
        assert!((m[(0, 1)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert_eq!(m[(1, 0)], Complex64::new(0.0, 0.0));
        // E*E = P_target, EE* = P_source
        let p_src = &rep.vertex_projections[&g.edges()[0].src];
        let p_dst = &rep.vertex_projections[&g.edges()[0].dst];
        assert!(operator_norm(&(m.adjoint() * m - p_dst)) < 1e-14);
        assert!(operator_norm(&(m * m.adjoint() - p_src)) < 1e-14);
    }

    #[test]
    fn matricial_rejects_bad_input() {
        let g1 = corresponding_graph(&GeneratorSpec::unitary("u", "T"), 1).unwrap();
        let g2 = corresponding_graph(&GeneratorSpec::unitary("v", "T"), 1).unwrap();
        let disjoint = g1.disjoint_union(&g2);
        assert!(matches!(
            matricial_representation(&disjoint, &[0.3, 0.7]),
            Err(BlocksError::NotConnected)
        ));
        assert!(matches!(
            matricial_representation(&g1, &[0.3, 0.3]),
            Err(BlocksError::BadThetas)
        ));
        assert!(matches!(
            matricial_representation(&g1, &[]),
            Err(BlocksError::NotEnoughThetas { .. })
        ));
    }

    #[test]
    fn matricial_products_follow_groupoid() {
        let g = corresponding_graph(&GeneratorSpec::finite_shift("x", 1), 2).unwrap();
        let rep = matricial_representation(&g, &[]).unwrap();
        let sg = ShadowedGraph::new(g);
        let elements = enumerate(&sg, 3).unwrap();
        for a in &elements {
            for b in &elements {
                let prod = crate::groupoid::multiply(&sg, a, b).unwrap();
                let ma = rep.element_matrix(a);
                let mb = rep.element_matrix(b);
                let norm = operator_norm(&(ma * mb));
                if prod.is_zero() {
                    assert!(norm <= 1e-12, "{a} * {b} should vanish");
                } else {
                    assert!(norm > 1e-8, "{a} * {b} should not vanish");
                }
            }
        }
    }

    #[test]
    fn orbit_family_containments() {
        let fam = generate_odd_orbit_family(64);
        let x = &fam.orbits;
        assert!(x[&7].is_subset(&x[&3]));
        assert!(x[&3].is_subset(&x[&1]));
        assert!(x[&1].is_subset(&x[&0]));
        for pair in [(7, 3), (3, 1), (1, 0)] {
            assert!(fam.containments.contains(&pair));
        }
        assert_eq!(
            x[&1].iter().copied().filter(|&v| v <= 15).collect::<Vec<_>>(),
            vec![1, 3, 7, 15]
        );
        // Oracle: X_n ⊆ X_m iff n ∈ X_m.
        for n in 0..=64 {
            for m in 0..=64 {
                assert_eq!(x[&n].is_subset(&x[&m]), x[&m].contains(&n), "n={n} m={m}");
            }
        }
        // π table of the family is clean.
        assert!(pi_validate(&fam.family, &fam.pi).is_empty());
    }

    #[test]
    fn orbit_family_maximal_are_even() {
        let fam = generate_odd_orbit_family(64);
        let expected: Vec<u64> = (0..=64).filter(|n| n % 2 == 0).collect();
        assert_eq!(fam.maximal, expected);
    }

    #[test]
    fn orbit_family_glues_into_orbit_chains() {
        // y_n's final space is y_{2n+1}'s initial space, so the glued graph
        // has one linear chain per maximal orbit.
        use crate::graph::g_graph;
        let fam = generate_odd_orbit_family(7);
        let cp = closed(&fam.family, &fam.pi);
        let g = g_graph(&fam.family, &cp, 1).unwrap();
        assert_eq!(g.edge_count(), 8);
        assert_eq!(g.component_count(), fam.maximal.len()); // orbits 0, 2, 4, 6
        // X_(0) = {0, 1, 3, 7}: a four-edge chain contributes five vertices;
        // X_(2) = {2, 5}: three; X_(4), X_(6): two each.
        assert_eq!(g.vertex_count(), 5 + 3 + 2 + 2);
    }
}
