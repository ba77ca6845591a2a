//! Confluence checks for the reduction (RR): cancelling adjacent inverse
//! pairs of a raw admissible word in any order must reach the same normal
//! form. Raw words are random walks on the shadowed graph (backtracking
//! allowed), so they are admissible as written and stay admissible after
//! each cancellation.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::groupoid::{GroupoidElement, ShadowedGraph, SignedEdge};
use crate::par;

/// A raw (not necessarily reduced) admissible word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawWord {
    pub letters: Vec<SignedEdge>,
}

/// Random walk of `len` signed edges starting anywhere; `None` if the graph
/// has no edges.
pub fn random_raw_word(g: &ShadowedGraph, len: usize, rng: &mut impl Rng) -> Option<RawWord> {
    let letters = g.signed_edges();
    if letters.is_empty() || len == 0 {
        return None;
    }
    let first = *letters.choose(rng)?;
    let mut word = vec![first];
    while word.len() < len {
        let at = g.target(*word.last().expect("nonempty"));
        let continuations: Vec<SignedEdge> =
            letters.iter().copied().filter(|&e| g.source(e) == at).collect();
        match continuations.as_slice() {
            [] => break,
            cs => word.push(*cs.choose(rng).expect("nonempty")),
        }
    }
    Some(RawWord { letters: word })
}

/// Left-to-right stack reduction: the canonical normal form.
pub fn reduce_canonical(g: &ShadowedGraph, w: &RawWord) -> GroupoidElement {
    let source = g.source(w.letters[0]);
    let mut stack: Vec<SignedEdge> = Vec::with_capacity(w.letters.len());
    for &l in &w.letters {
        if stack.last().copied() == Some(l.inverse()) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    if stack.is_empty() {
        GroupoidElement::Vertex(source)
    } else {
        GroupoidElement::Path(stack)
    }
}

/// Reduction that repeatedly cancels a randomly chosen eligible adjacent
/// inverse pair until none remains.
pub fn reduce_random_order(g: &ShadowedGraph, w: &RawWord, rng: &mut impl Rng) -> GroupoidElement {
    let source = g.source(w.letters[0]);
    let mut word = w.letters.clone();
    loop {
        let sites: Vec<usize> = (0..word.len().saturating_sub(1))
            .filter(|&i| word[i + 1] == word[i].inverse())
            .collect();
        match sites.choose(rng) {
            None => break,
            Some(&i) => {
                word.drain(i..=i + 1);
            }
        }
    }
    if word.is_empty() {
        GroupoidElement::Vertex(source)
    } else {
        GroupoidElement::Path(word)
    }
}

/// Outcome of a confluence sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SweepStats {
    pub words: usize,
    pub mismatches: usize,
}

impl SweepStats {
    pub fn all_confluent(&self) -> bool {
        self.mismatches == 0
    }
}

fn sweep_word(g: &ShadowedGraph, seed: u64, word_index: u64, orders: usize, max_len: usize) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ word_index.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let len = rng.gen_range(1..=max_len);
    let Some(word) = random_raw_word(g, len, &mut rng) else {
        return true;
    };
    let canonical = reduce_canonical(g, &word);
    (0..orders).all(|_| reduce_random_order(g, &word, &mut rng) == canonical)
}

/// Runs `words` random raw words with `orders` random cancellation orders
/// each, comparing every result against the canonical reduction.
/// Parallel over words when the `parallel` feature is on.
pub fn confluence_sweep(
    g: &ShadowedGraph,
    words: usize,
    orders: usize,
    max_len: usize,
    seed: u64,
) -> SweepStats {
    let indices: Vec<u64> = (0..words as u64).collect();
    let oks = par::map_collect(&indices, |&i| sweep_word(g, seed, i, orders, max_len));
    SweepStats { words, mismatches: oks.iter().filter(|&&ok| !ok).count() }
}

/// Sequential twin of [`confluence_sweep`] for benchmarking.
pub fn confluence_sweep_seq(
    g: &ShadowedGraph,
    words: usize,
    orders: usize,
    max_len: usize,
    seed: u64,
) -> SweepStats {
    let indices: Vec<u64> = (0..words as u64).collect();
    let oks = par::map_collect_seq(&indices, |&i| sweep_word(g, seed, i, orders, max_len));
    SweepStats { words, mismatches: oks.iter().filter(|&&ok| !ok).count() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{corresponding_graph, GeneratorSpec};
    use crate::groupoid::ShadowedGraph;

    #[test]
    fn random_words_are_admissible() {
        let g = ShadowedGraph::new(
            corresponding_graph(&GeneratorSpec::finite_shift("x", 1), 4).unwrap(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let w = random_raw_word(&g, 9, &mut rng).unwrap();
            for pair in w.letters.windows(2) {
                assert_eq!(g.target(pair[0]), g.source(pair[1]));
            }
        }
    }

    #[test]
    fn sweep_is_deterministic_and_matches_seq() {
        let g = ShadowedGraph::new(
            corresponding_graph(&GeneratorSpec::unitary("u", "T"), 1).unwrap(),
        );
        let a = confluence_sweep(&g, 50, 3, 12, 42);
        let b = confluence_sweep(&g, 50, 3, 12, 42);
        let c = confluence_sweep_seq(&g, 50, 3, 12, 42);
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert!(a.all_confluent());
    }
}
