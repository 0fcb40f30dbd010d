//! Generatedness of finite models by edge subsets.

use itertools::Itertools;

use crate::horn::engine::saturate;
use crate::horn::structure::{Edge, EdgeSet, PreStructure};
use crate::horn::theory::HornTheory;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratednessWitness {
    pub generating_edges: Vec<Edge>,
    /// Number of generating edges.
    pub bound: usize,
}

/// Whether `edges` entail every edge of `x`.
pub fn is_generated_by(theory: &HornTheory, x: &PreStructure, edges: &EdgeSet) -> bool {
    let sat = saturate(theory, &x.with_edges(edges.clone()));
    x.edges().iter().all(|e| sat.contains(&e))
}

/// Smallest generating subset of at most `size_bound` edges, by exhaustive
/// search over the edges not already entailed by the empty set.
pub fn find_generating_subset(theory: &HornTheory, x: &PreStructure, size_bound: usize) -> Option<GeneratednessWitness> {
    let free = saturate(theory, &x.with_edges(EdgeSet::new()));
    let candidates: Vec<Edge> = x.edges().iter().filter(|e| !free.contains(e)).collect();
    for k in 0..=size_bound.min(candidates.len()) {
        for subset in candidates.iter().combinations(k) {
            let es: EdgeSet = subset.iter().map(|e| (*e).clone()).collect();
            if is_generated_by(theory, x, &es) {
                return Some(GeneratednessWitness { generating_edges: es.iter().collect(), bound: k });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horn::{builtin, metric::metric_to_structure};
    use crate::rational::{Bound, Rat};

    #[test]
    fn chain_generated_by_one_edge() {
        let pos = builtin::pos().unwrap();
        let es: EdgeSet = [(0, 0), (1, 1), (0, 1)].iter().map(|&(a, b)| Edge::plain(0, vec![a, b])).collect();
        let x = PreStructure::discrete(["a", "b"]).with_edges(es.clone());
        assert!(is_generated_by(&pos, &x, &[Edge::plain(0, vec![0, 1])].into_iter().collect()));
        assert!(is_generated_by(&pos, &x, &es));
        let w = find_generating_subset(&pos, &x, 3).unwrap();
        assert_eq!(w.bound, 1);
    }

    #[test]
    fn equilateral_needs_all_three() {
        let met = builtin::met().unwrap();
        let t = Rat::frac(1, 3);
        let z = Rat::ZERO;
        let x = metric_to_structure(
            vec!["a".into(), "b".into(), "c".into()],
            &[vec![z, t, t], vec![t, z, t], vec![t, t, z]],
        )
        .unwrap();
        let e = |a, b| Edge::graded(0, Bound::closed(t), vec![a, b]);
        assert!(!is_generated_by(&met, &x, &[e(0, 1), e(1, 2)].into_iter().collect()));
        assert_eq!(find_generating_subset(&met, &x, 6).unwrap().bound, 3);
    }
}
