//! Internal hom, tensor and Manhattan products, and the tensor-hom
//! adjunction as an executable bijection.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::Result;
use crate::horn::reflect::{reflect, Reflection};
use crate::horn::structure::{Edge, EdgeSet, PreStructure, Signature, SymbolKind};
use crate::horn::theory::HornTheory;
use crate::par::{self, power, Budget};
use crate::rational::{Bound, Rat};
use crate::structops::hom::{compose, hom_maps, render_map};

/// `[X, Y]`: the morphisms `X → Y` with pointwise edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InternalHom {
    pub structure: PreStructure,
    /// Carrier point `i` is the map `maps[i]`.
    pub maps: Vec<Vec<usize>>,
}

impl InternalHom {
    pub fn index_of(&self, map: &[usize]) -> Option<usize> {
        self.maps.iter().position(|m| m == map)
    }
}

/// Pointwise edge: present iff every component tuple is an edge of `y`; for
/// family symbols the bound is the weakest component bound.
fn pointwise(sig: &Signature, sym: usize, y: &PreStructure, n: usize, maps: &[&[usize]]) -> Option<Edge> {
    let tuple = |x: usize| maps.iter().map(|m| m[x]).collect::<Vec<usize>>();
    match sig.symbol(sym).kind {
        SymbolKind::Plain => (0..n)
            .all(|x| y.edges().contains_plain(sym, &tuple(x)))
            .then(|| Edge::plain(sym, vec![])),
        SymbolKind::Family => {
            let mut acc = Bound::closed(Rat::ZERO);
            for x in 0..n {
                acc = acc.join(y.edges().bound(sym, &tuple(x))?);
            }
            Some(Edge::graded(sym, acc, vec![]))
        }
    }
}

pub fn internal_hom(sig: &Signature, x: &PreStructure, y: &PreStructure, budget: Budget) -> Result<InternalHom> {
    let maps = hom_maps(x, y, budget)?;
    let m = maps.len();
    for s in sig.symbols() {
        budget.check(power(m, s.arity))?;
    }
    let mut edges = EdgeSet::new();
    for sym in 0..sig.len() {
        let k = sig.symbol(sym).arity;
        let found = par::flat_map_range(budget.exec, m, |first| {
            let mut out = Vec::new();
            let mut tuple = vec![first];
            tuple.resize(k, 0);
            loop {
                let refs: Vec<&[usize]> = tuple.iter().map(|&i| maps[i].as_slice()).collect();
                if let Some(mut e) = pointwise(sig, sym, y, x.size(), &refs) {
                    e.points = tuple.clone();
                    out.push(e);
                }
                let mut pos = k;
                loop {
                    if pos == 1 {
                        return out;
                    }
                    pos -= 1;
                    tuple[pos] += 1;
                    if tuple[pos] < m {
                        break;
                    }
                    tuple[pos] = 0;
                }
            }
        });
        edges.extend(found);
    }
    let names = maps.iter().map(|g| render_map(x, y, g)).collect();
    let structure = PreStructure::new(names, edges)?;
    Ok(InternalHom { structure, maps })
}

/// Point index of `(a, b)` in `X × Y`.
pub fn pair_index(a: usize, b: usize, y_size: usize) -> usize {
    a * y_size + b
}

/// `X ⊗ Y`: carrier `X × Y`; an edge whose first projection is constant and
/// whose second projection is an edge of `Y`, or symmetrically.
pub fn tensor(x: &PreStructure, y: &PreStructure) -> PreStructure {
    let ny = y.size();
    let mut names = Vec::with_capacity(x.size() * ny);
    for a in x.points() {
        for b in y.points() {
            names.push(format!("({a},{b})"));
        }
    }
    let mut edges = EdgeSet::new();
    for a in 0..x.size() {
        for e in y.edges().iter() {
            edges.insert(Edge { points: e.points.iter().map(|&b| pair_index(a, b, ny)).collect(), ..e });
        }
    }
    for b in 0..ny {
        for e in x.edges().iter() {
            edges.insert(Edge { points: e.points.iter().map(|&a| pair_index(a, b, ny)).collect(), ..e });
        }
    }
    PreStructure::new(names, edges).expect("tensor edges stay in the carrier")
}

/// The Manhattan product `R(X ⊗ Y)`.
pub fn manhattan(theory: &Arc<HornTheory>, x: &PreStructure, y: &PreStructure) -> Reflection {
    reflect(theory, &tensor(x, y))
}

/// Outcome of checking `Hom(R(Y ⊗ X), Z) ≅ Hom(Y, [X, Z])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjunctionReport {
    /// `|Hom(Y ⊗ X, Z)|`.
    pub hom_tensor: usize,
    /// `|Hom(R(Y ⊗ X), Z)|`.
    pub hom_manhattan: usize,
    /// `|Hom(Y, [X, Z])|`.
    pub hom_curried: usize,
    /// Uncurrying `g ↦ g♯` with `g♯(y, x) = g(y)(x)` lands in `Hom(Y ⊗ X, Z)`
    /// and currying inverts it on both sides.
    pub bijection: bool,
    /// Precomposition with the reflection map is a bijection
    /// `Hom(R(Y ⊗ X), Z) → Hom(Y ⊗ X, Z)`.
    pub reflection: bool,
}

impl AdjunctionReport {
    pub fn passes(&self) -> bool {
        self.bijection && self.reflection
    }
}

pub fn check_tensor_hom_adjunction(
    theory: &Arc<HornTheory>,
    x: &PreStructure,
    y: &PreStructure,
    z: &PreStructure,
    budget: Budget,
) -> Result<AdjunctionReport> {
    let yx = tensor(y, x);
    let nx = x.size();
    let hom_tensor = hom_maps(&yx, z, budget)?;
    let hom_z = internal_hom(&theory.signature, x, z, budget)?;
    let curried = hom_maps(y, &hom_z.structure, budget)?;
    let index: HashMap<&[usize], usize> =
        hom_z.maps.iter().enumerate().map(|(i, m)| (m.as_slice(), i)).collect();

    let uncurry = |g: &[usize]| -> Vec<usize> {
        let mut h = vec![0; y.size() * nx];
        for (b, &gi) in g.iter().enumerate() {
            for (a, &v) in hom_z.maps[gi].iter().enumerate() {
                h[pair_index(b, a, nx)] = v;
            }
        }
        h
    };
    let curry = |h: &[usize]| -> Option<Vec<usize>> {
        (0..y.size())
            .map(|b| {
                let row: Vec<usize> = (0..nx).map(|a| h[pair_index(b, a, nx)]).collect();
                index.get(row.as_slice()).copied()
            })
            .collect()
    };
    let tensor_set: std::collections::HashSet<&[usize]> = hom_tensor.iter().map(|h| h.as_slice()).collect();
    let forward = curried.iter().all(|g| {
        let h = uncurry(g);
        tensor_set.contains(h.as_slice()) && curry(&h).as_deref() == Some(g.as_slice())
    });
    let backward = hom_tensor.iter().all(|h| match curry(h) {
        Some(g) => uncurry(&g) == *h && y.preserves(&hom_z.structure, &g),
        None => false,
    });
    let bijection = forward && backward && curried.len() == hom_tensor.len();

    let r = reflect(theory, &yx);
    let hom_r = hom_maps(r.model.underlying(), z, budget)?;
    let mut pulled: Vec<Vec<usize>> = hom_r.iter().map(|k| compose(&r.quotient, k)).collect();
    pulled.sort();
    pulled.dedup();
    let mut sorted_tensor = hom_tensor.clone();
    sorted_tensor.sort();
    let reflection = pulled.len() == hom_r.len() && pulled == sorted_tensor;

    Ok(AdjunctionReport {
        hom_tensor: hom_tensor.len(),
        hom_manhattan: hom_r.len(),
        hom_curried: curried.len(),
        bijection,
        reflection,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::horn::{builtin, metric::metric_to_structure};

    fn two_point(d: Rat) -> PreStructure {
        metric_to_structure(vec!["u".into(), "v".into()], &[vec![Rat::ZERO, d], vec![d, Rat::ZERO]]).unwrap()
    }

    #[test]
    fn manhattan_metric() {
        let met = Arc::new(builtin::met().unwrap());
        let r = manhattan(&met, &two_point(Rat::frac(2, 5)), &two_point(Rat::frac(1, 2)));
        assert_eq!(r.model.size(), 4);
        let b = r.model.edges().bound(0, &[pair_index(0, 0, 2), pair_index(1, 1, 2)]);
        assert_eq!(b, Some(Bound::closed(Rat::frac(9, 10))));
        let r = manhattan(&met, &two_point(Rat::frac(3, 4)), &two_point(Rat::frac(1, 2)));
        let b = r.model.edges().bound(0, &[0, 3]);
        assert_eq!(b, Some(Bound::closed(Rat::ONE)));
    }

    #[test]
    fn sup_metric_on_hom() {
        let met = builtin::met().unwrap();
        let h = internal_hom(&met.signature, &two_point(Rat::frac(1, 2)), &two_point(Rat::frac(1, 4)), Budget::default())
            .unwrap();
        assert_eq!(h.maps.len(), 4);
        // constant maps at u and at v differ by 1/4 everywhere
        let cu = h.index_of(&[0, 0]).unwrap();
        let cv = h.index_of(&[1, 1]).unwrap();
        assert_eq!(h.structure.edges().bound(0, &[cu, cv]), Some(Bound::closed(Rat::frac(1, 4))));
        assert!(crate::horn::is_model(&met, &h.structure));
    }
}
