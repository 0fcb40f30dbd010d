//! Hom-set enumeration, embeddings and isomorphism search.

use std::sync::Arc;

use crate::error::Result;
use crate::horn::structure::{Edge, PreStructure};
use crate::par::{self, power, Budget};

/// A relation-preserving map between finite structures.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Morphism {
    pub source: Arc<PreStructure>,
    pub target: Arc<PreStructure>,
    pub map: Vec<usize>,
}

impl Morphism {
    /// Checks that `map` is a relation-preserving function.
    pub fn new(source: Arc<PreStructure>, target: Arc<PreStructure>, map: Vec<usize>) -> Option<Morphism> {
        let ok = map.len() == source.size()
            && map.iter().all(|&p| p < target.size())
            && source.preserves(&target, &map);
        ok.then_some(Morphism { source, target, map })
    }

    pub fn identity(x: Arc<PreStructure>) -> Morphism {
        let map = (0..x.size()).collect();
        Morphism { source: Arc::clone(&x), target: x, map }
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &Morphism) -> Morphism {
        Morphism {
            source: Arc::clone(&self.source),
            target: Arc::clone(&next.target),
            map: compose(&self.map, &next.map),
        }
    }

    /// Renders the map as `[a->x,b->y]`.
    pub fn render(&self) -> String {
        render_map(&self.source, &self.target, &self.map)
    }
}

/// `g ∘ f` for carrier maps.
pub fn compose(f: &[usize], g: &[usize]) -> Vec<usize> {
    f.iter().map(|&p| g[p]).collect()
}

pub fn render_map(source: &PreStructure, target: &PreStructure, map: &[usize]) -> String {
    let parts: Vec<String> = map
        .iter()
        .enumerate()
        .map(|(i, &j)| format!("{}->{}", source.point_name(i), target.point_name(j)))
        .collect();
    format!("[{}]", parts.join(","))
}

/// Edges of `x` grouped by their largest point, so that a partial map on
/// points `0..=i` can be checked against `checks[i]`.
fn checks_by_last_point(x: &PreStructure) -> Vec<Vec<Edge>> {
    let mut checks = vec![Vec::new(); x.size()];
    for e in x.edges().iter() {
        let last = *e.points.iter().max().expect("positive arity");
        checks[last].push(e);
    }
    checks
}

fn extend(
    x: &PreStructure,
    y: &PreStructure,
    order: &[usize],
    checks: &[Vec<Edge>],
    map: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    let i = map.len();
    if i == x.size() {
        out.push(map.clone());
        return;
    }
    for &t in order {
        map.push(t);
        if checks[i].iter().all(|e| y.edges().contains(&e.map(map))) {
            extend(x, y, order, checks, map, out);
        }
        map.pop();
    }
}

/// All relation-preserving maps `x → y`, ordered lexicographically by the
/// names of the images of `x`'s points in carrier order.
pub fn hom_maps(x: &PreStructure, y: &PreStructure, budget: Budget) -> Result<Vec<Vec<usize>>> {
    budget.check(power(y.size(), x.size()))?;
    let mut order: Vec<usize> = (0..y.size()).collect();
    order.sort_by(|&a, &b| y.point_name(a).cmp(y.point_name(b)));
    let checks = checks_by_last_point(x);
    if x.size() == 0 {
        return Ok(vec![vec![]]);
    }
    Ok(par::flat_map_range(budget.exec, order.len(), |k| {
        let mut map = vec![order[k]];
        let mut out = Vec::new();
        if checks[0].iter().all(|e| y.edges().contains(&e.map(&map))) {
            extend(x, y, &order, &checks, &mut map, &mut out);
        }
        out
    }))
}

pub fn morphisms(x: &Arc<PreStructure>, y: &Arc<PreStructure>, budget: Budget) -> Result<Vec<Morphism>> {
    Ok(hom_maps(x, y, budget)?
        .into_iter()
        .map(|map| Morphism { source: Arc::clone(x), target: Arc::clone(y), map })
        .collect())
}

/// Injective and relation-reflecting; for family symbols the bound at the
/// image must not be stronger than the bound at the source tuple.
pub fn is_embedding(m: &Morphism) -> bool {
    let n = m.target.size();
    let mut preimage = vec![None; n];
    for (i, &j) in m.map.iter().enumerate() {
        if preimage[j].replace(i).is_some() {
            return false;
        }
    }
    m.target.edges().iter().all(|e| {
        let pulled: Option<Vec<usize>> = e.points.iter().map(|&p| preimage[p]).collect();
        match pulled {
            None => true,
            Some(points) => m.source.edges().contains(&Edge { points, ..e }),
        }
    })
}

/// A bijection `x → y` carrying `E(x)` exactly onto `E(y)`.
pub fn find_isomorphism(x: &PreStructure, y: &PreStructure) -> Option<Vec<usize>> {
    isomorphisms(x, y, true).into_iter().next()
}

/// Every isomorphism `x → y`.
pub fn all_isomorphisms(x: &PreStructure, y: &PreStructure) -> Vec<Vec<usize>> {
    isomorphisms(x, y, false)
}

fn isomorphisms(x: &PreStructure, y: &PreStructure, first_only: bool) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if x.size() != y.size() || x.edges().len() != y.edges().len() {
        return out;
    }
    let checks = checks_by_last_point(x);
    let mut used = vec![false; y.size()];
    let mut map = Vec::with_capacity(x.size());
    struct Search<'a> {
        x: &'a PreStructure,
        y: &'a PreStructure,
        checks: &'a [Vec<Edge>],
        first_only: bool,
    }
    fn go(s: &Search<'_>, used: &mut [bool], map: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let i = map.len();
        if i == s.x.size() {
            if s.x.edges().map(map) == *s.y.edges() {
                out.push(map.clone());
            }
            return;
        }
        for t in 0..s.y.size() {
            if used[t] {
                continue;
            }
            map.push(t);
            used[t] = true;
            if s.checks[i].iter().all(|e| s.y.edges().contains(&e.map(map))) {
                go(s, used, map, out);
            }
            used[t] = false;
            map.pop();
            if s.first_only && !out.is_empty() {
                return;
            }
        }
    }
    go(&Search { x, y, checks: &checks, first_only }, &mut used, &mut map, &mut out);
    out
}
