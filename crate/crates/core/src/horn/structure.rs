//! Relational signatures, edges and finite pre-structures.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Bound;

pub type SymId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SymbolKind {
    /// An ordinary relation symbol.
    Plain,
    /// A family `α_q` indexed by rationals `q ∈ [0, 1]`, stored as one
    /// upward-closed bound per tuple.
    Family,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RelSymbol {
    pub name: String,
    pub arity: usize,
    pub kind: SymbolKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Signature {
    symbols: Vec<RelSymbol>,
}

impl Signature {
    pub fn new(symbols: Vec<RelSymbol>) -> Result<Signature> {
        let mut sig = Signature::default();
        for s in symbols {
            sig.push(s)?;
        }
        Ok(sig)
    }

    pub fn push(&mut self, symbol: RelSymbol) -> Result<SymId> {
        if symbol.arity == 0 {
            return Err(Error::Signature(format!("symbol `{}` has arity 0", symbol.name)));
        }
        if self.lookup(&symbol.name).is_some() {
            return Err(Error::Signature(format!("duplicate symbol `{}`", symbol.name)));
        }
        self.symbols.push(symbol);
        Ok(self.symbols.len() - 1)
    }

    pub fn lookup(&self, name: &str) -> Option<SymId> {
        self.symbols.iter().position(|s| s.name == name)
    }

    pub fn symbol(&self, id: SymId) -> &RelSymbol {
        &self.symbols[id]
    }

    pub fn symbols(&self) -> &[RelSymbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn families(&self) -> impl Iterator<Item = SymId> + '_ {
        (0..self.symbols.len()).filter(|&i| self.symbols[i].kind == SymbolKind::Family)
    }
}

/// An edge `α(x₁,…,x_k)` over a carrier; family symbols carry a bound.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub sym: SymId,
    pub index: Option<Bound>,
    pub points: Vec<usize>,
}

impl Edge {
    pub fn plain(sym: SymId, points: Vec<usize>) -> Edge {
        Edge { sym, index: None, points }
    }

    pub fn graded(sym: SymId, index: Bound, points: Vec<usize>) -> Edge {
        Edge { sym, index: Some(index), points }
    }

    pub fn map(&self, g: &[usize]) -> Edge {
        Edge {
            sym: self.sym,
            index: self.index,
            points: self.points.iter().map(|&p| g[p]).collect(),
        }
    }

    pub fn is_constant(&self) -> bool {
        self.points.windows(2).all(|w| w[0] == w[1])
    }
}

/// A duplicate-free edge set in canonical form: plain tuples plus, for family
/// symbols, the strongest bound per tuple.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    plain: BTreeSet<(SymId, Vec<usize>)>,
    graded: BTreeMap<(SymId, Vec<usize>), Bound>,
}

impl EdgeSet {
    pub fn new() -> EdgeSet {
        EdgeSet::default()
    }

    /// Inserts an edge; returns whether the set grew (or a bound strengthened).
    pub fn insert(&mut self, e: Edge) -> bool {
        match e.index {
            None => self.plain.insert((e.sym, e.points)),
            Some(b) => {
                if b.is_empty() {
                    return false;
                }
                match self.graded.get_mut(&(e.sym, e.points.clone())) {
                    Some(cur) if cur.implies(&b) => false,
                    Some(cur) => {
                        *cur = b;
                        true
                    }
                    None => {
                        self.graded.insert((e.sym, e.points), b);
                        true
                    }
                }
            }
        }
    }

    pub fn contains(&self, e: &Edge) -> bool {
        match &e.index {
            None => self.plain.contains(&(e.sym, e.points.clone())),
            Some(b) => self.bound(e.sym, &e.points).is_some_and(|cur| cur.implies(b)),
        }
    }

    pub fn contains_plain(&self, sym: SymId, points: &[usize]) -> bool {
        self.plain.contains(&(sym, points.to_vec()))
    }

    pub fn bound(&self, sym: SymId, points: &[usize]) -> Option<Bound> {
        self.graded.get(&(sym, points.to_vec())).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = Edge> + '_ {
        self.plain
            .iter()
            .map(|(s, p)| Edge::plain(*s, p.clone()))
            .chain(self.graded.iter().map(|((s, p), b)| Edge::graded(*s, *b, p.clone())))
    }

    pub fn plain_edges(&self) -> impl Iterator<Item = (SymId, &[usize])> + '_ {
        self.plain.iter().map(|(s, p)| (*s, p.as_slice()))
    }

    pub fn graded_edges(&self) -> impl Iterator<Item = (SymId, &[usize], Bound)> + '_ {
        self.graded.iter().map(|((s, p), b)| (*s, p.as_slice(), *b))
    }

    pub fn len(&self) -> usize {
        self.plain.len() + self.graded.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `g · E`.
    pub fn map(&self, g: &[usize]) -> EdgeSet {
        self.iter().map(|e| e.map(g)).collect()
    }

    /// Whether every edge of `self` is an edge of `other`.
    pub fn is_subset(&self, other: &EdgeSet) -> bool {
        self.plain.is_subset(&other.plain)
            && self
                .graded
                .iter()
                .all(|((s, p), b)| other.bound(*s, p).is_some_and(|c| c.implies(b)))
    }

    pub fn max_point(&self) -> Option<usize> {
        self.iter().flat_map(|e| e.points).max()
    }
}

impl FromIterator<Edge> for EdgeSet {
    fn from_iter<I: IntoIterator<Item = Edge>>(iter: I) -> EdgeSet {
        let mut s = EdgeSet::new();
        for e in iter {
            s.insert(e);
        }
        s
    }
}

impl Extend<Edge> for EdgeSet {
    fn extend<I: IntoIterator<Item = Edge>>(&mut self, iter: I) {
        for e in iter {
            self.insert(e);
        }
    }
}

impl fmt::Debug for EdgeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A finite carrier of named points with a set of edges over it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PreStructure {
    points: Vec<String>,
    edges: EdgeSet,
}

impl PreStructure {
    pub fn new(points: Vec<String>, edges: EdgeSet) -> Result<PreStructure> {
        let mut seen = BTreeSet::new();
        for p in &points {
            if !seen.insert(p) {
                return Err(Error::Structure(format!("duplicate point `{p}`")));
            }
        }
        if let Some(m) = edges.max_point() {
            if m >= points.len() {
                return Err(Error::Structure(format!(
                    "edge references point #{m} outside a carrier of {} points",
                    points.len()
                )));
            }
        }
        Ok(PreStructure { points, edges })
    }

    pub fn discrete<S: Into<String>>(points: impl IntoIterator<Item = S>) -> PreStructure {
        PreStructure::new(points.into_iter().map(Into::into).collect(), EdgeSet::new())
            .expect("discrete structure")
    }

    /// Point names `p0, p1, …`.
    pub fn anonymous(n: usize, edges: EdgeSet) -> Result<PreStructure> {
        PreStructure::new((0..n).map(|i| format!("p{i}")).collect(), edges)
    }

    pub fn empty() -> PreStructure {
        PreStructure { points: vec![], edges: EdgeSet::new() }
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn point_name(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn point_index(&self, name: &str) -> Option<usize> {
        self.points.iter().position(|p| p == name)
    }

    pub fn edges(&self) -> &EdgeSet {
        &self.edges
    }

    pub fn with_edges(&self, edges: EdgeSet) -> PreStructure {
        PreStructure { points: self.points.clone(), edges }
    }

    pub fn renamed(&self, points: Vec<String>) -> Result<PreStructure> {
        if points.len() != self.points.len() {
            return Err(Error::Structure("renaming changes carrier size".into()));
        }
        PreStructure::new(points, self.edges.clone())
    }

    /// Whether `g` maps every edge of `self` to an edge of `target`.
    pub fn preserves(&self, target: &PreStructure, g: &[usize]) -> bool {
        self.edges.iter().all(|e| target.edges.contains(&e.map(g)))
    }
}
