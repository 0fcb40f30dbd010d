//! Conversions between finite 1-bounded metric spaces and structures over a
//! family symbol.

use crate::error::{Error, Result};
use crate::horn::structure::{Edge, EdgeSet, PreStructure, SymbolKind};
use crate::horn::theory::HornTheory;
use crate::rational::{Bound, Rat};

/// Validates `d` and returns the structure with canonical edges
/// `eq[d(x,y)](x,y)` for all ordered pairs.
pub fn metric_to_structure(points: Vec<String>, d: &[Vec<Rat>]) -> Result<PreStructure> {
    let n = points.len();
    if d.len() != n || d.iter().any(|row| row.len() != n) {
        return Err(Error::NotMetric(format!("matrix is not {n}x{n}")));
    }
    for x in 0..n {
        if !d[x][x].is_zero() {
            return Err(Error::NotMetric(format!("d({0},{0}) = {1} is not 0", points[x], d[x][x])));
        }
        for y in 0..n {
            if !d[x][y].in_unit_interval() {
                return Err(Error::NotMetric(format!("d({},{}) = {} outside [0,1]", points[x], points[y], d[x][y])));
            }
            if d[x][y] != d[y][x] {
                return Err(Error::NotMetric(format!("asymmetric at ({},{})", points[x], points[y])));
            }
            if x != y && d[x][y].is_zero() {
                return Err(Error::NotMetric(format!("distinct points {} and {} at distance 0", points[x], points[y])));
            }
        }
    }
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                if d[x][z] > d[x][y].capped_add(d[y][z]) {
                    return Err(Error::NotMetric(format!(
                        "triangle inequality fails for ({}, {}, {})",
                        points[x], points[y], points[z]
                    )));
                }
            }
        }
    }
    let mut edges = EdgeSet::new();
    for (x, row) in d.iter().enumerate() {
        for (y, &v) in row.iter().enumerate() {
            edges.insert(Edge::graded(0, Bound::closed(v), vec![x, y]));
        }
    }
    PreStructure::new(points, edges)
}

/// Reads the distance matrix off a structure over a theory whose first
/// family symbol is the distance family.
pub fn structure_to_metric(theory: &HornTheory, s: &PreStructure) -> Result<Vec<Vec<Rat>>> {
    let sym = theory
        .signature
        .families()
        .find(|&f| theory.signature.symbol(f).arity == 2 && theory.signature.symbol(f).kind == SymbolKind::Family)
        .ok_or_else(|| Error::NotMetric(format!("`{}` has no binary family symbol", theory.name)))?;
    let n = s.size();
    let mut d = vec![vec![Rat::ZERO; n]; n];
    for (x, row) in d.iter_mut().enumerate() {
        for (y, cell) in row.iter_mut().enumerate() {
            let b = s.edges().bound(sym, &[x, y]).ok_or_else(|| {
                Error::NotMetric(format!("no distance between {} and {}", s.point_name(x), s.point_name(y)))
            })?;
            if b.strict {
                return Err(Error::NotMetric(format!(
                    "distance between {} and {} is not attained",
                    s.point_name(x),
                    s.point_name(y)
                )));
            }
            *cell = b.value;
        }
    }
    Ok(d)
}
