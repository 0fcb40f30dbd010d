//! Parsers for theory, structure, variety and algebra files and for goals.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use relat_core::horn::{
    builtin, reflect, Atom, AtomSym, Edge, EdgeSet, EqWitness, HornAxiom, HornTheory, IndexExpr, LatticeTable, LimitRule,
    PreStructure, RelSymbol, SideCondition, SideRelation, Signature, SymbolKind,
};
use relat_core::logic::Judgement;
use relat_core::par::Budget;
use relat_core::sigma::{Interp, OpSignature, OpSymbol, SigmaAlgebra, SigmaRelation, Table, Term, TermEdge, Variety};
use relat_core::structops::hom_maps;
use relat_core::Error;

use crate::syntax::{error_at, lines, Cursor, PResult};

/// Theories that files may name after `over`: the builtins plus any loaded
/// theory files, the latter taking precedence.
#[derive(Debug, Clone)]
pub struct Library {
    theories: BTreeMap<String, Arc<HornTheory>>,
}

impl Default for Library {
    fn default() -> Library {
        Library::with_builtins()
    }
}

impl Library {
    pub fn with_builtins() -> Library {
        let mut theories = BTreeMap::new();
        for t in [builtin::set(), builtin::pos(), builtin::met()] {
            let t = t.expect("builtin theories are valid");
            theories.insert(t.name.clone(), Arc::new(t));
        }
        Library { theories }
    }

    pub fn add(&mut self, theory: HornTheory) -> Arc<HornTheory> {
        let t = Arc::new(theory);
        self.theories.insert(t.name.clone(), Arc::clone(&t));
        t
    }

    pub fn get(&self, name: &str) -> Option<Arc<HornTheory>> {
        self.theories.get(name).cloned()
    }
}

fn keyword<'a>(c: &mut Cursor<'a>) -> PResult<(usize, &'a str)> {
    let col = c.column_after_ws();
    Ok((col, c.name()?))
}

fn header<'a>(c: &mut Cursor<'a>, kw: &str, joiner: &str) -> PResult<(&'a str, usize, &'a str)> {
    let (col, k) = keyword(c)?;
    if k != kw {
        return c.error_from(col, format!("expected `{kw} <name> {joiner} <theory>`"));
    }
    let name = c.name()?;
    if !c.eat_word(joiner) {
        return c.error(format!("expected `{joiner}`"));
    }
    let tcol = c.column_after_ws();
    let theory = c.name()?;
    c.expect_end()?;
    Ok((name, tcol, theory))
}

fn resolve_theory(lib: &Library, c: &Cursor<'_>, col: usize, name: &str) -> PResult<Arc<HornTheory>> {
    lib.get(name).ok_or_else(|| error_at(c.line, col, format!("unknown theory `{name}`")))
}

// ---------------------------------------------------------------- theories

#[derive(Default)]
struct AxiomScope {
    vars: Vec<String>,
    metas: Vec<String>,
}

fn intern(names: &mut Vec<String>, s: &str) -> usize {
    match names.iter().position(|n| n == s) {
        Some(i) => i,
        None => {
            names.push(s.to_string());
            names.len() - 1
        }
    }
}

fn index_expr(c: &mut Cursor<'_>, scope: &mut AxiomScope) -> PResult<IndexExpr> {
    let mut parts = Vec::new();
    loop {
        if c.starts_with_digit() {
            parts.push(IndexExpr::Const(c.unit_rational()?));
        } else {
            let m = c.ident()?;
            parts.push(IndexExpr::Meta(intern(&mut scope.metas, m)));
        }
        if !c.eat('+') {
            break;
        }
    }
    Ok(if parts.len() == 1 { parts.pop().unwrap() } else { IndexExpr::Sum(parts) })
}

fn check_symbol(c: &Cursor<'_>, col: usize, sym: &RelSymbol, indexed: bool, args: usize) -> PResult<()> {
    match (sym.kind, indexed) {
        (SymbolKind::Family, false) => return c.error_from(col, format!("`{}` needs an index `[q]`", sym.name)),
        (SymbolKind::Plain, true) => return c.error_from(col, format!("`{}` takes no index", sym.name)),
        _ => {}
    }
    if args != sym.arity {
        return c.error_from(col, format!("arity mismatch: `{}` has arity {}, got {args}", sym.name, sym.arity));
    }
    Ok(())
}

fn axiom_atom(c: &mut Cursor<'_>, sig: &Signature, scope: &mut AxiomScope) -> PResult<Atom> {
    let col = c.column_after_ws();
    let first = c.ident()?;
    let mark = c.mark();
    if c.eat('=') && !c.eat('>') {
        let second = c.ident()?;
        let (a, b) = (intern(&mut scope.vars, first), intern(&mut scope.vars, second));
        return Ok(Atom::eq(a, b));
    }
    c.reset(mark);
    let id = sig.lookup(first).ok_or_else(|| error_at(c.line, col, format!("unknown symbol `{first}`")))?;
    let index = if c.eat('[') {
        let ix = index_expr(c, scope)?;
        c.expect(']')?;
        Some(ix)
    } else {
        None
    };
    c.expect('(')?;
    let mut args = Vec::new();
    loop {
        args.push(intern(&mut scope.vars, c.ident()?));
        if !c.eat(',') {
            break;
        }
    }
    c.expect(')')?;
    check_symbol(c, col, sig.symbol(id), index.is_some(), args.len())?;
    Ok(Atom { sym: AtomSym::Rel(id), index, args })
}

fn side_relation(c: &mut Cursor<'_>) -> PResult<SideRelation> {
    for (s, r) in [(">=", SideRelation::Ge), ("<=", SideRelation::Le), (">", SideRelation::Gt), ("<", SideRelation::Lt)] {
        if c.eat_str(s) {
            return Ok(r);
        }
    }
    c.error("expected one of `>`, `>=`, `<`, `<=`")
}

fn theory_axiom(c: &mut Cursor<'_>, sig: &Signature, default_name: String) -> PResult<HornAxiom> {
    let mark = c.mark();
    let name = match c.name() {
        Ok(n) if c.eat(':') => n.to_string(),
        _ => {
            c.reset(mark);
            default_name
        }
    };
    let mut scope = AxiomScope::default();
    let mut premises = Vec::new();
    if !c.eat_str("=>") {
        loop {
            premises.push(axiom_atom(c, sig, &mut scope)?);
            if c.eat(',') {
                continue;
            }
            c.expect_str("=>")?;
            break;
        }
    }
    let conclusion = axiom_atom(c, sig, &mut scope)?;
    let mut side = Vec::new();
    if c.eat_word("where") {
        loop {
            let meta = intern(&mut scope.metas, c.ident()?);
            let relation = side_relation(c)?;
            let expr = index_expr(c, &mut scope)?;
            side.push(SideCondition { meta, relation, expr });
            if !c.eat(',') {
                break;
            }
        }
    }
    c.expect_end()?;
    Ok(HornAxiom { name, vars: scope.vars, metas: scope.metas, premises, conclusion, side })
}

/// Line, column and, for lattice rules, the located symbol names.
type LimitDecl = (usize, usize, Option<Vec<(usize, String)>>);

/// Parses a theory file.
pub fn parse_theory(text: &str) -> PResult<HornTheory> {
    let mut name: Option<(usize, String)> = None;
    let mut sig = Signature::default();
    let mut axioms: Vec<HornAxiom> = Vec::new();
    let mut axiom_lines: HashMap<String, usize> = HashMap::new();
    let mut eq: Option<(usize, Vec<Atom>)> = None;
    let mut limits: Vec<LimitDecl> = Vec::new();
    let mut lattice: Option<(usize, Vec<String>)> = None;
    let mut order: Vec<(String, String)> = Vec::new();
    let mut meets: Vec<(String, String, String)> = Vec::new();

    for (ln, line) in lines(text) {
        let mut c = Cursor::new(ln, line);
        if name.is_none() {
            let (col, kw) = keyword(&mut c)?;
            if kw != "theory" {
                return c.error_from(col, "expected `theory <name>`");
            }
            name = Some((ln, c.name()?.to_string()));
            c.expect_end()?;
            continue;
        }
        let (col, kw) = keyword(&mut c)?;
        match kw {
            "rel" | "relfam" => {
                let scol = c.column_after_ws();
                let sym = c.ident()?.to_string();
                let (kind, arity) = if kw == "rel" {
                    (SymbolKind::Plain, c.rest().parse::<usize>().map_err(|_| error_at(ln, scol, "expected an arity"))?)
                } else {
                    if !c.eat_word("rational") {
                        return c.error("expected `rational`");
                    }
                    let rest = c.rest();
                    let arity = if rest.is_empty() {
                        2
                    } else {
                        rest.parse::<usize>().map_err(|_| error_at(ln, scol, "expected an arity"))?
                    };
                    (SymbolKind::Family, arity)
                };
                sig.push(RelSymbol { name: sym, arity, kind }).map_err(|e| error_at(ln, scol, e.to_string()))?;
            }
            "axiom" => {
                let ax = theory_axiom(&mut c, &sig, format!("axiom{}", axioms.len() + 1))?;
                if axiom_lines.insert(ax.name.clone(), ln).is_some() {
                    return c.error_from(col, format!("duplicate axiom `{}`", ax.name));
                }
                axioms.push(ax);
            }
            "eq" => {
                let mut scope = AxiomScope::default();
                let mut atoms = Vec::new();
                loop {
                    atoms.push(axiom_atom(&mut c, &sig, &mut scope)?);
                    if !c.eat(',') {
                        break;
                    }
                }
                c.expect_end()?;
                if scope.vars.len() > 2 || !scope.metas.is_empty() {
                    return c.error_from(col, "an equality witness uses two variables and constant indices");
                }
                eq = Some((ln, atoms));
            }
            "limitrule" => {
                let rcol = c.column_after_ws();
                match c.name()? {
                    "met-arch" => limits.push((ln, rcol, None)),
                    "lattice-arch" => {
                        let mut syms = Vec::new();
                        while !c.at_end() {
                            let scol = c.column_after_ws();
                            syms.push((scol, c.ident()?.to_string()));
                        }
                        limits.push((ln, rcol, Some(syms)));
                    }
                    other => return c.error_from(rcol, format!("unknown limit rule `{other}`")),
                }
                c.expect_end()?;
            }
            "lattice" => {
                let mut els = Vec::new();
                while !c.at_end() {
                    els.push(c.ident()?.to_string());
                }
                lattice = Some((ln, els));
            }
            "order" => {
                let a = c.ident()?.to_string();
                let b = c.ident()?.to_string();
                c.expect_end()?;
                order.push((a, b));
            }
            "meet" => {
                let a = c.ident()?.to_string();
                let b = c.ident()?.to_string();
                let m = c.ident()?.to_string();
                c.expect_end()?;
                meets.push((a, b, m));
            }
            other => return c.error_from(col, format!("unknown declaration `{other}`")),
        }
    }

    let Some((header_line, name)) = name else {
        return Err(error_at(1, 1, "empty theory file"));
    };
    let mut limit_rules = Vec::new();
    for (ln, col, syms) in limits {
        match syms {
            None => limit_rules.push(LimitRule::MetArch),
            Some(syms) => {
                let Some((lline, els)) = &lattice else {
                    return Err(error_at(ln, col, "`lattice-arch` needs a `lattice` declaration"));
                };
                let table = LatticeTable::new(els.clone(), &order, &meets).map_err(|e| error_at(*lline, 1, e.to_string()))?;
                if syms.len() != table.elements.len() {
                    return Err(error_at(ln, col, format!("expected one symbol per lattice element ({})", table.elements.len())));
                }
                let mut ids = Vec::new();
                for (scol, s) in syms {
                    ids.push(sig.lookup(&s).ok_or_else(|| error_at(ln, scol, format!("unknown symbol `{s}`")))?);
                }
                limit_rules.push(LimitRule::LatticeArch { table, symbols: ids });
            }
        }
    }
    let (eq_line, witness) = match eq {
        Some((ln, atoms)) => (ln, EqWitness::Edges(atoms)),
        None => (header_line, EqWitness::Implicit),
    };
    HornTheory::new(name, sig, axioms, limit_rules, witness).map_err(|e| match &e {
        Error::Scheme { axiom, .. } => error_at(axiom_lines.get(axiom).copied().unwrap_or(header_line), 1, e.to_string()),
        Error::EqWitness(_) => error_at(eq_line, 1, e.to_string()),
        _ => error_at(header_line, 1, e.to_string()),
    })
}

// -------------------------------------------------------------- structures

/// Points and edges collected from `points` and `edge` lines.
#[derive(Debug, Clone, Default)]
struct Block {
    points: Vec<String>,
    edges: EdgeSet,
}

impl Block {
    /// Handles a `points` or `edge` line; returns false for other keywords.
    fn line(&mut self, kw: &str, c: &mut Cursor<'_>, sig: &Signature) -> PResult<bool> {
        match kw {
            "points" => {
                while !c.at_end() {
                    let col = c.column_after_ws();
                    let p = c.ident()?;
                    if self.points.iter().any(|q| q == p) {
                        return c.error_from(col, format!("duplicate point `{p}`"));
                    }
                    self.points.push(p.to_string());
                }
            }
            "edge" => loop {
                let e = ground_edge(c, sig, &self.points)?;
                self.edges.insert(e);
                if !c.eat(',') {
                    c.expect_end()?;
                    break;
                }
            },
            _ => return Ok(false),
        }
        Ok(true)
    }

    fn pre(&self) -> PreStructure {
        PreStructure::new(self.points.clone(), self.edges.clone()).expect("edges over declared points")
    }
}

fn ground_edge(c: &mut Cursor<'_>, sig: &Signature, points: &[String]) -> PResult<Edge> {
    let col = c.column_after_ws();
    let s = c.ident()?;
    let id = sig.lookup(s).ok_or_else(|| error_at(c.line, col, format!("unknown symbol `{s}`")))?;
    let index = if c.eat('[') {
        let bcol = c.column_after_ws();
        let b = c.bound()?;
        if b.is_empty() {
            return c.error_from(bcol, format!("`>{}` leaves no admissible distance", b.value));
        }
        c.expect(']')?;
        Some(b)
    } else {
        None
    };
    c.expect('(')?;
    let mut args = Vec::new();
    loop {
        let pcol = c.column_after_ws();
        let p = c.ident()?;
        let i = points
            .iter()
            .position(|q| q == p)
            .ok_or_else(|| error_at(c.line, pcol, format!("unknown point `{p}`")))?;
        args.push(i);
        if !c.eat(',') {
            break;
        }
    }
    c.expect(')')?;
    check_symbol(c, col, sig.symbol(id), index.is_some(), args.len())?;
    Ok(Edge { sym: id, index, points: args })
}

/// A parsed structure file.
#[derive(Debug, Clone)]
pub struct StructureFile {
    pub name: String,
    pub theory: Arc<HornTheory>,
    pub pre: PreStructure,
}

pub fn parse_structure(text: &str, lib: &Library) -> PResult<StructureFile> {
    let mut it = lines(text);
    let Some((ln, line)) = it.next() else {
        return Err(error_at(1, 1, "empty structure file"));
    };
    let mut c = Cursor::new(ln, line);
    let (name, tcol, tname) = header(&mut c, "structure", "over")?;
    let theory = resolve_theory(lib, &c, tcol, tname)?;
    let mut block = Block::default();
    for (ln, line) in it {
        let mut c = Cursor::new(ln, line);
        let (col, kw) = keyword(&mut c)?;
        if !block.line(kw, &mut c, &theory.signature)? {
            return c.error_from(col, format!("unknown declaration `{kw}`"));
        }
    }
    Ok(StructureFile { name: name.to_string(), theory, pre: block.pre() })
}

/// The model generated by a pre-structure, refusing presentations that
/// identify points.
pub fn generated_model(theory: &Arc<HornTheory>, pre: &PreStructure, line: usize, what: &str) -> PResult<PreStructure> {
    let r = reflect(theory, pre);
    if r.model.size() != pre.size() {
        let mut merged = Vec::new();
        for (p, &q) in r.quotient.iter().enumerate() {
            if r.quotient[..p].contains(&q) {
                merged.push(pre.point_name(p).to_string());
            }
        }
        return Err(error_at(line, 1, format!("{what}: the edges force `{}` equal to another point", merged.join("`, `"))));
    }
    Ok(r.model.into_underlying())
}

// ---------------------------------------------------------------- varieties

/// Loads a structure referenced by path from a variety file.
pub type StructureLoader<'l> = dyn FnMut(&str) -> Result<Option<PreStructure>, String> + 'l;

/// A parsed variety file.
#[derive(Debug, Clone)]
pub struct VarietyFile {
    pub variety: Variety,
    /// Line of each axiom.
    pub axiom_lines: BTreeMap<String, usize>,
}

fn term(c: &mut Cursor<'_>, sig: &OpSignature, vars: &[String]) -> PResult<Term> {
    let col = c.column_after_ws();
    let s = c.ident()?;
    let mark = c.mark();
    let line = c.line;
    let unknown = || error_at(line, col, format!("unknown variable or operation `{s}`"));
    if c.eat('{') {
        let op = sig.lookup(s).ok_or_else(unknown)?;
        let arity = &sig.op(op).arity;
        let mut args: Vec<Option<Term>> = vec![None; arity.size()];
        if !c.eat('}') {
            loop {
                let pcol = c.column_after_ws();
                let p = c.ident()?;
                let i = arity
                    .point_index(p)
                    .ok_or_else(|| error_at(c.line, pcol, format!("`{p}` is not a point of the arity of `{s}`")))?;
                c.expect_str("->")?;
                let t = term(c, sig, vars)?;
                if args[i].replace(t).is_some() {
                    return c.error_from(pcol, format!("`{p}` given twice"));
                }
                if !c.eat(',') {
                    break;
                }
            }
            c.expect('}')?;
        }
        let missing: Vec<&str> = (0..arity.size()).filter(|&i| args[i].is_none()).map(|i| arity.point_name(i)).collect();
        if !missing.is_empty() {
            return c.error_from(col, format!("`{s}` is missing arguments for {}", missing.join(", ")));
        }
        return Ok(Term::App(op, args.into_iter().map(Option::unwrap).collect()));
    }
    c.reset(mark);
    if c.eat('(') {
        let op = sig.lookup(s).ok_or_else(unknown)?;
        let mut args = Vec::new();
        if !c.eat(')') {
            loop {
                args.push(term(c, sig, vars)?);
                if !c.eat(',') {
                    break;
                }
            }
            c.expect(')')?;
        }
        let n = sig.op(op).arity.size();
        if args.len() != n {
            return c.error_from(col, format!("arity mismatch: `{s}` takes {n} arguments, got {}", args.len()));
        }
        return Ok(Term::App(op, args));
    }
    c.reset(mark);
    if let Some(i) = vars.iter().position(|v| v == s) {
        return Ok(Term::Var(i));
    }
    match sig.lookup(s) {
        Some(op) if sig.op(op).arity.size() == 0 => Ok(Term::App(op, vec![])),
        Some(_) => c.error_from(col, format!("operation `{s}` needs arguments")),
        None => Err(unknown()),
    }
}

/// A relation over terms, or an equation expanded through the theory's
/// equality witness.
fn term_relation(c: &mut Cursor<'_>, sig: &OpSignature, vars: &[String]) -> PResult<Vec<TermEdge>> {
    let theory = sig.theory();
    let col = c.column_after_ws();
    let mark = c.mark();
    let s = c.ident()?;
    if let Some(id) = theory.signature.lookup(s).filter(|_| matches!(c.clone().peek(), Some('(' | '['))) {
        let index = if c.eat('[') {
            let q = c.unit_rational()?;
            c.expect(']')?;
            Some(q)
        } else {
            None
        };
        c.expect('(')?;
        let mut terms = Vec::new();
        loop {
            terms.push(term(c, sig, vars)?);
            if !c.eat(',') {
                break;
            }
        }
        c.expect(')')?;
        check_symbol(c, col, theory.signature.symbol(id), index.is_some(), terms.len())?;
        return Ok(vec![TermEdge { sym: id, index, terms }]);
    }
    c.reset(mark);
    let lhs = term(c, sig, vars)?;
    if !c.eat('=') {
        return c.error("expected a relation `sym(t, ...)` or an equation `s = t`");
    }
    let rhs = term(c, sig, vars)?;
    let edges = theory
        .eq_edges(0, 1)
        .ok_or_else(|| error_at(c.line, col, format!("theory `{}` has no equality witness", theory.name)))?;
    Ok(edges
        .into_iter()
        .map(|e| TermEdge {
            sym: e.sym,
            index: e.index.map(|b| b.value),
            terms: e.points.iter().map(|&p| if p == 0 { lhs.clone() } else { rhs.clone() }).collect(),
        })
        .collect())
}

pub fn parse_variety(text: &str, lib: &Library, load: &mut StructureLoader<'_>) -> PResult<VarietyFile> {
    let mut it = lines(text);
    let Some((header_line, line)) = it.next() else {
        return Err(error_at(1, 1, "empty variety file"));
    };
    let mut c = Cursor::new(header_line, line);
    let (name, tcol, tname) = header(&mut c, "variety", "over")?;
    let theory = resolve_theory(lib, &c, tcol, tname)?;
    let mut blocks: BTreeMap<String, Block> = BTreeMap::new();
    let mut current: Option<String> = None;
    let mut ops: Vec<OpSymbol> = Vec::new();
    let mut axioms: Vec<SigmaRelation> = Vec::new();
    let mut axiom_lines = BTreeMap::new();

    let mut structure = |c: &Cursor<'_>, col: usize, r: &str, blocks: &BTreeMap<String, Block>| -> PResult<(PreStructure, EdgeSet)> {
        let pre = match blocks.get(r) {
            Some(b) => b.pre(),
            None => match load(r) {
                Ok(Some(pre)) => pre,
                Ok(None) => return c.error_from(col, format!("unknown structure `{r}`")),
                Err(e) => return c.error_from(col, format!("structure `{r}`: {e}")),
            },
        };
        let model = generated_model(&theory, &pre, c.line, &format!("structure `{r}`"))?;
        Ok((model, pre.edges().clone()))
    };

    for (ln, line) in it {
        let mut c = Cursor::new(ln, line);
        let (col, kw) = keyword(&mut c)?;
        if let Some(b) = current.as_ref().and_then(|n| blocks.get_mut(n)) {
            if b.line(kw, &mut c, &theory.signature)? {
                continue;
            }
        }
        current = None;
        match kw {
            "structure" => {
                let n = c.name()?.to_string();
                c.expect_end()?;
                if blocks.insert(n.clone(), Block::default()).is_some() {
                    return c.error_from(col, format!("duplicate structure `{n}`"));
                }
                current = Some(n);
            }
            "points" | "edge" => return c.error_from(col, format!("`{kw}` outside a structure block")),
            "op" => {
                let ocol = c.column_after_ws();
                let op = c.ident()?.to_string();
                if ops.iter().any(|o| o.name == op) {
                    return c.error_from(ocol, format!("duplicate operation `{op}`"));
                }
                if !c.eat_word("arity") {
                    return c.error("expected `arity <structure>`");
                }
                let rcol = c.column_after_ws();
                let r = c.word()?;
                c.expect_end()?;
                let (arity, _) = structure(&c, rcol, r, &blocks)?;
                ops.push(OpSymbol { name: op, arity });
            }
            "axiom" => {
                let ax_name = if c.eat_word("context") {
                    format!("axiom{}", axioms.len() + 1)
                } else {
                    let n = c.name()?.to_string();
                    if !c.eat_word("context") {
                        return c.error("expected `context <structure>`");
                    }
                    n
                };
                let rcol = c.column_after_ws();
                let r = c.word()?;
                let (context, presentation) = structure(&c, rcol, r, &blocks)?;
                c.expect(':')?;
                let sig = Arc::new(OpSignature::new(Arc::clone(&theory), ops.clone()).map_err(|e| error_at(ln, 1, e.to_string()))?);
                let rels = term_relation(&mut c, &sig, context.points())?;
                c.expect_end()?;
                let many = rels.len() > 1;
                for (k, relation) in rels.into_iter().enumerate() {
                    let name = if many { format!("{ax_name}.{}", k + 1) } else { ax_name.clone() };
                    if axiom_lines.insert(name.clone(), ln).is_some() {
                        return c.error_from(col, format!("duplicate axiom `{name}`"));
                    }
                    let ax = SigmaRelation { name, context: context.clone(), presentation: presentation.clone(), relation };
                    Variety::new("check", Arc::clone(&sig), vec![ax.clone()]).map_err(|e| error_at(ln, col, e.to_string()))?;
                    axioms.push(ax);
                }
            }
            other => return c.error_from(col, format!("unknown declaration `{other}`")),
        }
    }
    let sig = Arc::new(OpSignature::new(Arc::clone(&theory), ops).map_err(|e| error_at(header_line, 1, e.to_string()))?);
    let variety = Variety::new(name, sig, axioms).map_err(|e| error_at(header_line, 1, e.to_string()))?;
    Ok(VarietyFile { variety, axiom_lines })
}

// ---------------------------------------------------------------- algebras

/// Parses an algebra file for the given variety's signature. Every operation
/// needs a `value` line for each morphism from its arity, or a `project`
/// line.
pub fn parse_algebra(text: &str, variety: &Variety, budget: Budget) -> PResult<SigmaAlgebra> {
    let sig = variety.signature();
    let theory = sig.theory();
    let mut it = lines(text);
    let Some((header_line, line)) = it.next() else {
        return Err(error_at(1, 1, "empty algebra file"));
    };
    let mut c = Cursor::new(header_line, line);
    let (_, vcol, vname) = header(&mut c, "algebra", "of")?;
    if vname != variety.name {
        return c.error_from(vcol, format!("algebra is for `{vname}`, not `{}`", variety.name));
    }
    let mut block = Block::default();
    let mut values: Vec<(usize, usize, usize, Vec<String>, String)> = Vec::new();
    let mut projections: BTreeMap<usize, usize> = BTreeMap::new();
    for (ln, line) in it {
        let mut c = Cursor::new(ln, line);
        let (col, kw) = keyword(&mut c)?;
        if block.line(kw, &mut c, &theory.signature)? {
            continue;
        }
        match kw {
            "value" => {
                let ocol = c.column_after_ws();
                let s = c.ident()?;
                let op = sig.lookup(s).ok_or_else(|| error_at(ln, ocol, format!("unknown operation `{s}`")))?;
                let arity = &sig.op(op).arity;
                let mut args = vec![String::new(); arity.size()];
                if c.eat('{') {
                    let mut seen = vec![false; arity.size()];
                    if !c.eat('}') {
                        loop {
                            let pcol = c.column_after_ws();
                            let p = c.ident()?;
                            let i = arity
                                .point_index(p)
                                .ok_or_else(|| error_at(ln, pcol, format!("`{p}` is not a point of the arity of `{s}`")))?;
                            c.expect_str("->")?;
                            args[i] = c.ident()?.to_string();
                            seen[i] = true;
                            if !c.eat(',') {
                                break;
                            }
                        }
                        c.expect('}')?;
                    }
                    if seen.contains(&false) {
                        return c.error_from(ocol, format!("`{s}` is missing arguments"));
                    }
                } else if c.eat('(') {
                    let mut given = Vec::new();
                    if !c.eat(')') {
                        loop {
                            given.push(c.ident()?.to_string());
                            if !c.eat(',') {
                                break;
                            }
                        }
                        c.expect(')')?;
                    }
                    if given.len() != args.len() {
                        return c.error_from(ocol, format!("arity mismatch: `{s}` takes {} arguments", args.len()));
                    }
                    args = given;
                } else if !args.is_empty() {
                    return c.error_from(ocol, format!("`{s}` needs arguments"));
                }
                c.expect('=')?;
                let result = c.ident()?.to_string();
                c.expect_end()?;
                values.push((ln, ocol, op, args, result));
            }
            "project" => {
                let ocol = c.column_after_ws();
                let s = c.ident()?;
                let op = sig.lookup(s).ok_or_else(|| error_at(ln, ocol, format!("unknown operation `{s}`")))?;
                let pcol = c.column_after_ws();
                let p = c.ident()?;
                let i = sig
                    .op(op)
                    .arity
                    .point_index(p)
                    .ok_or_else(|| error_at(ln, pcol, format!("`{p}` is not a point of the arity of `{s}`")))?;
                c.expect_end()?;
                projections.insert(op, i);
            }
            other => return c.error_from(col, format!("unknown declaration `{other}`")),
        }
    }
    let carrier = generated_model(theory, &block.pre(), header_line, "carrier")?;
    let point = |ln: usize, col: usize, p: &str| {
        carrier.point_index(p).ok_or_else(|| error_at(ln, col, format!("unknown point `{p}`")))
    };
    let mut given: Vec<BTreeMap<Vec<usize>, (usize, usize)>> = vec![BTreeMap::new(); sig.len()];
    for (ln, col, op, args, result) in &values {
        let map = args.iter().map(|a| point(*ln, *col, a)).collect::<PResult<Vec<usize>>>()?;
        let r = point(*ln, *col, result)?;
        if let Some((_, prev)) = given[*op].insert(map, (*ln, r)) {
            if prev != r {
                return Err(error_at(*ln, *col, "conflicting values for the same arguments"));
            }
        }
    }
    let mut interps = Vec::new();
    for (op, sym) in sig.ops().iter().enumerate() {
        if let Some(&p) = projections.get(&op) {
            if !given[op].is_empty() {
                return Err(error_at(header_line, 1, format!("`{}` has both a projection and values", sym.name)));
            }
            interps.push(Interp::Projection(p));
            continue;
        }
        let maps = hom_maps(&sym.arity, &carrier, budget).map_err(|e| error_at(header_line, 1, e.to_string()))?;
        let mut out = Vec::with_capacity(maps.len());
        for m in &maps {
            match given[op].get(m) {
                Some(&(_, v)) => out.push(v),
                None => {
                    let shown = relat_core::structops::render_map(&sym.arity, &carrier, m);
                    return Err(error_at(header_line, 1, format!("`{}` has no value at {shown}", sym.name)));
                }
            }
        }
        if let Some((m, (ln, _))) = given[op].iter().find(|(m, _)| !maps.contains(m)) {
            let shown = relat_core::structops::render_map(&sym.arity, &carrier, m);
            return Err(error_at(*ln, 1, format!("{shown} is not a morphism from the arity of `{}`", sym.name)));
        }
        interps.push(Interp::Table(Table::new(maps, out)));
    }
    SigmaAlgebra::new(Arc::clone(sig), carrier, interps, budget).map_err(|e| error_at(header_line, 1, e.to_string()))
}

// ------------------------------------------------------------------- goals

/// Parses `defined(t)`, a relation over terms or an equation; an equation
/// becomes one judgement per edge of the equality witness.
pub fn parse_goal(text: &str, sig: &OpSignature, context: &[String]) -> PResult<Vec<Judgement>> {
    let mut c = Cursor::new(1, text);
    let mark = c.mark();
    if c.eat_word("defined") && c.eat('(') {
        let t = term(&mut c, sig, context)?;
        c.expect(')')?;
        c.expect_end()?;
        return Ok(vec![Judgement::Def(t)]);
    }
    c.reset(mark);
    let rels = term_relation(&mut c, sig, context)?;
    c.expect_end()?;
    Ok(rels.into_iter().map(|r| Judgement::rel(r.sym, r.index, r.terms)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use relat_core::Rat;

    #[test]
    fn index_sums_intern_metas() {
        let sig = builtin::met().unwrap().signature;
        let mut c = Cursor::new(1, "eq[e+f+1/2](x,y)");
        let mut scope = AxiomScope::default();
        let a = axiom_atom(&mut c, &sig, &mut scope).unwrap();
        assert_eq!(scope.metas, ["e", "f"]);
        assert_eq!(
            a.index,
            Some(IndexExpr::Sum(vec![IndexExpr::Meta(0), IndexExpr::Meta(1), IndexExpr::Const(Rat::frac(1, 2))]))
        );
    }

    #[test]
    fn equation_is_not_an_implication() {
        let sig = builtin::pos().unwrap().signature;
        let mut scope = AxiomScope::default();
        let mut c = Cursor::new(1, "x = y");
        assert_eq!(axiom_atom(&mut c, &sig, &mut scope).unwrap(), Atom::eq(0, 1));
    }
}
