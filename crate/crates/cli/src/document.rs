//! Proof documents: proof trees flattened to a node table for storage.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use relat_core::horn::PreStructure;
use relat_core::logic::{Calculus, Judgement, Proof, Rule};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextDoc {
    pub points: Vec<String>,
    pub edges: Vec<String>,
}

/// Where a variety axiom was declared.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRef {
    pub file: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub rule_name: String,
    /// Full rule data: substitutions, maps, metavariable values.
    pub rule: Rule,
    pub conclusion: Judgement,
    pub rendered: String,
    /// Indices of earlier nodes.
    pub premises: Vec<usize>,
    pub axiom: Option<String>,
    pub source: Option<SourceRef>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProofDocument {
    pub schema_version: u32,
    pub variety: String,
    pub context: ContextDoc,
    pub goal: String,
    pub depth: usize,
    /// Shared subproofs appear once; premises always precede their users.
    pub nodes: Vec<NodeDoc>,
    /// One root per goal judgement.
    pub roots: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DocumentError {
    #[error("unsupported schema version {0}")]
    Version(u32),
    #[error("node {node}: premise {premise} does not precede it")]
    Order { node: usize, premise: usize },
    #[error("root {0} is out of range")]
    Root(usize),
}

struct Builder<'a> {
    calc: &'a Calculus,
    context: &'a [String],
    sources: &'a dyn Fn(&str) -> Option<SourceRef>,
    seen: HashMap<*const Proof, usize>,
    nodes: Vec<NodeDoc>,
}

impl Builder<'_> {
    fn add(&mut self, p: &Arc<Proof>) -> usize {
        let key = Arc::as_ptr(p);
        if let Some(&i) = self.seen.get(&key) {
            return i;
        }
        let premises = p.premises.iter().map(|q| self.add(q)).collect();
        let axiom = match &p.rule {
            Rule::Ax { name, .. } | Rule::RelAx { name, .. } => Some(name.clone()),
            Rule::IAr { axiom, .. } => Some(self.calc.variety.axioms()[*axiom].name.clone()),
            _ => None,
        };
        let source = match &p.rule {
            Rule::Ax { .. } | Rule::IAr { .. } => axiom.as_deref().and_then(|a| (self.sources)(a)),
            _ => None,
        };
        self.nodes.push(NodeDoc {
            rule_name: p.rule.name().to_string(),
            rule: p.rule.clone(),
            conclusion: p.conclusion.clone(),
            rendered: p.conclusion.render(self.calc, self.context),
            premises,
            axiom,
            source,
        });
        let i = self.nodes.len() - 1;
        self.seen.insert(key, i);
        i
    }
}

impl ProofDocument {
    /// Flattens proofs over `context`; `sources` locates variety axioms.
    pub fn new(
        calc: &Calculus,
        context: &PreStructure,
        goal: &str,
        depth: usize,
        proofs: &[Arc<Proof>],
        sources: &dyn Fn(&str) -> Option<SourceRef>,
    ) -> ProofDocument {
        let theory = calc.variety.signature().theory();
        let points = context.points().to_vec();
        let mut b = Builder { calc, context: &points, sources, seen: HashMap::new(), nodes: Vec::new() };
        let roots = proofs.iter().map(|p| b.add(p)).collect();
        let nodes = b.nodes;
        ProofDocument {
            schema_version: SCHEMA_VERSION,
            variety: calc.variety.name.clone(),
            context: ContextDoc {
                edges: context.edges().iter().map(|e| theory.render_edge(&e, &points)).collect(),
                points,
            },
            goal: goal.to_string(),
            depth,
            nodes,
            roots,
        }
    }

    /// Rebuilds the proof trees, sharing nodes as stored.
    pub fn proofs(&self) -> Result<Vec<Arc<Proof>>, DocumentError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(DocumentError::Version(self.schema_version));
        }
        let mut built: Vec<Arc<Proof>> = Vec::with_capacity(self.nodes.len());
        for (i, n) in self.nodes.iter().enumerate() {
            let premises = n
                .premises
                .iter()
                .map(|&q| built.get(q).filter(|_| q < i).cloned().ok_or(DocumentError::Order { node: i, premise: q }))
                .collect::<Result<_, _>>()?;
            built.push(Arc::new(Proof { conclusion: n.conclusion.clone(), rule: n.rule.clone(), premises }));
        }
        self.roots.iter().map(|&r| built.get(r).cloned().ok_or(DocumentError::Root(r))).collect()
    }
}
