//! Subcommands. Each returns a report holding both the human-readable text
//! and the JSON result; `main` picks one.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use relat_core::extract::{induce_theory, AxiomFamily, IdentityMonad, MonadOracle};
use relat_core::free::{check_monad_laws, free_algebra, FreeMonad};
use relat_core::horn::{is_model, reflect, saturate, HornTheory, PreStructure, SymbolKind};
use relat_core::logic::{
    apply_mutation, check_proof, derive, mutation_sites, saturate_judgements, BankConfig, Calculus, Derived, Judgement,
    Proof,
};
use relat_core::par::{Budget, DEFAULT_GUARD};
use relat_core::sigma::{counterexample, Variety};
use relat_core::structops::{hom_maps, manhattan, render_map};

use crate::document::{ProofDocument, SourceRef};
use crate::error::{CliError, CliResult};
use crate::parse::{
    generated_model, parse_algebra, parse_goal, parse_structure, parse_theory, parse_variety, Library, StructureFile,
    VarietyFile,
};
use crate::print::print_structure;
use crate::syntax::{error_at, lines, Cursor};

/// Version of the JSON envelope and of every command result.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Parser)]
#[command(name = "relat", version, about = "Relational Horn theories, varieties and their free algebras")]
pub struct Cli {
    /// Emit a JSON envelope instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Limit on candidates visited by exhaustive enumerations; overrides RELAT_GUARD.
    #[arg(long, global = true)]
    pub guard: Option<u128>,
    /// Term depth bound for derivations and free algebras.
    #[arg(long, global = true, default_value_t = 3)]
    pub depth: usize,
    /// Seed for the fuzzing subcommands.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Theory file to load, or a builtin name (set, pos, met). Repeatable.
    #[arg(long = "theory", global = true, value_name = "FILE|NAME")]
    pub theories: Vec<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Quotient a structure to the model it generates.
    Reflect {
        #[arg(long)]
        structure: PathBuf,
    },
    /// Close a structure under the theory's axioms without quotienting.
    Saturate {
        #[arg(long)]
        structure: PathBuf,
    },
    /// Search for a proof of a goal over a context.
    Derive {
        #[arg(long)]
        variety: PathBuf,
        #[arg(long)]
        context: PathBuf,
        /// `defined(t)`, a relation over terms, or `s = t`.
        #[arg(long)]
        goal: String,
        /// Write the proof document here.
        #[arg(long)]
        proof: Option<PathBuf>,
        /// Only materialize subterms of the goal.
        #[arg(long)]
        relevant: bool,
    },
    /// Re-check a proof document.
    CheckProof {
        #[arg(long)]
        variety: PathBuf,
        #[arg(long)]
        context: PathBuf,
        #[arg(long)]
        proof: PathBuf,
    },
    /// The free algebra over a structure, truncated at the depth bound.
    Free {
        #[arg(long)]
        variety: PathBuf,
        #[arg(long)]
        structure: PathBuf,
    },
    /// Whether a structure is a model of its theory.
    CheckModel {
        #[arg(long)]
        structure: PathBuf,
    },
    /// Whether an algebra satisfies the axioms of a variety.
    CheckAlgebra {
        #[arg(long)]
        variety: PathBuf,
        #[arg(long)]
        algebra: PathBuf,
    },
    /// Relation-preserving maps between two structures.
    Hom { source: PathBuf, target: PathBuf },
    /// The Manhattan product of two structures.
    Tensor { left: PathBuf, right: PathBuf },
    /// Kleisli laws and enrichment of the free-algebra monad on the given objects.
    MonadLaws {
        #[arg(long)]
        variety: PathBuf,
        objects: Vec<PathBuf>,
    },
    /// The theory induced by a monad on a list of arities.
    Extract {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Extract the theory of a free-algebra monad and check freeness of each T Γ.
    Roundtrip {
        #[arg(long)]
        variety: PathBuf,
        #[arg(long = "arity", required = true)]
        arities: Vec<PathBuf>,
        #[arg(long, default_value_t = 2)]
        carrier_bound: usize,
    },
    /// Check random derivable judgements and corrupt their proofs.
    FuzzProofs {
        #[arg(long)]
        variety: PathBuf,
        #[arg(long)]
        context: PathBuf,
        #[arg(long, default_value_t = 50)]
        count: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Reflect { .. } => "reflect",
            Command::Saturate { .. } => "saturate",
            Command::Derive { .. } => "derive",
            Command::CheckProof { .. } => "check-proof",
            Command::Free { .. } => "free",
            Command::CheckModel { .. } => "check-model",
            Command::CheckAlgebra { .. } => "check-algebra",
            Command::Hom { .. } => "hom",
            Command::Tensor { .. } => "tensor",
            Command::MonadLaws { .. } => "monad-laws",
            Command::Extract { .. } => "extract",
            Command::Roundtrip { .. } => "roundtrip",
            Command::FuzzProofs { .. } => "fuzz-proofs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The query was answered in the negative.
    Negative,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Negative => "negative",
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::Negative => 1,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Report {
    pub status: Status,
    pub text: String,
    pub result: Value,
}

impl Report {
    fn new(ok: bool, text: String, result: Value) -> Report {
        Report { status: if ok { Status::Ok } else { Status::Negative }, text, result }
    }
}

/// The JSON envelope around a result or an error.
pub fn envelope(command: &str, status: &str, body: (&str, Value)) -> Value {
    let mut v = json!({ "schema_version": SCHEMA_VERSION, "command": command, "status": status });
    v[body.0] = body.1;
    v
}

pub fn error_json(e: &CliError) -> Value {
    let mut v = json!({ "message": e.to_string() });
    if let Some((file, line, column)) = e.location() {
        v["file"] = json!(file);
        v["line"] = json!(line);
        v["column"] = json!(column);
    }
    v
}

/// Guard from the flag, else from `RELAT_GUARD`, else the default.
pub fn budget(flag: Option<u128>) -> CliResult<Budget> {
    let guard = match flag {
        Some(g) => g,
        None => match std::env::var("RELAT_GUARD") {
            Ok(s) => s.trim().parse().map_err(|_| CliError::Usage(format!("RELAT_GUARD=`{s}` is not a number")))?,
            Err(_) => DEFAULT_GUARD,
        },
    };
    Ok(Budget::default().with_guard(guard))
}

/// Loaded theories and the run's settings.
pub struct Session {
    pub lib: Library,
    pub budget: Budget,
    pub depth: usize,
    pub seed: u64,
}

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn at(path: &Path) -> impl Fn(crate::syntax::ParseError) -> CliError + '_ {
    move |source| CliError::Parse { path: path.to_path_buf(), source }
}

impl Session {
    pub fn new(cli: &Cli) -> CliResult<Session> {
        let mut lib = Library::with_builtins();
        for t in &cli.theories {
            let path = Path::new(t);
            if path.is_file() {
                lib.add(parse_theory(&read(path)?).map_err(at(path))?);
            } else if lib.get(t).is_none() {
                return Err(CliError::Usage(format!("`{t}` is neither a theory file nor a builtin theory")));
            }
        }
        Ok(Session { lib, budget: budget(cli.guard)?, depth: cli.depth, seed: cli.seed })
    }

    fn structure(&self, path: &Path) -> CliResult<StructureFile> {
        parse_structure(&read(path)?, &self.lib).map_err(at(path))
    }

    /// A structure file over `theory`, as the model it generates.
    fn model(&self, path: &Path, theory: &Arc<HornTheory>) -> CliResult<PreStructure> {
        let s = self.structure(path)?;
        if s.theory.name != theory.name {
            return Err(CliError::Usage(format!(
                "{}: structure is over `{}`, expected `{}`",
                path.display(),
                s.theory.name,
                theory.name
            )));
        }
        generated_model(theory, &s.pre, 1, &format!("structure `{}`", s.name)).map_err(at(path))
    }

    fn variety(&self, path: &Path) -> CliResult<(Arc<Variety>, VarietyFile)> {
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut load = |r: &str| -> Result<Option<PreStructure>, String> {
            let p = dir.join(r);
            if !p.is_file() {
                return Ok(None);
            }
            let text = std::fs::read_to_string(&p).map_err(|e| format!("{}: {e}", p.display()))?;
            parse_structure(&text, &self.lib).map(|s| Some(s.pre)).map_err(|e| format!("{}: {e}", p.display()))
        };
        let vf = parse_variety(&read(path)?, &self.lib, &mut load).map_err(at(path))?;
        Ok((Arc::new(vf.variety.clone()), vf))
    }
}

pub fn run(cli: &Cli) -> CliResult<Report> {
    let s = Session::new(cli)?;
    match &cli.command {
        Command::Reflect { structure } => cmd_reflect(&s, structure),
        Command::Saturate { structure } => cmd_saturate(&s, structure),
        Command::CheckModel { structure } => cmd_check_model(&s, structure),
        Command::Derive { variety, context, goal, proof, relevant } => {
            cmd_derive(&s, variety, context, goal, proof.as_deref(), *relevant)
        }
        Command::CheckProof { variety, context, proof } => cmd_check_proof(&s, variety, context, proof),
        Command::Free { variety, structure } => cmd_free(&s, variety, structure),
        Command::CheckAlgebra { variety, algebra } => cmd_check_algebra(&s, variety, algebra),
        Command::Hom { source, target } => cmd_hom(&s, source, target),
        Command::Tensor { left, right } => cmd_tensor(&s, left, right),
        Command::MonadLaws { variety, objects } => cmd_monad_laws(&s, variety, objects),
        Command::Extract { manifest } => cmd_extract(&s, manifest),
        Command::Roundtrip { variety, arities, carrier_bound } => cmd_roundtrip(&s, variety, arities, *carrier_bound),
        Command::FuzzProofs { variety, context, count } => cmd_fuzz(&s, variety, context, *count),
    }
}

fn rendered_edges(theory: &HornTheory, s: &PreStructure) -> Vec<String> {
    s.edges().iter().map(|e| theory.render_edge(&e, s.points())).collect()
}

fn cmd_reflect(s: &Session, path: &Path) -> CliResult<Report> {
    let f = s.structure(path)?;
    let r = reflect(&f.theory, &f.pre);
    let model = r.model.underlying();
    let quotient: Vec<(String, String)> = r
        .quotient
        .iter()
        .enumerate()
        .map(|(p, &c)| (f.pre.point_name(p).to_string(), model.point_name(c).to_string()))
        .collect();
    let mut text = format!("{} points, quotient to {}\n", f.pre.size(), model.size());
    for (p, c) in &quotient {
        writeln!(text, "  {p} -> {c}").unwrap();
    }
    text.push_str(&print_structure(&f.name, &f.theory, model));
    let result = json!({
        "structure": f.name,
        "theory": f.theory.name,
        "points": model.points(),
        "edges": rendered_edges(&f.theory, model),
        "quotient": quotient.iter().map(|(p, c)| json!({"point": p, "class": c})).collect::<Vec<_>>(),
    });
    Ok(Report::new(true, text, result))
}

fn cmd_saturate(s: &Session, path: &Path) -> CliResult<Report> {
    let f = s.structure(path)?;
    let sat = saturate(&f.theory, &f.pre);
    let edges = sat.edges();
    let names = f.pre.points();
    let edges: Vec<String> = edges.iter().map(|e| f.theory.render_edge(&e, names)).collect();
    let equalities: Vec<[&str; 2]> =
        sat.equalities().iter().filter(|(a, b)| a < b).map(|&(a, b)| [names[a].as_str(), names[b].as_str()]).collect();
    let mut text = String::new();
    for e in &edges {
        writeln!(text, "edge {e}").unwrap();
    }
    for [a, b] in &equalities {
        writeln!(text, "equal {a} {b}").unwrap();
    }
    Ok(Report::new(true, text, json!({ "edges": edges, "equalities": equalities })))
}

fn cmd_check_model(s: &Session, path: &Path) -> CliResult<Report> {
    let f = s.structure(path)?;
    let names = f.pre.points();
    let ok = is_model(&f.theory, &f.pre);
    let sat = saturate(&f.theory, &f.pre);
    let missing: Vec<String> = sat
        .edges()
        .iter()
        .filter(|e| !f.pre.edges().contains(e))
        .map(|e| f.theory.render_edge(&e, names))
        .collect();
    let equalities: Vec<[&str; 2]> =
        sat.equalities().iter().filter(|(a, b)| a < b).map(|&(a, b)| [names[a].as_str(), names[b].as_str()]).collect();
    let mut text = if ok {
        format!("`{}` is a model of {}\n", f.name, f.theory.name)
    } else {
        format!("`{}` is not a model of {}\n", f.name, f.theory.name)
    };
    for e in &missing {
        writeln!(text, "  missing edge {e}").unwrap();
    }
    for [a, b] in &equalities {
        writeln!(text, "  forced equality {a} = {b}").unwrap();
    }
    let result = json!({ "model": ok, "missing_edges": missing, "equalities": equalities });
    Ok(Report::new(ok, text, result))
}

fn cmd_hom(s: &Session, source: &Path, target: &Path) -> CliResult<Report> {
    let x = s.structure(source)?;
    let y = s.structure(target)?;
    if x.theory.name != y.theory.name {
        return Err(CliError::Usage(format!("`{}` and `{}` are over different theories", x.name, y.name)));
    }
    let maps = hom_maps(&x.pre, &y.pre, s.budget)?;
    let rendered: Vec<String> = maps.iter().map(|m| render_map(&x.pre, &y.pre, m)).collect();
    let mut text = format!("{} morphisms {} -> {}\n", maps.len(), x.name, y.name);
    for m in &rendered {
        writeln!(text, "  {m}").unwrap();
    }
    Ok(Report::new(true, text, json!({ "count": maps.len(), "maps": rendered })))
}

fn cmd_tensor(s: &Session, left: &Path, right: &Path) -> CliResult<Report> {
    let x = s.structure(left)?;
    let y = s.structure(right)?;
    if x.theory.name != y.theory.name {
        return Err(CliError::Usage(format!("`{}` and `{}` are over different theories", x.name, y.name)));
    }
    let theory = &x.theory;
    let xm = generated_model(theory, &x.pre, 1, "left factor").map_err(at(left))?;
    let ym = generated_model(theory, &y.pre, 1, "right factor").map_err(at(right))?;
    let r = manhattan(theory, &xm, &ym);
    let model = r.model.underlying();
    let mut text = print_structure(&format!("{}-{}", x.name, y.name), theory, model);
    let family = theory.signature.families().find(|&f| {
        let sym = theory.signature.symbol(f);
        sym.arity == 2 && sym.kind == SymbolKind::Family
    });
    let mut distances = Value::Null;
    if let Some(sym) = family {
        text.push_str("distances\n");
        let mut rows = Vec::new();
        let names = model.points();
        for a in 0..model.size() {
            for b in a + 1..model.size() {
                let d = match model.edges().bound(sym, &[a, b]) {
                    Some(bd) => bd.to_string(),
                    None => "-".to_string(),
                };
                writeln!(text, "  d({}, {}) = {d}", names[a], names[b]).unwrap();
                rows.push(json!({ "left": names[a], "right": names[b], "distance": d }));
            }
        }
        distances = json!(rows);
    }
    let result = json!({
        "points": model.points(),
        "edges": rendered_edges(theory, model),
        "distances": distances,
    });
    Ok(Report::new(true, text, result))
}

fn axiom_sources<'a>(path: &'a Path, vf: &'a VarietyFile) -> impl Fn(&str) -> Option<SourceRef> + 'a {
    move |name| {
        vf.axiom_lines.get(name).map(|&line| SourceRef { file: path.display().to_string(), line })
    }
}

fn goal(s: &str, v: &Variety, ctx: &PreStructure) -> CliResult<Vec<Judgement>> {
    parse_goal(s, v.signature(), ctx.points()).map_err(at(Path::new("<goal>")))
}

fn cmd_derive(
    s: &Session,
    vpath: &Path,
    cpath: &Path,
    goal_text: &str,
    out: Option<&Path>,
    relevant: bool,
) -> CliResult<Report> {
    let (v, vf) = s.variety(vpath)?;
    let ctx = s.model(cpath, v.signature().theory())?;
    let goals = goal(goal_text, &v, &ctx)?;
    let calc = Arc::new(Calculus::new(Arc::clone(&v))?);
    let config = if relevant { BankConfig::relevant(s.depth, vec![]) } else { BankConfig::depth(s.depth) };
    let mut proofs: Vec<Arc<Proof>> = Vec::new();
    let mut rows = Vec::new();
    let mut outcome = "derived";
    let mut text = String::new();
    for g in &goals {
        let shown = g.render(&calc, ctx.points());
        match derive(&calc, &ctx, g, &config)? {
            Derived::Proof(p) => {
                rows.push(json!({ "judgement": shown, "outcome": "derived", "nodes": p.size() }));
                text.push_str(&p.render(&calc, ctx.points()));
                proofs.push(p);
            }
            Derived::Absent => {
                writeln!(text, "not derivable at depth {}: {shown}", s.depth).unwrap();
                rows.push(json!({ "judgement": shown, "outcome": "absent", "nodes": 0 }));
                outcome = "absent";
            }
            Derived::Exhausted => {
                writeln!(text, "not found within depth {}: {shown}", s.depth).unwrap();
                rows.push(json!({ "judgement": shown, "outcome": "exhausted", "nodes": 0 }));
                if outcome == "derived" {
                    outcome = "exhausted";
                }
            }
        }
    }
    let ok = outcome == "derived";
    let mut proof_file = Value::Null;
    if let (true, Some(out)) = (ok, out) {
        let doc = ProofDocument::new(&calc, &ctx, goal_text, s.depth, &proofs, &axiom_sources(vpath, &vf));
        let body = serde_json::to_string_pretty(&doc).expect("proof documents serialize");
        std::fs::write(out, body + "\n").map_err(|source| CliError::Io { path: out.to_path_buf(), source })?;
        writeln!(text, "proof written to {}", out.display()).unwrap();
        proof_file = json!(out.display().to_string());
    }
    let result = json!({
        "goal": goal_text,
        "depth": s.depth,
        "scope": if relevant { "relevant" } else { "full" },
        "outcome": outcome,
        "judgements": rows,
        "proof_file": proof_file,
    });
    Ok(Report::new(ok, text, result))
}

pub fn read_document(path: &Path) -> CliResult<ProofDocument> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Json { path: path.to_path_buf(), message: e.to_string() })
}

fn cmd_check_proof(s: &Session, vpath: &Path, cpath: &Path, ppath: &Path) -> CliResult<Report> {
    let (v, _) = s.variety(vpath)?;
    let ctx = s.model(cpath, v.signature().theory())?;
    let doc = read_document(ppath)?;
    if doc.variety != v.name {
        return Err(CliError::Usage(format!("proof is for variety `{}`, not `{}`", doc.variety, v.name)));
    }
    let theory = v.signature().theory();
    if doc.context.points != ctx.points() || doc.context.edges != rendered_edges(theory, &ctx) {
        return Err(CliError::Usage(format!("proof context differs from {}", cpath.display())));
    }
    let proofs = doc.proofs().map_err(|source| CliError::Document { path: ppath.to_path_buf(), source })?;
    let calc = Calculus::new(Arc::clone(&v))?;
    let mut error = None;
    for (i, p) in proofs.iter().enumerate() {
        if let Err(e) = check_proof(&calc, &ctx, p) {
            error = Some(format!("root {i}: {e}"));
            break;
        }
    }
    let text = match &error {
        None => format!("proof of `{}` checks ({} nodes, {} roots)\n", doc.goal, doc.nodes.len(), doc.roots.len()),
        Some(e) => format!("proof rejected: {e}\n"),
    };
    let result = json!({
        "goal": doc.goal,
        "valid": error.is_none(),
        "nodes": doc.nodes.len(),
        "roots": doc.roots.len(),
        "error": error,
    });
    Ok(Report::new(error.is_none(), text, result))
}

fn cmd_free(s: &Session, vpath: &Path, xpath: &Path) -> CliResult<Report> {
    let (v, _) = s.variety(vpath)?;
    let x = s.model(xpath, v.signature().theory())?;
    let fx = free_algebra(&v, &x, s.depth, s.budget)?;
    let theory = v.signature().theory();
    let carrier = fx.carrier();
    let elements: Vec<&str> = carrier.points().iter().map(String::as_str).collect();
    let mut text = format!(
        "{} elements at depth {} ({})\n",
        fx.len(),
        s.depth,
        if fx.stabilized() { "stabilized" } else { "not stabilized" }
    );
    for e in &elements {
        writeln!(text, "  {e}").unwrap();
    }
    let unit: Vec<Value> = fx
        .unit()
        .iter()
        .enumerate()
        .map(|(p, &c)| json!({ "point": x.point_name(p), "class": elements[c] }))
        .collect();
    text.push_str("unit\n");
    for (p, &c) in fx.unit().iter().enumerate() {
        writeln!(text, "  {} -> {}", x.point_name(p), elements[c]).unwrap();
    }
    let edges = rendered_edges(theory, carrier);
    text.push_str("edges\n");
    for e in &edges {
        writeln!(text, "  {e}").unwrap();
    }
    let sig = v.signature();
    let mut tables = Vec::new();
    text.push_str("operations\n");
    for (op, rows) in fx.tables().iter().enumerate() {
        let sym = sig.op(op);
        let mut entries = Vec::new();
        for (args, value) in rows {
            let shown = render_map(&sym.arity, carrier, args);
            let value = value.map(|c| elements[c]);
            writeln!(text, "  {}{shown} = {}", sym.name, value.unwrap_or("-")).unwrap();
            entries.push(json!({ "args": shown, "value": value }));
        }
        tables.push(json!({ "op": sym.name, "entries": entries }));
    }
    let result = json!({
        "depth": s.depth,
        "stabilized": fx.stabilized(),
        "elements": elements,
        "unit": unit,
        "edges": edges,
        "tables": tables,
    });
    Ok(Report::new(true, text, result))
}

fn cmd_check_algebra(s: &Session, vpath: &Path, apath: &Path) -> CliResult<Report> {
    let (v, _) = s.variety(vpath)?;
    let a = parse_algebra(&read(apath)?, &v, s.budget).map_err(at(apath))?;
    for ax in v.axioms() {
        if let Some(e) = counterexample(&a, ax, s.budget)? {
            let shown = render_map(&ax.context, a.carrier(), &e);
            let text = format!("axiom `{}` fails at {shown}\n", ax.name);
            let result = json!({ "in_variety": false, "axiom": ax.name, "assignment": shown });
            return Ok(Report::new(false, text, result));
        }
    }
    let text = format!("algebra satisfies all {} axioms of {}\n", v.axioms().len(), v.name);
    Ok(Report::new(true, text, json!({ "in_variety": true, "axiom": null, "assignment": null })))
}

fn law_text(r: &relat_core::extract::LawReport) -> String {
    let mut text = format!(
        "{} objects: {} unit, {} extension, {} composition checks, {} enriched pairs\n",
        r.objects, r.unit_checks, r.extension_checks, r.composition_checks, r.enriched_pairs
    );
    for v in &r.violations {
        writeln!(text, "  violation {}: {}", v.law, v.witness).unwrap();
    }
    text
}

fn cmd_monad_laws(s: &Session, vpath: &Path, objects: &[PathBuf]) -> CliResult<Report> {
    let (v, _) = s.variety(vpath)?;
    let theory = v.signature().theory();
    let objs: Vec<PreStructure> = objects.iter().map(|p| s.model(p, theory)).collect::<CliResult<_>>()?;
    let report = check_monad_laws(&v, &objs, s.depth, s.budget)?;
    let result = serde_json::to_value(&report).expect("reports serialize");
    Ok(Report::new(report.passes(), law_text(&report), result))
}

/// Monad named by an oracle manifest.
enum ManifestMonad {
    Free { variety: PathBuf, depth: Option<usize> },
    Identity { theory: String },
}

/// Oracle name, monad and named arities.
type Manifest = (String, ManifestMonad, Vec<(String, PreStructure)>);

/// Reads an oracle manifest:
///
/// ```text
/// oracle NAME
/// monad free VARIETY-FILE [depth N]  |  monad identity THEORY
/// structure NAME            # inline arity blocks, as in variety files
/// points ...
/// arity NAME-OR-FILE
/// ```
fn read_manifest(s: &Session, path: &Path) -> CliResult<Manifest> {
    let text = read(path)?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut name = None;
    let mut monad = None;
    let mut blocks: BTreeMap<String, (String, Vec<String>)> = BTreeMap::new();
    let mut current: Option<String> = None;
    let mut arity_refs = Vec::new();
    let err = |line, col, m: String| at(path)(error_at(line, col, m));
    for (ln, line) in lines(&text) {
        let mut c = Cursor::new(ln, line);
        let col = c.column_after_ws();
        let kw = c.name().map_err(at(path))?;
        if name.is_none() {
            if kw != "oracle" {
                return Err(err(ln, col, "expected `oracle <name>`".into()));
            }
            name = Some(c.name().map_err(at(path))?.to_string());
            c.expect_end().map_err(at(path))?;
            continue;
        }
        if let Some(b) = current.as_ref().and_then(|n| blocks.get_mut(n)) {
            if kw == "points" || kw == "edge" {
                b.1.push(line.to_string());
                continue;
            }
        }
        current = None;
        match kw {
            "monad" => {
                let kcol = c.column_after_ws();
                match c.name().map_err(at(path))? {
                    "free" => {
                        let v = dir.join(c.word().map_err(at(path))?);
                        let depth = if c.eat_word("depth") {
                            let dcol = c.column_after_ws();
                            let d = c.rest();
                            Some(d.parse().map_err(|_| err(ln, dcol, format!("`{d}` is not a depth")))?)
                        } else {
                            None
                        };
                        monad = Some(ManifestMonad::Free { variety: v, depth });
                    }
                    "identity" => monad = Some(ManifestMonad::Identity { theory: c.name().map_err(at(path))?.to_string() }),
                    other => return Err(err(ln, kcol, format!("unknown monad `{other}`"))),
                }
                c.expect_end().map_err(at(path))?;
            }
            "structure" => {
                let n = c.name().map_err(at(path))?.to_string();
                c.expect_end().map_err(at(path))?;
                blocks.insert(n.clone(), (String::new(), Vec::new()));
                current = Some(n);
            }
            "arity" => {
                let rcol = c.column_after_ws();
                arity_refs.push((ln, rcol, c.word().map_err(at(path))?.to_string()));
                c.expect_end().map_err(at(path))?;
            }
            other => return Err(err(ln, col, format!("unknown declaration `{other}`"))),
        }
    }
    let name = name.ok_or_else(|| err(1, 1, "empty manifest".into()))?;
    let monad = monad.ok_or_else(|| err(1, 1, "missing `monad` line".into()))?;
    let theory = match &monad {
        ManifestMonad::Free { variety, .. } => s.variety(variety)?.0.signature().theory().name.clone(),
        ManifestMonad::Identity { theory } => theory.clone(),
    };
    let mut arities = Vec::new();
    for (ln, col, r) in arity_refs {
        let pre = match blocks.get(&r) {
            Some((_, body)) => {
                let src = format!("structure {r} over {theory}\n{}", body.join("\n"));
                parse_structure(&src, &s.lib).map_err(|e| err(ln, col, format!("structure `{r}`: {}", e.message)))?.pre
            }
            None => {
                let p = dir.join(&r);
                if !p.is_file() {
                    return Err(err(ln, col, format!("unknown structure `{r}`")));
                }
                s.structure(&p)?.pre
            }
        };
        let t = s.lib.get(&theory).ok_or_else(|| err(ln, col, format!("unknown theory `{theory}`")))?;
        arities.push((r.clone(), generated_model(&t, &pre, ln, &format!("arity `{r}`")).map_err(at(path))?));
    }
    Ok((name, monad, arities))
}

fn cmd_extract(s: &Session, path: &Path) -> CliResult<Report> {
    let (name, monad, arities) = read_manifest(s, path)?;
    let objects: Vec<PreStructure> = arities.iter().map(|(_, a)| a.clone()).collect();
    let oracle: Box<dyn MonadOracle> = match monad {
        ManifestMonad::Free { variety, depth } => {
            let (v, _) = s.variety(&variety)?;
            let m = FreeMonad::new(&v, depth.unwrap_or(s.depth), s.budget)?;
            for a in &objects {
                m.stable(a)?;
            }
            Box::new(m)
        }
        ManifestMonad::Identity { theory } => {
            let theory = s.lib.get(&theory).ok_or_else(|| CliError::Usage(format!("unknown theory `{theory}`")))?;
            Box::new(IdentityMonad { theory })
        }
    };
    let induced = induce_theory(oracle.as_ref(), &objects, s.budget)?;
    let sig = induced.variety.signature();
    let counts = [AxiomFamily::Edge, AxiomFamily::Extension, AxiomFamily::Unit].map(|f| induced.family_count(f));
    let mut text = format!(
        "oracle {name}: {} operations, {} edge, {} extension, {} unit axioms\n",
        sig.len(),
        counts[0],
        counts[1],
        counts[2]
    );
    let mut rows = Vec::new();
    for (i, (r, _)) in arities.iter().enumerate() {
        let ops: Vec<&str> = induced.ops[i].iter().map(|&op| sig.op(op).name.as_str()).collect();
        writeln!(text, "  arity {r}: {}", ops.join(" ")).unwrap();
        rows.push(json!({ "arity": r, "size": induced.objects[i].size(), "operations": ops }));
    }
    let result = json!({
        "oracle": name,
        "operations": sig.len(),
        "axioms": { "edge": counts[0], "extension": counts[1], "unit": counts[2] },
        "arities": rows,
    });
    Ok(Report::new(true, text, result))
}

fn cmd_roundtrip(s: &Session, vpath: &Path, arity_paths: &[PathBuf], bound: usize) -> CliResult<Report> {
    let (v, _) = s.variety(vpath)?;
    let theory = v.signature().theory();
    let arities: Vec<PreStructure> = arity_paths.iter().map(|p| s.model(p, theory)).collect::<CliResult<_>>()?;
    let r = relat_core::extract::verify_roundtrip(&v, &arities, s.depth, bound, s.budget)?;
    let mut text = format!(
        "{} arities, {} operations, axioms {} edge / {} extension / {} unit\n{} algebras, {} extensions checked\n",
        r.arities, r.operations, r.axioms[0], r.axioms[1], r.axioms[2], r.algebras, r.extensions
    );
    for (i, ax) in &r.canonical_violations {
        writeln!(text, "  canonical algebra {i} violates {ax}").unwrap();
    }
    for w in &r.violations {
        writeln!(text, "  {w}").unwrap();
    }
    let result = serde_json::to_value(&r).expect("reports serialize");
    Ok(Report::new(r.passes(), text, result))
}

fn cmd_fuzz(s: &Session, vpath: &Path, cpath: &Path, count: usize) -> CliResult<Report> {
    let (v, vf) = s.variety(vpath)?;
    let ctx = s.model(cpath, v.signature().theory())?;
    let calc = Calculus::new(Arc::clone(&v))?;
    let bank = saturate_judgements(&v, &ctx, s.depth)?;
    let mut pool = bank.judgements();
    pool.sort();
    pool.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut proofs = 0;
    let mut mutants = 0;
    let mut by_kind: BTreeMap<&str, usize> = BTreeMap::new();
    let mut accepted = Vec::new();
    let sources = axiom_sources(vpath, &vf);
    for _ in 0..count {
        let Some(j) = pool.choose(&mut rng) else { break };
        let Some(p) = bank.proof(j)? else { continue };
        let doc = ProofDocument::new(&calc, &ctx, &j.render(&calc, ctx.points()), s.depth, &[p], &sources);
        let json = serde_json::to_string(&doc).expect("proof documents serialize");
        let back: ProofDocument = serde_json::from_str(&json).expect("proof documents deserialize");
        let p = back.proofs().expect("document from a proof")[0].clone();
        check_proof(&calc, &ctx, &p)?;
        proofs += 1;
        for (path, m) in mutation_sites(&calc, &ctx, &p) {
            mutants += 1;
            let bad = apply_mutation(&p, &path, &m, ctx.size());
            if check_proof(&calc, &ctx, &bad).is_ok() {
                accepted.push(format!("{} at {path:?} of {}", m.kind(), j.render(&calc, ctx.points())));
            } else {
                *by_kind.entry(m.kind()).or_default() += 1;
            }
        }
    }
    let mut text = format!(
        "{count} queries over {} judgements, {proofs} proofs checked, {mutants} mutants, {} rejected\n",
        pool.len(),
        mutants - accepted.len()
    );
    for (k, n) in &by_kind {
        writeln!(text, "  {k}: {n} rejected").unwrap();
    }
    for a in &accepted {
        writeln!(text, "  accepted mutant: {a}").unwrap();
    }
    let result = json!({
        "seed": s.seed,
        "queries": count,
        "judgements": pool.len(),
        "proofs": proofs,
        "mutants": mutants,
        "rejected": by_kind,
        "accepted": accepted,
    });
    Ok(Report::new(accepted.is_empty(), text, result))
}
