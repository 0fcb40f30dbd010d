use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;
use relat_core::catalog;
use relat_core::horn::{builtin, reflect, saturate, Edge, EdgeSet, PreStructure};
use relat_core::logic::*;
use relat_core::par::Budget;
use relat_core::sigma::{carrier_palette, enumerate_algebras, terms_up_to, Palette, SigmaAlgebra, Term, Variety};
use relat_core::structops::hom_maps;
use relat_core::{Bound, Rat};

fn names(n: &[&str]) -> Vec<String> {
    n.iter().map(|s| s.to_string()).collect()
}

fn join(a: Term, b: Term) -> Term {
    Term::App(0, vec![a, b])
}

fn x() -> Term {
    Term::Var(0)
}

fn y() -> Term {
    Term::Var(1)
}

fn le(a: Term, b: Term) -> Judgement {
    Judgement::rel(0, None, vec![a, b])
}

fn calc(v: &Arc<Variety>) -> Arc<Calculus> {
    Arc::new(Calculus::new(Arc::clone(v)).unwrap())
}

fn semilattice() -> Arc<Variety> {
    Arc::new(catalog::semilattice().unwrap())
}

fn two_points() -> PreStructure {
    reflect(&Arc::new(builtin::pos().unwrap()), &PreStructure::discrete(["x", "y"])).model.into_underlying()
}

fn metric_pair(d: Rat) -> PreStructure {
    catalog::metric_context(&["x", "y"], &[vec![Rat::ZERO, d], vec![d, Rat::ZERO]]).unwrap().0
}

fn rules(p: &Proof) -> BTreeSet<&'static str> {
    p.nodes().into_iter().map(|(_, n)| n.rule.name()).collect()
}

fn proved(r: Derived) -> Arc<Proof> {
    match r {
        Derived::Proof(p) => p,
        other => panic!("expected a proof, got {other:?}"),
    }
}

fn check_all(bank: &JudgementBank) {
    for p in bank.all_proofs().unwrap() {
        check_proof(bank.calculus(), bank.context(), &p).unwrap();
    }
}

#[test]
fn empty_signature_closes_context_edges() {
    let pos = Arc::new(builtin::pos().unwrap());
    let v = Arc::new(catalog::empty_variety(Arc::clone(&pos)).unwrap());
    let chain = PreStructure::discrete(["x", "y"]).with_edges([Edge::plain(0, vec![0, 1])].into_iter().collect());
    let bank = saturate_judgements(&v, &chain, 3).unwrap();
    assert!(bank.complete());
    let expected = saturate(&pos, &chain).edges();
    let mut got = EdgeSet::new();
    for j in bank.judgements() {
        match j {
            Judgement::Def(t) => assert!(matches!(t, Term::Var(_))),
            Judgement::Rel { sym, terms, .. } => {
                let pts = terms.iter().map(|t| match t {
                    Term::Var(i) => *i,
                    _ => panic!("no operations"),
                });
                got.insert(Edge::plain(sym, pts.collect()));
            }
        }
    }
    assert_eq!(got, expected);
    assert_eq!(bank.defined().len(), 2);
    for p in bank.all_proofs().unwrap() {
        assert!(rules(&p).iter().all(|r| ["Var", "Ctx", "RelAx"].contains(r)));
    }
    check_all(&bank);
}

#[test]
fn semilattice_bank_at_depth_two() {
    let v = semilattice();
    let ctx = two_points();
    let bank = saturate_judgements(&v, &ctx, 2).unwrap();
    assert!(bank.complete());
    let xy = join(x(), y());
    assert!(bank.holds(&Judgement::Def(xy.clone())));
    assert!(bank.holds(&le(x(), xy.clone())));
    let deeper = join(xy.clone(), y());
    assert!(bank.holds(&le(deeper.clone(), xy.clone())) && bank.holds(&le(xy.clone(), deeper)));
    assert!(!bank.holds(&le(xy.clone(), x())));
    assert!(!bank.holds(&le(x(), y())));
    assert_eq!(bank.classes().len(), 3);
    check_all(&bank);
}

#[test]
fn depth_bound_is_reported() {
    let v = semilattice();
    let bank = saturate_judgements(&v, &two_points(), 1).unwrap();
    assert!(!bank.complete());
    let bank = saturate_judgements(&v, &two_points(), 2).unwrap();
    assert!(bank.complete());
}

#[test]
fn cauchy_limit_judgements() {
    let k = 8;
    let v = Arc::new(catalog::cauchy_limit(k).unwrap());
    let c = calc(&v);
    let names = catalog::cauchy_names(k);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let (ctx, _) = catalog::metric_context(&refs, &catalog::cauchy_distances(k)).unwrap();
    let lim = Term::App(0, (0..k).map(Term::Var).collect());
    let quarter = Rat::frac(1, 4);
    for n in 4..=k {
        let goal = Judgement::rel(0, Some(quarter), vec![lim.clone(), Term::Var(n - 1)]);
        let p = proved(derive(&c, &ctx, &goal, &BankConfig::relevant(2, vec![])).unwrap());
        assert_eq!(p.conclusion, goal);
        check_proof(&c, &ctx, &p).unwrap();
    }
    let goal = Judgement::rel(0, Some(quarter), vec![lim.clone(), Term::Var(2)]);
    assert_eq!(derive(&c, &ctx, &goal, &BankConfig::relevant(2, vec![])).unwrap(), Derived::Exhausted);
}

#[test]
fn variable_definedness_is_one_node() {
    let v = semilattice();
    let p = proved(derive(&calc(&v), &two_points(), &Judgement::Def(x()), &BankConfig::depth(0)).unwrap());
    assert_eq!(p.size(), 1);
    assert_eq!(p.rule, Rule::Var);
}

#[test]
fn join_commutes_through_axioms() {
    let v = semilattice();
    let c = calc(&v);
    let ctx = two_points();
    let (xy, yx) = (join(x(), y()), join(y(), x()));
    for goal in [le(xy.clone(), yx.clone()), le(yx, xy)] {
        let p = proved(derive(&c, &ctx, &goal, &BankConfig::depth(1)).unwrap());
        assert_eq!(p.conclusion, goal);
        check_proof(&c, &ctx, &p).unwrap();
        // least(x, y; z = y∨x) over the two upper-bound instances
        assert!(matches!(&p.rule, Rule::Ax { name, .. } if name == "least"));
        let mut uppers: Vec<&str> = p.premises[..2]
            .iter()
            .map(|q| match &q.rule {
                Rule::Ax { name, .. } => name.as_str(),
                other => other.name(),
            })
            .collect();
        uppers.sort();
        assert_eq!(uppers, ["upper-left", "upper-right"]);
    }
}

#[test]
fn missing_context_edge_is_never_derived() {
    let pos = Arc::new(builtin::pos().unwrap());
    let v = Arc::new(catalog::empty_variety(pos).unwrap());
    let c = calc(&v);
    let ctx = two_points();
    for depth in 0..4 {
        assert_eq!(derive(&c, &ctx, &le(x(), y()), &BankConfig::depth(depth)).unwrap(), Derived::Absent);
    }
}

#[test]
fn forged_context_edge_is_rejected() {
    let v = semilattice();
    let c = calc(&v);
    let ctx = two_points();
    let p = proved(derive(&c, &ctx, &le(x(), join(x(), y())), &BankConfig::depth(1)).unwrap());
    check_proof(&c, &ctx, &p).unwrap();
    let forged = Proof { conclusion: le(x(), y()), rule: Rule::Ctx, premises: vec![] };
    let err = check_proof(&c, &ctx, &forged).unwrap_err();
    assert!(err.to_string().contains("(Ctx)"), "{err}");
}

fn guarded_iar_proof() -> (Arc<Calculus>, PreStructure, Arc<Proof>) {
    let v = Arc::new(catalog::met_guarded().unwrap());
    let c = calc(&v);
    let ctx = metric_pair(Rat::frac(1, 2));
    let bank = JudgementBank::build(Arc::clone(&c), &ctx, &BankConfig::depth(2)).unwrap();
    let p = bank
        .all_proofs()
        .unwrap()
        .into_iter()
        .find(|p| matches!(p.rule, Rule::IAr { .. }))
        .expect("an (I-Ar) instance");
    (c, ctx, p)
}

#[test]
fn iar_without_arity_edge_is_rejected() {
    let (c, ctx, p) = guarded_iar_proof();
    check_proof(&c, &ctx, &p).unwrap();
    let Rule::IAr { axiom, position, path, edge, subst } = p.rule.clone() else { unreachable!() };
    let tighter = Edge { index: edge.index.map(|_| Bound::closed(Rat::ZERO)), ..edge.clone() };
    let mut bad = (*p).clone();
    bad.rule = Rule::IAr { axiom, position, path, edge: Edge { points: vec![0, 1], ..tighter }, subst };
    if let Judgement::Rel { index, .. } = &mut bad.conclusion {
        *index = Some(Rat::ZERO);
    }
    let err = check_proof(&c, &ctx, &bad).unwrap_err();
    assert!(err.to_string().contains("does not satisfy"), "{err}");
}

#[test]
fn arity_rule_extracts_the_premise() {
    let (c, ctx, _) = guarded_iar_proof();
    let bank = JudgementBank::build(Arc::clone(&c), &ctx, &BankConfig::depth(1)).unwrap();
    let pair = Term::App(1, vec![x(), y()]);
    let def = bank.proof(&Judgement::Def(pair)).unwrap().expect("c(x,y) is defined");
    assert_eq!(def.rule.name(), "E-Ar");
    let arity = &c.variety.signature().op(1).arity;
    for e in arity.edges().iter() {
        let p = admissible_arity(&c, &def, &e).unwrap();
        check_proof(&c, &ctx, &p).unwrap();
        let want = Judgement::rel(e.sym, e.index.map(|b| b.value), e.points.iter().map(|&i| [x(), y()][i].clone()).collect());
        assert!(p.conclusion.implies(&want));
    }
}

#[test]
fn subterm_rule_covers_every_subterm() {
    let v = semilattice();
    let bank = saturate_judgements(&v, &two_points(), 2).unwrap();
    let c = bank.calculus();
    let mut ax_nodes = 0;
    for p in bank.all_proofs().unwrap() {
        if matches!(p.rule, Rule::Ax { .. }) {
            ax_nodes += 1;
        }
        for t in p.conclusion.terms() {
            for u in t.subterms() {
                let q = admissible_subterm(c, &p, u).unwrap();
                assert_eq!(q.conclusion, Judgement::Def(u.clone()));
                check_proof(c, bank.context(), &q).unwrap();
                if matches!(u, Term::Var(_)) {
                    assert_eq!(q.rule, Rule::Var);
                }
            }
        }
        assert!(admissible_subterm(c, &p, &join(y(), join(y(), y()))).is_err() || p.conclusion.terms().iter().any(|t| t.depth() > 1));
    }
    assert!(ax_nodes > 0);
}

#[test]
fn subterm_of_axiom_conclusion_rebuilds_definedness() {
    // the I-Ar route: the subterm is an operation instance of the axiom term
    let v = semilattice();
    let c = calc(&v);
    let ax_proof = Arc::new(Proof {
        conclusion: le(x(), join(x(), y())),
        rule: Rule::Ax { axiom: 0, name: "upper-left".into(), subst: vec![x(), y()] },
        premises: vec![
            Arc::new(Proof { conclusion: Judgement::Def(x()), rule: Rule::Var, premises: vec![] }),
            Arc::new(Proof { conclusion: Judgement::Def(y()), rule: Rule::Var, premises: vec![] }),
        ],
    });
    let ctx = two_points();
    check_proof(&c, &ctx, &ax_proof).unwrap();
    let q = admissible_subterm(&c, &ax_proof, &join(x(), y())).unwrap();
    check_proof(&c, &ctx, &q).unwrap();
    assert!(rules(&q).contains("I-Ar"));
}

#[test]
fn substitution_along_a_renaming() {
    let v = semilattice();
    let c = calc(&v);
    let ctx = two_points();
    let bank = JudgementBank::build(Arc::clone(&c), &ctx, &BankConfig::depth(1)).unwrap();
    let tau = vec![y(), x()];
    let defs: Vec<Arc<Proof>> = tau.iter().map(|t| bank.proof(&Judgement::Def(t.clone())).unwrap().unwrap()).collect();
    let edges: Vec<(Edge, Arc<Proof>)> = ctx
        .edges()
        .iter()
        .map(|e| {
            let j = Judgement::rel(e.sym, None, e.points.iter().map(|&p| tau[p].clone()).collect());
            (e, bank.proof(&j).unwrap().unwrap())
        })
        .collect();
    for p in bank.all_proofs().unwrap() {
        let q = admissible_substitute(&ctx, &tau, &defs, &edges, &p).unwrap();
        check_proof(&c, &ctx, &q).unwrap();
        assert_eq!(q.conclusion, p.conclusion.substitute(&tau));
        assert_eq!(q.size(), p.size());
    }
}

#[test]
fn substitution_into_a_join() {
    let v = semilattice();
    let c = calc(&v);
    let one = reflect(&Arc::new(builtin::pos().unwrap()), &PreStructure::discrete(["y"])).model.into_underlying();
    let target = reflect(&Arc::new(builtin::pos().unwrap()), &PreStructure::discrete(["x"])).model.into_underlying();
    let source_bank = JudgementBank::build(Arc::clone(&c), &one, &BankConfig::depth(2)).unwrap();
    let target_bank = JudgementBank::build(Arc::clone(&c), &target, &BankConfig { seeds: vec![join(join(x(), x()), join(x(), x()))], ..BankConfig::depth(2) }).unwrap();
    let tau = vec![join(x(), x())];
    let defs = vec![target_bank.proof(&Judgement::Def(tau[0].clone())).unwrap().unwrap()];
    let edges: Vec<(Edge, Arc<Proof>)> = one
        .edges()
        .iter()
        .map(|e| (e, target_bank.proof(&le(tau[0].clone(), tau[0].clone())).unwrap().unwrap()))
        .collect();
    let mut relational = 0;
    for p in source_bank.all_proofs().unwrap() {
        let q = admissible_substitute(&one, &tau, &defs, &edges, &p).unwrap();
        check_proof(&c, &target, &q).unwrap();
        assert!(target_bank.holds(&q.conclusion));
        relational += matches!(q.conclusion, Judgement::Rel { .. }) as usize;
    }
    assert!(relational > 0);
    // a missing premise is reported
    assert!(admissible_substitute(&one, &tau, &defs, &[], &source_bank.proof(&le(Term::Var(0), Term::Var(0))).unwrap().unwrap()).is_err());
}

#[test]
fn substitution_composes_axiom_instances() {
    let v = semilattice();
    let c = calc(&v);
    let ctx = two_points();
    let bank = JudgementBank::build(Arc::clone(&c), &ctx, &BankConfig::depth(1)).unwrap();
    let p = proved(derive(&c, &ctx, &le(x(), join(x(), y())), &BankConfig::depth(1)).unwrap());
    let tau = vec![x(), x()];
    let xx_ctx = ctx.clone();
    let defs = vec![bank.proof(&Judgement::Def(x())).unwrap().unwrap(); 2];
    let edges: Vec<(Edge, Arc<Proof>)> =
        xx_ctx.edges().iter().map(|e| (e, bank.proof(&le(x(), x())).unwrap().unwrap())).collect();
    let q = admissible_substitute(&xx_ctx, &tau, &defs, &edges, &p).unwrap();
    check_proof(&c, &ctx, &q).unwrap();
    let composed = q.nodes().into_iter().any(|(_, n)| matches!(&n.rule, Rule::Ax { subst, .. } if subst == &vec![x(), x()]));
    assert!(composed);
}

fn algebras(v: &Variety, bound: usize) -> Vec<SigmaAlgebra> {
    let carriers = carrier_palette(v.signature().theory(), bound, &Palette::default(), Budget::default()).unwrap();
    enumerate_algebras(v, &carriers, bound, Budget::default()).unwrap()
}

fn satisfied(a: &SigmaAlgebra, ctx: &PreStructure, j: &Judgement) -> bool {
    hom_maps(ctx, a.carrier(), Budget::default()).unwrap().iter().all(|e| match j {
        Judgement::Def(t) => a.evaluate(e, t).is_some(),
        Judgement::Rel { sym, index, terms } => {
            let vals: Option<Vec<usize>> = terms.iter().map(|t| a.evaluate(e, t)).collect();
            vals.is_some_and(|v| a.carrier().edges().contains(&Edge { sym: *sym, index: index.map(Bound::closed), points: v }))
        }
    })
}

#[test]
fn bank_judgements_hold_in_small_algebras() {
    let v = semilattice();
    let algs = algebras(&v, 3);
    assert!(!algs.is_empty());
    let bank = saturate_judgements(&v, &two_points(), 2).unwrap();
    for j in bank.judgements() {
        for a in &algs {
            assert!(satisfied(a, &two_points(), &j), "{j:?}");
        }
    }
}

#[test]
fn banks_grow_with_depth() {
    for v in [semilattice(), Arc::new(catalog::met_guarded().unwrap())] {
        let ctx = if v.name == "semilattice" { two_points() } else { metric_pair(Rat::frac(1, 2)) };
        let probes = terms_up_to(v.signature(), ctx.size(), 2);
        let mut prev: Option<JudgementBank> = None;
        for d in 0..4 {
            let bank = saturate_judgements(&v, &ctx, d).unwrap();
            if let Some(p) = &prev {
                for j in p.judgements() {
                    assert!(bank.holds(&j), "{j:?} lost at depth {d}");
                }
                for s in &probes {
                    if p.holds(&Judgement::Def(s.clone())) {
                        assert!(bank.holds(&Judgement::Def(s.clone())));
                    }
                }
            }
            prev = Some(bank);
        }
        assert!(prev.unwrap().complete());
    }
}

#[test]
fn cut_is_admissible_on_small_instances() {
    let v = semilattice();
    let ctx = two_points();
    let base = saturate_judgements(&v, &ctx, 2).unwrap();
    // j = x ≤ x∨y is derivable; adding it as a context fact changes nothing
    let extra = JudgementBank::build(
        calc(&v),
        &ctx,
        &BankConfig { seeds: vec![join(x(), y())], ..BankConfig::depth(2) },
    )
    .unwrap();
    for j in extra.judgements() {
        assert!(base.holds(&j));
    }
    // context-level cut: y ≤ x derivable from {x = y} means adding it is idle
    let pos = Arc::new(builtin::pos().unwrap());
    let eq = reflect(&pos, &PreStructure::discrete(["x", "y"]).with_edges([Edge::plain(0, vec![0, 1])].into_iter().collect()))
        .model
        .into_underlying();
    let with_j = eq.with_edges({
        let mut es = eq.edges().clone();
        es.insert(Edge::plain(0, vec![0, 0]));
        es
    });
    let a = saturate_judgements(&v, &eq, 2).unwrap();
    let b = saturate_judgements(&v, &with_j, 2).unwrap();
    for j in b.judgements() {
        assert!(a.holds(&j), "{j:?}");
    }
}

#[test]
fn proofs_serialize_and_replay() {
    let v = semilattice();
    let c = calc(&v);
    let ctx = two_points();
    let p = proved(derive(&c, &ctx, &le(join(y(), x()), join(x(), y())), &BankConfig::depth(1)).unwrap());
    let text = serde_json_roundtrip(&p);
    check_proof(&c, &ctx, &text).unwrap();
    assert_eq!(*text, *p);
    let listing = p.render(&c, &names(&["x", "y"]));
    assert!(listing.lines().next().unwrap().starts_with("le(join{x->y,y->x}, join{x->x,y->y})"));
}

fn serde_json_roundtrip(p: &Arc<Proof>) -> Arc<Proof> {
    let text = serde_json::to_string(p).unwrap();
    serde_json::from_str(&text).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn random_goals_replay(a in 0usize..6, b in 0usize..6, depth in 0usize..3) {
        let v = semilattice();
        let c = calc(&v);
        let ctx = two_points();
        let pool = terms_up_to(v.signature(), 2, 1);
        let goal = le(pool[a % pool.len()].clone(), pool[b % pool.len()].clone());
        match derive(&c, &ctx, &goal, &BankConfig::depth(depth)).unwrap() {
            Derived::Proof(p) => {
                check_proof(&c, &ctx, &p).unwrap();
                prop_assert!(p.conclusion.implies(&goal));
            }
            Derived::Absent => {
                let bank = saturate_judgements(&v, &ctx, 3).unwrap();
                prop_assert!(!bank.holds(&goal));
            }
            Derived::Exhausted => prop_assert!(depth < 2),
        }
    }

    #[test]
    fn metric_goals_replay(d in 1i64..=4, i in 0usize..4, j in 0usize..4, q in 0i64..=4) {
        let v = Arc::new(catalog::met_guarded().unwrap());
        let c = calc(&v);
        let ctx = metric_pair(Rat::frac(d, 4));
        let s = |t: Term| Term::App(0, vec![t]);
        let pool = [x(), y(), s(x()), s(y())];
        let goal = Judgement::rel(0, Some(Rat::frac(q, 4)), vec![pool[i].clone(), pool[j].clone()]);
        if let Derived::Proof(p) = derive(&c, &ctx, &goal, &BankConfig::depth(2)).unwrap() {
            check_proof(&c, &ctx, &p).unwrap();
            prop_assert!(p.conclusion.implies(&goal));
        }
    }
}
