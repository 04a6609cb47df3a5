mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use common::{fixture, graph, seeds, sigma, REGULAR_FIXTURES};
use proptest::prelude::*;
use sprec::grammar::{parse_grammar, Grammar, Kind, Rule};
use sprec::oracle::{language_upto, random_grammar};
use sprec::recognizer::{
    accepts, bridge_profile, build_ctx, eval_graph, member, op_parallel, op_serial, par_map, reachable_profiles, seq_map,
    Profile, RecognizerCtx,
};
use sprec::spgraph::{canonicalize, enumerate_graphs, Label, SPGraph, SPTerm};
use sprec::termalg::{nf_monomial, weighted_card, Var, VarClass};
use sprec::Error;

const UNIV_A: &str = "alphabet: a\npnonterminals: p\nsnonterminals: s\naxioms: p s\nrules:\n\
    p -> p || s\np -> s || s\ns -> p . s\ns -> p . p\np -> a\ns -> a\n";

fn label(a: &str) -> Label {
    Label::new(a).unwrap()
}

fn show_pairs(ctx: &RecognizerCtx, x: &Profile) -> Vec<String> {
    let Profile::S(y) = x else { panic!("expected an S-profile") };
    ctx.pairs(y).iter().map(|(s, t)| format!("{s}>{t}")).collect()
}

fn closure(name: &str) -> (RecognizerCtx, Vec<Profile>) {
    let ctx = build_ctx(&fixture(name)).unwrap();
    let c = reachable_profiles(&ctx, 10_000);
    assert!(c.saturated, "{name}");
    (ctx, c.profiles)
}

#[test]
fn conversion_maps_on_the_universal_grammar() {
    let ctx = build_ctx(&parse_grammar(UNIV_A).unwrap()).unwrap();
    let a = Profile::S(bridge_profile(&label("a"), &ctx).unwrap());
    assert_eq!(ctx.render_term(&par_map(&a, &ctx)[0]), "1 + $alt_a + s$1");
    let aa = Profile::P(op_parallel(&a, &a, &ctx));
    assert_eq!(show_pairs(&ctx, &Profile::S(seq_map(&aa, &ctx))), ["s>p", "s>s", "s$1>p", "s$1>s"]);
    assert_eq!(seq_map(&a, &ctx), bridge_profile(&label("a"), &ctx).unwrap());
    let a_then_a = Profile::S(op_serial(&a, &a, &ctx));
    assert!(show_pairs(&ctx, &a_then_a).contains(&"s>⊥".to_string()));
    assert!(accepts(&a_then_a, &ctx));
    assert_eq!(eval_graph(&graph("a . a"), &ctx).unwrap(), a_then_a);
    let mono: Vec<String> = ctx.accepting_monomials(0).iter().map(|m| m.render(&|v| ctx.var_name(v))).collect();
    assert_eq!(mono, ["$alt_a", "s$1^2"]);
}

#[test]
fn small_grammars() {
    let only_f = parse_grammar("alphabet: a\nsnonterminals: s\naxioms: s\nrules:\ns -> a\n").unwrap();
    let ctx = build_ctx(&only_f).unwrap();
    assert_eq!(show_pairs(&ctx, &Profile::S(bridge_profile(&label("a"), &ctx).unwrap())), ["s>⊥"]);
    let c = reachable_profiles(&ctx, 100);
    assert!(c.saturated);
    assert_eq!((c.s_count(), c.p_count()), (2, 1));
    assert!(member(&graph("a"), &only_f).unwrap());
    assert!(!member(&graph("a . a"), &only_f).unwrap());
    assert!(matches!(member(&graph("b"), &only_f), Err(Error::UnknownLabel(_))));
    let no_axioms = parse_grammar("alphabet: a\nsnonterminals: s\nrules:\ns -> a\n").unwrap();
    assert!(!member(&graph("a"), &no_axioms).unwrap());
    assert!(build_ctx(&fixture("free")).is_err());
}

#[test]
fn universal_grammar_accepts_small_graphs() {
    let ctx = build_ctx(&fixture("univ_ab")).unwrap();
    for g in enumerate_graphs(&sigma(&["a", "b"]), 5) {
        assert!(accepts(&eval_graph(&g, &ctx).unwrap(), &ctx), "{g}");
    }
}

#[test]
fn closure_terms_respect_the_size_bounds() {
    for name in REGULAR_FIXTURES {
        let (ctx, profiles) = closure(name);
        let ns = ctx.s_names().len();
        for p in 0..ctx.p_names().len() {
            let pctx = ctx.context(p);
            let classes: Vec<VarClass> = pctx.vars().map(|(_, c)| c).collect();
            let theta = classes
                .iter()
                .map(|c| match *c {
                    VarClass::Bounded(b) | VarClass::Periodic(b) | VarClass::Threshold(b) => b as usize,
                })
                .max()
                .unwrap_or(1);
            let weight = weighted_card(pctx.vars().map(|(v, _)| v), pctx).unwrap() as usize;
            for x in profiles.iter() {
                let Profile::P(y) = x else { continue };
                let t = &y.terms()[p];
                assert!(t.len() <= theta.pow(ns as u32), "{name}");
                for m in t.monomials() {
                    assert!(m.degree() as usize <= weight, "{name}: {}", ctx.render(x));
                    assert!(m.degree() as usize <= theta * ns, "{name}");
                    assert!(m.vars().all(|v| pctx.class(v).is_some()), "{name}");
                }
            }
        }
    }
}

#[test]
fn operations_are_associative_and_commutative_on_closures() {
    for name in REGULAR_FIXTURES {
        let (ctx, xs) = closure(name);
        let par = |a: &Profile, b: &Profile| Profile::P(op_parallel(a, b, &ctx));
        let ser = |a: &Profile, b: &Profile| Profile::S(op_serial(a, b, &ctx));
        for a in &xs {
            for b in &xs {
                assert_eq!(par(a, b), par(b, a), "{name}");
                for c in &xs {
                    assert_eq!(par(&par(a, b), c), par(a, &par(b, c)), "{name}");
                    assert_eq!(ser(&ser(a, b), c), ser(a, &ser(b, c)), "{name}");
                }
            }
        }
    }
}

#[test]
fn equal_profiles_mean_equal_membership() {
    let mut grammars: Vec<Grammar> = REGULAR_FIXTURES.iter().map(|f| fixture(f)).collect();
    grammars.extend(seeds(20).map(random_grammar));
    for g in grammars {
        let ctx = build_ctx(&g).unwrap();
        let lang = language_upto(&g, 5);
        let mut verdict: HashMap<Profile, (bool, SPGraph)> = HashMap::new();
        for w in enumerate_graphs(g.alphabet(), 5) {
            let x = eval_graph(&w, &ctx).unwrap();
            let inside = lang.contains(&w);
            assert_eq!(accepts(&x, &ctx), inside, "{w}\n{g}");
            if let Some((seen, other)) = verdict.get(&x) {
                assert_eq!(*seen, inside, "{w} and {other}\n{g}");
            } else {
                verdict.insert(x, (inside, w));
            }
        }
    }
}

/// Monomials `m` with `p ⇝* m`, using at most `steps` A-rules before a B- or
/// Alt-rule ends the derivation.
fn derived_monomials(g: &Grammar, p: &str, steps: usize) -> BTreeSet<BTreeMap<String, u64>> {
    let mut out = BTreeSet::new();
    let mut frontier = vec![BTreeMap::<String, u64>::new()];
    for _ in 0..=steps {
        let mut next = Vec::new();
        for m in &frontier {
            for r in g.rules_of(p) {
                let mut m = m.clone();
                match r {
                    Rule::A { s, ell, .. } => {
                        *m.entry(s.to_string()).or_default() += *ell as u64;
                        next.push(m);
                    }
                    Rule::B { body, .. } => {
                        for (s, e) in body {
                            *m.entry(s.to_string()).or_default() += *e as u64;
                        }
                        out.insert(m);
                    }
                    Rule::Alt { s, .. } => {
                        *m.entry(s.to_string()).or_default() += 1;
                        out.insert(m);
                    }
                    _ => {}
                }
            }
        }
        frontier = next;
    }
    out
}

#[test]
fn complete_derivations_reduce_to_accepting_monomials() {
    let mut grammars: Vec<Grammar> = REGULAR_FIXTURES.iter().map(|f| fixture(f)).collect();
    grammars.extend(seeds(30).map(random_grammar));
    for g in grammars {
        let ctx = build_ctx(&g).unwrap();
        let alt = ctx.grammar();
        for (p, name) in ctx.p_names().iter().enumerate() {
            let pctx = ctx.context(p);
            let mut reached = BTreeSet::new();
            for m in derived_monomials(alt, name, 4) {
                let raw: BTreeMap<Var, u64> = m.iter().map(|(s, e)| (ctx.s_var(s).unwrap(), *e)).collect();
                let reduced = nf_monomial(&raw, pctx).unwrap().expect("derived monomials survive");
                assert!(ctx.accepting_monomials(p).contains(&reduced), "{name}\n{alt}");
                reached.insert(reduced);
            }
            for m in ctx.accepting_monomials(p) {
                assert!(reached.contains(m), "{name}\n{alt}");
            }
        }
    }
    assert!(build_ctx(&fixture("ladders")).unwrap().grammar().names_of_kind(Kind::P).count() > 0);
}

fn fold_term(t: &SPTerm, ctx: &RecognizerCtx) -> Profile {
    match t {
        SPTerm::Bridge(a) => Profile::S(bridge_profile(a, ctx).unwrap()),
        SPTerm::Serial(l, r) => Profile::S(op_serial(&fold_term(l, ctx), &fold_term(r, ctx), ctx)),
        SPTerm::Parallel(l, r) => Profile::P(op_parallel(&fold_term(l, ctx), &fold_term(r, ctx), ctx)),
    }
}

fn term_strategy() -> impl Strategy<Value = SPTerm> {
    let leaf = prop_oneof![Just("a"), Just("b")].prop_map(|a| SPTerm::bridge(&label(a)));
    leaf.prop_recursive(4, 12, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(l, r)| SPTerm::serial(l, r)),
            (inner.clone(), inner).prop_map(|(l, r)| SPTerm::parallel(l, r)),
        ]
    })
}

proptest! {
    #[test]
    fn evaluation_ignores_the_term_shape(t in term_strategy(), which in 0usize..4) {
        let name = ["univ_ab", "ladders", "period3", "gab"][which];
        let ctx = build_ctx(&fixture(name)).unwrap();
        prop_assert_eq!(eval_graph(&canonicalize(&t), &ctx).unwrap(), fold_term(&t, &ctx));
    }
}
