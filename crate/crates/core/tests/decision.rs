mod common;

use std::collections::BTreeSet;

use common::*;
use sprec::decision::{
    bound_cardinality, derivable_values, filter_grammar, inclusion, intersection_empty, is_empty,
    productive_nonterminals, FilterMode,
};
use sprec::oracle::{language_upto, random_grammar};
use sprec::recognizer::{accepts, build_ctx, eval_graph, member, reachable_profiles};
use sprec::spgraph::{edge_count, SPGraph};
use sprec::Error;

const CAP: usize = 200_000;

/// Membership by enumeration for small graphs, by the recognizer above that.
fn in_language(g: &sprec::grammar::Grammar, w: &SPGraph) -> bool {
    if edge_count(w) <= 6 {
        language_upto(g, edge_count(w)).contains(w)
    } else {
        member(w, g).unwrap()
    }
}

fn member_ext(w: &SPGraph, g: &sprec::grammar::Grammar) -> bool {
    w.labels().is_subset(g.alphabet()) && member(w, g).unwrap()
}

#[test]
fn productive_and_empty() {
    let univ = fixture("univ_ab");
    assert!(!is_empty(&univ));
    assert_eq!(productive_nonterminals(&univ).len(), 2);
    let g = sprec::grammar::parse_grammar("alphabet: a\nsnonterminals: s\nrules:\ns -> a\n").unwrap();
    assert!(is_empty(&g));
}

#[test]
fn values_of_a_single_bridge() {
    let g = sprec::grammar::parse_grammar("alphabet: a\nnonterminals: x\naxioms: x\nrules:\nx -> a\n").unwrap();
    let ctx = build_ctx(&fixture("univ_ab")).unwrap();
    let t = derivable_values(&g, &ctx).unwrap();
    let vals: Vec<_> = t.values("x").collect();
    assert_eq!(vals.len(), 1);
    assert_eq!(vals[0].1, &graph("a"));
    assert_eq!(vals[0].0, &eval_graph(&graph("a"), &ctx).unwrap());
}

#[test]
fn universal_values_are_all_accepted() {
    let univ = fixture("univ_ab");
    let ctx = build_ctx(&univ).unwrap();
    let t = derivable_values(&univ, &ctx).unwrap();
    for x in ["p", "s"] {
        assert!(t.values(x).count() > 0);
        assert!(t.values(x).all(|(v, _)| accepts(v, &ctx)));
    }
}

#[test]
fn values_cover_bounded_languages() {
    for seed in seeds(30) {
        let g1 = random_grammar(seed);
        let g2 = random_grammar(seed + 7919);
        let ctx = build_ctx(&g2).unwrap().extend_alphabet(g1.alphabet()).unwrap();
        let t = derivable_values(&g1, &ctx).unwrap();
        let mut values = BTreeSet::new();
        for x in g1.axioms() {
            for (v, w) in t.values(x) {
                assert_eq!(&eval_graph(w, &ctx).unwrap(), v, "seed {seed}");
                assert!(in_language(&g1, w), "seed {seed}: witness {w}");
                values.insert(v.clone());
            }
        }
        for w in language_upto(&g1, 5) {
            assert!(values.contains(&eval_graph(&w, &ctx).unwrap()), "seed {seed}: {w}");
        }
    }
}

#[test]
fn alphabet_mismatch_is_reported() {
    let ctx = build_ctx(&fixture("ga")).unwrap();
    let g = sprec::grammar::parse_grammar("alphabet: c\nsnonterminals: s\naxioms: s\nrules:\ns -> c\n").unwrap();
    assert!(matches!(derivable_values(&g, &ctx), Err(Error::UnknownLabel(_))));
}

#[test]
fn everything_is_included_in_the_universal_grammar() {
    let univ = fixture("univ_ab");
    let mut grammars: Vec<_> = REGULAR_FIXTURES.iter().map(|n| fixture(n)).collect();
    grammars.push(fixture("free"));
    grammars.extend(seeds(30).map(random_grammar));
    for g in &grammars {
        let d = inclusion(g, &univ).unwrap();
        assert!(d.holds, "{g}");
        assert_eq!(d.witness, None);
    }
}

#[test]
fn inclusion_is_reflexive() {
    for name in REGULAR_FIXTURES {
        let g = fixture(name);
        assert!(inclusion(&g, &g).unwrap().holds, "{name}");
    }
}

#[test]
fn inclusion_counterexample() {
    let d = inclusion(&fixture("gab"), &fixture("ga")).unwrap();
    assert!(!d.holds);
    assert_eq!(d.witness, Some(graph("b")));
    let d = inclusion(&fixture("free"), &fixture("paths")).unwrap();
    assert_eq!(d.witness, Some(graph("b")));
}

#[test]
fn inclusion_agrees_with_enumeration() {
    for seed in seeds(60) {
        let g1 = random_grammar(seed);
        let g2 = random_grammar(seed + 31);
        let d = inclusion(&g1, &g2).unwrap();
        let outside: Vec<_> = language_upto(&g1, 5).into_iter().filter(|w| !member_ext(w, &g2)).collect();
        match &d.witness {
            None => {
                assert!(d.holds);
                assert!(outside.is_empty(), "seed {seed}: missed {}", outside[0]);
            }
            Some(w) => {
                assert!(!d.holds);
                assert!(in_language(&g1, w) && !member_ext(w, &g2), "seed {seed}: bad witness {w}");
                if let Some(least) = outside.iter().map(edge_count).min() {
                    assert_eq!(edge_count(w), least, "seed {seed}");
                }
            }
        }
    }
}

#[test]
fn intersection_examples() {
    let univ = fixture("univ_ab");
    let d = intersection_empty(&[univ.clone(), univ], CAP).unwrap();
    assert!(!d.holds);
    assert_eq!(d.witness, Some(graph("a")));
    let d = intersection_empty(&[fixture("ga"), fixture("gb")], CAP).unwrap();
    assert!(d.holds);
    assert_eq!(d.witness, None);
    let d = intersection_empty(&[fixture("paths"), fixture("ladders")], CAP).unwrap();
    assert!(d.holds);
    let d = intersection_empty(&[fixture("period3"), fixture("univ_ab")], CAP).unwrap();
    assert_eq!(d.witness, Some(graph("a || a || b")));
    assert!(intersection_empty(&[], CAP).is_err());
}

#[test]
fn single_intersection_is_emptiness() {
    for seed in seeds(40) {
        let g = random_grammar(seed);
        let d = intersection_empty(std::slice::from_ref(&g), CAP).unwrap();
        assert_eq!(d.holds, is_empty(&g), "seed {seed}\n{g}");
    }
}

#[test]
fn intersection_agrees_with_enumeration() {
    for seed in seeds(60) {
        let gs = [random_grammar(seed), random_grammar(seed + 101)];
        let d = intersection_empty(&gs, CAP).unwrap();
        let common: Vec<SPGraph> = language_upto(&gs[0], 4)
            .intersection(&language_upto(&gs[1], 4))
            .cloned()
            .collect();
        match &d.witness {
            None => assert!(d.holds && common.is_empty(), "seed {seed}"),
            Some(w) => {
                assert!(gs.iter().all(|g| member_ext(w, g)), "seed {seed}: {w}");
                if let Some(least) = common.iter().map(edge_count).min() {
                    assert_eq!(edge_count(w), least, "seed {seed}");
                }
            }
        }
    }
}

#[test]
fn intersection_cap_is_enforced() {
    let univ = fixture("univ_ab");
    let r = intersection_empty(&[fixture("ga"), univ], 0);
    assert!(matches!(r, Err(Error::CapExceeded(0))));
}

#[test]
fn filtering_matches_enumeration() {
    let univ = fixture("univ_ab");
    let f = filter_grammar(&univ, &univ, FilterMode::Accept).unwrap();
    assert_eq!(language_upto(&f, 4), language_upto(&univ, 4));
    for name in REGULAR_FIXTURES {
        let g = fixture(name);
        let f = filter_grammar(&g, &univ, FilterMode::Reject).unwrap();
        assert!(is_empty(&f), "{name}");
    }
    for seed in seeds(40) {
        let g1 = random_grammar(seed);
        let g2 = random_grammar(seed + 57);
        let l1 = language_upto(&g1, 4);
        let inside: BTreeSet<_> = l1.iter().filter(|w| member_ext(w, &g2)).cloned().collect();
        let outside: BTreeSet<_> = l1.difference(&inside).cloned().collect();
        let acc = filter_grammar(&g1, &g2, FilterMode::Accept).unwrap();
        let rej = filter_grammar(&g1, &g2, FilterMode::Reject).unwrap();
        assert_eq!(language_upto(&acc, 4), inside, "seed {seed}");
        assert_eq!(language_upto(&rej, 4), outside, "seed {seed}");
        let d = intersection_empty(&[g1.clone(), g2.clone()], CAP).unwrap();
        assert_eq!(is_empty(&acc), d.holds, "seed {seed}");
    }
}

#[test]
fn filtering_an_empty_grammar() {
    let g = sprec::grammar::parse_grammar("alphabet: a\nsnonterminals: s\nrules:\ns -> a\n").unwrap();
    let f = filter_grammar(&g, &fixture("univ_ab"), FilterMode::Accept).unwrap();
    assert!(is_empty(&f));
}

#[test]
fn closures_stay_below_the_bound() {
    for name in REGULAR_FIXTURES {
        let g = fixture(name);
        let ctx = build_ctx(&g).unwrap();
        let c = reachable_profiles(&ctx, 100_000);
        assert!(c.saturated, "{name}");
        assert!(num_bigint::BigUint::from(c.profiles.len()) <= bound_cardinality(&g).unwrap(), "{name}");
    }
}

#[test]
fn accepting_partitions_reachable_profiles() {
    for name in REGULAR_FIXTURES {
        let g = fixture(name);
        let ctx = build_ctx(&g).unwrap();
        let c = reachable_profiles(&ctx, 100_000);
        let (acc, rej): (Vec<_>, Vec<_>) = c.profiles.iter().partition(|x| accepts(x, &ctx));
        assert_eq!(acc.len() + rej.len(), c.profiles.len());
        if name == &"univ_ab" {
            assert!(rej.is_empty());
        }
    }
}
