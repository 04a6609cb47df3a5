//! Ground truth by exhaustive enumeration: bounded languages, views of
//! graphs computed from derivations, random regular grammars, and the
//! worst-case grammar family.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grammar::{Grammar, Kind, Name, RhsTerm, Rule};
use crate::recognizer::{Profile, RecognizerCtx, Target};
use crate::spgraph::{compose_parallel, compose_serial, edge_count, Label, SPGraph};
use crate::termalg::{nf_monomial, TermNF, Var};

/// Languages of every nonterminal, split by exact edge count `0..=n`.
#[derive(Debug, Clone)]
pub struct LevelTable {
    n: usize,
    by_size: HashMap<Name, Vec<BTreeSet<SPGraph>>>,
}

impl LevelTable {
    /// Computes the languages of all nonterminals of `g` up to `n` edges.
    pub fn new(g: &Grammar, n: usize) -> LevelTable {
        let mut by_size: HashMap<Name, Vec<BTreeSet<SPGraph>>> = g
            .nonterminals()
            .map(|(x, _)| (x.clone(), vec![BTreeSet::new(); n + 1]))
            .collect();
        let rules: Vec<(Name, RhsTerm)> = g.rules().map(|r| (r.lhs().clone(), r.rhs_term())).collect();
        for k in 1..=n {
            loop {
                let mut changed = false;
                for (x, rhs) in &rules {
                    let found = eval_rhs(rhs, k, &by_size);
                    let slot = &mut by_size.get_mut(x).expect("declared")[k];
                    for graph in found {
                        changed |= slot.insert(graph);
                    }
                }
                if !changed {
                    break;
                }
            }
        }
        LevelTable { n, by_size }
    }

    pub fn max_edges(&self) -> usize {
        self.n
    }

    /// Graphs derivable from `x` with exactly `k` edges.
    pub fn at(&self, x: &str, k: usize) -> Option<&BTreeSet<SPGraph>> {
        self.by_size.get(x).and_then(|v| v.get(k))
    }

    /// Whether `x` derives `g`; false for graphs above the size bound.
    pub fn derives(&self, x: &str, g: &SPGraph) -> bool {
        self.at(x, edge_count(g)).is_some_and(|s| s.contains(g))
    }

    /// All graphs derivable from `x` with at most `n` edges.
    pub fn upto(&self, x: &str) -> BTreeSet<SPGraph> {
        self.by_size
            .get(x)
            .map(|v| v.iter().flatten().cloned().collect())
            .unwrap_or_default()
    }
}

fn eval_rhs(t: &RhsTerm, k: usize, table: &HashMap<Name, Vec<BTreeSet<SPGraph>>>) -> BTreeSet<SPGraph> {
    match t {
        RhsTerm::Label(a) if k == 1 => BTreeSet::from([SPGraph::bridge(a)]),
        RhsTerm::Label(_) => BTreeSet::new(),
        RhsTerm::Nt(x) => table[x][k].clone(),
        RhsTerm::Serial(l, r) | RhsTerm::Parallel(l, r) => {
            let serial = matches!(t, RhsTerm::Serial(..));
            let mut out = BTreeSet::new();
            for k1 in 1..k {
                let left = eval_rhs(l, k1, table);
                if left.is_empty() {
                    continue;
                }
                let right = eval_rhs(r, k - k1, table);
                for g1 in &left {
                    for g2 in &right {
                        out.insert(if serial { compose_serial(g1, g2) } else { compose_parallel(g1, g2) });
                    }
                }
            }
            out
        }
    }
}

/// Languages of every nonterminal of `g`, restricted to at most `n` edges.
pub fn nonterminal_languages(g: &Grammar, n: usize) -> BTreeMap<Name, BTreeSet<SPGraph>> {
    let table = LevelTable::new(g, n);
    g.nonterminals().map(|(x, _)| (x.clone(), table.upto(x))).collect()
}

/// `{ graph ∈ L(g) : edge_count(graph) ≤ n }`.
pub fn language_upto(g: &Grammar, n: usize) -> BTreeSet<SPGraph> {
    let table = LevelTable::new(g, n);
    g.axioms().flat_map(|x| table.upto(x)).collect()
}

/// Views of graphs with at most `n` edges, computed from the derivations of
/// the alternative grammar underlying a recognizer.
#[derive(Debug, Clone)]
pub struct ViewOracle<'a> {
    ctx: &'a RecognizerCtx,
    lang: LevelTable,
    /// `prefix[s][q][k]`: graphs `t` with `k` edges such that `s` derives `t ∘ q`.
    prefix: HashMap<Name, BTreeMap<Name, Vec<BTreeSet<SPGraph>>>>,
}

impl<'a> ViewOracle<'a> {
    pub fn new(ctx: &'a RecognizerCtx, n: usize) -> ViewOracle<'a> {
        let g = ctx.grammar();
        let lang = LevelTable::new(g, n);
        let mut prefix: HashMap<Name, BTreeMap<Name, Vec<BTreeSet<SPGraph>>>> = HashMap::new();
        let empty = || vec![BTreeSet::new(); n + 1];
        for k in 1..=n {
            for r in g.rules() {
                let (s, head, q) = match r {
                    Rule::C { s, p, s1 } => (s, p, s1),
                    Rule::D { s, p1, p2 } => (s, p1, p2),
                    _ => continue,
                };
                let mut add: Vec<(Name, SPGraph)> = lang
                    .at(head, k)
                    .into_iter()
                    .flatten()
                    .map(|t| (q.clone(), t.clone()))
                    .collect();
                if matches!(r, Rule::C { .. }) {
                    if let Some(rest) = prefix.get(q) {
                        for (q2, sizes) in rest {
                            for k1 in 1..k {
                                for t1 in lang.at(head, k1).into_iter().flatten() {
                                    for t2 in &sizes[k - k1] {
                                        add.push((q2.clone(), compose_serial(t1, t2)));
                                    }
                                }
                            }
                        }
                    }
                }
                let row = prefix.entry(s.clone()).or_default();
                for (q2, t) in add {
                    row.entry(q2).or_insert_with(empty)[k].insert(t);
                }
            }
        }
        ViewOracle { ctx, lang, prefix }
    }

    /// Languages of the underlying alternative grammar.
    pub fn languages(&self) -> &LevelTable {
        &self.lang
    }

    /// `nf_p` of the sum of all views of the P-graph `graph` for the P-nonterminal `p`.
    /// Views using variables outside the context of `p` are dropped.
    pub fn p_views(&self, graph: &SPGraph, p: &str) -> Result<TermNF> {
        if !graph.is_p_graph() {
            return Err(Error::WrongShape { expected: "a P-graph", got: graph.to_string() });
        }
        let pi = self
            .ctx
            .p_position(p)
            .ok_or_else(|| Error::UndeclaredSymbol(p.to_string()))?;
        let nf = self.ctx.context(pi);
        let choices: Vec<Vec<Var>> = graph
            .parallel_components()
            .iter()
            .map(|c| {
                self.ctx
                    .s_names()
                    .iter()
                    .enumerate()
                    .filter(|(_, s)| self.lang.derives(s, c))
                    .map(|(i, _)| Var(i as u32))
                    .filter(|&v| nf.class(v).is_some())
                    .collect()
            })
            .collect();
        let mut monos = BTreeSet::new();
        let mut raw = BTreeMap::new();
        expand(&choices, 0, &mut raw, &mut |m| {
            if let Some(m) = nf_monomial(m, nf)? {
                monos.insert(m);
            }
            Ok(())
        })?;
        Ok(TermNF::from_monomials(monos))
    }

    /// Pairs `(s, q)` such that `s` derives `graph ∘ q`, and `(s, ⊥)` such that `s` derives `graph`.
    pub fn s_views(&self, graph: &SPGraph) -> Result<BTreeSet<(Name, Target)>> {
        if graph.is_p_graph() {
            return Err(Error::WrongShape { expected: "a bridge or S-graph", got: graph.to_string() });
        }
        let k = edge_count(graph);
        let mut out = BTreeSet::new();
        for s in self.ctx.s_names() {
            if self.lang.derives(s, graph) {
                out.insert((s.clone(), Target::Bottom));
            }
            for (q, sizes) in self.prefix.get(s).into_iter().flatten() {
                if sizes.get(k).is_some_and(|set| set.contains(graph)) {
                    out.insert((s.clone(), Target::Nt(q.clone())));
                }
            }
        }
        Ok(out)
    }

    /// The profile of `graph` assembled from its views.
    pub fn profile(&self, graph: &SPGraph) -> Result<Profile> {
        if graph.is_p_graph() {
            let terms = self
                .ctx
                .p_names()
                .iter()
                .map(|p| self.p_views(graph, p))
                .collect::<Result<Vec<_>>>()?;
            Ok(Profile::P(self.ctx.p_profile_from_terms(terms)?))
        } else {
            Ok(Profile::S(self.ctx.s_profile_from_pairs(&self.s_views(graph)?)?))
        }
    }
}

fn expand(
    choices: &[Vec<Var>],
    i: usize,
    raw: &mut BTreeMap<Var, u64>,
    emit: &mut dyn FnMut(&BTreeMap<Var, u64>) -> Result<()>,
) -> Result<()> {
    if i == choices.len() {
        return emit(raw);
    }
    for &v in &choices[i] {
        *raw.entry(v).or_default() += 1;
        expand(choices, i + 1, raw, emit)?;
        let e = raw.get_mut(&v).expect("just inserted");
        *e -= 1;
        if *e == 0 {
            raw.remove(&v);
        }
    }
    Ok(())
}

/// Views of a P-graph for `p`, enumerated up to the size of the graph.
pub fn enumerate_p_views(graph: &SPGraph, ctx: &RecognizerCtx, p: &str) -> Result<TermNF> {
    ViewOracle::new(ctx, edge_count(graph)).p_views(graph, p)
}

/// Views of a bridge or S-graph, enumerated up to the size of the graph.
pub fn enumerate_s_views(graph: &SPGraph, ctx: &RecognizerCtx) -> Result<BTreeSet<(Name, Target)>> {
    ViewOracle::new(ctx, edge_count(graph)).s_views(graph)
}

/// A small random regular grammar: at most 3 P- and 4 S-nonterminals,
/// 12 rules, periods and B-exponents up to 3 and 2, and labels from `{a, b}`.
pub fn random_grammar(seed: u64) -> Grammar {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let labels: Vec<Label> = ["a", "b"][..rng.gen_range(1..=2)]
        .iter()
        .map(|a| Label::new(a).expect("valid label"))
        .collect();
    let mut g = Grammar::new(labels.clone());
    let np = rng.gen_range(1..=3);
    let ns = rng.gen_range(1..=4);
    let ps: Vec<Name> = (0..np)
        .map(|i| g.add_nonterminal(&format!("p{i}"), Kind::P).expect("fresh name"))
        .collect();
    let ss: Vec<Name> = (0..ns)
        .map(|i| g.add_nonterminal(&format!("s{i}"), Kind::S).expect("fresh name"))
        .collect();
    let pick = |rng: &mut ChaCha8Rng, v: &[Name]| v[rng.gen_range(0..v.len())].clone();
    let label = |rng: &mut ChaCha8Rng| labels[rng.gen_range(0..labels.len())].clone();

    g.add_rule(Rule::F { s: pick(&mut rng, &ss), a: label(&mut rng) })
        .expect("well-kinded");
    for s in &ss {
        if rng.gen_bool(0.5) {
            g.add_rule(Rule::F { s: s.clone(), a: label(&mut rng) }).expect("well-kinded");
        }
    }
    for p in &ps {
        if rng.gen_bool(0.3) {
            g.add_rule(Rule::E { p: p.clone(), a: label(&mut rng) }).expect("well-kinded");
        }
    }
    let count = rng.gen_range(g.rule_count() + 1..=12);
    for _ in 0..4 * count {
        if g.rule_count() >= count {
            break;
        }
        let r = match rng.gen_range(0..6) {
            0 => Rule::A { p: pick(&mut rng, &ps), s: pick(&mut rng, &ss), ell: rng.gen_range(1..=3) },
            1 => {
                let mut body = BTreeMap::new();
                for _ in 0..rng.gen_range(1..=2) {
                    body.insert(pick(&mut rng, &ss), rng.gen_range(1..=2));
                }
                if body.values().sum::<u32>() < 2 {
                    *body.values_mut().next().expect("nonempty") = 2;
                }
                Rule::B { p: pick(&mut rng, &ps), body: body.into_iter().collect() }
            }
            2 => Rule::C { s: pick(&mut rng, &ss), p: pick(&mut rng, &ps), s1: pick(&mut rng, &ss) },
            3 => Rule::D { s: pick(&mut rng, &ss), p1: pick(&mut rng, &ps), p2: pick(&mut rng, &ps) },
            4 => Rule::E { p: pick(&mut rng, &ps), a: label(&mut rng) },
            _ => Rule::F { s: pick(&mut rng, &ss), a: label(&mut rng) },
        };
        g.add_rule(r).expect("well-kinded");
    }
    let all: Vec<Name> = ps.iter().chain(&ss).cloned().collect();
    for x in &all {
        if rng.gen_bool(0.5) {
            g.add_axiom(x).expect("declared");
        }
    }
    if g.axioms().next().is_none() {
        g.add_axiom(&pick(&mut rng, &all)).expect("declared");
    }
    g
}

/// Default start symbol of [`gen_worstcase`].
pub const WORSTCASE_START: &str = "s_0";

/// The grammar of graphs `[c ∥ (w ∘ v)] ∘ u` over `{a, b, c, dollar, hash}`,
/// where `u, v ∈ {a, b}^k` and the path `w` is a sequence of blocks
/// `{a,b}* dollar {a,b}* hash`, one of which is `u dollar v hash`.
///
/// Nonterminals, with `x` ranging over words of `{a, b}^{≤k}`:
///
/// * `p_u`, `pbar_α`: P-nonterminals for the parallel part and the single labels;
/// * `scan_u`, `skip1_u`, `skip2_u`: look for the block `u dollar v hash`, skipping others;
/// * `rest_x`: the remaining suffix `x` of `u`, then `dollar`;
/// * `read_x`: the prefix `x` of `v` read so far;
/// * `after_v`, `after1_v`, `after2_v`: skip the remaining blocks, then read `v`;
/// * `path_x`: the path `x`.
pub fn gen_worstcase(k: usize, start: &str) -> Result<Grammar> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("gen_worstcase needs k >= 2, got {k}")));
    }
    let sigma = ["a", "b", "c", "dollar", "hash"];
    let mut g = Grammar::new(sigma.iter().map(|a| Label::new(a).expect("valid label")));
    let lbl = |a: &str| Label::new(a).expect("valid label");
    let nm = |prefix: &str, w: &str| {
        if w.is_empty() {
            format!("{prefix}_eps")
        } else {
            format!("{prefix}_{w}")
        }
    };
    let words = |len: usize| -> Vec<String> {
        (0..1usize << len)
            .map(|bits| (0..len).map(|i| if bits >> (len - 1 - i) & 1 == 0 { 'a' } else { 'b' }).collect())
            .collect()
    };
    let upto: Vec<String> = (0..=k).flat_map(words).collect();
    let full = words(k);

    let start = g.add_nonterminal(start, Kind::S)?;
    g.add_axiom(&start)?;
    for a in sigma {
        let p = g.add_nonterminal(&nm("pbar", a), Kind::P)?;
        g.add_rule(Rule::E { p, a: lbl(a) })?;
    }
    let sc = g.add_nonterminal("s_c", Kind::S)?;
    g.add_rule(Rule::F { s: sc.clone(), a: lbl("c") })?;
    for u in &full {
        g.add_nonterminal(&nm("p", u), Kind::P)?;
        for pre in ["scan", "skip1", "skip2", "after", "after1", "after2"] {
            g.add_nonterminal(&nm(pre, u), Kind::S)?;
        }
    }
    for x in &upto {
        if x.len() < k {
            g.add_nonterminal(&nm("rest", x), Kind::S)?;
        }
        g.add_nonterminal(&nm("read", x), Kind::S)?;
        if !x.is_empty() {
            g.add_nonterminal(&nm("path", x), Kind::S)?;
        }
    }

    let n = |s: String| -> Name { s.into() };
    let step = |g: &mut Grammar, s: String, a: &str, s1: String| {
        g.add_rule(Rule::C { s: n(s), p: n(nm("pbar", a)), s1: n(s1) })
    };
    let letters = |w: &str| w.chars().map(|c| c.to_string()).collect::<Vec<_>>();
    let skip_block = |g: &mut Grammar, home: String, b1: String, b2: String| -> Result<()> {
        for a in ["a", "b"] {
            step(g, home.clone(), a, b1.clone())?;
            step(g, b1.clone(), a, b1.clone())?;
            step(g, b2.clone(), a, b2.clone())?;
        }
        step(g, home.clone(), "dollar", b2.clone())?;
        step(g, b1, "dollar", b2.clone())?;
        step(g, b2, "hash", home)
    };

    for u in &full {
        g.add_rule(Rule::C { s: start.clone(), p: n(nm("p", u)), s1: n(nm("path", u)) })?;
        g.add_rule(Rule::B { p: n(nm("p", u)), body: vec![(n(nm("scan", u)), 1), (sc.clone(), 1)] })?;
        skip_block(&mut g, nm("scan", u), nm("skip1", u), nm("skip2", u))?;
        step(&mut g, nm("scan", u), &u[..1], nm("rest", &u[1..]))?;
        skip_block(&mut g, nm("after", u), nm("after1", u), nm("after2", u))?;
        step(&mut g, nm("after", u), &u[..1], nm("path", &u[1..]))?;
    }
    for x in &upto {
        if x.len() < k {
            match x.chars().next() {
                Some(c) => step(&mut g, nm("rest", x), &c.to_string(), nm("rest", &x[1..]))?,
                None => step(&mut g, nm("rest", x), "dollar", nm("read", ""))?,
            }
            for a in ["a", "b"] {
                step(&mut g, nm("read", x), a, nm("read", &format!("{x}{a}")))?;
            }
        } else {
            step(&mut g, nm("read", x), "hash", nm("after", x))?;
        }
        let ls = letters(x);
        match ls.len() {
            0 => {}
            1 => g.add_rule(Rule::F { s: n(nm("path", x)), a: lbl(&ls[0]) })?,
            _ => step(&mut g, nm("path", x), &ls[0], nm("path", &x[1..]))?,
        }
    }
    Ok(g)
}
