//! Decision procedures over recognizer profiles: emptiness, value tables of
//! arbitrary grammars, filtering, intersection emptiness, inclusion, and the
//! cardinality bound of the recognizer.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::time::Instant;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::grammar::{compute_base_period, normalize, to_alternative, validate_regular, Grammar, Name, RhsTerm, Rule};
use crate::recognizer::{accepts, bridge_profile, build_ctx, eval_graph, op_parallel, op_serial, Profile, RecognizerCtx};
use crate::spgraph::{compose_parallel, compose_serial, edge_count, Label, SPGraph};

/// Nonterminals that derive at least one ground term.
pub fn productive_nonterminals(g: &Grammar) -> BTreeSet<Name> {
    let mut productive = BTreeSet::new();
    loop {
        let before = productive.len();
        for r in g.rules() {
            if !productive.contains(r.lhs())
                && r.rhs_term().nonterminals().iter().all(|x| productive.contains(*x))
            {
                productive.insert(r.lhs().clone());
            }
        }
        if productive.len() == before {
            return productive;
        }
    }
}

/// Whether no axiom of `g` is productive.
pub fn is_empty(g: &Grammar) -> bool {
    let productive = productive_nonterminals(g);
    !g.axioms().any(|x| productive.contains(x))
}

/// A graph of least size in `L(g)`, if any.
pub fn smallest_member(g: &Grammar) -> Option<SPGraph> {
    let rules: Vec<(Name, RhsTerm)> = g.rules().map(|r| (r.lhs().clone(), r.rhs_term())).collect();
    let mut best: HashMap<Name, SPGraph> = HashMap::new();
    loop {
        let mut changed = false;
        for (x, rhs) in &rules {
            if let Some(w) = ground(rhs, &best) {
                changed |= offer(&mut best, x.clone(), w);
            }
        }
        if !changed {
            break;
        }
    }
    g.axioms().filter_map(|x| best.get(x)).min_by(|a, b| (edge_count(a), *a).cmp(&(edge_count(b), *b))).cloned()
}

fn ground(t: &RhsTerm, best: &HashMap<Name, SPGraph>) -> Option<SPGraph> {
    Some(match t {
        RhsTerm::Label(a) => SPGraph::bridge(a),
        RhsTerm::Nt(x) => best.get(x)?.clone(),
        RhsTerm::Serial(l, r) => compose_serial(&ground(l, best)?, &ground(r, best)?),
        RhsTerm::Parallel(l, r) => compose_parallel(&ground(l, best)?, &ground(r, best)?),
    })
}

/// Counters reported by the fixpoint procedures.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub profiles_explored: usize,
    pub iterations: usize,
    pub wall_ms: u128,
}

/// Outcome of a decision procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub holds: bool,
    pub witness: Option<SPGraph>,
    pub stats: Stats,
}

/// Orders witnesses by edge count, then by graph order.
fn better(candidate: &SPGraph, current: &SPGraph) -> bool {
    (edge_count(candidate), candidate) < (edge_count(current), current)
}

fn offer<K: std::hash::Hash + Eq>(map: &mut HashMap<K, SPGraph>, key: K, witness: SPGraph) -> bool {
    match map.get_mut(&key) {
        Some(w) if better(&witness, w) => {
            *w = witness;
            true
        }
        Some(_) => false,
        None => {
            map.insert(key, witness);
            true
        }
    }
}

/// For every nonterminal, the profiles of the graphs it derives, each with
/// a witness graph of least size.
#[derive(Debug, Clone)]
pub struct ValueTable {
    values: BTreeMap<Name, BTreeMap<Profile, SPGraph>>,
    stats: Stats,
}

impl ValueTable {
    /// Values of `x` with their witnesses, in profile order.
    pub fn values(&self, x: &str) -> impl Iterator<Item = (&Profile, &SPGraph)> {
        self.values.get(x).into_iter().flatten()
    }

    pub fn len(&self) -> usize {
        self.values.values().map(BTreeMap::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }
}

/// Least fixpoint of the values of `g1`'s nonterminals in the recognizer `ctx2`.
pub fn derivable_values(g1: &Grammar, ctx2: &RecognizerCtx) -> Result<ValueTable> {
    let start = Instant::now();
    if let Some(a) = g1.alphabet().iter().find(|a| !ctx2.alphabet().contains(*a)) {
        return Err(Error::UnknownLabel(a.to_string()));
    }
    let rules: Vec<(Name, RhsTerm)> = g1.rules().map(|r| (r.lhs().clone(), r.rhs_term())).collect();
    let mut table: HashMap<Name, HashMap<Profile, SPGraph>> =
        g1.nonterminals().map(|(x, _)| (x.clone(), HashMap::new())).collect();
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut changed = false;
        for (x, rhs) in &rules {
            let found = eval_values(rhs, &table, ctx2)?;
            let slot = table.get_mut(x).expect("declared");
            for (v, w) in found {
                changed |= offer(slot, v, w);
            }
        }
        if !changed {
            break;
        }
    }
    let values: BTreeMap<Name, BTreeMap<Profile, SPGraph>> =
        table.into_iter().map(|(x, m)| (x, m.into_iter().collect())).collect();
    let profiles_explored = values.values().map(BTreeMap::len).sum();
    Ok(ValueTable {
        values,
        stats: Stats { profiles_explored, iterations, wall_ms: start.elapsed().as_millis() },
    })
}

fn eval_values(
    t: &RhsTerm,
    table: &HashMap<Name, HashMap<Profile, SPGraph>>,
    ctx: &RecognizerCtx,
) -> Result<HashMap<Profile, SPGraph>> {
    Ok(match t {
        RhsTerm::Label(a) => HashMap::from([(Profile::S(bridge_profile(a, ctx)?), SPGraph::bridge(a))]),
        RhsTerm::Nt(x) => table[x].clone(),
        RhsTerm::Serial(l, r) | RhsTerm::Parallel(l, r) => {
            let serial = matches!(t, RhsTerm::Serial(..));
            let left = eval_values(l, table, ctx)?;
            let right = if left.is_empty() { HashMap::new() } else { eval_values(r, table, ctx)? };
            let mut out = HashMap::new();
            for (v1, w1) in &left {
                for (v2, w2) in &right {
                    let (v, w) = if serial {
                        (Profile::S(op_serial(v1, v2, ctx)), compose_serial(w1, w2))
                    } else {
                        (Profile::P(op_parallel(v1, v2, ctx)), compose_parallel(w1, w2))
                    };
                    offer(&mut out, v, w);
                }
            }
            out
        }
    })
}

/// Which axioms [`filter_grammar`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterMode {
    Accept,
    Reject,
}

/// A grammar for `L(g1) ∩ L(g2)` (mode `Accept`) or `L(g1) \ L(g2)` (mode
/// `Reject`). Nonterminals are the reachable annotations `x$k` of the
/// nonterminals `x` of `g1` with their `k`-th value.
pub fn filter_grammar(g1: &Grammar, g2: &Grammar, mode: FilterMode) -> Result<Grammar> {
    let ctx2 = build_ctx(g2)?.extend_alphabet(g1.alphabet())?;
    let table = derivable_values(g1, &ctx2)?;

    let mut taken: HashSet<String> = g1.nonterminals().map(|(x, _)| x.to_string()).collect();
    taken.extend(g1.alphabet().iter().map(|a| a.to_string()));
    let mut names: HashMap<(Name, Profile), String> = HashMap::new();
    for (x, values) in &table.values {
        for (k, v) in values.keys().enumerate() {
            let mut n = format!("{x}${k}");
            while !taken.insert(n.clone()) {
                n.push('$');
            }
            names.insert((x.clone(), v.clone()), n);
        }
    }

    let mut rules: Vec<(String, RhsTerm)> = Vec::new();
    for r in g1.rules() {
        let rhs = r.rhs_term();
        let leaves: Vec<Name> = rhs.nonterminals().into_iter().cloned().collect();
        let choices: Vec<Vec<&Profile>> = leaves.iter().map(|x| table.values(x).map(|(v, _)| v).collect()).collect();
        let mut pick = vec![0usize; leaves.len()];
        if choices.iter().any(Vec::is_empty) {
            continue;
        }
        loop {
            let chosen: Vec<&Profile> = pick.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
            let v = eval_with(&rhs, &mut chosen.iter().copied(), &ctx2)?;
            let head = names[&(r.lhs().clone(), v)].clone();
            let mut renamed = leaves
                .iter()
                .zip(&chosen)
                .map(|(x, v)| Name::from(names[&(x.clone(), (*v).clone())].as_str()));
            rules.push((head, rhs.rename_leaves(&mut renamed)));
            if !advance(&mut pick, &choices) {
                break;
            }
        }
    }

    let mut axioms: Vec<String> = Vec::new();
    for x in g1.axioms() {
        for (v, _) in table.values(x) {
            if accepts(v, &ctx2) == (mode == FilterMode::Accept) {
                axioms.push(names[&(x.clone(), v.clone())].clone());
            }
        }
    }

    let mut reachable: BTreeSet<String> = axioms.iter().cloned().collect();
    let mut frontier: Vec<String> = axioms.clone();
    let by_head: BTreeMap<&str, Vec<&RhsTerm>> = rules.iter().fold(BTreeMap::new(), |mut m, (h, t)| {
        m.entry(h.as_str()).or_default().push(t);
        m
    });
    while let Some(x) = frontier.pop() {
        for t in by_head.get(x.as_str()).into_iter().flatten() {
            for y in t.nonterminals() {
                if reachable.insert(y.to_string()) {
                    frontier.push(y.to_string());
                }
            }
        }
    }

    let mut out = Grammar::new(g1.alphabet().iter().cloned());
    let base_kind: HashMap<&str, _> = names
        .iter()
        .map(|((x, _), n)| (n.as_str(), g1.kind(x).expect("declared")))
        .collect();
    let mut ordered: Vec<&String> = reachable.iter().collect();
    ordered.sort();
    for n in ordered {
        out.add_nonterminal(n, base_kind[n.as_str()])?;
    }
    for (h, t) in rules {
        if reachable.contains(&h) {
            let rule = Rule::classify(h.as_str().into(), t, |n| out.kind(n));
            out.add_rule(rule)?;
        }
    }
    for a in axioms {
        out.add_axiom(&a)?;
    }
    Ok(out)
}

fn advance(pick: &mut [usize], choices: &[Vec<&Profile>]) -> bool {
    for i in (0..pick.len()).rev() {
        pick[i] += 1;
        if pick[i] < choices[i].len() {
            return true;
        }
        pick[i] = 0;
    }
    false
}

fn eval_with<'a>(
    t: &RhsTerm,
    leaves: &mut impl Iterator<Item = &'a Profile>,
    ctx: &RecognizerCtx,
) -> Result<Profile> {
    Ok(match t {
        RhsTerm::Label(a) => Profile::S(bridge_profile(a, ctx)?),
        RhsTerm::Nt(_) => leaves.next().expect("one value per leaf").clone(),
        RhsTerm::Serial(l, r) => {
            let v1 = eval_with(l, leaves, ctx)?;
            let v2 = eval_with(r, leaves, ctx)?;
            Profile::S(op_serial(&v1, &v2, ctx))
        }
        RhsTerm::Parallel(l, r) => {
            let v1 = eval_with(l, leaves, ctx)?;
            let v2 = eval_with(r, leaves, ctx)?;
            Profile::P(op_parallel(&v1, &v2, ctx))
        }
    })
}

fn union_alphabet<'a>(gs: impl IntoIterator<Item = &'a Grammar>) -> BTreeSet<Label> {
    gs.into_iter().flat_map(|g| g.alphabet().iter().cloned()).collect()
}

/// Whether `L(g1) ∩ … ∩ L(gn)` is empty. Explores tuples of profiles by
/// increasing witness size; fails with [`Error::CapExceeded`] when more than
/// `cap` tuples are needed. `holds` means the intersection is empty.
pub fn intersection_empty(grammars: &[Grammar], cap: usize) -> Result<Decision> {
    let start = Instant::now();
    if grammars.is_empty() {
        return Err(Error::InvalidArgument("intersection of no grammars".into()));
    }
    let sigma = union_alphabet(grammars);
    let ctxs = grammars
        .iter()
        .map(|g| build_ctx(g)?.extend_alphabet(&sigma))
        .collect::<Result<Vec<_>>>()?;
    let accepted = |t: &[Profile]| t.iter().zip(&ctxs).all(|(x, c)| accepts(x, c));

    type Tuple = Vec<Profile>;
    let mut seen: HashSet<Tuple> = HashSet::new();
    let mut levels: Vec<Vec<(Tuple, SPGraph)>> = vec![Vec::new()];
    let mut first: HashMap<Tuple, SPGraph> = HashMap::new();
    for a in &sigma {
        let t = ctxs
            .iter()
            .map(|c| bridge_profile(a, c).map(Profile::S))
            .collect::<Result<Tuple>>()?;
        offer(&mut first, t, SPGraph::bridge(a));
    }
    let mut k = 1;
    let mut current = first;
    let mut max_nonempty = 0;
    loop {
        let mut level: Vec<(Tuple, SPGraph)> = current.into_iter().filter(|(t, _)| !seen.contains(t)).collect();
        level.sort_by(|(_, w1), (_, w2)| w1.cmp(w2));
        seen.extend(level.iter().map(|(t, _)| t.clone()));
        if seen.len() > cap {
            return Err(Error::CapExceeded(cap));
        }
        let stats = Stats { profiles_explored: seen.len(), iterations: k, wall_ms: start.elapsed().as_millis() };
        if let Some((_, w)) = level.iter().find(|(t, _)| accepted(t)) {
            return Ok(Decision { holds: false, witness: Some(w.clone()), stats });
        }
        if !level.is_empty() {
            max_nonempty = k;
        }
        levels.push(level);
        k += 1;
        if k > 2 * max_nonempty {
            return Ok(Decision { holds: true, witness: None, stats });
        }
        current = HashMap::new();
        for k1 in 1..k {
            let k2 = k - k1;
            for (t1, w1) in &levels[k1] {
                for (t2, w2) in &levels[k2] {
                    let s: Tuple = t1
                        .iter()
                        .zip(t2)
                        .zip(&ctxs)
                        .map(|((x1, x2), c)| Profile::S(op_serial(x1, x2, c)))
                        .collect();
                    if !seen.contains(&s) {
                        offer(&mut current, s, compose_serial(w1, w2));
                    }
                    if k1 <= k2 {
                        let p: Tuple = t1
                            .iter()
                            .zip(t2)
                            .zip(&ctxs)
                            .map(|((x1, x2), c)| Profile::P(op_parallel(x1, x2, c)))
                            .collect();
                        if !seen.contains(&p) {
                            offer(&mut current, p, compose_parallel(w1, w2));
                        }
                    }
                }
            }
        }
    }
}

/// Whether `L(g1) ⊆ L(g2)` for an arbitrary `g1` and a regular `g2`. On
/// failure the witness is a least graph of `L(g1) \ L(g2)`.
pub fn inclusion(g1: &Grammar, g2: &Grammar) -> Result<Decision> {
    let start = Instant::now();
    let ctx2 = build_ctx(g2)?.extend_alphabet(g1.alphabet())?;
    let table = derivable_values(g1, &ctx2)?;
    let mut witness: Option<SPGraph> = None;
    for x in g1.axioms() {
        for (v, w) in table.values(x) {
            if !accepts(v, &ctx2) && witness.as_ref().is_none_or(|cur| better(w, cur)) {
                witness = Some(w.clone());
            }
        }
    }
    if let Some(w) = &witness {
        debug_assert!(!accepts(&eval_graph(w, &ctx2)?, &ctx2));
    }
    let stats = Stats { wall_ms: start.elapsed().as_millis(), ..table.stats() };
    Ok(Decision { holds: witness.is_none(), witness, stats })
}

/// Upper bound on the number of profiles of the recognizer of `g`: the
/// P-profile bound selected by the A-rules of the normalized alternative
/// grammar, plus the S-profile bound `2^{|S|(|S|+|P|+1)}`.
pub fn bound_cardinality(g: &Grammar) -> Result<BigUint> {
    let report = validate_regular(g);
    if !report.is_regular() {
        return Err(Error::NotRegular(report.to_string()));
    }
    let alt = to_alternative(&normalize(g)?)?;
    let table = compute_base_period(&alt)?;
    let ns = alt.names_of_kind(crate::grammar::Kind::S).count() as u64;
    let np = alt.names_of_kind(crate::grammar::Kind::P).count() as u64;
    let per_p: Vec<_> = alt
        .names_of_kind(crate::grammar::Kind::P)
        .filter_map(|p| table.get(p))
        .collect();
    let b_max = per_p.iter().flat_map(|t| t.bounded.values()).copied().max().unwrap_or(1) as u64;
    let p_max = per_p.iter().flat_map(|t| t.periodic.values()).copied().max().unwrap_or(1) as u64;
    let has_a = alt.rules().any(|r| matches!(r, Rule::A { .. }));
    let p_exp = if !has_a {
        b_max * ns * ns * np
    } else if p_max == 1 {
        2 * b_max * ns * ns * np
    } else {
        ((2 * b_max + p_max * p_max) * ns * ns * (ns + 2) * np).div_ceil(2)
    };
    let s_exp = ns * (ns + np + 1);
    let two = BigUint::from(2u32);
    Ok(two.pow(p_exp as u32) + two.pow(s_exp as u32))
}
