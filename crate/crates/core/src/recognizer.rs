//! The finite recognizer algebra of profiles.
//!
//! Every SP-graph `G` is mapped to a profile `h(G)`:
//!
//! * for P-graphs a [`PProfile`], one normal-form term per P-nonterminal `p`
//!   collecting the products of S-nonterminals that derive the parallel
//!   components of `G`;
//! * for bridges and S-graphs an [`SProfile`], the relation of pairs `(s, q)`
//!   such that `s` derives `G ∘ q` (or `G` itself when `q = ⊥`).
//!
//! `h` is a homomorphism, so profiles are computed bottom-up with
//! [`op_serial`] and [`op_parallel`], and membership reduces to [`accepts`].

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use crate::error::{Error, Result};
use crate::grammar::{compute_base_period, normalize, to_alternative, validate_regular, BasePeriodTable, Grammar, Kind, Name, Rule};
use crate::spgraph::{Label, SPGraph};
use crate::termalg::{term_mul, Monomial, NfContext, TermNF, Var, VarClass};

/// Second component of an S-profile pair.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Target {
    Nt(Name),
    Bottom,
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Nt(n) => f.write_str(n),
            Target::Bottom => f.write_str("⊥"),
        }
    }
}

/// Relation `S × (S ⊎ P ⊎ {⊥})` stored as one bit row per S-nonterminal.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SProfile {
    words: Box<[u64]>,
}

/// One normal-form term per P-nonterminal, in context order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PProfile {
    terms: Box<[TermNF]>,
}

impl PProfile {
    pub fn terms(&self) -> &[TermNF] {
        &self.terms
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Profile {
    P(PProfile),
    S(SProfile),
}

impl Profile {
    pub fn is_p(&self) -> bool {
        matches!(self, Profile::P(_))
    }
}

/// Column of a relation bit: an S-nonterminal, a P-nonterminal, or ⊥.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Col {
    S(usize),
    P(usize),
    Bottom,
}

/// Everything the recognizer needs about a regular grammar, precomputed from
/// its normalized alternative form.
///
/// S- and P-nonterminals are indexed in name order; S-nonterminal `i` is the
/// term variable `Var(i)`.
#[derive(Debug, Clone)]
pub struct RecognizerCtx {
    grammar: Grammar,
    table: BasePeriodTable,
    s_names: Vec<Name>,
    p_names: Vec<Name>,
    s_index: HashMap<Name, usize>,
    p_index: HashMap<Name, usize>,
    contexts: Vec<NfContext>,
    accepting: Vec<Vec<Monomial>>,
    /// Per P-nonterminal `p`: pairs `(s, q)` of rules `s -> p ∘ q`.
    seq_rules: Vec<Vec<(usize, Col)>>,
    s_axioms: Vec<usize>,
    p_axioms: Vec<usize>,
    bridges: BTreeMap<Label, SProfile>,
    words_per_row: usize,
}

/// Builds the recognizer for a regular grammar.
pub fn build_ctx(g: &Grammar) -> Result<RecognizerCtx> {
    let report = validate_regular(g);
    if !report.is_regular() {
        return Err(Error::NotRegular(report.to_string()));
    }
    let alt = to_alternative(&normalize(g)?)?;
    RecognizerCtx::from_alternative(alt)
}

impl RecognizerCtx {
    /// Builds the recognizer for a grammar already in normalized alternative form.
    pub fn from_alternative(grammar: Grammar) -> Result<RecognizerCtx> {
        if !grammar.is_alternative() || !grammar.is_normalized() {
            return Err(Error::NotNormalized("expected a normalized alternative grammar".into()));
        }
        let table = compute_base_period(&grammar)?;
        let mut s_names: Vec<Name> = grammar.names_of_kind(Kind::S).cloned().collect();
        let mut p_names: Vec<Name> = grammar.names_of_kind(Kind::P).cloned().collect();
        s_names.sort();
        p_names.sort();
        let s_index: HashMap<Name, usize> =
            s_names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let p_index: HashMap<Name, usize> =
            p_names.iter().enumerate().map(|(i, n)| (n.clone(), i)).collect();
        let (ns, np) = (s_names.len(), p_names.len());

        let mut contexts = vec![NfContext::new(); np];
        for (pi, p) in p_names.iter().enumerate() {
            let t = table.get(p).expect("every P-nonterminal has a table entry");
            for (s, &base) in &t.bounded {
                contexts[pi].insert(Var(s_index[s] as u32), VarClass::Bounded(base))?;
            }
            for (s, &period) in &t.periodic {
                contexts[pi].insert(Var(s_index[s] as u32), VarClass::Periodic(period))?;
            }
        }

        let mut accepting: Vec<BTreeSet<Monomial>> = vec![BTreeSet::new(); np];
        let mut seq_rules: Vec<Vec<(usize, Col)>> = vec![Vec::new(); np];
        for r in grammar.rules() {
            match r {
                Rule::B { p, body } => {
                    let m = Monomial::from_exps(body.iter().map(|(s, l)| (Var(s_index[s] as u32), *l)));
                    accepting[p_index[p]].insert(m);
                }
                Rule::Alt { p, s } => {
                    accepting[p_index[p]].insert(Monomial::var(Var(s_index[s] as u32)));
                }
                Rule::C { s, p, s1 } => seq_rules[p_index[p]].push((s_index[s], Col::S(s_index[s1]))),
                Rule::D { s, p1, p2 } => seq_rules[p_index[p1]].push((s_index[s], Col::P(p_index[p2]))),
                _ => {}
            }
        }
        for rs in &mut seq_rules {
            rs.sort_by_key(|(s, c)| (*s, col_key(*c, ns, np)));
            rs.dedup();
        }

        let s_axioms = grammar
            .axioms()
            .filter_map(|a| s_index.get(a).copied())
            .collect();
        let p_axioms = grammar
            .axioms()
            .filter_map(|a| p_index.get(a).copied())
            .collect();

        let mut ctx = RecognizerCtx {
            table,
            s_names,
            p_names,
            s_index,
            p_index,
            contexts,
            accepting: accepting.into_iter().map(|s| s.into_iter().collect()).collect(),
            seq_rules,
            s_axioms,
            p_axioms,
            bridges: BTreeMap::new(),
            words_per_row: (ns + np + 1).div_ceil(64),
            grammar,
        };
        ctx.bridges = ctx
            .grammar
            .alphabet()
            .iter()
            .map(|a| (a.clone(), ctx.compute_bridge(a)))
            .collect();
        Ok(ctx)
    }

    /// Recognizer over `alphabet ∪ extra`: labels without rules get the empty profile.
    pub fn extend_alphabet(&self, extra: &BTreeSet<Label>) -> Result<RecognizerCtx> {
        let mut ctx = self.clone();
        for a in extra {
            if !ctx.bridges.contains_key(a) {
                ctx.grammar.add_label(a.clone())?;
                let empty = ctx.empty_s();
                ctx.bridges.insert(a.clone(), empty);
            }
        }
        Ok(ctx)
    }

    /// The normalized alternative grammar the recognizer was built from.
    pub fn grammar(&self) -> &Grammar {
        &self.grammar
    }

    pub fn table(&self) -> &BasePeriodTable {
        &self.table
    }

    pub fn s_names(&self) -> &[Name] {
        &self.s_names
    }

    pub fn p_names(&self) -> &[Name] {
        &self.p_names
    }

    pub fn s_var(&self, name: &str) -> Option<Var> {
        self.s_index.get(name).map(|&i| Var(i as u32))
    }

    pub fn p_position(&self, name: &str) -> Option<usize> {
        self.p_index.get(name).copied()
    }

    pub fn var_name(&self, v: Var) -> String {
        self.s_names
            .get(v.0 as usize)
            .map(|n| n.to_string())
            .unwrap_or_else(|| format!("#{}", v.0))
    }

    /// Normal-form context of the `i`-th P-nonterminal.
    pub fn context(&self, p: usize) -> &NfContext {
        &self.contexts[p]
    }

    /// Accepting monomials of the `i`-th P-nonterminal, sorted.
    pub fn accepting_monomials(&self, p: usize) -> &[Monomial] {
        &self.accepting[p]
    }

    pub fn alphabet(&self) -> &BTreeSet<Label> {
        self.grammar.alphabet()
    }

    fn ns(&self) -> usize {
        self.s_names.len()
    }

    fn np(&self) -> usize {
        self.p_names.len()
    }

    fn col_bit(&self, c: Col) -> usize {
        col_key(c, self.ns(), self.np())
    }

    fn bit_col(&self, b: usize) -> Col {
        let (ns, np) = (self.ns(), self.np());
        if b < ns {
            Col::S(b)
        } else if b < ns + np {
            Col::P(b - ns)
        } else {
            Col::Bottom
        }
    }

    fn empty_s(&self) -> SProfile {
        SProfile {
            words: vec![0; self.ns() * self.words_per_row].into_boxed_slice(),
        }
    }

    fn row<'a>(&self, x: &'a SProfile, s: usize) -> &'a [u64] {
        &x.words[s * self.words_per_row..(s + 1) * self.words_per_row]
    }

    fn set(&self, x: &mut SProfile, s: usize, c: Col) {
        let b = self.col_bit(c);
        x.words[s * self.words_per_row + b / 64] |= 1 << (b % 64);
    }

    fn get(&self, x: &SProfile, s: usize, c: Col) -> bool {
        let b = self.col_bit(c);
        x.words[s * self.words_per_row + b / 64] & (1 << (b % 64)) != 0
    }

    fn row_cols<'a>(&'a self, x: &'a SProfile, s: usize) -> impl Iterator<Item = Col> + 'a {
        self.row(x, s).iter().enumerate().flat_map(move |(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let t = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(self.bit_col(wi * 64 + t))
            })
        })
    }

    fn compute_bridge(&self, a: &Label) -> SProfile {
        let mut x = self.empty_s();
        let mut alt_sources = BTreeSet::new();
        for r in self.grammar.rules() {
            if let Rule::F { s, a: b } = r {
                if b == a {
                    self.set(&mut x, self.s_index[s], Col::Bottom);
                    alt_sources.insert(s.clone());
                }
            }
        }
        for r in self.grammar.rules() {
            if let Rule::Alt { p, s } = r {
                if alt_sources.contains(s) {
                    for &(s0, q) in &self.seq_rules[self.p_index[p]] {
                        self.set(&mut x, s0, q);
                    }
                }
            }
        }
        x
    }

    /// Pairs of an S-profile, by name.
    pub fn pairs(&self, x: &SProfile) -> BTreeSet<(Name, Target)> {
        let mut out = BTreeSet::new();
        for s in 0..self.ns() {
            for c in self.row_cols(x, s) {
                let t = match c {
                    Col::S(i) => Target::Nt(self.s_names[i].clone()),
                    Col::P(i) => Target::Nt(self.p_names[i].clone()),
                    Col::Bottom => Target::Bottom,
                };
                out.insert((self.s_names[s].clone(), t));
            }
        }
        out
    }

    /// Builds an S-profile from named pairs.
    pub fn s_profile_from_pairs<'a>(
        &self,
        pairs: impl IntoIterator<Item = &'a (Name, Target)>,
    ) -> Result<SProfile> {
        let mut x = self.empty_s();
        for (s, t) in pairs {
            let si = *self.s_index.get(s).ok_or_else(|| Error::UndeclaredSymbol(s.to_string()))?;
            let c = match t {
                Target::Bottom => Col::Bottom,
                Target::Nt(n) => match (self.s_index.get(n), self.p_index.get(n)) {
                    (Some(&i), _) => Col::S(i),
                    (_, Some(&i)) => Col::P(i),
                    _ => return Err(Error::UndeclaredSymbol(n.to_string())),
                },
            };
            self.set(&mut x, si, c);
        }
        Ok(x)
    }

    /// Builds a P-profile from one term per P-nonterminal in name order.
    pub fn p_profile_from_terms(&self, terms: Vec<TermNF>) -> Result<PProfile> {
        if terms.len() != self.np() {
            return Err(Error::InvalidArgument(format!(
                "expected {} terms, got {}",
                self.np(),
                terms.len()
            )));
        }
        Ok(PProfile { terms: terms.into_boxed_slice() })
    }

    /// Renders a term of the `p`-th context with S-nonterminal names.
    pub fn render_term(&self, t: &TermNF) -> String {
        t.render(&|v| self.var_name(v))
    }

    /// Human-readable form: S-profiles as `{(s, q), …}`, P-profiles as `p: term; …`.
    pub fn render(&self, x: &Profile) -> String {
        match x {
            Profile::S(y) => {
                let parts: Vec<String> = self.pairs(y).iter().map(|(s, t)| format!("({s}, {t})")).collect();
                format!("{{{}}}", parts.join(", "))
            }
            Profile::P(y) => {
                let parts: Vec<String> = self
                    .p_names
                    .iter()
                    .zip(y.terms.iter())
                    .map(|(p, t)| format!("{p}: {}", self.render_term(t)))
                    .collect();
                parts.join("; ")
            }
        }
    }

    /// Whether `t` contains an accepting monomial of the `p`-th P-nonterminal.
    fn derives(&self, p: usize, t: &TermNF) -> bool {
        t.meets(&self.accepting[p])
    }
}

fn col_key(c: Col, ns: usize, np: usize) -> usize {
    match c {
        Col::S(i) => i,
        Col::P(i) => ns + i,
        Col::Bottom => ns + np,
    }
}

/// Profile of the bridge `a`.
pub fn bridge_profile(a: &Label, ctx: &RecognizerCtx) -> Result<SProfile> {
    ctx.bridges
        .get(a)
        .cloned()
        .ok_or_else(|| Error::UnknownLabel(a.to_string()))
}

/// Converts a profile into one term per P-nonterminal: P-profiles are
/// returned as is; an S-profile yields `nf_p(Σ { s | (s, ⊥) ∈ x })` over the
/// variables known to `p`.
pub fn par_map(x: &Profile, ctx: &RecognizerCtx) -> Vec<TermNF> {
    match x {
        Profile::P(y) => y.terms.to_vec(),
        Profile::S(y) => (0..ctx.np()).map(|p| par_component(y, p, ctx)).collect(),
    }
}

fn par_component(y: &SProfile, p: usize, ctx: &RecognizerCtx) -> TermNF {
    let pctx = &ctx.contexts[p];
    TermNF::from_monomials((0..ctx.ns()).filter(|&s| ctx.get(y, s, Col::Bottom)).filter_map(|s| {
        let v = Var(s as u32);
        pctx.class(v)?;
        Monomial::one().mul_nf(&Monomial::var(v), pctx)
    }))
}

/// Converts a profile into a relation: S-profiles are returned as is; a
/// P-profile yields `{ (s, q) | s -> p ∘ q, p derives a monomial of x_p }`.
pub fn seq_map(x: &Profile, ctx: &RecognizerCtx) -> SProfile {
    match x {
        Profile::S(y) => y.clone(),
        Profile::P(y) => {
            let mut out = ctx.empty_s();
            for (p, t) in y.terms.iter().enumerate() {
                if ctx.derives(p, t) {
                    for &(s, q) in &ctx.seq_rules[p] {
                        ctx.set(&mut out, s, q);
                    }
                }
            }
            out
        }
    }
}

/// `x1 ∥ x2`: componentwise product of the par-images.
pub fn op_parallel(x1: &Profile, x2: &Profile, ctx: &RecognizerCtx) -> PProfile {
    let terms = (0..ctx.np())
        .map(|p| {
            let t1 = component(x1, p, ctx);
            let t2 = component(x2, p, ctx);
            term_mul(&t1, &t2, &ctx.contexts[p])
        })
        .collect();
    PProfile { terms }
}

fn component<'a>(x: &'a Profile, p: usize, ctx: &RecognizerCtx) -> std::borrow::Cow<'a, TermNF> {
    match x {
        Profile::P(y) => std::borrow::Cow::Borrowed(&y.terms[p]),
        Profile::S(y) => std::borrow::Cow::Owned(par_component(y, p, ctx)),
    }
}

/// `x1 ∘ x2`: relational composition of the seq-images, plus `(s, ⊥)` for
/// every `(s, p) ∈ seq(x1)` such that `p` derives a monomial of `par(x2)_p`.
pub fn op_serial(x1: &Profile, x2: &Profile, ctx: &RecognizerCtx) -> SProfile {
    let y1 = seq_map(x1, ctx);
    let y2 = seq_map(x2, ctx);
    let wpr = ctx.words_per_row;
    let mut out = ctx.empty_s();
    let mut finishing: Vec<Option<bool>> = vec![None; ctx.np()];
    for s in 0..ctx.ns() {
        for c in ctx.row_cols(&y1, s) {
            match c {
                Col::S(s1) => {
                    let src = ctx.row(&y2, s1);
                    let dst = &mut out.words[s * wpr..(s + 1) * wpr];
                    for (d, w) in dst.iter_mut().zip(src) {
                        *d |= w;
                    }
                }
                Col::P(p) => {
                    let fin = *finishing[p]
                        .get_or_insert_with(|| ctx.derives(p, &component(x2, p, ctx)));
                    if fin {
                        ctx.set(&mut out, s, Col::Bottom);
                    }
                }
                Col::Bottom => {}
            }
        }
    }
    out
}

/// `h(g)`, folding the canonical decomposition bottom-up.
pub fn eval_graph(g: &SPGraph, ctx: &RecognizerCtx) -> Result<Profile> {
    Ok(match g {
        SPGraph::Bridge(a) => Profile::S(bridge_profile(a, ctx)?),
        SPGraph::SNode(cs) => {
            let mut acc = eval_graph(&cs[0], ctx)?;
            for c in &cs[1..] {
                acc = Profile::S(op_serial(&acc, &eval_graph(c, ctx)?, ctx));
            }
            acc
        }
        SPGraph::PNode(cs) => {
            let mut acc = eval_graph(&cs[0], ctx)?;
            for c in &cs[1..] {
                acc = Profile::P(op_parallel(&acc, &eval_graph(c, ctx)?, ctx));
            }
            acc
        }
    })
}

/// Acceptance of a profile produced by [`eval_graph`] or a closure: a
/// P-profile is accepted when an axiom `p` derives a nonempty monomial of
/// `x_p`; an S-profile when it holds `(s, ⊥)` for an axiom `s`.
pub fn accepts(x: &Profile, ctx: &RecognizerCtx) -> bool {
    match x {
        Profile::P(y) => ctx.p_axioms.iter().any(|&p| {
            y.terms[p]
                .monomials()
                .iter()
                .any(|m| !m.is_one() && ctx.accepting[p].binary_search(m).is_ok())
        }),
        Profile::S(y) => ctx.s_axioms.iter().any(|&s| ctx.get(y, s, Col::Bottom)),
    }
}

/// Whether `g` belongs to the language of the regular grammar `grammar`.
pub fn member(g: &SPGraph, grammar: &Grammar) -> Result<bool> {
    let ctx = build_ctx(grammar)?;
    for a in g.labels() {
        if !ctx.alphabet().contains(&a) {
            return Err(Error::UnknownLabel(a.to_string()));
        }
    }
    Ok(accepts(&eval_graph(g, &ctx)?, &ctx))
}

/// Result of [`reachable_profiles`].
#[derive(Debug, Clone)]
pub struct Closure {
    /// Distinct profiles in discovery order.
    pub profiles: Vec<Profile>,
    /// False when the cap stopped the closure early.
    pub saturated: bool,
}

impl Closure {
    pub fn p_count(&self) -> usize {
        self.profiles.iter().filter(|x| x.is_p()).count()
    }

    pub fn s_count(&self) -> usize {
        self.profiles.len() - self.p_count()
    }
}

/// Least set containing all bridge profiles and closed under `∘` and `∥`,
/// explored breadth-first until it saturates or exceeds `cap` elements.
pub fn reachable_profiles(ctx: &RecognizerCtx, cap: usize) -> Closure {
    let mut profiles: Vec<Profile> = Vec::new();
    let mut seen: HashMap<Profile, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut push = |x: Profile, profiles: &mut Vec<Profile>, queue: &mut VecDeque<usize>| {
        if !seen.contains_key(&x) {
            seen.insert(x.clone(), profiles.len());
            queue.push_back(profiles.len());
            profiles.push(x);
        }
    };
    for y in ctx.bridges.values() {
        push(Profile::S(y.clone()), &mut profiles, &mut queue);
    }
    while let Some(i) = queue.pop_front() {
        if profiles.len() > cap {
            return Closure { profiles, saturated: false };
        }
        for j in 0..=i {
            let (xi, xj) = (profiles[i].clone(), profiles[j].clone());
            push(Profile::S(op_serial(&xi, &xj, ctx)), &mut profiles, &mut queue);
            if i != j {
                push(Profile::S(op_serial(&xj, &xi, ctx)), &mut profiles, &mut queue);
            }
            push(Profile::P(op_parallel(&xi, &xj, ctx)), &mut profiles, &mut queue);
        }
    }
    let saturated = profiles.len() <= cap;
    Closure { profiles, saturated }
}
