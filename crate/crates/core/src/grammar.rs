//! SP-grammars: data model, parsing, regularity checks, normalization and the
//! alternative form used by the recognizer.
//!
//! Rules are classified syntactically into the regular shapes
//!
//! | variant | shape                          |
//! |---------|--------------------------------|
//! | `A`     | `p -> p ∥ s^ℓ`                 |
//! | `B`     | `p -> s1^ℓ1 ∥ … ∥ sk^ℓk`, Σℓ ≥ 2 |
//! | `C`     | `s -> p ∘ s1`                  |
//! | `D`     | `s -> p1 ∘ p2`                 |
//! | `E`     | `p -> a`                       |
//! | `F`     | `s -> a`                       |
//!
//! plus the internal `Alt` rule `p -> s` and `Free` for everything else.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use indexmap::{IndexMap, IndexSet};

use crate::error::{Error, Result};
use crate::spgraph::{is_label_name, Label};
use crate::syntax::{end_pos, is_ident_char, is_ident_start, syntax_err, tokenize, Expr, ExprParser, Tok};

/// Nonterminal name.
pub type Name = Arc<str>;

/// Nonterminal kind. `General` nonterminals have no S/P typing and may only
/// occur in free rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    P,
    S,
    General,
}

/// Right-hand side of a free rule.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RhsTerm {
    Label(Label),
    Nt(Name),
    Serial(Box<RhsTerm>, Box<RhsTerm>),
    Parallel(Box<RhsTerm>, Box<RhsTerm>),
}

impl RhsTerm {
    pub fn serial(l: RhsTerm, r: RhsTerm) -> RhsTerm {
        RhsTerm::Serial(Box::new(l), Box::new(r))
    }

    pub fn parallel(l: RhsTerm, r: RhsTerm) -> RhsTerm {
        RhsTerm::Parallel(Box::new(l), Box::new(r))
    }

    /// Nonterminal leaves, left to right, with repetitions.
    pub fn nonterminals(&self) -> Vec<&Name> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let RhsTerm::Nt(n) = t {
                out.push(n);
            }
        });
        out
    }

    /// Labels occurring in the term.
    pub fn labels(&self) -> Vec<&Label> {
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let RhsTerm::Label(a) = t {
                out.push(a);
            }
        });
        out
    }

    fn walk<'a>(&'a self, f: &mut impl FnMut(&'a RhsTerm)) {
        f(self);
        if let RhsTerm::Serial(l, r) | RhsTerm::Parallel(l, r) = self {
            l.walk(f);
            r.walk(f);
        }
    }

    /// Replaces nonterminal leaves left to right with `names`.
    pub fn rename_leaves(&self, names: &mut impl Iterator<Item = Name>) -> RhsTerm {
        match self {
            RhsTerm::Label(a) => RhsTerm::Label(a.clone()),
            RhsTerm::Nt(_) => RhsTerm::Nt(names.next().expect("one name per leaf")),
            RhsTerm::Serial(l, r) => {
                let l = l.rename_leaves(names);
                RhsTerm::serial(l, r.rename_leaves(names))
            }
            RhsTerm::Parallel(l, r) => {
                let l = l.rename_leaves(names);
                RhsTerm::parallel(l, r.rename_leaves(names))
            }
        }
    }

    fn parallel_components(&self) -> Vec<&RhsTerm> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            match t {
                RhsTerm::Parallel(l, r) => {
                    stack.push(r);
                    stack.push(l);
                }
                other => out.push(other),
            }
        }
        out
    }

    fn parallel_of(parts: Vec<RhsTerm>) -> RhsTerm {
        let mut it = parts.into_iter();
        let first = it.next().expect("nonempty parallel body");
        it.fold(first, RhsTerm::parallel)
    }
}

impl fmt::Display for RhsTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhsTerm::Label(a) => write!(f, "{a}"),
            RhsTerm::Nt(n) => write!(f, "{n}"),
            RhsTerm::Parallel(l, r) => {
                write!(f, "{l} || ")?;
                if matches!(**r, RhsTerm::Parallel(..)) {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
            RhsTerm::Serial(l, r) => {
                if matches!(**l, RhsTerm::Parallel(..)) {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                f.write_str(" . ")?;
                if matches!(**r, RhsTerm::Label(_) | RhsTerm::Nt(_)) {
                    write!(f, "{r}")
                } else {
                    write!(f, "({r})")
                }
            }
        }
    }
}

/// A classified grammar rule.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    A { p: Name, s: Name, ell: u32 },
    /// Body sorted by name, one entry per distinct nonterminal.
    B { p: Name, body: Vec<(Name, u32)> },
    C { s: Name, p: Name, s1: Name },
    D { s: Name, p1: Name, p2: Name },
    E { p: Name, a: Label },
    F { s: Name, a: Label },
    Alt { p: Name, s: Name },
    Free { lhs: Name, rhs: RhsTerm },
}

impl Rule {
    pub fn lhs(&self) -> &Name {
        match self {
            Rule::A { p, .. } | Rule::B { p, .. } | Rule::E { p, .. } | Rule::Alt { p, .. } => p,
            Rule::C { s, .. } | Rule::D { s, .. } | Rule::F { s, .. } => s,
            Rule::Free { lhs, .. } => lhs,
        }
    }

    /// The rule's right-hand side as a term; exponents become parallel copies.
    pub fn rhs_term(&self) -> RhsTerm {
        let nt = |n: &Name| RhsTerm::Nt(n.clone());
        match self {
            Rule::A { p, s, ell } => {
                let mut parts = vec![nt(p)];
                parts.extend((0..*ell).map(|_| nt(s)));
                RhsTerm::parallel_of(parts)
            }
            Rule::B { body, .. } => RhsTerm::parallel_of(
                body.iter()
                    .flat_map(|(s, l)| (0..*l).map(move |_| nt(s)))
                    .collect(),
            ),
            Rule::C { p, s1, .. } => RhsTerm::serial(nt(p), nt(s1)),
            Rule::D { p1, p2, .. } => RhsTerm::serial(nt(p1), nt(p2)),
            Rule::E { a, .. } | Rule::F { a, .. } => RhsTerm::Label(a.clone()),
            Rule::Alt { s, .. } => nt(s),
            Rule::Free { rhs, .. } => rhs.clone(),
        }
    }

    /// Whether the rule has one of the regular shapes A–F.
    pub fn is_regular_shape(&self) -> bool {
        match self {
            Rule::B { body, .. } => body.iter().map(|(_, l)| *l as u64).sum::<u64>() >= 2,
            Rule::Alt { .. } | Rule::Free { .. } => false,
            _ => true,
        }
    }

    fn rename_lhs(&self, to: &Name) -> Rule {
        let mut r = self.clone();
        match &mut r {
            Rule::A { p, .. } | Rule::B { p, .. } | Rule::E { p, .. } | Rule::Alt { p, .. } => {
                *p = to.clone()
            }
            Rule::C { s, .. } | Rule::D { s, .. } | Rule::F { s, .. } => *s = to.clone(),
            Rule::Free { lhs, .. } => *lhs = to.clone(),
        }
        r
    }

    /// Classifies `lhs -> rhs` by shape, given the kinds of all nonterminals.
    pub fn classify(lhs: Name, rhs: RhsTerm, kind_of: impl Fn(&str) -> Option<Kind>) -> Rule {
        let lhs_kind = kind_of(&lhs);
        let kind = |t: &RhsTerm| match t {
            RhsTerm::Nt(n) => kind_of(n),
            _ => None,
        };
        let name = |t: &RhsTerm| match t {
            RhsTerm::Nt(n) => n.clone(),
            _ => unreachable!("checked to be a nonterminal"),
        };
        match (&rhs, lhs_kind) {
            (RhsTerm::Label(a), Some(Kind::P)) => return Rule::E { p: lhs, a: a.clone() },
            (RhsTerm::Label(a), Some(Kind::S)) => return Rule::F { s: lhs, a: a.clone() },
            (RhsTerm::Serial(l, r), Some(Kind::S)) if kind(l) == Some(Kind::P) => {
                match kind(r) {
                    Some(Kind::S) => return Rule::C { s: lhs, p: name(l), s1: name(r) },
                    Some(Kind::P) => return Rule::D { s: lhs, p1: name(l), p2: name(r) },
                    _ => {}
                }
            }
            (RhsTerm::Nt(_) | RhsTerm::Parallel(..), Some(Kind::P)) => {
                let comps = rhs.parallel_components();
                let mut self_refs = 0;
                let mut body: BTreeMap<Name, u32> = BTreeMap::new();
                let mut ok = true;
                for c in &comps {
                    match c {
                        RhsTerm::Nt(n) if **n == *lhs => self_refs += 1,
                        RhsTerm::Nt(n) if kind_of(n) == Some(Kind::S) => {
                            *body.entry(n.clone()).or_default() += 1
                        }
                        _ => ok = false,
                    }
                }
                if ok && self_refs == 0 && comps.len() == 1 {
                    let (s, _) = body.into_iter().next().expect("one entry");
                    return Rule::Alt { p: lhs, s };
                }
                if ok && self_refs == 0 {
                    return Rule::B { p: lhs, body: body.into_iter().collect() };
                }
                if ok && self_refs == 1 && body.len() == 1 {
                    let (s, ell) = body.into_iter().next().expect("one entry");
                    return Rule::A { p: lhs, s, ell };
                }
            }
            _ => {}
        }
        Rule::Free { lhs, rhs }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pow = |n: &Name, l: u32| if l == 1 { n.to_string() } else { format!("{n}^{l}") };
        match self {
            Rule::A { p, s, ell } => write!(f, "{p} -> {p} || {}", pow(s, *ell)),
            Rule::B { p, body } => {
                let parts: Vec<String> = body.iter().map(|(s, l)| pow(s, *l)).collect();
                write!(f, "{p} -> {}", parts.join(" || "))
            }
            Rule::C { s, p, s1 } => write!(f, "{s} -> {p} . {s1}"),
            Rule::D { s, p1, p2 } => write!(f, "{s} -> {p1} . {p2}"),
            Rule::E { p, a } => write!(f, "{p} -> {a}"),
            Rule::F { s, a } => write!(f, "{s} -> {a}"),
            Rule::Alt { p, s } => write!(f, "{p} -> {s}"),
            Rule::Free { lhs, rhs } => write!(f, "{lhs} -> {rhs}"),
        }
    }
}

/// A grammar `(N, R, X)` over a fixed alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grammar {
    alphabet: BTreeSet<Label>,
    nonterminals: IndexMap<Name, Kind>,
    rules: IndexSet<Rule>,
    axioms: IndexSet<Name>,
}

fn is_nonterminal_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if is_ident_start(c)) && chars.all(is_ident_char)
}

impl Grammar {
    pub fn new(alphabet: impl IntoIterator<Item = Label>) -> Grammar {
        Grammar {
            alphabet: alphabet.into_iter().collect(),
            nonterminals: IndexMap::new(),
            rules: IndexSet::new(),
            axioms: IndexSet::new(),
        }
    }

    pub fn alphabet(&self) -> &BTreeSet<Label> {
        &self.alphabet
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = (&Name, Kind)> {
        self.nonterminals.iter().map(|(n, k)| (n, *k))
    }

    pub fn names_of_kind(&self, kind: Kind) -> impl Iterator<Item = &Name> {
        self.nonterminals
            .iter()
            .filter(move |(_, k)| **k == kind)
            .map(|(n, _)| n)
    }

    pub fn kind(&self, name: &str) -> Option<Kind> {
        self.nonterminals.get(name).copied()
    }

    /// The declared `Name` for `name`.
    pub fn name(&self, name: &str) -> Option<&Name> {
        self.nonterminals.get_key_value(name).map(|(n, _)| n)
    }

    pub fn rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter()
    }

    pub fn rule_count(&self) -> usize {
        self.rules.len()
    }

    pub fn rules_of<'a>(&'a self, lhs: &'a str) -> impl Iterator<Item = &'a Rule> + 'a {
        self.rules.iter().filter(move |r| &**r.lhs() == lhs)
    }

    pub fn axioms(&self) -> impl Iterator<Item = &Name> {
        self.axioms.iter()
    }

    pub fn is_axiom(&self, name: &str) -> bool {
        self.axioms.contains(name)
    }

    /// Adds a label to the alphabet.
    pub fn add_label(&mut self, a: Label) -> Result<()> {
        if self.nonterminals.contains_key(a.as_str()) {
            return Err(Error::Duplicate(a.to_string()));
        }
        self.alphabet.insert(a);
        Ok(())
    }

    pub fn add_nonterminal(&mut self, name: &str, kind: Kind) -> Result<Name> {
        if !is_nonterminal_name(name) {
            return Err(Error::InvalidName(name.to_string()));
        }
        if self.nonterminals.contains_key(name) || self.alphabet.iter().any(|a| a.as_str() == name) {
            return Err(Error::Duplicate(name.to_string()));
        }
        let n: Name = Arc::from(name);
        self.nonterminals.insert(n.clone(), kind);
        Ok(n)
    }

    pub fn add_axiom(&mut self, name: &str) -> Result<()> {
        let n = self
            .name(name)
            .cloned()
            .ok_or_else(|| Error::UndeclaredSymbol(name.to_string()))?;
        self.axioms.insert(n);
        Ok(())
    }

    /// Adds a rule after checking declarations and variant kinds.
    pub fn add_rule(&mut self, rule: Rule) -> Result<()> {
        self.check_rule(&rule)?;
        self.rules.insert(rule);
        Ok(())
    }

    fn expect(&self, n: &Name, kind: Kind, role: &str) -> Result<()> {
        match self.kind(n) {
            None => Err(Error::UndeclaredSymbol(n.to_string())),
            Some(k) if k == kind => Ok(()),
            Some(k) => Err(Error::KindMismatch(format!(
                "`{n}` is of kind {k:?} but is used as {role} of kind {kind:?}"
            ))),
        }
    }

    fn expect_label(&self, a: &Label) -> Result<()> {
        if self.alphabet.contains(a) {
            Ok(())
        } else {
            Err(Error::UndeclaredLabel(a.to_string()))
        }
    }

    fn check_rule(&self, rule: &Rule) -> Result<()> {
        use Kind::{P, S};
        match rule {
            Rule::A { p, s, ell } => {
                self.expect(p, P, "A-rule head")?;
                self.expect(s, S, "A-rule body")?;
                if *ell == 0 {
                    return Err(Error::InvalidArgument(format!("zero exponent in `{rule}`")));
                }
            }
            Rule::B { p, body } => {
                self.expect(p, P, "B-rule head")?;
                for (s, l) in body {
                    self.expect(s, S, "B-rule body")?;
                    if *l == 0 {
                        return Err(Error::InvalidArgument(format!("zero exponent in `{rule}`")));
                    }
                }
            }
            Rule::C { s, p, s1 } => {
                self.expect(s, S, "C-rule head")?;
                self.expect(p, P, "C-rule left factor")?;
                self.expect(s1, S, "C-rule right factor")?;
            }
            Rule::D { s, p1, p2 } => {
                self.expect(s, S, "D-rule head")?;
                self.expect(p1, P, "D-rule left factor")?;
                self.expect(p2, P, "D-rule right factor")?;
            }
            Rule::E { p, a } => {
                self.expect(p, P, "E-rule head")?;
                self.expect_label(a)?;
            }
            Rule::F { s, a } => {
                self.expect(s, S, "F-rule head")?;
                self.expect_label(a)?;
            }
            Rule::Alt { p, s } => {
                self.expect(p, P, "Alt-rule head")?;
                self.expect(s, S, "Alt-rule body")?;
            }
            Rule::Free { lhs, rhs } => {
                if self.kind(lhs).is_none() {
                    return Err(Error::UndeclaredSymbol(lhs.to_string()));
                }
                for n in rhs.nonterminals() {
                    if self.kind(n).is_none() {
                        return Err(Error::UndeclaredSymbol(n.to_string()));
                    }
                }
                for a in rhs.labels() {
                    self.expect_label(a)?;
                }
            }
        }
        Ok(())
    }

    /// A name derived from `base` that is not yet declared: `base$1`, `base$2`, …
    pub fn fresh_name(&self, base: &str) -> String {
        (1..)
            .map(|i| format!("{base}${i}"))
            .find(|n| !self.nonterminals.contains_key(n.as_str()))
            .expect("unbounded supply")
    }

    pub fn is_regular(&self) -> bool {
        validate_regular(self).is_regular()
    }

    pub fn is_normalized(&self) -> bool {
        self.normal_form_violation().is_none()
    }

    /// Regular up to Alt rules, with no E-rules left.
    pub fn is_alternative(&self) -> bool {
        self.rules
            .iter()
            .all(|r| matches!(r, Rule::Alt { .. }) || (r.is_regular_shape() && !matches!(r, Rule::E { .. })))
    }

    fn allows_alt_regular(&self) -> bool {
        self.rules
            .iter()
            .all(|r| matches!(r, Rule::Alt { .. }) || r.is_regular_shape())
    }

    /// First violation of the normal-form conditions, if any. Alt rules are permitted.
    fn normal_form_violation(&self) -> Option<String> {
        if !self.allows_alt_regular() {
            return Some("grammar is not regular".into());
        }
        let mut a_rules: BTreeMap<(&Name, &Name), usize> = BTreeMap::new();
        for r in &self.rules {
            if let Rule::A { p, s, .. } = r {
                *a_rules.entry((p, s)).or_default() += 1;
            }
        }
        if let Some(((p, s), _)) = a_rules.iter().find(|(_, n)| **n > 1) {
            return Some(format!("several A-rules for ({p}, {s})"));
        }
        for r in &self.rules {
            if let Rule::B { p, body } = r {
                if let Some((s, _)) = body.iter().find(|(s, _)| a_rules.contains_key(&(p, s))) {
                    return Some(format!("`{s}` is both periodic and bounded for `{p}`"));
                }
            }
        }
        None
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |it: &mut dyn Iterator<Item = String>| it.collect::<Vec<_>>().join(" ");
        writeln!(f, "alphabet: {}", join(&mut self.alphabet.iter().map(|a| a.to_string())))?;
        writeln!(f, "pnonterminals: {}", join(&mut self.names_of_kind(Kind::P).map(|n| n.to_string())))?;
        writeln!(f, "snonterminals: {}", join(&mut self.names_of_kind(Kind::S).map(|n| n.to_string())))?;
        if self.names_of_kind(Kind::General).next().is_some() {
            writeln!(
                f,
                "nonterminals: {}",
                join(&mut self.names_of_kind(Kind::General).map(|n| n.to_string()))
            )?;
        }
        writeln!(f, "axioms: {}", join(&mut self.axioms.iter().map(|n| n.to_string())))?;
        writeln!(f, "rules:")?;
        for r in &self.rules {
            writeln!(f, "{r}")?;
        }
        Ok(())
    }
}

const HEADERS: [&str; 6] = ["alphabet", "pnonterminals", "snonterminals", "nonterminals", "axioms", "rules"];

/// Parses the grammar file format.
pub fn parse_grammar(text: &str) -> Result<Grammar> {
    let mut labels = Vec::new();
    let mut decls: Vec<(String, Kind, usize)> = Vec::new();
    let mut axioms = Vec::new();
    let mut rule_lines = Vec::new();
    let mut in_rules = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("");
        if line.trim().is_empty() {
            continue;
        }
        let header = line
            .split_once(':')
            .filter(|(h, _)| HEADERS.contains(&h.trim()))
            .map(|(h, rest)| (h.trim(), rest));
        match header {
            Some((h, rest)) => {
                let items = rest.split_whitespace().map(str::to_string);
                match h {
                    "alphabet" => labels.extend(items.map(|x| (x, line_no))),
                    "pnonterminals" => decls.extend(items.map(|x| (x, Kind::P, line_no))),
                    "snonterminals" => decls.extend(items.map(|x| (x, Kind::S, line_no))),
                    "nonterminals" => decls.extend(items.map(|x| (x, Kind::General, line_no))),
                    "axioms" => axioms.extend(items),
                    _ => {
                        in_rules = true;
                        if !rest.trim().is_empty() {
                            rule_lines.push((rest.to_string(), line_no));
                        }
                    }
                }
            }
            None if in_rules => rule_lines.push((line.to_string(), line_no)),
            None => {
                return Err(Error::Syntax {
                    line: line_no,
                    col: 1,
                    message: "expected a section header".into(),
                })
            }
        }
    }
    let mut g = Grammar::new([]);
    for (a, line) in labels {
        if !is_label_name(&a) {
            return Err(Error::Syntax { line, col: 1, message: format!("invalid label `{a}`") });
        }
        g.add_label(Label::new(&a)?)?;
    }
    for (n, kind, line) in decls {
        g.add_nonterminal(&n, kind).map_err(|e| match e {
            Error::InvalidName(n) => Error::Syntax { line, col: 1, message: format!("invalid name `{n}`") },
            other => other,
        })?;
    }
    for (line, line_no) in rule_lines {
        let rule = parse_rule(&g, &line, line_no)?;
        g.add_rule(rule)?;
    }
    for a in axioms {
        g.add_axiom(&a)?;
    }
    Ok(g)
}

fn parse_rule(g: &Grammar, line: &str, line_no: usize) -> Result<Rule> {
    let toks = tokenize(line, line_no)?;
    let (lhs, rest) = match toks.as_slice() {
        [(Tok::Ident(lhs), pos), (Tok::Arrow, _), rest @ ..] => {
            let name = g
                .name(lhs)
                .cloned()
                .ok_or_else(|| match g.alphabet.iter().any(|a| a.as_str() == lhs) {
                    true => syntax_err(*pos, format!("label `{lhs}` on a left-hand side")),
                    false => Error::UndeclaredSymbol(lhs.clone()),
                })?;
            (name, rest)
        }
        [(_, pos), ..] => return Err(syntax_err(*pos, "expected `name -> term`")),
        [] => unreachable!("blank lines are skipped"),
    };
    let expr = ExprParser::new(rest, end_pos(line, line_no)).parse_all()?;
    let rhs = resolve(g, &expr, true)?;
    Ok(Rule::classify(lhs, rhs, |n| g.kind(n)))
}

/// Resolves identifiers to labels or nonterminals; `s^k` expands to `k`
/// parallel copies and is only allowed on S-nonterminals inside parallel bodies.
fn resolve(g: &Grammar, e: &Expr, in_parallel: bool) -> Result<RhsTerm> {
    Ok(match e {
        Expr::Atom { name, exp, pos } => {
            let term = if let Some(n) = g.name(name) {
                RhsTerm::Nt(n.clone())
            } else if let Some(a) = g.alphabet.iter().find(|a| a.as_str() == name) {
                RhsTerm::Label(a.clone())
            } else {
                return Err(Error::UndeclaredSymbol(name.clone()));
            };
            match exp {
                None => term,
                Some(k) => {
                    let is_s = matches!(&term, RhsTerm::Nt(n) if g.kind(n) == Some(Kind::S));
                    if !in_parallel || !is_s {
                        return Err(syntax_err(
                            *pos,
                            "exponents are only allowed on S-nonterminals inside parallel bodies",
                        ));
                    }
                    RhsTerm::parallel_of((0..*k).map(|_| term.clone()).collect())
                }
            }
        }
        Expr::Serial(l, r) => RhsTerm::serial(resolve(g, l, false)?, resolve(g, r, false)?),
        Expr::Parallel(l, r) => RhsTerm::parallel(resolve(g, l, true)?, resolve(g, r, true)?),
    })
}

/// Outcome of [`validate_regular`]: the rules that do not have a regular shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegularityReport {
    pub offending: Vec<(Rule, String)>,
}

impl RegularityReport {
    pub fn is_regular(&self) -> bool {
        self.offending.is_empty()
    }
}

impl fmt::Display for RegularityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.offending.is_empty() {
            return f.write_str("regular");
        }
        let parts: Vec<String> = self.offending.iter().map(|(r, why)| format!("`{r}`: {why}")).collect();
        write!(f, "{}", parts.join("; "))
    }
}

pub fn validate_regular(g: &Grammar) -> RegularityReport {
    let offending = g
        .rules
        .iter()
        .filter_map(|r| {
            let why = match r {
                Rule::B { .. } if !r.is_regular_shape() => "parallel body needs two or more factors",
                Rule::Alt { .. } => "Alt rules are internal to alternative grammars",
                Rule::Free { .. } => "not of a regular shape",
                _ => return None,
            };
            Some((r.clone(), why.to_string()))
        })
        .collect();
    RegularityReport { offending }
}

fn require_regular(g: &Grammar) -> Result<()> {
    let report = validate_regular(g);
    if report.is_regular() {
        Ok(())
    } else {
        Err(Error::NotRegular(report.to_string()))
    }
}

/// Brings a regular grammar into normal form: at most one A-rule per `(p, s)`
/// and no S-nonterminal both periodic and bounded for the same `p`.
///
/// For `n ≥ 2` A-rules on `(p, s)` each rule gets its own copy `s$i` of `s`.
/// When a single A-rule on `(p, s)` clashes with B-rules of `p`, the B-rule
/// occurrences are renamed to one copy of `s`. Copies inherit all rules of `s`.
pub fn normalize(g: &Grammar) -> Result<Grammar> {
    require_regular(g)?;
    let mut out = g.clone();
    let mut groups: IndexMap<(Name, Name), Vec<usize>> = IndexMap::new();
    for (i, r) in g.rules.iter().enumerate() {
        if let Rule::A { p, s, .. } = r {
            groups.entry((p.clone(), s.clone())).or_default().push(i);
        }
    }
    let mut rules: Vec<Rule> = g.rules.iter().cloned().collect();
    let mut copies: Vec<(Name, Name)> = Vec::new();
    for ((_, s), idxs) in groups.iter().filter(|(_, v)| v.len() >= 2) {
        for &i in idxs {
            let fresh = out.add_nonterminal(&out.fresh_name(s), Kind::S)?;
            if let Rule::A { s: target, .. } = &mut rules[i] {
                *target = fresh.clone();
            }
            copies.push((s.clone(), fresh));
        }
    }
    let single: BTreeSet<(Name, Name)> = groups
        .iter()
        .filter(|(_, v)| v.len() == 1)
        .map(|(k, _)| k.clone())
        .collect();
    let mut b_copy: BTreeMap<Name, Name> = BTreeMap::new();
    for r in rules.iter_mut() {
        if let Rule::B { p, body } = r {
            let mut changed = false;
            for (s, _) in body.iter_mut() {
                if single.contains(&(p.clone(), s.clone())) {
                    let copy = match b_copy.get(s) {
                        Some(c) => c.clone(),
                        None => {
                            let c = out.add_nonterminal(&out.fresh_name(s), Kind::S)?;
                            copies.push((s.clone(), c.clone()));
                            b_copy.insert(s.clone(), c.clone());
                            c
                        }
                    };
                    *s = copy;
                    changed = true;
                }
            }
            if changed {
                body.sort();
            }
        }
    }
    for (orig, copy) in &copies {
        let inherited: Vec<Rule> = g.rules_of(orig).map(|r| r.rename_lhs(copy)).collect();
        rules.extend(inherited);
    }
    out.rules = rules.into_iter().collect();
    debug_assert!(out.is_normalized());
    Ok(out)
}

/// Replaces every E-rule `p -> a` by `p -> $alt_a` and adds `$alt_a -> a`.
/// `$alt_a` becomes an axiom when some axiom `p` had `p -> a`.
pub fn to_alternative(g: &Grammar) -> Result<Grammar> {
    require_regular(g)?;
    if let Some(why) = g.normal_form_violation() {
        return Err(Error::NotNormalized(why));
    }
    let mut out = g.clone();
    let mut alt: BTreeMap<Label, Name> = BTreeMap::new();
    let mut rules = Vec::with_capacity(g.rules.len());
    for r in &g.rules {
        match r {
            Rule::E { p, a } => {
                let s = match alt.get(a) {
                    Some(s) => s.clone(),
                    None => {
                        let base = format!("$alt_{a}");
                        let name = if out.nonterminals.contains_key(base.as_str()) {
                            out.fresh_name(&base)
                        } else {
                            base
                        };
                        let s = out.add_nonterminal(&name, Kind::S)?;
                        alt.insert(a.clone(), s.clone());
                        s
                    }
                };
                if g.is_axiom(p) {
                    out.axioms.insert(s.clone());
                }
                rules.push(Rule::Alt { p: p.clone(), s });
            }
            other => rules.push(other.clone()),
        }
    }
    for (a, s) in &alt {
        rules.push(Rule::F { s: s.clone(), a: a.clone() });
    }
    out.rules = rules.into_iter().collect();
    Ok(out)
}

/// Bases and periods of the S-nonterminals for one P-nonterminal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PTable {
    pub bounded: BTreeMap<Name, u32>,
    pub periodic: BTreeMap<Name, u32>,
}

/// Per P-nonterminal base and period maps.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BasePeriodTable {
    pub per_p: BTreeMap<Name, PTable>,
}

impl BasePeriodTable {
    pub fn get(&self, p: &str) -> Option<&PTable> {
        self.per_p.get(p)
    }
}

/// Computes `base(s,p)` (one plus the largest exponent of `s` in B-rules of
/// `p`, Alt rules counting as exponent 1) and `period(s,p)` (the exponent of
/// the unique A-rule for `(p, s)`). Several A-rules on one `(p, s)` make the
/// period ambiguous and are rejected.
pub fn compute_base_period(g: &Grammar) -> Result<BasePeriodTable> {
    if !g.allows_alt_regular() {
        return Err(Error::NotRegular(validate_regular(g).to_string()));
    }
    let mut seen = BTreeSet::new();
    for r in &g.rules {
        if let Rule::A { p, s, .. } = r {
            if !seen.insert((p, s)) {
                return Err(Error::NotNormalized(format!("several A-rules for ({p}, {s})")));
            }
        }
    }
    let mut table = BasePeriodTable::default();
    for p in g.names_of_kind(Kind::P) {
        table.per_p.insert(p.clone(), PTable::default());
    }
    for r in &g.rules {
        match r {
            Rule::A { p, s, ell } => {
                table.per_p.get_mut(p).expect("declared").periodic.insert(s.clone(), *ell);
            }
            Rule::B { p, body } => {
                let t = table.per_p.get_mut(p).expect("declared");
                for (s, l) in body {
                    let base = t.bounded.entry(s.clone()).or_insert(2);
                    *base = (*base).max(l + 1);
                }
            }
            Rule::Alt { p, s } => {
                table.per_p.get_mut(p).expect("declared").bounded.entry(s.clone()).or_insert(2);
            }
            _ => {}
        }
    }
    Ok(table)
}
