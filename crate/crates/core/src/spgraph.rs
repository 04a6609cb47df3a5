//! Series-parallel graphs as canonical decomposition trees.
//!
//! An [`SPTerm`] is a binary parse tree; an [`SPGraph`] is its canonical
//! form, where nested serial compositions are flattened into one
//! [`SPGraph::SNode`] and nested parallel compositions into one sorted
//! [`SPGraph::PNode`]. Two terms denote isomorphic graphs iff their canonical
//! forms are structurally equal.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::syntax::{end_pos, syntax_err, tokenize, Expr, ExprParser};

/// An edge label. Labels match `[a-z][a-z0-9_]*` and order by name.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label(Arc<str>);

impl Label {
    pub fn new(name: &str) -> Result<Label> {
        if is_label_name(name) {
            Ok(Label(Arc::from(name)))
        } else {
            Err(Error::InvalidName(name.to_string()))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub fn is_label_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase())
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_')
}

/// A ground term over bridges, serial and parallel composition.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SPTerm {
    Bridge(Label),
    Serial(Box<SPTerm>, Box<SPTerm>),
    Parallel(Box<SPTerm>, Box<SPTerm>),
}

impl SPTerm {
    pub fn bridge(label: &Label) -> SPTerm {
        SPTerm::Bridge(label.clone())
    }

    pub fn serial(l: SPTerm, r: SPTerm) -> SPTerm {
        SPTerm::Serial(Box::new(l), Box::new(r))
    }

    pub fn parallel(l: SPTerm, r: SPTerm) -> SPTerm {
        SPTerm::Parallel(Box::new(l), Box::new(r))
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            SPTerm::Bridge(_) => 1,
            SPTerm::Serial(l, r) | SPTerm::Parallel(l, r) => l.leaf_count() + r.leaf_count(),
        }
    }
}

impl fmt::Display for SPTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SPTerm::Bridge(a) => write!(f, "{a}"),
            SPTerm::Parallel(l, r) => {
                write!(f, "{l} || ")?;
                if matches!(**r, SPTerm::Parallel(..)) {
                    write!(f, "({r})")
                } else {
                    write!(f, "{r}")
                }
            }
            SPTerm::Serial(l, r) => {
                if matches!(**l, SPTerm::Parallel(..)) {
                    write!(f, "({l})")?;
                } else {
                    write!(f, "{l}")?;
                }
                f.write_str(" . ")?;
                if matches!(**r, SPTerm::Bridge(_)) {
                    write!(f, "{r}")
                } else {
                    write!(f, "({r})")
                }
            }
        }
    }
}

/// Canonical SP-graph.
///
/// The derived order (bridges first, ordered by label, then SNodes
/// lexicographically by child sequence, then PNodes) is the canonical order
/// used for PNode children and for witness tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum SPGraph {
    Bridge(Label),
    /// Serial composition of at least two children, none of which is an SNode.
    SNode(Vec<SPGraph>),
    /// Parallel composition of at least two sorted children, none of which is a PNode.
    PNode(Vec<SPGraph>),
}

impl SPGraph {
    pub fn bridge(label: &Label) -> SPGraph {
        SPGraph::Bridge(label.clone())
    }

    pub fn is_bridge(&self) -> bool {
        matches!(self, SPGraph::Bridge(_))
    }

    pub fn is_p_graph(&self) -> bool {
        matches!(self, SPGraph::PNode(_))
    }

    /// SNode children, or the graph itself for bridges and PNodes.
    pub fn serial_factors(&self) -> &[SPGraph] {
        match self {
            SPGraph::SNode(cs) => cs,
            other => std::slice::from_ref(other),
        }
    }

    /// PNode children, or the graph itself for bridges and SNodes.
    pub fn parallel_components(&self) -> &[SPGraph] {
        match self {
            SPGraph::PNode(cs) => cs,
            other => std::slice::from_ref(other),
        }
    }

    /// Rebuilds a binary term whose canonical form is `self`.
    pub fn to_term(&self) -> SPTerm {
        match self {
            SPGraph::Bridge(a) => SPTerm::Bridge(a.clone()),
            SPGraph::SNode(cs) => fold_term(cs, SPTerm::serial),
            SPGraph::PNode(cs) => fold_term(cs, SPTerm::parallel),
        }
    }

    /// Set of labels occurring in the graph.
    pub fn labels(&self) -> BTreeSet<Label> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(g) = stack.pop() {
            match g {
                SPGraph::Bridge(a) => {
                    out.insert(a.clone());
                }
                SPGraph::SNode(cs) | SPGraph::PNode(cs) => stack.extend(cs.iter()),
            }
        }
        out
    }
}

fn fold_term(cs: &[SPGraph], op: fn(SPTerm, SPTerm) -> SPTerm) -> SPTerm {
    let mut it = cs.iter();
    let first = it.next().expect("inner nodes have children").to_term();
    it.fold(first, |acc, c| op(acc, c.to_term()))
}

impl fmt::Display for SPGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SPGraph::Bridge(a) => write!(f, "{a}"),
            SPGraph::SNode(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" . ")?;
                    }
                    if c.is_p_graph() {
                        write!(f, "({c})")?;
                    } else {
                        write!(f, "{c}")?;
                    }
                }
                Ok(())
            }
            SPGraph::PNode(cs) => {
                for (i, c) in cs.iter().enumerate() {
                    if i > 0 {
                        f.write_str(" || ")?;
                    }
                    write!(f, "{c}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses a term over any labels.
pub fn parse_term(text: &str) -> Result<SPTerm> {
    parse_term_impl(text, None)
}

/// Parses a term, rejecting labels outside `alphabet`.
pub fn parse_term_in(text: &str, alphabet: &BTreeSet<Label>) -> Result<SPTerm> {
    parse_term_impl(text, Some(alphabet))
}

fn parse_term_impl(text: &str, alphabet: Option<&BTreeSet<Label>>) -> Result<SPTerm> {
    let toks = tokenize(text, 1)?;
    let expr = ExprParser::new(&toks, end_pos(text, 1)).parse_all()?;
    expr_to_term(&expr, alphabet)
}

fn expr_to_term(e: &Expr, alphabet: Option<&BTreeSet<Label>>) -> Result<SPTerm> {
    Ok(match e {
        Expr::Atom { name, exp, pos } => {
            if exp.is_some() {
                return Err(syntax_err(*pos, "exponents are not allowed in ground terms"));
            }
            let label =
                Label::new(name).map_err(|_| syntax_err(*pos, format!("invalid label `{name}`")))?;
            if let Some(sigma) = alphabet {
                if !sigma.contains(&label) {
                    return Err(Error::UndeclaredLabel(name.clone()));
                }
            }
            SPTerm::Bridge(label)
        }
        Expr::Serial(l, r) => SPTerm::serial(expr_to_term(l, alphabet)?, expr_to_term(r, alphabet)?),
        Expr::Parallel(l, r) => {
            SPTerm::parallel(expr_to_term(l, alphabet)?, expr_to_term(r, alphabet)?)
        }
    })
}

/// Canonical form of a term.
pub fn canonicalize(t: &SPTerm) -> SPGraph {
    match t {
        SPTerm::Bridge(a) => SPGraph::Bridge(a.clone()),
        SPTerm::Serial(..) => {
            let mut leaves = Vec::new();
            collect(t, true, &mut leaves);
            let mut children = Vec::new();
            for leaf in leaves {
                match canonicalize(leaf) {
                    SPGraph::SNode(cs) => children.extend(cs),
                    g => children.push(g),
                }
            }
            SPGraph::SNode(children)
        }
        SPTerm::Parallel(..) => {
            let mut leaves = Vec::new();
            collect(t, false, &mut leaves);
            let mut children = Vec::new();
            for leaf in leaves {
                match canonicalize(leaf) {
                    SPGraph::PNode(cs) => children.extend(cs),
                    g => children.push(g),
                }
            }
            children.sort();
            SPGraph::PNode(children)
        }
    }
}

/// Collects the maximal subterms below a chain of the same operator.
fn collect<'a>(t: &'a SPTerm, serial: bool, out: &mut Vec<&'a SPTerm>) {
    let mut stack = vec![t];
    while let Some(t) = stack.pop() {
        match t {
            SPTerm::Serial(l, r) if serial => {
                stack.push(r);
                stack.push(l);
            }
            SPTerm::Parallel(l, r) if !serial => {
                stack.push(r);
                stack.push(l);
            }
            other => out.push(other),
        }
    }
}

/// Serial composition `g1 ∘ g2` in canonical form.
pub fn compose_serial(g1: &SPGraph, g2: &SPGraph) -> SPGraph {
    let mut cs = Vec::with_capacity(g1.serial_factors().len() + g2.serial_factors().len());
    cs.extend_from_slice(g1.serial_factors());
    cs.extend_from_slice(g2.serial_factors());
    SPGraph::SNode(cs)
}

/// Parallel composition `g1 ∥ g2` in canonical form.
pub fn compose_parallel(g1: &SPGraph, g2: &SPGraph) -> SPGraph {
    let (a, b) = (g1.parallel_components(), g2.parallel_components());
    let mut cs = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            cs.push(a[i].clone());
            i += 1;
        } else {
            cs.push(b[j].clone());
            j += 1;
        }
    }
    cs.extend_from_slice(&a[i..]);
    cs.extend_from_slice(&b[j..]);
    SPGraph::PNode(cs)
}

/// Number of edges (bridge leaves).
pub fn edge_count(g: &SPGraph) -> usize {
    match g {
        SPGraph::Bridge(_) => 1,
        SPGraph::SNode(cs) | SPGraph::PNode(cs) => cs.iter().map(edge_count).sum(),
    }
}

/// All canonical graphs with at most `max_edges` edges over `alphabet`.
pub fn enumerate_graphs(alphabet: &BTreeSet<Label>, max_edges: usize) -> BTreeSet<SPGraph> {
    graphs_by_size(alphabet, max_edges).into_values().flatten().collect()
}

/// Canonical graphs grouped by exact edge count, for sizes `1..=max_edges`.
pub fn graphs_by_size(
    alphabet: &BTreeSet<Label>,
    max_edges: usize,
) -> BTreeMap<usize, Vec<SPGraph>> {
    // not_s[k]: bridges and PNodes of size k; not_p[k]: bridges and SNodes of size k.
    let mut not_s: Vec<Vec<SPGraph>> = vec![Vec::new(); max_edges + 1];
    let mut not_p: Vec<Vec<SPGraph>> = vec![Vec::new(); max_edges + 1];
    let mut out = BTreeMap::new();
    for k in 1..=max_edges {
        let mut level = Vec::new();
        if k == 1 {
            level.extend(alphabet.iter().map(SPGraph::bridge));
        } else {
            let mut snodes = Vec::new();
            sequences(&not_s, k, &mut Vec::new(), &mut snodes);
            let mut pnodes = Vec::new();
            let pool: Vec<&SPGraph> = not_p[1..k].iter().flatten().collect();
            multisets(&pool, k, 0, &mut Vec::new(), &mut pnodes);
            level.extend(snodes.into_iter().map(SPGraph::SNode));
            level.extend(pnodes.into_iter().map(|mut cs| {
                cs.sort();
                SPGraph::PNode(cs)
            }));
        }
        level.sort();
        level.dedup();
        for g in &level {
            match g {
                SPGraph::Bridge(_) => {
                    not_s[k].push(g.clone());
                    not_p[k].push(g.clone());
                }
                SPGraph::SNode(_) => not_p[k].push(g.clone()),
                SPGraph::PNode(_) => not_s[k].push(g.clone()),
            }
        }
        out.insert(k, level);
    }
    out
}

/// Sequences of length ≥ 2 drawn from `pool` (indexed by size) with total size `rest`.
fn sequences(pool: &[Vec<SPGraph>], rest: usize, prefix: &mut Vec<SPGraph>, out: &mut Vec<Vec<SPGraph>>) {
    if rest == 0 {
        if prefix.len() >= 2 {
            out.push(prefix.clone());
        }
        return;
    }
    let max = if prefix.is_empty() { rest - 1 } else { rest };
    for size in 1..=max {
        for g in &pool[size] {
            prefix.push(g.clone());
            sequences(pool, rest - size, prefix, out);
            prefix.pop();
        }
    }
}

/// Multisets (non-decreasing index sequences) of length ≥ 2 with total size `rest`.
fn multisets(
    pool: &[&SPGraph],
    rest: usize,
    from: usize,
    prefix: &mut Vec<SPGraph>,
    out: &mut Vec<Vec<SPGraph>>,
) {
    if rest == 0 {
        if prefix.len() >= 2 {
            out.push(prefix.clone());
        }
        return;
    }
    for i in from..pool.len() {
        let size = edge_count(pool[i]);
        if size > rest || (prefix.is_empty() && size == rest) {
            continue;
        }
        prefix.push(pool[i].clone());
        multisets(pool, rest - size, i, prefix, out);
        prefix.pop();
    }
}
