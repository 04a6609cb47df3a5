//! Normal forms by full expansion: every choice of one summand per factor is
//! multiplied out and reduced with hand-written axioms, without the library
//! normalization.

use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy)]
pub enum Class {
    Bounded(u32),
    Periodic(u32),
    Threshold(u32),
}

/// A reduced monomial as variable-index → exponent; the empty map is `1`.
pub type Mono = BTreeMap<usize, u32>;

/// A factor: its variables and whether it contains the summand `1`.
#[derive(Debug, Clone)]
pub struct Factor {
    pub vars: Vec<usize>,
    pub one: bool,
}

pub fn lin(vars: &[usize]) -> Factor {
    Factor { vars: vars.to_vec(), one: false }
}

pub fn one_sum(vars: &[usize]) -> Factor {
    Factor { vars: vars.to_vec(), one: true }
}

fn reduce(raw: &BTreeMap<usize, u32>, classes: &[Class]) -> Option<Mono> {
    let mut out = Mono::new();
    for (&v, &e) in raw {
        let e = match classes[v] {
            Class::Bounded(b) if e >= b => return None,
            Class::Bounded(_) => e,
            Class::Periodic(p) => e % p,
            Class::Threshold(t) => e.min(t - 1),
        };
        if e > 0 {
            out.insert(v, e);
        }
    }
    Some(out)
}

/// Normal form of a product of factors.
pub fn expand(factors: &[Factor], classes: &[Class]) -> BTreeSet<Mono> {
    let mut out = BTreeSet::new();
    let mut raw = BTreeMap::new();
    walk(factors, classes, &mut raw, &mut out);
    out
}

fn walk(factors: &[Factor], classes: &[Class], raw: &mut BTreeMap<usize, u32>, out: &mut BTreeSet<Mono>) {
    let Some((f, rest)) = factors.split_first() else {
        if let Some(m) = reduce(raw, classes) {
            out.insert(m);
        }
        return;
    };
    if f.one {
        walk(rest, classes, raw, out);
    }
    for &v in &f.vars {
        *raw.entry(v).or_default() += 1;
        walk(rest, classes, raw, out);
        let e = raw.get_mut(&v).unwrap();
        *e -= 1;
        if *e == 0 {
            raw.remove(&v);
        }
    }
}

/// Renders a monomial with variables named `s<i>`, as in `s1*s2^2`.
pub fn render(m: &Mono) -> String {
    if m.is_empty() {
        return "1".into();
    }
    m.iter()
        .map(|(v, e)| if *e == 1 { format!("s{v}") } else { format!("s{v}^{e}") })
        .collect::<Vec<_>>()
        .join("*")
}

pub fn render_set(t: &BTreeSet<Mono>) -> BTreeSet<String> {
    t.iter().map(render).collect()
}
