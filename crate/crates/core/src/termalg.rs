//! Finite commutative-dioid term algebra.
//!
//! Terms are sums of monomials over variables, each variable carrying a
//! [`VarClass`]. Normal forms apply the axioms
//!
//! * bounded: `s^base = 0`
//! * periodic: `s^(k + period) = s^k`
//! * threshold: `s^theta = s^(theta - 1)`
//!
//! so every term reduces to a finite set of reduced monomials ([`TermNF`]).

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_integer::Integer;

use crate::error::{Error, Result};

/// A variable, identified by index. Names are supplied at render time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarClass {
    Bounded(u32),
    Periodic(u32),
    Threshold(u32),
}

impl VarClass {
    fn validate(self) -> Result<VarClass> {
        match self {
            VarClass::Bounded(b) if b < 2 => Err(Error::InvalidArgument(format!("base {b} < 2"))),
            VarClass::Periodic(0) => Err(Error::InvalidArgument("period 0".into())),
            VarClass::Threshold(t) if t < 2 => {
                Err(Error::InvalidArgument(format!("threshold {t} < 2")))
            }
            c => Ok(c),
        }
    }

    /// Reduced exponent for `e ≥ 1`; `None` means the monomial vanishes.
    /// `Some(0)` removes the variable.
    #[inline]
    fn reduce(self, e: u64) -> Option<u32> {
        match self {
            VarClass::Bounded(b) => (e < b as u64).then_some(e as u32),
            VarClass::Periodic(p) => Some((e % p as u64) as u32),
            VarClass::Threshold(t) => Some(e.min(t as u64 - 1) as u32),
        }
    }

    /// Contribution to the weighted cardinality.
    pub fn weight(self) -> u64 {
        match self {
            VarClass::Bounded(x) | VarClass::Periodic(x) | VarClass::Threshold(x) => x as u64 - 1,
        }
    }
}

/// Classes of the variables a term may mention.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct NfContext {
    classes: Vec<Option<VarClass>>,
}

impl NfContext {
    pub fn new() -> NfContext {
        NfContext::default()
    }

    pub fn insert(&mut self, v: Var, class: VarClass) -> Result<()> {
        let class = class.validate()?;
        let i = v.0 as usize;
        if self.classes.len() <= i {
            self.classes.resize(i + 1, None);
        }
        self.classes[i] = Some(class);
        Ok(())
    }

    pub fn with(mut self, v: Var, class: VarClass) -> Result<NfContext> {
        self.insert(v, class)?;
        Ok(self)
    }

    #[inline]
    pub fn class(&self, v: Var) -> Option<VarClass> {
        self.classes.get(v.0 as usize).copied().flatten()
    }

    pub fn vars(&self) -> impl Iterator<Item = (Var, VarClass)> + '_ {
        self.classes
            .iter()
            .enumerate()
            .filter_map(|(i, c)| c.map(|c| (Var(i as u32), c)))
    }
}

/// A monomial: variables with positive exponents, sorted by variable.
///
/// Monomials order by total degree first, then by the exponent list.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Monomial {
    exps: Vec<(Var, u32)>,
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Monomial {
    /// The empty monomial, i.e. the constant 1.
    pub fn one() -> Monomial {
        Monomial::default()
    }

    pub fn var(v: Var) -> Monomial {
        Monomial { exps: vec![(v, 1)] }
    }

    /// Builds a monomial from pairs without reducing; zero exponents are dropped.
    pub fn from_exps(exps: impl IntoIterator<Item = (Var, u32)>) -> Monomial {
        let mut map: BTreeMap<Var, u32> = BTreeMap::new();
        for (v, e) in exps {
            *map.entry(v).or_default() += e;
        }
        Monomial {
            exps: map.into_iter().filter(|(_, e)| *e > 0).collect(),
        }
    }

    pub fn exps(&self) -> &[(Var, u32)] {
        &self.exps
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn degree(&self) -> u64 {
        self.exps.iter().map(|(_, e)| *e as u64).sum()
    }

    pub fn deg(&self, v: Var) -> u32 {
        self.exps
            .iter()
            .find(|(w, _)| *w == v)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.exps.iter().map(|(v, _)| *v)
    }

    /// `self ⊑ other`: every variable of `self` occurs in `other` with at least the same degree.
    pub fn le(&self, other: &Monomial) -> bool {
        self.exps.iter().all(|(v, e)| other.deg(*v) >= *e)
    }

    /// Normal form of `self · other`; `None` is zero. Both are assumed reduced in `ctx`.
    pub fn mul_nf(&self, other: &Monomial, ctx: &NfContext) -> Option<Monomial> {
        let (a, b) = (&self.exps, &other.exps);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let (v, e) = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) if x.0 == y.0 => {
                    i += 1;
                    j += 1;
                    (x.0, x.1 as u64 + y.1 as u64)
                }
                (Some(x), Some(y)) if x.0 < y.0 => {
                    i += 1;
                    (x.0, x.1 as u64)
                }
                (Some(x), None) => {
                    i += 1;
                    (x.0, x.1 as u64)
                }
                (_, Some(y)) => {
                    j += 1;
                    (y.0, y.1 as u64)
                }
                (None, None) => unreachable!(),
            };
            let e = match ctx.class(v) {
                Some(c) => c.reduce(e)?,
                None => e as u32,
            };
            if e > 0 {
                out.push((v, e));
            }
        }
        Some(Monomial { exps: out })
    }

    /// Renders with variables sorted by name, e.g. `s1*s2^2`.
    pub fn render(&self, name: &dyn Fn(Var) -> String) -> String {
        if self.exps.is_empty() {
            return "1".into();
        }
        let mut parts: Vec<(String, u32)> = self.exps.iter().map(|(v, e)| (name(*v), *e)).collect();
        parts.sort();
        parts
            .iter()
            .map(|(n, e)| if *e == 1 { n.clone() } else { format!("{n}^{e}") })
            .collect::<Vec<_>>()
            .join("*")
    }
}

/// Reduces a raw exponent map; `Ok(None)` is zero.
pub fn nf_monomial(raw: &BTreeMap<Var, u64>, ctx: &NfContext) -> Result<Option<Monomial>> {
    let mut exps = Vec::with_capacity(raw.len());
    for (&v, &e) in raw {
        let class = ctx
            .class(v)
            .ok_or_else(|| Error::UnknownVariable(format!("#{}", v.0)))?;
        if e == 0 {
            continue;
        }
        match class.reduce(e) {
            None => return Ok(None),
            Some(0) => {}
            Some(r) => exps.push((v, r)),
        }
    }
    Ok(Some(Monomial { exps }))
}

/// A term in normal form: a sorted set of distinct reduced monomials.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TermNF {
    monos: Vec<Monomial>,
}

impl TermNF {
    pub fn zero() -> TermNF {
        TermNF::default()
    }

    pub fn one() -> TermNF {
        TermNF {
            monos: vec![Monomial::one()],
        }
    }

    pub fn from_monomials(monos: impl IntoIterator<Item = Monomial>) -> TermNF {
        let mut monos: Vec<Monomial> = monos.into_iter().collect();
        monos.sort();
        monos.dedup();
        TermNF { monos }
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monos
    }

    pub fn is_zero(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn len(&self) -> usize {
        self.monos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monos.is_empty()
    }

    pub fn contains(&self, m: &Monomial) -> bool {
        self.monos.binary_search(m).is_ok()
    }

    /// Whether the term shares a monomial with the sorted slice `ms`.
    pub fn meets(&self, ms: &[Monomial]) -> bool {
        let (a, b) = (&self.monos, ms);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => return true,
            }
        }
        false
    }

    /// Renders as `s1*s2^2 + s3`, with `0` for the empty sum.
    pub fn render(&self, name: &dyn Fn(Var) -> String) -> String {
        if self.monos.is_empty() {
            return "0".into();
        }
        let mut keyed: Vec<_> = self
            .monos
            .iter()
            .map(|m| {
                let mut k: Vec<(String, u32)> = m.exps.iter().map(|(v, e)| (name(*v), *e)).collect();
                k.sort();
                (m.degree(), k, m.render(name))
            })
            .collect();
        keyed.sort();
        keyed.into_iter().map(|(_, _, s)| s).collect::<Vec<_>>().join(" + ")
    }
}

impl fmt::Display for TermNF {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&|v| format!("x{}", v.0)))
    }
}

/// Sum: set union.
pub fn term_add(t1: &TermNF, t2: &TermNF) -> TermNF {
    let mut monos = Vec::with_capacity(t1.len() + t2.len());
    let (a, b) = (&t1.monos, &t2.monos);
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                monos.push(a[i].clone());
                i += 1;
            }
            Ordering::Greater => {
                monos.push(b[j].clone());
                j += 1;
            }
            Ordering::Equal => {
                monos.push(a[i].clone());
                i += 1;
                j += 1;
            }
        }
    }
    monos.extend_from_slice(&a[i..]);
    monos.extend_from_slice(&b[j..]);
    TermNF { monos }
}

/// Product: pairwise monomial products, each reduced; zeros dropped.
pub fn term_mul(t1: &TermNF, t2: &TermNF, ctx: &NfContext) -> TermNF {
    if t1.is_zero() || t2.is_zero() {
        return TermNF::zero();
    }
    let mut monos = Vec::with_capacity(t1.len() * t2.len());
    for m1 in &t1.monos {
        for m2 in &t2.monos {
            if let Some(m) = m1.mul_nf(m2, ctx) {
                monos.push(m);
            }
        }
    }
    monos.sort();
    monos.dedup();
    TermNF { monos }
}

/// A sum of distinct variables, optionally plus 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearTerm {
    pub vars: Vec<Var>,
    pub one: bool,
}

impl LinearTerm {
    pub fn new(vars: impl IntoIterator<Item = Var>, one: bool) -> Result<LinearTerm> {
        let mut vars: Vec<Var> = vars.into_iter().collect();
        vars.sort();
        vars.dedup();
        if vars.is_empty() {
            return Err(Error::InvalidArgument("linear term without variables".into()));
        }
        Ok(LinearTerm { vars, one })
    }

    /// The term in normal form.
    pub fn to_nf(&self, ctx: &NfContext) -> TermNF {
        let one = self.one.then(Monomial::one);
        TermNF::from_monomials(
            self.vars
                .iter()
                .filter_map(|v| Monomial::one().mul_nf(&Monomial::var(*v), ctx))
                .chain(one),
        )
    }
}

/// Left fold of [`term_mul`] from 1.
pub fn nf_linear_product(factors: &[LinearTerm], ctx: &NfContext) -> TermNF {
    factors
        .iter()
        .fold(TermNF::one(), |acc, f| term_mul(&acc, &f.to_nf(ctx), ctx))
}

/// Sum of `class.weight()` over `vars`.
pub fn weighted_card(vars: impl IntoIterator<Item = Var>, ctx: &NfContext) -> Result<u64> {
    vars.into_iter()
        .map(|v| {
            ctx.class(v)
                .map(VarClass::weight)
                .ok_or_else(|| Error::UnknownVariable(format!("#{}", v.0)))
        })
        .sum()
}

/// The cut-off length beyond which linear products over `bounded ⊎ periodic`
/// repeat a normal form: `|B|_w·(|Π|+1) + Σ_{i≤j} lcm(π_i, π_j) − |Π|(|Π|+1)/2`.
pub fn cutoff_bound(bounded: &[Var], periodic: &[Var], ctx: &NfContext) -> Result<u64> {
    let bw = weighted_card(bounded.iter().copied(), ctx)?;
    let mut periods = Vec::with_capacity(periodic.len());
    for &v in periodic {
        match ctx.class(v) {
            Some(VarClass::Periodic(1)) => return Err(Error::PeriodOne(format!("#{}", v.0))),
            Some(VarClass::Periodic(p)) => periods.push(p as u64),
            Some(_) => return Err(Error::InvalidArgument(format!("#{} is not periodic", v.0))),
            None => return Err(Error::UnknownVariable(format!("#{}", v.0))),
        }
    }
    let n = periods.len() as u64;
    let mut lcms = 0;
    for i in 0..periods.len() {
        for j in i..periods.len() {
            lcms += periods[i].lcm(&periods[j]);
        }
    }
    Ok(bw * (n + 1) + lcms - n * (n + 1) / 2)
}

/// Monomials of `t` that are maximal under `⊑`.
pub fn sup_monomials(t: &TermNF) -> TermNF {
    let monos = t
        .monos
        .iter()
        .filter(|&m| !t.monos.iter().any(|o| o != m && m.le(o)))
        .cloned()
        .collect();
    TermNF { monos }
}
