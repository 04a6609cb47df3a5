//! Brute-force checks of the cut-off properties of normal forms. Products are
//! count vectors over a list of factor kinds; every strict subproduct is a
//! componentwise smaller count vector.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sprec::termalg::{cutoff_bound, sup_monomials, term_mul, weighted_card, LinearTerm, Monomial, NfContext, TermNF, Var, VarClass};

use super::nf::{lin, one_sum, Class, Factor};

pub fn context(classes: &[Class]) -> NfContext {
    let mut ctx = NfContext::new();
    for (i, c) in classes.iter().enumerate() {
        let class = match *c {
            Class::Bounded(b) => VarClass::Bounded(b),
            Class::Periodic(p) => VarClass::Periodic(p),
            Class::Threshold(t) => VarClass::Threshold(t),
        };
        ctx.insert(Var(i as u32), class).unwrap();
    }
    ctx
}

pub fn linear(f: &Factor) -> LinearTerm {
    LinearTerm::new(f.vars.iter().map(|&v| Var(v as u32)), f.one).unwrap()
}

/// How many variables to check, and how far to enumerate exhaustively.
#[derive(Debug, Clone, Copy)]
pub struct Scope {
    pub max_vars: usize,
    /// Above this many variables, products are sampled.
    pub exhaustive_vars: usize,
    pub samples_per_length: usize,
    pub seed: u64,
}

/// Products checked and the ones that violate the property.
#[derive(Debug, Default)]
pub struct Report {
    pub products: usize,
    pub counterexamples: Vec<String>,
}

impl Report {
    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.products += 1;
        if !ok {
            self.counterexamples.push(what());
        }
    }
}

/// All nonempty subsets of `0..n`, as factor variable lists.
fn subsets(n: usize) -> Vec<Vec<usize>> {
    (1u32..1 << n).map(|bits| (0..n).filter(|i| bits >> i & 1 == 1).collect()).collect()
}

/// Multisets of `len` elements over `0..kinds`, as count vectors.
fn multisets(kinds: usize, len: usize) -> Vec<Vec<u8>> {
    fn go(kinds: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == kinds - 1 {
            cur.push(left as u8);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for c in 0..=left {
            cur.push(c as u8);
            go(kinds, left - c, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(kinds, len, &mut Vec::new(), &mut out);
    out
}

/// Count vectors `d ≤ c` with `r` elements in total.
fn removals(c: &[u8], r: usize) -> Vec<Vec<u8>> {
    fn go(c: &[u8], left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() == c.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for x in 0..=left.min(c[cur.len()] as usize) {
            cur.push(x as u8);
            go(c, left - x, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(c, r, &mut Vec::new(), &mut out);
    out
}

fn minus(c: &[u8], d: &[u8]) -> Vec<u8> {
    c.iter().zip(d).map(|(x, y)| x - y).collect()
}

fn all_configs(n: usize, options: &[Class]) -> Vec<Vec<Class>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|c| options.iter().map(move |o| [c.clone(), vec![*o]].concat()))
            .collect();
    }
    out
}

/// Normal forms of products given as count vectors over factor kinds.
struct Products<'a> {
    kinds: &'a [Factor],
    ctx: NfContext,
    memo: HashMap<Vec<u8>, TermNF>,
}

impl<'a> Products<'a> {
    fn new(kinds: &'a [Factor], classes: &[Class]) -> Self {
        Products { kinds, ctx: context(classes), memo: HashMap::new() }
    }

    fn nf(&mut self, counts: &[u8]) -> TermNF {
        if let Some(t) = self.memo.get(counts) {
            return t.clone();
        }
        let t = match counts.iter().position(|&c| c > 0) {
            None => TermNF::one(),
            Some(i) => {
                let mut rest = counts.to_vec();
                rest[i] -= 1;
                let r = self.nf(&rest);
                term_mul(&r, &linear(&self.kinds[i]).to_nf(&self.ctx), &self.ctx)
            }
        };
        self.memo.insert(counts.to_vec(), t.clone());
        t
    }
}

fn products(all: Vec<Vec<u8>>, exhaustive: bool, samples: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<u8>> {
    if exhaustive {
        all
    } else {
        (0..samples).map(|_| all[rng.gen_range(0..all.len())].clone()).collect()
    }
}

/// Products of more than `weighted_card` linear factors over bounded
/// variables with bases 2 and 3 normalize to 0. Exhaustive.
pub fn bounded_products_vanish(max_vars: usize) -> Report {
    let mut report = Report::default();
    for n in 1..=max_vars {
        for classes in all_configs(n, &[Class::Bounded(2), Class::Bounded(3)]) {
            let ctx = context(&classes);
            let w = weighted_card((0..n as u32).map(Var), &ctx).unwrap() as usize;
            let kinds: Vec<Factor> = subsets(n).iter().map(|v| lin(v)).collect();
            let mut prods = Products::new(&kinds, &classes);
            for c in multisets(kinds.len(), w + 1) {
                let ok = prods.nf(&c).is_zero();
                report.record(ok, || format!("{classes:?} {c:?}"));
            }
        }
    }
    report
}

/// With every threshold 2, `sup` keeps exactly the monomials of top degree.
pub fn threshold_two_sup(samples: usize, seed: u64) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Report::default();
    for _ in 0..samples {
        let n = rng.gen_range(1..=5);
        let classes = vec![Class::Threshold(2); n];
        let ctx = context(&classes);
        let factors: Vec<Factor> = (0..rng.gen_range(1..=7))
            .map(|_| {
                let vars: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.5)).collect();
                lin(&if vars.is_empty() { vec![rng.gen_range(0..n)] } else { vars })
            })
            .collect();
        let nf = factors.iter().fold(TermNF::one(), |acc, f| term_mul(&acc, &linear(f).to_nf(&ctx), &ctx));
        let top = nf.monomials().iter().map(Monomial::degree).max().unwrap_or(0);
        let at_top = TermNF::from_monomials(nf.monomials().iter().filter(|m| m.degree() == top).cloned());
        report.record(sup_monomials(&nf) == at_top, || format!("{factors:?}"));
    }
    report
}

const OPTIONS: [Class; 4] = [Class::Bounded(2), Class::Bounded(3), Class::Periodic(2), Class::Periodic(3)];

/// Products of 1-sums longer than `weighted_card` have a strict subproduct
/// `t'` with `nf(t'') = nf(t)` for every `t''` between `t'` and `t`.
/// Lengths `w+1` and `w+2`.
pub fn one_sum_intervals(scope: Scope) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(scope.seed);
    let mut report = Report::default();
    for n in 1..=scope.max_vars {
        for classes in all_configs(n, &OPTIONS) {
            let ctx = context(&classes);
            let w = weighted_card((0..n as u32).map(Var), &ctx).unwrap() as usize;
            let kinds: Vec<Factor> = subsets(n).iter().map(|v| one_sum(v)).collect();
            let mut prods = Products::new(&kinds, &classes);
            for len in w + 1..=w + 2 {
                let all = multisets(kinds.len(), len);
                for c in products(all, n <= scope.exhaustive_vars, scope.samples_per_length, &mut rng) {
                    let ok = stable_interval(&mut prods, &c);
                    report.record(ok, || format!("{classes:?} {c:?}"));
                }
            }
        }
    }
    report
}

fn stable_interval(prods: &mut Products, c: &[u8]) -> bool {
    let target = prods.nf(c);
    let len: usize = c.iter().map(|&x| x as usize).sum();
    (1..=len).any(|r| {
        removals(c, r)
            .into_iter()
            .any(|d| (0..=r).all(|k| removals(&d, k).into_iter().all(|e| prods.nf(&minus(c, &e)) == target)))
    })
}

/// Linear products longer than `cutoff_bound` normalize to 0 or to the
/// normal form of a strict subproduct. Lengths `b+1` and `b+2`.
pub fn linear_cutoff(scope: Scope) -> Report {
    let mut rng = ChaCha8Rng::seed_from_u64(scope.seed);
    let mut report = Report::default();
    for n in 1..=scope.max_vars {
        for classes in all_configs(n, &OPTIONS) {
            let ctx = context(&classes);
            let vars = |bounded: bool| -> Vec<Var> {
                (0..n)
                    .filter(|&i| matches!(classes[i], Class::Bounded(_)) == bounded)
                    .map(|i| Var(i as u32))
                    .collect()
            };
            let b = cutoff_bound(&vars(true), &vars(false), &ctx).unwrap() as usize;
            let kinds: Vec<Factor> = subsets(n).iter().map(|v| lin(v)).collect();
            let mut prods = Products::new(&kinds, &classes);
            for len in b + 1..=b + 2 {
                let all = multisets(kinds.len(), len);
                for c in products(all, n <= scope.exhaustive_vars, scope.samples_per_length, &mut rng) {
                    let ok = repeats_below(&mut prods, &c);
                    report.record(ok, || format!("{classes:?} {c:?}"));
                }
            }
        }
    }
    report
}

fn repeats_below(prods: &mut Products, c: &[u8]) -> bool {
    let target = prods.nf(c);
    if target.is_zero() {
        return true;
    }
    let len: usize = c.iter().map(|&x| x as usize).sum();
    (1..=len).any(|r| removals(c, r).into_iter().any(|d| prods.nf(&minus(c, &d)) == target))
}
