//! Symbols of constants: a pattern-directed Steinberg reducer and an independent K2(Q) detector.
//!
//! The reducer rewrites `sum n {c, c'}` over a coprime base of atoms using bilinearity,
//! antisymmetry, `{a, a} = {a, -1}` and `2 {-1, a} = 0`, then tries to cancel what is left
//! with a few multiples of Steinberg symbols `{u, 1 - u}` drawn from a candidate list.
//! The detector evaluates the sign at the real place and the tame symbols at odd primes,
//! which together determine an element of K2(Q).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::arith::{ExactScalar, Rational};

/// One Steinberg symbol `coeff * {u, 1 - u}` used in a reduction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SteinbergStep {
    pub u: ExactScalar,
    pub one_minus_u: ExactScalar,
    pub coeff: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", content = "detail", rename_all = "snake_case")]
pub enum TateVerdict {
    Trivial,
    Nontrivial(String),
    Unavailable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstantReduction {
    pub reduced: bool,
    pub steps: Vec<SteinbergStep>,
    /// What is left in the atom basis when the reduction fails, as display strings.
    pub leftover: Vec<String>,
    pub tate: TateVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    Prime(BigInt),
    Opaque(ExactScalar),
}

impl std::fmt::Display for Atom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Atom::Prime(p) => write!(f, "{p}"),
            Atom::Opaque(s) => write!(f, "({s})"),
        }
    }
}

/// Coefficients in the free presentation: `{A_a, A_b}` (a < b) over Z,
/// `{-1, A_a}` and `{-1, -1}` mod 2.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct AtomVector {
    pairs: BTreeMap<(usize, usize), i64>,
    minus_atom: BTreeMap<usize, i64>,
    minus_minus: i64,
}

impl AtomVector {
    fn normalize(&mut self) {
        self.pairs.retain(|_, v| *v != 0);
        for v in self.minus_atom.values_mut() {
            *v = v.rem_euclid(2);
        }
        self.minus_atom.retain(|_, v| *v != 0);
        self.minus_minus = self.minus_minus.rem_euclid(2);
    }

    fn is_zero(&self) -> bool {
        self.pairs.is_empty() && self.minus_atom.is_empty() && self.minus_minus == 0
    }

    fn axpy(&mut self, k: i64, o: &AtomVector) {
        for (key, v) in &o.pairs {
            *self.pairs.entry(*key).or_insert(0) += k * v;
        }
        for (key, v) in &o.minus_atom {
            *self.minus_atom.entry(*key).or_insert(0) += k * v;
        }
        self.minus_minus += k * o.minus_minus;
        self.normalize();
    }

    fn describe(&self, atoms: &[Atom]) -> Vec<String> {
        let mut out = Vec::new();
        for ((a, b), v) in &self.pairs {
            out.push(format!("{v}{{{}, {}}}", atoms[*a], atoms[*b]));
        }
        for a in self.minus_atom.keys() {
            out.push(format!("{{-1, {}}}", atoms[*a]));
        }
        if self.minus_minus != 0 {
            out.push("{-1, -1}".to_string());
        }
        out
    }
}

/// Sign and factorization of a constant over the atom list.
struct Factored {
    negative: bool,
    exps: BTreeMap<usize, i64>,
}

struct AtomBasis {
    atoms: Vec<Atom>,
}

impl AtomBasis {
    fn build(values: &[ExactScalar]) -> Self {
        let mut ints: Vec<BigInt> = Vec::new();
        let mut opaque: BTreeSet<ExactScalar> = BTreeSet::new();
        for v in values {
            match v.as_rational() {
                Some(r) => {
                    for n in [r.numer().abs(), r.denom().abs()] {
                        if n > BigInt::one() {
                            ints.push(n);
                        }
                    }
                }
                None => {
                    opaque.insert(v.clone());
                }
            }
        }
        let mut atoms: Vec<Atom> = coprime_base(ints).into_iter().map(Atom::Prime).collect();
        atoms.extend(opaque.into_iter().map(Atom::Opaque));
        AtomBasis { atoms }
    }

    fn factor(&self, v: &ExactScalar) -> Factored {
        let mut exps = BTreeMap::new();
        match v.as_rational() {
            Some(r) => {
                let mut num = r.numer().abs();
                let mut den = r.denom().abs();
                for (idx, a) in self.atoms.iter().enumerate() {
                    if let Atom::Prime(p) = a {
                        let mut e = 0i64;
                        while num.is_multiple_of(p) {
                            num /= p;
                            e += 1;
                        }
                        while den.is_multiple_of(p) {
                            den /= p;
                            e -= 1;
                        }
                        if e != 0 {
                            exps.insert(idx, e);
                        }
                    }
                }
                debug_assert!(
                    num.is_one() && den.is_one(),
                    "coprime base must cover every constant"
                );
                Factored {
                    negative: r.is_negative(),
                    exps,
                }
            }
            None => {
                let idx = self
                    .atoms
                    .iter()
                    .position(|a| a == &Atom::Opaque(v.clone()))
                    .expect("registered");
                exps.insert(idx, 1);
                Factored {
                    negative: false,
                    exps,
                }
            }
        }
    }

    /// Vector of `n {c, c'}`.
    fn symbol(&self, c: &ExactScalar, cp: &ExactScalar, n: i64) -> AtomVector {
        let a = self.factor(c);
        let b = self.factor(cp);
        let mut v = AtomVector::default();
        if a.negative && b.negative {
            v.minus_minus += n;
        }
        if a.negative {
            for (k, f) in &b.exps {
                *v.minus_atom.entry(*k).or_insert(0) += n * f;
            }
        }
        if b.negative {
            for (k, e) in &a.exps {
                *v.minus_atom.entry(*k).or_insert(0) += n * e;
            }
        }
        for (ka, e) in &a.exps {
            for (kb, f) in &b.exps {
                let w = n * e * f;
                match ka.cmp(kb) {
                    std::cmp::Ordering::Less => *v.pairs.entry((*ka, *kb)).or_insert(0) += w,
                    std::cmp::Ordering::Greater => *v.pairs.entry((*kb, *ka)).or_insert(0) -= w,
                    std::cmp::Ordering::Equal => *v.minus_atom.entry(*ka).or_insert(0) += w,
                }
            }
        }
        v.normalize();
        v
    }
}

/// Pairwise coprime integers (> 1) whose products generate every input.
fn coprime_base(mut v: Vec<BigInt>) -> Vec<BigInt> {
    v.sort();
    v.dedup();
    loop {
        let mut split = None;
        'outer: for a in 0..v.len() {
            for b in a + 1..v.len() {
                let g = v[a].gcd(&v[b]);
                if g > BigInt::one() {
                    split = Some((a, b, g));
                    break 'outer;
                }
            }
        }
        let Some((a, b, g)) = split else { break };
        let (x, y) = (v[a].clone(), v[b].clone());
        v.remove(b);
        v.remove(a);
        // strip every power of g so the pieces are coprime to g where possible
        for mut n in [x, y] {
            while n.is_multiple_of(&g) {
                n /= &g;
            }
            if n > BigInt::one() {
                v.push(n);
            }
        }
        v.push(g);
        v.sort();
        v.dedup();
    }
    v
}

/// Reduces `sum n {c, c'}` to zero, if possible, with Steinberg symbols built from `hints`
/// and from `±c^{±1}` of the residue constants.
pub fn reduce_constant_part(
    residue: &BTreeMap<(ExactScalar, ExactScalar), i64>,
    hints: &[ExactScalar],
) -> ConstantReduction {
    let tate = tate_detector(residue);
    let one = ExactScalar::one();
    // hints first so that the reported step names the expected Steinberg symbol when it fits
    let mut cands: Vec<ExactScalar> = hints.to_vec();
    for (c, cp) in residue.keys() {
        for v in [c, cp] {
            if let Ok(inv) = v.inv() {
                cands.extend([v.clone(), -v, inv.clone(), -&inv]);
            }
        }
    }
    let mut seen = BTreeSet::new();
    let cands: Vec<(ExactScalar, ExactScalar)> = cands
        .into_iter()
        .filter(|u| seen.insert(u.clone()))
        .filter_map(|u| {
            let w = one.checked_sub(&u).ok()?;
            (!u.is_zero() && !w.is_zero()).then_some((u, w))
        })
        .collect();

    let mut all: Vec<ExactScalar> = residue
        .keys()
        .flat_map(|(a, b)| [a.clone(), b.clone()])
        .collect();
    for (u, w) in &cands {
        all.push(u.clone());
        all.push(w.clone());
    }
    let basis = AtomBasis::build(&all);
    let mut target = AtomVector::default();
    for ((c, cp), n) in residue {
        target.axpy(1, &basis.symbol(c, cp, *n));
    }
    let done = |steps: Vec<SteinbergStep>| ConstantReduction {
        reduced: true,
        steps,
        leftover: vec![],
        tate: tate.clone(),
    };
    if target.is_zero() {
        return done(vec![]);
    }
    let st: Vec<AtomVector> = cands.iter().map(|(u, w)| basis.symbol(u, w, 1)).collect();
    let step = |i: usize, k: i64| SteinbergStep {
        u: cands[i].0.clone(),
        one_minus_u: cands[i].1.clone(),
        coeff: k,
    };
    for (i, s) in st.iter().enumerate() {
        for k in [1, -1, 2, -2] {
            let mut r = target.clone();
            r.axpy(-k, s);
            if r.is_zero() {
                return done(vec![step(i, k)]);
            }
        }
    }
    for i in 0..st.len() {
        for j in i + 1..st.len() {
            for (ki, kj) in [(1, 1), (1, -1), (-1, 1), (-1, -1)] {
                let mut r = target.clone();
                r.axpy(-ki, &st[i]);
                r.axpy(-kj, &st[j]);
                if r.is_zero() {
                    return done(vec![step(i, ki), step(j, kj)]);
                }
            }
        }
    }
    ConstantReduction {
        reduced: false,
        steps: vec![],
        leftover: target.describe(&basis.atoms),
        tate,
    }
}

const TRIAL_LIMIT: u64 = 1_000_000;

/// Odd prime factors by trial division; `None` when a cofactor is too large to certify.
fn odd_primes(n: &BigInt, out: &mut BTreeSet<BigInt>) -> Option<()> {
    let mut n = n.abs();
    while n.is_even() && !n.is_zero() {
        n /= 2;
    }
    let mut p = 3u64;
    while p <= TRIAL_LIMIT && BigInt::from(p) * BigInt::from(p) <= n {
        let bp = BigInt::from(p);
        if n.is_multiple_of(&bp) {
            out.insert(bp.clone());
            while n.is_multiple_of(&bp) {
                n /= &bp;
            }
        }
        p += 2;
    }
    if n > BigInt::one() {
        if BigInt::from(p) * BigInt::from(p) > n {
            out.insert(n);
        } else {
            return None;
        }
    }
    Some(())
}

fn valuation(r: &Rational, p: &BigInt) -> (i64, Rational) {
    let mut num = r.numer().clone();
    let mut den = r.denom().clone();
    let mut e = 0;
    while num.is_multiple_of(p) {
        num /= p;
        e += 1;
    }
    while den.is_multiple_of(p) {
        den /= p;
        e -= 1;
    }
    (e, Rational::new(num, den))
}

/// Unit rational reduced mod p.
fn mod_p(r: &Rational, p: &BigInt) -> BigInt {
    let inv = r.denom().modpow(&(p - 2), p);
    (r.numer().mod_floor(p) * inv).mod_floor(p)
}

/// Sign at the real place plus tame symbols at odd primes of `sum n {c, c'}`.
pub fn tate_detector(residue: &BTreeMap<(ExactScalar, ExactScalar), i64>) -> TateVerdict {
    let mut terms = Vec::new();
    for ((c, cp), n) in residue {
        match (c.as_rational(), cp.as_rational()) {
            (Some(a), Some(b)) => terms.push((a.clone(), b.clone(), *n)),
            _ => return TateVerdict::Unavailable("irrational constants".into()),
        }
    }
    let mut sign = 0i64;
    for (a, b, n) in &terms {
        if a.is_negative() && b.is_negative() {
            sign += n;
        }
    }
    if sign.rem_euclid(2) != 0 {
        return TateVerdict::Nontrivial("sign at the real place is -1".into());
    }
    let mut primes = BTreeSet::new();
    for (a, b, _) in &terms {
        for v in [a.numer(), a.denom(), b.numer(), b.denom()] {
            if odd_primes(v, &mut primes).is_none() {
                return TateVerdict::Unavailable(format!("could not factor {v}"));
            }
        }
    }
    for p in &primes {
        let mut acc = BigInt::one();
        for (a, b, n) in &terms {
            let (va, ua) = valuation(a, p);
            let (vb, ub) = valuation(b, p);
            if va == 0 && vb == 0 {
                continue;
            }
            // (-1)^{va vb} a^{vb} / b^{va}, evaluated on unit parts
            let mut v = BigInt::one();
            if (va * vb).rem_euclid(2) == 1 {
                v = p - 1;
            }
            let ua = mod_p(&ua, p);
            let ub = mod_p(&ub, p);
            let e_a = BigInt::from(vb).mod_floor(&(p - 1));
            let e_b = BigInt::from(-va).mod_floor(&(p - 1));
            v = v * ua.modpow(&e_a, p) % p * ub.modpow(&e_b, p) % p;
            let e_n = BigInt::from(*n).mod_floor(&(p - 1));
            acc = acc * v.modpow(&e_n, p) % p;
        }
        if !acc.is_one() {
            return TateVerdict::Nontrivial(format!("tame symbol at {p} is {acc}"));
        }
    }
    TateVerdict::Trivial
}
