//! Exact scalars `r + s*sqrt(D)` over a single real quadratic layer on top of Q.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type Rational = BigRational;

/// The two real embeddings of a real quadratic field: `sqrt(D) -> +sqrt(D)` and `sqrt(D) -> -sqrt(D)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Embedding {
    Plus,
    Minus,
}

impl Embedding {
    pub const BOTH: [Embedding; 2] = [Embedding::Plus, Embedding::Minus];

    fn sign(self) -> i32 {
        match self {
            Embedding::Plus => 1,
            Embedding::Minus => -1,
        }
    }
}

/// Bits of working precision for exact-to-float conversions.
///
/// Defaults to 53 (double precision). The `K2REG_PRECISION` environment variable can raise it.
pub fn working_precision_bits() -> u32 {
    static BITS: OnceLock<u32> = OnceLock::new();
    *BITS.get_or_init(|| {
        std::env::var("K2REG_PRECISION")
            .ok()
            .and_then(|v| v.trim().parse::<u32>().ok())
            .map(|b| b.clamp(53, 1 << 14))
            .unwrap_or(53)
    })
}

/// Bits carried by [`ExactScalar::embed_real`]: the working precision plus 60 guard bits.
pub fn embedding_bits() -> u32 {
    working_precision_bits() + 60
}

/// Writes `n = k^2 * m` with `m` squarefree and `k > 0`. Sign stays on `m`.
pub fn squarefree_decompose(n: &BigInt) -> (BigInt, BigInt) {
    if n.is_zero() {
        return (BigInt::one(), BigInt::zero());
    }
    let mut rest = n.abs();
    let mut k = BigInt::one();
    let mut m = BigInt::one();
    let mut p = BigInt::from(2u32);
    while &p * &p <= rest {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            k *= &p;
        }
        if e % 2 == 1 {
            m *= &p;
        }
        p += if p == BigInt::from(2u32) { 1u32 } else { 2u32 };
    }
    m *= rest;
    if n.is_negative() {
        m = -m;
    }
    (k, m)
}

/// An element `r + s*sqrt(D)` of Q or of a real quadratic field Q(sqrt(D)).
///
/// `d` is `None` exactly when `s == 0`; rational results are always demoted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactScalar {
    d: Option<BigInt>,
    r: Rational,
    s: Rational,
}

impl ExactScalar {
    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Self::from_rational(Rational::from_integer(n.into()))
    }

    pub fn from_ratio(num: impl Into<BigInt>, den: impl Into<BigInt>) -> Self {
        Self::from_rational(Rational::new(num.into(), den.into()))
    }

    pub fn from_rational(r: Rational) -> Self {
        ExactScalar {
            d: None,
            r,
            s: Rational::zero(),
        }
    }

    /// Builds `r + s*sqrt(d)`, pulling square factors out of `d`.
    ///
    /// Only real quadratic layers are supported, so `d` must be positive.
    pub fn new(r: Rational, s: Rational, d: BigInt) -> Result<Self> {
        if s.is_zero() {
            return Ok(Self::from_rational(r));
        }
        if !d.is_positive() {
            return Err(Error::Unsupported(format!("sqrt({d}) is not real")));
        }
        let (k, m) = squarefree_decompose(&d);
        let s = s * Rational::from_integer(k);
        if m.is_one() {
            return Ok(Self::from_rational(r + s));
        }
        Ok(ExactScalar { d: Some(m), r, s })
    }

    /// `sqrt(d)` itself.
    pub fn sqrt_of(d: impl Into<BigInt>) -> Result<Self> {
        Self::new(Rational::zero(), Rational::one(), d.into())
    }

    pub fn rational_part(&self) -> &Rational {
        &self.r
    }

    pub fn surd_part(&self) -> &Rational {
        &self.s
    }

    pub fn discriminant(&self) -> Option<&BigInt> {
        self.d.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.r.is_zero() && self.s.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.r.is_one() && self.s.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.d.is_none()
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        if self.is_rational() {
            Some(&self.r)
        } else {
            None
        }
    }

    /// Integer value when the scalar is a rational integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational()
            .filter(|r| r.is_integer())
            .map(|r| r.to_integer())
    }

    fn common_d(&self, other: &Self) -> Result<Option<BigInt>> {
        match (&self.d, &other.d) {
            (Some(a), Some(b)) if a != b => Err(Error::FieldMismatch(a.to_string(), b.to_string())),
            (Some(a), _) => Ok(Some(a.clone())),
            (None, b) => Ok(b.clone()),
        }
    }

    fn build(r: Rational, s: Rational, d: Option<BigInt>) -> Self {
        if s.is_zero() || d.is_none() {
            ExactScalar::from_rational(r)
        } else {
            ExactScalar { d, r, s }
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        let d = self.common_d(other)?;
        Ok(Self::build(&self.r + &other.r, &self.s + &other.s, d))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        let d = self.common_d(other)?;
        Ok(Self::build(&self.r - &other.r, &self.s - &other.s, d))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        let d = self.common_d(other)?;
        let dd = d
            .as_ref()
            .map(|v| Rational::from_integer(v.clone()))
            .unwrap_or_else(Rational::zero);
        let r = &self.r * &other.r + &self.s * &other.s * dd;
        let s = &self.r * &other.s + &self.s * &other.r;
        Ok(Self::build(r, s, d))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self> {
        let inv = other.inv()?;
        self.checked_mul(&inv)
    }

    pub fn inv(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let n = self.norm();
        Ok(Self::build(&self.r / &n, -&self.s / &n, self.d.clone()))
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let mut base = if e < 0 { self.inv()? } else { self.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = ExactScalar::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.checked_mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.checked_mul(&base)?;
            }
        }
        Ok(acc)
    }

    /// Galois conjugate `r - s*sqrt(D)`.
    pub fn conjugate(&self) -> Self {
        Self::build(self.r.clone(), -&self.s, self.d.clone())
    }

    /// `r^2 - D s^2`, the norm to Q when the scalar lives in Q(sqrt(D)); `r^2` for a rational.
    pub fn norm(&self) -> Rational {
        let dd = self
            .d
            .as_ref()
            .map(|v| Rational::from_integer(v.clone()))
            .unwrap_or_else(Rational::zero);
        &self.r * &self.r - &self.s * &self.s * dd
    }

    /// Field trace `2r`.
    pub fn trace(&self) -> Rational {
        &self.r * Rational::from_integer(BigInt::from(2))
    }

    /// True when the scalar is an algebraic integer (trace and norm are rational integers).
    pub fn is_algebraic_integer(&self) -> bool {
        if self.is_rational() {
            return self.r.is_integer();
        }
        self.trace().is_integer() && self.norm().is_integer()
    }

    /// Exact sign of the image under the given embedding.
    pub fn signum_at(&self, emb: Embedding) -> i32 {
        let rs = sign_of(&self.r);
        let ss = sign_of(&self.s) * emb.sign();
        if ss == 0 {
            return rs;
        }
        if rs == 0 || rs == ss {
            return ss;
        }
        let dd = Rational::from_integer(self.d.clone().unwrap_or_default());
        match (&self.r * &self.r).cmp(&(&self.s * &self.s * dd)) {
            Ordering::Greater => rs,
            Ordering::Less => ss,
            Ordering::Equal => 0,
        }
    }

    /// Image under the embedding, as a dyadic-precision rational carrying [`embedding_bits`] bits.
    pub fn embed_real(&self, emb: Embedding) -> Rational {
        self.embed_real_bits(emb, embedding_bits())
    }

    /// Image under the embedding with `bits` bits of relative precision.
    ///
    /// When the rational and surd parts nearly cancel, the value is evaluated as
    /// `norm / (r - sigma(s sqrt D))`, which has no cancellation.
    pub fn embed_real_bits(&self, emb: Embedding, bits: u32) -> Rational {
        let d = match &self.d {
            None => return self.r.clone(),
            Some(d) => d,
        };
        let sign = Rational::from_integer(BigInt::from(emb.sign()));
        let root = sqrt_approx(d, bits);
        let surd = &self.s * &root * &sign;
        if self.r.is_zero() || sign_of(&self.r) == sign_of(&surd) {
            return &self.r + surd;
        }
        let den = &self.r - surd;
        self.norm() / den
    }

    pub fn to_f64(&self, emb: Embedding) -> f64 {
        rational_to_f64(&self.embed_real(emb))
    }

    /// Image under the `Plus` embedding (the only one for rationals).
    pub fn to_f64_plus(&self) -> f64 {
        self.to_f64(Embedding::Plus)
    }

    /// Exact rational approximation of a float (binary expansion), for converting numeric inputs.
    pub fn from_f64_exact(v: f64) -> Result<Self> {
        Rational::from_float(v)
            .map(Self::from_rational)
            .ok_or_else(|| Error::invalid(format!("non-finite value {v}")))
    }
}

fn sign_of(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// `floor(sqrt(d) * 2^bits) / 2^bits`.
fn sqrt_approx(d: &BigInt, bits: u32) -> Rational {
    let scaled: BigInt = d << (2 * bits as usize);
    let root = scaled.sqrt();
    Rational::new(root, BigInt::one() << bits as usize)
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Out of f64 range: saturate with the right sign.
        if r.is_positive() {
            f64::INFINITY
        } else {
            f64::NEG_INFINITY
        }
    })
}

macro_rules! forward_op {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl<'a> $tr<&'a ExactScalar> for &'a ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: &'a ExactScalar) -> ExactScalar {
                self.$checked(rhs)
                    .unwrap_or_else(|e| panic!("ExactScalar::{}: {e}", stringify!($m)))
            }
        }
        impl $tr<ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: ExactScalar) -> ExactScalar {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a ExactScalar> for ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: &'a ExactScalar) -> ExactScalar {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<ExactScalar> for &'a ExactScalar {
            type Output = ExactScalar;
            fn $m(self, rhs: ExactScalar) -> ExactScalar {
                self.$m(&rhs)
            }
        }
    };
}

forward_op!(Add, add, checked_add);
forward_op!(Sub, sub, checked_sub);
forward_op!(Mul, mul, checked_mul);
forward_op!(Div, div, checked_div);

impl Neg for ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        ExactScalar::build(-self.r, -self.s, self.d)
    }
}

impl Neg for &ExactScalar {
    type Output = ExactScalar;
    fn neg(self) -> ExactScalar {
        -(self.clone())
    }
}

impl From<i64> for ExactScalar {
    fn from(v: i64) -> Self {
        ExactScalar::from_int(v)
    }
}

impl From<Rational> for ExactScalar {
    fn from(v: Rational) -> Self {
        ExactScalar::from_rational(v)
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for ExactScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = match &self.d {
            None => return f.write_str(&fmt_rational(&self.r)),
            Some(d) => d,
        };
        let mut out = String::new();
        if !self.r.is_zero() {
            out.push_str(&fmt_rational(&self.r));
            out.push(if self.s.is_negative() { '-' } else { '+' });
            out.push_str(&fmt_rational(&self.s.abs()));
        } else {
            out.push_str(&fmt_rational(&self.s));
        }
        out.push_str(&format!("*sqrt({d})"));
        f.write_str(&out)
    }
}

/// Parses a decimal or fraction literal such as `3`, `-2/7`, `0.125`, `1e-4`, `3/2.5e1`.
fn parse_real_literal(s: &str) -> Result<Rational> {
    if let Some((num, den)) = s.split_once('/') {
        let n = parse_decimal(num)?;
        let d = parse_decimal(den)?;
        if d.is_zero() {
            return Err(Error::parse(format!("zero denominator in '{s}'")));
        }
        return Ok(n / d);
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<Rational> {
    let bad = || Error::parse(format!("malformed number '{s}'"));
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{ip}{fp}");
    let mut n: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().map_err(|_| bad())?
    };
    if neg {
        n = -n;
    }
    let scale = exp - fp.len() as i64;
    if scale.unsigned_abs() > 100_000 {
        return Err(bad());
    }
    let ten = BigInt::from(10u32);
    let p = num_traits::pow(ten, scale.unsigned_abs() as usize);
    Ok(if scale >= 0 {
        Rational::from_integer(n * p)
    } else {
        Rational::new(n, p)
    })
}

/// Splits at top-level `+`/`-` signs, keeping exponent signs (`1e-4`) attached.
fn split_terms(s: &str) -> Vec<String> {
    let mut terms = Vec::new();
    let mut cur = String::new();
    let mut depth = 0i32;
    let mut prev: Option<char> = None;
    for c in s.chars() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            _ => {}
        }
        let is_split = (c == '+' || c == '-')
            && depth == 0
            && !cur.is_empty()
            && !matches!(prev, Some('e') | Some('E') | Some('*') | Some('/'));
        if is_split {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(c);
        prev = Some(c);
    }
    if !cur.is_empty() {
        terms.push(cur);
    }
    terms
}

impl FromStr for ExactScalar {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let s: String = input.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::parse("empty scalar"));
        }
        let mut acc = ExactScalar::zero();
        for term in split_terms(&s) {
            acc = acc.checked_add(&parse_term(&term)?)?;
        }
        Ok(acc)
    }
}

fn parse_term(term: &str) -> Result<ExactScalar> {
    let Some(pos) = term.find("sqrt(") else {
        return parse_real_literal(term).map(ExactScalar::from_rational);
    };
    let close = term[pos..]
        .find(')')
        .map(|i| i + pos)
        .ok_or_else(|| Error::parse(format!("unclosed sqrt in '{term}'")))?;
    let radicand: BigInt = term[pos + 5..close]
        .parse()
        .map_err(|_| Error::parse(format!("sqrt argument must be an integer in '{term}'")))?;
    let before = &term[..pos];
    let after = &term[close + 1..];
    let mut coeff = match before {
        "" | "+" => Rational::one(),
        "-" => -Rational::one(),
        b => {
            let b = b
                .strip_suffix('*')
                .ok_or_else(|| Error::parse(format!("expected '*' before sqrt in '{term}'")))?;
            match b {
                "" | "+" => Rational::one(),
                "-" => -Rational::one(),
                b => parse_real_literal(b)?,
            }
        }
    };
    if !after.is_empty() {
        let den = after
            .strip_prefix('/')
            .ok_or_else(|| Error::parse(format!("unexpected trailing '{after}'")))?;
        let den = parse_decimal(den)?;
        if den.is_zero() {
            return Err(Error::parse(format!("zero denominator in '{term}'")));
        }
        coeff /= den;
    }
    if radicand.is_negative() {
        return Err(Error::Unsupported(format!("sqrt({radicand}) is not real")));
    }
    if radicand.is_zero() {
        return Ok(ExactScalar::zero());
    }
    ExactScalar::new(Rational::zero(), coeff, radicand)
}

impl Serialize for ExactScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

struct ScalarVisitor;

impl Visitor<'_> for ScalarVisitor {
    type Value = ExactScalar;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a scalar string like \"p/q\" or \"p/q+r/s*sqrt(D)\", or a number")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExactScalar, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExactScalar, E> {
        Ok(ExactScalar::from_int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExactScalar, E> {
        Ok(ExactScalar::from_int(v))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExactScalar, E> {
        // Shortest round-trip decimal, read exactly: 1e-4 becomes 1/10000.
        if !v.is_finite() {
            return Err(E::custom("non-finite number"));
        }
        format!("{v:e}").parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for ExactScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        deserializer.deserialize_any(ScalarVisitor)
    }
}

pub fn is_perfect_square(n: &BigInt) -> bool {
    if n.sign() == Sign::Minus {
        return false;
    }
    let r = n.sqrt();
    &r * &r == *n
}
