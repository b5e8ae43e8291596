//! Exact univariate polynomials and sparse bivariate Laurent polynomials.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;

use super::{Embedding, ExactScalar};
use crate::error::Result;

/// Dense univariate polynomial, `coeffs[k]` multiplies `x^k`. No trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UPoly {
    coeffs: Vec<ExactScalar>,
}

impl UPoly {
    pub fn new(mut coeffs: Vec<ExactScalar>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        UPoly { coeffs }
    }

    pub fn zero() -> Self {
        UPoly { coeffs: vec![] }
    }

    pub fn constant(c: ExactScalar) -> Self {
        Self::new(vec![c])
    }

    /// `a*x + b`.
    pub fn linear(a: ExactScalar, b: ExactScalar) -> Self {
        Self::new(vec![b, a])
    }

    pub fn monomial(c: ExactScalar, k: usize) -> Self {
        let mut v = vec![ExactScalar::zero(); k + 1];
        v[k] = c;
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[ExactScalar] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> ExactScalar {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(ExactScalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n)
            .map(|k| self.coeff(k).checked_add(&o.coeff(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(v))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        let n = self.coeffs.len().max(o.coeffs.len());
        let v = (0..n)
            .map(|k| self.coeff(k).checked_sub(&o.coeff(k)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(v))
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        if self.is_zero() || o.is_zero() {
            return Ok(Self::zero());
        }
        let mut v = vec![ExactScalar::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                v[i + j] = v[i + j].checked_add(&a.checked_mul(b)?)?;
            }
        }
        Ok(Self::new(v))
    }

    pub fn scale(&self, c: &ExactScalar) -> Result<Self> {
        Ok(Self::new(
            self.coeffs
                .iter()
                .map(|a| a.checked_mul(c))
                .collect::<Result<Vec<_>>>()?,
        ))
    }

    pub fn eval(&self, x: &ExactScalar) -> Result<ExactScalar> {
        let mut acc = ExactScalar::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.checked_mul(x)?.checked_add(c)?;
        }
        Ok(acc)
    }

    pub fn derivative(&self) -> Result<Self> {
        let v = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| c.checked_mul(&ExactScalar::from_int(k as i64)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(v))
    }

    /// Product of `(r_k x + s_k)` over the given pairs.
    pub fn product_of_linear(factors: &[(ExactScalar, ExactScalar)]) -> Result<Self> {
        let mut acc = Self::constant(ExactScalar::one());
        for (a, b) in factors {
            acc = acc.mul(&Self::linear(a.clone(), b.clone()))?;
        }
        Ok(acc)
    }

    /// Interpolating polynomial through `(xs[k], ys[k])` (Newton divided differences).
    pub fn interpolate(xs: &[ExactScalar], ys: &[ExactScalar]) -> Result<Self> {
        let n = xs.len();
        let mut dd: Vec<ExactScalar> = ys.to_vec();
        for level in 1..n {
            for k in (level..n).rev() {
                let num = dd[k].checked_sub(&dd[k - 1])?;
                let den = xs[k].checked_sub(&xs[k - level])?;
                dd[k] = num.checked_div(&den)?;
            }
        }
        let mut acc = Self::zero();
        for k in (0..n).rev() {
            acc = acc
                .mul(&Self::linear(ExactScalar::one(), -&xs[k]))?
                .add(&Self::constant(dd[k].clone()))?;
        }
        Ok(acc)
    }

    /// Complex coefficients under an embedding.
    pub fn to_complex(&self, emb: Embedding) -> Vec<Complex64> {
        self.coeffs
            .iter()
            .map(|c| Complex64::new(c.to_f64(emb), 0.0))
            .collect()
    }
}

/// Sparse bivariate Laurent polynomial in `x, y`, keyed by exponent pairs.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BiPoly {
    terms: BTreeMap<(i64, i64), ExactScalar>,
}

impl BiPoly {
    pub fn zero() -> Self {
        BiPoly::default()
    }

    pub fn constant(c: ExactScalar) -> Self {
        Self::term(c, 0, 0)
    }

    pub fn term(c: ExactScalar, i: i64, j: i64) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((i, j), c);
        }
        BiPoly { terms }
    }

    pub fn x() -> Self {
        Self::term(ExactScalar::one(), 1, 0)
    }

    pub fn y() -> Self {
        Self::term(ExactScalar::one(), 0, 1)
    }

    /// `a*x + b*y + c`.
    pub fn affine(a: &ExactScalar, b: &ExactScalar, c: &ExactScalar) -> Self {
        let mut p = Self::term(a.clone(), 1, 0);
        p.add_term(b.clone(), 0, 1).expect("same field");
        p.add_term(c.clone(), 0, 0).expect("same field");
        p
    }

    /// Univariate polynomial in `x` lifted to two variables.
    pub fn from_upoly_x(p: &UPoly) -> Self {
        let mut out = Self::zero();
        for (k, c) in p.coeffs().iter().enumerate() {
            out.add_term(c.clone(), k as i64, 0).expect("same field");
        }
        out
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(i64, i64), &ExactScalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, i: i64, j: i64) -> ExactScalar {
        self.terms
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(ExactScalar::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, c: ExactScalar, i: i64, j: i64) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        let e = self.terms.entry((i, j)).or_insert_with(ExactScalar::zero);
        *e = e.checked_add(&c)?;
        if e.is_zero() {
            self.terms.remove(&(i, j));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        let mut out = self.clone();
        for (&(i, j), c) in &o.terms {
            out.add_term(c.clone(), i, j)?;
        }
        Ok(out)
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> Self {
        BiPoly {
            terms: self.terms.iter().map(|(k, c)| (*k, -c)).collect(),
        }
    }

    pub fn scale(&self, s: &ExactScalar) -> Result<Self> {
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            out.add_term(c.checked_mul(s)?, i, j)?;
        }
        Ok(out)
    }

    /// Multiplies by `x^i y^j`.
    pub fn shift(&self, di: i64, dj: i64) -> Self {
        BiPoly {
            terms: self
                .terms
                .iter()
                .map(|(&(i, j), c)| ((i + di, j + dj), c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let mut out = Self::zero();
        for (&(i, j), a) in &self.terms {
            for (&(k, l), b) in &o.terms {
                out.add_term(a.checked_mul(b)?, i + k, j + l)?;
            }
        }
        Ok(out)
    }

    pub fn pow(&self, e: u32) -> Result<Self> {
        let mut acc = Self::constant(ExactScalar::one());
        for _ in 0..e {
            acc = acc.mul(self)?;
        }
        Ok(acc)
    }

    /// Substitutes `x -> 1/x` (monomial inversion in `x`).
    pub fn invert_x(&self) -> Self {
        BiPoly {
            terms: self
                .terms
                .iter()
                .map(|(&(i, j), c)| ((-i, j), c.clone()))
                .collect(),
        }
    }

    /// Largest and smallest exponent of `y`.
    pub fn y_range(&self) -> Option<(i64, i64)> {
        let lo = self.terms.keys().map(|k| k.1).min()?;
        let hi = self.terms.keys().map(|k| k.1).max()?;
        Some((lo, hi))
    }

    /// Largest and smallest exponent of `x`.
    pub fn x_range(&self) -> Option<(i64, i64)> {
        let lo = self.terms.keys().map(|k| k.0).min()?;
        let hi = self.terms.keys().map(|k| k.0).max()?;
        Some((lo, hi))
    }

    /// Substitutes `y -> num/den`, clearing denominators: returns
    /// `sum_j c_j(x) num^j den^(deg_y - j)` for a polynomial with `y`-exponents in `0..=deg_y`.
    pub fn substitute_y_fraction(&self, num: &BiPoly, den: &BiPoly) -> Result<Self> {
        let (lo, hi) = self.y_range().unwrap_or((0, 0));
        assert!(lo >= 0, "negative y exponents cannot be cleared");
        let mut num_pows = vec![Self::constant(ExactScalar::one())];
        let mut den_pows = vec![Self::constant(ExactScalar::one())];
        for k in 1..=hi as usize {
            num_pows.push(num_pows[k - 1].mul(num)?);
            den_pows.push(den_pows[k - 1].mul(den)?);
        }
        let mut out = Self::zero();
        for (&(i, j), c) in &self.terms {
            let part = num_pows[j as usize]
                .mul(&den_pows[(hi - j) as usize])?
                .shift(i, 0)
                .scale(c)?;
            out = out.add(&part)?;
        }
        Ok(out)
    }

    /// Substitutes `y -> q` for a Laurent polynomial `q` with only nonnegative `y`-powers in `self`.
    pub fn substitute_y(&self, q: &BiPoly) -> Result<Self> {
        self.substitute_y_fraction(q, &Self::constant(ExactScalar::one()))
    }

    /// Evaluates at a complex point under an embedding.
    pub fn eval_complex(&self, emb: Embedding, x: Complex64, y: Complex64) -> Complex64 {
        self.terms
            .iter()
            .map(|(&(i, j), c)| {
                Complex64::new(c.to_f64(emb), 0.0) * x.powi(i as i32) * y.powi(j as i32)
            })
            .sum()
    }

    pub fn eval_exact(&self, x: &ExactScalar, y: &ExactScalar) -> Result<ExactScalar> {
        let mut acc = ExactScalar::zero();
        for (&(i, j), c) in &self.terms {
            acc = acc.checked_add(&c.checked_mul(&x.pow(i)?)?.checked_mul(&y.pow(j)?)?)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for BiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .rev()
            .map(|(&(i, j), c)| {
                let mut s = format!("({c})");
                if i != 0 {
                    s.push_str(&format!("*x^{i}"));
                }
                if j != 0 {
                    s.push_str(&format!("*y^{j}"));
                }
                s
            })
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: i64) -> ExactScalar {
        ExactScalar::from_int(v)
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let p = UPoly::new(vec![s(3), s(-1), s(0), s(2)]);
        let xs: Vec<_> = (0..4).map(s).collect();
        let ys: Vec<_> = xs.iter().map(|x| p.eval(x).unwrap()).collect();
        assert_eq!(UPoly::interpolate(&xs, &ys).unwrap(), p);
    }

    #[test]
    fn bipoly_arithmetic() {
        let l = BiPoly::affine(&s(1), &s(1), &s(-1));
        let sq = l.pow(2).unwrap();
        assert_eq!(sq.coeff(1, 1), s(2));
        assert_eq!(sq.coeff(0, 0), s(1));
        assert_eq!(sq.eval_exact(&s(2), &s(3)).unwrap(), s(16));
        let inv = BiPoly::x().invert_x();
        assert_eq!(inv.mul(&BiPoly::x()).unwrap(), BiPoly::constant(s(1)));
    }

    #[test]
    fn substitution() {
        // y^2 - x with y -> (y + 1)/x gives (y+1)^2 - x^3 after clearing x^2.
        let p = BiPoly::term(s(1), 0, 2).sub(&BiPoly::x()).unwrap();
        let num = BiPoly::y().add(&BiPoly::constant(s(1))).unwrap();
        let r = p.substitute_y_fraction(&num, &BiPoly::x()).unwrap();
        let expect = num.pow(2).unwrap().sub(&BiPoly::term(s(1), 3, 0)).unwrap();
        assert_eq!(r, expect);
    }
}
