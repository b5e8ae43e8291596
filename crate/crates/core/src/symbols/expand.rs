//! Bilinear normal form of a symbol: form-by-form part plus constant residues.

use std::collections::BTreeMap;

use super::{FormId, K2Symbol};
use crate::arith::ExactScalar;

/// `function_part[(a, b)]` with `a < b` is the coefficient of `{F_a, F_b}`;
/// `constant_line[(c, F)]` is the coefficient of `{c, F}`;
/// `constant_constant[(c, c')]` is the coefficient of `{c, c'}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PairExpansion {
    pub function_part: BTreeMap<(FormId, FormId), i64>,
    pub constant_line: BTreeMap<(ExactScalar, FormId), i64>,
    pub constant_constant: BTreeMap<(ExactScalar, ExactScalar), i64>,
}

fn bump<K: Ord + Clone>(m: &mut BTreeMap<K, i64>, k: K, v: i64) {
    if v == 0 {
        return;
    }
    let e = m.entry(k.clone()).or_insert(0);
    *e += v;
    if *e == 0 {
        m.remove(&k);
    }
}

impl PairExpansion {
    pub fn is_zero(&self) -> bool {
        self.function_part.is_empty()
            && self.constant_line.is_empty()
            && self.constant_constant.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (k, v) in &o.function_part {
            bump(&mut out.function_part, k.clone(), *v);
        }
        for (k, v) in &o.constant_line {
            bump(&mut out.constant_line, k.clone(), *v);
        }
        for (k, v) in &o.constant_constant {
            bump(&mut out.constant_constant, k.clone(), *v);
        }
        out
    }

    /// Coefficient of `{F_a, F_b}` in antisymmetric form.
    pub fn function_coeff(&self, a: &FormId, b: &FormId) -> i64 {
        use std::cmp::Ordering::*;
        match a.cmp(b) {
            Less => self
                .function_part
                .get(&(a.clone(), b.clone()))
                .copied()
                .unwrap_or(0),
            Greater => -self
                .function_part
                .get(&(b.clone(), a.clone()))
                .copied()
                .unwrap_or(0),
            Equal => 0,
        }
    }

    /// For each form `F`, the product `prod c^n` over the entries `n {c, F}`.
    pub fn constant_per_form(&self) -> BTreeMap<FormId, ExactScalar> {
        let mut out: BTreeMap<FormId, ExactScalar> = BTreeMap::new();
        for ((c, f), n) in &self.constant_line {
            let p = c.pow(*n).expect("nonzero constant");
            let e = out.entry(f.clone()).or_insert_with(ExactScalar::one);
            *e = e.checked_mul(&p).expect("compatible fields");
        }
        out
    }
}

/// Expands every term `n {c prod F^e, c' prod G^f}` by bilinearity.
/// The diagonal `{F, F}` is rewritten as `{-1, F}`.
pub fn expand_bilinear(sym: &K2Symbol) -> PairExpansion {
    let mut out = PairExpansion::default();
    let one = ExactScalar::one();
    let minus_one = -ExactScalar::one();
    for t in sym.terms() {
        let n = t.coeff;
        for (fa, ea) in &t.left.factors {
            for (fb, eb) in &t.right.factors {
                let v = n * ea * eb;
                match fa.cmp(fb) {
                    std::cmp::Ordering::Less => {
                        bump(&mut out.function_part, (fa.clone(), fb.clone()), v)
                    }
                    std::cmp::Ordering::Greater => {
                        bump(&mut out.function_part, (fb.clone(), fa.clone()), -v)
                    }
                    std::cmp::Ordering::Equal => {
                        bump(&mut out.constant_line, (minus_one.clone(), fa.clone()), v)
                    }
                }
            }
        }
        if t.left.constant != one {
            for (fb, eb) in &t.right.factors {
                bump(
                    &mut out.constant_line,
                    (t.left.constant.clone(), fb.clone()),
                    n * eb,
                );
            }
        }
        if t.right.constant != one {
            for (fa, ea) in &t.left.factors {
                bump(
                    &mut out.constant_line,
                    (t.right.constant.clone(), fa.clone()),
                    -n * ea,
                );
            }
        }
        if t.left.constant != one && t.right.constant != one {
            bump(
                &mut out.constant_constant,
                (t.left.constant.clone(), t.right.constant.clone()),
                n,
            );
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::LineId;
    use crate::symbols::Monomial;

    fn line(g: usize, o: usize) -> FormId {
        FormId::Line(LineId::new(g, o))
    }

    #[test]
    fn r_shape_expansion() {
        let s = K2Symbol::pair(
            Monomial::line_ratio(LineId::new(0, 1), LineId::new(0, 0)),
            Monomial::line_ratio(LineId::new(1, 1), LineId::new(1, 0)),
        );
        let e = expand_bilinear(&s);
        assert_eq!(e.function_coeff(&line(0, 1), &line(1, 1)), 1);
        assert_eq!(e.function_coeff(&line(0, 1), &line(1, 0)), -1);
        assert_eq!(e.function_coeff(&line(0, 0), &line(1, 1)), -1);
        assert_eq!(e.function_coeff(&line(0, 0), &line(1, 0)), 1);
        assert_eq!(e.function_coeff(&line(1, 0), &line(0, 0)), -1);
        assert!(e.constant_line.is_empty() && e.constant_constant.is_empty());
    }

    #[test]
    fn constant_shift_and_linearity() {
        let f = Monomial::line(LineId::new(0, 0));
        let g = Monomial::line(LineId::new(1, 0));
        let c = ExactScalar::from_int(3);
        let s = K2Symbol::pair(f.clone().scale(&c).unwrap(), g.clone())
            .sub(&K2Symbol::pair(f.clone(), g.clone()));
        let e = expand_bilinear(&s);
        assert!(e.function_part.is_empty());
        assert_eq!(e.constant_line.get(&(c.clone(), line(1, 0))), Some(&1));
        let s2 = K2Symbol::pair(g.clone(), f.clone().pow(2).unwrap());
        assert_eq!(
            expand_bilinear(&s.add(&s2)),
            expand_bilinear(&s).add(&expand_bilinear(&s2))
        );
        // {F, F} = {-1, F}
        let d = expand_bilinear(&K2Symbol::pair(f.clone(), f));
        assert_eq!(
            d.constant_line.get(&(-ExactScalar::one(), line(0, 0))),
            Some(&1)
        );
    }
}
