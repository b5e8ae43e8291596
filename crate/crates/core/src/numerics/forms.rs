//! Floating-point images of symbols: complex affine forms, monomials and symbol terms.

use std::collections::BTreeMap;

use num_complex::Complex64 as C;

use crate::arith::{Embedding, ExactScalar};
use crate::config::LineConfiguration;
use crate::error::{Error, Result};
use crate::symbols::{FormId, K2Symbol, Monomial};

/// `a x + b y + c`; `line` names the configured line it equals, if any.
#[derive(Debug, Clone, PartialEq)]
pub struct NumForm {
    pub a: C,
    pub b: C,
    pub c: C,
    pub line: Option<usize>,
    pub label: String,
}

impl NumForm {
    pub fn affine(a: C, b: C, c: C) -> Self {
        NumForm {
            a,
            b,
            c,
            line: None,
            label: format!("F({a},{b},{c})"),
        }
    }

    pub fn x() -> Self {
        NumForm {
            label: "x".into(),
            ..Self::affine(C::new(1.0, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0))
        }
    }

    pub fn y() -> Self {
        NumForm {
            label: "y".into(),
            ..Self::affine(C::new(0.0, 0.0), C::new(1.0, 0.0), C::new(0.0, 0.0))
        }
    }

    pub fn eval(&self, x: C, y: C) -> C {
        self.a * x + self.b * y + self.c
    }
}

/// `constant * prod forms[k]^e`, indices into the owning [`NumSymbol`]'s form list.
#[derive(Debug, Clone, PartialEq)]
pub struct NumMonomial {
    pub constant: C,
    pub factors: Vec<(usize, i64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumTerm {
    pub left: NumMonomial,
    pub right: NumMonomial,
    pub coeff: i64,
}

/// A symbol whose entries are evaluable on any fiber model.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NumSymbol {
    pub forms: Vec<NumForm>,
    pub terms: Vec<NumTerm>,
}

impl NumSymbol {
    /// Index of a form, appended when new.
    pub fn form_index(&mut self, f: NumForm) -> usize {
        if let Some(k) = self.forms.iter().position(|g| *g == f) {
            return k;
        }
        self.forms.push(f);
        self.forms.len() - 1
    }

    pub fn monomial(&mut self, constant: C, factors: &[(NumForm, i64)]) -> NumMonomial {
        let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
        for (f, e) in factors {
            let k = self.form_index(f.clone());
            *acc.entry(k).or_insert(0) += e;
        }
        NumMonomial {
            constant,
            factors: acc.into_iter().filter(|(_, e)| *e != 0).collect(),
        }
    }

    pub fn push(&mut self, left: NumMonomial, right: NumMonomial, coeff: i64) {
        if coeff != 0 {
            self.terms.push(NumTerm { left, right, coeff });
        }
    }

    /// Sum of two symbols; forms are merged.
    pub fn add(&self, o: &NumSymbol) -> NumSymbol {
        let mut out = self.clone();
        let remap: Vec<usize> = o.forms.iter().map(|f| out.form_index(f.clone())).collect();
        for t in &o.terms {
            let m = |m: &NumMonomial| NumMonomial {
                constant: m.constant,
                factors: m.factors.iter().map(|(k, e)| (remap[*k], *e)).collect(),
            };
            out.terms.push(NumTerm {
                left: m(&t.left),
                right: m(&t.right),
                coeff: t.coeff,
            });
        }
        out
    }

    pub fn scale(&self, n: i64) -> NumSymbol {
        let mut out = self.clone();
        out.terms.retain(|_| n != 0);
        for t in &mut out.terms {
            t.coeff *= n;
        }
        out
    }

    /// Image of an exact symbol under a real embedding. Configured lines keep their identity,
    /// indexed in `cfg.line_ids()` order.
    pub fn from_exact(
        cfg: &LineConfiguration,
        emb: Embedding,
        sym: &K2Symbol,
    ) -> Result<NumSymbol> {
        let ids = cfg.line_ids();
        let mut out = NumSymbol::default();
        let real = |s: &ExactScalar| C::new(s.to_f64(emb), 0.0);
        let conv = |out: &mut NumSymbol, m: &Monomial| -> Result<NumMonomial> {
            let mut factors = Vec::new();
            for (id, e) in &m.factors {
                let (a, b, c) = id.coefficients(cfg);
                let mut f = NumForm::affine(real(&a), real(&b), real(&c));
                f.label = id.to_string();
                if let FormId::Line(l) = id {
                    f.line = Some(
                        ids.iter()
                            .position(|x| x == l)
                            .ok_or_else(|| Error::invalid(format!("unknown line {l}")))?,
                    );
                }
                factors.push((f, *e));
            }
            Ok(out.monomial(real(&m.constant), &factors))
        };
        for t in sym.terms() {
            let l = conv(&mut out, &t.left)?;
            let r = conv(&mut out, &t.right)?;
            out.push(l, r, t.coeff);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::fixtures::*;
    use crate::config::LineId;

    #[test]
    fn exact_symbol_converts_with_line_indices() {
        let cfg = cfg_a();
        let s = K2Symbol::pair(
            Monomial::line_ratio(LineId::new(0, 0), LineId::new(1, 0))
                .scale(&ExactScalar::from_int(3))
                .unwrap(),
            Monomial::line(LineId::new(2, 0)),
        );
        let n = NumSymbol::from_exact(&cfg, Embedding::Plus, &s).unwrap();
        assert_eq!(n.terms.len(), 1);
        assert_eq!(n.terms[0].left.constant, C::new(3.0, 0.0));
        assert_eq!(
            n.forms.iter().filter_map(|f| f.line).collect::<Vec<_>>(),
            vec![0, 1, 2]
        );
        let doubled = n.add(&n);
        assert_eq!(doubled.forms.len(), 3);
        assert_eq!(doubled.terms.len(), 2);
    }
}
