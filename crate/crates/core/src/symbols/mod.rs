//! Formal K2 symbols built from affine-linear forms.

mod constants;
mod elements;
mod expand;
mod relations;

use std::collections::BTreeMap;
use std::fmt;

use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Deserialize, Serialize, Serializer};

use crate::arith::ExactScalar;
use crate::config::{LineConfiguration, LineId};
use crate::error::{Error, Result};

pub use constants::{
    reduce_constant_part, tate_detector, ConstantReduction, SteinbergStep, TateVerdict,
};
pub use elements::{generator_list, m_for_point, r_element, t_element, NamedElement};
pub use expand::{expand_bilinear, PairExpansion};
pub use relations::{
    admissible_assignments, relation_sides, relation_templates, verify_relation,
    verify_relation_sides, ElementSpec, RelationId, RelationReport, RelationTemplate,
};

/// An affine-linear form `a x + b y + c` that is not a configured line.
///
/// Stored with the first nonzero of `(a, b)` equal to 1; the scale lives in the monomial constant.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AffineForm {
    pub a: ExactScalar,
    pub b: ExactScalar,
    pub c: ExactScalar,
}

/// Identifier of a factor: a configured line or a normalized ad-hoc form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FormId {
    Line(LineId),
    Adhoc(Box<AffineForm>),
}

impl FormId {
    pub fn as_line(&self) -> Option<LineId> {
        match self {
            FormId::Line(l) => Some(*l),
            FormId::Adhoc(_) => None,
        }
    }

    /// Coefficients `(a, b, c)` of the form.
    pub fn coefficients(&self, cfg: &LineConfiguration) -> (ExactScalar, ExactScalar, ExactScalar) {
        match self {
            FormId::Line(id) => {
                let (a, b, c) = cfg.line(*id);
                (a.clone(), b.clone(), c.clone())
            }
            FormId::Adhoc(f) => (f.a.clone(), f.b.clone(), f.c.clone()),
        }
    }

    /// Parses the display form: `L<i>,<j>` (1-based) or `F(a,b,c)`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(rest) = s.strip_prefix('L') {
            let (i, j) = rest
                .split_once(',')
                .ok_or_else(|| Error::parse(format!("bad line id '{s}'")))?;
            let i: usize = i
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad line id '{s}'")))?;
            let j: usize = j
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad line id '{s}'")))?;
            if i == 0 || j == 0 {
                return Err(Error::parse(format!("line ids are 1-based: '{s}'")));
            }
            return Ok(FormId::Line(LineId::new(i - 1, j - 1)));
        }
        if let Some(inner) = s.strip_prefix("F(").and_then(|r| r.strip_suffix(')')) {
            let parts: Vec<&str> = inner.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::parse(format!("bad form id '{s}'")));
            }
            let a: ExactScalar = parts[0].parse()?;
            let b: ExactScalar = parts[1].parse()?;
            let c: ExactScalar = parts[2].parse()?;
            return Ok(FormId::Adhoc(Box::new(AffineForm { a, b, c })));
        }
        Err(Error::parse(format!("unknown factor id '{s}'")))
    }
}

impl fmt::Display for FormId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormId::Line(l) => write!(f, "{l}"),
            FormId::Adhoc(a) => write!(f, "F({},{},{})", a.a, a.b, a.c),
        }
    }
}

/// Interns `a x + b y + c`: returns the matching configured line or a normalized ad-hoc form,
/// together with the scalar `mu` such that `a x + b y + c = mu * form`.
pub fn intern_form(
    cfg: &LineConfiguration,
    a: &ExactScalar,
    b: &ExactScalar,
    c: &ExactScalar,
) -> Result<(FormId, ExactScalar)> {
    if a.is_zero() && b.is_zero() {
        return Err(Error::invalid("affine form with (a,b) = (0,0) is constant"));
    }
    for id in cfg.line_ids() {
        let (la, lb, lc) = cfg.line(id);
        // (a,b,c) = mu (la,lb,lc)
        let mu = if !la.is_zero() {
            a.checked_div(la)?
        } else {
            b.checked_div(lb)?
        };
        if mu.is_zero() {
            continue;
        }
        if &mu.checked_mul(la)? == a && &mu.checked_mul(lb)? == b && &mu.checked_mul(lc)? == c {
            return Ok((FormId::Line(id), mu));
        }
    }
    let mu = if !a.is_zero() { a.clone() } else { b.clone() };
    let inv = mu.inv()?;
    let form = AffineForm {
        a: a.checked_mul(&inv)?,
        b: b.checked_mul(&inv)?,
        c: c.checked_mul(&inv)?,
    };
    Ok((FormId::Adhoc(Box::new(form)), mu))
}

/// `constant * prod form^exponent`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    pub constant: ExactScalar,
    pub factors: BTreeMap<FormId, i64>,
}

impl Monomial {
    pub fn one() -> Self {
        Self::constant(ExactScalar::one())
    }

    pub fn constant(c: ExactScalar) -> Self {
        assert!(!c.is_zero(), "monomial constant must be nonzero");
        Monomial {
            constant: c,
            factors: BTreeMap::new(),
        }
    }

    pub fn factor(id: FormId, e: i64) -> Self {
        let mut m = Self::one();
        if e != 0 {
            m.factors.insert(id, e);
        }
        m
    }

    pub fn line(id: LineId) -> Self {
        Self::factor(FormId::Line(id), 1)
    }

    /// `L_p / L_q`.
    pub fn line_ratio(p: LineId, q: LineId) -> Self {
        Self::line(p).div(&Self::line(q)).expect("unit constants")
    }

    /// Monomial for an arbitrary affine form, interned against the configuration.
    pub fn affine(
        cfg: &LineConfiguration,
        a: &ExactScalar,
        b: &ExactScalar,
        c: &ExactScalar,
    ) -> Result<Self> {
        let (id, mu) = intern_form(cfg, a, b, c)?;
        Self::factor(id, 1).scale(&mu)
    }

    pub fn is_constant(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn scale(mut self, c: &ExactScalar) -> Result<Self> {
        self.constant = self.constant.checked_mul(c)?;
        if self.constant.is_zero() {
            return Err(Error::invalid("monomial constant became zero"));
        }
        Ok(self)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        let mut out = self.clone();
        out.constant = out.constant.checked_mul(&o.constant)?;
        for (id, e) in &o.factors {
            let v = out.factors.entry(id.clone()).or_insert(0);
            *v += e;
            if *v == 0 {
                out.factors.remove(id);
            }
        }
        Ok(out)
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(Monomial {
            constant: self.constant.inv()?,
            factors: self.factors.iter().map(|(k, e)| (k.clone(), -e)).collect(),
        })
    }

    pub fn div(&self, o: &Self) -> Result<Self> {
        self.mul(&o.inv()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        if e == 0 {
            return Ok(Self::one());
        }
        Ok(Monomial {
            constant: self.constant.pow(e)?,
            factors: self
                .factors
                .iter()
                .map(|(k, v)| (k.clone(), v * e))
                .collect(),
        })
    }

    pub fn neg(&self) -> Self {
        Monomial {
            constant: -&self.constant,
            factors: self.factors.clone(),
        }
    }

    /// True when every factor is a configured line.
    pub fn only_lines(&self) -> bool {
        self.factors.keys().all(|k| k.as_line().is_some())
    }

    /// Exact value at a point where no factor vanishes.
    pub fn eval_exact(
        &self,
        cfg: &LineConfiguration,
        x: &ExactScalar,
        y: &ExactScalar,
    ) -> Result<ExactScalar> {
        let mut acc = self.constant.clone();
        for (id, e) in &self.factors {
            let (a, b, c) = id.coefficients(cfg);
            let v = a
                .checked_mul(x)?
                .checked_add(&b.checked_mul(y)?)?
                .checked_add(&c)?;
            acc = acc.checked_mul(&v.pow(*e)?)?;
        }
        Ok(acc)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.constant)?;
        for (id, e) in &self.factors {
            if *e == 1 {
                write!(f, "*{id}")?;
            } else {
                write!(f, "*{id}^{e}")?;
            }
        }
        Ok(())
    }
}

impl Serialize for Monomial {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        struct Factors<'a>(&'a BTreeMap<FormId, i64>);
        impl Serialize for Factors<'_> {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                let mut m = s.serialize_map(Some(self.0.len()))?;
                for (k, v) in self.0 {
                    m.serialize_entry(&k.to_string(), v)?;
                }
                m.end()
            }
        }
        let mut m = s.serialize_map(Some(2))?;
        m.serialize_entry("constant", &self.constant)?;
        m.serialize_entry("factors", &Factors(&self.factors))?;
        m.end()
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMonomial {
    constant: ExactScalar,
    factors: BTreeMap<String, i64>,
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawMonomial::deserialize(d)?;
        if raw.constant.is_zero() {
            return Err(serde::de::Error::custom(
                "monomial constant must be nonzero",
            ));
        }
        let mut factors = BTreeMap::new();
        for (k, v) in raw.factors {
            let id = FormId::parse(&k).map_err(serde::de::Error::custom)?;
            if v != 0 {
                *factors.entry(id).or_insert(0) += v;
            }
        }
        factors.retain(|_, v| *v != 0);
        Ok(Monomial {
            constant: raw.constant,
            factors,
        })
    }
}

/// Formal integer combination of symbols `{left, right}`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct K2Symbol {
    terms: BTreeMap<(Monomial, Monomial), i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymbolTerm {
    pub left: Monomial,
    pub right: Monomial,
    pub coeff: i64,
}

impl K2Symbol {
    pub fn zero() -> Self {
        K2Symbol::default()
    }

    pub fn pair(left: Monomial, right: Monomial) -> Self {
        Self::term(left, right, 1)
    }

    pub fn term(left: Monomial, right: Monomial, coeff: i64) -> Self {
        let mut s = Self::zero();
        s.add_term(left, right, coeff);
        s
    }

    pub fn add_term(&mut self, left: Monomial, right: Monomial, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let key = (left, right);
        let v = self.terms.entry(key.clone()).or_insert(0);
        *v += coeff;
        if *v == 0 {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = SymbolTerm> + '_ {
        self.terms.iter().map(|((l, r), c)| SymbolTerm {
            left: l.clone(),
            right: r.clone(),
            coeff: *c,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for ((l, r), c) in &o.terms {
            out.add_term(l.clone(), r.clone(), *c);
        }
        out
    }

    pub fn scale(&self, k: i64) -> Self {
        let mut out = Self::zero();
        for ((l, r), c) in &self.terms {
            out.add_term(l.clone(), r.clone(), c * k);
        }
        out
    }

    pub fn neg(&self) -> Self {
        self.scale(-1)
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// All factor ids used by the symbol.
    pub fn forms(&self) -> Vec<FormId> {
        let mut v: Vec<FormId> = self
            .terms
            .keys()
            .flat_map(|(l, r)| l.factors.keys().chain(r.factors.keys()).cloned())
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn only_lines(&self) -> bool {
        self.terms
            .keys()
            .all(|(l, r)| l.only_lines() && r.only_lines())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let terms: Vec<SymbolTerm> =
            serde_json::from_str(text).map_err(|e| Error::parse(e.to_string()))?;
        let mut s = Self::zero();
        for t in terms {
            s.add_term(t.left, t.right, t.coeff);
        }
        Ok(s)
    }
}

impl Serialize for K2Symbol {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(self.terms.len()))?;
        for t in self.terms() {
            seq.serialize_element(&t)?;
        }
        seq.end()
    }
}

impl fmt::Display for K2Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self
            .terms()
            .map(|t| format!("{}{{{}, {}}}", t.coeff, t.left, t.right))
            .collect();
        f.write_str(&parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::fixtures::*;

    #[test]
    fn interning_matches_configured_lines_up_to_scale() {
        let c = cfg_b();
        let two = ExactScalar::from_int(2);
        let (id, mu) = intern_form(&c, &two, &ExactScalar::zero(), &two).unwrap();
        assert_eq!(id, FormId::Line(LineId::new(0, 1)));
        assert_eq!(mu, two);
        let (id, mu) = intern_form(
            &c,
            &two,
            &ExactScalar::from_int(4),
            &ExactScalar::from_int(1),
        )
        .unwrap();
        assert_eq!(id.to_string(), "F(1,2,1/2)");
        assert_eq!(mu, two);
        assert_eq!(FormId::parse(&id.to_string()).unwrap(), id);
        assert_eq!(
            FormId::parse("L2,1").unwrap(),
            FormId::Line(LineId::new(1, 0))
        );
    }

    #[test]
    fn symbol_merging_and_json() {
        let a = Monomial::line_ratio(LineId::new(0, 1), LineId::new(0, 0));
        let b = Monomial::line_ratio(LineId::new(1, 1), LineId::new(1, 0));
        let s = K2Symbol::pair(a.clone(), b.clone()).add(&K2Symbol::pair(a.clone(), b.clone()));
        assert_eq!(s.len(), 1);
        assert!(s.sub(&K2Symbol::term(a, b, 2)).is_empty());
        let back = K2Symbol::from_json(&s.to_json()).unwrap();
        assert_eq!(back, s);
    }
}
