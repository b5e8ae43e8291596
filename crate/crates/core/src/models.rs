//! Degree-2 models of the genus-`g` curves with `(N1, N2, N3) = (g+1, 2, 0)` or `(g, 1, 1)`,
//! and the element suite on `y (y + 2 x^(g+2) + lambda prod (alpha_i x + 1)) + x^(2g+4) = 0`.
//!
//! Tame symbols are computed from orders and leading coefficients at each place. The `mu_j`
//! are complex roots, so anything that depends on them is numeric.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::arith::{BiPoly, Embedding, ExactScalar, UPoly};
use crate::config::{LineConfiguration, NormalizedShape};
use crate::error::{Error, Result};
use crate::numerics::eta::integrate_symbol;
use crate::numerics::roots::{poly_roots, CPoly};
use crate::numerics::{
    Circle, FiberModel, LiftedLoop, NumForm, NumSymbol, PolyModel, Tolerances, UPath,
};

/// Relative tolerance for numeric tame values and for the `mu` re-expansion.
pub const NUMERIC_TAME_TOL: f64 = 1e-8;
pub const MU_RESIDUAL_TOL: f64 = 1e-10;

fn one() -> ExactScalar {
    ExactScalar::one()
}

fn cx(v: &ExactScalar, emb: Embedding) -> C {
    C::new(v.to_f64(emb), 0.0)
}

/// `y^2 + y (2 x^e + lambda P(x)) + x^(2e)` with `P = prod (alpha_i x + 1)`.
pub fn hyper_equation(e: usize, lambda: &ExactScalar, alphas: &[ExactScalar]) -> Result<BiPoly> {
    let p = alpha_product(alphas)?;
    let mut out = BiPoly::term(one(), 0, 2);
    out.add_term(ExactScalar::from_int(2), e as i64, 1)?;
    out = out.add(&BiPoly::from_upoly_x(&p.scale(lambda)?).shift(0, 1))?;
    out.add_term(one(), 2 * e as i64, 0)?;
    Ok(out)
}

/// `prod (alpha_i x + 1)`.
pub fn alpha_product(alphas: &[ExactScalar]) -> Result<UPoly> {
    let f: Vec<_> = alphas.iter().map(|a| (a.clone(), one())).collect();
    UPoly::product_of_linear(&f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum HyperCase {
    /// `(N1, N2, N3) = (g+1, 2, 0)`, normalized to `lambda x y (y+1) prod (x + alpha_i) = 1`.
    TwoGroups,
    /// `(g, 1, 1)`, normalized to `lambda (y - x) y prod (x + alpha_i) = 1`.
    ThreeGroups,
}

/// A normalized curve and its degree-2 model.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperTransform {
    pub case: HyperCase,
    pub genus: usize,
    pub lambda: ExactScalar,
    pub alphas: Vec<ExactScalar>,
    /// `g + 1` or `g + 2`: the model is `y (y + 2 x^e + lambda P) + x^(2e) = 0`.
    pub exponent: usize,
    /// `(s, t, k)`: the normalized coordinates are `X = x + s`, `Y = k (y + t)` in the
    /// coordinates of the normal form of the input configuration.
    pub shift: [ExactScalar; 3],
    /// The normalized curve `F(X, Y)`.
    pub source: BiPoly,
    pub model: BiPoly,
    /// `Y = y_num / y_den` as Laurent polynomials in the model coordinates; `X = 1/x`.
    pub y_num: BiPoly,
    pub y_den: BiPoly,
    /// `F(1/x, y_num/y_den) * multiplier = model`.
    pub multiplier: BiPoly,
    /// `M_i = {-x^e / y, alpha_i x + 1}`.
    pub elements: Vec<HyperElement>,
}

impl HyperTransform {
    /// Checks `F(1/x, y_num / y_den) * multiplier = model` as polynomials.
    pub fn pullback_is_exact(&self) -> Result<bool> {
        let cleared = self
            .source
            .invert_x()
            .substitute_y_fraction(&self.y_num, &self.y_den)?;
        let lhs = cleared.mul(&self.multiplier)?;
        let rhs = self.model.mul(&self.y_den.pow(2)?)?;
        Ok(lhs == rhs)
    }
}

fn lambda_x_p(lambda: &ExactScalar, alphas: &[ExactScalar], shift_x: i64) -> Result<BiPoly> {
    Ok(BiPoly::from_upoly_x(&alpha_product(alphas)?.scale(lambda)?).shift(shift_x, 0))
}

fn m_elements(e: usize, alphas: &[ExactScalar]) -> Vec<HyperElement> {
    (0..alphas.len())
        .map(|i| HyperElement {
            name: format!("M_{}", i + 1),
            symbol: HSymbol::pair(HMonomial::ratio_f(e), HMonomial::factor(HFn::Alpha(i))),
        })
        .collect()
}

/// Degree-2 model of a two-group configuration with group sizes `(g+1, 2)`.
pub fn transform_case1(cfg: &LineConfiguration) -> Result<HyperTransform> {
    let nf = cfg.normalize_n_le_3()?;
    if nf.shape != NormalizedShape::TwoGroups || nf.betas.len() != 2 || nf.alphas.len() < 2 {
        return Err(Error::invalid(format!(
            "expected group sizes (g+1, 2), got {:?}",
            cfg.sizes()
        )));
    }
    let g = nf.alphas.len() - 1;
    let a1 = &nf.alphas[0];
    let (b1, b2) = (&nf.betas[0], &nf.betas[1]);
    let d = b2.checked_sub(b1)?;
    let lambda = nf.lambda.checked_mul(&d)?.checked_mul(&d)?;
    let alphas = nf.alphas[1..]
        .iter()
        .map(|a| a.checked_sub(a1))
        .collect::<Result<Vec<_>>>()?;
    let e = g + 1;
    // lambda X Y (Y + 1) prod (X + alpha_i) - 1
    let mut xp = BiPoly::constant(lambda.clone()).shift(1, 0);
    for a in &alphas {
        xp = xp.mul(&BiPoly::affine(&one(), &ExactScalar::zero(), a))?;
    }
    let yy1 = BiPoly::term(one(), 0, 2).add(&BiPoly::y())?;
    let source = xp.mul(&yy1)?.sub(&BiPoly::constant(one()))?;
    let mut y_num = BiPoly::y();
    y_num.add_term(one(), e as i64, 0)?;
    let y_den = lambda_x_p(&lambda, &alphas, 0)?;
    let multiplier = lambda_x_p(&lambda, &alphas, e as i64)?;
    Ok(HyperTransform {
        case: HyperCase::TwoGroups,
        genus: g,
        model: hyper_equation(e, &lambda, &alphas)?,
        elements: m_elements(e, &alphas),
        shift: [a1.clone(), b1.clone(), d.inv()?],
        lambda,
        alphas,
        exponent: e,
        source,
        y_num,
        y_den,
        multiplier,
    })
}

/// Degree-2 model of a three-group configuration with group sizes `(g, 1, 1)`.
pub fn transform_case2(cfg: &LineConfiguration) -> Result<HyperTransform> {
    let nf = cfg.normalize_n_le_3()?;
    if nf.shape != NormalizedShape::ThreeGroups || nf.betas.len() != 1 || nf.gammas.len() != 1 {
        return Err(Error::invalid(format!(
            "expected group sizes (g, 1, 1), got {:?}",
            cfg.sizes()
        )));
    }
    let g = nf.alphas.len();
    let (b1, c1) = (&nf.betas[0], &nf.gammas[0]);
    let s = b1.checked_sub(c1)?;
    let alphas = nf
        .alphas
        .iter()
        .map(|a| a.checked_sub(&s))
        .collect::<Result<Vec<_>>>()?;
    let lambda = nf.lambda.clone();
    let e = g + 2;
    // lambda (Y - X) Y prod (X + alpha_i) - 1
    let mut f = BiPoly::affine(&-one(), &one(), &ExactScalar::zero())
        .shift(0, 1)
        .scale(&lambda)?;
    for a in &alphas {
        f = f.mul(&BiPoly::affine(&one(), &ExactScalar::zero(), a))?;
    }
    let source = f.sub(&BiPoly::constant(one()))?;
    let mut y_num = BiPoly::y();
    y_num.add_term(one(), e as i64, 0)?;
    let y_num = y_num.add(&lambda_x_p(&lambda, &alphas, 0)?)?;
    let y_den = lambda_x_p(&lambda, &alphas, 1)?;
    let multiplier = lambda_x_p(&lambda, &alphas, e as i64)?;
    Ok(HyperTransform {
        case: HyperCase::ThreeGroups,
        genus: g,
        model: hyper_equation(e, &lambda, &alphas)?,
        elements: m_elements(e, &alphas),
        shift: [s, b1.clone(), one()],
        lambda,
        alphas,
        exponent: e,
        source,
        y_num,
        y_den,
        multiplier,
    })
}

/// Functions whose symbols make up the suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HFn {
    X,
    Y,
    /// `alpha_i x + 1`
    Alpha(usize),
    /// `mu_j x + 1`
    Mu(usize),
}

impl fmt::Display for HFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HFn::X => write!(f, "x"),
            HFn::Y => write!(f, "y"),
            HFn::Alpha(i) => write!(f, "(alpha_{} x + 1)", i + 1),
            HFn::Mu(j) => write!(f, "(mu_{} x + 1)", j + 1),
        }
    }
}

/// `constant * prod f^e`.
#[derive(Debug, Clone, PartialEq)]
pub struct HMonomial {
    pub constant: ExactScalar,
    pub factors: Vec<(HFn, i64)>,
}

impl HMonomial {
    pub fn factor(f: HFn) -> Self {
        HMonomial {
            constant: one(),
            factors: vec![(f, 1)],
        }
    }

    /// `-x^e / y`.
    pub fn ratio_f(e: usize) -> Self {
        HMonomial {
            constant: -one(),
            factors: vec![(HFn::X, e as i64), (HFn::Y, -1)],
        }
    }
}

impl fmt::Display for HMonomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.constant)?;
        for (h, e) in &self.factors {
            write!(f, "*{h}^{e}")?;
        }
        Ok(())
    }
}

/// `sum coeff {left, right}`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct HSymbol {
    pub terms: Vec<(i64, HMonomial, HMonomial)>,
}

impl HSymbol {
    pub fn pair(l: HMonomial, r: HMonomial) -> Self {
        HSymbol {
            terms: vec![(1, l, r)],
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut terms = self.terms.clone();
        terms.extend(o.terms.iter().cloned());
        HSymbol { terms }
    }

    pub fn scale(&self, k: i64) -> Self {
        HSymbol {
            terms: self
                .terms
                .iter()
                .map(|(c, l, r)| (c * k, l.clone(), r.clone()))
                .filter(|t| t.0 != 0)
                .collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1))
    }

    pub fn sum<'a>(items: impl IntoIterator<Item = &'a HSymbol>) -> Self {
        items
            .into_iter()
            .fold(HSymbol::default(), |acc, s| acc.add(s))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperElement {
    pub name: String,
    pub symbol: HSymbol,
}

/// An exact scalar, or a complex number when `mu` enters.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Exact(ExactScalar),
    Numeric(C),
}

impl Value {
    pub fn one() -> Self {
        Value::Exact(one())
    }

    pub fn approx(&self, emb: Embedding) -> C {
        match self {
            Value::Exact(v) => cx(v, emb),
            Value::Numeric(z) => *z,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Value::Exact(_))
    }

    pub fn mul(&self, o: &Value, emb: Embedding) -> Result<Value> {
        Ok(match (self, o) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a.checked_mul(b)?),
            _ => Value::Numeric(self.approx(emb) * o.approx(emb)),
        })
    }

    /// `v^e`; `e = 0` gives an exact 1 whatever `v` is.
    pub fn pow(&self, e: i64) -> Result<Value> {
        Ok(match (self, e) {
            (_, 0) => Value::one(),
            (Value::Exact(a), _) => Value::Exact(a.pow(e)?),
            (Value::Numeric(z), _) => Value::Numeric(z.powi(e as i32)),
        })
    }

    /// Equality with an exact target, exactly or to [`NUMERIC_TAME_TOL`] relative.
    pub fn matches(&self, target: &ExactScalar, emb: Embedding) -> bool {
        match self {
            Value::Exact(v) => v == target,
            Value::Numeric(z) => {
                let t = cx(target, emb);
                (z - t).norm() <= NUMERIC_TAME_TOL * (1.0 + t.norm())
            }
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(v) => write!(f, "{v}"),
            Value::Numeric(z) => write!(f, "{:e}{:+e}i", z.re, z.im),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Value::Exact(v) => {
                let mut st = s.serialize_struct("Value", 2)?;
                st.serialize_field("kind", "exact")?;
                st.serialize_field("value", &v.to_string())?;
                st.end()
            }
            Value::Numeric(z) => {
                let mut st = s.serialize_struct("Value", 3)?;
                st.serialize_field("kind", "numeric")?;
                st.serialize_field("re", &z.re)?;
                st.serialize_field("im", &z.im)?;
                st.end()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum PlaceTag {
    O,
    OPrime,
    Infinity,
    InfinityPrime,
    Mu(usize),
    Alpha(usize),
}

impl fmt::Display for PlaceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PlaceTag::O => write!(f, "O"),
            PlaceTag::OPrime => write!(f, "O'"),
            PlaceTag::Infinity => write!(f, "inf"),
            PlaceTag::InfinityPrime => write!(f, "inf'"),
            PlaceTag::Mu(j) => write!(f, "P_mu{}", j + 1),
            PlaceTag::Alpha(i) => write!(f, "P_alpha{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlaceCoords {
    Affine {
        x: Value,
        y: Value,
    },
    /// `(x~, y~) = (0, sign * sqrt(y_tilde_squared))` on `y~^2 + lambda (x~ y~ - 1) prod (x~ + alpha_i) = 0`,
    /// where `x = 1/x~` and `y = (x~ y~ - 1) / x~^(g+2)`.
    AtInfinity {
        y_tilde_squared: ExactScalar,
        sign: i8,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct HyperPlace {
    pub tag: PlaceTag,
    pub coords: PlaceCoords,
}

/// The curve `y (y + A(x)) + x^(2g+4) = 0`, `A = 2 x^(g+2) + lambda prod (alpha_i x + 1)`.
#[derive(Debug, Clone)]
pub struct HyperModel {
    pub genus: usize,
    pub lambda: ExactScalar,
    pub alphas: Vec<ExactScalar>,
    pub a_poly: UPoly,
    /// `2 x^(g+2) + A(x) = lambda prod (mu_j x + 1)`.
    pub mus: Vec<C>,
    /// Largest coefficient error of the re-expanded product, relative to the largest coefficient.
    pub mu_residual: f64,
    pub embedding: Embedding,
}

impl HyperModel {
    pub fn new(lambda: ExactScalar, alphas: Vec<ExactScalar>) -> Result<Self> {
        let g = alphas.len();
        if g == 0 {
            return Err(Error::invalid("need at least one alpha (genus >= 1)"));
        }
        if lambda.is_zero() {
            return Err(Error::invalid("lambda must be nonzero"));
        }
        for i in 0..g {
            for k in 0..i {
                if alphas[i] == alphas[k] {
                    return Err(Error::invalid(format!(
                        "alpha_{} = alpha_{} = {}",
                        k + 1,
                        i + 1,
                        alphas[i]
                    )));
                }
            }
        }
        let emb = Embedding::Plus;
        let p = alpha_product(&alphas)?.scale(&lambda)?;
        let a_poly = p.add(&UPoly::monomial(ExactScalar::from_int(2), g + 2))?;
        let disc = p.add(&UPoly::monomial(ExactScalar::from_int(4), g + 2))?;
        let dc = CPoly::new(disc.to_complex(emb));
        let mut mus: Vec<C> = poly_roots(&dc)?.into_iter().map(|r| -1.0 / r).collect();
        mus.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        let mut expanded = CPoly::new(vec![cx(&lambda, emb)]);
        for m in &mus {
            expanded = expanded.mul(&CPoly::new(vec![C::new(1.0, 0.0), *m]));
        }
        let big = dc.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let mu_residual = (0..dc.coeffs.len().max(expanded.coeffs.len()))
            .map(|k| {
                let a = dc.coeffs.get(k).copied().unwrap_or_default();
                let b = expanded.coeffs.get(k).copied().unwrap_or_default();
                (a - b).norm()
            })
            .fold(0.0, f64::max)
            / big;
        if !(mu_residual < MU_RESIDUAL_TOL) {
            return Err(Error::numerical(format!(
                "mu re-expansion residual {mu_residual:e}"
            )));
        }
        let scale = 1.0 + mus.iter().map(|m| m.norm()).fold(0.0, f64::max);
        for j in 0..mus.len() {
            for k in 0..j {
                if (mus[j] - mus[k]).norm() <= 1e-8 * scale {
                    return Err(Error::invalid(format!(
                        "mu collision: mu_{} ~ mu_{} (genus drops)",
                        k + 1,
                        j + 1
                    )));
                }
            }
            for (i, a) in alphas.iter().enumerate() {
                if (mus[j] - cx(a, emb)).norm() <= 1e-8 * scale {
                    return Err(Error::invalid(format!(
                        "mu_{} ~ alpha_{}: the model is singular",
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(HyperModel {
            genus: g,
            lambda,
            alphas,
            a_poly,
            mus,
            mu_residual,
            embedding: emb,
        })
    }

    pub fn from_transform(t: &HyperTransform) -> Result<Self> {
        if t.case != HyperCase::ThreeGroups {
            return Err(Error::invalid(
                "the element suite lives on the (g, 1, 1) model",
            ));
        }
        Self::new(t.lambda.clone(), t.alphas.clone())
    }

    pub fn equation(&self) -> Result<BiPoly> {
        hyper_equation(self.genus + 2, &self.lambda, &self.alphas)
    }

    /// The model as a degree-2 fiber over the `x`-line.
    pub fn poly_model(&self) -> Result<PolyModel> {
        let n = 2 * self.genus + 4;
        let mut c0 = vec![C::new(0.0, 0.0); n + 1];
        c0[n] = C::new(1.0, 0.0);
        PolyModel::new(vec![
            CPoly::new(c0),
            CPoly::new(self.a_poly.to_complex(self.embedding)),
            CPoly::new(vec![C::new(1.0, 0.0)]),
        ])
    }

    fn zero_alpha(&self) -> Option<usize> {
        self.alphas.iter().position(|a| a.is_zero())
    }

    /// Branch points of the `x`-projection: `-1/alpha_i` (nonzero alpha) and `-1/mu_j`.
    pub fn branch_points(&self) -> Vec<(String, C)> {
        let mut out: Vec<(String, C)> = self
            .alphas
            .iter()
            .enumerate()
            .filter(|(_, a)| !a.is_zero())
            .map(|(i, a)| (format!("-1/alpha_{}", i + 1), -1.0 / cx(a, self.embedding)))
            .collect();
        out.extend(
            self.mus
                .iter()
                .enumerate()
                .map(|(j, m)| (format!("-1/mu_{}", j + 1), -1.0 / m)),
        );
        out
    }

    fn alpha_at(&self, i: usize, x: &Value) -> Result<Value> {
        let e = self.embedding;
        Ok(match x {
            Value::Exact(v) => Value::Exact(self.alphas[i].checked_mul(v)?.checked_add(&one())?),
            Value::Numeric(z) => Value::Numeric(cx(&self.alphas[i], e) * z + 1.0),
        })
    }

    fn mu_at(&self, j: usize, x: &Value) -> Value {
        Value::Numeric(self.mus[j] * x.approx(self.embedding) + 1.0)
    }

    /// The places where some function of the suite has a zero or pole.
    pub fn places(&self) -> Vec<HyperPlace> {
        let g = self.genus as i64;
        let zero = || Value::Exact(ExactScalar::zero());
        let mut out = vec![
            HyperPlace {
                tag: PlaceTag::O,
                coords: PlaceCoords::Affine {
                    x: zero(),
                    y: zero(),
                },
            },
            HyperPlace {
                tag: PlaceTag::OPrime,
                coords: PlaceCoords::Affine {
                    x: zero(),
                    y: Value::Exact(-&self.lambda),
                },
            },
        ];
        let ysq = self
            .alphas
            .iter()
            .fold(self.lambda.clone(), |acc, a| acc * a);
        out.push(HyperPlace {
            tag: PlaceTag::Infinity,
            coords: PlaceCoords::AtInfinity {
                y_tilde_squared: ysq.clone(),
                sign: 1,
            },
        });
        if self.zero_alpha().is_none() {
            out.push(HyperPlace {
                tag: PlaceTag::InfinityPrime,
                coords: PlaceCoords::AtInfinity {
                    y_tilde_squared: ysq,
                    sign: -1,
                },
            });
        }
        for (j, m) in self.mus.iter().enumerate() {
            let x = -1.0 / m;
            out.push(HyperPlace {
                tag: PlaceTag::Mu(j),
                coords: PlaceCoords::Affine {
                    x: Value::Numeric(x),
                    y: Value::Numeric(x.powi(g as i32 + 2)),
                },
            });
        }
        for (i, a) in self.alphas.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let x = (-a).inv().expect("nonzero");
            let y = -x.pow(g + 2).expect("nonzero");
            out.push(HyperPlace {
                tag: PlaceTag::Alpha(i),
                coords: PlaceCoords::Affine {
                    x: Value::Exact(x),
                    y: Value::Exact(y),
                },
            });
        }
        out
    }

    /// Order and leading coefficient of `f` at a place, for a fixed uniformizer per place:
    /// `x` at `O`, `O'`; `x~` at unramified infinity, `y~` at ramified infinity; `y + A(x)/2`
    /// at the branch points `P_mu`, `P_alpha`.
    pub fn local(&self, place: &HyperPlace, f: HFn) -> Result<(i64, Value)> {
        let emb = self.embedding;
        let g = self.genus as i64;
        let ex = |v: ExactScalar| Value::Exact(v);
        Ok(match place.tag {
            PlaceTag::O => match f {
                HFn::X => (1, Value::one()),
                HFn::Y => (2 * g + 4, ex(-self.lambda.inv()?)),
                _ => (0, Value::one()),
            },
            PlaceTag::OPrime => match f {
                HFn::X => (1, Value::one()),
                HFn::Y => (0, ex(-&self.lambda)),
                _ => (0, Value::one()),
            },
            PlaceTag::Infinity | PlaceTag::InfinityPrime => match self.zero_alpha() {
                None => match f {
                    HFn::X => (-1, Value::one()),
                    HFn::Y => (-(g + 2), ex(-one())),
                    HFn::Alpha(i) => (-1, ex(self.alphas[i].clone())),
                    HFn::Mu(j) => (-1, Value::Numeric(self.mus[j])),
                },
                Some(k) => {
                    // x~ = kappa y~^2 + ..., kappa = 1 / (lambda prod_{i != k} alpha_i)
                    let rest = self
                        .alphas
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != k)
                        .fold(self.lambda.clone(), |acc, (_, a)| acc * a);
                    match f {
                        HFn::X => (-2, ex(rest)),
                        HFn::Y => (-2 * (g + 2), ex(-rest.pow(g + 2)?)),
                        HFn::Alpha(i) if i == k => (0, Value::one()),
                        HFn::Alpha(i) => (-2, ex(self.alphas[i].checked_mul(&rest)?)),
                        HFn::Mu(j) => (-2, Value::Numeric(self.mus[j] * cx(&rest, emb))),
                    }
                }
            },
            PlaceTag::Mu(j) => {
                let PlaceCoords::Affine { x, y } = &place.coords else {
                    unreachable!()
                };
                match f {
                    HFn::X => (0, x.clone()),
                    HFn::Y => (0, y.clone()),
                    HFn::Alpha(i) => (0, self.alpha_at(i, x)?),
                    HFn::Mu(k) if k != j => (0, self.mu_at(k, x)),
                    HFn::Mu(_) => {
                        // w^2 = (lambda^2 / 4) P Q and lambda P(x_P) = -4 x_P^(g+2)
                        let xp = x.approx(emb);
                        let qj: C = (0..self.mus.len())
                            .filter(|&k| k != j)
                            .map(|k| self.mus[k] * xp + 1.0)
                            .product();
                        (
                            2,
                            Value::Numeric(
                                -1.0 / (cx(&self.lambda, emb) * xp.powi(g as i32 + 2) * qj),
                            ),
                        )
                    }
                }
            }
            PlaceTag::Alpha(i) => {
                let PlaceCoords::Affine { x, y } = &place.coords else {
                    unreachable!()
                };
                match f {
                    HFn::X => (0, x.clone()),
                    HFn::Y => (0, y.clone()),
                    HFn::Mu(k) => (0, self.mu_at(k, x)),
                    HFn::Alpha(k) if k != i => (0, self.alpha_at(k, x)?),
                    HFn::Alpha(_) => {
                        // lambda Q(x_P) = 4 x_P^(g+2)
                        let Value::Exact(xp) = x else { unreachable!() };
                        let mut pi = one();
                        for k in (0..self.alphas.len()).filter(|&k| k != i) {
                            pi = pi.checked_mul(
                                &self.alphas[k].checked_mul(xp)?.checked_add(&one())?,
                            )?;
                        }
                        (
                            2,
                            ex(self
                                .lambda
                                .checked_mul(&pi)?
                                .checked_mul(&xp.pow(g + 2)?)?
                                .inv()?),
                        )
                    }
                }
            }
        })
    }

    pub fn local_monomial(&self, place: &HyperPlace, m: &HMonomial) -> Result<(i64, Value)> {
        let mut ord = 0;
        let mut lc = Value::Exact(m.constant.clone());
        for (f, e) in &m.factors {
            let (o, c) = self.local(place, *f)?;
            ord += o * e;
            lc = lc.mul(&c.pow(*e)?, self.embedding)?;
        }
        Ok((ord, lc))
    }

    /// `(-1)^(ab) f^b / g^a` at the place, `a = ord f`, `b = ord g`, multiplied out over the terms.
    pub fn tame(&self, place: &HyperPlace, sym: &HSymbol) -> Result<Value> {
        let emb = self.embedding;
        let mut acc = Value::one();
        for (k, l, r) in &sym.terms {
            let (a, cl) = self.local_monomial(place, l)?;
            let (b, cr) = self.local_monomial(place, r)?;
            let sign = if (a * b) % 2 == 0 { one() } else { -one() };
            let v = Value::Exact(sign)
                .mul(&cl.pow(b)?, emb)?
                .mul(&cr.pow(-a)?, emb)?;
            acc = acc.mul(&v.pow(*k)?, emb)?;
        }
        Ok(acc)
    }

    /// Smallest `a <= 12` with `lambda^a = 1`.
    pub fn lambda_order(&self) -> Option<u32> {
        (1..=12u32).find(|&a| self.lambda.pow(a as i64).is_ok_and(|v| v.is_one()))
    }

    /// `M_i`, `M~_j`, `MM = {-y, -x}`, `MM' = {-x^(g+2)/y, -x^(g+2)/lambda}`.
    pub fn elements(&self) -> Prop53Elements {
        let e = self.genus + 2;
        let m = m_elements(e, &self.alphas);
        let mt = (0..self.mus.len())
            .map(|j| HyperElement {
                name: format!("M~_{}", j + 1),
                symbol: HSymbol::pair(HMonomial::ratio_f(e), HMonomial::factor(HFn::Mu(j))),
            })
            .collect();
        let mm = HyperElement {
            name: "MM".into(),
            symbol: HSymbol::pair(
                HMonomial {
                    constant: -one(),
                    factors: vec![(HFn::Y, 1)],
                },
                HMonomial {
                    constant: -one(),
                    factors: vec![(HFn::X, 1)],
                },
            ),
        };
        let mmp = HyperElement {
            name: "MM'".into(),
            symbol: HSymbol::pair(
                HMonomial::ratio_f(e),
                HMonomial {
                    constant: -self.lambda.inv().expect("nonzero"),
                    factors: vec![(HFn::X, e as i64)],
                },
            ),
        };
        Prop53Elements {
            m,
            m_tilde: mt,
            mm,
            mm_prime: mmp,
        }
    }

    /// Orders of the named functions at every place.
    pub fn divisor_table(&self) -> Result<Vec<DivisorRow>> {
        let e = self.genus + 2;
        let mut funcs: Vec<(String, HMonomial)> = vec![
            ("x".into(), HMonomial::factor(HFn::X)),
            ("y".into(), HMonomial::factor(HFn::Y)),
        ];
        for j in 0..self.mus.len() {
            funcs.push((format!("mu_{} x + 1", j + 1), HMonomial::factor(HFn::Mu(j))));
        }
        for i in 0..self.alphas.len() {
            funcs.push((
                format!("alpha_{} x + 1", i + 1),
                HMonomial::factor(HFn::Alpha(i)),
            ));
        }
        funcs.push((format!("-x^{e}/y"), HMonomial::ratio_f(e)));
        let places = self.places();
        funcs
            .into_iter()
            .map(|(name, m)| {
                let mut orders = Vec::new();
                for p in &places {
                    let (o, _) = self.local_monomial(p, &m)?;
                    if o != 0 {
                        orders.push((p.tag.to_string(), o));
                    }
                }
                let degree = orders.iter().map(|(_, o)| o).sum();
                Ok(DivisorRow {
                    function: name,
                    orders,
                    degree,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prop53Elements {
    pub m: Vec<HyperElement>,
    pub m_tilde: Vec<HyperElement>,
    pub mm: HyperElement,
    pub mm_prime: HyperElement,
}

impl Prop53Elements {
    pub fn all(&self) -> Vec<&HyperElement> {
        self.m
            .iter()
            .chain(&self.m_tilde)
            .chain([&self.mm, &self.mm_prime])
            .collect()
    }

    /// The combinations that must vanish: `2 sum M_i + 2 sum M~_j - 4 MM'`, `sum M_i - sum M~_j`,
    /// and `2a MM' + 2(g+2)a MM` when `lambda^a = 1`.
    pub fn relations(&self, genus: usize, lambda_order: Option<u32>) -> Vec<(String, HSymbol)> {
        let sm = HSymbol::sum(self.m.iter().map(|e| &e.symbol));
        let st = HSymbol::sum(self.m_tilde.iter().map(|e| &e.symbol));
        let mut out = vec![
            (
                "2 sum M_i + 2 sum M~_j - 4 MM'".to_string(),
                sm.scale(2)
                    .add(&st.scale(2))
                    .sub(&self.mm_prime.symbol.scale(4)),
            ),
            ("sum M_i - sum M~_j".to_string(), sm.sub(&st)),
        ];
        if let Some(a) = lambda_order {
            let a = a as i64;
            out.push((
                format!("{} MM' + {} MM", 2 * a, 2 * (genus as i64 + 2) * a),
                self.mm_prime
                    .symbol
                    .scale(2 * a)
                    .add(&self.mm.symbol.scale(2 * (genus as i64 + 2) * a)),
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivisorRow {
    pub function: String,
    pub orders: Vec<(String, i64)>,
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TameRow {
    pub place: String,
    pub element: String,
    pub value: Value,
    pub expected: String,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HyperLoopInfo {
    pub around: [String; 2],
    pub center: [f64; 2],
    pub semi_axes: [f64; 2],
    pub closure_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelationPairingRow {
    pub relation: String,
    pub loop_index: usize,
    pub pairing: f64,
    pub samples: usize,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop53Report {
    pub genus: usize,
    pub lambda: String,
    pub alphas: Vec<String>,
    pub mus: Vec<[f64; 2]>,
    pub mu_residual: f64,
    pub lambda_order: Option<u32>,
    /// `lambda` a unit and every `alpha_i` an algebraic integer.
    pub integrality_hypotheses: bool,
    pub divisors: Vec<DivisorRow>,
    pub tame: Vec<TameRow>,
    pub loops: Vec<HyperLoopInfo>,
    pub relations: Vec<RelationPairingRow>,
    pub passed: bool,
}

impl Prop53Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn tame_csv(&self) -> String {
        let mut s = String::from("place,element,kind,value,expected,ok\n");
        for r in &self.tame {
            let kind = if matches!(r.value, Value::Exact(_)) {
                "exact"
            } else {
                "numeric"
            };
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.place, r.element, kind, r.value, r.expected, r.ok
            ));
        }
        s
    }
}

/// Tame values of every element at every place against the expected table: 1 everywhere except
/// `T_O(MM) = 1/lambda` and `T_O'(MM) = lambda`.
pub fn tame_table(h: &HyperModel) -> Result<Vec<TameRow>> {
    let els = h.elements();
    let mut rows = Vec::new();
    for p in h.places() {
        for el in els.all() {
            let v = h.tame(&p, &el.symbol)?;
            let expected = match (el.name.as_str(), p.tag) {
                ("MM", PlaceTag::O) => h.lambda.inv()?,
                ("MM", PlaceTag::OPrime) => h.lambda.clone(),
                _ => one(),
            };
            rows.push(TameRow {
                place: p.tag.to_string(),
                element: el.name.clone(),
                ok: v.matches(&expected, h.embedding),
                value: v,
                expected: expected.to_string(),
            });
        }
    }
    Ok(rows)
}

fn num_form(h: &HyperModel, f: HFn) -> NumForm {
    let z = C::new(0.0, 0.0);
    let o = C::new(1.0, 0.0);
    match f {
        HFn::X => NumForm::x(),
        HFn::Y => NumForm::y(),
        HFn::Alpha(i) => NumForm {
            label: f.to_string(),
            ..NumForm::affine(cx(&h.alphas[i], h.embedding), z, o)
        },
        HFn::Mu(j) => NumForm {
            label: f.to_string(),
            ..NumForm::affine(h.mus[j], z, o)
        },
    }
}

/// The symbol with entries evaluable on [`HyperModel::poly_model`].
pub fn num_symbol(h: &HyperModel, sym: &HSymbol) -> NumSymbol {
    let mut out = NumSymbol::default();
    for (k, l, r) in &sym.terms {
        let conv = |out: &mut NumSymbol, m: &HMonomial| {
            let fs: Vec<(NumForm, i64)> = m
                .factors
                .iter()
                .map(|(f, e)| (num_form(h, *f), *e))
                .collect();
            out.monomial(cx(&m.constant, h.embedding), &fs)
        };
        let a = conv(&mut out, l);
        let b = conv(&mut out, r);
        out.push(a, b, *k);
    }
    out
}

/// Ellipses with foci at two branch points, enclosing no other branch point and not `x = 0`,
/// best separated first.
pub fn hyper_loops(h: &HyperModel, count: usize) -> Vec<(Circle, [String; 2])> {
    let bp = h.branch_points();
    let mut cands = Vec::new();
    for i in 0..bp.len() {
        for j in i + 1..bp.len() {
            let (p, q) = (bp[i].1, bp[j].1);
            let half = (q - p).norm() / 2.0;
            let excess = |o: C| ((o - p).norm() + (o - q).norm()) / 2.0 - half;
            let clear = bp
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i && *k != j)
                .map(|(_, b)| excess(b.1))
                .fold(excess(C::new(0.0, 0.0)), f64::min);
            cands.push((clear / half, i, j, clear));
        }
    }
    cands.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
    cands
        .into_iter()
        .filter(|c| c.0 > 1e-3)
        .take(count)
        .map(|(_, i, j, clear)| {
            let (p, q) = (bp[i].1, bp[j].1);
            let half = (q - p).norm() / 2.0;
            let r = half + clear / 2.5;
            let minor = (r * r - half * half).sqrt();
            let circle = Circle {
                center: (p + q) / 2.0,
                radius: r,
                orientation: 1,
                axis: (q - p) / (2.0 * half),
                stretch: minor / r,
            };
            (circle, [bp[i].0.clone(), bp[j].0.clone()])
        })
        .collect()
}

/// Lifts a loop from the sheet whose start root has the smaller real part.
pub fn lift_hyper_loop(model: &PolyModel, circle: Circle, tol: &Tolerances) -> Result<LiftedLoop> {
    let u0 = circle.at(0.0).0;
    let mut roots = model.roots(u0, None)?;
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    let lp = LiftedLoop::lift(model, circle, roots[0], 64, tol)?;
    if !lp.is_closed(tol) {
        return Err(Error::numerical(format!(
            "hyperelliptic loop does not close (residual {:e})",
            lp.closure_residual
        )));
    }
    Ok(lp)
}

/// Exact and numeric checks of the element suite on `h`, with relations paired on `n_loops` loops.
pub fn verify_prop53(h: &HyperModel, n_loops: usize, tol: &Tolerances) -> Result<Prop53Report> {
    let tame = tame_table(h)?;
    let divisors = h.divisor_table()?;
    let lambda_order = h.lambda_order();
    let rels = h.elements().relations(h.genus, lambda_order);
    let model = h.poly_model()?;
    let loops = hyper_loops(h, n_loops);
    if loops.len() < n_loops {
        return Err(Error::numerical(format!(
            "only {} separable pairs of branch points",
            loops.len()
        )));
    }
    let lifted = loops
        .par_iter()
        .map(|(c, _)| lift_hyper_loop(&model, *c, tol))
        .collect::<Result<Vec<_>>>()?;
    let jobs: Vec<(usize, usize)> = (0..rels.len())
        .flat_map(|r| (0..lifted.len()).map(move |l| (r, l)))
        .collect();
    let relations = jobs
        .par_iter()
        .map(|&(r, l)| {
            let sym = num_symbol(h, &rels[r].1);
            let v = integrate_symbol(&model, &lifted[l], &sym, tol)?;
            let pairing = v.value / (2.0 * PI);
            Ok(RelationPairingRow {
                relation: rels[r].0.clone(),
                loop_index: l,
                pairing,
                samples: v.samples,
                ok: pairing.abs() < 10.0 * tol.quad,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let loops = loops
        .iter()
        .zip(&lifted)
        .map(|((c, names), lp)| HyperLoopInfo {
            around: names.clone(),
            center: [c.center.re, c.center.im],
            semi_axes: [c.radius, c.radius * c.stretch],
            closure_residual: lp.closure_residual,
        })
        .collect();
    let integrality_hypotheses = h.lambda.is_algebraic_integer()
        && h.lambda.inv()?.is_algebraic_integer()
        && h.alphas.iter().all(|a| a.is_algebraic_integer());
    let passed = tame.iter().all(|r| r.ok)
        && divisors.iter().all(|d| d.degree == 0)
        && relations.iter().all(|r| r.ok)
        && h.mu_residual < MU_RESIDUAL_TOL;
    Ok(Prop53Report {
        genus: h.genus,
        lambda: h.lambda.to_string(),
        alphas: h.alphas.iter().map(|a| a.to_string()).collect(),
        mus: h.mus.iter().map(|m| [m.re, m.im]).collect(),
        mu_residual: h.mu_residual,
        lambda_order,
        integrality_hypotheses,
        divisors,
        tame,
        loops,
        relations,
        passed,
    })
}
