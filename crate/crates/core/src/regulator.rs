//! Regulator matrices over the loops `gamma_s`, limit sweeps, and the quadratic-field families.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64 as C;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{Embedding, ExactScalar};
use crate::config::{LineConfiguration, LineGroup, Parameter};
use crate::error::{Error, Result};
use crate::numerics::eta::integrate_symbol;
use crate::numerics::{
    build_gamma_loop, Circle, EmbeddedConfig, FiberModel, GammaOptions, LiftedLoop, NumForm,
    NumSymbol, PolyModel, Tolerances, UPath,
};
use crate::symbols::{
    admissible_assignments, m_for_point, relation_sides, relation_templates, K2Symbol, Monomial,
    NamedElement, RelationId,
};

#[derive(Debug, Clone, Serialize)]
pub struct LoopInfo {
    pub point: String,
    pub center: f64,
    pub radius: f64,
    pub closure_residual: f64,
    pub on_surface_residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EntryInfo {
    pub row: usize,
    pub col: usize,
    pub samples: usize,
    pub refinements: usize,
    pub last_change: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegulatorReport {
    pub t: f64,
    pub loops: Vec<LoopInfo>,
    pub elements: Vec<String>,
    /// `matrix[s][j] = <gamma_s, element_j>`.
    pub matrix: Vec<Vec<f64>>,
    pub abs_det: f64,
    /// Sign of the determinant.
    pub sign: i32,
    pub normalized: f64,
    /// `matrix[s][j] / log|t|`.
    pub normalized_entries: Vec<Vec<f64>>,
    pub entries: Vec<EntryInfo>,
}

impl RegulatorReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Largest `|normalized entry|` off the diagonal.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut m: f64 = 0.0;
        for (i, row) in self.normalized_entries.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if i != j {
                    m = m.max(v.abs());
                }
            }
        }
        m
    }
}

/// Determinant by Gaussian elimination with partial pivoting; `1` for the empty matrix.
pub fn determinant(m: &[Vec<f64>]) -> Result<f64> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::invalid("determinant of a non-square matrix"));
    }
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let mut det = 1.0;
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs()))
            .expect("nonempty range");
        if a[p][k] == 0.0 {
            return Ok(0.0);
        }
        if p != k {
            a.swap(p, k);
            det = -det;
        }
        det *= a[k][k];
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
        }
    }
    Ok(det)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegulatorOptions {
    pub tol: Tolerances,
    pub gamma: GammaOptions,
}

/// Pairing matrix of prebuilt loops against numeric symbols on one model.
pub fn pairing_matrix<M: FiberModel + ?Sized>(
    model: &M,
    loops: &[LiftedLoop],
    symbols: &[NumSymbol],
    tol: &Tolerances,
) -> Result<(Vec<Vec<f64>>, Vec<EntryInfo>)> {
    let cells: Vec<(usize, usize)> = (0..loops.len())
        .flat_map(|i| (0..symbols.len()).map(move |j| (i, j)))
        .collect();
    let vals: Vec<(f64, EntryInfo)> = cells
        .par_iter()
        .map(|&(i, j)| {
            let r = integrate_symbol(model, &loops[i], &symbols[j], tol)
                .map_err(|e| Error::numerical(format!("entry ({i}, {j}): {e}")))?;
            Ok((
                r.value / (2.0 * PI),
                EntryInfo {
                    row: i,
                    col: j,
                    samples: r.samples,
                    refinements: r.refinements,
                    last_change: r.last_change,
                },
            ))
        })
        .collect::<Result<_>>()?;
    let mut matrix = vec![vec![0.0; symbols.len()]; loops.len()];
    let mut entries = Vec::new();
    for (v, info) in vals {
        matrix[info.row][info.col] = v;
        entries.push(info);
    }
    Ok((matrix, entries))
}

fn finish(
    t: C,
    loops: Vec<LoopInfo>,
    elements: Vec<String>,
    matrix: Vec<Vec<f64>>,
    entries: Vec<EntryInfo>,
) -> Result<RegulatorReport> {
    let det = if matrix.is_empty() && elements.is_empty() {
        1.0
    } else {
        determinant(&matrix)?
    };
    let lt = t.norm().ln();
    let g = loops.len() as i32;
    let normalized = det.abs() / lt.abs().powi(g);
    if !normalized.is_finite() {
        return Err(Error::numerical("normalized regulator is not finite"));
    }
    let normalized_entries = matrix
        .iter()
        .map(|r| r.iter().map(|v| v / lt).collect())
        .collect();
    Ok(RegulatorReport {
        t: t.re,
        loops,
        elements,
        matrix,
        abs_det: det.abs(),
        sign: if det > 0.0 {
            1
        } else if det < 0.0 {
            -1
        } else {
            0
        },
        normalized,
        normalized_entries,
        entries,
    })
}

/// Entry `(s, j) = <gamma_{s,t}, element_j>` for every `s` in S.
pub fn regulator_matrix(
    emb: &EmbeddedConfig,
    elements: &[NamedElement],
    opts: &RegulatorOptions,
) -> Result<RegulatorReport> {
    let points = emb.config.special_set_s()?;
    let loops: Vec<LiftedLoop> = points
        .par_iter()
        .map(|s| {
            build_gamma_loop(emb, s, &opts.gamma, &opts.tol)
                .map_err(|e| Error::numerical(format!("loop {s}: {e}")))
        })
        .collect::<Result<_>>()?;
    let symbols = elements
        .iter()
        .map(|e| NumSymbol::from_exact(&emb.config, emb.embedding, &e.symbol))
        .collect::<Result<Vec<_>>>()?;
    let (matrix, entries) = if elements.is_empty() {
        (Vec::new(), Vec::new())
    } else {
        pairing_matrix(emb, &loops, &symbols, &opts.tol)?
    };
    let info = points
        .iter()
        .zip(&loops)
        .map(|(s, l)| LoopInfo {
            point: s.to_string(),
            center: l.circle.center.re,
            radius: l.circle.radius,
            closure_residual: l.closure_residual,
            on_surface_residual: l.on_surface_residual,
        })
        .collect();
    let labels = elements.iter().map(|e| e.label.clone()).collect();
    if elements.is_empty() {
        return finish(emb.t, Vec::new(), labels, matrix, entries);
    }
    finish(emb.t, info, labels, matrix, entries)
}

/// The elements `M_s` for `s` in S, in the order of S.
pub fn theorem_elements(cfg: &LineConfiguration) -> Result<Vec<NamedElement>> {
    cfg.special_set_s()?
        .iter()
        .map(|s| m_for_point(cfg, s))
        .collect()
}

/// Regulator of the `M_s` at each `t` of a strictly decreasing schedule of `|t|`.
pub fn limit_sweep(
    cfg: &LineConfiguration,
    seed: u64,
    schedule: &[f64],
    opts: &RegulatorOptions,
) -> Result<Vec<RegulatorReport>> {
    if schedule.is_empty() {
        return Err(Error::invalid("empty t schedule"));
    }
    if schedule.windows(2).any(|w| !(w[1].abs() < w[0].abs())) {
        return Err(Error::invalid(
            "the t schedule must be strictly decreasing in |t|",
        ));
    }
    let elements = theorem_elements(cfg)?;
    let base = EmbeddedConfig::from_config(cfg, Embedding::Plus, seed)?;
    schedule
        .iter()
        .map(|&t| regulator_matrix(&base.with_t(C::new(t, 0.0))?, &elements, opts))
        .collect()
}

/// `<gamma_s, LHS - RHS>` for one instantiated relation and one loop.
#[derive(Debug, Clone, Serialize)]
pub struct RelationPairing {
    pub relation: String,
    pub assignment: String,
    pub point: String,
    pub value: f64,
}

/// Pairs every admissible instance of every relation with every loop `gamma_s`, `s` in S.
/// Each value is the numerical shadow of an exact identity and should vanish.
pub fn relation_pairings(
    emb: &EmbeddedConfig,
    opts: &RegulatorOptions,
) -> Result<Vec<RelationPairing>> {
    let points = emb.config.special_set_s()?;
    let loops: Vec<LiftedLoop> = points
        .iter()
        .map(|s| build_gamma_loop(emb, s, &opts.gamma, &opts.tol))
        .collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for id in RelationId::ALL {
        for t in relation_templates(id) {
            for asg in admissible_assignments(&emb.config, &t) {
                let (lhs, rhs) = relation_sides(&emb.config, &t, &asg)?;
                let name = if relation_templates(id).len() > 1 {
                    format!("{}.{}", t.id, t.part)
                } else {
                    t.id.to_string()
                };
                let label = asg
                    .iter()
                    .map(|(k, v)| format!("{k}={}", v + 1))
                    .collect::<Vec<_>>()
                    .join(",");
                jobs.push((
                    name,
                    label,
                    NumSymbol::from_exact(&emb.config, emb.embedding, &lhs.sub(&rhs))?,
                ));
            }
        }
    }
    jobs.par_iter()
        .flat_map_iter(|(name, label, sym)| {
            points.iter().zip(&loops).map(move |(s, lp)| {
                let v = integrate_symbol(emb, lp, sym, &opts.tol)?.value / (2.0 * PI);
                Ok(RelationPairing {
                    relation: name.clone(),
                    assignment: label.clone(),
                    point: s.to_string(),
                    value: v,
                })
            })
        })
        .collect()
}

/// `t, normalized, abs_det, m_s_j...`
pub fn sweep_csv(reports: &[RegulatorReport]) -> String {
    let mut out = String::from("t,normalized,abs_det");
    if let Some(r) = reports.first() {
        for i in 0..r.matrix.len() {
            for j in 0..r.elements.len() {
                let _ = write!(out, ",m_{}_{}", i + 1, j + 1);
            }
        }
    }
    out.push('\n');
    for r in reports {
        let _ = write!(out, "{:e},{},{:e}", r.t, r.normalized, r.abs_det);
        for row in &r.matrix {
            for v in row {
                let _ = write!(out, ",{v:e}");
            }
        }
        out.push('\n');
    }
    out
}

/// `x y h(x) = t` near the origin with `h(x) = h0 + h1 x`; `u` and `v` are affine units.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalModelSpec {
    pub a: i64,
    pub b: i64,
    pub u: NumForm,
    pub v: NumForm,
    pub h0: C,
    pub h1: C,
    pub radius: f64,
}

impl LocalModelSpec {
    pub fn monomial(a: i64, b: i64) -> Self {
        let one = NumForm::affine(C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(1.0, 0.0));
        LocalModelSpec {
            a,
            b,
            u: one.clone(),
            v: one,
            h0: C::new(1.0, 0.0),
            h1: C::new(0.0, 0.0),
            radius: 0.5,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LocalSweepReport {
    pub a: i64,
    pub b: i64,
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub slope: f64,
    pub expected_slope: f64,
    /// `F(t) - 2 pi a b log|t|` at each `t`.
    pub remainders: Vec<f64>,
}

/// `F(t) = int eta(u x^a, v y^b)` on the clockwise loop `|x| = r`, and the least-squares slope of
/// `F` against `log|t|`.
pub fn local_model_sweep(
    spec: &LocalModelSpec,
    schedule: &[f64],
    tol: &Tolerances,
) -> Result<LocalSweepReport> {
    if spec.h0.norm() == 0.0 {
        return Err(Error::invalid("h must not vanish at the origin"));
    }
    for (name, f) in [("u", &spec.u), ("v", &spec.v)] {
        if f.c.norm() == 0.0 {
            return Err(Error::invalid(format!(
                "{name} must not vanish at the origin"
            )));
        }
    }
    if schedule.len() < 2 {
        return Err(Error::invalid(
            "the slope fit needs at least two values of t",
        ));
    }
    let values = schedule
        .iter()
        .map(|&t| {
            let model = PolyModel::local(C::new(t, 0.0), spec.h0, spec.h1)?;
            let circle = Circle::new(C::new(0.0, 0.0), spec.radius, 1);
            let y0 = model.roots(circle.at(0.0).0, None)?[0];
            let lp = LiftedLoop::lift(&model, circle, y0, 32, tol)?;
            let mut sym = NumSymbol::default();
            let one = C::new(1.0, 0.0);
            let l = sym.monomial(one, &[(spec.u.clone(), 1), (NumForm::x(), spec.a)]);
            let r = sym.monomial(one, &[(spec.v.clone(), 1), (NumForm::y(), spec.b)]);
            sym.push(l, r, 1);
            Ok(integrate_symbol(&model, &lp, &sym, tol)?.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    let xs: Vec<f64> = schedule.iter().map(|t| t.abs().ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = values.iter().sum::<f64>() / n;
    let sxy: f64 = xs
        .iter()
        .zip(&values)
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let expected_slope = 2.0 * PI * (spec.a * spec.b) as f64;
    let remainders = xs
        .iter()
        .zip(&values)
        .map(|(x, y)| y - expected_slope * x)
        .collect();
    Ok(LocalSweepReport {
        a: spec.a,
        b: spec.b,
        t: schedule.to_vec(),
        values,
        slope: sxy / sxx,
        expected_slope,
        remainders,
    })
}

/// The two families of elliptic curves over real quadratic fields.
#[derive(Debug, Clone, PartialEq)]
pub enum QuadraticVariant {
    /// Integer `a` with `|a| > 5`, over `Q(sqrt(a^2 - 16))`.
    Part1 { a: i64 },
    /// Unit `v != +-1`, `p q = 4`, exponent `n`.
    Part2 {
        v: ExactScalar,
        p: ExactScalar,
        q: ExactScalar,
        n: i64,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct QuadraticReport {
    pub a: String,
    pub eps: [String; 2],
    /// `matrix[embedding][l]`.
    pub matrix: Vec<Vec<f64>>,
    pub r: f64,
    pub normalized: f64,
    /// The value `normalized` tends to.
    pub limit: f64,
    pub loops: Vec<LoopInfo>,
}

/// `(a, eps1, eps2, normalizer, limit)` after checking the side conditions.
fn quadratic_data(
    variant: &QuadraticVariant,
) -> Result<(ExactScalar, ExactScalar, ExactScalar, f64, f64)> {
    match variant {
        QuadraticVariant::Part1 { a } => {
            if a.abs() <= 5 {
                return Err(Error::invalid("part 1 needs |a| > 5"));
            }
            let aa = ExactScalar::from_int(*a);
            let root = ExactScalar::sqrt_of(a * a - 16)?;
            let half = ExactScalar::from_ratio(1, 2);
            let e1 = aa.checked_add(&root)?.checked_mul(&half)?;
            let e2 = aa.checked_sub(&root)?.checked_mul(&half)?;
            let la = (*a as f64).abs().ln();
            Ok((aa, e1, e2, la * la, 16.0))
        }
        QuadraticVariant::Part2 { v, p, q, n } => {
            let one = ExactScalar::one();
            if *v == one || *v == -one.clone() {
                return Err(Error::invalid("v must not be +-1"));
            }
            if v.is_zero() || !v.is_algebraic_integer() || !v.inv()?.is_algebraic_integer() {
                return Err(Error::invalid(format!(
                    "{v} is not a unit of the ring of integers"
                )));
            }
            if !p.is_algebraic_integer() || !q.is_algebraic_integer() {
                return Err(Error::invalid("p and q must be algebraic integers"));
            }
            if p.checked_mul(q)? != ExactScalar::from_int(4) {
                return Err(Error::invalid("p q must equal 4"));
            }
            if *n == 0 {
                return Err(Error::invalid("n must be nonzero"));
            }
            let e1 = p.checked_mul(&v.pow(*n)?)?;
            let e2 = q.checked_mul(&v.pow(-*n)?)?;
            let two = ExactScalar::from_int(2);
            if e1 == two || e1 == -two.clone() {
                return Err(Error::invalid("p v^n must not be +-2"));
            }
            let a = e1.checked_add(&e2)?;
            if a.is_zero() {
                return Err(Error::invalid("a = p v^n + q v^-n vanishes"));
            }
            let lv = v.to_f64(Embedding::Plus).abs().ln();
            Ok((a, e1, e2, (*n as f64) * (*n as f64), 16.0 * lv * lv))
        }
    }
}

/// Regulator of `2{y/(y+1), (x + eps_l/a)/x}` on `x(x+1)y(y+1) = 1/a^2`, one row per real
/// embedding of the field, using the single loop around `x = y = -1`.
pub fn quadratic_field_regulator(
    variant: &QuadraticVariant,
    tol: &Tolerances,
) -> Result<QuadraticReport> {
    let (a, e1, e2, normalizer, limit) = quadratic_data(variant)?;
    if e1.checked_mul(&e2)? != ExactScalar::from_int(4) || e1.checked_add(&e2)? != a {
        return Err(Error::numerical(
            "eps1 eps2 = 4 and eps1 + eps2 = a must hold",
        ));
    }
    let d = [&a, &e1, &e2]
        .iter()
        .find_map(|s| s.discriminant().cloned());
    let z = ExactScalar::zero();
    let one = ExactScalar::one();
    let t = a.pow(-2)?;
    let cfg = LineConfiguration::new(
        d,
        vec![
            LineGroup {
                a: one.clone(),
                b: z.clone(),
                offsets: vec![z.clone(), one.clone()],
            },
            LineGroup {
                a: z.clone(),
                b: one.clone(),
                offsets: vec![z.clone(), one.clone()],
            },
        ],
        Parameter::T(t),
    )?;
    let ids = cfg.line_ids();
    let (x, x1, y, y1) = (ids[0], ids[1], ids[2], ids[3]);
    let elements = [&e1, &e2]
        .iter()
        .map(|e| {
            let shifted = Monomial::affine(&cfg, &one, &z, &e.checked_div(&a)?)?;
            let left = Monomial::line_ratio(y, y1);
            let right = shifted.div(&Monomial::line(x))?;
            Ok(K2Symbol::term(left, right, 2))
        })
        .collect::<Result<Vec<_>>>()?;
    let s = cfg
        .special_set_s()?
        .into_iter()
        .find(|p| p.first == x1 && p.second == y1)
        .ok_or_else(|| Error::numerical("missing the node x = y = -1"))?;
    let embeddings: Vec<Embedding> = if cfg.field_d().is_some() {
        vec![Embedding::Plus, Embedding::Minus]
    } else {
        vec![Embedding::Plus]
    };
    let theta = cfg.choose_projection(0)?.theta;
    let mut matrix = Vec::new();
    let mut loops = Vec::new();
    for emb in embeddings {
        let tc = C::new(cfg.t().to_f64(emb), 0.0);
        let ec = EmbeddedConfig::new(&cfg, emb, &theta, tc)?;
        let lp = build_gamma_loop(&ec, &s, &GammaOptions::default(), tol)?;
        let syms = elements
            .iter()
            .map(|e| NumSymbol::from_exact(&cfg, emb, e))
            .collect::<Result<Vec<_>>>()?;
        let (m, _) = pairing_matrix(&ec, std::slice::from_ref(&lp), &syms, tol)?;
        matrix.push(m.into_iter().next().unwrap_or_default());
        loops.push(LoopInfo {
            point: s.to_string(),
            center: lp.circle.center.re,
            radius: lp.circle.radius,
            closure_residual: lp.closure_residual,
            on_surface_residual: lp.on_surface_residual,
        });
    }
    if matrix.len() != 2 {
        return Err(Error::invalid("the family needs a real quadratic field"));
    }
    let r = determinant(&matrix)?.abs();
    Ok(QuadraticReport {
        a: a.to_string(),
        eps: [e1.to_string(), e2.to_string()],
        matrix,
        r,
        normalized: r / normalizer,
        limit,
        loops,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::fixtures::*;

    #[test]
    fn determinant_matches_cofactor_expansion() {
        let m = vec![
            vec![2.0, -1.0, 0.5],
            vec![1.0, 3.0, -2.0],
            vec![0.0, 4.0, 1.0],
        ];
        let cof = 2.0 * (3.0 * 1.0 + 2.0 * 4.0)
            + 1.0 * (1.0 * 1.0 + 2.0 * 0.0)
            + 0.5 * (1.0 * 4.0 - 3.0 * 0.0);
        assert!((determinant(&m).unwrap() - cof).abs() < 1e-12);
        assert_eq!(determinant(&[]).unwrap(), 1.0);
    }

    #[test]
    fn empty_element_list() {
        let emb = EmbeddedConfig::from_config(&cfg_a(), Embedding::Plus, 0).unwrap();
        let r = regulator_matrix(&emb, &[], &RegulatorOptions::default()).unwrap();
        assert_eq!(r.abs_det, 1.0);
        assert!(r.matrix.is_empty());
    }

    #[test]
    fn schedule_must_decrease() {
        assert!(limit_sweep(&cfg_a(), 0, &[1e-4, 1e-3], &RegulatorOptions::default()).is_err());
    }

    #[test]
    fn local_sweep_slopes() {
        let tol = Tolerances::default();
        let r = local_model_sweep(&LocalModelSpec::monomial(1, 1), &[1e-2, 1e-4], &tol).unwrap();
        assert!((r.slope - 2.0 * PI).abs() < 1e-6);
        assert!(r.remainders.iter().all(|v| v.abs() < 1e-6));
        let z =
            local_model_sweep(&LocalModelSpec::monomial(0, 1), &[1e-2, 1e-4, 1e-6], &tol).unwrap();
        assert!(z.slope.abs() < 1e-6);
    }

    #[test]
    fn quadratic_side_conditions() {
        let tol = Tolerances::default();
        assert!(quadratic_field_regulator(&QuadraticVariant::Part1 { a: 5 }, &tol).is_err());
        let one = ExactScalar::one();
        let four = ExactScalar::from_int(4);
        let v1 = QuadraticVariant::Part2 {
            v: one.clone(),
            p: one,
            q: four,
            n: 3,
        };
        assert!(quadratic_field_regulator(&v1, &tol).is_err());
    }
}
