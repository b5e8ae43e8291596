//! Numerical smoothness test: compares `lambda * F` with 1 at the critical points of `F = prod L`.

use num_complex::Complex64 as C;
use serde::Serialize;

use super::LineConfiguration;
use crate::arith::linalg::exact_det;
use crate::arith::{BiPoly, Embedding, ExactScalar, UPoly};
use crate::error::{Error, Result};
use crate::numerics::roots::{poly_roots, CPoly};

pub const DEFAULT_SMOOTHNESS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothnessVerdict {
    Smooth,
    Singular,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriticalPoint {
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// `prod L` at the point.
    pub value: [f64; 2],
    /// `|lambda * prod L - 1|`
    pub margin: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SmoothnessReport {
    pub verdict: SmoothnessVerdict,
    pub tol: f64,
    pub critical_points: Vec<CriticalPoint>,
    pub detail: String,
}

/// `F(u, y)` in sheared coordinates.
fn sheared_product(cfg: &LineConfiguration, theta: &ExactScalar) -> Result<BiPoly> {
    let mut f = BiPoly::constant(ExactScalar::one());
    for id in cfg.line_ids() {
        let (a, _, c) = cfg.line(id);
        let q = cfg.sheared_q(id.group, theta);
        f = f.mul(&BiPoly::affine(a, &q, c))?;
    }
    Ok(f)
}

fn partial_u(f: &BiPoly) -> Result<BiPoly> {
    let mut out = BiPoly::zero();
    for (&(i, j), c) in f.terms() {
        if i != 0 {
            out.add_term(c.checked_mul(&ExactScalar::from_int(i))?, i - 1, j)?;
        }
    }
    Ok(out)
}

fn partial_y(f: &BiPoly) -> Result<BiPoly> {
    let mut out = BiPoly::zero();
    for (&(i, j), c) in f.terms() {
        if j != 0 {
            out.add_term(c.checked_mul(&ExactScalar::from_int(j))?, i, j - 1)?;
        }
    }
    Ok(out)
}

/// Restriction `y -> p(u0, y)` as a univariate polynomial in `y`.
fn slice_at_u(f: &BiPoly, u0: &ExactScalar) -> Result<UPoly> {
    let hi = f.y_range().map(|r| r.1).unwrap_or(0).max(0) as usize;
    let mut v = vec![ExactScalar::zero(); hi + 1];
    for (&(i, j), c) in f.terms() {
        v[j as usize] = v[j as usize].checked_add(&c.checked_mul(&u0.pow(i)?)?)?;
    }
    Ok(UPoly::new(v))
}

/// Sylvester determinant of two polynomials with formal degrees `m`, `n`.
fn sylvester(p: &UPoly, m: usize, q: &UPoly, n: usize) -> Result<ExactScalar> {
    let size = m + n;
    if size == 0 {
        return Ok(ExactScalar::one());
    }
    let mut rows = Vec::with_capacity(size);
    for r in 0..n {
        let mut row = vec![ExactScalar::zero(); size];
        for k in 0..=m {
            row[r + k] = p.coeff(m - k);
        }
        rows.push(row);
    }
    for r in 0..m {
        let mut row = vec![ExactScalar::zero(); size];
        for k in 0..=n {
            row[r + k] = q.coeff(n - k);
        }
        rows.push(row);
    }
    exact_det(rows)
}

fn eval_c(f: &BiPoly, emb: Embedding, u: C, y: C) -> C {
    f.eval_complex(emb, u, y)
}

impl LineConfiguration {
    /// Locates the common zeros of `F_x` and `F_y` and compares `lambda*F` with 1 there.
    pub fn smoothness_check(&self, tol: f64) -> Result<SmoothnessReport> {
        self.smoothness_check_at(Embedding::Plus, tol)
    }

    pub fn smoothness_check_at(&self, emb: Embedding, tol: f64) -> Result<SmoothnessReport> {
        if !(tol > 0.0) {
            return Err(Error::invalid("smoothness tolerance must be positive"));
        }
        let theta = self.choose_projection(0)?.theta;
        let f = sheared_product(self, &theta)?;
        let fu = partial_u(&f)?;
        let fy = partial_y(&f)?;
        let d = self.degree();
        let m = d - 1;
        // Res_y(F_u, F_y)(u) has degree at most (d-1)^2.
        let npts = m * m + 1;
        let mut xs = Vec::with_capacity(npts);
        let mut ys = Vec::with_capacity(npts);
        for k in 0..npts {
            let u0 = ExactScalar::from_int(k as i64);
            let pu = slice_at_u(&fu, &u0)?;
            let py = slice_at_u(&fy, &u0)?;
            ys.push(sylvester(&pu, m, &py, m)?);
            xs.push(u0);
        }
        let res = UPoly::interpolate(&xs, &ys)?;
        let lambda = self.lambda().to_f64(emb);
        let inconclusive = |detail: String| SmoothnessReport {
            verdict: SmoothnessVerdict::Inconclusive,
            tol,
            critical_points: vec![],
            detail,
        };
        if res.is_zero() {
            return Ok(inconclusive("resultant vanishes identically".into()));
        }
        let rc = CPoly::new(res.to_complex(emb));
        let u_roots = match poly_roots(&rc) {
            Ok(r) => r,
            Err(e) => return Ok(inconclusive(format!("resultant roots: {e}"))),
        };
        let scale = f
            .terms()
            .map(|(_, c)| c.to_f64(emb).abs())
            .fold(0.0, f64::max)
            .max(1.0);
        let mut found: Vec<(C, C)> = Vec::new();
        for u in u_roots {
            let slice: Vec<C> = {
                let mut v = vec![C::new(0.0, 0.0); m + 1];
                for (&(i, j), c) in fy.terms() {
                    v[j as usize] += C::new(c.to_f64(emb), 0.0) * u.powi(i as i32);
                }
                v
            };
            let y_roots = match poly_roots(&CPoly::new(slice)) {
                Ok(r) => r,
                Err(_) => continue,
            };
            for y in y_roots {
                if let Some(p) = polish_critical(&fu, &fy, emb, u, y, scale) {
                    let dup = found.iter().any(|q| {
                        (q.0 - p.0).norm() + (q.1 - p.1).norm() < 1e-7 * (1.0 + p.0.norm())
                    });
                    if !dup {
                        found.push(p);
                    }
                }
            }
        }
        let mut pts = Vec::new();
        let mut min_margin = f64::INFINITY;
        for (u, y) in found {
            let val = eval_c(&f, emb, u, y);
            let margin = (val * lambda - 1.0).norm();
            min_margin = min_margin.min(margin);
            let x = u - y * theta.to_f64(emb);
            pts.push(CriticalPoint {
                x: [x.re, x.im],
                y: [y.re, y.im],
                value: [val.re, val.im],
                margin,
            });
        }
        let verdict = if min_margin < tol {
            SmoothnessVerdict::Singular
        } else if min_margin > 10.0 * tol {
            SmoothnessVerdict::Smooth
        } else {
            SmoothnessVerdict::Inconclusive
        };
        Ok(SmoothnessReport {
            verdict,
            tol,
            detail: format!(
                "{} critical points, minimal |lambda*F - 1| = {min_margin:.3e}",
                pts.len()
            ),
            critical_points: pts,
        })
    }
}

/// Newton on `(F_u, F_y) = 0`; returns the point if the residual becomes negligible.
fn polish_critical(
    fu: &BiPoly,
    fy: &BiPoly,
    emb: Embedding,
    mut u: C,
    mut y: C,
    scale: f64,
) -> Option<(C, C)> {
    let fuu = partial_u(fu).ok()?;
    let fuy = partial_y(fu).ok()?;
    let fyy = partial_y(fy).ok()?;
    for _ in 0..50 {
        let a = eval_c(fu, emb, u, y);
        let b = eval_c(fy, emb, u, y);
        let j11 = eval_c(&fuu, emb, u, y);
        let j12 = eval_c(&fuy, emb, u, y);
        let j22 = eval_c(&fyy, emb, u, y);
        let det = j11 * j22 - j12 * j12;
        if det.norm() == 0.0 {
            break;
        }
        let du = (a * j22 - b * j12) / det;
        let dy = (j11 * b - j12 * a) / det;
        u -= du;
        y -= dy;
        if du.norm() + dy.norm() < 1e-15 * (1.0 + u.norm() + y.norm()) {
            break;
        }
    }
    let mag = (1.0 + u.norm() + y.norm()).powi(8);
    let res = eval_c(fu, emb, u, y).norm() + eval_c(fy, emb, u, y).norm();
    if res < 1e-9 * scale * mag && u.re.is_finite() && y.re.is_finite() {
        Some((u, y))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::fixtures::*;
    use crate::config::Parameter;

    #[test]
    fn cfg_a_smooth_and_singular() {
        let c = cfg_a()
            .with_parameter(Parameter::Lambda(ExactScalar::one()))
            .unwrap();
        let rep = c.smoothness_check(1e-8).unwrap();
        assert_eq!(rep.verdict, SmoothnessVerdict::Smooth, "{}", rep.detail);
        // x y (y - x + 1) has one critical point off the nodes, at the centroid (1/3, -1/3),
        // with value -1/27.
        let centroid = rep
            .critical_points
            .iter()
            .find(|p| (p.value[0] + 1.0 / 27.0).abs() < 1e-12)
            .expect("centroid among critical points");
        assert!(
            (centroid.x[0] - 1.0 / 3.0).abs() < 1e-10 && (centroid.y[0] + 1.0 / 3.0).abs() < 1e-10
        );
        // lambda = 1/F(p) built from the located point.
        let lam = ExactScalar::from_f64_exact(1.0 / centroid.value[0]).unwrap();
        let s = c
            .with_parameter(Parameter::Lambda(lam))
            .unwrap()
            .smoothness_check(1e-8)
            .unwrap();
        assert_eq!(s.verdict, SmoothnessVerdict::Singular);
        assert!(c.smoothness_check(0.0).is_err());
    }

    #[test]
    fn cfg_c_smooth_at_generic_lambda() {
        let c = cfg_c()
            .with_parameter(Parameter::Lambda(ExactScalar::from_int(1)))
            .unwrap();
        let rep = c.smoothness_check(1e-8).unwrap();
        assert_eq!(rep.verdict, SmoothnessVerdict::Smooth, "{}", rep.detail);
        // 8 nodes plus the critical points of the bounded and unbounded cells.
        assert!(rep.critical_points.len() >= 8);
    }
}
