//! Plane curves presented as a family of fibers over a coordinate `u`.

use num_complex::Complex64 as C;

use super::forms::NumForm;
use super::roots::{aberth, poly_roots, CPoly, RootPoly};
use crate::arith::{Embedding, ExactScalar};
use crate::config::{IntersectionPoint, LineConfiguration, LineId};
use crate::error::{Error, Result};

/// A curve `G(u, y) = 0` with a degree-`d` polynomial in `y` over each `u`.
pub trait FiberModel: Send + Sync {
    fn degree(&self) -> usize;

    /// `(G, dG/du, dG/dy)`.
    fn eval(&self, u: C, y: C) -> (C, C, C);

    /// Magnitude of the terms of `G` at `(u, y)`; residuals are measured relative to it.
    fn scale(&self, u: C, y: C) -> f64;

    /// Starting guesses for the roots over `u` when no warm start is available.
    fn initial_roots(&self, u: C) -> Result<Vec<C>>;

    /// Plane coordinates of a model point.
    fn to_xy(&self, u: C, y: C) -> (C, C);

    /// `(dx/du, dy/du)` along the curve, from the model's `dy/du`.
    fn xy_derivative(&self, dy_du: C) -> (C, C);

    /// All roots over `u`, polished by Aberth iteration.
    fn roots(&self, u: C, warm: Option<&[C]>) -> Result<Vec<C>> {
        let slice = FiberSlice { model: self, u };
        let mut start = match warm {
            Some(w) => w.to_vec(),
            None => self.initial_roots(u)?,
        };
        separate(&mut start);
        aberth(&slice, start, 1e-15, 500)
            .map_err(|_| Error::numerical(format!("fiber roots did not converge at u = {u}")))
    }

    /// `d = -G_u / G_y` at a curve point.
    fn dy_du(&self, u: C, y: C) -> C {
        let (_, gu, gy) = self.eval(u, y);
        -gu / gy
    }

    /// Size below which form values from [`FiberModel::eval_forms`] are treated as zero.
    fn value_floor(&self, tol: f64) -> f64 {
        tol
    }

    /// Value and `u`-derivative of each form at a curve point.
    fn eval_forms(&self, forms: &[NumForm], u: C, y: C, dy_du: C) -> Vec<(C, C)> {
        let (x, yy) = self.to_xy(u, y);
        let (dx, dy) = self.xy_derivative(dy_du);
        forms
            .iter()
            .map(|f| (f.eval(x, yy), f.a * dx + f.b * dy))
            .collect()
    }
}

/// Coincident starting points stall Aberth; nudge them apart.
fn separate(z: &mut [C]) {
    for k in 0..z.len() {
        for j in 0..k {
            if (z[k] - z[j]).norm() <= 1e-12 * (1.0 + z[k].norm()) {
                z[k] += C::new(1e-7, 3e-7) * (1.0 + z[k].norm()) * (k as f64);
            }
        }
    }
}

/// The fiber polynomial over a fixed `u`.
pub struct FiberSlice<'a, M: FiberModel + ?Sized> {
    pub model: &'a M,
    pub u: C,
}

impl<M: FiberModel + ?Sized> RootPoly for FiberSlice<'_, M> {
    fn degree(&self) -> usize {
        self.model.degree()
    }

    fn eval_with_deriv(&self, y: C) -> (C, C) {
        let (g, _, gy) = self.model.eval(self.u, y);
        (g, gy)
    }

    fn eval_error_bound(&self, y: C) -> f64 {
        4.0 * f64::EPSILON * (self.model.degree() as f64 + 1.0) * self.model.scale(self.u, y)
    }
}

/// Newton refinement of a single fiber root.
pub fn polish_root<M: FiberModel + ?Sized>(model: &M, u: C, y: C) -> C {
    super::roots::newton_polish(&FiberSlice { model, u }, y, 8)
}

/// One line in projection coordinates: `p u + q y + c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbLine {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub q: f64,
    pub c: f64,
}

impl EmbLine {
    pub fn eval(&self, u: C, y: C) -> C {
        u * self.p + y * self.q + self.c
    }

    /// The `y` where the line meets the fiber over `u`.
    pub fn root(&self, u: C) -> C {
        -(u * self.p + self.c) / self.q
    }
}

/// An intersection point with its projection coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbNode {
    pub point: IntersectionPoint,
    pub x: f64,
    pub y: f64,
    pub u: f64,
    pub first: usize,
    pub second: usize,
}

/// A validated configuration under a real embedding, with shear `theta` and parameter `t`.
/// Fibers of `prod L - t` over `u = x + theta y`.
#[derive(Debug, Clone)]
pub struct EmbeddedConfig {
    pub config: LineConfiguration,
    pub embedding: Embedding,
    pub theta: f64,
    pub t: C,
    pub ids: Vec<LineId>,
    pub lines: Vec<EmbLine>,
    pub nodes: Vec<EmbNode>,
}

impl EmbeddedConfig {
    pub fn new(
        cfg: &LineConfiguration,
        embedding: Embedding,
        theta: &ExactScalar,
        t: C,
    ) -> Result<Self> {
        cfg.ensure_valid()?;
        if !cfg.projection_is_valid(theta)? {
            return Err(Error::invalid(format!(
                "shear {theta} does not separate the configuration"
            )));
        }
        if t.norm() == 0.0 || !t.re.is_finite() || !t.im.is_finite() {
            return Err(Error::invalid("t must be a nonzero finite number"));
        }
        let th = theta.to_f64(embedding);
        let ids = cfg.line_ids();
        let lines = ids
            .iter()
            .map(|id| {
                let (a, b, c) = cfg.line(*id);
                let (a, b, c) = (
                    a.to_f64(embedding),
                    b.to_f64(embedding),
                    c.to_f64(embedding),
                );
                let q = cfg.sheared_q(id.group, theta).to_f64(embedding);
                EmbLine { a, b, p: a, q, c }
            })
            .collect();
        let pos = |l: LineId| ids.iter().position(|x| *x == l).expect("configured line");
        let nodes = cfg
            .intersections()?
            .into_iter()
            .map(|p| {
                let (x, y) = (p.x.to_f64(embedding), p.y.to_f64(embedding));
                let u =
                    p.x.checked_add(&theta.checked_mul(&p.y)?)?
                        .to_f64(embedding);
                Ok(EmbNode {
                    first: pos(p.first),
                    second: pos(p.second),
                    point: p,
                    x,
                    y,
                    u,
                })
            })
            .collect::<Result<_>>()?;
        Ok(EmbeddedConfig {
            config: cfg.clone(),
            embedding,
            theta: th,
            t,
            ids,
            lines,
            nodes,
        })
    }

    /// Uses the configuration's own parameter and the projection picked by `seed`.
    pub fn from_config(cfg: &LineConfiguration, embedding: Embedding, seed: u64) -> Result<Self> {
        let proj = cfg.choose_projection(seed)?;
        let t = C::new(cfg.t().to_f64(embedding), 0.0);
        Self::new(cfg, embedding, &proj.theta, t)
    }

    pub fn with_t(&self, t: C) -> Result<Self> {
        if t.norm() == 0.0 {
            return Err(Error::invalid("t must be nonzero"));
        }
        Ok(EmbeddedConfig { t, ..self.clone() })
    }

    pub fn line_index(&self, id: LineId) -> Result<usize> {
        self.ids
            .iter()
            .position(|x| *x == id)
            .ok_or_else(|| Error::invalid(format!("unknown line {id}")))
    }

    pub fn node(&self, s: &IntersectionPoint) -> Result<&EmbNode> {
        self.nodes
            .iter()
            .find(|n| n.point.first == s.first && n.point.second == s.second)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "{s} is not an intersection point of the configuration"
                ))
            })
    }

    /// Values of all lines at `(u, y)`.
    pub fn line_values(&self, u: C, y: C) -> Vec<C> {
        self.lines.iter().map(|l| l.eval(u, y)).collect()
    }

    /// Products of all values but one, without dividing.
    fn cofactors(v: &[C]) -> Vec<C> {
        let n = v.len();
        let mut out = vec![C::new(1.0, 0.0); n];
        let mut acc = C::new(1.0, 0.0);
        for k in 0..n {
            out[k] = acc;
            acc *= v[k];
        }
        acc = C::new(1.0, 0.0);
        for k in (0..n).rev() {
            out[k] *= acc;
            acc *= v[k];
        }
        out
    }

    /// All fiber roots over `u`.
    pub fn fiber_roots(&self, u: C) -> Result<Vec<C>> {
        let r = self.roots(u, None)?;
        Ok(r.into_iter().map(|y| polish_root(self, u, y)).collect())
    }
}

impl FiberModel for EmbeddedConfig {
    fn degree(&self) -> usize {
        self.lines.len()
    }

    fn eval(&self, u: C, y: C) -> (C, C, C) {
        let v = self.line_values(u, y);
        let cof = Self::cofactors(&v);
        let prod: C = v.iter().product();
        let gu = self.lines.iter().zip(&cof).map(|(l, c)| c * l.p).sum();
        let gy = self.lines.iter().zip(&cof).map(|(l, c)| c * l.q).sum();
        (prod - self.t, gu, gy)
    }

    fn scale(&self, u: C, y: C) -> f64 {
        let s: f64 = self
            .lines
            .iter()
            .map(|l| l.p.abs() * u.norm() + l.q.abs() * y.norm() + l.c.abs())
            .product();
        s + self.t.norm()
    }

    fn initial_roots(&self, u: C) -> Result<Vec<C>> {
        Ok(self.lines.iter().map(|l| l.root(u)).collect())
    }

    fn to_xy(&self, u: C, y: C) -> (C, C) {
        (u - y * self.theta, y)
    }

    fn xy_derivative(&self, dy_du: C) -> (C, C) {
        (1.0 - dy_du * self.theta, dy_du)
    }

    /// The smallest line value is of size `|t|` near a node and is computed from the equation.
    fn value_floor(&self, tol: f64) -> f64 {
        tol * self.t.norm().min(1.0)
    }

    /// Configured lines are evaluated so that the smallest one is `t / prod(others)`,
    /// which keeps its relative accuracy when it is of size `|t|`.
    fn eval_forms(&self, forms: &[NumForm], u: C, y: C, dy_du: C) -> Vec<(C, C)> {
        let mut v = self.line_values(u, y);
        let mut dv: Vec<C> = self.lines.iter().map(|l| l.p + l.q * dy_du).collect();
        if let Some(m) = (0..v.len()).min_by(|&i, &j| v[i].norm().total_cmp(&v[j].norm())) {
            let others: C = (0..v.len()).filter(|&k| k != m).map(|k| v[k]).product();
            let dlog: C = (0..v.len()).filter(|&k| k != m).map(|k| dv[k] / v[k]).sum();
            v[m] = self.t / others;
            dv[m] = -v[m] * dlog;
        }
        let (x, yy) = self.to_xy(u, y);
        let (dx, dy) = self.xy_derivative(dy_du);
        forms
            .iter()
            .map(|f| match f.line {
                Some(k) if k < v.len() => (v[k], dv[k]),
                _ => (f.eval(x, yy), f.a * dx + f.b * dy),
            })
            .collect()
    }
}

/// `G(x, y) = sum_j P_j(x) y^j` with projection `u = x`.
#[derive(Debug, Clone)]
pub struct PolyModel {
    pub coeffs: Vec<CPoly>,
}

impl PolyModel {
    pub fn new(coeffs: Vec<CPoly>) -> Result<Self> {
        if coeffs.len() < 2 || coeffs.last().is_none_or(|p| p.coeffs.is_empty()) {
            return Err(Error::invalid(
                "fiber polynomial must have positive degree in y",
            ));
        }
        Ok(PolyModel { coeffs })
    }

    /// `x y h(x) = t` with `h(x) = h0 + h1 x`.
    pub fn local(t: C, h0: C, h1: C) -> Result<Self> {
        if h0.norm() == 0.0 || t.norm() == 0.0 {
            return Err(Error::invalid("local model needs h(0) != 0 and t != 0"));
        }
        Self::new(vec![
            CPoly::new(vec![-t]),
            CPoly::new(vec![C::new(0.0, 0.0), h0, h1]),
        ])
    }

    fn deriv(p: &CPoly, x: C) -> (C, C) {
        p.eval_with_deriv(x)
    }
}

impl FiberModel for PolyModel {
    fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn eval(&self, u: C, y: C) -> (C, C, C) {
        let mut g = C::new(0.0, 0.0);
        let mut gu = C::new(0.0, 0.0);
        let mut gy = C::new(0.0, 0.0);
        for p in self.coeffs.iter().rev() {
            let (v, dv) = Self::deriv(p, u);
            gy = gy * y + g;
            g = g * y + v;
            gu = gu * y + dv;
        }
        (g, gu, gy)
    }

    fn scale(&self, u: C, y: C) -> f64 {
        let r = u.norm();
        self.coeffs.iter().rev().fold(0.0, |acc, p| {
            acc * y.norm() + p.coeffs.iter().rev().fold(0.0, |a, c| a * r + c.norm())
        })
    }

    fn initial_roots(&self, u: C) -> Result<Vec<C>> {
        let slice: Vec<C> = self.coeffs.iter().map(|p| p.eval(u)).collect();
        if slice.last().is_none_or(|c| c.norm() == 0.0) {
            return Err(Error::numerical(format!("fiber degree drops at u = {u}")));
        }
        poly_roots(&CPoly::new(slice))
    }

    fn to_xy(&self, u: C, y: C) -> (C, C) {
        (u, y)
    }

    fn xy_derivative(&self, dy_du: C) -> (C, C) {
        (C::new(1.0, 0.0), dy_du)
    }
}
