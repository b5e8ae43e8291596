//! The loops `gamma_{s,t}`: circles in the `u`-line around a node, lifted along the branch
//! that follows one of the two lines through it.

use num_complex::Complex64 as C;

use super::model::{EmbNode, EmbeddedConfig, FiberModel};
use super::path::{Circle, LiftedLoop, Tolerances};
use crate::config::IntersectionPoint;
use crate::error::{Error, Result};

/// Ratio second-nearest / nearest root to the designated line required at the start point.
pub const GAP_RATIO: f64 = 10.0;

/// Default number of samples of a freshly built loop; quadrature refines from here.
pub const DEFAULT_SAMPLES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaOptions {
    /// Circle radius; the safe radius when `None`.
    pub radius: Option<f64>,
    pub orientation: i8,
    pub samples: usize,
    /// Refuse parameters above the safe bound for the radius.
    pub enforce_safe_t: bool,
}

impl Default for GammaOptions {
    fn default() -> Self {
        GammaOptions {
            radius: None,
            orientation: 1,
            samples: DEFAULT_SAMPLES,
            enforce_safe_t: true,
        }
    }
}

/// Product of the lines not through the node, at the node.
fn cofactor_at(emb: &EmbeddedConfig, n: &EmbNode) -> f64 {
    emb.lines
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != n.first && *k != n.second)
        .map(|(_, l)| l.a * n.x + l.b * n.y + l.c)
        .product()
}

/// `|q1 q2 h| (sigma1 - sigma2)^2` where near the node the fiber is `(y - y1)(y - y2) = t / (q1 q2 h)`
/// and `y1 - y2 = (sigma1 - sigma2)(u - u_s)`.
fn node_constant(emb: &EmbeddedConfig, n: &EmbNode) -> f64 {
    let (l1, l2) = (&emb.lines[n.first], &emb.lines[n.second]);
    let ds = l1.p / l1.q - l2.p / l2.q;
    (l1.q * l2.q * cofactor_at(emb, n)).abs() * ds * ds
}

/// Approximate distance from `u_s` to the two branch points that split off the node.
pub fn branch_radius(emb: &EmbeddedConfig, n: &EmbNode) -> f64 {
    2.0 * (emb.t.norm() / node_constant(emb, n)).sqrt()
}

/// A quarter of the distance from `u_s` to the nearest other node's branch points.
pub fn safe_radius(emb: &EmbeddedConfig, s: &IntersectionPoint) -> Result<f64> {
    let n = emb.node(s)?;
    let d = emb
        .nodes
        .iter()
        .filter(|m| m.point != n.point)
        .map(|m| (m.u - n.u).abs() - branch_radius(emb, m))
        .fold(f64::INFINITY, f64::min);
    if !(d > 0.0) {
        return Err(Error::numerical(format!(
            "branch points of other nodes reach {s}; shrink |t|"
        )));
    }
    Ok(if d.is_finite() { d / 4.0 } else { 1.0 })
}

/// Largest `|t|` for which the split branch points stay within `r / 5` of `u_s`.
pub fn safe_parameter(emb: &EmbeddedConfig, s: &IntersectionPoint, r: f64) -> Result<f64> {
    let n = emb.node(s)?;
    Ok(node_constant(emb, n) * r * r / 100.0)
}

/// Builds `gamma_{s,t}` and checks the start gap and closure.
pub fn build_gamma_loop(
    emb: &EmbeddedConfig,
    s: &IntersectionPoint,
    opts: &GammaOptions,
    tol: &Tolerances,
) -> Result<LiftedLoop> {
    let n = emb.node(s)?;
    let safe = safe_radius(emb, s)?;
    let r = opts.radius.unwrap_or(safe);
    if !(r > 0.0) || r > safe * (1.0 + 1e-12) {
        return Err(Error::invalid(format!(
            "radius {r} for {s} exceeds the safe radius {safe}"
        )));
    }
    let safe_t = safe_parameter(emb, s, r)?;
    if opts.enforce_safe_t && emb.t.norm() > safe_t {
        return Err(Error::numerical(format!(
            "|t| = {:e} is above the safe parameter {safe_t:e} for {s} at radius {r}; shrink |t|",
            emb.t.norm()
        )));
    }
    let circle = Circle::new(C::new(n.u, 0.0), r, opts.orientation);
    let u0 = circle.center + r;
    let target = emb.lines[n.first].root(u0);
    let mut roots = emb.roots(u0, None)?;
    roots.sort_by(|a, b| (a - target).norm().total_cmp(&(b - target).norm()));
    let (d1, d2) = (
        (roots[0] - target).norm(),
        roots.get(1).map_or(f64::INFINITY, |y| (y - target).norm()),
    );
    if d2 < GAP_RATIO * d1 {
        return Err(Error::numerical(format!(
            "gap certificate failed for {s}: nearest/second-nearest root distances {d1:e}, {d2:e}; shrink r"
        )));
    }
    let lp = LiftedLoop::lift(emb, circle, roots[0], opts.samples, tol)?;
    if !lp.is_closed(tol) {
        return Err(Error::numerical(format!(
            "loop around {s} does not close (residual {:e}); shrink |t|",
            lp.closure_residual
        )));
    }
    Ok(lp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{Embedding, ExactScalar};
    use crate::config::fixtures::*;

    fn emb(t: f64) -> EmbeddedConfig {
        EmbeddedConfig::new(
            &cfg_a(),
            Embedding::Plus,
            &ExactScalar::from_int(2),
            C::new(t, 0.0),
        )
        .unwrap()
    }

    fn point_1_0(e: &EmbeddedConfig) -> IntersectionPoint {
        e.nodes
            .iter()
            .find(|n| n.x == 1.0 && n.y == 0.0)
            .unwrap()
            .point
            .clone()
    }

    #[test]
    fn cfg_a_loop_closes() {
        let e = emb(1e-4);
        let s = point_1_0(&e);
        let tol = Tolerances::default();
        let lp = build_gamma_loop(&e, &s, &GammaOptions::default(), &tol).unwrap();
        assert!(lp.closure_residual < 1e-8);
        // dense run as oracle: same branch at the shared sample points
        let dense = lp.resample(&e, 1024, &tol).unwrap();
        for k in 0..lp.len() {
            assert!((dense.samples[16 * k].y - lp.samples[k].y).norm() < 1e-10);
        }
    }

    #[test]
    fn too_large_t_is_refused_or_fails() {
        let e = emb(1e-4);
        let s = point_1_0(&e);
        let r = safe_radius(&e, &s).unwrap();
        let big = e.with_t(C::new(r * r, 0.0)).unwrap();
        assert!(
            build_gamma_loop(&big, &s, &GammaOptions::default(), &Tolerances::default()).is_err()
        );
        let unchecked = GammaOptions {
            enforce_safe_t: false,
            ..Default::default()
        };
        assert!(build_gamma_loop(&big, &s, &unchecked, &Tolerances::default()).is_err());
    }

    #[test]
    fn orientation_flag_reverses() {
        let e = emb(1e-4);
        let s = point_1_0(&e);
        let tol = Tolerances::default();
        let a = build_gamma_loop(&e, &s, &GammaOptions::default(), &tol).unwrap();
        let b = build_gamma_loop(
            &e,
            &s,
            &GammaOptions {
                orientation: -1,
                ..Default::default()
            },
            &tol,
        )
        .unwrap();
        let n = a.len();
        for k in 1..n {
            assert!((a.samples[k].y - b.samples[n - k].y).norm() < 1e-10);
        }
    }
}
