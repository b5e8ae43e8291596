//! Predictor-corrector lifting of paths in the `u`-line to the curve.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64 as C;

use super::model::{polish_root, FiberModel};
use crate::error::{Error, Result};

/// Numerical tolerances shared by loop construction and quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// `|G| / scale` at every sample.
    pub surface: f64,
    /// `|y_end - y_start| / (1 + |y_start|)` for closed loops.
    pub closure: f64,
    /// Relative agreement of successive quadrature estimates.
    pub quad: f64,
    /// Minimum modulus of an integrand function on the samples.
    pub eval: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            surface: 1e-10,
            closure: 1e-8,
            quad: 1e-8,
            eval: 1e-12,
        }
    }
}

/// A point of a lifted path in model coordinates, with its plane image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSample {
    pub u: C,
    pub y: C,
    pub dy_du: C,
    /// Derivative of `u` with respect to the path parameter.
    pub du_ds: C,
    pub x_plane: C,
    pub y_plane: C,
}

/// Samples of a lifted path at uniformly spaced parameter values, endpoints included.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedPath {
    pub samples: Vec<PathSample>,
    pub on_surface_residual: f64,
    /// Number of rejected continuation steps.
    pub halvings: usize,
}

/// A parametrised path `s -> (u(s), u'(s))`.
pub trait UPath: Sync {
    fn at(&self, s: f64) -> (C, C);
}

impl<F: Fn(f64) -> (C, C) + Sync> UPath for F {
    fn at(&self, s: f64) -> (C, C) {
        self(s)
    }
}

/// `u(phi) = center + axis (Re e + i stretch Im e)` with `e = r exp(-i o phi)`, `phi in [0, 2 pi]`;
/// `o = +1` runs clockwise. With `stretch = 1` and `|axis| = 1` this is a circle of radius `r`,
/// otherwise an ellipse with semi-axes `r` along `axis` and `stretch * r` across it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: C,
    pub radius: f64,
    pub orientation: i8,
    pub axis: C,
    pub stretch: f64,
}

impl Circle {
    pub fn new(center: C, radius: f64, orientation: i8) -> Self {
        Circle {
            center,
            radius,
            orientation,
            axis: C::new(1.0, 0.0),
            stretch: 1.0,
        }
    }
}

impl UPath for Circle {
    fn at(&self, phi: f64) -> (C, C) {
        let o = self.orientation as f64;
        let e = C::from_polar(self.radius, -o * phi);
        let de = C::new(0.0, -o) * e;
        let u = self.center + self.axis * C::new(e.re, self.stretch * e.im);
        (u, self.axis * C::new(de.re, self.stretch * de.im))
    }
}

struct State {
    u: C,
    y: C,
    dy_du: C,
    roots: Vec<C>,
}

const MIN_STEP: f64 = 1e-13;

fn sample<M: FiberModel + ?Sized>(model: &M, st: &State, du_ds: C) -> PathSample {
    let (x_plane, y_plane) = model.to_xy(st.u, st.y);
    PathSample {
        u: st.u,
        y: st.y,
        dy_du: st.dy_du,
        du_ds,
        x_plane,
        y_plane,
    }
}

/// One continuation step; `None` when the step-control contract fails.
fn try_step<M: FiberModel + ?Sized>(model: &M, st: &State, u1: C) -> Option<State> {
    let du = u1 - st.u;
    let pred = st.y + st.dy_du * du;
    let warm: Vec<C> = st
        .roots
        .iter()
        .map(|&r| {
            if r == st.y {
                pred
            } else {
                r + model.dy_du(st.u, r) * du
            }
        })
        .collect();
    let roots = model.roots(u1, Some(&warm)).ok()?;
    let j = (0..roots.len()).min_by(|&a, &b| {
        (roots[a] - pred)
            .norm()
            .total_cmp(&(roots[b] - pred).norm())
    })?;
    let y1 = polish_root(model, u1, roots[j]);
    let disp = (y1 - st.y).norm();
    let gap = (0..roots.len())
        .filter(|&k| k != j)
        .map(|k| (roots[k] - y1).norm())
        .fold(f64::INFINITY, f64::min);
    if gap <= 3.0 * disp || (y1 - pred).norm() * 3.0 >= gap {
        return None;
    }
    let d1 = model.dy_du(u1, y1);
    if !d1.re.is_finite() || !d1.im.is_finite() {
        return None;
    }
    let mut roots = roots;
    roots[j] = y1;
    Some(State {
        u: u1,
        y: y1,
        dy_du: d1,
        roots,
    })
}

/// Lifts `path` on `[0, length]` from `y_start`, recording `n + 1` uniformly spaced samples.
/// Between recorded samples the step is halved until the contract holds: the nearest other root
/// stays more than three step displacements away and the predictor lands closer to the tracked
/// root than to any other.
pub fn lift_path<M: FiberModel + ?Sized, P: UPath + ?Sized>(
    model: &M,
    path: &P,
    length: f64,
    n: usize,
    y_start: C,
    tol: &Tolerances,
) -> Result<LiftedPath> {
    if n == 0 {
        return Err(Error::invalid("a lifted path needs at least one step"));
    }
    let (u0, du0) = path.at(0.0);
    let (g, _, _) = model.eval(u0, y_start);
    if g.norm() > tol.surface * model.scale(u0, y_start) * 1e3 {
        return Err(Error::invalid(format!(
            "start value {y_start} is not on the fiber over {u0}"
        )));
    }
    let y0 = polish_root(model, u0, y_start);
    let mut roots = model.roots(u0, None)?;
    let j0 = (0..roots.len())
        .min_by(|&a, &b| (roots[a] - y0).norm().total_cmp(&(roots[b] - y0).norm()))
        .unwrap_or(0);
    roots[j0] = y0;
    let mut st = State {
        u: u0,
        y: y0,
        dy_du: model.dy_du(u0, y0),
        roots,
    };
    let mut samples = vec![sample(model, &st, du0)];
    let mut halvings = 0;
    let h_grid = length / n as f64;
    let mut h = h_grid;
    for k in 0..n {
        let s_end = h_grid * (k + 1) as f64;
        let mut s = h_grid * k as f64;
        while s < s_end {
            let step = h.min(s_end - s);
            let target = if s + step >= s_end { s_end } else { s + step };
            match try_step(model, &st, path.at(target).0) {
                Some(next) => {
                    st = next;
                    s = target;
                    h = (2.0 * step).min(h_grid);
                }
                None => {
                    halvings += 1;
                    h = step / 2.0;
                    if h < MIN_STEP * length.abs().max(1.0) {
                        return Err(Error::numerical(format!(
                            "step underflow near u = {}: root collision, the path passes too close to a branch point",
                            path.at(s).0
                        )));
                    }
                }
            }
        }
        samples.push(sample(model, &st, path.at(s_end).1));
    }
    let on_surface_residual = samples
        .iter()
        .map(|p| model.eval(p.u, p.y).0.norm() / model.scale(p.u, p.y))
        .fold(0.0, f64::max);
    if on_surface_residual > tol.surface {
        return Err(Error::numerical(format!(
            "lifted path leaves the surface: residual {on_surface_residual:e}"
        )));
    }
    Ok(LiftedPath {
        samples,
        on_surface_residual,
        halvings,
    })
}

/// A lifted circle. `samples` holds `n` points at `phi = 2 pi k / n`; the endpoint is
/// compared with the start to give `closure_residual`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftedLoop {
    pub circle: Circle,
    pub y_start: C,
    pub samples: Vec<PathSample>,
    pub orientation: i8,
    pub closure_residual: f64,
    pub on_surface_residual: f64,
    pub halvings: usize,
}

impl LiftedLoop {
    /// Lifts the circle with `n` samples. An open lift (wrong branch pairing) is reported through
    /// `closure_residual`, not as an error.
    pub fn lift<M: FiberModel + ?Sized>(
        model: &M,
        circle: Circle,
        y_start: C,
        n: usize,
        tol: &Tolerances,
    ) -> Result<Self> {
        let p = lift_path(model, &circle, 2.0 * PI, n, y_start, tol)?;
        let first = p.samples[0];
        let last = p.samples[n];
        let closure_residual = (last.y - first.y).norm() / (1.0 + first.y.norm());
        let mut samples = p.samples;
        samples.pop();
        Ok(LiftedLoop {
            circle,
            y_start: first.y,
            samples,
            orientation: circle.orientation,
            closure_residual,
            on_surface_residual: p.on_surface_residual,
            halvings: p.halvings,
        })
    }

    pub fn is_closed(&self, tol: &Tolerances) -> bool {
        self.closure_residual < tol.closure
    }

    /// Same loop at another sample count.
    pub fn resample<M: FiberModel + ?Sized>(
        &self,
        model: &M,
        n: usize,
        tol: &Tolerances,
    ) -> Result<Self> {
        Self::lift(model, self.circle, self.y_start, n, tol)
    }

    /// Same loop traversed the other way.
    pub fn reversed<M: FiberModel + ?Sized>(&self, model: &M, tol: &Tolerances) -> Result<Self> {
        let circle = Circle {
            orientation: -self.circle.orientation,
            ..self.circle
        };
        Self::lift(model, circle, self.y_start, self.samples.len(), tol)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `index,re_x,im_x,re_y,im_y` in plane coordinates.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,re_x,im_x,re_y,im_y\n");
        for (k, p) in self.samples.iter().enumerate() {
            let _ = writeln!(
                out,
                "{k},{:.17e},{:.17e},{:.17e},{:.17e}",
                p.x_plane.re, p.x_plane.im, p.y_plane.re, p.y_plane.im
            );
        }
        out
    }
}
