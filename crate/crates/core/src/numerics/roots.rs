//! Simultaneous polynomial root finding (Aberth–Ehrlich iteration).

use num_complex::Complex64 as C;

use crate::error::{Error, Result};

/// Anything that can report its degree and its value plus derivative at a point.
pub trait RootPoly {
    fn degree(&self) -> usize;
    fn eval_with_deriv(&self, z: C) -> (C, C);

    /// Rounding-error scale of the evaluation at `z`; values below it count as zero.
    fn eval_error_bound(&self, _z: C) -> f64 {
        0.0
    }
}

/// Dense complex polynomial, `coeffs[k]` multiplies `z^k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CPoly {
    pub coeffs: Vec<C>,
}

impl CPoly {
    pub fn new(mut coeffs: Vec<C>) -> Self {
        while coeffs.last().is_some_and(|c| *c == C::new(0.0, 0.0)) {
            coeffs.pop();
        }
        CPoly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| C::new(c, 0.0)).collect())
    }

    pub fn eval(&self, z: C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Monic polynomial with the given roots.
    pub fn from_roots(roots: &[C]) -> Self {
        let mut coeffs = vec![C::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![C::new(0.0, 0.0); coeffs.len() + 1];
            for (k, &c) in coeffs.iter().enumerate() {
                next[k + 1] += c;
                next[k] -= c * r;
            }
            coeffs = next;
        }
        CPoly { coeffs }
    }

    pub fn mul(&self, o: &CPoly) -> CPoly {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return CPoly { coeffs: vec![] };
        }
        let mut v = vec![C::new(0.0, 0.0); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                v[i + j] += a * b;
            }
        }
        CPoly::new(v)
    }

    /// Bound on root moduli (Fujiwara).
    fn root_bound(&self) -> f64 {
        let n = self.coeffs.len() - 1;
        let lead = self.coeffs[n].norm();
        let mut b: f64 = 0.0;
        for k in 0..n {
            let ratio = self.coeffs[k].norm() / lead;
            let e = 1.0 / (n - k) as f64;
            let v = if k == 0 {
                (ratio / 2.0).powf(e)
            } else {
                ratio.powf(e)
            };
            b = b.max(v);
        }
        2.0 * b
    }
}

impl RootPoly for CPoly {
    fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    fn eval_with_deriv(&self, z: C) -> (C, C) {
        let mut p = C::new(0.0, 0.0);
        let mut dp = C::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    fn eval_error_bound(&self, z: C) -> f64 {
        let r = z.norm();
        let s = self
            .coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * r + c.norm());
        4.0 * f64::EPSILON * (self.coeffs.len() as f64) * s
    }
}

/// All roots of a dense polynomial. Initial guesses are spread on a circle inside the root bound.
pub fn poly_roots(p: &CPoly) -> Result<Vec<C>> {
    let n = p.degree();
    if n == 0 {
        return Ok(vec![]);
    }
    // Leading zeros contribute exact roots at 0 and are split off first.
    let zeros = p.coeffs.iter().take_while(|c| c.norm() == 0.0).count();
    if zeros > 0 {
        let rest = CPoly::new(p.coeffs[zeros..].to_vec());
        let mut r = poly_roots(&rest)?;
        r.extend(std::iter::repeat_n(C::new(0.0, 0.0), zeros));
        return Ok(r);
    }
    if n == 1 {
        return Ok(vec![-p.coeffs[0] / p.coeffs[1]]);
    }
    let bound = p.root_bound();
    let lo = (p.coeffs[0].norm() / p.coeffs[n].norm()).powf(1.0 / n as f64);
    let radius = if lo.is_finite() && lo > 0.0 {
        lo.min(bound)
    } else {
        bound
    };
    let init: Vec<C> = (0..n)
        .map(|k| {
            C::from_polar(
                radius,
                2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4,
            )
        })
        .collect();
    aberth(p, init, 1e-15, 1000)
}

/// Aberth–Ehrlich iteration from the given starting points.
pub fn aberth<P: RootPoly + ?Sized>(
    p: &P,
    mut z: Vec<C>,
    rel_tol: f64,
    max_iter: usize,
) -> Result<Vec<C>> {
    let n = z.len();
    if n != p.degree() {
        return Err(Error::numerical(format!(
            "aberth: {n} starting points for degree {}",
            p.degree()
        )));
    }
    let mut done = vec![false; n];
    for _ in 0..max_iter {
        let mut all_done = true;
        for k in 0..n {
            if done[k] {
                continue;
            }
            let (v, dv) = p.eval_with_deriv(z[k]);
            if v.norm() <= p.eval_error_bound(z[k]) {
                done[k] = true;
                continue;
            }
            let ratio = v / dv;
            let mut s = C::new(0.0, 0.0);
            for j in 0..n {
                if j != k {
                    let diff = z[k] - z[j];
                    if diff.norm() > 0.0 {
                        s += 1.0 / diff;
                    }
                }
            }
            let step = ratio / (1.0 - ratio * s);
            if !step.re.is_finite() || !step.im.is_finite() {
                // Perturb and retry on the next sweep.
                let bump = C::new(1e-8, 1e-8) * (1.0 + z[k].norm());
                z[k] += bump;
                all_done = false;
                continue;
            }
            z[k] -= step;
            if step.norm() <= rel_tol * (1.0 + z[k].norm()) {
                done[k] = true;
            } else {
                all_done = false;
            }
        }
        if all_done {
            return Ok(z);
        }
    }
    Err(Error::numerical("aberth iteration did not converge"))
}

/// Newton polishing of a single root.
pub fn newton_polish<P: RootPoly + ?Sized>(p: &P, mut z: C, iters: usize) -> C {
    for _ in 0..iters {
        let (v, dv) = p.eval_with_deriv(z);
        if dv.norm() == 0.0 {
            break;
        }
        let step = v / dv;
        if !step.re.is_finite() || !step.im.is_finite() {
            break;
        }
        z -= step;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}
