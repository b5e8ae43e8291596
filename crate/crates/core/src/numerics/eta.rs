//! Integrals of `eta(f, g) = log|f| d arg g - log|g| d arg f` over lifted loops.

use std::f64::consts::PI;

use num_complex::Complex64 as C;

use super::forms::{NumForm, NumMonomial, NumSymbol, NumTerm};
use super::model::FiberModel;
use super::path::{LiftedLoop, Tolerances};
use crate::error::{Error, Result};

/// Per-form integrals over one loop at a fixed sample count:
/// `cross[a][b] = int log|F_a| d arg F_b - log|F_b| d arg F_a` and `winding[a] = int d arg F_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaBasis {
    pub cross: Vec<Vec<f64>>,
    pub winding: Vec<f64>,
    /// Largest phase change of any form between consecutive samples.
    pub max_phase_step: f64,
    pub samples: usize,
}

/// Trapezoid sums in the loop parameter. The integrands are smooth and periodic, so the rule
/// converges geometrically; `d arg F` is taken from the analytic derivative `Im(F'/F)`.
pub fn eta_basis<M: FiberModel + ?Sized>(
    model: &M,
    lp: &LiftedLoop,
    forms: &[NumForm],
    tol: &Tolerances,
) -> Result<EtaBasis> {
    let n = lp.samples.len();
    let k = forms.len();
    let mut logs = vec![vec![0.0; n]; k];
    let mut dargs = vec![vec![0.0; n]; k];
    let mut vals = vec![vec![C::new(0.0, 0.0); n]; k];
    let floor = model.value_floor(tol.eval);
    for (s, p) in lp.samples.iter().enumerate() {
        let ev = model.eval_forms(forms, p.u, p.y, p.dy_du);
        for (a, (v, dv)) in ev.into_iter().enumerate() {
            if v.norm() <= floor {
                return Err(Error::numerical(format!(
                    "{} vanishes near the loop at u = {}",
                    forms[a].label, p.u
                )));
            }
            logs[a][s] = v.norm().ln();
            dargs[a][s] = (dv * p.du_ds / v).im;
            vals[a][s] = v;
        }
    }
    let mut max_phase_step: f64 = 0.0;
    for row in &vals {
        for s in 0..n {
            let d = (row[(s + 1) % n] / row[s]).arg();
            max_phase_step = max_phase_step.max(d.abs());
        }
    }
    let w = 2.0 * PI / n as f64;
    let winding: Vec<f64> = dargs.iter().map(|d| w * d.iter().sum::<f64>()).collect();
    let mut cross = vec![vec![0.0; k]; k];
    for a in 0..k {
        for b in a + 1..k {
            let v: f64 = (0..n)
                .map(|s| logs[a][s] * dargs[b][s] - logs[b][s] * dargs[a][s])
                .sum::<f64>()
                * w;
            cross[a][b] = v;
            cross[b][a] = -v;
        }
    }
    Ok(EtaBasis {
        cross,
        winding,
        max_phase_step,
        samples: n,
    })
}

fn monomial_pair(basis: &EtaBasis, f: &NumMonomial, g: &NumMonomial) -> f64 {
    if f == g {
        return 0.0;
    }
    let mut v = 0.0;
    for (a, ea) in &f.factors {
        for (b, eb) in &g.factors {
            v += (ea * eb) as f64 * basis.cross[*a][*b];
        }
    }
    let lf = f.constant.norm().ln();
    let lg = g.constant.norm().ln();
    for (b, eb) in &g.factors {
        v += lf * *eb as f64 * basis.winding[*b];
    }
    for (a, ea) in &f.factors {
        v -= lg * *ea as f64 * basis.winding[*a];
    }
    v
}

/// `int_loop eta(sym)` from a basis, expanding each entry by additivity of `eta` in each slot.
pub fn integrate_terms(basis: &EtaBasis, terms: &[NumTerm]) -> f64 {
    terms
        .iter()
        .map(|t| t.coeff as f64 * monomial_pair(basis, &t.left, &t.right))
        .sum()
}

/// Result of an adaptively refined integral.
#[derive(Debug, Clone, PartialEq)]
pub struct EtaIntegral {
    pub value: f64,
    pub samples: usize,
    /// Difference between the last two estimates.
    pub last_change: f64,
    pub refinements: usize,
}

pub const MAX_SAMPLES: usize = 1 << 16;

/// Integral of `eta(sym)` over the loop, doubling the sample count until two successive
/// estimates agree to `quad * (1 + |value|)` and no phase step reaches `pi / 2`.
pub fn integrate_symbol<M: FiberModel + ?Sized>(
    model: &M,
    lp: &LiftedLoop,
    sym: &NumSymbol,
    tol: &Tolerances,
) -> Result<EtaIntegral> {
    if sym.terms.is_empty() {
        return Ok(EtaIntegral {
            value: 0.0,
            samples: lp.len(),
            last_change: 0.0,
            refinements: 0,
        });
    }
    let mut cur = lp.clone();
    let mut basis = eta_basis(model, &cur, &sym.forms, tol)?;
    let mut prev = integrate_terms(&basis, &sym.terms);
    let mut refinements = 0;
    loop {
        let n = cur.len() * 2;
        if n > MAX_SAMPLES {
            let what = if basis.max_phase_step >= PI / 2.0 {
                "phase jump"
            } else {
                "no convergence"
            };
            return Err(Error::numerical(format!(
                "eta quadrature: {what} at {} samples (a function vanishes near the loop?)",
                cur.len()
            )));
        }
        cur = cur.resample(model, n, tol)?;
        if !cur.is_closed(tol) {
            return Err(Error::numerical("loop does not close on refinement"));
        }
        basis = eta_basis(model, &cur, &sym.forms, tol)?;
        let v = integrate_terms(&basis, &sym.terms);
        refinements += 1;
        let change = (v - prev).abs();
        if change < tol.quad * (1.0 + v.abs()) && basis.max_phase_step < PI / 2.0 {
            return Ok(EtaIntegral {
                value: v,
                samples: n,
                last_change: change,
                refinements,
            });
        }
        prev = v;
    }
}

/// `int_loop eta(f, g)` for two monomials.
pub fn integrate_eta<M: FiberModel + ?Sized>(
    model: &M,
    lp: &LiftedLoop,
    f: (C, &[(NumForm, i64)]),
    g: (C, &[(NumForm, i64)]),
    tol: &Tolerances,
) -> Result<f64> {
    let mut sym = NumSymbol::default();
    let l = sym.monomial(f.0, f.1);
    let r = sym.monomial(g.0, g.1);
    sym.push(l, r, 1);
    Ok(integrate_symbol(model, lp, &sym, tol)?.value)
}

/// `(1 / 2 pi) int_loop eta(sym)`.
pub fn pairing<M: FiberModel + ?Sized>(
    model: &M,
    lp: &LiftedLoop,
    sym: &NumSymbol,
    tol: &Tolerances,
) -> Result<f64> {
    Ok(integrate_symbol(model, lp, sym, tol)?.value / (2.0 * PI))
}
