//! Hyperellipticity of the three-group curves `(N1, N2, N3)` by Noether's criterion: the
//! canonical map is an embedding iff quadratic combinations of holomorphic forms span
//! `3g - 3` dimensions; hyperelliptic iff they span only `2g - 1`.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::linalg::exact_rank;
use crate::arith::{ExactScalar, Rational};
use crate::error::{Error, Result};

/// Polynomials `x^i y^j (x - y)^k`, `i <= i_max`, `j <= j_max`, `k <= k_max`, expanded in the
/// monomial basis. A negative bound means the space is empty.
#[derive(Debug, Clone, PartialEq)]
pub struct MonomialSpace {
    pub bounds: [i64; 3],
    pub descriptors: Vec<(i64, i64, i64)>,
    /// Monomials `x^a y^b` indexing the columns.
    pub columns: Vec<(i64, i64)>,
    pub rows: Vec<Vec<ExactScalar>>,
}

fn binomial(n: i64, k: i64) -> i64 {
    (0..k).fold(1, |acc, m| acc * (n - m) / (m + 1))
}

impl MonomialSpace {
    pub fn new(i_max: i64, j_max: i64, k_max: i64) -> Self {
        let mut descriptors = Vec::new();
        if i_max >= 0 && j_max >= 0 && k_max >= 0 {
            for i in 0..=i_max {
                for j in 0..=j_max {
                    for k in 0..=k_max {
                        descriptors.push((i, j, k));
                    }
                }
            }
        }
        let mut expanded: Vec<BTreeMap<(i64, i64), i64>> = Vec::new();
        let mut cols = BTreeMap::new();
        for &(i, j, k) in &descriptors {
            let mut row = BTreeMap::new();
            for m in 0..=k {
                let c = binomial(k, m) * if m % 2 == 0 { 1 } else { -1 };
                row.insert((i + k - m, j + m), c);
                cols.insert((i + k - m, j + m), ());
            }
            expanded.push(row);
        }
        let columns: Vec<(i64, i64)> = cols.into_keys().collect();
        let index: BTreeMap<(i64, i64), usize> =
            columns.iter().enumerate().map(|(n, c)| (*c, n)).collect();
        let rows = expanded
            .into_iter()
            .map(|r| {
                let mut v = vec![ExactScalar::zero(); columns.len()];
                for (mono, c) in r {
                    v[index[&mono]] = ExactScalar::from_int(c);
                }
                v
            })
            .collect();
        MonomialSpace {
            bounds: [i_max, j_max, k_max],
            descriptors,
            columns,
            rows,
        }
    }

    pub fn dim(&self) -> Result<usize> {
        exact_rank(self.rows.clone())
    }
}

fn check_triple(n1: usize, n2: usize, n3: usize) -> Result<()> {
    if !(n1 >= n2 && n2 >= n3) {
        return Err(Error::invalid(format!(
            "need N1 >= N2 >= N3, got ({n1}, {n2}, {n3})"
        )));
    }
    if genus_closed_form(n1, n2, n3) < 1 {
        return Err(Error::invalid(format!("({n1}, {n2}, {n3}) has genus 0")));
    }
    Ok(())
}

/// `N1 N2 N3 - (N1-1)(N2-1)(N3-1)` for `N3 >= 1`, `(N1-1)(N2-1)` for `N3 = 0`.
pub fn genus_closed_form(n1: usize, n2: usize, n3: usize) -> i64 {
    let (a, b, c) = (n1 as i64, n2 as i64, n3 as i64);
    if c == 0 {
        (a - 1) * (b - 1)
    } else {
        a * b * c - (a - 1) * (b - 1) * (c - 1)
    }
}

/// `dim W - dim U - (2g - 1)` in closed form.
pub fn excess_closed_form(n1: usize, n2: usize, n3: usize) -> i64 {
    let (a, b, c) = (n1 as i64, n2 as i64, n3 as i64);
    match c {
        0 if b >= 3 => (a - 1) * (b - 1) - 2,
        0 => 0,
        1 => 2 * (a - 1) * (b - 1),
        _ => a * b + a * c + b * c - a - b - c - 1,
    }
}

/// Index ranges of the numerators of a basis of holomorphic forms, and of their pairwise products
/// and of the multiples of the curve equation among those products.
fn ranges(n1: usize, n2: usize, n3: usize) -> ([i64; 3], [i64; 3], [i64; 3]) {
    let (a, b, c) = (n1 as i64, n2 as i64, n3 as i64);
    if c == 0 {
        // x^i y^j dx / f_y with i <= N1 - 2, j <= N2 - 2; leading term of f is x^N1 y^N2
        (
            [a - 2, b - 2, 0],
            [2 * a - 4, 2 * b - 4, 0],
            [a - 4, b - 4, 0],
        )
    } else {
        (
            [a - 1, b - 1, c - 1],
            [2 * a - 2, 2 * b - 2, 2 * c - 2],
            [a - 2, b - 2, c - 2],
        )
    }
}

/// Dimension of the span of the holomorphic forms, by exact rank.
pub fn holomorphic_count(n1: usize, n2: usize, n3: usize) -> Result<usize> {
    check_triple(n1, n2, n3)?;
    let (v, _, _) = ranges(n1, n2, n3);
    MonomialSpace::new(v[0], v[1], v[2]).dim()
}

/// `dim W - dim U`, the dimension of the span of quadratic combinations.
pub fn quadratic_span_dim(n1: usize, n2: usize, n3: usize) -> Result<usize> {
    check_triple(n1, n2, n3)?;
    let (_, w, u) = ranges(n1, n2, n3);
    let dw = MonomialSpace::new(w[0], w[1], w[2]).dim()?;
    let du = MonomialSpace::new(u[0], u[1], u[2]).dim()?;
    Ok(dw - du)
}

type Poly = BTreeMap<(i64, i64), Rational>;

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for ((i, j), c) in a {
        for ((k, l), d) in b {
            *out.entry((i + k, j + l))
                .or_insert_with(|| Rational::from_integer(0.into())) += c * d;
        }
    }
    out.retain(|_, c| *c != Rational::from_integer(0.into()));
    out
}

fn linear(cx: i64, cy: i64, c: Rational) -> Poly {
    let mut p = Poly::new();
    for (k, v) in [
        ((1, 0), Rational::from_integer(cx.into())),
        ((0, 1), Rational::from_integer(cy.into())),
        ((0, 0), c),
    ] {
        if v != Rational::from_integer(0.into()) {
            p.insert(k, v);
        }
    }
    p
}

/// `prod (x + a_i) prod (y + b_j) prod (y - x + c_k) - 1` with fixed generic rational offsets.
pub fn generic_curve(n1: usize, n2: usize, n3: usize) -> BTreeMap<(i64, i64), Rational> {
    let r = |n: i64, d: i64| Rational::new(n.into(), d.into());
    let mut f = Poly::from([((0, 0), r(1, 1))]);
    for i in 0..n1 as i64 {
        f = poly_mul(&f, &linear(1, 0, r(2 * i + 1, 3)));
    }
    for j in 0..n2 as i64 {
        f = poly_mul(&f, &linear(0, 1, r(3 * j + 2, 5)));
    }
    for k in 0..n3 as i64 {
        f = poly_mul(&f, &linear(-1, 1, r(5 * k + 4, 7)));
    }
    *f.entry((0, 0)).or_insert_with(|| r(0, 1)) -= r(1, 1);
    f.retain(|_, c| *c != r(0, 1));
    f
}

/// `dim W - dim (W ∩ f Q[x, y])` for the concrete curve `f` of [`generic_curve`]: the dimension
/// of the span of the quadratic combinations as functions on the curve.
pub fn quadratic_span_on_curve(n1: usize, n2: usize, n3: usize) -> Result<usize> {
    check_triple(n1, n2, n3)?;
    let (_, w, _) = ranges(n1, n2, n3);
    let space = MonomialSpace::new(w[0], w[1], w[2]);
    let f = generic_curve(n1, n2, n3);
    let deg_f = (n1 + n2 + n3) as i64;
    let deg_w = space.columns.iter().map(|(a, b)| a + b).max().unwrap_or(0);
    let mut multiples: Vec<Poly> = Vec::new();
    for d in 0..=(deg_w - deg_f) {
        for a in 0..=d {
            multiples.push(poly_mul(
                &f,
                &Poly::from([((a, d - a), Rational::from_integer(1.into()))]),
            ));
        }
    }
    let mut cols: BTreeMap<(i64, i64), usize> = space
        .columns
        .iter()
        .enumerate()
        .map(|(n, c)| (*c, n))
        .collect();
    for m in &multiples {
        for k in m.keys() {
            let n = cols.len();
            cols.entry(*k).or_insert(n);
        }
    }
    let widen = |row: &Vec<ExactScalar>| {
        let mut v = row.clone();
        v.resize(cols.len(), ExactScalar::zero());
        v
    };
    let w_rows: Vec<Vec<ExactScalar>> = space.rows.iter().map(widen).collect();
    let f_rows: Vec<Vec<ExactScalar>> = multiples
        .iter()
        .map(|m| {
            let mut v = vec![ExactScalar::zero(); cols.len()];
            for (k, c) in m {
                v[cols[k]] = ExactScalar::from_rational(c.clone());
            }
            v
        })
        .collect();
    let rank_w = exact_rank(w_rows.clone())?;
    let n_f = f_rows.len();
    let rank_sum = exact_rank(w_rows.into_iter().chain(f_rows).collect())?;
    // multiplication by f is injective, so dim (f P) is the number of multiples
    let relations = rank_w + n_f - rank_sum;
    Ok(rank_w - relations)
}

/// `N2 = N3 = 1`, or `N2 = 2` and `N3 = 0`.
pub fn classification(_n1: usize, n2: usize, n3: usize) -> bool {
    (n2 == 1 && n3 == 1) || (n2 == 2 && n3 == 0)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HyperellipticRow {
    pub n: [usize; 3],
    pub genus: usize,
    pub dim: usize,
    pub two_g_minus_1: usize,
    pub excess: i64,
    pub closed_genus: i64,
    pub closed_excess: i64,
    /// Quadratic span modulo the curve equation, computed on a concrete curve.
    pub span_on_curve: usize,
    pub hyperelliptic: bool,
}

impl HyperellipticRow {
    /// Rank computation agrees with the closed forms for the genus and for `dim W - dim U - (2g - 1)`.
    pub fn consistent(&self) -> bool {
        self.genus as i64 == self.closed_genus && self.excess == self.closed_excess
    }

    /// The on-curve span satisfies `2g - 1 <= span <= 3g - 3` (for `g >= 2`) and never exceeds `dim W - dim U`.
    pub fn noether_bounds_hold(&self) -> bool {
        let g = self.genus;
        let upper = if g >= 2 { 3 * g - 3 } else { 1 };
        self.span_on_curve >= 2 * g - 1
            && self.span_on_curve <= upper
            && self.span_on_curve <= self.dim
    }
}

pub fn row(n1: usize, n2: usize, n3: usize) -> Result<HyperellipticRow> {
    let g = holomorphic_count(n1, n2, n3)?;
    let dim = quadratic_span_dim(n1, n2, n3)?;
    let excess = dim as i64 - (2 * g as i64 - 1);
    let span_on_curve = quadratic_span_on_curve(n1, n2, n3)?;
    Ok(HyperellipticRow {
        n: [n1, n2, n3],
        genus: g,
        dim,
        two_g_minus_1: 2 * g - 1,
        excess,
        closed_genus: genus_closed_form(n1, n2, n3),
        closed_excess: excess_closed_form(n1, n2, n3),
        span_on_curve,
        hyperelliptic: span_on_curve == 2 * g - 1,
    })
}

/// Decides hyperellipticity from the on-curve span and insists that the closed forms, the
/// Noether bounds and the classification agree.
pub fn is_hyperelliptic(n1: usize, n2: usize, n3: usize) -> Result<bool> {
    let r = row(n1, n2, n3)?;
    if !r.noether_bounds_hold() {
        return Err(Error::Internal(format!(
            "quadratic span outside the Noether bounds: {r:?}"
        )));
    }
    if !r.consistent()
        || r.hyperelliptic != classification(n1, n2, n3)
        || r.hyperelliptic != (r.excess == 0)
    {
        return Err(Error::Internal(format!(
            "rank computation disagrees with the closed forms: {r:?}"
        )));
    }
    Ok(r.hyperelliptic)
}

/// All `N1 >= N2 >= N3 >= 0` with `N1 <= n1_max` and positive genus.
pub fn table(n1_max: usize) -> Result<Vec<HyperellipticRow>> {
    let mut triples = Vec::new();
    for n1 in 1..=n1_max {
        for n2 in 1..=n1 {
            for n3 in 0..=n2 {
                if genus_closed_form(n1, n2, n3) >= 1 {
                    triples.push((n1, n2, n3));
                }
            }
        }
    }
    triples
        .into_par_iter()
        .map(|(a, b, c)| row(a, b, c))
        .collect()
}

pub fn table_csv(rows: &[HyperellipticRow]) -> String {
    let mut s = String::from("N1,N2,N3,g,dim,2g-1,span_on_curve,hyperelliptic\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n[0],
            r.n[1],
            r.n[2],
            r.genus,
            r.dim,
            r.two_g_minus_1,
            r.span_on_curve,
            r.hyperelliptic
        ));
    }
    s
}
