mod common;

use common::*;
use k2reg::symbols::{generator_list, K2Symbol, Monomial};
use k2reg::tame::{
    ord_monomial, places, product_formula_check, tame_symbol, value_at, verify_k2t, InfinitePlace,
};
use k2reg::{ExactScalar, LineConfiguration, LineId};
use proptest::prelude::*;

/// Numerical branch expansion: walk out along `L_{i,j} = delta` with `s -> infinity`,
/// solving `lambda prod L = 1` for `delta`, and extrapolate the monomial value in `1/s`.
fn numeric_value(cfg: &LineConfiguration, place: InfinitePlace, m: &Monomial) -> f64 {
    let lam = cfg.lambda().to_f64_plus();
    let g = &cfg.groups()[place.0.group];
    let (a, b) = (g.a.to_f64_plus(), g.b.to_f64_plus());
    let c = cfg.offset(place.0).to_f64_plus();
    let nn = a * a + b * b;
    let eval_line = |id: LineId, x: f64, y: f64| {
        let (la, lb, lc) = cfg.line(id);
        la.to_f64_plus() * x + lb.to_f64_plus() * y + lc.to_f64_plus()
    };
    let at = |s: f64| {
        let base = (-c * a / nn - s * b, -c * b / nn + s * a);
        let mut delta = 0.0;
        for _ in 0..50 {
            let (x, y) = (base.0 + delta * a / nn, base.1 + delta * b / nn);
            let others: f64 = cfg
                .line_ids()
                .into_iter()
                .filter(|l| *l != place.0)
                .map(|l| eval_line(l, x, y))
                .product();
            delta = 1.0 / (lam * others);
        }
        let (x, y) = (base.0 + delta * a / nn, base.1 + delta * b / nn);
        let mut v = m.constant.to_f64_plus();
        for (id, e) in &m.factors {
            let l = id.as_line().unwrap();
            let val = if l == place.0 {
                delta
            } else {
                eval_line(l, x, y)
            };
            v *= val.powi(*e as i32);
        }
        v
    };
    let s = 2000.0;
    let (v1, v2, v4) = (at(s), at(2.0 * s), at(4.0 * s));
    // Richardson in 1/s, two levels
    let r1 = 2.0 * v2 - v1;
    let r2 = 2.0 * v4 - v2;
    (4.0 * r2 - r1) / 3.0
}

/// Tame symbol by repeated `{f, g} -> {f g^{-q}, g}` until one entry is a unit.
fn euclidean_tame(
    cfg: &LineConfiguration,
    place: InfinitePlace,
    f: &Monomial,
    g: &Monomial,
) -> ExactScalar {
    let mut f = f.clone();
    let mut g = g.clone();
    let mut sign = 1i64;
    loop {
        let of = ord_monomial(cfg, place, &f).unwrap();
        let og = ord_monomial(cfg, place, &g).unwrap();
        if of == 0 {
            let v = value_at(cfg, place, &f).unwrap().pow(og).unwrap();
            return if sign < 0 { -v } else { v };
        }
        if og == 0 {
            let v = value_at(cfg, place, &g).unwrap().pow(-of).unwrap();
            return if sign < 0 { -v } else { v };
        }
        if of.abs() >= og.abs() {
            // {f, g} = {f g^{-q}, g} + q {g, g} and T{g, g} = (-1)^{ord g}
            let q = of / og;
            f = f.mul(&g.pow(-q).unwrap()).unwrap();
            if (q * og).rem_euclid(2) == 1 {
                sign = -sign;
            }
        } else {
            let q = og / of;
            g = g.mul(&f.pow(-q).unwrap()).unwrap();
            if (q * of).rem_euclid(2) == 1 {
                sign = -sign;
            }
        }
    }
}

fn unit_monomials(cfg: &LineConfiguration, place: InfinitePlace, seed: u64) -> Vec<Monomial> {
    let ids = cfg.line_ids();
    let mut state = seed;
    let mut next = || {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        ((state >> 33) % 5) as i64 - 2
    };
    let mut out = Vec::new();
    while out.len() < 20 {
        let mut m = Monomial::constant(ExactScalar::from_ratio(next() * 2 + 7, 3));
        for id in &ids {
            m = m.mul(&Monomial::line(*id).pow(next()).unwrap()).unwrap();
        }
        // fix the order with the line of the place or another group's line
        let ord = ord_monomial(cfg, place, &m).unwrap();
        let other = ids
            .iter()
            .find(|l| l.group != place.0.group)
            .copied()
            .unwrap();
        let d = cfg.degree() as i64 - cfg.group_size(place.0.group) as i64;
        if ord % d == 0 {
            m = m
                .mul(&Monomial::line(place.0).pow(-ord / d).unwrap())
                .unwrap();
        } else {
            m = m.mul(&Monomial::line(other).pow(ord).unwrap()).unwrap();
        }
        assert_eq!(ord_monomial(cfg, place, &m).unwrap(), 0);
        out.push(m);
    }
    out
}

#[test]
fn value_at_matches_numerical_branch_expansion() {
    for (name, cfg) in all_small() {
        let cfg = cfg
            .with_parameter(k2reg::Parameter::Lambda(ExactScalar::from_int(3)))
            .unwrap();
        for (k, p) in places(&cfg).into_iter().enumerate() {
            for m in unit_monomials(&cfg, p, 17 + k as u64) {
                let exact = value_at(&cfg, p, &m).unwrap().to_f64_plus();
                let num = numeric_value(&cfg, p, &m);
                assert!(
                    (exact - num).abs() <= 1e-8 * (1.0 + exact.abs()),
                    "{name} {p} {m}: {exact} vs {num}"
                );
            }
        }
    }
}

#[test]
fn direct_formula_matches_euclidean_reduction() {
    let cfg = cfg_c();
    let ids = cfg.line_ids();
    for p in places(&cfg) {
        for a in &ids {
            for b in &ids {
                for c in &ids {
                    let f = Monomial::line_ratio(*a, *b);
                    let g = Monomial::line(*c)
                        .pow(2)
                        .unwrap()
                        .mul(&Monomial::line(*a))
                        .unwrap();
                    let direct =
                        tame_symbol(&cfg, &K2Symbol::pair(f.clone(), g.clone()), p).unwrap();
                    assert_eq!(direct, euclidean_tame(&cfg, p, &f, &g), "{p} {f} {g}");
                }
            }
        }
    }
}

#[test]
fn generators_pass_with_every_value_one() {
    for (_, cfg) in all_small().into_iter().chain([("four", cfg_four())]) {
        for e in generator_list(&cfg).unwrap() {
            let r = verify_k2t(&cfg, &e.symbol).unwrap();
            assert!(
                r.passed && r.per_place.iter().all(|v| v.value.is_one()),
                "{}",
                e.label
            );
        }
    }
}

fn monomial_strategy(n_lines: usize) -> impl Strategy<Value = (i64, Vec<i64>)> {
    (1i64..20, prop::collection::vec(-3i64..=3, n_lines))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn product_formula_for_random_symbols(
        which in 0usize..3,
        f in monomial_strategy(5),
        g in monomial_strategy(5),
        sign in prop::bool::ANY,
    ) {
        let cfg = [cfg_a(), cfg_b(), cfg_c()][which].clone();
        let ids = cfg.line_ids();
        let build = |(c, e): &(i64, Vec<i64>), neg: bool| {
            let mut m = Monomial::constant(ExactScalar::from_ratio(if neg { -*c } else { *c }, 7));
            for (id, k) in ids.iter().zip(e) {
                m = m.mul(&Monomial::line(*id).pow(*k).unwrap()).unwrap();
            }
            m
        };
        let sym = K2Symbol::pair(build(&f, sign), build(&g, false));
        prop_assert!(product_formula_check(&cfg, &sym).unwrap().is_one());
    }
}
