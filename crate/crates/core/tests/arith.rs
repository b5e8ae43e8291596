use k2reg::arith::linalg::exact_rank;
use k2reg::{Embedding, ExactScalar, Rational};
use num_bigint::BigInt;
use proptest::prelude::*;
use std::str::FromStr;

fn q(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// `a + b sqrt(d)` with small coefficients; `d = 1` gives a rational.
fn scalar(d: i64) -> impl Strategy<Value = ExactScalar> {
    (-20i64..=20, 1i64..=9, -20i64..=20, 1i64..=9).prop_map(move |(a, ad, b, bd)| {
        if d == 1 {
            ExactScalar::from_rational(q(a, ad) + q(b, bd))
        } else {
            ExactScalar::new(q(a, ad), q(b, bd), BigInt::from(d)).unwrap()
        }
    })
}

fn field_axioms(a: &ExactScalar, b: &ExactScalar, c: &ExactScalar) {
    let add = |x: &ExactScalar, y: &ExactScalar| x.checked_add(y).unwrap();
    let mul = |x: &ExactScalar, y: &ExactScalar| x.checked_mul(y).unwrap();
    assert_eq!(add(a, b), add(b, a));
    assert_eq!(mul(a, b), mul(b, a));
    assert_eq!(add(&add(a, b), c), add(a, &add(b, c)));
    assert_eq!(mul(&mul(a, b), c), mul(a, &mul(b, c)));
    assert_eq!(mul(a, &add(b, c)), add(&mul(a, b), &mul(a, c)));
    assert_eq!(a.checked_sub(a).unwrap(), ExactScalar::zero());
    if !a.is_zero() {
        assert!(mul(a, &a.inv().unwrap()).is_one());
        assert_eq!(mul(&b.checked_div(a).unwrap(), a), *b);
        // norm is multiplicative and equals a * conj(a)
        assert_eq!(mul(a, &a.conjugate()), ExactScalar::from_rational(a.norm()));
        assert_eq!(mul(a, b).norm(), a.norm() * b.norm());
    } else {
        assert!(a.inv().is_err());
    }
}

proptest! {
    #[test]
    fn rational_field_axioms(a in scalar(1), b in scalar(1), c in scalar(1)) {
        field_axioms(&a, &b, &c);
    }

    #[test]
    fn quadratic_field_axioms(a in scalar(5), b in scalar(5), c in scalar(5)) {
        field_axioms(&a, &b, &c);
    }

    #[test]
    fn embeddings_are_ring_maps(a in scalar(2), b in scalar(2)) {
        for emb in [Embedding::Plus, Embedding::Minus] {
            let s = a.to_f64(emb) + b.to_f64(emb);
            let p = a.to_f64(emb) * b.to_f64(emb);
            prop_assert!((a.checked_add(&b).unwrap().to_f64(emb) - s).abs() <= 1e-12 * (1.0 + s.abs()));
            prop_assert!((a.checked_mul(&b).unwrap().to_f64(emb) - p).abs() <= 1e-12 * (1.0 + p.abs()));
        }
        prop_assert_eq!(a.conjugate().to_f64(Embedding::Plus), a.to_f64(Embedding::Minus));
    }

    #[test]
    fn pow_agrees_with_repeated_product(a in scalar(3), e in -4i64..=6) {
        if a.is_zero() && e < 0 {
            prop_assert!(a.pow(e).is_err());
        } else {
            let mut acc = ExactScalar::one();
            let base = if e < 0 { a.inv().unwrap() } else { a.clone() };
            for _ in 0..e.abs() {
                acc = acc.checked_mul(&base).unwrap();
            }
            prop_assert_eq!(a.pow(e).unwrap(), acc);
        }
    }

    #[test]
    fn display_parse_round_trip(a in scalar(7)) {
        prop_assert_eq!(ExactScalar::from_str(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn rank_matches_product_construction(r in 0usize..4, seed in 0u64..1000) {
        // rows of an (r x 4)(4 x 5) product with generic factors have rank r
        let mut x = seed;
        let mut next = || { x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407); ((x >> 33) % 17) as i64 - 8 };
        let left: Vec<Vec<i64>> = (0..6).map(|_| (0..r).map(|_| next()).collect()).collect();
        let right: Vec<Vec<i64>> = (0..r).map(|_| (0..5).map(|_| next()).collect()).collect();
        let rows: Vec<Vec<ExactScalar>> = left
            .iter()
            .map(|l| (0..5).map(|c| ExactScalar::from_int((0..r).map(|k| l[k] * right[k][c]).sum::<i64>())).collect())
            .collect();
        prop_assert!(exact_rank(rows).unwrap() <= r);
    }
}

#[test]
fn mixed_fields_rejected() {
    let a = ExactScalar::sqrt_of(2).unwrap();
    let b = ExactScalar::sqrt_of(3).unwrap();
    assert!(a.checked_add(&b).is_err());
    assert!(a.checked_mul(&b).is_err());
}

#[test]
fn parses_decimal_and_surd_forms() {
    assert_eq!(
        ExactScalar::from_str("1e-4").unwrap(),
        ExactScalar::from_ratio(1, 10000)
    );
    assert_eq!(
        ExactScalar::from_str("1/10000").unwrap(),
        ExactScalar::from_ratio(1, 10000)
    );
    let s = ExactScalar::from_str("sqrt(5)").unwrap();
    assert_eq!(s.checked_mul(&s).unwrap(), ExactScalar::from_int(5));
    assert!(ExactScalar::from_str("abc").is_err());
}

#[test]
fn integrality_by_trace_and_norm() {
    let phi = ExactScalar::new(q(1, 2), q(1, 2), BigInt::from(5)).unwrap();
    assert!(phi.is_algebraic_integer());
    let half = ExactScalar::new(q(1, 2), q(1, 2), BigInt::from(3)).unwrap();
    assert!(!half.is_algebraic_integer());
    assert!(ExactScalar::from_int(7).is_algebraic_integer());
    assert!(!ExactScalar::from_ratio(7, 2).is_algebraic_integer());
}

#[test]
fn rank_of_known_matrices() {
    let m = |v: &[&[i64]]| {
        v.iter()
            .map(|r| r.iter().map(|&x| ExactScalar::from_int(x)).collect())
            .collect::<Vec<Vec<_>>>()
    };
    assert_eq!(
        exact_rank(m(&[&[1, 2, 3], &[2, 4, 6], &[1, 0, 1]])).unwrap(),
        2
    );
    assert_eq!(exact_rank(m(&[&[0, 0], &[0, 0]])).unwrap(), 0);
    assert_eq!(
        exact_rank(m(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]])).unwrap(),
        3
    );
}
