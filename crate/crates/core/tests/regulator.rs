mod common;

use std::f64::consts::PI;

use common::{cfg_a, cfg_b, cfg_c};
use k2reg::numerics::{EmbeddedConfig, GammaOptions, Tolerances};
use k2reg::regulator::{
    limit_sweep, local_model_sweep, quadratic_field_regulator, regulator_matrix, relation_pairings,
    sweep_csv, theorem_elements, LocalModelSpec, QuadraticVariant, RegulatorOptions,
    RegulatorReport,
};
use k2reg::{Embedding, ExactScalar, LineConfiguration};
use num_complex::Complex64 as C;

fn report(cfg: &LineConfiguration, t: f64, seed: u64, opts: &RegulatorOptions) -> RegulatorReport {
    let emb = EmbeddedConfig::from_config(cfg, Embedding::Plus, seed)
        .unwrap()
        .with_t(C::new(t, 0.0))
        .unwrap();
    regulator_matrix(&emb, &theorem_elements(cfg).unwrap(), opts).unwrap()
}

fn max_diff(a: &[Vec<f64>], b: &[Vec<f64>], f: impl Fn(f64) -> f64) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - f(*y)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn pairing_independent_of_loop_radius() {
    let opts = RegulatorOptions::default();
    let base = report(&cfg_b(), 1e-6, 0, &opts);
    let r = base.loops[0].radius;
    let small = RegulatorOptions {
        gamma: GammaOptions {
            radius: Some(0.6 * r),
            ..GammaOptions::default()
        },
        ..opts
    };
    let other = report(&cfg_b(), 1e-6, 0, &small);
    assert!(max_diff(&base.matrix, &other.matrix, |v| v) < 1e-8);
}

#[test]
fn reversing_loops_negates_matrix() {
    let opts = RegulatorOptions::default();
    let fwd = report(&cfg_a(), 1e-5, 0, &opts);
    let rev_opts = RegulatorOptions {
        gamma: GammaOptions {
            orientation: -1,
            ..GammaOptions::default()
        },
        ..opts
    };
    let rev = report(&cfg_a(), 1e-5, 0, &rev_opts);
    assert!(max_diff(&fwd.matrix, &rev.matrix, |v| -v) < 1e-9);
}

#[test]
fn projection_choice_does_not_change_pairings() {
    let opts = RegulatorOptions::default();
    let a = report(&cfg_c(), 1e-6, 0, &opts);
    let b = report(&cfg_c(), 1e-6, 3, &opts);
    assert!(
        max_diff(&a.matrix, &b.matrix, |v| v) < 1e-7,
        "{:?}\n{:?}",
        a.matrix,
        b.matrix
    );
}

#[test]
fn entries_grow_like_log_t_on_the_diagonal_only() {
    // each loop meets its own element in a node of type xy = t, so only the diagonal picks up
    // ±log|t| and the rest converges
    let opts = RegulatorOptions::default();
    let near = report(&cfg_c(), 1e-6, 0, &opts);
    let far = report(&cfg_c(), 1e-9, 0, &opts);
    let step = (1e-9f64).ln() - (1e-6f64).ln();
    for i in 0..4 {
        for j in 0..4 {
            let d = far.matrix[i][j] - near.matrix[i][j];
            if i == j {
                assert!((d.abs() - step.abs()).abs() < 1e-4, "({i},{j}) {d}");
            } else {
                assert!(d.abs() < 1e-4, "({i},{j}) {d}");
            }
        }
    }
}

#[test]
fn deep_parameters_follow_the_same_asymptotics() {
    // line values of size |t| come from the curve equation, so |t| far below double precision works
    let opts = RegulatorOptions::default();
    let base = report(&cfg_c(), 1e-8, 0, &opts);
    let deep = report(&cfg_c(), 1e-60, 0, &opts);
    let step = (1e-60f64).ln() - (1e-8f64).ln();
    for i in 0..4 {
        for j in 0..4 {
            let d = deep.matrix[i][j] - base.matrix[i][j];
            let want = if i == j { step.abs() * d.signum() } else { 0.0 };
            assert!((d - want).abs() < 1e-6, "({i},{j}) {d}");
        }
    }
    assert!((deep.normalized - 1.0).abs() < (base.normalized - 1.0).abs() / 3.0);
}

#[test]
fn genus_one_sweeps_converge_monotonically() {
    let opts = RegulatorOptions::default();
    for cfg in [cfg_a(), cfg_b()] {
        let reps = limit_sweep(&cfg, 0, &[1e-4, 1e-6, 1e-8, 1e-10], &opts).unwrap();
        let dev: Vec<f64> = reps.iter().map(|r| (r.normalized - 1.0).abs()).collect();
        assert!(dev.windows(2).all(|w| w[1] < w[0]), "{dev:?}");
        assert!(dev[3] < 1e-3);
        // genus one: the single entry is the determinant
        for r in &reps {
            assert!((r.matrix[0][0].abs() - r.abs_det).abs() < 1e-12);
            assert!((r.normalized - r.abs_det / r.t.abs().ln().abs()).abs() < 1e-12);
        }
        let csv = sweep_csv(&reps);
        assert_eq!(csv.lines().count(), 5);
    }
}

#[test]
fn relation_pairings_vanish_on_cfg_c() {
    let emb = EmbeddedConfig::from_config(&cfg_c(), Embedding::Plus, 0).unwrap();
    let rows = relation_pairings(&emb, &RegulatorOptions::default()).unwrap();
    assert!(!rows.is_empty());
    let worst = rows.iter().map(|r| r.value.abs()).fold(0.0, f64::max);
    assert!(worst < 1e-7, "{worst}");
}

#[test]
fn local_model_matches_closed_form() {
    let tol = Tolerances::default();
    let r = local_model_sweep(&LocalModelSpec::monomial(1, 1), &[1e-2, 1e-4], &tol).unwrap();
    for (t, v) in r.t.iter().zip(&r.values) {
        assert!((v - 2.0 * PI * t.ln()).abs() < 1e-6, "{t} {v}");
    }
    for (a, b) in [(2, 1), (1, 3), (2, 2)] {
        let r =
            local_model_sweep(&LocalModelSpec::monomial(a, b), &[1e-3, 1e-5, 1e-7], &tol).unwrap();
        assert!(
            (r.slope - 2.0 * PI * (a * b) as f64).abs() < 1e-4,
            "{a} {b} {}",
            r.slope
        );
    }
}

#[test]
fn local_model_constant_term_from_h() {
    // xyh = t with constant h0: the value shifts by a log|h0| term but the slope is unchanged
    let tol = Tolerances::default();
    let mut spec = LocalModelSpec::monomial(1, 1);
    spec.h0 = C::new(3.0, 0.0);
    let r = local_model_sweep(&spec, &[1e-3, 1e-5], &tol).unwrap();
    assert!((r.slope - 2.0 * PI).abs() < 1e-6);
    let shift = r.remainders[0];
    assert!((r.remainders[1] - shift).abs() < 1e-6);
    assert!((shift.abs() - 2.0 * PI * 3f64.ln()).abs() < 1e-6, "{shift}");
}

#[test]
fn quadratic_units_exact_and_regulator_near_limit() {
    let tol = Tolerances::default();
    for a in [1000i64, 10_000, 12_345] {
        let rep = quadratic_field_regulator(&QuadraticVariant::Part1 { a }, &tol).unwrap();
        let e1: ExactScalar = rep.eps[0].parse().unwrap();
        let e2: ExactScalar = rep.eps[1].parse().unwrap();
        assert_eq!(e1.checked_mul(&e2).unwrap(), ExactScalar::from_int(4));
        assert_eq!(e1.checked_add(&e2).unwrap(), ExactScalar::from_int(a));
    }
    let rep = quadratic_field_regulator(&QuadraticVariant::Part1 { a: 1_000_000 }, &tol).unwrap();
    assert_eq!(rep.limit, 16.0);
    assert!(
        (rep.normalized / 16.0 - 1.0).abs() < 0.08,
        "{}",
        rep.normalized
    );
}
