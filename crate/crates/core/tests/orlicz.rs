mod common;

use common::{big_p, big_pstar, luxemburg_oracle, rng};
use expcap::grid::{Shape, WeightKind, WeightedGrid};
use expcap::orlicz::*;
use proptest::prelude::*;
use rand::Rng;

fn exp() -> NFunction {
    NFunction::exponential()
}

fn field_and_weights() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..24).prop_flat_map(|len| {
        (prop::collection::vec(-8.0f64..8.0, len), prop::collection::vec(0.01f64..1.0, len))
    })
}

proptest! {
    #[test]
    fn densities_invert_each_other(x in -20.0f64..20.0) {
        let n = exp();
        prop_assert!((n.density_pbar(n.density_p(x)) - x).abs() < 1e-10);
    }

    #[test]
    fn young_gap_nonnegative(x in -10.0f64..10.0, y in -10.0f64..10.0) {
        prop_assert!(young_gap(x, y) >= -1e-12);
    }

    #[test]
    fn young_equality_on_the_graph(x in -5.0f64..5.0) {
        let n = exp();
        prop_assert!(young_gap(x, n.density_p(x)).abs() < 1e-9 * (1.0 + x.abs().exp()));
    }

    #[test]
    fn pstar_sandwich_holds(a in -1e3f64..1e3) {
        let (lo, mid, hi) = pstar_sandwich(a);
        prop_assert!(lo <= mid * (1.0 + 1e-12) + 1e-300 && mid <= hi * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn luxemburg_homogeneous((f, w) in field_and_weights(), c in -5.0f64..5.0) {
        let n = exp();
        let a = luxemburg_norm_weighted(&f, &w, &n, Side::P).unwrap();
        let cf: Vec<f64> = f.iter().map(|v| c * v).collect();
        let b = luxemburg_norm_weighted(&cf, &w, &n, Side::P).unwrap();
        prop_assert!((b - c.abs() * a).abs() <= 1e-10 * (1.0 + b));
    }

    #[test]
    fn luxemburg_triangle((f, w) in field_and_weights(), seed in 0u64..1000) {
        let mut r = rng(seed);
        let g: Vec<f64> = f.iter().map(|_| r.gen_range(-8.0..8.0)).collect();
        let n = exp();
        for side in [Side::P, Side::PStar] {
            let s: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
            let ns = luxemburg_norm_weighted(&s, &w, &n, side).unwrap();
            let nf = luxemburg_norm_weighted(&f, &w, &n, side).unwrap();
            let ng = luxemburg_norm_weighted(&g, &w, &n, side).unwrap();
            prop_assert!(ns <= nf + ng + 1e-9);
        }
    }

    #[test]
    fn luxemburg_matches_bisection_oracle((f, w) in field_and_weights()) {
        prop_assume!(f.iter().any(|v| *v != 0.0));
        let a = luxemburg_norm_weighted(&f, &w, &exp(), Side::P).unwrap();
        let b = luxemburg_oracle(&f, &w, big_p);
        prop_assert!((a - b).abs() < 1e-9 * b);
        let a = luxemburg_norm_weighted(&f, &w, &exp(), Side::PStar).unwrap();
        let b = luxemburg_oracle(&f, &w, big_pstar);
        prop_assert!((a - b).abs() < 1e-9 * b);
    }

    #[test]
    fn euler_identity((f, w) in field_and_weights()) {
        prop_assume!(f.iter().any(|v| v.abs() > 1e-3));
        let n = exp();
        for side in [Side::P, Side::PStar] {
            let norm = luxemburg_norm_weighted(&f, &w, &n, side).unwrap();
            let g = luxemburg_subgradient_weighted(&f, &w, &n, side).unwrap();
            let pair: f64 = g.iter().zip(&f).map(|(a, b)| a * b).sum();
            prop_assert!((pair - norm).abs() < 1e-8 * (1.0 + norm));
        }
    }

    #[test]
    fn luxemburg_below_orlicz_below_twice((f, w) in field_and_weights()) {
        prop_assume!(f.iter().any(|v| *v != 0.0));
        let n = exp();
        for side in [Side::P, Side::PStar] {
            let l = luxemburg_norm_weighted(&f, &w, &n, side).unwrap();
            let o = orlicz_norm_weighted(&f, &w, &n, side).unwrap();
            prop_assert!(l <= o * (1.0 + 1e-9) && o <= 2.0 * l * (1.0 + 1e-9));
        }
    }
}

#[test]
fn young_closed_form_matches_brute_force_supremum() {
    // P*(y) = sup_x (x y - P(x)), maximized on a fine grid
    for y in [0.3, 1.0, 2.5, 7.0] {
        let sup = (0..400_000).map(|i| i as f64 * 1e-5).map(|x| x * y - big_p(x)).fold(f64::MIN, f64::max);
        assert!((sup - exp().eval_pstar(y)).abs() < 1e-8, "y = {y}");
    }
    assert!((young_gap(1.0, 1.0) - 0.104_576_189_578_935_4).abs() < 1e-14);
}

#[test]
fn q_bounded_by_r_log() {
    let c = (1..=100_000)
        .map(|i| i as f64 * 1e-2)
        .map(|r| q_function(r) / (r * r.ln_1p()))
        .fold(0.0, f64::max);
    // the supremum is approached as r -> 0, where Q ~ r² and r ln(1+r) ~ r²
    assert!(c <= 1.0 + 1e-9 && c > 0.99, "C = {c}");
    assert!((q_function(10.0) - 21.967_3).abs() < 1e-3);
}

#[test]
fn frozen_norms_of_a_three_point_field() {
    // mpmath oracle at 40 digits
    let f = [1.0, 2.0, 3.0];
    let w = [0.1; 3];
    let n = exp();
    let cases = [
        (luxemburg_norm_weighted(&f, &w, &n, Side::P).unwrap(), 1.266_487_347_845_366_8),
        (luxemburg_norm_weighted(&f, &w, &n, Side::PStar).unwrap(), 0.589_396_355_505_402_4),
        (orlicz_norm_weighted(&f, &w, &n, Side::P).unwrap(), 2.417_438_861_260_943_8),
        (orlicz_norm_weighted(&f, &w, &n, Side::PStar).unwrap(), 1.132_977_936_392_882_2),
    ];
    for (got, want) in cases {
        assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
    }
}

#[test]
fn quadratic_pair_reduces_to_l2() {
    let mut r = rng(11);
    let g = WeightedGrid::build(Shape::Square, 16).unwrap();
    let q = NFunction::quadratic();
    for _ in 0..100 {
        let f: Vec<f64> = (0..g.num_interior()).map(|_| r.gen_range(-3.0..3.0)).collect();
        let wf = WeightedField::new(f.clone(), WeightKind::Rho);
        let l2 = (g.integrate(&f.iter().map(|v| v * v).collect::<Vec<_>>(), WeightKind::Rho)).sqrt();
        let lux = luxemburg_norm(&wf, &g, &q, Side::P).unwrap();
        assert!((lux - l2 / 2f64.sqrt()).abs() < 1e-10 * (1.0 + l2));
    }
}

#[test]
fn subgradient_matches_central_differences_on_nine_nodes() {
    let g = WeightedGrid::build(Shape::Interval, 9).unwrap();
    let n = exp();
    let mut r = rng(5);
    for _ in 0..20 {
        let f: Vec<f64> = (0..9).map(|_| r.gen_range(-4.0..4.0)).collect();
        let d: Vec<f64> = (0..9).map(|_| r.gen_range(-1.0..1.0)).collect();
        let wf = WeightedField::new(f.clone(), WeightKind::Lebesgue);
        let s = luxemburg_subgradient(&wf, &g, &n, Side::P).unwrap();
        let eps = 1e-5;
        let at = |t: f64| {
            let v: Vec<f64> = f.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            luxemburg_norm(&WeightedField::new(v, WeightKind::Lebesgue), &g, &n, Side::P).unwrap()
        };
        let fd = (at(eps) - at(-eps)) / (2.0 * eps);
        let an: f64 = s.values.iter().zip(&d).map(|(a, b)| a * b).sum();
        assert!((fd - an).abs() < 1e-6 * an.abs().max(1e-3), "fd {fd} vs {an}");
    }
}

#[test]
fn holder_young_on_random_pairs() {
    let g = WeightedGrid::build(Shape::Square, 16).unwrap();
    let mut r = rng(99);
    for _ in 0..1000 {
        let scale = r.gen_range(0.1..4.0);
        let f: Vec<f64> = (0..g.num_interior()).map(|_| scale * r.gen_range(-1.0..1.0)).collect();
        let h: Vec<f64> = (0..g.num_interior()).map(|_| r.gen_range(-3.0..3.0)).collect();
        let (lhs, rhs) = holder_young_pairing(
            &WeightedField::new(f, WeightKind::Lebesgue),
            &WeightedField::new(h, WeightKind::Lebesgue),
            &g,
        )
        .unwrap();
        assert!(lhs <= rhs * (1.0 + 1e-10));
    }
    let z = WeightedField::new(vec![0.0; g.num_interior()], WeightKind::Lebesgue);
    assert_eq!(holder_young_pairing(&z, &z, &g).unwrap(), (0.0, 0.0));
}

#[test]
fn quadratic_constants_saturate_cauchy_schwarz() {
    let g = WeightedGrid::build(Shape::Square, 8).unwrap();
    let f = WeightedField::new(vec![2.0; g.num_interior()], WeightKind::Lebesgue);
    let h = WeightedField::new(vec![3.0; g.num_interior()], WeightKind::Lebesgue);
    let (lhs, rhs) = holder_young_pairing_with(&f, &h, &g, &NFunction::quadratic()).unwrap();
    assert!(lhs <= rhs * (1.0 + 1e-12));
    assert!((lhs - rhs).abs() < 1e-10 * rhs);
}
