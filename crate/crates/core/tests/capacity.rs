mod common;

use common::{kernels, rng};
use expcap::capacity::*;
use expcap::grid::Shape;
use expcap::measure::BoundaryMeasure;
use proptest::prelude::*;
use rand::Rng;

fn opts() -> CapacityOptions {
    CapacityOptions::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn weak_duality_interior(seed in 0u64..10_000) {
        let ks = kernels(Shape::Square, 16);
        let g = ks.grid();
        let mut r = rng(seed);
        let pts: Vec<[f64; 2]> = (0..r.gen_range(1..4)).map(|_| [r.gen_range(0.25..0.75), r.gen_range(0.25..0.75)]).collect();
        let k = CompactSet::interior_points(g, &pts, "random").unwrap();
        let est = estimate_interior(&k, &ks, &opts()).unwrap();
        prop_assert!(est.dual_value <= est.primal_value + 1e-8, "{} > {}", est.dual_value, est.primal_value);
        prop_assert!(est.dual_value > 0.0);
    }

    #[test]
    fn weak_duality_boundary(seed in 0u64..10_000) {
        let ks = kernels(Shape::Square, 16);
        let g = ks.grid();
        let mut r = rng(seed);
        let side = r.gen_range(0.2..0.8);
        let point = match r.gen_range(0..4) { 0 => [side, 0.0], 1 => [side, 1.0], 2 => [0.0, side], _ => [1.0, side] };
        let k = CompactSet::boundary_arc(g, point, r.gen_range(0..3), "arc").unwrap();
        let est = estimate_boundary(&k, &ks, &opts()).unwrap();
        prop_assert!(est.dual_value <= est.primal_value + 1e-8);
    }

    #[test]
    fn pairing_is_symmetric_in_order(seed in 0u64..10_000) {
        let ks = kernels(Shape::Square, 20);
        let g = ks.grid();
        let mut r = rng(seed);
        let eta: Vec<f64> = (0..g.num_boundary()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let mu = BoundaryMeasure::from_density((0..g.num_boundary()).map(|_| r.gen_range(0.0..1.0)).collect())
            .with_atom(r.gen_range(0..g.num_boundary()), 0.5);
        let (a, b) = pairing(&eta, &mu, &ks).unwrap();
        prop_assert!((a - b).abs() < 1e-9 * a.abs().max(1.0));
        let bound = boundary_potential_norm(&mu, &ks).unwrap() * boundary_norm(&eta, &ks).unwrap();
        prop_assert!(a.abs() <= bound * (1.0 + 1e-9));
    }
}

#[test]
fn capacity_grows_with_the_set() {
    let ks = kernels(Shape::Square, 20);
    let g = ks.grid();
    let one = CompactSet::interior_points(g, &[[0.5, 0.5]], "one").unwrap();
    let two = CompactSet::interior_points(g, &[[0.5, 0.5], [0.6, 0.5]], "two").unwrap();
    let seg = CompactSet::interior_segment(g, [0.4, 0.5], [0.7, 0.5], "segment").unwrap();
    let values: Vec<f64> = [&one, &two, &seg].iter().map(|k| primal_interior(k, &ks, &opts()).unwrap().value).collect();
    assert!(values.windows(2).all(|w| w[1] >= w[0] - 1e-8), "{values:?}");
    let duals: Vec<f64> = [&one, &two, &seg].iter().map(|k| dual_interior(k, &ks, &opts()).unwrap().value).collect();
    assert!(duals.windows(2).all(|w| w[1] >= w[0] - 1e-8), "{duals:?}");

    let arcs: Vec<f64> = (0..3)
        .map(|r| primal_boundary(&CompactSet::boundary_arc(g, [0.5, 0.0], r, "arc").unwrap(), &ks, &opts()).unwrap().value)
        .collect();
    assert!(arcs.windows(2).all(|w| w[1] >= w[0] - 1e-8), "{arcs:?}");
    assert_eq!(primal_interior(&CompactSet::empty(SetKind::Interior, "none"), &ks, &opts()).unwrap().value, 0.0);
}

#[test]
fn singleton_duals_match_closed_form() {
    let ks = kernels(Shape::Square, 32);
    let g = ks.grid();
    let y = g.nearest_interior([0.4, 0.55]);
    let k = CompactSet::new(g, SetKind::Interior, vec![y], "y").unwrap();
    let closed = interior_singleton_closed_form(y, &ks).unwrap();
    let dual = dual_interior(&k, &ks, &opts()).unwrap().value;
    assert!((dual - closed).abs() / closed < 0.01, "{dual} vs {closed}");
    let b = g.nearest_boundary([0.5, 0.0]);
    let k = CompactSet::new(g, SetKind::Boundary, vec![b], "b").unwrap();
    let closed = boundary_singleton_closed_form(b, &ks).unwrap();
    let dual = dual_boundary(&k, &ks, &opts()).unwrap().value;
    assert!((dual - closed).abs() / closed < 0.01, "{dual} vs {closed}");
}

#[test]
fn singleton_primal_is_stable_under_refinement() {
    // a node at n = 32 covers the same area as the node and its four neighbours at n = 64
    let (k32, k64) = (kernels(Shape::Square, 32), kernels(Shape::Square, 64));
    let p32 = primal_interior(&CompactSet::interior_points(k32.grid(), &[[0.5, 0.5]], "c").unwrap(), &k32, &opts()).unwrap().value;
    let g = k64.grid();
    let c = g.nearest_interior([0.5, 0.5]);
    let mut nodes = vec![c];
    nodes.extend_from_slice(g.interior_neighbors(c));
    let p64 = primal_interior(&CompactSet::new(g, SetKind::Interior, nodes, "plus").unwrap(), &k64, &opts()).unwrap().value;
    let rel = (p64 - p32).abs() / p32;
    println!("p32 = {p32}, p64 = {p64}, relative change {rel}");
    assert!(rel < 0.02);
}

#[test]
fn chebyshev_inequality() {
    let ks = kernels(Shape::Square, 32);
    for (amp, lam) in [(1.0, 0.5), (1.0, 0.9), (3.0, 1.0), (0.5, 0.25)] {
        let eta = ks.grid().sample(|x| amp * (-((x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2)) / 0.02).exp());
        let rep = chebyshev_bound(&eta, lam, &ks, &opts()).unwrap();
        assert!(rep.holds, "{} > {}", rep.primal, rep.bound);
        assert!(!rep.level_set.is_empty());
    }
    assert!(chebyshev_bound(&vec![0.0; ks.grid().num_interior()], 0.0, &ks, &opts()).is_err());
}

#[test]
fn weak_l1_hessian_ratio_is_stable() {
    let ratio = |n: usize| {
        let ks = kernels(Shape::Square, n);
        let bump = |t: f64| if (t - 0.5).abs() < 0.3 { (std::f64::consts::PI * (t - 0.5) / 0.6).cos().powi(2) } else { 0.0 };
        let eta = ks.grid().sample(|x| bump(x[0]) * bump(x[1]));
        let (l, r) = weak_l1_hessian(&eta, &ks).unwrap();
        l / r
    };
    let (a, b) = (ratio(32), ratio(64));
    assert!(a < 1.0 && b < 1.0 && (a / b - 1.0).abs() < 0.1, "{a} {b}");
}

#[test]
fn rejects_sets_of_the_wrong_kind() {
    let ks = kernels(Shape::Square, 12);
    let g = ks.grid();
    let arc = CompactSet::boundary_arc(g, [0.5, 0.0], 0, "arc").unwrap();
    assert!(primal_interior(&arc, &ks, &opts()).is_err());
    let pt = CompactSet::interior_points(g, &[[0.5, 0.5]], "pt").unwrap();
    assert!(primal_boundary(&pt, &ks, &opts()).is_err());
}
