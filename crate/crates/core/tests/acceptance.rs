//! Runs the ten acceptance criteria in sequence and prints one line per criterion.
//! Known structural failures are reported as FAIL but do not abort the run; any
//! other failure exits nonzero.

mod common;

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use common::{kernels, rng};
use expcap::capacity::*;
use expcap::experiments::*;
use expcap::grid::{Shape, WeightKind, WeightedGrid};
use expcap::measure::{BoundaryMeasure, InteriorMeasure};
use expcap::orlicz::*;
use expcap::solver::*;
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn c1() -> Outcome {
    let n = NFunction::exponential();
    let mut r = rng(1);
    let mut worst_gap = f64::INFINITY;
    let mut worst_eq = 0.0_f64;
    let mut sandwich = true;
    for _ in 0..10_000 {
        let (x, y) = (r.gen_range(-10.0..10.0), r.gen_range(-10.0..10.0));
        worst_gap = worst_gap.min(young_gap(x, y));
        let x = r.gen_range(-5.0..5.0);
        worst_eq = worst_eq.max(young_gap(x, n.density_p(x)).abs());
        let a: f64 = r.gen_range(-1e3..1e3);
        let (lo, mid, hi) = pstar_sandwich(a);
        sandwich &= lo <= mid * (1.0 + 1e-12) && mid <= hi * (1.0 + 1e-12);
    }
    outcome(
        worst_gap >= -1e-12 && worst_eq < 1e-9 && sandwich,
        format!("min gap {worst_gap:.2e}, max equality error {worst_eq:.2e}, sandwich {sandwich}"),
    )
}

fn c2() -> Outcome {
    let g = WeightedGrid::build(Shape::Square, 16).unwrap();
    let (q, e) = (NFunction::quadratic(), NFunction::exponential());
    let w = g.weights(WeightKind::Rho);
    let mut r = rng(2);
    let (mut l2_err, mut hom_err, mut tri_err) = (0.0_f64, 0.0_f64, f64::NEG_INFINITY);
    for _ in 0..100 {
        let f: Vec<f64> = (0..g.num_interior()).map(|_| r.gen_range(-3.0..3.0)).collect();
        let h: Vec<f64> = (0..g.num_interior()).map(|_| r.gen_range(-3.0..3.0)).collect();
        let l2 = g.integrate(&f.iter().map(|v| v * v).collect::<Vec<_>>(), WeightKind::Rho).sqrt();
        let lux = luxemburg_norm(&WeightedField::new(f.clone(), WeightKind::Rho), &g, &q, Side::P).unwrap();
        l2_err = l2_err.max((lux - l2 / 2f64.sqrt()).abs() / (1.0 + l2));
        let c = r.gen_range(-5.0..5.0);
        let cf: Vec<f64> = f.iter().map(|v| c * v).collect();
        for side in [Side::P, Side::PStar] {
            let nf = luxemburg_norm_weighted(&f, &w, &e, side).unwrap();
            let ncf = luxemburg_norm_weighted(&cf, &w, &e, side).unwrap();
            hom_err = hom_err.max((ncf - c.abs() * nf).abs() / (1.0 + ncf));
            let s: Vec<f64> = f.iter().zip(&h).map(|(a, b)| a + b).collect();
            let ns = luxemburg_norm_weighted(&s, &w, &e, side).unwrap();
            let nh = luxemburg_norm_weighted(&h, &w, &e, side).unwrap();
            tri_err = tri_err.max(ns - nf - nh);
        }
    }
    outcome(
        l2_err < 1e-10 && hom_err < 1e-9 && tri_err < 1e-9,
        format!("L2 reduction {l2_err:.1e}, homogeneity {hom_err:.1e}, triangle excess {tri_err:.1e}"),
    )
}

fn c3() -> Outcome {
    let g = WeightedGrid::build(Shape::Square, 6).unwrap();
    let n = NFunction::exponential();
    let mut r = rng(3);
    let mut worst = 0.0_f64;
    for i in 0..50 {
        let side = if i % 2 == 0 { Side::P } else { Side::PStar };
        let f: Vec<f64> = (0..g.num_interior()).map(|_| r.gen_range(-4.0..4.0)).collect();
        let d: Vec<f64> = (0..g.num_interior()).map(|_| r.gen_range(-1.0..1.0)).collect();
        let at = |t: f64| {
            let v: Vec<f64> = f.iter().zip(&d).map(|(a, b)| a + t * b).collect();
            luxemburg_norm(&WeightedField::new(v, WeightKind::Lebesgue), &g, &n, side).unwrap()
        };
        let eps = 1e-5;
        let fd = (at(eps) - at(-eps)) / (2.0 * eps);
        let s = luxemburg_subgradient(&WeightedField::new(f.clone(), WeightKind::Lebesgue), &g, &n, side).unwrap();
        let an: f64 = s.values.iter().zip(&d).map(|(a, b)| a * b).sum();
        worst = worst.max((fd - an).abs() / an.abs().max(1e-3));
    }
    outcome(worst < 1e-6, format!("max relative difference {worst:.1e}"))
}

fn c4() -> Outcome {
    let mut green = 0.0_f64;
    let mut zeta = 0.0_f64;
    for n in 3..=255 {
        let ks = kernels(Shape::Interval, n);
        green = green.max(interval_green_error(&ks).unwrap());
        zeta = zeta.max(interval_zeta0_error(&ks));
    }
    let lam = kernels(Shape::Square, 64).lambda();
    let eig = (lam - 2.0 * PI * PI).abs() / (2.0 * PI * PI);
    let mut harmonic = 0.0_f64;
    for shape in [Shape::Interval, Shape::Square, Shape::Disk] {
        let ks = kernels(shape, 32);
        let u = ks.poisson_potential(&BoundaryMeasure::constant(ks.grid(), 1.0)).unwrap();
        harmonic = harmonic.max(u.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max));
    }
    outcome(
        green < 1e-12 && zeta < 1e-12 && eig < 0.01 && harmonic < 1e-10,
        format!("Green {green:.1e}, torsion {zeta:.1e}, eigenvalue {:.3}%, P[1] {harmonic:.1e}", 100.0 * eig),
    )
}

/// Returns the outcome and whether the failure, if any, is the known boundary gap.
fn c5() -> (Outcome, bool) {
    let ks = kernels(Shape::Square, 32);
    let g = ks.grid();
    let opts = CapacityOptions::default();
    let c = g.nearest_interior([0.5, 0.5]);
    let mut cluster = vec![c];
    cluster.extend_from_slice(&g.interior_neighbors(c)[..2]);
    let interior = [
        CompactSet::interior_points(g, &[[0.5, 0.5]], "interior singleton").unwrap(),
        CompactSet::new(g, SetKind::Interior, cluster, "interior cluster").unwrap(),
        CompactSet::interior_segment(g, [0.35, 0.5], [0.65, 0.5], "interior segment").unwrap(),
    ];
    let boundary = [
        CompactSet::boundary_arc(g, [0.5, 0.0], 0, "boundary singleton").unwrap(),
        CompactSet::boundary_arc(g, [0.5, 0.0], 1, "boundary cluster").unwrap(),
        CompactSet::boundary_arc(g, [0.5, 0.0], 5, "boundary segment").unwrap(),
    ];
    let mut duality = true;
    let mut interior_gaps = true;
    let mut boundary_gaps = true;
    let mut gaps = Vec::new();
    for k in &interior {
        let e = estimate_interior(k, &ks, &opts).unwrap();
        duality &= e.dual_value <= e.primal_value + 1e-8;
        interior_gaps &= e.relative_gap() <= 0.20;
        gaps.push(format!("{:.1}%", 100.0 * e.relative_gap()));
    }
    for k in &boundary {
        let e = estimate_boundary(k, &ks, &opts).unwrap();
        duality &= e.dual_value <= e.primal_value + 1e-8;
        boundary_gaps &= e.relative_gap() <= 0.20;
        gaps.push(format!("{:.1}%", 100.0 * e.relative_gap()));
    }
    let closed_i = interior_singleton_closed_form(interior[0].nodes[0], &ks).unwrap();
    let dual_i = dual_interior(&interior[0], &ks, &opts).unwrap().value;
    let closed_b = boundary_singleton_closed_form(boundary[0].nodes[0], &ks).unwrap();
    let dual_b = dual_boundary(&boundary[0], &ks, &opts).unwrap().value;
    let closed = (dual_i - closed_i).abs() / closed_i < 0.01 && (dual_b - closed_b).abs() / closed_b < 0.01;
    let pass = duality && interior_gaps && boundary_gaps && closed;
    let known = duality && interior_gaps && closed && !boundary_gaps;
    (
        outcome(pass, format!("weak duality {duality}, closed forms {closed}, gaps [{}]", gaps.join(", "))),
        known,
    )
}

fn c6() -> Outcome {
    let cfg = ExperimentConfig::preset("removability").unwrap();
    let rep = run_removability_threshold(&cfg).unwrap();
    outcome(
        rep.pass && rep.bracketed,
        format!("m* = {} in ({}, {}), {:.2}% from 4π", rep.m_star, rep.lower, rep.upper, 100.0 * rep.relative_error),
    )
}

fn c7() -> Outcome {
    let ks = kernels(Shape::Square, 32);
    let g = ks.grid();
    let bottom = g.nearest_boundary([0.5, 0.0]);
    let left = g.nearest_boundary([0.0, 0.3]);
    let bumpy: Vec<f64> = (0..g.num_boundary()).map(|i| 3.0 + 2.0 * (i as f64 * 0.7).sin()).collect();
    let specs = [
        BoundaryMeasure::constant(g, 5.0),
        BoundaryMeasure::from_density(bumpy.clone()),
        BoundaryMeasure::zero(g).with_atom(bottom, 0.05),
        BoundaryMeasure::from_density(bumpy).with_atom(left, 0.02),
        BoundaryMeasure::constant(g, 20.0).with_atom(bottom, 0.01).with_atom(left, 0.01),
    ];
    let (mut viol, mut bound, mut sat) = (0.0_f64, true, 0.0_f64);
    for mu in &specs {
        let rep = theorem_a_scheme(mu, &ks, &default_levels()).unwrap();
        viol = viol.max(rep.max_violation());
        bound &= rep.bound_holds();
        let direct = solve_boundary(mu, &ks).unwrap().u;
        sat = sat.max(rep.report.u.iter().zip(direct.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    outcome(
        viol < 1e-12 && bound && sat < 1e-10,
        format!("max violation {viol:.1e}, bound holds {bound}, saturated vs direct {sat:.1e}"),
    )
}

fn c8() -> Outcome {
    let ks = kernels(Shape::Square, 64);
    let d: Vec<f64> = [2.0, 4.0, 8.0, 16.0]
        .iter()
        .map(|&c| keller_osserman_check(&solve_boundary(&BoundaryMeasure::constant(ks.grid(), c), &ks).unwrap().u, ks.grid()))
        .collect();
    let inc: Vec<f64> = d.windows(2).map(|w| w[1] - w[0]).collect();
    let pass = inc.iter().all(|v| *v >= 0.0) && inc.windows(2).all(|w| w[1] < w[0]);
    outcome(pass, format!("D = {:?}, increments {:?}", d.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>(), inc.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>()))
}

fn c9() -> Outcome {
    let ks = kernels(Shape::Square, 32);
    let mut base = ExperimentConfig::preset("theorem-b").unwrap();
    base.ladder = vec![32];
    let triples = [
        (MeasureSpec { atoms: vec![([0.5, 0.5], 6.0)], density: 0.0 }, TargetSpec::Points(vec![[0.5, 0.5]])),
        (MeasureSpec { atoms: vec![([0.25, 0.25], 4.0)], density: 1.0 }, TargetSpec::Points(vec![[0.6, 0.6]])),
        (
            MeasureSpec { atoms: vec![([0.45, 0.5], 3.0), ([0.55, 0.5], 3.0)], density: 0.5 },
            TargetSpec::Segment([0.4, 0.5], [0.6, 0.5]),
        ),
    ];
    let (mut holds, mut fubini, mut rows) = (true, 0.0_f64, 0);
    for (measure, target) in triples {
        let mut cfg = base.clone();
        cfg.measure = measure;
        cfg.target = target;
        let rep = theorem_b_on(&ks, &cfg).unwrap();
        holds &= rep.all_hold();
        fubini = fubini.max(rep.max_fubini());
        rows += rep.rows.len();
    }
    outcome(holds && fubini < 1e-9, format!("{rows} rows hold {holds}, max Fubini {fubini:.1e}"))
}

fn c10() -> Outcome {
    let res = |n: usize, boundary: bool| {
        let ks = kernels(Shape::Square, n);
        let g = ks.grid();
        let data = if boundary {
            ProblemData::Boundary(BoundaryMeasure::from_density(g.sample_boundary(|x| 2.0 + x[0])))
        } else {
            ProblemData::Interior(InteriorMeasure::zero(g).with_atom(g, [0.45, 0.55], 3.0))
        };
        let u = solve(&data, &ks).unwrap().u;
        weak_residual(&u, &data, &ks, &polynomial_test_basis(g).unwrap()).unwrap().max_abs
    };
    let mut ratios = Vec::new();
    for boundary in [false, true] {
        ratios.push(res(31, boundary) / res(63, boundary));
    }
    outcome(
        ratios.iter().all(|r| *r >= 2.0 * 0.8),
        format!("reduction per halving {:?}", ratios.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>()),
    )
}

fn plain(f: fn() -> Outcome) -> impl Fn() -> (Outcome, bool) {
    move || (f(), false)
}

fn main() {
    type Criterion = (usize, &'static str, u64, Box<dyn Fn() -> (Outcome, bool)>);
    let criteria: Vec<Criterion> = vec![
        (1, "Orlicz algebra", 1, Box::new(plain(c1))),
        (2, "Luxemburg norm", 5, Box::new(plain(c2))),
        (3, "subgradient", 10, Box::new(plain(c3))),
        (4, "kernel exactness", 30, Box::new(plain(c4))),
        (5, "duality", 180, Box::new(c5)),
        (6, "4π threshold", 120, Box::new(plain(c6))),
        (7, "truncation scheme", 60, Box::new(plain(c7))),
        (8, "Keller-Osserman trend", 60, Box::new(plain(c8))),
        (9, "vanishing inequality", 60, Box::new(plain(c9))),
        (10, "weak residual", 120, Box::new(plain(c10))),
    ];
    let total = Instant::now();
    let mut unexpected = Vec::new();
    for (id, name, limit, run) in &criteria {
        let t = Instant::now();
        let (o, known) = run();
        let dt = t.elapsed();
        let in_time = dt < Duration::from_secs(*limit);
        let pass = o.pass && in_time;
        let verdict = if pass { "PASS" } else { "FAIL" };
        let note = if !pass && known && in_time { " [known structural gap]" } else { "" };
        println!("criterion {id:>2} {verdict} {name} ({:.2}s, limit {limit}s): {}{note}", dt.as_secs_f64(), o.detail);
        if !pass && !(known && in_time) {
            unexpected.push(*id);
        }
    }
    println!("acceptance suite finished in {:.1}s", total.elapsed().as_secs_f64());
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
