//! Primal and dual estimates of the `L ln L` capacities of interior and
//! boundary node sets, and the inequalities built on them.

use crate::error::{Error, Result};
use crate::grid::{maximal_function, llnl_norm, Field, NodeClass, WeightKind, WeightedGrid};
use crate::kernels::KernelSet;
use crate::linalg;
use crate::measure::BoundaryMeasure;
use nalgebra::{DMatrix, DVector};

use crate::orlicz::{
    luxemburg_norm_weighted, luxemburg_subgradient_weighted, orlicz_norm_weighted, orlicz_norm_with_scale,
    orlicz_subgradient_weighted, NFunction, Side,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetKind {
    Interior,
    Boundary,
}

/// A finite node set standing in for a compact set `K`.
#[derive(Clone, Debug, PartialEq)]
pub struct CompactSet {
    pub kind: SetKind,
    /// Interior or boundary node indices, sorted and unique.
    pub nodes: Vec<usize>,
    pub label: String,
}

impl CompactSet {
    pub fn empty(kind: SetKind, label: &str) -> Self {
        CompactSet { kind, nodes: Vec::new(), label: label.into() }
    }

    pub fn new(grid: &WeightedGrid, kind: SetKind, mut nodes: Vec<usize>, label: &str) -> Result<Self> {
        nodes.sort_unstable();
        nodes.dedup();
        let limit = match kind {
            SetKind::Interior => grid.num_interior(),
            SetKind::Boundary => grid.num_boundary(),
        };
        if let Some(bad) = nodes.iter().find(|&&i| i >= limit) {
            return Err(Error::SupportError(format!("node {bad} is outside the declared node class")));
        }
        Ok(CompactSet { kind, nodes, label: label.into() })
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Interior nodes nearest to the given points.
    pub fn interior_points(grid: &WeightedGrid, points: &[[f64; 2]], label: &str) -> Result<Self> {
        let nodes = points.iter().map(|p| grid.nearest_interior(*p)).collect();
        Self::new(grid, SetKind::Interior, nodes, label)
    }

    /// Interior nodes on the lattice segment from `a` to `b`.
    pub fn interior_segment(grid: &WeightedGrid, a: [f64; 2], b: [f64; 2], label: &str) -> Result<Self> {
        let steps = (((b[0] - a[0]).abs().max((b[1] - a[1]).abs())) / grid.h()).round().max(1.0) as usize;
        let pts: Vec<[f64; 2]> = (0..=steps)
            .map(|k| {
                let t = k as f64 / steps as f64;
                [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
            })
            .collect();
        Self::interior_points(grid, &pts, label)
    }

    /// The boundary node nearest `point` together with its `radius` nearest boundary neighbours on each side.
    pub fn boundary_arc(grid: &WeightedGrid, point: [f64; 2], radius: usize, label: &str) -> Result<Self> {
        let centre = grid.nearest_boundary(point);
        let mut nodes = vec![centre];
        let mut frontier = vec![centre];
        for _ in 0..radius {
            let mut next = Vec::new();
            for &b in &frontier {
                for nb in boundary_ring(grid, b) {
                    if !nodes.contains(&nb) {
                        nodes.push(nb);
                        next.push(nb);
                    }
                }
            }
            frontier = next;
        }
        Self::new(grid, SetKind::Boundary, nodes, label)
    }
}

/// Boundary nodes one king move away from boundary node `b` that couple to the interior.
fn boundary_ring(grid: &WeightedGrid, b: usize) -> Vec<usize> {
    let id = grid.boundary_lattice_ids()[b];
    let mut out = Vec::new();
    for dx in -1..=1isize {
        for dy in -1..=1isize {
            if (dx, dy) == (0, 0) || (grid.dim() == 1 && dy != 0) {
                continue;
            }
            if let Some(k) = grid.lattice_shift(id, [dx, dy]) {
                if let NodeClass::Boundary(c) = grid.class(k) {
                    if grid.inward_step(c) != [0, 0] {
                        out.push(c);
                    }
                }
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PrimalMethod {
    /// Box-projected Newton steps on the Amemiya form, alternating with updates of its scale.
    ProjectedNewton,
    /// Projected subgradient with step `a / √t` along a normalized direction.
    Subgradient,
}

#[derive(Clone, Copy, Debug)]
pub struct CapacityOptions {
    pub method: PrimalMethod,
    /// Iteration cap for the subgradient method.
    pub iterations: usize,
    /// Step scale `a` (sup-norm length of the first subgradient step).
    pub step: f64,
    /// Precondition interior subgradient directions by the inverse Laplacian.
    pub precondition: bool,
    pub newton_iterations: usize,
    /// Relative decrease below which the Newton iteration stops.
    pub newton_tol: f64,
    pub dual_iterations: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        CapacityOptions {
            method: PrimalMethod::ProjectedNewton,
            iterations: 2000,
            step: 0.5,
            precondition: true,
            newton_iterations: 200,
            newton_tol: 1e-10,
            dual_iterations: 500,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PrimalEstimate {
    /// Best feasible objective (Orlicz norm), an upper bound for the capacity.
    pub value: f64,
    /// Luxemburg norm of the same field, for reference.
    pub luxemburg_value: f64,
    /// `∫ M[Δη] dx` at the best test function (interior sets only).
    pub maximal_value: Option<f64>,
    /// Best test function: interior field for interior sets, boundary field otherwise.
    pub eta: Vec<f64>,
    pub iterations: usize,
    /// Objective at each iteration.
    pub history: Vec<f64>,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct DualEstimate {
    /// Mass of the best feasible measure, a lower bound for the capacity.
    pub value: f64,
    /// `(node, mass)` of the best measure, scaled so its potential has unit norm.
    pub measure: Vec<(usize, f64)>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Clone, Debug)]
pub struct CapacityEstimate {
    pub label: String,
    pub primal_value: f64,
    pub dual_value: f64,
    pub gap: f64,
    pub eta_star: Vec<f64>,
    pub mu_star: Vec<(usize, f64)>,
    pub primal_iterations: usize,
    pub dual_iterations: usize,
    pub primal_converged: bool,
    pub dual_converged: bool,
    pub primal_luxemburg: f64,
    pub maximal_value: Option<f64>,
}

impl CapacityEstimate {
    pub fn combine(label: &str, p: PrimalEstimate, d: DualEstimate) -> Self {
        CapacityEstimate {
            label: label.into(),
            primal_value: p.value,
            dual_value: d.value,
            gap: p.value - d.value,
            eta_star: p.eta,
            mu_star: d.measure,
            primal_iterations: p.iterations,
            dual_iterations: d.iterations,
            primal_converged: p.converged,
            dual_converged: d.converged,
            primal_luxemburg: p.luxemburg_value,
            maximal_value: p.maximal_value,
        }
    }

    /// Gap as a fraction of the primal value.
    pub fn relative_gap(&self) -> f64 {
        if self.primal_value == 0.0 {
            0.0
        } else {
            self.gap / self.primal_value
        }
    }
}

fn expect_kind(k: &CompactSet, kind: SetKind) -> Result<()> {
    if k.kind != kind {
        return Err(Error::SupportError(format!("set '{}' has the wrong node class", k.label)));
    }
    Ok(())
}

/// `K` together with its interior stencil neighbours.
pub fn interior_dilation(grid: &WeightedGrid, k: &CompactSet) -> Vec<bool> {
    let mut mark = vec![false; grid.num_interior()];
    for &i in &k.nodes {
        mark[i] = true;
        for &j in grid.interior_neighbors(i) {
            mark[j] = true;
        }
    }
    mark
}

/// Interior nodes adjacent to the boundary; a set meeting them has no one-ring inside the domain.
pub fn boundary_collar(grid: &WeightedGrid) -> Vec<bool> {
    (0..grid.num_interior()).map(|i| !grid.boundary_neighbors(i).is_empty()).collect()
}

pub fn boundary_dilation(grid: &WeightedGrid, k: &CompactSet) -> Vec<bool> {
    let mut mark = vec![false; grid.num_boundary()];
    for &b in &k.nodes {
        mark[b] = true;
        for c in boundary_ring(grid, b) {
            mark[c] = true;
        }
    }
    mark
}

/// Projected descent on the box `[0, 1]` over the `free` coordinates.
/// `eval` returns the objective and a descent direction (full length).
struct BoxOutcome {
    best: Vec<f64>,
    best_value: f64,
    history: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn project_box_descent<F>(mut x: Vec<f64>, free: &[bool], opts: &CapacityOptions, mut eval: F) -> Result<BoxOutcome>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let (mut fx, mut dir) = eval(&x)?;
    let mut best = x.clone();
    let mut best_value = fx;
    let mut history = vec![fx];
    let mut converged = false;
    let mut iterations = 0;
    let free_idx: Vec<usize> = (0..x.len()).filter(|&i| free[i]).collect();
    if free_idx.is_empty() {
        return Ok(BoxOutcome { best, best_value, history, iterations, converged: true });
    }
    for t in 1..=opts.iterations {
        iterations = t;
        let scale = free_idx.iter().fold(0.0_f64, |m, &i| m.max(dir[i].abs()));
        if scale == 0.0 || !scale.is_finite() {
            converged = scale == 0.0;
            break;
        }
        let step_of = |x: &[f64], a: f64| -> (Vec<f64>, f64) {
            let mut y = x.to_vec();
            let mut moved = 0.0_f64;
            for &i in &free_idx {
                let v = (x[i] - a * dir[i] / scale).clamp(0.0, 1.0);
                moved = moved.max((v - x[i]).abs());
                y[i] = v;
            }
            (y, moved)
        };
        let (y, moved) = step_of(&x, opts.step / (t as f64).sqrt());
        if moved < 1e-12 {
            converged = true;
            break;
        }
        x = y;
        let r = eval(&x)?;
        fx = r.0;
        dir = r.1;
        history.push(fx);
        if fx < best_value {
            best_value = fx;
            best.copy_from_slice(&x);
        }
    }
    Ok(BoxOutcome { best, best_value, history, iterations, converged })
}

/// Linear map `η ↦ v` whose Orlicz norm is minimized, with the Newton solves it needs.
trait PrimalMap {
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn apply_t(&self, y: &[f64]) -> Result<Vec<f64>>;
    /// Solves `(Lᵀ diag(d) L)_SS x = g_S`; entries outside `S` are 0.
    fn newton_solve(&self, d: &[f64], g: &[f64], s: &[bool]) -> Result<Vec<f64>>;
}

/// `η ↦ Aη` on interior nodes. Newton systems go through CG preconditioned by `A_SS⁻¹ D⁻¹ A_SS⁻¹`.
struct LaplacianMap<'a> {
    grid: &'a WeightedGrid,
}

impl PrimalMap for LaplacianMap<'_> {
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(linalg::apply_laplacian(self.grid, x))
    }

    fn apply_t(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(linalg::apply_laplacian(self.grid, y))
    }

    fn newton_solve(&self, d: &[f64], g: &[f64], s: &[bool]) -> Result<Vec<f64>> {
        let n = g.len();
        let hess = |x: &[f64]| -> Vec<f64> {
            let mut z = linalg::apply_laplacian(self.grid, x);
            for (zi, di) in z.iter_mut().zip(d) {
                *zi *= di;
            }
            let mut r = linalg::apply_laplacian(self.grid, &z);
            for i in 0..n {
                if !s[i] {
                    r[i] = 0.0;
                }
            }
            r
        };
        let precond = |r: &[f64]| -> Result<Vec<f64>> {
            let mut a = linalg::pcg_restricted(self.grid, s, r, 1e-12)?;
            for (ai, di) in a.iter_mut().zip(d) {
                *ai /= di.max(1e-300);
            }
            linalg::pcg_restricted(self.grid, s, &a, 1e-12)
        };
        let mut x = vec![0.0; n];
        let mut r: Vec<f64> = (0..n).map(|i| if s[i] { g[i] } else { 0.0 }).collect();
        let bnorm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut z = precond(&r)?;
        let mut p = z.clone();
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        for _ in 0..200 {
            let q = hess(&p);
            let pq: f64 = p.iter().zip(&q).map(|(a, b)| a * b).sum();
            if !(pq > 0.0) {
                break;
            }
            let alpha = rz / pq;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            if r.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-10 * bnorm {
                break;
            }
            z = precond(&r)?;
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Ok(x)
    }
}

/// An explicit matrix `L`; Newton systems by dense Cholesky.
struct DenseMap {
    l: DMatrix<f64>,
}

impl PrimalMap for DenseMap {
    fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok((&self.l * DVector::from_column_slice(x)).as_slice().to_vec())
    }

    fn apply_t(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok((self.l.transpose() * DVector::from_column_slice(y)).as_slice().to_vec())
    }

    fn newton_solve(&self, d: &[f64], g: &[f64], s: &[bool]) -> Result<Vec<f64>> {
        let idx: Vec<usize> = (0..g.len()).filter(|&i| s[i]).collect();
        let mut x = vec![0.0; g.len()];
        if idx.is_empty() {
            return Ok(x);
        }
        let rows = self.l.nrows();
        let ls = DMatrix::from_fn(rows, idx.len(), |r, c| self.l[(r, idx[c])] * d[r].sqrt());
        let mut h = ls.transpose() * &ls;
        let rhs = DVector::from_iterator(idx.len(), idx.iter().map(|&i| g[i]));
        let ridge = 1e-14 * h.diagonal().max();
        for i in 0..idx.len() {
            h[(i, i)] += ridge;
        }
        let sol = h.cholesky().ok_or_else(|| Error::SolverDiverged { iterations: 0, residual: f64::NAN })?.solve(&rhs);
        for (c, &i) in idx.iter().enumerate() {
            x[i] = sol[c];
        }
        Ok(x)
    }
}

/// Minimizes `‖Lη‖` (Orlicz norm of `L_{P*}` with weights `w`) over `0 <= η <= 1`
/// on the `free` coordinates. Each pass fixes the Amemiya scale `k` at its
/// optimum for the current `η` and takes one projected Newton step on
/// `Σ w P*(k Lη)`; an accepted step lowers `(1 + Σ w P*(k Lη)) / k` and hence the norm.
fn newton_box<M: PrimalMap>(mut x: Vec<f64>, free: &[bool], w: &[f64], map: &M, opts: &CapacityOptions) -> Result<BoxOutcome> {
    let n = NFunction::exponential();
    let mut v = map.apply(&x)?;
    let (mut value, mut k) = orlicz_norm_with_scale(&v, w, &n, Side::PStar)?;
    let mut history = vec![value];
    let mut iterations = 0;
    let mut converged = false;
    let phi = |v: &[f64], k: f64| -> f64 { v.iter().zip(w).map(|(vi, wi)| wi * n.eval_pstar(k * vi)).sum() };
    for it in 1..=opts.newton_iterations {
        iterations = it;
        if value == 0.0 {
            converged = true;
            break;
        }
        let q: Vec<f64> = v.iter().zip(w).map(|(vi, wi)| wi * k * n.density_pbar(k * vi)).collect();
        let g = map.apply_t(&q)?;
        let d: Vec<f64> = v.iter().zip(w).map(|(vi, wi)| wi * k * k / (1.0 + (k * vi).abs())).collect();
        let s: Vec<bool> = (0..x.len())
            .map(|i| free[i] && !((x[i] <= 0.0 && g[i] > 0.0) || (x[i] >= 1.0 && g[i] < 0.0)))
            .collect();
        if !s.iter().any(|&b| b) {
            converged = true;
            break;
        }
        let dir = map.newton_solve(&d, &g, &s)?;
        let phi0 = phi(&v, k);
        let mut accepted = None;
        let mut alpha = 1.0;
        for _ in 0..60 {
            let mut y = x.clone();
            let mut decrease = 0.0;
            for i in 0..x.len() {
                if s[i] {
                    y[i] = (x[i] - alpha * dir[i]).clamp(0.0, 1.0);
                    decrease += g[i] * (x[i] - y[i]);
                }
            }
            let vy = map.apply(&y)?;
            if decrease > 0.0 && phi(&vy, k) <= phi0 - 1e-4 * decrease {
                accepted = Some((y, vy));
                break;
            }
            alpha *= 0.5;
        }
        let Some((y, vy)) = accepted else {
            converged = true;
            break;
        };
        let (new_value, new_k) = orlicz_norm_with_scale(&vy, w, &n, Side::PStar)?;
        x = y;
        v = vy;
        k = new_k;
        let drop = value - new_value;
        value = new_value;
        history.push(value);
        if drop <= opts.newton_tol * value {
            converged = true;
            break;
        }
    }
    Ok(BoxOutcome { best: x, best_value: value, history, iterations, converged })
}

fn primal_interior_setup(k: &CompactSet, ks: &KernelSet) -> Result<(Vec<bool>, Vec<bool>)> {
    let grid = ks.grid();
    expect_kind(k, SetKind::Interior)?;
    let collar = boundary_collar(grid);
    if k.nodes.iter().any(|&i| collar[i]) {
        return Err(Error::Infeasible(format!("set '{}' touches the boundary collar", k.label)));
    }
    // η vanishes on the boundary layer; everything off the dilated set is free
    let fixed_one = interior_dilation(grid, k);
    let free: Vec<bool> = fixed_one.iter().map(|b| !b).collect();
    Ok((fixed_one, free))
}

/// Feasible start: normalized potential of the dilated set, clamped to `[0, 1]`.
fn interior_start(ks: &KernelSet, fixed_one: &[bool], free: &[bool]) -> Result<Vec<f64>> {
    let ind: Vec<f64> = fixed_one.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let g = ks.green_apply(&ind)?;
    let m = g.iter().zip(fixed_one).filter(|(_, b)| **b).map(|(v, _)| *v).fold(f64::INFINITY, f64::min);
    Ok((0..g.len())
        .map(|i| {
            if fixed_one[i] {
                1.0
            } else if free[i] {
                (g[i] / m).clamp(0.0, 1.0)
            } else {
                0.0
            }
        })
        .collect())
}

fn precondition_direction(ks: &KernelSet, free: &[bool], grad: &[f64], opts: &CapacityOptions) -> Result<Vec<f64>> {
    if opts.precondition {
        linalg::pcg_restricted(ks.grid(), free, grad, 1e-8)
    } else {
        Ok(grad.to_vec())
    }
}

/// Upper bound for the interior capacity: minimizes `‖Δη‖` in the Orlicz
/// norm of `L_{P*}` over `0 <= η <= 1`, `η = 1` on the one-ring dilation of `K`,
/// `η = 0` on the boundary collar.
pub fn primal_interior(k: &CompactSet, ks: &KernelSet, opts: &CapacityOptions) -> Result<PrimalEstimate> {
    let grid = ks.grid();
    let n = NFunction::exponential();
    if k.is_empty() {
        expect_kind(k, SetKind::Interior)?;
        return Ok(PrimalEstimate {
            value: 0.0,
            luxemburg_value: 0.0,
            maximal_value: Some(0.0),
            eta: vec![0.0; grid.num_interior()],
            iterations: 0,
            history: vec![0.0],
            converged: true,
        });
    }
    let (fixed_one, free) = primal_interior_setup(k, ks)?;
    let x0 = interior_start(ks, &fixed_one, &free)?;
    let w = grid.weights(WeightKind::Lebesgue);
    let out = match opts.method {
        PrimalMethod::ProjectedNewton => newton_box(x0, &free, &w, &LaplacianMap { grid }, opts)?,
        PrimalMethod::Subgradient => project_box_descent(x0, &free, opts, |eta| {
            let v = linalg::apply_laplacian(grid, eta);
            let value = orlicz_norm_weighted(&v, &w, &n, Side::PStar)?;
            let s = orlicz_subgradient_weighted(&v, &w, &n, Side::PStar)?;
            let grad = linalg::apply_laplacian(grid, &s);
            Ok((value, precondition_direction(ks, &free, &grad, opts)?))
        })?,
    };
    let v = linalg::apply_laplacian(grid, &out.best);
    Ok(PrimalEstimate {
        value: out.best_value,
        luxemburg_value: luxemburg_norm_weighted(&v, &w, &n, Side::PStar)?,
        maximal_value: Some(llnl_norm(&v, grid, WeightKind::Lebesgue)),
        eta: out.best,
        iterations: out.iterations,
        history: out.history,
        converged: out.converged,
    })
}

/// Maximizes `gain(x) / ‖Σ x_j c_j‖_{L_P}` over the probability simplex by
/// projected (super)gradient steps with backtracking. `gain` is concave and
/// positively homogeneous and returns its value and a supergradient.
/// Returns `(best ratio, x, iterations, converged)`.
fn simplex_max_ratio<G>(cols: &[Vec<f64>], w: &[f64], gain: G, iterations: usize) -> Result<(f64, Vec<f64>, usize, bool)>
where
    G: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = NFunction::exponential();
    let m = cols.len();
    let combine = |x: &[f64]| combine_columns(cols, x);
    let ratio = |x: &[f64]| -> Result<f64> { Ok(gain(x).0 / luxemburg_norm_weighted(&combine(x), w, &n, Side::P)?) };
    let mut x = vec![1.0 / m as f64; m];
    let mut rx = ratio(&x)?;
    if m == 1 {
        return Ok((rx, x, 0, true));
    }
    let mut step = 1.0;
    let mut its = 0;
    let mut converged = false;
    for t in 1..=iterations {
        its = t;
        let f = combine(&x);
        let phi = luxemburg_norm_weighted(&f, w, &n, Side::P)?;
        let sub = luxemburg_subgradient_weighted(&f, w, &n, Side::P)?;
        let (g, dg) = gain(&x);
        let grad: Vec<f64> = cols
            .iter()
            .zip(&dg)
            .map(|(c, dgj)| (dgj * phi - g * c.iter().zip(&sub).map(|(a, b)| a * b).sum::<f64>()) / (phi * phi))
            .collect();
        let gscale = grad.iter().fold(0.0_f64, |a, b| a.max(b.abs())).max(1e-300);
        let mut accepted = false;
        for _ in 0..50 {
            let y: Vec<f64> = x.iter().zip(&grad).map(|(a, b)| a + step * b / gscale).collect();
            let y = project_simplex(&y);
            let ry = ratio(&y)?;
            if ry > rx + 1e-15 * rx.abs() {
                let moved = x.iter().zip(&y).fold(0.0_f64, |a, (p, q)| a.max((p - q).abs()));
                x = y;
                rx = ry;
                step = (step * 1.5).min(1.0);
                accepted = true;
                converged = moved < 1e-12;
                break;
            }
            step *= 0.5;
        }
        if !accepted || converged {
            converged = true;
            break;
        }
    }
    Ok((rx, x, its, converged))
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(y: &[f64]) -> Vec<f64> {
    let mut u = y.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    y.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Lower bound for the interior capacity: the largest mass on `K` whose
/// Green potential lies in the unit ball of `L_P`.
pub fn dual_interior(k: &CompactSet, ks: &KernelSet, opts: &CapacityOptions) -> Result<DualEstimate> {
    expect_kind(k, SetKind::Interior)?;
    if k.is_empty() {
        return Ok(DualEstimate { value: 0.0, measure: Vec::new(), iterations: 0, converged: true });
    }
    let grid = ks.grid();
    let cols: Vec<Vec<f64>> = k.nodes.iter().map(|&y| ks.green_column(y).map(|f| f.0)).collect::<Result<_>>()?;
    let w = grid.weights(WeightKind::Lebesgue);
    let total = |x: &[f64]| (x.iter().sum::<f64>(), vec![1.0; x.len()]);
    let (value, x, iterations, converged) = simplex_max_ratio(&cols, &w, total, opts.dual_iterations)?;
    // on the simplex the gain is 1, so the ratio is the reciprocal potential norm
    let measure = k.nodes.iter().zip(&x).map(|(&j, &m)| (j, m * value)).collect();
    Ok(DualEstimate { value, measure, iterations, converged })
}

/// `1 / ‖𝔾[δ_y]‖_{L_P}`.
pub fn interior_singleton_closed_form(y: usize, ks: &KernelSet) -> Result<f64> {
    let col = ks.green_column(y)?;
    let w = ks.grid().weights(WeightKind::Lebesgue);
    Ok(1.0 / luxemburg_norm_weighted(&col, &w, &NFunction::exponential(), Side::P)?)
}

pub fn estimate_interior(k: &CompactSet, ks: &KernelSet, opts: &CapacityOptions) -> Result<CapacityEstimate> {
    let p = primal_interior(k, ks, opts)?;
    let d = dual_interior(k, ks, opts)?;
    Ok(CapacityEstimate::combine(&k.label, p, d))
}

/// `v = ρ⁻¹ A(ρ* ℙ[η])` on interior nodes.
/// `L η = ρ⁻¹ A(ρ* ℙ[η])` at the interior nodes, with `A = -Δ_h`.
pub fn boundary_operator(ks: &KernelSet, eta: &[f64]) -> Result<Vec<f64>> {
    let p = ks.poisson_apply(eta)?;
    let y: Vec<f64> = p.iter().zip(ks.rho_star().iter()).map(|(a, b)| a * b).collect();
    let w = linalg::apply_laplacian(ks.grid(), &y);
    Ok(w.iter().zip(ks.grid().rho()).map(|(a, r)| a / r).collect())
}

/// The boundary operator as an explicit interior-by-boundary matrix.
fn boundary_matrix(ks: &KernelSet) -> Result<DenseMap> {
    ks.dense_green();
    let nb = ks.grid().num_boundary();
    let mut l = DMatrix::zeros(ks.grid().num_interior(), nb);
    let mut e = vec![0.0; nb];
    for b in 0..nb {
        e[b] = 1.0;
        let col = boundary_operator(ks, &e)?;
        l.set_column(b, &DVector::from_vec(col));
        e[b] = 0.0;
    }
    Ok(DenseMap { l })
}

/// Adjoint of `η ↦ ℙ[η]` with respect to plain sums: `Bᵀ A⁻¹ z`.
fn poisson_adjoint(ks: &KernelSet, z: &[f64]) -> Result<Vec<f64>> {
    let q = ks.green_apply(z)?;
    let grid = ks.grid();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let mut out = vec![0.0; grid.num_boundary()];
    for i in 0..grid.num_interior() {
        for &b in grid.boundary_neighbors(i) {
            out[b] += q[i] * inv_h2;
        }
    }
    Ok(out)
}

/// The `N^{L ln L}` norm of boundary data `η`: Orlicz norm of `ρ⁻¹Δ(ρ*ℙ[η])` in `L_{P*}(ρ dx)`.
pub fn boundary_norm(eta: &[f64], ks: &KernelSet) -> Result<f64> {
    let v = boundary_operator(ks, eta)?;
    let w = ks.grid().weights(WeightKind::Rho);
    orlicz_norm_weighted(&v, &w, &NFunction::exponential(), Side::PStar)
}

/// Upper bound for the boundary capacity over `0 <= η <= 1`, `η = 1` on the dilation of `K`.
pub fn primal_boundary(k: &CompactSet, ks: &KernelSet, opts: &CapacityOptions) -> Result<PrimalEstimate> {
    expect_kind(k, SetKind::Boundary)?;
    let grid = ks.grid();
    let n = NFunction::exponential();
    if k.is_empty() {
        return Ok(PrimalEstimate {
            value: 0.0,
            luxemburg_value: 0.0,
            maximal_value: None,
            eta: vec![0.0; grid.num_boundary()],
            iterations: 0,
            history: vec![0.0],
            converged: true,
        });
    }
    let fixed = boundary_dilation(grid, k);
    let free: Vec<bool> = fixed.iter().map(|b| !b).collect();
    let x0: Vec<f64> = fixed.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let w = grid.weights(WeightKind::Rho);
    let out = match opts.method {
        PrimalMethod::ProjectedNewton => newton_box(x0, &free, &w, &boundary_matrix(ks)?, opts)?,
        PrimalMethod::Subgradient => project_box_descent(x0, &free, opts, |eta| {
            let v = boundary_operator(ks, eta)?;
            let value = orlicz_norm_weighted(&v, &w, &n, Side::PStar)?;
            let s = orlicz_subgradient_weighted(&v, &w, &n, Side::PStar)?;
            let t: Vec<f64> = s.iter().zip(grid.rho()).map(|(a, r)| a / r).collect();
            let at = linalg::apply_laplacian(grid, &t);
            let z: Vec<f64> = at.iter().zip(ks.rho_star().iter()).map(|(a, b)| a * b).collect();
            Ok((value, poisson_adjoint(ks, &z)?))
        })?,
    };
    let v = boundary_operator(ks, &out.best)?;
    Ok(PrimalEstimate {
        value: out.best_value,
        luxemburg_value: luxemburg_norm_weighted(&v, &w, &n, Side::PStar)?,
        maximal_value: None,
        eta: out.best,
        iterations: out.iterations,
        history: out.history,
        converged: out.converged,
    })
}

/// `c = Lᵀ(ρ h^d ℙ[μ])` for the boundary operator `L η = ρ⁻¹Δ(ρ* ℙ[η])`: the
/// pairing `ℋ(e_b, μ)` against each boundary node.
pub fn boundary_pairing_vector(pm: &[f64], ks: &KernelSet) -> Result<Vec<f64>> {
    let grid = ks.grid();
    let cell = grid.cell_measure();
    let scaled: Vec<f64> = pm.iter().map(|v| v * cell).collect();
    let a = linalg::apply_laplacian(grid, &scaled);
    let z: Vec<f64> = a.iter().zip(ks.rho_star().iter()).map(|(p, q)| p * q).collect();
    poisson_adjoint(ks, &z)
}

/// Lower bound certified by the exact dual of the boxed boundary program:
/// `Σ_{b ∈ K'} c_b + Σ_{b ∉ K'} min(0, c_b)` with `c` from [`boundary_pairing_vector`].
fn boundary_gain(c: &[f64], fixed: &[bool]) -> f64 {
    c.iter().zip(fixed).map(|(&cb, &f)| if f { cb } else { cb.min(0.0) }).sum()
}

/// Lower bound for the boundary capacity: maximizes the pairing gain of
/// `μ >= 0` on `K` with `‖ℙ[μ]‖_{L_P(ρ dx)} <= 1`.
pub fn dual_boundary(k: &CompactSet, ks: &KernelSet, opts: &CapacityOptions) -> Result<DualEstimate> {
    expect_kind(k, SetKind::Boundary)?;
    if k.is_empty() {
        return Ok(DualEstimate { value: 0.0, measure: Vec::new(), iterations: 0, converged: true });
    }
    let grid = ks.grid();
    let fixed = boundary_dilation(grid, k);
    let mut cols = Vec::new();
    let mut pairs = Vec::new();
    for &b in &k.nodes {
        let mut e = vec![0.0; grid.num_boundary()];
        e[b] = 1.0 / grid.boundary_cell_measure();
        let col = ks.poisson_apply(&e)?.0;
        pairs.push(boundary_pairing_vector(&col, ks)?);
        cols.push(col);
    }
    let gain = |x: &[f64]| -> (f64, Vec<f64>) {
        let mut c = vec![0.0; grid.num_boundary()];
        for (p, &xj) in pairs.iter().zip(x) {
            for (ci, pi) in c.iter_mut().zip(p) {
                *ci += xj * pi;
            }
        }
        let active: Vec<bool> = c.iter().zip(&fixed).map(|(&cb, &f)| f || cb < 0.0).collect();
        let dg = pairs.iter().map(|p| p.iter().zip(&active).filter(|(_, a)| **a).map(|(v, _)| v).sum()).collect();
        (boundary_gain(&c, &fixed), dg)
    };
    let w = grid.weights(WeightKind::Rho);
    let (value, x, iterations, converged) = simplex_max_ratio(&cols, &w, gain, opts.dual_iterations)?;
    if !(value > 0.0) {
        return Ok(DualEstimate { value: 0.0, measure: Vec::new(), iterations, converged });
    }
    let phi = luxemburg_norm_weighted(&combine_columns(&cols, &x), &w, &NFunction::exponential(), Side::P)?;
    let measure = k.nodes.iter().zip(&x).map(|(&b, &m)| (b, m / phi)).collect();
    Ok(DualEstimate { value, measure, iterations, converged })
}

fn combine_columns(cols: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let mut f = vec![0.0; cols[0].len()];
    for (c, &xj) in cols.iter().zip(x) {
        for (fi, ci) in f.iter_mut().zip(c) {
            *fi += xj * ci;
        }
    }
    f
}

/// Dual value of the singleton `{b}`: the pairing gain of `δ_b` over `‖ℙ[δ_b]‖_{L_P(ρ dx)}`.
pub fn boundary_singleton_closed_form(b: usize, ks: &KernelSet) -> Result<f64> {
    let grid = ks.grid();
    let k = CompactSet::new(grid, SetKind::Boundary, vec![b], "singleton")?;
    let fixed = boundary_dilation(grid, &k);
    let mut e = vec![0.0; grid.num_boundary()];
    e[b] = 1.0 / grid.boundary_cell_measure();
    let col = ks.poisson_apply(&e)?;
    let gain = boundary_gain(&boundary_pairing_vector(&col, ks)?, &fixed);
    let w = grid.weights(WeightKind::Rho);
    Ok(gain.max(0.0) / luxemburg_norm_weighted(&col, &w, &NFunction::exponential(), Side::P)?)
}

pub fn estimate_boundary(k: &CompactSet, ks: &KernelSet, opts: &CapacityOptions) -> Result<CapacityEstimate> {
    let p = primal_boundary(k, ks, opts)?;
    let d = dual_boundary(k, ks, opts)?;
    Ok(CapacityEstimate::combine(&k.label, p, d))
}

/// `ℋ(η, μ) = -∫ ℙ[μ] Δ(ρ* ℙ[η]) dx`, integrated in `x` first (`a`) and with
/// the order of summation swapped (`b`).
pub fn pairing(eta: &[f64], mu: &BoundaryMeasure, ks: &KernelSet) -> Result<(f64, f64)> {
    let grid = ks.grid();
    if eta.len() != grid.num_boundary() {
        return Err(Error::GridMismatch(format!("η has {} entries, grid has {} boundary nodes", eta.len(), grid.num_boundary())));
    }
    let pm = ks.poisson_potential(mu)?;
    let pe = ks.poisson_apply(eta)?;
    let y: Vec<f64> = pe.iter().zip(ks.rho_star().iter()).map(|(a, b)| a * b).collect();
    let ay = linalg::apply_laplacian(grid, &y);
    let cell = grid.cell_measure();
    let a = pm.iter().zip(&ay).map(|(p, q)| p * q).sum::<f64>() * cell;

    let apm = linalg::apply_laplacian(grid, &pm);
    let z: Vec<f64> = apm.iter().zip(ks.rho_star().iter()).map(|(p, q)| p * q * cell).collect();
    let kernel = poisson_adjoint(ks, &z)?;
    let b = eta.iter().zip(&kernel).map(|(e, k)| e * k).sum::<f64>();
    Ok((a, b))
}

/// `‖ℙ[μ]‖_{L_P(ρ dx)}`.
pub fn boundary_potential_norm(mu: &BoundaryMeasure, ks: &KernelSet) -> Result<f64> {
    let pm = ks.poisson_potential(mu)?;
    luxemburg_norm_weighted(&pm, &ks.grid().weights(WeightKind::Rho), &NFunction::exponential(), Side::P)
}

/// `‖η‖_{L¹} + ‖Δη‖_{L_{P*}}` (Orlicz norm).
pub fn delta_llnl_norm(eta: &[f64], ks: &KernelSet) -> Result<f64> {
    let grid = ks.grid();
    let abs: Vec<f64> = eta.iter().map(|v| v.abs()).collect();
    let l1 = grid.integrate(&abs, WeightKind::Lebesgue);
    let v = linalg::apply_laplacian(grid, eta);
    Ok(l1 + orlicz_norm_weighted(&v, &grid.weights(WeightKind::Lebesgue), &NFunction::exponential(), Side::PStar)?)
}

#[derive(Clone, Debug)]
pub struct ChebyshevReport {
    pub norm: f64,
    /// `‖η‖ / λ`.
    pub bound: f64,
    pub level_set: CompactSet,
    /// Primal capacity estimate of the superlevel set (0 when it is empty).
    pub primal: f64,
    pub holds: bool,
}

/// Compares the capacity of `{η >= λ}` with `‖η‖_{Δ^{L ln L}} / λ`.
pub fn chebyshev_bound(eta: &[f64], lam: f64, ks: &KernelSet, opts: &CapacityOptions) -> Result<ChebyshevReport> {
    if !(lam > 0.0) {
        return Err(Error::BadLambda(lam));
    }
    let grid = ks.grid();
    grid.check_field(eta)?;
    let norm = delta_llnl_norm(eta, ks)?;
    let bound = norm / lam;
    let nodes: Vec<usize> = (0..eta.len()).filter(|&i| eta[i] >= lam).collect();
    let level_set = CompactSet::new(grid, SetKind::Interior, nodes, &format!("{{eta >= {lam}}}"))?;
    let primal = primal_interior(&level_set, ks, opts)?.value;
    let holds = primal <= bound * (1.0 + 1e-8) + 1e-12;
    Ok(ChebyshevReport { norm, bound, level_set, primal, holds })
}

/// `(‖D²η‖_{L^{1,∞}}, ∫ M[Δη] dx)`: weak-`L¹` quasi-norm of the second-difference
/// tensor and the maximal-function norm of the Laplacian.
pub fn weak_l1_hessian(eta: &[f64], ks: &KernelSet) -> Result<(f64, f64)> {
    let grid = ks.grid();
    grid.check_field(eta)?;
    let lat = grid.to_lattice(eta);
    let h2 = grid.h() * grid.h();
    let at = |id: usize, s: [isize; 2]| grid.lattice_shift(id, s).map_or(0.0, |k| lat[k]);
    let mut mags: Vec<f64> = grid
        .interior_lattice_ids()
        .iter()
        .map(|&id| {
            let c = lat[id];
            let dxx = (at(id, [1, 0]) - 2.0 * c + at(id, [-1, 0])) / h2;
            if grid.dim() == 1 {
                return dxx.abs();
            }
            let dyy = (at(id, [0, 1]) - 2.0 * c + at(id, [0, -1])) / h2;
            let dxy = (at(id, [1, 1]) - at(id, [1, -1]) - at(id, [-1, 1]) + at(id, [-1, -1])) / (4.0 * h2);
            (dxx * dxx + dyy * dyy + 2.0 * dxy * dxy).sqrt()
        })
        .collect();
    mags.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let cell = grid.cell_measure();
    let lhs = mags.iter().enumerate().map(|(k, a)| a * (k + 1) as f64 * cell).fold(0.0, f64::max);
    let lap = linalg::apply_laplacian(grid, eta);
    Ok((lhs, llnl_norm(&lap, grid, WeightKind::Lebesgue)))
}

/// Minimizes `∫ (|Δη| + |∇η|²) dx` over the feasible set of [`primal_interior`].
pub fn bmp_functional(k: &CompactSet, ks: &KernelSet, opts: &CapacityOptions) -> Result<PrimalEstimate> {
    let grid = ks.grid();
    expect_kind(k, SetKind::Interior)?;
    if k.is_empty() {
        return Ok(PrimalEstimate {
            value: 0.0,
            luxemburg_value: 0.0,
            maximal_value: None,
            eta: vec![0.0; grid.num_interior()],
            iterations: 0,
            history: vec![0.0],
            converged: true,
        });
    }
    let (fixed_one, free) = primal_interior_setup(k, ks)?;
    let x0 = interior_start(ks, &fixed_one, &free)?;
    let cell = grid.cell_measure();
    let out = project_box_descent(x0, &free, opts, |eta| {
        let a = linalg::apply_laplacian(grid, eta);
        let value = a.iter().map(|v| v.abs()).sum::<f64>() * cell + eta.iter().zip(&a).map(|(e, v)| e * v).sum::<f64>() * cell;
        let sign: Vec<f64> = a.iter().map(|v| v.signum() * (*v != 0.0) as i32 as f64).collect();
        let asg = linalg::apply_laplacian(grid, &sign);
        let grad: Vec<f64> = (0..a.len()).map(|i| (asg[i] + 2.0 * a[i]) * cell).collect();
        Ok((value, precondition_direction(ks, &free, &grad, opts)?))
    })?;
    Ok(PrimalEstimate {
        value: out.best_value,
        luxemburg_value: f64::NAN,
        maximal_value: None,
        eta: out.best,
        iterations: out.iterations,
        history: out.history,
        converged: out.converged,
    })
}

/// Maximal function of `Δη` restricted to interior nodes.
pub fn maximal_laplacian(eta: &[f64], ks: &KernelSet) -> Field {
    maximal_function(&Field(linalg::apply_laplacian(ks.grid(), eta)), ks.grid())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Shape;

    #[test]
    fn simplex_projection() {
        let p = project_simplex(&[0.5, 0.5, 0.5]);
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }
        let p = project_simplex(&[2.0, 0.0]);
        assert_eq!(p, vec![1.0, 0.0]);
    }

    #[test]
    fn empty_sets_have_zero_capacity() {
        let ks = KernelSet::assemble(WeightedGrid::build(Shape::Square, 12).unwrap()).unwrap();
        let opts = CapacityOptions::default();
        let e = estimate_interior(&CompactSet::empty(SetKind::Interior, "empty"), &ks, &opts).unwrap();
        assert_eq!((e.primal_value, e.dual_value), (0.0, 0.0));
        let e = estimate_boundary(&CompactSet::empty(SetKind::Boundary, "empty"), &ks, &opts).unwrap();
        assert_eq!((e.primal_value, e.dual_value), (0.0, 0.0));
    }

    #[test]
    fn collar_contact_is_infeasible() {
        let ks = KernelSet::assemble(WeightedGrid::build(Shape::Square, 12).unwrap()).unwrap();
        let k = CompactSet::interior_points(ks.grid(), &[[0.1, 0.5]], "edge").unwrap();
        assert!(matches!(primal_interior(&k, &ks, &CapacityOptions::default()), Err(Error::Infeasible(_))));
    }

    #[test]
    fn bad_lambda() {
        let ks = KernelSet::assemble(WeightedGrid::build(Shape::Square, 8).unwrap()).unwrap();
        let eta = vec![0.0; ks.grid().num_interior()];
        assert!(matches!(chebyshev_bound(&eta, 0.0, &ks, &CapacityOptions::default()), Err(Error::BadLambda(_))));
    }
}
