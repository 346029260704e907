//! Monotone solvers for `-Δu + e^u - 1 = μ` with interior or boundary data.

use crate::error::{Error, Result};
use crate::grid::{Field, WeightKind, WeightedGrid};
use crate::kernels::KernelSet;
use crate::linalg;
use crate::measure::{BoundaryMeasure, InteriorMeasure};

pub const DEFAULT_SLOPE_TOL: f64 = 0.2;

/// Measure data for either problem.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemData {
    /// `-Δu + e^u - 1 = μ` in Ω, `u = 0` on ∂Ω.
    Interior(InteriorMeasure),
    /// `-Δu + e^u - 1 = 0` in Ω, `u = μ` on ∂Ω.
    Boundary(BoundaryMeasure),
}

impl ProblemData {
    pub fn validate(&self, grid: &WeightedGrid) -> Result<()> {
        match self {
            ProblemData::Interior(m) => m.validate(grid),
            ProblemData::Boundary(m) => m.validate(grid),
        }
    }

    /// Right-hand side `f + B g` of the discrete equation `A u + e^u - 1 = f + B g`.
    pub fn forcing(&self, grid: &WeightedGrid) -> Vec<f64> {
        match self {
            ProblemData::Interior(m) => m.nodal_density(grid),
            ProblemData::Boundary(m) => linalg::boundary_coupling(grid, &m.nodal_density(grid)),
        }
    }

    /// `𝔾[μ]` or `ℙ[μ]`.
    pub fn potential(&self, ks: &KernelSet) -> Result<Field> {
        match self {
            ProblemData::Interior(m) => ks.green_potential(m),
            ProblemData::Boundary(m) => ks.poisson_potential(m),
        }
    }

    pub fn total_mass(&self, grid: &WeightedGrid) -> f64 {
        match self {
            ProblemData::Interior(m) => m.total_mass(grid),
            ProblemData::Boundary(m) => m.total_mass(grid),
        }
    }

    /// Weight used by the admissibility integral: `dx` inside, `ρ dx` for boundary data.
    pub fn weight_kind(&self) -> WeightKind {
        match self {
            ProblemData::Interior(_) => WeightKind::Lebesgue,
            ProblemData::Boundary(_) => WeightKind::Rho,
        }
    }

    fn le(&self, other: &ProblemData, grid: &WeightedGrid) -> Result<bool> {
        match (self, other) {
            (ProblemData::Interior(a), ProblemData::Interior(b)) => Ok(a.le(b, grid)),
            (ProblemData::Boundary(a), ProblemData::Boundary(b)) => Ok(a.le(b, grid)),
            _ => Err(Error::NotComparable("interior and boundary data cannot be compared".into())),
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    /// Stop once `max |u_{k+1} - u_k|` drops below this.
    pub update_tol: f64,
    /// ... and the sup-norm residual of the discrete equation is below this.
    pub residual_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { update_tol: 1e-10, residual_tol: 1e-8, max_iter: 500 }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub u: Field,
    pub iterations: usize,
    /// Sup-norm residual before each outer step and at exit.
    pub residual_history: Vec<f64>,
    pub update_history: Vec<f64>,
    pub truncation_levels: Vec<f64>,
    /// `∫ (e^u - 1) dx`.
    pub exp_integral: f64,
    /// `∫ (e^u - 1) ρ dx`.
    pub exp_integral_rho: f64,
    /// `∫ (u + (e^u - 1) ζ₀) dx`.
    pub expk_integral: f64,
    /// Every outer iterate stayed below its predecessor.
    pub monotone: bool,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(0.0)
    }
}

fn residual(ks: &KernelSet, u: &[f64], eu: &[f64], forcing: &[f64]) -> Vec<f64> {
    let au = linalg::apply_laplacian(ks.grid(), u);
    (0..u.len()).map(|i| au[i] + (eu[i] - 1.0) - forcing[i]).collect()
}

fn exp_field(u: &[f64]) -> Result<Vec<f64>> {
    let eu: Vec<f64> = u.iter().map(|v| v.exp()).collect();
    if eu.iter().any(|v| !v.is_finite()) {
        let m = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return Err(Error::NotAdmissible(format!("e^u overflowed (max u = {m:e})")));
    }
    Ok(eu)
}

fn integrals(ks: &KernelSet, u: &[f64]) -> (f64, f64, f64) {
    let grid = ks.grid();
    let em1: Vec<f64> = u.iter().map(|v| v.exp_m1()).collect();
    let plain = grid.integrate(&em1, WeightKind::Lebesgue);
    let rho = grid.integrate(&em1, WeightKind::Rho);
    let z = ks.zeta0();
    let expk: Vec<f64> = (0..u.len()).map(|i| u[i] + em1[i] * z[i]).collect();
    (plain, rho, grid.integrate(&expk, WeightKind::Lebesgue))
}

/// Solves `A u + e^u - 1 = forcing` starting from a supersolution.
///
/// Each step solves `(A + diag e^{u_k}) δ = -R(u_k)`. Because `e^u` is convex,
/// every iterate stays a supersolution and the sequence decreases pointwise.
pub fn monotone_solve(ks: &KernelSet, forcing: &[f64], start: Field, opts: &SolverOptions) -> Result<SolveReport> {
    let grid = ks.grid();
    grid.check_field(&start)?;
    let mut u = start.0;
    let mut residual_history = Vec::new();
    let mut update_history = Vec::new();
    let mut monotone = true;
    let mut last_update = f64::INFINITY;
    let mut iterations = 0;
    loop {
        let eu = exp_field(&u)?;
        let r = residual(ks, &u, &eu, forcing);
        let res = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        residual_history.push(res);
        if last_update < opts.update_tol && res < opts.residual_tol {
            break;
        }
        if iterations == opts.max_iter {
            return Err(Error::NoConvergence { iterations, last_update });
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = linalg::solve(grid, Some(&eu), &rhs)?;
        last_update = 0.0;
        for (ui, d) in u.iter_mut().zip(&delta) {
            if *d > 1e-12 * (1.0 + ui.abs()) {
                monotone = false;
            }
            *ui += d;
            last_update = last_update.max(d.abs());
        }
        update_history.push(last_update);
        iterations += 1;
        // once the update is at rounding level further steps cannot lower the residual
        if last_update < opts.update_tol && res >= opts.residual_tol && iterations > 3 {
            let eu = exp_field(&u)?;
            let r = residual(ks, &u, &eu, forcing);
            let res_now = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if res_now >= opts.residual_tol && last_update < 1e-14 * (1.0 + u.iter().fold(0.0_f64, |m, v| m.max(v.abs()))) {
                return Err(Error::NoConvergence { iterations, last_update });
            }
        }
    }
    let (exp_integral, exp_integral_rho, expk_integral) = integrals(ks, &u);
    Ok(SolveReport {
        u: Field(u),
        iterations,
        residual_history,
        update_history,
        truncation_levels: Vec::new(),
        exp_integral,
        exp_integral_rho,
        expk_integral,
        monotone,
    })
}

pub fn solve_with(data: &ProblemData, ks: &KernelSet, opts: &SolverOptions) -> Result<SolveReport> {
    data.validate(ks.grid())?;
    let start = data.potential(ks)?;
    monotone_solve(ks, &data.forcing(ks.grid()), start, opts)
}

pub fn solve(data: &ProblemData, ks: &KernelSet) -> Result<SolveReport> {
    solve_with(data, ks, &SolverOptions::default())
}

pub fn solve_interior(mu: &InteriorMeasure, ks: &KernelSet) -> Result<SolveReport> {
    solve(&ProblemData::Interior(mu.clone()), ks)
}

pub fn solve_boundary(mu: &BoundaryMeasure, ks: &KernelSet) -> Result<SolveReport> {
    solve(&ProblemData::Boundary(mu.clone()), ks)
}

#[derive(Clone, Debug)]
pub struct TheoremAReport {
    /// Solution at the last truncation level.
    pub report: SolveReport,
    pub levels: Vec<f64>,
    /// `max (u_{k-1} - u_k)` between consecutive levels (first entry 0).
    pub violations: Vec<f64>,
    /// `∫ (u_k + (e^{u_k} - 1) ζ₀) dx` per level.
    pub expk_integrals: Vec<f64>,
    /// `c ‖μ‖` with `c = max |∂ζ₀/∂ν|`.
    pub bound: f64,
    pub c: f64,
}

impl TheoremAReport {
    pub fn max_violation(&self) -> f64 {
        self.violations.iter().cloned().fold(0.0, f64::max)
    }

    pub fn bound_holds(&self) -> bool {
        self.expk_integrals.iter().all(|v| *v <= self.bound)
    }
}

/// Geometric ladder `1, 2, 4, ..., 2^7`.
pub fn default_levels() -> Vec<f64> {
    (0..8).map(|i| 2f64.powi(i)).collect()
}

/// Solves with data `μ_S + min(k, μ_R)` for each level `k` (ascending).
pub fn theorem_a_scheme(mu: &BoundaryMeasure, ks: &KernelSet, k_levels: &[f64]) -> Result<TheoremAReport> {
    let grid = ks.grid();
    mu.validate(grid)?;
    if k_levels.is_empty() {
        return Err(Error::Config("no truncation levels".into()));
    }
    if k_levels.windows(2).any(|w| w[1] <= w[0]) || k_levels[0] < 0.0 {
        return Err(Error::Config("truncation levels must be nonnegative and strictly increasing".into()));
    }
    let singular = ks.poisson_potential(&mu.singular_part())?;
    let ex: Vec<f64> = singular.iter().map(|v| v.exp()).collect();
    let i_s = grid.integrate(&ex, WeightKind::Rho);
    if !i_s.is_finite() {
        return Err(Error::NotAdmissible("exp(P[μ_S]) is not ρ-integrable at this grid".into()));
    }
    let c = ks.normal_derivatives(ks.zeta0()).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let bound = c * mu.total_mass(grid);

    let mut prev: Option<Field> = None;
    let mut violations = Vec::new();
    let mut expk = Vec::new();
    let mut last = None;
    for &k in k_levels {
        let rep = solve_boundary(&mu.truncated(k), ks)?;
        let v = match &prev {
            None => 0.0,
            Some(p) => p.iter().zip(rep.u.iter()).map(|(a, b)| a - b).fold(0.0_f64, f64::max),
        };
        violations.push(v);
        expk.push(rep.expk_integral);
        prev = Some(rep.u.clone());
        last = Some(rep);
    }
    let mut report = last.expect("at least one level");
    report.truncation_levels = k_levels.to_vec();
    Ok(TheoremAReport { report, levels: k_levels.to_vec(), violations, expk_integrals: expk, bound, c })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    AdmissibleAtScale,
    DivergentTrend,
}

#[derive(Clone, Debug)]
pub struct AdmissibilityReport {
    pub verdict: Verdict,
    /// Least-squares slope of `ln I_h` against `ln(1/h)`.
    pub slope: f64,
    /// `(h, I_h)` per refinement; `I_h = ∞` on overflow.
    pub table: Vec<(f64, f64)>,
    pub annotation: Option<String>,
}

pub fn least_squares_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// `I_h = ∫ exp(𝔾[μ]) dx` (interior) or `∫ exp(ℙ[μ]) ρ dx` (boundary) at one grid.
pub fn exponential_integral(data: &ProblemData, ks: &KernelSet) -> Result<f64> {
    let pot = data.potential(ks)?;
    let mut ex = Vec::with_capacity(pot.len());
    for v in pot.iter() {
        let e = v.exp();
        if !e.is_finite() {
            return Err(Error::Overflow(format!("exp of potential value {v:e}")));
        }
        ex.push(e);
    }
    Ok(ks.grid().integrate(&ex, data.weight_kind()))
}

/// Refinement trend test for admissibility. `build` produces the data on each grid.
pub fn admissibility_test<F>(build: F, kernels: &[&KernelSet], slope_tol: f64) -> Result<AdmissibilityReport>
where
    F: Fn(&WeightedGrid) -> ProblemData,
{
    if kernels.len() < 3 {
        return Err(Error::Config("admissibility test needs at least 3 refinements".into()));
    }
    let mut table = Vec::new();
    let mut annotation = None;
    for ks in kernels {
        let data = build(ks.grid());
        let value = match exponential_integral(&data, ks) {
            Ok(v) => v,
            Err(Error::Overflow(msg)) => {
                annotation = Some(format!("overflow at h = {:e}: {msg}", ks.grid().h()));
                f64::INFINITY
            }
            Err(e) => return Err(e),
        };
        table.push((ks.grid().h(), value));
    }
    if table.iter().any(|(_, v)| !v.is_finite()) {
        return Ok(AdmissibilityReport { verdict: Verdict::DivergentTrend, slope: f64::INFINITY, table, annotation });
    }
    let x: Vec<f64> = table.iter().map(|(h, _)| (1.0 / h).ln()).collect();
    let y: Vec<f64> = table.iter().map(|(_, v)| v.ln()).collect();
    let slope = least_squares_slope(&x, &y);
    let verdict = if slope > slope_tol { Verdict::DivergentTrend } else { Verdict::AdmissibleAtScale };
    Ok(AdmissibilityReport { verdict, slope, table, annotation })
}

/// `D = max (u + 2 ln ρ)` over interior nodes.
pub fn keller_osserman_check(u: &[f64], grid: &WeightedGrid) -> f64 {
    u.iter().zip(grid.rho()).map(|(v, r)| v + 2.0 * r.ln()).fold(f64::NEG_INFINITY, f64::max)
}

/// `u_{μ₁} <= u_{μ₂} + 1e-10` pointwise, given `μ₁ <= μ₂`.
pub fn monotone_comparison(mu1: &ProblemData, mu2: &ProblemData, ks: &KernelSet) -> Result<bool> {
    if !mu1.le(mu2, ks.grid())? {
        return Err(Error::NotComparable("first measure is not below the second".into()));
    }
    let u1 = solve(mu1, ks)?.u;
    let u2 = solve(mu2, ks)?.u;
    Ok(u1.iter().zip(u2.iter()).all(|(a, b)| *a <= *b + 1e-10))
}

/// Samples a test function, which must vanish on the discrete boundary.
pub fn test_function<F: Fn([f64; 2]) -> f64>(grid: &WeightedGrid, f: F) -> Result<Field> {
    let on_boundary = grid.sample_boundary(&f).iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if on_boundary > 1e-12 {
        return Err(Error::TestNotAdmissible(on_boundary));
    }
    Ok(grid.sample(f))
}

/// Ten polynomial tests `b(x) x^j y^k`, `j + k <= 3`, where `b` vanishes on ∂Ω
/// (`x(1-x)y(1-y)` on the square, `R² - |x-c|²` on the disk, `x(1-x)` on the interval).
pub fn polynomial_test_basis(grid: &WeightedGrid) -> Result<Vec<Field>> {
    use crate::grid::{Shape, DISK_CENTER, DISK_RADIUS};
    let shape = grid.shape();
    let bubble = move |x: [f64; 2]| -> f64 {
        match shape {
            Shape::Interval => x[0] * (1.0 - x[0]),
            Shape::Square => x[0] * (1.0 - x[0]) * x[1] * (1.0 - x[1]),
            Shape::Disk => {
                DISK_RADIUS * DISK_RADIUS - (x[0] - DISK_CENTER[0]).powi(2) - (x[1] - DISK_CENTER[1]).powi(2)
            }
        }
    };
    // the disk bubble is negative on the staircase boundary; there the test is
    // the interior restriction, extended by zero
    let make = |f: &dyn Fn([f64; 2]) -> f64| -> Result<Field> {
        if shape == Shape::Disk {
            Ok(grid.sample(f))
        } else {
            test_function(grid, f)
        }
    };
    let mut out = Vec::new();
    if grid.dim() == 1 {
        for j in 0..10 {
            out.push(make(&|x| bubble(x) * x[0].powi(j))?);
        }
    } else {
        for j in 0..4 {
            for k in 0..4 - j {
                out.push(make(&|x| bubble(x) * x[0].powi(j) * x[1].powi(k as i32))?);
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct WeakResidual {
    pub per_test: Vec<f64>,
    pub max_abs: f64,
}

/// `R(ζ) = ∫ (-u Δζ + (e^u - 1) ζ) dx + ∫ ∂ζ/∂ν dμ` (boundary data) or
/// `... - ∫ ζ dμ` (interior data), for each test `ζ`.
///
/// `Δζ` is the discrete Laplacian, `∂ζ/∂ν` the one-sided second-order
/// difference, and interior atoms are paired with `ζ` interpolated at their
/// true position.
pub fn weak_residual(u: &[f64], data: &ProblemData, ks: &KernelSet, tests: &[Field]) -> Result<WeakResidual> {
    let grid = ks.grid();
    grid.check_field(u)?;
    data.validate(grid)?;
    let em1: Vec<f64> = u.iter().map(|v| v.exp_m1()).collect();
    let cell = grid.cell_measure();
    let mut per_test = Vec::with_capacity(tests.len());
    for z in tests {
        grid.check_field(z)?;
        let az = linalg::apply_laplacian(grid, z);
        let mut r: f64 = (0..u.len()).map(|i| u[i] * az[i] + em1[i] * z[i]).sum::<f64>() * cell;
        match data {
            ProblemData::Interior(mu) => {
                r -= mu.density.iter().zip(z.iter()).map(|(a, b)| a * b).sum::<f64>() * cell;
                for atom in &mu.atoms {
                    r -= atom.mass * grid.interpolate(z, atom.position);
                }
            }
            ProblemData::Boundary(mu) => {
                let g = mu.nodal_density(grid);
                let dn = ks.normal_derivatives(z);
                r += g.iter().zip(&dn).map(|(a, b)| a * b).sum::<f64>() * grid.boundary_cell_measure();
            }
        }
        per_test.push(r);
    }
    let max_abs = per_test.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(WeakResidual { per_test, max_abs })
}

/// Discrete outward flux `Σ ∂u/∂ν h^(d-1)` of an interior field with zero boundary values,
/// using the first-order difference that matches the five-point stencil.
pub fn discrete_boundary_flux(u: &[f64], grid: &WeightedGrid) -> f64 {
    let h = grid.h();
    (0..grid.num_interior()).map(|i| -(grid.boundary_neighbors(i).len() as f64) * u[i] / h).sum::<f64>()
        * grid.boundary_cell_measure()
}
