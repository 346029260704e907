//! Batch experiments: the point-mass threshold, the vanishing inequality on
//! small sets, punctured-domain extension, the boundary probe and refinement tables.

use std::f64::consts::PI;
use std::io::Write;
use std::path::PathBuf;

use crate::capacity::{self, CapacityOptions, CompactSet, SetKind};
use crate::error::{Error, Result};
use crate::grid::{Field, Shape, WeightKind, WeightedGrid};
use crate::kernels::KernelSet;
use crate::linalg;
use crate::measure::{BoundaryMeasure, InteriorMeasure};
use crate::orlicz::{luxemburg_norm_weighted, orlicz_norm_weighted, NFunction, Side};
use crate::solver::{self, least_squares_slope, AdmissibilityReport, ProblemData, Verdict};

pub const FOUR_PI: f64 = 4.0 * PI;

/// Target set `K`, resolved against a grid when an experiment runs.
#[derive(Clone, Debug, PartialEq)]
pub enum TargetSpec {
    Empty,
    Points(Vec<[f64; 2]>),
    Segment([f64; 2], [f64; 2]),
    /// Boundary node nearest `point` and `radius` neighbours on each side.
    BoundaryArc { point: [f64; 2], radius: usize },
}

impl TargetSpec {
    pub fn kind(&self) -> SetKind {
        match self {
            TargetSpec::BoundaryArc { .. } => SetKind::Boundary,
            _ => SetKind::Interior,
        }
    }

    pub fn resolve(&self, grid: &WeightedGrid) -> Result<CompactSet> {
        match self {
            TargetSpec::Empty => Ok(CompactSet::empty(SetKind::Interior, "empty")),
            TargetSpec::Points(p) => CompactSet::interior_points(grid, p, "points"),
            TargetSpec::Segment(a, b) => CompactSet::interior_segment(grid, *a, *b, "segment"),
            TargetSpec::BoundaryArc { point, radius } => CompactSet::boundary_arc(grid, *point, *radius, "arc"),
        }
    }

    /// Points of `K` used as centres of cutoff functions.
    fn centres(&self, grid: &WeightedGrid) -> Result<Vec<[f64; 2]>> {
        let k = self.resolve(grid)?;
        Ok(k.nodes
            .iter()
            .map(|&i| match k.kind {
                SetKind::Interior => grid.interior_point(i),
                SetKind::Boundary => grid.boundary_point(i),
            })
            .collect())
    }
}

/// Point masses plus a constant density.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureSpec {
    pub atoms: Vec<([f64; 2], f64)>,
    pub density: f64,
}

impl MeasureSpec {
    pub fn interior(&self, grid: &WeightedGrid) -> InteriorMeasure {
        let mut mu = InteriorMeasure::from_density(Field::constant(grid.num_interior(), self.density));
        for (p, m) in &self.atoms {
            mu = mu.with_atom(grid, *p, *m);
        }
        mu
    }

    /// Atoms snap to the nearest boundary node; the density becomes constant boundary data.
    pub fn boundary(&self, grid: &WeightedGrid) -> BoundaryMeasure {
        let mut mu = BoundaryMeasure::constant(grid, self.density);
        for (p, m) in &self.atoms {
            mu = mu.with_atom(grid.nearest_boundary(*p), *m);
        }
        mu
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative distance of the threshold estimate from 4π.
    pub threshold: f64,
    /// Slope above which `ln I_h` counts as diverging.
    pub slope: f64,
    /// Sup of the weak residual for an extended field.
    pub residual: f64,
    /// Minimal decay order of the extension correction.
    pub decay: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { threshold: 0.15, slope: solver::DEFAULT_SLOPE_TOL, residual: 1e-2, decay: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub shape: Shape,
    /// Grid sizes, strictly increasing.
    pub ladder: Vec<usize>,
    pub masses: Vec<f64>,
    pub measure: MeasureSpec,
    pub target: TargetSpec,
    /// Cutoff radii for shrinking families, in units of length.
    pub radii: Vec<f64>,
    /// Mass placed on `K` in the punctured solve.
    pub charge: f64,
    pub tol: Tolerances,
    pub output: Option<PathBuf>,
    /// Optional per-field dump.
    pub field_output: Option<PathBuf>,
}

impl ExperimentConfig {
    /// Defaults for each experiment name.
    pub fn preset(name: &str) -> Result<Self> {
        let centre = [0.5, 0.5];
        let base = ExperimentConfig {
            name: name.to_string(),
            shape: Shape::Square,
            ladder: vec![16, 32, 64],
            masses: Vec::new(),
            measure: MeasureSpec { atoms: Vec::new(), density: 0.0 },
            target: TargetSpec::Points(vec![centre]),
            radii: vec![0.2, 0.1, 0.05],
            charge: 0.0,
            tol: Tolerances::default(),
            output: None,
            field_output: None,
        };
        let cfg = match name {
            "removability" => ExperimentConfig {
                shape: Shape::Disk,
                ladder: vec![32, 64, 128],
                masses: vec![2.0, 8.0, 11.0, 14.0, 20.0],
                measure: MeasureSpec { atoms: vec![(centre, 1.0)], density: 0.0 },
                ..base
            },
            "theorem-b" => ExperimentConfig {
                ladder: vec![32],
                measure: MeasureSpec { atoms: vec![(centre, 6.0)], density: 0.0 },
                radii: vec![0.3, 0.2, 0.1, 0.05],
                ..base
            },
            "moderate" => ExperimentConfig {
                ladder: vec![32, 64, 128],
                measure: MeasureSpec { atoms: Vec::new(), density: 5.0 },
                ..base
            },
            "boundary-probe" => ExperimentConfig {
                target: TargetSpec::BoundaryArc { point: [0.5, 0.0], radius: 0 },
                radii: vec![0.15],
                ..base
            },
            "converge" => ExperimentConfig { ladder: vec![16, 32, 64, 128], ..base },
            "solve" | "capacity" | "kernel" | "norms" => ExperimentConfig { ladder: vec![32], ..base },
            other => return Err(Error::Config(format!("unknown experiment '{other}'"))),
        };
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ladder.is_empty() {
            return Err(Error::Config("empty grid ladder".into()));
        }
        if self.ladder.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("grid ladder must be strictly increasing".into()));
        }
        if self.ladder[0] < 3 {
            return Err(Error::TooCoarse(self.ladder[0]));
        }
        if self.masses.iter().any(|m| !(*m >= 0.0)) {
            return Err(Error::Config("masses must be nonnegative".into()));
        }
        if self.measure.atoms.iter().any(|(_, m)| !(*m >= 0.0)) || !(self.measure.density >= 0.0) {
            return Err(Error::Config("measure must be nonnegative".into()));
        }
        if self.radii.iter().any(|r| !(*r > 0.0)) {
            return Err(Error::Config("radii must be positive".into()));
        }
        if !(self.charge >= 0.0) {
            return Err(Error::Config("charge must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A CSV table with a fixed header.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Appends the rows of `other`, which must share the header.
    pub fn extend(&mut self, other: Table) {
        debug_assert_eq!(self.header, other.header);
        self.rows.extend(other.rows);
    }
}

fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Builds the kernels of a grid ladder, one thread per grid.
pub fn kernel_ladder(shape: Shape, ladder: &[usize]) -> Result<Vec<KernelSet>> {
    let built: Vec<Result<KernelSet>> = std::thread::scope(|s| {
        let handles: Vec<_> = ladder
            .iter()
            .map(|&n| s.spawn(move || KernelSet::assemble(WeightedGrid::build(shape, n)?)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("kernel assembly panicked")).collect()
    });
    built.into_iter().collect()
}

// ---------------------------------------------------------------------------
// removability threshold

#[derive(Clone, Debug)]
pub struct ThresholdReport {
    pub per_mass: Vec<(f64, AdmissibilityReport)>,
    /// Largest admissible mass below the smallest divergent one.
    pub lower: f64,
    pub upper: f64,
    pub m_star: f64,
    pub relative_error: f64,
    /// `lower < 4π < upper`.
    pub bracketed: bool,
    pub pass: bool,
}

impl ThresholdReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["mass", "h", "integral", "slope", "verdict"]);
        for (m, rep) in &self.per_mass {
            for (h, v) in &rep.table {
                t.push(vec![num(*m), num(*h), num(*v), num(rep.slope), format!("{:?}", rep.verdict)]);
            }
        }
        t
    }
}

/// Scans a ladder of point masses at the first atom of the measure spec.
pub fn run_removability_threshold(cfg: &ExperimentConfig) -> Result<ThresholdReport> {
    cfg.validate()?;
    let kernels = kernel_ladder(cfg.shape, &cfg.ladder)?;
    let refs: Vec<&KernelSet> = kernels.iter().collect();
    let at = cfg.measure.atoms.first().map(|a| a.0).unwrap_or([0.5, 0.5]);
    let mut masses = cfg.masses.clone();
    masses.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut per_mass = Vec::new();
    for &m in &masses {
        let build = |g: &WeightedGrid| ProblemData::Interior(InteriorMeasure::zero(g).with_atom(g, at, m));
        per_mass.push((m, solver::admissibility_test(build, &refs, cfg.tol.slope)?));
    }
    let upper = per_mass.iter().find(|(_, r)| r.verdict == Verdict::DivergentTrend).map(|(m, _)| *m);
    let upper = upper.ok_or_else(|| Error::LadderTooCoarse("no mass in the ladder diverges".into()))?;
    let lower = per_mass
        .iter()
        .filter(|(m, r)| *m < upper && r.verdict == Verdict::AdmissibleAtScale)
        .map(|(m, _)| *m)
        .fold(f64::NAN, f64::max);
    if lower.is_nan() {
        return Err(Error::LadderTooCoarse("no admissible mass below the first divergent one".into()));
    }
    let m_star = 0.5 * (lower + upper);
    let relative_error = (m_star - FOUR_PI).abs() / FOUR_PI;
    Ok(ThresholdReport {
        per_mass,
        lower,
        upper,
        m_star,
        relative_error,
        bracketed: lower < FOUR_PI && FOUR_PI < upper,
        pass: relative_error <= cfg.tol.threshold,
    })
}

// ---------------------------------------------------------------------------
// vanishing inequality

/// Cutoff equal to 1 within `r` of a centre and decaying to 0 at `2r`.
pub fn cutoff(x: [f64; 2], centres: &[[f64; 2]], r: f64) -> f64 {
    centres
        .iter()
        .map(|c| {
            let t = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)).sqrt() / r;
            if t <= 1.0 {
                1.0
            } else if t >= 2.0 {
                0.0
            } else {
                (0.5 * PI * (t - 1.0)).cos().powi(2)
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TheoremBRow {
    /// `"cutoff"` or `"primal"`.
    pub family: String,
    pub radius: f64,
    /// `μ(K)`.
    pub mass_on_k: f64,
    /// The left side: `μ(K)` inside, the flux pairing `Σ (B g) ζ h^d` for boundary data.
    pub lhs: f64,
    pub exp_term: f64,
    pub holder_term: f64,
    pub u_norm: f64,
    /// `‖Δη_n‖_{L_{P*}}` or `‖η_n‖_{N^{L ln L}}`.
    pub eta_norm: f64,
    /// `|∫ u Δζ - ∫ Δu ζ|` or the two summation orders of the boundary pairing.
    pub fubini: f64,
    pub holds: bool,
}

impl TheoremBRow {
    pub fn rhs(&self) -> f64 {
        self.exp_term + self.holder_term
    }

    pub fn margin(&self) -> f64 {
        self.rhs() - self.lhs
    }
}

#[derive(Clone, Debug)]
pub struct TheoremBReport {
    pub kind: SetKind,
    pub rows: Vec<TheoremBRow>,
}

impl TheoremBReport {
    pub fn all_hold(&self) -> bool {
        self.rows.iter().all(|r| r.holds)
    }

    pub fn max_fubini(&self) -> f64 {
        self.rows.iter().map(|r| r.fubini).fold(0.0, f64::max)
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&[
            "family", "radius", "mass_on_k", "lhs", "exp_term", "holder_term", "rhs", "margin", "u_norm", "eta_norm",
            "fubini", "holds",
        ]);
        for r in &self.rows {
            t.push(vec![
                r.family.clone(),
                num(r.radius),
                num(r.mass_on_k),
                num(r.lhs),
                num(r.exp_term),
                num(r.holder_term),
                num(r.rhs()),
                num(r.margin()),
                num(r.u_norm),
                num(r.eta_norm),
                num(r.fubini),
                r.holds.to_string(),
            ]);
        }
        t
    }
}

const HOLDS_SLACK: f64 = 1e-9;

/// `μ(K) <= ∫(e^u - 1)η + 3‖u‖_{L_P}‖Δη‖_{L_{P*}}` for each cutoff radius and
/// for the primal minimizer of `K`; the boundary version uses `ζ = ρ* ℙ[η]`.
/// Runs on the last grid of the ladder.
pub fn run_theorem_b_inequality(cfg: &ExperimentConfig) -> Result<TheoremBReport> {
    cfg.validate()?;
    let n = *cfg.ladder.last().expect("validated");
    let ks = KernelSet::assemble(WeightedGrid::build(cfg.shape, n)?)?;
    theorem_b_on(&ks, cfg)
}

pub fn theorem_b_on(ks: &KernelSet, cfg: &ExperimentConfig) -> Result<TheoremBReport> {
    let grid = ks.grid();
    let k = cfg.target.resolve(grid)?;
    let centres = cfg.target.centres(grid)?;
    let opts = CapacityOptions::default();
    let nf = NFunction::exponential();
    let mut rows = Vec::new();
    match cfg.target.kind() {
        SetKind::Interior => {
            let mu = cfg.measure.interior(grid);
            let u = solver::solve_interior(&mu, ks)?.u;
            let w = grid.weights(WeightKind::Lebesgue);
            let u_norm = luxemburg_norm_weighted(&u, &w, &nf, Side::P)?;
            let dens = mu.nodal_density(grid);
            let cell = grid.cell_measure();
            let mass_on_k: f64 = k.nodes.iter().map(|&i| dens[i] * cell).sum();
            let au = linalg::apply_laplacian(grid, &u);
            let mut eval = |family: &str, radius: f64, eta: Vec<f64>| -> Result<()> {
                let ae = linalg::apply_laplacian(grid, &eta);
                let eta_norm = if eta.iter().all(|v| *v == 0.0) { 0.0 } else { orlicz_norm_weighted(&ae, &w, &nf, Side::PStar)? };
                let exp_term: f64 = u.iter().zip(&eta).map(|(a, e)| a.exp_m1() * e).sum::<f64>() * cell;
                let a: f64 = u.iter().zip(&ae).map(|(x, y)| x * y).sum::<f64>() * cell;
                let b: f64 = au.iter().zip(&eta).map(|(x, y)| x * y).sum::<f64>() * cell;
                let holder_term = 3.0 * u_norm * eta_norm;
                rows.push(TheoremBRow {
                    family: family.into(),
                    radius,
                    mass_on_k,
                    lhs: mass_on_k,
                    exp_term,
                    holder_term,
                    u_norm,
                    eta_norm,
                    fubini: (a - b).abs(),
                    holds: mass_on_k <= exp_term + holder_term + HOLDS_SLACK,
                });
                Ok(())
            };
            for &r in &cfg.radii {
                let r = r.max(grid.h());
                let eta = grid.sample(|x| cutoff(x, &centres, r)).0;
                eval("cutoff", r, eta)?;
            }
            if !k.is_empty() {
                let p = capacity::primal_interior(&k, ks, &opts)?;
                eval("primal", f64::NAN, p.eta)?;
            }
        }
        SetKind::Boundary => {
            let mu = cfg.measure.boundary(grid);
            let u = solver::solve_boundary(&mu, ks)?.u;
            let w = grid.weights(WeightKind::Rho);
            let u_norm = luxemburg_norm_weighted(&u, &w, &nf, Side::P)?;
            let g = mu.nodal_density(grid);
            let mass_on_k: f64 = k.nodes.iter().map(|&b| g[b]).sum::<f64>() * grid.boundary_cell_measure();
            let bg = linalg::boundary_coupling(grid, &g);
            let cell = grid.cell_measure();
            let mut eval = |family: &str, radius: f64, eta: Vec<f64>| -> Result<()> {
                let p = ks.poisson_apply(&eta)?;
                let zeta: Vec<f64> = p.iter().zip(ks.rho_star().iter()).map(|(a, b)| a * b).collect();
                let eta_norm = if eta.iter().all(|v| *v == 0.0) { 0.0 } else { capacity::boundary_norm(&eta, ks)? };
                let lhs: f64 = bg.iter().zip(&zeta).map(|(a, z)| a * z).sum::<f64>() * cell;
                let exp_term: f64 = u.iter().zip(&zeta).map(|(a, z)| a.exp_m1() * z).sum::<f64>() * cell;
                let holder_term = u_norm * eta_norm;
                let (a, b) = capacity::pairing(&eta, &mu, ks)?;
                rows.push(TheoremBRow {
                    family: family.into(),
                    radius,
                    mass_on_k,
                    lhs,
                    exp_term,
                    holder_term,
                    u_norm,
                    eta_norm,
                    fubini: (a - b).abs(),
                    holds: lhs <= exp_term + holder_term + HOLDS_SLACK,
                });
                Ok(())
            };
            for &r in &cfg.radii {
                let r = r.max(grid.h());
                let eta = grid.sample_boundary(|x| cutoff(x, &centres, r));
                eval("cutoff", r, eta)?;
            }
            if !k.is_empty() {
                let p = capacity::primal_boundary(&k, ks, &opts)?;
                eval("primal", f64::NAN, p.eta)?;
            }
        }
    }
    Ok(TheoremBReport { kind: k.kind, rows })
}

// ---------------------------------------------------------------------------
// moderate extension

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Extension {
    Extends,
    Obstructed,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModerateRow {
    pub n: usize,
    pub radius: f64,
    /// `-∫ (ζ Δη + 2∇ζ·∇η) u dx`.
    pub correction: f64,
    /// Sup of the weak residual of the punctured solution over all of Ω.
    pub residual: f64,
    /// `max |u_punctured - u_full|`.
    pub distance_to_full: f64,
}

#[derive(Clone, Debug)]
pub struct ModerateReport {
    pub rows: Vec<ModerateRow>,
    /// Slope of `ln |correction|` against `ln r`.
    pub decay: f64,
    pub verdict: Extension,
    /// The punctured solution on the finest grid.
    pub u: Field,
}

impl ModerateReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["n", "radius", "correction", "residual", "distance_to_full", "decay", "verdict"]);
        for r in &self.rows {
            t.push(vec![
                r.n.to_string(),
                num(r.radius),
                num(r.correction),
                num(r.residual),
                num(r.distance_to_full),
                num(self.decay),
                format!("{:?}", self.verdict),
            ]);
        }
        t
    }
}

/// Solves `A u + [i ∉ K](e^u - 1) = f + c`: the equation is dropped on `K`,
/// where `u` is only coupled to its neighbours (harmonically when `c = 0` there).
pub fn punctured_solve(ks: &KernelSet, on_k: &[bool], forcing: &[f64]) -> Result<Field> {
    let grid = ks.grid();
    grid.check_field(forcing)?;
    let mut u = ks.green_apply(forcing)?.0;
    let opts = solver::SolverOptions::default();
    let mut last_update = f64::INFINITY;
    for _ in 0..opts.max_iter {
        let au = linalg::apply_laplacian(grid, &u);
        let mut extra = vec![0.0; u.len()];
        let mut r = vec![0.0; u.len()];
        for i in 0..u.len() {
            r[i] = au[i] - forcing[i];
            if !on_k[i] {
                let e = u[i].exp();
                if !e.is_finite() {
                    return Err(Error::NotAdmissible(format!("e^u overflowed at node {i}")));
                }
                r[i] += e - 1.0;
                extra[i] = e;
            }
        }
        let res = r.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if last_update < opts.update_tol && res < opts.residual_tol {
            return Ok(Field(u));
        }
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let delta = linalg::solve(grid, Some(&extra), &rhs)?;
        last_update = delta.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        for (a, d) in u.iter_mut().zip(&delta) {
            *a += d;
        }
    }
    Err(Error::NoConvergence { iterations: opts.max_iter, last_update })
}

/// Punctured solves with bounded data and `cfg.charge` spread over `K`, one per
/// grid of the ladder, with cutoffs of radius `3h` around `K`.
pub fn run_moderate_extension(cfg: &ExperimentConfig) -> Result<ModerateReport> {
    cfg.validate()?;
    if cfg.target.kind() != SetKind::Interior {
        return Err(Error::Config("moderate extension needs an interior target".into()));
    }
    if cfg.ladder.len() < 3 {
        return Err(Error::LadderTooCoarse("need at least 3 grids".into()));
    }
    let kernels = kernel_ladder(cfg.shape, &cfg.ladder)?;
    let mut rows = Vec::new();
    let mut u_last = Field(Vec::new());
    for ks in &kernels {
        let grid = ks.grid();
        let k = cfg.target.resolve(grid)?;
        let centres = cfg.target.centres(grid)?;
        let data = cfg.measure.interior(grid);
        let mut forcing = data.nodal_density(grid);
        let mut on_k = vec![false; grid.num_interior()];
        for &i in &k.nodes {
            on_k[i] = true;
            forcing[i] += cfg.charge / (k.nodes.len() as f64 * grid.cell_measure());
        }
        let u = punctured_solve(ks, &on_k, &forcing)?;
        let full = solver::solve_interior(&data, ks)?.u;
        let distance_to_full = u.iter().zip(full.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let tests = solver::polynomial_test_basis(grid)?;
        let residual = solver::weak_residual(&u, &ProblemData::Interior(data), ks, &tests)?.max_abs;

        let radius = 3.0 * grid.h();
        let eta = grid.sample(|x| cutoff(x, &centres, radius));
        let zeta = &tests[0];
        let correction = if k.is_empty() {
            0.0
        } else {
            // Σ η (ζ A u - u A ζ) h^d, the discrete form of -∫(ζΔη + 2∇ζ·∇η)u
            let au = linalg::apply_laplacian(grid, &u);
            let az = linalg::apply_laplacian(grid, zeta);
            (0..u.len()).map(|i| eta[i] * (zeta[i] * au[i] - u[i] * az[i])).sum::<f64>() * grid.cell_measure()
        };
        rows.push(ModerateRow { n: grid.n(), radius, correction, residual, distance_to_full });
        u_last = u;
    }
    let trivial = rows.iter().all(|r| r.correction == 0.0);
    let decay = if trivial {
        f64::INFINITY
    } else {
        let x: Vec<f64> = rows.iter().map(|r| r.radius.ln()).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.correction.abs().max(f64::MIN_POSITIVE).ln()).collect();
        least_squares_slope(&x, &y)
    };
    let last_residual = rows.last().map(|r| r.residual).unwrap_or(0.0);
    let verdict =
        if decay >= cfg.tol.decay && last_residual <= cfg.tol.residual { Extension::Extends } else { Extension::Obstructed };
    Ok(ModerateReport { rows, decay, verdict, u: u_last })
}

// ---------------------------------------------------------------------------
// boundary probe

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub family: String,
    pub n: usize,
    pub h: f64,
    /// `‖η‖_{N^{L ln L}}`.
    pub norm: f64,
    /// `∫ |Δ(ρ*ℙ[η])| ln(1 + ρ⁻²|Δ(ρ*ℙ[η])|) dx`.
    pub integral: f64,
}

#[derive(Clone, Debug)]
pub struct ProbeReport {
    pub rows: Vec<ProbeRow>,
    /// Per family: slope of `ln integral` against `ln(1/h)` and whether the integral decreased at every step.
    pub trends: Vec<(String, f64, bool)>,
}

impl ProbeReport {
    pub fn table(&self) -> Table {
        let mut t = Table::new(&["family", "n", "h", "norm", "integral", "slope", "decreasing"]);
        for r in &self.rows {
            let (_, slope, dec) = self.trends.iter().find(|t| t.0 == r.family).expect("trend per family");
            t.push(vec![r.family.clone(), r.n.to_string(), num(r.h), num(r.norm), num(r.integral), num(*slope), dec.to_string()]);
        }
        t
    }
}

/// The integral that controls boundary removability, for boundary data `η`.
pub fn boundary_estimate_integral(eta: &[f64], ks: &KernelSet) -> Result<f64> {
    let grid = ks.grid();
    let p = ks.poisson_apply(eta)?;
    let y: Vec<f64> = p.iter().zip(ks.rho_star().iter()).map(|(a, b)| a * b).collect();
    let v = linalg::apply_laplacian(grid, &y);
    let f: Vec<f64> = v.iter().zip(grid.rho()).map(|(a, r)| a.abs() * (a.abs() / (r * r)).ln_1p()).collect();
    Ok(grid.integrate(&f, WeightKind::Lebesgue))
}

/// Tabulates the norm and the estimate integral over the ladder for a fixed
/// cutoff of radius `radii[0]` and for the primal minimizers of `K`.
pub fn run_boundary_probe(cfg: &ExperimentConfig) -> Result<ProbeReport> {
    cfg.validate()?;
    if cfg.target.kind() != SetKind::Boundary {
        return Err(Error::Config("boundary probe needs a boundary target".into()));
    }
    let kernels = kernel_ladder(cfg.shape, &cfg.ladder)?;
    let opts = CapacityOptions::default();
    let r = cfg.radii.first().copied().unwrap_or(0.15);
    let mut rows = Vec::new();
    for ks in &kernels {
        let grid = ks.grid();
        let centres = cfg.target.centres(grid)?;
        let k = cfg.target.resolve(grid)?;
        let fixed = grid.sample_boundary(|x| cutoff(x, &centres, r));
        let primal = capacity::primal_boundary(&k, ks, &opts)?.eta;
        for (family, eta) in [("cutoff", fixed), ("primal", primal)] {
            let norm = if eta.iter().all(|v| *v == 0.0) { 0.0 } else { capacity::boundary_norm(&eta, ks)? };
            rows.push(ProbeRow {
                family: family.into(),
                n: grid.n(),
                h: grid.h(),
                norm,
                integral: boundary_estimate_integral(&eta, ks)?,
            });
        }
    }
    let mut trends = Vec::new();
    for family in ["cutoff", "primal"] {
        let fam: Vec<&ProbeRow> = rows.iter().filter(|r| r.family == family).collect();
        let slope = if fam.len() >= 2 && fam.iter().all(|r| r.integral > 0.0) {
            let x: Vec<f64> = fam.iter().map(|r| (1.0 / r.h).ln()).collect();
            let y: Vec<f64> = fam.iter().map(|r| r.integral.ln()).collect();
            least_squares_slope(&x, &y)
        } else {
            f64::NAN
        };
        let decreasing = fam.windows(2).all(|w| w[1].integral < w[0].integral);
        trends.push((family.to_string(), slope, decreasing));
    }
    Ok(ProbeReport { rows, trends })
}

// ---------------------------------------------------------------------------
// convergence suite

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub check: String,
    pub n: usize,
    pub h: f64,
    pub value: f64,
    /// Distance to the closed form, or to the previous grid for the capacity row.
    pub error: f64,
    /// `ln(e_prev / e) / ln(h_prev / h)`.
    pub order: f64,
}

fn with_orders(mut rows: Vec<ConvergenceRow>) -> Vec<ConvergenceRow> {
    for i in 1..rows.len() {
        let (a, b) = (&rows[i - 1], &rows[i]);
        rows[i].order = if a.error > 0.0 && b.error > 0.0 { (a.error / b.error).ln() / (a.h / b.h).ln() } else { f64::NAN };
    }
    rows
}

pub fn convergence_table(rows: &[ConvergenceRow]) -> Table {
    let mut t = Table::new(&["check", "n", "h", "value", "error", "order"]);
    for r in rows {
        t.push(vec![r.check.clone(), r.n.to_string(), num(r.h), num(r.value), num(r.error), num(r.order)]);
    }
    t
}

/// Max error of the discrete interval Green function against `min(x,y)(1 - max(x,y))`.
pub fn interval_green_error(ks: &KernelSet) -> Result<f64> {
    let grid = ks.grid();
    let mut err = 0.0_f64;
    for y in 0..grid.num_interior() {
        let col = ks.green_column(y)?;
        let ys = grid.interior_point(y)[0];
        for (x, g) in col.iter().enumerate() {
            let xs = grid.interior_point(x)[0];
            err = err.max((g - xs.min(ys) * (1.0 - xs.max(ys))).abs());
        }
    }
    Ok(err)
}

pub fn interval_zeta0_error(ks: &KernelSet) -> f64 {
    let grid = ks.grid();
    ks.zeta0()
        .iter()
        .enumerate()
        .map(|(i, z)| {
            let x = grid.interior_point(i)[0];
            (z - 0.5 * x * (1.0 - x)).abs()
        })
        .fold(0.0, f64::max)
}

/// Eigenvalue, interval Green function, interval torsion and singleton capacity
/// tables across the ladder. Eigenvalue and capacity rows use `cfg.shape`.
pub fn run_convergence_suite(cfg: &ExperimentConfig) -> Result<Vec<ConvergenceRow>> {
    cfg.validate()?;
    let kernels = kernel_ladder(cfg.shape, &cfg.ladder)?;
    let intervals = kernel_ladder(Shape::Interval, &cfg.ladder)?;
    let exact = match cfg.shape {
        Shape::Interval => PI * PI,
        Shape::Square => 2.0 * PI * PI,
        // first zero of J₀, scaled to radius 1/2
        Shape::Disk => (2.404_825_557_695_773 / 0.5_f64).powi(2),
    };
    let mut eig = Vec::new();
    let mut cap = Vec::new();
    let mut prev_cap: Option<f64> = None;
    for ks in &kernels {
        let g = ks.grid();
        let l = ks.lambda();
        eig.push(ConvergenceRow { check: "eigenvalue".into(), n: g.n(), h: g.h(), value: l, error: (l - exact).abs() / exact, order: f64::NAN });
        let y = g.nearest_interior([0.5, 0.5]);
        let c = capacity::interior_singleton_closed_form(y, ks)?;
        let error = prev_cap.map_or(f64::NAN, |p| (c - p).abs());
        cap.push(ConvergenceRow { check: "singleton_capacity".into(), n: g.n(), h: g.h(), value: c, error, order: f64::NAN });
        prev_cap = Some(c);
    }
    let mut green = Vec::new();
    let mut zeta = Vec::new();
    for ks in &intervals {
        let g = ks.grid();
        let e = interval_green_error(ks)?;
        green.push(ConvergenceRow { check: "green_interval".into(), n: g.n(), h: g.h(), value: e, error: e, order: f64::NAN });
        let e = interval_zeta0_error(ks);
        zeta.push(ConvergenceRow { check: "zeta0_interval".into(), n: g.n(), h: g.h(), value: e, error: e, order: f64::NAN });
    }
    let mut out = with_orders(eig);
    out.extend(with_orders(green));
    out.extend(with_orders(zeta));
    out.extend(with_orders(cap));
    Ok(out)
}

/// Writes `table` to `cfg.output`, or to `out` when no path is set.
pub fn emit<W: Write>(table: &Table, cfg: &ExperimentConfig, out: W) -> Result<()> {
    match &cfg.output {
        Some(path) => table.write_csv(std::fs::File::create(path)?),
        None => table.write_csv(out),
    }
}
