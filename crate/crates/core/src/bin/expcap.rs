use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use expcap::capacity::{self, CapacityOptions, PrimalMethod, SetKind};
use expcap::config;
use expcap::experiments::{self, ExperimentConfig, Table};
use expcap::grid::{read_field_csv, write_field_csv, WeightKind, WeightedGrid};
use expcap::kernels::KernelSet;
use expcap::orlicz::{luxemburg_norm_weighted, orlicz_norm_weighted, NFunction, Side};
use expcap::solver::{self, ProblemData};
use expcap::{Error, Result};

#[derive(Parser)]
#[command(name = "expcap", version, about = "Orlicz capacities and the exponential equation on model grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Luxemburg and Orlicz norms of a list of values or of a field file.
    Norms(NormsArgs),
    /// Eigenpair, torsion function and Green matrix of a grid.
    Kernel(KernelArgs),
    /// Solves the equation with interior or boundary data.
    Solve(SolveArgs),
    /// Primal and dual capacity estimates of a target set.
    Capacity(CapacityArgs),
    /// Point-mass admissibility threshold over a grid ladder.
    Removability(Common),
    /// The vanishing inequality for shrinking cutoffs around a target set.
    TheoremB(Common),
    /// Extension of a punctured solution across the target set.
    Moderate(Common),
    /// Norm and estimate integral of boundary cutoffs over a grid ladder.
    BoundaryProbe(Common),
    /// Refinement tables for kernels and capacities.
    Converge(Common),
}

#[derive(Args, Clone, Default)]
struct Common {
    /// `key = value` config file; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    shape: Option<String>,
    /// Grid ladder, e.g. `32,64,128`.
    #[arg(long)]
    ladder: Option<String>,
    /// Single grid size (shorthand for a one-entry ladder).
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    masses: Option<String>,
    /// Atoms as `x y m; x y m`.
    #[arg(long)]
    atoms: Option<String>,
    #[arg(long)]
    density: Option<f64>,
    /// `empty`, `points x y; ...`, `segment x0 y0 x1 y1` or `arc x y r`.
    #[arg(long)]
    target: Option<String>,
    #[arg(long)]
    radii: Option<String>,
    #[arg(long)]
    charge: Option<f64>,
    /// CSV output path (stdout when absent).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Per-field CSV dump.
    #[arg(long)]
    field_output: Option<PathBuf>,
    /// Any config key, as `key=value`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl Common {
    fn resolve(&self, name: &str) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => config::parse(&std::fs::read_to_string(path)?, name)?,
            None => ExperimentConfig::preset(name)?,
        };
        let mut put = |k: &str, v: Option<String>| -> Result<()> {
            match v {
                Some(v) => config::apply(&mut cfg, k, &v),
                None => Ok(()),
            }
        };
        put("shape", self.shape.clone())?;
        put("ladder", self.ladder.clone())?;
        put("ladder", self.n.map(|n| n.to_string()))?;
        put("masses", self.masses.clone())?;
        put("atoms", self.atoms.clone())?;
        put("density", self.density.map(|d| d.to_string()))?;
        put("target", self.target.clone())?;
        put("radii", self.radii.clone())?;
        put("charge", self.charge.map(|d| d.to_string()))?;
        put("output", self.output.as_ref().map(|p| p.display().to_string()))?;
        put("field_output", self.field_output.as_ref().map(|p| p.display().to_string()))?;
        for kv in &self.set {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::Parse(format!("--set expects key=value, got '{kv}'")))?;
            config::apply(&mut cfg, k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct NormsArgs {
    /// Comma-separated values; weights default to 1.
    #[arg(long, conflicts_with = "field")]
    values: Option<String>,
    #[arg(long)]
    weights: Option<String>,
    /// Field file written by `solve --field-output`.
    #[arg(long)]
    field: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct KernelArgs {
    /// Also write the Green matrix as CSV (at most 64x64 interior nodes).
    #[arg(long)]
    green: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SolveArgs {
    /// Atoms and density are boundary data instead of interior sources.
    #[arg(long)]
    boundary: bool,
    #[command(flatten)]
    common: Common,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Newton,
    Subgradient,
}

#[derive(Args)]
struct CapacityArgs {
    #[arg(long, value_enum, default_value = "newton")]
    method: Method,
    #[command(flatten)]
    common: Common,
}

fn emit(table: &Table, cfg: &ExperimentConfig) -> Result<()> {
    experiments::emit(table, cfg, io::stdout().lock())
}

fn single_grid(cfg: &ExperimentConfig) -> Result<KernelSet> {
    let n = *cfg.ladder.last().expect("validated ladder");
    KernelSet::assemble(WeightedGrid::build(cfg.shape, n)?)
}

fn dump_field(cfg: &ExperimentConfig, grid: &WeightedGrid, f: &[f64], kind: WeightKind) -> Result<()> {
    if let Some(path) = &cfg.field_output {
        write_field_csv(std::fs::File::create(path)?, grid, f, kind)?;
    }
    Ok(())
}

fn parse_numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|_| Error::Parse(format!("not a number: '{}'", v.trim()))))
        .collect()
}

fn norms(args: &NormsArgs) -> Result<()> {
    let cfg = args.common.resolve("norms")?;
    let (values, weights) = match (&args.values, &args.field) {
        (Some(v), _) => {
            let values = parse_numbers(v)?;
            let weights = match &args.weights {
                Some(w) => parse_numbers(w)?,
                None => vec![1.0; values.len()],
            };
            if weights.len() != values.len() {
                return Err(Error::GridMismatch("values and weights differ in length".into()));
            }
            (values, weights)
        }
        (None, Some(path)) => {
            let grid = WeightedGrid::build(cfg.shape, *cfg.ladder.last().expect("validated"))?;
            let (f, kind) = read_field_csv(std::fs::File::open(path)?, &grid)?;
            (f.0, grid.weights(kind))
        }
        (None, None) => return Err(Error::Config("give --values or --field".into())),
    };
    let nf = NFunction::exponential();
    let mut t = Table::new(&["side", "luxemburg", "orlicz"]);
    for (name, side) in [("P", Side::P), ("P*", Side::PStar)] {
        let l = luxemburg_norm_weighted(&values, &weights, &nf, side)?;
        let o = orlicz_norm_weighted(&values, &weights, &nf, side)?;
        t.push(vec![name.into(), format!("{l:?}"), format!("{o:?}")]);
    }
    emit(&t, &cfg)
}

fn kernel(args: &KernelArgs) -> Result<()> {
    let cfg = args.common.resolve("kernel")?;
    let ks = single_grid(&cfg)?;
    let g = ks.grid();
    let mut t = Table::new(&["shape", "n", "h", "lambda", "eigen_residual", "hopf_constant", "zeta0_max"]);
    t.push(vec![
        g.shape().to_string(),
        g.n().to_string(),
        format!("{:?}", g.h()),
        format!("{:?}", ks.lambda()),
        format!("{:?}", ks.eigen_residual()),
        format!("{:?}", ks.hopf_constant()),
        format!("{:?}", ks.zeta0().max_abs()),
    ]);
    emit(&t, &cfg)?;
    if let Some(path) = &args.green {
        ks.export_green_csv(std::fs::File::create(path)?)?;
    }
    dump_field(&cfg, g, ks.rho_star(), WeightKind::Lebesgue)
}

fn solve(args: &SolveArgs) -> Result<()> {
    let cfg = args.common.resolve("solve")?;
    let ks = single_grid(&cfg)?;
    let g = ks.grid();
    let data = if args.boundary {
        ProblemData::Boundary(cfg.measure.boundary(g))
    } else {
        ProblemData::Interior(cfg.measure.interior(g))
    };
    let rep = solver::solve(&data, &ks)?;
    let tests = solver::polynomial_test_basis(g)?;
    let wr = solver::weak_residual(&rep.u, &data, &ks, &tests)?;
    let mut t = Table::new(&["n", "h", "iterations", "residual", "max_u", "exp_integral", "exp_integral_rho", "weak_residual"]);
    t.push(vec![
        g.n().to_string(),
        format!("{:?}", g.h()),
        rep.iterations.to_string(),
        format!("{:?}", rep.final_residual()),
        format!("{:?}", rep.u.max_abs()),
        format!("{:?}", rep.exp_integral),
        format!("{:?}", rep.exp_integral_rho),
        format!("{:?}", wr.max_abs),
    ]);
    emit(&t, &cfg)?;
    dump_field(&cfg, g, &rep.u, data.weight_kind())
}

fn capacity_cmd(args: &CapacityArgs) -> Result<()> {
    let cfg = args.common.resolve("capacity")?;
    let ks = single_grid(&cfg)?;
    let k = cfg.target.resolve(ks.grid())?;
    let method = match args.method {
        Method::Newton => PrimalMethod::ProjectedNewton,
        Method::Subgradient => PrimalMethod::Subgradient,
    };
    let opts = CapacityOptions { method, ..Default::default() };
    let e = match k.kind {
        SetKind::Interior => capacity::estimate_interior(&k, &ks, &opts)?,
        SetKind::Boundary => capacity::estimate_boundary(&k, &ks, &opts)?,
    };
    let mut t = Table::new(&["set", "kind", "nodes", "primal", "dual", "gap", "primal_iterations", "converged"]);
    t.push(vec![
        e.label.clone(),
        format!("{:?}", k.kind),
        k.nodes.len().to_string(),
        format!("{:?}", e.primal_value),
        format!("{:?}", e.dual_value),
        format!("{:?}", e.relative_gap()),
        e.primal_iterations.to_string(),
        e.primal_converged.to_string(),
    ]);
    emit(&t, &cfg)?;
    if let (Some(path), SetKind::Interior) = (&cfg.field_output, k.kind) {
        write_field_csv(std::fs::File::create(path)?, ks.grid(), &e.eta_star, WeightKind::Lebesgue)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Norms(a) => norms(&a),
        Command::Kernel(a) => kernel(&a),
        Command::Solve(a) => solve(&a),
        Command::Capacity(a) => capacity_cmd(&a),
        Command::Removability(c) => {
            let cfg = c.resolve("removability")?;
            let rep = experiments::run_removability_threshold(&cfg)?;
            emit(&rep.table(), &cfg)?;
            eprintln!(
                "threshold {} in ({}, {}), relative error {:.4}: {}",
                rep.m_star,
                rep.lower,
                rep.upper,
                rep.relative_error,
                if rep.pass { "PASS" } else { "FAIL" }
            );
            Ok(())
        }
        Command::TheoremB(c) => {
            let cfg = c.resolve("theorem-b")?;
            let rep = experiments::run_theorem_b_inequality(&cfg)?;
            emit(&rep.table(), &cfg)?;
            eprintln!("inequality holds on every row: {}", rep.all_hold());
            Ok(())
        }
        Command::Moderate(c) => {
            let cfg = c.resolve("moderate")?;
            let rep = experiments::run_moderate_extension(&cfg)?;
            emit(&rep.table(), &cfg)?;
            if let Some(ks_n) = cfg.ladder.last() {
                let grid = WeightedGrid::build(cfg.shape, *ks_n)?;
                dump_field(&cfg, &grid, &rep.u, WeightKind::Lebesgue)?;
            }
            eprintln!("decay order {:.3}: {:?}", rep.decay, rep.verdict);
            Ok(())
        }
        Command::BoundaryProbe(c) => {
            let cfg = c.resolve("boundary-probe")?;
            let rep = experiments::run_boundary_probe(&cfg)?;
            emit(&rep.table(), &cfg)
        }
        Command::Converge(c) => {
            let cfg = c.resolve("converge")?;
            let rows = experiments::run_convergence_suite(&cfg)?;
            emit(&experiments::convergence_table(&rows), &cfg)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = writeln!(io::stderr(), "error: {e}");
            ExitCode::FAILURE
        }
    }
}
