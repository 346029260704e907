//! Green and Poisson operators, the principal eigenpair and the torsion function.

use std::io::Write;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::grid::{Field, NodeClass, WeightedGrid};
use crate::linalg;
use crate::measure::{BoundaryMeasure, InteriorMeasure};

/// Largest interior node count for which a dense inverse is cached.
pub const DENSE_LIMIT: usize = 1500;

pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug)]
pub struct KernelSet {
    grid: WeightedGrid,
    rho_star: Field,
    lambda: f64,
    eigen_residual: f64,
    zeta0: Field,
    dense_green: OnceLock<DMatrix<f64>>,
}

impl KernelSet {
    pub fn assemble(grid: WeightedGrid) -> Result<Self> {
        let zeta0 = Field(linalg::solve(&grid, None, &vec![1.0; grid.num_interior()])?);
        let (rho_star, lambda, eigen_residual) = inverse_iteration(&grid)?;
        Ok(KernelSet { grid, rho_star, lambda, eigen_residual, zeta0, dense_green: OnceLock::new() })
    }

    pub fn grid(&self) -> &WeightedGrid {
        &self.grid
    }

    /// `A u` with `A = -Δ_h` and zero boundary values.
    pub fn laplacian(&self, u: &[f64]) -> Field {
        Field(linalg::apply_laplacian(&self.grid, u))
    }

    /// `-Δ_h u` for an interior field extended by boundary values `g`.
    pub fn laplacian_with_boundary(&self, u: &[f64], g: &[f64]) -> Field {
        let mut out = linalg::apply_laplacian(&self.grid, u);
        let bg = linalg::boundary_coupling(&self.grid, g);
        for (o, b) in out.iter_mut().zip(&bg) {
            *o -= b;
        }
        Field(out)
    }

    /// Solves `(A + diag(extra)) x = rhs`.
    pub fn solve(&self, rhs: &[f64], extra: Option<&[f64]>) -> Result<Field> {
        self.grid.check_field(rhs)?;
        linalg::solve(&self.grid, extra, rhs).map(Field)
    }

    /// `𝔾[f]` for a nodal density `f`.
    pub fn green_apply(&self, f: &[f64]) -> Result<Field> {
        if let Some(g) = self.dense_green.get() {
            self.grid.check_field(f)?;
            return Ok(Field((g * nalgebra::DVector::from_column_slice(f)).as_slice().to_vec()));
        }
        self.solve(f, None)
    }

    pub fn green_potential(&self, mu: &InteriorMeasure) -> Result<Field> {
        mu.validate(&self.grid)?;
        self.green_apply(&mu.nodal_density(&self.grid))
    }

    /// `𝔾[δ_y]` for a unit atom on interior node `y`.
    pub fn green_column(&self, y: usize) -> Result<Field> {
        if let Some(g) = self.dense_green.get() {
            let s = 1.0 / self.grid.cell_measure();
            return Ok(Field(g.column(y).iter().map(|v| v * s).collect()));
        }
        let mut e = vec![0.0; self.grid.num_interior()];
        e[y] = 1.0 / self.grid.cell_measure();
        self.solve(&e, None)
    }

    /// Discrete harmonic extension of boundary values `g`.
    pub fn poisson_apply(&self, g: &[f64]) -> Result<Field> {
        if g.len() != self.grid.num_boundary() {
            return Err(Error::GridMismatch(format!(
                "boundary data has {} entries, grid has {} boundary nodes",
                g.len(),
                self.grid.num_boundary()
            )));
        }
        self.green_apply(&linalg::boundary_coupling(&self.grid, g))
    }

    pub fn poisson_potential(&self, mu: &BoundaryMeasure) -> Result<Field> {
        mu.validate(&self.grid)?;
        self.poisson_apply(&mu.nodal_density(&self.grid))
    }

    /// `(ρ*, λ)` normalized to `max ρ* = 1`.
    pub fn principal_eigen(&self) -> (&Field, f64) {
        (&self.rho_star, self.lambda)
    }

    pub fn rho_star(&self) -> &Field {
        &self.rho_star
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// `‖A ρ* - λ ρ*‖_∞` at exit of the inverse iteration.
    pub fn eigen_residual(&self) -> f64 {
        self.eigen_residual
    }

    /// Torsion function: `A ζ₀ = 1`.
    pub fn zeta0(&self) -> &Field {
        &self.zeta0
    }

    pub fn solve_zeta0(&self) -> Field {
        self.zeta0.clone()
    }

    /// Smallest `c` with `ρ/c <= v <= c ρ` on interior nodes.
    pub fn comparability_constant(&self, v: &[f64]) -> f64 {
        self.grid
            .rho()
            .iter()
            .zip(v)
            .map(|(r, x)| (x / r).max(r / x))
            .fold(1.0, f64::max)
    }

    pub fn hopf_constant(&self) -> f64 {
        self.comparability_constant(&self.rho_star)
    }

    /// Outward normal derivative of a field vanishing on the boundary, at boundary node `b`,
    /// by the one-sided second-order difference `-(4ζ₁ - ζ₂) / 2h` along the inward step.
    pub fn normal_derivative(&self, f: &[f64], b: usize) -> f64 {
        let step = self.grid.inward_step(b);
        if step == [0, 0] {
            return 0.0;
        }
        let id = self.grid.boundary_lattice_ids()[b];
        let value = |k: usize| -> Option<f64> {
            let mut cur = id;
            for _ in 0..k {
                cur = self.grid.lattice_shift(cur, step)?;
            }
            match self.grid.class(cur) {
                NodeClass::Interior(i) => Some(f[i]),
                _ => None,
            }
        };
        let h = self.grid.h();
        let z1 = value(1).unwrap_or(0.0);
        match value(2) {
            Some(z2) => -(4.0 * z1 - z2) / (2.0 * h),
            None => -z1 / h,
        }
    }

    pub fn normal_derivatives(&self, f: &[f64]) -> Vec<f64> {
        (0..self.grid.num_boundary()).map(|b| self.normal_derivative(f, b)).collect()
    }

    /// Dense `A⁻¹`, built once on first use (small grids only).
    pub fn dense_green(&self) -> Option<&DMatrix<f64>> {
        let n = self.grid.num_interior();
        if n > DENSE_LIMIT {
            return None;
        }
        Some(self.dense_green.get_or_init(|| {
            let mut a = DMatrix::<f64>::zeros(n, n);
            let inv_h2 = 1.0 / (self.grid.h() * self.grid.h());
            let deg = self.grid.stencil_degree() as f64;
            for i in 0..n {
                a[(i, i)] = deg * inv_h2;
                for &j in self.grid.interior_neighbors(i) {
                    a[(i, j)] = -inv_h2;
                }
            }
            let chol = a.cholesky().expect("the Dirichlet Laplacian is positive definite");
            chol.inverse()
        }))
    }

    /// Writes the Green matrix `G(x_i, x_j)` (with `𝔾[f]_i = Σ_j G_ij f_j h^d`) as CSV.
    pub fn export_green_csv<W: Write>(&self, out: W) -> Result<()> {
        let n = self.grid.num_interior();
        if n > 64 * 64 {
            return Err(Error::Config("Green export is limited to 64x64 interior nodes".into()));
        }
        let mut wtr = csv::Writer::from_writer(out);
        for i in 0..n {
            // G is symmetric, so row i is the potential of a unit atom at node i
            let row = self.green_column(i)?;
            wtr.write_record(row.iter().map(|v| format!("{v:e}")))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn inverse_iteration(grid: &WeightedGrid) -> Result<(Field, f64, f64)> {
    let mut v: Vec<f64> = grid.rho().to_vec();
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..500 {
        let w = linalg::solve(grid, None, &v)?;
        let m = w.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
        v = w.iter().map(|x| x / m).collect();
        let av = linalg::apply_laplacian(grid, &v);
        let num: f64 = v.iter().zip(&av).map(|(a, b)| a * b).sum();
        let den: f64 = v.iter().map(|a| a * a).sum();
        lambda = num / den;
        residual = av.iter().zip(&v).map(|(a, b)| (a - lambda * b).abs()).fold(0.0, f64::max);
        if residual < EIGEN_RESIDUAL_TOL {
            break;
        }
    }
    if residual >= EIGEN_RESIDUAL_TOL {
        return Err(Error::SolverDiverged { iterations: 500, residual });
    }
    Ok((Field(v), lambda, residual))
}
