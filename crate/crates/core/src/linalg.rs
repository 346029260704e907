//! The Dirichlet Laplacian `A = -Δ_h` on interior nodes and its solvers.

use crate::error::{Error, Result};
use crate::grid::WeightedGrid;

pub const CG_REL_TOL: f64 = 1e-13;

/// `out = A u + extra ⊙ u`, with zero Dirichlet data.
pub fn apply_operator(grid: &WeightedGrid, u: &[f64], extra: Option<&[f64]>, out: &mut [f64]) {
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let deg = grid.stencil_degree() as f64;
    for i in 0..grid.num_interior() {
        let mut s = deg * u[i];
        for &j in grid.interior_neighbors(i) {
            s -= u[j];
        }
        out[i] = s * inv_h2 + extra.map_or(0.0, |e| e[i] * u[i]);
    }
}

pub fn apply_laplacian(grid: &WeightedGrid, u: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; u.len()];
    apply_operator(grid, u, None, &mut out);
    out
}

/// Boundary coupling `(B g)_i = Σ_{b ~ i} g_b / h²`.
pub fn boundary_coupling(grid: &WeightedGrid, g: &[f64]) -> Vec<f64> {
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    (0..grid.num_interior())
        .map(|i| grid.boundary_neighbors(i).iter().map(|&b| g[b]).sum::<f64>() * inv_h2)
        .collect()
}

/// Tridiagonal solve; `sub[0]` and `sup[n-1]` are ignored.
pub fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let m = diag[i] - sub[i] * c[i - 1];
        c[i] = if i + 1 < n { sup[i] / m } else { 0.0 };
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Jacobi-preconditioned conjugate gradients for `(A + diag(extra)) x = rhs`.
/// Returns the solution and the iteration count.
pub fn pcg(grid: &WeightedGrid, extra: Option<&[f64]>, rhs: &[f64], rel_tol: f64) -> Result<(Vec<f64>, usize)> {
    let n = rhs.len();
    let inv_h2 = 1.0 / (grid.h() * grid.h());
    let deg = grid.stencil_degree() as f64;
    let inv_diag: Vec<f64> = (0..n).map(|i| 1.0 / (deg * inv_h2 + extra.map_or(0.0, |e| e[i]))).collect();
    let bnorm = dot(rhs, rhs).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = rhs.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut q = vec![0.0; n];
    let mut rz = dot(&r, &z);
    let max_iter = 20 * n + 1000;
    for it in 1..=max_iter {
        apply_operator(grid, &p, extra, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::SolverDiverged { iterations: it, residual: dot(&r, &r).sqrt() / bnorm });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let rnorm = dot(&r, &r).sqrt();
        if rnorm <= rel_tol * bnorm {
            return Ok((x, it));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::SolverDiverged { iterations: max_iter, residual: dot(&r, &r).sqrt() / bnorm })
}

/// Conjugate gradients for the Laplacian restricted to the nodes where `free`
/// is set (Dirichlet zero on the others). Entries of the result outside `free` are 0.
pub fn pcg_restricted(grid: &WeightedGrid, free: &[bool], rhs: &[f64], rel_tol: f64) -> Result<Vec<f64>> {
    let n = rhs.len();
    let apply = |u: &[f64], out: &mut [f64]| {
        apply_operator(grid, u, None, out);
        for i in 0..n {
            if !free[i] {
                out[i] = 0.0;
            }
        }
    };
    let mut x = vec![0.0; n];
    let mut r: Vec<f64> = (0..n).map(|i| if free[i] { rhs[i] } else { 0.0 }).collect();
    let bnorm = dot(&r, &r).sqrt();
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut p = r.clone();
    let mut q = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let max_iter = 20 * n + 1000;
    for it in 1..=max_iter {
        apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::SolverDiverged { iterations: it, residual: rr.sqrt() / bnorm });
        }
        let alpha = rr / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= rel_tol * bnorm {
            return Ok(x);
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::SolverDiverged { iterations: max_iter, residual: rr.sqrt() / bnorm })
}

/// Solves `(A + diag(extra)) x = rhs`: Thomas in 1D, PCG otherwise.
pub fn solve(grid: &WeightedGrid, extra: Option<&[f64]>, rhs: &[f64]) -> Result<Vec<f64>> {
    if grid.dim() == 1 {
        let n = rhs.len();
        let inv_h2 = 1.0 / (grid.h() * grid.h());
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * inv_h2 + extra.map_or(0.0, |e| e[i])).collect();
        let off = vec![-inv_h2; n];
        let x = thomas(&off, &diag, &off, rhs);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverDiverged { iterations: 1, residual: f64::INFINITY });
        }
        Ok(x)
    } else {
        pcg(grid, extra, rhs, CG_REL_TOL).map(|(x, _)| x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Shape;

    #[test]
    fn thomas_matches_dense() {
        let sub = [0.0, -1.0, -2.0, 0.5];
        let diag = [4.0, 5.0, 6.0, 3.0];
        let sup = [1.0, 1.0, -1.0, 0.0];
        let x = [1.0, -2.0, 0.5, 3.0];
        let rhs: Vec<f64> = (0..4)
            .map(|i| {
                let mut s = diag[i] * x[i];
                if i > 0 {
                    s += sub[i] * x[i - 1];
                }
                if i < 3 {
                    s += sup[i] * x[i + 1];
                }
                s
            })
            .collect();
        let got = thomas(&sub, &diag, &sup, &rhs);
        for (a, b) in got.iter().zip(&x) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn cg_on_disk_converges_quickly() {
        let g = WeightedGrid::build(Shape::Disk, 64).unwrap();
        let rhs = vec![1.0; g.num_interior()];
        let (x, it) = pcg(&g, None, &rhs, 1e-12).unwrap();
        assert!(it < 2000, "iterations = {it}");
        let r = apply_laplacian(&g, &x);
        let err = r.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "err = {err}");
    }

    #[test]
    fn row_sums_count_boundary_couplings() {
        let g = WeightedGrid::build(Shape::Square, 5).unwrap();
        let one = vec![1.0; g.num_interior()];
        let a1 = apply_laplacian(&g, &one);
        let h2 = g.h() * g.h();
        for i in 0..g.num_interior() {
            assert!((a1[i] * h2 - g.boundary_neighbors(i).len() as f64).abs() < 1e-12);
        }
    }
}
