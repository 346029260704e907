//! Nonnegative discrete measures on interior and boundary nodes.

use crate::error::{Error, Result};
use crate::grid::{Field, WeightedGrid};

/// A point mass in the interior. `position` is where the atom really sits;
/// `node` is the nearest interior node, which carries it in the discrete solves.
#[derive(Clone, Debug, PartialEq)]
pub struct InteriorAtom {
    pub node: usize,
    pub position: [f64; 2],
    pub mass: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InteriorMeasure {
    pub atoms: Vec<InteriorAtom>,
    /// Absolutely continuous part, per interior node.
    pub density: Field,
}

impl InteriorMeasure {
    pub fn zero(grid: &WeightedGrid) -> Self {
        InteriorMeasure { atoms: Vec::new(), density: Field::zeros(grid.num_interior()) }
    }

    pub fn from_density(density: Field) -> Self {
        InteriorMeasure { atoms: Vec::new(), density }
    }

    /// Adds an atom at an arbitrary point, snapped to the nearest interior node.
    pub fn with_atom(mut self, grid: &WeightedGrid, position: [f64; 2], mass: f64) -> Self {
        let node = grid.nearest_interior(position);
        self.atoms.push(InteriorAtom { node, position, mass });
        self
    }

    /// Adds an atom sitting exactly on interior node `node`.
    pub fn with_node_atom(mut self, grid: &WeightedGrid, node: usize, mass: f64) -> Self {
        self.atoms.push(InteriorAtom { node, position: grid.interior_point(node), mass });
        self
    }

    pub fn validate(&self, grid: &WeightedGrid) -> Result<()> {
        grid.check_field(&self.density)?;
        if self.density.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::SupportError("interior density must be finite and nonnegative".into()));
        }
        for a in &self.atoms {
            if a.node >= grid.num_interior() {
                return Err(Error::SupportError(format!("atom node {} is not an interior node", a.node)));
            }
            if !a.mass.is_finite() || a.mass < 0.0 {
                return Err(Error::SupportError(format!("atom mass {} is not a nonnegative number", a.mass)));
            }
        }
        Ok(())
    }

    /// Nodal density: continuous part plus atoms spread as `m / h^d` on their node.
    pub fn nodal_density(&self, grid: &WeightedGrid) -> Vec<f64> {
        let mut d = self.density.0.clone();
        let cell = grid.cell_measure();
        for a in &self.atoms {
            d[a.node] += a.mass / cell;
        }
        d
    }

    pub fn total_mass(&self, grid: &WeightedGrid) -> f64 {
        self.density.iter().sum::<f64>() * grid.cell_measure() + self.atoms.iter().map(|a| a.mass).sum::<f64>()
    }

    pub fn scaled(&self, c: f64) -> Self {
        InteriorMeasure {
            atoms: self.atoms.iter().map(|a| InteriorAtom { mass: a.mass * c, ..a.clone() }).collect(),
            density: self.density.scaled(c),
        }
    }

    /// `self <= other` nodewise (as nodal densities).
    pub fn le(&self, other: &InteriorMeasure, grid: &WeightedGrid) -> bool {
        let a = self.nodal_density(grid);
        let b = other.nodal_density(grid);
        a.iter().zip(&b).all(|(x, y)| *x <= *y + 1e-14 * y.abs().max(1.0))
    }
}

/// Boundary data `μ = μ_S + μ_R`: atoms form the singular part, the nodal
/// density the regular part.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMeasure {
    pub atoms: Vec<(usize, f64)>,
    /// Regular part, per boundary node.
    pub density: Vec<f64>,
}

impl BoundaryMeasure {
    pub fn zero(grid: &WeightedGrid) -> Self {
        BoundaryMeasure { atoms: Vec::new(), density: vec![0.0; grid.num_boundary()] }
    }

    pub fn from_density(density: Vec<f64>) -> Self {
        BoundaryMeasure { atoms: Vec::new(), density }
    }

    pub fn constant(grid: &WeightedGrid, c: f64) -> Self {
        Self::from_density(vec![c; grid.num_boundary()])
    }

    pub fn with_atom(mut self, node: usize, mass: f64) -> Self {
        self.atoms.push((node, mass));
        self
    }

    pub fn validate(&self, grid: &WeightedGrid) -> Result<()> {
        if self.density.len() != grid.num_boundary() {
            return Err(Error::GridMismatch(format!(
                "boundary density has {} entries, grid has {} boundary nodes",
                self.density.len(),
                grid.num_boundary()
            )));
        }
        if self.density.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::SupportError("boundary density must be finite and nonnegative".into()));
        }
        for &(b, m) in &self.atoms {
            if b >= grid.num_boundary() {
                return Err(Error::SupportError(format!("atom node {b} is not a boundary node")));
            }
            if !m.is_finite() || m < 0.0 {
                return Err(Error::SupportError(format!("atom mass {m} is not a nonnegative number")));
            }
        }
        Ok(())
    }

    /// Dirichlet data: density plus atoms spread as `m / h^(d-1)`.
    pub fn nodal_density(&self, grid: &WeightedGrid) -> Vec<f64> {
        let mut d = self.density.clone();
        let cell = grid.boundary_cell_measure();
        for &(b, m) in &self.atoms {
            d[b] += m / cell;
        }
        d
    }

    pub fn total_mass(&self, grid: &WeightedGrid) -> f64 {
        self.density.iter().sum::<f64>() * grid.boundary_cell_measure() + self.atoms.iter().map(|a| a.1).sum::<f64>()
    }

    pub fn singular_part(&self) -> BoundaryMeasure {
        BoundaryMeasure { atoms: self.atoms.clone(), density: vec![0.0; self.density.len()] }
    }

    pub fn regular_part(&self) -> BoundaryMeasure {
        BoundaryMeasure { atoms: Vec::new(), density: self.density.clone() }
    }

    /// `μ_S + min(k, μ_R)`.
    pub fn truncated(&self, k: f64) -> BoundaryMeasure {
        BoundaryMeasure { atoms: self.atoms.clone(), density: self.density.iter().map(|v| v.min(k)).collect() }
    }

    /// True when some node carries both an atom and regular density.
    pub fn parts_overlap(&self) -> bool {
        self.atoms.iter().any(|&(b, m)| m > 0.0 && self.density[b] > 0.0)
    }

    pub fn le(&self, other: &BoundaryMeasure, grid: &WeightedGrid) -> bool {
        let a = self.nodal_density(grid);
        let b = other.nodal_density(grid);
        a.iter().zip(&b).all(|(x, y)| *x <= *y + 1e-14 * y.abs().max(1.0))
    }
}
