//! Discretized domains, quadrature and the Hardy–Littlewood maximal function.
//!
//! Every domain lives on a uniform lattice with `n + 2` nodes per axis and
//! spacing `h = 1 / (n + 1)`, so the unit interval / unit square / disk of
//! radius 1/2 inscribed in the unit square are all covered by the same
//! indexing scheme. Interior nodes carry the unknowns; boundary nodes carry
//! Dirichlet data and boundary measures.

use std::fmt;
use std::io::{Read, Write};
use std::ops::{Deref, DerefMut};
use std::str::FromStr;

use crate::error::{Error, Result};

pub const DISK_RADIUS: f64 = 0.5;
pub const DISK_CENTER: [f64; 2] = [0.5, 0.5];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Shape {
    Interval,
    Square,
    Disk,
}

impl Shape {
    pub fn dim(self) -> usize {
        match self {
            Shape::Interval => 1,
            Shape::Square | Shape::Disk => 2,
        }
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Shape::Interval => "interval",
            Shape::Square => "square",
            Shape::Disk => "disk",
        })
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "interval" => Ok(Shape::Interval),
            "square" => Ok(Shape::Square),
            "disk" => Ok(Shape::Disk),
            other => Err(Error::Parse(format!("unknown shape '{other}'"))),
        }
    }
}

/// Selects the integration measure: `dx` or `ρ dx`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum WeightKind {
    Lebesgue,
    Rho,
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WeightKind::Lebesgue => "lebesgue",
            WeightKind::Rho => "rho",
        })
    }
}

impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lebesgue" => Ok(WeightKind::Lebesgue),
            "rho" => Ok(WeightKind::Rho),
            other => Err(Error::Parse(format!("unknown weight kind '{other}'"))),
        }
    }
}

/// Values on interior nodes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Field(pub Vec<f64>);

impl Field {
    pub fn zeros(len: usize) -> Self {
        Field(vec![0.0; len])
    }

    pub fn constant(len: usize, c: f64) -> Self {
        Field(vec![c; len])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn scaled(&self, c: f64) -> Field {
        Field(self.0.iter().map(|v| c * v).collect())
    }
}

impl Deref for Field {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field(v)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeClass {
    Interior(usize),
    Boundary(usize),
    Outside,
}

/// A discretized domain with its distance-to-boundary weight.
#[derive(Clone, Debug)]
pub struct WeightedGrid {
    shape: Shape,
    n: usize,
    h: f64,
    side: usize,
    classes: Vec<NodeClass>,
    interior: Vec<usize>,
    boundary: Vec<usize>,
    rho: Vec<f64>,
    normals: Vec<[f64; 2]>,
    inward: Vec<[isize; 2]>,
    // CSR adjacency of interior nodes: interior neighbours and boundary neighbours.
    int_start: Vec<usize>,
    int_adj: Vec<usize>,
    bnd_start: Vec<usize>,
    bnd_adj: Vec<usize>,
}

impl WeightedGrid {
    pub fn build(shape: Shape, n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::TooCoarse(n));
        }
        let side = n + 2;
        let h = 1.0 / (n + 1) as f64;
        let dim = shape.dim();
        let total = side.pow(dim as u32);
        let mut classes = vec![NodeClass::Outside; total];

        let coord = |id: usize| -> [f64; 2] {
            if dim == 1 {
                [id as f64 * h, 0.0]
            } else {
                [(id % side) as f64 * h, (id / side) as f64 * h]
            }
        };

        // interior membership
        let is_inside = |id: usize| -> bool {
            match shape {
                Shape::Interval => id >= 1 && id <= n,
                Shape::Square => {
                    let (i, j) = (id % side, id / side);
                    (1..=n).contains(&i) && (1..=n).contains(&j)
                }
                Shape::Disk => {
                    let x = coord(id);
                    let r = ((x[0] - DISK_CENTER[0]).powi(2) + (x[1] - DISK_CENTER[1]).powi(2)).sqrt();
                    r < DISK_RADIUS - 1e-12
                }
            }
        };

        let mut interior = Vec::new();
        for id in 0..total {
            if is_inside(id) {
                classes[id] = NodeClass::Interior(interior.len());
                interior.push(id);
            }
        }

        let steps: Vec<[isize; 2]> = if dim == 1 {
            vec![[-1, 0], [1, 0]]
        } else {
            vec![[-1, 0], [1, 0], [0, -1], [0, 1]]
        };
        let shift = |id: usize, s: [isize; 2]| -> Option<usize> {
            if dim == 1 {
                let i = id as isize + s[0];
                (0..side as isize).contains(&i).then_some(i as usize)
            } else {
                let i = (id % side) as isize + s[0];
                let j = (id / side) as isize + s[1];
                ((0..side as isize).contains(&i) && (0..side as isize).contains(&j))
                    .then(|| i as usize + j as usize * side)
            }
        };

        // boundary nodes: the discrete closure minus the interior
        let mut boundary = Vec::new();
        for id in 0..total {
            if matches!(classes[id], NodeClass::Interior(_)) {
                continue;
            }
            let on_box_boundary = match shape {
                Shape::Interval => true,
                Shape::Square => true,
                Shape::Disk => false,
            };
            let touches_interior = steps
                .iter()
                .any(|s| matches!(shift(id, *s).map(|k| classes[k]), Some(NodeClass::Interior(_))));
            if on_box_boundary || touches_interior {
                classes[id] = NodeClass::Boundary(boundary.len());
                boundary.push(id);
            }
        }

        let rho: Vec<f64> = interior
            .iter()
            .map(|&id| {
                let x = coord(id);
                match shape {
                    Shape::Interval => x[0].min(1.0 - x[0]),
                    Shape::Square => x[0].min(1.0 - x[0]).min(x[1]).min(1.0 - x[1]),
                    Shape::Disk => {
                        DISK_RADIUS
                            - ((x[0] - DISK_CENTER[0]).powi(2) + (x[1] - DISK_CENTER[1]).powi(2)).sqrt()
                    }
                }
            })
            .collect();

        // outward normals and the inward lattice step used for one-sided differences
        let mut normals = Vec::with_capacity(boundary.len());
        let mut inward = Vec::with_capacity(boundary.len());
        for &id in &boundary {
            let x = coord(id);
            let outward: [f64; 2] = match shape {
                Shape::Interval => {
                    if x[0] < 0.5 {
                        [-1.0, 0.0]
                    } else {
                        [1.0, 0.0]
                    }
                }
                Shape::Square => {
                    let (i, j) = (id % side, id / side);
                    let mut v = [0.0_f64, 0.0];
                    if i == 0 {
                        v[0] = -1.0;
                    } else if i == side - 1 {
                        v[0] = 1.0;
                    }
                    if j == 0 {
                        v[1] = -1.0;
                    } else if j == side - 1 {
                        v[1] = 1.0;
                    }
                    let len = (v[0] * v[0] + v[1] * v[1]).sqrt();
                    [v[0] / len, v[1] / len]
                }
                Shape::Disk => {
                    let d = [x[0] - DISK_CENTER[0], x[1] - DISK_CENTER[1]];
                    let len = (d[0] * d[0] + d[1] * d[1]).sqrt().max(1e-300);
                    [d[0] / len, d[1] / len]
                }
            };
            // pick the stencil direction best aligned with -outward whose first step is interior
            let mut best: Option<([isize; 2], f64)> = None;
            for s in &steps {
                let Some(k) = shift(id, *s) else { continue };
                if !matches!(classes[k], NodeClass::Interior(_)) {
                    continue;
                }
                let align = -(s[0] as f64 * outward[0] + s[1] as f64 * outward[1]);
                if best.map_or(true, |(_, a)| align > a) {
                    best = Some((*s, align));
                }
            }
            let step = best.map(|(s, _)| s).unwrap_or([0, 0]);
            let normal = match shape {
                Shape::Disk if step != [0, 0] => [-(step[0] as f64), -(step[1] as f64)],
                _ => outward,
            };
            normals.push(normal);
            inward.push(step);
        }

        let mut int_start = vec![0];
        let mut int_adj = Vec::new();
        let mut bnd_start = vec![0];
        let mut bnd_adj = Vec::new();
        for &id in &interior {
            for s in &steps {
                let k = shift(id, *s).expect("interior nodes have a full stencil");
                match classes[k] {
                    NodeClass::Interior(j) => int_adj.push(j),
                    NodeClass::Boundary(b) => bnd_adj.push(b),
                    NodeClass::Outside => unreachable!("interior node adjacent to an outside node"),
                }
            }
            int_start.push(int_adj.len());
            bnd_start.push(bnd_adj.len());
        }

        Ok(WeightedGrid {
            shape,
            n,
            h,
            side,
            classes,
            interior,
            boundary,
            rho,
            normals,
            inward,
            int_start,
            int_adj,
            bnd_start,
            bnd_adj,
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    /// Lattice nodes per axis (`n + 2`).
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn lattice_len(&self) -> usize {
        self.classes.len()
    }

    pub fn num_interior(&self) -> usize {
        self.interior.len()
    }

    pub fn num_boundary(&self) -> usize {
        self.boundary.len()
    }

    pub fn class(&self, lattice_id: usize) -> NodeClass {
        self.classes[lattice_id]
    }

    pub fn interior_lattice_ids(&self) -> &[usize] {
        &self.interior
    }

    pub fn boundary_lattice_ids(&self) -> &[usize] {
        &self.boundary
    }

    /// `h^d`.
    pub fn cell_measure(&self) -> f64 {
        self.h.powi(self.dim() as i32)
    }

    /// `h^(d-1)`; 1 for the interval.
    pub fn boundary_cell_measure(&self) -> f64 {
        self.h.powi(self.dim() as i32 - 1)
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn normals(&self) -> &[[f64; 2]] {
        &self.normals
    }

    /// Lattice step from a boundary node towards the interior along its (rounded) normal.
    pub fn inward_step(&self, b: usize) -> [isize; 2] {
        self.inward[b]
    }

    pub fn lattice_point(&self, id: usize) -> [f64; 2] {
        if self.dim() == 1 {
            [id as f64 * self.h, 0.0]
        } else {
            [(id % self.side) as f64 * self.h, (id / self.side) as f64 * self.h]
        }
    }

    pub fn interior_point(&self, i: usize) -> [f64; 2] {
        self.lattice_point(self.interior[i])
    }

    pub fn boundary_point(&self, b: usize) -> [f64; 2] {
        self.lattice_point(self.boundary[b])
    }

    /// Lattice neighbour of `id` displaced by `step`, if inside the lattice.
    pub fn lattice_shift(&self, id: usize, step: [isize; 2]) -> Option<usize> {
        let side = self.side as isize;
        if self.dim() == 1 {
            let i = id as isize + step[0];
            (0..side).contains(&i).then_some(i as usize)
        } else {
            let i = (id % self.side) as isize + step[0];
            let j = (id / self.side) as isize + step[1];
            ((0..side).contains(&i) && (0..side).contains(&j)).then(|| (i + j * side) as usize)
        }
    }

    pub fn interior_neighbors(&self, i: usize) -> &[usize] {
        &self.int_adj[self.int_start[i]..self.int_start[i + 1]]
    }

    pub fn boundary_neighbors(&self, i: usize) -> &[usize] {
        &self.bnd_adj[self.bnd_start[i]..self.bnd_start[i + 1]]
    }

    /// Stencil size `2d`.
    pub fn stencil_degree(&self) -> usize {
        2 * self.dim()
    }

    /// Interior node closest to `point`.
    pub fn nearest_interior(&self, point: [f64; 2]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, &id) in self.interior.iter().enumerate() {
            let x = self.lattice_point(id);
            let d = (x[0] - point[0]).powi(2) + (x[1] - point[1]).powi(2);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }

    pub fn nearest_boundary(&self, point: [f64; 2]) -> usize {
        let mut best = (0, f64::INFINITY);
        for (b, &id) in self.boundary.iter().enumerate() {
            let x = self.lattice_point(id);
            let d = (x[0] - point[0]).powi(2) + (x[1] - point[1]).powi(2);
            if d < best.1 {
                best = (b, d);
            }
        }
        best.0
    }

    /// Quadrature weights `w_i h^d` for the interior nodes.
    pub fn weights(&self, kind: WeightKind) -> Vec<f64> {
        let cell = self.cell_measure();
        match kind {
            WeightKind::Lebesgue => vec![cell; self.interior.len()],
            WeightKind::Rho => self.rho.iter().map(|r| r * cell).collect(),
        }
    }

    /// Midpoint quadrature `Σ f_i w_i h^d`.
    pub fn integrate(&self, f: &[f64], kind: WeightKind) -> f64 {
        let cell = self.cell_measure();
        match kind {
            WeightKind::Lebesgue => f.iter().sum::<f64>() * cell,
            WeightKind::Rho => f.iter().zip(&self.rho).map(|(v, r)| v * r).sum::<f64>() * cell,
        }
    }

    pub fn check_field(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.interior.len() {
            return Err(Error::GridMismatch(format!(
                "field has {} entries, grid has {} interior nodes",
                f.len(),
                self.interior.len()
            )));
        }
        Ok(())
    }

    /// Zero-extends an interior field to the whole lattice.
    pub fn to_lattice(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.classes.len()];
        for (i, &id) in self.interior.iter().enumerate() {
            out[id] = f[i];
        }
        out
    }

    pub fn lattice_dims(&self) -> Vec<usize> {
        vec![self.side; self.dim()]
    }

    /// Piecewise-(bi)linear interpolation of an interior field (zero on and
    /// outside the boundary) at an arbitrary point of the unit box.
    pub fn interpolate(&self, f: &[f64], point: [f64; 2]) -> f64 {
        let value = |id: usize| match self.classes[id] {
            NodeClass::Interior(i) => f[i],
            _ => 0.0,
        };
        let last = (self.side - 2) as f64;
        let locate = |x: f64| -> (usize, f64) {
            let s = (x / self.h).clamp(0.0, last + 1.0);
            let i = s.floor().min(last);
            (i as usize, s - i)
        };
        let (i, tx) = locate(point[0]);
        if self.dim() == 1 {
            return (1.0 - tx) * value(i) + tx * value(i + 1);
        }
        let (j, ty) = locate(point[1]);
        let id = |a: usize, b: usize| a + b * self.side;
        (1.0 - tx) * (1.0 - ty) * value(id(i, j))
            + tx * (1.0 - ty) * value(id(i + 1, j))
            + (1.0 - tx) * ty * value(id(i, j + 1))
            + tx * ty * value(id(i + 1, j + 1))
    }

    pub fn sample<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Field {
        Field(self.interior.iter().map(|&id| f(self.lattice_point(id))).collect())
    }

    pub fn sample_boundary<F: Fn([f64; 2]) -> f64>(&self, f: F) -> Vec<f64> {
        self.boundary.iter().map(|&id| f(self.lattice_point(id))).collect()
    }
}

/// Sliding maximum where `out[i] = max arr[max(0, i+1-w) ..= min(i, arr.len()-1)]`, `out.len() == len`.
fn clipped_window_max(arr: &[f64], w: usize, len: usize, out: &mut [f64]) {
    let mut deque: std::collections::VecDeque<usize> = std::collections::VecDeque::new();
    let mut next = 0;
    for i in 0..len {
        let hi = i.min(arr.len() - 1);
        while next <= hi {
            while deque.back().map_or(false, |&k| arr[k] <= arr[next]) {
                deque.pop_back();
            }
            deque.push_back(next);
            next += 1;
        }
        let lo = (i + 1).saturating_sub(w);
        while deque.front().map_or(false, |&k| k < lo) {
            deque.pop_front();
        }
        out[i] = deque.front().map_or(0.0, |&k| arr[k]);
    }
}

/// Maximal function over grid-aligned cubes on a 1D or 2D array of cells
/// (row-major, `dims[0]` fastest). The array itself is the reference cube `Q₀`.
pub fn maximal_function_array(values: &[f64], dims: &[usize]) -> Vec<f64> {
    match dims.len() {
        1 => {
            let len = dims[0];
            let mut prefix = vec![0.0; len + 1];
            for i in 0..len {
                prefix[i + 1] = prefix[i] + values[i].abs();
            }
            let mut best = vec![0.0_f64; len];
            let mut tmp = vec![0.0; len];
            for s in 1..=len {
                let avgs: Vec<f64> = (0..=len - s).map(|a| (prefix[a + s] - prefix[a]) / s as f64).collect();
                clipped_window_max(&avgs, s, len, &mut tmp);
                for (b, t) in best.iter_mut().zip(&tmp) {
                    *b = b.max(*t);
                }
            }
            best
        }
        2 => {
            let (nx, ny) = (dims[0], dims[1]);
            let mut sat = vec![0.0; (nx + 1) * (ny + 1)];
            for j in 0..ny {
                let mut row = 0.0;
                for i in 0..nx {
                    row += values[i + j * nx].abs();
                    sat[(i + 1) + (j + 1) * (nx + 1)] = sat[(i + 1) + j * (nx + 1)] + row;
                }
            }
            let box_sum = |a: usize, b: usize, s: usize| -> f64 {
                let w = nx + 1;
                sat[(a + s) + (b + s) * w] - sat[a + (b + s) * w] - sat[(a + s) + b * w] + sat[a + b * w]
            };
            let mut best = vec![0.0_f64; nx * ny];
            for s in 1..=nx.min(ny) {
                let (mx, my) = (nx - s + 1, ny - s + 1);
                let area = (s * s) as f64;
                // window max along x for every anchor row b
                let mut along_x = vec![0.0; nx * my];
                let mut row_avg = vec![0.0; mx];
                let mut row_out = vec![0.0; nx];
                for b in 0..my {
                    for a in 0..mx {
                        row_avg[a] = box_sum(a, b, s) / area;
                    }
                    clipped_window_max(&row_avg, s, nx, &mut row_out);
                    along_x[b * nx..(b + 1) * nx].copy_from_slice(&row_out);
                }
                // then along y
                let mut col = vec![0.0; my];
                let mut col_out = vec![0.0; ny];
                for i in 0..nx {
                    for b in 0..my {
                        col[b] = along_x[i + b * nx];
                    }
                    clipped_window_max(&col, s, ny, &mut col_out);
                    for j in 0..ny {
                        let v = &mut best[i + j * nx];
                        *v = v.max(col_out[j]);
                    }
                }
            }
            best
        }
        d => panic!("maximal function supports 1 or 2 dimensions, got {d}"),
    }
}

/// Hardy–Littlewood maximal function of a zero-extended interior field,
/// taken over the lattice cube (the domain's bounding cube padded by one cell).
/// Returns values on the whole lattice.
pub fn maximal_function_lattice(f: &[f64], grid: &WeightedGrid) -> Vec<f64> {
    maximal_function_array(&grid.to_lattice(f), &grid.lattice_dims())
}

/// Maximal function restricted to interior nodes.
pub fn maximal_function(f: &Field, grid: &WeightedGrid) -> Field {
    let full = maximal_function_lattice(f, grid);
    Field(grid.interior_lattice_ids().iter().map(|&id| full[id]).collect())
}

/// `∫_{Q₀} M[f] w dx`. With the Lebesgue weight the integral runs over the
/// whole reference cube; with `ρ` only interior nodes contribute.
pub fn llnl_norm(f: &[f64], grid: &WeightedGrid, kind: WeightKind) -> f64 {
    let full = maximal_function_lattice(f, grid);
    match kind {
        WeightKind::Lebesgue => full.iter().sum::<f64>() * grid.cell_measure(),
        WeightKind::Rho => {
            let interior: Vec<f64> = grid.interior_lattice_ids().iter().map(|&id| full[id]).collect();
            grid.integrate(&interior, WeightKind::Rho)
        }
    }
}

/// Writes an interior field as CSV: a metadata header, then the lattice rows
/// covering interior nodes (row-major, `nan` where a lattice node is not interior).
pub fn write_field_csv<W: Write>(out: W, grid: &WeightedGrid, f: &[f64], kind: WeightKind) -> Result<()> {
    grid.check_field(f)?;
    let mut wtr = csv::WriterBuilder::new().flexible(true).from_writer(out);
    wtr.write_record(["shape", "n", "h", "weight_kind"])?;
    wtr.write_record([grid.shape().to_string(), grid.n().to_string(), format!("{:e}", grid.h()), kind.to_string()])?;
    let lattice = grid.to_lattice(f);
    let n = grid.n();
    let rows = if grid.dim() == 1 { 1 } else { n };
    for r in 0..rows {
        let mut record = Vec::with_capacity(n);
        for c in 0..n {
            let id = if grid.dim() == 1 { c + 1 } else { (c + 1) + (r + 1) * grid.side() };
            match grid.class(id) {
                NodeClass::Interior(_) => record.push(format!("{:e}", lattice[id])),
                _ => record.push("nan".to_string()),
            }
        }
        wtr.write_record(&record)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Reads a field written by [`write_field_csv`]; the header must match `grid`.
pub fn read_field_csv<R: Read>(input: R, grid: &WeightedGrid) -> Result<(Field, WeightKind)> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(input);
    let mut records = rdr.records();
    let meta = records.next().ok_or_else(|| Error::Parse("missing metadata row".into()))??;
    let shape: Shape = meta.get(0).unwrap_or("").parse()?;
    let n: usize = meta.get(1).unwrap_or("").trim().parse().map_err(|_| Error::Parse("bad n".into()))?;
    let kind: WeightKind = meta.get(3).unwrap_or("").parse()?;
    if shape != grid.shape() || n != grid.n() {
        return Err(Error::GridMismatch(format!("file holds {shape} n={n}, grid is {} n={}", grid.shape(), grid.n())));
    }
    let mut values = vec![f64::NAN; grid.num_interior()];
    let rows = if grid.dim() == 1 { 1 } else { n };
    for r in 0..rows {
        let rec = records.next().ok_or_else(|| Error::Parse(format!("missing row {r}")))??;
        if rec.len() != n {
            return Err(Error::Parse(format!("row {r} has {} columns, expected {n}", rec.len())));
        }
        for c in 0..n {
            let id = if grid.dim() == 1 { c + 1 } else { (c + 1) + (r + 1) * grid.side() };
            if let NodeClass::Interior(i) = grid.class(id) {
                values[i] = rec[c].trim().parse().map_err(|_| Error::Parse(format!("bad value at ({r},{c})")))?;
            }
        }
    }
    Ok((Field(values), kind))
}
