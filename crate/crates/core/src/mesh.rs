//! Meshes of an interval and continuous piecewise-affine functions on them.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::field::ScalarField;

/// Minimal cell length as a fraction of the domain length.
pub const MIN_CELL_FRACTION: f64 = 1e-12;

/// Strictly increasing nodes `a = ξ₀ < ξ₁ < … < ξₙ = b`.
///
/// Every cell is at least `MIN_CELL_FRACTION * (b - a)` long.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
}

impl Mesh {
    pub fn new(nodes: Vec<f64>) -> Result<Mesh> {
        if nodes.len() < 2 {
            return Err(Error::InvalidMesh(format!(
                "need at least two nodes, got {}",
                nodes.len()
            )));
        }
        if let Some(x) = nodes.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidMesh(format!("non-finite node {x}")));
        }
        let (a, b) = (nodes[0], nodes[nodes.len() - 1]);
        if !(a < b) {
            return Err(Error::InvalidMesh(format!("empty domain [{a}, {b}]")));
        }
        let eps = min_cell(a, b);
        for (i, w) in nodes.windows(2).enumerate() {
            if !(w[1] - w[0] >= eps) {
                return Err(Error::InvalidMesh(format!(
                    "cell {i} = [{}, {}] is shorter than {eps:e}",
                    w[0], w[1]
                )));
            }
        }
        Ok(Mesh { nodes })
    }

    /// Mesh with the given endpoints and interior nodes.
    pub fn from_interior(a: f64, b: f64, interior: &[f64]) -> Result<Mesh> {
        let mut nodes = Vec::with_capacity(interior.len() + 2);
        nodes.push(a);
        nodes.extend_from_slice(interior);
        nodes.push(b);
        Mesh::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn interior(&self) -> &[f64] {
        &self.nodes[1..self.nodes.len() - 1]
    }

    pub fn a(&self) -> f64 {
        self.nodes[0]
    }

    pub fn b(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn len(&self) -> f64 {
        self.b() - self.a()
    }

    /// Number of cells `n`.
    pub fn n_cells(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn cell(&self, i: usize) -> (f64, f64) {
        (self.nodes[i], self.nodes[i + 1])
    }

    pub fn cell_lengths(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.a() && x <= self.b()
    }

    /// Index of the cell containing `x`. Interior nodes belong to the cell on
    /// their right; `b` belongs to the last cell.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !self.contains(x) {
            return Err(Error::OutOfDomain {
                x,
                a: self.a(),
                b: self.b(),
            });
        }
        let i = self.nodes.partition_point(|&t| t <= x);
        Ok(i.saturating_sub(1).min(self.n_cells() - 1))
    }

    /// Writes one node per line under the header `x`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x")?;
        for x in &self.nodes {
            writeln!(w, "{x}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Mesh> {
        let rows = read_columns(r, &["x"])?;
        Mesh::new(rows.into_iter().map(|row| row[0]).collect())
    }
}

fn min_cell(a: f64, b: f64) -> f64 {
    MIN_CELL_FRACTION * (b - a)
}

/// `n` equal cells on `[a, b]`.
pub fn uniform_mesh(n: usize, a: f64, b: f64) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidParameter("uniform mesh needs n >= 1".into()));
    }
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "uniform mesh needs a < b, got [{a}, {b}]"
        )));
    }
    let nodes = (0..=n)
        .map(|i| {
            if i == n {
                b
            } else {
                a + (b - a) * i as f64 / n as f64
            }
        })
        .collect();
    Mesh::new(nodes)
}

/// Continuous function, affine on every cell of its mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseAffine {
    mesh: Mesh,
    values: Vec<f64>,
}

impl PiecewiseAffine {
    pub fn new(mesh: Mesh, values: Vec<f64>) -> Result<PiecewiseAffine> {
        if values.len() != mesh.nodes().len() {
            return Err(Error::InvalidParameter(format!(
                "{} nodal values for {} nodes",
                values.len(),
                mesh.nodes().len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite nodal value {v}")));
        }
        Ok(PiecewiseAffine { mesh, values })
    }

    /// Zero boundary values with the given interior values.
    pub fn with_zero_boundary(mesh: Mesh, interior: &[f64]) -> Result<PiecewiseAffine> {
        let mut values = Vec::with_capacity(interior.len() + 2);
        values.push(0.0);
        values.extend_from_slice(interior);
        values.push(0.0);
        PiecewiseAffine::new(mesh, values)
    }

    pub fn zero(mesh: Mesh) -> PiecewiseAffine {
        let values = vec![0.0; mesh.nodes().len()];
        PiecewiseAffine { mesh, values }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn interior_values(&self) -> &[f64] {
        &self.values[1..self.values.len() - 1]
    }

    pub fn slope(&self, i: usize) -> f64 {
        let (x0, x1) = self.mesh.cell(i);
        (self.values[i + 1] - self.values[i]) / (x1 - x0)
    }

    pub fn slopes(&self) -> Vec<f64> {
        (0..self.mesh.n_cells()).map(|i| self.slope(i)).collect()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        let i = self.mesh.locate(x)?;
        Ok(self.eval_in_cell(i, x))
    }

    /// Slope of the cell containing `x` (right cell at interior nodes).
    pub fn deriv(&self, x: f64) -> Result<f64> {
        Ok(self.slope(self.mesh.locate(x)?))
    }

    /// Affine extension of cell `i` evaluated at `x`.
    #[inline]
    pub fn eval_in_cell(&self, i: usize, x: f64) -> f64 {
        let (x0, x1) = self.mesh.cell(i);
        let t = (x - x0) / (x1 - x0);
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }

    /// Writes `x,u` rows.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,u")?;
        for (x, u) in self.mesh.nodes().iter().zip(&self.values) {
            writeln!(w, "{x},{u}")?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<PiecewiseAffine> {
        let rows = read_columns(r, &["x", "u"])?;
        let mesh = Mesh::new(rows.iter().map(|row| row[0]).collect())?;
        PiecewiseAffine::new(mesh, rows.iter().map(|row| row[1]).collect())
    }
}

/// Nodal interpolant of `field` on `mesh`.
pub fn interpolate(field: &ScalarField, mesh: &Mesh) -> Result<PiecewiseAffine> {
    let mut values = Vec::with_capacity(mesh.nodes().len());
    for &x in mesh.nodes() {
        let value = field.eval(x);
        if !value.is_finite() {
            return Err(Error::NonFinite { x, value });
        }
        values.push(value);
    }
    Ok(PiecewiseAffine {
        mesh: mesh.clone(),
        values,
    })
}

fn read_columns<R: BufRead>(r: R, header: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut lines = r.lines();
    let first = lines
        .next()
        .ok_or_else(|| Error::InvalidParameter("empty CSV".into()))?
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let got: Vec<&str> = first.trim().split(',').map(str::trim).collect();
    if got != header {
        return Err(Error::InvalidParameter(format!(
            "expected CSV header {:?}, got {:?}",
            header.join(","),
            first.trim()
        )));
    }
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::InvalidParameter(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let row = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidParameter(format!("line {}: {e}", lineno + 2)))?;
        if row.len() != header.len() {
            return Err(Error::InvalidParameter(format!(
                "line {}: expected {} columns, got {}",
                lineno + 2,
                header.len(),
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}
