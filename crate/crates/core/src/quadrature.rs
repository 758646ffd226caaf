//! Composite Gauss–Legendre quadrature over arbitrary partitions.
//!
//! Every integral in the crate goes through [`QuadratureRule`]. A rule applies
//! `order` Gauss points on each of `subdivisions` equal pieces of a cell.
//! With `end_grading > 0`, cells that touch the ends of the integration range
//! are split dyadically toward that end (`end_grading` levels), which keeps
//! algebraic endpoint singularities such as `x^{1/p}` near `0` under control.

use std::sync::OnceLock;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mesh::Mesh;

pub const MAX_ORDER: usize = 64;

/// Partitions at least this large are integrated in parallel.
const PAR_CELLS: usize = 2048;

/// Gauss–Legendre nodes and weights on `[0, 1]`, nodes ascending.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    fn compute(n: usize) -> GaussLegendre {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp;
            loop {
                let (mut p1, mut p2) = (1.0, 0.0);
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * pp * pp);
            // map [-1, 1] -> [0, 1]
            nodes[i] = 0.5 * (1.0 - z);
            nodes[n - 1 - i] = 0.5 * (1.0 + z);
            weights[i] = 0.5 * w;
            weights[n - 1 - i] = 0.5 * w;
        }
        GaussLegendre { nodes, weights }
    }
}

/// Cached Gauss–Legendre rule with `order` points on `[0, 1]`.
pub fn gauss_legendre(order: usize) -> &'static GaussLegendre {
    static CACHE: [OnceLock<GaussLegendre>; MAX_ORDER + 1] = [const { OnceLock::new() }; MAX_ORDER + 1];
    assert!((1..=MAX_ORDER).contains(&order), "Gauss order {order} out of range");
    CACHE[order].get_or_init(|| GaussLegendre::compute(order))
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        for v in iter {
            s.add(v);
        }
        s
    }
}

/// Sums in index order with compensation.
pub fn compensated_sum(values: &[f64]) -> f64 {
    values.iter().copied().collect::<CompensatedSum>().value()
}

/// Composite Gauss–Legendre rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct QuadratureRule {
    pub order: usize,
    pub subdivisions: usize,
    pub end_grading: usize,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule {
            order: 5,
            subdivisions: 1,
            end_grading: 0,
        }
    }
}

/// Dyadic levels used by tables that must resolve endpoint singularities.
pub const TABLE_END_GRADING: usize = 40;

impl QuadratureRule {
    pub fn new(order: usize, subdivisions: usize) -> Result<QuadratureRule> {
        if !(1..=MAX_ORDER).contains(&order) {
            return Err(Error::InvalidParameter(format!(
                "quadrature order must be in 1..={MAX_ORDER}, got {order}"
            )));
        }
        if subdivisions == 0 {
            return Err(Error::InvalidParameter("subdivisions must be >= 1".into()));
        }
        Ok(QuadratureRule {
            order,
            subdivisions,
            end_grading: 0,
        })
    }

    /// Order 7 with 8 subdivisions per cell; used where energies are compared
    /// across meshes and differentiated with respect to node positions.
    pub fn fine() -> QuadratureRule {
        QuadratureRule {
            order: 7,
            subdivisions: 8,
            end_grading: 0,
        }
    }

    pub fn with_order(mut self, order: usize) -> QuadratureRule {
        self.order = order.clamp(1, MAX_ORDER);
        self
    }

    pub fn with_subdivisions(mut self, subdivisions: usize) -> QuadratureRule {
        self.subdivisions = subdivisions.max(1);
        self
    }

    pub fn with_end_grading(mut self, levels: usize) -> QuadratureRule {
        self.end_grading = levels;
        self
    }

    /// Highest polynomial degree integrated exactly on each cell.
    pub fn exact_degree(&self) -> usize {
        2 * self.order - 1
    }

    fn points(&self) -> &'static GaussLegendre {
        gauss_legendre(self.order)
    }

    /// Integral over `[lo, hi]` with subdivisions, no grading.
    pub fn cell<F: Fn(f64) -> f64>(&self, f: &F, lo: f64, hi: f64) -> Result<f64> {
        self.cell_graded(f, lo, hi, false, false)
    }

    /// Integral over `[lo, hi]`, graded toward the flagged ends when
    /// `end_grading > 0`.
    pub fn cell_graded<F: Fn(f64) -> f64>(
        &self,
        f: &F,
        lo: f64,
        hi: f64,
        grade_lo: bool,
        grade_hi: bool,
    ) -> Result<f64> {
        let [v] = self.cell_checked(&|x| Ok([finite(f, x)?]), lo, hi, grade_lo, grade_hi)?;
        Ok(v)
    }

    /// Integrals of several integrands sharing one evaluation per point.
    pub fn cell_multi<const N: usize, F: Fn(f64) -> [f64; N]>(
        &self,
        f: &F,
        lo: f64,
        hi: f64,
        grade_lo: bool,
        grade_hi: bool,
    ) -> Result<[f64; N]> {
        let checked = |x: f64| {
            let v = f(x);
            match v.iter().find(|c| !c.is_finite()) {
                Some(&value) => Err(Error::NonFinite { x, value }),
                None => Ok(v),
            }
        };
        self.cell_checked(&checked, lo, hi, grade_lo, grade_hi)
    }

    fn cell_checked<const N: usize, F: Fn(f64) -> Result<[f64; N]>>(
        &self,
        f: &F,
        lo: f64,
        hi: f64,
        grade_lo: bool,
        grade_hi: bool,
    ) -> Result<[f64; N]> {
        let levels = self.end_grading;
        match (levels > 0 && grade_lo, levels > 0 && grade_hi) {
            (false, false) => {
                let h = (hi - lo) / self.subdivisions as f64;
                let mut acc = [0.0; N];
                for k in 0..self.subdivisions {
                    let a = lo + h * k as f64;
                    let b = if k + 1 == self.subdivisions {
                        hi
                    } else {
                        lo + h * (k + 1) as f64
                    };
                    add_into(&mut acc, self.gauss(f, a, b)?);
                }
                Ok(acc)
            }
            (true, false) => self.graded(f, lo, hi, levels, true),
            (false, true) => self.graded(f, lo, hi, levels, false),
            (true, true) => {
                let mid = 0.5 * (lo + hi);
                let mut acc = self.graded(f, lo, mid, levels, true)?;
                add_into(&mut acc, self.graded(f, mid, hi, levels, false)?);
                Ok(acc)
            }
        }
    }

    #[inline]
    fn gauss<const N: usize, F: Fn(f64) -> Result<[f64; N]>>(
        &self,
        f: &F,
        lo: f64,
        hi: f64,
    ) -> Result<[f64; N]> {
        let gl = self.points();
        let h = hi - lo;
        let mut acc = [0.0; N];
        for (t, w) in gl.nodes.iter().zip(&gl.weights) {
            let v = f(lo + h * t)?;
            for (a, v) in acc.iter_mut().zip(v) {
                *a += w * v;
            }
        }
        Ok(acc.map(|a| a * h))
    }

    /// Dyadic pieces `[lo, lo + L/2^K], …, [lo + L/2, hi]` (or mirrored).
    fn graded<const N: usize, F: Fn(f64) -> Result<[f64; N]>>(
        &self,
        f: &F,
        lo: f64,
        hi: f64,
        levels: usize,
        toward_lo: bool,
    ) -> Result<[f64; N]> {
        let len = hi - lo;
        let at = |frac: f64| {
            if toward_lo {
                lo + len * frac
            } else {
                hi - len * frac
            }
        };
        let piece = |f0: f64, f1: f64| {
            let (a, b) = (at(f0), at(f1));
            self.gauss(f, a.min(b), a.max(b))
        };
        let mut frac = 0.5f64.powi(levels as i32);
        let mut acc = piece(0.0, frac)?;
        for _ in 0..levels {
            let next = 2.0 * frac;
            add_into(&mut acc, piece(frac, next)?);
            frac = next;
        }
        Ok(acc)
    }
}

#[inline]
fn add_into<const N: usize>(acc: &mut [f64; N], v: [f64; N]) {
    for (a, v) in acc.iter_mut().zip(v) {
        *a += v;
    }
}

#[inline]
fn finite<F: Fn(f64) -> f64>(f: &F, x: f64) -> Result<f64> {
    let value = f(x);
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { x, value })
    }
}

fn per_cell<F>(f: &F, breaks: &[f64], rule: &QuadratureRule) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let cells = breaks.len() - 1;
    let g = |x: f64| f(x).map(|v| [v]);
    let one = |i: usize| {
        rule.cell_checked(&g, breaks[i], breaks[i + 1], i == 0, i + 1 == cells)
            .map(|[v]| v)
    };
    if cells >= PAR_CELLS {
        (0..cells).into_par_iter().map(one).collect()
    } else {
        (0..cells).map(one).collect()
    }
}

/// Integral of `f` over the partition given by `breaks` (sorted).
pub fn integrate_breaks<F>(f: F, breaks: &[f64], rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    if breaks.len() < 2 {
        return Ok(0.0);
    }
    let cells = per_cell(&|x| finite(&f, x), breaks, rule)?;
    Ok(compensated_sum(&cells))
}

/// Sum of per-cell Gauss–Legendre integrals over the cells of `partition`.
/// The result does not depend on thread scheduling.
pub fn integrate<F>(f: F, partition: &Mesh, rule: &QuadratureRule) -> Result<f64>
where
    F: Fn(f64) -> f64 + Sync,
{
    integrate_breaks(f, partition.nodes(), rule)
}

/// Tabulated running integral `x ↦ ∫_a^x f` on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulativeTable {
    pub x: Vec<f64>,
    pub cum: Vec<f64>,
}

impl CumulativeTable {
    pub fn total(&self) -> f64 {
        self.cum[self.cum.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// Uniform grid of `samples` points on `[a, b]` with `b` exact.
pub fn uniform_grid(a: f64, b: f64, samples: usize) -> Vec<f64> {
    let m = samples - 1;
    (0..samples)
        .map(|i| {
            if i == m {
                b
            } else {
                a + (b - a) * i as f64 / m as f64
            }
        })
        .collect()
}

/// Running integral of a nonnegative `f` on a uniform grid of `samples`
/// points. Negative samples are rejected.
pub fn cumulative_table<F>(
    f: F,
    a: f64,
    b: f64,
    samples: usize,
    rule: &QuadratureRule,
) -> Result<CumulativeTable>
where
    F: Fn(f64) -> f64 + Sync,
{
    if samples < 2 {
        return Err(Error::InvalidParameter(format!(
            "cumulative table needs at least 2 samples, got {samples}"
        )));
    }
    if !(a < b) {
        return Err(Error::InvalidParameter(format!("empty interval [{a}, {b}]")));
    }
    let x = uniform_grid(a, b, samples);
    let checked = |t: f64| {
        let value = finite(&f, t)?;
        if value < 0.0 {
            Err(Error::NegativeIntegrand { x: t, value })
        } else {
            Ok(value)
        }
    };
    let cells = per_cell(&checked, &x, rule)?;
    let mut cum = Vec::with_capacity(samples);
    let mut acc = CompensatedSum::default();
    cum.push(0.0);
    for c in cells {
        acc.add(c);
        cum.push(acc.value());
    }
    Ok(CumulativeTable { x, cum })
}
