//! Relative error norms against the exact solution and node discrepancies.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::gd::GdStatus;
use crate::mesh::{Mesh, PiecewiseAffine};
use crate::quadrature::{integrate_breaks, uniform_grid, QuadratureRule, TABLE_END_GRADING};

/// Points of the uniform grid merged with the mesh nodes for error integrals.
pub const ERROR_GRID_POINTS: usize = 4096;

/// A relative error, or the absolute error when the reference norm is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeError {
    pub value: f64,
    /// False when `‖u_*‖ = 0` and `value` is the absolute error.
    pub relative: bool,
}

fn union_breaks(mesh: &Mesh) -> Vec<f64> {
    let mut breaks = uniform_grid(mesh.a(), mesh.b(), ERROR_GRID_POINTS);
    breaks.extend_from_slice(mesh.interior());
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

fn relative<F, G>(mesh: &Mesh, diff: F, reference: G, rule: &QuadratureRule) -> Result<RelativeError>
where
    F: Fn(f64) -> f64 + Sync,
    G: Fn(f64) -> f64 + Sync,
{
    let breaks = union_breaks(mesh);
    let rule = if rule.end_grading == 0 {
        rule.with_end_grading(TABLE_END_GRADING)
    } else {
        *rule
    };
    let num = integrate_breaks(|x| diff(x).powi(2), &breaks, &rule)?.sqrt();
    let den = integrate_breaks(|x| reference(x).powi(2), &breaks, &rule)?.sqrt();
    if den > 0.0 {
        Ok(RelativeError {
            value: num / den,
            relative: true,
        })
    } else {
        log::warn!("reference norm vanishes; reporting the absolute error");
        Ok(RelativeError {
            value: num,
            relative: false,
        })
    }
}

/// `‖u_* − u_n‖_{L²} / ‖u_*‖_{L²}`.
pub fn rel_l2_error(u: &PiecewiseAffine, exact: &ExactSolution, rule: &QuadratureRule) -> Result<RelativeError> {
    relative(
        u.mesh(),
        |x| exact.value(x) - u.eval(x).unwrap_or(f64::NAN),
        |x| exact.value(x),
        rule,
    )
}

/// `‖u_*' − u_n'‖_{L²} / ‖u_*'‖_{L²}`.
pub fn rel_h1_error(u: &PiecewiseAffine, exact: &ExactSolution, rule: &QuadratureRule) -> Result<RelativeError> {
    relative(
        u.mesh(),
        |x| exact.deriv(x) - u.deriv(x).unwrap_or(f64::NAN),
        |x| exact.deriv(x),
        rule,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiscrepancyNorm {
    L1,
    L2,
}

/// Mean (`L1`) or root-mean-square (`L2`) distance between the interior
/// nodes of two meshes with the same number of cells.
pub fn node_discrepancy(a: &Mesh, b: &Mesh, norm: DiscrepancyNorm) -> Result<f64> {
    if a.n_cells() != b.n_cells() {
        return Err(Error::InvalidComparison(format!(
            "meshes have {} and {} cells",
            a.n_cells(),
            b.n_cells()
        )));
    }
    let (xa, xb) = (a.interior(), b.interior());
    if xa.is_empty() {
        return Ok(0.0);
    }
    let m = xa.len() as f64;
    let d = xa.iter().zip(xb).map(|(p, q)| (p - q).abs());
    Ok(match norm {
        DiscrepancyNorm::L1 => d.sum::<f64>() / m,
        DiscrepancyNorm::L2 => (d.map(|v| v * v).sum::<f64>() / m).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Equidistributed,
    Amf,
    Gd,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Equidistributed, Method::Amf, Method::Gd];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Equidistributed => "equidistributed",
            Method::Amf => "amf",
            Method::Gd => "gd",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Method> {
        match s.trim() {
            "equi" | "equidistributed" | "uniform" => Ok(Method::Equidistributed),
            "amf" => Ok(Method::Amf),
            "gd" => Ok(Method::Gd),
            other => Err(Error::InvalidParameter(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub n: usize,
    pub method: Method,
    pub rel_l2: f64,
    pub rel_h1: f64,
    pub renormalized_energy: f64,
    pub node_discrepancy_l2: f64,
    pub node_discrepancy_l1: f64,
    /// Outcome of the descent for `Method::Gd` rows.
    pub gd_status: Option<GdStatus>,
}

impl ComparisonRow {
    pub const CSV_HEADER: &'static str = "n,method,rel_l2,rel_h1,energy,disc_l2,disc_l1";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.n,
            self.method,
            self.rel_l2,
            self.rel_h1,
            self.renormalized_energy,
            self.node_discrepancy_l2,
            self.node_discrepancy_l1
        )
    }
}
