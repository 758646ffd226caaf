//! Asymptotically optimal meshes.
//!
//! The mesh map is `y(x) = ∫_a^x |f|^{2/3} / ∫_a^b |f|^{2/3}` and the `n`-cell
//! mesh has nodes `ξ_i = y⁻¹(i/n)`. Where `f` vanishes on an interval `y` is
//! flat; a level hit on such a plateau is placed at the plateau midpoint, and
//! several levels on one plateau are spread evenly across it.

use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::field::{RealFn, ScalarField};
use crate::mesh::{uniform_mesh, Mesh, MIN_CELL_FRACTION};
use crate::quadrature::{cumulative_table, QuadratureRule, TABLE_END_GRADING};

/// Grid points of the tabulated map.
pub const MAP_SAMPLES: usize = 16385;

/// Snapping beyond this fraction of the domain length is reported.
pub const SNAP_WARN_FRACTION: f64 = 1e-3;

/// Nondecreasing map `[a, b] → [0, 1]` with exact endpoints, tabulated on a
/// uniform grid and evaluated between grid points by integrating the density.
#[derive(Clone)]
pub struct MonotoneMap {
    grid: Vec<f64>,
    values: Vec<f64>,
    density: RealFn,
    total: f64,
    rule: QuadratureRule,
}

impl std::fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MonotoneMap")
            .field("domain", &self.domain())
            .field("samples", &self.grid.len())
            .field("total", &self.total)
            .finish()
    }
}

impl MonotoneMap {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.grid[0], self.grid[self.grid.len() - 1])
    }

    /// `∫_a^b |f|^{2/3}`; zero for a degenerate density.
    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn is_degenerate(&self) -> bool {
        self.total == 0.0
    }

    /// `y'(x)` normalized to unit mass.
    pub fn derivative(&self, x: f64) -> f64 {
        if self.is_degenerate() {
            let (a, b) = self.domain();
            1.0 / (b - a)
        } else {
            (self.density)(x) / self.total
        }
    }

    fn local(&self, j: usize, x: f64) -> f64 {
        let (a, b) = self.domain();
        if self.is_degenerate() {
            return ((x - a) / (b - a)).clamp(0.0, 1.0);
        }
        let last = self.grid.len() - 2;
        let d = |t: f64| (self.density)(t);
        // The table graded its end cells toward a and b; integrate from the
        // same end so that grid values are reproduced.
        let v = if j == last && j > 0 {
            let tail = self.rule.cell_graded(&d, x, b, false, true).unwrap_or(f64::NAN);
            1.0 - tail / self.total
        } else {
            let head = self
                .rule
                .cell_graded(&d, self.grid[j], x, j == 0, false)
                .unwrap_or(f64::NAN);
            self.values[j] + head / self.total
        };
        v.clamp(self.values[j], self.values[j + 1])
    }

    /// `y(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let (a, b) = self.domain();
        if !(a <= x && x <= b) {
            return Err(Error::OutOfDomain { x, a, b });
        }
        if x == b {
            return Ok(1.0);
        }
        let j = self.grid.partition_point(|&g| g <= x).saturating_sub(1);
        Ok(self.local(j, x))
    }

    /// Bisection on `[lo, hi]` for the boundary between `pred` false and true.
    fn bisect(&self, j: usize, mut lo: f64, mut hi: f64, pred: impl Fn(f64) -> bool) -> (f64, f64) {
        while hi - lo > 0.0 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if pred(self.local(j, mid)) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        (lo, hi)
    }

    /// Preimage `[inf{x : y(x) ≥ t}, sup{x : y(x) ≤ t}]` of the level `t`.
    /// The interval is a single point (up to rounding) where `y` increases.
    pub fn preimage(&self, t: f64) -> Result<(f64, f64)> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::InvalidParameter(format!("level {t} outside [0, 1]")));
        }
        let (a, b) = self.domain();
        let m = self.values.len();

        let k = self.values.partition_point(|&v| v < t);
        let lo = if k == 0 {
            a
        } else {
            let j = k - 1;
            let (_, hi) = self.bisect(j, self.grid[j], self.grid[k], |v| v >= t);
            hi
        };

        let k = self.values.partition_point(|&v| v <= t);
        let hi = if k == m {
            b
        } else {
            let j = k - 1;
            let (lo, _) = self.bisect(j, self.grid[j], self.grid[k], |v| v > t);
            lo
        };
        Ok((lo, hi.max(lo)))
    }

    /// `y⁻¹(t)`, midpoint of the preimage.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.preimage(t)?;
        Ok(0.5 * (lo + hi))
    }

    /// Writes the tabulated map under the header `x,y`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,y")?;
        for (x, y) in self.grid.iter().zip(&self.values) {
            writeln!(w, "{x},{y}")?;
        }
        Ok(())
    }
}

/// Tabulates `y(x) = ∫_a^x |f|^{2/3} / ∫_a^b |f|^{2/3}` on [`MAP_SAMPLES`]
/// points. A vanishing density yields the identity-shaped degenerate map.
pub fn asymptotic_map(f: &ScalarField, a: f64, b: f64, rule: &QuadratureRule) -> Result<MonotoneMap> {
    let rule = if rule.end_grading == 0 {
        rule.with_end_grading(TABLE_END_GRADING)
    } else {
        *rule
    };
    let ff = f.clone();
    let density: RealFn = Arc::new(move |x| ff.eval(x).abs().powf(2.0 / 3.0));
    let table = cumulative_table(|x| density(x), a, b, MAP_SAMPLES, &rule)?;
    let total = table.total();
    if !total.is_finite() {
        return Err(Error::NonFinite { x: b, value: total });
    }
    let values = if total > 0.0 {
        let mut v: Vec<f64> = table.cum.iter().map(|c| (c / total).min(1.0)).collect();
        let last = v.len() - 1;
        v[last] = 1.0;
        v
    } else {
        log::warn!("{}: |f|^(2/3) has zero mass on [{a}, {b}]", f.label());
        table.x.iter().map(|x| (x - a) / (b - a)).collect()
    };
    Ok(MonotoneMap {
        grid: table.x,
        values,
        density,
        total,
        rule,
    })
}

/// Mesh with nodes `ξ_i = y⁻¹(i/n)`, snapped to the minimal cell length.
pub fn amf_mesh(map: &MonotoneMap, n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    let (a, b) = map.domain();
    if map.is_degenerate() {
        log::warn!("degenerate mesh density on [{a}, {b}]; using the uniform mesh");
        return uniform_mesh(n, a, b);
    }

    let pre: Vec<(f64, f64)> = (1..n)
        .map(|i| map.preimage(i as f64 / n as f64))
        .collect::<Result<_>>()?;
    let flat = 1e-12 * (b - a);
    let mut interior = Vec::with_capacity(n.saturating_sub(1));
    let mut i = 0;
    while i < pre.len() {
        let (lo, hi) = pre[i];
        let mut run = 1;
        while i + run < pre.len() && pre[i + run] == pre[i] {
            run += 1;
        }
        if hi - lo > flat {
            log::debug!("{run} level(s) on plateau [{lo}, {hi}]");
        }
        for k in 0..run {
            interior.push(lo + (hi - lo) * (k + 1) as f64 / (run + 1) as f64);
        }
        i += run;
    }

    let moved = snap(&mut interior, a, b);
    if moved > SNAP_WARN_FRACTION * (b - a) {
        log::warn!(
            "mesh resolution: snapping to the minimal cell length moved nodes by {moved:e} in total"
        );
    }
    Mesh::from_interior(a, b, &interior)
}

/// Enforces spacing of at least twice the minimal cell length; returns the
/// total displacement.
fn snap(x: &mut [f64], a: f64, b: f64) -> f64 {
    let eps = 2.0 * MIN_CELL_FRACTION * (b - a);
    let orig = x.to_vec();
    let mut prev = a;
    for v in x.iter_mut() {
        if *v < prev + eps {
            *v = prev + eps;
        }
        prev = *v;
    }
    let mut next = b;
    for v in x.iter_mut().rev() {
        if *v > next - eps {
            *v = next - eps;
        }
        next = *v;
    }
    orig.iter().zip(x.iter()).map(|(o, v)| (o - v).abs()).sum()
}
