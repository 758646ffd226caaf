//! Exact minimizer of the Dirichlet model problem `u'' = f`, `u(a) = u(b) = 0`.
//!
//! The generic solver evaluates the Green's function representation
//!
//! ```text
//! u(x)  = ∫_a^x (x − s) f(s) ds − (x − a)/(b − a) · ∫_a^b (b − s) f(s) ds
//! u'(x) = ∫_a^x f(s) ds − 1/(b − a) · ∫_a^b (b − s) f(s) ds
//! ```
//!
//! from prefix sums of `∫ f` and `∫ (s − a) f` on a dense uniform table. Between
//! table points the two running integrals are completed by a Gauss rule on
//! `[x_j, x]`, so polynomial sources are reproduced to rounding. The table does
//! not use anything from the finite element code.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{CatalogSpec, RealFn, ScalarField};
use crate::quadrature::{uniform_grid, CompensatedSum, QuadratureRule, TABLE_END_GRADING};

/// Initial number of table intervals.
pub const TABLE_START: usize = 16384;
/// Largest table tried before giving up on the agreement test.
pub const TABLE_MAX: usize = 1 << 21;
/// Sup-norm agreement required between successive table resolutions.
pub const TABLE_AGREEMENT: f64 = 1e-12;
/// Size of the probe grid for the agreement test.
pub const PROBE_POINTS: usize = 997;

/// `u_*` with derivatives, together with the source it solves for.
pub struct ExactSolution {
    pub u: ScalarField,
    pub source: ScalarField,
    a: f64,
    b: f64,
    table_intervals: Option<usize>,
    action_cache: RwLock<HashMap<QuadratureRule, f64>>,
}

impl fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExactSolution")
            .field("u", &self.u)
            .field("source", &self.source)
            .field("domain", &(self.a, self.b))
            .field("table_intervals", &self.table_intervals)
            .finish()
    }
}

impl ExactSolution {
    pub fn domain(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        self.u.eval(x)
    }

    #[inline]
    pub fn deriv(&self, x: f64) -> f64 {
        self.u.deriv1(x).expect("exact solution carries u'")
    }

    #[inline]
    pub fn deriv2(&self, x: f64) -> f64 {
        self.u.deriv2(x).expect("exact solution carries u''")
    }

    /// Number of table intervals, `None` for closed forms.
    pub fn table_intervals(&self) -> Option<usize> {
        self.table_intervals
    }

    /// Returns the cached value for `rule`, computing it on first use.
    pub fn cached_action<F>(&self, rule: &QuadratureRule, compute: F) -> Result<f64>
    where
        F: FnOnce() -> Result<f64>,
    {
        if let Some(v) = self.action_cache.read().expect("cache lock").get(rule) {
            return Ok(*v);
        }
        let v = compute()?;
        self.action_cache
            .write()
            .expect("cache lock")
            .entry(*rule)
            .or_insert(v);
        Ok(v)
    }
}

struct GreenTable {
    a: f64,
    b: f64,
    step: f64,
    x: Vec<f64>,
    f0: Vec<f64>,
    g1: Vec<f64>,
    k: f64,
    source: ScalarField,
    rule: QuadratureRule,
}

impl GreenTable {
    fn build(source: &ScalarField, a: f64, b: f64, intervals: usize, rule: QuadratureRule) -> Result<GreenTable> {
        let x = uniform_grid(a, b, intervals + 1);
        let pair = |s: f64| {
            let v = source.eval(s);
            [v, (s - a) * v]
        };
        let cells: Vec<[f64; 2]> = (0..intervals)
            .into_par_iter()
            .map(|j| rule.cell_multi(&pair, x[j], x[j + 1], j == 0, j + 1 == intervals))
            .collect::<Result<_>>()?;
        let mut f0 = Vec::with_capacity(intervals + 1);
        let mut g1 = Vec::with_capacity(intervals + 1);
        let (mut s0, mut s1) = (CompensatedSum::default(), CompensatedSum::default());
        f0.push(0.0);
        g1.push(0.0);
        for [c0, c1] in cells {
            s0.add(c0);
            s1.add(c1);
            f0.push(s0.value());
            g1.push(s1.value());
        }
        let k = (b - a) * f0[intervals] - g1[intervals];
        Ok(GreenTable {
            a,
            b,
            step: (b - a) / intervals as f64,
            x,
            f0,
            g1,
            k,
            source: source.clone(),
            rule,
        })
    }

    /// `(∫_a^x f, ∫_a^x (s − a) f)`.
    fn partial(&self, x: f64) -> (f64, f64) {
        let last = self.x.len() - 1;
        if x >= self.b {
            return (self.f0[last], self.g1[last]);
        }
        if x <= self.a {
            return (0.0, 0.0);
        }
        let mut j = (((x - self.a) / self.step) as usize).min(last - 1);
        while j > 0 && self.x[j] > x {
            j -= 1;
        }
        while j + 1 < last && self.x[j + 1] <= x {
            j += 1;
        }
        if x == self.x[j] {
            return (self.f0[j], self.g1[j]);
        }
        let a = self.a;
        let pair = |s: f64| {
            let v = self.source.eval(s);
            [v, (s - a) * v]
        };
        match self.rule.cell_multi(&pair, self.x[j], x, j == 0, false) {
            Ok([c0, c1]) => (self.f0[j] + c0, self.g1[j] + c1),
            Err(_) => (f64::NAN, f64::NAN),
        }
    }

    fn u(&self, x: f64) -> f64 {
        let (f0, g1) = self.partial(x);
        let r = x - self.a;
        r * f0 - g1 - r / (self.b - self.a) * self.k
    }

    fn du(&self, x: f64) -> f64 {
        let (f0, _) = self.partial(x);
        f0 - self.k / (self.b - self.a)
    }
}

fn probe_grid(a: f64, b: f64) -> Vec<f64> {
    (0..PROBE_POINTS)
        .map(|i| a + (b - a) * (i as f64 + 0.5) / PROBE_POINTS as f64)
        .collect()
}

/// Exact solution for the forcing `f` on `[a, b]`, from the Green's function
/// representation.
///
/// The table starts at [`TABLE_START`] intervals and is doubled until two
/// successive resolutions agree to [`TABLE_AGREEMENT`] on a probe grid.
pub fn solve_exact(f: &ScalarField, a: f64, b: f64, rule: &QuadratureRule) -> Result<ExactSolution> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("empty domain [{a}, {b}]")));
    }
    let mut table_rule = *rule;
    if table_rule.end_grading == 0 {
        table_rule = table_rule.with_end_grading(TABLE_END_GRADING);
    }
    let probes = probe_grid(a, b);
    let mut intervals = TABLE_START;
    let mut coarse = GreenTable::build(f, a, b, intervals, table_rule)?;
    let table = loop {
        let fine = GreenTable::build(f, a, b, 2 * intervals, table_rule)?;
        let diff = probes
            .iter()
            .map(|&x| (fine.u(x) - coarse.u(x)).abs())
            .fold(0.0, f64::max);
        intervals *= 2;
        if !diff.is_finite() {
            return Err(Error::Numeric(format!(
                "exact solution for {} is not finite",
                f.label()
            )));
        }
        if diff <= TABLE_AGREEMENT || intervals >= TABLE_MAX {
            if diff > TABLE_AGREEMENT {
                log::warn!(
                    "exact solution for {}: tables of {} and {} intervals differ by {diff:e}",
                    f.label(),
                    intervals / 2,
                    intervals
                );
            }
            break fine;
        }
        coarse = fine;
    };

    let table = Arc::new(table);
    let (t0, t1) = (Arc::clone(&table), Arc::clone(&table));
    let src = f.clone();
    let u = ScalarField::new(format!("u*[{}]", f.label()), move |x| t0.u(x))
        .with_deriv1(move |x| t1.du(x))
        .with_deriv2(move |x| src.eval(x));
    Ok(ExactSolution {
        u,
        source: f.clone(),
        a,
        b,
        table_intervals: Some(intervals),
        action_cache: RwLock::new(HashMap::new()),
    })
}

/// Closed-form solution on `[0, 1]` for constant and monomial sources.
///
/// For `f = x^k` this is `(x^{k+2} − x)/((k+1)(k+2))`; for `f = c` it is
/// `c·x(x − 1)/2`.
pub fn closed_form_exact(spec: &CatalogSpec) -> Result<ExactSolution> {
    let (u, source) = match *spec {
        CatalogSpec::Const(c) => (
            ScalarField::new(format!("u*[{spec}]"), move |x| c * x * (x - 1.0) / 2.0)
                .with_deriv1(move |x| c * (x - 0.5))
                .with_deriv2(move |_| c),
            spec.build()?,
        ),
        CatalogSpec::Poly(k) => {
            let k = k as i32;
            let d = f64::from((k + 1) * (k + 2));
            (
                ScalarField::new(format!("u*[{spec}]"), move |x| (x.powi(k + 2) - x) / d)
                    .with_deriv1(move |x| (f64::from(k + 2) * x.powi(k + 1) - 1.0) / d)
                    .with_deriv2(move |x| x.powi(k)),
                spec.build()?,
            )
        }
        _ => {
            return Err(Error::NotAvailable(format!(
                "no closed-form solution for {spec}"
            )))
        }
    };
    Ok(ExactSolution {
        u,
        source,
        a: 0.0,
        b: 1.0,
        table_intervals: None,
        action_cache: RwLock::new(HashMap::new()),
    })
}

/// Exact solution for a catalog source on any interval `[a, b]`, from
/// antiderivatives `F1' = f`, `F2' = F1`:
///
/// ```text
/// u(x) = F2(x) − F2(a) − (x − a)·(F2(b) − F2(a))/(b − a)
/// ```
///
/// The Gaussian uses `F1 = ½·erf((x − μ)/(σ√2))` and
/// `F2 = (x − μ)·F1 + σ²·Φ(x)`.
pub fn analytic_exact(spec: &CatalogSpec, a: f64, b: f64) -> Result<ExactSolution> {
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidParameter(format!("empty domain [{a}, {b}]")));
    }
    let source = spec.build()?;
    let (f1, f2): (RealFn, RealFn) = match *spec {
        CatalogSpec::Const(c) => (Arc::new(move |x| c * x), Arc::new(move |x| 0.5 * c * x * x)),
        CatalogSpec::Poly(k) => {
            let k = k as i32;
            let (d1, d2) = (f64::from(k + 1), f64::from((k + 1) * (k + 2)));
            (
                Arc::new(move |x: f64| x.powi(k + 1) / d1),
                Arc::new(move |x: f64| x.powi(k + 2) / d2),
            )
        }
        CatalogSpec::Root(p) => {
            let e = 1.0 / f64::from(p);
            let (d1, d2) = (1.0 + e, (1.0 + e) * (2.0 + e));
            (
                Arc::new(move |x: f64| x.abs().powf(1.0 + e) / d1),
                Arc::new(move |x: f64| x.signum() * x.abs().powf(2.0 + e) / d2),
            )
        }
        CatalogSpec::Gauss { mu, sigma } => {
            let phi = source.as_fn();
            let scale = 1.0 / (sigma * std::f64::consts::SQRT_2);
            let e = move |x: f64| 0.5 * libm::erf((x - mu) * scale);
            let s2 = sigma * sigma;
            (Arc::new(e), Arc::new(move |x: f64| (x - mu) * e(x) + s2 * phi(x)))
        }
    };
    let (fa, slope) = (f2(a), (f2(b) - f2(a)) / (b - a));
    let g1 = Arc::clone(&f1);
    let src = source.clone();
    let u = ScalarField::new(format!("u*[{spec}]"), move |x| f2(x) - fa - (x - a) * slope)
        .with_deriv1(move |x| g1(x) - slope)
        .with_deriv2(move |x| src.eval(x));
    Ok(ExactSolution {
        u,
        source,
        a,
        b,
        table_intervals: None,
        action_cache: RwLock::new(HashMap::new()),
    })
}
