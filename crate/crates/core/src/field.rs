//! Scalar fields on an interval, the Dirichlet Lagrangian, and the catalog of
//! forcing terms used by the experiments.
//!
//! A [`ScalarField`] is a cheap-to-clone handle around an evaluator with
//! optional analytic first and second derivatives. Catalog entries are
//! addressable by short string specs (`const:c`, `poly:k`, `root:p`,
//! `gauss:mu,sigma`), see [`CatalogSpec`].

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use crate::error::{Error, Result};

/// Shared real-valued function of one variable.
pub type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Root derivatives are evaluated at `max(|x|, ROOT_CLAMP)`.
pub const ROOT_CLAMP: f64 = 1e-14;

/// A real function on an interval with optional analytic derivatives.
#[derive(Clone)]
pub struct ScalarField {
    eval: RealFn,
    deriv1: Option<RealFn>,
    deriv2: Option<RealFn>,
    label: String,
    spec: Option<CatalogSpec>,
    fallbacks: Arc<AtomicUsize>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("label", &self.label)
            .field("deriv1", &self.deriv1.is_some())
            .field("deriv2", &self.deriv2.is_some())
            .finish()
    }
}

impl ScalarField {
    pub fn new<F>(label: impl Into<String>, eval: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        ScalarField {
            eval: Arc::new(eval),
            deriv1: None,
            deriv2: None,
            label: label.into(),
            spec: None,
            fallbacks: Arc::new(AtomicUsize::new(0)),
        }
    }

    pub fn with_deriv1<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.deriv1 = Some(Arc::new(d));
        self
    }

    pub fn with_deriv2<F>(mut self, d: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.deriv2 = Some(Arc::new(d));
        self
    }

    fn with_spec(mut self, spec: CatalogSpec) -> Self {
        self.spec = Some(spec);
        self
    }

    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        (self.eval)(x)
    }

    pub fn deriv1(&self, x: f64) -> Option<f64> {
        self.deriv1.as_ref().map(|d| d(x))
    }

    pub fn deriv2(&self, x: f64) -> Option<f64> {
        self.deriv2.as_ref().map(|d| d(x))
    }

    pub fn has_deriv1(&self) -> bool {
        self.deriv1.is_some()
    }

    pub fn has_deriv2(&self) -> bool {
        self.deriv2.is_some()
    }

    /// First derivative, falling back to a central difference with the given
    /// step when no analytic derivative exists. Fallbacks are counted.
    pub fn deriv1_or_fd(&self, x: f64, step: f64) -> f64 {
        match &self.deriv1 {
            Some(d) => d(x),
            None => {
                self.note_fallback();
                (self.eval(x + step) - self.eval(x - step)) / (2.0 * step)
            }
        }
    }

    /// Second derivative with a three-point fallback. The step should be
    /// larger than the one used for first derivatives; callers typically pass
    /// `1e-4 * (b - a)`.
    pub fn deriv2_or_fd(&self, x: f64, step: f64) -> f64 {
        match &self.deriv2 {
            Some(d) => d(x),
            None => {
                self.note_fallback();
                (self.eval(x + step) - 2.0 * self.eval(x) + self.eval(x - step)) / (step * step)
            }
        }
    }

    fn note_fallback(&self) {
        if self.fallbacks.fetch_add(1, Ordering::Relaxed) == 0 {
            log::warn!(
                "field {:?} has no analytic derivative; using finite differences",
                self.label
            );
        }
    }

    /// Number of derivative evaluations that used finite differences.
    pub fn fallback_count(&self) -> usize {
        self.fallbacks.load(Ordering::Relaxed)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Catalog entry this field was built from, if any.
    pub fn spec(&self) -> Option<&CatalogSpec> {
        self.spec.as_ref()
    }

    /// Shared handle to the evaluator.
    pub fn as_fn(&self) -> RealFn {
        Arc::clone(&self.eval)
    }
}

/// Constant field `c`.
pub fn make_constant(c: f64) -> ScalarField {
    ScalarField::new(format!("const:{c}"), move |_| c)
        .with_deriv1(|_| 0.0)
        .with_deriv2(|_| 0.0)
        .with_spec(CatalogSpec::Const(c))
}

/// Monomial `x^k`.
pub fn make_monomial(k: i64) -> Result<ScalarField> {
    if k < 0 {
        return Err(Error::InvalidParameter(format!(
            "monomial degree must be nonnegative, got {k}"
        )));
    }
    let k = i32::try_from(k)
        .map_err(|_| Error::InvalidParameter(format!("monomial degree {k} too large")))?;
    let kf = f64::from(k);
    let d1 = move |x: f64| if k == 0 { 0.0 } else { kf * x.powi(k - 1) };
    let d2 = move |x: f64| {
        if k < 2 {
            0.0
        } else {
            kf * (kf - 1.0) * x.powi(k - 2)
        }
    };
    Ok(ScalarField::new(format!("poly:{k}"), move |x| x.powi(k))
        .with_deriv1(d1)
        .with_deriv2(d2)
        .with_spec(CatalogSpec::Poly(k as u32)))
}

/// Odd root `sign(x)·|x|^{1/p}`.
///
/// The derivatives are unbounded at zero; they are evaluated at
/// `max(|x|, ROOT_CLAMP)`.
pub fn make_root(p: i64) -> Result<ScalarField> {
    if p < 1 {
        return Err(Error::InvalidParameter(format!(
            "root order must be at least 1, got {p}"
        )));
    }
    let e = 1.0 / p as f64;
    let eval = move |x: f64| x.signum() * x.abs().powf(e);
    let d1 = move |x: f64| e * x.abs().max(ROOT_CLAMP).powf(e - 1.0);
    let d2 = move |x: f64| {
        let s = if x < 0.0 { -1.0 } else { 1.0 };
        s * e * (e - 1.0) * x.abs().max(ROOT_CLAMP).powf(e - 2.0)
    };
    Ok(ScalarField::new(format!("root:{p}"), eval)
        .with_deriv1(d1)
        .with_deriv2(d2)
        .with_spec(CatalogSpec::Root(p as u32)))
}

/// Normalized Gaussian density `Φ(μ, σ; x)`.
pub fn make_gaussian(mu: f64, sigma: f64) -> Result<ScalarField> {
    if !(sigma > 0.0) || !sigma.is_finite() || !mu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "gaussian needs finite mu and sigma > 0, got mu={mu}, sigma={sigma}"
        )));
    }
    let norm = 1.0 / (sigma * (2.0 * PI).sqrt());
    let s2 = sigma * sigma;
    let phi = move |x: f64| {
        let d = x - mu;
        norm * (-d * d / (2.0 * s2)).exp()
    };
    Ok(ScalarField::new(format!("gauss:{mu},{sigma}"), phi)
        .with_deriv1(move |x| -(x - mu) / s2 * phi(x))
        .with_deriv2(move |x| {
            let d = x - mu;
            (d * d / (s2 * s2) - 1.0 / s2) * phi(x)
        })
        .with_spec(CatalogSpec::Gauss { mu, sigma }))
}

/// Catalog entry, parsed from `const:c`, `poly:k`, `root:p` or
/// `gauss:mu,sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CatalogSpec {
    Const(f64),
    Poly(u32),
    Root(u32),
    Gauss { mu: f64, sigma: f64 },
}

impl CatalogSpec {
    pub fn build(&self) -> Result<ScalarField> {
        match *self {
            CatalogSpec::Const(c) => Ok(make_constant(c)),
            CatalogSpec::Poly(k) => make_monomial(i64::from(k)),
            CatalogSpec::Root(p) => make_root(i64::from(p)),
            CatalogSpec::Gauss { mu, sigma } => make_gaussian(mu, sigma),
        }
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self, CatalogSpec::Gauss { .. })
    }
}

impl fmt::Display for CatalogSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogSpec::Const(c) => write!(f, "const:{c}"),
            CatalogSpec::Poly(k) => write!(f, "poly:{k}"),
            CatalogSpec::Root(p) => write!(f, "root:{p}"),
            CatalogSpec::Gauss { mu, sigma } => write!(f, "gauss:{mu},{sigma}"),
        }
    }
}

impl FromStr for CatalogSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: &str| Error::FieldSpec {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let (kind, args) = s
            .trim()
            .split_once(':')
            .ok_or_else(|| bad("expected <kind>:<args>"))?;
        let num = |t: &str| -> Result<f64> {
            t.trim()
                .parse::<f64>()
                .map_err(|_| bad(&format!("{t:?} is not a number")))
        };
        let int = |t: &str| -> Result<i64> {
            t.trim()
                .parse::<i64>()
                .map_err(|_| bad(&format!("{t:?} is not an integer")))
        };
        let spec = match kind.trim() {
            "const" => CatalogSpec::Const(num(args)?),
            "poly" => {
                let k = int(args)?;
                if k < 0 {
                    return Err(bad("degree must be nonnegative"));
                }
                CatalogSpec::Poly(k as u32)
            }
            "root" => {
                let p = int(args)?;
                if p < 1 {
                    return Err(bad("root order must be at least 1"));
                }
                CatalogSpec::Root(p as u32)
            }
            "gauss" => {
                let (mu, sigma) = args
                    .split_once(',')
                    .ok_or_else(|| bad("expected gauss:mu,sigma"))?;
                let (mu, sigma) = (num(mu)?, num(sigma)?);
                if !(sigma > 0.0) {
                    return Err(bad("sigma must be positive"));
                }
                CatalogSpec::Gauss { mu, sigma }
            }
            other => return Err(bad(&format!("unknown kind {other:?}"))),
        };
        Ok(spec)
    }
}

/// Parses a catalog spec and builds the field.
pub fn parse_field(spec: &str) -> Result<ScalarField> {
    spec.parse::<CatalogSpec>()?.build()
}

/// Second partial derivatives `(∂²/∂p², ∂²/∂z², ∂²/∂z∂p)` of a Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hessian {
    pub pp: f64,
    pub zz: f64,
    pub zp: f64,
}

/// `L(x, z, p) = ½p² + f(x)·z`.
#[derive(Debug, Clone)]
pub struct LagrangianDirichlet {
    pub forcing: ScalarField,
}

impl LagrangianDirichlet {
    pub fn new(forcing: ScalarField) -> Self {
        LagrangianDirichlet { forcing }
    }

    pub fn eval(&self, x: f64, z: f64, p: f64) -> f64 {
        0.5 * p * p + self.forcing.eval(x) * z
    }

    pub fn hessian(&self, _x: f64, _z: f64, _p: f64) -> Hessian {
        Hessian {
            pp: 1.0,
            zz: 0.0,
            zp: 0.0,
        }
    }
}
