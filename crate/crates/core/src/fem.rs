//! Galerkin solver for `∫ ½|u'|² + f·u` over piecewise-affine functions on a
//! fixed mesh with zero boundary values.

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::mesh::{Mesh, PiecewiseAffine};
use crate::quadrature::QuadratureRule;

/// Tridiagonal system `sub[i]·x[i-1] + diag[i]·x[i] + sup[i]·x[i+1] = rhs[i]`.
/// `sub[0]` and `sup[last]` are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let m = self.len();
        (0..m)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.sub[i] * x[i - 1];
                }
                if i + 1 < m {
                    v += self.sup[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// Thomas elimination without pivoting, followed by a residual check.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let m = self.len();
        if m == 0 {
            return Ok(Vec::new());
        }
        if let Some(d) = self.diag.iter().find(|d| !(**d > 0.0)) {
            return Err(Error::Numeric(format!("non-positive diagonal entry {d}")));
        }
        let mut c = vec![0.0; m];
        let mut d = vec![0.0; m];
        let mut denom = self.diag[0];
        c[0] = self.sup[0] / denom;
        d[0] = self.rhs[0] / denom;
        for i in 1..m {
            denom = self.diag[i] - self.sub[i] * c[i - 1];
            if denom == 0.0 || !denom.is_finite() {
                return Err(Error::Numeric(format!("zero pivot in row {i}")));
            }
            c[i] = if i + 1 < m { self.sup[i] / denom } else { 0.0 };
            d[i] = (self.rhs[i] - self.sub[i] * d[i - 1]) / denom;
        }
        let mut x = d;
        for i in (0..m - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }

        let ax = self.apply(&x);
        let scale = self
            .rhs
            .iter()
            .chain(&ax)
            .fold(f64::MIN_POSITIVE, |acc, v| acc.max(v.abs()));
        let res = ax
            .iter()
            .zip(&self.rhs)
            .fold(0.0f64, |acc, (a, r)| acc.max((a - r).abs()));
        if !(res <= 1e-10 * scale) {
            return Err(Error::Numeric(format!(
                "tridiagonal residual {res:e} exceeds tolerance (scale {scale:e})"
            )));
        }
        Ok(x)
    }
}

/// Rule used for load integrals: Gaussian sources get at least 7 points per
/// cell.
pub fn load_rule(f: &ScalarField, rule: &QuadratureRule) -> QuadratureRule {
    match f.spec() {
        Some(spec) if spec.is_gaussian() && rule.order < 7 => rule.with_order(7),
        _ => *rule,
    }
}

/// Per cell `[∫ f·(1 − t), ∫ f·t]` with `t` the local coordinate in `[0, 1]`;
/// these are the two halves of the hat-function loads.
pub fn cell_moments(f: &ScalarField, mesh: &Mesh, rule: &QuadratureRule) -> Result<Vec<[f64; 2]>> {
    let rule = load_rule(f, rule);
    (0..mesh.n_cells())
        .map(|i| {
            let (x0, x1) = mesh.cell(i);
            let h = x1 - x0;
            let g = |x: f64| {
                let v = f.eval(x);
                let t = (x - x0) / h;
                [v * (1.0 - t), v * t]
            };
            rule.cell_multi(&g, x0, x1, false, false)
        })
        .collect()
}

/// Interior loads `∫ f·φ_i`, `i = 1..n−1`.
pub fn load_vector(f: &ScalarField, mesh: &Mesh, rule: &QuadratureRule) -> Result<Vec<f64>> {
    Ok(loads_from_moments(&cell_moments(f, mesh, rule)?))
}

pub(crate) fn loads_from_moments(m: &[[f64; 2]]) -> Vec<f64> {
    (1..m.len()).map(|i| m[i - 1][1] + m[i][0]).collect()
}

/// Stiffness system for the interior nodal values with right-hand side `−L`.
pub fn assemble(mesh: &Mesh, loads: &[f64]) -> TridiagonalSystem {
    let h = mesh.cell_lengths();
    let m = mesh.n_cells() - 1;
    let mut sys = TridiagonalSystem {
        sub: vec![0.0; m],
        diag: vec![0.0; m],
        sup: vec![0.0; m],
        rhs: vec![0.0; m],
    };
    for i in 0..m {
        sys.diag[i] = 1.0 / h[i] + 1.0 / h[i + 1];
        sys.sub[i] = if i > 0 { -1.0 / h[i] } else { 0.0 };
        sys.sup[i] = if i + 1 < m { -1.0 / h[i + 1] } else { 0.0 };
        sys.rhs[i] = -loads[i];
    }
    sys
}

/// Minimizer of the Dirichlet energy over piecewise-affine functions on
/// `mesh` with zero boundary values.
pub fn galerkin_solve(f: &ScalarField, mesh: &Mesh, rule: &QuadratureRule) -> Result<PiecewiseAffine> {
    let loads = load_vector(f, mesh, rule)?;
    galerkin_from_loads(mesh, &loads)
}

pub(crate) fn galerkin_from_loads(mesh: &Mesh, loads: &[f64]) -> Result<PiecewiseAffine> {
    let interior = assemble(mesh, loads).solve()?;
    PiecewiseAffine::with_zero_boundary(mesh.clone(), &interior)
}

/// Gradient of the discrete action with respect to the interior nodal
/// values: `s_{i−1} − s_i + ∫ f·φ_i`.
pub fn residual(f: &ScalarField, u: &PiecewiseAffine, rule: &QuadratureRule) -> Result<Vec<f64>> {
    let loads = load_vector(f, u.mesh(), rule)?;
    let s = u.slopes();
    Ok((1..s.len()).map(|i| s[i - 1] - s[i] + loads[i - 1]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{make_constant, make_gaussian, make_monomial};
    use crate::mesh::uniform_mesh;

    #[test]
    fn thomas_matches_dense_solution() {
        let sys = TridiagonalSystem {
            sub: vec![0.0, -1.0, -2.0],
            diag: vec![4.0, 5.0, 6.0],
            sup: vec![-1.0, -1.5, 0.0],
            rhs: vec![1.0, 2.0, 3.0],
        };
        let x = sys.solve().unwrap();
        for (a, r) in sys.apply(&x).iter().zip(&sys.rhs) {
            assert!((a - r).abs() < 1e-14);
        }
        let bad = TridiagonalSystem {
            diag: vec![1.0, 0.0, 1.0],
            ..sys
        };
        assert!(matches!(bad.solve(), Err(Error::Numeric(_))));
    }

    #[test]
    fn zero_source_gives_zero() {
        let m = Mesh::new(vec![0.0, 0.2, 0.3, 0.8, 1.0]).unwrap();
        let u = galerkin_solve(&make_constant(0.0), &m, &QuadratureRule::default()).unwrap();
        assert!(u.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn constant_source_two_cells() {
        let m = uniform_mesh(2, 0.0, 1.0).unwrap();
        let u = galerkin_solve(&make_constant(1.0), &m, &QuadratureRule::default()).unwrap();
        assert!((u.values()[1] + 0.125).abs() < 1e-15);
        assert_eq!(u.values()[0], 0.0);
        assert_eq!(u.values()[2], 0.0);
    }

    #[test]
    fn quadratic_source_is_nodally_exact() {
        let m = Mesh::new(vec![0.0, 0.1, 0.45, 0.5, 0.77, 1.0]).unwrap();
        let u = galerkin_solve(&make_monomial(2).unwrap(), &m, &QuadratureRule::default()).unwrap();
        for (x, v) in m.nodes().iter().zip(u.values()) {
            let exact = (x.powi(4) - x) / 12.0;
            assert!((v - exact).abs() < 1e-15, "{x}: {v} vs {exact}");
        }
    }

    #[test]
    fn residual_vanishes_at_solution() {
        let rule = QuadratureRule::default();
        for f in [make_monomial(3).unwrap(), make_gaussian(0.5, 0.05).unwrap()] {
            let m = Mesh::new(vec![0.0, 0.3, 0.45, 0.5, 0.52, 0.6, 1.0]).unwrap();
            let u = galerkin_solve(&f, &m, &rule).unwrap();
            let r = residual(&f, &u, &rule).unwrap();
            assert!(r.iter().all(|v| v.abs() < 1e-12), "{r:?}");
        }
    }

    #[test]
    fn residual_at_zero_is_load() {
        let m = Mesh::new(vec![0.0, 0.1, 0.35, 0.6, 1.0]).unwrap();
        let h = m.cell_lengths();
        let r = residual(&make_constant(1.0), &PiecewiseAffine::zero(m), &QuadratureRule::default())
            .unwrap();
        for (i, v) in r.iter().enumerate() {
            assert!((v - (h[i] + h[i + 1]) / 2.0).abs() < 1e-15);
        }
    }

    #[test]
    fn residual_is_directional_derivative_of_action() {
        // action = Σ ½ s² h + ∫ f u, evaluated by the same moments
        let f = make_gaussian(0.4, 0.2).unwrap();
        let rule = QuadratureRule::default();
        let m = Mesh::new(vec![0.0, 0.2, 0.5, 0.55, 1.0]).unwrap();
        let action = |vals: &[f64]| {
            let u = PiecewiseAffine::with_zero_boundary(m.clone(), vals).unwrap();
            let mom = cell_moments(&f, &m, &rule).unwrap();
            let h = m.cell_lengths();
            let v = u.values();
            (0..h.len())
                .map(|j| 0.5 * u.slope(j).powi(2) * h[j] + v[j] * mom[j][0] + v[j + 1] * mom[j][1])
                .sum::<f64>()
        };
        let vals = [0.3, -0.2, 0.05];
        let r = residual(
            &f,
            &PiecewiseAffine::with_zero_boundary(m.clone(), &vals).unwrap(),
            &rule,
        )
        .unwrap();
        let delta = 1e-6;
        for i in 0..3 {
            let mut up = vals;
            let mut dn = vals;
            up[i] += delta;
            dn[i] -= delta;
            let fd = (action(&up) - action(&dn)) / (2.0 * delta);
            assert!((fd - r[i]).abs() < 1e-8, "{i}: {fd} vs {}", r[i]);
        }
    }

    #[test]
    fn gaussian_loads_use_order_seven() {
        let f = make_gaussian(0.5, 0.03).unwrap();
        assert_eq!(load_rule(&f, &QuadratureRule::default()).order, 7);
        assert_eq!(load_rule(&make_monomial(2).unwrap(), &QuadratureRule::default()).order, 5);
    }
}
