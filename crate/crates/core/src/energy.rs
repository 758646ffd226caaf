//! Action, renormalized energy gap, second variation and the limit
//! functional `F*(g, y) = ½ δ²F(g) + ((b−a)²/24) ∫ |u_*''|² / y'²`.

use std::fmt;

use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::fem::cell_moments;
use crate::field::{LagrangianDirichlet, ScalarField};
use crate::mesh::PiecewiseAffine;
use crate::quadrature::{integrate_breaks, uniform_grid, QuadratureRule, TABLE_END_GRADING};

/// Cells of the reference partition used for integrals over the whole
/// domain (exact action, limit functional, density mass).
pub const REFERENCE_CELLS: usize = 4096;

/// Tolerance on boundary values of admissible functions.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub n: usize,
    pub action: f64,
    pub exact_action: f64,
    pub gap: f64,
    pub renormalized: f64,
}

impl EnergyReport {
    pub const CSV_HEADER: &'static str = "n,action,exact_action,gap,renormalized";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n, self.action, self.exact_action, self.gap, self.renormalized
        )
    }
}

/// Value of the limit functional; `Infinite` when `u_*'' ≠ 0` where the mesh
/// density vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LimitValue {
    Finite(f64),
    Infinite,
}

impl LimitValue {
    pub fn value(&self) -> f64 {
        match *self {
            LimitValue::Finite(v) => v,
            LimitValue::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, LimitValue::Finite(_))
    }
}

impl fmt::Display for LimitValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LimitValue::Finite(v) => write!(f, "{v}"),
            LimitValue::Infinite => f.write_str("inf"),
        }
    }
}

fn graded(rule: &QuadratureRule) -> QuadratureRule {
    if rule.end_grading == 0 {
        rule.with_end_grading(TABLE_END_GRADING)
    } else {
        *rule
    }
}

/// `F(u) = ∫ ½|u'|² + f·u`. The gradient part is exact; the load part uses
/// the per-cell hat moments of `f`.
pub fn action(l: &LagrangianDirichlet, u: &PiecewiseAffine, rule: &QuadratureRule) -> Result<f64> {
    let mesh = u.mesh();
    let moments = cell_moments(&l.forcing, mesh, rule)?;
    let v = u.values();
    let h = mesh.cell_lengths();
    let terms: Vec<f64> = (0..h.len())
        .map(|j| 0.5 * u.slope(j).powi(2) * h[j] + v[j] * moments[j][0] + v[j + 1] * moments[j][1])
        .collect();
    Ok(crate::quadrature::compensated_sum(&terms))
}

/// `F(u_*)`, computed once per rule and cached on `exact`.
pub fn exact_action(l: &LagrangianDirichlet, exact: &ExactSolution, rule: &QuadratureRule) -> Result<f64> {
    exact.cached_action(rule, || {
        let (a, b) = exact.domain();
        let breaks = uniform_grid(a, b, REFERENCE_CELLS + 1);
        integrate_breaks(
            |x| 0.5 * exact.deriv(x).powi(2) + l.forcing.eval(x) * exact.value(x),
            &breaks,
            &graded(rule),
        )
    })
}

fn check_boundary(u: &PiecewiseAffine) -> Result<()> {
    let v = u.values();
    let (ua, ub) = (v[0], v[v.len() - 1]);
    if ua.abs() > BOUNDARY_TOL || ub.abs() > BOUNDARY_TOL {
        return Err(Error::Inadmissible(format!(
            "boundary values u(a) = {ua:e}, u(b) = {ub:e}"
        )));
    }
    Ok(())
}

/// `F(u) − F(u_*)` as `½ ∫ |u' − u_*'|²`.
///
/// Per cell this splits into `½ h (s − w̄)² + ½ ∫ (u_*' − w̄)²` where `w̄` is
/// the secant slope of `u_*`; neither term suffers cancellation, unlike the
/// difference of two actions.
pub fn energy_gap(exact: &ExactSolution, u: &PiecewiseAffine, rule: &QuadratureRule) -> Result<f64> {
    check_boundary(u)?;
    let mesh = u.mesh();
    let nodes = mesh.nodes();
    let ustar: Vec<f64> = nodes.iter().map(|&x| exact.value(x)).collect();
    let last = mesh.n_cells() - 1;
    let terms = (0..=last)
        .map(|j| {
            let (x0, x1) = mesh.cell(j);
            let h = x1 - x0;
            let wbar = (ustar[j + 1] - ustar[j]) / h;
            let osc = rule.cell_graded(
                &|x| (exact.deriv(x) - wbar).powi(2),
                x0,
                x1,
                j == 0 && rule.end_grading > 0,
                j == last && rule.end_grading > 0,
            )?;
            Ok(0.5 * h * (u.slope(j) - wbar).powi(2) + 0.5 * osc)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(crate::quadrature::compensated_sum(&terms))
}

/// `n²(F(u) − F(u_*))` together with both actions.
pub fn renormalized_gap(
    l: &LagrangianDirichlet,
    u: &PiecewiseAffine,
    exact: &ExactSolution,
    n: usize,
    rule: &QuadratureRule,
) -> Result<EnergyReport> {
    if n != u.mesh().n_cells() {
        return Err(Error::InvalidParameter(format!(
            "n = {n} but the mesh has {} cells",
            u.mesh().n_cells()
        )));
    }
    let gap = energy_gap(exact, u, rule)?;
    let nf = n as f64;
    Ok(EnergyReport {
        n,
        action: action(l, u, rule)?,
        exact_action: exact_action(l, exact, rule)?,
        gap,
        renormalized: nf * nf * gap,
    })
}

fn check_vanishes_at_ends(g: &ScalarField, a: f64, b: f64) -> Result<()> {
    let (ga, gb) = (g.eval(a), g.eval(b));
    if ga.abs() > BOUNDARY_TOL || gb.abs() > BOUNDARY_TOL {
        return Err(Error::Inadmissible(format!(
            "variation {} has g(a) = {ga:e}, g(b) = {gb:e}",
            g.label()
        )));
    }
    Ok(())
}

/// `∫ (g, g')·∇²L·(g, g')ᵀ` along `u_*`. Without an analytic `g'` a central
/// difference of step `1e-6·(b−a)` is used.
pub fn second_variation(
    l: &LagrangianDirichlet,
    exact: &ExactSolution,
    g: &ScalarField,
    rule: &QuadratureRule,
) -> Result<f64> {
    let (a, b) = exact.domain();
    check_vanishes_at_ends(g, a, b)?;
    let step = 1e-6 * (b - a);
    let breaks = uniform_grid(a, b, REFERENCE_CELLS + 1);
    integrate_breaks(
        |x| {
            let h = l.hessian(x, exact.value(x), exact.deriv(x));
            let (gv, gd) = (g.eval(x), g.deriv1_or_fd(x, step));
            h.pp * gd * gd + 2.0 * h.zp * gv * gd + h.zz * gv * gv
        },
        &breaks,
        rule,
    )
}

/// `½ δ²F(g) + ((b−a)²/24) ∫ L_pp |u_*''|² / y'²`.
pub fn limit_functional<D>(
    l: &LagrangianDirichlet,
    exact: &ExactSolution,
    g: &ScalarField,
    y_density: D,
    rule: &QuadratureRule,
) -> Result<LimitValue>
where
    D: Fn(f64) -> f64 + Sync,
{
    let (a, b) = exact.domain();
    let sv = second_variation(l, exact, g, rule)?;
    let breaks = uniform_grid(a, b, REFERENCE_CELLS + 1);
    // Zero density with nonzero curvature is reported through this error
    // and turned into the infinite outcome below.
    let integral = integrate_breaks(
        |x| {
            let d = y_density(x);
            let c = exact.deriv2(x);
            let pp = l.hessian(x, exact.value(x), exact.deriv(x)).pp;
            if d < 0.0 || d.is_nan() {
                f64::NAN
            } else if d == 0.0 {
                if c == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            } else {
                pp * c * c / (d * d)
            }
        },
        &breaks,
        &graded(rule),
    );
    match integral {
        Ok(v) => Ok(LimitValue::Finite(0.5 * sv + (b - a).powi(2) / 24.0 * v)),
        Err(Error::NonFinite { x, value }) if value == f64::INFINITY => {
            log::debug!("limit functional infinite: density vanishes at {x} with u_*'' ≠ 0");
            Ok(LimitValue::Infinite)
        }
        Err(Error::NonFinite { x, .. }) => {
            let d = y_density(x);
            if d < 0.0 {
                Err(Error::InvalidParameter(format!("negative mesh density {d} at {x}")))
            } else {
                Err(Error::NonFinite { x, value: d })
            }
        }
        Err(e) => Err(e),
    }
}

/// `∫_a^b |f|^{2/3}`.
pub fn density_mass(f: &ScalarField, a: f64, b: f64, rule: &QuadratureRule) -> Result<f64> {
    let breaks = uniform_grid(a, b, REFERENCE_CELLS + 1);
    integrate_breaks(|x| f.eval(x).abs().powf(2.0 / 3.0), &breaks, &graded(rule))
}

/// Optimal mesh density `y' = (b−a)|f|^{2/3} / ∫|f|^{2/3}`, which integrates
/// to `b − a`.
pub fn optimal_density(
    f: &ScalarField,
    a: f64,
    b: f64,
    rule: &QuadratureRule,
) -> Result<impl Fn(f64) -> f64 + Sync + Send + Clone> {
    let total = density_mass(f, a, b, rule)?;
    if !(total > 0.0) {
        return Err(Error::DegenerateDensity { a, b });
    }
    let f = f.clone();
    let scale = (b - a) / total;
    Ok(move |x: f64| scale * f.eval(x).abs().powf(2.0 / 3.0))
}

/// `min F* = (1/24)(∫_a^b |f|^{2/3})³`.
pub fn min_limit_energy(f: &ScalarField, a: f64, b: f64, rule: &QuadratureRule) -> Result<f64> {
    Ok(density_mass(f, a, b, rule)?.powi(3) / 24.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{closed_form_exact, solve_exact};
    use crate::fem::galerkin_solve;
    use crate::field::{make_constant, make_gaussian, make_monomial, make_root, CatalogSpec};
    use crate::mesh::{interpolate, uniform_mesh, Mesh};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn lag(f: &ScalarField) -> LagrangianDirichlet {
        LagrangianDirichlet::new(f.clone())
    }

    fn catalog() -> Vec<ScalarField> {
        vec![
            make_constant(1.0),
            make_monomial(1).unwrap(),
            make_monomial(2).unwrap(),
            make_monomial(3).unwrap(),
            make_root(2).unwrap(),
            make_root(3).unwrap(),
            make_gaussian(0.5, 0.1).unwrap(),
            make_gaussian(0.5, 0.05).unwrap(),
        ]
    }

    #[test]
    fn action_examples() {
        let rule = QuadratureRule::default();
        let m = Mesh::new(vec![0.0, 1.0]).unwrap();
        let u = PiecewiseAffine::new(m, vec![0.0, 1.0]).unwrap();
        assert!((action(&lag(&make_constant(0.0)), &u, &rule).unwrap() - 0.5).abs() < 1e-15);

        let m = Mesh::new(vec![0.0, 0.3, 0.4, 1.0]).unwrap();
        let zero = PiecewiseAffine::zero(m);
        assert_eq!(action(&lag(&make_constant(1.0)), &zero, &rule).unwrap(), 0.0);

        // slopes ∓1/4 on two halves: ½·(1/16)·1 + ∫u = 1/32 − 1/16
        let one = make_constant(1.0);
        let ustar = ScalarField::new("x(x-1)/2", |x| x * (x - 1.0) / 2.0);
        let u = interpolate(&ustar, &uniform_mesh(2, 0.0, 1.0).unwrap()).unwrap();
        assert!((action(&lag(&one), &u, &rule).unwrap() + 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn constant_source_renormalized_gap_is_one_over_24() {
        let f = make_constant(1.0);
        let rule = QuadratureRule::default();
        let exact = closed_form_exact(&CatalogSpec::Const(1.0)).unwrap();
        for n in [1, 2, 3, 4, 8, 16, 64] {
            let m = uniform_mesh(n, 0.0, 1.0).unwrap();
            let u = galerkin_solve(&f, &m, &rule).unwrap();
            let r = renormalized_gap(&lag(&f), &u, &exact, n, &rule).unwrap();
            assert!((r.renormalized - 1.0 / 24.0).abs() < 1e-12, "n={n}: {r:?}");
            // the action difference agrees with the identity form
            assert!((r.action - r.exact_action - r.gap).abs() < 1e-13);
            assert_eq!(r.renormalized, (n * n) as f64 * r.gap);
        }
    }

    #[test]
    fn interpolated_zero_solution_has_zero_gap() {
        let f = make_constant(0.0);
        let rule = QuadratureRule::default();
        let exact = solve_exact(&f, 0.0, 1.0, &rule).unwrap();
        let m = Mesh::new(vec![0.0, 0.25, 0.9, 1.0]).unwrap();
        let u = interpolate(&exact.u, &m).unwrap();
        let r = renormalized_gap(&lag(&f), &u, &exact, 3, &rule).unwrap();
        assert_eq!(r.renormalized, 0.0);
    }

    #[test]
    fn boundary_violation_is_inadmissible() {
        let f = make_constant(1.0);
        let rule = QuadratureRule::default();
        let exact = closed_form_exact(&CatalogSpec::Const(1.0)).unwrap();
        let m = uniform_mesh(2, 0.0, 1.0).unwrap();
        let u = PiecewiseAffine::new(m, vec![1e-9, -0.1, 0.0]).unwrap();
        assert!(matches!(
            renormalized_gap(&lag(&f), &u, &exact, 2, &rule),
            Err(Error::Inadmissible(_))
        ));
        let u = PiecewiseAffine::new(uniform_mesh(2, 0.0, 1.0).unwrap(), vec![0.0, -0.1, 0.0]).unwrap();
        assert!(matches!(
            renormalized_gap(&lag(&f), &u, &exact, 3, &rule),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn second_variation_examples() {
        let f = make_monomial(2).unwrap();
        let rule = QuadratureRule::default();
        let exact = closed_form_exact(&CatalogSpec::Poly(2)).unwrap();
        let sine = ScalarField::new("sin", |x| (PI * x).sin()).with_deriv1(|x| PI * (PI * x).cos());
        let v = second_variation(&lag(&f), &exact, &sine, &rule).unwrap();
        assert!((v - PI * PI / 2.0).abs() < 1e-12);
        let zero = make_constant(0.0);
        assert_eq!(second_variation(&lag(&f), &exact, &zero, &rule).unwrap(), 0.0);
        // no analytic derivative: finite-difference fallback
        let bump = ScalarField::new("x(1-x)", |x| x * (1.0 - x));
        let v = second_variation(&lag(&f), &exact, &bump, &rule).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-8);
        assert!(bump.fallback_count() > 0);

        let bad = ScalarField::new("x", |x| x).with_deriv1(|_| 1.0);
        assert!(second_variation(&lag(&f), &exact, &bad, &rule).is_err());
    }

    #[test]
    fn limit_functional_examples() {
        let rule = QuadratureRule::default();
        let zero = make_constant(0.0);

        let one = make_constant(1.0);
        let exact = closed_form_exact(&CatalogSpec::Const(1.0)).unwrap();
        let v = limit_functional(&lag(&one), &exact, &zero, |_| 1.0, &rule).unwrap();
        assert!((v.value() - 1.0 / 24.0).abs() < 1e-14);

        let sq = make_monomial(2).unwrap();
        let exact = closed_form_exact(&CatalogSpec::Poly(2)).unwrap();
        let v = limit_functional(&lag(&sq), &exact, &zero, |x: f64| x.powf(4.0 / 3.0) / (3.0 / 7.0), &rule)
            .unwrap();
        let expect = 27.0 / 8232.0;
        assert!(((v.value() - expect) / expect).abs() < 1e-8, "{v}");

        let v = limit_functional(&lag(&sq), &exact, &zero, |x| if x < 0.5 { 0.0 } else { 2.0 }, &rule)
            .unwrap();
        assert_eq!(v, LimitValue::Infinite);

        assert!(matches!(
            limit_functional(&lag(&sq), &exact, &zero, |x| x - 0.5, &rule),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn zero_curvature_on_zero_density_contributes_nothing() {
        let rule = QuadratureRule::default();
        let f = ScalarField::new("step", |x| if x < 0.5 { 0.0 } else { 1.0 });
        let exact = solve_exact(&f, 0.0, 1.0, &rule).unwrap();
        let v = limit_functional(
            &lag(&f),
            &exact,
            &make_constant(0.0),
            |x| if x < 0.5 { 0.0 } else { 2.0 },
            &rule,
        )
        .unwrap();
        // ∫_{1/2}^1 1/4 dx / 24
        assert!((v.value() - 0.125 / 24.0).abs() < 1e-14, "{v}");
    }

    #[test]
    fn min_limit_energy_examples() {
        let rule = QuadratureRule::default();
        let v = min_limit_energy(&make_constant(1.0), 0.0, 1.0, &rule).unwrap();
        assert!((v - 1.0 / 24.0).abs() < 1e-15);
        let v = min_limit_energy(&make_monomial(2).unwrap(), 0.0, 1.0, &rule).unwrap();
        assert!((v - 27.0 / 8232.0).abs() < 1e-12);
        assert_eq!(min_limit_energy(&make_constant(0.0), 0.0, 1.0, &rule).unwrap(), 0.0);
    }

    #[test]
    fn optimal_density_attains_minimum_and_uniform_does_not_beat_it() {
        let rule = QuadratureRule::default();
        let zero = make_constant(0.0);
        for f in catalog() {
            let exact = solve_exact(&f, 0.0, 1.0, &rule).unwrap();
            let min = min_limit_energy(&f, 0.0, 1.0, &rule).unwrap();
            let dens = optimal_density(&f, 0.0, 1.0, &rule).unwrap();
            let at_opt = limit_functional(&lag(&f), &exact, &zero, dens, &rule).unwrap().value();
            assert!(((at_opt - min) / min).abs() < 1e-8, "{}: {at_opt} vs {min}", f.label());
            let uniform = limit_functional(&lag(&f), &exact, &zero, |_| 1.0, &rule).unwrap().value();
            assert!(uniform >= min * (1.0 - 1e-12), "{}", f.label());
        }
    }

    #[test]
    fn shifted_domain_minimum_matches_limit_functional() {
        let rule = QuadratureRule::default();
        let f = make_gaussian(1.5, 0.3).unwrap();
        let exact = solve_exact(&f, 1.0, 3.0, &rule).unwrap();
        let min = min_limit_energy(&f, 1.0, 3.0, &rule).unwrap();
        let dens = optimal_density(&f, 1.0, 3.0, &rule).unwrap();
        let v = limit_functional(&lag(&f), &exact, &make_constant(0.0), dens, &rule).unwrap().value();
        assert!(((v - min) / min).abs() < 1e-8);
        // uniform mesh on [1, 3] with f = 1: (b−a)³/24
        let one = make_constant(1.0);
        let exact = solve_exact(&one, 1.0, 3.0, &rule).unwrap();
        let u = galerkin_solve(&one, &uniform_mesh(8, 1.0, 3.0).unwrap(), &rule).unwrap();
        let r = renormalized_gap(&lag(&one), &u, &exact, 8, &rule).unwrap();
        assert!((r.renormalized - 8.0 / 24.0).abs() < 1e-10);
    }

    #[test]
    fn quadratic_structure_around_exact_solution() {
        let f = make_monomial(2).unwrap();
        let l = lag(&f);
        let rule = QuadratureRule::default();
        let exact = closed_form_exact(&CatalogSpec::Poly(2)).unwrap();
        let g = ScalarField::new("sin2", |x| (2.0 * PI * x).sin() + x * (1.0 - x))
            .with_deriv1(|x| 2.0 * PI * (2.0 * PI * x).cos() + 1.0 - 2.0 * x);
        let sv = second_variation(&l, &exact, &g, &rule).unwrap();
        let base = exact_action(&l, &exact, &rule).unwrap();
        let breaks = uniform_grid(0.0, 1.0, REFERENCE_CELLS + 1);
        for t in [1e-2, 1e-1, 1.0] {
            let perturbed = integrate_breaks(
                |x| {
                    let u = exact.value(x) + t * g.eval(x);
                    let du = exact.deriv(x) + t * g.deriv1(x).unwrap();
                    l.eval(x, u, du)
                },
                &breaks,
                &rule,
            )
            .unwrap();
            let lhs = perturbed - base;
            let rhs = t * t / 2.0 * sv;
            assert!(((lhs - rhs) / rhs).abs() < 1e-10, "t={t}: {lhs} vs {rhs}");
        }
    }

    #[test]
    fn galerkin_minimizes_action_among_perturbations() {
        let rule = QuadratureRule::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for f in [make_monomial(2).unwrap(), make_gaussian(0.5, 0.05).unwrap()] {
            let l = lag(&f);
            let exact = solve_exact(&f, 0.0, 1.0, &rule).unwrap();
            let mut nodes: Vec<f64> = (0..9).map(|_| rng.gen::<f64>()).collect();
            nodes.extend([0.0, 1.0]);
            nodes.sort_by(f64::total_cmp);
            let m = Mesh::new(nodes).unwrap();
            let u = galerkin_solve(&f, &m, &rule).unwrap();
            let best = action(&l, &u, &rule).unwrap();
            let interp = action(&l, &interpolate(&exact.u, &m).unwrap(), &rule).unwrap();
            assert!(best <= interp + 1e-12);
            for _ in 0..200 {
                let scale = 10f64.powf(rng.gen_range(-6.0..-1.0));
                let vals: Vec<f64> = u
                    .interior_values()
                    .iter()
                    .map(|v| v + scale * rng.gen_range(-1.0..1.0))
                    .collect();
                let p = PiecewiseAffine::with_zero_boundary(m.clone(), &vals).unwrap();
                assert!(action(&l, &p, &rule).unwrap() >= best - 1e-12);
            }
        }
    }

    #[test]
    fn gap_identity_matches_action_difference() {
        let rule = QuadratureRule::fine();
        for f in catalog() {
            let l = lag(&f);
            let exact = solve_exact(&f, 0.0, 1.0, &rule).unwrap();
            let m = Mesh::new(vec![0.0, 0.1, 0.3, 0.45, 0.5, 0.62, 0.8, 1.0]).unwrap();
            let u = galerkin_solve(&f, &m, &rule).unwrap();
            let r = renormalized_gap(&l, &u, &exact, 7, &rule).unwrap();
            assert!(r.gap >= 0.0);
            assert!(
                (r.action - r.exact_action - r.gap).abs() < 1e-9,
                "{}: {} vs {}",
                f.label(),
                r.action - r.exact_action,
                r.gap
            );
        }
    }
}
