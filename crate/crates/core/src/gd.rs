//! Gradient descent on node positions and nodal values.
//!
//! The discrete energy is `E(ξ, u) = n²·½∫|u' − u_*'|²`. With `s_j` the slopes
//! of `u`, `w̄_j` the secant slopes of `u_*` and `w_i = u_*'(ξ_i)`:
//!
//! ```text
//! ∂E/∂u_i = n²[(s_{i−1} − w̄_{i−1}) − (s_i − w̄_i)]
//! ∂E/∂ξ_i = n²[½(s_{i−1} − w_i)² − ½(s_i − w_i)² − s_{i−1}(s_{i−1} − w̄_{i−1}) + s_i(s_i − w̄_i)]
//! ```
//!
//! The `u` block is `n²` times the Galerkin residual. Both blocks use nodal
//! values of `u_*` and `u_*'` only.

use crate::energy::energy_gap;
use crate::error::{Error, Result};
use crate::exact::ExactSolution;
use crate::fem::galerkin_from_loads;
use crate::mesh::{Mesh, PiecewiseAffine};
use crate::quadrature::QuadratureRule;

/// Below this step size a run is reported as stalled.
pub const STALL_ETA: f64 = 1e-18;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepRule {
    /// `η` from the configuration at every iteration.
    Fixed,
    /// Barzilai–Borwein step `⟨Δx, Δx⟩ / ⟨Δx, Δg⟩`, falling back to the last
    /// accepted step when the curvature estimate is not positive.
    BarzilaiBorwein,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateMode {
    /// Step on nodes and nodal values together.
    Joint,
    /// Step on nodes; nodal values are re-solved on every mesh.
    Reduced,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GdConfig {
    /// Initial (and, for [`StepRule::Fixed`], every) step; `None` means `0.1/n²`.
    pub eta: Option<f64>,
    /// Threshold on the 1-norm of the full gradient.
    pub tol: f64,
    pub max_iter: usize,
    pub backtracking: bool,
    pub step: StepRule,
    pub mode: UpdateMode,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig {
            eta: None,
            tol: 1e-6,
            max_iter: 100_000,
            backtracking: true,
            step: StepRule::BarzilaiBorwein,
            mode: UpdateMode::Reduced,
        }
    }
}

impl GdConfig {
    /// Fixed step on the joint variables.
    pub fn fixed_joint() -> Self {
        GdConfig {
            step: StepRule::Fixed,
            mode: UpdateMode::Joint,
            ..GdConfig::default()
        }
    }

    pub fn initial_eta(&self, n: usize) -> f64 {
        self.eta.unwrap_or(0.1 / (n * n) as f64)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::InvalidParameter(format!("eta must be positive, got {eta}")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tol must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

/// Interior nodes and interior nodal values, with the energy and gradient at
/// that point once evaluated. The gradient is laid out as `[∂/∂ξ, ∂/∂u]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationState {
    pub xi: Vec<f64>,
    pub uvals: Vec<f64>,
    pub energy: f64,
    pub grad: Vec<f64>,
    pub iter: usize,
}

impl OptimizationState {
    pub fn new(xi: Vec<f64>, uvals: Vec<f64>) -> Result<Self> {
        if xi.len() != uvals.len() {
            return Err(Error::InvalidParameter(format!(
                "{} nodes but {} nodal values",
                xi.len(),
                uvals.len()
            )));
        }
        Ok(OptimizationState {
            xi,
            uvals,
            energy: f64::NAN,
            grad: Vec::new(),
            iter: 0,
        })
    }

    /// State from a piecewise-affine function with zero boundary values.
    pub fn from_pa(u: &PiecewiseAffine) -> Self {
        OptimizationState {
            xi: u.mesh().interior().to_vec(),
            uvals: u.interior_values().to_vec(),
            energy: f64::NAN,
            grad: Vec::new(),
            iter: 0,
        }
    }

    /// Number of cells.
    pub fn n(&self) -> usize {
        self.xi.len() + 1
    }

    pub fn mesh(&self, a: f64, b: f64) -> Result<Mesh> {
        Mesh::from_interior(a, b, &self.xi).map_err(|e| Error::Infeasible(e.to_string()))
    }

    pub fn to_pa(&self, a: f64, b: f64) -> Result<PiecewiseAffine> {
        PiecewiseAffine::with_zero_boundary(self.mesh(a, b)?, &self.uvals)
    }

    pub fn grad_norm1(&self) -> f64 {
        self.grad.iter().map(|g| g.abs()).sum()
    }

    /// Fills `energy` and `grad`.
    pub fn evaluate(&mut self, exact: &ExactSolution, rule: &QuadratureRule) -> Result<()> {
        self.energy = discrete_energy(self, exact, rule)?;
        self.grad = energy_gradient(self, exact)?;
        Ok(())
    }
}

/// `n²(F(u) − F(u_*))` for the implied mesh and function; an invalid mesh
/// is [`Error::Infeasible`].
pub fn discrete_energy(state: &OptimizationState, exact: &ExactSolution, rule: &QuadratureRule) -> Result<f64> {
    let (a, b) = exact.domain();
    let u = state.to_pa(a, b)?;
    let n = state.n() as f64;
    Ok(n * n * energy_gap(exact, &u, rule)?)
}

/// Analytic gradient `[∂E/∂ξ, ∂E/∂u]`.
pub fn energy_gradient(state: &OptimizationState, exact: &ExactSolution) -> Result<Vec<f64>> {
    let (a, b) = exact.domain();
    let mesh = state.mesh(a, b)?;
    let x = mesh.nodes();
    let n = state.n();
    let n2 = (n * n) as f64;

    let mut u = Vec::with_capacity(n + 1);
    u.push(0.0);
    u.extend_from_slice(&state.uvals);
    u.push(0.0);
    let ustar: Vec<f64> = x.iter().map(|&t| exact.value(t)).collect();
    let h = mesh.cell_lengths();
    let s: Vec<f64> = (0..n).map(|j| (u[j + 1] - u[j]) / h[j]).collect();
    let wbar: Vec<f64> = (0..n).map(|j| (ustar[j + 1] - ustar[j]) / h[j]).collect();

    let mut grad = vec![0.0; 2 * (n - 1)];
    for i in 1..n {
        let w = exact.deriv(x[i]);
        let (sl, sr) = (s[i - 1], s[i]);
        let (dl, dr) = (sl - wbar[i - 1], sr - wbar[i]);
        grad[i - 1] = n2 * (0.5 * (sl - w).powi(2) - 0.5 * (sr - w).powi(2) - sl * dl + sr * dr);
        grad[n - 1 + i - 1] = n2 * (dl - dr);
    }
    Ok(grad)
}

/// Galerkin nodal values on `mesh` with loads `∫ f·φ_i = w̄_i − w̄_{i−1}`
/// integrated exactly through `u_*`.
pub fn galerkin_values(exact: &ExactSolution, mesh: &Mesh) -> Result<Vec<f64>> {
    let x = mesh.nodes();
    let h = mesh.cell_lengths();
    let wbar: Vec<f64> = (0..h.len())
        .map(|j| (exact.value(x[j + 1]) - exact.value(x[j])) / h[j])
        .collect();
    let loads: Vec<f64> = (1..h.len()).map(|i| wbar[i] - wbar[i - 1]).collect();
    Ok(galerkin_from_loads(mesh, &loads)?.interior_values().to_vec())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GdStatus {
    Converged,
    MaxIter,
    Stalled,
}

impl GdStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            GdStatus::Converged => "converged",
            GdStatus::MaxIter => "max_iter",
            GdStatus::Stalled => "stalled",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub energy: f64,
    pub gradnorm: f64,
}

#[derive(Debug, Clone)]
pub struct GdResult {
    pub state: OptimizationState,
    pub trace: Vec<TraceRow>,
    pub status: GdStatus,
}

impl GdResult {
    pub fn converged(&self) -> bool {
        self.status == GdStatus::Converged
    }

    pub fn write_trace<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "iter,energy,gradnorm")?;
        for r in &self.trace {
            writeln!(w, "{},{},{}", r.iter, r.energy, r.gradnorm)?;
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

struct Stepper<'a> {
    exact: &'a ExactSolution,
    rule: &'a QuadratureRule,
    mode: UpdateMode,
    a: f64,
    b: f64,
}

impl Stepper<'_> {
    /// Active variables and the matching gradient block.
    fn active<'s>(&self, s: &'s OptimizationState) -> (Vec<f64>, &'s [f64]) {
        match self.mode {
            UpdateMode::Reduced => (s.xi.clone(), &s.grad[..s.xi.len()]),
            UpdateMode::Joint => ([s.xi.as_slice(), &s.uvals].concat(), &s.grad[..]),
        }
    }

    fn reduce(&self, s: &mut OptimizationState) -> Result<()> {
        if self.mode == UpdateMode::Reduced {
            s.uvals = galerkin_values(self.exact, &s.mesh(self.a, self.b)?)?;
        }
        Ok(())
    }

    /// Candidate `x − η∇E` with its energy; `Ok(None)` if infeasible.
    fn trial(&self, x: &OptimizationState, eta: f64) -> Result<Option<OptimizationState>> {
        let m = x.xi.len();
        let mut c = x.clone();
        for i in 0..m {
            c.xi[i] -= eta * x.grad[i];
        }
        if self.mode == UpdateMode::Joint {
            for i in 0..m {
                c.uvals[i] -= eta * x.grad[m + i];
            }
        }
        match self.reduce(&mut c).and_then(|_| discrete_energy(&c, self.exact, self.rule)) {
            Ok(e) => {
                c.energy = e;
                Ok(Some(c))
            }
            Err(Error::Infeasible(_)) => Ok(None),
            Err(e) => Err(e),
        }
    }
}

/// Runs descent from `init` until the gradient 1-norm falls below
/// `cfg.tol`, `cfg.max_iter` steps were taken, or the step size underflows.
///
/// With backtracking, a step that leaves the feasible set or raises the
/// energy is retried with half the step, so the recorded energies never
/// increase.
pub fn gd_run(
    init: OptimizationState,
    cfg: &GdConfig,
    exact: &ExactSolution,
    rule: &QuadratureRule,
) -> Result<GdResult> {
    cfg.validate()?;
    let (a, b) = exact.domain();
    let n = init.n();
    if n < 2 {
        return Err(Error::InvalidParameter("descent needs at least two cells".into()));
    }
    let stepper = Stepper {
        exact,
        rule,
        mode: cfg.mode,
        a,
        b,
    };

    let mut x = init;
    x.iter = 0;
    stepper.reduce(&mut x)?;
    x.evaluate(exact, rule)?;
    let mut trace = vec![TraceRow {
        iter: 0,
        energy: x.energy,
        gradnorm: x.grad_norm1(),
    }];

    let eta0 = cfg.initial_eta(n);
    let mut last_eta = eta0;
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;

    let status = loop {
        if x.grad_norm1() < cfg.tol {
            break GdStatus::Converged;
        }
        if x.iter >= cfg.max_iter {
            break GdStatus::MaxIter;
        }
        let (vars, g) = stepper.active(&x);
        let mut eta = match (cfg.step, &prev) {
            (StepRule::BarzilaiBorwein, Some((pv, pg))) => {
                let s: Vec<f64> = vars.iter().zip(pv).map(|(p, q)| p - q).collect();
                let y: Vec<f64> = g.iter().zip(pg).map(|(p, q)| p - q).collect();
                let (ss, sy) = (dot(&s, &s), dot(&s, &y));
                if sy > 0.0 && (ss / sy).is_finite() {
                    ss / sy
                } else {
                    last_eta
                }
            }
            _ => eta0,
        };

        let accepted = loop {
            if eta < STALL_ETA {
                break None;
            }
            match stepper.trial(&x, eta)? {
                Some(c) if !cfg.backtracking || c.energy <= x.energy => break Some(c),
                None if !cfg.backtracking => {
                    log::warn!("descent step left the feasible set at iteration {}", x.iter);
                    break None;
                }
                _ => eta *= 0.5,
            }
        };
        let Some(mut c) = accepted else {
            break GdStatus::Stalled;
        };

        c.grad = energy_gradient(&c, exact)?;
        c.iter = x.iter + 1;
        last_eta = eta;
        let g = g.to_vec();
        prev = Some((vars, g));
        x = c;
        trace.push(TraceRow {
            iter: x.iter,
            energy: x.energy,
            gradnorm: x.grad_norm1(),
        });
    };

    log::debug!(
        "descent n={n}: {} after {} iterations, energy {}, |grad|_1 {:e}",
        status.as_str(),
        x.iter,
        x.energy,
        x.grad_norm1()
    );
    Ok(GdResult {
        state: x,
        trace,
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amf::{amf_mesh, asymptotic_map};
    use crate::energy::{min_limit_energy, renormalized_gap};
    use crate::exact::{closed_form_exact, solve_exact};
    use crate::fem::{galerkin_solve, residual};
    use crate::field::{make_constant, make_gaussian, make_monomial, CatalogSpec, LagrangianDirichlet};
    use crate::mesh::{interpolate, uniform_mesh};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fd_gradient(s: &OptimizationState, exact: &ExactSolution, rule: &QuadratureRule) -> Vec<f64> {
        let (a, b) = exact.domain();
        let m = s.xi.len();
        let h = s.mesh(a, b).unwrap().cell_lengths();
        let e = |t: &OptimizationState| discrete_energy(t, exact, rule).unwrap();
        let mut g = vec![0.0; 2 * m];
        for i in 0..m {
            let d = 1e-7 * h[i].min(h[i + 1]);
            let (mut p, mut q) = (s.clone(), s.clone());
            p.xi[i] += d;
            q.xi[i] -= d;
            g[i] = (e(&p) - e(&q)) / (2.0 * d);
            let d = 1e-7;
            let (mut p, mut q) = (s.clone(), s.clone());
            p.uvals[i] += d;
            q.uvals[i] -= d;
            g[m + i] = (e(&p) - e(&q)) / (2.0 * d);
        }
        g
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize, exact: &ExactSolution) -> OptimizationState {
        let mut xi: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(0.02..0.98)).collect();
        xi.sort_by(f64::total_cmp);
        for i in 1..xi.len() {
            if xi[i] - xi[i - 1] < 1e-3 {
                xi[i] = xi[i - 1] + 1e-3;
            }
        }
        let uvals = xi
            .iter()
            .map(|&x| exact.value(x) + 0.01 * rng.gen_range(-1.0..1.0))
            .collect();
        OptimizationState::new(xi, uvals).unwrap()
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let rule = QuadratureRule::fine();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for f in [make_monomial(2).unwrap(), make_gaussian(0.5, 0.1).unwrap()] {
            let exact = solve_exact(&f, 0.0, 1.0, &rule).unwrap();
            for n in [4, 8, 16] {
                for _ in 0..4 {
                    let s = random_state(&mut rng, n, &exact);
                    let g = energy_gradient(&s, &exact).unwrap();
                    let fd = fd_gradient(&s, &exact, &rule);
                    let scale = fd.iter().fold(1e-10f64, |m, v| m.max(v.abs()));
                    let err = g.iter().zip(&fd).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
                    assert!(err <= 1e-5 * scale, "{} n={n}: {err:e} vs {scale:e}", f.label());
                }
            }
        }
    }

    #[test]
    fn u_block_is_scaled_galerkin_residual() {
        let f = make_gaussian(0.5, 0.1).unwrap();
        let rule = QuadratureRule::fine();
        let exact = solve_exact(&f, 0.0, 1.0, &rule).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_state(&mut rng, 8, &exact);
        let g = energy_gradient(&s, &exact).unwrap();
        let r = residual(&f, &s.to_pa(0.0, 1.0).unwrap(), &rule).unwrap();
        for (gi, ri) in g[7..].iter().zip(&r) {
            assert!((gi - 64.0 * ri).abs() < 1e-8, "{gi} vs {}", 64.0 * ri);
        }
    }

    #[test]
    fn constant_source_uniform_mesh_is_stationary() {
        let rule = QuadratureRule::default();
        let exact = closed_form_exact(&CatalogSpec::Const(1.0)).unwrap();
        for n in [2, 5, 8] {
            let u = interpolate(&exact.u, &uniform_mesh(n, 0.0, 1.0).unwrap()).unwrap();
            let s = OptimizationState::from_pa(&u);
            let e = discrete_energy(&s, &exact, &rule).unwrap();
            assert!((e - 1.0 / 24.0).abs() < 1e-12);
            let g = energy_gradient(&s, &exact).unwrap();
            assert!(g.iter().all(|v| v.abs() < 1e-10), "{g:?}");
        }
    }

    #[test]
    fn galerkin_values_minimize_energy_on_fixed_nodes() {
        let f = make_monomial(3).unwrap();
        let rule = QuadratureRule::fine();
        let exact = closed_form_exact(&CatalogSpec::Poly(3)).unwrap();
        let mesh = crate::mesh::Mesh::new(vec![0.0, 0.2, 0.35, 0.7, 0.9, 1.0]).unwrap();
        let u = galerkin_solve(&f, &mesh, &rule).unwrap();
        let best = discrete_energy(&OptimizationState::from_pa(&u), &exact, &rule).unwrap();
        let own = galerkin_values(&exact, &mesh).unwrap();
        for (p, q) in own.iter().zip(u.interior_values()) {
            assert!((p - q).abs() < 1e-12);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let vals = u.interior_values().iter().map(|v| v + 1e-3 * rng.gen_range(-1.0..1.0)).collect();
            let s = OptimizationState::new(mesh.interior().to_vec(), vals).unwrap();
            assert!(discrete_energy(&s, &exact, &rule).unwrap() >= best);
        }
    }

    #[test]
    fn energy_matches_renormalized_gap() {
        let f = make_gaussian(0.5, 0.05).unwrap();
        let rule = QuadratureRule::fine();
        let exact = solve_exact(&f, 0.0, 1.0, &rule).unwrap();
        let mesh = uniform_mesh(10, 0.0, 1.0).unwrap();
        let u = galerkin_solve(&f, &mesh, &rule).unwrap();
        let r = renormalized_gap(&LagrangianDirichlet::new(f), &u, &exact, 10, &rule).unwrap();
        let e = discrete_energy(&OptimizationState::from_pa(&u), &exact, &rule).unwrap();
        assert!((e - r.renormalized).abs() < 1e-12);
    }

    #[test]
    fn infeasible_states_are_rejected() {
        let rule = QuadratureRule::default();
        let exact = closed_form_exact(&CatalogSpec::Poly(2)).unwrap();
        let s = OptimizationState::new(vec![0.6, 0.4], vec![0.0, 0.0]).unwrap();
        assert!(matches!(discrete_energy(&s, &exact, &rule), Err(Error::Infeasible(_))));
        assert!(matches!(energy_gradient(&s, &exact), Err(Error::Infeasible(_))));
        assert!(matches!(
            gd_run(s, &GdConfig::default(), &exact, &rule),
            Err(Error::Infeasible(_))
        ));
        let s = OptimizationState::new(vec![0.5, 1.2], vec![0.0, 0.0]).unwrap();
        assert!(discrete_energy(&s, &exact, &rule).is_err());
        assert!(OptimizationState::new(vec![0.5], vec![]).is_err());
    }

    #[test]
    fn constant_source_terminates_immediately() {
        let f = make_constant(1.0);
        let rule = QuadratureRule::default();
        let exact = closed_form_exact(&CatalogSpec::Const(1.0)).unwrap();
        let map = asymptotic_map(&f, 0.0, 1.0, &rule).unwrap();
        for cfg in [GdConfig::default(), GdConfig::fixed_joint()] {
            let u = galerkin_solve(&f, &amf_mesh(&map, 8).unwrap(), &rule).unwrap();
            let r = gd_run(OptimizationState::from_pa(&u), &cfg, &exact, &rule).unwrap();
            assert!(r.converged());
            assert!(r.state.iter <= 1);
            assert!((r.state.energy - 1.0 / 24.0).abs() < 1e-12);
        }
    }

    fn amf_init(f: &crate::field::ScalarField, n: usize, rule: &QuadratureRule) -> OptimizationState {
        let map = asymptotic_map(f, 0.0, 1.0, rule).unwrap();
        let u = galerkin_solve(f, &amf_mesh(&map, n).unwrap(), rule).unwrap();
        OptimizationState::from_pa(&u)
    }

    #[test]
    fn descent_from_amf_on_square_source() {
        let f = make_monomial(2).unwrap();
        let rule = QuadratureRule::fine();
        let exact = closed_form_exact(&CatalogSpec::Poly(2)).unwrap();
        let init = amf_init(&f, 16, &rule);
        let e0 = discrete_energy(&init, &exact, &rule).unwrap();
        let r = gd_run(init, &GdConfig::default(), &exact, &rule).unwrap();
        assert!(r.converged(), "{:?}", r.status);
        assert!(r.state.energy <= e0);
        assert!(r.state.energy >= min_limit_energy(&f, 0.0, 1.0, &rule).unwrap() - 1e-9);
        assert!(r.trace.windows(2).all(|w| w[1].energy <= w[0].energy));
        assert!(r.state.grad_norm1() < 1e-6);
        let res = residual(&f, &r.state.to_pa(0.0, 1.0).unwrap(), &rule).unwrap();
        assert!(res.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn fixed_step_joint_descent_decreases_energy() {
        let f = make_gaussian(0.5, 0.1).unwrap();
        let rule = QuadratureRule::fine();
        let exact = solve_exact(&f, 0.0, 1.0, &rule).unwrap();
        let init = amf_init(&f, 6, &rule);
        let e0 = discrete_energy(&init, &exact, &rule).unwrap();
        let cfg = GdConfig {
            max_iter: 300,
            ..GdConfig::fixed_joint()
        };
        let r = gd_run(init, &cfg, &exact, &rule).unwrap();
        assert!(r.state.energy <= e0);
        assert!(r.trace.windows(2).all(|w| w[1].energy <= w[0].energy));
        assert_eq!(r.trace.len(), r.state.iter + 1);
        let mut buf = Vec::new();
        r.write_trace(&mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("iter,energy,gradnorm\n0,"));
    }

    #[test]
    fn max_iter_is_reported_not_raised() {
        let f = make_monomial(2).unwrap();
        let rule = QuadratureRule::fine();
        let exact = closed_form_exact(&CatalogSpec::Poly(2)).unwrap();
        let cfg = GdConfig {
            max_iter: 2,
            ..GdConfig::default()
        };
        let r = gd_run(amf_init(&f, 8, &rule), &cfg, &exact, &rule).unwrap();
        assert_eq!(r.status, GdStatus::MaxIter);
        assert_eq!(r.state.iter, 2);
    }

    #[test]
    fn config_validation() {
        let bad = GdConfig {
            eta: Some(-1.0),
            ..GdConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = GdConfig {
            tol: 0.0,
            ..GdConfig::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(GdConfig::default().initial_eta(10), 0.001);
    }
}
