//! Experiment drivers: method comparison over a list of `n`, convergence of
//! minimal energies to `min F*`, and mesh dumps. Results go to CSV files (and
//! optionally SVG plots) written atomically.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use rayon::prelude::*;

use crate::amf::{amf_mesh, asymptotic_map, MonotoneMap};
use crate::energy::{min_limit_energy, renormalized_gap};
use crate::error::{Error, Result};
use crate::exact::{analytic_exact, ExactSolution};
use crate::fem::galerkin_solve;
use crate::field::{CatalogSpec, LagrangianDirichlet, ScalarField};
use crate::gd::{gd_run, GdConfig, GdResult, GdStatus, OptimizationState, StepRule, UpdateMode};
use crate::mesh::{interpolate, uniform_mesh, Mesh, PiecewiseAffine};
use crate::metrics::{node_discrepancy, rel_h1_error, rel_l2_error, ComparisonRow, DiscrepancyNorm, Method};
use crate::quadrature::{uniform_grid, QuadratureRule};
use crate::svg::{Plot, Series};

/// Settings shared by the drivers. Every field can be set from a
/// `key = value` line, see [`ExperimentConfig::set`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub f_spec: String,
    pub domain: (f64, f64),
    pub n_list: Vec<usize>,
    pub methods: Vec<Method>,
    pub gd: GdConfig,
    pub out_dir: PathBuf,
    pub plot: bool,
    /// Recorded for reproducibility; the drivers are deterministic.
    pub seed: u64,
    pub rule: QuadratureRule,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            f_spec: "poly:2".into(),
            domain: (0.0, 1.0),
            n_list: vec![8, 16, 32, 64],
            methods: Method::ALL.to_vec(),
            gd: GdConfig::default(),
            out_dir: PathBuf::from("."),
            plot: false,
            seed: 0,
            rule: QuadratureRule::fine(),
        }
    }
}

fn parse_list<T, F>(value: &str, item: F) -> std::result::Result<Vec<T>, String>
where
    F: Fn(&str) -> std::result::Result<T, String>,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(item)
        .collect()
}

fn parse_num<T: std::str::FromStr>(s: &str) -> std::result::Result<T, String> {
    s.trim().parse::<T>().map_err(|_| format!("cannot parse {s:?}"))
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim() {
        "1" | "true" | "on" | "yes" => Ok(true),
        "0" | "false" | "off" | "no" => Ok(false),
        other => Err(format!("expected a boolean, got {other:?}")),
    }
}

/// Parses `a,b` into an interval.
pub fn parse_domain(s: &str) -> std::result::Result<(f64, f64), String> {
    let v = parse_list(s, parse_num::<f64>)?;
    match v[..] {
        [a, b] if a < b && a.is_finite() && b.is_finite() => Ok((a, b)),
        _ => Err(format!("expected a,b with a < b, got {s:?}")),
    }
}

impl ExperimentConfig {
    /// Sets one key. Keys: `f`, `domain`, `n_list` (or `n`), `methods`,
    /// `eta`, `tol`, `max_iter`, `backtracking`, `step` (`fixed`|`bb`),
    /// `mode` (`joint`|`reduced`), `out_dir`, `plot`, `seed`, `quad_order`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let r: std::result::Result<(), String> = (|| {
            match key.trim() {
                "f" | "f_spec" => {
                    value.parse::<CatalogSpec>().map_err(|e| e.to_string())?;
                    self.f_spec = value.to_string();
                }
                "domain" => self.domain = parse_domain(value)?,
                "n" | "n_list" => self.n_list = parse_list(value, parse_num::<usize>)?,
                "methods" => {
                    self.methods = parse_list(value, |s| s.parse::<Method>().map_err(|e| e.to_string()))?
                }
                "eta" => self.gd.eta = Some(parse_num(value)?),
                "tol" => self.gd.tol = parse_num(value)?,
                "max_iter" => self.gd.max_iter = parse_num(value)?,
                "backtracking" => self.gd.backtracking = parse_bool(value)?,
                "step" => {
                    self.gd.step = match value {
                        "fixed" => StepRule::Fixed,
                        "bb" | "barzilai-borwein" => StepRule::BarzilaiBorwein,
                        other => return Err(format!("unknown step rule {other:?}")),
                    }
                }
                "mode" => {
                    self.gd.mode = match value {
                        "joint" => UpdateMode::Joint,
                        "reduced" => UpdateMode::Reduced,
                        other => return Err(format!("unknown update mode {other:?}")),
                    }
                }
                "out_dir" => self.out_dir = PathBuf::from(value),
                "plot" => self.plot = parse_bool(value)?,
                "seed" => self.seed = parse_num(value)?,
                "quad_order" => {
                    let order: usize = parse_num(value)?;
                    self.rule = QuadratureRule::new(order, self.rule.subdivisions).map_err(|e| e.to_string())?;
                }
                other => return Err(format!("unknown key {other:?}")),
            }
            Ok(())
        })();
        r.map_err(|reason| Error::Config(format!("{}: {reason}", key.trim())))
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_kv(&mut self, text: &str) -> Result<()> {
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", ln + 1)))?;
            self.set(k, v).map_err(|e| match e {
                Error::Config(m) => Error::Config(format!("line {}: {m}", ln + 1)),
                e => e,
            })?;
        }
        Ok(())
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        cfg.apply_kv(text)?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        ExperimentConfig::from_kv(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.f_spec.parse::<CatalogSpec>()?;
        if self.n_list.is_empty() {
            return Err(Error::Config("n_list: empty".into()));
        }
        if let Some(n) = self.n_list.iter().find(|&&n| n < 2) {
            return Err(Error::Config(format!("n_list: every n must be at least 2, got {n}")));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("methods: empty".into()));
        }
        self.gd.validate()
    }

    /// File-name fragment for the forcing spec.
    pub fn tag(&self) -> String {
        file_tag(&self.f_spec)
    }
}

/// `gauss:0.5,0.05` → `gauss_0.5_0.05`.
pub fn file_tag(spec: &str) -> String {
    spec.trim()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '_' })
        .collect()
}

static TMP_COUNTER: AtomicUsize = AtomicUsize::new(0);

/// Writes `contents` to `path` through a temporary file in the same
/// directory and a rename.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} has no file name", path.display())))?
        .to_string_lossy();
    let tmp = dir.join(format!(
        ".{name}.tmp-{}-{}",
        std::process::id(),
        TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path).map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::from(e)
    })
}

/// A forcing term with its exact solution on a domain.
#[derive(Debug)]
pub struct Problem {
    pub f: ScalarField,
    pub exact: ExactSolution,
    pub a: f64,
    pub b: f64,
    pub rule: QuadratureRule,
}

impl Problem {
    /// Catalog sources have elementary antiderivatives, so `u_*` is taken
    /// in closed form on every domain.
    pub fn new(f_spec: &str, a: f64, b: f64, rule: &QuadratureRule) -> Result<Problem> {
        let spec: CatalogSpec = f_spec.parse()?;
        let f = spec.build()?;
        let exact = analytic_exact(&spec, a, b)?;
        Ok(Problem {
            f,
            exact,
            a,
            b,
            rule: *rule,
        })
    }

    pub fn from_config(cfg: &ExperimentConfig) -> Result<Problem> {
        Problem::new(&cfg.f_spec, cfg.domain.0, cfg.domain.1, &cfg.rule)
    }

    pub fn lagrangian(&self) -> LagrangianDirichlet {
        LagrangianDirichlet::new(self.f.clone())
    }

    pub fn map(&self) -> Result<MonotoneMap> {
        asymptotic_map(&self.f, self.a, self.b, &self.rule)
    }

    pub fn galerkin(&self, mesh: &Mesh) -> Result<PiecewiseAffine> {
        galerkin_solve(&self.f, mesh, &self.rule)
    }

    /// Descent from the AMF mesh with Galerkin values.
    pub fn descend(&self, map: &MonotoneMap, n: usize, cfg: &GdConfig) -> Result<GdResult> {
        let u = self.galerkin(&amf_mesh(map, n)?)?;
        gd_run(OptimizationState::from_pa(&u), cfg, &self.exact, &self.rule)
    }

    pub fn renormalized(&self, u: &PiecewiseAffine) -> Result<f64> {
        let n = u.mesh().n_cells();
        Ok(renormalized_gap(&self.lagrangian(), u, &self.exact, n, &self.rule)?.renormalized)
    }
}

struct Computed {
    method: Method,
    u: PiecewiseAffine,
    status: Option<GdStatus>,
}

fn compare_one(p: &Problem, map: &MonotoneMap, n: usize, cfg: &ExperimentConfig) -> Result<Vec<ComparisonRow>> {
    let mut done = Vec::new();
    for &method in &Method::ALL {
        if !cfg.methods.contains(&method) {
            continue;
        }
        let (u, status) = match method {
            Method::Equidistributed => (p.galerkin(&uniform_mesh(n, p.a, p.b)?)?, None),
            Method::Amf => (p.galerkin(&amf_mesh(map, n)?)?, None),
            Method::Gd => {
                let r = p.descend(map, n, &cfg.gd)?;
                if !r.converged() {
                    log::warn!(
                        "{} n={n}: descent ended with status {} after {} iterations",
                        cfg.f_spec,
                        r.status.as_str(),
                        r.state.iter
                    );
                }
                (r.state.to_pa(p.a, p.b)?, Some(r.status))
            }
        };
        done.push(Computed { method, u, status });
    }

    // Discrepancies are measured against GD if run, else AMF, else uniform.
    let reference = done.last().expect("at least one method").u.mesh().clone();
    let rows = done
        .iter()
        .map(|c| {
            let mesh = c.u.mesh();
            Ok(ComparisonRow {
                n,
                method: c.method,
                rel_l2: rel_l2_error(&c.u, &p.exact, &p.rule)?.value,
                rel_h1: rel_h1_error(&c.u, &p.exact, &p.rule)?.value,
                renormalized_energy: p.renormalized(&c.u)?,
                node_discrepancy_l2: node_discrepancy(mesh, &reference, DiscrepancyNorm::L2)?,
                node_discrepancy_l1: node_discrepancy(mesh, &reference, DiscrepancyNorm::L1)?,
                gd_status: c.status,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    for w in rows.windows(2) {
        if w[1].rel_l2 > w[0].rel_l2 * (1.0 + 1e-9) {
            log::warn!(
                "{} n={n}: rel_l2 of {} ({}) exceeds that of {} ({})",
                cfg.f_spec,
                w[1].method,
                w[1].rel_l2,
                w[0].method,
                w[0].rel_l2
            );
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct CompareOutput {
    pub rows: Vec<ComparisonRow>,
    pub csv_path: PathBuf,
    pub svg_path: Option<PathBuf>,
}

pub fn compare_csv(rows: &[ComparisonRow]) -> String {
    let mut s = String::from(ComparisonRow::CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Runs every method for every `n`, writes `compare_<f>.csv` and, with
/// plotting on, `compare_<f>.svg`.
pub fn run_compare(cfg: &ExperimentConfig) -> Result<CompareOutput> {
    cfg.validate()?;
    let p = Problem::from_config(cfg)?;
    let map = p.map()?;
    let per_n = cfg
        .n_list
        .par_iter()
        .map(|&n| compare_one(&p, &map, n, cfg))
        .collect::<Result<Vec<_>>>()?;
    let rows: Vec<ComparisonRow> = per_n.into_iter().flatten().collect();

    let csv_path = cfg.out_dir.join(format!("compare_{}.csv", cfg.tag()));
    write_atomic(&csv_path, &compare_csv(&rows))?;
    let svg_path = if cfg.plot {
        let mut series = Vec::new();
        for &m in Method::ALL.iter().filter(|m| cfg.methods.contains(m)) {
            let pts = |g: fn(&ComparisonRow) -> f64| {
                rows.iter()
                    .filter(|r| r.method == m)
                    .map(|r| (r.n as f64, g(r)))
                    .collect::<Vec<_>>()
            };
            series.push(Series::line(format!("L2 {m}"), pts(|r| r.rel_l2)).with_markers());
            series.push(Series::line(format!("H1 {m}"), pts(|r| r.rel_h1)).dashed().with_markers());
        }
        let plot = Plot {
            title: format!("relative errors, f = {}", cfg.f_spec),
            x_label: "n".into(),
            y_label: "relative error".into(),
            log_x: true,
            log_y: true,
            series,
        };
        let path = cfg.out_dir.join(format!("compare_{}.svg", cfg.tag()));
        write_atomic(&path, &plot.to_svg())?;
        Some(path)
    } else {
        None
    };
    Ok(CompareOutput {
        rows,
        csv_path,
        svg_path,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GammaRow {
    pub n: usize,
    pub energy_gd: f64,
    pub min_energy: f64,
    pub ratio: f64,
    pub status: GdStatus,
}

#[derive(Debug, Clone)]
pub struct GammaReport {
    pub rows: Vec<GammaRow>,
    pub verdict: Verdict,
    pub reason: String,
    pub csv_path: PathBuf,
    pub svg_path: Option<PathBuf>,
}

/// Largest admissible `|ratio − 1|` at the finest `n`.
pub const GAMMA_TOL: f64 = 0.05;
/// Allowed increase of `|ratio − 1|` between consecutive `n`.
pub const GAMMA_JITTER: f64 = 1e-3;

/// Verdict on a sequence of `(n, ratio, status)`.
pub fn gamma_verdict(rows: &[GammaRow]) -> (Verdict, String) {
    if rows.len() < 2 {
        return (Verdict::Inconclusive, "need at least two values of n".into());
    }
    if let Some(r) = rows.iter().find(|r| r.status != GdStatus::Converged) {
        return (
            Verdict::Inconclusive,
            format!("descent at n={} ended with status {}", r.n, r.status.as_str()),
        );
    }
    if rows.iter().any(|r| !r.ratio.is_finite()) {
        return (Verdict::Inconclusive, "min F* vanishes; ratio undefined".into());
    }
    let dev: Vec<f64> = rows.iter().map(|r| (r.ratio - 1.0).abs()).collect();
    let last = *dev.last().expect("nonempty");
    if let Some(i) = (1..dev.len()).find(|&i| dev[i] > dev[i - 1] + GAMMA_JITTER) {
        return (
            Verdict::Fail,
            format!(
                "|ratio-1| grows from {} at n={} to {} at n={}",
                dev[i - 1],
                rows[i - 1].n,
                dev[i],
                rows[i].n
            ),
        );
    }
    if last > GAMMA_TOL {
        return (
            Verdict::Fail,
            format!("|ratio-1| = {last} at n={} exceeds {GAMMA_TOL}", rows[rows.len() - 1].n),
        );
    }
    (
        Verdict::Pass,
        format!("|ratio-1| = {last} at n={}", rows[rows.len() - 1].n),
    )
}

/// Descends from the AMF mesh for every `n` and compares the final
/// renormalized energies with `min F*`. Writes `gamma_<f>.csv` with columns
/// `n,energy_gd,min_limit_energy,ratio`.
pub fn run_gamma_check(cfg: &ExperimentConfig) -> Result<GammaReport> {
    cfg.validate()?;
    if cfg.n_list.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("n_list: must be strictly increasing".into()));
    }
    let p = Problem::from_config(cfg)?;
    let map = p.map()?;
    let min = min_limit_energy(&p.f, p.a, p.b, &p.rule)?;
    let rows = cfg
        .n_list
        .par_iter()
        .map(|&n| {
            let r = p.descend(&map, n, &cfg.gd)?;
            let ratio = if min > 0.0 { r.state.energy / min } else { f64::NAN };
            Ok(GammaRow {
                n,
                energy_gd: r.state.energy,
                min_energy: min,
                ratio,
                status: r.status,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (verdict, reason) = gamma_verdict(&rows);

    let mut csv = String::from("n,energy_gd,min_limit_energy,ratio\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{}\n", r.n, r.energy_gd, r.min_energy, r.ratio));
    }
    let csv_path = cfg.out_dir.join(format!("gamma_{}.csv", cfg.tag()));
    write_atomic(&csv_path, &csv)?;
    let svg_path = if cfg.plot {
        let plot = Plot {
            title: format!("n² gap after descent / min F*, f = {}", cfg.f_spec),
            x_label: "n".into(),
            y_label: "ratio".into(),
            log_x: true,
            log_y: false,
            series: vec![
                Series::line("ratio", rows.iter().map(|r| (r.n as f64, r.ratio)).collect()).with_markers(),
                Series::line("1", rows.iter().map(|r| (r.n as f64, 1.0)).collect()).dashed(),
            ],
        };
        let path = cfg.out_dir.join(format!("gamma_{}.svg", cfg.tag()));
        write_atomic(&path, &plot.to_svg())?;
        Some(path)
    } else {
        None
    };
    Ok(GammaReport {
        rows,
        verdict,
        reason,
        csv_path,
        svg_path,
    })
}

/// Points of the dense grid in mesh dumps.
pub const DUMP_POINTS: usize = 1001;

#[derive(Debug, Clone)]
pub struct MeshDump {
    pub interpolant: PiecewiseAffine,
    pub nodes_path: PathBuf,
    pub dense_path: PathBuf,
    pub svg_path: Option<PathBuf>,
}

/// Writes the AMF nodes with the interpolant of `u_*` (`mesh_<f>_n<n>.csv`)
/// and `u_*` on a dense grid (`exact_<f>.csv`), both with header `x,u`.
pub fn run_mesh_dump(cfg: &ExperimentConfig, n: usize) -> Result<MeshDump> {
    cfg.validate()?;
    let p = Problem::from_config(cfg)?;
    let mesh = amf_mesh(&p.map()?, n)?;
    let interpolant = interpolate(&p.exact.u, &mesh)?;

    let mut buf = Vec::new();
    interpolant.write_csv(&mut buf)?;
    let nodes_path = cfg.out_dir.join(format!("mesh_{}_n{n}.csv", cfg.tag()));
    write_atomic(&nodes_path, &String::from_utf8_lossy(&buf))?;

    let dense: Vec<(f64, f64)> = uniform_grid(p.a, p.b, DUMP_POINTS)
        .into_iter()
        .map(|x| (x, p.exact.value(x)))
        .collect();
    let mut csv = String::from("x,u\n");
    for (x, u) in &dense {
        csv.push_str(&format!("{x},{u}\n"));
    }
    let dense_path = cfg.out_dir.join(format!("exact_{}.csv", cfg.tag()));
    write_atomic(&dense_path, &csv)?;

    let svg_path = if cfg.plot {
        let nodes: Vec<(f64, f64)> = mesh.nodes().iter().copied().zip(interpolant.values().iter().copied()).collect();
        let plot = Plot {
            title: format!("AMF mesh, f = {}, n = {n}", cfg.f_spec),
            x_label: "x".into(),
            y_label: "u".into(),
            log_x: false,
            log_y: false,
            series: vec![
                Series::line("exact", dense),
                Series::line("interpolant", nodes).dashed().with_markers(),
            ],
        };
        let path = cfg.out_dir.join(format!("mesh_{}_n{n}.svg", cfg.tag()));
        write_atomic(&path, &plot.to_svg())?;
        Some(path)
    } else {
        None
    };
    Ok(MeshDump {
        interpolant,
        nodes_path,
        dense_path,
        svg_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_file_parsing() {
        let cfg = ExperimentConfig::from_kv(
            "# sweep\nf = gauss:0.5,0.05\nn_list = 4, 8\nmethods = equi,gd  # no amf\nplot = on\n\nquad_order=9\n",
        )
        .unwrap();
        assert_eq!(cfg.f_spec, "gauss:0.5,0.05");
        assert_eq!(cfg.n_list, vec![4, 8]);
        assert_eq!(cfg.methods, vec![Method::Equidistributed, Method::Gd]);
        assert!(cfg.plot);
        assert_eq!(cfg.rule.order, 9);
        assert_eq!(cfg.tag(), "gauss_0.5_0.05");

        let err = ExperimentConfig::from_kv("f = poly:2\nn_list = 4,x\n").unwrap_err();
        assert!(matches!(&err, Error::Config(m) if m.contains("line 2") && m.contains("n_list")), "{err}");
        let err = ExperimentConfig::from_kv("colour = blue").unwrap_err();
        assert!(err.to_string().contains("unknown key"));
        assert!(ExperimentConfig::from_kv("f = wave:3").is_err());
        assert!(ExperimentConfig::from_kv("just text").is_err());
    }

    #[test]
    fn validation_rejects_bad_lists() {
        let mut cfg = ExperimentConfig::default();
        cfg.n_list = vec![8, 1];
        assert!(cfg.validate().is_err());
        cfg.n_list.clear();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn verdict_rules() {
        let row = |n, ratio| GammaRow {
            n,
            energy_gd: ratio,
            min_energy: 1.0,
            ratio,
            status: GdStatus::Converged,
        };
        assert_eq!(gamma_verdict(&[row(8, 1.0)]).0, Verdict::Inconclusive);
        assert_eq!(gamma_verdict(&[row(8, 1.1), row(16, 1.04)]).0, Verdict::Pass);
        assert_eq!(gamma_verdict(&[row(8, 1.1), row(16, 1.06)]).0, Verdict::Fail);
        assert_eq!(gamma_verdict(&[row(8, 1.01), row(16, 1.03)]).0, Verdict::Fail);
        assert_eq!(gamma_verdict(&[row(8, 1.01), row(16, 1.0105)]).0, Verdict::Pass);
        let mut stalled = row(16, 1.0);
        stalled.status = GdStatus::MaxIter;
        assert_eq!(gamma_verdict(&[row(8, 1.0), stalled]).0, Verdict::Inconclusive);
        assert_eq!(gamma_verdict(&[row(8, f64::NAN), row(16, f64::NAN)]).0, Verdict::Inconclusive);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub").join("x.csv");
        write_atomic(&path, "a\n").unwrap();
        write_atomic(&path, "b\n").unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "b\n");
        assert_eq!(fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }
}
