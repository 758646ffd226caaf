use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use radapt::amf::amf_mesh;
use radapt::energy::{renormalized_gap, EnergyReport};
use radapt::experiment::{
    compare_csv, run_compare, run_gamma_check, run_mesh_dump, write_atomic, ExperimentConfig, Problem, Verdict,
};
use radapt::gd::{gd_run, OptimizationState};
use radapt::mesh::{uniform_mesh, Mesh};
use radapt::quadrature::uniform_grid;
use radapt::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_NUMERIC: u8 = 2;
const EXIT_VERDICT_FAIL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "radapt", version, about = "r-adaptive 1D finite elements: AMF meshes, node descent, energies")]
struct Cli {
    /// Domain as a,b.
    #[arg(long, global = true, allow_hyphen_values = true)]
    domain: Option<String>,
    /// Gauss-Legendre order per quadrature cell.
    #[arg(long, global = true)]
    quad_order: Option<usize>,
    /// Directory for experiment outputs.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// key = value file; flags take precedence over it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    plot: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Source {
    /// Forcing: const:c, poly:k, root:p or gauss:mu,sigma.
    #[arg(long = "f")]
    f: Option<String>,
}

#[derive(Args, Debug, Default)]
struct Descent {
    /// Initial step size (default 0.1/n²).
    #[arg(long)]
    eta: Option<f64>,
    /// Stop when the gradient 1-norm is below this.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    /// fixed or bb.
    #[arg(long)]
    step: Option<String>,
    /// joint or reduced.
    #[arg(long)]
    mode: Option<String>,
    /// Halve rejected steps (true/false).
    #[arg(long)]
    backtracking: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MeshKind {
    Uniform,
    Amf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact solution u, u', u'' on a uniform grid.
    Solve {
        #[command(flatten)]
        src: Source,
        #[arg(long, default_value_t = 1001)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Galerkin solution on a uniform or AMF mesh.
    Fem {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = MeshKind::Uniform)]
        mesh: MeshKind,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// AMF mesh nodes, optionally with the mesh map table.
    Amf {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the (x, y) map table here.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Gradient descent on node positions and nodal values.
    Gd {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        n: Option<usize>,
        #[command(flatten)]
        descent: Descent,
        #[arg(long, value_enum, default_value_t = MeshKind::Amf)]
        init: MeshKind,
        /// Write iter,energy,gradnorm here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the final nodes here (default stdout).
        #[arg(long)]
        nodes: Option<PathBuf>,
    },
    /// Energy report for the Galerkin solution on one mesh.
    Energy {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, value_enum, default_value_t = MeshKind::Uniform)]
        mesh: MeshKind,
    },
    /// Error and energy table for every method and n.
    Compare {
        #[command(flatten)]
        src: Source,
        /// Comma-separated element counts.
        #[arg(long)]
        n_list: Option<String>,
        /// Comma-separated subset of equi,amf,gd.
        #[arg(long)]
        methods: Option<String>,
        #[command(flatten)]
        descent: Descent,
    },
    /// Descent energies against the limit minimum; exit 3 on FAIL.
    GammaCheck {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        n_list: Option<String>,
        #[command(flatten)]
        descent: Descent,
    },
    /// AMF nodes with the interpolant of u and u on a dense grid.
    MeshDump {
        #[command(flatten)]
        src: Source,
        #[arg(long)]
        n: Option<usize>,
    },
}

fn set_opt<T: ToString>(cfg: &mut ExperimentConfig, key: &str, v: &Option<T>) -> radapt::Result<()> {
    match v {
        Some(v) => cfg.set(key, &v.to_string()),
        None => Ok(()),
    }
}

fn apply_descent(cfg: &mut ExperimentConfig, d: &Descent) -> radapt::Result<()> {
    set_opt(cfg, "eta", &d.eta)?;
    set_opt(cfg, "tol", &d.tol)?;
    set_opt(cfg, "max_iter", &d.max_iter)?;
    set_opt(cfg, "step", &d.step)?;
    set_opt(cfg, "mode", &d.mode)?;
    set_opt(cfg, "backtracking", &d.backtracking)
}

fn build_config(cli: &Cli) -> radapt::Result<ExperimentConfig> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    set_opt(&mut cfg, "domain", &cli.domain)?;
    set_opt(&mut cfg, "quad_order", &cli.quad_order)?;
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    if cli.plot {
        cfg.plot = true;
    }
    let (src, n, n_list, methods, descent) = match &cli.command {
        Command::Solve { src, .. }
        | Command::Fem { src, .. }
        | Command::Amf { src, .. }
        | Command::Energy { src, .. }
        | Command::MeshDump { src, .. } => (src, single_n(&cli.command), None, None, None),
        Command::Gd { src, descent, .. } => (src, single_n(&cli.command), None, None, Some(descent)),
        Command::Compare {
            src,
            n_list,
            methods,
            descent,
        } => (src, None, n_list.as_ref(), methods.as_ref(), Some(descent)),
        Command::GammaCheck { src, n_list, descent } => (src, None, n_list.as_ref(), None, Some(descent)),
    };
    set_opt(&mut cfg, "f", &src.f)?;
    set_opt(&mut cfg, "n", &n)?;
    set_opt(&mut cfg, "n_list", &n_list)?;
    set_opt(&mut cfg, "methods", &methods)?;
    if let Some(d) = descent {
        apply_descent(&mut cfg, d)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn single_n(cmd: &Command) -> Option<usize> {
    match cmd {
        Command::Fem { n, .. }
        | Command::Amf { n, .. }
        | Command::Gd { n, .. }
        | Command::Energy { n, .. }
        | Command::MeshDump { n, .. } => *n,
        _ => None,
    }
}

/// Writes through `f` to `path`, or to stdout without a path.
fn emit<F>(path: Option<&Path>, f: F) -> radapt::Result<()>
where
    F: FnOnce(&mut dyn Write) -> io::Result<()>,
{
    match path {
        Some(p) => {
            let mut buf = Vec::new();
            f(&mut buf)?;
            write_atomic(p, &String::from_utf8_lossy(&buf))
        }
        None => {
            let mut out = BufWriter::new(io::stdout().lock());
            f(&mut out)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn mesh_for(p: &Problem, kind: MeshKind, n: usize) -> radapt::Result<Mesh> {
    match kind {
        MeshKind::Uniform => uniform_mesh(n, p.a, p.b),
        MeshKind::Amf => amf_mesh(&p.map()?, n),
    }
}

fn run(cli: &Cli) -> radapt::Result<ExitCode> {
    let cfg = build_config(cli)?;
    // Single-mesh commands use the first entry of n_list.
    let n = cfg.n_list[0];
    match &cli.command {
        Command::Solve { points, out, .. } => {
            if *points < 2 {
                return Err(Error::InvalidParameter(format!("--points must be at least 2, got {points}")));
            }
            let p = Problem::from_config(&cfg)?;
            emit(out.as_deref(), |w| {
                writeln!(w, "x,u,du,d2u")?;
                for x in uniform_grid(p.a, p.b, *points) {
                    writeln!(w, "{x},{},{},{}", p.exact.value(x), p.exact.deriv(x), p.exact.deriv2(x))?;
                }
                Ok(())
            })?;
        }
        Command::Fem { mesh, out, .. } => {
            let p = Problem::from_config(&cfg)?;
            let u = p.galerkin(&mesh_for(&p, *mesh, n)?)?;
            emit(out.as_deref(), |w| u.write_csv(w))?;
        }
        Command::Amf { out, map, .. } => {
            let p = Problem::from_config(&cfg)?;
            let m = p.map()?;
            if let Some(path) = map {
                emit(Some(path), |w| m.write_csv(w))?;
            }
            let mesh = amf_mesh(&m, n)?;
            emit(out.as_deref(), |w| mesh.write_csv(w))?;
        }
        Command::Gd {
            init, trace, nodes, ..
        } => {
            let p = Problem::from_config(&cfg)?;
            let u0 = p.galerkin(&mesh_for(&p, *init, n)?)?;
            let r = gd_run(OptimizationState::from_pa(&u0), &cfg.gd, &p.exact, &p.rule)?;
            if let Some(path) = trace {
                emit(Some(path), |w| r.write_trace(w))?;
            }
            let mesh = r.state.mesh(p.a, p.b)?;
            emit(nodes.as_deref(), |w| mesh.write_csv(w))?;
            eprintln!(
                "status={} iter={} energy={} gradnorm={:e}",
                r.status.as_str(),
                r.state.iter,
                r.state.energy,
                r.state.grad_norm1()
            );
        }
        Command::Energy { mesh, .. } => {
            let p = Problem::from_config(&cfg)?;
            let u = p.galerkin(&mesh_for(&p, *mesh, n)?)?;
            let report = renormalized_gap(&p.lagrangian(), &u, &p.exact, n, &p.rule)?;
            println!("{}", EnergyReport::CSV_HEADER);
            println!("{}", report.csv_row());
        }
        Command::Compare { .. } => {
            let out = run_compare(&cfg)?;
            print!("{}", compare_csv(&out.rows));
            log::info!("wrote {}", out.csv_path.display());
        }
        Command::GammaCheck { .. } => {
            let report = run_gamma_check(&cfg)?;
            print!("{}", std::fs::read_to_string(&report.csv_path)?);
            println!("verdict: {} ({})", report.verdict, report.reason);
            if report.verdict == Verdict::Fail {
                return Ok(ExitCode::from(EXIT_VERDICT_FAIL));
            }
        }
        Command::MeshDump { .. } => {
            let d = run_mesh_dump(&cfg, n)?;
            println!("{}", d.nodes_path.display());
            println!("{}", d.dense_path.display());
            if let Some(s) = d.svg_path {
                println!("{}", s.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_usage() || matches!(e, Error::Io(_)) {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_NUMERIC)
            }
        }
    }
}
