use std::fs;
use std::path::Path;

use radapt::experiment::{run_compare, run_gamma_check, run_mesh_dump, ExperimentConfig, Verdict};
use radapt::metrics::Method;

fn config(spec: &str, dir: &Path) -> ExperimentConfig {
    ExperimentConfig {
        f_spec: spec.into(),
        out_dir: dir.to_path_buf(),
        ..ExperimentConfig::default()
    }
}

fn first_line(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap_or("").to_string()
}

/// Element nesting check: every opened tag is closed in order.
fn assert_balanced_xml(svg: &str) {
    assert!(svg.starts_with("<?xml"));
    let mut stack: Vec<String> = Vec::new();
    let mut rest = svg;
    while let Some(start) = rest.find('<') {
        let end = rest[start..].find('>').expect("unterminated tag") + start;
        let tag = &rest[start + 1..end];
        rest = &rest[end + 1..];
        if tag.starts_with('?') || tag.ends_with('/') {
            continue;
        }
        let name = tag.trim_start_matches('/').split_whitespace().next().unwrap().to_string();
        if tag.starts_with('/') {
            assert_eq!(stack.pop().as_deref(), Some(name.as_str()), "mismatched </{name}>");
        } else {
            stack.push(name);
        }
    }
    assert!(stack.is_empty(), "unclosed {stack:?}");
}

#[test]
fn constant_source_methods_coincide() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("const:1", dir.path());
    cfg.n_list = vec![4, 8, 12];
    let rows = run_compare(&cfg).unwrap().rows;
    assert_eq!(rows.len(), 9);
    for n in [4, 8, 12] {
        let at: Vec<_> = rows.iter().filter(|r| r.n == n).collect();
        for r in &at[1..] {
            assert!((r.rel_l2 - at[0].rel_l2).abs() < 1e-9);
            assert!((r.rel_h1 - at[0].rel_h1).abs() < 1e-9);
            assert!((r.renormalized_energy - at[0].renormalized_energy).abs() < 1e-9);
            assert!(r.node_discrepancy_l2 < 1e-9 && r.node_discrepancy_l1 < 1e-9);
        }
    }
}

#[test]
fn square_source_errors_decrease_and_files_are_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("poly:2", dir.path());
    cfg.plot = true;
    let out = run_compare(&cfg).unwrap();
    for m in Method::ALL {
        let l2: Vec<f64> = out.rows.iter().filter(|r| r.method == m).map(|r| r.rel_l2).collect();
        assert_eq!(l2.len(), 4);
        assert!(l2.windows(2).all(|w| w[1] < w[0]), "{m}: {l2:?}");
    }
    assert_eq!(first_line(&out.csv_path), "n,method,rel_l2,rel_h1,energy,disc_l2,disc_l1");
    assert_eq!(fs::read_to_string(&out.csv_path).unwrap().lines().count(), 13);
    let svg = fs::read_to_string(out.svg_path.unwrap()).unwrap();
    assert_balanced_xml(&svg);
    assert_eq!(svg.matches("<polyline").count(), 6);
}

#[test]
fn compare_without_plot_writes_no_svg() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("gauss:0.5,0.1", dir.path());
    cfg.n_list = vec![6];
    let out = run_compare(&cfg).unwrap();
    assert!(out.svg_path.is_none());
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn gamma_check_constant_source() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("const:1", dir.path());
    cfg.plot = true;
    let report = run_gamma_check(&cfg).unwrap();
    for r in &report.rows {
        assert!((r.ratio - 1.0).abs() <= 1e-9, "n={}: {}", r.n, r.ratio);
    }
    assert_eq!(report.verdict, Verdict::Pass);
    assert_eq!(first_line(&report.csv_path), "n,energy_gd,min_limit_energy,ratio");
    let svg = fs::read_to_string(report.svg_path.unwrap()).unwrap();
    assert_balanced_xml(&svg);
    assert_eq!(svg.matches("<polyline").count(), 2);
}

#[test]
fn gamma_check_single_n_is_inconclusive() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = config("poly:2", dir.path());
    cfg.n_list = vec![16];
    assert_eq!(run_gamma_check(&cfg).unwrap().verdict, Verdict::Inconclusive);
    cfg.n_list = vec![16, 8];
    assert!(run_gamma_check(&cfg).is_err());
}

#[test]
fn mesh_dump_examples() {
    let dir = tempfile::tempdir().unwrap();
    let interior = |spec: &str| {
        let mut cfg = config(spec, dir.path());
        cfg.plot = true;
        let d = run_mesh_dump(&cfg, 6).unwrap();
        assert_eq!(first_line(&d.nodes_path), "x,u");
        assert_eq!(first_line(&d.dense_path), "x,u");
        assert_eq!(fs::read_to_string(&d.dense_path).unwrap().lines().count(), 1002);
        let svg = fs::read_to_string(d.svg_path.unwrap()).unwrap();
        assert_balanced_xml(&svg);
        assert_eq!(svg.matches("<polyline").count(), 2);
        d.interpolant.mesh().interior().to_vec()
    };

    let sq = interior("poly:2");
    assert_eq!(sq.len(), 5);
    for (i, x) in sq.iter().enumerate() {
        assert!(*x > (i + 1) as f64 / 6.0);
    }

    let g = interior("gauss:0.5,0.05");
    assert!(g.iter().all(|x| (0.35..0.65).contains(x)), "{g:?}");
    for (l, r) in g.iter().zip(g.iter().rev()) {
        assert!((l + r - 1.0).abs() < 1e-9);
    }

    let c = interior("const:2");
    for (i, x) in c.iter().enumerate() {
        assert!((x - (i + 1) as f64 / 6.0).abs() < 1e-12);
    }
}
