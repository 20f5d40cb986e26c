use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use polyflow::run::*;
use sha2::{Digest, Sha256};

fn equi_config() -> RunConfig {
    let mut c = RunConfig::new(Command::Equi);
    c.map = Some("ul_product".into());
    c.seed = 5;
    c.equi = Some(EquiParams {
        lambda: Some("1,1/2".into()),
        t: vec![10.0, 100.0],
        obs: vec!["siegel:indicator:1".into(), "siegel:bump:1.5".into()],
        grid: 64,
        samples: None,
        eps0: vec![0.1, 0.05],
        subbox: None,
        b: None,
        reference: "auto".into(),
    });
    c
}

fn good_config(poly: &str, alpha: &str, c: Option<f64>) -> RunConfig {
    let mut cfg = RunConfig::new(Command::Good);
    cfg.good = Some(GoodParams {
        poly: poly.into(),
        lower: vec![0.0],
        upper: vec![1.0],
        deltas: vec![0.01, 0.1],
        alpha: alpha.into(),
        c,
        grid: 1000,
    });
    cfg
}

fn run_in(cfg: &RunConfig, dir: &Path) -> RunOutcome {
    let mut cfg = cfg.clone();
    cfg.out = Some(dir.to_path_buf());
    run(&cfg).unwrap()
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

#[test]
fn config_round_trips() {
    let mut flow = RunConfig::new(Command::Flow);
    flow.map = Some("heis52".into());
    flow.workers = Some(3);
    flow.out = Some("somewhere".into());
    flow.flow = Some(FlowParams {
        lambda: Some("5/2".into()),
        trials: 4,
    });
    let mut cover = RunConfig::new(Command::Cover);
    cover.cover = Some(CoverParams {
        centers: vec![vec![0.0, 1.0], vec![0.5, -0.25]],
        halfwidths: vec![1.0, 0.125],
        nk: Some(5),
        probe: 8,
    });
    let mut equi = equi_config();
    if let Some(e) = equi.equi.as_mut() {
        e.subbox = Some([vec![0.5, 0.5], vec![1.0, 1.0]]);
        e.samples = Some(1000);
        e.t = vec![0.1, 1.0 / 3.0, 1e300];
    }
    for cfg in [flow, good_config("x*(1 - x)", "1/2", Some(2.5)), cover, equi] {
        let text = cfg.to_toml();
        assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg, "{text}");
    }
}

#[test]
fn malformed_configs_are_usage_errors() {
    for text in ["command = \"dance\"", "command = \"flow\"\nbogus = 1", "not toml at all ="] {
        let err = RunConfig::from_toml(text).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{text}");
    }
}

#[test]
fn flow_prints_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(Command::Flow);
    cfg.map = Some("heis52".into());
    cfg.flow = Some(FlowParams {
        lambda: Some("5/2".into()),
        trials: 8,
    });
    let out = run_in(&cfg, dir.path());
    assert_eq!(out.exit_code(), 0);
    assert!(out.summary.contains("q = 3/2"));
    assert!(out.summary.contains("d = 2"));
    assert!(out.summary.contains("rho = [[1, 5/2 * a1 * s], [0, 1]]"));
    assert!(dir.path().join("flow.txt").exists());
}

#[test]
fn catalog_defaults_fill_lambda() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(Command::Flow);
    cfg.map = Some("heis3".into());
    let out = run_in(&cfg, dir.path());
    assert_eq!(out.exit_code(), 0);
    let resolved = RunConfig::from_toml(&fs::read_to_string(dir.path().join("config.toml")).unwrap()).unwrap();
    assert_eq!(resolved.flow.unwrap().lambda.as_deref(), Some("5/2"));
    assert_eq!(resolved.out, None);
}

#[test]
fn error_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(Command::Flow);
    cfg.map = Some("no_such_map".into());
    cfg.out = Some(dir.path().to_path_buf());
    assert_eq!(run(&cfg).unwrap_err().exit_code(), 3);

    cfg.map = None;
    assert_eq!(run(&cfg).unwrap_err().exit_code(), 2);

    let mut equi = RunConfig::new(Command::Equi);
    equi.map = Some("heis52".into());
    equi.out = Some(dir.path().to_path_buf());
    assert_eq!(run(&equi).unwrap_err().exit_code(), 2);
}

#[test]
fn good_reports_invariant_failures() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run_in(&good_config("x^2", "1/2", Some(1.0)), dir.path());
    assert_eq!(ok.exit_code(), 0);
    let fitted = run_in(&good_config("x*(1 - x)", "1/2", None), dir.path());
    assert_eq!(fitted.exit_code(), 0);
    // x^2 is not (1, 1)-good
    let bad = run_in(&good_config("x^2", "1", Some(1.0)), dir.path());
    assert_eq!(bad.exit_code(), 1);
    assert!(!bad.failures.is_empty());
}

#[test]
fn cover_writes_tables() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = RunConfig::new(Command::Cover);
    cfg.cover = Some(CoverParams {
        centers: (0..=10).map(|i| vec![f64::from(i)]).collect(),
        halfwidths: vec![1.0; 11],
        nk: None,
        probe: 32,
    });
    let out = run_in(&cfg, dir.path());
    assert_eq!(out.exit_code(), 0, "{:?}", out.failures);
    let files = read_dir(dir.path());
    assert!(files.contains_key("cover.csv") && files.contains_key("cover_histogram.csv"));
}

#[test]
fn artifacts_carry_seed_and_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_in(&equi_config(), dir.path());
    assert_eq!(out.exit_code(), 0, "{:?}", out.failures);
    let config = fs::read(dir.path().join("config.toml")).unwrap();
    assert_eq!(hex::encode(Sha256::digest(&config)), out.config_hash);
    let recorded = fs::read_to_string(dir.path().join("config.sha256")).unwrap();
    assert_eq!(recorded.trim(), out.config_hash);
    let table = fs::read_to_string(dir.path().join("equi.csv")).unwrap();
    let mut lines = table.lines();
    assert!(lines.next().unwrap().ends_with(",run_seed,config_sha256"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    for r in rows {
        assert!(r.ends_with(&format!(",5,{}", out.config_hash)));
    }
}

#[test]
fn artifacts_are_byte_identical_across_workers() {
    let mut mc = equi_config();
    if let Some(e) = mc.equi.as_mut() {
        e.samples = Some(3000);
    }
    for cfg in [equi_config(), mc] {
        let mut seen = Vec::new();
        for workers in [1, 2, 8, 2] {
            let dir = tempfile::tempdir().unwrap();
            let mut c = cfg.clone();
            c.workers = Some(workers);
            run_in(&c, dir.path());
            seen.push(read_dir(dir.path()));
        }
        assert!(seen.windows(2).all(|w| w[0] == w[1]));
    }
}

#[test]
fn explicit_output_dir_wins() {
    let a = Path::new("/tmp/a");
    let b = Path::new("/tmp/b");
    assert_eq!(output_dir(Some(a), Some(b)), a);
}
