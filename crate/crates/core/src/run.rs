//! Run configurations and the artifacts they produce.
//!
//! A run resolves its configuration (catalog defaults filled in, execution
//! knobs such as the worker count and output directory dropped), hashes the
//! resolved text, and stamps every output with the seed and that hash.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::catalog::{parse_exponent, parse_exponents, Catalog, CatalogError};
use crate::experiment::{convergence_sweep, twodim_bcondition_sweep, Reference, Sampling, SweepOptions};
use crate::flowlimit::{compute_flow, group_law_check, normalize_for_map, twodim_flow};
use crate::goodness::{besicovitch_select_with, default_nk, fit_min_c, sup_norm, BoxRegion, SublevelSampler};
use crate::homspace::TestFunction;
use crate::polyalg::{DensePoly, Var};
use crate::{GenPoly, PolyMatrix};

/// Environment variables naming the output directory, in priority order.
pub const OUT_ENV: [&str; 2] = ["POLYFLOW_OUT", "UNIPOTENT_OUT"];
pub const DEFAULT_OUT: &str = "polyflow-out";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Flow,
    Good,
    Cover,
    Equi,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowParams {
    /// Comma-separated box exponents; the catalog value when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(default = "default_trials")]
    pub trials: usize,
}

fn default_trials() -> usize {
    16
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodParams {
    pub poly: String,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub deltas: Vec<f64>,
    pub alpha: String,
    /// Fitted on `deltas` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default = "default_good_grid")]
    pub grid: usize,
}

fn default_good_grid() -> usize {
    1000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverParams {
    pub centers: Vec<Vec<f64>>,
    pub halfwidths: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nk: Option<usize>,
    #[serde(default = "default_probe")]
    pub probe: usize,
}

fn default_probe() -> usize {
    32
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquiParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    /// `T` values, or `T2` values when `b` is set.
    #[serde(rename = "T")]
    pub t: Vec<f64>,
    pub obs: Vec<String>,
    #[serde(default = "default_equi_grid")]
    pub grid: usize,
    /// Monte Carlo sample count; grid sampling when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default = "default_eps0")]
    pub eps0: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subbox: Option<[Vec<f64>; 2]>,
    /// Two-variable boxes `[0, 1.01 T2^b] x [0, T2]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<String>,
    /// `haar`, `periodic`, or `auto` (periodic for closed-orbit maps).
    #[serde(default = "default_reference")]
    pub reference: String,
}

fn default_equi_grid() -> usize {
    256
}

fn default_eps0() -> Vec<f64> {
    vec![0.1, 0.05]
}

fn default_reference() -> String {
    "auto".into()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    #[serde(default)]
    pub seed: u64,
    /// Thread count (`0` = all cores). Not part of the resolved config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Not part of the resolved config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub good: Option<GoodParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cover: Option<CoverParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub equi: Option<EquiParams>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            map: None,
            seed: 0,
            workers: None,
            out: None,
            flow: None,
            good: None,
            cover: None,
            equi: None,
        }
    }

    pub fn from_toml(s: &str) -> Result<Self, RunError> {
        toml::from_str(s).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("malformed config: {0}")]
    Config(String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error("{0}")]
    Compute(String),
    #[error("writing {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) | RunError::Config(_) => 2,
            RunError::Catalog(_) => 3,
            RunError::Compute(_) | RunError::Io { .. } => 1,
        }
    }
}

fn compute<E: std::fmt::Display>(e: E) -> RunError {
    RunError::Compute(e.to_string())
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    /// Invariant failures; empty means exit status 0.
    pub failures: Vec<String>,
    pub summary: String,
    pub files: Vec<PathBuf>,
    pub config_hash: String,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        i32::from(!self.failures.is_empty())
    }
}

/// `--out`, then the environment, then the config, then the default.
pub fn output_dir(flag: Option<&Path>, config: Option<&Path>) -> PathBuf {
    if let Some(p) = flag {
        return p.to_path_buf();
    }
    for var in OUT_ENV {
        if let Some(v) = std::env::var_os(var).filter(|v| !v.is_empty()) {
            return PathBuf::from(v);
        }
    }
    config.map_or_else(|| PathBuf::from(DEFAULT_OUT), Path::to_path_buf)
}

struct Artifacts {
    dir: PathBuf,
    stamp: String,
    files: Vec<PathBuf>,
}

impl Artifacts {
    fn write(&mut self, name: &str, body: &str) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, body).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        self.files.push(path);
        Ok(())
    }

    /// Appends `seed` and `config_sha256` columns to a table.
    fn write_table(&mut self, name: &str, csv: &str) -> Result<(), RunError> {
        let mut out = String::new();
        for (i, line) in csv.lines().enumerate() {
            if i == 0 {
                let _ = writeln!(out, "{line},run_seed,config_sha256");
            } else {
                let _ = writeln!(out, "{line},{}", self.stamp);
            }
        }
        self.write(name, &out)
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// Runs `config`, writing artifacts under `config.out`, else the directory
/// named by the environment, else [`DEFAULT_OUT`].
pub fn run(config: &RunConfig) -> Result<RunOutcome, RunError> {
    let catalog = Catalog::builtin();
    let resolved = resolve(config, &catalog)?;
    let text = resolved.to_toml();
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    let dir = output_dir(config.out.as_deref(), None);
    fs::create_dir_all(&dir).map_err(|source| RunError::Io {
        path: dir.clone(),
        source,
    })?;
    let mut art = Artifacts {
        dir,
        stamp: format!("{},{hash}", resolved.seed),
        files: Vec::new(),
    };
    art.write("config.toml", &text)?;
    art.write("config.sha256", &format!("{hash}\n"))?;
    let workers = config.workers.unwrap_or(0);
    let (summary, failures) = match resolved.command {
        Command::Flow => run_flow(&resolved, &catalog, &mut art)?,
        Command::Good => run_good(&resolved, &mut art)?,
        Command::Cover => run_cover(&resolved, &mut art)?,
        Command::Equi => run_equi(&resolved, &catalog, workers, &mut art)?,
    };
    Ok(RunOutcome {
        failures,
        summary,
        files: art.files,
        config_hash: hash,
    })
}

/// Fills in catalog defaults and drops execution-only fields.
pub fn resolve(config: &RunConfig, catalog: &Catalog) -> Result<RunConfig, RunError> {
    let mut r = config.clone();
    r.workers = None;
    r.out = None;
    let need_map = matches!(r.command, Command::Flow | Command::Equi);
    let map = match (&r.map, need_map) {
        (Some(name), _) => Some(catalog.get(name)?),
        (None, true) => return Err(RunError::Usage("--map is required".into())),
        (None, false) => None,
    };
    let catalog_lambda = || {
        map.map(|m| m.lambda.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(","))
    };
    match r.command {
        Command::Flow => {
            let p = r.flow.get_or_insert_with(|| FlowParams {
                lambda: None,
                trials: default_trials(),
            });
            if p.lambda.is_none() {
                p.lambda = catalog_lambda();
            }
        }
        Command::Equi => {
            let p = r
                .equi
                .as_mut()
                .ok_or_else(|| RunError::Usage("equi needs T values and observables".into()))?;
            if p.lambda.is_none() && p.b.is_none() {
                p.lambda = catalog_lambda();
            }
        }
        Command::Good if r.good.is_none() => return Err(RunError::Usage("good needs a polynomial and a box".into())),
        Command::Cover if r.cover.is_none() => return Err(RunError::Usage("cover needs centers and half-widths".into())),
        _ => {}
    }
    Ok(r)
}

fn run_flow(cfg: &RunConfig, catalog: &Catalog, art: &mut Artifacts) -> Result<(String, Vec<String>), RunError> {
    let map = catalog.get(cfg.map.as_deref().expect("resolved"))?;
    let p = cfg.flow.as_ref().expect("resolved");
    let lambda = parse_exponents(p.lambda.as_deref().expect("resolved")).map_err(|e| RunError::Config(e.to_string()))?;
    if lambda.len() != map.vars() {
        return Err(RunError::Config(format!(
            "{} has {} variables but {} exponents were given",
            map.name(),
            map.vars(),
            lambda.len()
        )));
    }
    let (c, scaled, theta) = normalize_for_map(&map.matrix, &lambda).map_err(compute)?;
    let result = compute_flow(&theta).map_err(compute)?;
    let report = group_law_check(&result, p.trials);
    let mut out = String::new();
    let _ = writeln!(out, "map = {}", map.name());
    let _ = writeln!(out, "seed = {}", cfg.seed);
    let _ = writeln!(out, "lambda = {}", join(&lambda));
    let _ = writeln!(out, "c = {c}");
    let _ = writeln!(out, "lambda_scaled = {}", join(&scaled));
    let _ = writeln!(out, "theta = {theta}");
    let _ = writeln!(out, "q = {}", result.q);
    let _ = writeln!(out, "d = {}", result.d);
    let _ = writeln!(out, "Y = {}", result.generator);
    let _ = writeln!(out, "rho = {}", crate::flowlimit::flow_of(&result, Var::s()));
    for (i, m) in result.limits.iter().enumerate() {
        let _ = writeln!(out, "M_{} = {m}", i + 1);
    }
    for st in &result.stages {
        let _ = writeln!(out, "stage d={} q={} test_degree={}", st.d, st.q, st.test_degree);
    }
    let _ = writeln!(
        out,
        "group_law = {} (symbolic {}, Y = M_1 {}, nilpotent {}, max exp deviation {})",
        if report.passed() { "pass" } else { "FAIL" },
        report.symbolic,
        report.generator_is_m1,
        report.generator_nilpotent,
        num(report.max_exp_deviation)
    );
    if map.vars() == 2 {
        match twodim_flow(&map.matrix) {
            Ok(t) => {
                let _ = writeln!(out, "twodim.q = {}", t.q);
                let _ = writeln!(out, "twodim.d0 = {}", t.d0);
                let _ = writeln!(out, "twodim.lambda = {}", t.lambda_of_y);
                let _ = writeln!(out, "twodim.d = {}", t.d);
                let _ = writeln!(out, "twodim.lambda0 = {}", PolyMatrix::from_constant(&t.lambda0));
                let _ = writeln!(out, "twodim.rho = {}", t.rho);
                let _ = writeln!(out, "twodim.p = {}", t.p);
                let _ = writeln!(out, "twodim.b = {}", t.b);
                let pairs: Vec<String> = t.ratio_set_a.iter().map(|(a, b)| format!("({a}, {b})")).collect();
                let _ = writeln!(out, "twodim.A = {{{}}}", pairs.join(", "));
            }
            Err(e) => {
                let _ = writeln!(out, "twodim = {e}");
            }
        }
    }
    let _ = writeln!(out, "config_sha256 = {}", art.stamp.split(',').nth(1).unwrap_or_default());
    art.write("flow.txt", &out)?;
    let failures = if report.passed() {
        Vec::new()
    } else {
        report.failures.clone()
    };
    Ok((out, failures))
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

fn run_good(cfg: &RunConfig, art: &mut Artifacts) -> Result<(String, Vec<String>), RunError> {
    let p = cfg.good.as_ref().expect("resolved");
    let poly: GenPoly = p.poly.parse().map_err(|e: crate::polyalg::PolyError| RunError::Config(e.to_string()))?;
    let b = BoxRegion::new(p.lower.clone(), p.upper.clone()).map_err(|e| RunError::Config(e.to_string()))?;
    let vars: Vec<Var> = (0..b.dim() as u8).map(Var::X).collect();
    let f = DensePoly::new(&poly, &vars).map_err(|e| RunError::Config(e.to_string()))?;
    let eval = |x: &[f64]| f.eval(x);
    let alpha = parse_exponent(&p.alpha).map_err(|e| RunError::Config(e.to_string()))?;
    let alpha = *alpha.numer() as f64 / *alpha.denom() as f64;
    if p.deltas.is_empty() || p.deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(RunError::Config("deltas must be positive and nonempty".into()));
    }
    let s = SublevelSampler::new(&eval, &b, p.grid).map_err(compute)?;
    let c = match p.c {
        Some(c) if c >= 1.0 => c,
        Some(c) => return Err(RunError::Config(format!("C = {c} is below 1"))),
        None => fit_min_c(&eval, &b, alpha, &p.deltas, p.grid).map_err(compute)?.max(1.0),
    };
    let mut csv = String::from("delta,lhs,rhs,slack,holds\n");
    let mut failures = Vec::new();
    for &d in &p.deltas {
        let chk = s.check(d, c, alpha);
        if !chk.holds {
            failures.push(format!("inequality fails at delta = {d}: {} > {} + {}", chk.lhs, chk.rhs, chk.slack));
        }
        let _ = writeln!(csv, "{},{},{},{},{}", num(d), num(chk.lhs), num(chk.rhs), num(chk.slack), chk.holds);
    }
    art.write_table("good.csv", &csv)?;
    let summary = format!(
        "f = {poly}\nsup|f| = {}\nC = {}\nalpha = {}\n{csv}",
        num(sup_norm(&eval, &b, p.grid + 1)),
        num(c),
        p.alpha
    );
    Ok((summary, failures))
}

fn run_cover(cfg: &RunConfig, art: &mut Artifacts) -> Result<(String, Vec<String>), RunError> {
    let p = cfg.cover.as_ref().expect("resolved");
    let k = p.centers.first().map_or(0, Vec::len);
    let nk = p.nk.unwrap_or_else(|| default_nk(k));
    let cover = besicovitch_select_with(&p.centers, &p.halfwidths, nk, p.probe).map_err(|e| RunError::Config(e.to_string()))?;
    let mut csv = String::from("index");
    for a in 0..k {
        let _ = write!(csv, ",center{a}");
    }
    csv.push_str(",half_width\n");
    for c in &cover.cubes {
        let _ = write!(csv, "{}", c.index);
        for x in &c.center {
            let _ = write!(csv, ",{}", num(*x));
        }
        let _ = writeln!(csv, ",{}", num(c.half_width));
    }
    art.write_table("cover.csv", &csv)?;
    let mut hist = String::from("multiplicity,probe_points\n");
    for (m, n) in cover.histogram.iter().enumerate() {
        let _ = writeln!(hist, "{m},{n}");
    }
    art.write_table("cover_histogram.csv", &hist)?;
    let mut failures = Vec::new();
    if !cover.covered {
        failures.push("some center is not covered".into());
    }
    if !cover.within_bound() {
        failures.push(format!("multiplicity {} exceeds N_k = {nk}", cover.multiplicity));
    }
    let summary = format!(
        "selected {} of {} cubes\ncovered = {}\nmultiplicity = {} (N_k = {nk})\n",
        cover.cubes.len(),
        p.centers.len(),
        cover.covered,
        cover.multiplicity
    );
    Ok((summary, failures))
}

fn run_equi(cfg: &RunConfig, catalog: &Catalog, workers: usize, art: &mut Artifacts) -> Result<(String, Vec<String>), RunError> {
    let map = catalog.get(cfg.map.as_deref().expect("resolved"))?;
    let p = cfg.equi.as_ref().expect("resolved");
    let fs = p
        .obs
        .iter()
        .map(|o| o.parse::<TestFunction>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| RunError::Config(e.to_string()))?;
    if fs.is_empty() {
        return Err(RunError::Config("no observables".into()));
    }
    let reference = match p.reference.as_str() {
        "auto" => Reference::for_map(map),
        "haar" => Reference::Haar,
        "periodic" => match Reference::for_map(map) {
            Reference::Haar => return Err(RunError::Config(format!("{} has no closed orbit", map.name()))),
            r => r,
        },
        other => return Err(RunError::Config(format!("unknown reference `{other}`"))),
    };
    let sampling = match p.samples {
        Some(samples) => Sampling::MonteCarlo {
            samples,
            seed: cfg.seed,
        },
        None => Sampling::Grid { per_axis: p.grid },
    };
    let opts = SweepOptions {
        sampling,
        eps0: p.eps0.clone(),
        workers,
        seed: cfg.seed,
    };
    let result = if let Some(b) = &p.b {
        let b = parse_exponent(b).map_err(|e| RunError::Config(e.to_string()))?;
        if map.vars() != 2 {
            return Err(RunError::Config(format!("{} is not a two-variable map", map.name())));
        }
        twodim_bcondition_sweep(&map.matrix, b, &p.t, &fs, &reference, &opts).map_err(compute)?
    } else {
        let lambda = parse_exponents(p.lambda.as_deref().expect("resolved")).map_err(|e| RunError::Config(e.to_string()))?;
        if lambda.len() != map.vars() {
            return Err(RunError::Config(format!("{} needs {} exponents", map.name(), map.vars())));
        }
        let j = match &p.subbox {
            Some([lo, hi]) => BoxRegion::new(lo.clone(), hi.clone()).map_err(|e| RunError::Config(e.to_string()))?,
            None => BoxRegion::unit(map.vars()),
        };
        convergence_sweep(&map.matrix, &lambda, &p.t, &fs, &j, &reference, &opts).map_err(compute)?
    };
    art.write_table("equi.csv", &result.to_csv())?;
    art.write_table("equi_plot.csv", &result.plot_csv())?;
    if !result.diagnostics.is_empty() {
        art.write_table("equi_diagnostics.csv", &result.diagnostics_csv())?;
    }
    let mut failures = Vec::new();
    let mut order: Vec<usize> = (0..p.eps0.len()).collect();
    order.sort_by(|&a, &b| p.eps0[a].total_cmp(&p.eps0[b]));
    for r in &result.rows {
        if !r.average.is_finite() {
            failures.push(format!("non-finite average at T = {}", r.t));
        }
        if r.fractions.iter().any(|f| !(0.0..=1.0).contains(f)) {
            failures.push(format!("fraction outside [0, 1] at T = {}", r.t));
        }
        // Smaller eps0 never lowers the fraction.
        if order.windows(2).any(|w| r.fractions[w[0]] < r.fractions[w[1]]) {
            failures.push(format!("nondivergence fractions not monotone at T = {}", r.t));
        }
    }
    Ok((result.to_csv(), failures))
}
