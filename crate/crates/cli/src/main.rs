use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};
use polyflow::run::{
    output_dir, run, Command, CoverParams, EquiParams, FlowParams, GoodParams, RunConfig, RunError,
};

/// Limiting unipotent flows and equidistribution sweeps.
#[derive(Parser, Debug)]
#[command(name = "polyflow", version)]
struct Cli {
    /// Run configuration (TOML); flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (else $POLYFLOW_OUT, $UNIPOTENT_OUT, the config, ./polyflow-out).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Limiting flow of a catalog map.
    Flow(FlowArgs),
    /// Sublevel-set inequality table for a polynomial on a box.
    Good(GoodArgs),
    /// Greedy cube cover of centered cubes.
    Cover(CoverArgs),
    /// Averages over expanding boxes against the limit.
    Equi(EquiArgs),
}

#[derive(Args, Debug)]
struct FlowArgs {
    #[arg(long)]
    map: Option<String>,
    /// Box exponents, e.g. `1,1/2`.
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    trials: Option<usize>,
}

#[derive(Args, Debug)]
struct GoodArgs {
    /// Polynomial in x, y, ...
    #[arg(long)]
    poly: Option<String>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    lower: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    upper: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long)]
    alpha: Option<String>,
    /// Constant C; fitted on the deltas when omitted.
    #[arg(long = "C")]
    c: Option<f64>,
    #[arg(long)]
    grid: Option<usize>,
}

#[derive(Args, Debug)]
struct CoverArgs {
    /// Points separated by `;`, coordinates by `,`.
    #[arg(long, allow_hyphen_values = true)]
    centers: Option<String>,
    #[arg(long, value_delimiter = ',')]
    halfwidths: Option<Vec<f64>>,
    #[arg(long)]
    nk: Option<usize>,
    #[arg(long)]
    probe: Option<usize>,
}

#[derive(Args, Debug)]
struct EquiArgs {
    #[arg(long)]
    map: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    /// Box sizes T (T2 when --b is given).
    #[arg(long = "T", value_delimiter = ',')]
    t: Option<Vec<f64>>,
    /// Observables such as `siegel:indicator:1` or `siegel:bump:2`.
    #[arg(long, value_delimiter = ',')]
    obs: Option<Vec<String>>,
    #[arg(long)]
    grid: Option<usize>,
    /// Monte Carlo sample count instead of a grid.
    #[arg(long)]
    samples: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    eps0: Option<Vec<f64>>,
    /// Subbox of the unit cube as `lower:upper`, e.g. `0.5,0.5:1,1`.
    #[arg(long)]
    subbox: Option<String>,
    /// Two-variable boxes [0, 1.01 T2^b] x [0, T2].
    #[arg(long)]
    b: Option<String>,
    /// haar, periodic or auto.
    #[arg(long)]
    reference: Option<String>,
}

fn parse_points(s: &str) -> Result<Vec<Vec<f64>>, RunError> {
    s.split(';')
        .map(|p| {
            p.split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| RunError::Usage(format!("bad point `{p}`: {e}")))
        })
        .collect()
}

fn required<T>(v: Option<T>, what: &str) -> Result<T, RunError> {
    v.ok_or_else(|| RunError::Usage(format!("--{what} is required")))
}

fn build(cli: Cli) -> Result<RunConfig, RunError> {
    let cmd = cli.cmd.ok_or_else(|| RunError::Usage("no subcommand".into()))?;
    let command = match cmd {
        Cmd::Flow(_) => Command::Flow,
        Cmd::Good(_) => Command::Good,
        Cmd::Cover(_) => Command::Cover,
        Cmd::Equi(_) => Command::Equi,
    };
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
            let cfg = RunConfig::from_toml(&text)?;
            if cfg.command != command {
                return Err(RunError::Usage(format!("config is for `{:?}`", cfg.command).to_lowercase()));
            }
            cfg
        }
        None => RunConfig::new(command),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.workers.is_some() {
        cfg.workers = cli.workers;
    }
    cfg.out = Some(output_dir(cli.out.as_deref(), cfg.out.as_deref()));
    match cmd {
        Cmd::Flow(a) => {
            cfg.map = a.map.or(cfg.map);
            let p = cfg.flow.get_or_insert_with(|| FlowParams {
                lambda: None,
                trials: 16,
            });
            p.lambda = a.lambda.or(p.lambda.take());
            if let Some(t) = a.trials {
                p.trials = t;
            }
        }
        Cmd::Good(a) => {
            let p = match cfg.good.take() {
                Some(mut p) => {
                    p.poly = a.poly.unwrap_or(p.poly);
                    p.lower = a.lower.unwrap_or(p.lower);
                    p.upper = a.upper.unwrap_or(p.upper);
                    p.deltas = a.deltas.unwrap_or(p.deltas);
                    p.alpha = a.alpha.unwrap_or(p.alpha);
                    p.c = a.c.or(p.c);
                    p.grid = a.grid.unwrap_or(p.grid);
                    p
                }
                None => GoodParams {
                    poly: required(a.poly, "poly")?,
                    lower: required(a.lower, "lower")?,
                    upper: required(a.upper, "upper")?,
                    deltas: required(a.deltas, "deltas")?,
                    alpha: required(a.alpha, "alpha")?,
                    c: a.c,
                    grid: a.grid.unwrap_or(1000),
                },
            };
            cfg.good = Some(p);
        }
        Cmd::Cover(a) => {
            let centers = a.centers.as_deref().map(parse_points).transpose()?;
            let p = match cfg.cover.take() {
                Some(mut p) => {
                    p.centers = centers.unwrap_or(p.centers);
                    p.halfwidths = a.halfwidths.unwrap_or(p.halfwidths);
                    p.nk = a.nk.or(p.nk);
                    p.probe = a.probe.unwrap_or(p.probe);
                    p
                }
                None => CoverParams {
                    centers: required(centers, "centers")?,
                    halfwidths: required(a.halfwidths, "halfwidths")?,
                    nk: a.nk,
                    probe: a.probe.unwrap_or(32),
                },
            };
            cfg.cover = Some(p);
        }
        Cmd::Equi(a) => {
            cfg.map = a.map.or(cfg.map);
            let subbox = match a.subbox.as_deref() {
                Some(s) => {
                    let (lo, hi) = s
                        .split_once(':')
                        .ok_or_else(|| RunError::Usage("--subbox takes lower:upper".into()))?;
                    let lo = parse_points(lo)?.remove(0);
                    let hi = parse_points(hi)?.remove(0);
                    Some([lo, hi])
                }
                None => None,
            };
            let p = match cfg.equi.take() {
                Some(mut p) => {
                    p.lambda = a.lambda.or(p.lambda);
                    p.t = a.t.unwrap_or(p.t);
                    p.obs = a.obs.unwrap_or(p.obs);
                    p.grid = a.grid.unwrap_or(p.grid);
                    p.samples = a.samples.or(p.samples);
                    p.eps0 = a.eps0.unwrap_or(p.eps0);
                    p.subbox = subbox.or(p.subbox);
                    p.b = a.b.or(p.b);
                    p.reference = a.reference.unwrap_or(p.reference);
                    p
                }
                None => EquiParams {
                    lambda: a.lambda,
                    t: required(a.t, "T")?,
                    obs: required(a.obs, "obs")?,
                    grid: a.grid.unwrap_or(256),
                    samples: a.samples,
                    eps0: a.eps0.unwrap_or_else(|| vec![0.1, 0.05]),
                    subbox,
                    b: a.b,
                    reference: a.reference.unwrap_or_else(|| "auto".into()),
                },
            };
            cfg.equi = Some(p);
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    if std::env::args_os().len() <= 1 {
        let _ = Cli::command().print_help();
        return ExitCode::from(2);
    }
    let cli = Cli::parse();
    let outcome = build(cli).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(o) => {
            print!("{}", o.summary);
            for f in &o.failures {
                eprintln!("invariant failure: {f}");
            }
            ExitCode::from(o.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("polyflow: {e}");
            if matches!(e, RunError::Usage(_)) {
                eprintln!("run `polyflow --help` for usage");
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
