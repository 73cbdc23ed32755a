use std::fs::File;
use std::io::Write;
use std::path::PathBuf;

use entperc::entanglement::{cep1_density, cep2_density, distill_probability, scp_pure, swap_probability, Probability};
use entperc::lattice::{build, Boundary, Graph, LatticeKind};
use entperc::percolation::{
    estimate_crossing, estimate_pc, omega, omega_fixed, pi, pi_fixed, theta, CrossingConfig, Estimate,
};
use entperc::protocols::{
    asym_phase_diagram, bowtie_split, default_grid, dhex_three_way, kagome_vs_square, square_doubling,
    CrossoverConfig, PhaseConfig, BOWTIE_BRACKET, DHEX_BRACKET, GRID_POINTS,
};
use entperc::report::{to_csv_string, Provenance, Row};
use entperc::series::{published_theta, theta_series};

use crate::config::{FileConfig, List, Node, Nodes};
use crate::error::CliError;
use crate::{Cli, Command, CompareArgs, Comparison, Sampling, ScpArgs};

pub const DEFAULT_SEED: u64 = 1;
pub const THREADS_ENV: &str = "ENTPERC_THREADS";

struct Ctx {
    file: FileConfig,
    seed: u64,
    timestamp: bool,
}

impl Ctx {
    fn comments(&self, command: &str, params: &[(&str, String)]) -> Vec<String> {
        let mut c = vec![
            format!("entperc {}", env!("CARGO_PKG_VERSION")),
            format!("command={command}"),
            format!("seed={}", self.seed),
        ];
        c.extend(params.iter().map(|(k, v)| format!("{k}={v}")));
        if self.timestamp {
            let now = chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true);
            c.push(format!("generated={now}"));
        }
        c
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn require<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| config_err(format!("--{flag} is required")))
}

fn check_density(name: &str, p: f64) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(config_err(format!("--{name} must lie in [0, 1], got {p}")))
    }
}

fn check_positive(name: &str, v: usize) -> Result<usize, CliError> {
    if v > 0 {
        Ok(v)
    } else {
        Err(config_err(format!("--{name} must be positive")))
    }
}

fn env_threads() -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| config_err(format!("{THREADS_ENV}: expected a thread count, got `{s}`"))),
        _ => Ok(None),
    }
}

/// Destination opened before any work, so a bad path fails fast.
struct Sink {
    file: Option<(PathBuf, File)>,
}

impl Sink {
    fn open(path: Option<PathBuf>) -> Result<Self, CliError> {
        let file = match path {
            Some(p) => {
                let f = File::create(&p).map_err(|e| config_err(format!("cannot write {}: {e}", p.display())))?;
                Some((p, f))
            }
            None => None,
        };
        Ok(Sink { file })
    }

    fn finish(self, result: Result<String, CliError>) -> Result<(), CliError> {
        match (self.file, result) {
            (Some((_, mut f)), Ok(text)) => Ok(f.write_all(text.as_bytes())?),
            (None, Ok(text)) => Ok(std::io::stdout().lock().write_all(text.as_bytes())?),
            (Some((p, f)), Err(e)) => {
                drop(f);
                let _ = std::fs::remove_file(p);
                Err(e)
            }
            (None, Err(e)) => Err(e),
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let file = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let threads = match file.pick(cli.threads, "threads")? {
        Some(t) => Some(t),
        None => env_threads()?,
    };
    if let Some(t) = threads {
        check_positive("threads", t)?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| config_err(e.to_string()))?;
    }
    let ctx = Ctx {
        seed: file.pick(cli.seed, "seed")?.unwrap_or(DEFAULT_SEED),
        timestamp: !file.switch(cli.no_timestamp, "no-timestamp")?,
        file,
    };
    let sink = Sink::open(ctx.file.pick(cli.out, "out")?)?;
    let result = match cli.command {
        Command::Theta(s) => sampled(&ctx, "theta", &s, |g, n, seed, _| Ok(theta(g, n, seed)?)),
        Command::Pi { sampling, nodes } => pi_command(&ctx, &sampling, nodes),
        Command::Omega { sampling, a, a_prime } => omega_command(&ctx, &sampling, a, a_prime),
        Command::Pc {
            lattice,
            p2,
            l,
            n,
            tolerance,
        } => pc_command(&ctx, lattice, p2, l, n, tolerance),
        Command::Series {
            lattice,
            order,
            published,
        } => series_command(&ctx, lattice, order, published),
        Command::Compare { which } => compare_command(&ctx, which),
        Command::PhaseDiagram {
            resolution,
            l,
            n,
            tolerance,
        } => phase_command(&ctx, resolution, l, n, tolerance),
        Command::Scp(args) => scp_command(&ctx, &args),
    };
    sink.finish(result)
}

struct SamplingRun {
    kind: LatticeKind,
    ps: Vec<f64>,
    p2: Option<f64>,
    l: usize,
    n: usize,
    boundary: Boundary,
    translations: bool,
}

impl SamplingRun {
    fn resolve(ctx: &Ctx, s: &Sampling) -> Result<Self, CliError> {
        let f = &ctx.file;
        let kind: LatticeKind = require(f.pick(s.lattice, "lattice")?, "lattice")?;
        let List(ps) = require(f.pick(s.p.clone(), "p")?, "p")?;
        for &p in &ps {
            check_density("p", p)?;
        }
        let p2 = f.pick(s.p2, "p2")?.map(|x| check_density("p2", x)).transpose()?;
        match (kind.class_count(), p2) {
            (1, Some(_)) => return Err(config_err(format!("--p2 does not apply to {kind} lattices"))),
            (2, None) => return Err(config_err(format!("{kind} lattices need --p2"))),
            _ => {}
        }
        Ok(SamplingRun {
            kind,
            ps,
            p2,
            l: check_positive("L", f.pick(s.l, "L")?.unwrap_or(64))?,
            n: check_positive("n", f.pick(s.n, "n")?.unwrap_or(1000))?,
            boundary: f.pick(s.boundary, "boundary")?.unwrap_or_default(),
            translations: !f.switch(s.no_translations, "no-translations")?,
        })
    }

    fn graph(&self, p: f64) -> Result<Graph, CliError> {
        let probs: Vec<f64> = [Some(p), self.p2].into_iter().flatten().collect();
        Ok(build(self.kind, self.l, self.boundary, &probs)?)
    }

    fn params(&self) -> Vec<(&'static str, String)> {
        let mut v = vec![
            ("lattice", self.kind.name().to_string()),
            ("L", self.l.to_string()),
            ("nsamples", self.n.to_string()),
            ("boundary", self.boundary.to_string()),
            ("translations", self.translations.to_string()),
        ];
        if let Some(p2) = self.p2 {
            v.push(("p2", p2.to_string()));
        }
        v
    }
}

fn sampled<F>(ctx: &Ctx, quantity: &str, s: &Sampling, mut estimate: F) -> Result<String, CliError>
where
    F: FnMut(&Graph, usize, u64, bool) -> Result<Estimate, CliError>,
{
    let run = SamplingRun::resolve(ctx, s)?;
    let mut rows = Vec::with_capacity(run.ps.len());
    for &p in &run.ps {
        let g = run.graph(p)?;
        let est = estimate(&g, run.n, ctx.seed, run.translations)?;
        let mut row = Row::from_estimate(quantity, run.kind.name(), p, &est);
        row.p2 = run.p2;
        if run.boundary == Boundary::Open {
            row.flag("open_boundary");
        }
        rows.push(row);
    }
    Ok(to_csv_string(&ctx.comments(quantity, &run.params()), &rows))
}

fn pi_command(ctx: &Ctx, s: &Sampling, nodes: Option<Nodes>) -> Result<String, CliError> {
    let Nodes(nodes) = require(ctx.file.pick(nodes, "nodes")?, "nodes")?;
    sampled(ctx, "pi", s, |g, n, seed, translate| {
        let e = if translate { pi(g, &nodes, n, seed) } else { pi_fixed(g, &nodes, n, seed) };
        Ok(e?)
    })
}

fn omega_command(ctx: &Ctx, s: &Sampling, a: Option<Node>, a_prime: Option<Node>) -> Result<String, CliError> {
    let Node(a) = require(ctx.file.pick(a, "a")?, "a")?;
    let Node(a1) = require(ctx.file.pick(a_prime, "a-prime")?, "a-prime")?;
    sampled(ctx, "omega", s, |g, n, seed, translate| {
        let e = if translate { omega(g, a, a1, n, seed) } else { omega_fixed(g, a, a1, n, seed) };
        Ok(e?)
    })
}

fn pc_command(
    ctx: &Ctx,
    lattice: Option<LatticeKind>,
    p2: Option<f64>,
    l: Option<usize>,
    n: Option<usize>,
    tolerance: Option<f64>,
) -> Result<String, CliError> {
    let f = &ctx.file;
    let kind: LatticeKind = require(f.pick(lattice, "lattice")?, "lattice")?;
    let base = CrossingConfig::default();
    let cfg = CrossingConfig {
        l: check_positive("L", f.pick(l, "L")?.unwrap_or(base.l))?,
        nsamples: check_positive("n", f.pick(n, "n")?.unwrap_or(base.nsamples))?,
        tolerance: f.pick(tolerance, "tolerance")?.unwrap_or(base.tolerance),
        ..base
    };
    if !(cfg.tolerance > 0.0) {
        return Err(config_err("--tolerance must be positive"));
    }
    let p2 = f.pick(p2, "p2")?.map(|x| check_density("p2", x)).transpose()?;
    let est = match (kind.class_count(), p2) {
        (1, None) => estimate_pc(kind, &cfg, ctx.seed)?,
        (2, Some(p2)) => estimate_crossing(|x, l| Ok(build(kind, l, Boundary::Open, &[x, p2])?), &cfg, ctx.seed)?,
        (1, Some(_)) => return Err(config_err(format!("--p2 does not apply to {kind} lattices"))),
        _ => return Err(config_err(format!("{kind} lattices need --p2"))),
    };
    let mut row = Row::new("pc", kind.name(), est.value, est.value, Provenance::MonteCarlo, ctx.seed);
    row.p2 = p2;
    row.l = Some(est.l);
    row.nsamples = Some(est.nsamples);
    row.stderr = Some(est.half_width);
    row.flag("spanning_crossing");
    let params = [
        ("lattice", kind.name().to_string()),
        ("L", format!("{},{}", cfg.l, 2 * cfg.l)),
        ("nsamples", cfg.nsamples.to_string()),
        ("tolerance", cfg.tolerance.to_string()),
    ];
    Ok(to_csv_string(&ctx.comments("pc", &params), &[row]))
}

fn series_command(
    ctx: &Ctx,
    lattice: Option<LatticeKind>,
    order: Option<usize>,
    published: bool,
) -> Result<String, CliError> {
    let f = &ctx.file;
    let kind: LatticeKind = require(f.pick(lattice, "lattice")?, "lattice")?;
    let order = f.pick(order, "order")?;
    let poly = if f.switch(published, "published")? {
        let row = published_theta(kind).ok_or_else(|| config_err(format!("no published series for {kind}")))?;
        match order {
            Some(k) if k > row.order() => {
                return Err(config_err(format!("the published {kind} row stops at order {}", row.order())))
            }
            Some(k) => row.truncate(k),
            None => row,
        }
    } else {
        theta_series(kind, order.unwrap_or(6))?
    };
    Ok(format!("{poly}\n"))
}

fn compare_command(ctx: &Ctx, which: Comparison) -> Result<String, CliError> {
    let (name, args, l0, n0) = match &which {
        Comparison::Kagome(a) => ("kagome", a, 128, 1000),
        Comparison::Dhex(a) => ("dhex", a, 192, 400),
        Comparison::Doubling(a) => ("doubling", a, 128, 1000),
        Comparison::Bowtie(a) => ("bowtie", a, 128, 1000),
    };
    let CompareArgs {
        grid,
        l,
        n,
        crossover,
        crossover_n,
    } = args;
    let f = &ctx.file;
    let grid = match f.pick(grid.clone(), "grid")? {
        Some(List(g)) => g,
        None => match which {
            Comparison::Kagome(_) => default_grid(0.53, 1.0, &[0.5244], GRID_POINTS),
            Comparison::Dhex(_) => default_grid(0.36, 1.0, &[0.3473, 0.3585, 0.375, 0.4107], GRID_POINTS),
            Comparison::Doubling(_) => default_grid(0.52, 1.0, &[0.5], GRID_POINTS),
            Comparison::Bowtie(_) => default_grid(0.36, 1.0, &[0.3473, 0.4045, 0.425], GRID_POINTS),
        },
    };
    let l = check_positive("L", f.pick(*l, "L")?.unwrap_or(l0))?;
    let n = check_positive("n", f.pick(*n, "n")?.unwrap_or(n0))?;
    let crossover = if f.switch(*crossover, "crossover")? {
        let base = CrossoverConfig::default();
        let cap = f.pick(*crossover_n, "crossover-n")?.unwrap_or(base.max_nsamples);
        if cap < base.nsamples {
            return Err(config_err(format!("--crossover-n must be at least {}", base.nsamples)));
        }
        Some(CrossoverConfig {
            max_nsamples: cap,
            ..base
        })
    } else {
        None
    };
    let seed = ctx.seed;
    let table = match which {
        Comparison::Kagome(_) | Comparison::Doubling(_) if crossover.is_some() => {
            return Err(config_err(format!("`compare {name}` has no crossover search")))
        }
        Comparison::Kagome(_) => kagome_vs_square(&grid, l, n, seed)?,
        Comparison::Doubling(_) => square_doubling(&grid, l, n, seed)?,
        Comparison::Dhex(_) => dhex_three_way(&grid, l, n, seed, crossover.as_ref())?,
        Comparison::Bowtie(_) => bowtie_split(&grid, l, n, seed, crossover.as_ref())?,
    };
    let mut params = vec![("L", l.to_string()), ("nsamples", n.to_string())];
    if let Some(c) = &crossover {
        let bracket = if name == "dhex" { DHEX_BRACKET } else { BOWTIE_BRACKET };
        params.push(("crossover_bracket", format!("{},{}", bracket.0, bracket.1)));
        params.push(("crossover_nsamples", format!("{},{}", c.nsamples, c.max_nsamples)));
    }
    Ok(table.to_csv(&ctx.comments(&format!("compare {name}"), &params)))
}

fn phase_command(
    ctx: &Ctx,
    resolution: Option<usize>,
    l: Option<usize>,
    n: Option<usize>,
    tolerance: Option<f64>,
) -> Result<String, CliError> {
    let f = &ctx.file;
    let base = PhaseConfig::default();
    let cfg = PhaseConfig {
        resolution: f.pick(resolution, "resolution")?.unwrap_or(base.resolution),
        l: check_positive("L", f.pick(l, "L")?.unwrap_or(base.l))?,
        nsamples: check_positive("n", f.pick(n, "n")?.unwrap_or(base.nsamples))?,
        tolerance: f.pick(tolerance, "tolerance")?.unwrap_or(base.tolerance),
    };
    if !(cfg.tolerance > 0.0) {
        return Err(config_err("--tolerance must be positive"));
    }
    let d = asym_phase_diagram(&cfg, ctx.seed)?;
    let params = [
        ("resolution", cfg.resolution.to_string()),
        ("L", cfg.l.to_string()),
        ("nsamples", cfg.nsamples.to_string()),
        ("tolerance", cfg.tolerance.to_string()),
    ];
    Ok(d.to_csv(&ctx.comments("phase-diagram", &params)))
}

fn scp_command(_ctx: &Ctx, args: &ScpArgs) -> Result<String, CliError> {
    let value = if let Some(a) = args.alpha0 {
        scp_pure(a)?
    } else if let Some(List(v)) = &args.distill {
        distill_probability(v)?
    } else if let Some(List(v)) = &args.swap {
        match v[..] {
            [a, b] => swap_probability(a, b)?,
            _ => return Err(config_err("--swap takes exactly two probabilities")),
        }
    } else if let Some(p) = args.cep1 {
        cep1_density(Probability::new(p)?)
    } else if let Some(p) = args.cep2 {
        cep2_density(Probability::new(p)?)
    } else {
        unreachable!("clap requires one scp argument")
    };
    Ok(format!("{}\n", value.value()))
}
