//! Command-line front end.
//!
//! Exit codes: 0 success, 1 runtime or environment failure, 2 usage error.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lightswim_core::sweep::{self, GridAxis, GridValue, SweepSpec, TrialSpec};
use lightswim_core::{Algorithm, AlgorithmConfig, GaConfig, ParameterSpace, PoolStrategy, PsoConfig, Selection};

use crate::session::{read_journal, recover, SessionStore};
use crate::{csv, parallel, space_file, sweep_file};

#[derive(Debug, Parser)]
#[command(name = "lightswim", version, about = "Evolutionary optimizers for light-driven swimming robots")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the parameter space and its cardinality.
    Space {
        /// Space document (TOML, or JSON with a .json extension).
        #[arg(long)]
        file: Option<PathBuf>,
        /// Print the space as a JSON document.
        #[arg(long)]
        json: bool,
    },
    /// Run one trial against the surrogate landscape.
    Trial(TrialArgs),
    /// Run a parameter sweep and write CSV.
    Sweep(SweepArgs),
    /// Serve the lab-session HTTP API.
    Serve(ServeArgs),
    /// Export a session journal as CSV.
    Export {
        #[arg(long)]
        journal: PathBuf,
        #[arg(long, default_value = "csv")]
        format: String,
        /// Output file; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Ga,
    Pso,
}

impl From<AlgoArg> for Algorithm {
    fn from(a: AlgoArg) -> Self {
        match a {
            AlgoArg::Ga => Algorithm::Ga,
            AlgoArg::Pso => Algorithm::Pso,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SelectionArg {
    Rank,
    Roulette,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PoolArg {
    Elite8,
    AllHistory,
}

/// Optimizer settings; GA flags are rejected for PSO and vice versa.
#[derive(Debug, Clone, Default, Args)]
pub struct AlgoFlags {
    #[arg(long, value_enum)]
    pub selection: Option<SelectionArg>,
    #[arg(long, value_enum)]
    pub pool: Option<PoolArg>,
    /// Fixed mutation rate (sets both bounds).
    #[arg(long, conflicts_with_all = ["m_min", "m_max", "adaptive"])]
    pub rate: Option<f64>,
    #[arg(long)]
    pub m_min: Option<f64>,
    #[arg(long)]
    pub m_max: Option<f64>,
    /// Fitness-dependent mutation rate between --m-min and --m-max.
    #[arg(long)]
    pub adaptive: bool,
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub w: Option<f64>,
    #[arg(long)]
    pub c1: Option<f64>,
    #[arg(long)]
    pub c2: Option<f64>,
    #[arg(long)]
    pub swarm: Option<usize>,
}

impl AlgoFlags {
    pub fn config(&self, algorithm: Algorithm) -> Result<AlgorithmConfig, CliError> {
        let ga_set = self.selection.is_some()
            || self.pool.is_some()
            || self.rate.is_some()
            || self.m_min.is_some()
            || self.m_max.is_some()
            || self.adaptive
            || self.pairs.is_some();
        let pso_set = self.w.is_some() || self.c1.is_some() || self.c2.is_some() || self.swarm.is_some();
        let config = match algorithm {
            Algorithm::Ga => {
                if pso_set {
                    return Err(CliError::Usage("--w/--c1/--c2/--swarm apply to --algo pso only".into()));
                }
                let mut c = GaConfig::default();
                if let Some(s) = self.selection {
                    c.selection = match s {
                        SelectionArg::Rank => Selection::Rank,
                        SelectionArg::Roulette => Selection::Roulette,
                    };
                }
                if let Some(p) = self.pool {
                    c.pool = match p {
                        PoolArg::Elite8 => PoolStrategy::Elite8,
                        PoolArg::AllHistory => PoolStrategy::AllHistory,
                    };
                }
                if let Some(r) = self.rate {
                    c = c.with_rate(r);
                }
                c.adaptive = self.adaptive;
                if let Some(v) = self.m_min {
                    c.m_min = v;
                    if !self.adaptive && self.m_max.is_none() {
                        c.m_max = v;
                    }
                }
                if let Some(v) = self.m_max {
                    c.m_max = v;
                    if !self.adaptive && self.m_min.is_none() {
                        c.m_min = v;
                    }
                }
                if let Some(p) = self.pairs {
                    c.pairs = p;
                    c.population = 2 * p;
                }
                AlgorithmConfig::Ga(c)
            }
            Algorithm::Pso => {
                if ga_set {
                    return Err(CliError::Usage(
                        "--selection/--pool/--rate/--m-min/--m-max/--adaptive/--pairs apply to --algo ga only".into(),
                    ));
                }
                let mut c = PsoConfig::default();
                c.w = self.w.unwrap_or(c.w);
                c.c1 = self.c1.unwrap_or(c.c1);
                c.c2 = self.c2.unwrap_or(c.c2);
                c.swarm = self.swarm.unwrap_or(c.swarm);
                AlgorithmConfig::Pso(c)
            }
        };
        config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct TrialArgs {
    #[arg(long, value_enum)]
    pub algo: AlgoArg,
    /// Surrogate peak width.
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = sweep::DEFAULT_ITERATIONS)]
    pub iterations: u32,
    #[arg(long)]
    pub space_file: Option<PathBuf>,
    #[command(flatten)]
    pub flags: AlgoFlags,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Sweep document (TOML); inline flags are ignored except the overrides
    /// --reps, --seed and --iterations.
    #[arg(long, conflicts_with_all = ["algo", "sigma", "grid"])]
    pub spec: Option<PathBuf>,
    #[arg(long, value_enum, required_unless_present = "spec")]
    pub algo: Option<AlgoArg>,
    /// Comma-separated σ values.
    #[arg(long, value_delimiter = ',', required_unless_present = "spec")]
    pub sigma: Vec<f64>,
    /// `full` for the full grid of the algorithm, or `name=v1,v2,...`;
    /// repeatable, first axis varies slowest.
    #[arg(long)]
    pub grid: Vec<String>,
    #[arg(long)]
    pub reps: Option<u32>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub iterations: Option<u32>,
    /// Output file; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the number of CPUs.
    #[arg(long)]
    pub parallel: Option<usize>,
    #[arg(long)]
    pub space_file: Option<PathBuf>,
    #[command(flatten)]
    pub flags: AlgoFlags,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    #[arg(long, env = "LIGHTSWIM_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "LIGHTSWIM_JOURNAL_DIR", default_value = "journals")]
    pub journal_dir: PathBuf,
    /// Static files served for paths outside `/api`.
    #[arg(long, env = "LIGHTSWIM_ASSETS_DIR")]
    pub assets_dir: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

/// Parse `std::env::args`, run, and return the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Space { file, json } => cmd_space(file.as_deref(), json, out),
        Command::Trial(args) => cmd_trial(&args, out),
        Command::Sweep(args) => cmd_sweep(&args, out),
        Command::Serve(args) => cmd_serve(&args),
        Command::Export { journal, format, out: path } => cmd_export(&journal, &format, path.as_deref(), out),
    }
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Runtime(e.to_string())
}

fn load_space(path: Option<&Path>) -> Result<ParameterSpace, CliError> {
    space_file::load_or_default(path).map_err(|e| match e {
        space_file::SpaceFileError::Io { .. } => CliError::Runtime(e.to_string()),
        _ => CliError::Usage(e.to_string()),
    })
}

fn cmd_space(file: Option<&Path>, json: bool, out: &mut dyn Write) -> Result<(), CliError> {
    let space = load_space(file)?;
    if json {
        writeln!(out, "{}", space_file::to_json(&space)).map_err(io_err)?;
        return Ok(());
    }
    let mut text = String::new();
    for d in space.dimensions() {
        let values: Vec<String> = d.values.iter().map(|v| csv::f9(*v)).collect();
        let unit = if d.unit.is_empty() { "-" } else { d.unit.as_str() };
        text.push_str(&format!("{:<20} {:<6} {:>3} values  [{}]", d.name, unit, d.len(), values.join(", ")));
        if let Some(p) = d.period {
            text.push_str(&format!("  periodic {}", csv::f9(p)));
        }
        text.push('\n');
    }
    text.push_str(&format!("cardinality {}\n", space.cardinality()));
    out.write_all(text.as_bytes()).map_err(io_err)
}

fn cmd_trial(args: &TrialArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let space = load_space(args.space_file.as_deref())?;
    let config = args.flags.config(args.algo.into())?;
    let spec = TrialSpec { config, sigma: args.sigma, iterations: args.iterations, seed: args.seed };
    let result = sweep::run_trial(&space, &spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let mut text = String::from("generation\tbest_so_far\tgeneration_best\tbest_genotype\n");
    for (i, ((best, gen_best), g)) in
        result.best_so_far.iter().zip(&result.generation_best).zip(&result.best_so_far_genotype).enumerate()
    {
        let values: Vec<String> = space.values_of(g).iter().map(|v| csv::f9(*v)).collect();
        text.push_str(&format!("{i}\t{}\t{}\t[{}]\n", csv::f9(*best), csv::f9(*gen_best), values.join(", ")));
    }
    out.write_all(text.as_bytes()).map_err(io_err)
}

fn parse_grid_value(s: &str) -> GridValue {
    match s {
        "true" => GridValue::Bool(true),
        "false" => GridValue::Bool(false),
        _ => s.parse().map(GridValue::Num).unwrap_or_else(|_| GridValue::Text(s.to_string())),
    }
}

fn parse_grid(algorithm: Algorithm, specs: &[String]) -> Result<Vec<GridAxis>, CliError> {
    let mut grid = Vec::new();
    for s in specs {
        if s == "full" {
            grid.extend(sweep_file::preset_grid(algorithm, sweep_file::Preset::Full));
            continue;
        }
        let (name, values) =
            s.split_once('=').ok_or_else(|| CliError::Usage(format!("grid `{s}`: expected `full` or name=v1,v2")))?;
        let values: Vec<GridValue> = values.split(',').map(|v| parse_grid_value(v.trim())).collect();
        grid.push(GridAxis { name: name.trim().to_string(), values });
    }
    Ok(grid)
}

fn sweep_spec(args: &SweepArgs) -> Result<SweepSpec, CliError> {
    let mut spec = match &args.spec {
        Some(path) => sweep_file::load(path).map_err(|e| match e {
            sweep_file::SweepFileError::Io { .. } => CliError::Runtime(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        })?,
        None => {
            let algorithm: Algorithm = args.algo.expect("clap requires --algo without --spec").into();
            let mut spec = SweepSpec::new(args.flags.config(algorithm)?, args.sigma.clone());
            spec.grid = parse_grid(algorithm, &args.grid)?;
            spec
        }
    };
    if let Some(r) = args.reps {
        spec.repetitions = r;
    }
    if let Some(s) = args.seed {
        spec.base_seed = s;
    }
    if let Some(i) = args.iterations {
        spec.iterations = i;
    }
    spec.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(spec)
}

fn cmd_sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let spec = sweep_spec(args)?;
    let space = load_space(args.space_file.as_deref())?;
    if args.parallel == Some(0) {
        return Err(CliError::Usage("--parallel must be at least 1".into()));
    }
    let threads = args.parallel.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let mut file = match &args.out {
        Some(p) => Some(
            std::fs::File::create(p).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display())))?,
        ),
        None => None,
    };
    let last_pct = AtomicUsize::new(0);
    let cells = parallel::run_sweep_parallel(&space, &spec, threads, |done, total| {
        let pct = done * 100 / total;
        if last_pct.fetch_max(pct, Ordering::Relaxed) < pct {
            eprintln!("sweep: {pct}% ({done}/{total} trials)");
        }
    })
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    let text = csv::sweep_csv(spec.config.algorithm(), &cells);
    match file.as_mut() {
        Some(f) => f.write_all(text.as_bytes()).and_then(|_| f.sync_all()).map_err(io_err),
        None => out.write_all(text.as_bytes()).map_err(io_err),
    }
}

fn cmd_export(journal: &Path, format: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<(), CliError> {
    if format != "csv" {
        return Err(CliError::Usage(format!("unknown export format `{format}`")));
    }
    let bytes = std::fs::read(journal).map_err(|e| CliError::Runtime(format!("{}: {e}", journal.display())))?;
    let parsed = read_journal(&bytes);
    let recovered = recover(&parsed.events).map_err(|e| CliError::Runtime(e.to_string()))?;
    if let Some(reason) = recovered.stopped.as_ref().or(parsed.stopped.as_ref()) {
        eprintln!("warning: journal replay stopped early: {reason}");
    }
    let text = recovered.session.export_csv();
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(io_err),
    }
}

fn cmd_serve(args: &ServeArgs) -> Result<(), CliError> {
    let (store, report) = SessionStore::open(&args.journal_dir)
        .map_err(|e| CliError::Runtime(format!("journal dir {}: {e}", args.journal_dir.display())))?;
    for (id, reason) in &report.repaired {
        eprintln!("session {id}: journal repaired ({reason})");
    }
    for (path, reason) in &report.skipped {
        eprintln!("skipping {}: {reason}", path.display());
    }
    eprintln!("recovered {} session(s) from {}", report.loaded.len(), args.journal_dir.display());
    let store = Arc::new(store);
    let runtime = tokio::runtime::Runtime::new().map_err(io_err)?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((args.host.as_str(), args.port))
            .await
            .map_err(|e| CliError::Runtime(format!("cannot bind {}:{}: {e}", args.host, args.port)))?;
        let addr = listener.local_addr().map_err(io_err)?;
        eprintln!("listening on http://{addr}");
        let app = crate::http::router(store.clone(), args.assets_dir.clone());
        axum::serve(listener, app).with_graceful_shutdown(shutdown_signal()).await.map_err(io_err)
    })?;
    store.sync_all().map_err(|e| CliError::Runtime(e.to_string()))?;
    eprintln!("shut down cleanly");
    Ok(())
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("lightswim").chain(args.iter().copied()))
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }

    #[test]
    fn algorithm_flags_must_match() {
        let flags = AlgoFlags { w: Some(0.4), ..Default::default() };
        assert!(matches!(flags.config(Algorithm::Ga), Err(CliError::Usage(_))));
        let flags = AlgoFlags { rate: Some(1.5), ..Default::default() };
        assert!(matches!(flags.config(Algorithm::Pso), Err(CliError::Usage(_))));
        match flags.config(Algorithm::Ga).unwrap() {
            AlgorithmConfig::Ga(c) => assert_eq!((c.m_min, c.m_max, c.adaptive), (1.5, 1.5, false)),
            _ => panic!(),
        }
        let flags = AlgoFlags { adaptive: true, m_min: Some(0.0), m_max: Some(2.0), ..Default::default() };
        match flags.config(Algorithm::Ga).unwrap() {
            AlgorithmConfig::Ga(c) => assert_eq!((c.m_min, c.m_max, c.adaptive), (0.0, 2.0, true)),
            _ => panic!(),
        }
        let flags = AlgoFlags { m_min: Some(0.0), m_max: Some(2.0), ..Default::default() };
        assert!(matches!(flags.config(Algorithm::Ga), Err(CliError::Usage(_))));
    }

    #[test]
    fn rate_conflicts_with_bounds() {
        assert!(parse(&["trial", "--algo", "ga", "--sigma", "0.1", "--rate", "1", "--m-min", "1"]).is_err());
    }

    #[test]
    fn inline_grid() {
        let grid = parse_grid(Algorithm::Ga, &["pool=elite8,all_history".into(), "adaptive=true".into()]).unwrap();
        assert_eq!(grid[0].values, vec![GridValue::Text("elite8".into()), GridValue::Text("all_history".into())]);
        assert_eq!(grid[1].values, vec![GridValue::Bool(true)]);
        assert_eq!(parse_grid(Algorithm::Pso, &["full".into()]).unwrap().len(), 3);
        assert!(parse_grid(Algorithm::Pso, &["c2".into()]).is_err());
    }

    #[test]
    fn trial_table() {
        let cli = parse(&["trial", "--algo", "pso", "--sigma", "0.25", "--seed", "3"]).unwrap();
        let mut buf = Vec::new();
        run(cli, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 6);
        assert!(text.lines().nth(5).unwrap().starts_with("4\t"));
    }
}
