use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use anytime_pibt::grid::write_scenario;
use anytime_pibt::instances::{random_map, random_scenario, rooms_map};
use anytime_pibt::oracle::brute_force_step;
use anytime_pibt::runner::*;
use anytime_pibt::*;

#[derive(Parser, Debug)]
#[command(name = "apibt", version, about = "PIBT and Anytime PIBT multi-agent path finding")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Plan a full-horizon run and report its summary.
    Solve(SolveArgs),
    /// Replay every step of a driving run at several budgets.
    Study(StudyArgs),
    /// Compare Anytime PIBT against exhaustive search on small random instances.
    OracleCheck(OracleArgs),
    /// Write a seeded map and scenario in the usual benchmark text formats.
    Generate(GenerateArgs),
}

#[derive(Args, Debug)]
struct Instance {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    scen: PathBuf,
    #[arg(long)]
    agents: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    instance: Instance,
    #[arg(long, value_parser = |s: &str| s.parse::<Algorithm>())]
    alg: Algorithm,
    #[arg(long, default_value_t = 0.0)]
    step_budget_ms: f64,
    #[arg(long, default_value = "wall", value_parser = |s: &str| s.parse::<BudgetMode>())]
    budget_mode: BudgetMode,
    #[arg(long, default_value_t = DEFAULT_NODES_PER_MS)]
    nodes_per_ms: f64,
    #[arg(long, default_value_t = 60.0)]
    time_limit_s: f64,
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
    /// Summary JSON path; printed to stdout when absent.
    #[arg(long)]
    out_summary: Option<PathBuf>,
    #[arg(long)]
    out_steps: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum Mode {
    Optimal,
    Tiebreak,
}

impl From<Mode> for SolveMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Optimal => SolveMode::Optimal,
            Mode::Tiebreak => SolveMode::Tiebreak,
        }
    }
}

#[derive(Args, Debug)]
struct StudyArgs {
    #[command(flatten)]
    instance: Instance,
    /// Ascending budgets in milliseconds, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0,0.1,4,256")]
    budgets: Vec<f64>,
    #[arg(long, default_value = "nodes", value_parser = |s: &str| s.parse::<BudgetMode>())]
    budget_mode: BudgetMode,
    #[arg(long, default_value_t = DEFAULT_NODES_PER_MS)]
    nodes_per_ms: f64,
    #[arg(long, value_enum, default_value_t = Mode::Optimal)]
    mode: Mode,
    #[arg(long, default_value_t = 300)]
    max_steps: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, default_value_t = 8)]
    size: u32,
    #[arg(long, default_value_t = 0.2)]
    obstacles: f64,
    /// Agent counts as `lo..hi` (inclusive) or a single number.
    #[arg(long, default_value = "2..6", value_parser = parse_range)]
    agents: (usize, usize),
    #[arg(long, default_value_t = 1000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Node budget per instance.
    #[arg(long, default_value_t = 1_000_000)]
    nodes: u64,
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum MapKind {
    Random,
    Rooms,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value_t = MapKind::Random)]
    kind: MapKind,
    #[arg(long, default_value_t = 32)]
    width: u32,
    #[arg(long, default_value_t = 32)]
    height: u32,
    #[arg(long, default_value_t = 0.2)]
    obstacles: f64,
    #[arg(long, default_value_t = 0)]
    map_seed: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    agents: usize,
    #[arg(long)]
    out_map: PathBuf,
    #[arg(long)]
    out_scen: PathBuf,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b.trim_start_matches('='))?),
        None => {
            let n = parse(s)?;
            (n, n)
        }
    };
    if lo == 0 || lo > hi {
        return Err(format!("empty or invalid range {s:?}"));
    }
    Ok((lo, hi))
}

enum Outcome {
    Done,
    PlanningFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match cli.command {
        Command::Solve(a) => solve(a),
        Command::Study(a) => study(a),
        Command::OracleCheck(a) => oracle_check(a),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::PlanningFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load(instance: &Instance) -> Result<(GridMap, Vec<ScenarioEntry>, String, String)> {
    let map_text = fs::read_to_string(&instance.map).with_context(|| format!("reading {}", instance.map.display()))?;
    let map = parse_map(&map_text).with_context(|| format!("parsing {}", instance.map.display()))?;
    let scen_text =
        fs::read_to_string(&instance.scen).with_context(|| format!("reading {}", instance.scen.display()))?;
    let scen = parse_scenario(&scen_text, &map).with_context(|| format!("parsing {}", instance.scen.display()))?;
    if instance.agents == 0 || instance.agents > scen.len() {
        bail!("--agents must be between 1 and {} for this scenario", scen.len());
    }
    Ok((map, scen, file_name(&instance.map), file_name(&instance.scen)))
}

fn file_name(p: &Path) -> String {
    p.file_name()
        .map_or_else(|| p.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn solve(a: SolveArgs) -> Result<Outcome> {
    let (map, scen, map_name, scen_name) = load(&a.instance)?;
    if !(a.time_limit_s.is_finite() && a.time_limit_s > 0.0) {
        bail!("--time-limit-s must be positive");
    }
    let mut cfg = RunConfig::new(a.alg, a.instance.agents);
    cfg.seed = a.instance.seed;
    cfg.step_budget = StepBudget {
        ms: a.step_budget_ms,
        mode: a.budget_mode,
        nodes_per_ms: a.nodes_per_ms,
    };
    cfg.time_limit = Duration::from_secs_f64(a.time_limit_s);
    cfg.max_steps = a.max_steps;
    let r = run_full_horizon(&map, &scen, &cfg, &map_name, &scen_name);

    if let Some(path) = &a.out_steps {
        write_steps_csv(&r.steps, create(path)?).context("writing step records")?;
    }
    match &a.out_summary {
        Some(path) => {
            let mut w = create(path)?;
            write_summary_json(&r.summary, &mut w)?;
            w.flush()?;
        }
        None => {
            let mut out = io::stdout().lock();
            write_summary_json(&r.summary, &mut out)?;
            writeln!(out)?;
        }
    }
    if r.summary.success {
        Ok(Outcome::Done)
    } else {
        eprintln!(
            "planning failed: {}",
            r.summary.failure.as_deref().unwrap_or("goals not reached")
        );
        Ok(Outcome::PlanningFailed)
    }
}

fn study(a: StudyArgs) -> Result<Outcome> {
    let (map, scen, _, _) = load(&a.instance)?;
    if a.budgets.is_empty() || !a.budgets.windows(2).all(|w| w[0] <= w[1]) || a.budgets.iter().any(|b| *b < 0.0) {
        bail!("--budgets must be a non-empty ascending list of non-negative numbers");
    }
    let cfg = StudyConfig {
        agents: a.instance.agents,
        budgets_ms: a.budgets.clone(),
        mode: a.budget_mode,
        nodes_per_ms: a.nodes_per_ms,
        solve_mode: a.mode.into(),
        seed: a.instance.seed,
        max_steps: a.max_steps,
    };
    let records = run_single_step_study(&map, &scen, &cfg);
    if let Some(path) = &a.out {
        write_study_csv(&records, create(path)?).context("writing study records")?;
    }
    let means = mean_improvements(&records, &a.budgets);
    for (b, m) in a.budgets.iter().zip(means) {
        println!("budget {b} ms: mean improvement {m:.3}");
    }
    Ok(Outcome::Done)
}

fn oracle_check(a: OracleArgs) -> Result<Outcome> {
    let (lo, hi) = a.agents;
    if hi > 8 {
        bail!("exhaustive search is limited to 8 agents");
    }
    let mut mismatches = 0u64;
    let mut checked = 0u64;
    for trial in 0..a.trials {
        let seed = a.seed.wrapping_add(trial);
        let n = lo + (trial as usize % (hi - lo + 1));
        let passable = random_map(a.size, a.size, a.obstacles, seed).num_passable();
        if passable < n {
            continue;
        }
        let inst = instances::random_step_instance(a.size, a.size, a.obstacles, n, seed);
        let tables = compute_tables(&inst.map, &inst.goals);
        let priorities = PriorityState::new(n, seed);
        let ctx = StepContext::new(&inst.map, &tables, &inst.config, &priorities, seed, 0);
        let out = anytime_pibt(&ctx, &AnytimeOptions::new(Budget::Nodes(a.nodes), SolveMode::Optimal));
        let best = brute_force_step(&inst.map, &inst.config, &tables)?;
        checked += 1;
        if out.f_final != best.fsum {
            mismatches += 1;
            eprintln!("seed {seed}: anytime {} vs optimum {}", out.f_final, best.fsum);
        }
    }
    println!("{} of {checked} instances reached the optimum", checked - mismatches);
    Ok(if mismatches == 0 {
        Outcome::Done
    } else {
        Outcome::PlanningFailed
    })
}

fn generate(a: GenerateArgs) -> Result<Outcome> {
    let map = match a.kind {
        MapKind::Random => {
            if a.width == 0 || a.height == 0 || !(0.0..1.0).contains(&a.obstacles) {
                bail!("random maps need positive dimensions and an obstacle ratio in [0, 1)");
            }
            random_map(a.width, a.height, a.obstacles, a.map_seed)
        }
        MapKind::Rooms => rooms_map(a.map_seed),
    };
    if a.agents > map.num_passable() {
        bail!("map has only {} free cells", map.num_passable());
    }
    let scen = random_scenario(&map, a.agents, a.seed);
    fs::write(&a.out_map, map.to_map_string()).with_context(|| format!("writing {}", a.out_map.display()))?;
    fs::write(&a.out_scen, write_scenario(&scen, &map, &file_name(&a.out_map)))
        .with_context(|| format!("writing {}", a.out_scen.display()))?;
    Ok(Outcome::Done)
}
