use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use wordsolve::harness::{load, run_bench, solve_problem};
use wordsolve::oracle::{first_model, Bounds};
use wordsolve::smtlib::ModelDisplay;
use wordsolve::{HarnessError, SearchConfig, Strategy, Verdict};

#[derive(Parser)]
#[command(name = "wordsolve", version, about = "Decide satisfiability of word equations in SMT-LIB2 files")]
#[command(args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// Input file
    file: Option<PathBuf>,
    #[command(flatten)]
    opts: SolveOpts,
    /// Print a model after `sat`
    #[arg(long)]
    model: bool,
    /// Print search statistics
    #[arg(long)]
    stats: bool,
    /// Write the proof graph in DOT format
    #[arg(long, value_name = "PATH")]
    dump_dot: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SolveOpts {
    /// Time limit in seconds (0 disables it)
    #[arg(long, default_value_t = 10.0)]
    timeout: f64,
    /// Largest depth bound of the search
    #[arg(long, default_value_t = 256)]
    max_depth: usize,
    /// Bound on probed values for nonlinear length constraints
    #[arg(long, default_value_t = 16)]
    probe_bound: i64,
    /// Longest pattern tried by the occurrence filter
    #[arg(long, default_value_t = 4)]
    max_pattern_len: usize,
    /// Seed for tie-breaking between rules
    #[arg(long)]
    seed: Option<u64>,
    /// Keep nodes that repeat an earlier one up to renaming
    #[arg(long)]
    no_dedup: bool,
    /// Search order: iterdeep or bfs
    #[arg(long, default_value = "iterdeep")]
    strategy: Strategy,
}

impl SolveOpts {
    fn config(&self) -> SearchConfig {
        let mut c = SearchConfig {
            timeout: (self.timeout > 0.0).then(|| Duration::from_secs_f64(self.timeout)),
            max_depth: self.max_depth,
            max_pattern_len: self.max_pattern_len,
            seed: self.seed,
            dedup: !self.no_dedup,
            strategy: self.strategy,
            ..SearchConfig::default()
        };
        c.int.probe_bound = self.probe_bound;
        c
    }
}

#[derive(Subcommand)]
enum Command {
    /// Solve every .smt2 file below a directory
    Bench {
        dir: PathBuf,
        /// Write the per-file CSV here instead of stdout
        #[arg(long, value_name = "PATH")]
        csv: Option<PathBuf>,
        #[command(flatten)]
        opts: SolveOpts,
    },
    /// Bounded exhaustive search
    #[command(hide = true)]
    Oracle {
        file: PathBuf,
        #[arg(long, default_value_t = 4)]
        max_len: usize,
        #[arg(long, default_value = "ab")]
        alphabet: String,
    },
}

fn solve_file(cli: &Cli, path: &Path) -> anyhow::Result<()> {
    let problem = load(path)?;
    let start = Instant::now();
    let out = solve_problem(&problem, &cli.opts.config())?;
    let wall = start.elapsed();
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "{}", out.verdict.name())?;
    if let (true, Verdict::Sat(m)) = (cli.model, &out.verdict) {
        write!(stdout, "{}", ModelDisplay { problem: &problem, model: m })?;
    }
    if cli.stats {
        let reason = match out.verdict {
            Verdict::Unknown(r) => Some(r),
            _ => None,
        };
        for line in out.stats.report(reason).lines() {
            writeln!(stdout, "; {line}")?;
        }
        writeln!(stdout, "; wall-ms {}", wall.as_millis())?;
    }
    if let Some(p) = &cli.dump_dot {
        std::fs::write(p, out.graph.to_dot()).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn bench(dir: &Path, csv: Option<&Path>, opts: &SolveOpts) -> anyhow::Result<()> {
    let report = run_bench(dir, &opts.config())?;
    match csv {
        Some(p) => {
            let f = std::fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
            report.write_csv(f)?;
            print!("{}", report.table());
        }
        None => {
            report.write_csv(std::io::stdout().lock())?;
            eprint!("{}", report.table());
        }
    }
    Ok(())
}

fn oracle(path: &Path, max_len: usize, alphabet: &str) -> anyhow::Result<()> {
    let problem = load(path)?;
    let chars: Vec<char> = alphabet.chars().collect();
    match first_model(&problem.assertions, None, &Bounds::new(max_len, &chars)) {
        Some(m) => {
            println!("sat");
            print!("{}", ModelDisplay { problem: &problem, model: &m });
        }
        None => println!("unsat-within-bounds"),
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Some(Command::Bench { dir, csv, opts }) => bench(dir, csv.as_deref(), opts),
        Some(Command::Oracle { file, max_len, alphabet }) => oracle(file, *max_len, alphabet),
        None => match &cli.file {
            Some(f) => solve_file(cli, f),
            None => anyhow::bail!("no input file"),
        },
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            match e.downcast_ref::<HarnessError>() {
                Some(HarnessError::Parse { .. }) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}
