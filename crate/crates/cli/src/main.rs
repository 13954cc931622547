use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use seqopt::experiment::{
    export_report, load_config, read_report, run_suite, ExperimentConfig, OracleStatus, SuiteParts,
    SuiteReport, REPORT_FILE,
};
use seqopt::metrics::round_half_up;
use seqopt::{CountMode, Error};

#[derive(Parser)]
#[command(name = "seqopt", version, about = "Sequential staged search over discrete design spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Root seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; overrides the config.
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output directory; overrides the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Evaluation counter used for budgets and loads.
    #[arg(long, global = true, value_enum)]
    count_mode: Option<CountArg>,
}

#[derive(Subcommand, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// Check a config and print the resolved space and groupings.
    Validate,
    /// Run the full-factorial oracle.
    Oracle,
    /// Run every grouping × bound configuration (initial and iterative).
    Sequential,
    /// Run the repeated NSGA-II protocol.
    Nsga2,
    /// Run Morris screening.
    Morris,
    /// Run everything and write all report files.
    Suite,
    /// Rewrite report files from a saved report.json.
    Report,
}

#[derive(Clone, Copy, ValueEnum)]
enum CountArg {
    Unique,
    Raw,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_)
        | Error::Json(_)
        | Error::InvalidSpace(_)
        | Error::UnknownVariable(_)
        | Error::UnknownOption { .. }
        | Error::IndexOutOfRange { .. } => 2,
        Error::BudgetExceeded { .. } | Error::BudgetTooSmall { .. } => 3,
        Error::Backend { .. }
        | Error::Unevaluated(_)
        | Error::MissingCoefficient(_)
        | Error::DegenerateBenchmark(_) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config(vec!["--config is required".into()]))?;
    let mut config = load_config(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        config.jobs = Some(jobs);
    }
    if let Some(mode) = cli.count_mode {
        config.count_mode = match mode {
            CountArg::Unique => CountMode::Unique,
            CountArg::Raw => CountMode::Raw,
        };
    }
    Ok(config)
}

fn out_dir(cli: &Cli, config: Option<&ExperimentConfig>) -> Result<PathBuf, Error> {
    match (&cli.out, config) {
        (Some(o), _) => Ok(o.clone()),
        (None, Some(c)) => Ok(c.output_path()),
        (None, None) => Err(Error::Config(vec!["give --out or --config".into()])),
    }
}

fn run(cli: &Cli) -> Result<(), Error> {
    if cli.command == Command::Report {
        let config = cli.config.as_ref().map(|_| load(cli)).transpose()?;
        let dir = out_dir(cli, config.as_ref())?;
        let report = read_report(&dir.join(REPORT_FILE))?;
        export_report(&report, &dir)?;
        print_tables(&report);
        return Ok(());
    }

    let config = load(cli)?;
    let experiment = config.resolve()?;
    if cli.command == Command::Validate {
        let space = &experiment.space;
        println!(
            "{}: {} variables, {} combinations",
            experiment.name,
            space.len(),
            space.combination_count()
        );
        for g in &experiment.groupings {
            let sizes: Vec<String> = g.stages().iter().map(|s| space.group_count(s).to_string()).collect();
            println!("  grouping {:<10} stages {}", g.name, sizes.join(" / "));
        }
        for (label, b) in &experiment.bounds {
            println!("  bound {:<8} {}", label, space.describe(&space.resolve_bound(b)?));
        }
        return Ok(());
    }

    let parts = match cli.command {
        Command::Oracle => SuiteParts { oracle: true, ..SuiteParts::NONE },
        Command::Sequential => SuiteParts { oracle: true, sequential: true, ..SuiteParts::NONE },
        Command::Nsga2 => SuiteParts { oracle: true, nsga2: true, ..SuiteParts::NONE },
        Command::Morris => SuiteParts { morris: true, ..SuiteParts::NONE },
        _ => SuiteParts::ALL,
    };
    if cli.command == Command::Oracle {
        if let Some(cap) = experiment.full_factorial {
            let required = experiment.space.combination_count();
            if required > cap {
                return Err(Error::BudgetExceeded { required, cap });
            }
        }
    }
    let report = run_suite(&experiment, parts)?;
    let dir = out_dir(cli, Some(&config))?;
    let written = export_report(&report, &dir)?;
    print_tables(&report);
    println!("wrote {} files to {}", written.len(), display(&dir));
    Ok(())
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn print_tables(report: &SuiteReport) {
    match (&report.oracle.status, report.global()) {
        (OracleStatus::Evaluated, Some(g)) => println!(
            "global Pareto set: {} solutions from {} evaluations",
            g.len(),
            report.combination_count
        ),
        (OracleStatus::Refused, _) => println!("full factorial refused (over the budget cap)"),
        _ => {}
    }
    if !report.sequential.is_empty() {
        println!("{:<10} {:<8} {:<9} {:>6} {:>7} {:>9} {:>7}", "grouping", "bound", "run", "found", "front", "evals", "load%");
        for r in &report.sequential {
            let m = &r.metrics;
            let count = match m.count_mode {
                CountMode::Unique => m.unique_evaluations,
                CountMode::Raw => m.raw_requests,
            };
            println!(
                "{:<10} {:<8} {:<9} {:>6} {:>7} {:>9} {:>7.1}",
                r.grouping,
                r.bound,
                r.run.as_str(),
                m.n_global_found.map(|n| n.to_string()).unwrap_or_else(|| "-".into()),
                m.n_solutions,
                count,
                round_half_up(100.0 * m.computational_load, 1)
            );
        }
    }
    if let Some(n) = &report.nsga2 {
        println!("nsga2: budget {} ({}), kept runs {:?}", n.budget, n.budget_source, n.kept);
        for &k in &n.kept {
            let m = &n.runs[k].metrics;
            println!(
                "  run {:>2}: found {} of front {}",
                k,
                m.n_global_found.map(|n| n.to_string()).unwrap_or_else(|| "-".into()),
                m.n_solutions
            );
        }
    }
    if let Some(m) = &report.morris {
        println!("morris: {} trajectories, {} evaluations", m.trajectories, m.evaluations);
    }
}
