use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use telepath::link::transport::LinkServer;
use telepath::sim::bots::RemoteOperator;
use telepath::sim::{
    compare_fleets, compute_metrics, export_metrics, load_scenario, ClockMode, FleetSummary,
    OperatorKind, Session, SessionLog, SessionMetrics,
};
use telepath::world::load_map;

#[derive(Parser)]
#[command(
    name = "telepath",
    version,
    about = "Headless teleoperation session host"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one session from a scenario file.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Pace the simulation against the wall clock.
        #[arg(long)]
        realtime: bool,
        /// Accept operator stations on this TCP port (raw frames or WebSocket).
        #[arg(long)]
        listen: Option<u16>,
        /// Write the session log (NDJSON) here.
        #[arg(long)]
        log: Option<PathBuf>,
        /// Write the session's metrics row (CSV) here.
        #[arg(long)]
        metrics: Option<PathBuf>,
    },
    /// Run the sequential and direct bot fleets on a map and print their metrics as CSV.
    Compare {
        #[arg(long)]
        map: PathBuf,
        #[arg(long, default_value_t = 7)]
        runs: usize,
    },
    /// Recompute metrics from a session log.
    Replay {
        #[arg(long)]
        log: PathBuf,
    },
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Run {
            scenario,
            seed,
            realtime,
            listen,
            log,
            metrics,
        } => run(
            &scenario,
            seed,
            realtime,
            listen,
            log.as_deref(),
            metrics.as_deref(),
        ),
        Command::Compare { map, runs } => compare(&map, runs),
        Command::Replay { log } => replay(&log),
    }
}

fn run(
    path: &Path,
    seed: Option<u64>,
    realtime: bool,
    listen: Option<u16>,
    log_path: Option<&Path>,
    metrics_path: Option<&Path>,
) -> Result<()> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut scenario =
        load_scenario(&text).with_context(|| format!("loading {}", path.display()))?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    if realtime || listen.is_some() {
        scenario.clock = ClockMode::Realtime;
    }
    let base = path.parent();
    let mut session = match listen {
        Some(port) => {
            if scenario.operator != OperatorKind::External {
                bail!("--listen needs a scenario with operator \"external\"");
            }
            let map = scenario.prepare(base)?;
            let server = LinkServer::bind(("0.0.0.0", port))
                .with_context(|| format!("listening on port {port}"))?;
            log::info!("waiting for operator stations on {}", server.local_addr());
            Session::with_operator(scenario, map, Box::new(RemoteOperator::new(server)))
        }
        None => Session::new(scenario, base)?,
    };
    let outcome = session.run_to_end()?;
    log::info!("session ended: {outcome:?} at t = {:.2} s", session.time());

    let log = session.into_log();
    if let Some(p) = log_path {
        let file = fs::File::create(p).with_context(|| format!("creating {}", p.display()))?;
        let mut w = io::BufWriter::new(file);
        log.write_ndjson(&mut w)?;
        w.flush()?;
    }
    let m = compute_metrics(&log);
    if let Some(p) = metrics_path {
        fs::write(p, export_metrics(std::slice::from_ref(&m)))
            .with_context(|| format!("writing {}", p.display()))?;
    }
    print_summary(&m);
    Ok(())
}

fn print_summary(m: &SessionMetrics) {
    match m.task_completion_time {
        Some(t) => println!("completed in {t:.2} s"),
        None => println!("not completed"),
    }
    println!(
        "collisions: {} ({} obstacles)",
        m.collision_count, m.distinct_obstacles_hit
    );
    println!("max lateral error: {:.4} m", m.max_lateral_error);
    if m.path_entered_length > 0.0 {
        println!("path entered: {:.2} m", m.path_entered_length);
    }
}

fn compare(map_path: &Path, runs: usize) -> Result<()> {
    if runs == 0 {
        bail!("--runs must be at least 1");
    }
    let text =
        fs::read_to_string(map_path).with_context(|| format!("reading {}", map_path.display()))?;
    let map = load_map(&text).with_context(|| format!("loading {}", map_path.display()))?;
    let rows = compare_fleets(&map, runs)?;
    print!("{}", export_metrics(&rows));

    let s = FleetSummary::of(&rows);
    let fmt = |m: Option<f64>| m.map_or("n/a".to_string(), |v| format!("{v:.1} s"));
    eprintln!(
        "median completion: sequential {}, direct {}; collisions {}; incomplete runs {}",
        fmt(s.sequential_median),
        fmt(s.direct_median),
        s.collisions,
        s.incomplete
    );
    eprintln!("human operator medians for context: direct 80 s, sequential 101 s and 111 s");
    Ok(())
}

fn replay(path: &Path) -> Result<()> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let log = SessionLog::read_ndjson(BufReader::new(file))
        .with_context(|| format!("reading {}", path.display()))?;
    let m = compute_metrics(&log);
    print!("{}", export_metrics(std::slice::from_ref(&m)));
    Ok(())
}
