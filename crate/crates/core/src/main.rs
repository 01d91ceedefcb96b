use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::mpsc;
use std::thread;

use clap::{Args, Parser, Subcommand};

use swe_esdg_core::bench;
use swe_esdg_core::config::{self, ConfigFile, RunConfig};
use swe_esdg_core::dg::Mode;
use swe_esdg_core::output;
use swe_esdg_core::validate;
use swe_esdg_core::{Result, SweError};

#[derive(Parser)]
#[command(name = "swe-esdg", version, about = "Entropy stable DG solver for the 2D shallow water equations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario.
    Run(RunArgs),
    /// Volume kernel operation counts and timings.
    Bench(BenchArgs),
    /// Run acceptance suites and report pass/fail per criterion.
    Validate {
        /// Suite name, criterion number, or `all`.
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario id; overrides the one in the configuration file.
    #[arg(long)]
    scenario: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    kx: Option<usize>,
    #[arg(long)]
    ky: Option<usize>,
    #[arg(long)]
    t_final: Option<f64>,
    #[arg(long)]
    cfl: Option<f64>,
    #[arg(long, value_parser = parse_mode)]
    mode: Option<Mode>,
    /// Disable the positivity limiter.
    #[arg(long)]
    no_limiter: bool,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    /// Single degree to benchmark; without it a table for 1..=nmax is produced.
    #[arg(long)]
    n: Option<usize>,
    /// Elements per direction for a single-degree run (K = k * k).
    #[arg(long, default_value_t = 64)]
    k: usize,
    #[arg(long, default_value_t = 15)]
    nmax: usize,
    /// Memory budget in MiB for the table; sets the element count per degree.
    #[arg(long, default_value_t = 64)]
    budget: usize,
    #[arg(long, default_value_t = 20)]
    repetitions: usize,
    /// Compute ceiling in GFLOP/s for the combined roofline.
    #[arg(long, default_value_t = f64::INFINITY)]
    ceiling: f64,
}

fn parse_mode(s: &str) -> std::result::Result<Mode, String> {
    match s {
        "entropy_stable" | "es" => Ok(Mode::EntropyStable),
        "standard" => Ok(Mode::Standard),
        _ => Err(format!("unknown mode '{s}'")),
    }
}

fn load(args: &RunArgs) -> Result<RunConfig> {
    let mut file = match &args.config {
        Some(p) => config::parse_sections(&std::fs::read_to_string(p)?)?,
        None => ConfigFile::default(),
    };
    if let Some(s) = &args.scenario {
        file.run.scenario = Some(s.clone());
    }
    if file.run.scenario.is_none() {
        return Err(SweError::Config("no scenario given (use --scenario or [run] scenario)".into()));
    }
    file.mesh.n = args.n.or(file.mesh.n);
    file.mesh.kx = args.kx.or(file.mesh.kx);
    file.mesh.ky = args.ky.or(file.mesh.ky);
    file.run.t_final = args.t_final.or(file.run.t_final);
    file.run.cfl = args.cfl.or(file.run.cfl);
    file.run.mode = args.mode.or(file.run.mode);
    if args.no_limiter {
        file.limiter.enabled = Some(false);
    }
    if let Some(o) = &args.output {
        file.output.dir = Some(o.clone());
    }
    config::resolve(file)
}

fn run(args: RunArgs) -> Result<()> {
    let cfg = load(&args)?;
    let hash = cfg.hash();
    let dir = cfg.output.dir.clone();
    log::info!(
        "{} N={} {}x{} mode={:?} T={} hash={hash}",
        cfg.scenario.id,
        cfg.scenario.n,
        cfg.scenario.kx,
        cfg.scenario.ky,
        cfg.mode,
        cfg.options.t_final
    );
    let mut sim = cfg.simulation()?;

    // Files are produced by the solver and written by a single IO thread.
    let (tx, rx) = mpsc::sync_channel::<(PathBuf, String)>(2);
    let writer = thread::spawn(move || -> Result<()> {
        for (path, text) in rx {
            output::write_atomic(&path, &text)?;
        }
        Ok(())
    });
    let send = |path: PathBuf, text: String| {
        tx.send((path, text))
            .map_err(|_| SweError::Io(std::io::Error::other("output writer stopped")))
    };
    let mut count = 0usize;
    let result = sim.run(|s| {
        let name = format!("snapshot_{count:04}");
        count += 1;
        send(
            dir.join(format!("{name}.txt")),
            output::snapshot_text(&s.disc, &s.w, &s.eps, s.t, &hash),
        )?;
        for sl in &cfg.output.slices {
            let rows = output::slice(&s.disc, &s.w, *sl)?;
            let axis = if sl.axis == config::Axis::X { "x" } else { "y" };
            send(
                dir.join(format!("{name}_slice_{axis}{}.txt", sl.value)),
                output::slice_text(&rows, s.t, &hash),
            )?;
        }
        log::info!("t = {:.6} step {} min h {:.3e}", s.t, s.step, s.min_h());
        Ok(())
    });
    if result.is_err() {
        send(dir.join("abort_state.txt"), output::snapshot_text(&sim.disc, &sim.w, &sim.eps, sim.t, &hash))?;
    }
    if cfg.output.diagnostics {
        send(dir.join("diagnostics.txt"), output::diagnostics_text(&sim.history, &hash))?;
    }
    drop(tx);
    writer
        .join()
        .map_err(|_| SweError::Io(std::io::Error::other("output writer panicked")))??;
    result?;
    let last = sim.history.last().expect("history has the initial record");
    println!(
        "{} finished: t = {} steps = {} mass = {:.15e} entropy = {:.15e} min h = {:.3e}",
        cfg.scenario.id, last.t, last.step, last.mass, last.entropy, sim.min_stage_h
    );
    Ok(())
}

fn bench_cmd(a: BenchArgs) -> Result<()> {
    println!("{}", bench::TABLE_HEADER);
    match a.n {
        Some(n) => {
            let k = a.k * a.k;
            let rec = bench::time_kernels(n, k, a.repetitions.max(1), a.ceiling)?;
            println!("{}", bench::table_row(&rec));
        }
        None => {
            for rec in bench::budget_table(a.nmax, a.budget << 20, a.repetitions.max(1), a.ceiling)? {
                println!("{}", bench::table_row(&rec));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => run(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Validate { suite } => match validate::select(&suite) {
            Ok(ids) => {
                let mut all = true;
                for id in ids {
                    let o = validate::run(id);
                    println!("{}", o.line());
                    all &= o.passed;
                }
                if !all {
                    return ExitCode::from(1);
                }
                Ok(())
            }
            Err(e) => Err(e),
        },
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
