use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use polar_lg::bp::CheckRule;
use polar_lg::config::SimConfig;
use polar_lg::sim::{emit_csv, parse_ebno_range, run_point, Mode, Scenario};

#[derive(Parser)]
#[command(name = "polar-lg", version, about = "Local-global polar code simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a BER/FER sweep over BPSK-AWGN and write CSV.
    Simulate(SimulateArgs),
    /// Print the code rates of a configuration.
    Rates {
        /// Config file or preset (setting1, setting2, setting3).
        #[arg(long)]
        config: String,
    },
}

#[derive(clap::Args)]
struct SimulateArgs {
    /// Config file or preset (setting1, setting2, setting3).
    #[arg(long)]
    config: String,
    /// local, global or conventional.
    #[arg(long, value_parser = parse_mode)]
    mode: Mode,
    /// Eb/N0 sweep in dB as start:step:stop, or a single value.
    #[arg(long)]
    ebno: String,
    #[arg(long)]
    max_frames: u64,
    /// Stop a point after this many frame errors (0 = never).
    #[arg(long, default_value_t = 0)]
    min_frame_errors: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    no_early_stop: bool,
    /// Use min-sum instead of box-plus at check nodes.
    #[arg(long)]
    min_sum: bool,
    /// Override the construction Eb/N0 from the config.
    #[arg(long)]
    design_ebno_db: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: polar_lg::Error| e.to_string())
}

fn simulate(args: SimulateArgs) -> polar_lg::Result<()> {
    let mut config = SimConfig::load(&args.config)?;
    if args.no_early_stop {
        config.params.early_stop = false;
    }
    if args.min_sum {
        config.params.rule = CheckRule::MinSum;
    }
    if let Some(db) = args.design_ebno_db {
        config.params.design_ebno_db = db;
    }
    let ebno = parse_ebno_range(&args.ebno)?;
    let scenario = Scenario::new(config, args.mode, ebno, args.max_frames)?
        .with_seed(args.seed)
        .with_min_frame_errors(args.min_frame_errors);

    let mut results = Vec::with_capacity(scenario.ebno_db.len());
    for &ebno in &scenario.ebno_db {
        let r = run_point(&scenario, ebno)?;
        eprintln!(
            "{} {} {:.2} dB: frames={} ber={:.3e} fer={:.3e} avg_iter={:.2}",
            r.setting,
            r.mode,
            ebno,
            r.frames,
            r.overall.ber(),
            r.overall.fer(),
            r.overall.avg_iterations()
        );
        results.push(r);
    }
    emit_csv(&results, &args.out)
}

fn rates(config: &str) -> polar_lg::Result<()> {
    let config = SimConfig::load(config)?;
    let r = config.params.validate()?;
    println!("R_total    = {}", r.total);
    println!("R_outer    = {}", r.outer);
    println!("R_inner    = {}", r.inner);
    println!("R_subblock = {}", r.subblock);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Rates { config } => rates(&config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
