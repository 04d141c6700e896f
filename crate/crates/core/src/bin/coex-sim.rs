use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coex_sim::harness::{emit_csv, emit_plot_script, run_experiment, ConfigFile};
use coex_sim::mid::assign_all_mid;
use coex_sim::oracle::{exhaustive_optimum, random_assignment};
use coex_sim::radio::total_throughput;
use coex_sim::topology::generate_scenario;
use coex_sim::{selfcheck, Result, ScenarioConfig};

#[derive(Parser)]
#[command(name = "coex-sim", version, about = "LAA/Wi-Fi unlicensed channel selection simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the throughput sweeps and write CSV plus plot scripts.
    Run {
        /// TOML experiment file; defaults are used when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// 2,000 training iterations and at most 3 seeds.
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value = "results")]
        out_dir: PathBuf,
        /// Write 0 in the wall-time column so output depends only on the config.
        #[arg(long)]
        no_timing: bool,
    },
    /// Compare MID and random assignment against exhaustive search on small scenarios.
    Oracle {
        #[arg(long, default_value_t = 4)]
        max_ue: usize,
        #[arg(long, default_value_t = 4)]
        max_channels: usize,
        #[arg(long, default_value_t = 20)]
        seeds: u64,
        #[arg(long, default_value_t = 2)]
        wifi_ap: usize,
    },
    /// Run the built-in invariant checks.
    Selfcheck,
    /// Print the default configuration as TOML.
    DefaultConfig,
}

fn run(config: Option<PathBuf>, quick: bool, out_dir: PathBuf, no_timing: bool) -> Result<()> {
    let mut cfg = match config {
        Some(path) => ConfigFile::load(&path)?,
        None => ConfigFile::default(),
    };
    if quick {
        cfg = cfg.quick();
    }
    if let Ok(seeds) = std::env::var("COEX_SEED") {
        cfg.override_seeds(&seeds)?;
    }
    if no_timing {
        cfg.experiment.record_wall_time = false;
    }
    std::fs::create_dir_all(&out_dir)?;
    for spec in cfg.specs() {
        let name = spec.sweep_variable.name();
        eprintln!(
            "sweep {name}: values {:?}, {} agents, {} seeds, {} training iterations",
            spec.sweep_values,
            spec.agents.len(),
            spec.seeds.len(),
            spec.hyperparams.train_iterations
        );
        let result = run_experiment(&spec)?;
        let csv = out_dir.join(format!("{name}_sweep.csv"));
        let plot = out_dir.join(format!("{name}_sweep.py"));
        emit_csv(&result, &csv)?;
        emit_plot_script(&result, &plot)?;
        for &v in &spec.sweep_values {
            let line: Vec<String> =
                spec.agents.iter().map(|&k| format!("{k}={:.3}", result.seed_mean(v, k).unwrap_or(f64::NAN))).collect();
            println!("{name}={v:>3}  {}", line.join("  "));
        }
        eprintln!("wrote {} and {}", csv.display(), plot.display());
    }
    Ok(())
}

fn oracle(max_ue: usize, max_channels: usize, seeds: u64, wifi_ap: usize) -> Result<()> {
    let params = coex_sim::radio::RadioParams::default();
    println!("ues channels seeds     optimum    mid/opt  random/opt");
    for ues in 1..=max_ue {
        for channels in 1..=max_channels {
            let (mut opt, mut mid, mut rnd) = (0.0, 0.0, 0.0);
            let mut rng = ChaCha8Rng::seed_from_u64(ues as u64 * 1000 + channels as u64);
            for seed in 0..seeds {
                let cfg = ScenarioConfig {
                    num_laa_ue: ues,
                    num_channels: channels,
                    num_wifi_ap: wifi_ap,
                    seed,
                    ..Default::default()
                };
                let s = generate_scenario(&cfg)?;
                let best = exhaustive_optimum(&s, &params)?.best_total;
                opt += best;
                mid += total_throughput(&s, &assign_all_mid(&s), &params)?.total / best;
                rnd += total_throughput(&s, &random_assignment(&s, &mut rng), &params)?.total / best;
            }
            let n = seeds as f64;
            println!("{ues:>3} {channels:>8} {seeds:>5} {:>11.4} {:>10.4} {:>11.4}", opt / n, mid / n, rnd / n);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, quick, out_dir, no_timing } => run(config, quick, out_dir, no_timing),
        Command::Oracle { max_ue, max_channels, seeds, wifi_ap } => oracle(max_ue, max_channels, seeds, wifi_ap),
        Command::Selfcheck => match selfcheck::run_all() {
            Ok(outcomes) => {
                let mut ok = true;
                for o in &outcomes {
                    println!("[{}] {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.name, o.detail);
                    ok &= o.passed;
                }
                if !ok {
                    return ExitCode::FAILURE;
                }
                Ok(())
            }
            Err(e) => Err(e),
        },
        Command::DefaultConfig => ConfigFile::default().to_toml().map(|t| print!("{t}")),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
