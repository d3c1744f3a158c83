use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use quipline_sim::output::write_outputs;
use quipline_sim::{ablate, run, Knob, ProfileMix, SimConfig};

/// Drive a synthetic player population through the game engine.
#[derive(Debug, Parser)]
#[command(name = "quipline-sim", version)]
struct Args {
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    agents: usize,
    #[arg(long, default_value_t = 2_000)]
    headlines: usize,
    #[arg(long, default_value_t = 20_000)]
    steps: usize,
    /// Strategy shares, e.g. `honest=0.8,lowballer=0.05,spammer=0.05,balanced=0.1`.
    #[arg(long)]
    profile_mix: Option<ProfileMix>,
    /// Stop once this many headlines are fully rated.
    #[arg(long)]
    target_completed: Option<usize>,
    /// Disable learning (constant skill and noise).
    #[arg(long)]
    no_learning: bool,
    /// Run paired with/without comparison for one mechanism instead of a single run.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(["per_pair_cap", "w_fill", "balance_points", "dwell"]))]
    ablate: Option<String>,
    /// Output directory for the event log, report and curve CSVs.
    #[arg(long, default_value = "sim-out")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut config = SimConfig {
        seed: args.seed,
        n_agents: args.agents,
        n_headlines: args.headlines,
        n_steps: args.steps,
        target_completed: args.target_completed,
        ..SimConfig::default()
    };
    if let Some(mix) = args.profile_mix {
        config.profile_mix = mix;
    }
    if args.no_learning {
        config.learning = quipline_sim::Learning::none();
    }

    let result = match args.ablate.as_deref() {
        Some(name) => name.parse::<Knob>().and_then(|knob| {
            let (comparison, on, off) = ablate(&config, knob)?;
            write_outputs(&on, &args.out.join("on"))?;
            write_outputs(&off, &args.out.join("off"))?;
            println!("{comparison}");
            Ok(())
        }),
        None => run(&config).and_then(|outcome| {
            write_outputs(&outcome, &args.out)?;
            let m = &outcome.metrics;
            println!(
                "steps={} events={} edits={} ratings={} completed={}",
                m.steps,
                outcome.events.len(),
                m.edits,
                m.ratings,
                m.completed
            );
            if let Some(r) = &outcome.report {
                println!(
                    "mean funniness {} | alpha {} | unique words {}",
                    r.mean_funniness_display(),
                    r.alpha.map_or("n/a".into(), |a| format!("{a:.3}")),
                    r.unique_word_pct_display()
                );
            }
            println!("outputs written to {}", args.out.display());
            Ok(())
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
