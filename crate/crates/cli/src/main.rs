use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use flexplan_core::planner::{
    compare_runs, comparison_csv, emit_report, load_inputs, load_result, load_scenario, run_plan,
    summary_csv,
};
use flexplan_core::routing::{place_regenerators, shortest_route, ReachLimits};

#[derive(Parser)]
#[command(name = "flexplan", version, about = "Multi-period flex-grid optical network planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan every period of a scenario and print the per-period summary
    Plan(PlanArgs),
    /// Compare two plan reports period by period
    Compare(CompareArgs),
    /// Load a scenario, check its inputs, and report what it contains
    Validate(ValidateArgs),
}

#[derive(Args)]
struct PlanArgs {
    /// Scenario file
    #[arg(long)]
    scenario: PathBuf,
    /// Directory to write summary.csv and allocations.json into
    #[arg(long)]
    out: Option<PathBuf>,
    /// Force regeneration on or off, overriding the scenario
    #[arg(long, value_enum)]
    regen: Option<RegenMode>,
    /// Transparent-reach limit in km; implies regeneration
    #[arg(long)]
    reach_km: Option<f64>,
    /// Intermediate-node limit per transparent segment
    #[arg(long)]
    max_hops: Option<usize>,
    /// Plan only the first N periods
    #[arg(long)]
    periods: Option<usize>,
    /// Admission margin in dB, overriding the catalog default
    #[arg(long)]
    margin_db: Option<f64>,
    /// Traffic jitter seed, overriding the scenario
    #[arg(long)]
    seed: Option<u64>,
    /// Also write spectrum.json with per-link slot occupancy
    #[arg(long)]
    dump_spectrum: bool,
}

#[derive(Copy, Clone, ValueEnum)]
enum RegenMode {
    On,
    Off,
}

#[derive(Args)]
struct CompareArgs {
    /// First report: a directory or an allocations.json file
    #[arg(long)]
    a: PathBuf,
    /// Second report: a directory or an allocations.json file
    #[arg(long)]
    b: PathBuf,
    /// Write the comparison here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Scenario file
    #[arg(long)]
    scenario: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Plan(args) => plan(args),
        Command::Compare(args) => compare(args),
        Command::Validate(args) => validate(args),
    };
    match outcome {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::FAILURE
        }
    }
}

fn plan(args: PlanArgs) -> Result<ExitCode, String> {
    let mut scenario = load_scenario(&args.scenario).map_err(|e| e.to_string())?;
    if let Some(seed) = args.seed {
        scenario.options.seed = seed;
    }
    if let Some(margin) = args.margin_db {
        scenario.options.margin_db = Some(margin);
    }
    if let Some(km) = args.reach_km {
        let hops = scenario
            .options
            .reach
            .as_ref()
            .map_or(usize::MAX, |r| r.max_intermediate_nodes);
        scenario.options.reach = Some(ReachLimits {
            max_length_km: km,
            max_intermediate_nodes: hops,
        });
    }
    if let Some(hops) = args.max_hops {
        match &mut scenario.options.reach {
            Some(reach) => reach.max_intermediate_nodes = hops,
            None => {
                return Err(
                    "--max-hops needs regeneration; pass --reach-km or enable it in the scenario"
                        .into(),
                )
            }
        }
    }
    match args.regen {
        Some(RegenMode::Off) => scenario.options.reach = None,
        Some(RegenMode::On) if scenario.options.reach.is_none() => {
            return Err("the scenario defines no reach limit; pass --reach-km".into())
        }
        _ => {}
    }

    let mut inputs = load_inputs(&scenario).map_err(|e| e.to_string())?;
    if let Some(periods) = args.periods {
        if periods == 0 || periods > inputs.traffic.periods {
            return Err(format!(
                "--periods must be between 1 and {}",
                inputs.traffic.periods
            ));
        }
        inputs.traffic.periods = periods;
    }

    let run = run_plan(&inputs).map_err(|e| e.to_string())?;
    print!("{}", summary_csv(&run.result));
    if let Some(out) = &args.out {
        let spectrum = args.dump_spectrum.then_some(&run.spectrum);
        emit_report(&run.result, spectrum, out).map_err(|e| e.to_string())?;
        eprintln!("report written to {}", out.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn compare(args: CompareArgs) -> Result<ExitCode, String> {
    let a = load_result(report_path(&args.a)).map_err(|e| e.to_string())?;
    let b = load_result(report_path(&args.b)).map_err(|e| e.to_string())?;
    let rows = compare_runs(&a, &b).map_err(|e| e.to_string())?;
    let csv = comparison_csv(&rows);
    match &args.out {
        Some(path) => {
            std::fs::write(path, csv).map_err(|e| format!("{}: {e}", path.display()))?;
            eprintln!("comparison written to {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(ExitCode::SUCCESS)
}

/// Accepts either a report directory or a direct path to its
/// allocations.json.
fn report_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join("allocations.json")
    } else {
        path.to_path_buf()
    }
}

fn validate(args: ValidateArgs) -> Result<ExitCode, String> {
    let scenario = load_scenario(&args.scenario).map_err(|e| e.to_string())?;
    let inputs = load_inputs(&scenario).map_err(|e| e.to_string())?;
    println!("scenario {}", inputs.name);
    println!(
        "  topology: {} nodes, {} links",
        inputs.topology.nodes().len(),
        inputs.topology.links().len()
    );
    println!(
        "  traffic: {} demands over {} periods, seed {}",
        inputs.traffic.demands.len(),
        inputs.traffic.periods,
        inputs.options.seed
    );
    println!(
        "  catalog: {} configs, margin {} dB",
        inputs.catalog.configs().len(),
        inputs
            .options
            .margin_db
            .unwrap_or(inputs.catalog.default_margin_db)
    );
    match &inputs.options.reach {
        Some(reach) => println!(
            "  regeneration: reach {} km, max {} intermediate nodes",
            reach.max_length_km, reach.max_intermediate_nodes
        ),
        None => println!("  regeneration: disabled"),
    }
    for warning in &inputs.catalog.warnings {
        println!("  warning: {warning}");
    }

    let demands = inputs
        .traffic
        .generate_periods(inputs.options.seed)
        .map_err(|e| e.to_string())?;
    let mut problems = 0;
    for demand in &demands {
        let route = match shortest_route(&inputs.topology, &demand.source, &demand.destination) {
            Ok(route) => route,
            Err(e) => {
                println!("  demand {}: {e}", demand.id);
                problems += 1;
                continue;
            }
        };
        if let Some(reach) = &inputs.options.reach {
            if let Err(e) = place_regenerators(&inputs.topology, &route, demand, reach) {
                println!("  demand {}: {e}", demand.id);
                problems += 1;
            }
        }
    }
    if problems > 0 {
        println!("{problems} of {} demands cannot be carried", demands.len());
        return Ok(ExitCode::FAILURE);
    }
    println!("all {} demands routable", demands.len());
    Ok(ExitCode::SUCCESS)
}
