//! Command-line front end: netlist simulation with waveform output, bounded
//! property checking, minimization and monoid reports.
//!
//! Exit codes: 0 for success or PASS, 1 for a failed check (a counterexample
//! was found), 2 for usage, validation, I/O, or budget errors.

mod error;
mod netlist;
mod stimulus;
mod vcd;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use moorekit::algebra;
use moorekit::checker;
use moorekit::gates::TransientPolicy;
use moorekit::machine::{minimize, reachable_states};
use moorekit::product::{is_feedback_free, theorem1_check};
use moorekit::{Status, Verdict};

use error::CliError;
use netlist::{parse_netlist, Netlist};

#[derive(Parser)]
#[command(name = "moorekit", version, about = "Gate-level Moore machine simulator and bounded checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Vcd,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Holdlast,
    Adversarial,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a netlist against a stimulus and write per-tick outputs.
    Run {
        #[arg(long)]
        netlist: PathBuf,
        #[arg(long)]
        stimulus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "vcd")]
        format: Format,
    },
    /// Check a named property; parameters are `key=value` arguments.
    Check {
        /// One of: gate_constraints, stability_lemma, latch_claim,
        /// adder_lemma, ripple_star, theorem1.
        property: String,
        /// Property parameters, e.g. `t=1 slack=4`.
        params: Vec<String>,
        #[arg(long)]
        netlist: Option<PathBuf>,
        #[arg(long)]
        depth: Option<u64>,
        #[arg(long, value_enum)]
        policy: Option<Policy>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        budget: Option<u64>,
        /// Write a failing stimulus here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print netlist facts: pins, instances, feedback.
    Info {
        #[arg(long)]
        netlist: PathBuf,
    },
    /// Print the machine's reachable and minimized state counts.
    Minimize {
        #[arg(long)]
        netlist: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Print the transformation monoid report.
    Monoid {
        #[arg(long)]
        netlist: PathBuf,
        #[arg(long)]
        budget: Option<u64>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

fn load_netlist(path: &Path) -> Result<Netlist, CliError> {
    parse_netlist(&read_file(path)?)
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Run {
            netlist,
            stimulus,
            out,
            format,
        } => cmd_run(&netlist, &stimulus, &out, format),
        Command::Check {
            property,
            params,
            netlist,
            depth,
            policy,
            seed,
            budget,
            out,
        } => cmd_check(CheckArgs {
            property,
            params,
            netlist,
            depth,
            policy,
            seed,
            budget,
            out,
        }),
        Command::Info { netlist } => cmd_info(&netlist),
        Command::Minimize { netlist, budget } => cmd_minimize(&netlist, budget),
        Command::Monoid { netlist, budget } => cmd_monoid(&netlist, budget),
    }
}

fn cmd_run(
    netlist_path: &Path,
    stimulus_path: &Path,
    out_path: &Path,
    format: Format,
) -> Result<ExitCode, CliError> {
    let netlist = load_netlist(netlist_path)?;
    let trace = stimulus::parse_stimulus(&read_file(stimulus_path)?, &netlist.spec.input_pins)?;
    let machine = netlist.composite()?;
    let outputs = machine.run(&trace)?;
    let rendered = match format {
        Format::Vcd => vcd::format_vcd(&outputs, &netlist.outputs),
        Format::Csv => stimulus::format_run_csv(&outputs, &netlist.outputs),
    };
    write_file(out_path, &rendered)?;
    println!(
        "wrote {} ticks for {} output pins to {}",
        outputs.len(),
        netlist.outputs.len(),
        out_path.display()
    );
    Ok(ExitCode::SUCCESS)
}

struct CheckArgs {
    property: String,
    params: Vec<String>,
    netlist: Option<PathBuf>,
    depth: Option<u64>,
    policy: Option<Policy>,
    seed: Option<u64>,
    budget: Option<u64>,
    out: Option<PathBuf>,
}

struct ParamMap(BTreeMap<String, String>);

impl ParamMap {
    fn parse(args: &CheckArgs) -> Result<ParamMap, CliError> {
        let mut map = BTreeMap::new();
        for raw in &args.params {
            let (key, value) = raw.split_once('=').ok_or_else(|| {
                CliError::Usage(format!("parameter `{raw}` is not of the form key=value"))
            })?;
            if map.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::Usage(format!("duplicate parameter `{key}`")));
            }
        }
        if let Some(depth) = args.depth {
            map.entry("depth".into()).or_insert(depth.to_string());
        }
        if let Some(seed) = args.seed {
            map.entry("seed".into()).or_insert(seed.to_string());
        }
        if let Some(budget) = args.budget {
            map.entry("budget".into()).or_insert(budget.to_string());
        }
        if let Some(policy) = args.policy {
            map.entry("policy".into()).or_insert(
                match policy {
                    Policy::Holdlast => "holdlast",
                    Policy::Adversarial => "adversarial",
                }
                .to_string(),
            );
        }
        Ok(ParamMap(map))
    }

    fn count(&self, key: &str, default: u64) -> Result<u64, CliError> {
        match self.0.get(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse()
                .map_err(|_| CliError::Usage(format!("parameter `{key}`: invalid count `{raw}`"))),
        }
    }

    fn policy(&self, default: TransientPolicy) -> Result<TransientPolicy, CliError> {
        match self.0.get("policy").map(String::as_str) {
            None => Ok(default),
            Some("holdlast") => Ok(TransientPolicy::HoldLast),
            Some("adversarial") => Ok(TransientPolicy::Adversarial),
            Some(other) => Err(CliError::Usage(format!(
                "policy must be holdlast or adversarial, not `{other}`"
            ))),
        }
    }
}

fn cmd_check(args: CheckArgs) -> Result<ExitCode, CliError> {
    let params = ParamMap::parse(&args)?;
    let need_netlist = || -> Result<Netlist, CliError> {
        let path = args.netlist.as_ref().ok_or_else(|| {
            CliError::Usage(format!(
                "property `{}` needs --netlist",
                args.property
            ))
        })?;
        load_netlist(path)
    };

    match args.property.as_str() {
        "gate_constraints" => {
            let netlist = need_netlist()?;
            let t = params.count("t", 1)? as u32;
            let depth = params.count("depth", 6)? as usize;
            let machine = netlist.composite()?;
            if machine.output_pins().len() != 1 {
                return Err(CliError::Validation(
                    "gate constraint checks need a single-output netlist".into(),
                ));
            }
            let verdict = moorekit::gates::check_gate_constraints(&machine, t, depth);
            report(&args, "gate_constraints", &verdict, Some(&netlist.inputs))
        }
        "stability_lemma" => {
            let t = params.count("t", 1)? as u32;
            let k = params.count("k", 0)?;
            let depth = params.count("depth", 8)? as usize;
            let policy = params.policy(TransientPolicy::HoldLast)?;
            let verdict = checker::check_stability_lemma(t, k, depth, policy);
            report(&args, "stability_lemma", &verdict, None)
        }
        "latch_claim" => {
            let t = params.count("t", 1)? as u32;
            let slack = params.count("slack", 4)? as usize;
            let policy = params.policy(TransientPolicy::HoldLast)?;
            let budget = params.count("budget", checker::DEFAULT_BUDGET)?;
            let outcome = checker::check_latch_claim(t, slack, policy, budget);
            println!(
                "latch_claim (delay 3t+2 = {}): {}",
                3 * t + 2,
                outcome.claim
            );
            println!(
                "tightness probe (3t+1 = {}): {}",
                3 * t + 1,
                outcome.tightness
            );
            report(&args, "latch_claim", &outcome.claim, None)
        }
        "adder_lemma" => {
            let t = params.count("t", 1)? as u32;
            let k = params.count("k", 0)?;
            let depth = params.count("depth", 7)? as usize;
            let verdict = checker::check_adder_lemma(t, k, depth);
            report(&args, "adder_lemma", &verdict, None)
        }
        "ripple_star" => {
            let n = params.count("n", 1)? as usize;
            let t = params.count("t", 1)? as u32;
            let prefix_len = params.count("prefix_len", 4)? as usize;
            let trials = params.count("trials", 10)? as usize;
            let seed = params.count("seed", 0)?;
            let verdict = checker::check_ripple_star(n, t, prefix_len, trials, seed);
            report(&args, "ripple_star", &verdict, None)
        }
        "theorem1" => {
            let netlist = need_netlist()?;
            let depth = params.count("depth", 4)? as usize;
            let trials = params.count("trials", 1000)? as usize;
            let len = params.count("len", 50)? as usize;
            let seed = params.count("seed", 0)?;
            let verdict = theorem1_check(&netlist.spec, depth, trials, len, seed)?;
            report(&args, "theorem1", &verdict, Some(&netlist.inputs))
        }
        other => Err(CliError::UnknownProperty(other.to_string())),
    }
}

/// Prints the verdict line and, on failure, the counterexample as a
/// stimulus document (stdout and optionally `--out`).
fn report(
    args: &CheckArgs,
    name: &str,
    verdict: &Verdict,
    input_order: Option<&[moorekit::PinId]>,
) -> Result<ExitCode, CliError> {
    if name != "latch_claim" {
        println!("{name}: {verdict}");
    }
    match verdict.status {
        Status::Pass => Ok(ExitCode::SUCCESS),
        Status::Budget => Err(CliError::Budget(format!(
            "{name} stopped after {} traces",
            verdict.traces_explored
        ))),
        Status::Fail => {
            if let Some(ce) = &verdict.counterexample {
                let order: Vec<moorekit::PinId> = match input_order {
                    Some(pins) => pins.to_vec(),
                    None => ce.trace.pins().iter().cloned().collect(),
                };
                let rendered = stimulus::format_stimulus(&ce.trace, &order);
                println!("counterexample stimulus:\n{rendered}");
                if ce.choices.iter().any(|c| !c.is_empty()) {
                    let choices: Vec<String> = ce
                        .choices
                        .iter()
                        .map(|c| {
                            c.iter()
                                .map(|b| b.to_string())
                                .collect::<Vec<_>>()
                                .join("/")
                        })
                        .collect();
                    println!("branch choices (start, then one per tick): {}", choices.join(" "));
                }
                if let Some(path) = &args.out {
                    write_file(path, &rendered)?;
                }
            }
            Ok(ExitCode::from(1))
        }
    }
}

fn cmd_info(path: &Path) -> Result<ExitCode, CliError> {
    let netlist = load_netlist(path)?;
    let feedback_free = is_feedback_free(&netlist.spec)?;
    println!("netlist: {}", netlist.name);
    println!(
        "inputs: {}",
        netlist
            .inputs
            .iter()
            .map(|p| p.as_str())
            .collect::<Vec<_>>()
            .join(",")
    );
    println!(
        "outputs: {}",
        netlist
            .outputs
            .iter()
            .map(|p| p.as_str())
            .collect::<Vec<_>>()
            .join(",")
    );
    println!("instances: {}", netlist.instance_count);
    println!("factors: {}", netlist.spec.factors.len());
    println!("feedback-free: {}", if feedback_free { "yes" } else { "no" });
    Ok(ExitCode::SUCCESS)
}

fn cmd_minimize(path: &Path, budget: Option<u64>) -> Result<ExitCode, CliError> {
    let netlist = load_netlist(path)?;
    let budget = budget.unwrap_or(1_000_000) as usize;
    let machine = netlist.composite()?;
    let reachable = reachable_states(&machine, budget).map_err(budget_to_cli)?;
    let minimized = minimize(&machine, budget).map_err(budget_to_cli)?;
    let count = reachable_states(&minimized, budget).map_err(budget_to_cli)?.len();
    println!("reachable states: {}", reachable.len());
    println!("minimized states: {count}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_monoid(path: &Path, budget: Option<u64>) -> Result<ExitCode, CliError> {
    let netlist = load_netlist(path)?;
    let budget = budget.unwrap_or(100_000) as usize;
    let machine = netlist.composite()?;
    let mon = algebra::monoid(&machine, budget).map_err(budget_to_cli)?;
    let stats = algebra::monoid_stats(&mon);
    let combinational = algebra::is_combinational(&machine, budget).map_err(budget_to_cli)?;
    let laws = algebra::monoid_laws(&mon, 1000);
    println!("monoid size: {}", stats.size);
    println!("state universe: {}", stats.state_count);
    println!("distinct generators: {}", stats.generator_count);
    println!("idempotents: {}", stats.idempotents);
    println!(
        "non-identity invertible element: {}",
        if stats.has_nontrivial_unit { "yes" } else { "no" }
    );
    println!(
        "combinational: {}",
        if combinational { "yes" } else { "no" }
    );
    println!("monoid laws: {laws}");
    if laws.is_pass() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

fn budget_to_cli(err: moorekit::Error) -> CliError {
    match err {
        moorekit::Error::StateBudgetExceeded(_) | moorekit::Error::ElementBudgetExceeded(_) => {
            CliError::Budget(err.to_string())
        }
        other => other.into(),
    }
}
