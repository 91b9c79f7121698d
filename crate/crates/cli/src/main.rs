//! `qmv`: simulate noisy readout, mitigate counts, size shot budgets and run
//! experiment grids.
//!
//! Exit codes: 0 on success, 1 on a validation error, 2 when the request is
//! well-formed but infeasible (for example an exhaustive scan over too many
//! qubits).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use qmv_core::ams::{ams_combine, ams_execute, ams_plan, run_ams, MergeRule, SubsetResult};
use qmv_core::budget::budget_report;
use qmv_core::experiment::{run_experiment, ExperimentConfig, NoiseSpec};
use qmv_core::io::{parse_counts, serialize_counts, BitOrder};
use qmv_core::{
    hamming_distance, map_estimate, ml_bruteforce, mode_estimate, qmv, simulate_antipodal,
    simulate_shots, sliding_window_antipodal, tally, weighted_vote, BitString, CountsTable,
    Estimate, Method, NoiseModel, Prior, Seed,
};

#[derive(Parser, Debug)]
#[command(name = "qmv", version, about = "Qubit-wise majority vote readout error mitigation")]
struct Cli {
    /// Master seed for every simulation step
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Which end of a bitstring holds qubit 0 in files and printed strings
    #[arg(long = "bit-order", global = true, value_enum, default_value_t = Order::Left)]
    bit_order: Order,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Order {
    Left,
    Right,
}

impl From<Order> for BitOrder {
    fn from(o: Order) -> Self {
        match o {
            Order::Left => BitOrder::Left,
            Order::Right => BitOrder::Right,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample noisy shots of a bitstring and write a counts file
    Simulate(SimulateArgs),
    /// Estimate the correct output from a counts file
    Mitigate(MitigateArgs),
    /// Shot-budget figures for majority vote
    Bound(BoundArgs),
    /// Adaptive measurement subsetting
    Ams(AmsArgs),
    /// Run an experiment grid from a JSON config
    Experiment(ExperimentArgs),
    /// Hamming distance between two bitstrings
    Distance(DistanceArgs),
}

/// Flip probabilities: `--p` for a symmetric channel, `--p01`/`--p10` for an
/// asymmetric one, or `--noise-file` with per-qubit pairs.
#[derive(Args, Debug, Default)]
struct NoiseArgs {
    /// Symmetric flip probability
    #[arg(long)]
    p: Option<f64>,

    /// Pr(read 1 | true 0)
    #[arg(long)]
    p01: Option<f64>,

    /// Pr(read 0 | true 1)
    #[arg(long)]
    p10: Option<f64>,

    /// JSON noise spec: {"p": ..}, {"p01": .., "p10": ..} or {"per_qubit": [[p01, p10], ..]}
    #[arg(long = "noise-file", value_name = "FILE")]
    noise_file: Option<PathBuf>,
}

impl NoiseArgs {
    fn build(&self, n: usize) -> anyhow::Result<NoiseModel> {
        if let Some(path) = &self.noise_file {
            if self.p.is_some() || self.p01.is_some() || self.p10.is_some() {
                bail!("--noise-file: cannot be combined with --p, --p01 or --p10");
            }
            let spec: NoiseSpec = serde_json::from_slice(&read(path, "--noise-file")?)
                .map_err(|e| anyhow!("--noise-file: {e}"))?;
            return Ok(spec.build(n)?);
        }
        let model = match (self.p, self.p01, self.p10) {
            (Some(p), None, None) => NoiseModel::symmetric(n, p),
            (None, Some(a), Some(b)) => NoiseModel::uniform(n, a, b),
            (None, None, None) => bail!("--p: a noise model is required (--p, --p01/--p10 or --noise-file)"),
            (Some(_), _, _) => bail!("--p: give either --p or --p01/--p10, not both"),
            (None, Some(_), None) => bail!("--p10: required together with --p01"),
            (None, None, Some(_)) => bail!("--p01: required together with --p10"),
        };
        Ok(model?)
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Correct output
    #[arg(long)]
    x0: String,

    #[command(flatten)]
    noise: NoiseArgs,

    /// Number of shots
    #[arg(long)]
    shots: u64,

    /// Each shot reads x0 or its complement with probability 1/2
    #[arg(long)]
    antipodal: bool,

    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MitigateArgs {
    /// Counts file
    #[arg(long)]
    counts: PathBuf,

    /// Estimator: mode, ml, map, qmv, weighted or window
    #[arg(long, default_value = "qmv")]
    method: String,

    #[command(flatten)]
    noise: NoiseArgs,

    /// JSON prior for map: "uniform", {"per_qubit": [..]} or {"table": {"01": 0.5, ..}}
    #[arg(long, value_name = "FILE")]
    prior: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BoundArgs {
    /// Number of qubits
    #[arg(long)]
    n: u64,

    /// Flip probability
    #[arg(long)]
    p: Option<f64>,

    /// Margin 1/2 - p
    #[arg(long)]
    epsilon: Option<f64>,

    /// Evaluate the bound at this shot count instead of the recommended one
    #[arg(long)]
    shots: Option<u64>,
}

#[derive(Args, Debug)]
struct AmsArgs {
    /// Phase-1 counts file (S/2 shots measuring every qubit)
    #[arg(long)]
    counts: Option<PathBuf>,

    /// Total shot budget S; defaults to twice the phase-1 shots
    #[arg(long)]
    shots: Option<u64>,

    /// Margin threshold below which a qubit is re-measured alone
    #[arg(long, default_value_t = 0.01)]
    tau: f64,

    /// Flip-probability multiplier for single-qubit subset circuits
    #[arg(long, default_value_t = qmv_core::ams::DEFAULT_SUBSET_NOISE_FACTOR)]
    factor: f64,

    /// How subset votes combine with phase 1
    #[arg(long, value_enum, default_value_t = Merge::Pool)]
    merge: Merge,

    #[command(flatten)]
    noise: NoiseArgs,

    /// Correct output; subset circuits (and phase 1 without --counts) are simulated
    #[arg(long)]
    x0: Option<String>,

    /// JSON list of measured subset results: [{"qubit": 3, "zeros": 40, "ones": 60}, ..]
    #[arg(long = "subsets", value_name = "FILE")]
    subsets: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Merge {
    Pool,
    Replace,
}

impl From<Merge> for MergeRule {
    fn from(m: Merge) -> Self {
        match m {
            Merge::Pool => MergeRule::Pool,
            Merge::Replace => MergeRule::Replace,
        }
    }
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    /// Experiment config (JSON)
    #[arg(long)]
    config: PathBuf,

    /// Write to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DistanceArgs {
    a: String,
    b: String,
}

fn read(path: &Path, flag: &str) -> anyhow::Result<Vec<u8>> {
    fs::read(path).map_err(|e| anyhow!("{flag}: cannot read {}: {e}", path.display()))
}

fn parse_bits(s: &str, flag: &str, order: BitOrder) -> anyhow::Result<BitString> {
    let bits: BitString = s.parse().map_err(|e| anyhow!("{flag}: {e}"))?;
    Ok(match order {
        BitOrder::Left => bits,
        BitOrder::Right => bits.reversed(),
    })
}

fn show_bits(bits: &BitString, order: BitOrder) -> String {
    match order {
        BitOrder::Left => bits.to_string(),
        BitOrder::Right => bits.reversed().to_string(),
    }
}

fn load_counts(path: &Path, flag: &str, order: BitOrder) -> anyhow::Result<CountsTable> {
    parse_counts(&read(path, flag)?, order).with_context(|| format!("{flag}: {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| anyhow!("--out: cannot write {}: {e}", path.display())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            if !text.ends_with('\n') {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn to_json(value: &impl Serialize) -> String {
    serde_json::to_string_pretty(value).expect("output serializes")
}

#[derive(Serialize)]
struct EstimateOut {
    method: Method,
    estimate: String,
    margins: Vec<f64>,
}

impl EstimateOut {
    fn new(e: &Estimate, order: BitOrder) -> Self {
        EstimateOut {
            method: e.method,
            estimate: show_bits(&e.value, order),
            margins: e.margins.clone(),
        }
    }
}

fn simulate(cli: &Cli, args: &SimulateArgs) -> anyhow::Result<()> {
    let order = cli.bit_order.into();
    let x0 = parse_bits(&args.x0, "--x0", order)?;
    let noise = args.noise.build(x0.len())?;
    let seed = Seed(cli.seed);
    let counts = if args.antipodal {
        simulate_antipodal(&x0, &noise, args.shots, seed)?
    } else {
        simulate_shots(&x0, &noise, args.shots, seed)?
    };
    let text = match cli.format {
        Format::Json => serialize_counts(&counts, order),
        Format::Csv => {
            let mut s = String::from("bitstring,count\n");
            for (k, c) in counts.iter() {
                s.push_str(&format!("{},{c}\n", show_bits(k, order)));
            }
            s
        }
    };
    emit(&text, args.out.as_deref())
}

fn mitigate(cli: &Cli, args: &MitigateArgs) -> anyhow::Result<()> {
    let order: BitOrder = cli.bit_order.into();
    let method: Method = args.method.parse().map_err(|e| anyhow!("--method: {e}"))?;
    let counts = load_counts(&args.counts, "--counts", order)?;
    let n = counts.n();
    let noise = || args.noise.build(n);
    if args.prior.is_some() && method != Method::Map {
        bail!("--prior: only used with --method map");
    }
    let estimate = match method {
        Method::Mode => mode_estimate(&counts)?,
        Method::Qmv => qmv(&tally(&counts)),
        Method::Weighted => weighted_vote(&tally(&counts), &noise()?)?,
        Method::Ml => ml_bruteforce(&counts, &noise()?)?,
        Method::Map => {
            let prior = match &args.prior {
                Some(path) => serde_json::from_slice::<Prior>(&read(path, "--prior")?)
                    .map_err(|e| anyhow!("--prior: {e}"))?,
                None => Prior::Uniform,
            };
            map_estimate(&counts, &noise()?, &prior)?
        }
        Method::Window => {
            let pair = sliding_window_antipodal(&counts)?;
            #[derive(Serialize)]
            struct PairOut {
                method: Method,
                x: String,
                x_complement: String,
                window_margins: Vec<u64>,
            }
            let out = PairOut {
                method,
                x: show_bits(&pair.x, order),
                x_complement: show_bits(&pair.x_complement, order),
                window_margins: pair.window_margins,
            };
            let text = match cli.format {
                Format::Json => to_json(&out),
                Format::Csv => format!("x,x_complement\n{},{}\n", out.x, out.x_complement),
            };
            return emit(&text, None);
        }
        Method::Ams => bail!("--method: use the `ams` subcommand for adaptive measurement subsetting"),
    };
    let out = EstimateOut::new(&estimate, order);
    let text = match cli.format {
        Format::Json => to_json(&out),
        Format::Csv => estimate_csv(&estimate),
    };
    emit(&text, None)
}

fn estimate_csv(e: &Estimate) -> String {
    let mut s = String::from("qubit,bit,margin\n");
    for (q, m) in e.margins.iter().enumerate() {
        s.push_str(&format!("{q},{},{m}\n", u8::from(e.value.get(q))));
    }
    s
}

fn bound(cli: &Cli, args: &BoundArgs) -> anyhow::Result<()> {
    let p = match (args.p, args.epsilon) {
        (Some(p), None) => p,
        (None, Some(eps)) => {
            if !(eps > 0.0 && eps <= 0.5) {
                bail!("--epsilon: {eps} outside (0, 0.5]");
            }
            0.5 - eps
        }
        (Some(_), Some(_)) => bail!("--epsilon: give either --p or --epsilon, not both"),
        (None, None) => bail!("--p: one of --p or --epsilon is required"),
    };
    let flag = if args.epsilon.is_some() { "--epsilon" } else { "--p" };
    let report = budget_report(args.n, p, args.shots).context(flag)?;
    let text = match cli.format {
        Format::Json => to_json(&report),
        Format::Csv => format!(
            "n,p,epsilon,shots,bound_per_qubit,bound_any_qubit,exact_per_qubit,required_shots,target_per_qubit,m3_shots_estimate\n{},{},{},{},{},{},{},{},{},{}\n",
            report.n,
            report.p,
            report.epsilon,
            report.shots,
            report.bound_per_qubit,
            report.bound_any_qubit,
            report.exact_per_qubit,
            report.required_shots,
            report.target_per_qubit,
            report.m3_shots_estimate,
        ),
    };
    emit(&text, None)
}

fn ams(cli: &Cli, args: &AmsArgs) -> anyhow::Result<()> {
    let order: BitOrder = cli.bit_order.into();
    let seed = Seed(cli.seed);
    let merge = args.merge.into();
    let x0 = args
        .x0
        .as_deref()
        .map(|s| parse_bits(s, "--x0", order))
        .transpose()?;
    if x0.is_some() && args.subsets.is_some() {
        bail!("--subsets: cannot be combined with --x0, which simulates the subset circuits");
    }

    let (plan, outcome_estimate, subsets, shots_used) = match (&args.counts, &x0) {
        (None, None) => bail!("--counts: phase-1 counts are required unless --x0 is given"),
        (None, Some(x0)) => {
            let total = args
                .shots
                .ok_or_else(|| anyhow!("--shots: required when phase 1 is simulated"))?;
            let noise = args.noise.build(x0.len())?;
            let (plan, out) = run_ams(x0, &noise, total, args.tau, args.factor, seed, merge)?;
            (plan, out.estimate, out.subsets, out.shots_used)
        }
        (Some(path), _) => {
            let counts = load_counts(path, "--counts", order)?;
            let total = args.shots.unwrap_or(2 * counts.total_shots());
            let noise = args.noise.build(counts.n())?;
            if let Some(x0) = &x0 {
                if x0.len() != counts.n() {
                    bail!("--x0: {} qubits but the counts file has n = {}", x0.len(), counts.n());
                }
            }
            let plan = ams_plan(&tally(&counts), args.tau, total)?;
            match &x0 {
                Some(x0) => {
                    let out = ams_execute(x0, &noise, &plan, args.factor, seed, merge)?;
                    (plan, out.estimate, out.subsets, out.shots_used)
                }
                None => {
                    let subsets: Vec<SubsetResult> = match &args.subsets {
                        Some(p) => serde_json::from_slice(&read(p, "--subsets")?)
                            .map_err(|e| anyhow!("--subsets: {e}"))?,
                        None => Vec::new(),
                    };
                    let est = ams_combine(&plan, &noise, &subsets, args.factor, merge)
                        .context("--subsets")?;
                    let used = plan.phase1_shots + subsets.iter().map(|s| s.zeros + s.ones).sum::<u64>();
                    (plan, est, subsets, used)
                }
            }
        }
    };

    #[derive(Serialize)]
    struct AmsOut<'a> {
        plan: &'a qmv_core::ams::AmsPlan,
        subsets: &'a [SubsetResult],
        shots_used: u64,
        #[serde(flatten)]
        estimate: EstimateOut,
    }
    let text = match cli.format {
        Format::Json => to_json(&AmsOut {
            plan: &plan,
            subsets: &subsets,
            shots_used,
            estimate: EstimateOut::new(&outcome_estimate, order),
        }),
        Format::Csv => {
            let mut s = String::from("qubit,bit,margin,close\n");
            for (q, m) in outcome_estimate.margins.iter().enumerate() {
                s.push_str(&format!(
                    "{q},{},{m},{}\n",
                    u8::from(outcome_estimate.value.get(q)),
                    plan.close_qubits.contains(&q)
                ));
            }
            s
        }
    };
    emit(&text, None)
}

fn experiment(cli: &Cli, args: &ExperimentArgs) -> anyhow::Result<()> {
    let config = ExperimentConfig::from_json(&read(&args.config, "--config")?).context("--config")?;
    let report = run_experiment(&config)?;
    let text = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
    };
    emit(&text, args.out.as_deref())
}

fn distance(cli: &Cli, args: &DistanceArgs) -> anyhow::Result<()> {
    let order = cli.bit_order.into();
    let a = parse_bits(&args.a, "a", order)?;
    let b = parse_bits(&args.b, "b", order)?;
    let d = hamming_distance(&a, &b).context("a, b")?;
    emit(&d.to_string(), None)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a),
        Command::Mitigate(a) => mitigate(cli, a),
        Command::Bound(a) => bound(cli, a),
        Command::Ams(a) => ams(cli, a),
        Command::Experiment(a) => experiment(cli, a),
        Command::Distance(a) => distance(cli, a),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    let infeasible = err
        .chain()
        .filter_map(|e| e.downcast_ref::<qmv_core::Error>())
        .any(qmv_core::Error::is_infeasible);
    if infeasible {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
