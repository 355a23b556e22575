mod output;

use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use pca_duality::dual::{
    check_monotone_class, check_voter_class, solve_monotone_dual, solve_voter_dual, MonotoneDualParams,
    MonotoneDualState, Topology, VoterDualParams, VoterDualState,
};
use pca_duality::duality::{Caps, DualityInstance};
use pca_duality::ergodicity::{
    check_cordkm, check_corvoter3, check_voter_orientations, combine_verdicts, crosscheck_equilibrium,
    estimate_equilibrium, Condition, CrosscheckOptions, EquilibriumOptions, ErgodicityVerdict,
};
use pca_duality::kernel::{relabel_states, validate_kernel};
use pca_duality::lattice::{empirical_cylinder_prob, simulate, Cylinder, InitialCondition, SimulationConfig};
use pca_duality::stats::Estimate;
use pca_duality::{Kernel, ModelSpec, StateRelabeling};

use output::{Envelope, Format, Manifest, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "pca-duality", version)]
#[command(about = "Dual processes, duality checks and equilibrium estimates for probabilistic cellular automata")]
struct Cli {
    /// Base seed for every random stream
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Output file, or `stdout`
    #[arg(long, global = true, default_value = "stdout")]
    out: String,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Serialize)]
struct ModelArgs {
    /// JSON model spec
    #[arg(long)]
    model: PathBuf,

    /// Permutation of the states applied to the kernel, e.g. `2,1`
    #[arg(long, value_delimiter = ',')]
    relabel: Option<Vec<u8>>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ClassArg {
    #[default]
    Voter,
    Monotone,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Check a kernel against the probability invariants
    Validate {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArgs,
    },
    /// Solve for the dual weights and move probabilities
    SolveDual {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t)]
        class: ClassArg,
    },
    /// Run the structural class checks
    Check {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t)]
        class: ClassArg,
    },
    /// Exhaustively verify the duality identities on a ring
    Verify {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t)]
        class: ClassArg,
        /// Ring length
        #[arg(long = "L", default_value_t = 4)]
        length: usize,
        /// Largest step count for the multi-step identity
        #[arg(long, default_value_t = 3)]
        smax: usize,
    },
    /// Forward-simulate the automaton on a ring
    Simulate {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArgs,
        #[arg(long = "L", default_value_t = 200)]
        length: usize,
        #[arg(long, default_value_t = 1_000)]
        steps: u64,
        #[arg(long, default_value_t = 100)]
        replicas: u64,
        /// Product initial measure as a JSON weight list (default uniform)
        #[arg(long)]
        init: Option<String>,
        /// Cylinder event as JSON, e.g. `{"constraints":[{"site":0,"values":[1]}]}`
        #[arg(long)]
        event: Option<String>,
    },
    /// Estimate an equilibrium probability from the killed dual chain
    Equilibrium {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t)]
        class: ClassArg,
        /// Dual start as a JSON list of site sets, one per opinion or level
        #[arg(long, default_value = "[[0]]")]
        cylinder: String,
        #[arg(long, default_value_t = 100_000)]
        replicas: u64,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u64,
        /// Run the dual on a ring of this length instead of the line
        #[arg(long)]
        ring: Option<usize>,
    },
    /// Apply the sufficient ergodicity criteria
    CheckErgodicity {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArgs,
    },
    /// Compare dual estimates with forward simulation from several starts
    Crosscheck {
        #[command(flatten)]
        #[serde(flatten)]
        model: ModelArgs,
        #[arg(long, value_enum, default_value_t)]
        class: ClassArg,
        /// Dual start (repeatable); default `[[0]]`
        #[arg(long)]
        cylinder: Vec<String>,
        #[arg(long = "L", default_value_t = 200)]
        length: usize,
        #[arg(long, default_value_t = 10_000)]
        steps: u64,
        #[arg(long, default_value_t = 1_000)]
        forward_replicas: u64,
        /// Product initial measure as a JSON weight list (repeatable; at least two)
        #[arg(long)]
        measure: Vec<String>,
        #[arg(long, default_value_t = 100_000)]
        replicas: u64,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: u64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Validate { .. } => "validate",
            Command::SolveDual { .. } => "solve-dual",
            Command::Check { .. } => "check",
            Command::Verify { .. } => "verify",
            Command::Simulate { .. } => "simulate",
            Command::Equilibrium { .. } => "equilibrium",
            Command::CheckErgodicity { .. } => "check-ergodicity",
            Command::Crosscheck { .. } => "crosscheck",
        }
    }

    fn model(&self) -> &ModelArgs {
        match self {
            Command::Validate { model }
            | Command::SolveDual { model, .. }
            | Command::Check { model, .. }
            | Command::Verify { model, .. }
            | Command::Simulate { model, .. }
            | Command::Equilibrium { model, .. }
            | Command::CheckErgodicity { model }
            | Command::Crosscheck { model, .. } => model,
        }
    }
}

/// Input problems that are not library errors. Always exit code 2.
#[derive(Debug, thiserror::Error)]
enum Rejection {
    #[error("cannot read {path}: {source}")]
    Unreadable { path: PathBuf, source: std::io::Error },

    #[error("--{flag}: {reason}")]
    Argument { flag: &'static str, reason: String },
}

struct Outcome {
    result: Value,
    /// Rows for CSV output.
    rows: Vec<Value>,
    exit: u8,
}

impl Outcome {
    fn new(result: impl Serialize) -> Result<Self> {
        let result = serde_json::to_value(result)?;
        Ok(Self { rows: vec![result.clone()], result, exit: 0 })
    }

    fn rows_from(mut self, key: &str) -> Self {
        if let Some(Value::Array(items)) = self.result.get(key) {
            self.rows = items.clone();
        }
        self
    }

    fn rejected_if(mut self, rejected: bool) -> Self {
        if rejected {
            self.exit = 2;
        }
        self
    }
}

struct Model {
    spec: ModelSpec,
    kernel: Kernel,
    sha256: String,
}

fn read_spec(args: &ModelArgs) -> Result<(ModelSpec, String)> {
    let bytes = fs::read(&args.model).map_err(|source| Rejection::Unreadable { path: args.model.clone(), source })?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8_lossy(&bytes);
    Ok((ModelSpec::from_json(&text)?, sha256))
}

fn relabel(kernel: Kernel, images: &Option<Vec<u8>>) -> Result<Kernel> {
    match images {
        Some(images) => Ok(relabel_states(&kernel, &StateRelabeling::new(images.clone())?)?),
        None => Ok(kernel),
    }
}

fn load_model(args: &ModelArgs) -> Result<Model> {
    let (spec, sha256) = read_spec(args)?;
    let kernel = relabel(spec.build()?, &args.relabel)?;
    Ok(Model { spec, kernel, sha256 })
}

fn parse_json<T: serde::de::DeserializeOwned>(flag: &'static str, text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Rejection::Argument { flag, reason: e.to_string() }.into())
}

fn voter_start(params: &VoterDualParams, text: &str) -> Result<VoterDualState> {
    let mut sets: Vec<BTreeSet<i64>> = parse_json("cylinder", text)?;
    if sets.len() > params.opinions() {
        return Err(Rejection::Argument {
            flag: "cylinder",
            reason: format!("{} sets given, the model has {} opinions", sets.len(), params.opinions()),
        }
        .into());
    }
    sets.resize(params.opinions(), BTreeSet::new());
    Ok(params.state(sets)?)
}

fn monotone_start(params: &MonotoneDualParams, text: &str) -> Result<MonotoneDualState> {
    let mut sets: Vec<Vec<i64>> = parse_json("cylinder", text)?;
    let levels = params.states - 1;
    if sets.is_empty() || sets.len() > levels {
        return Err(Rejection::Argument {
            flag: "cylinder",
            reason: format!("expected 1..={levels} nested sets, got {}", sets.len()),
        }
        .into());
    }
    // x(z) <= k forces x(z) <= k' for k' > k, so missing levels repeat the last set
    let last = sets.last().cloned().unwrap_or_default();
    sets.resize(levels, last);
    Ok(params.chain(&sets)?)
}

/// Every applicable criterion, combined. Kernels outside both classes give
/// an unknown verdict listing why each criterion did not apply.
fn ergodicity(model: &Model) -> ErgodicityVerdict {
    let mut verdicts = Vec::new();
    let mut skipped = Vec::new();
    if let ModelSpec::Dk { a } = &model.spec {
        match check_cordkm(a[0], a[1], a[2]) {
            Ok(v) => verdicts.push(("domany-kinzel".to_string(), v)),
            Err(e) => skipped.push(("domany-kinzel", e.to_string())),
        }
    }
    match check_voter_orientations(&model.kernel) {
        Ok(v) => verdicts.push(("voter".to_string(), v)),
        Err(e) => skipped.push(("voter", e.to_string())),
    }
    match check_corvoter3(&model.kernel) {
        Ok(v) => verdicts.push(("monotone".to_string(), v)),
        Err(e) => skipped.push(("monotone", e.to_string())),
    }
    let mut combined = combine_verdicts(verdicts);
    for (source, reason) in skipped {
        combined.conditions.push(Condition { name: format!("{source}: applicable"), holds: false, detail: reason });
    }
    combined
}

fn run(cli: &Cli) -> Result<(Outcome, String)> {
    let caps = Caps::default();
    let command = &cli.command;
    let args = command.model();
    if let Command::Validate { .. } = command {
        let (spec, sha) = read_spec(args)?;
        let report = match &spec {
            ModelSpec::Raw { states, p } => validate_kernel(*states, p),
            other => relabel(other.build()?, &args.relabel)?.validate(),
        };
        let valid = report.valid;
        return Ok((Outcome::new(report)?.rejected_if(!valid), sha));
    }
    let model = load_model(args)?;
    let kernel = &model.kernel;
    let outcome = match command {
        Command::Validate { .. } => unreachable!(),
        Command::SolveDual { class: ClassArg::Voter, .. } => {
            Outcome::new(solve_voter_dual(kernel)?)?.rows_from("opinions")
        }
        Command::SolveDual { class: ClassArg::Monotone, .. } => {
            Outcome::new(solve_monotone_dual(kernel)?)?.rows_from("levels")
        }
        Command::Check { class, .. } => {
            let (value, passed) = match class {
                ClassArg::Voter => {
                    let r = check_voter_class(kernel);
                    (serde_json::to_value(&r)?, r.summary.passed)
                }
                ClassArg::Monotone => {
                    let r = check_monotone_class(kernel);
                    (serde_json::to_value(&r)?, r.summary.passed)
                }
            };
            Outcome::new(value)?.rows_from("checks").rejected_if(!passed)
        }
        Command::Verify { class, length, smax, .. } => {
            let inst = match class {
                ClassArg::Voter => DualityInstance::build(kernel, &solve_voter_dual(kernel)?, *length, &caps)?,
                ClassArg::Monotone => DualityInstance::build(kernel, &solve_monotone_dual(kernel)?, *length, &caps)?,
            };
            Outcome::new(inst.report(*smax)?)?
        }
        Command::Simulate { length, steps, replicas, init, event, .. } => {
            let m = kernel.states();
            let initial = match init {
                Some(text) => InitialCondition::Product { length: *length, weights: parse_json("init", text)? },
                None => InitialCondition::uniform(m, *length),
            };
            let config = SimulationConfig { steps: *steps, replicas: *replicas, seed: cli.seed, snapshot_every: None };
            let samples = simulate(&initial, kernel, &config)?;
            let densities: Vec<Value> = (1..=m as u8)
                .map(|s| {
                    let per: Vec<f64> = samples
                        .finals
                        .iter()
                        .map(|c| c.cells().iter().filter(|&&x| x == s).count() as f64 / c.len() as f64)
                        .collect();
                    let n = per.len() as f64;
                    let mean = per.iter().sum::<f64>() / n;
                    let var = if per.len() > 1 {
                        per.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
                    } else {
                        0.0
                    };
                    json!({"state": s, "density": mean, "stderr": (var / n).sqrt()})
                })
                .collect();
            let event: Option<Estimate> = match event {
                Some(text) => Some(empirical_cylinder_prob(&samples, &parse_json::<Cylinder>("event", text)?)?),
                None => None,
            };
            let result = json!({
                "length": length,
                "steps": steps,
                "replicas": replicas,
                "densities": densities,
                "event": event,
            });
            Outcome::new(result)?.rows_from("densities")
        }
        Command::Equilibrium { class, cylinder, replicas, max_steps, ring, .. } => {
            let opts = EquilibriumOptions {
                replicas: *replicas,
                max_steps: *max_steps,
                seed: cli.seed,
                topology: ring.map_or(Topology::Line, Topology::Ring),
            };
            let estimate = match class {
                ClassArg::Voter => {
                    let params = solve_voter_dual(kernel)?;
                    estimate_equilibrium(&params, &voter_start(&params, cylinder)?, &opts)?
                }
                ClassArg::Monotone => {
                    let params = solve_monotone_dual(kernel)?;
                    estimate_equilibrium(&params, &monotone_start(&params, cylinder)?, &opts)?
                }
            };
            Outcome::new(estimate)?
        }
        Command::CheckErgodicity { .. } => Outcome::new(ergodicity(&model))?.rows_from("conditions"),
        Command::Crosscheck {
            class, cylinder, length, steps, forward_replicas, measure, replicas, max_steps, ..
        } => {
            let m = kernel.states();
            let initial_measures = if measure.is_empty() {
                // mostly state 1 against mostly state M
                let lean = |top: usize| (0..m).map(|s| if s == top { 0.9 } else { 0.1 / (m - 1) as f64 }).collect();
                vec![lean(0), lean(m - 1)]
            } else {
                measure.iter().map(|t| parse_json("measure", t)).collect::<Result<Vec<Vec<f64>>>>()?
            };
            let starts: Vec<String> = if cylinder.is_empty() { vec!["[[0]]".into()] } else { cylinder.clone() };
            let opts = CrosscheckOptions {
                length: *length,
                steps: *steps,
                forward_replicas: *forward_replicas,
                initial_measures,
                dual: EquilibriumOptions {
                    replicas: *replicas,
                    max_steps: *max_steps,
                    seed: cli.seed,
                    topology: Topology::Line,
                },
            };
            let verdict = ergodicity(&model).verdict;
            let report = match class {
                ClassArg::Voter => {
                    let params = solve_voter_dual(kernel)?;
                    let a = starts.iter().map(|t| voter_start(&params, t)).collect::<Result<Vec<_>>>()?;
                    crosscheck_equilibrium(kernel, &params, &a, &opts, verdict)?
                }
                ClassArg::Monotone => {
                    let params = solve_monotone_dual(kernel)?;
                    let a = starts.iter().map(|t| monotone_start(&params, t)).collect::<Result<Vec<_>>>()?;
                    crosscheck_equilibrium(kernel, &params, &a, &opts, verdict)?
                }
            };
            if let Some(w) = &report.warning {
                eprintln!("warning: {w}");
            }
            let mut outcome = Outcome::new(&report)?.rows_from("rows");
            for (row, start) in outcome.rows.iter_mut().zip(&starts) {
                row["cylinder"] = json!(start);
            }
            outcome
        }
    };
    Ok((outcome, model.sha256))
}

/// Exit code and structured description of a failure.
fn classify(err: &anyhow::Error) -> (u8, Value) {
    let mut reason = json!({"message": err.to_string()});
    if let Some(e) = err.downcast_ref::<pca_duality::Error>() {
        if let pca_duality::Error::Spec(inner) = e {
            reason["line"] = json!(inner.line());
            reason["column"] = json!(inner.column());
        }
        let code = if e.is_rejection() { 2 } else { 1 };
        reason["kind"] = json!(if code == 2 { "rejected" } else { "internal" });
        return (code, reason);
    }
    if err.downcast_ref::<Rejection>().is_some() {
        reason["kind"] = json!("rejected");
        return (2, reason);
    }
    reason["kind"] = json!("internal");
    (1, reason)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("{}", json!({"error": {"kind": "internal", "message": e.to_string()}}));
            return ExitCode::from(1);
        }
    }
    let started = Instant::now();
    let result = run(&cli).and_then(|(outcome, sha256)| {
        let params = match serde_json::to_value(&cli.command)? {
            Value::Object(map) => map.into_iter().next().map(|(_, v)| v).unwrap_or(Value::Null),
            other => other,
        };
        let envelope = Envelope {
            schema_version: SCHEMA_VERSION,
            manifest: Manifest {
                subcommand: cli.command.name().into(),
                model_sha256: sha256,
                seed: cli.seed,
                params,
                version: env!("CARGO_PKG_VERSION").into(),
                threads: rayon::current_num_threads(),
                wall_clock_seconds: started.elapsed().as_secs_f64(),
            },
            result: outcome.result,
        };
        output::emit(&output::render(&envelope, &outcome.rows, cli.format)?, &cli.out)?;
        Ok(outcome.exit)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            let (code, reason) = classify(&err);
            eprintln!("{}", json!({"error": reason}));
            ExitCode::from(code)
        }
    }
}
