//! `cyberseg`: generate, score, solve and export device isolation problems.
//!
//! Results go to stdout as one JSON document; a short human summary goes to
//! stderr. Exit codes: 0 success, 1 usage error, 2 data error, 3 the solver
//! hit its timeout before proving optimality.

use std::fs;
use std::io::{self, Read, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cyberseg_core::ilp::{build_model, emit_lp, validate_assignment, Assignment, IlpMode};
use cyberseg_core::instances::{generate_full_ary_tree, load_instance, load_karate, read_instance, sample_attacked, Rounding};
use cyberseg_core::{evaluate_cut, Algorithm, DeviceId, Instance, ObjectiveMode, ScoreReport, SolveRequest, SolveStatus};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Parser)]
#[command(name = "cyberseg", version, about = "Plan which devices to isolate when part of a network is attacked")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an instance from a generated tree, the karate club graph or a file, and sample attacked devices.
    Gen(GenArgs),
    /// Score the instance after isolating the given devices.
    Score(ScoreArgs),
    /// Choose up to k devices to isolate.
    Solve(SolveArgs),
    /// Write the integer program for the instance in LP format.
    ExportIlp(IlpArgs),
    /// Check an assignment (or a `solve` result) against the integer program.
    ValidateIlp(ValidateArgs),
    /// Run the HTTP service.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Input {
    /// Instance file: JSON, or an edge list without attacked devices.
    #[arg(long, value_name = "PATH")]
    instance: Option<PathBuf>,
    /// Read the instance from standard input.
    #[arg(long)]
    stdin: bool,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Full r-ary tree with N devices.
    #[arg(long, value_name = "N", requires = "branching", conflicts_with_all = ["karate", "instance"])]
    tree: Option<usize>,
    #[arg(long, value_name = "R", requires = "tree")]
    branching: Option<usize>,
    /// The bundled karate club graph.
    #[arg(long, conflicts_with = "instance")]
    karate: bool,
    /// Take the topology from an existing instance or edge list.
    #[arg(long, value_name = "PATH")]
    instance: Option<PathBuf>,
    /// Fraction of devices to mark as attacked.
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = Rounding::HalfEven)]
    rounding: Rounding,
    /// Budget stored in the instance.
    #[arg(long)]
    k: Option<usize>,
    /// Write the instance here instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    input: Input,
    /// Comma-separated device ids to isolate.
    #[arg(long, value_delimiter = ',', value_name = "IDS")]
    isolate: Vec<DeviceId>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    input: Input,
    /// Isolation budget; defaults to the budget stored in the instance.
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = Algorithm::Direct)]
    algo: Algorithm,
    /// Greedy chunk size.
    #[arg(long, default_value_t = 3)]
    x: usize,
    #[arg(long, default_value_t = ObjectiveMode::Snpv)]
    mode: ObjectiveMode,
    /// Do not skip healthy degree-one devices.
    #[arg(long)]
    no_filter: bool,
    /// Seconds before the best cut found so far is returned.
    #[arg(long, default_value_t = 600)]
    timeout: u64,
    /// Worker threads for the exact search.
    #[arg(long, env = "CYBERSEG_JOBS")]
    jobs: Option<usize>,
    /// Also write the result here.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct IlpArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    k: Option<usize>,
    /// snpv: lexicographic objective; cnpv: vulnerable pairs only.
    #[arg(long, default_value_t = ObjectiveMode::Snpv)]
    mode: ObjectiveMode,
    /// Write the LP text here; otherwise it is embedded in the JSON output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = ObjectiveMode::Snpv)]
    mode: ObjectiveMode,
    /// `name value` lines, or the JSON written by `solve`.
    #[arg(long, value_name = "PATH")]
    assignment: PathBuf,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: IpAddr,
    #[arg(long, env = "CYBERSEG_DATA_DIR", default_value = "cyberseg-data")]
    data_dir: PathBuf,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<cyberseg_core::Error> for Failure {
    fn from(e: cyberseg_core::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<ExitCode, Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match cli.command {
        Command::Gen(args) => gen(args),
        Command::Score(args) => score(args),
        Command::Solve(args) => solve(args),
        Command::ExportIlp(args) => export_ilp(args),
        Command::ValidateIlp(args) => validate_ilp(args),
        Command::Serve(args) => serve(args),
    };
    match outcome {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn read_input(input: &Input) -> Result<Instance, Failure> {
    match &input.instance {
        Some(path) => load_instance(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display()))),
        None => {
            let mut text = String::new();
            io::stdin().read_to_string(&mut text)?;
            Ok(read_instance(text.as_bytes())?)
        }
    }
}

fn budget(k: Option<usize>, inst: &Instance) -> Result<usize, Failure> {
    k.or(inst.budget)
        .ok_or_else(|| Failure::Usage("--k is required when the instance has no budget".into()))
}

fn emit(value: &impl Serialize) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Failure::Data(e.to_string()))?;
    text.push('\n');
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn gen(args: GenArgs) -> Outcome {
    let graph = match (args.tree, args.branching, args.karate, &args.instance) {
        (Some(n), Some(r), _, _) => generate_full_ary_tree(n, r).map_err(|e| Failure::Usage(e.to_string()))?,
        (_, _, true, _) => load_karate(),
        (_, _, _, Some(path)) => load_instance(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?.graph,
        _ => return Err(Failure::Usage("one of --tree N --branching R, --karate or --instance is required".into())),
    };
    let attacked = sample_attacked(&graph, args.p, args.seed, args.rounding).map_err(|e| Failure::Usage(e.to_string()))?;
    let inst = Instance::new(graph, attacked, args.k)?;
    eprintln!(
        "{} devices, {} connections, {} attacked",
        inst.graph.device_count(),
        inst.graph.connection_count(),
        inst.attacked.len()
    );
    match args.out {
        Some(path) => {
            write_file(&path, &inst.to_json_string())?;
            emit(&json!({
                "out": path,
                "device_count": inst.graph.device_count(),
                "connection_count": inst.graph.connection_count(),
                "attacked_count": inst.attacked.len(),
            }))?;
        }
        None => {
            io::stdout().write_all(inst.to_json_string().as_bytes())?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn score(args: ScoreArgs) -> Outcome {
    let inst = read_input(&args.input)?;
    let report = evaluate_cut(&inst.graph, &inst.attacked, &args.isolate)?;
    eprintln!(
        "isolating {} device(s): vulnerability {}, healthiness {}, {} component(s)",
        report.isolate.len(),
        report.report.vulnerability,
        report.report.healthiness,
        report.components.len()
    );
    emit(&report)?;
    Ok(ExitCode::SUCCESS)
}

/// Solver output. Timing is left out so identical inputs give identical
/// bytes; it is reported on stderr instead.
#[derive(Debug, Serialize)]
struct SolveOutput {
    chosen: Vec<DeviceId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    chosen_labels: Option<Vec<String>>,
    #[serde(flatten)]
    report: ScoreReport,
    status: SolveStatus,
    subsets_evaluated: u64,
}

fn solve(args: SolveArgs) -> Outcome {
    let inst = read_input(&args.input)?;
    let request = SolveRequest {
        algo: args.algo,
        k: budget(args.k, &inst)?,
        x: args.x,
        mode: args.mode,
        timeout_secs: args.timeout,
        filter: !args.no_filter,
        jobs: args.jobs,
    };
    request.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    let solution = request.run(&inst.graph, &inst.attacked)?;
    let labelled = solution.chosen.iter().any(|&id| inst.graph.label(id).is_some());
    let output = SolveOutput {
        chosen_labels: labelled.then(|| {
            solution
                .chosen
                .iter()
                .map(|&id| inst.graph.label(id).map_or_else(|| id.to_string(), str::to_string))
                .collect()
        }),
        chosen: solution.chosen.clone(),
        report: solution.report,
        status: solution.status,
        subsets_evaluated: solution.subsets_evaluated,
    };
    eprintln!(
        "{} k={}: isolate {:?}; vulnerability {}, healthiness {} ({:?}, {} candidates, {:.3}s)",
        request.algo,
        request.k,
        output.chosen,
        output.report.vulnerability,
        output.report.healthiness,
        output.status,
        output.subsets_evaluated,
        solution.elapsed.as_secs_f64()
    );
    if let Some(path) = &args.out {
        let mut text = serde_json::to_string_pretty(&output).map_err(|e| Failure::Data(e.to_string()))?;
        text.push('\n');
        write_file(path, &text)?;
    }
    emit(&output)?;
    Ok(match solution.status {
        SolveStatus::Optimal => ExitCode::SUCCESS,
        SolveStatus::TimeoutBestEffort => ExitCode::from(3),
    })
}

fn ilp_mode(mode: ObjectiveMode) -> IlpMode {
    match mode {
        ObjectiveMode::Snpv => IlpMode::Lexicographic,
        ObjectiveMode::Cnpv => IlpMode::VulnerabilityOnly,
    }
}

fn export_ilp(args: IlpArgs) -> Outcome {
    let inst = read_input(&args.input)?;
    let model = build_model(&inst.graph, &inst.attacked, budget(args.k, &inst)?, ilp_mode(args.mode))?;
    let lp = emit_lp(&model);
    eprintln!("{} variables, {} rows", model.variable_count(), model.row_count());
    let mut summary = json!({
        "variables": model.variable_count(),
        "rows": model.row_count(),
        "mode": model.mode(),
        "budget": model.budget(),
    });
    match &args.out {
        Some(path) => {
            write_file(path, &lp)?;
            summary["out"] = json!(path);
        }
        None => summary["lp"] = Value::String(lp),
    }
    emit(&summary)?;
    Ok(ExitCode::SUCCESS)
}

fn read_assignment(path: &Path, inst: &Instance) -> Result<Assignment, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    if !text.trim_start().starts_with('{') {
        return Ok(Assignment::parse(&text)?);
    }
    let value: Value = serde_json::from_str(&text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
    let chosen: Vec<DeviceId> = value
        .get("chosen")
        .and_then(|c| serde_json::from_value(c.clone()).ok())
        .ok_or_else(|| Failure::Data(format!("{}: expected a \"chosen\" list of device ids", path.display())))?;
    if let Some(id) = chosen.iter().find(|&&id| !inst.graph.contains(id)) {
        return Err(Failure::Data(format!("{}: unknown device {id}", path.display())));
    }
    Ok(Assignment::from_cut(&inst.graph, &chosen))
}

fn validate_ilp(args: ValidateArgs) -> Outcome {
    let inst = read_input(&args.input)?;
    let model = build_model(&inst.graph, &inst.attacked, budget(args.k, &inst)?, ilp_mode(args.mode))?;
    let assignment = read_assignment(&args.assignment, &inst)?;
    let report = validate_assignment(&model, &assignment, &inst.graph, &inst.attacked)?;
    eprintln!(
        "{} violated constraint(s), objective gap {}",
        report.violated_constraints.len(),
        report.objective_gap
    );
    let mut value = serde_json::to_value(&report).map_err(|e| Failure::Data(e.to_string()))?;
    value["certified"] = json!(report.is_certified());
    emit(&value)?;
    Ok(ExitCode::SUCCESS)
}

fn serve(args: ServeArgs) -> Outcome {
    cyberseg_service::serve_blocking(SocketAddr::new(args.host, args.port), args.data_dir)?;
    Ok(ExitCode::SUCCESS)
}
