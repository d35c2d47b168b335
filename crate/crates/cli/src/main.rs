//! `liftcut` command-line driver.
//!
//! Every subcommand prints `#config {json}` with its resolved options as the
//! first line of standard output.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, ColorChoice, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use liftcut::conic_ir::{export_model, import_model};
use liftcut::core_types::{FractionalPoint, Partition};
use liftcut::experiments::{
    batch_csv, build_formulation, cut_loop, generate_instance_scaled, report, run_batch, run_experiment, BatchConfig,
    FixedCostScale, Method, PortfolioInstance,
};
use liftcut::lifted_cuts::separate;
use liftcut::relaxation_solver::{
    format_solution, solve_mip_bruteforce, solve_relaxation, DEFAULT_MAX_BINARIES, DEFAULT_TOL,
};
use liftcut::suites;
use liftcut::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_ORACLE: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "liftcut", version, about = "Lifted supermodular cuts for rank-one quadratic sets")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Generate a random portfolio instance.
    Generate(GenerateArgs),
    /// Write one of the three formulations of an instance as a .cqm model.
    Build(BuildArgs),
    /// Solve a .cqm model (continuous relaxation, or enumeration with --mip).
    Solve(SolveArgs),
    /// Run the cut loop on an instance and print the per-round history.
    Cuts(CutsArgs),
    /// Separate a point given as JSON {"x": [...], "y": [...], "t": ...}.
    Separate(SeparateArgs),
    /// Run a randomized oracle suite; exits 4 on any violation.
    OracleCheck(OracleArgs),
    /// Compare the three formulations on one instance or a batch grid.
    Experiment(ExperimentArgs),
    /// Convert between a JSON instance and a .cqm model.
    Export(ExportArgs),
}

#[derive(Args, Debug, Serialize)]
struct GenerateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, allow_hyphen_values = true)]
    rho: f64,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fixed-cost scaling: "n" for α(e'b)/n, "n2" for α(e'b)/n².
    #[arg(long, default_value = "n", value_parser = parse_scale)]
    fixed_cost: String,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct BuildArgs {
    /// basic, persp or super
    #[arg(long, default_value = "super")]
    method: String,
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SolveArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Enumerate binary assignments instead of relaxing them.
    #[arg(long)]
    mip: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_BINARIES)]
    max_binaries: usize,
}

#[derive(Args, Debug, Serialize)]
struct CutsArgs {
    #[arg(short, long)]
    input: PathBuf,
    #[arg(long, default_value_t = 100)]
    max_rounds: usize,
    /// Write the final model with its cuts here.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
struct SeparateArgs {
    #[arg(short, long)]
    input: PathBuf,
    /// Sign of each index, e.g. "++-"; all positive when omitted.
    #[arg(long)]
    partition: Option<String>,
}

#[derive(Args, Debug, Serialize)]
struct OracleArgs {
    /// hull, duality, validity or template
    #[arg(long)]
    suite: String,
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug, Serialize)]
struct ExperimentArgs {
    /// Batch grid as JSON.
    #[arg(long, conflicts_with = "input", required_unless_present = "input")]
    batch: Option<PathBuf>,
    /// A single instance.
    #[arg(short, long)]
    input: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, default_value_t = DEFAULT_MAX_BINARIES)]
    max_binaries: usize,
    #[arg(long, default_value_t = 100)]
    max_rounds: usize,
}

#[derive(Args, Debug, Serialize)]
struct ExportArgs {
    /// A .json instance or a .cqm model written by this command.
    #[arg(short, long)]
    input: PathBuf,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Formulation used for JSON to .cqm.
    #[arg(long, default_value = "super")]
    method: String,
}

fn parse_scale(s: &str) -> Result<String, String> {
    match s {
        "n" | "n2" => Ok(s.to_string()),
        _ => Err("expected `n` or `n2`".into()),
    }
}

enum Failure {
    Lib(Error),
    Io(PathBuf, std::io::Error),
    Oracle(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Outcome = Result<(), Failure>;

struct Out {
    text: String,
}

impl Out {
    fn line(&mut self, s: impl AsRef<str>) {
        self.text.push_str(s.as_ref());
        self.text.push('\n');
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn write_or_print(path: &Option<PathBuf>, body: &str, out: &mut Out) -> Outcome {
    match path {
        Some(p) => fs::write(p, body).map_err(|e| Failure::Io(p.clone(), e)),
        None => {
            out.text.push_str(body);
            if !body.ends_with('\n') {
                out.text.push('\n');
            }
            Ok(())
        }
    }
}

fn load_instance(path: &Path) -> Result<PortfolioInstance, Failure> {
    Ok(PortfolioInstance::from_json(&read(path)?)?)
}

const INSTANCE_TAG: &str = "# instance ";

fn run(cmd: &Command, out: &mut Out) -> Outcome {
    match cmd {
        Command::Generate(a) => {
            let scale = if a.fixed_cost == "n2" { FixedCostScale::PerAssetSquared } else { FixedCostScale::PerAsset };
            let inst = generate_instance_scaled(a.n, a.r, a.rho, a.delta, a.alpha, a.seed, scale)?;
            if !inst.is_feasible() {
                eprintln!("warning: no single asset meets the return target; the instance is infeasible");
            }
            write_or_print(&a.output, &inst.to_json(), out)
        }
        Command::Build(a) => {
            let method: Method = a.method.parse()?;
            let inst = load_instance(&a.input)?;
            let form = build_formulation(&inst, method);
            write_or_print(&a.output, &export_model(&form.model), out)
        }
        Command::Solve(a) => {
            let model = import_model(&read(&a.input)?)?;
            let res =
                if a.mip { solve_mip_bruteforce(&model, a.max_binaries)? } else { solve_relaxation(&model, a.tol)? };
            let k = &res.kkt_residuals;
            out.line(format!("# status {:?}", res.status));
            out.line(format!("# objective {:.16e}", res.objective));
            out.line(format!("# residuals primal {:.3e} dual {:.3e} gap {:.3e}", k.primal_inf, k.dual_inf, k.gap));
            out.text.push_str(&format_solution(&model, &res));
            Ok(())
        }
        Command::Cuts(a) => {
            let inst = load_instance(&a.input)?;
            let mut form = build_formulation(&inst, Method::Supermodular);
            let res = cut_loop(&mut form, a.max_rounds)?;
            out.line("round,value,cuts_added");
            for h in &res.history {
                out.line(format!("{},{:.12e},{}", h.round, h.value, h.cuts_added));
            }
            out.line(format!("# cuts {} value {:.12e} time_s {:.6}", res.cuts_added, res.value, res.time_s));
            if let Some(p) = &a.output {
                fs::write(p, export_model(&form.model)).map_err(|e| Failure::Io(p.clone(), e))?;
            }
            Ok(())
        }
        Command::Separate(a) => {
            #[derive(Deserialize)]
            struct PointFile {
                x: Vec<f64>,
                y: Vec<f64>,
                #[serde(default)]
                t: f64,
            }
            let pf: PointFile =
                serde_json::from_str(&read(&a.input)?).map_err(|e| Error::Input(format!("point JSON: {e}")))?;
            let point = FractionalPoint::new(pf.x, pf.y, pf.t)?;
            let p = match &a.partition {
                None => Partition::positive(point.n()),
                Some(s) => parse_partition(s, point.n())?,
            };
            let res = separate(&point, &p);
            out.line(serde_json::to_string_pretty(&res).expect("result serializes"));
            Ok(())
        }
        Command::OracleCheck(a) => {
            let rep = match a.suite.as_str() {
                "hull" => suites::hull_suite(a.n, a.trials, a.seed)?,
                "duality" => suites::duality_suite(a.n, a.trials, a.seed)?,
                "validity" => suites::validity_suite(a.n, a.trials, a.seed)?,
                "template" => suites::template_suite(a.n, a.trials, a.seed)?,
                s => return Err(Error::Input(format!("unknown suite `{s}`")).into()),
            };
            out.line(serde_json::to_string(&rep).expect("report serializes"));
            if rep.passed() {
                Ok(())
            } else {
                Err(Failure::Oracle(format!("{} violations in suite {}", rep.violations, rep.suite)))
            }
        }
        Command::Experiment(a) => {
            if let Some(path) = &a.input {
                let inst = load_instance(path)?;
                let res = run_experiment(&inst, a.max_binaries, a.max_rounds)?;
                return write_or_print(&a.output, &report(&inst, res.opt, &res.rows), out);
            }
            let path = a.batch.as_ref().expect("clap requires --batch or --input");
            let cfg: BatchConfig =
                serde_json::from_str(&read(path)?).map_err(|e| Error::Input(format!("batch JSON: {e}")))?;
            out.line(format!("#batch {}", serde_json::to_string(&cfg).expect("config serializes")));
            let res = run_batch(&cfg, a.jobs)?;
            for s in &res.shortfalls {
                eprintln!(
                    "warning: r={} rho={} alpha={} has only {} feasible seeds in the scanned range",
                    s.r, s.rho, s.alpha_fc, s.found
                );
            }
            write_or_print(&a.output, &batch_csv(&res.cases), out)
        }
        Command::Export(a) => {
            let text = read(&a.input)?;
            if text.trim_start().starts_with('{') {
                let inst = PortfolioInstance::from_json(&text)?;
                let method: Method = a.method.parse()?;
                let form = build_formulation(&inst, method);
                let json = serde_json::to_string(&inst).expect("instance serializes");
                let body = format!("{INSTANCE_TAG}{json}\n# method {}\n{}", a.method, export_model(&form.model));
                write_or_print(&a.output, &body, out)
            } else {
                import_model(&text)?;
                let line = text
                    .lines()
                    .find_map(|l| l.strip_prefix(INSTANCE_TAG))
                    .ok_or_else(|| Error::Input("model carries no embedded instance".into()))?;
                let inst = PortfolioInstance::from_json(line)?;
                write_or_print(&a.output, &inst.to_json(), out)
            }
        }
    }
}

fn parse_partition(s: &str, n: usize) -> Result<Partition, Error> {
    let signs: Vec<bool> = s
        .chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| match c {
            '+' => Ok(true),
            '-' => Ok(false),
            _ => Err(Error::Input(format!("partition uses `+` and `-`, got `{c}`"))),
        })
        .collect::<Result<_, _>>()?;
    if signs.len() != n {
        return Err(Error::Input(format!("partition has {} signs for {n} indices", signs.len())));
    }
    Partition::from_signs(&signs)
}

fn main() -> ExitCode {
    let color = if std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty()) {
        ColorChoice::Never
    } else {
        ColorChoice::Auto
    };
    let matches = match Cli::command().color(color).try_get_matches() {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_USAGE) } else { ExitCode::SUCCESS };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let config = serde_json::to_string(&cli.command).expect("config serializes");
    let mut out = Out { text: format!("#config {config}\n") };
    let result = run(&cli.command, &mut out);
    print!("{}", out.text);
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::Solver(_) | Error::Oracle(_) => EXIT_SOLVER,
                _ => EXIT_INPUT,
            };
            ExitCode::from(code)
        }
        Err(Failure::Io(p, e)) => {
            eprintln!("error: {}: {e}", p.display());
            ExitCode::from(EXIT_INPUT)
        }
        Err(Failure::Oracle(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ORACLE)
        }
    }
}
