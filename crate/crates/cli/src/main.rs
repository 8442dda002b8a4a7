//! `omcheck`: Young-function queries, norms, condition checks and the experiment catalog.
//!
//! Exit codes: 0 success (condition holds, experiments pass), 1 a condition or an
//! experiment fails, 2 usage, configuration or numerical error.

mod config;
mod function;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use log::info;
use orlicz_morrey::conditions::{self, ConditionReport, SampleGrid};
use orlicz_morrey::experiments::{self, default_ball_family, ExperimentReport};
use orlicz_morrey::norms::{luxemburg_norm, morrey_norm, weak_norm, NormResult};
use orlicz_morrey::params::Descriptor;
use orlicz_morrey::young::{self, TypeBound, YoungFunction};

use config::{Config, Format, DEFAULT_SEED};
use function::FunctionSpec;

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser, Debug)]
#[command(name = "omcheck", version, about = "Numerical checks for weighted Orlicz-Morrey spaces")]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Corpus seed; overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for `verify`, output file for `report`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Machine-readable format written to standard output.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Overrides the number of grid points.
    #[arg(long, global = true)]
    grid_points: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Young-function queries, e.g. `young invert power p=2 s=9`.
    Young {
        #[arg(value_enum)]
        action: YoungAction,
        /// Family descriptor plus `r=` (eval, complement) or `s=` (invert).
        #[arg(required = true, num_args = 1..)]
        descriptor: Vec<String>,
    },
    /// Norm of a function, e.g. `norm orlicz indicator center=0 radius=1`.
    Norm {
        #[arg(value_enum)]
        kind: NormKind,
        /// Function descriptor; defaults to `function` in the configuration.
        function: Vec<String>,
    },
    /// Runs one condition checker; exit code 0 iff it holds.
    Check {
        #[arg(value_enum)]
        condition: ConditionName,
        /// Extra parameters, e.g. `p=2` for `ap`, `lower-type`, `upper-type`.
        params: Vec<String>,
    },
    /// Runs a catalog experiment, or `all`.
    Verify { name: String },
    /// Re-emits a JSON-lines report file as CSV (or JSON lines) with summary lines.
    Report { input: PathBuf },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum YoungAction {
    Eval,
    Invert,
    Complement,
    Indices,
    Classify,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum NormKind {
    Orlicz,
    Weak,
    Morrey,
    MorreyWeak,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ConditionName {
    Condmnec,
    Es1,
    Wgtcond,
    Wgtcondcom,
    Supremal,
    IntegralOrlicz,
    Gclass,
    Delta2,
    Nabla2,
    Ap,
    LowerType,
    UpperType,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<String> for Failure {
    fn from(message: String) -> Self {
        Failure { code: EXIT_USAGE, message }
    }
}

impl From<orlicz_morrey::Error> for Failure {
    fn from(e: orlicz_morrey::Error) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_config(cli: &Cli) -> Result<Config, String> {
    match &cli.config {
        Some(p) => Config::load(p),
        None => Ok(Config::default()),
    }
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Young { action, descriptor } => cmd_young(*action, descriptor),
        Command::Norm { kind, function } => cmd_norm(cli, *kind, function),
        Command::Check { condition, params } => cmd_check(cli, *condition, params),
        Command::Verify { name } => cmd_verify(cli, name),
        Command::Report { input } => cmd_report(cli, input),
    }
}

/// Splits `r=` / `s=` arguments off a Young-function descriptor.
fn young_with_args(tokens: &[String]) -> Result<(YoungFunction, Option<f64>, Option<f64>), String> {
    let mut d = Descriptor::from_tokens(tokens.iter().map(String::as_str)).map_err(|e| e.to_string())?;
    let r = d.params.remove("r");
    let s = d.params.remove("s");
    let phi = YoungFunction::from_descriptor(&d).map_err(|e| e.to_string())?;
    Ok((phi, r, s))
}

fn cmd_young(action: YoungAction, tokens: &[String]) -> CmdResult {
    let (phi, r, s) = young_with_args(tokens)?;
    let need = |v: Option<f64>, k: &str| v.ok_or_else(|| format!("`{k}=` is required for this query"));
    let mut out = std::io::stdout().lock();
    let mut line = |s: String| writeln!(out, "{s}").map_err(|e| Failure::from(e.to_string()));
    line(format!("family: {}", phi.label()))?;
    match action {
        YoungAction::Eval => {
            let r = need(r, "r")?;
            line(format!("phi({r}) = {}", young::eval(&phi, r)?))?;
        }
        YoungAction::Invert => {
            let s = need(s, "s")?;
            line(format!("phi^-1({s}) = {}", young::inverse(&phi, s)?))?;
        }
        YoungAction::Complement => {
            let c = young::complement(&phi);
            line(format!("complement: {}", c.label()))?;
            if let Some(r) = r {
                line(format!("complement({r}) = {}", young::eval(&c, r)?))?;
            }
        }
        YoungAction::Indices => {
            let idx = young::dilation_indices(&phi);
            line(format!("indices: ({:.6}, {:.6})", idx.lower, idx.upper))?;
        }
        YoungAction::Classify => {
            let d2 = young::check_delta2(&phi);
            let n2 = young::check_nabla2(&phi);
            let idx = young::dilation_indices(&phi);
            line(format!("delta2: {} (constant {})", d2.holds, d2.constant))?;
            match n2.witness_k {
                Some(k) => line(format!("nabla2: true (k = {k})"))?,
                None => line("nabla2: false".to_string())?,
            }
            line(format!("indices: ({:.6}, {:.6})", idx.lower, idx.upper))?;
        }
    }
    Ok(0)
}

fn cmd_norm(cli: &Cli, kind: NormKind, tokens: &[String]) -> CmdResult {
    let cfg = load_config(cli)?;
    let model = cfg.model(cli.grid_points)?;
    let text = if tokens.is_empty() {
        cfg.function.clone().ok_or_else(|| "no function given on the command line or in the configuration".to_string())?
    } else {
        tokens.join(" ")
    };
    let f = FunctionSpec::parse(&text)?.sample(&model.grid)?;
    let result: NormResult = match kind {
        NormKind::Orlicz => luxemburg_norm(&f, &model.phi, &model.w, None)?,
        NormKind::Weak => weak_norm(&f, &model.phi, &model.w, None)?,
        NormKind::Morrey | NormKind::MorreyWeak => {
            let balls = default_ball_family(&model.grid);
            let weak = matches!(kind, NormKind::MorreyWeak);
            morrey_norm(&f, &model.phi, &model.shape1, &model.w, &balls, weak)?
        }
    };
    let mut out = std::io::stdout().lock();
    let res = if cli.format == Some(Format::Jsonl) {
        writeln!(out, "{}", serde_json::to_string(&result).map_err(|e| e.to_string())?)
    } else {
        let ball = match result.achieved_ball {
            Some(b) => format!("B({}, {})", b.center, b.radius),
            None => "none".into(),
        };
        writeln!(
            out,
            "value: {}\nachieved_ball: {ball}\nmodular_at_value: {}\niterations: {}",
            result.value, result.modular_at_value, result.iterations
        )
    };
    res.map_err(|e| e.to_string())?;
    Ok(0)
}

fn param(params: &[String], key: &str) -> Result<Option<f64>, String> {
    let d = Descriptor::from_tokens(std::iter::once("params").chain(params.iter().map(String::as_str)))
        .map_err(|e| e.to_string())?;
    d.expect_only(&[key]).map_err(|e| e.to_string())?;
    Ok(d.params.get(key).copied())
}

fn cmd_check(cli: &Cli, condition: ConditionName, params: &[String]) -> CmdResult {
    use ConditionName as C;
    let cfg = load_config(cli)?;
    let m = cfg.model(cli.grid_points)?;
    let samples = SampleGrid::default();
    let p_or_index = || -> Result<f64, String> {
        Ok(param(params, "p")?.unwrap_or_else(|| young::dilation_indices(&m.phi).lower))
    };
    if !matches!(condition, C::Ap | C::LowerType | C::UpperType) && !params.is_empty() {
        return Err(format!("unexpected parameters {params:?}").into());
    }
    let report: ConditionReport = match condition {
        C::Condmnec => conditions::check_pointwise_domination(&m.shape1, &m.shape2, &samples)?,
        C::Es1 => conditions::check_doubling_shift(&m.shape1, &m.shape2, &samples)?,
        C::Wgtcond => conditions::check_integral_condition(&m.shape1, &m.shape2, &samples, false)?,
        C::Wgtcondcom => conditions::check_integral_condition(&m.shape1, &m.shape2, &samples, true)?,
        C::Supremal => conditions::check_supremal_condition(&m.phi, &m.shape1, &m.shape2, &samples)?,
        C::IntegralOrlicz => conditions::check_integral_condition_orlicz(&m.phi, &m.shape1, &m.shape2, &samples)?,
        C::Gclass => conditions::check_g_class(&m.shape1, &m.phi, &m.w, &samples)?,
        C::Delta2 => conditions::delta2_report(&m.phi),
        C::Nabla2 => conditions::nabla2_report(&m.phi),
        C::Ap => conditions::ap_report(&m.w, p_or_index()?, &m.grid)?,
        C::LowerType => conditions::type_report(&m.phi, p_or_index()?, TypeBound::Lower)?,
        C::UpperType => {
            let p = param(params, "p")?.unwrap_or_else(|| young::dilation_indices(&m.phi).upper);
            conditions::type_report(&m.phi, p, TypeBound::Upper)?
        }
    };
    let mut out = std::io::stdout().lock();
    let res = if cli.format == Some(Format::Jsonl) {
        writeln!(out, "{}", serde_json::to_string(&report).map_err(|e| e.to_string())?)
    } else {
        writeln!(
            out,
            "condition: {}\nverdict: {}\nconstant: {}\nworst_point: x={} r={}\nsamples: {}\ndetail: {}",
            report.condition_name,
            report.verdict,
            report.sup_constant,
            report.worst_point.x,
            report.worst_point.r,
            report.samples,
            report.detail
        )
    };
    res.map_err(|e| e.to_string())?;
    Ok(if report.holds() { 0 } else { EXIT_FAIL })
}

fn write_reports(reports: &[ExperimentReport], format: Format, out: &mut impl Write) -> Result<(), String> {
    match format {
        Format::Csv => experiments::write_csv(reports, out),
        Format::Jsonl => experiments::write_jsonl(reports, out),
    }
    .map_err(|e| e.to_string())
}

/// Summary lines go to stdout unless a machine-readable format takes it.
fn emit(cli: &Cli, cfg: &Config, reports: &[ExperimentReport]) -> Result<(), String> {
    let format = cli.format.or(cfg.output.format);
    for r in reports {
        if format.is_some() {
            eprintln!("{}", r.summary_line());
        } else {
            println!("{}", r.summary_line());
        }
    }
    if let Some(f) = format {
        write_reports(reports, f, &mut std::io::stdout().lock())?;
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, name: &str) -> CmdResult {
    let cfg = load_config(cli)?;
    let seed = cli.seed.or(cfg.seed).unwrap_or(DEFAULT_SEED);
    let specs = cfg.experiment_specs(cli.grid_points, seed)?;
    let selected: Vec<_> = if name == "all" {
        specs
    } else {
        let known: Vec<String> = specs.iter().map(|s| s.name.clone()).collect();
        let chosen: Vec<_> = specs.into_iter().filter(|s| s.name == name).collect();
        if chosen.is_empty() {
            return Err(format!("unknown experiment `{name}`; available: all, {}", known.join(", ")).into());
        }
        chosen
    };
    let mut reports = Vec::with_capacity(selected.len());
    for spec in &selected {
        info!("running {} ({} points, seed {seed})", spec.name, spec.grid.n_points());
        reports.push(experiments::run(spec).map_err(|e| format!("{}: {e}", spec.name))?);
    }
    if let Some(dir) = cli.out.as_ref().or(cfg.output.path.as_ref()) {
        write_to_dir(dir, &reports)?;
    }
    emit(cli, &cfg, &reports)?;
    Ok(if reports.iter().all(ExperimentReport::passed) { 0 } else { EXIT_FAIL })
}

fn write_to_dir(dir: &Path, reports: &[ExperimentReport]) -> Result<(), String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    for (file, format) in [("reports.jsonl", Format::Jsonl), ("summary.csv", Format::Csv)] {
        let path = dir.join(file);
        let mut f = std::fs::File::create(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        write_reports(reports, format, &mut f)?;
        info!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_report(cli: &Cli, input: &Path) -> CmdResult {
    let text = std::fs::read_to_string(input).map_err(|e| format!("{}: {e}", input.display()))?;
    let reports: Vec<ExperimentReport> = text
        .lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(k, l)| serde_json::from_str(l).map_err(|e| format!("{}:{}: {e}", input.display(), k + 1)))
        .collect::<Result<_, _>>()?;
    for r in &reports {
        eprintln!("{}", r.summary_line());
    }
    let format = cli.format.unwrap_or(Format::Csv);
    match &cli.out {
        Some(path) => {
            let mut f = std::fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
            write_reports(&reports, format, &mut f)?;
        }
        None => write_reports(&reports, format, &mut std::io::stdout().lock())?,
    }
    Ok(if reports.iter().all(ExperimentReport::passed) { 0 } else { EXIT_FAIL })
}
