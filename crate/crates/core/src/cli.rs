//! `bdmpc` command line: run, certify, scenario-gen, metrics, dump-config.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::cmpc::{CentralizedController, MpcConfig, Observer};
use crate::control::Controller;
use crate::dmpc::{Coordination, DistributedController, DmpcConfig};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::linear::{building_model, decompose, InputChannel, Partition, StateSpaceModel};
use crate::matrix_text::MatrixDoc;
use crate::plant::{load_building, BuildingModel};
use crate::sim::{self, Comparison, Scenario, SimOptions, SimulationRecord};
use crate::stability::{self, LyapunovCertificate};

pub const EXIT_OK: i32 = 0;
pub const EXIT_SOLVER: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_UNSTABLE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "bdmpc", version, about = "Building thermal control with centralized and distributed MPC")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run controllers on a scenario; writes traces, metrics.csv and report.txt
    Run(ConfigArgs),
    /// Lyapunov certificate of the unconstrained closed loop
    Certify(CertifyArgs),
    /// Write a scenario file
    ScenarioGen(ScenarioArgs),
    /// Recompute metrics from trace CSV files
    Metrics(MetricsArgs),
    /// Print the effective run configuration as JSON
    DumpConfig(ConfigArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ControllerChoice {
    Centralized,
    Distributed,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CoordinationArg {
    Dual,
    GoalCoordination,
}

#[derive(Args, Debug, Default)]
pub struct ConfigArgs {
    /// Run configuration file (JSON); flags override its values
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Building description (JSON); built-in six-room building when omitted
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// Scenario file (JSON); default 24 h schedule when omitted
    #[arg(long, value_name = "FILE")]
    pub scenario: Option<PathBuf>,
    /// Which controller(s) to run [default: both]
    #[arg(long, value_enum)]
    pub controller: Option<ControllerChoice>,
    /// Prediction horizon P in samples [default: 10]
    #[arg(long, value_name = "N")]
    pub horizon_p: Option<usize>,
    /// Control horizon M in samples, 1 <= M <= P [default: 3]
    #[arg(long, value_name = "N")]
    pub horizon_m: Option<usize>,
    /// Distributed coordination scheme [default: goal-coordination]
    #[arg(long, value_enum)]
    pub coordination: Option<CoordinationArg>,
    /// Hold the last outdoor temperature instead of using its forecast
    #[arg(long)]
    pub no_preview: bool,
    /// Output directory [default: out]
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; above 1 the controllers and local solves run in parallel [default: 1]
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Seed for the scenario's outdoor-temperature noise
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub cfg: ConfigArgs,
    /// Re-verify a certificate file instead of computing one
    #[arg(long, value_name = "FILE")]
    pub check: Option<PathBuf>,
    /// Certify the matrix `A` from a matrix file instead of a controller
    #[arg(long, value_name = "FILE")]
    pub matrix: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ScenarioKind {
    /// 24 h five-period schedule, sinusoidal outdoor temperature
    Day,
    /// Constant 20 °C setpoint with a 10 °C outdoor step
    OutdoorStep,
}

#[derive(Args, Debug)]
pub struct ScenarioArgs {
    #[arg(long, value_enum, default_value = "day")]
    pub kind: ScenarioKind,
    /// Randomize setpoints and outdoor phase of the default day
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Number of zones
    #[arg(long, default_value_t = 6)]
    pub zones: usize,
    /// Output file; stdout when omitted
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    /// Trace CSV files; the controller name is taken from the file name
    #[arg(required = true, value_name = "TRACE")]
    pub traces: Vec<PathBuf>,
    /// Write the metrics CSV here; stdout when omitted
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// Centralized weights and horizons.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmpcSettings {
    pub horizon_p: usize,
    pub horizon_m: usize,
    pub q: f64,
    pub r: f64,
    pub bounds: Option<(f64, f64)>,
}

impl Default for CmpcSettings {
    fn default() -> Self {
        CmpcSettings {
            horizon_p: crate::cmpc::DEFAULT_HORIZON_P,
            horizon_m: crate::cmpc::DEFAULT_HORIZON_M,
            q: crate::cmpc::DEFAULT_Q,
            r: crate::cmpc::DEFAULT_R,
            bounds: Some(crate::cmpc::DEFAULT_BOUNDS),
        }
    }
}

impl CmpcSettings {
    pub fn to_config(&self, outputs: usize, inputs: usize) -> MpcConfig {
        MpcConfig {
            horizon_p: self.horizon_p,
            horizon_m: self.horizon_m,
            q: Mat::identity(outputs, outputs) * self.q,
            r: Mat::identity(inputs, inputs) * self.r,
            bounds: self.bounds,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: Option<PathBuf>,
    pub scenario: Option<PathBuf>,
    pub controller: ControllerChoice,
    pub channel: InputChannel,
    pub cmpc: CmpcSettings,
    pub dmpc: DmpcConfig,
    pub preview: bool,
    pub out: PathBuf,
    pub jobs: usize,
    pub seed: Option<u64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: None,
            scenario: None,
            controller: ControllerChoice::Both,
            channel: InputChannel::SupplyTemperature,
            cmpc: CmpcSettings::default(),
            dmpc: DmpcConfig::default(),
            preview: true,
            out: PathBuf::from("out"),
            jobs: 1,
            seed: None,
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidConfig(format!("cannot read config {}: {e}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Config file (if any) with the flags applied on top.
    pub fn from_args(args: &ConfigArgs) -> Result<Self> {
        let mut c = match &args.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &args.model {
            c.model = Some(p.clone());
        }
        if let Some(p) = &args.scenario {
            c.scenario = Some(p.clone());
        }
        if let Some(v) = args.controller {
            c.controller = v;
        }
        if let Some(p) = args.horizon_p {
            c.cmpc.horizon_p = p;
            c.dmpc.horizon_p = p;
        }
        if let Some(m) = args.horizon_m {
            c.cmpc.horizon_m = m;
            c.dmpc.horizon_m = m;
        }
        if let Some(v) = args.coordination {
            let want = match v {
                CoordinationArg::Dual => Coordination::Dual,
                CoordinationArg::GoalCoordination => Coordination::GoalCoordination,
            };
            if want != c.dmpc.coordination {
                c.dmpc.coordination = want;
                c.dmpc.step = match want {
                    Coordination::Dual => DmpcConfig::dual().step,
                    Coordination::GoalCoordination => DmpcConfig::goal_coordination().step,
                };
            }
        }
        if args.no_preview {
            c.preview = false;
        }
        if let Some(o) = &args.out {
            c.out = o.clone();
        }
        if let Some(j) = args.jobs {
            c.jobs = j;
        }
        if let Some(s) = args.seed {
            c.seed = Some(s);
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        for (what, p) in [("model", &self.model), ("scenario", &self.scenario)] {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(Error::InvalidConfig(format!("{what} file {} does not exist", p.display())));
                }
            }
        }
        let c = &self.cmpc;
        if c.horizon_m == 0 || c.horizon_m > c.horizon_p {
            return Err(Error::InvalidConfig(format!(
                "horizons need 1 <= M <= P, got P={}, M={}",
                c.horizon_p, c.horizon_m
            )));
        }
        if self.jobs == 0 {
            return Err(Error::InvalidConfig("--jobs must be >= 1".into()));
        }
        self.dmpc.validate()
    }

    pub fn building(&self) -> Result<BuildingModel> {
        match &self.model {
            Some(p) => load_building(p),
            None => Ok(BuildingModel::six_room()),
        }
    }

    pub fn scenario(&self, zones: usize) -> Result<Scenario> {
        let mut s = match &self.scenario {
            Some(p) => Scenario::load(p)?,
            None => sim::scenario::day_scenario_with(&sim::scenario::DAY_LEVELS, zones),
        };
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        Ok(s)
    }

    pub fn sim_options(&self) -> SimOptions {
        SimOptions {
            channel: self.channel,
            preview: self.preview,
        }
    }

    fn dmpc_config(&self) -> DmpcConfig {
        let mut d = self.dmpc.clone();
        d.parallel = d.parallel || self.jobs > 1;
        d
    }
}

/// Maps an error to the documented exit status.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Controller { source, .. } => exit_code(source),
        Error::SolverFailure { .. }
        | Error::IntegrationDivergence { .. }
        | Error::CoordinationIncomplete(_)
        | Error::IllPosedWeights(_) => EXIT_SOLVER,
        Error::UnstableMatrix(_) => EXIT_UNSTABLE,
        _ => EXIT_CONFIG,
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let result = match cli.command {
        Command::Run(a) => cmd_run(&a, out),
        Command::Certify(a) => cmd_certify(&a, out, err),
        Command::ScenarioGen(a) => cmd_scenario_gen(&a, out),
        Command::Metrics(a) => cmd_metrics(&a, out),
        Command::DumpConfig(a) => cmd_dump_config(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn linear_model(cfg: &RunConfig, model: &BuildingModel, ts: f64) -> Result<StateSpaceModel> {
    building_model(model, cfg.channel, ts)
}

fn run_one(
    which: ControllerChoice,
    cfg: &RunConfig,
    model: &BuildingModel,
    ss: &StateSpaceModel,
    scenario: &Scenario,
) -> Result<SimulationRecord> {
    let opts = cfg.sim_options();
    match which {
        ControllerChoice::Centralized => {
            let c = cfg.cmpc.to_config(ss.p(), ss.m());
            sim::run_centralized(model, ss, &c, scenario, &opts).map_err(|e| e.with_controller("centralized"))
        }
        _ => sim::run_distributed(model, ss, &cfg.dmpc_config(), scenario, &opts)
            .map_err(|e| e.with_controller("distributed")),
    }
}

pub fn cmd_run(args: &ConfigArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = RunConfig::from_args(args)?;
    cfg.validate()?;
    let model = cfg.building()?;
    let scenario = cfg.scenario(model.zone_count())?;
    scenario.validate()?;
    let ss = linear_model(&cfg, &model, scenario.ts)?;
    std::fs::create_dir_all(&cfg.out)?;

    let records = match cfg.controller {
        ControllerChoice::Both => {
            let pair = || {
                rayon::join(
                    || run_one(ControllerChoice::Centralized, &cfg, &model, &ss, &scenario),
                    || run_one(ControllerChoice::Distributed, &cfg, &model, &ss, &scenario),
                )
            };
            let (a, b) = if cfg.jobs > 1 {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.jobs)
                    .build()
                    .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?
                    .install(pair)
            } else {
                (
                    run_one(ControllerChoice::Centralized, &cfg, &model, &ss, &scenario),
                    run_one(ControllerChoice::Distributed, &cfg, &model, &ss, &scenario),
                )
            };
            vec![a?, b?]
        }
        one => vec![run_one(one, &cfg, &model, &ss, &scenario)?],
    };

    let metrics = records.iter().map(sim::compute_metrics).collect::<Result<Vec<_>>>()?;
    for r in &records {
        std::fs::write(cfg.out.join(format!("trace_{}.csv", r.controller)), r.to_csv())?;
    }
    let refs: Vec<_> = metrics.iter().collect();
    std::fs::write(cfg.out.join("metrics.csv"), sim::metrics_csv(&refs))?;
    let text = if let ([c, d], [mc, md]) = (records.as_slice(), metrics.as_slice()) {
        Comparison {
            scenario: scenario.name.clone(),
            preview: cfg.preview,
            cmpc: c.clone(),
            dmpc: d.clone(),
            cmpc_metrics: mc.clone(),
            dmpc_metrics: md.clone(),
        }
        .report()
    } else {
        sim::report(&scenario.name, cfg.preview, &refs)
    };
    std::fs::write(cfg.out.join("report.txt"), &text)?;
    write!(out, "{text}")?;
    Ok(EXIT_OK)
}

/// Controller whose unconstrained, fully converged law is certified.
pub fn certification_controller(
    which: ControllerChoice,
    cfg: &RunConfig,
    ss: &StateSpaceModel,
) -> Result<Box<dyn Controller>> {
    match which {
        ControllerChoice::Centralized => {
            let mut c = cfg.cmpc.to_config(ss.p(), ss.m());
            c.bounds = None;
            Ok(Box::new(CentralizedController::new(ss.clone(), c, Observer::Measured)?))
        }
        _ => {
            let mut d = cfg.dmpc.clone();
            d.bounds = None;
            d.tolerance = 1e-13;
            d.max_iterations = d.max_iterations.max(1000);
            let dec = decompose(ss, &Partition::singletons(ss.n()))?;
            Ok(Box::new(DistributedController::new(dec, d)?))
        }
    }
}

/// Certificate of the closed loop `ss` + controller with `F = I`.
pub fn certify_closed_loop(ss: &StateSpaceModel, ctrl: &mut dyn Controller) -> Result<LyapunovCertificate> {
    let cl = stability::extract_closed_loop(ss, ctrl)?;
    let f = Mat::identity(cl.a_cl.nrows(), cl.a_cl.ncols());
    stability::certify(&cl.a_cl, &f)
}

fn emit_certificate(cert: &LyapunovCertificate, cfg: &RunConfig, out: &mut dyn Write, to_file: bool) -> Result<()> {
    let text = cert.to_doc().to_text();
    if to_file {
        std::fs::create_dir_all(&cfg.out)?;
        std::fs::write(cfg.out.join("certificate.txt"), &text)?;
    }
    write!(out, "{text}")?;
    Ok(())
}

fn verdict(cert: &LyapunovCertificate, err: &mut dyn Write) -> i32 {
    if cert.is_valid() {
        EXIT_OK
    } else {
        let _ = writeln!(
            err,
            "certificate rejected: residual {:e}, spectral radius {}",
            cert.residual, cert.spectral_radius
        );
        EXIT_UNSTABLE
    }
}

pub fn cmd_certify(args: &CertifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let cfg = RunConfig::from_args(&args.cfg)?;
    let unstable = |e: Error, err: &mut dyn Write| -> Result<i32> {
        match e {
            Error::UnstableMatrix(r) => {
                writeln!(err, "closed loop is not stable: spectral radius {r}")?;
                Ok(EXIT_UNSTABLE)
            }
            other => Err(other),
        }
    };
    if let Some(path) = &args.check {
        let doc = MatrixDoc::parse(&std::fs::read_to_string(path)?)?;
        let cert = LyapunovCertificate::from_doc(&doc)?.recheck()?;
        writeln!(out, "residual {:e}", cert.residual)?;
        writeln!(out, "spectral_radius {}", cert.spectral_radius)?;
        writeln!(out, "bound {}", cert.bound)?;
        return Ok(verdict(&cert, err));
    }
    let to_file = args.cfg.out.is_some();
    let cert = if let Some(path) = &args.matrix {
        let doc = MatrixDoc::parse(&std::fs::read_to_string(path)?)?;
        let a = doc.matrix("A")?.clone();
        if !a.is_square() {
            return Err(Error::Dimension("A must be square".into()));
        }
        stability::certify(&a, &Mat::identity(a.nrows(), a.ncols()))
    } else {
        cfg.validate()?;
        let model = cfg.building()?;
        let ts = match &cfg.scenario {
            Some(p) => Scenario::load(p)?.ts,
            None => sim::build_paper_scenario().ts,
        };
        let ss = linear_model(&cfg, &model, ts)?;
        let which = match cfg.controller {
            ControllerChoice::Centralized => ControllerChoice::Centralized,
            _ => ControllerChoice::Distributed,
        };
        let mut ctrl = certification_controller(which, &cfg, &ss)?;
        certify_closed_loop(&ss, ctrl.as_mut())
    };
    match cert {
        Ok(c) => {
            emit_certificate(&c, &cfg, out, to_file)?;
            Ok(verdict(&c, err))
        }
        Err(e) => unstable(e, err),
    }
}

pub fn cmd_scenario_gen(args: &ScenarioArgs, out: &mut dyn Write) -> Result<i32> {
    if args.zones == 0 {
        return Err(Error::InvalidConfig("--zones must be >= 1".into()));
    }
    let s = match (args.kind, args.seed) {
        (ScenarioKind::Day, None) => sim::scenario::day_scenario_with(&sim::scenario::DAY_LEVELS, args.zones),
        (ScenarioKind::Day, Some(seed)) => sim::random_scenario(seed, args.zones),
        (ScenarioKind::OutdoorStep, seed) => {
            let mut s = sim::outdoor_step_scenario(args.zones, 600.0, 300.0);
            s.seed = seed.unwrap_or(0);
            s
        }
    };
    s.validate()?;
    let text = s.to_json()? + "\n";
    match &args.out {
        Some(p) => std::fs::write(p, text)?,
        None => write!(out, "{text}")?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_metrics(args: &MetricsArgs, out: &mut dyn Write) -> Result<i32> {
    let mut all = Vec::new();
    for p in &args.traces {
        let name = p
            .file_stem()
            .and_then(|s| s.to_str())
            .map(|s| s.strip_prefix("trace_").unwrap_or(s).to_string())
            .unwrap_or_else(|| "trace".into());
        let rec = SimulationRecord::from_csv(&std::fs::read_to_string(p)?, &name)?;
        all.push(sim::compute_metrics(&rec)?);
    }
    let refs: Vec<_> = all.iter().collect();
    let text = sim::metrics_csv(&refs);
    match &args.out {
        Some(p) => std::fs::write(p, text)?,
        None => write!(out, "{text}")?,
    }
    Ok(EXIT_OK)
}

pub fn cmd_dump_config(args: &ConfigArgs, out: &mut dyn Write) -> Result<i32> {
    let cfg = RunConfig::from_args(args)?;
    writeln!(out, "{}", serde_json::to_string_pretty(&cfg)?)?;
    Ok(EXIT_OK)
}

/// Help text of the top level and of every subcommand, for documentation and
/// the golden test.
pub fn full_help() -> String {
    use clap::CommandFactory;
    let mut root = Cli::command();
    let mut s = root.render_long_help().to_string();
    for sub in ["run", "certify", "scenario-gen", "metrics", "dump-config"] {
        let mut c = Cli::command();
        c.build();
        let sc = c.find_subcommand_mut(sub).expect("subcommand exists");
        s.push_str(&format!("\n==== bdmpc {sub} ====\n"));
        s.push_str(&sc.render_long_help().to_string());
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dmpc::StepRule;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("bdmpc").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn missing_model_is_config_error() {
        let (code, _, err) = call(&["run", "--model", "/nonexistent/building.json"]);
        assert_eq!(code, EXIT_CONFIG);
        assert!(err.contains("does not exist"), "{err}");
    }

    #[test]
    fn bad_horizons_rejected() {
        let (code, _, _) = call(&["dump-config", "--horizon-p", "2", "--horizon-m", "3"]);
        assert_eq!(code, EXIT_OK);
        let (code, _, _) = call(&["run", "--horizon-p", "2", "--horizon-m", "3"]);
        assert_eq!(code, EXIT_CONFIG);
    }

    #[test]
    fn coordination_flag_switches_step_rule() {
        let args = ConfigArgs { coordination: Some(CoordinationArg::Dual), ..Default::default() };
        let c = RunConfig::from_args(&args).unwrap();
        assert_eq!(c.dmpc.coordination, Coordination::Dual);
        assert_eq!(c.dmpc.step, StepRule::HalfPenalty);
    }

    #[test]
    fn unknown_flag_is_config_error() {
        assert_eq!(call(&["run", "--frobnicate"]).0, EXIT_CONFIG);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::SolverFailure { step: 1, reason: String::new() }), EXIT_SOLVER);
        assert_eq!(
            exit_code(&Error::InvalidConfig(String::new()).with_controller("distributed")),
            EXIT_CONFIG
        );
        assert_eq!(exit_code(&Error::UnstableMatrix(1.0)), EXIT_UNSTABLE);
    }
}
