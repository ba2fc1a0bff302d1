//! The `badk` command line: one subcommand per experiment, configured by a
//! JSON file and a few global flags.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::ball::{CBall, RBall, DEFAULT_PRECISION};
use crate::diophantine::{bad_constant_estimate, dani_check, field_point, BadReport, PSearch};
use crate::error::{Error, Result};
use crate::game::{
    counterexample_demo, play_game, verify_outcome, Adversary, Curve, GameParams, GameSetup,
    StrategyKind, Transcript, VerifyOptions,
};
use crate::latticeflow::{
    trajectory_profile, unipotent, write_trajectory_csv, Enumeration, FlowSpec, PointKS,
};
use crate::numberfield::{AlgebraicInteger, FieldConfig, NumberField, PlaceKind};

#[derive(Parser, Debug)]
#[command(name = "badk", version, about = "Badly approximable points over number fields")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Experiment configuration (JSON).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Working precision in bits.
    #[arg(long, global = true, value_name = "BITS", env = "BADK_PRECISION")]
    pub precision: Option<u32>,
    /// Overrides the configured seed.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    /// No progress lines on standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Places, units, companion matrix and diagonalization residual.
    FieldInfo,
    /// Systole profile along the flow, as CSV.
    Trajectory,
    /// Approximation constant estimate and trajectory floor, as JSON.
    BadCheck,
    /// Schmidt games, as a JSON list of transcripts.
    Play,
    /// Decay table and game tree for the cubic with one moving place.
    Counterexample,
    /// Games for several flow weights.
    WeightSweep,
}

/// A field given inline or as a path relative to the config file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldRef {
    Path(PathBuf),
    Inline(FieldConfig),
}

/// One coordinate of a point: a decimal or fraction string, a number, or a
/// `[re, im]` pair for a complex place.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coordinate {
    Text(String),
    Number(serde_json::Number),
    Complex([Box<Coordinate>; 2]),
}

/// A point of `K_S`: explicit coordinates or `τ(ω)`.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct PointSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<Vec<Coordinate>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Vec<i64>>,
}

fn default_step() -> f64 {
    0.25
}

fn default_mode() -> Enumeration {
    Enumeration::Reduced
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    #[serde(flatten)]
    pub point: PointSpec,
    pub t_max: f64,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_mode")]
    pub mode: Enumeration,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BadCheckConfig {
    #[serde(flatten)]
    pub point: PointSpec,
    pub q_bound: f64,
    /// Searches every `p` within this distance of the rounding.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exhaustive: Option<i64>,
    /// Adds the trajectory floor up to this time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default = "default_step")]
    pub step: f64,
    #[serde(default = "default_mode")]
    pub mode: Enumeration,
    #[serde(default = "default_floor_threshold")]
    pub floor_threshold: f64,
}

fn default_floor_threshold() -> f64 {
    1e-3
}

fn default_adversaries() -> Vec<Adversary> {
    vec![Adversary::Random { seed: None }]
}

fn default_strategies() -> Vec<StrategyKind> {
    vec![StrategyKind::Tracking]
}

fn default_verify() -> Option<VerifyOptions> {
    Some(VerifyOptions::default())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PlayConfig {
    pub curve: Curve,
    #[serde(default)]
    pub params: GameParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default = "default_adversaries")]
    pub adversaries: Vec<Adversary>,
    #[serde(default = "default_strategies")]
    pub strategies: Vec<StrategyKind>,
    /// `null` skips verification.
    #[serde(default = "default_verify")]
    pub verify: Option<VerifyOptions>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CounterexampleConfig {
    #[serde(default = "default_ce_t_max")]
    pub t_max: f64,
    #[serde(default = "default_ce_step")]
    pub step: f64,
    #[serde(default = "default_ce_grid")]
    pub grid: usize,
    #[serde(default)]
    pub tree_depth: Option<usize>,
}

fn default_ce_t_max() -> f64 {
    8.0
}

fn default_ce_step() -> f64 {
    0.5
}

fn default_ce_grid() -> usize {
    101
}

impl Default for CounterexampleConfig {
    fn default() -> Self {
        CounterexampleConfig {
            t_max: default_ce_t_max(),
            step: default_ce_step(),
            grid: default_ce_grid(),
            tree_depth: Some(4),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeightSweepConfig {
    pub weights: Vec<Vec<f64>>,
    pub curve: Curve,
    #[serde(default)]
    pub params: GameParams,
    #[serde(default = "default_sweep_adversary")]
    pub adversary: Adversary,
    #[serde(default = "default_verify")]
    pub verify: Option<VerifyOptions>,
}

fn default_sweep_adversary() -> Adversary {
    Adversary::Random { seed: None }
}

/// Everything a run can be configured with; each subcommand reads its own
/// section.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub field: Option<FieldRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub precision: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<TrajectoryConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bad_check: Option<BadCheckConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub play: Option<PlayConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<CounterexampleConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weight_sweep: Option<WeightSweepConfig>,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    /// The configured field, `Q(√2)` when none is given.
    pub fn field(&self) -> Result<NumberField> {
        match &self.field {
            None => Ok(NumberField::q_sqrt2()),
            Some(FieldRef::Inline(c)) => c.build(),
            Some(FieldRef::Path(p)) => {
                let p = if p.is_relative() { self.base_dir.join(p) } else { p.clone() };
                FieldConfig::load(&p)?.build()
            }
        }
    }

    fn section<'a, T>(&'a self, s: &'a Option<T>, name: &str) -> Result<&'a T> {
        s.as_ref()
            .ok_or_else(|| Error::Config(format!("config has no \"{name}\" section")))
    }
}

fn parse_real(c: &Coordinate, prec: u32) -> Result<RBall> {
    let text = match c {
        Coordinate::Text(s) => s.trim().to_string(),
        Coordinate::Number(n) => n.to_string(),
        Coordinate::Complex(_) => {
            return Err(Error::Config("expected a real coordinate".into()));
        }
    };
    if text.contains('/') {
        let r: Rational = text
            .parse()
            .map_err(|e| Error::Config(format!("bad fraction {text:?}: {e}")))?;
        return Ok(RBall::from_rational(prec, &r));
    }
    let parsed = Float::parse(&text).map_err(|e| Error::Config(format!("bad number {text:?}: {e}")))?;
    let f = Float::with_val(prec, parsed);
    // the decimal itself is exact only up to the last written digit
    let ulp = 2f64.powi(-(prec as i32) + 2) * f.to_f64().abs().max(f64::MIN_POSITIVE);
    Ok(RBall::with_radius(f, ulp))
}

/// Builds a point of `K_S` for `field`.
pub fn resolve_point(field: &NumberField, spec: &PointSpec, prec: u32) -> Result<PointKS> {
    match (&spec.x, &spec.omega) {
        (Some(_), Some(_)) | (None, None) => Err(Error::Config(
            "give exactly one of \"x\" and \"omega\"".into(),
        )),
        (None, Some(w)) => Ok(field_point(field, &field.element(w)?, prec)),
        (Some(xs), None) => {
            if xs.len() != field.places().len() {
                return Err(Error::Config(format!(
                    "point has {} coordinates, field has {} places",
                    xs.len(),
                    field.places().len()
                )));
            }
            xs.iter()
                .zip(field.places())
                .map(|(c, p)| match (c, p.kind()) {
                    (Coordinate::Complex([re, im]), PlaceKind::Complex) => {
                        Ok(CBall::new(parse_real(re, prec)?, parse_real(im, prec)?))
                    }
                    (Coordinate::Complex(_), PlaceKind::Real) => Err(Error::Config(
                        "complex coordinate at a real place".into(),
                    )),
                    (c, _) => Ok(CBall::real(parse_real(c, prec)?)),
                })
                .collect()
        }
    }
}

fn flow_spec(field: &NumberField, weights: &Option<Vec<f64>>) -> Result<FlowSpec> {
    match weights {
        None => Ok(FlowSpec::equal(field.places().len())),
        Some(w) => {
            if w.len() != field.places().len() {
                return Err(Error::Config(format!(
                    "{} weights for {} places",
                    w.len(),
                    field.places().len()
                )));
            }
            FlowSpec::weighted(w)
        }
    }
}

#[derive(Serialize)]
struct PlaceInfo {
    index: usize,
    kind: PlaceKind,
    exponent: u32,
    root: [f64; 2],
    enclosure_radius: f64,
}

#[derive(Serialize)]
struct UnitInfo {
    unit: AlgebraicInteger,
    norm: String,
    log_embedding: Vec<f64>,
    product_formula_residual: f64,
}

#[derive(Serialize)]
struct FieldReport {
    label: String,
    minpoly: Vec<String>,
    degree: usize,
    discriminant: String,
    real_places: usize,
    complex_places: usize,
    places: Vec<PlaceInfo>,
    unit_rank: usize,
    units: Vec<UnitInfo>,
    renormalization_constant: f64,
    companion_matrix: Vec<Vec<String>>,
    vandermonde_residual: f64,
}

/// The `field-info` report.
pub fn field_info(field: &NumberField, prec: u32) -> Result<serde_json::Value> {
    let units = field
        .units()
        .iter()
        .map(|u| {
            let prod = field.norm_from_places(u, prec);
            Ok(UnitInfo {
                unit: u.clone(),
                norm: field.norm(u).to_string(),
                log_embedding: field
                    .unit_log_embedding(u, prec)?
                    .iter()
                    .map(|x| x.to_f64())
                    .collect(),
                product_formula_residual: prod.sub(&RBall::one(prec)).mag(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xi = AlgebraicInteger::generator(field);
    let report = FieldReport {
        label: field.label().to_string(),
        minpoly: field.minpoly().full().iter().map(|c| c.to_string()).collect(),
        degree: field.degree(),
        discriminant: field.minpoly().discriminant().to_string(),
        real_places: field.real_places(),
        complex_places: field.complex_places(),
        places: field
            .places()
            .iter()
            .map(|p| {
                let (re, im) = p.root_f64();
                PlaceInfo {
                    index: p.index(),
                    kind: p.kind(),
                    exponent: p.exponent(),
                    root: [re, im],
                    enclosure_radius: p.enclosure_radius(),
                }
            })
            .collect(),
        unit_rank: field.unit_rank(),
        units,
        renormalization_constant: field.renormalization_constant(),
        companion_matrix: field
            .multiplication_matrix(&xi)
            .iter()
            .map(|row| row.iter().map(|c| c.to_string()).collect())
            .collect(),
        vandermonde_residual: field.diagonalization_residual(&xi, prec)?,
    };
    Ok(serde_json::to_value(report)?)
}

/// The `bad-check` report.
pub fn bad_check(field: &NumberField, cfg: &BadCheckConfig, prec: u32) -> Result<BadReport> {
    let x = resolve_point(field, &cfg.point, prec)?;
    let search = cfg.exhaustive.map_or(PSearch::Neighborhood, PSearch::Exhaustive);
    let mut report = bad_constant_estimate(field, &x, cfg.q_bound, search)?;
    if let Some(t_max) = cfg.t_max {
        let spec = FlowSpec::equal(field.places().len());
        report = report.merge(dani_check(
            field,
            &x,
            &spec,
            t_max,
            cfg.step,
            cfg.mode,
            cfg.floor_threshold,
        )?);
    }
    Ok(report)
}

/// Runs every (strategy, adversary) pair of `cfg`, in config order.
pub fn play(field: &NumberField, cfg: &PlayConfig, prec: u32, log: &mut dyn FnMut(&str)) -> Result<Vec<Transcript>> {
    let spec = flow_spec(field, &cfg.weights)?;
    let setup = GameSetup {
        field,
        curve: &cfg.curve,
        spec: &spec,
        params: &cfg.params,
        prec,
    };
    let mut out = Vec::new();
    for &b in &cfg.strategies {
        for &a in &cfg.adversaries {
            let mut t = play_game(&setup, a, b)?;
            if let Some(v) = &cfg.verify {
                t.verification = Some(verify_outcome(field, &t, &spec, v)?);
            }
            log(&format!(
                "{:?} vs {}: x_inf = {}, floor = {}",
                b,
                a.label(),
                t.x_inf.center().to_f64(),
                t.verification
                    .as_ref()
                    .and_then(|v| v.trajectory_floor)
                    .map_or("-".into(), |f| format!("{f:.6e}"))
            ));
            out.push(t);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRun {
    pub weights: Vec<f64>,
    /// Why the winning hypothesis fails for these weights, if it does.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flagged: Option<String>,
    pub transcript: Transcript,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub runs: Vec<SweepRun>,
    /// Smallest verification floor over unflagged runs.
    pub min_floor: Option<f64>,
}

/// One game per weight vector, in config order. Weights violating the
/// hypothesis (a zero weight, say) are played and flagged.
pub fn weight_sweep(field: &NumberField, cfg: &WeightSweepConfig, prec: u32, log: &mut dyn FnMut(&str)) -> Result<SweepReport> {
    let mut runs = Vec::new();
    for w in &cfg.weights {
        let spec = flow_spec(field, &Some(w.clone()))?;
        let flagged = cfg.curve.hypothesis(field, &spec)?;
        let params = GameParams {
            allow_violations: cfg.params.allow_violations || flagged.is_some(),
            ..cfg.params.clone()
        };
        let setup = GameSetup {
            field,
            curve: &cfg.curve,
            spec: &spec,
            params: &params,
            prec,
        };
        let mut t = play_game(&setup, cfg.adversary, StrategyKind::Tracking)?;
        if let Some(v) = &cfg.verify {
            t.verification = Some(verify_outcome(field, &t, &spec, v)?);
        }
        log(&format!(
            "weights {w:?}: floor = {}{}",
            t.verification
                .as_ref()
                .and_then(|v| v.trajectory_floor)
                .map_or("-".into(), |f| format!("{f:.6e}")),
            if flagged.is_some() { " (hypothesis violated)" } else { "" }
        ));
        runs.push(SweepRun {
            weights: w.clone(),
            flagged,
            transcript: t,
        });
    }
    let min_floor = runs
        .iter()
        .filter(|r| r.flagged.is_none())
        .filter_map(|r| r.transcript.verification.as_ref()?.trajectory_floor)
        .reduce(f64::min);
    Ok(SweepReport { runs, min_floor })
}

fn write_output(path: Option<&Path>, body: &[u8]) -> Result<()> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir)?;
            }
            fs::write(p, body)?;
        }
        None => std::io::stdout().write_all(body)?,
    }
    Ok(())
}

fn json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v)?;
    s.push(b'\n');
    Ok(s)
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let prec = cli
        .precision
        .or(cfg.precision)
        .unwrap_or(DEFAULT_PRECISION);
    if !(53..=crate::ball::MAX_PRECISION).contains(&prec) {
        return Err(Error::Config(format!(
            "precision must lie in [53, {}], got {prec}",
            crate::ball::MAX_PRECISION
        )));
    }
    let seed = cli.seed.or(cfg.seed);
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(|o| if o.is_relative() { cfg.base_dir.join(o) } else { o.clone() }));
    let quiet = cli.quiet;
    let mut log = |msg: &str| {
        if !quiet {
            eprintln!("{msg}");
        }
    };
    let body = match cli.command {
        Command::FieldInfo => json_bytes(&field_info(&cfg.field()?, prec)?)?,
        Command::Trajectory => {
            let field = cfg.field()?;
            let tc = cfg.section(&cfg.trajectory, "trajectory")?;
            let x = resolve_point(&field, &tc.point, prec)?;
            let spec = flow_spec(&field, &tc.weights)?;
            if !(tc.step > 0.0) || !(tc.t_max >= 0.0) {
                return Err(Error::Config("trajectory needs step > 0 and t_max >= 0".into()));
            }
            let n = (tc.t_max / tc.step).round() as usize;
            let grid: Vec<f64> = (0..=n).map(|i| (i as f64 * tc.step).min(tc.t_max)).collect();
            let points = trajectory_profile(&field, &unipotent(&x), &spec, &grid, tc.mode)?;
            let floor = points.iter().map(|p| p.systole.to_f64()).fold(f64::INFINITY, f64::min);
            log(&format!("{} points, floor {floor:.6e}", points.len()));
            let mut buf = Vec::new();
            write_trajectory_csv(&mut buf, &points)?;
            buf
        }
        Command::BadCheck => {
            let field = cfg.field()?;
            let bc = cfg.section(&cfg.bad_check, "bad_check")?;
            let r = bad_check(&field, bc, prec)?;
            log(&format!("c_estimate = {:?}", r.c_estimate));
            json_bytes(&r)?
        }
        Command::Play => {
            let field = cfg.field()?;
            let mut pc = cfg.section(&cfg.play, "play")?.clone();
            if let Some(s) = seed {
                pc.params.seed = s;
            }
            json_bytes(&play(&field, &pc, prec, &mut log)?)?
        }
        Command::Counterexample => {
            let cc = cfg.counterexample.clone().unwrap_or_default();
            let r = counterexample_demo(cc.t_max, cc.step, cc.grid, cc.tree_depth, prec)?;
            log(&format!("below {} from t = {:?}", r.threshold, r.below_threshold_from));
            json_bytes(&r)?
        }
        Command::WeightSweep => {
            let field = cfg.field()?;
            let mut wc = cfg.section(&cfg.weight_sweep, "weight_sweep")?.clone();
            if let Some(s) = seed {
                wc.params.seed = s;
            }
            json_bytes(&weight_sweep(&field, &wc, prec, &mut log)?)?
        }
    };
    write_output(out.as_deref(), &body)
}

/// Exit code for an error: 2 for invalid input or configuration, 3 for
/// precision exhaustion, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::PrecisionExhausted { .. } => 3,
        Error::Io(_) => 1,
        _ => 2,
    }
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
