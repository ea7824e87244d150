//! Command implementations for the `rollhorizon` binary.
//!
//! Every command writes delimited tables plus a `<file>.manifest.json`
//! sidecar recording the invocation. The default output directory is taken
//! from `ROLLHORIZON_OUT_DIR`, falling back to the working directory.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::horizon::bound::{
    compute_kappa, epsilon_sufficient_horizon, suboptimality_bound, BoundInput, Regime, DEFAULT_EPSILON,
};
use crate::horizon::map::{fit_horizon_map, HorizonMap};
use crate::horizon::scan::{run_scan, scan_points, ScanConfig, ScanSample};
use crate::model::hpop::{build_hpop, HpopInstance, Preset, BENCHMARK_DEMANDS};
use crate::model::io::{load_instance, save_instance};
use crate::rolling::{
    read_zbar, simulate_hpop, EffortSchedule, PolicySpec, ProblemCache, SimulationOptions, SimulationResult,
};
use crate::sddp::{CutPool, TrainConfig};
use crate::stationary::{evaluate_stationary, train_stationary, StationaryModel};

pub const OUT_DIR_ENV: &str = "ROLLHORIZON_OUT_DIR";
pub const TABLE_GAMMAS: [f64; 11] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99];

#[derive(Debug, Parser)]
#[command(
    name = "rollhorizon",
    version,
    about = "SDDP training, rolling-horizon simulation and forecast-horizon selection"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a benchmark instance file.
    Gen(GenArgs),
    /// Learn a horizon map from a stability scan.
    Fit(FitArgs),
    /// Simulate a rolling-horizon or stationary policy.
    Simulate(SimulateArgs),
    /// Tabulate ε-sufficient horizons and suboptimality bounds.
    Bound(BoundArgs),
    /// Train a discounted stationary policy and save its cuts.
    TrainStationary(TrainStationaryArgs),
    /// Fit maps for several w values and compare the resulting dynamic policies.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Iteration cap per training call.
    #[arg(long, default_value_t = 100_000)]
    pub max_iterations: usize,
    /// Time cap per training call, in seconds.
    #[arg(long, default_value_t = 10_800.0)]
    pub time_limit: f64,
    /// Relative lower-bound progress tolerance.
    #[arg(long, default_value_t = 1e-4)]
    pub stall_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl TrainArgs {
    pub fn config(&self, stall_window: usize) -> TrainConfig {
        TrainConfig {
            max_iterations: self.max_iterations,
            time_limit_seconds: self.time_limit,
            stall_window,
            stall_rel_tol: self.stall_tol,
            rng_seed: self.seed,
            ..TrainConfig::default()
        }
    }

    fn record(&self, m: &mut BTreeMap<String, String>) {
        m.insert("max_iterations".into(), self.max_iterations.to_string());
        m.insert("time_limit".into(), self.time_limit.to_string());
        m.insert("stall_tol".into(), self.stall_tol.to_string());
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub plants: usize,
    #[arg(long)]
    pub demand: f64,
    #[arg(long)]
    pub realizations: usize,
    /// Inflow-to-storage scale (the benchmark's conversion constant is 2.592).
    #[arg(long, default_value_t = 1.0)]
    pub c0: f64,
    /// Reject demands outside the benchmark grid.
    #[arg(long)]
    pub strict_presets: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Number of sampled states.
    #[arg(long, default_value_t = 50)]
    pub samples: usize,
    #[arg(long, default_value_t = 64)]
    pub tau_max: usize,
    /// Stability parameter; repeat to fit several maps on the same samples.
    #[arg(long = "w", default_values_t = [10usize])]
    pub w: Vec<usize>,
    #[arg(long, default_value_t = 1e-5)]
    pub epsilon: f64,
    /// Stall window used when training each scanned problem.
    #[arg(long, default_value_t = 50)]
    pub stall: usize,
    #[arg(long, default_value_t = 3)]
    pub max_pieces: usize,
    /// Train each sample's problems from scratch instead of reusing cuts.
    #[arg(long)]
    pub independent: bool,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    Static,
    Dynamic,
    Stationary,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value_t = PolicyKind::Static)]
    pub policy: PolicyKind,
    #[arg(long, default_value_t = 4)]
    pub tau: usize,
    #[arg(long)]
    pub map: Option<PathBuf>,
    #[arg(long, default_value_t = 16)]
    pub tau_max: usize,
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Pre-trained stationary pool; trained on the fly when absent.
    #[arg(long)]
    pub pool: Option<PathBuf>,
    /// Number of rolls.
    #[arg(long = "T", default_value_t = 200)]
    pub rolls: usize,
    /// Seed of the evaluation path.
    #[arg(long, default_value_t = 1)]
    pub path_seed: u64,
    /// Reference result table for the gap column.
    #[arg(long)]
    pub baseline: Option<PathBuf>,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    General,
    Nonpositive,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    #[arg(long, conflicts_with = "compute_kappa")]
    pub kappa: Option<f64>,
    /// Compute κ from `--instance`.
    #[arg(long, requires = "instance")]
    pub compute_kappa: bool,
    #[arg(long)]
    pub instance: Option<PathBuf>,
    /// Discount factors; defaults to 0.1, …, 0.9, 0.95, 0.99.
    #[arg(long, value_delimiter = ',')]
    pub gamma: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = RegimeArg::General)]
    pub regime: RegimeArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct TrainStationaryArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long, default_value_t = 100)]
    pub stall: usize,
    #[command(flatten)]
    pub train: TrainArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub fit: FitArgs,
    #[arg(long = "T", default_value_t = 200)]
    pub rolls: usize,
    #[arg(long, default_value_t = 1)]
    pub path_seed: u64,
    /// Benchmark w for the gap columns.
    #[arg(long, default_value_t = 15)]
    pub reference_w: usize,
}

/// Invocation record stored next to every result file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub instance: Option<PathBuf>,
    pub policy: Option<String>,
    pub seeds: BTreeMap<String, u64>,
    pub config: BTreeMap<String, String>,
    pub output_dir: PathBuf,
    pub tool_version: String,
    /// Headline results (z̄, gap, κ, …) as text.
    pub summary: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: &str, output_dir: &Path) -> Self {
        RunManifest {
            command: command.into(),
            instance: None,
            policy: None,
            seeds: BTreeMap::new(),
            config: BTreeMap::new(),
            output_dir: output_dir.to_path_buf(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            summary: BTreeMap::new(),
        }
    }

    pub fn sidecar_path(result: &Path) -> PathBuf {
        let mut s = result.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn save_for(&self, result: &Path) -> Result<PathBuf> {
        let p = Self::sidecar_path(result);
        let text = serde_json::to_string_pretty(self)?;
        fs::write(&p, text + "\n").map_err(|e| Error::io(&p, e))?;
        Ok(p)
    }

    pub fn load_for(result: &Path) -> Result<Self> {
        let p = Self::sidecar_path(result);
        let text = fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Schema {
            path: p,
            msg: e.to_string(),
        })
    }
}

/// `ROLLHORIZON_OUT_DIR`, or `.`.
pub fn default_out_dir() -> PathBuf {
    std::env::var_os(OUT_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

fn resolve(out: &Option<PathBuf>, default_name: &str) -> Result<PathBuf> {
    let p = match out {
        Some(p) => p.clone(),
        None => default_out_dir().join(default_name),
    };
    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    Ok(p)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn parent_of(p: &Path) -> PathBuf {
    p.parent().map(Path::to_path_buf).unwrap_or_default()
}

/// Writes the requested preset and returns its path.
pub fn cmd_gen(a: &GenArgs) -> Result<PathBuf> {
    if a.strict_presets && !BENCHMARK_DEMANDS.contains(&a.demand) {
        return Err(Error::Config(format!(
            "demand {} is not one of the benchmark values {:?}",
            a.demand, BENCHMARK_DEMANDS
        )));
    }
    let inst = build_hpop(Preset::new(a.plants, a.demand, a.realizations).with_c0(a.c0))?;
    let name = format!("hpop_h{}_d{}_x{}.json", a.plants, a.demand, a.realizations);
    let out = resolve(&a.out, &name)?;
    save_instance(&inst, &out)?;
    let mut m = RunManifest::new("gen", &parent_of(&out));
    m.config.insert("plants".into(), a.plants.to_string());
    m.config.insert("demand".into(), a.demand.to_string());
    m.config.insert("realizations".into(), a.realizations.to_string());
    m.config.insert("c0".into(), a.c0.to_string());
    m.save_for(&out)?;
    Ok(out)
}

/// Outputs of a fit run: one map per `w`, one scan table for all of them.
#[derive(Debug, Clone)]
pub struct FitOutput {
    pub maps: Vec<(usize, PathBuf, HorizonMap)>,
    pub scan_file: PathBuf,
    pub samples: Vec<(usize, Vec<ScanSample>)>,
    pub wall_seconds: Vec<(usize, f64)>,
}

pub fn scan_config(a: &FitArgs, w: usize) -> ScanConfig {
    ScanConfig {
        samples: a.samples,
        epsilon: a.epsilon,
        w,
        tau_max: a.tau_max,
        train: a.train.config(a.stall),
        seed: a.train.seed,
        share_cuts: !a.independent,
    }
}

pub fn cmd_fit(a: &FitArgs) -> Result<FitOutput> {
    let inst = load_instance(&a.instance)?;
    let dir = a.out_dir.clone().unwrap_or_else(default_out_dir);
    ensure_dir(&dir)?;
    if a.w.is_empty() {
        return Err(Error::Config("at least one w is required".into()));
    }
    let mut maps = Vec::new();
    let mut all = Vec::new();
    let mut times = Vec::new();
    for &w in &a.w {
        let cfg = scan_config(a, w);
        let t0 = std::time::Instant::now();
        let samples = run_scan(&inst, &cfg)?;
        let map = fit_horizon_map(&scan_points(&samples), a.max_pieces)?;
        times.push((w, t0.elapsed().as_secs_f64()));
        let path = dir.join(format!("map_w{w}.json"));
        map.save(&path)?;
        let mut m = fit_manifest(a, &dir, w);
        m.summary.insert("r2_avg".into(), map.r2_avg.to_string());
        m.summary.insert("pieces".into(), map.pieces.len().to_string());
        m.save_for(&path)?;
        maps.push((w, path, map));
        all.push((w, samples));
    }
    let scan_file = dir.join("scan.csv");
    let mut buf = Vec::new();
    {
        let mut wr = csv::Writer::from_writer(&mut buf);
        wr.write_record(["w", "n", "phi1", "tau_star", "realization", "wall_ms"])?;
        for (w, samples) in &all {
            for s in samples {
                wr.write_record([
                    w.to_string(),
                    s.n.to_string(),
                    s.phi1.to_string(),
                    s.tau_star.to_string(),
                    s.realization.to_string(),
                    format!("{:.3}", s.wall_ms),
                ])?;
            }
        }
        wr.flush().map_err(|e| Error::io(&scan_file, e))?;
    }
    fs::write(&scan_file, buf).map_err(|e| Error::io(&scan_file, e))?;
    let mut m = fit_manifest(a, &dir, a.w[0]);
    m.config.insert("w".into(), format!("{:?}", a.w));
    m.save_for(&scan_file)?;
    Ok(FitOutput {
        maps,
        scan_file,
        samples: all,
        wall_seconds: times,
    })
}

fn fit_manifest(a: &FitArgs, dir: &Path, w: usize) -> RunManifest {
    let mut m = RunManifest::new("fit", dir);
    m.instance = Some(a.instance.clone());
    m.seeds.insert("seed".into(), a.train.seed);
    m.config.insert("samples".into(), a.samples.to_string());
    m.config.insert("tau_max".into(), a.tau_max.to_string());
    m.config.insert("w".into(), w.to_string());
    m.config.insert("epsilon".into(), a.epsilon.to_string());
    m.config.insert("stall".into(), a.stall.to_string());
    m.config.insert("max_pieces".into(), a.max_pieces.to_string());
    m.config.insert("share_cuts".into(), (!a.independent).to_string());
    a.train.record(&mut m.config);
    m
}

/// `(value - reference) / reference`, taken as 0 when both are 0.
pub fn relative_gap(value: f64, reference: f64) -> f64 {
    if reference == 0.0 && value == 0.0 {
        0.0
    } else {
        (value - reference) / reference
    }
}

/// Evaluation path: one realization index per roll.
pub fn evaluation_path(inst: &HpopInstance, rolls: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    inst.inflow.sample_path(rolls, &mut rng)
}

#[derive(Debug, Clone)]
pub struct SimulateOutput {
    pub result: SimulationResult,
    pub out: PathBuf,
    pub gap: Option<f64>,
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<SimulateOutput> {
    let inst = load_instance(&a.instance)?;
    let path = evaluation_path(&inst, a.rolls, a.path_seed);
    let opts = SimulationOptions {
        train: a.train.config(EffortSchedule::default().initial),
        schedule: EffortSchedule::default(),
    };
    let (policy, result) = match a.policy {
        PolicyKind::Static => {
            let p = PolicySpec::Static { tau: a.tau };
            let r = simulate_hpop(&inst, &p, &path, &opts, &mut ProblemCache::new())?;
            (p, r)
        }
        PolicyKind::Dynamic => {
            let map_path = a
                .map
                .as_ref()
                .ok_or_else(|| Error::Config("--policy dynamic needs --map".into()))?;
            let p = PolicySpec::Dynamic {
                map: HorizonMap::load(map_path)?,
                tau_max: a.tau_max,
            };
            let r = simulate_hpop(&inst, &p, &path, &opts, &mut ProblemCache::new())?;
            (p, r)
        }
        PolicyKind::Stationary => {
            let gamma = a
                .gamma
                .ok_or_else(|| Error::Config("--policy stationary needs --gamma".into()))?;
            let sm = StationaryModel::new(inst.model(), gamma)?;
            let pool = match &a.pool {
                Some(p) => {
                    let (pool, meta) = CutPool::load(p)?;
                    if pool.stages.len() != 1 || pool.dim != sm.model.template.state_dim() {
                        return Err(Error::Config(format!(
                            "{} is not a stationary pool for this instance",
                            p.display()
                        )));
                    }
                    if let Some((_, g)) = meta.iter().find(|(k, _)| k == "gamma") {
                        if g.parse::<f64>().ok() != Some(gamma) {
                            return Err(Error::Config(format!("pool was trained with γ = {g}")));
                        }
                    }
                    pool
                }
                None => train_stationary(&sm, &a.train.config(100))?.0,
            };
            (
                PolicySpec::Stationary { gamma },
                evaluate_stationary(&sm, &pool, &path)?,
            )
        }
    };
    let label = match &policy {
        PolicySpec::Static { tau } => format!("static_tau{tau}"),
        PolicySpec::Dynamic { .. } => "dynamic".to_string(),
        PolicySpec::Stationary { gamma } => format!("stationary_g{gamma}"),
    };
    let out = resolve(&a.out, &format!("sim_{label}.csv"))?;
    result.write_csv(&out)?;
    let gap = match &a.baseline {
        Some(b) => {
            let z = read_zbar(b)?;
            Some(relative_gap(result.zbar, z))
        }
        None => None,
    };
    let mut m = RunManifest::new("simulate", &parent_of(&out));
    m.instance = Some(a.instance.clone());
    m.policy = Some(policy.label());
    m.seeds.insert("train_seed".into(), a.train.seed);
    m.seeds.insert("path_seed".into(), a.path_seed);
    m.config.insert("rolls".into(), a.rolls.to_string());
    a.train.record(&mut m.config);
    if let Some(p) = &a.map {
        m.config.insert("map".into(), p.display().to_string());
    }
    if let Some(p) = &a.pool {
        m.config.insert("pool".into(), p.display().to_string());
    }
    m.summary.insert("zbar".into(), result.zbar.to_string());
    m.summary.insert("cost_std".into(), result.cost_std.to_string());
    m.summary.insert("wall_seconds".into(), result.wall_seconds.to_string());
    let mean_tau = result.horizons.iter().sum::<usize>() as f64 / result.rolls().max(1) as f64;
    m.summary.insert("mean_tau".into(), mean_tau.to_string());
    if let (Some(g), Some(b)) = (gap, &a.baseline) {
        m.summary.insert("gap".into(), g.to_string());
        m.config.insert("baseline".into(), b.display().to_string());
    }
    m.save_for(&out)?;
    Ok(SimulateOutput { result, out, gap })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRow {
    pub gamma: f64,
    pub tau_star: f64,
    pub bound_at_ceil: f64,
}

#[derive(Debug, Clone)]
pub struct BoundOutput {
    pub kappa: f64,
    pub kappa_source: String,
    pub rows: Vec<BoundRow>,
    pub out: PathBuf,
}

pub fn cmd_bound(a: &BoundArgs) -> Result<BoundOutput> {
    let (kappa, source) = match (a.kappa, a.compute_kappa) {
        (Some(k), false) => (k, "supplied".to_string()),
        (None, true) => {
            let p = a
                .instance
                .as_ref()
                .ok_or_else(|| Error::Config("--compute-kappa needs --instance".into()))?;
            (compute_kappa(&load_instance(p)?)?, "computed".to_string())
        }
        _ => return Err(Error::Config("give exactly one of --kappa or --compute-kappa".into())),
    };
    let regime = match a.regime {
        RegimeArg::General => Regime::General,
        RegimeArg::Nonpositive => Regime::Nonpositive,
    };
    let gammas = if a.gamma.is_empty() {
        TABLE_GAMMAS.to_vec()
    } else {
        a.gamma.clone()
    };
    let mut rows = Vec::with_capacity(gammas.len());
    for gamma in gammas {
        let tau_star = epsilon_sufficient_horizon(&BoundInput {
            kappa,
            gamma,
            epsilon: a.epsilon,
            regime,
        })?;
        rows.push(BoundRow {
            gamma,
            tau_star,
            bound_at_ceil: suboptimality_bound(tau_star.ceil(), gamma, kappa, regime),
        });
    }
    let out = resolve(&a.out, "bound.csv")?;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["gamma", "kappa", "epsilon", "tau_star", "bound_at_ceil_tau"])?;
        for r in &rows {
            w.write_record([
                r.gamma.to_string(),
                kappa.to_string(),
                a.epsilon.to_string(),
                format!("{:.2}", r.tau_star),
                r.bound_at_ceil.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&out, e))?;
    }
    fs::write(&out, buf).map_err(|e| Error::io(&out, e))?;
    let mut m = RunManifest::new("bound", &parent_of(&out));
    m.instance = a.instance.clone();
    m.config.insert("epsilon".into(), a.epsilon.to_string());
    m.config.insert("regime".into(), format!("{regime:?}").to_lowercase());
    m.summary.insert("kappa".into(), kappa.to_string());
    m.summary.insert("kappa_source".into(), source.clone());
    if a.epsilon == DEFAULT_EPSILON {
        m.summary.insert(
            "epsilon_note".into(),
            "default 1e-5 inferred from published horizon table, not stated there".into(),
        );
    }
    m.save_for(&out)?;
    Ok(BoundOutput {
        kappa,
        kappa_source: source,
        rows,
        out,
    })
}

#[derive(Debug, Clone)]
pub struct TrainStationaryOutput {
    pub pool: CutPool,
    pub out: PathBuf,
    pub lower_bound: Option<f64>,
    pub iterations: usize,
}

pub fn cmd_train_stationary(a: &TrainStationaryArgs) -> Result<TrainStationaryOutput> {
    let inst = load_instance(&a.instance)?;
    let sm = StationaryModel::new(inst.model(), a.gamma)?;
    let (pool, report) = train_stationary(&sm, &a.train.config(a.stall))?;
    let out = resolve(&a.out, &format!("pool_g{}.csv", a.gamma))?;
    pool.save(
        &out,
        &[
            ("gamma".into(), a.gamma.to_string()),
            ("iterations".into(), report.iterations.to_string()),
        ],
    )?;
    let mut m = RunManifest::new("train-stationary", &parent_of(&out));
    m.instance = Some(a.instance.clone());
    m.policy = Some(PolicySpec::Stationary { gamma: a.gamma }.label());
    m.seeds.insert("seed".into(), a.train.seed);
    m.config.insert("stall".into(), a.stall.to_string());
    a.train.record(&mut m.config);
    m.summary.insert("iterations".into(), report.iterations.to_string());
    m.summary
        .insert("termination".into(), format!("{:?}", report.termination).to_lowercase());
    if let Some(lb) = report.final_lower_bound() {
        m.summary.insert("lower_bound".into(), lb.to_string());
    }
    m.save_for(&out)?;
    Ok(TrainStationaryOutput {
        lower_bound: report.final_lower_bound(),
        iterations: report.iterations,
        pool,
        out,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub w: usize,
    pub zbar: f64,
    /// Offline fit plus online simulation, in seconds.
    pub time: f64,
    pub zbar_gap: f64,
    pub time_gap: f64,
    pub mean_tau: f64,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<SweepRow>,
    pub out: PathBuf,
}

/// Fits one map per `w`, simulates each dynamic policy on a common path,
/// and reports `(z̄_w - z̄_ref)/z̄_ref` and `(time_w - time_ref)/time_ref`.
pub fn cmd_sweep(a: &SweepArgs) -> Result<SweepOutput> {
    let mut fit = a.fit.clone();
    if !fit.w.contains(&a.reference_w) {
        fit.w.push(a.reference_w);
    }
    let dir = fit.out_dir.clone().unwrap_or_else(default_out_dir);
    let fitted = cmd_fit(&fit)?;
    let mut raw = Vec::new();
    for (w, map_path, _) in &fitted.maps {
        let sim = SimulateArgs {
            instance: fit.instance.clone(),
            policy: PolicyKind::Dynamic,
            tau: 1,
            map: Some(map_path.clone()),
            tau_max: fit.tau_max,
            gamma: None,
            pool: None,
            rolls: a.rolls,
            path_seed: a.path_seed,
            baseline: None,
            train: fit.train.clone(),
            out: Some(dir.join(format!("sim_dynamic_w{w}.csv"))),
        };
        let r = cmd_simulate(&sim)?;
        let fit_time = fitted.wall_seconds.iter().find(|(x, _)| x == w).map_or(0.0, |t| t.1);
        let mean_tau = r.result.horizons.iter().sum::<usize>() as f64 / r.result.rolls().max(1) as f64;
        raw.push((*w, r.result.zbar, fit_time + r.result.wall_seconds, mean_tau));
    }
    let (_, zref, tref, _) = *raw.iter().find(|r| r.0 == a.reference_w).unwrap();
    let rows: Vec<SweepRow> = raw
        .iter()
        .map(|&(w, zbar, time, mean_tau)| SweepRow {
            w,
            zbar,
            time,
            zbar_gap: relative_gap(zbar, zref),
            time_gap: relative_gap(time, tref),
            mean_tau,
        })
        .collect();
    let out = dir.join("sweep.csv");
    let mut buf = Vec::new();
    {
        let mut wr = csv::Writer::from_writer(&mut buf);
        wr.write_record(["w", "zbar", "zbar_gap_pct", "mean_tau", "time_s", "time_gap_pct"])?;
        for r in &rows {
            wr.write_record([
                r.w.to_string(),
                r.zbar.to_string(),
                format!("{:.2}", 100.0 * r.zbar_gap),
                format!("{:.3}", r.mean_tau),
                format!("{:.3}", r.time),
                format!("{:.2}", 100.0 * r.time_gap),
            ])?;
        }
        wr.flush().map_err(|e| Error::io(&out, e))?;
    }
    fs::write(&out, buf).map_err(|e| Error::io(&out, e))?;
    let mut m = fit_manifest(&fit, &dir, a.reference_w);
    m.command = "sweep".into();
    m.config.insert("w".into(), format!("{:?}", fit.w));
    m.config.insert("rolls".into(), a.rolls.to_string());
    m.seeds.insert("path_seed".into(), a.path_seed);
    m.save_for(&out)?;
    Ok(SweepOutput { rows, out })
}

/// Runs a parsed command, printing a short summary to stdout.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(a) => {
            let p = cmd_gen(&a)?;
            println!("wrote {}", p.display());
        }
        Command::Fit(a) => {
            let o = cmd_fit(&a)?;
            for (w, p, map) in &o.maps {
                println!(
                    "w={w}: {} pieces, R2_avg={:.4} -> {}",
                    map.pieces.len(),
                    map.r2_avg,
                    p.display()
                );
                for piece in &map.pieces {
                    let hi = piece.hi.map_or("inf".to_string(), |h| format!("{h:.1}"));
                    println!(
                        "  [{:.1}, {hi}): theta0={:.4} theta1={:.4e} R2={:.4} n={}",
                        piece.lo, piece.theta0, piece.theta1, piece.r2, piece.points
                    );
                }
            }
            println!("scan table: {}", o.scan_file.display());
        }
        Command::Simulate(a) => {
            let o = cmd_simulate(&a)?;
            println!(
                "zbar={} rolls={} time={:.2}s",
                o.result.zbar,
                o.result.rolls(),
                o.result.wall_seconds
            );
            if let Some(g) = o.gap {
                println!("gap={:.4}%", 100.0 * g);
            }
            println!("wrote {}", o.out.display());
        }
        Command::Bound(a) => {
            let o = cmd_bound(&a)?;
            println!("kappa={} ({})", o.kappa, o.kappa_source);
            if a.epsilon == DEFAULT_EPSILON {
                println!("epsilon=1e-5 (inferred default)");
            }
            for r in &o.rows {
                println!(
                    "gamma={:<5} tau*={:>10.2}  bound(ceil tau*)={:.3e}",
                    r.gamma, r.tau_star, r.bound_at_ceil
                );
            }
            println!("wrote {}", o.out.display());
        }
        Command::TrainStationary(a) => {
            let o = cmd_train_stationary(&a)?;
            println!(
                "iterations={} cuts={} lower_bound={}",
                o.iterations,
                o.pool.len(),
                o.lower_bound.map_or("n/a".into(), |v| v.to_string())
            );
            println!("wrote {}", o.out.display());
        }
        Command::Sweep(a) => {
            let o = cmd_sweep(&a)?;
            println!(
                "{:>4} {:>14} {:>10} {:>9} {:>10} {:>10}",
                "w", "zbar", "gap%", "mean_tau", "time_s", "time_gap%"
            );
            for r in &o.rows {
                println!(
                    "{:>4} {:>14.2} {:>10.2} {:>9.2} {:>10.2} {:>10.2}",
                    r.w,
                    r.zbar,
                    100.0 * r.zbar_gap,
                    r.mean_tau,
                    r.time,
                    100.0 * r.time_gap
                );
            }
            println!("wrote {}", o.out.display());
        }
    }
    Ok(())
}
