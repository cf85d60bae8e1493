//! Replicated experiments: the simulation study, the KL comparison, the
//! influence curves and the mixing comparison.
//!
//! Replicate `r` of grid cell `c` draws its data from the substream
//! `(experiment id, c, r)` and fits method `m` on `(experiment id, c, r, m)`,
//! so results do not depend on scheduling or on which rows already exist.

use std::collections::{HashMap, HashSet};
use std::fs::OpenOptions;
use std::hash::Hash;
use std::io::Write;
use std::path::Path;
use std::sync::Mutex;

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use robreg_core::baselines::langevin_chain;
use robreg_core::diagnostics::{
    acf, estimate_kl_gaussian, influence_curve, linspace, posterior_summary, ErrorDensity, InfluenceCurve, ParamSubset,
};
use robreg_core::methods::{CAUCHY_DF, T_DF};
use robreg_core::scenario::{generate_scenario, generate_simple_regression, WIDE_SD};
use robreg_core::{
    fit, Contamination, Dataset, Draws, FitSettings, GammaConfig, Method, Result as CoreResult, RngStream, ScenarioSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::io::{fmt_float, read_table_lenient, write_table, Table};

pub const EXP_SIMULATION: u64 = 1;
pub const EXP_KL: u64 = 2;
pub const EXP_INFLUENCE: u64 = 3;
pub const EXP_MIXING: u64 = 4;

/// One persisted replicate row.
pub trait Record: Sized + Send {
    type Key: Clone + Eq + Hash + Send + Sync + std::fmt::Debug;
    fn header() -> &'static [&'static str];
    fn key(&self) -> Self::Key;
    fn to_fields(&self) -> Vec<String>;
    /// `None` for rows that cannot be parsed, such as a line cut short by
    /// an interrupted run.
    fn from_fields(fields: &[String]) -> Option<Self>;
}

fn parse<T: std::str::FromStr>(s: &str) -> Option<T> {
    s.parse().ok()
}

/// Runs `work` for every key in `tasks` not already present in `path`,
/// appending each row as it completes, then rewrites `path` in task order.
pub fn run_persisted<T, F>(path: Option<&Path>, tasks: &[T::Key], work: F) -> AppResult<Vec<T>>
where
    T: Record,
    F: Fn(&T::Key) -> T + Sync,
{
    let header: Vec<String> = T::header().iter().map(|s| s.to_string()).collect();
    let wanted: HashSet<&T::Key> = tasks.iter().collect();
    let mut done: HashMap<T::Key, T> = HashMap::new();
    if let Some(p) = path.filter(|p| p.exists()) {
        let table = read_table_lenient(p)?;
        if table.header != header {
            return Err(AppError::Usage(format!("{} has an unexpected header", p.display())));
        }
        for row in table.rows.iter().filter_map(|r| T::from_fields(r)) {
            if !wanted.contains(&row.key()) {
                return Err(AppError::Usage(format!("{} holds row {:?} outside the requested design", p.display(), row.key())));
            }
            done.insert(row.key(), row);
        }
    }
    let sink = match path {
        Some(p) => {
            // Drop any partial line before appending.
            let mut existing: Vec<&T> = done.values().collect();
            let order: HashMap<&T::Key, usize> = tasks.iter().enumerate().map(|(i, k)| (k, i)).collect();
            existing.sort_by_key(|r| order[&r.key()]);
            write_rows(p, &header, existing.into_iter())?;
            let f = OpenOptions::new().append(true).open(p).map_err(|e| AppError::io(p, e))?;
            Some(Mutex::new((f, p)))
        }
        None => None,
    };
    let pending: Vec<&T::Key> = tasks.iter().filter(|k| !done.contains_key(*k)).collect();
    let fresh: Vec<AppResult<T>> = pending
        .par_iter()
        .map(|k| {
            let row = work(k);
            if let Some(s) = &sink {
                let line = csv_line(&row.to_fields())?;
                let mut guard = s.lock().expect("results sink poisoned");
                let (f, p) = &mut *guard;
                f.write_all(line.as_bytes()).and_then(|_| f.flush()).map_err(|e| AppError::io(*p, e))?;
            }
            Ok(row)
        })
        .collect();
    for row in fresh {
        let row = row?;
        done.insert(row.key(), row);
    }
    let rows: Vec<T> = tasks.iter().map(|k| done.remove(k).expect("every task has a row")).collect();
    if let Some(p) = path {
        write_rows(p, &header, rows.iter())?;
    }
    Ok(rows)
}

fn csv_line(fields: &[String]) -> AppResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(fields)?;
    let bytes = w.into_inner().map_err(|e| AppError::Data(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_rows<'a, T: Record + 'a>(path: &Path, header: &[String], rows: impl Iterator<Item = &'a T>) -> AppResult<()> {
    let mut table = Table::new(header.to_vec());
    table.rows.extend(rows.map(|r| r.to_fields()));
    write_table(path, &table)
}

/// Mean and Monte Carlo standard error `sd / sqrt(R)`; the error is NaN
/// with fewer than two values.
pub fn mean_mcse(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

fn status_of<T>(r: &CoreResult<T>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => format!("error: {e}"),
    }
}

fn parse_status(s: &str) -> Option<String> {
    (s == "ok" || s.starts_with("error: ")).then(|| s.to_string())
}

// ---------------------------------------------------------------------------
// Simulation study

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Clean,
    /// Contaminating `N(0, 10^2)` with constant probability `omega`.
    HomoI,
    /// Contaminating `N(10, 1)` with constant probability `omega`.
    HomoII,
    /// Contaminating `N(0, 10^2)` with probability `delta * logistic(-3.3 + x_10)`.
    HeteroI,
    HeteroII,
}

impl ScenarioKind {
    pub fn contamination(self, level: f64) -> Contamination {
        match self {
            ScenarioKind::Clean => Contamination::None,
            ScenarioKind::HomoI => Contamination::HomoI { omega: level, scale: WIDE_SD },
            ScenarioKind::HomoII => Contamination::HomoII { omega: level },
            ScenarioKind::HeteroI => Contamination::HeteroI { delta: level },
            ScenarioKind::HeteroII => Contamination::HeteroII { delta: level },
        }
    }

    pub fn is_hetero(self) -> bool {
        matches!(self, ScenarioKind::HeteroI | ScenarioKind::HeteroII)
    }
}

#[derive(Debug, Clone)]
pub struct SimulationConfig {
    pub scenario: ScenarioKind,
    /// `omega` (Homo) or `delta` (Hetero) per grid cell.
    pub levels: Vec<f64>,
    pub p: usize,
    pub n: usize,
    pub methods: Vec<Method>,
    pub reps: usize,
    pub seed: u64,
    pub settings: FitSettings,
    pub credible_level: f64,
}

impl SimulationConfig {
    /// Benchmark truth at `p` coefficients and sample size `n`.
    pub fn spec(&self, cell: usize) -> CoreResult<ScenarioSpec> {
        ScenarioSpec::benchmark(self.p, self.scenario.contamination(self.levels[cell]))?.with_n(self.n)
    }

    /// Checks the design before any work starts.
    pub fn validate(&self) -> CoreResult<()> {
        if self.reps == 0 || self.levels.is_empty() || self.methods.is_empty() {
            return Err(robreg_core::Error::Domain("need at least one replicate, level and method".into()));
        }
        if self.scenario.is_hetero() && self.p < 10 {
            return Err(robreg_core::Error::Domain(format!("heterogeneous scenarios need p >= 10, got {}", self.p)));
        }
        for cell in 0..self.levels.len() {
            self.spec(cell)?;
        }
        Ok(())
    }

    pub fn tasks(&self) -> Vec<SimKey> {
        let mut out = Vec::new();
        for cell in 0..self.levels.len() {
            for &method in &self.methods {
                for rep in 0..self.reps {
                    out.push(SimKey { cell, method, rep });
                }
            }
        }
        out
    }

    pub fn dataset(&self, cell: usize, rep: usize) -> CoreResult<Dataset> {
        let mut rng = RngStream::substream(self.seed, &[EXP_SIMULATION, cell as u64, rep as u64]);
        generate_scenario(&self.spec(cell)?, &mut rng)
    }
}

fn method_stream_id(m: Method) -> u64 {
    Method::ALL.iter().position(|&x| x == m).expect("method listed") as u64 + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SimKey {
    pub cell: usize,
    pub method: Method,
    pub rep: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub cell: usize,
    pub level: f64,
    pub method: Method,
    pub rep: usize,
    pub mse: f64,
    pub log_mse: f64,
    pub al: f64,
    pub cp: f64,
    pub mm_nonconverged: usize,
    pub status: String,
}

impl Record for SimRow {
    type Key = SimKey;

    fn header() -> &'static [&'static str] {
        &["cell", "level", "method", "rep", "mse", "log_mse", "al", "cp", "mm_nonconverged", "status"]
    }

    fn key(&self) -> SimKey {
        SimKey { cell: self.cell, method: self.method, rep: self.rep }
    }

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.cell.to_string(),
            fmt_float(self.level),
            self.method.name().into(),
            self.rep.to_string(),
            fmt_float(self.mse),
            fmt_float(self.log_mse),
            fmt_float(self.al),
            fmt_float(self.cp),
            self.mm_nonconverged.to_string(),
            self.status.clone(),
        ]
    }

    fn from_fields(f: &[String]) -> Option<Self> {
        if f.len() != 10 {
            return None;
        }
        Some(SimRow {
            cell: parse(&f[0])?,
            level: parse(&f[1])?,
            method: Method::parse(&f[2]).ok()?,
            rep: parse(&f[3])?,
            mse: parse(&f[4])?,
            log_mse: parse(&f[5])?,
            al: parse(&f[6])?,
            cp: parse(&f[7])?,
            mm_nonconverged: parse(&f[8])?,
            status: parse_status(&f[9])?,
        })
    }
}

/// Fits one replicate. Failures become rows with NaN metrics.
pub fn simulation_replicate(cfg: &SimulationConfig, key: &SimKey) -> SimRow {
    let outcome = (|| {
        let data = cfg.dataset(key.cell, key.rep)?;
        let mut rng =
            RngStream::substream(cfg.seed, &[EXP_SIMULATION, key.cell as u64, key.rep as u64, method_stream_id(key.method)]);
        let draws = fit(key.method, &data, &cfg.settings, &mut rng)?;
        let truth = cfg.spec(key.cell)?.truth();
        let table = posterior_summary(&draws, cfg.credible_level, Some(&truth))?;
        Ok((table, draws.mm_nonconverged))
    })();
    let status = status_of(&outcome);
    let (mse, al, cp, nc) = match outcome {
        Ok((t, nc)) => (t.mse.unwrap_or(f64::NAN), t.al.unwrap_or(f64::NAN), t.cp.unwrap_or(f64::NAN), nc),
        Err(_) => (f64::NAN, f64::NAN, f64::NAN, 0),
    };
    SimRow {
        cell: key.cell,
        level: cfg.levels[key.cell],
        method: key.method,
        rep: key.rep,
        mse,
        log_mse: mse.ln(),
        al,
        cp,
        mm_nonconverged: nc,
        status,
    }
}

pub fn run_simulation_study(cfg: &SimulationConfig, results: Option<&Path>) -> AppResult<Vec<SimRow>> {
    cfg.validate()?;
    run_persisted(results, &cfg.tasks(), |k| simulation_replicate(cfg, k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimAggregate {
    pub cell: usize,
    pub level: f64,
    pub method: Method,
    pub reps: usize,
    pub failures: usize,
    pub log_mse: (f64, f64),
    pub mse: (f64, f64),
    pub al: (f64, f64),
    pub cp: (f64, f64),
}

/// Per cell and method, in first-appearance order of the rows; failed
/// replicates are counted and left out of the means.
pub fn aggregate_simulation(rows: &[SimRow]) -> Vec<SimAggregate> {
    let mut keys: Vec<(usize, Method)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.cell, r.method)) {
            keys.push((r.cell, r.method));
        }
    }
    keys.into_iter()
        .map(|(cell, method)| {
            let group: Vec<&SimRow> = rows.iter().filter(|r| r.cell == cell && r.method == method).collect();
            let ok: Vec<&&SimRow> = group.iter().filter(|r| r.status == "ok").collect();
            let col = |f: fn(&SimRow) -> f64| mean_mcse(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
            SimAggregate {
                cell,
                level: group[0].level,
                method,
                reps: ok.len(),
                failures: group.len() - ok.len(),
                log_mse: col(|r| r.log_mse),
                mse: col(|r| r.mse),
                al: col(|r| r.al),
                cp: col(|r| r.cp),
            }
        })
        .collect()
}

pub fn simulation_aggregate_table(agg: &[SimAggregate]) -> Table {
    let header = [
        "cell",
        "level",
        "method",
        "reps",
        "failures",
        "mean_log_mse",
        "mcse_log_mse",
        "mean_mse",
        "mcse_mse",
        "mean_al",
        "mcse_al",
        "mean_cp",
        "mcse_cp",
    ];
    let mut t = Table::new(header.iter().map(|s| s.to_string()).collect());
    for a in agg {
        let mut row =
            vec![a.cell.to_string(), fmt_float(a.level), a.method.name().into(), a.reps.to_string(), a.failures.to_string()];
        for (m, s) in [a.log_mse, a.mse, a.al, a.cp] {
            row.push(fmt_float(m));
            row.push(fmt_float(s));
        }
        t.rows.push(row);
    }
    t
}

// ---------------------------------------------------------------------------
// KL comparison on the simple regression

/// Methods of the KL comparison: likelihood fits with normal, Cauchy and t
/// errors, and the synthetic posterior at gamma 0.2 and 0.5.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum KlMethod {
    Lm,
    CLm,
    TLm,
    Rbr1,
    Rbr2,
}

impl KlMethod {
    pub const ALL: [KlMethod; 5] = [KlMethod::Lm, KlMethod::CLm, KlMethod::TLm, KlMethod::Rbr1, KlMethod::Rbr2];

    pub fn name(self) -> &'static str {
        match self {
            KlMethod::Lm => "lm",
            KlMethod::CLm => "clm",
            KlMethod::TLm => "tlm",
            KlMethod::Rbr1 => "rbr1",
            KlMethod::Rbr2 => "rbr2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        let l = s.to_ascii_lowercase().replace('-', "");
        Self::ALL.into_iter().find(|m| m.name() == l)
    }

    /// Underlying method and gamma.
    pub fn method(self) -> (Method, f64) {
        match self {
            KlMethod::Lm => (Method::Lm, 0.0),
            KlMethod::CLm => (Method::CLm, 0.0),
            KlMethod::TLm => (Method::TLm, 0.0),
            KlMethod::Rbr1 => (Method::Synthetic, 0.2),
            KlMethod::Rbr2 => (Method::Synthetic, 0.5),
        }
    }

    /// Error density used for `H` in the influence curves.
    pub fn density(self) -> ErrorDensity {
        match self {
            KlMethod::TLm => ErrorDensity::StudentT(T_DF),
            KlMethod::CLm => ErrorDensity::StudentT(CAUCHY_DF),
            _ => ErrorDensity::Normal,
        }
    }

    fn settings(self, base: &FitSettings) -> FitSettings {
        let (m, gamma) = self.method();
        FitSettings { gamma: if m.is_synthetic() { gamma } else { base.gamma }, ..*base }
    }

    pub fn fit(self, data: &Dataset, base: &FitSettings, rng: &mut RngStream) -> CoreResult<Draws> {
        fit(self.method().0, data, &self.settings(base), rng)
    }
}

#[derive(Debug, Clone)]
pub struct KlConfig {
    pub omegas: Vec<f64>,
    /// Outlier scales `a`: the first `n omega` errors are `N(0, a^2)`.
    pub scales: Vec<f64>,
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub methods: Vec<KlMethod>,
    /// Priors are flat (`FitSettings::vague`) unless overridden.
    pub settings: FitSettings,
}

impl KlConfig {
    pub fn cells(&self) -> Vec<(f64, f64)> {
        self.omegas.iter().flat_map(|&o| self.scales.iter().map(move |&a| (o, a))).collect()
    }

    pub fn tasks(&self) -> Vec<KlKey> {
        let mut out = Vec::new();
        for cell in 0..self.cells().len() {
            for &method in &self.methods {
                for rep in 0..self.reps {
                    out.push(KlKey { cell, method, rep });
                }
            }
        }
        out
    }

    pub fn validate(&self) -> CoreResult<()> {
        if self.reps == 0 || self.methods.is_empty() || self.cells().is_empty() {
            return Err(robreg_core::Error::Domain("need at least one replicate, cell and method".into()));
        }
        for (o, a) in self.cells() {
            if !(0.0..1.0).contains(&o) || (self.n as f64 * (1.0 - o)).round() < 3.0 {
                return Err(robreg_core::Error::Domain(format!("omega {o} leaves too few clean observations")));
            }
            if !(a > 0.0) {
                return Err(robreg_core::Error::Domain(format!("outlier scale must be positive, got {a}")));
            }
        }
        Ok(())
    }

    pub fn dataset(&self, cell: usize, rep: usize) -> CoreResult<Dataset> {
        let (omega, a) = self.cells()[cell];
        let mut rng = RngStream::substream(self.seed, &[EXP_KL, cell as u64, rep as u64]);
        generate_simple_regression(self.n, omega, a, &mut rng)
    }

    /// Normal-likelihood posterior on the clean observations.
    pub fn oracle(&self, data: &Dataset, cell: usize, rep: usize) -> CoreResult<Draws> {
        let mut rng = RngStream::substream(self.seed, &[EXP_KL, cell as u64, rep as u64, 0]);
        fit(Method::Lm, &data.clean_subset()?, &self.settings, &mut rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KlKey {
    pub cell: usize,
    pub method: KlMethod,
    pub rep: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KlRow {
    pub cell: usize,
    pub omega: f64,
    pub a: f64,
    pub method: KlMethod,
    pub rep: usize,
    pub kl: f64,
    pub regularized: bool,
    pub status: String,
}

impl Record for KlRow {
    type Key = KlKey;

    fn header() -> &'static [&'static str] {
        &["cell", "omega", "a", "method", "rep", "kl", "regularized", "status"]
    }

    fn key(&self) -> KlKey {
        KlKey { cell: self.cell, method: self.method, rep: self.rep }
    }

    fn to_fields(&self) -> Vec<String> {
        vec![
            self.cell.to_string(),
            fmt_float(self.omega),
            fmt_float(self.a),
            self.method.name().into(),
            self.rep.to_string(),
            fmt_float(self.kl),
            u8::from(self.regularized).to_string(),
            self.status.clone(),
        ]
    }

    fn from_fields(f: &[String]) -> Option<Self> {
        if f.len() != 8 {
            return None;
        }
        Some(KlRow {
            cell: parse(&f[0])?,
            omega: parse(&f[1])?,
            a: parse(&f[2])?,
            method: KlMethod::parse(&f[3])?,
            rep: parse(&f[4])?,
            kl: parse(&f[5])?,
            regularized: parse::<u8>(&f[6])? == 1,
            status: parse_status(&f[7])?,
        })
    }
}

pub fn kl_replicate(cfg: &KlConfig, key: &KlKey) -> KlRow {
    let (omega, a) = cfg.cells()[key.cell];
    let outcome = (|| {
        let data = cfg.dataset(key.cell, key.rep)?;
        let oracle = cfg.oracle(&data, key.cell, key.rep)?;
        let mid = KlMethod::ALL.iter().position(|&m| m == key.method).expect("listed") as u64 + 1;
        let mut rng = RngStream::substream(cfg.seed, &[EXP_KL, key.cell as u64, key.rep as u64, mid]);
        let draws = key.method.fit(&data, &cfg.settings, &mut rng)?;
        estimate_kl_gaussian(&oracle, &draws, ParamSubset::Coefficients)
    })();
    let status = status_of(&outcome);
    let (kl, regularized) = outcome.map(|k| (k.value, k.regularized)).unwrap_or((f64::NAN, false));
    KlRow { cell: key.cell, omega, a, method: key.method, rep: key.rep, kl, regularized, status }
}

pub fn run_kl_experiment(cfg: &KlConfig, results: Option<&Path>) -> AppResult<Vec<KlRow>> {
    cfg.validate()?;
    run_persisted(results, &cfg.tasks(), |k| kl_replicate(cfg, k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct KlAggregate {
    pub cell: usize,
    pub omega: f64,
    pub a: f64,
    pub method: KlMethod,
    pub reps: usize,
    pub failures: usize,
    pub kl: (f64, f64),
}

pub fn aggregate_kl(rows: &[KlRow]) -> Vec<KlAggregate> {
    let mut keys: Vec<(usize, KlMethod)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.cell, r.method)) {
            keys.push((r.cell, r.method));
        }
    }
    keys.into_iter()
        .map(|(cell, method)| {
            let group: Vec<&KlRow> = rows.iter().filter(|r| r.cell == cell && r.method == method).collect();
            let ok: Vec<f64> = group.iter().filter(|r| r.status == "ok").map(|r| r.kl).collect();
            KlAggregate {
                cell,
                omega: group[0].omega,
                a: group[0].a,
                method,
                reps: ok.len(),
                failures: group.len() - ok.len(),
                kl: mean_mcse(&ok),
            }
        })
        .collect()
}

pub fn kl_aggregate_table(agg: &[KlAggregate]) -> Table {
    let header = ["cell", "omega", "a", "method", "reps", "failures", "mean_kl", "mcse_kl"];
    let mut t = Table::new(header.iter().map(|s| s.to_string()).collect());
    for a in agg {
        t.rows.push(vec![
            a.cell.to_string(),
            fmt_float(a.omega),
            fmt_float(a.a),
            a.method.name().into(),
            a.reps.to_string(),
            a.failures.to_string(),
            fmt_float(a.kl.0),
            fmt_float(a.kl.1),
        ]);
    }
    t
}

// ---------------------------------------------------------------------------
// Influence curves

#[derive(Debug, Clone)]
pub struct InfluenceConfig {
    pub n: usize,
    pub draws: usize,
    pub n_burn: usize,
    pub g_samples: usize,
    pub xs: Vec<f64>,
    pub z_min: f64,
    pub z_max: f64,
    pub z_points: usize,
    pub methods: Vec<KlMethod>,
    pub seed: u64,
}

impl Default for InfluenceConfig {
    fn default() -> Self {
        InfluenceConfig {
            n: 300,
            draws: 10_000,
            n_burn: 1000,
            g_samples: 2000,
            xs: vec![-0.5, 1.0],
            z_min: -10.0,
            z_max: 10.0,
            z_points: 201,
            methods: KlMethod::ALL.to_vec(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct InfluenceResult {
    pub z_grid: Vec<f64>,
    pub xs: Vec<f64>,
    pub methods: Vec<KlMethod>,
    /// `curves[m][j]` is method `m` at `xs[j]`.
    pub curves: Vec<Vec<InfluenceCurve>>,
}

/// Posterior influence curves on clean data from the simple model
/// `y = x + e`, with the outlier at residual `z` from that line.
pub fn run_influence(cfg: &InfluenceConfig) -> AppResult<InfluenceResult> {
    if cfg.z_points < 2 || !(cfg.z_min < cfg.z_max) || cfg.xs.is_empty() || cfg.methods.is_empty() {
        return Err(AppError::Usage("influence needs z_min < z_max, two grid points, an x and a method".into()));
    }
    let z_grid = linspace(cfg.z_min, cfg.z_max, cfg.z_points);
    let data = generate_simple_regression(cfg.n, 0.0, 1.0, &mut RngStream::substream(cfg.seed, &[EXP_INFLUENCE, 0]))?;
    let g: Vec<Vec<f64>> = cfg
        .xs
        .iter()
        .enumerate()
        .map(|(j, &x)| {
            let mut rng = RngStream::substream(cfg.seed, &[EXP_INFLUENCE, 1, j as u64]);
            (0..cfg.g_samples).map(|_| x + Distribution::<f64>::sample(&StandardNormal, &mut rng)).collect()
        })
        .collect();
    let settings = FitSettings { n_burn: cfg.n_burn, n_keep: cfg.draws, ..FitSettings::vague() };
    let curves = cfg
        .methods
        .par_iter()
        .enumerate()
        .map(|(mi, &m)| -> CoreResult<Vec<InfluenceCurve>> {
            let mut rng = RngStream::substream(cfg.seed, &[EXP_INFLUENCE, 2, mi as u64]);
            let draws = m.fit(&data, &settings, &mut rng)?;
            let gamma = if m.method().0.is_synthetic() { m.method().1 } else { 0.0 };
            cfg.xs.iter().zip(&g).map(|(&x, gs)| influence_curve(&draws, &z_grid, x, x, gamma, m.density(), gs, cfg.n)).collect()
        })
        .collect::<CoreResult<Vec<_>>>()?;
    Ok(InfluenceResult { z_grid, xs: cfg.xs.clone(), methods: cfg.methods.clone(), curves })
}

/// Long over `(x, z)`, wide over methods: `x, z, <m>_alpha, <m>_beta, ...`.
pub fn influence_table(r: &InfluenceResult) -> Table {
    let mut header = vec!["x".to_string(), "z".to_string()];
    for m in &r.methods {
        header.push(format!("{}_alpha", m.name()));
        header.push(format!("{}_beta", m.name()));
    }
    let mut t = Table::new(header);
    for (j, &x) in r.xs.iter().enumerate() {
        for (i, &z) in r.z_grid.iter().enumerate() {
            let mut row = vec![fmt_float(x), fmt_float(z)];
            for c in &r.curves {
                row.push(fmt_float(c[j].if_values[i][0]));
                row.push(fmt_float(c[j].if_values[i][1]));
            }
            t.rows.push(row);
        }
    }
    t
}

// ---------------------------------------------------------------------------
// Mixing comparison

#[derive(Debug, Clone)]
pub struct MixingConfig {
    pub p: usize,
    pub omega: f64,
    pub n_burn: usize,
    pub n_keep: usize,
    pub step: f64,
    pub max_lag: usize,
    /// 1-based coefficient whose chain is compared.
    pub coefficient: usize,
    pub seed: u64,
}

impl Default for MixingConfig {
    fn default() -> Self {
        MixingConfig { p: 20, omega: 0.2, n_burn: 1000, n_keep: 2000, step: 0.01, max_lag: 40, coefficient: 10, seed: 0 }
    }
}

/// Chains of one coefficient under BL, the Langevin comparator and the
/// bootstrap-MM proposal, on one (II)-Homo replicate.
#[derive(Debug, Clone)]
pub struct MixingResult {
    pub labels: [&'static str; 3],
    pub traces: [Vec<f64>; 3],
    pub acfs: [Vec<f64>; 3],
}

pub fn run_mixing(cfg: &MixingConfig) -> AppResult<MixingResult> {
    if cfg.coefficient == 0 || cfg.coefficient > cfg.p {
        return Err(AppError::Usage(format!("coefficient must lie in 1..={}", cfg.p)));
    }
    let spec = ScenarioSpec::benchmark(cfg.p, Contamination::HomoII { omega: cfg.omega })?;
    let data = generate_scenario(&spec, &mut RngStream::substream(cfg.seed, &[EXP_MIXING, 0]))?;
    let settings = FitSettings { n_burn: cfg.n_burn, n_keep: cfg.n_keep, ..FitSettings::default() };
    let stream = |k: u64| RngStream::substream(cfg.seed, &[EXP_MIXING, k]);
    let bl = fit(Method::Bl, &data, &settings, &mut stream(1))?;
    let prior = Method::Rbl.prior(cfg.p, &settings)?;
    let gcfg = GammaConfig::with_gamma(settings.gamma)?;
    let lang = langevin_chain(&data, &prior, &gcfg, cfg.step, cfg.n_burn, cfg.n_keep, &mut stream(2))?;
    let prop = fit(Method::Rbl, &data, &settings, &mut stream(3))?;
    let traces = [bl, lang, prop].map(|d| d.beta_series(cfg.coefficient));
    let acfs = [acf(&traces[0], cfg.max_lag)?, acf(&traces[1], cfg.max_lag)?, acf(&traces[2], cfg.max_lag)?];
    Ok(MixingResult { labels: ["bl", "rbl_langevin", "rbl_proposal"], traces, acfs })
}

pub fn mixing_tables(r: &MixingResult) -> (Table, Table) {
    let with = |first: &str| {
        let mut h = vec![first.to_string()];
        h.extend(r.labels.iter().map(|s| s.to_string()));
        Table::new(h)
    };
    let mut trace = with("iteration");
    for i in 0..r.traces[0].len() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(r.traces.iter().map(|t| fmt_float(t[i])));
        trace.rows.push(row);
    }
    let mut acf_t = with("lag");
    for k in 0..r.acfs[0].len() {
        let mut row = vec![k.to_string()];
        row.extend(r.acfs.iter().map(|a| fmt_float(a[k])));
        acf_t.rows.push(row);
    }
    (trace, acf_t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mcse_is_sd_over_root_r() {
        let (m, s) = mean_mcse(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
        assert!(mean_mcse(&[1.0]).1.is_nan());
    }

    #[test]
    fn rows_round_trip_through_fields() {
        let row = SimRow {
            cell: 2,
            level: 0.15,
            method: Method::TBl,
            rep: 7,
            mse: 0.1 / 3.0,
            log_mse: (0.1f64 / 3.0).ln(),
            al: 1.25,
            cp: 0.95,
            mm_nonconverged: 3,
            status: "ok".into(),
        };
        assert_eq!(SimRow::from_fields(&row.to_fields()), Some(row));
        let kl = KlRow {
            cell: 1,
            omega: 0.2,
            a: 20.0,
            method: KlMethod::Rbr2,
            rep: 0,
            kl: 0.3,
            regularized: true,
            status: "ok".into(),
        };
        assert_eq!(KlRow::from_fields(&kl.to_fields()), Some(kl));
    }

    #[test]
    fn truncated_rows_are_rejected() {
        let f: Vec<String> = ["0", "0.2", "rbl", "3", "0.1", "-2.3"].iter().map(|s| s.to_string()).collect();
        assert!(SimRow::from_fields(&f).is_none());
        let mut g: Vec<String> =
            ["0", "0.2", "rbl", "3", "0.1", "-2.3", "1", "0.9", "0", "o"].iter().map(|s| s.to_string()).collect();
        assert!(SimRow::from_fields(&g).is_none());
        g[9] = "ok".into();
        assert!(SimRow::from_fields(&g).is_some());
    }

    #[test]
    fn hetero_needs_ten_covariates() {
        let cfg = SimulationConfig {
            scenario: ScenarioKind::HeteroII,
            levels: vec![1.0],
            p: 5,
            n: 50,
            methods: vec![Method::Bl],
            reps: 1,
            seed: 1,
            settings: FitSettings::default(),
            credible_level: 0.95,
        };
        assert!(cfg.validate().is_err());
    }
}
