//! Command-line front end.
//!
//! Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical failure.
//! `GP_SEED`, when set, overrides `--seed`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use robreg_core::diagnostics::{parameter_names, posterior_summary, SummaryTable};
use robreg_core::{fit, Draws, FitSettings, Method, RngStream};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::experiments::{
    aggregate_kl, aggregate_simulation, influence_table, kl_aggregate_table, mixing_tables, run_influence, run_kl_experiment,
    run_mixing, run_simulation_study, simulation_aggregate_table, InfluenceConfig, KlConfig, KlMethod, MixingConfig,
    ScenarioKind, SimulationConfig,
};
use crate::io::{create_dir, fmt_float, read_dataset, read_table, write_dataset, write_table, Table};
use crate::manifest::{Manifest, FILE_NAME};
use crate::recipes::{prepare_real_dataset, Recipe};

pub const SEED_ENV: &str = "GP_SEED";

#[derive(Debug, Parser)]
#[command(name = "robreg", version, about = "Robust Bayesian linear regression under the gamma-divergence")]
pub struct Cli {
    /// Maximum worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum Command {
    /// Fit one method to a data file.
    Fit(FitArgs),
    /// Replicated simulation study on the benchmark design.
    Simulate(SimulateArgs),
    /// KL divergence to the clean-data posterior on the simple regression.
    Kl(KlArgs),
    /// Posterior influence curves on the simple regression.
    Influence(InfluenceArgs),
    /// Chains of one coefficient under BL, Langevin and the bootstrap proposal.
    Mixing(MixingArgs),
    /// Turn a raw Boston or Diabetes table into a data file.
    Prepare(PrepareArgs),
    /// Repeat the run recorded in a manifest.
    Rerun(RerunArgs),
}

/// Sampler length and prior overrides shared by the fitting commands.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SamplerArgs {
    #[arg(long, default_value_t = 0.2)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 2000)]
    pub keep: usize,
    /// Prior variance of the intercept.
    #[arg(long)]
    pub prior_s_alpha: Option<f64>,
    /// Prior variance of each coefficient (normal priors).
    #[arg(long)]
    pub prior_s_beta: Option<f64>,
    /// Shape parameter of the sigma2 prior.
    #[arg(long)]
    pub prior_a: Option<f64>,
    #[arg(long)]
    pub prior_c1: Option<f64>,
    #[arg(long)]
    pub prior_c2: Option<f64>,
}

impl SamplerArgs {
    pub fn settings(&self, base: FitSettings) -> FitSettings {
        FitSettings {
            gamma: self.gamma,
            n_burn: self.burnin,
            n_keep: self.keep,
            s_alpha: self.prior_s_alpha.unwrap_or(base.s_alpha),
            s_beta: self.prior_s_beta.unwrap_or(base.s_beta),
            a: self.prior_a.unwrap_or(base.a),
            c1: self.prior_c1.unwrap_or(base.c1),
            c2: self.prior_c2.unwrap_or(base.c2),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct FitArgs {
    /// Data file: header row, response column `y`, covariates in the other columns.
    #[arg(long)]
    pub input: PathBuf,
    /// rbl, rhs, bl, tbl, cbl, synthetic, lm, tlm or clm.
    #[arg(long, default_value = "rbl")]
    pub method: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub sampler: SamplerArgs,
    /// Credible level of the intervals in summary.csv.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value = "homo-ii")]
    pub scenario: ScenarioKind,
    /// Contamination levels: omega for Homo, delta for Hetero.
    #[arg(long, visible_aliases = ["omega", "delta"], value_delimiter = ',', default_values_t = [0.05, 0.1, 0.15, 0.2])]
    pub levels: Vec<f64>,
    #[arg(long, default_value_t = 20)]
    pub p: usize,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = ["rbl", "rhs", "bl", "tbl", "cbl"].map(String::from))]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub sampler: SamplerArgs,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct KlArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.05, 0.1, 0.15, 0.2])]
    pub omega: Vec<f64>,
    /// Outlier error scales.
    #[arg(long, value_delimiter = ',', default_values_t = [10.0, 20.0])]
    pub a: Vec<f64>,
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    #[arg(long, value_delimiter = ',', default_values_t = KlMethod::ALL.map(|m| m.name().to_string()))]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 50)]
    pub reps: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 2000)]
    pub keep: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct InfluenceArgs {
    #[arg(long, default_value_t = 300)]
    pub n: usize,
    /// Posterior draws per method.
    #[arg(long, default_value_t = 10_000)]
    pub draws: usize,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    /// Monte Carlo samples for the expectation over the true density.
    #[arg(long, default_value_t = 2000)]
    pub g_samples: usize,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_values_t = [-0.5, 1.0])]
    pub x: Vec<f64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = -10.0)]
    pub z_min: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 10.0)]
    pub z_max: f64,
    #[arg(long, default_value_t = 201)]
    pub z_points: usize,
    #[arg(long, value_delimiter = ',', default_values_t = KlMethod::ALL.map(|m| m.name().to_string()))]
    pub methods: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct MixingArgs {
    #[arg(long, default_value_t = 20)]
    pub p: usize,
    #[arg(long, default_value_t = 0.2)]
    pub omega: f64,
    #[arg(long, default_value_t = 1000)]
    pub burnin: usize,
    #[arg(long, default_value_t = 2000)]
    pub keep: usize,
    /// Langevin step size.
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long, default_value_t = 40)]
    pub max_lag: usize,
    /// 1-based coefficient to trace.
    #[arg(long, default_value_t = 10)]
    pub coefficient: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct PrepareArgs {
    #[arg(long, value_enum)]
    pub recipe: Recipe,
    #[arg(long)]
    pub input: PathBuf,
    /// Output data file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    /// Output directory (default: the manifest's directory).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `GP_SEED` if set, else `seed`.
pub fn effective_seed(seed: u64) -> AppResult<u64> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| AppError::Usage(format!("{SEED_ENV}='{v}' is not a 64-bit unsigned integer"))),
        Err(_) => Ok(seed),
    }
}

pub fn run(cli: Cli) -> AppResult<()> {
    match cli.threads {
        Some(0) => Err(AppError::Usage("--threads must be at least 1".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| AppError::Usage(format!("thread pool: {e}")))?
            .install(|| execute(cli.command, true)),
        None => execute(cli.command, true),
    }
}

/// Runs `command`. `from_env` applies the `GP_SEED` override; reruns use
/// the recorded seed.
pub fn execute(command: Command, from_env: bool) -> AppResult<()> {
    let seed_of = |s: u64| if from_env { effective_seed(s) } else { Ok(s) };
    match command {
        Command::Fit(mut a) => {
            a.seed = seed_of(a.seed)?;
            command_fit(&a)
        }
        Command::Simulate(mut a) => {
            a.seed = seed_of(a.seed)?;
            command_simulate(&a)
        }
        Command::Kl(mut a) => {
            a.seed = seed_of(a.seed)?;
            command_kl(&a)
        }
        Command::Influence(mut a) => {
            a.seed = seed_of(a.seed)?;
            command_influence(&a)
        }
        Command::Mixing(mut a) => {
            a.seed = seed_of(a.seed)?;
            command_mixing(&a)
        }
        Command::Prepare(a) => command_prepare(&a),
        Command::Rerun(a) => command_rerun(&a),
    }
}

fn parse_methods<T>(names: &[String], parse: impl Fn(&str) -> Option<T>) -> AppResult<Vec<T>> {
    names.iter().map(|s| parse(s).ok_or_else(|| AppError::Usage(format!("unknown method '{s}'")))).collect()
}

/// Creates `out` and writes the manifest. An existing manifest must match,
/// so an interrupted study resumes only under its own configuration.
fn prepare_out_dir(out: &Path, command: Command, seed: u64, resumable: bool) -> AppResult<()> {
    if out.as_os_str().is_empty() {
        return Err(AppError::Usage("--out is required".into()));
    }
    create_dir(out)?;
    let manifest = Manifest::new(command, seed);
    let path = out.join(FILE_NAME);
    if resumable && path.exists() {
        let old = Manifest::read(&path)?;
        // `out` is not serialized, so compare the recorded forms.
        let same = serde_json::to_value(&old.command).ok() == serde_json::to_value(&manifest.command).ok();
        if !same || old.seed != manifest.seed {
            return Err(AppError::Usage(format!(
                "{} records a different configuration; use a fresh --out to start a new study",
                path.display()
            )));
        }
    }
    manifest.write(out)
}

pub fn draws_table(draws: &Draws) -> Table {
    let p = draws.p();
    let mut header = parameter_names(p);
    header.push("lambda".into());
    let mut t = Table::new(header);
    for s in draws.samples() {
        let mut row: Vec<String> = s.params().to_vec().into_iter().map(fmt_float).collect();
        row.push(fmt_float(s.lambda()));
        t.rows.push(row);
    }
    t
}

/// One row per parameter; `covariate` names the data column of each `beta_k`.
pub fn summary_table(summary: &SummaryTable, covariates: &[String]) -> Table {
    let header = ["parameter", "covariate", "median", "lower", "upper"];
    let mut t = Table::new(header.iter().map(|s| s.to_string()).collect());
    for (j, r) in summary.rows.iter().enumerate() {
        let cov = if j >= 1 && j <= covariates.len() { covariates[j - 1].clone() } else { String::new() };
        t.rows.push(vec![r.name.clone(), cov, fmt_float(r.median), fmt_float(r.lower), fmt_float(r.upper)]);
    }
    t
}

pub fn command_fit(a: &FitArgs) -> AppResult<()> {
    let method = Method::parse(&a.method).map_err(|_| AppError::Usage(format!("unknown method '{}'", a.method)))?;
    let settings = a.sampler.settings(FitSettings::default());
    let (data, names) = read_dataset(&a.input)?;
    if !(a.level > 0.0 && a.level < 1.0) {
        return Err(AppError::Usage(format!("--level must lie in (0, 1), got {}", a.level)));
    }
    let draws = fit(method, &data, &settings, &mut RngStream::new(a.seed))?;
    // Quantiles of a single draw mean nothing, so `--keep 1` writes draws only.
    let summary = if draws.len() >= 2 { Some(posterior_summary(&draws, a.level, None)?) } else { None };
    prepare_out_dir(&a.out, Command::Fit(a.clone()), a.seed, false)?;
    write_table(&a.out.join("draws.csv"), &draws_table(&draws))?;
    match summary {
        Some(summary) => write_table(&a.out.join("summary.csv"), &summary_table(&summary, &names))?,
        None => eprintln!("note: summary.csv needs at least 2 kept draws; skipped"),
    }
    if draws.mm_nonconverged > 0 {
        eprintln!("warning: {} inner MM solves hit the iteration cap", draws.mm_nonconverged);
    }
    Ok(())
}

pub fn simulation_config(a: &SimulateArgs) -> AppResult<SimulationConfig> {
    Ok(SimulationConfig {
        scenario: a.scenario,
        levels: if a.scenario == ScenarioKind::Clean { vec![0.0] } else { a.levels.clone() },
        p: a.p,
        n: a.n,
        methods: parse_methods(&a.methods, |s| Method::parse(s).ok())?,
        reps: a.reps,
        seed: a.seed,
        settings: a.sampler.settings(FitSettings::default()),
        credible_level: a.level,
    })
}

pub fn command_simulate(a: &SimulateArgs) -> AppResult<()> {
    let cfg = simulation_config(a)?;
    cfg.validate()?;
    prepare_out_dir(&a.out, Command::Simulate(a.clone()), a.seed, true)?;
    let rows = run_simulation_study(&cfg, Some(&a.out.join("results.csv")))?;
    write_table(&a.out.join("aggregate.csv"), &simulation_aggregate_table(&aggregate_simulation(&rows)))
}

pub fn kl_config(a: &KlArgs) -> AppResult<KlConfig> {
    Ok(KlConfig {
        omegas: a.omega.clone(),
        scales: a.a.clone(),
        n: a.n,
        reps: a.reps,
        seed: a.seed,
        methods: parse_methods(&a.methods, KlMethod::parse)?,
        settings: FitSettings { n_burn: a.burnin, n_keep: a.keep, ..FitSettings::vague() },
    })
}

pub fn command_kl(a: &KlArgs) -> AppResult<()> {
    let cfg = kl_config(a)?;
    cfg.validate()?;
    prepare_out_dir(&a.out, Command::Kl(a.clone()), a.seed, true)?;
    let rows = run_kl_experiment(&cfg, Some(&a.out.join("results.csv")))?;
    write_table(&a.out.join("aggregate.csv"), &kl_aggregate_table(&aggregate_kl(&rows)))
}

pub fn command_influence(a: &InfluenceArgs) -> AppResult<()> {
    let cfg = InfluenceConfig {
        n: a.n,
        draws: a.draws,
        n_burn: a.burnin,
        g_samples: a.g_samples,
        xs: a.x.clone(),
        z_min: a.z_min,
        z_max: a.z_max,
        z_points: a.z_points,
        methods: parse_methods(&a.methods, KlMethod::parse)?,
        seed: a.seed,
    };
    prepare_out_dir(&a.out, Command::Influence(a.clone()), a.seed, false)?;
    let result = run_influence(&cfg)?;
    write_table(&a.out.join("influence.csv"), &influence_table(&result))
}

pub fn command_mixing(a: &MixingArgs) -> AppResult<()> {
    let cfg = MixingConfig {
        p: a.p,
        omega: a.omega,
        n_burn: a.burnin,
        n_keep: a.keep,
        step: a.step,
        max_lag: a.max_lag,
        coefficient: a.coefficient,
        seed: a.seed,
    };
    prepare_out_dir(&a.out, Command::Mixing(a.clone()), a.seed, false)?;
    let (trace, acf) = mixing_tables(&run_mixing(&cfg)?);
    write_table(&a.out.join("trace.csv"), &trace)?;
    write_table(&a.out.join("acf.csv"), &acf)
}

pub fn command_prepare(a: &PrepareArgs) -> AppResult<()> {
    let raw = read_table(&a.input)?;
    let prepared = prepare_real_dataset(&raw, a.recipe).map_err(|e| match e {
        robreg_core::Error::Ingestion(m) => AppError::Data(format!("{}: {m}", a.input.display())),
        other => other.into(),
    })?;
    write_dataset(&a.out, &prepared.data, &prepared.names)
}

pub fn command_rerun(a: &RerunArgs) -> AppResult<()> {
    let manifest = Manifest::read(&a.manifest)?;
    let out = match &a.out {
        Some(o) => o.clone(),
        None => a.manifest.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let command = match manifest.command {
        Command::Fit(x) => Command::Fit(FitArgs { out, seed: manifest.seed, ..x }),
        Command::Simulate(x) => Command::Simulate(SimulateArgs { out, seed: manifest.seed, ..x }),
        Command::Kl(x) => Command::Kl(KlArgs { out, seed: manifest.seed, ..x }),
        Command::Influence(x) => Command::Influence(InfluenceArgs { out, seed: manifest.seed, ..x }),
        Command::Mixing(x) => Command::Mixing(MixingArgs { out, seed: manifest.seed, ..x }),
        Command::Prepare(_) | Command::Rerun(_) => {
            return Err(AppError::Data(format!("{} does not record a runnable command", a.manifest.display())))
        }
    };
    execute(command, false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_without_output_path() {
        let cli =
            Cli::try_parse_from(["robreg", "kl", "--omega", "0.05", "--a", "10", "--reps", "3", "--out", "/tmp/x"]).unwrap();
        let m = Manifest::new(cli.command.clone(), 9);
        let json = m.to_json();
        assert!(!json.contains("/tmp/x"));
        let back: Manifest = serde_json::from_str(&json).unwrap();
        match (back.command, cli.command) {
            (Command::Kl(b), Command::Kl(a)) => assert_eq!(b, KlArgs { out: PathBuf::new(), ..a }),
            _ => panic!("wrong command"),
        }
    }

    #[test]
    fn negative_x_values_parse() {
        let cli = Cli::try_parse_from(["robreg", "influence", "--x", "-0.5,1", "--z-min", "-3", "--out", "o"]).unwrap();
        match cli.command {
            Command::Influence(a) => {
                assert_eq!(a.x, [-0.5, 1.0]);
                assert_eq!(a.z_min, -3.0);
            }
            _ => panic!("wrong command"),
        }
    }

    #[test]
    fn prior_overrides_apply() {
        let cli = Cli::try_parse_from(["robreg", "fit", "--input", "d.csv", "--prior-a", "3", "--out", "o"]).unwrap();
        let Command::Fit(a) = cli.command else { panic!() };
        let s = a.sampler.settings(FitSettings::default());
        assert_eq!(s.a, 3.0);
        assert_eq!(s.s_alpha, FitSettings::default().s_alpha);
    }
}
