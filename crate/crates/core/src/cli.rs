//! Command-line front end: `simulate`, `classify`, `rates`, `bench`, `realdata`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::adaptive::{adaptive_multi_source, adaptive_two_source};
use crate::bench::{
    baseline_k, knn_q_baseline, run_experiment_with, write_results_csv, Classifier,
    ExperimentConfig, PooledSources,
};
use crate::dataset::SourceDataset;
use crate::estimators::{fixed_weighted_knn, theorem3_tuning};
use crate::exec::Execution;
use crate::geometry::PointSet;
use crate::io::{
    load_csv, normalize_minmax, read_points_csv, read_source_csv, real_data_protocol,
    split_by_binary, write_real_data_csv, write_source_csv,
};
use crate::synth::{sample_dataset, DgpConfig, DgpId, Role};
use crate::theory::{
    classify_regime, minimax_exponent_single, minimax_rate_general, suboptimal_upper_bound,
    Branch, RateParams,
};

#[derive(Debug, Parser)]
#[command(name = "pdknn", version, about = "Transfer kNN classification under posterior drift")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a labeled dataset from one of the simulation designs.
    Simulate(SimulateArgs),
    /// Classify query points from training CSVs.
    Classify(ClassifyArgs),
    /// Minimax exponent, rate value and regime for a parameter tuple.
    Rates(RatesArgs),
    /// Run the Monte Carlo comparison and write one CSV row per classifier.
    Bench(BenchArgs),
    /// Repeated random-split evaluation on a tabular dataset.
    Realdata(RealdataArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum DgpArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
}

impl From<DgpArg> for DgpId {
    fn from(a: DgpArg) -> Self {
        match a {
            DgpArg::One => DgpId::Dgp1,
            DgpArg::Two => DgpId::Dgp2,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum RoleArg {
    #[value(name = "P", alias = "p")]
    P,
    #[value(name = "Q", alias = "q")]
    Q,
}

#[derive(Debug, clap::Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    pub dgp: DgpArg,
    #[arg(long)]
    pub kappa: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum)]
    pub role: RoleArg,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Algorithm {
    Adaptive,
    CwLike,
    KnnQ,
    KnnAll,
    Fixed,
}

#[derive(Debug, clap::Args)]
pub struct ClassifyArgs {
    /// Source (P) training data.
    #[arg(long)]
    pub p: PathBuf,
    /// Target (Q) training data; omitted means n_Q = 0.
    #[arg(long)]
    pub q: Option<PathBuf>,
    /// Further source samples (adaptive only).
    #[arg(long = "source")]
    pub extra: Vec<PathBuf>,
    #[arg(long)]
    pub query: PathBuf,
    #[arg(long, value_enum, default_value = "adaptive")]
    pub algorithm: Algorithm,
    /// Smoothness and transfer exponents for `fixed`.
    #[arg(long, default_value_t = 1.0)]
    pub beta_p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta_q: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct RatesArgs {
    #[arg(long)]
    pub alpha: f64,
    #[arg(long)]
    pub gamma: f64,
    #[arg(long = "beta-p")]
    pub beta_p: f64,
    #[arg(long = "beta-q")]
    pub beta_q: f64,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub np: u64,
    #[arg(long, default_value_t = 0)]
    pub nq: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct BenchArgs {
    /// TOML file with one or more `[[experiment]]` tables; overrides the
    /// sweep flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "1")]
    pub dgp: DgpArg,
    /// One or more kappa values (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub kappa: Vec<f64>,
    #[arg(long, default_value_t = 0.6)]
    pub gamma: f64,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    /// One or more n_P values (comma separated).
    #[arg(long, value_delimiter = ',', default_value = "2000")]
    pub np: Vec<usize>,
    #[arg(long, default_value_t = 2000)]
    pub nq: usize,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 200)]
    pub test_points: usize,
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "ADAPTIVE,KNN_CW_LIKE,KNN_Q,KNN_ALL"
    )]
    pub classifiers: Vec<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run trials on the calling thread only.
    #[arg(long)]
    pub serial: bool,
    /// Write 0 for wall times so repeated runs are byte-identical.
    #[arg(long)]
    pub omit_timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct RealdataArgs {
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long, default_value = "y")]
    pub label: String,
    #[arg(long, value_delimiter = ',', default_value = "V2,V3,V7,V13")]
    pub features: Vec<String>,
    #[arg(long, default_value = "V1")]
    pub split: String,
    #[arg(long = "nq-train", value_delimiter = ',', default_value = "100,120,140")]
    pub nq_train: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    pub replications: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub serial: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
struct BenchFile {
    experiment: Vec<ExperimentConfig>,
}

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn exec(serial: bool) -> Execution {
    if serial {
        Execution::Serial
    } else {
        Execution::Parallel
    }
}

pub fn run<I, T>(args: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Classify(a) => classify(a),
        Command::Rates(a) => rates(a),
        Command::Bench(a) => bench(a),
        Command::Realdata(a) => realdata(a),
    }
}

fn simulate(a: SimulateArgs) -> anyhow::Result<()> {
    let cfg = DgpConfig::new(a.dgp.into(), a.kappa, a.gamma, a.d)?;
    let role = match a.role {
        RoleArg::P => Role::P,
        RoleArg::Q => Role::Q,
    };
    let data = sample_dataset(&cfg, role, a.n, a.seed)?;
    write_source_csv(sink(a.out.as_deref())?, &data)?;
    Ok(())
}

fn load(path: &Path, tag: &str) -> anyhow::Result<SourceDataset> {
    read_source_csv(path, tag).with_context(|| format!("reading {}", path.display()))
}

fn classify(a: ClassifyArgs) -> anyhow::Result<()> {
    let p = load(&a.p, "P")?;
    let q = match &a.q {
        Some(path) => load(path, "Q")?,
        None => SourceDataset::empty("Q", p.dim()),
    };
    let mut sources = vec![p, q];
    for (j, path) in a.extra.iter().enumerate() {
        sources.push(load(path, &format!("P_{}", j + 2))?);
    }
    if sources.len() > 2 && !matches!(a.algorithm, Algorithm::Adaptive) {
        bail!("extra --source samples are only supported by the adaptive algorithm");
    }
    let (queries, _) = read_points_csv(&a.query).with_context(|| format!("reading {}", a.query.display()))?;

    let mut header = vec!["query".to_string(), "label".into(), "k_p".into(), "k_q".into()];
    header.extend((2..sources.len()).map(|j| format!("k_{j}")));
    header.extend(["r", "threshold", "iterations", "stop_reason"].map(String::from));

    let pooled = match a.algorithm {
        Algorithm::CwLike | Algorithm::KnnAll => Some(PooledSources::new(&sources[0], &sources[1])?),
        _ => None,
    };
    let plan = match a.algorithm {
        Algorithm::Fixed => Some(theorem3_tuning(&RateParams {
            alpha: 0.0,
            beta_p: a.beta_p,
            beta_q: a.beta_q,
            gamma: a.gamma,
            d: sources[0].dim(),
            n_p: sources[0].len() as u64,
            n_q: sources[1].len() as u64,
        })?),
        _ => None,
    };

    let mut w = csv::Writer::from_writer(sink(a.out.as_deref())?);
    w.write_record(&header)?;
    let blank = String::new;
    for (i, x) in queries.iter().enumerate() {
        let mut row = vec![i.to_string()];
        match a.algorithm {
            Algorithm::Adaptive => {
                let (label, sel) = if sources.len() == 2 {
                    adaptive_two_source(&sources[0], &sources[1], x)?
                } else {
                    adaptive_multi_source(&sources, x)?
                };
                row.push(label.to_string());
                row.extend(sel.ks.iter().map(usize::to_string));
                row.push(sel.r_final.to_string());
                row.push(sel.threshold.to_string());
                row.push(sel.iterations.to_string());
                row.push(sel.stop_reason.as_str().to_string());
            }
            Algorithm::CwLike => {
                let out = pooled.as_ref().expect("built above").cw_like_detail(x)?;
                row.push(out.label.to_string());
                row.push(out.k_p.to_string());
                row.push(out.k_q.to_string());
                row.push(out.r.to_string());
                row.push(out.threshold.to_string());
                row.push(out.attempts.to_string());
                row.push(
                    if out.r > out.threshold { "threshold_crossed" } else { "exhausted" }.to_string(),
                );
            }
            Algorithm::KnnQ => {
                let label = knn_q_baseline(&sources[1], x)?;
                row.push(label.to_string());
                row.push("0".into());
                row.push(baseline_k(sources[1].len(), x.len()).to_string());
                row.extend([blank(), blank(), "1".into(), blank()]);
            }
            Algorithm::KnnAll => {
                let pooled = pooled.as_ref().expect("built above");
                row.push(pooled.knn(x)?.to_string());
                let k = baseline_k(pooled.len(), x.len());
                row.push(k.to_string());
                row.push(k.to_string());
                row.extend([blank(), blank(), "1".into(), blank()]);
            }
            Algorithm::Fixed => {
                let plan = plan.as_ref().expect("built above");
                let (label, est) = fixed_weighted_knn(&sources, plan, x)?;
                row.push(label.to_string());
                row.extend(est.per_source.iter().map(|s| s.k.to_string()));
                row.extend([blank(), blank(), "1".into(), blank()]);
            }
        }
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

fn rates(a: RatesArgs) -> anyhow::Result<()> {
    let params = RateParams {
        alpha: a.alpha,
        beta_p: a.beta_p,
        beta_q: a.beta_q,
        gamma: a.gamma,
        d: a.d,
        n_p: a.np,
        n_q: a.nq,
    };
    params.validate()?;
    let na = || "NA".to_string();
    let (exponent, exact, regime) = if a.nq == 0 {
        let e = minimax_exponent_single(&params)?;
        (
            e.exponent.to_string(),
            e.exact.to_string(),
            classify_regime(&params)?.to_string(),
        )
    } else {
        (na(), na(), na())
    };
    let branch = match params.branch() {
        Branch::SmoothSource => "smooth_source",
        Branch::SmoothTarget => "smooth_target",
    };
    let sub = match params.branch() {
        Branch::SmoothSource => suboptimal_upper_bound(&params)
            .map(|v| v.to_string())
            .unwrap_or_else(|_| na()),
        Branch::SmoothTarget => na(),
    };
    let mut w = csv::Writer::from_writer(sink(a.out.as_deref())?);
    w.write_record(["branch", "exponent", "exact", "regime", "rate", "suboptimal_bound"])?;
    w.write_record([
        branch.to_string(),
        exponent,
        exact,
        regime,
        minimax_rate_general(&params)?.to_string(),
        sub,
    ])?;
    w.flush()?;
    Ok(())
}

fn bench_configs(a: &BenchArgs) -> anyhow::Result<Vec<ExperimentConfig>> {
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: BenchFile = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        return Ok(file.experiment);
    }
    let classifiers = a
        .classifiers
        .iter()
        .map(|s| s.parse::<Classifier>())
        .collect::<crate::Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for &n_p in &a.np {
        for &kappa in &a.kappa {
            out.push(ExperimentConfig {
                dgp: DgpConfig::new(a.dgp.into(), kappa, a.gamma, a.d)?,
                n_p,
                n_q: a.nq,
                trials: a.trials,
                test_points: a.test_points,
                classifiers: classifiers.clone(),
                master_seed: a.seed,
            });
        }
    }
    Ok(out)
}

fn bench(a: BenchArgs) -> anyhow::Result<()> {
    let configs = bench_configs(&a)?;
    let mut results = Vec::with_capacity(configs.len());
    for cfg in &configs {
        let res = run_experiment_with(cfg, exec(a.serial))?;
        results.push(if a.omit_timing { res.without_timing() } else { res });
    }
    write_results_csv(sink(a.out.as_deref())?, &results)?;
    Ok(())
}

fn realdata(a: RealdataArgs) -> anyhow::Result<()> {
    let features: Vec<&str> = a.features.iter().map(String::as_str).collect();
    let table = load_csv(&a.csv, &a.label, &features, Some(&a.split))
        .with_context(|| format!("reading {}", a.csv.display()))?;
    if table.dropped > 0 {
        eprintln!("dropped {} rows with missing values", table.dropped);
    }
    let (p, q) = split_by_binary(&normalize_minmax(&table))?;
    eprintln!("P-data: {} rows, Q-data: {} rows", p.len(), q.len());
    let mut rows = Vec::new();
    for &n in &a.nq_train {
        rows.extend(real_data_protocol(
            &p,
            &q,
            n,
            a.replications,
            a.seed,
            &Classifier::COMPETITORS,
            exec(a.serial),
        )?);
    }
    write_real_data_csv(sink(a.out.as_deref())?, &rows)?;
    Ok(())
}
