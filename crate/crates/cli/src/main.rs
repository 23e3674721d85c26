mod hypfile;
mod manifest;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pedmix::alleles::{write_profiles_csv, AlleleFrequencyTable};
use pedmix::engine::{brute_force_likelihood, likelihood, EngineOptions, GenePrior};
use pedmix::genotype::simulate_profiles_seeded;
use pedmix::hypothesis::{Hypothesis, Relationship};
use pedmix::ibd::{condensed_coefficients, pattern_distribution, IbdMode, IbdOptions, IbdPatternDistribution};
use pedmix::inference::{lr, mle, LrPolicy, MleOptions};
use pedmix::peakmodel::{EpgData, MixtureModelParams};
use pedmix::pedigree::Pedigree;
use pedmix::simstudy::{
    default_database, four_sibs_config, incest_rape_config, run_study, synthesize_epg, two_way_config,
    HypothesisSpec, StructureSpec, StudyConfig, SynthParams,
};
use serde::Serialize;

use hypfile::HypothesisFile;
use manifest::{manifest_path, Clock, Inputs, RunManifest};

#[derive(Parser)]
#[command(name = "pedmix", version, about = "Relatives in DNA mixtures: IBD patterns, likelihoods and likelihood ratios")]
struct Cli {
    /// Random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Where to write the run manifest (default: next to the output, or stderr).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Joint IBD pattern distribution of pedigree members, as CSV.
    Ibd(IbdArgs),
    /// Jacquard and kappa coefficients of a pair.
    Kappa(KappaArgs),
    /// Simulate genotypes of pedigree members, and optionally a mixture EPG.
    Simulate(SimulateArgs),
    /// Log-likelihood of an EPG under a hypothesis at given parameters.
    Loglik(LoglikArgs),
    /// Likelihood ratio between two hypotheses.
    Lr(LrArgs),
    /// Maximum-likelihood peak-model parameters under a hypothesis.
    Mle(MleArgs),
    /// Run a simulation study.
    Study(StudyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Naive,
    Mc,
}

#[derive(Args)]
struct IbdArgs {
    #[arg(long)]
    ped: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    targets: Vec<String>,
    #[arg(long, value_enum, default_value = "exact")]
    mode: Mode,
    /// Gene-dropping replicates for `--mode mc`.
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct KappaArgs {
    #[arg(long, conflicts_with = "relationship")]
    ped: Option<PathBuf>,
    #[arg(long)]
    relationship: Option<Relationship>,
    /// The two individuals, when reading a pedigree.
    #[arg(long, value_delimiter = ',')]
    pair: Vec<String>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, conflicts_with = "relationship")]
    ped: Option<PathBuf>,
    #[arg(long)]
    relationship: Option<Relationship>,
    #[arg(long, value_delimiter = ',', required = true)]
    targets: Vec<String>,
    /// Allele frequencies (default: bundled synthetic database).
    #[arg(long)]
    freqs: Option<PathBuf>,
    /// Genotype CSV (stdout if absent).
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Mixture contributors with cell counts, e.g. `A=150,B=50`.
    #[arg(long, value_delimiter = ',', requires = "epg")]
    mixture: Vec<String>,
    /// Where to write the simulated EPG.
    #[arg(long, requires = "mixture")]
    epg: Option<PathBuf>,
    #[arg(long, default_value_t = 50.0)]
    threshold: f64,
}

#[derive(Args)]
struct Data {
    /// EPG CSV (`marker,allele,height`); repeat for several EPGs.
    #[arg(long, required = true)]
    epg: Vec<PathBuf>,
    #[arg(long)]
    freqs: Option<PathBuf>,
    #[arg(long, default_value_t = 50.0)]
    threshold: f64,
    /// Coancestry coefficient for unrelated contributors.
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
}

#[derive(Args)]
struct HypArgs {
    /// Hypothesis file (TOML or JSON).
    #[arg(long, conflicts_with_all = ["ped", "relationship", "contributors"])]
    hyp: Option<PathBuf>,
    #[arg(long, conflicts_with = "relationship")]
    ped: Option<PathBuf>,
    #[arg(long)]
    relationship: Option<Relationship>,
    /// People linked by `--relationship` (default: first two contributors).
    #[arg(long, value_delimiter = ',')]
    pair: Vec<String>,
    #[arg(long, value_delimiter = ',')]
    contributors: Vec<String>,
    /// Typed genotypes as `id=FILE`; repeatable.
    #[arg(long)]
    typed: Vec<String>,
}

#[derive(Args)]
struct ParamArgs {
    /// Parameters as JSON: one object, or an array with one per EPG.
    #[arg(long, conflicts_with_all = ["rho", "xi", "eta", "phi"])]
    params: Option<PathBuf>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    phi: Vec<f64>,
}

#[derive(Args)]
struct LoglikArgs {
    #[command(flatten)]
    data: Data,
    #[command(flatten)]
    hyp: HypArgs,
    #[command(flatten)]
    params: ParamArgs,
    /// Sum over every genotype combination instead of the factorised engine.
    #[arg(long)]
    oracle: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct LrArgs {
    #[command(flatten)]
    data: Data,
    #[arg(long)]
    hp: PathBuf,
    #[arg(long)]
    h0: PathBuf,
    #[arg(long, default_value = "shared_h0_mles")]
    policy: LrPolicy,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, default_value_t = 5)]
    starts: usize,
    /// Per-marker table as CSV.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MleArgs {
    #[command(flatten)]
    data: Data,
    #[command(flatten)]
    hyp: HypArgs,
    #[arg(long, default_value_t = 5)]
    starts: usize,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    TwoWay,
    FourSibs,
    IncestRape,
}

#[derive(Args)]
struct StudyArgs {
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    genotype_replicates: Option<usize>,
    #[arg(long)]
    epg_replicates: Option<usize>,
}

#[derive(Debug)]
pub enum CliError {
    /// Inconsistent arguments; exit code 2.
    Usage(String),
    /// Bad input or model failure; exit code 1.
    Model(String),
}

impl From<pedmix::Error> for CliError {
    fn from(e: pedmix::Error) -> Self {
        CliError::Model(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Model(e.to_string())
    }
}

struct Ctx {
    seed: u64,
    inputs: Inputs,
    outputs: Vec<String>,
}

impl Ctx {
    fn emit(&mut self, path: Option<&Path>, text: &str) -> Result<(), CliError> {
        match path {
            Some(p) => {
                std::fs::write(p, text).map_err(|e| CliError::Model(format!("{}: {e}", p.display())))?;
                self.outputs.push(p.to_string_lossy().into_owned());
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes())?;
                out.flush()?;
            }
        }
        Ok(())
    }

    fn freqs(&mut self, path: Option<&Path>) -> Result<AlleleFrequencyTable, CliError> {
        match path {
            Some(p) => Ok(AlleleFrequencyTable::read_csv(self.inputs.read(p)?.as_bytes())?),
            None => Ok(default_database()),
        }
    }

    fn pedigree(&mut self, path: &Path) -> Result<Pedigree, CliError> {
        Ok(Pedigree::parse(&self.inputs.read(path)?)?)
    }

    fn epgs(&mut self, paths: &[PathBuf]) -> Result<Vec<EpgData>, CliError> {
        paths.iter().map(|p| Ok(EpgData::read_csv(self.inputs.read(p)?.as_bytes())?)).collect()
    }

    fn hypothesis_file(&mut self, path: &Path) -> Result<Hypothesis, CliError> {
        let file = HypothesisFile::read(path, &mut self.inputs)?;
        let base = path.parent().unwrap_or(Path::new("."));
        file.build(base, &mut self.inputs)
    }

    fn hypothesis(&mut self, a: &HypArgs) -> Result<Hypothesis, CliError> {
        if let Some(path) = &a.hyp {
            return self.hypothesis_file(path);
        }
        if a.contributors.is_empty() {
            return Err(CliError::Usage("give --hyp FILE or --contributors".into()));
        }
        let mut typed = BTreeMap::new();
        for t in &a.typed {
            let (id, file) =
                t.split_once('=').ok_or_else(|| CliError::Usage(format!("--typed expects id=FILE, got `{t}`")))?;
            typed.insert(id.to_string(), file.to_string());
        }
        let file = HypothesisFile {
            spec: HypothesisSpec {
                name: "hypothesis".into(),
                structure: StructureSpec {
                    relationship: a.relationship,
                    pair: pair(&a.pair)?,
                    pedigree: a.ped.as_ref().map(|p| p.to_string_lossy().into_owned()),
                    pedigree_text: None,
                },
                contributors: a.contributors.clone(),
            },
            typed,
            phi_zero: Vec::new(),
        };
        file.build(Path::new(""), &mut self.inputs)
    }

    fn params(&mut self, a: &ParamArgs, k: usize, n_epg: usize, threshold: f64) -> Result<Vec<MixtureModelParams>, CliError> {
        if let Some(path) = &a.params {
            let text = self.inputs.read(path)?;
            let value: serde_json::Value =
                serde_json::from_str(&text).map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?;
            let list = match value {
                serde_json::Value::Array(v) => v,
                one => vec![one; n_epg],
            };
            let parsed: Vec<MixtureModelParams> = list
                .into_iter()
                .map(serde_json::from_value)
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::Model(format!("{}: {e}", path.display())))?;
            for p in &parsed {
                p.validate()?;
            }
            return Ok(parsed);
        }
        let (Some(rho), Some(eta)) = (a.rho, a.eta) else {
            return Err(CliError::Usage("give --params FILE or --rho, --eta (and --xi, --phi)".into()));
        };
        let phi = if a.phi.is_empty() && k == 1 { vec![1.0] } else { a.phi.clone() };
        if phi.len() != k {
            return Err(CliError::Usage(format!("--phi needs {k} values, one per contributor")));
        }
        let p = MixtureModelParams::new(rho, a.xi.unwrap_or(0.0), eta, phi, threshold)?;
        Ok(vec![p; n_epg])
    }
}

fn pair(v: &[String]) -> Result<Option<[String; 2]>, CliError> {
    match v {
        [] => Ok(None),
        [a, b] => Ok(Some([a.clone(), b.clone()])),
        _ => Err(CliError::Usage("--pair takes two ids".into())),
    }
}

fn engine_options(theta: f64) -> EngineOptions {
    let prior = if theta > 0.0 { GenePrior::Polya { theta } } else { GenePrior::Independent };
    EngineOptions { prior, ..EngineOptions::default() }
}

fn json<T: Serialize>(v: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| CliError::Model(e.to_string()))
}

fn run_ibd(ctx: &mut Ctx, a: &IbdArgs) -> Result<Option<String>, CliError> {
    let ped = ctx.pedigree(&a.ped)?;
    let mode = match a.mode {
        Mode::Exact => IbdMode::Exact,
        Mode::Naive => IbdMode::ExactNaive,
        Mode::Mc => IbdMode::MonteCarlo,
    };
    let opts = IbdOptions { mode, mc_samples: a.samples, seed: ctx.seed, ..IbdOptions::default() };
    let d = pattern_distribution(&ped, &a.targets, &opts)?;
    ctx.emit(a.output.as_deref(), &d.to_csv_string())?;
    Ok(None)
}

#[derive(Serialize)]
struct KappaReport {
    a: String,
    b: String,
    delta: Vec<f64>,
    delta_exact: Vec<String>,
    kappa: Option<[f64; 3]>,
    kinship: f64,
}

fn run_kappa(ctx: &mut Ctx, a: &KappaArgs) -> Result<Option<String>, CliError> {
    let (x, y) = match pair(&a.pair)? {
        Some([x, y]) => (x, y),
        None if a.relationship.is_some() => ("A".to_string(), "B".to_string()),
        None => return Err(CliError::Usage("--pair A,B is required with --ped".into())),
    };
    let ids = vec![x.clone(), y.clone()];
    let dist: IbdPatternDistribution = match (&a.ped, a.relationship) {
        (Some(p), _) => pattern_distribution(&ctx.pedigree(p)?, &ids, &IbdOptions::default())?,
        (None, Some(rel)) => rel.distribution(&x, &y)?,
        (None, None) => return Err(CliError::Usage("give --ped or --relationship".into())),
    };
    let exact = condensed_coefficients(&dist)?;
    let delta: Vec<f64> = exact.iter().map(|d| d.to_f64()).collect();
    let kappa = delta[..6].iter().all(|d| *d == 0.0).then(|| [delta[8], delta[7], delta[6]]);
    let kinship = delta[0] + (delta[2] + delta[4] + delta[6]) / 2.0 + delta[7] / 4.0;
    let report =
        KappaReport { a: x, b: y, delta, delta_exact: exact.iter().map(|d| d.to_string()).collect(), kappa, kinship };
    ctx.emit(a.output.as_deref(), &json(&report)?)?;
    Ok(None)
}

fn run_simulate(ctx: &mut Ctx, a: &SimulateArgs) -> Result<Option<String>, CliError> {
    let dist = match (&a.ped, a.relationship) {
        (Some(p), _) => pattern_distribution(&ctx.pedigree(p)?, &a.targets, &IbdOptions::default())?,
        (None, Some(rel)) if a.targets.len() == 2 => rel.distribution(&a.targets[0], &a.targets[1])?,
        (None, Some(_)) => return Err(CliError::Usage("--relationship needs exactly two --targets".into())),
        (None, None) => IbdPatternDistribution::unrelated(a.targets.clone())?,
    };
    let freqs = ctx.freqs(a.freqs.as_deref())?;
    let profiles = simulate_profiles_seeded(&dist, &freqs, ctx.seed)?;
    let mut buf = Vec::new();
    write_profiles_csv(&profiles, &mut buf)?;
    ctx.emit(a.output.as_deref(), &String::from_utf8_lossy(&buf))?;

    if let Some(epg_path) = &a.epg {
        let mut who = Vec::new();
        let mut cells = Vec::new();
        for m in &a.mixture {
            let (id, c) = m.split_once('=').ok_or_else(|| CliError::Usage(format!("--mixture expects id=cells, got `{m}`")))?;
            let c: f64 = c.parse().map_err(|_| CliError::Usage(format!("bad cell count `{c}`")))?;
            let p = profiles.get(id).ok_or_else(|| CliError::Usage(format!("`{id}` is not among the targets")))?;
            who.push(p);
            cells.push(c);
        }
        let synth = SynthParams { threshold: a.threshold, ..SynthParams::default() };
        let epg = synthesize_epg(&who, &cells, &freqs, &synth, ctx.seed.wrapping_add(1))?;
        let mut buf = Vec::new();
        epg.write_csv(&mut buf)?;
        ctx.emit(Some(epg_path), &String::from_utf8_lossy(&buf))?;
    }
    Ok(None)
}

fn run_loglik(ctx: &mut Ctx, a: &LoglikArgs) -> Result<Option<String>, CliError> {
    let epgs = ctx.epgs(&a.data.epg)?;
    let freqs = ctx.freqs(a.data.freqs.as_deref())?;
    let hyp = ctx.hypothesis(&a.hyp)?;
    let params = ctx.params(&a.params, hyp.slots.len(), epgs.len(), a.data.threshold)?;
    let model = hyp.model()?;
    let opts = engine_options(a.data.theta);
    let report = if a.oracle {
        brute_force_likelihood(&model, &epgs, &freqs, &params, &opts)?
    } else {
        likelihood(&model, &epgs, &freqs, &params, &opts)?
    };
    ctx.emit(a.output.as_deref(), &json(&report)?)?;
    Ok(report.first_impossible.map(|m| format!("evidence is impossible under the hypothesis (first at marker {m})")))
}

fn mle_options(seed: u64, starts: usize, data: &Data) -> MleOptions {
    MleOptions { starts, seed, threshold: data.threshold, engine: engine_options(data.theta), ..MleOptions::default() }
}

fn run_lr(ctx: &mut Ctx, a: &LrArgs) -> Result<Option<String>, CliError> {
    let epgs = ctx.epgs(&a.data.epg)?;
    let freqs = ctx.freqs(a.data.freqs.as_deref())?;
    let hp = ctx.hypothesis_file(&a.hp)?;
    let h0 = ctx.hypothesis_file(&a.h0)?;
    let params = if a.policy == LrPolicy::FixedParams {
        Some(ctx.params(&a.params, hp.slots.len(), epgs.len(), a.data.threshold)?)
    } else {
        None
    };
    let opts = mle_options(ctx.seed, a.starts, &a.data);
    let report = lr(&epgs, &hp, &h0, &freqs, a.policy, params.as_deref(), &opts)?;
    if let Some(t) = &a.table {
        let mut text = String::from("marker,log10_lr\n");
        for m in &report.markers {
            text.push_str(&format!("{},{}\n", m.marker, m.log10_lr));
        }
        text.push_str(&format!("total,{}\n", report.log10_lr));
        ctx.emit(Some(t), &text)?;
    }
    ctx.emit(a.output.as_deref(), &json(&report)?)?;
    Ok(None)
}

fn run_mle(ctx: &mut Ctx, a: &MleArgs) -> Result<Option<String>, CliError> {
    let epgs = ctx.epgs(&a.data.epg)?;
    let freqs = ctx.freqs(a.data.freqs.as_deref())?;
    let hyp = ctx.hypothesis(&a.hyp)?;
    let fit = mle(&epgs, &hyp, &freqs, None, &mle_options(ctx.seed, a.starts, &a.data))?;
    ctx.emit(a.output.as_deref(), &json(&fit)?)?;
    Ok(None)
}

fn run_study_cmd(ctx: &mut Ctx, a: &StudyArgs, seed: Option<u64>) -> Result<Option<String>, CliError> {
    let (mut config, base) = match (&a.config, a.preset) {
        (Some(path), _) => {
            let text = ctx.inputs.read(path)?;
            let c = if path.extension().is_some_and(|e| e == "json") {
                StudyConfig::from_json(&text)?
            } else {
                StudyConfig::from_toml(&text)?
            };
            (c, path.parent().map(Path::to_path_buf))
        }
        (None, Some(p)) => {
            let s = seed.unwrap_or(1);
            let c = match p {
                Preset::TwoWay => two_way_config(s),
                Preset::FourSibs => four_sibs_config(s),
                Preset::IncestRape => incest_rape_config(s),
            };
            (c, None)
        }
        (None, None) => return Err(CliError::Usage("give --config or --preset".into())),
    };
    if let Some(s) = seed {
        config.seed = s;
    }
    if let Some(n) = a.starts {
        config.mle_starts = n;
    }
    if let Some(n) = a.genotype_replicates {
        config.genotype_replicates = n;
    }
    if let Some(n) = a.epg_replicates {
        config.epg_replicates = n;
    }
    ctx.seed = config.seed;
    std::fs::create_dir_all(&a.out_dir)?;
    let result = run_study(&config, base.as_deref(), &MleOptions::default())?;
    let mut rows = Vec::new();
    result.write_rows_csv(&mut rows)?;
    let mut medians = Vec::new();
    result.write_medians_csv(&mut medians)?;
    ctx.emit(Some(&a.out_dir.join("rows.csv")), &String::from_utf8_lossy(&rows))?;
    ctx.emit(Some(&a.out_dir.join("medians.csv")), &String::from_utf8_lossy(&medians))?;
    ctx.emit(Some(&a.out_dir.join("config.json")), &json(&config)?)?;
    Ok(None)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let clock = Clock::start();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let mut ctx = Ctx { seed: cli.seed.unwrap_or(1), inputs: Inputs::default(), outputs: Vec::new() };
    let (name, output) = match &cli.command {
        Command::Ibd(a) => ("ibd", a.output.clone()),
        Command::Kappa(a) => ("kappa", a.output.clone()),
        Command::Simulate(a) => ("simulate", a.output.clone()),
        Command::Loglik(a) => ("loglik", a.output.clone()),
        Command::Lr(a) => ("lr", a.output.clone()),
        Command::Mle(a) => ("mle", a.output.clone()),
        Command::Study(a) => ("study", Some(a.out_dir.join("medians.csv"))),
    };
    let result = match &cli.command {
        Command::Ibd(a) => run_ibd(&mut ctx, a),
        Command::Kappa(a) => run_kappa(&mut ctx, a),
        Command::Simulate(a) => run_simulate(&mut ctx, a),
        Command::Loglik(a) => run_loglik(&mut ctx, a),
        Command::Lr(a) => run_lr(&mut ctx, a),
        Command::Mle(a) => run_mle(&mut ctx, a),
        Command::Study(a) => run_study_cmd(&mut ctx, a, cli.seed),
    };
    let code: u8 = match &result {
        Ok(None) => 0,
        Ok(Some(why)) => {
            eprintln!("error: {why}");
            1
        }
        Err(CliError::Usage(m)) => {
            eprintln!("error: {m}");
            2
        }
        Err(CliError::Model(m)) => {
            eprintln!("error: {m}");
            1
        }
    };
    let manifest = RunManifest {
        subcommand: name.into(),
        args: std::env::args().skip(1).collect(),
        inputs: ctx.inputs.into_records(),
        outputs: ctx.outputs,
        seed: ctx.seed,
        threads: cli.threads,
        version: env!("CARGO_PKG_VERSION").into(),
        started_unix: clock.unix(),
        wall_seconds: clock.seconds(),
        exit_code: code as i32,
    };
    match manifest_path(cli.manifest.as_deref(), output.as_deref()) {
        Some(p) => {
            let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
            if let Err(e) = std::fs::write(&p, text + "\n") {
                eprintln!("error: cannot write manifest {}: {e}", p.display());
            }
        }
        None => eprintln!("manifest: {}", serde_json::to_string(&manifest).expect("manifest serializes")),
    }
    ExitCode::from(code)
}
