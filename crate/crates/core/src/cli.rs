//! Command-line front end.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs::{self, File};
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::corpus::{
    apply_completeness, apply_verdicts, corpus_summary, export_corpus, import_corpus, load_annotation_dir, load_worker_log,
    write_annotation, write_completeness, write_verdicts, write_worker_log, Corpus, TRUSTED_VOCABULARY, WORKER_VOCABULARY,
};
use crate::dgt::{
    baseline_compare, compare_modes, order_trusted, sweep, sweep_row, DgtConfig, InclusionRule, KsConfig, PowerLawConfig,
};
use crate::error::{Error, Result};
use crate::metrics::{build_profiles, trusted_profiles, DistributionOptions, NormMode, TrustedProfile};
use crate::powerlaw::{self, FitMode, GofResult};
use crate::report::{self, Format, Table};
use crate::seed::derive_seed;
use crate::stats::PValueMethod;
use crate::synth::{generate, SyntheticSpec};

pub const SEED_ENV: &str = "UIQC_SEED";
const DEFAULT_MAX_K: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PMethod {
    #[default]
    Asymptotic,
    Exact,
}

/// Effective configuration: JSON config file values overridden by flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Annotation directory (`<labeler>/<screenshot>.xml`) or a corpus snapshot file.
    pub corpus: Option<PathBuf>,
    pub worker_log: Option<PathBuf>,
    pub verification: Option<PathBuf>,
    pub completeness: Option<PathBuf>,
    pub out: PathBuf,
    pub norm: NormMode,
    pub pmethod: PMethod,
    pub ks_replicates: usize,
    pub include_zeros: bool,
    pub include_custom: bool,
    pub aliases: BTreeMap<String, String>,
    pub min_hits: usize,
    pub min_elements: usize,
    pub k: Option<usize>,
    pub k_range: Option<(usize, usize)>,
    pub powerlaw_mode: FitMode,
    pub replicates: usize,
    pub seed: Option<u64>,
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SyntheticSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let rule = InclusionRule::default();
        RunConfig {
            corpus: None,
            worker_log: None,
            verification: None,
            completeness: None,
            out: PathBuf::from("out"),
            norm: NormMode::Mean,
            pmethod: PMethod::Asymptotic,
            ks_replicates: crate::stats::DEFAULT_MC_REPLICATES,
            include_zeros: true,
            include_custom: false,
            aliases: BTreeMap::new(),
            min_hits: rule.min_attempted,
            min_elements: rule.min_elements,
            k: None,
            k_range: None,
            powerlaw_mode: FitMode::Continuous,
            replicates: 1000,
            seed: None,
            format: Format::Both,
            synth: None,
        }
    }
}

impl RunConfig {
    fn require_seed(&self, purpose: &str) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Argument(format!("{purpose} needs a seed: pass --seed or set {SEED_ENV}")))
    }

    pub fn distribution_options(&self) -> DistributionOptions {
        DistributionOptions {
            include_zeros: true,
            include_custom: self.include_custom,
            aliases: self.aliases.clone(),
        }
    }

    pub fn ks_config(&self) -> Result<KsConfig> {
        let pmethod = match self.pmethod {
            PMethod::Asymptotic => PValueMethod::Asymptotic,
            PMethod::Exact => PValueMethod::Exact {
                replicates: self.ks_replicates,
                seed: self.require_seed("the exact KS test")?,
            },
        };
        Ok(KsConfig {
            norm: self.norm,
            include_zeros: self.include_zeros,
            pmethod,
        })
    }

    pub fn dgt_config(&self) -> Result<DgtConfig> {
        if self.min_hits == 0 || self.min_elements == 0 {
            return Err(Error::Argument("inclusion thresholds must be positive".into()));
        }
        Ok(DgtConfig {
            ks: self.ks_config()?,
            rule: InclusionRule {
                min_attempted: self.min_hits,
                min_elements: self.min_elements,
            },
            distribution: self.distribution_options(),
        })
    }

    pub fn powerlaw_config(&self) -> Result<PowerLawConfig> {
        Ok(PowerLawConfig {
            mode: self.powerlaw_mode,
            replicates: self.replicates,
            seed: self.require_seed("the power-law bootstrap")?,
        })
    }

    fn echo(&self) -> Value {
        serde_json::to_value(self).expect("configuration serializes")
    }
}

#[derive(Debug, Parser)]
#[command(name = "uiqc", version, about = "Quality control for crowdsourced UI labeling via distributional ground truth")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Default, Args)]
pub struct Flags {
    /// JSON configuration file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Annotation directory or corpus snapshot (.jsonl).
    #[arg(long, global = true, value_name = "PATH")]
    pub corpus: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    pub worker_log: Option<PathBuf>,
    /// Per-box verdict CSV (screenshot_id, box_index, verdict).
    #[arg(long, global = true, value_name = "PATH")]
    pub verification: Option<PathBuf>,
    /// Completeness CSV (screenshot_id, sc).
    #[arg(long, global = true, value_name = "PATH")]
    pub completeness: Option<PathBuf>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_parser = ["raw", "mean", "proportion"])]
    pub norm: Option<String>,
    #[arg(long, global = true)]
    pub pmethod: Option<PMethod>,
    #[arg(long, global = true, action = ArgAction::Set, value_name = "BOOL")]
    pub include_zeros: Option<bool>,
    #[arg(long, global = true, value_name = "N")]
    pub min_hits: Option<usize>,
    #[arg(long, global = true, value_name = "N")]
    pub min_elements: Option<usize>,
    /// Trusted set size.
    #[arg(long, global = true, value_name = "N")]
    pub k: Option<usize>,
    /// Trusted set sizes A..B (inclusive).
    #[arg(long, global = true, value_name = "A..B")]
    pub k_range: Option<String>,
    /// Bootstrap replicates for the power-law goodness-of-fit test.
    #[arg(long, global = true, value_name = "N")]
    pub replicates: Option<usize>,
    #[arg(long, global = true, value_parser = ["continuous", "discrete"])]
    pub powerlaw_mode: Option<String>,
    /// Root seed; falls back to the UIQC_SEED environment variable.
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_parser = ["csv", "json", "both"])]
    pub format: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load inputs, write a corpus snapshot and print a summary.
    Ingest,
    /// Per-labeler precision, completeness and quality index.
    VerifyReport,
    /// Trusted and worker profiles.
    Profiles,
    /// Score testing-subset workers against the top-k trusted labelers.
    DgtScore,
    /// Trusted-set size sweep with one regression per size.
    Sweep {
        /// Also run every normalization and zero-handling combination.
        #[arg(long)]
        compare_modes: bool,
    },
    /// Compare avg_p against volume, time and power-law factors.
    Baselines,
    /// Fit power laws to worker distributions or to numbers in a file.
    Powerlaw {
        /// Whitespace-separated positive numbers.
        #[arg(long, value_name = "PATH")]
        input: Option<PathBuf>,
    },
    /// Generate a synthetic corpus.
    Synth,
}

fn parse_k_range(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::Argument(format!("k range must look like A..B, got `{text}`"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let b = b.strip_prefix('=').unwrap_or(b);
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

/// Merge the config file, environment seed and flags.
pub fn resolve_config(flags: &Flags) -> Result<RunConfig> {
    let mut cfg = match &flags.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            serde_json::from_str(&text)?
        }
        None => RunConfig::default(),
    };
    if let Ok(seed) = std::env::var(SEED_ENV) {
        cfg.seed = Some(
            seed.trim()
                .parse()
                .map_err(|_| Error::Argument(format!("{SEED_ENV} must be an unsigned integer, got `{seed}`")))?,
        );
    }
    macro_rules! set {
        ($field:ident) => {
            if let Some(v) = &flags.$field {
                cfg.$field = v.clone().into();
            }
        };
    }
    set!(corpus);
    set!(worker_log);
    set!(verification);
    set!(completeness);
    if let Some(v) = &flags.out {
        cfg.out = v.clone();
    }
    if let Some(v) = &flags.norm {
        cfg.norm = v.parse()?;
    }
    if let Some(v) = flags.pmethod {
        cfg.pmethod = v;
    }
    if let Some(v) = flags.include_zeros {
        cfg.include_zeros = v;
    }
    if let Some(v) = flags.min_hits {
        cfg.min_hits = v;
    }
    if let Some(v) = flags.min_elements {
        cfg.min_elements = v;
    }
    if let Some(v) = flags.k {
        cfg.k = Some(v);
    }
    if let Some(v) = &flags.k_range {
        cfg.k_range = Some(parse_k_range(v)?);
    }
    if let Some(v) = flags.replicates {
        cfg.replicates = v;
    }
    if let Some(v) = &flags.powerlaw_mode {
        cfg.powerlaw_mode = v.parse()?;
    }
    if let Some(v) = flags.seed {
        cfg.seed = Some(v);
    }
    if let Some(v) = &flags.format {
        cfg.format = v.parse()?;
    }
    Ok(cfg)
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path).map(BufReader::new).map_err(|e| Error::io(path, e))
}

/// Build the corpus described by the configured input paths.
pub fn load_corpus(cfg: &RunConfig) -> Result<Corpus> {
    if cfg.corpus.is_none() && cfg.worker_log.is_none() {
        return Err(Error::Argument("no input given: pass --corpus and/or --worker-log".into()));
    }
    let mut base = Corpus::empty();
    if let Some(path) = &cfg.corpus {
        if path.is_file() {
            base = import_corpus(open(path)?)?;
        } else {
            let (labelings, skipped) = load_annotation_dir(path)?;
            if !skipped.is_empty() {
                log::warn!("{} annotation files skipped", skipped.len());
            }
            base.trusted_labelings = labelings;
        }
    }
    let mut records = base.worker_records;
    if let Some(path) = &cfg.worker_log {
        records.extend(load_worker_log(open(path)?)?);
    }
    let mut corpus = Corpus::new(base.trusted_labelings, records, base.trusted_vocabulary, base.worker_vocabulary)?;
    if let Some(path) = &cfg.verification {
        corpus = apply_verdicts(&corpus, open(path)?)?;
    }
    if let Some(path) = &cfg.completeness {
        corpus = apply_completeness(&corpus, open(path)?)?;
    }
    Ok(corpus)
}

/// Input paths for a dataset directory laid out as `synth` writes it:
/// `annotations/`, `worker_log.jsonl`, `verification.csv`, `completeness.csv`.
pub fn dataset_config(dir: &Path) -> RunConfig {
    let existing = |name: &str| Some(dir.join(name)).filter(|p| p.exists());
    RunConfig {
        corpus: existing("annotations"),
        worker_log: existing("worker_log.jsonl"),
        verification: existing("verification.csv"),
        completeness: existing("completeness.csv"),
        ..Default::default()
    }
}

pub fn load_dataset(dir: &Path) -> Result<Corpus> {
    load_corpus(&dataset_config(dir))
}

fn ordered_trusted(corpus: &Corpus, cfg: &RunConfig) -> Result<Vec<TrustedProfile>> {
    let ordered = order_trusted(&trusted_profiles(corpus, &cfg.distribution_options()));
    if ordered.is_empty() {
        return Err(Error::Undefined("no trusted labeler has verified labelings".into()));
    }
    Ok(ordered)
}

fn print_table(table: &Table) {
    println!("{}", table.header.join("\t"));
    for row in &table.rows {
        println!("{}", row.join("\t"));
    }
}

fn cmd_ingest(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    fs::create_dir_all(&cfg.out).map_err(|e| Error::io(&cfg.out, e))?;
    let path = cfg.out.join("corpus.jsonl");
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    export_corpus(&corpus, std::io::BufWriter::new(file))?;
    println!("{}", serde_json::to_string_pretty(&corpus_summary(&corpus))?);
    Ok(())
}

fn cmd_verify_report(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let ordered = ordered_trusted(&corpus, cfg)?;
    let table = report::verify_table(&ordered);
    report::write_report(&cfg.out, "verify", cfg.format, &cfg.echo(), &table)?;
    print_table(&table);
    Ok(())
}

fn cmd_profiles(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let (trusted, workers) = build_profiles(&corpus, &cfg.distribution_options());
    let t = report::trusted_profile_table(&trusted);
    let w = report::worker_profile_table(&workers);
    let config = cfg.echo();
    if cfg.format.csv() {
        report::write_csv(&cfg.out, "profiles_trusted", &config, &t)?;
        report::write_csv(&cfg.out, "profiles_workers", &config, &w)?;
    }
    if cfg.format.json() {
        let body = serde_json::json!({ "trusted": t.to_json(), "workers": w.to_json() });
        report::write_json(&cfg.out, "profiles", &config, body)?;
    }
    println!("{} trusted labelers, {} workers", trusted.len(), workers.len());
    Ok(())
}

fn trusted_size(cfg: &RunConfig, ordered: &[TrustedProfile]) -> Result<usize> {
    let k = cfg.k.unwrap_or(2.min(ordered.len()));
    if k == 0 || k > ordered.len() {
        return Err(Error::Argument(format!(
            "trusted set size {k} outside 1..={}",
            ordered.len()
        )));
    }
    Ok(k)
}

fn cmd_dgt_score(cfg: &RunConfig) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let ordered = ordered_trusted(&corpus, cfg)?;
    let k = trusted_size(cfg, &ordered)?;
    let row = sweep_row(&corpus, &ordered, k, &cfg.dgt_config()?)?;
    let table = report::score_table(&row.scores, &row.precision_amt, &row.trusted_ids);
    report::write_report(&cfg.out, "scores", cfg.format, &cfg.echo(), &table)?;
    print_table(&table);
    Ok(())
}

fn cmd_sweep(cfg: &RunConfig, with_modes: bool) -> Result<()> {
    let corpus = load_corpus(cfg)?;
    let ordered = ordered_trusted(&corpus, cfg)?;
    let (lo, hi) = cfg.k_range.unwrap_or((1, ordered.len().min(DEFAULT_MAX_K)));
    let dgt = cfg.dgt_config()?;
    let rows = sweep(&corpus, &ordered, lo..=hi, &dgt)?;
    let table = report::sweep_table(&rows);
    report::write_report(&cfg.out, "sweep", cfg.format, &cfg.echo(), &table)?;
    print_table(&table);
    let best = rows
        .iter()
        .filter_map(|r| r.model.as_ref().map(|m| (r.k, m)))
        .max_by(|a, b| a.1.r_squared.total_cmp(&b.1.r_squared));
    match best {
        Some((k, m)) => println!(
            "best: k = {k}, R² = {}, F({}, {}) = {}, p = {}",
            report::fmt4(m.r_squared),
            m.df.0,
            m.df.1,
            report::fmt1(m.f_statistic),
            report::fmt4(m.p_value)
        ),
        None => println!("best: no row has a model"),
    }
    if with_modes {
        let modes = compare_modes(&corpus, &ordered, lo..=hi, &dgt)?;
        report::write_report(&cfg.out, "sweep_modes", cfg.format, &cfg.echo(), &report::mode_table(&modes))?;
    }
    Ok(())
}

fn cmd_baselines(cfg: &RunConfig) -> Result<()> {
    if cfg.k == Some(0) {
        return Err(Error::Argument("trusted set size must be at least 1".into()));
    }
    let corpus = load_corpus(cfg)?;
    let ordered = ordered_trusted(&corpus, cfg)?;
    let k = trusted_size(cfg, &ordered)?;
    let dgt = cfg.dgt_config()?;
    let subset = crate::dgt::testing_subset(&corpus, &ordered, k, &dgt.rule, &dgt.distribution)?;
    let result = baseline_compare(&subset.workers, &ordered[..k], &dgt.ks, &cfg.powerlaw_config()?)?;
    let config = cfg.echo();
    let rows = report::baseline_table(&result);
    let models = report::baseline_model_table(&result);
    report::write_report(&cfg.out, "baselines", cfg.format, &config, &rows)?;
    report::write_report(&cfg.out, "baselines_models", cfg.format, &config, &models)?;
    print_table(&rows);
    println!();
    print_table(&models);
    Ok(())
}

fn read_numbers(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    text.split_whitespace()
        .map(|t| t.parse::<f64>().map_err(|_| Error::Value(format!("`{t}` is not a number"))))
        .collect()
}

fn fit_with_gof(data: &[f64], cfg: &PowerLawConfig, seed: u64) -> Result<GofResult> {
    let fit = powerlaw::fit(data, cfg.mode)?;
    powerlaw::gof_pvalue(data, &fit, cfg.replicates, seed)
}

fn cmd_powerlaw(cfg: &RunConfig, input: Option<&Path>) -> Result<()> {
    let pl = cfg.powerlaw_config()?;
    let results: Vec<(String, Option<GofResult>)> = match input {
        Some(path) => {
            let data = read_numbers(path)?;
            vec![("input".to_string(), Some(fit_with_gof(&data, &pl, derive_seed(pl.seed, &["gof", "input"]))?))]
        }
        None => {
            let corpus = load_corpus(cfg)?;
            let (_, workers) = build_profiles(&corpus, &cfg.distribution_options());
            workers
                .iter()
                .map(|w| {
                    let data: Vec<f64> = w.distribution.counts.iter().filter(|&&c| c > 0).map(|&c| c as f64).collect();
                    let r = fit_with_gof(&data, &pl, derive_seed(pl.seed, &["gof", &w.worker_id]));
                    if let Err(e) = &r {
                        log::warn!("worker {}: {e}", w.worker_id);
                    }
                    (w.worker_id.clone(), r.ok())
                })
                .collect()
        }
    };
    let table = report::powerlaw_table(&results);
    report::write_report(&cfg.out, "powerlaw", cfg.format, &cfg.echo(), &table)?;
    print_table(&table);
    Ok(())
}

/// Write a corpus in the directory layout `load_dataset` reads.
pub fn write_dataset(corpus: &Corpus, dir: &Path) -> Result<()> {
    let create = |path: PathBuf| File::create(&path).map(std::io::BufWriter::new).map_err(|e| Error::io(&path, e));
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    export_corpus(corpus, create(dir.join("corpus.jsonl"))?)?;
    write_worker_log(&corpus.worker_records, create(dir.join("worker_log.jsonl"))?)?;
    write_verdicts(corpus, create(dir.join("verification.csv"))?)?;
    write_completeness(corpus, create(dir.join("completeness.csv"))?)?;
    for l in &corpus.trusted_labelings {
        let labeler_dir = dir.join("annotations").join(&l.labeler_id);
        fs::create_dir_all(&labeler_dir).map_err(|e| Error::io(&labeler_dir, e))?;
        let path = labeler_dir.join(format!("{}.xml", l.screenshot_id));
        fs::write(&path, write_annotation(l)).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn cmd_synth(cfg: &RunConfig) -> Result<()> {
    let seed = cfg.require_seed("synth")?;
    let spec = cfg.synth.clone().unwrap_or_default();
    let corpus = generate(&spec, seed)?;
    write_dataset(&corpus, &cfg.out)?;
    println!("{}", serde_json::to_string_pretty(&corpus_summary(&corpus))?);
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = resolve_config(&cli.flags)?;
    debug_assert_eq!(TRUSTED_VOCABULARY.len(), 20);
    debug_assert_eq!(WORKER_VOCABULARY.len(), 10);
    match cli.command {
        Command::Ingest => cmd_ingest(&cfg),
        Command::VerifyReport => cmd_verify_report(&cfg),
        Command::Profiles => cmd_profiles(&cfg),
        Command::DgtScore => cmd_dgt_score(&cfg),
        Command::Sweep { compare_modes } => cmd_sweep(&cfg, compare_modes),
        Command::Baselines => cmd_baselines(&cfg),
        Command::Powerlaw { input } => cmd_powerlaw(&cfg, input.as_deref()),
        Command::Synth => cmd_synth(&cfg),
    }
}

/// Parse arguments, run, and return the process exit code:
/// 0 on success, 1 for computation errors, 2 for input or usage errors.
pub fn main_with_args(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_input_error() {
                2
            } else {
                1
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_range_parsing() {
        assert_eq!(parse_k_range("1..9").unwrap(), (1, 9));
        assert_eq!(parse_k_range("2..=4").unwrap(), (2, 4));
        assert!(parse_k_range("3").is_err());
        assert!(parse_k_range("a..b").is_err());
    }

    #[test]
    fn config_round_trips_and_flags_override() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"norm": "proportion", "min_hits": 5, "k_range": [1, 3]}"#).unwrap();
        let flags = Flags {
            config: Some(path),
            min_hits: Some(7),
            ..Default::default()
        };
        let cfg = resolve_config(&flags).unwrap();
        assert_eq!(cfg.norm, NormMode::Proportion);
        assert_eq!(cfg.min_hits, 7);
        assert_eq!(cfg.k_range, Some((1, 3)));
        let back: RunConfig = serde_json::from_value(cfg.echo()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_config_keys_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cfg.json");
        fs::write(&path, r#"{"nrom": "mean"}"#).unwrap();
        let flags = Flags {
            config: Some(path),
            ..Default::default()
        };
        assert!(resolve_config(&flags).is_err());
    }

    #[test]
    fn stochastic_paths_need_seed() {
        let cfg = RunConfig {
            pmethod: PMethod::Exact,
            ..Default::default()
        };
        assert!(cfg.ks_config().is_err());
        assert!(RunConfig::default().powerlaw_config().is_err());
        assert!(RunConfig::default().ks_config().is_ok());
    }
}
