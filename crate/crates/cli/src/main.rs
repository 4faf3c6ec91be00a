use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use phishmatch::corpus::{load_manifest, save_manifest, CampaignManifest, Role, StopWords};
use phishmatch::lsa::{Solver, SvdOptions};
use phishmatch::report::{self, ReportConfig};
use phishmatch::similarity::{KsMethod, Weighting, DEFAULT_RESAMPLES};
use phishmatch::synth::{self, CoordinationPlan, SynthConfig};
use phishmatch::vectorizer::{self, TfIdfMatrix};
use serde_json::json;

/// Measure how closely a phishing campaign's bait documents match the
/// people they were sent to.
#[derive(Parser)]
#[command(name = "phishmatch", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Stop-word file (one word per line, `#` comments); defaults to the built-in English list.
    #[arg(long, global = true)]
    stop_words: Option<PathBuf>,
    /// Longest n-gram extracted.
    #[arg(long, global = true, default_value_t = 3, value_parser = clap::value_parser!(u8).range(1..=3))]
    ngram_max: u8,
    /// LSA truncation rank; defaults to min(100, min(N, M) - 1).
    #[arg(long, global = true)]
    k: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = KsChoice::Asymptotic)]
    ks_method: KsChoice,
    /// Resamples for the permutation KS test.
    #[arg(long, global = true, default_value_t = DEFAULT_RESAMPLES)]
    resamples: usize,
    /// Output directory. Without it, JSON goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KsChoice {
    Asymptotic,
    Permutation,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic campaign (or benchmark corpus) as a manifest directory.
    Synth(SynthArgs),
    /// Validate a manifest and summarize it.
    Ingest { manifest: PathBuf },
    /// Build the tf-idf matrix; writes matrix.csv and vocabulary.csv under --out.
    Vectorize {
        manifest: PathBuf,
        #[arg(long, default_value_t = 1)]
        min_df: usize,
    },
    /// Observed versus all-pairs similarity, KS test and separation.
    Similarity {
        manifest: PathBuf,
        #[command(flatten)]
        opts: AnalysisArgs,
        /// Include empirical CDF points for both samples.
        #[arg(long)]
        ecdf: bool,
    },
    /// Latent semantic analysis: spectrum, term weights, scatter data, group statistics.
    Lsa {
        manifest: PathBuf,
        #[command(flatten)]
        opts: AnalysisArgs,
    },
    /// Emails received per value of a target metadata field.
    Demographics {
        manifest: PathBuf,
        #[arg(long, default_value = "group")]
        field: String,
        /// JSON object mapping field values to group sizes, for per-capita rates.
        #[arg(long)]
        group_sizes: Option<PathBuf>,
    },
    /// Run every stage and emit one report.
    Characterize {
        manifest: PathBuf,
        #[command(flatten)]
        opts: AnalysisArgs,
    },
}

#[derive(Args)]
struct SynthArgs {
    /// Probability that an email goes to a same-topic target.
    #[arg(long, default_value_t = 0.5)]
    theta: f64,
    #[arg(long, default_value_t = 5)]
    topics: usize,
    #[arg(long, default_value_t = 58)]
    adversaries: usize,
    #[arg(long, default_value_t = 100)]
    targets: usize,
    /// Total unique attack pairs, spread across adversaries.
    #[arg(long, default_value_t = 252)]
    emails: usize,
    #[arg(long, default_value_t = 120)]
    doc_length: usize,
    #[arg(long, default_value_t = 400)]
    vocab_per_topic: usize,
    #[arg(long, default_value_t = 300)]
    shared_vocab: usize,
    /// Add per-recipient attacker groups and random high-volume senders.
    #[arg(long)]
    coordinated: bool,
    /// Emit an edge-free three-category benchmark with this many documents per category.
    #[arg(long, conflicts_with = "coordinated")]
    benchmark: Option<usize>,
}

#[derive(Args)]
struct AnalysisArgs {
    #[arg(long, default_value_t = 1)]
    min_df: usize,
    /// Weight observed pairs by email count instead of counting each pair once.
    #[arg(long)]
    weighted: bool,
    #[arg(long, default_value_t = 30)]
    bins: usize,
    /// Components (0-based) for term lists and group statistics.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    components: Vec<usize>,
    /// Component pair for the scatter data.
    #[arg(long, value_delimiter = ',', default_value = "0,1")]
    projection: Vec<usize>,
    #[arg(long, default_value_t = 15)]
    top_terms: usize,
    #[arg(long, default_value_t = 12)]
    top_groups: usize,
    /// Target metadata fields tabulated in the report.
    #[arg(long, value_delimiter = ',', default_value = "group")]
    fields: Vec<String>,
    #[arg(long, value_enum, default_value_t = SolverChoice::Auto)]
    svd_solver: SolverChoice,
    /// Iteration budget for the randomized solver.
    #[arg(long, default_value_t = 300)]
    svd_max_iterations: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum SolverChoice {
    Auto,
    Dense,
    Randomized,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            let numerical = e
                .chain()
                .filter_map(|c| c.downcast_ref::<phishmatch::Error>())
                .any(phishmatch::Error::is_numerical);
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let g = &cli.global;
    match &cli.command {
        Command::Synth(args) => synth_cmd(g, args),
        Command::Ingest { manifest } => {
            let m = load(manifest)?;
            let summary = json!({
                "documents": m.documents().len(),
                "adversaries": m.with_role(Role::Adversary).count(),
                "targets": m.with_role(Role::Target).count(),
                "edges": m.edges().len(),
                "emails": m.total_emails(),
                "empty_documents": m.empty_documents(),
            });
            emit(g, "ingest.json", &summary)
        }
        Command::Vectorize { manifest, min_df } => {
            let m = load(manifest)?;
            let x = matrix(g, &m, *min_df)?;
            if let Some(dir) = &g.out {
                fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                x.write_triples(create(&dir.join("matrix.csv"))?)?;
                x.write_vocabulary(create(&dir.join("vocabulary.csv"))?)?;
            }
            let summary = json!({
                "documents": x.n_docs(),
                "terms": x.n_terms(),
                "stored_entries": x.nnz(),
                "doc_ids": x.doc_ids(),
            });
            emit(g, "vectorize.json", &summary)
        }
        Command::Similarity { manifest, opts, ecdf } => {
            let m = load(manifest)?;
            let cfg = config(g, opts)?;
            let x = matrix(g, &m, opts.min_df)?;
            let s = report::similarity_section(&x, &m, &cfg)?;
            let mut value = serde_json::to_value(&s)?;
            if *ecdf {
                value["ecdf"] = json!({
                    "all_pairs": s.all_pairs.ecdf(),
                    "observed": s.observed.ecdf(),
                });
            }
            emit(g, "similarity.json", &value)
        }
        Command::Lsa { manifest, opts } => {
            let m = load(manifest)?;
            let cfg = config(g, opts)?;
            let x = matrix(g, &m, opts.min_df)?;
            let section = report::lsa_section(&x, &m, &cfg)?;
            if let Some(dir) = &g.out {
                fs::create_dir_all(dir)?;
                let mut w = csv::Writer::from_writer(create(&dir.join("projection.csv"))?);
                w.write_record(["doc_id", "role", "x", "y"])?;
                for p in &section.projection {
                    let role = p.role.map(|r| r.to_string()).unwrap_or_default();
                    w.write_record([p.doc_id.as_str(), &role, &p.x.to_string(), &p.y.to_string()])?;
                }
                w.flush()?;
            }
            emit(g, "lsa.json", &section)
        }
        Command::Demographics {
            manifest,
            field,
            group_sizes,
        } => {
            let m = load(manifest)?;
            let sizes: Option<BTreeMap<String, usize>> = match group_sizes {
                Some(p) => {
                    let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                    Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", p.display()))?)
                }
                None => None,
            };
            let rows = report::demographics(&m, field, sizes.as_ref())?;
            if let Some(dir) = &g.out {
                fs::create_dir_all(dir)?;
                let mut w = csv::Writer::from_writer(create(&dir.join("demographics.csv"))?);
                w.write_record(["value", "email_count", "unique_target_count", "percent", "per_capita"])?;
                for r in &rows {
                    w.write_record([
                        r.value.clone(),
                        r.email_count.to_string(),
                        r.unique_target_count.to_string(),
                        r.percent.to_string(),
                        r.per_capita.map(|v| v.to_string()).unwrap_or_default(),
                    ])?;
                }
                w.flush()?;
            }
            emit(g, "demographics.json", &json!({ "field": field, "rows": rows }))
        }
        Command::Characterize { manifest, opts } => {
            let m = load(manifest)?;
            let cfg = config(g, opts)?;
            let r = report::characterize(&m, &cfg)?;
            emit(g, "report.json", &r)
        }
    }
}

fn synth_cmd(g: &Global, a: &SynthArgs) -> anyhow::Result<()> {
    let Some(dir) = &g.out else {
        bail!("synth needs --out <dir> for the manifest directory");
    };
    let cfg = SynthConfig {
        n_topics: if a.benchmark.is_some() { 3 } else { a.topics },
        vocab_per_topic: a.vocab_per_topic,
        shared_vocab: a.shared_vocab,
        n_adversaries: a.adversaries,
        n_targets: a.targets,
        doc_length: a.doc_length,
        targeting_strength: a.theta,
        emails_per_adversary: a.emails.div_ceil(a.adversaries.max(1)).max(1),
        total_emails: Some(a.emails),
        seed: g.seed,
    };
    let m = match a.benchmark {
        Some(n) => synth::benchmark_corpus(&cfg, n)?,
        None if a.coordinated => synth::generate_coordinated(&cfg, &CoordinationPlan::default())?,
        None => synth::generate(&cfg)?,
    };
    let path = save_manifest(&m, dir)?;
    let summary = json!({
        "manifest": path,
        "documents": m.documents().len(),
        "edges": m.edges().len(),
        "config": cfg,
    });
    print_stdout(&serde_json::to_string_pretty(&summary)?)
}

fn load(path: &Path) -> anyhow::Result<CampaignManifest> {
    Ok(load_manifest(path)?)
}

fn stop_words(g: &Global) -> anyhow::Result<StopWords> {
    Ok(match &g.stop_words {
        Some(p) => StopWords::from_file(p)?,
        None => StopWords::builtin(),
    })
}

fn matrix(g: &Global, m: &CampaignManifest, min_df: usize) -> anyhow::Result<TfIdfMatrix> {
    let streams = m.ngram_streams(usize::from(g.ngram_max), &stop_words(g)?)?;
    Ok(vectorizer::fit_transform_with_min_df(&streams, min_df)?)
}

fn config(g: &Global, a: &AnalysisArgs) -> anyhow::Result<ReportConfig> {
    let ks_method = match g.ks_method {
        KsChoice::Asymptotic => KsMethod::Asymptotic,
        KsChoice::Permutation => KsMethod::Permutation {
            resamples: g.resamples,
            seed: g.seed,
        },
    };
    let &[j1, j2] = a.projection.as_slice() else {
        bail!("--projection takes exactly two components, e.g. 2,4");
    };
    Ok(ReportConfig {
        ngram_max: usize::from(g.ngram_max),
        stop_words_source: g
            .stop_words
            .as_ref()
            .map_or_else(|| "builtin".to_string(), |p| p.display().to_string()),
        stop_words: stop_words(g)?,
        min_df: a.min_df,
        ks_method,
        weighting: if a.weighted {
            Weighting::ByCount
        } else {
            Weighting::Unique
        },
        histogram_bins: a.bins,
        k: g.k,
        svd: SvdOptions {
            solver: match a.svd_solver {
                SolverChoice::Auto => Solver::Auto,
                SolverChoice::Dense => Solver::Dense,
                SolverChoice::Randomized => Solver::Randomized,
            },
            max_iterations: a.svd_max_iterations,
            ..SvdOptions::with_seed(g.seed)
        },
        components: a.components.clone(),
        projection: (j1, j2),
        top_terms: a.top_terms,
        top_groups: a.top_groups,
        demographic_fields: a.fields.clone(),
        ..ReportConfig::default()
    })
}

fn create(path: &Path) -> anyhow::Result<fs::File> {
    fs::File::create(path).with_context(|| format!("creating {}", path.display()))
}

fn emit<T: serde::Serialize>(g: &Global, name: &str, value: &T) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match &g.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
            eprintln!("wrote {}", path.display());
        }
        None => print_stdout(&text)?,
    }
    Ok(())
}

/// Writes to stdout, treating a closed pipe (`| head`) as success.
fn print_stdout(text: &str) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    match writeln!(out, "{text}").and_then(|()| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

/// The error chain joined with `: `, skipping causes whose text the
/// previous message already includes.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}
