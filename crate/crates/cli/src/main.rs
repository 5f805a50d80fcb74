//! `veracity`: synthesize a corpus, extract features, train and evaluate.
//!
//! Exit codes: 0 success, 1 runtime or data failure, 2 usage error.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use veracity_core::config::RunConfig;
use veracity_core::corpus::{au_name, generate_synthetic_corpus, load_manifest_with, Corpus, SynthConfig, CANONICAL_AUS};
use veracity_core::fusion::{
    parse_report_csv, prepare_corpus, render_csv, render_text, with_reference_rows, Evaluator, FusionStrategy, Method,
    Modality,
};
use veracity_core::lexical::build_vocabulary;
use veracity_core::svm::write_model;
use veracity_core::visual::{compute_agreement, map_to_annotation_categories, AUMapping};

#[derive(Parser)]
#[command(name = "veracity", version, about = "Multimodal deception classification from face, words and voice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic corpus with a planted class signal.
    Synth(SynthArgs),
    /// Validate the corpus and write per-record feature files.
    Extract(Common),
    /// Fit the early-fusion model on every record and save it.
    Train(Common),
    /// Cross-validate the single-modality and fusion rows and write the report.
    Evaluate(EvaluateArgs),
    /// Re-render a report CSV as a text table.
    Report(ReportArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Number of videos; must be even.
    #[arg(long, default_value_t = 100)]
    n: usize,
    /// Planted signal strength in [0, 1].
    #[arg(long, default_value_t = 1.0)]
    strength: f64,
    #[arg(long)]
    out: PathBuf,
    /// Write WAV audio instead of precomputed acoustic vectors.
    #[arg(long)]
    wav: bool,
}

#[derive(Args)]
struct Common {
    /// Configuration file of `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override any configuration key.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[command(flatten)]
    common: Common,
    /// Evaluate only these rows.
    #[arg(long, value_delimiter = ',')]
    only: Vec<Method>,
}

#[derive(Args)]
struct ReportArgs {
    /// A report CSV written by `evaluate`.
    #[arg(long)]
    input: PathBuf,
    /// Print CSV instead of the text table.
    #[arg(long)]
    csv: bool,
}

enum Failure {
    Usage(String),
    Runtime(String),
}

fn runtime(e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(e.to_string())
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Synth(args) => synth(&args),
        Command::Extract(common) => with_config(&common, extract),
        Command::Train(common) => with_config(&common, train),
        Command::Evaluate(args) => with_config(&args.common, |cfg| evaluate(cfg, &args.only)),
        Command::Report(args) => report(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn resolve_config(common: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) if !path.exists() => return Err(Failure::Usage(format!("config file {} does not exist", path.display()))),
        Some(path) => RunConfig::load(path).map_err(|e| Failure::Usage(e.to_string()))?,
        None => RunConfig::default(),
    };
    let cwd = Path::new(".");
    for item in &common.set {
        let (key, value) = item.split_once('=').ok_or_else(|| Failure::Usage(format!("--set expects KEY=VALUE, got `{item}`")))?;
        cfg.set(key.trim(), value.trim(), cwd).map_err(|e| Failure::Usage(e.to_string()))?;
    }
    if let Some(m) = &common.manifest {
        cfg.manifest = Some(m.clone());
    }
    if let Some(o) = &common.out {
        cfg.output_dir = o.clone();
    }
    Ok(cfg)
}

fn with_config(common: &Common, run: impl FnOnce(&RunConfig) -> Outcome + Send) -> Outcome {
    let cfg = resolve_config(common)?;
    if common.jobs == Some(0) {
        return Err(Failure::Usage("--jobs must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(common.jobs.unwrap_or(0)).build().map_err(runtime)?;
    pool.install(|| run(&cfg))
}

fn write_file(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Outcome {
    fs::create_dir_all(path).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", path.display())))
}

fn load_corpus(cfg: &RunConfig) -> Result<(Corpus, Vec<veracity_core::corpus::Exclusion>), Failure> {
    let manifest = cfg.manifest().map_err(|e| Failure::Usage(e.to_string()))?;
    let loaded = load_manifest_with(manifest, &cfg.validation()).map_err(runtime)?;
    Ok((loaded.corpus, loaded.excluded))
}

fn synth(args: &SynthArgs) -> Outcome {
    if args.n == 0 || args.n % 2 != 0 {
        return Err(Failure::Usage(format!("--n must be a positive even number, got {}", args.n)));
    }
    if !(0.0..=1.0).contains(&args.strength) {
        return Err(Failure::Usage(format!("--strength must lie in [0, 1], got {}", args.strength)));
    }
    let mut cfg = SynthConfig::new(args.seed, args.n, args.strength);
    cfg.with_audio = args.wav;
    create_dir(&args.out)?;
    generate_synthetic_corpus(&cfg, &args.out).map_err(runtime)?;
    println!("{}", args.out.join("manifest.tsv").display());
    Ok(())
}

fn join_values<T: std::fmt::Debug>(values: impl IntoIterator<Item = T>) -> String {
    values.into_iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

fn extract(cfg: &RunConfig) -> Outcome {
    let (corpus, excluded) = load_corpus(cfg)?;
    let out = &cfg.output_dir;
    let features_dir = out.join("features");
    create_dir(&features_dir)?;

    let mut exclusions = String::from("id\treason\n");
    for e in &excluded {
        println!("excluded {}: {}", e.id, e.reason);
        writeln!(exclusions, "{}\t{}", e.id, e.reason).unwrap();
    }
    write_file(&out.join("exclusions.tsv"), &exclusions)?;
    println!("{} records kept, {} excluded", corpus.len(), excluded.len());
    if corpus.is_empty() {
        return Err(Failure::Runtime("no records survived validation".into()));
    }

    let features = cfg.feature_config().map_err(runtime)?;
    let prepared = prepare_corpus(&corpus, &features, cfg.use_acoustic).map_err(runtime)?;
    let vocab = build_vocabulary(corpus.records.iter().map(|r| &r.transcript), cfg.min_frequency, &features.lexicons).map_err(runtime)?;

    let mut vocabulary = String::from("term\tfrequency\tclass\n");
    for (i, term) in vocab.terms().iter().enumerate() {
        writeln!(vocabulary, "{term}\t{}\t{:?}", vocab.corpus_frequency(term).unwrap_or(0), vocab.class(i)).unwrap();
    }
    write_file(&out.join("vocabulary.txt"), &vocabulary)?;

    let au_header = CANONICAL_AUS.iter().map(|&au| au_name(au)).collect::<Vec<_>>().join(",");
    for (record, f) in corpus.records.iter().zip(&prepared) {
        let bits = f.visual.bits.iter().map(|&b| u8::from(b).to_string()).collect::<Vec<_>>().join(",");
        write_file(&features_dir.join(format!("{}.visual.csv", record.id)), &format!("{au_header}\n{bits}\n"))?;
        let lexical = features.lexical(&record.transcript.tokens, &vocab);
        write_file(&features_dir.join(format!("{}.lexical", record.id)), &format!("{}\n", join_values(&lexical.0)))?;
        if cfg.use_acoustic {
            write_file(&features_dir.join(format!("{}.acoustic", record.id)), &format!("{}\n", join_values(f.acoustic.0)))?;
        }
    }

    let annotated: Vec<usize> = (0..corpus.len()).filter(|&i| corpus.records[i].manual_annotation.is_some()).collect();
    if !annotated.is_empty() {
        let mapping = AUMapping::standard();
        let auto: Vec<_> = annotated.iter().map(|&i| map_to_annotation_categories(&prepared[i].visual, &mapping)).collect();
        let manual: Vec<_> = annotated.iter().map(|&i| corpus.records[i].manual_annotation.clone().unwrap_or_default()).collect();
        let agreement = compute_agreement(&auto, &manual, &mapping.categories()).map_err(runtime)?;
        println!("automatic vs manual gesture agreement: {:.2}% over {} records", 100.0 * agreement, annotated.len());
    }
    println!("features written to {}", features_dir.display());
    Ok(())
}

fn train(cfg: &RunConfig) -> Outcome {
    let (corpus, excluded) = load_corpus(cfg)?;
    for e in &excluded {
        println!("excluded {}: {}", e.id, e.reason);
    }
    let eval = cfg.eval_config().map_err(runtime)?;
    let seed = eval.train.seed;
    let evaluator = Evaluator::new(&corpus, eval).map_err(runtime)?;
    let all: Vec<usize> = (0..corpus.len()).collect();
    let fitted = evaluator.fit_early_fusion(&all, seed).map_err(runtime)?;

    let out = &cfg.output_dir;
    create_dir(out)?;
    write_file(&out.join("model.txt"), &write_model(&fitted.model))?;
    let mut vocabulary = String::new();
    for term in fitted.vocabulary.terms() {
        writeln!(vocabulary, "{term}").unwrap();
    }
    write_file(&out.join("vocabulary.txt"), &vocabulary)?;
    let mut standardizers = String::from("modality\tindex\tmean\tstd\n");
    let s = &fitted.standardizers;
    for (m, st) in [(Modality::Visual, &s.visual), (Modality::Lexical, &s.lexical), (Modality::Acoustic, &s.acoustic)] {
        if ![cfg.use_visual, cfg.use_lexical, cfg.use_acoustic][m.index()] {
            continue;
        }
        for (i, (mean, std)) in st.mean.iter().zip(&st.std).enumerate() {
            writeln!(standardizers, "{}\t{i}\t{mean:?}\t{std:?}", m.as_str()).unwrap();
        }
    }
    write_file(&out.join("standardizers.tsv"), &standardizers)?;
    println!("model trained on {} records written to {}", corpus.len(), out.join("model.txt").display());
    Ok(())
}

fn evaluate(cfg: &RunConfig, only: &[Method]) -> Outcome {
    let (corpus, excluded) = load_corpus(cfg)?;
    for e in &excluded {
        println!("excluded {}: {}", e.id, e.reason);
    }
    let eval = cfg.eval_config().map_err(runtime)?;
    let evaluator = Evaluator::new(&corpus, eval).map_err(runtime)?;
    let methods: Vec<Method> = if only.is_empty() { Method::standard().to_vec() } else { only.to_vec() };
    let methods: Vec<Method> = methods
        .into_iter()
        .map(|m| match m {
            Method::Fusion(FusionStrategy::DecisionFusion { .. }) => Method::Fusion(FusionStrategy::DecisionFusion { weights: cfg.fusion_weights }),
            m => m,
        })
        .collect();
    let results = evaluator.run_all(&methods).map_err(runtime)?;
    let rows = with_reference_rows(&results.iter().map(|r| r.report_row()).collect::<Vec<_>>());

    let out = &cfg.output_dir;
    create_dir(out)?;
    let text = render_text(&rows);
    write_file(&out.join("report.txt"), &text)?;
    write_file(&out.join("report.csv"), &render_csv(&rows))?;
    print!("{text}");
    if let Some(acc) = results.iter().find_map(|r| r.utterance_accuracy) {
        println!("utterance-level accuracy (utterance_fusion): {:.2}%", 100.0 * acc);
    }
    Ok(())
}

fn report(args: &ReportArgs) -> Outcome {
    let text = fs::read_to_string(&args.input).map_err(|e| Failure::Runtime(format!("cannot read {}: {e}", args.input.display())))?;
    let rows = parse_report_csv(&text).map_err(|e| Failure::Runtime(format!("{}: {e}", args.input.display())))?;
    print!("{}", if args.csv { render_csv(&rows) } else { render_text(&rows) });
    Ok(())
}
