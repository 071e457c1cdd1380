//! `idwatch`: batch entry points for ingestion, project management,
//! validation, agreement and classifier evaluation.
//!
//! Exit codes: 0 success, 1 usage, 2 input/output, 3 validation,
//! 4 degenerate data.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use idwatch::agreement::{store_report, AgreementConfig, DEFAULT_THRESHOLD};
use idwatch::ingestion::{
    default_keywords, default_themes, ingest, read_documents, read_export, read_list,
    sample_period, theme_stats, write_documents, FetchedPage, Fetcher, IngestConfig,
    SnapshotFetcher,
};
use idwatch::mlpipe::{
    build_labeled_sets, evaluate_all, ClassifierKind, EvalConfig, LabelTask, NgramConfig,
};
use idwatch::schema::{
    crowd_to_expert, read_crowd_csv, resolve_majority, validate_annotation, Annotation,
    CrowdLabelValue, Dataset, DocType, Document, Language, Majority, Round, SchemaDef, Severity,
};
use idwatch::store::{
    assign, import_annotations, ExportFilter, Project, RoundSelector, Store, EXPORT_FORMAT,
};
use idwatch::{jsonl, Error, FetchFailure};

const EXIT_USAGE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_DEGENERATE: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "idwatch",
    version,
    about = "Internal displacement news annotation toolkit"
)]
struct Cli {
    /// Print reports as JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Filter a GDELT export by theme, fetch the articles and keep those matching a keyword.
    Ingest(IngestArgs),
    /// Per-theme reference and document counts of a GDELT export.
    Stats(StatsArgs),
    /// Draw a seeded random sample of documents published in one year.
    Sample(SampleArgs),
    /// Create a project directory.
    Init(InitArgs),
    /// Add documents to a project.
    Import(ImportArgs),
    /// Distribute documents over annotators.
    Assign(AssignArgs),
    /// Submit annotations (JSONL or an export file) to a project.
    Submit(SubmitArgs),
    /// Check annotations against the scheme without storing them.
    Validate(ValidateArgs),
    /// Write a project's annotations in the interchange format.
    Export(ExportArgs),
    /// Convert crowd labels to Relevance/Type annotations and resolve majorities.
    CrowdImport(CrowdImportArgs),
    /// Inter-annotator agreement per task.
    Agreement(AgreementArgs),
    /// Evaluate classifiers on the Relevance or Type task.
    Train(TrainArgs),
    /// Serve projects over HTTP.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
struct IngestArgs {
    /// GDELT GKG export (tab separated).
    #[arg(long)]
    export: PathBuf,
    /// Keyword list, one per line; the bundled list when omitted.
    #[arg(long)]
    keywords: Option<PathBuf>,
    /// Theme list, one per line; the bundled list when omitted.
    #[arg(long)]
    themes: Option<PathBuf>,
    /// Offline snapshot directory with an index.json; without it articles are fetched over HTTP.
    #[arg(long)]
    snapshot: Option<PathBuf>,
    #[arg(long, default_value = "custom")]
    dataset: String,
    #[arg(long, default_value_t = 8)]
    fetch_limit: usize,
    /// Output documents (JSONL).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    #[arg(long)]
    export: PathBuf,
    /// Count only these themes; every theme when omitted.
    #[arg(long)]
    themes: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    docs: PathBuf,
    #[arg(long)]
    year: i32,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct InitArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    project: String,
    #[arg(long, default_value = "")]
    name: String,
    /// Comma separated annotator ids.
    #[arg(long, value_delimiter = ',', required = true)]
    annotators: Vec<String>,
    #[arg(long, default_value_t = 0.2)]
    consensus_fraction: f64,
    #[arg(long, default_value_t = 3)]
    arity: usize,
    #[arg(long, default_value = "en")]
    language: String,
    /// Scheme file; the bundled Expert scheme when omitted.
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ImportArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long)]
    docs: PathBuf,
}

#[derive(Debug, Args)]
struct AssignArgs {
    /// Assign the unassigned documents of this project.
    #[arg(long, conflicts_with_all = ["docs", "annotators", "consensus_fraction", "arity"])]
    store: Option<PathBuf>,
    /// Offline mode: documents to assign.
    #[arg(long, requires = "annotators")]
    docs: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    annotators: Vec<String>,
    #[arg(long)]
    consensus_fraction: Option<f64>,
    #[arg(long)]
    arity: Option<usize>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Offline mode: output assignments (JSONL).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SubmitArgs {
    #[arg(long)]
    store: PathBuf,
    /// Annotations: JSONL, or an export file with its header line.
    file: PathBuf,
}

#[derive(Debug, Args)]
struct ValidateArgs {
    /// Annotations: JSONL, or an export file with its header line.
    file: PathBuf,
    /// Documents the annotations refer to.
    #[arg(long)]
    docs: PathBuf,
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long, default_value = "current")]
    round: String,
    #[arg(long)]
    annotator: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct CrowdImportArgs {
    /// CSV with header document_id,worker_id,label.
    #[arg(long)]
    csv: PathBuf,
    /// Output annotations (JSONL), one per crowd label.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AgreementArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long, default_value = "current")]
    round: String,
    #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
    threshold: f64,
    /// Also write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    /// Read documents and current annotations from a project.
    #[arg(long, conflicts_with_all = ["docs", "annotations"])]
    store: Option<PathBuf>,
    #[arg(long, requires = "annotations")]
    docs: Option<PathBuf>,
    #[arg(long, requires = "docs")]
    annotations: Option<PathBuf>,
    /// relevance or type.
    #[arg(long, default_value = "relevance")]
    task: String,
    /// A classifier name or "all".
    #[arg(long, default_value = "all")]
    classifier: String,
    #[arg(long, default_value_t = 10)]
    folds: usize,
    #[arg(long, default_value_t = 50)]
    splits: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    #[arg(long, default_value_t = 5)]
    min_df: usize,
    #[arg(long, default_value_t = 5)]
    max_n: usize,
    /// Write the report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write per-split metrics as CSV.
    #[arg(long)]
    splits_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Project directories to serve.
    #[arg(long = "store", required = true)]
    stores: Vec<PathBuf>,
    #[arg(long, default_value = "127.0.0.1:8080")]
    addr: String,
}

/// A command failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io { .. } | Error::Json(_) | Error::Csv(_) | Error::Parse { .. } => EXIT_IO,
            Error::Fetch { .. } => EXIT_IO,
            Error::ValidationFailed(_)
            | Error::UnknownLabel { .. }
            | Error::UnknownDocument { .. }
            | Error::DocumentNotFound(_)
            | Error::NoAssignment { .. }
            | Error::DuplicateSubmission { .. } => EXIT_VALIDATION,
            Error::InsufficientPopulation { .. }
            | Error::NotEnoughAnnotators { .. }
            | Error::NoEligibleUnits(_)
            | Error::EmptyVocabulary { .. }
            | Error::SingleClass
            | Error::FoldDegeneracy { .. } => EXIT_DEGENERATE,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: impl std::fmt::Display) -> Self {
        Failure {
            code: EXIT_IO,
            message: format!("{}: {e}", path.display()),
        }
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let json_out = cli.json;
    let result = match cli.command {
        Command::Ingest(a) => cmd_ingest(a, json_out),
        Command::Stats(a) => cmd_stats(a, json_out),
        Command::Sample(a) => cmd_sample(a),
        Command::Init(a) => cmd_init(a),
        Command::Import(a) => cmd_import(a),
        Command::Assign(a) => cmd_assign(a),
        Command::Submit(a) => cmd_submit(a),
        Command::Validate(a) => cmd_validate(a, json_out),
        Command::Export(a) => cmd_export(a),
        Command::CrowdImport(a) => cmd_crowd_import(a, json_out),
        Command::Agreement(a) => cmd_agreement(a, json_out),
        Command::Train(a) => cmd_train(a, json_out),
        Command::Serve(a) => cmd_serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn effective_config(command: &str, config: Value) {
    eprintln!("{command} config: {config}");
}

fn open(path: &Path) -> Result<File, Failure> {
    File::open(path).map_err(|e| Failure::io(path, e))
}

fn write_text(path: &Path, text: &str) -> CmdResult {
    std::fs::write(path, text).map_err(|e| Failure::io(path, e))
}

fn to_json(value: &impl serde::Serialize) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(value).map_err(Error::from)? + "\n")
}

fn parse_enum<T: serde::de::DeserializeOwned>(what: &str, value: &str) -> Result<T, Failure> {
    serde_json::from_value(json!(value))
        .map_err(|_| Failure::usage(format!("unknown {what} {value:?}")))
}

fn list_or(path: &Option<PathBuf>, default: Vec<String>) -> Result<Vec<String>, Failure> {
    match path {
        Some(p) => Ok(read_list(p)?),
        None => Ok(default),
    }
}

/// Reads annotations from plain JSONL or from an export file.
fn read_annotations(path: &Path) -> Result<Vec<Annotation>, Failure> {
    let mut reader = BufReader::new(open(path)?);
    let mut first = String::new();
    reader
        .read_line(&mut first)
        .map_err(|e| Failure::io(path, e))?;
    let is_export = serde_json::from_str::<Value>(&first)
        .ok()
        .and_then(|v| {
            v.get("format")
                .and_then(Value::as_str)
                .map(|f| f == EXPORT_FORMAT)
        })
        .unwrap_or(false);
    let rest = first.as_bytes().chain(reader);
    if is_export {
        Ok(import_annotations(BufReader::new(rest))?.1)
    } else {
        Ok(jsonl::read_from(BufReader::new(rest))?)
    }
}

fn load_schema(path: &Option<PathBuf>) -> Result<SchemaDef, Failure> {
    match path {
        Some(p) => Ok(SchemaDef::load(p)?),
        None => Ok(SchemaDef::expert()),
    }
}

/// Blocking HTTP transport for live ingestion.
struct HttpFetcher {
    client: reqwest::blocking::Client,
}

impl Fetcher for HttpFetcher {
    fn fetch(&self, url: &str) -> Result<FetchedPage, FetchFailure> {
        let resp = self
            .client
            .get(url)
            .send()
            .map_err(|e| FetchFailure::Network {
                message: e.to_string(),
            })?;
        let status = resp.status().as_u16();
        let content_type = resp
            .headers()
            .get(reqwest::header::CONTENT_TYPE)
            .and_then(|v| v.to_str().ok())
            .map(str::to_string);
        let body = resp.text().map_err(|e| FetchFailure::Network {
            message: e.to_string(),
        })?;
        Ok(FetchedPage {
            status,
            content_type,
            body,
        })
    }
}

fn cmd_ingest(a: IngestArgs, json_out: bool) -> CmdResult {
    let themes: BTreeSet<String> = match &a.themes {
        Some(p) => read_list(p)?.into_iter().collect(),
        None => default_themes(),
    };
    let config = IngestConfig {
        themes,
        keywords: list_or(&a.keywords, default_keywords())?,
        dataset: parse_enum::<Dataset>("dataset", &a.dataset)?,
        fetch_limit: a.fetch_limit.max(1),
    };
    effective_config(
        "ingest",
        json!({
            "export": a.export, "snapshot": a.snapshot, "out": a.out,
            "themes": config.themes.len(), "keywords": config.keywords.len(),
            "dataset": config.dataset, "fetch_limit": config.fetch_limit,
        }),
    );
    let records = read_export(open(&a.export)?)?;
    let fetcher: Box<dyn Fetcher> = match &a.snapshot {
        Some(dir) => Box::new(SnapshotFetcher::open(dir)?),
        None => Box::new(HttpFetcher {
            client: reqwest::blocking::Client::builder()
                .timeout(std::time::Duration::from_secs(30))
                .build()
                .map_err(|e| Failure::usage(e.to_string()))?,
        }),
    };
    let outcome = ingest(&records, fetcher.as_ref(), &config);
    write_documents(&a.out, &outcome.documents)?;
    let summary = json!({
        "records": records.len(),
        "documents": outcome.documents.len(),
        "off_theme": outcome.off_theme,
        "unsupported_language": outcome.unsupported_language,
        "duplicate_url": outcome.duplicate_url,
        "no_keyword": outcome.no_keyword,
        "fetch_failures": outcome.failures.len(),
    });
    if json_out {
        println!("{summary}");
    } else {
        println!(
            "{} documents written to {}",
            outcome.documents.len(),
            a.out.display()
        );
        for (url, reason) in &outcome.failures {
            println!("fetch failed: {url}: {reason}");
        }
    }
    Ok(())
}

fn cmd_stats(a: StatsArgs, json_out: bool) -> CmdResult {
    effective_config(
        "stats",
        json!({"export": a.export, "themes": a.themes, "out": a.out}),
    );
    let records = read_export(open(&a.export)?)?;
    let tracked: Option<BTreeSet<String>> = match &a.themes {
        Some(p) => Some(read_list(p)?.into_iter().collect()),
        None => None,
    };
    let stats = theme_stats(&records, tracked.as_ref());
    let text = if json_out {
        to_json(&stats)?
    } else {
        stats.render()
    };
    print!("{text}");
    if let Some(out) = &a.out {
        write_text(out, &to_json(&stats)?)?;
    }
    Ok(())
}

fn cmd_sample(a: SampleArgs) -> CmdResult {
    effective_config(
        "sample",
        json!({"docs": a.docs, "year": a.year, "n": a.n, "seed": a.seed, "out": a.out}),
    );
    let docs = read_documents(&a.docs)?;
    let sample = sample_period(&docs, a.year, a.n, a.seed)?;
    write_documents(&a.out, &sample)?;
    println!("{} documents sampled to {}", sample.len(), a.out.display());
    Ok(())
}

fn cmd_init(a: InitArgs) -> CmdResult {
    let mut project = Project::new(
        &a.project,
        if a.name.is_empty() {
            &a.project
        } else {
            &a.name
        },
    );
    project.annotators = a.annotators.clone();
    project.consensus_fraction = a.consensus_fraction;
    project.annotators_per_consensus_doc = a.arity;
    project.language = parse_enum::<Language>("language", &a.language)?;
    effective_config(
        "init",
        json!({"store": a.store, "project": project, "schema": a.schema}),
    );
    if let Some(schema_path) = &a.schema {
        let schema = SchemaDef::load(schema_path)?;
        let problems = schema.check();
        if !problems.is_empty() {
            return Err(Failure::usage(format!(
                "invalid schema: {}",
                problems.join("; ")
            )));
        }
    }
    Store::create(&a.store, project)?;
    if let Some(schema_path) = &a.schema {
        let target = a.store.join("schema.json");
        std::fs::copy(schema_path, &target).map_err(|e| Failure::io(&target, e))?;
    }
    println!("project {} created in {}", a.project, a.store.display());
    Ok(())
}

fn cmd_import(a: ImportArgs) -> CmdResult {
    effective_config("import", json!({"store": a.store, "docs": a.docs}));
    let mut store = Store::open(&a.store)?;
    let docs = read_documents(&a.docs)?;
    let added = store.add_documents(&docs)?;
    println!("{added} of {} documents added", docs.len());
    Ok(())
}

fn cmd_assign(a: AssignArgs) -> CmdResult {
    if let Some(dir) = &a.store {
        effective_config("assign", json!({"store": dir, "seed": a.seed}));
        let mut store = Store::open(dir)?;
        let new = store.assign_unassigned(a.seed)?;
        println!("{} assignments created", new.len());
        return Ok(());
    }
    let (Some(docs_path), Some(out)) = (&a.docs, &a.out) else {
        return Err(Failure::usage(
            "assign needs --store, or --docs with --annotators and --out",
        ));
    };
    let mut project = Project::new("offline", "offline");
    project.annotators = a.annotators.clone();
    project.consensus_fraction = a.consensus_fraction.unwrap_or(0.2);
    project.annotators_per_consensus_doc = a.arity.unwrap_or(3);
    effective_config(
        "assign",
        json!({
            "docs": docs_path, "annotators": project.annotators,
            "consensus_fraction": project.consensus_fraction,
            "arity": project.annotators_per_consensus_doc, "seed": a.seed, "out": out,
        }),
    );
    let ids: Vec<String> = read_documents(docs_path)?
        .into_iter()
        .map(|d| d.id)
        .collect();
    let assignments = assign(&project, &ids, a.seed)?;
    jsonl::write_all(out, &assignments)?;
    println!(
        "{} assignments for {} documents written to {}",
        assignments.len(),
        ids.len(),
        out.display()
    );
    Ok(())
}

fn cmd_submit(a: SubmitArgs) -> CmdResult {
    effective_config("submit", json!({"store": a.store, "file": a.file}));
    let mut store = Store::open(&a.store)?;
    let annotations = read_annotations(&a.file)?;
    let n = annotations.len();
    for (i, ann) in annotations.into_iter().enumerate() {
        let label = format!("{} / {}", ann.document_id, ann.annotator_id);
        store.submit(ann).map_err(|e| {
            let mut f = Failure::from(e);
            f.message = format!("annotation {} ({label}): {}", i + 1, f.message);
            f
        })?;
    }
    println!("{n} annotations submitted");
    Ok(())
}

fn cmd_validate(a: ValidateArgs, json_out: bool) -> CmdResult {
    effective_config(
        "validate",
        json!({"file": a.file, "docs": a.docs, "schema": a.schema}),
    );
    let schema = load_schema(&a.schema)?;
    let docs: BTreeMap<String, Document> = read_documents(&a.docs)?
        .into_iter()
        .map(|d| (d.id.clone(), d))
        .collect();
    let annotations = read_annotations(&a.file)?;
    let mut errors = 0;
    let mut listed = Vec::new();
    for (i, ann) in annotations.iter().enumerate() {
        let Some(doc) = docs.get(&ann.document_id) else {
            errors += 1;
            listed.push(json!({
                "index": i + 1, "document_id": ann.document_id, "annotator_id": ann.annotator_id,
                "rule_id": "unknown-document", "severity": "error", "offending_ids": [],
                "message": format!("document {} not found", ann.document_id),
            }));
            continue;
        };
        let report = validate_annotation(doc, ann, &schema)?;
        for v in &report.violations {
            if v.severity == Severity::Error {
                errors += 1;
            }
            listed.push(json!({
                "index": i + 1, "document_id": ann.document_id, "annotator_id": ann.annotator_id,
                "rule_id": v.rule_id, "severity": v.severity, "offending_ids": v.offending_ids,
                "message": v.message,
            }));
        }
    }
    if json_out {
        print!(
            "{}",
            to_json(
                &json!({"annotations": annotations.len(), "errors": errors, "violations": listed})
            )?
        );
    } else {
        for v in &listed {
            let ids: Vec<&str> = v["offending_ids"]
                .as_array()
                .map(|a| a.iter().filter_map(Value::as_str).collect())
                .unwrap_or_default();
            println!(
                "{}\t{}\t{}\t{}\t{}\t[{}]\t{}",
                v["index"],
                v["document_id"].as_str().unwrap_or(""),
                v["annotator_id"].as_str().unwrap_or(""),
                v["severity"].as_str().unwrap_or(""),
                v["rule_id"].as_str().unwrap_or(""),
                ids.join(","),
                v["message"].as_str().unwrap_or("")
            );
        }
        println!(
            "{} violation(s), {errors} error(s) in {} annotation(s)",
            listed.len(),
            annotations.len()
        );
    }
    if errors > 0 {
        return Err(Failure {
            code: EXIT_VALIDATION,
            message: format!("{errors} validation error(s)"),
        });
    }
    Ok(())
}

fn cmd_export(a: ExportArgs) -> CmdResult {
    let filter = ExportFilter {
        round: a.round.parse()?,
        annotator: a.annotator.clone(),
        relevance: None,
    };
    effective_config(
        "export",
        json!({"store": a.store, "filter": filter, "out": a.out}),
    );
    let store = Store::open(&a.store)?;
    let file = File::create(&a.out).map_err(|e| Failure::io(&a.out, e))?;
    let n = store.export(&filter, std::io::BufWriter::new(file))?;
    println!("{n} annotations exported to {}", a.out.display());
    Ok(())
}

fn cmd_crowd_import(a: CrowdImportArgs, json_out: bool) -> CmdResult {
    effective_config("crowd-import", json!({"csv": a.csv, "out": a.out}));
    let labels = read_crowd_csv(open(&a.csv)?)?;
    let mut by_doc: BTreeMap<&str, Vec<CrowdLabelValue>> = BTreeMap::new();
    let mut annotations = Vec::with_capacity(labels.len());
    for l in &labels {
        by_doc.entry(&l.document_id).or_default().push(l.label);
        let (relevance, doc_type) = crowd_to_expert(l.label);
        let mut ann = Annotation::new(
            &l.document_id,
            &l.worker_id,
            relevance,
            doc_type.unwrap_or(DocType::NotApplicable),
        );
        ann.round = Round::Initial;
        annotations.push(ann);
    }
    jsonl::write_all(&a.out, &annotations)?;
    let resolved: Vec<Value> = by_doc
        .iter()
        .map(|(doc, votes)| {
            let outcome = match resolve_majority(votes) {
                Majority::Decided(v) => v.as_str().to_string(),
                _ => "conflict".to_string(),
            };
            json!({"document_id": doc, "votes": votes.len(), "majority": outcome})
        })
        .collect();
    if json_out {
        print!("{}", to_json(&resolved)?);
    } else {
        for r in &resolved {
            println!(
                "{}\t{}\t{}",
                r["document_id"].as_str().unwrap_or(""),
                r["votes"],
                r["majority"].as_str().unwrap_or("")
            );
        }
        println!(
            "{} labels from {} documents written to {}",
            labels.len(),
            by_doc.len(),
            a.out.display()
        );
    }
    Ok(())
}

fn cmd_agreement(a: AgreementArgs, json_out: bool) -> CmdResult {
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(Failure::usage(format!(
            "threshold {} outside [0, 1]",
            a.threshold
        )));
    }
    let round: RoundSelector = a.round.parse()?;
    let config = AgreementConfig::default().with_threshold(a.threshold);
    effective_config(
        "agreement",
        json!({
            "store": a.store, "round": round, "threshold": config.threshold,
            "similarity": config.similarity.name(), "fact_comparison": config.fact_comparison.as_str(),
            "out": a.out,
        }),
    );
    let store = Store::open(&a.store)?;
    let report = store_report(&store, round, &config)?;
    if report.header.consensus_documents == 0 {
        return Err(
            Error::NoEligibleUnits("agreement: no multiply annotated documents".into()).into(),
        );
    }
    let json_text = to_json(&report)?;
    print!(
        "{}",
        if json_out {
            json_text.clone()
        } else {
            report.render()
        }
    );
    if let Some(out) = &a.out {
        write_text(out, &json_text)?;
    }
    Ok(())
}

fn cmd_train(a: TrainArgs, json_out: bool) -> CmdResult {
    let task: LabelTask = a.task.parse()?;
    let kinds: Vec<ClassifierKind> = if a.classifier == "all" {
        ClassifierKind::ALL.to_vec()
    } else {
        a.classifier
            .split(',')
            .map(|k| k.trim().parse())
            .collect::<Result<_, _>>()?
    };
    let config = EvalConfig {
        splits: a.splits,
        test_fraction: a.test_fraction,
        folds: a.folds,
        seed: a.seed,
        ngram: NgramConfig {
            n_min: 1,
            n_max: a.max_n,
            min_df: a.min_df,
        },
        grid: None,
    };
    if config.splits == 0
        || config.folds < 2
        || !(0.0..1.0).contains(&config.test_fraction)
        || a.max_n == 0
    {
        return Err(Failure::usage(
            "need splits >= 1, folds >= 2, 0 <= test-fraction < 1, max-n >= 1",
        ));
    }
    effective_config(
        "train",
        json!({
            "store": a.store, "docs": a.docs, "annotations": a.annotations, "task": task.as_str(),
            "classifiers": kinds.iter().map(|k| k.as_str()).collect::<Vec<_>>(), "eval": config,
            "out": a.out, "splits_csv": a.splits_csv,
        }),
    );
    let (documents, annotations) = match (&a.store, &a.docs, &a.annotations) {
        (Some(dir), _, _) => {
            let store = Store::open(dir)?;
            let anns = store
                .annotations(RoundSelector::Current)
                .into_iter()
                .map(|s| s.annotation.clone())
                .collect();
            (store.documents().to_vec(), anns)
        }
        (None, Some(docs), Some(anns)) => (read_documents(docs)?, read_annotations(anns)?),
        _ => {
            return Err(Failure::usage(
                "train needs --store, or --docs with --annotations",
            ))
        }
    };
    let refs: Vec<&Annotation> = annotations.iter().collect();
    let sets = build_labeled_sets(&refs);
    let labeled = sets.get(task);
    eprintln!(
        "train labeled set: {} documents, {} positive, {} negative",
        labeled.len(),
        labeled.positives(),
        labeled.negatives()
    );
    let report = evaluate_all(&kinds, &documents, labeled, &config)?;
    let json_text = to_json(&report)?;
    print!(
        "{}",
        if json_out {
            json_text.clone()
        } else {
            report.render()
        }
    );
    if let Some(out) = &a.out {
        write_text(out, &json_text)?;
    }
    if let Some(path) = &a.splits_csv {
        let mut all = Vec::new();
        for (i, row) in report.rows.iter().enumerate() {
            let mut buf = Vec::new();
            row.write_split_csv(&mut buf)?;
            let text = String::from_utf8_lossy(&buf).into_owned();
            // Keep the header of the first classifier only.
            let body = if i == 0 {
                text.as_str()
            } else {
                text.split_once('\n').map_or("", |x| x.1)
            };
            all.extend_from_slice(body.as_bytes());
        }
        let mut f = File::create(path).map_err(|e| Failure::io(path, e))?;
        f.write_all(&all).map_err(|e| Failure::io(path, e))?;
    }
    Ok(())
}

fn cmd_serve(a: ServeArgs) -> CmdResult {
    effective_config("serve", json!({"stores": a.stores, "addr": a.addr}));
    let stores = a
        .stores
        .iter()
        .map(|p| Store::open(p))
        .collect::<idwatch::Result<Vec<_>>>()?;
    let state = idwatch_service::AppState::new(stores);
    eprintln!(
        "serving projects {:?} on http://{}",
        state.project_ids(),
        a.addr
    );
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::usage(e.to_string()))?;
    runtime
        .block_on(idwatch_service::serve(state, &a.addr))
        .map_err(|e| Failure {
            code: EXIT_IO,
            message: format!("{}: {e}", a.addr),
        })
}
