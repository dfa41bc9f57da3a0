use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use modular_kgqa::generation::{generate_all, GenerationParams, GenerationResult, Generator};
use modular_kgqa::kg::{load_queries, Graph};
use modular_kgqa::pipeline::{load_instance_config, run_instance, InstanceSource, RunOptions, RunReport};
use modular_kgqa::prompts::{PromptTemplate, Shots};
use modular_kgqa::scoring::ScorerConfig;
use serde_json::json;

use crate::tables;
use crate::{Command, RunArgs};

pub const TRIPLES_FILE: &str = "triples.tsv";
pub const QUERIES_FILE: &str = "queries.jsonl";
pub const STATS_FILE: &str = "stats.json";

#[derive(Debug)]
pub enum CliError {
    /// Bad input: missing files, invalid configs or data.
    Usage(String),
    /// Failure while doing valid work.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Runtime(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) | Self::Runtime(m) => f.write_str(m),
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(e: impl fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn runtime(e: impl fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))
}

fn read_report(path: &Path) -> Result<RunReport> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    RunReport::from_json(&text).map_err(|e| usage(format!("{} is not a run report: {e}", path.display())))
}

pub fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Ingest { triples, queries, out } => ingest(&triples, &queries, &out),
        Command::Run(args) => run(args),
        Command::Generate {
            run,
            llm_config,
            shots,
            out,
        } => generate(&run, &llm_config, &shots, &out),
        Command::Eval { run, gen } => eval(&run, gen.as_deref()),
        Command::Report { runs, format } => report(&runs, format),
        Command::ListInstances => {
            print!("{}", tables::instance_list());
            Ok(())
        }
    }
}

fn ingest(triples: &Path, queries: &Path, out: &Path) -> Result<()> {
    let graph = Graph::load_triples(triples).map_err(usage)?;
    let set = load_queries(queries, &graph).map_err(usage)?;
    fs::create_dir_all(out).map_err(|e| runtime(format!("cannot create {}: {e}", out.display())))?;
    let mut w = create(&out.join(TRIPLES_FILE))?;
    graph.write_tsv(&mut w).and_then(|_| w.flush()).map_err(runtime)?;
    fs::copy(queries, out.join(QUERIES_FILE)).map_err(runtime)?;
    let stats = json!({
        "entities": graph.entity_count(),
        "relations": graph.relations().len(),
        "triples": graph.triple_count(),
        "queries": set.queries.len(),
        "queries_without_answers": set.queries.iter().filter(|q| !q.has_answers()).count(),
        "skipped_queries": set.skipped,
        "dropped_answer_labels": set.dropped_answers,
    });
    fs::write(out.join(STATS_FILE), serde_json::to_string_pretty(&stats).map_err(runtime)?).map_err(runtime)?;
    println!(
        "ingested {} triples, {} entities, {} queries ({} skipped) into {}",
        graph.triple_count(),
        graph.entity_count(),
        set.queries.len(),
        set.skipped.len(),
        out.display()
    );
    Ok(())
}

fn override_endpoint(scorer: &mut Option<ScorerConfig>, endpoint: &str) {
    if let Some(s) = scorer.as_mut().filter(|s| s.kind.is_remote()) {
        s.endpoint = Some(endpoint.to_owned());
    }
}

fn run(args: RunArgs) -> Result<()> {
    let source = match (&args.instance, &args.config) {
        (Some(id), _) => InstanceSource::Preset(*id),
        (None, Some(path)) => InstanceSource::File(path),
        (None, None) => return Err(usage("one of --instance or --config is required")),
    };
    let mut cfg = load_instance_config(source).map_err(usage)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(endpoint) = &args.scorer_endpoint {
        override_endpoint(&mut cfg.se.scorer, endpoint);
        override_endpoint(&mut cfg.pf.scorer, endpoint);
        override_endpoint(&mut cfg.pr.scorer, endpoint);
    }
    let graph = Graph::load_triples(args.data.join(TRIPLES_FILE)).map_err(usage)?;
    let set = load_queries(args.data.join(QUERIES_FILE), &graph).map_err(usage)?;
    let report = run_instance(&graph, &set.queries, &cfg, RunOptions { workers: args.workers }).map_err(usage)?;
    let mut w = create(&args.out)?;
    w.write_all(report.to_json().as_bytes())
        .and_then(|_| w.flush())
        .map_err(runtime)?;
    if let Some(p) = &args.paths_out {
        let mut w = create(p)?;
        report.write_paths_jsonl(&mut w).and_then(|_| w.flush()).map_err(runtime)?;
    }
    println!(
        "instance {} ({}), seed {}: {} queries, {} failed -> {}",
        report.instance_id,
        report.instance_name,
        report.seed,
        report.query_count,
        report.failed_queries,
        args.out.display()
    );
    Ok(())
}

fn generate(run: &Path, llm_config: &Path, shots: &str, out: &Path) -> Result<()> {
    let shots = Shots::parse(shots).ok_or_else(|| usage(format!("--shots must be 0, 1 or few, got {shots:?}")))?;
    let report = read_report(run)?;
    let params = GenerationParams::load(llm_config).map_err(usage)?;
    let generator = Generator::new(params).map_err(usage)?;
    let inputs: Vec<_> = report
        .queries
        .iter()
        .filter(|q| q.error.is_none())
        .map(|q| q.generation_input())
        .collect();
    let results = generate_all(&generator, PromptTemplate::new(shots), &inputs);
    let mut w = create(out)?;
    for r in &results {
        writeln!(w, "{}", serde_json::to_string(r).map_err(runtime)?).map_err(runtime)?;
    }
    w.flush().map_err(runtime)?;
    let failed = results.iter().filter(|r| r.error.is_some()).count();
    println!("generated {} answers ({failed} failed) -> {}", results.len(), out.display());
    if !results.is_empty() && failed == results.len() {
        return Err(runtime("every completion request failed"));
    }
    Ok(())
}

fn read_generation(path: &Path) -> Result<Vec<GenerationResult>> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .enumerate()
        .map(|(i, l)| serde_json::from_str(l).map_err(|e| usage(format!("{}:{}: {e}", path.display(), i + 1))))
        .collect()
}

fn eval(run: &Path, gen: Option<&Path>) -> Result<()> {
    let report = read_report(run)?;
    let generation = gen.map(read_generation).transpose()?;
    print!("{}", tables::eval_table(&report, generation.as_deref()));
    Ok(())
}

fn report(runs: &[PathBuf], format: crate::Format) -> Result<()> {
    let reports = runs.iter().map(|p| read_report(p)).collect::<Result<Vec<_>>>()?;
    let text = match format {
        crate::Format::Md => tables::comparison_md(&reports),
        crate::Format::Csv => tables::comparison_csv(&reports).map_err(runtime)?,
    };
    print!("{text}");
    Ok(())
}
