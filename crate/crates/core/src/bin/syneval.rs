use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use syneval::corpus::{read_corpus, Vocab};
use syneval::eval::{
    aggregate, evaluate, load_scores, sentence_id, AccuracyTable, EvalRun, Grouping, Member, NormalizedScorer,
    PairResult, ScoreRecord, Scorer,
};
use syneval::grammar::{Grammar, MinimalPair, BUNDLED};
use syneval::jsonl;
use syneval::judge::{build_lists, JudgeService, JudgmentStore, ListConfig, ResultsReport, TrialList};
use syneval::ngram::{count_ngrams, estimate, NGramModel};
use syneval::report::{self, Column, ResultColumn};

/// Minimal-pair generation, n-gram scoring, forced-choice evaluation and
/// human judgment collection.
#[derive(Parser)]
#[command(name = "syneval", version)]
struct Cli {
    /// Worker threads for generation and scoring (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a grammar into minimal pairs (JSON Lines).
    Generate(GenerateArgs),
    /// Train a Kneser-Ney n-gram model and write it as ARPA.
    TrainNgram(TrainArgs),
    /// Score both members of every pair with an ARPA model.
    Score(ScoreArgs),
    /// Validate a score file and summarize it.
    Ingest(IngestArgs),
    /// Apply the forced-choice criterion and write results and accuracies.
    Evaluate(EvaluateArgs),
    /// Render overall, cross-tab, per-subcondition and trace reports.
    Report(ReportArgs),
    /// Build the trial lists for the human experiment.
    BuildLists(BuildListsArgs),
    /// Run the judgment collection service.
    Serve(ServeArgs),
    /// Generate, train, score, evaluate and report in one run.
    Pipeline(PipelineArgs),
}

#[derive(Args, Clone)]
struct GrammarArg {
    /// Grammar file. Relative paths are also tried under the data directory;
    /// names of bundled grammars resolve to the built-in copy.
    #[arg(long, default_value = "full.grammar")]
    grammar: PathBuf,

    /// Directory searched for relative grammar paths.
    #[arg(long, env = "SYNEVAL_DATA_DIR")]
    data_dir: Option<PathBuf>,
}

impl GrammarArg {
    fn load(&self) -> Result<Grammar> {
        let mut candidates = vec![self.grammar.clone()];
        if let Some(dir) = &self.data_dir {
            if self.grammar.is_relative() {
                candidates.push(dir.join(&self.grammar));
                if let Some(name) = self.grammar.file_name() {
                    candidates.push(dir.join(name));
                }
            }
        }
        for c in &candidates {
            if c.is_file() {
                return Grammar::from_file(c).with_context(|| format!("loading grammar {}", c.display()));
            }
        }
        let name = self.grammar.file_name().and_then(|n| n.to_str()).unwrap_or_default();
        if BUNDLED.iter().any(|(n, _)| *n == name) {
            return Ok(Grammar::bundled(name)?);
        }
        bail!("grammar {} not found", self.grammar.display())
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[command(flatten)]
    grammar: GrammarArg,
    /// Output file (JSON Lines).
    #[arg(long)]
    out: PathBuf,
    /// Only this condition id.
    #[arg(long)]
    condition: Option<String>,
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// n-gram order.
    #[arg(long, default_value_t = 5)]
    order: usize,
    /// Tokens seen fewer times map to <unk>.
    #[arg(long, default_value_t = 2)]
    min_count: u64,
}

#[derive(Args)]
struct TrainArgs {
    /// Training corpus: one pre-tokenized sentence per line.
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Output ARPA file.
    #[arg(long)]
    out: PathBuf,
    /// Held-out corpus for a perplexity report.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Report grammar lexicon tokens missing from the vocabulary.
    #[arg(long)]
    coverage: bool,
    #[command(flatten)]
    grammar: GrammarArg,
}

#[derive(Args, Clone)]
struct ScorerArgs {
    /// ARPA model used as the scorer.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Unigram ARPA model for --normalize.
    #[arg(long)]
    unigram: Option<PathBuf>,
    /// Compare unigram-normalized scores instead of raw log-probabilities.
    #[arg(long)]
    normalize: bool,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    pairs: PathBuf,
    #[command(flatten)]
    scorer: ScorerArgs,
    /// Output score file (JSON Lines, natural log).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    scores: PathBuf,
    /// Exit with failure if any record is rejected.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    pairs: PathBuf,
    /// External score file; alternative to --model.
    #[arg(long, conflicts_with = "model")]
    scores: Option<PathBuf>,
    #[command(flatten)]
    scorer: ScorerArgs,
    /// Grouping: condition, subcondition, or feature keys joined by `+`.
    #[arg(long = "group", default_value = "condition")]
    groups: Vec<String>,
    /// Output directory.
    #[arg(long)]
    report: PathBuf,
    /// Column name in rendered tables.
    #[arg(long, default_value = "model")]
    name: String,
    #[command(flatten)]
    grammar: GrammarArg,
}

#[derive(Args)]
struct ReportArgs {
    /// Results column as NAME=results.jsonl; repeatable.
    #[arg(long = "results", value_parser = parse_named)]
    results: Vec<(String, PathBuf)>,
    /// Results endpoint export from the judge service.
    #[arg(long)]
    human: Option<PathBuf>,
    #[arg(long)]
    pairs: PathBuf,
    #[command(flatten)]
    grammar: GrammarArg,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// ARPA model for per-word traces.
    #[arg(long)]
    trace_model: Option<PathBuf>,
    /// Condition whose pairs are traced.
    #[arg(long, default_value = "simple_npi")]
    trace_condition: String,
    /// Number of pairs traced.
    #[arg(long, default_value_t = 2)]
    trace_limit: usize,
}

#[derive(Args)]
struct BuildListsArgs {
    #[command(flatten)]
    grammar: GrammarArg,
    #[arg(long, default_value_t = 10)]
    lists: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ServeArgs {
    /// Trial lists from build-lists; built from the grammar if omitted.
    #[arg(long)]
    lists: Option<PathBuf>,
    #[command(flatten)]
    grammar: GrammarArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append-only judgment log.
    #[arg(long, default_value = "judgments.jsonl")]
    log: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    host: std::net::IpAddr,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    /// Client bundle served at /.
    #[arg(long = "static")]
    static_dir: Option<PathBuf>,
}

#[derive(Args)]
struct PipelineArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    #[command(flatten)]
    grammar: GrammarArg,
    /// Held-out corpus for a perplexity report.
    #[arg(long)]
    test: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn parse_named(s: &str) -> Result<(String, PathBuf), String> {
    match s.split_once('=') {
        Some((name, path)) if !name.is_empty() && !path.is_empty() => Ok((name.to_string(), PathBuf::from(path))),
        _ => Err(format!("expected NAME=PATH, got {s:?}")),
    }
}

fn require_file(path: &Path, what: &str) -> Result<()> {
    if !path.is_file() {
        bail!("{what} {} does not exist", path.display());
    }
    Ok(())
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn load_pairs(path: &Path) -> Result<Vec<MinimalPair>> {
    require_file(path, "pairs file")?;
    Ok(jsonl::load(path)?)
}

fn count_by_condition(pairs: &[MinimalPair]) -> BTreeMap<String, u64> {
    let mut counts = BTreeMap::new();
    for p in pairs {
        *counts.entry(p.condition.clone()).or_default() += 1;
    }
    counts
}

fn print_counts(grammar: &Grammar, counts: &BTreeMap<String, u64>) {
    println!("{:<40} {:>8} {:>10}", "condition", "pairs", "sentences");
    for c in &grammar.conditions {
        let n = counts.get(&c.id).copied().unwrap_or(0);
        if n > 0 {
            println!("{:<40} {:>8} {:>10}", c.id, n, 2 * n);
        }
    }
    let total: u64 = counts.values().sum();
    println!("{:<40} {:>8} {:>10}", "total", total, 2 * total);
}

fn generate(args: &GenerateArgs) -> Result<()> {
    let grammar = args.grammar.load()?;
    if let Some(c) = &args.condition {
        if grammar.condition(c).is_none() {
            bail!("unknown condition {c:?}");
        }
    }
    let pairs = grammar.generate_pairs_parallel(args.condition.as_deref())?;
    jsonl::save(&pairs, &args.out)?;
    print_counts(&grammar, &count_by_condition(&pairs));
    Ok(())
}

fn train_model(corpus_path: &Path, model: &ModelArgs) -> Result<(NGramModel, Vec<Vec<String>>)> {
    require_file(corpus_path, "corpus")?;
    if model.order < 1 {
        bail!("--order must be at least 1");
    }
    let corpus = read_corpus(corpus_path)?;
    let vocab = Vocab::build(&corpus, model.min_count)?;
    let counts = count_ngrams(&corpus, &vocab, model.order)?;
    let lm = estimate(&counts)?;
    Ok((lm, corpus))
}

fn print_perplexity(lm: &NGramModel, test: Option<&Path>) -> Result<()> {
    if let Some(path) = test {
        require_file(path, "test corpus")?;
        let sentences = read_corpus(path)?;
        println!("perplexity on {}: {:.4}", path.display(), lm.perplexity(&sentences)?);
    }
    Ok(())
}

fn print_coverage(vocab: &Vocab, grammar: &Grammar) {
    let missing = vocab.missing(&grammar.lexicon.tokens());
    if missing.is_empty() {
        println!("coverage: every lexicon token is in the vocabulary");
    } else {
        println!("coverage: {} lexicon tokens out of vocabulary:", missing.len());
        for t in missing {
            println!("  {t}");
        }
    }
}

fn train_ngram(args: &TrainArgs) -> Result<()> {
    let (lm, _) = train_model(&args.corpus, &args.model)?;
    lm.save_arpa(&args.out)?;
    let sizes: Vec<String> = (1..=lm.order())
        .map(|k| format!("{k}-grams={}", lm.ngram_count(k)))
        .collect();
    println!(
        "wrote {} ({}, vocab={})",
        args.out.display(),
        sizes.join(" "),
        lm.vocab().len()
    );
    print_perplexity(&lm, args.test.as_deref())?;
    if args.coverage {
        print_coverage(lm.vocab(), &args.grammar.load()?);
    }
    Ok(())
}

fn load_model(path: &Path) -> Result<NGramModel> {
    require_file(path, "model")?;
    NGramModel::load_arpa(path).with_context(|| format!("loading {}", path.display()))
}

/// Builds the configured scorer; `None` if no model was given.
fn build_scorer(args: &ScorerArgs) -> Result<Option<Box<dyn Scorer>>> {
    let Some(path) = &args.model else {
        if args.normalize {
            bail!("--normalize needs --model");
        }
        return Ok(None);
    };
    let main = load_model(path)?;
    if !args.normalize {
        return Ok(Some(Box::new(main)));
    }
    let uni_path = args.unigram.as_ref().context("--normalize needs --unigram")?;
    let unigram = load_model(uni_path)?;
    Ok(Some(Box::new(NormalizedScorer { main, unigram })))
}

fn score(args: &ScoreArgs) -> Result<()> {
    let pairs = load_pairs(&args.pairs)?;
    let scorer = build_scorer(&args.scorer)?.context("score needs --model")?;
    use rayon::prelude::*;
    let records: Vec<ScoreRecord> = pairs
        .par_iter()
        .flat_map_iter(|p| {
            let scorer = &scorer;
            [
                (Member::Grammatical, &p.grammatical),
                (Member::Ungrammatical, &p.ungrammatical),
            ]
            .into_iter()
            .map(move |(m, tokens)| {
                let s = scorer.score(tokens);
                ScoreRecord {
                    sentence_id: sentence_id(&p.pair_id, m),
                    logprob: s.logprob,
                    token_logprobs: s.token_logprobs,
                }
            })
        })
        .collect();
    jsonl::save(&records, &args.out)?;
    println!("wrote {} scores to {}", records.len(), args.out.display());
    Ok(())
}

fn ingest(args: &IngestArgs) -> Result<()> {
    require_file(&args.scores, "score file")?;
    let (set, report) = load_scores(&args.scores)?;
    println!(
        "{} lines, {} accepted, {} distinct sentences, {} duplicates, {} rejected",
        report.lines,
        report.accepted,
        set.len(),
        report.duplicates.len(),
        report.rejected.len()
    );
    for r in &report.rejected {
        println!("  line {}: {}", r.line, r.message);
    }
    if args.strict && !report.rejected.is_empty() {
        bail!("{} records rejected", report.rejected.len());
    }
    Ok(())
}

fn write_run(dir: &Path, run: &EvalRun) -> Result<()> {
    jsonl::save(&run.results, dir.join("results.jsonl"))?;
    jsonl::save(&run.missing, dir.join("missing.jsonl"))?;
    Ok(())
}

fn table_file_name(group: &Grouping) -> String {
    let slug: String = group
        .to_string()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '_' { c } else { '_' })
        .collect();
    format!("accuracy_{slug}")
}

fn write_tables(
    dir: &Path,
    grammar: &Grammar,
    name: &str,
    results: &[PairResult],
    groups: &[Grouping],
    pairs: &[MinimalPair],
) -> Result<()> {
    for g in groups {
        let table = aggregate(results, g);
        let base = dir.join(table_file_name(g));
        write_text(&base.with_extension("json"), &serde_json::to_string_pretty(&table)?)?;
        if *g == Grouping::Condition {
            let doc = report::emit_overall(
                grammar,
                &[Column {
                    name: name.to_string(),
                    table: &table,
                }],
                &count_by_condition(pairs),
            )?;
            write_text(&dir.join("overall.csv"), &doc.to_csv())?;
            write_text(&dir.join("overall.txt"), &doc.to_text())?;
            print!("{}", doc.to_text());
        }
    }
    Ok(())
}

fn evaluate_cmd(args: &EvaluateArgs) -> Result<()> {
    let groups: Vec<Grouping> = args.groups.iter().map(|g| g.parse()).collect::<Result<_, _>>()?;
    let grammar = args.grammar.load()?;
    let pairs = load_pairs(&args.pairs)?;
    let run = match (&args.scores, build_scorer(&args.scorer)?) {
        (Some(path), None) => {
            require_file(path, "score file")?;
            let (set, report) = load_scores(path)?;
            for r in &report.rejected {
                log::warn!("rejected score record on line {}: {}", r.line, r.message);
            }
            evaluate(&set, &pairs)
        }
        (None, Some(scorer)) => evaluate(&scorer.as_ref(), &pairs),
        _ => bail!("evaluate needs exactly one of --scores or --model"),
    };
    create_dir(&args.report)?;
    write_run(&args.report, &run)?;
    write_tables(&args.report, &grammar, &args.name, &run.results, &groups, &pairs)?;
    println!(
        "pairs: {} input, {} scored, {} missing, {} ties, {} correct",
        run.pairs_input,
        run.pairs_scored(),
        run.pairs_missing(),
        run.ties(),
        run.correct()
    );
    Ok(())
}

fn report_cmd(args: &ReportArgs) -> Result<()> {
    let grammar = args.grammar.load()?;
    let pairs = load_pairs(&args.pairs)?;
    let mut columns: Vec<(String, Vec<PairResult>)> = Vec::new();
    for (name, path) in &args.results {
        require_file(path, "results file")?;
        columns.push((name.clone(), jsonl::load(path)?));
    }
    let human: Option<ResultsReport> = match &args.human {
        Some(path) => {
            require_file(path, "human results")?;
            Some(
                serde_json::from_str(&fs::read_to_string(path)?)
                    .with_context(|| format!("parsing {}", path.display()))?,
            )
        }
        None => None,
    };
    create_dir(&args.out)?;

    let by_condition: Vec<AccuracyTable> = columns
        .iter()
        .map(|(_, r)| aggregate(r, &Grouping::Condition))
        .collect();
    let mut overall_cols: Vec<Column<'_>> = columns
        .iter()
        .zip(&by_condition)
        .map(|((name, _), table)| Column {
            name: name.clone(),
            table,
        })
        .collect();
    if let Some(h) = &human {
        overall_cols.push(Column {
            name: "human".into(),
            table: &h.human,
        });
    }
    let overall = report::emit_overall(&grammar, &overall_cols, &count_by_condition(&pairs))?;
    write_text(&args.out.join("overall.csv"), &overall.to_csv())?;
    write_text(&args.out.join("overall.txt"), &overall.to_text())?;
    print!("{}", overall.to_text());

    let by_sub: Vec<AccuracyTable> = columns
        .iter()
        .map(|(_, r)| aggregate(r, &Grouping::Subcondition))
        .collect();
    let mut sub_cols: Vec<Column<'_>> = columns
        .iter()
        .zip(&by_sub)
        .map(|((name, _), table)| Column {
            name: name.clone(),
            table,
        })
        .collect();
    if let Some(h) = &human {
        sub_cols.push(Column {
            name: "human".into(),
            table: &h.by_subcondition,
        });
    }
    write_text(
        &args.out.join("subconditions.txt"),
        &report::emit_subconditions(&grammar, &pairs, &sub_cols)?,
    )?;

    let orc: Vec<&str> = ["obj_rel_across", "obj_rel_within"]
        .into_iter()
        .filter(|c| grammar.condition(c).is_some() && pairs.iter().any(|p| p.condition == *c))
        .collect();
    if !orc.is_empty() {
        let result_cols: Vec<ResultColumn<'_>> = columns
            .iter()
            .map(|(name, r)| ResultColumn {
                name: name.clone(),
                results: r,
            })
            .collect();
        let doc = report::emit_crosstab(
            &grammar,
            &pairs,
            &result_cols,
            &orc,
            &["main_number", "embedded_number"],
            &[("animacy", "animate")],
        )?;
        write_text(&args.out.join("crosstab.csv"), &doc.to_csv())?;
        write_text(&args.out.join("crosstab.txt"), &doc.to_text())?;
    }

    if let Some(path) = &args.trace_model {
        let lm = load_model(path)?;
        let selected: Vec<MinimalPair> = pairs
            .iter()
            .filter(|p| p.condition == args.trace_condition)
            .take(args.trace_limit)
            .cloned()
            .collect();
        let rows = report::emit_traces(&lm, &selected)?;
        let file = fs::File::create(args.out.join("traces.csv"))?;
        report::write_traces_csv(&rows, BufWriter::new(file))?;
    }
    println!("reports written to {}", args.out.display());
    Ok(())
}

fn lists_for(grammar: &Grammar, n_lists: usize, seed: u64) -> Result<Vec<TrialList>> {
    let pairs = grammar.generate_pairs_parallel(None)?;
    let config = ListConfig {
        n_lists,
        seed,
        ..ListConfig::default()
    };
    Ok(build_lists(grammar, &pairs, &config)?)
}

fn build_lists_cmd(args: &BuildListsArgs) -> Result<()> {
    let lists = lists_for(&args.grammar.load()?, args.lists, args.seed)?;
    write_text(&args.out, &serde_json::to_string_pretty(&lists)?)?;
    println!(
        "wrote {} lists of {} trials (seed {}) to {}",
        lists.len(),
        lists.first().map_or(0, |l| l.trials.len()),
        args.seed,
        args.out.display()
    );
    Ok(())
}

fn serve_cmd(args: &ServeArgs) -> Result<()> {
    let lists: Vec<TrialList> = match &args.lists {
        Some(path) => {
            require_file(path, "lists file")?;
            serde_json::from_str(&fs::read_to_string(path)?).with_context(|| format!("parsing {}", path.display()))?
        }
        None => lists_for(&args.grammar.load()?, 10, args.seed)?,
    };
    if let Some(dir) = &args.static_dir {
        if !dir.is_dir() {
            bail!("static directory {} does not exist", dir.display());
        }
    }
    let store = JudgmentStore::open(&args.log)?;
    println!("replayed {} events from {}", store.event_count(), args.log.display());
    let service = Arc::new(JudgeService::new(lists, store)?);
    let addr = SocketAddr::new(args.host, args.port);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(syneval::judge::serve(service, addr, args.static_dir.clone()))?;
    Ok(())
}

fn pipeline(args: &PipelineArgs) -> Result<()> {
    let grammar = args.grammar.load()?;
    create_dir(&args.out)?;
    let pairs = grammar.generate_pairs_parallel(None)?;
    jsonl::save(&pairs, args.out.join("pairs.jsonl"))?;
    print_counts(&grammar, &count_by_condition(&pairs));

    let (lm, _) = train_model(&args.corpus, &args.model)?;
    lm.save_arpa(args.out.join("model.arpa"))?;
    print_perplexity(&lm, args.test.as_deref())?;
    print_coverage(lm.vocab(), &grammar);

    let run = evaluate(&lm, &pairs);
    write_run(&args.out, &run)?;
    write_tables(
        &args.out,
        &grammar,
        "ngram",
        &run.results,
        &[Grouping::Condition, Grouping::Subcondition],
        &pairs,
    )?;
    println!(
        "pairs: {} scored, {} with out-of-vocabulary tokens",
        run.pairs_scored(),
        run.results.iter().filter(|r| !r.oov_tokens.is_empty()).count()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .context("configuring worker pool")?;
    }
    match &cli.command {
        Command::Generate(a) => generate(a),
        Command::TrainNgram(a) => train_ngram(a),
        Command::Score(a) => score(a),
        Command::Ingest(a) => ingest(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Report(a) => report_cmd(a),
        Command::BuildLists(a) => build_lists_cmd(a),
        Command::Serve(a) => serve_cmd(a),
        Command::Pipeline(a) => pipeline(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let causes: Vec<String> = e.chain().map(|c| c.to_string()).collect();
            let _ = writeln!(std::io::stderr(), "error: {}", causes.join(": "));
            ExitCode::from(1)
        }
    }
}
