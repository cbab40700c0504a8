use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use hyperwander::copa::{evaluate, parse_copa, parse_gold, write_report, ScoringStrategy};
use hyperwander::embed::{load_embeddings, EmbeddingStore};
use hyperwander::engine::{saturate, Limits};
use hyperwander::kb::{IngestOptions, KnowledgeBase};
use hyperwander::logic::{clausify, Parser as LogicParser, SymbolSet};
use hyperwander::select::{semantic_select_scored, syntactic_select_levels, SelectionParams};
use hyperwander::wander::{render_chain, wander, write_trace, ClusterPick, ClusterScoring, WanderParams};

#[derive(Parser)]
#[command(
    name = "hyperwander",
    version,
    about = "Hypertableau reasoning and mind-wandering over triple knowledge bases"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate a triple file into a knowledge base file.
    Ingest(IngestArgs),
    /// Summarize an embedding file.
    EmbedInfo(EmbedInfoArgs),
    /// Select axioms for a context.
    Select(SelectArgs),
    /// Saturate a clause set and print the model.
    Saturate(SaturateArgs),
    /// Run the refocusing loop from a formula.
    Wander(WanderArgs),
    /// Score two-alternative problems.
    Copa(CopaArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    triples: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Skip malformed records instead of aborting.
    #[arg(long)]
    skip_bad: bool,
}

#[derive(Args)]
struct EmbedInfoArgs {
    #[arg(long)]
    embeddings: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Semantic,
    Syntactic,
}

#[derive(Args, Clone)]
struct SelectionArgs {
    /// Lower bound of the similarity interval.
    #[arg(long, default_value_t = 0.4, allow_negative_numbers = true)]
    lo: f64,
    /// Upper bound of the similarity interval.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    hi: f64,
    /// Context expansion threshold.
    #[arg(long, default_value_t = 0.6, allow_negative_numbers = true)]
    expand: f64,
    /// Let symbols without vectors pass the interval test.
    #[arg(long)]
    oov_pass: bool,
}

impl SelectionArgs {
    fn params(&self) -> SelectionParams {
        SelectionParams {
            sim_low: self.lo,
            sim_high: self.hi,
            expand_threshold: self.expand,
            oov_pass: self.oov_pass,
            ..SelectionParams::default()
        }
    }
}

#[derive(Args)]
struct SelectArgs {
    #[arg(long)]
    kb: PathBuf,
    /// Required for semantic mode.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    /// Comma-separated context symbols.
    #[arg(long, value_delimiter = ',', required = true)]
    context: Vec<String>,
    #[arg(long, value_enum, default_value_t = Mode::Semantic)]
    mode: Mode,
    #[command(flatten)]
    selection: SelectionArgs,
    #[arg(long, default_value_t = 1.5)]
    tolerance: f64,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    #[arg(long, default_value_t = 2000)]
    max: usize,
}

#[derive(Args, Clone)]
struct LimitArgs {
    /// Wall-clock limit per saturation in seconds; 0 disables it.
    #[arg(long, default_value_t = 30.0)]
    timeout: f64,
    #[arg(long, default_value_t = 5)]
    max_depth: usize,
    /// Extension-step budget per saturation.
    #[arg(long)]
    max_steps: Option<u64>,
    #[arg(long, default_value_t = 1_000_000)]
    max_atoms: usize,
}

impl LimitArgs {
    fn limits(&self) -> Result<Limits> {
        if !(self.timeout.is_finite() && self.timeout >= 0.0) {
            bail!("--timeout must be a non-negative number of seconds");
        }
        Ok(Limits {
            timeout: (self.timeout > 0.0).then(|| Duration::from_secs_f64(self.timeout)),
            max_term_depth: self.max_depth,
            max_branch_atoms: self.max_atoms,
            max_steps: self.max_steps,
        })
    }
}

#[derive(Args)]
struct SaturateArgs {
    /// Clause file (`head :- body.` syntax).
    #[arg(long, conflicts_with = "formula", required_unless_present = "formula")]
    clauses: Option<PathBuf>,
    /// Formula file, clausified before saturation.
    #[arg(long)]
    formula: Option<PathBuf>,
    #[command(flatten)]
    limits: LimitArgs,
    /// Write the model atoms here instead of stdout.
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Scoring {
    Mean,
    Centroid,
}

#[derive(Args, Clone)]
struct WanderOpts {
    #[arg(long)]
    kb: PathBuf,
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long, default_value_t = 10)]
    rounds: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// middle, nearest, farthest, or a cluster index.
    #[arg(long, default_value = "middle", value_parser = parse_pick)]
    pick: ClusterPick,
    #[arg(long, default_value_t = 4)]
    divisor: usize,
    #[arg(long, value_enum, default_value_t = Scoring::Mean)]
    scoring: Scoring,
    /// Also exclude every earlier context from the extracted symbols.
    #[arg(long)]
    accumulate_visited: bool,
    #[command(flatten)]
    selection: SelectionArgs,
    #[command(flatten)]
    limits: LimitArgs,
}

fn parse_pick(s: &str) -> Result<ClusterPick, String> {
    s.parse()
}

impl WanderOpts {
    fn params(&self) -> Result<WanderParams> {
        let p = WanderParams {
            selection: self.selection.params(),
            limits: self.limits.limits()?,
            max_rounds: self.rounds,
            cluster_divisor: self.divisor,
            cluster_pick: self.pick,
            scoring: match self.scoring {
                Scoring::Mean => ClusterScoring::MeanPairwise,
                Scoring::Centroid => ClusterScoring::Centroid,
            },
            seed: self.seed,
            accumulate_visited: self.accumulate_visited,
        };
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct WanderArgs {
    /// File containing one closed formula.
    #[arg(long)]
    formula: PathBuf,
    #[command(flatten)]
    opts: WanderOpts,
    /// Write the round records as JSON Lines.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum CopaScoring {
    Final,
    Union,
    Discounted,
}

#[derive(Args)]
struct CopaArgs {
    #[arg(long)]
    problems: PathBuf,
    #[command(flatten)]
    opts: WanderOpts,
    #[arg(long)]
    report: Option<PathBuf>,
    /// `<id> <1|2>` lines; overrides gold labels in the problem file.
    #[arg(long)]
    gold: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = CopaScoring::Final)]
    score: CopaScoring,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?))
}

fn load_kb(path: &Path) -> Result<KnowledgeBase> {
    KnowledgeBase::load(open(path)?).with_context(|| format!("loading {}", path.display()))
}

fn load_store(path: &Path) -> Result<EmbeddingStore> {
    let (store, report) = load_embeddings(path).with_context(|| format!("loading {}", path.display()))?;
    if report.rejected() > 0 {
        eprintln!("{}: {} records rejected", path.display(), report.rejected());
    }
    Ok(store)
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn ingest(a: IngestArgs) -> Result<ExitCode> {
    let mut kb = KnowledgeBase::new();
    let report = kb.ingest_triples(open(&a.triples)?, IngestOptions { skip_bad: a.skip_bad })?;
    for (record, reason) in &report.errors {
        eprintln!("skipped record {record}: {reason}");
    }
    kb.save(create(&a.out)?)?;
    println!("{report}");
    println!("{} axioms, {} symbols -> {}", kb.len(), kb.symbols().count(), a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn embed_info(a: EmbedInfoArgs) -> Result<ExitCode> {
    let (store, report) = load_embeddings(&a.embeddings)?;
    println!("dimension: {}", store.dimension());
    println!("vocabulary: {}", store.len());
    println!("rejected: {}", report.rejected());
    if report.rejected() > 0 {
        println!("  zero vectors: {}", report.zero_vectors);
        println!("  non-English: {}", report.foreign);
        println!("  duplicates: {}", report.duplicates);
    }
    Ok(ExitCode::SUCCESS)
}

fn select(a: SelectArgs) -> Result<ExitCode> {
    let kb = load_kb(&a.kb)?;
    let ctx: SymbolSet = a.context.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).collect();
    if ctx.is_empty() {
        bail!("--context is empty");
    }
    let params =
        SelectionParams { sine_tolerance: a.tolerance, sine_depth: a.depth, max_axioms: a.max, ..a.selection.params() };
    let mut out = std::io::stdout().lock();
    match a.mode {
        Mode::Semantic => {
            let path = a.embeddings.as_deref().context("--embeddings is required for semantic selection")?;
            let store = load_store(path)?;
            for (id, score) in semantic_select_scored(&ctx, &kb, &store, &params)? {
                writeln!(out, "{id}\t{score:.4}\t{}", kb.formula(id))?;
            }
        }
        Mode::Syntactic => {
            for (id, level) in syntactic_select_levels(&ctx, &kb, &params)? {
                writeln!(out, "{id}\t{level}\t{}", kb.formula(id))?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn saturate_cmd(a: SaturateArgs) -> Result<ExitCode> {
    let mut parser = LogicParser::new();
    let clauses = match (&a.clauses, &a.formula) {
        (Some(p), _) => parser.parse_clauses(&read_text(p)?)?,
        (None, Some(p)) => clausify(&parser.parse_formula(&read_text(p)?)?)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    let r = saturate(&clauses, &a.limits.limits()?)?;
    let status = match r.exhausted_by {
        Some(e) => format!("{} ({e})", r.status),
        None => r.status.to_string(),
    };
    eprintln!("status: {status}");
    eprintln!(
        "extensions: {}, splits: {}, branches closed: {}, model atoms: {}, elapsed: {:.3}s",
        r.stats.extensions,
        r.stats.splits,
        r.stats.branches_closed,
        r.model.len(),
        r.stats.elapsed.as_secs_f64()
    );
    let lines: String = r.sorted_model().into_iter().map(|a| a + "\n").collect();
    match &a.model_out {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(lines.as_bytes())?;
            w.flush()?;
        }
        None => print!("{lines}"),
    }
    Ok(ExitCode::SUCCESS)
}

fn wander_cmd(a: WanderArgs) -> Result<ExitCode> {
    let params = a.opts.params()?;
    let f = LogicParser::new().parse_formula(&read_text(&a.formula)?)?;
    let kb = load_kb(&a.opts.kb)?;
    let store = load_store(&a.opts.embeddings)?;
    let out = wander(&f, &kb, &store, &params)?;
    for r in &out.rounds {
        let status = r.status.map(|s| s.to_string()).unwrap_or_else(|| "-".into());
        match (&r.focus, &r.error) {
            (_, Some(e)) => eprintln!("round {}: error: {e}", r.round),
            (Some(focus), None) => eprintln!(
                "round {}: {} axioms, {status}, {} new symbols, k={}, focus {focus}",
                r.round,
                r.selected.len(),
                r.extracted.len(),
                r.k
            ),
            (None, None) => eprintln!("round {}: {} axioms, {status}, nothing new", r.round, r.selected.len()),
        }
    }
    if let Some(p) = &a.trace {
        write_trace(&out.rounds, create(p)?)?;
    }
    println!("{}", render_chain(&out.chain));
    Ok(ExitCode::SUCCESS)
}

fn copa_cmd(a: CopaArgs) -> Result<ExitCode> {
    let params = a.opts.params()?;
    let problems = parse_copa(open(&a.problems)?)?;
    let gold = match &a.gold {
        Some(p) => parse_gold(open(p)?)?,
        None => Default::default(),
    };
    let kb = load_kb(&a.opts.kb)?;
    let store = load_store(&a.opts.embeddings)?;
    let strategy = match a.score {
        CopaScoring::Final => ScoringStrategy::FinalFocus,
        CopaScoring::Union => ScoringStrategy::ChainUnion,
        CopaScoring::Discounted => ScoringStrategy::RoundDiscounted,
    };
    let report = evaluate(&problems, &gold, &kb, &store, &params, strategy);
    for r in &report.rows {
        let fmt = |x: Option<f64>| x.map(|v| format!("{v:.4}")).unwrap_or_else(|| "unscored".into());
        let choice = r.choice.map(|c| c.to_string()).unwrap_or_else(|| "-".into());
        let tie = if r.tie { " (tie)" } else { "" };
        println!(
            "problem {}: alt1 {} alt2 {} -> {choice}{tie}",
            r.id,
            fmt(r.alternatives[0].score),
            fmt(r.alternatives[1].score)
        );
        for (i, alt) in r.alternatives.iter().enumerate() {
            match &alt.error {
                Some(e) => eprintln!("  alt{}: {e}", i + 1),
                None => eprintln!("  alt{}: {}", i + 1, alt.chain),
            }
        }
    }
    let s = &report.summary;
    match s.accuracy {
        Some(acc) => {
            println!("{} problems, {} scored, accuracy {:.3} over {} labelled", s.problems, s.scored, acc, s.labelled)
        }
        None => println!("{} problems, {} scored", s.problems, s.scored),
    }
    if let Some(p) = &a.report {
        write_report(&report, create(p)?)?;
    }
    Ok(if s.unscored > 0 { ExitCode::from(1) } else { ExitCode::SUCCESS })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => ingest(a),
        Command::EmbedInfo(a) => embed_info(a),
        Command::Select(a) => select(a),
        Command::Saturate(a) => saturate_cmd(a),
        Command::Wander(a) => wander_cmd(a),
        Command::Copa(a) => copa_cmd(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
