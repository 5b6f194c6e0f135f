use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use kgemb::eval::{evaluate, RankingConfig};
use kgemb::experiment::{reproduce, ExperimentConfig};
use kgemb::graph::{KnowledgeGraph, Triple};
use kgemb::io::{self, LineFormat};
use kgemb::models::checkpoint::{load_checkpoint, save_checkpoint, Checkpoint};
use kgemb::models::train::train_graph;
use kgemb::models::ModelKind;
use kgemb::ontology::{self, EntityKind, SocialOntology};
use kgemb::recommend::{
    analyze_cohorts, most_liked_tweet, recommend, standard_cohorts, CohortConfig, ProbabilityBasis,
};
use kgemb::split::split;
use kgemb::synthetic::{generate, SyntheticKind, SyntheticSpec};

// stdout writes that report errors instead of panicking on a closed pipe
macro_rules! out {
    ($($arg:tt)*) => { std::io::Write::write_fmt(&mut std::io::stdout().lock(), format_args!($($arg)*)) };
}
macro_rules! outln {
    ($($arg:tt)*) => { std::io::Write::write_fmt(&mut std::io::stdout().lock(), format_args!("{}\n", format_args!($($arg)*))) };
}

#[derive(Parser)]
#[command(name = "kgemb", version, about = "TransE and MDE knowledge-graph embeddings")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat `key=value` settings file, applied over the defaults
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Root seed for every random stream
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Extra `key=value` setting, applied after the config file
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads for evaluation
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Split triple lines on any whitespace instead of tabs
    #[arg(long, global = true)]
    lenient: bool,
    /// `label<TAB>kind` file with explicit entity kinds
    #[arg(long, global = true, value_name = "FILE")]
    kinds: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic triple file
    Generate(GenerateArgs),
    /// Split a triple file into train and test files
    Split(SplitArgs),
    /// Train one model and save a checkpoint
    Train(TrainArgs),
    /// Rank test triples with a checkpoint
    Evaluate(EvaluateArgs),
    /// Suggest posts to a user
    Recommend(RecommendArgs),
    /// Mean probability of liking one post, per user group
    Cohorts(CohortArgs),
    /// Split, train both models and compare them
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    kind: SyntheticKind,
    /// Users (social) or entities (pattern kinds)
    #[arg(long)]
    users: Option<usize>,
    #[arg(long)]
    tweets: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long)]
    rewire: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    test_out: PathBuf,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    stratified: bool,
}

#[derive(Args)]
struct ModelFlags {
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    negatives: Option<usize>,
}

impl ModelFlags {
    fn pairs(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_owned(), v));
            }
        };
        push("iterations", self.epochs.map(|v| v.to_string()));
        push("dim", self.dim.map(|v| v.to_string()));
        push("learning_rate", self.lr.map(|v| v.to_string()));
        push("negatives_per_positive", self.negatives.map(|v| v.to_string()));
        out
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = "mde")]
    model: ModelKind,
    #[arg(long)]
    checkpoint: PathBuf,
    /// key=value training report
    #[arg(long)]
    report: Option<PathBuf>,
    /// Mean loss per epoch, one per line
    #[arg(long)]
    loss_trace: Option<PathBuf>,
    /// Take entity and relation ids from this triple file (typically the
    /// unsplit dataset) so that test-only entities get embeddings too
    #[arg(long, value_name = "FILE")]
    vocab_from: Option<PathBuf>,
    #[command(flatten)]
    model_flags: ModelFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Training triples; with filtered ranking they are removed from the
    /// competitors together with the test triples
    #[arg(long)]
    train: Option<PathBuf>,
    /// raw or filtered
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    report: Option<PathBuf>,
    /// Per-query rank dump
    #[arg(long)]
    ranks: Option<PathBuf>,
}

#[derive(Args)]
struct RecommendArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    /// Training triples the checkpoint was trained on
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    user: String,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Report the raw score ratio instead of clamping to [0, 1]
    #[arg(long)]
    unclamped: bool,
    /// user, post, score, probability lines
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct CohortArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// Target post; defaults to the most-liked one
    #[arg(long)]
    tweet: Option<String>,
    #[arg(long, default_value_t = 200)]
    hub_followers: usize,
    #[arg(long, default_value_t = 25)]
    focused_following: usize,
    #[arg(long, default_value_t = 0.9)]
    similarity: f64,
    #[arg(long, default_value_t = 5)]
    max_members: usize,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    #[arg(long)]
    data: PathBuf,
    /// key=value report
    #[arg(long)]
    report: Option<PathBuf>,
    /// Comparison table; printed to stdout either way
    #[arg(long)]
    table: Option<PathBuf>,
    #[command(flatten)]
    model_flags: ModelFlags,
}

fn parse_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| anyhow!("{}:{}: expected key=value", path.display(), i + 1))?;
        out.push((k.trim().to_owned(), v.trim().to_owned()));
    }
    Ok(out)
}

impl Common {
    /// Defaults, then the config file, then subcommand flags, `--set` and
    /// `--seed`.
    fn resolve(&self, flags: Vec<(String, String)>) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::default();
        let mut pairs = match &self.config {
            Some(p) => parse_config_file(p)?,
            None => Vec::new(),
        };
        pairs.extend(flags);
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got {s:?}"))?;
            pairs.push((k.to_owned(), v.to_owned()));
        }
        for (k, v) in pairs {
            config.apply(&k, &v)?;
        }
        if let Some(seed) = self.seed {
            config.set_seed(seed);
        }
        config.validate()?;
        Ok(config)
    }

    fn format(&self) -> LineFormat {
        if self.lenient {
            LineFormat::Lenient
        } else {
            LineFormat::Tab
        }
    }

    fn kinds(&self) -> Result<HashMap<String, EntityKind>> {
        Ok(match &self.kinds {
            Some(p) => io::read_kinds(p)?,
            None => HashMap::new(),
        })
    }

    fn load(&self, path: &Path) -> Result<KnowledgeGraph> {
        io::load_graph_with_kinds(path, self.format(), &self.kinds()?)
            .with_context(|| format!("loading {}", path.display()))
    }
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn header(lines: &str) -> String {
    lines.lines().map(|l| format!("# {l}\n")).collect()
}

fn model_echo(ck: &Checkpoint) -> String {
    let mut out = String::new();
    for (k, v) in ck.model.config.to_pairs() {
        let _ = writeln!(out, "model.{k}={v}");
    }
    out
}

fn load_ck(path: &Path) -> Result<Checkpoint> {
    load_checkpoint(path).with_context(|| format!("loading checkpoint {}", path.display()))
}

/// Rebuilds the training graph on the checkpoint's ids and attaches the
/// social ontology.
fn graph_for(common: &Common, ck: &Checkpoint, data: &Path) -> Result<KnowledgeGraph> {
    let vocab = ck
        .vocab
        .clone()
        .ok_or_else(|| anyhow!("checkpoint carries no labels"))?;
    let triples = io::read_triples(data, common.format()).with_context(|| format!("loading {}", data.display()))?;
    let (graph, _) = KnowledgeGraph::build_with(vocab, &triples)?;
    ck.check_vocabulary(graph.vocab())
        .context("data file has labels the checkpoint was not trained on")?;
    let ontology = SocialOntology::infer(&graph, &common.kinds()?);
    Ok(graph.with_ontology(ontology))
}

fn likes_basis(ck: &Checkpoint, graph: &KnowledgeGraph, clamp: bool) -> Result<ProbabilityBasis> {
    let likes = graph
        .vocab()
        .relation_id(ontology::LIKES_RESEARCH_TWEET)
        .ok_or_else(|| anyhow!("data has no {} relation", ontology::LIKES_RESEARCH_TWEET))?;
    Ok(ProbabilityBasis::from_training(
        &ck.model,
        graph.triples(),
        likes,
        clamp,
    )?)
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    if let Some(n) = common.workers {
        if n == 0 {
            bail!("--workers must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match cli.command {
        Command::Generate(a) => {
            let config = common.resolve(Vec::new())?;
            let mut spec = SyntheticSpec::new(a.kind, config.seed);
            spec.n_users = a.users.unwrap_or(spec.n_users);
            spec.n_tweets = a.tweets.unwrap_or(spec.n_tweets);
            spec.mean_degree = a.degree.unwrap_or(spec.mean_degree);
            spec.rewire_probability = a.rewire.unwrap_or(spec.rewire_probability);
            let graph = generate(&spec)?;
            io::write_triples(&graph, &a.out)?;
            eprintln!(
                "{} triples, {} entities -> {}",
                graph.len(),
                graph.entity_count(),
                a.out.display()
            );
        }
        Command::Split(a) => {
            let mut flags = Vec::new();
            if let Some(f) = a.fraction {
                flags.push(("train_fraction".into(), f.to_string()));
            }
            if a.stratified {
                flags.push(("stratified".into(), "true".into()));
            }
            let config = common.resolve(flags)?;
            let graph = common.load(&a.data)?;
            let parts = split(&graph, &config.split)?;
            let label = |ts: &[Triple]| ts.iter().map(|&t| graph.vocab().labeled(t)).collect::<Vec<_>>();
            io::write_labeled(&a.train_out, &label(&parts.train))?;
            io::write_labeled(&a.test_out, &label(&parts.test))?;
            eprintln!("{} train / {} test", parts.train.len(), parts.test.len());
        }
        Command::Train(a) => {
            let config = common.resolve(a.model_flags.pairs())?;
            let model_config = config.model(a.model).clone();
            let graph = match &a.vocab_from {
                None => common.load(&a.data)?,
                Some(full) => {
                    let vocab = common.load(full)?.vocab().clone();
                    let triples = io::read_triples(&a.data, common.format())
                        .with_context(|| format!("loading {}", a.data.display()))?;
                    let (graph, _) = KnowledgeGraph::build_with(vocab, &triples)?;
                    let ontology = SocialOntology::infer(&graph, &common.kinds()?);
                    graph.with_ontology(ontology)
                }
            };
            let (model, report) = train_graph(&graph, &model_config)?;
            save_checkpoint(&Checkpoint::new(model, Some(graph.vocab().clone())), &a.checkpoint)?;
            let mut kv = String::new();
            for (k, v) in model_config.to_pairs() {
                let _ = writeln!(kv, "config.{k}={v}");
            }
            let _ = writeln!(kv, "data.triples={}", graph.len());
            let _ = writeln!(kv, "data.entities={}", graph.entity_count());
            let _ = writeln!(kv, "train_hit1={:.6}", report.train_hit1);
            let _ = writeln!(
                kv,
                "final_loss={:.6}",
                report.loss_trace.last().copied().unwrap_or(f64::NAN)
            );
            if let Some(p) = &a.report {
                write_out(p, &kv)?;
            }
            if let Some(p) = &a.loss_trace {
                let trace: String = report.loss_trace.iter().map(|l| format!("{l:.9}\n")).collect();
                write_out(p, &trace)?;
            }
            outln!(
                "{}: {} epochs, final loss {:.4}, train hit@1 {:.3}, {:.1}s",
                a.model,
                report.loss_trace.len(),
                report.loss_trace.last().copied().unwrap_or(f64::NAN),
                report.train_hit1,
                report.wall_time_secs
            )?;
        }
        Command::Evaluate(a) => {
            let mut flags = Vec::new();
            if let Some(m) = &a.mode {
                flags.push(("ranking.mode".into(), m.clone()));
            }
            let config = common.resolve(flags)?;
            let ck = load_ck(&a.checkpoint)?;
            let vocab = ck
                .vocab
                .as_ref()
                .ok_or_else(|| anyhow!("checkpoint carries no labels"))?;
            let resolve = |p: &Path| -> Result<Vec<Triple>> {
                io::read_triples(p, common.format())?
                    .iter()
                    .map(|t| vocab.resolve(t).with_context(|| format!("in {}", p.display())))
                    .collect()
            };
            let test = resolve(&a.test)?;
            let mut known: std::collections::HashSet<Triple> = test.iter().copied().collect();
            if let Some(p) = &a.train {
                known.extend(resolve(p)?);
            }
            let ranking: &RankingConfig = &config.ranking;
            let report = evaluate(&ck.model, &test, ck.model.entity_count(), &known, ranking)?;
            let mut kv = String::new();
            for line in model_echo(&ck).lines() {
                let _ = writeln!(kv, "config.{line}");
            }
            let _ = writeln!(kv, "config.ranking.mode={}", ranking.mode.as_str());
            let _ = writeln!(kv, "config.ranking.tie_policy={}", ranking.tie_policy.as_str());
            kv.push_str(&report.to_kv(""));
            if let Some(p) = &a.report {
                write_out(p, &kv)?;
            }
            if let Some(p) = &a.ranks {
                let labels = |t: Triple| {
                    let l = vocab.labeled(t);
                    [l.head, l.relation, l.tail]
                };
                write_out(p, &report.ranks_tsv(labels))?;
            }
            out!(
                "{}",
                header(&format!(
                    "{} ranking, {} queries",
                    ranking.mode.as_str(),
                    report.overall.queries
                ))
            )?;
            outln!("{:<8} {:>10} {:>8}", "side", "MR", "MRR")?;
            for (name, m) in [
                ("both", &report.overall),
                ("head", &report.head),
                ("tail", &report.tail),
            ] {
                let hits: String = m.hits.iter().map(|(n, h)| format!(" hit@{n}={h:.3}")).collect();
                outln!("{name:<8} {:>10.1} {:>8.3}{hits}", m.mr, m.mrr)?;
            }
        }
        Command::Recommend(a) => {
            common.resolve(Vec::new())?;
            let ck = load_ck(&a.checkpoint)?;
            let graph = graph_for(common, &ck, &a.data)?;
            let basis = likes_basis(&ck, &graph, !a.unclamped)?;
            let user = graph
                .entity(&a.user)
                .map_err(|_| anyhow!("unknown user {:?}", a.user))?;
            let recs = recommend(&ck.model, &graph, &basis, user, a.k)?;
            let mut echo = model_echo(&ck);
            let _ = writeln!(echo, "user={}\nk={}\nclamp={}", a.user, a.k, basis.clamp);
            let _ = writeln!(echo, "max_training_score={:.6}", basis.max_training_score);
            let label = |e| graph.vocab().entity_label(e).to_owned();
            let mut lines = header(&echo);
            for r in &recs {
                let _ = writeln!(
                    lines,
                    "{}\t{}\t{:.6}\t{:.6}",
                    label(r.user),
                    label(r.tweet),
                    r.score,
                    r.probability
                );
            }
            if let Some(p) = &a.report {
                write_out(p, &lines)?;
            }
            outln!("{:<4} {:<28} {:>10} {:>11}", "rank", "post", "score", "probability")?;
            for (i, r) in recs.iter().enumerate() {
                outln!(
                    "{:<4} {:<28} {:>10.4} {:>11.4}",
                    i + 1,
                    label(r.tweet),
                    r.score,
                    r.probability
                )?;
            }
            if recs.is_empty() {
                outln!("no candidate posts for {}", a.user)?;
            }
        }
        Command::Cohorts(a) => {
            common.resolve(Vec::new())?;
            let ck = load_ck(&a.checkpoint)?;
            let graph = graph_for(common, &ck, &a.data)?;
            let basis = likes_basis(&ck, &graph, true)?;
            let target = match &a.tweet {
                Some(l) => graph.entity(l).map_err(|_| anyhow!("unknown post {l:?}"))?,
                None => most_liked_tweet(&graph).ok_or_else(|| anyhow!("graph has no liked posts"))?,
            };
            let config = CohortConfig {
                similarity_threshold: a.similarity,
                max_members: a.max_members,
            };
            let specs = standard_cohorts(a.hub_followers, a.focused_following);
            let rows = analyze_cohorts(&ck.model, &graph, &basis, &specs, target, &config)?;
            let mut echo = model_echo(&ck);
            let _ = writeln!(
                echo,
                "tweet={}\nhub_followers={}\nfocused_following={}\nsimilarity={}\nmax_members={}",
                graph.vocab().entity_label(target),
                a.hub_followers,
                a.focused_following,
                a.similarity,
                a.max_members
            );
            let mut kv: String = echo.lines().map(|l| format!("config.{l}\n")).collect();
            let fmt = |v: Option<f64>| v.map_or_else(|| "none".to_owned(), |v| format!("{v:.6}"));
            for r in &rows {
                let members: Vec<&str> = r.members.iter().map(|&m| graph.vocab().entity_label(m)).collect();
                let _ = writeln!(kv, "cohort.{}.members={}", r.name, members.join(","));
                let _ = writeln!(kv, "cohort.{}.clamped={}", r.name, fmt(r.clamped));
                let _ = writeln!(kv, "cohort.{}.unclamped={}", r.name, fmt(r.unclamped));
            }
            if let Some(p) = &a.report {
                write_out(p, &kv)?;
            }
            outln!("target post {}", graph.vocab().entity_label(target))?;
            outln!("{:<36} {:>7} {:>9} {:>11}", "cohort", "members", "clamped", "unclamped")?;
            for r in &rows {
                outln!("{r}")?;
            }
        }
        Command::Reproduce(a) => {
            let config = common.resolve(a.model_flags.pairs())?;
            let graph = common.load(&a.data)?;
            let report = reproduce(&graph, &config)?;
            if let Some(p) = &a.report {
                write_out(p, &report.to_kv())?;
            }
            let table = report.to_table();
            if let Some(p) = &a.table {
                write_out(p, &table)?;
            }
            out!("{table}")?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
