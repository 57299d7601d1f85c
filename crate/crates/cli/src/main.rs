mod config;

use anyhow::{bail, Context, Result};
use clap::{ArgGroup, Args, CommandFactory, Parser, Subcommand, ValueEnum};
use musim::corpus::{
    augment, load_corpus, paper_profile, save_corpus, split, synthesize_corpus, synthesize_records, write_atomic,
    AugmentConfig, SplitMode, SplitRule,
};
use musim::env::{run_protocol, Connection, EnvConfig, Policy, Server};
use musim::eval::{compare_to_oracle, evaluate, render_report, ReportFormat};
use musim::model::{load_model, save_model, train, Activation, AdamConfig, Dataset, TrainConfig};
use musim::oracle::{enumerate_valid_inputs, render_tables_markdown, Oracle, OracleMode};
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

#[derive(Parser, Debug)]
#[command(name = "musim", version, about = "Multimodal ELD simulator: corpus pipeline, training, evaluation and episode server")]
#[command(args_override_self = true)]
struct Cli {
    /// Flat TOML file of flag values; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Seed for every random choice.
    #[arg(long, global = true, env = "MUSIM_SEED", default_value_t = 0)]
    seed: u64,
    /// Only log warnings and errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate dialogues between a scripted HEL and the oracle ELD.
    Generate(GenerateArgs),
    /// Add rule-based output-state and input-state records.
    Augment(AugmentArgs),
    /// Partition a corpus into train, validation and test files.
    Split(SplitArgs),
    /// Train the three-head classifier.
    Train(TrainArgs),
    /// Per-head accuracy and confusion matrices on a test corpus.
    Eval(EvalArgs),
    /// Agreement with the oracle over every enumerated input.
    Compare(CompareArgs),
    /// Serve episodes over TCP, one session per connection.
    Serve(ServeArgs),
    /// Run the episode protocol on standard input and output.
    Play(PlayArgs),
    /// Print the oracle's decision and transition tables as Markdown.
    Tables(TablesArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Canonical,
    Diverse,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long)]
    out: PathBuf,
    /// Number of dialogues to simulate.
    #[arg(long, default_value_t = 100, conflicts_with = "records")]
    dialogues: usize,
    /// Simulate until exactly this many records exist instead.
    #[arg(long)]
    records: Option<usize>,
    /// Probability that a HEL turn is a mistake.
    #[arg(long, default_value_t = 0.2)]
    noise: f64,
    #[arg(long, value_enum, default_value_t = ModeArg::Canonical)]
    oracle_mode: ModeArg,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("counts_source").required(true).args(["preset", "counts"])))]
struct AugmentArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Named per-rule count profile.
    #[arg(long, value_parser = ["paper-profile"])]
    preset: Option<String>,
    /// Explicit counts, e.g. `AugOut_EstabOT=40,AugIn_112=10`.
    #[arg(long)]
    counts: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum RuleArg {
    Reference,
    Floor,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SplitModeArg {
    Record,
    Dialogue,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(long)]
    input: PathBuf,
    /// Directory receiving train.jsonl, val.jsonl and test.jsonl.
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value = "0.8,0.1,0.1")]
    ratios: String,
    #[arg(long, value_enum, default_value_t = RuleArg::Reference)]
    rule: RuleArg,
    #[arg(long, value_enum, default_value_t = SplitModeArg::Record)]
    mode: SplitModeArg,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    val: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "identity")]
    activation: Activation,
    /// Widths of the two hidden layers.
    #[arg(long, default_value = "64,32")]
    hidden: String,
    #[arg(long, default_value_t = 0.2)]
    dropout: f64,
    #[arg(long, default_value_t = 1e-3)]
    learning_rate: f64,
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    #[arg(long, default_value_t = 100)]
    max_epochs: usize,
    #[arg(long, default_value_t = 10)]
    patience: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Csv,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Text)]
    format: FormatArg,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
#[command(group(ArgGroup::new("policy").required(true).args(["model", "oracle"])))]
struct PolicyArgs {
    /// Trained model file.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Use the rule-based oracle instead of a model.
    #[arg(long)]
    oracle: bool,
}

impl PolicyArgs {
    fn load(&self) -> Result<Arc<dyn Policy>> {
        Ok(match &self.model {
            Some(p) => Arc::new(read_model(p)?),
            None => Arc::new(Oracle::default()),
        })
    }
}

#[derive(Args, Debug)]
struct CompareArgs {
    #[command(flatten)]
    policy: PolicyArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EpisodeArgs {
    #[arg(long, default_value_t = 40)]
    max_turns: u32,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    reward_success: f64,
    #[arg(long, default_value_t = -0.01, allow_negative_numbers = true)]
    reward_per_turn: f64,
    #[arg(long, default_value_t = -1.0, allow_negative_numbers = true)]
    reward_failure: f64,
}

impl EpisodeArgs {
    fn config(&self, seed: u64) -> EnvConfig {
        EnvConfig {
            max_turns: self.max_turns,
            reward_success: self.reward_success,
            reward_per_turn: self.reward_per_turn,
            reward_failure: self.reward_failure,
            seed,
        }
    }
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    episode: EpisodeArgs,
    #[arg(long, default_value = "127.0.0.1:7878")]
    addr: String,
}

#[derive(Args, Debug)]
struct PlayArgs {
    #[command(flatten)]
    policy: PolicyArgs,
    #[command(flatten)]
    episode: EpisodeArgs,
}

#[derive(Args, Debug)]
struct TablesArgs {
    #[arg(long)]
    out: Option<PathBuf>,
}

const SUBCOMMANDS: [&str; 9] = ["generate", "augment", "split", "train", "eval", "compare", "serve", "play", "tables"];

fn parse_list<T: std::str::FromStr>(s: &str, n: usize, what: &str) -> Result<Vec<T>> {
    let v: Vec<T> = s
        .split(',')
        .map(|p| p.trim().parse::<T>())
        .collect::<Result<_, _>>()
        .map_err(|_| anyhow::anyhow!("cannot parse {what} '{s}'"))?;
    if v.len() != n {
        bail!("{what} needs {n} comma-separated values, got '{s}'");
    }
    Ok(v)
}

fn read_corpus(p: &Path) -> Result<musim::corpus::Corpus> {
    load_corpus(p).with_context(|| format!("reading corpus {}", p.display()))
}

fn write_corpus(c: &musim::corpus::Corpus, p: &Path) -> Result<()> {
    save_corpus(c, p).with_context(|| format!("writing corpus {}", p.display()))
}

fn read_model(p: &Path) -> Result<musim::model::Mlp> {
    load_model(p).with_context(|| format!("loading model {}", p.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let seed = cli.seed;
    match cli.command {
        Command::Generate(a) => {
            if !(0.0..=1.0).contains(&a.noise) {
                bail!("noise must be in [0, 1]");
            }
            let oracle = Oracle::new(match a.oracle_mode {
                ModeArg::Canonical => OracleMode::Canonical,
                ModeArg::Diverse => OracleMode::Diverse { seed },
            });
            let c = match a.records {
                Some(n) => synthesize_records(&oracle, a.noise, n, seed),
                None => synthesize_corpus(&oracle, a.noise, a.dialogues, seed),
            };
            write_corpus(&c, &a.out)?;
            log::info!("wrote {} records to {}", c.len(), a.out.display());
        }
        Command::Augment(a) => {
            let c = read_corpus(&a.input)?;
            let cfg = match (&a.preset, &a.counts) {
                (Some(_), _) => paper_profile(&c, seed)?,
                (None, Some(spec)) => AugmentConfig::parse_counts(spec, seed)?,
                (None, None) => unreachable!("clap requires one count source"),
            };
            let out = augment(&c, &cfg)?;
            write_corpus(&out, &a.out)?;
            log::info!("augmented {} records to {} ({} added)", c.len(), out.len(), cfg.total());
        }
        Command::Split(a) => {
            let r: Vec<f64> = parse_list(&a.ratios, 3, "ratios")?;
            let c = read_corpus(&a.input)?;
            let rule = match a.rule {
                RuleArg::Reference => SplitRule::Reference,
                RuleArg::Floor => SplitRule::Floor,
            };
            let mode = match a.mode {
                SplitModeArg::Record => SplitMode::Record,
                SplitModeArg::Dialogue => SplitMode::Dialogue,
            };
            let (tr, va, te) = split(&c, (r[0], r[1], r[2]), seed, rule, mode)?;
            std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
            for (name, part) in [("train", &tr), ("val", &va), ("test", &te)] {
                write_corpus(part, &a.out_dir.join(format!("{name}.jsonl")))?;
            }
            log::info!("split {} records into {}/{}/{}", c.len(), tr.len(), va.len(), te.len());
        }
        Command::Train(a) => {
            let h: Vec<usize> = parse_list(&a.hidden, 2, "hidden widths")?;
            let cfg = TrainConfig {
                max_epochs: a.max_epochs,
                patience: a.patience,
                adam: AdamConfig {
                    learning_rate: a.learning_rate,
                    ..AdamConfig::default()
                },
                batch_size: a.batch_size,
                seed,
                activation: a.activation,
                hidden: (h[0], h[1]),
                dropout: a.dropout,
            };
            let tr = Dataset::from_corpus(&read_corpus(&a.train)?);
            let va = Dataset::from_corpus(&read_corpus(&a.val)?);
            let (model, report) = train(&tr, &va, &cfg)?;
            save_model(&model, &a.out).with_context(|| format!("writing model {}", a.out.display()))?;
            log::info!(
                "stopped after epoch {}, kept epoch {}; model written to {}",
                report.stopped_at_epoch,
                report.best_epoch,
                a.out.display()
            );
        }
        Command::Eval(a) => {
            let model = read_model(&a.model)?;
            let test = read_corpus(&a.test)?;
            let format = match a.format {
                FormatArg::Text => ReportFormat::Text,
                FormatArg::Csv => ReportFormat::Csv,
            };
            let report = evaluate(&model, &test)?;
            emit(&render_report(&report, format), a.out.as_deref())?;
        }
        Command::Compare(a) => {
            let inputs = enumerate_valid_inputs();
            let oracle = Oracle::default();
            let report = match &a.policy.model {
                Some(p) => compare_to_oracle(&read_model(p)?, &oracle, &inputs)?,
                None => compare_to_oracle(&oracle, &oracle, &inputs)?,
            };
            emit(&report.render_text(), a.out.as_deref())?;
        }
        Command::Serve(a) => {
            let cfg = a.episode.config(seed);
            cfg.validate()?;
            let policy = a.policy.load()?;
            let server = Server::bind(&a.addr)?;
            let stop = Arc::new(AtomicBool::new(false));
            let flag = Arc::clone(&stop);
            ctrlc::set_handler(move || flag.store(true, Ordering::SeqCst)).context("installing signal handler")?;
            eprintln!("serving on {}", server.local_addr());
            server.run(policy, cfg, stop)?;
        }
        Command::Play(a) => {
            let cfg = a.episode.config(seed);
            cfg.validate()?;
            let policy = a.policy.load()?;
            eprintln!("one JSON request per line, for example:");
            eprintln!("  {{\"type\":\"reset\",\"seed\":1}}");
            eprintln!("  {{\"type\":\"hel_move\",\"da\":1,\"action\":3,\"mentioned\":[{{\"kind\":\"object_type\",\"id\":\"bowl\"}}]}}");
            let mut conn = Connection::new(policy.as_ref(), cfg);
            let mut err = std::io::stderr();
            run_protocol(BufReader::new(std::io::stdin().lock()), std::io::stdout(), &mut conn, None, Some(&mut err))?;
            if let Some(s) = conn.session() {
                eprintln!("{}", describe_session(s));
            }
        }
        Command::Tables(a) => emit(&render_tables_markdown(), a.out.as_deref())?,
    }
    Ok(())
}

fn describe_session(s: &musim::env::Session) -> String {
    match s.outcome {
        Some(o) => format!("last episode: {o:?} after {} turns", s.turn),
        None => format!("last episode unfinished after {} turns", s.turn),
    }
}

fn main() -> ExitCode {
    let argv: Vec<_> = std::env::args_os().collect();
    let argv = match config::expand_args(argv, &SUBCOMMANDS) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e:#}");
            eprintln!("{}", Cli::command().render_usage());
            return ExitCode::from(2);
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    env_logger::Builder::new()
        .filter_level(if cli.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info })
        .format_timestamp(None)
        .format_target(false)
        .target(env_logger::Target::Stderr)
        .init();
    log::info!("resolved config: {cli:?}");
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
