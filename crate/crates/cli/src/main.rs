//! `deid`: synthetic corpora, CBOW embeddings, LSTM tagging and scoring.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "deid", version, about = "De-identification of clinical notes with word embeddings and an LSTM tagger")]
pub struct Cli {
    /// Directory that relative paths are resolved against.
    #[arg(long, global = true, env = "DEID_DATA_DIR")]
    pub data_dir: Option<PathBuf>,

    /// Suppress progress output on stderr.
    #[arg(short, long, global = true)]
    pub quiet: bool,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic annotated corpus (one .txt per note plus manifest.json).
    SynthGen(SynthGenArgs),
    /// Tokenize an annotated corpus and print `token<TAB>label` rows.
    Tokenize(TokenizeArgs),
    /// Train CBOW embeddings and save them in word2vec text format.
    TrainEmbeddings(TrainEmbeddingsArgs),
    /// Score an embedding model on analogy questions.
    EvalAnalogies(EvalAnalogiesArgs),
    /// Train models on growing fractions of a corpus and compare them with paired t-tests.
    StudyDatasize(StudyDatasizeArgs),
    /// Train the LSTM tagger and write a checkpoint.
    TrainTagger(TrainTaggerArgs),
    /// Print per-token labels predicted by a trained tagger.
    Tag(TagArgs),
    /// Replace predicted PHI with [CATEGORY] placeholders.
    Deid(TagArgs),
    /// Compare predicted labels with a gold corpus.
    Score(ScoreArgs),
}

#[derive(Debug, Args)]
pub struct SynthGenArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Number of notes.
    #[arg(long, default_value_t = 2000)]
    pub docs: usize,
    #[arg(long, default_value_t = 20)]
    pub min_tokens: usize,
    #[arg(long, default_value_t = 60)]
    pub max_tokens: usize,
    /// Probability that a clause carries an entity.
    #[arg(long, default_value_t = 0.4)]
    pub entity_rate: f64,
    /// Relative PHI token mass: Date,Doctor,Hospital,Location,Patient,Phone.
    #[arg(long, value_delimiter = ',', num_args = 6, default_values_t = [1203.0, 462.0, 10.0, 258.0, 119.0, 19.0])]
    pub weights: Vec<f64>,
    /// Per filler word probability of a letter swap.
    #[arg(long, default_value_t = 0.0)]
    pub misspelling_rate: f64,
    /// Per filler word probability of truncation.
    #[arg(long, default_value_t = 0.0)]
    pub abbreviation_rate: f64,
    /// Let PHI lexicon words appear untagged in filler text.
    #[arg(long)]
    pub overlap: bool,
}

#[derive(Debug, Args)]
pub struct TokenizeArgs {
    /// Annotated .txt file or directory of them.
    #[arg(long)]
    pub corpus: PathBuf,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct CbowArgs {
    /// Vector length.
    #[arg(long, default_value_t = 200)]
    pub dim: usize,
    /// Context words on each side of the center word.
    #[arg(long, default_value_t = 5)]
    pub window: usize,
    /// Noise words per example.
    #[arg(long, default_value_t = 5)]
    pub negatives: usize,
    #[arg(long, default_value_t = 5)]
    pub epochs: usize,
    /// Initial learning rate, decayed linearly.
    #[arg(long, default_value_t = 0.025)]
    pub lr: f64,
    /// Words seen fewer times map to the unknown token.
    #[arg(long, default_value_t = 2)]
    pub min_count: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainEmbeddingsArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    /// Output model in word2vec text format.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub cbow: CbowArgs,
}

#[derive(Debug, Args)]
pub struct EvalAnalogiesArgs {
    /// Model in word2vec text format.
    #[arg(long)]
    pub model: PathBuf,
    /// Question file: `w1 w2 w3 w4` per line, `#` comments, `:` section headers.
    #[arg(long)]
    pub questions: PathBuf,
    /// Write `index<TAB>w1 w2 w3 w4<TAB>cosine` rows here.
    #[arg(long)]
    pub per_question: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StudyDatasizeArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub questions: PathBuf,
    /// Cumulative corpus fractions, one model each.
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5, 0.75, 1.0])]
    pub fractions: Vec<f64>,
    /// Write the table here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cbow: CbowArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitModeArg {
    Windows,
    Documents,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OutputArg {
    /// 17 independent sigmoids with binary cross entropy.
    Sigmoid,
    /// Softmax with categorical cross entropy.
    Softmax,
}

#[derive(Debug, Args)]
pub struct EmbeddingPaths {
    /// Primary embeddings (word2vec text format).
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Second source consulted for words missing from the primary model.
    #[arg(long)]
    pub fallback: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainTaggerArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[command(flatten)]
    pub embeddings: EmbeddingPaths,
    /// Output checkpoint.
    #[arg(long)]
    pub out: PathBuf,
    /// Write the per-epoch and test report as JSON here.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long, default_value_t = 200)]
    pub hidden: usize,
    /// Window length in tokens.
    #[arg(long, default_value_t = 15)]
    pub window: usize,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
    #[arg(long, default_value_t = 0.2)]
    pub dropout: f64,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    /// Adam learning rate.
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    /// Train, validation and test fractions.
    #[arg(long, value_delimiter = ',', num_args = 3, default_values_t = [0.56, 0.19, 0.25])]
    pub split: Vec<f64>,
    #[arg(long, value_enum, default_value_t = SplitModeArg::Windows)]
    pub split_mode: SplitModeArg,
    #[arg(long, value_enum, default_value_t = OutputArg::Sigmoid)]
    pub output: OutputArg,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TagArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[command(flatten)]
    pub embeddings: EmbeddingPaths,
    /// Text file or directory of .txt files; inline PHI markup is stripped.
    #[arg(long)]
    pub input: PathBuf,
    /// Write here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub stride: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MatchArg {
    /// B-X and I-X both count as category X.
    Category,
    /// Labels must match exactly.
    Exact,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Gold annotated corpus.
    #[arg(long)]
    pub gold: PathBuf,
    /// Predictions as `token<TAB>label` rows, documents in gold file order.
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, value_enum, default_value_t = MatchArg::Category)]
    pub mode: MatchArg,
    /// Also write the report as JSON here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
