use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use deid_core::corpus::{load_corpus, read_conll, write_conll};
use deid_core::embeddings::{
    analogy_quality, datasize_study, load_text, parse_questions, save_text, train_cbow_on_documents, CbowConfig,
    ComposedLookup, EmbeddingModel, StudyConfig,
};
use deid_core::evalmerge::{deidentify, score, EvalReport, MatchMode};
use deid_core::seqlabel::{
    evaluate, load_checkpoint, save_checkpoint, train_with, OutputMode, SplitFractions, SplitMode, TaggerConfig,
    TrainingData,
};
use deid_core::synth::{generate, write_corpus, GenConfig};
use deid_core::{AnnotatedDocument, LabelSchema, LstmTagger};
use serde_json::json;

use crate::{
    CbowArgs, Cli, Command, EmbeddingPaths, EvalAnalogiesArgs, MatchArg, OutputArg, ScoreArgs, SplitModeArg,
    StudyDatasizeArgs, SynthGenArgs, TagArgs, TokenizeArgs, TrainEmbeddingsArgs, TrainTaggerArgs,
};

struct Ctx {
    data_dir: Option<PathBuf>,
    quiet: bool,
    schema: LabelSchema,
}

impl Ctx {
    fn path(&self, p: &Path) -> PathBuf {
        match &self.data_dir {
            Some(dir) if p.is_relative() => dir.join(p),
            _ => p.to_path_buf(),
        }
    }

    fn progress(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn corpus(&self, p: &Path) -> Result<Vec<AnnotatedDocument>> {
        let docs = load_corpus(&self.path(p), &self.schema)?;
        ensure!(!docs.is_empty(), "{}: no .txt documents found", p.display());
        Ok(docs)
    }

    fn model(&self, p: &Path) -> Result<EmbeddingModel> {
        let path = self.path(p);
        load_text(&path).with_context(|| path.display().to_string())
    }

    fn emit(&self, out: Option<&Path>, text: &str) -> Result<()> {
        match out {
            Some(p) => write_file(&self.path(p), text),
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).with_context(|| parent.display().to_string())?;
    }
    fs::write(path, text).with_context(|| path.display().to_string())
}

pub fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx { data_dir: cli.data_dir, quiet: cli.quiet, schema: LabelSchema::default() };
    match cli.command {
        Command::SynthGen(a) => synth_gen(&ctx, a),
        Command::Tokenize(a) => tokenize(&ctx, a),
        Command::TrainEmbeddings(a) => train_embeddings(&ctx, a),
        Command::EvalAnalogies(a) => eval_analogies(&ctx, a),
        Command::StudyDatasize(a) => study_datasize(&ctx, a),
        Command::TrainTagger(a) => train_tagger(&ctx, a),
        Command::Tag(a) => tag(&ctx, a, false),
        Command::Deid(a) => tag(&ctx, a, true),
        Command::Score(a) => score_cmd(&ctx, a),
    }
}

fn synth_gen(ctx: &Ctx, a: SynthGenArgs) -> Result<()> {
    let mut weights = [0.0; 6];
    weights.copy_from_slice(&a.weights);
    let config = GenConfig {
        seed: a.seed,
        n_docs: a.docs,
        min_tokens: a.min_tokens,
        max_tokens: a.max_tokens,
        entity_rate: a.entity_rate,
        category_weights: weights,
        misspelling_rate: a.misspelling_rate,
        abbreviation_rate: a.abbreviation_rate,
        overlap: a.overlap,
    };
    let docs = generate(&config)?;
    let manifest = write_corpus(&docs, a.seed, &ctx.path(&a.out), &ctx.schema)?;
    ctx.progress(format!(
        "wrote {} notes, {} tokens, PHI tokens {:?}",
        manifest.documents, manifest.tokens, manifest.category_tokens
    ));
    Ok(())
}

fn tokenize(ctx: &Ctx, a: TokenizeArgs) -> Result<()> {
    let docs = ctx.corpus(&a.corpus)?;
    let text = write_conll(docs.iter().map(|d| (d.tokens.as_slice(), d.labels.as_slice())), &ctx.schema);
    ctx.emit(a.out.as_deref(), &text)
}

fn cbow_config(a: &CbowArgs) -> CbowConfig {
    CbowConfig { dim: a.dim, window: a.window, negatives: a.negatives, epochs: a.epochs, lr0: a.lr, seed: a.seed }
}

fn train_embeddings(ctx: &Ctx, a: TrainEmbeddingsArgs) -> Result<()> {
    let docs = ctx.corpus(&a.corpus)?;
    let model = train_cbow_on_documents(&docs, a.cbow.min_count, &cbow_config(&a.cbow))?;
    let out = ctx.path(&a.out);
    save_text(&model, &out).with_context(|| out.display().to_string())?;
    ctx.progress(format!("{} words x {} dims -> {}", model.len(), model.dim(), out.display()));
    Ok(())
}

fn read_questions(ctx: &Ctx, p: &Path) -> Result<Vec<deid_core::embeddings::AnalogyQuestion>> {
    let path = ctx.path(p);
    let text = fs::read_to_string(&path).with_context(|| path.display().to_string())?;
    parse_questions(&text).with_context(|| path.display().to_string())
}

fn eval_analogies(ctx: &Ctx, a: EvalAnalogiesArgs) -> Result<()> {
    let model = ctx.model(&a.model)?;
    let questions = read_questions(ctx, &a.questions)?;
    let quality = analogy_quality(&model, &questions)?;
    println!("mean_cosine\t{}", quality.mean);
    println!("answered\t{}", quality.scores.len());
    println!("skipped\t{}", quality.skipped);
    if let Some(p) = &a.per_question {
        let mut out = String::new();
        for &(i, cos) in &quality.scores {
            let q = &questions[i];
            out.push_str(&format!("{i}\t{} {} {} {}\t{cos}\n", q.w1, q.w2, q.w3, q.w4));
        }
        write_file(&ctx.path(p), &out)?;
    }
    Ok(())
}

fn study_datasize(ctx: &Ctx, a: StudyDatasizeArgs) -> Result<()> {
    let docs = ctx.corpus(&a.corpus)?;
    let questions = read_questions(ctx, &a.questions)?;
    let config = StudyConfig { fractions: a.fractions, min_count: a.cbow.min_count, cbow: cbow_config(&a.cbow) };
    let report = datasize_study(&docs, &questions, &config)?;
    ctx.progress(format!("{} questions answerable by the smallest model", report.questions.len()));
    ctx.emit(a.out.as_deref(), &report.to_tsv())
}

fn models(ctx: &Ctx, p: &EmbeddingPaths) -> Result<(EmbeddingModel, Option<EmbeddingModel>)> {
    let primary = ctx.model(&p.embeddings)?;
    let fallback = p.fallback.as_deref().map(|f| ctx.model(f)).transpose()?;
    Ok((primary, fallback))
}

fn train_tagger(ctx: &Ctx, a: TrainTaggerArgs) -> Result<()> {
    let docs = ctx.corpus(&a.corpus)?;
    let (primary, fallback) = models(ctx, &a.embeddings)?;
    let mut lookup = ComposedLookup::new(&primary, fallback.as_ref())?;
    let config = TaggerConfig {
        hidden: a.hidden,
        window: a.window,
        stride: a.stride,
        dropout: a.dropout,
        epochs: a.epochs,
        lr: a.lr,
        split: SplitFractions { train: a.split[0], validation: a.split[1], test: a.split[2] },
        split_mode: match a.split_mode {
            SplitModeArg::Windows => SplitMode::Windows,
            SplitModeArg::Documents => SplitMode::Documents,
        },
        output: match a.output {
            OutputArg::Sigmoid => OutputMode::SigmoidBce,
            OutputArg::Softmax => OutputMode::SoftmaxCe,
        },
        seed: a.seed,
        ..TaggerConfig::default()
    };
    if a.window == 0 || a.stride == 0 {
        bail!("--window and --stride must be positive");
    }
    if !(0.0..1.0).contains(&a.dropout) {
        bail!("--dropout must be in [0, 1)");
    }
    let data = TrainingData::new(&docs, &mut lookup, &ctx.schema, config.window, config.stride);
    let sources = lookup.counts();
    ctx.progress(format!(
        "{} windows; token vectors from primary {}, fallback {}, unknown {}",
        data.windows.len(),
        sources.primary,
        sources.fallback,
        sources.unknown
    ));
    let outcome = train_with(&data, &ctx.schema, &config, |e| {
        ctx.progress(format!(
            "epoch {:>2}  train loss {:.6}  validation loss {:.6}  validation F {:.4}",
            e.epoch, e.train_loss, e.validation_loss, e.validation_f
        ))
    })?;
    let out = ctx.path(&a.out);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    save_checkpoint(&outcome.tagger, &out).with_context(|| out.display().to_string())?;

    let test = evaluate(&outcome.tagger, &data, &outcome.split.test, &ctx.schema, MatchMode::Category)?;
    ctx.progress(format!("test windows: {}\n{}", outcome.split.test.len(), test.report));
    if let Some(p) = &a.report {
        let epochs: Vec<_> = outcome
            .history
            .iter()
            .map(|e| {
                json!({
                    "epoch": e.epoch,
                    "train_loss": e.train_loss,
                    "validation_loss": e.validation_loss,
                    "validation_f": e.validation_f,
                })
            })
            .collect();
        let test_report: serde_json::Value = serde_json::from_str(&test.report.to_json())?;
        let doc = json!({
            "windows": data.windows.len(),
            "split": {
                "train": outcome.split.train.len(),
                "validation": outcome.split.validation.len(),
                "test": outcome.split.test.len(),
            },
            "lookups": sources,
            "initial_validation_loss": outcome.initial_validation_loss,
            "epochs": epochs,
            "test_loss": test.loss,
            "test": test_report,
        });
        write_file(&ctx.path(p), &(serde_json::to_string_pretty(&doc)? + "\n"))?;
    }
    Ok(())
}

fn load_tagger(ctx: &Ctx, p: &Path) -> Result<LstmTagger> {
    let path = ctx.path(p);
    load_checkpoint(&path, ctx.schema.fingerprint()).with_context(|| path.display().to_string())
}

fn tag(ctx: &Ctx, a: TagArgs, placeholders: bool) -> Result<()> {
    let tagger = load_tagger(ctx, &a.checkpoint)?;
    let (primary, fallback) = models(ctx, &a.embeddings)?;
    let mut lookup = ComposedLookup::new(&primary, fallback.as_ref())?;
    ensure!(a.stride > 0, "--stride must be positive");
    let docs = ctx.corpus(&a.input)?;
    let mut labels = Vec::with_capacity(docs.len());
    for doc in &docs {
        labels.push(tagger.tag(doc, &mut lookup, &ctx.schema, a.stride)?);
    }
    let c = lookup.counts();
    ctx.progress(format!("token vectors from primary {}, fallback {}, unknown {}", c.primary, c.fallback, c.unknown));

    if !placeholders {
        let text = write_conll(docs.iter().zip(&labels).map(|(d, l)| (d.tokens.as_slice(), l.as_slice())), &ctx.schema);
        return ctx.emit(a.out.as_deref(), &text);
    }
    let input = ctx.path(&a.input);
    if input.is_dir() {
        let out = a.out.as_deref().context("--out DIR is required when --input is a directory")?;
        let out = ctx.path(out);
        for (doc, l) in docs.iter().zip(&labels) {
            write_file(&out.join(format!("{}.txt", doc.doc_id)), &(deidentify(doc, l, &ctx.schema) + "\n"))?;
        }
        Ok(())
    } else {
        ctx.emit(a.out.as_deref(), &(deidentify(&docs[0], &labels[0], &ctx.schema) + "\n"))
    }
}

fn score_cmd(ctx: &Ctx, a: ScoreArgs) -> Result<()> {
    let gold = ctx.corpus(&a.gold)?;
    let pred_path = ctx.path(&a.pred);
    let text = fs::read_to_string(&pred_path).with_context(|| pred_path.display().to_string())?;
    let pred = read_conll(&text, &ctx.schema).with_context(|| pred_path.display().to_string())?;
    let non_empty: Vec<&AnnotatedDocument> = gold.iter().filter(|d| !d.is_empty()).collect();
    ensure!(
        pred.len() == non_empty.len(),
        "{}: {} documents, gold has {}",
        pred_path.display(),
        pred.len(),
        non_empty.len()
    );
    let mode = match a.mode {
        MatchArg::Category => MatchMode::Category,
        MatchArg::Exact => MatchMode::ExactLabel,
    };
    let mut report = EvalReport::default();
    for (g, p) in non_empty.iter().zip(&pred) {
        ensure!(
            g.len() == p.len() && g.tokens.iter().zip(p).all(|(t, (w, _))| t.text == *w),
            "{}: tokens of document {} do not match the gold corpus",
            pred_path.display(),
            g.doc_id
        );
        let labels: Vec<_> = p.iter().map(|(_, l)| *l).collect();
        report += score(&g.labels, &labels, &ctx.schema, mode)?;
    }
    println!("{report}");
    if let Some(p) = &a.json {
        write_file(&ctx.path(p), &(report.to_json() + "\n"))?;
    }
    Ok(())
}
