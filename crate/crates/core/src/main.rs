use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use phrase_tts::acoustic::{
    read_mel, read_weights, write_mel, write_weights, MelSpectrogram, ModelConfig, ModelWeights,
};
use phrase_tts::crf::{
    evaluate, parse_corpus, read_model, train_crf, write_model, CrfModel, TrainConfig,
};
use phrase_tts::frontend::{segment_phrases, tokenize, Frontend, BUNDLED_CORPUS};
use phrase_tts::scheduler::{
    benchmark, synthesize_sentence_ar_baseline, synthesize_sentence_parallel,
    synthesize_sentence_sequential, BenchConfig, FrameLimit, Resources, SynthOptions,
    WorkerPool,
};
use phrase_tts::{Error, Result};

#[derive(Parser)]
#[command(name = "phrase-tts", version, about = "Phrase-parallel text-to-speech inference")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Lexicon TSV (word, pos, syllables, phonemes); bundled toy lexicon if omitted.
    #[arg(long, global = true, requires = "phones")]
    lexicon: Option<PathBuf>,
    /// Phoneme inventory, one phoneme per line; the line number is the ID.
    #[arg(long, global = true, requires = "lexicon")]
    phones: Option<PathBuf>,
    /// Seed for weight generation, the synthetic reference mel and benchmark text.
    #[arg(long, global = true, env = "PPSPEECH_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Train the phrase-boundary CRF on a labelled TSV corpus.
    TrainCrf {
        /// Corpus TSV: text, pos, syllables, punct, label; blank line between sentences.
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = TrainConfig::default().epochs)]
        epochs: usize,
        #[arg(long, default_value_t = TrainConfig::default().step)]
        step: f64,
        #[arg(long, default_value_t = TrainConfig::default().l2)]
        l2: f64,
    },
    /// Split text into phrases, one sentence per input line.
    Segment {
        /// Text file; stdin if omitted.
        input: Option<PathBuf>,
        #[command(flatten)]
        crf: CrfArg,
    },
    /// Write a seeded random weight file.
    InitWeights {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Preset::Small)]
        preset: Preset,
    },
    /// Synthesize one mel file per input line plus a JSON-lines manifest.
    Synth {
        /// Text file, one sentence per line; stdin if omitted.
        input: Option<PathBuf>,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        crf: CrfArg,
        #[command(flatten)]
        model: ModelArgs,
        /// Reference mel for the acoustic embedding; a seeded synthetic one if omitted.
        #[arg(long)]
        ref_mel: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        workers: usize,
        #[arg(long, value_enum, default_value_t = SynthMode::Parallel)]
        mode: SynthMode,
        /// Absolute cap on frames per decode (default: 30 per phoneme).
        #[arg(long)]
        max_frames: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        stop_threshold: f32,
    },
    /// Time the sentence-level baseline against phrase-parallel synthesis.
    Bench {
        /// Comma-separated phrase counts.
        #[arg(long, value_delimiter = ',', default_value = "5,10,20,40")]
        groups: Vec<usize>,
        /// CSV output path.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 8)]
        workers: usize,
        #[arg(long, default_value_t = 1)]
        sentences: usize,
        #[arg(long, default_value_t = 2)]
        repeats: usize,
        /// Frames decoded per phoneme; the stop token is ignored.
        #[arg(long, default_value_t = 4)]
        frames_per_phoneme: usize,
    },
}

#[derive(Args)]
struct CrfArg {
    /// CRF model file; a model trained on the bundled corpus if omitted.
    #[arg(long)]
    crf: Option<PathBuf>,
}

#[derive(Args)]
struct ModelArgs {
    /// Weight file; seeded small-preset weights if omitted.
    #[arg(long)]
    weights: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Small,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum SynthMode {
    Parallel,
    ArBaseline,
    Sequential,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numeric() { 3 } else { 2 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let common = &cli.common;
    match cli.command {
        Command::TrainCrf { corpus, out, epochs, step, l2 } => {
            let cfg = TrainConfig { epochs, step, l2, ..TrainConfig::default() };
            cmd_train_crf(&corpus, &out, &cfg)
        }
        Command::Segment { input, crf } => {
            let frontend = load_frontend(common)?;
            let crf = load_crf(&crf)?;
            cmd_segment(input.as_deref(), &frontend, &crf)
        }
        Command::InitWeights { out, preset } => {
            let frontend = load_frontend(common)?;
            cmd_init_weights(&out, preset, &frontend, common.seed)
        }
        Command::Synth {
            input,
            out,
            crf,
            model,
            ref_mel,
            workers,
            mode,
            max_frames,
            stop_threshold,
        } => {
            let frontend = load_frontend(common)?;
            let crf = load_crf(&crf)?;
            let weights = load_weights(&model, &frontend, common.seed)?;
            let reference = match ref_mel {
                Some(p) => read_mel(BufReader::new(File::open(p)?))?,
                None => MelSpectrogram::synthetic(80, common.seed),
            };
            let res = Resources { frontend: &frontend, crf: &crf, weights: &weights, reference_mel: &reference };
            let opts = SynthOptions {
                frame_limit: max_frames.map_or(FrameLimit::default(), FrameLimit::Absolute),
                stop_threshold,
                prenet_dropout: None,
            };
            cmd_synth(input.as_deref(), &out, &res, &opts, mode, workers)
        }
        Command::Bench { groups, out, model, workers, sentences, repeats, frames_per_phoneme } => {
            let frontend = load_frontend(common)?;
            let weights = load_weights(&model, &frontend, common.seed)?;
            let cfg = BenchConfig {
                groups,
                sentences_per_group: sentences,
                repeats,
                workers,
                frames_per_phoneme,
                seed: common.seed,
            };
            cmd_bench(&cfg, &out, &frontend, &weights)
        }
    }
}

fn load_frontend(common: &Common) -> Result<Frontend> {
    match (&common.lexicon, &common.phones) {
        (Some(lex), Some(phones)) => Frontend::load(lex, phones),
        _ => Ok(Frontend::bundled()),
    }
}

fn load_crf(arg: &CrfArg) -> Result<CrfModel> {
    match &arg.crf {
        Some(p) => read_model(BufReader::new(File::open(p)?)),
        None => Ok(train_crf(&parse_corpus(BUNDLED_CORPUS)?, &TrainConfig::default())?.0),
    }
}

fn load_weights(arg: &ModelArgs, frontend: &Frontend, seed: u64) -> Result<ModelWeights> {
    let weights = match &arg.weights {
        Some(p) => read_weights(BufReader::new(File::open(p)?))?,
        None => ModelWeights::generate(ModelConfig::small(frontend.inventory.len()), seed),
    };
    if weights.config().n_phonemes != frontend.inventory.len() {
        return Err(Error::InvalidArgument(format!(
            "weights cover {} phonemes, inventory has {}",
            weights.config().n_phonemes,
            frontend.inventory.len()
        )));
    }
    Ok(weights)
}

fn read_lines(input: Option<&Path>) -> Result<Vec<String>> {
    let mut text = String::new();
    match input {
        Some(p) => text = fs::read_to_string(p)?,
        None => {
            io::stdin().lock().read_to_string(&mut text)?;
        }
    }
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

fn cmd_train_crf(corpus: &Path, out: &Path, cfg: &TrainConfig) -> Result<()> {
    let examples = parse_corpus(&fs::read_to_string(corpus)?)?;
    if examples.is_empty() {
        return Err(Error::EmptyInput);
    }
    let (model, report) = train_crf(&examples, cfg)?;
    let eval = evaluate(&model, &examples)?;
    let mut w = BufWriter::new(File::create(out)?);
    write_model(&model, &mut w)?;
    w.flush()?;
    println!("sentences={} features={}", examples.len(), model.feature_count());
    println!("final_nll={:.6}", report.final_nll);
    println!(
        "train_accuracy={:.4} precision={:.4} recall={:.4} f1={:.4}",
        eval.accuracy, eval.precision, eval.recall, eval.f1
    );
    Ok(())
}

fn cmd_segment(input: Option<&Path>, frontend: &Frontend, crf: &CrfModel) -> Result<()> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    for (n, line) in read_lines(input)?.iter().enumerate() {
        if n > 0 {
            writeln!(out)?;
        }
        let sentence = tokenize(line, &frontend.lexicon)?;
        let phrases = segment_phrases(&sentence, crf)?;
        for p in &phrases {
            let words: Vec<&str> =
                sentence.tokens()[p.start..p.end].iter().map(|t| t.text.as_str()).collect();
            let marker = if p.index_in_sentence + 1 < p.total_in_sentence { " |L3|" } else { "" };
            writeln!(out, "{}{marker}", words.join(" "))?;
        }
    }
    Ok(())
}

fn cmd_init_weights(out: &Path, preset: Preset, frontend: &Frontend, seed: u64) -> Result<()> {
    let n = frontend.inventory.len();
    let config = match preset {
        Preset::Small => ModelConfig::small(n),
        Preset::Full => ModelConfig::new(n),
    };
    let weights = ModelWeights::generate(config, seed);
    let mut w = BufWriter::new(File::create(out)?);
    write_weights(&weights, &mut w)?;
    w.flush()?;
    println!("tensors={} parameters={}", weights.tensors().len(), weights.parameter_count());
    Ok(())
}

#[derive(serde::Serialize)]
struct ManifestLine<'a> {
    sentence: usize,
    file: String,
    phrases: usize,
    frames: usize,
    phrase_frames: Vec<usize>,
    stop_reasons: Vec<phrase_tts::acoustic::StopReason>,
    elapsed_ms: f64,
    text: &'a str,
}

fn cmd_synth(
    input: Option<&Path>,
    out_dir: &Path,
    res: &Resources<'_>,
    opts: &SynthOptions,
    mode: SynthMode,
    workers: usize,
) -> Result<()> {
    let lines = read_lines(input)?;
    if lines.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pool = WorkerPool::new(workers)?;
    fs::create_dir_all(out_dir)?;
    let mut manifest = BufWriter::new(File::create(out_dir.join("manifest.jsonl"))?);
    for (i, line) in lines.iter().enumerate() {
        let sentence = tokenize(line, &res.frontend.lexicon)?;
        let synth = match mode {
            SynthMode::Parallel => synthesize_sentence_parallel(&sentence, res, opts, &pool)?,
            SynthMode::Sequential => synthesize_sentence_sequential(&sentence, res, opts)?,
            SynthMode::ArBaseline => synthesize_sentence_ar_baseline(&sentence, res, opts)?,
        };
        for p in synth.frame_limited() {
            eprintln!("warning: sentence {i} phrase {} reached the frame limit ({} frames)", p.index, p.frames);
        }
        let file = format!("sentence_{i:04}.mel");
        let mut w = BufWriter::new(File::create(out_dir.join(&file))?);
        write_mel(&synth.mel, &mut w)?;
        w.flush()?;
        let entry = ManifestLine {
            sentence: i,
            file,
            phrases: synth.phrases.len(),
            frames: synth.mel.frame_count(),
            phrase_frames: synth.phrases.iter().map(|p| p.frames).collect(),
            stop_reasons: synth.phrases.iter().map(|p| p.stopped_by).collect(),
            elapsed_ms: synth.elapsed.as_secs_f64() * 1e3,
            text: line,
        };
        serde_json::to_writer(&mut manifest, &entry)
            .map_err(|e| Error::InvalidArgument(format!("manifest: {e}")))?;
        writeln!(manifest)?;
        println!("{}: {} phrases, {} frames", entry.file, entry.phrases, entry.frames);
    }
    manifest.flush()?;
    Ok(())
}

fn cmd_bench(cfg: &BenchConfig, out: &Path, frontend: &Frontend, weights: &ModelWeights) -> Result<()> {
    let report = benchmark(cfg, frontend, weights)?;
    report.write_csv(out)?;
    println!("{:>8} {:>12} {:>12} {:>12} {:>8}", "phrases", "mode", "mean_ms", "std_ms", "speedup");
    for r in &report.rows {
        println!(
            "{:>8} {:>12} {:>12.2} {:>12.2} {:>8.2}",
            r.phrase_count,
            r.mode.as_str(),
            r.mean_ms,
            r.std_ms,
            r.speedup
        );
    }
    Ok(())
}
