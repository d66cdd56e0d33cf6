//! Command-line front end.

use std::collections::HashMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use blockspot_core::blockgen::{generate_blocks, BlockGenConfig, GridHistogramExtractor, ImageDims, TextInstance};
use blockspot_core::crop::crop_block;
use blockspot_core::metrics::{evaluate, pool, EvalConfig, ImageSample, SpottingResult, DEFAULT_THRESHOLD};
use blockspot_core::synth::{synth_sample_with, SynthConfig, GLYPH};
use blockspot_core::tokenizer::{patch_image, resize, INPUT_HEIGHT, INPUT_WIDTH};
use blockspot_core::uvlm::{decode, patches_matrix, DecodeConfig, Executor, MaskKind};
use blockspot_core::{Polygon, RasterImage};
use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::checkpoint::{load_checkpoint, save_checkpoint};
use crate::dataset::{load_annotations, save_annotations, AnnotationRecord};
use crate::error::{Error, Result};
use crate::exec::RayonExecutor;
use crate::image_io::{load_image, save_png};
use crate::report::{write_reports, Protocol};
use crate::toy::{curve_csv, run_toy, ToyConfig};

#[derive(Debug, Parser)]
#[command(name = "blockspot", version, about = "Block-level scene text spotting toolkit")]
pub struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster word-level annotations into text blocks.
    Blockgen(BlockgenArgs),
    /// Cut block (or instance) crops out of annotated images.
    Crop(CropArgs),
    /// Score predictions against ground truth with NS and/or GF.
    Eval(EvalArgs),
    /// Train the toy recognizer on synthetic glyph images.
    TrainToy(TrainToyArgs),
    /// Transcribe an image with a trained checkpoint.
    Decode(DecodeArgs),
    /// Write a synthetic image corpus with annotations.
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct BlockgenArgs {
    #[arg(long, value_name = "JSONL")]
    pub input: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub images: PathBuf,
    #[arg(long, value_name = "JSONL")]
    pub output: PathBuf,
    /// DBSCAN neighborhood radius.
    #[arg(long, value_parser = positive_f64)]
    pub eps: Option<f64>,
    #[arg(long, value_parser = positive_usize)]
    pub min_pts: Option<usize>,
    /// Weight of position features against visual features.
    #[arg(long, value_parser = non_negative_f64)]
    pub lambda: Option<f64>,
    /// Outline points per instance.
    #[arg(long, value_parser = clap::value_parser!(u32).range(4..))]
    pub k: Option<u32>,
}

#[derive(Debug, Args)]
pub struct CropArgs {
    #[arg(long, value_name = "JSONL")]
    pub input: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub images: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, value_name = "JSONL")]
    pub gt: PathBuf,
    #[arg(long, value_name = "JSONL")]
    pub pred: PathBuf,
    #[arg(long, value_enum)]
    pub protocol: Option<Protocol>,
    /// GF overlap threshold, in (0, 1).
    #[arg(long, value_parser = unit_open)]
    pub threshold: Option<f64>,
    /// Compare transcriptions verbatim.
    #[arg(long)]
    pub no_normalize: bool,
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainToyArgs {
    #[arg(long, value_parser = positive_usize)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long, value_parser = parse_mask)]
    pub mask: Option<MaskKind>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = positive_usize)]
    pub height: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub width: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub max_words: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub max_word_len: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub layers: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub heads: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub d_model: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub d_ff: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub max_len: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub batch_size: Option<usize>,
    #[arg(long, value_parser = non_negative_f64)]
    pub lr: Option<f64>,
    /// Steps between training-set evaluations (0 disables them).
    #[arg(long)]
    pub eval_every: Option<usize>,
    /// Stop once training accuracy reaches this value.
    #[arg(long, value_parser = unit_closed, conflicts_with = "no_early_stop")]
    pub target_accuracy: Option<f64>,
    #[arg(long)]
    pub no_early_stop: bool,
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecodeArgs {
    #[arg(long, value_name = "FILE")]
    pub checkpoint: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub image: PathBuf,
    /// Beam width; 1 decodes greedily.
    #[arg(long, value_parser = positive_usize)]
    pub beam: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub max_new_tokens: Option<usize>,
    #[arg(long, value_parser = non_negative_f64)]
    pub length_penalty: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub count: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "DIR")]
    pub out_dir: PathBuf,
    #[arg(long, value_parser = positive_usize)]
    pub height: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub width: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub max_words: Option<usize>,
    #[arg(long, value_parser = positive_usize)]
    pub max_word_len: Option<usize>,
}

/// Config file layout; every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub blockgen: BlockgenFile,
    pub eval: EvalFile,
    pub toy: ToyConfig,
    pub decode: DecodeFile,
    pub synth: SynthFile,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockgenFile {
    pub eps: Option<f64>,
    pub min_pts: Option<usize>,
    pub lambda: Option<f64>,
    pub k: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalFile {
    pub protocol: Option<Protocol>,
    pub threshold: Option<f64>,
    pub normalize: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecodeFile {
    pub beam: Option<usize>,
    pub max_new_tokens: Option<usize>,
    pub length_penalty: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthFile {
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub height: Option<usize>,
    pub width: Option<usize>,
    pub max_words: Option<usize>,
    pub max_word_len: Option<usize>,
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v > 0.0 => Ok(v),
        _ => Err(format!("{s:?} is not a positive number")),
    }
}

fn non_negative_f64(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(v),
        _ => Err(format!("{s:?} is not a non-negative number")),
    }
}

fn unit_open(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if v > 0.0 && v < 1.0 => Ok(v),
        _ => Err(format!("{s:?} is not in (0, 1)")),
    }
}

fn unit_closed(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(v) if (0.0..=1.0).contains(&v) => Ok(v),
        _ => Err(format!("{s:?} is not in [0, 1]")),
    }
}

fn positive_usize(s: &str) -> std::result::Result<usize, String> {
    match s.parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(format!("{s:?} is not a positive integer")),
    }
}

fn parse_mask(s: &str) -> std::result::Result<MaskKind, String> {
    MaskKind::from_name(s).ok_or_else(|| format!("unknown mask {s:?} (expected uvlm or causal)"))
}

fn load_config(path: Option<&Path>) -> Result<FileConfig> {
    let Some(path) = path else {
        return Ok(FileConfig::default());
    };
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Usage(format!("{}: {e}", path.display())))
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Errors are reported on stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let file = load_config(cli.config.as_deref())?;
    let exec = RayonExecutor::from_env();
    match cli.command {
        Command::Blockgen(a) => cmd_blockgen(&a, &file.blockgen, &exec),
        Command::Crop(a) => cmd_crop(&a, &exec),
        Command::Eval(a) => cmd_eval(&a, &file.eval, &exec),
        Command::TrainToy(a) => cmd_train_toy(&a, file.toy, &exec),
        Command::Decode(a) => cmd_decode(&a, &file.decode),
        Command::Synth(a) => cmd_synth(&a, &file.synth, &exec),
    }
}

fn blockgen_config(a: &BlockgenArgs, f: &BlockgenFile) -> Result<BlockGenConfig> {
    let d = BlockGenConfig::default();
    let cfg = BlockGenConfig {
        eps: a.eps.or(f.eps).unwrap_or(d.eps),
        min_pts: a.min_pts.or(f.min_pts).unwrap_or(d.min_pts),
        lambda: a.lambda.or(f.lambda).unwrap_or(d.lambda),
        k: a.k.map(|k| k as usize).or(f.k).unwrap_or(d.k),
        d: d.d,
    };
    cfg.validate().map_err(|e| Error::Usage(e.to_string()))?;
    Ok(cfg)
}

/// Loads a record's image and checks it against the declared size.
fn record_image(r: &AnnotationRecord, images: &Path) -> Result<RasterImage> {
    let path = r.image_path(images);
    let img = load_image(&path)?;
    if img.width() != r.width || img.height() != r.height {
        return Err(Error::Image {
            path,
            message: format!(
                "image is {}x{} but the record declares {}x{}",
                img.width(),
                img.height(),
                r.width,
                r.height
            ),
        });
    }
    Ok(img)
}

pub fn cmd_blockgen<E: Executor>(a: &BlockgenArgs, f: &BlockgenFile, exec: &E) -> Result<()> {
    let cfg = blockgen_config(a, f)?;
    let records = load_annotations(&a.input)?;
    let results = exec.map(records.len(), |i| -> Result<AnnotationRecord> {
        let r = &records[i];
        let img = record_image(r, &a.images)?;
        let blocks = generate_blocks(
            &img,
            ImageDims::new(r.width, r.height),
            &r.instances,
            &cfg,
            &GridHistogramExtractor,
        )
        .map_err(|source| Error::BlockGen { record: i + 1, source })?;
        Ok(AnnotationRecord {
            blocks: Some(blocks),
            ..r.clone()
        })
    });
    let out = results.into_iter().collect::<Result<Vec<_>>>()?;
    save_annotations(&out, &a.output)?;
    let blocks: usize = out.iter().map(|r| r.blocks.as_ref().map_or(0, Vec::len)).sum();
    println!("{} records, {} blocks", out.len(), blocks);
    Ok(())
}

/// Regions cut by `crop`: non-ignored blocks when present, else non-ignored
/// instances.
fn crop_regions(r: &AnnotationRecord) -> Vec<(Polygon, String)> {
    match &r.blocks {
        Some(bs) => bs.iter().filter(|b| !b.ignore).map(|b| (b.polygon.clone(), b.text.clone())).collect(),
        None => r
            .instances
            .iter()
            .filter(|t| !t.ignore)
            .map(|t| (t.polygon.clone(), t.text.clone()))
            .collect(),
    }
}

pub fn cmd_crop<E: Executor>(a: &CropArgs, exec: &E) -> Result<()> {
    let records = load_annotations(&a.input)?;
    let crops_dir = a.out_dir.join("crops");
    fs::create_dir_all(&crops_dir).map_err(|e| Error::io(&crops_dir, e))?;
    let full = Polygon::rect(0.0, 0.0, INPUT_WIDTH as f64, INPUT_HEIGHT as f64).expect("canvas rectangle");
    let per_record = exec.map(records.len(), |i| -> Result<Vec<AnnotationRecord>> {
        let r = &records[i];
        let img = record_image(r, &a.images)?;
        crop_regions(r)
            .into_iter()
            .enumerate()
            .map(|(j, (poly, text))| {
                let crop = crop_block(&img, &poly)?;
                let name = format!("crops/{i:05}_{j:03}.png");
                save_png(&crop, &a.out_dir.join(&name))?;
                Ok(AnnotationRecord {
                    image: name,
                    width: INPUT_WIDTH,
                    height: INPUT_HEIGHT,
                    instances: vec![TextInstance::new(full.clone(), text, false)],
                    blocks: None,
                })
            })
            .collect()
    });
    let mut out = Vec::new();
    for r in per_record {
        out.extend(r?);
    }
    save_annotations(&out, &a.out_dir.join("crops.jsonl"))?;
    println!("{} crops", out.len());
    Ok(())
}

/// Predictions of a record: its blocks when present, else its instances.
/// Ignored entries are dropped.
fn predictions(r: &AnnotationRecord) -> Vec<SpottingResult> {
    crop_regions(r).into_iter().map(|(p, t)| SpottingResult::new(p, t)).collect()
}

/// Pairs ground truth and predictions by image path. Ground-truth images
/// without a prediction record get no predictions.
pub fn pair_records(gt: &[AnnotationRecord], pred: &[AnnotationRecord], pred_path: &Path) -> Result<Vec<ImageSample>> {
    let mut by_image: HashMap<&str, &AnnotationRecord> = HashMap::new();
    for r in pred {
        if by_image.insert(r.image.as_str(), r).is_some() {
            return Err(Error::Usage(format!("{}: duplicate image {:?}", pred_path.display(), r.image)));
        }
    }
    let mut seen = std::collections::HashSet::new();
    for r in gt {
        if !seen.insert(r.image.as_str()) {
            return Err(Error::Usage(format!("duplicate ground-truth image {:?}", r.image)));
        }
    }
    if let Some(r) = pred.iter().find(|r| !seen.contains(r.image.as_str())) {
        return Err(Error::Usage(format!(
            "{}: prediction for unknown image {:?}",
            pred_path.display(),
            r.image
        )));
    }
    Ok(gt
        .iter()
        .map(|g| ImageSample {
            gt: g.instances.clone(),
            pred: by_image.get(g.image.as_str()).map(|p| predictions(p)).unwrap_or_default(),
        })
        .collect())
}

pub fn cmd_eval<E: Executor>(a: &EvalArgs, f: &EvalFile, exec: &E) -> Result<()> {
    let protocol = a.protocol.or(f.protocol).unwrap_or(Protocol::Both);
    let cfg = EvalConfig {
        threshold: a.threshold.or(f.threshold).unwrap_or(DEFAULT_THRESHOLD),
        normalize: !a.no_normalize && f.normalize.unwrap_or(true),
    };
    if !(cfg.threshold > 0.0 && cfg.threshold < 1.0) {
        return Err(Error::Usage(format!("threshold {} is not in (0, 1)", cfg.threshold)));
    }
    let gt = load_annotations(&a.gt)?;
    let pred = load_annotations(&a.pred)?;
    let samples = pair_records(&gt, &pred, &a.pred)?;
    let per_image = exec.map(samples.len(), |i| {
        evaluate(std::slice::from_ref(&samples[i]), &cfg).map(|r| r.per_image.into_iter().next().unwrap_or_default())
    });
    let per_image = per_image.into_iter().collect::<std::result::Result<Vec<_>, _>>()?;
    let report = pool(&per_image, cfg.threshold);
    let images: Vec<String> = gt.iter().map(|r| r.image.clone()).collect();
    write_reports(&a.out_dir, &report, &images, protocol)?;
    print!("{}", crate::report::report_text(&report, images.len(), protocol));
    Ok(())
}

pub fn toy_config(a: &TrainToyArgs, file: ToyConfig) -> Result<ToyConfig> {
    let cfg = ToyConfig {
        samples: a.samples.unwrap_or(file.samples),
        steps: a.steps.unwrap_or(file.steps),
        mask: a.mask.unwrap_or(file.mask),
        seed: a.seed.unwrap_or(file.seed),
        height: a.height.unwrap_or(file.height),
        width: a.width.unwrap_or(file.width),
        max_words: a.max_words.unwrap_or(file.max_words),
        max_word_len: a.max_word_len.unwrap_or(file.max_word_len),
        layers: a.layers.unwrap_or(file.layers),
        heads: a.heads.unwrap_or(file.heads),
        d_model: a.d_model.unwrap_or(file.d_model),
        d_ff: a.d_ff.unwrap_or(file.d_ff),
        max_len: a.max_len.unwrap_or(file.max_len),
        batch_size: a.batch_size.unwrap_or(file.batch_size),
        lr: a.lr.unwrap_or(file.lr),
        eval_every: a.eval_every.unwrap_or(file.eval_every),
        target_accuracy: if a.no_early_stop {
            None
        } else {
            a.target_accuracy.or(file.target_accuracy)
        },
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn cmd_train_toy<E: Executor>(a: &TrainToyArgs, file: ToyConfig, exec: &E) -> Result<()> {
    let cfg = toy_config(a, file)?;
    let run = run_toy(&cfg, exec, |p| {
        eprintln!("step {:>5}  loss {:.6}  accuracy {:.4}", p.step, p.loss, p.accuracy)
    })?;
    fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    let ckpt = a.out_dir.join("model.ckpt");
    save_checkpoint(&run.checkpoint, &ckpt)?;
    let csv = a.out_dir.join("loss_curve.csv");
    fs::write(&csv, curve_csv(&run.report.curve)).map_err(|e| Error::io(&csv, e))?;
    let last = run.report.curve.last();
    println!(
        "mask {} steps {} final_loss {} accuracy {} steps_to_95 {}",
        cfg.mask.name(),
        run.report.batch_losses.len(),
        last.map_or(f64::NAN, |p| p.loss),
        last.map_or(f64::NAN, |p| p.accuracy),
        run.steps_to(0.95).map_or("none".to_string(), |s| s.to_string())
    );
    Ok(())
}

/// Turns an arbitrary image into the checkpoint's patch matrix.
pub fn preprocess(img: &RasterImage, input: [usize; 2], patch: [usize; 2], channels: usize) -> Result<blockspot_core::uvlm::Matrix> {
    let img = match channels {
        3 => img.to_rgb(),
        _ => {
            let data = (0..img.height())
                .flat_map(|y| (0..img.width()).map(move |x| (x, y)))
                .map(|(x, y)| img.pixel(x, y).iter().sum::<f64>() / img.channels() as f64)
                .collect();
            RasterImage::new(img.width(), img.height(), 1, data)?
        }
    };
    let img = if [img.height(), img.width()] == input {
        img
    } else {
        resize(&img, input[0], input[1])?
    };
    Ok(patches_matrix(&patch_image(&img, patch[0], patch[1])?))
}

pub fn cmd_decode(a: &DecodeArgs, f: &DecodeFile) -> Result<()> {
    let ck = load_checkpoint(&a.checkpoint)?;
    let img = load_image(&a.image)?;
    let channels = ck.params.hyper.patch_dim / (ck.patch[0] * ck.patch[1]);
    let patches = preprocess(&img, ck.input, ck.patch, channels)?;
    let d = DecodeConfig::default();
    let cfg = DecodeConfig {
        beam_width: a.beam.or(f.beam).unwrap_or(d.beam_width),
        max_new_tokens: a.max_new_tokens.or(f.max_new_tokens).unwrap_or(d.max_new_tokens),
        length_penalty: a.length_penalty.or(f.length_penalty).unwrap_or(d.length_penalty),
    };
    if cfg.beam_width == 0 || cfg.max_new_tokens == 0 {
        return Err(Error::Usage("beam and max_new_tokens must be positive".into()));
    }
    let out = decode(&ck.params, &patches, &ck.vocab, &cfg)?;
    println!("{}", out.text);
    Ok(())
}

fn synth_config(a: &SynthArgs, f: &SynthFile) -> SynthConfig {
    let d = SynthConfig::default();
    SynthConfig {
        height: a.height.or(f.height).unwrap_or(d.height),
        width: a.width.or(f.width).unwrap_or(d.width),
        max_words: a.max_words.or(f.max_words).unwrap_or(d.max_words),
        max_word_len: a.max_word_len.or(f.max_word_len).unwrap_or(d.max_word_len),
    }
}

/// One instance per word, boxed around the glyph cells it occupies.
fn word_instances(text: &str, cfg: &SynthConfig) -> Vec<TextInstance> {
    let cols = cfg.width / GLYPH;
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    while start < chars.len() {
        let end = chars[start..].iter().position(|&c| c == ' ').map_or(chars.len(), |p| start + p);
        if end > start {
            let (r0, r1) = (start / cols, (end - 1) / cols);
            let (x0, x1) = if r0 == r1 { (start % cols, (end - 1) % cols + 1) } else { (0, cols) };
            let poly = Polygon::rect(
                (x0 * GLYPH) as f64,
                (r0 * GLYPH) as f64,
                (x1 * GLYPH) as f64,
                ((r1 + 1) * GLYPH) as f64,
            )
            .expect("non-empty cell range");
            out.push(TextInstance::new(poly, chars[start..end].iter().collect::<String>(), false));
        }
        start = end + 1;
    }
    out
}

pub fn cmd_synth<E: Executor>(a: &SynthArgs, f: &SynthFile, exec: &E) -> Result<()> {
    let cfg = synth_config(a, f);
    let count = a.count.or(f.count).unwrap_or(100);
    let seed = a.seed.or(f.seed).unwrap_or(0);
    synth_sample_with(seed, &cfg).map_err(|e| Error::Usage(e.to_string()))?;
    let images = a.out_dir.join("images");
    fs::create_dir_all(&images).map_err(|e| Error::io(&images, e))?;
    let results = exec.map(count, |i| -> Result<AnnotationRecord> {
        let s = synth_sample_with(seed.wrapping_add(i as u64), &cfg)?;
        let name = format!("images/{i:05}.png");
        save_png(&s.image, &a.out_dir.join(&name))?;
        Ok(AnnotationRecord {
            image: name,
            width: cfg.width,
            height: cfg.height,
            instances: word_instances(&s.text, &cfg),
            blocks: None,
        })
    });
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;
    save_annotations(&records, &a.out_dir.join("synth.jsonl"))?;
    println!("{} samples", records.len());
    Ok(())
}
