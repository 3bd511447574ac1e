use std::fmt;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, LevelFilter};

use mrqa::distort::{self, DistortionKind, DistortionSpec};
use mrqa::harness::{self, BenchmarkConfig, ImageSet};
use mrqa::image::{load_raster, make_phantom_with_info, save_raster, RasterFormat};
use mrqa::normalize::{pl_fit, PlModel};
use mrqa::quality::{niqe_fit_with, NiqeFitOptions, NiqeModel, SvrModel};
use mrqa::reference::DscClass;
use mrqa::{evaluate, DataRangeMode, Error, ImageGrid, Metric, MetricContext, MetricReport, Normalization};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => f.write_str(msg),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Core(e.into())
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// MR image quality assessment toolkit.
#[derive(Debug, Parser)]
#[command(name = "mrqa", version, about)]
pub struct Cli {
    /// More log output on stderr (repeat for more).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

impl Cli {
    pub fn log_level(&self) -> LevelFilter {
        match self.verbose {
            0 => LevelFilter::Warn,
            1 => LevelFilter::Info,
            _ => LevelFilter::Debug,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a synthetic head phantom.
    Phantom(PhantomArgs),
    /// Normalize a raster.
    Normalize(NormalizeArgs),
    /// Fit a piecewise-linear standardization model on a corpus.
    PlFit(PlFitArgs),
    /// Score an image with one or more metrics, one CSV row per metric.
    Metric(MetricArgs),
    /// Apply a simulated MR distortion.
    Distort(DistortArgs),
    /// Run a benchmark sweep described by a TOML config.
    Bench(BenchArgs),
    /// Fit a NIQE model on pristine images.
    NiqeFit(NiqeFitArgs),
}

#[derive(Debug, Args)]
struct PhantomArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Side length; overridden by --width/--height.
    #[arg(long, default_value_t = 240)]
    size: usize,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Output raster (.npy, .pgm or .csv).
    #[arg(long)]
    out: PathBuf,
    /// Also write the label map (1 lesion, 2 tissue, 0 background).
    #[arg(long)]
    labels: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct NormalizeArgs {
    #[arg(long)]
    input: PathBuf,
    /// none | minmax | cminmax[:p] | zscore | quantile | binning[:B] | pl:<model>
    #[arg(long)]
    norm: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct PlFitArgs {
    /// Training rasters.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, default_value_t = 1.0)]
    p_low: f64,
    #[arg(long, default_value_t = 99.0)]
    p_high: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct MetricArgs {
    /// Reference image; required by reference metrics.
    #[arg(long = "ref")]
    reference: Option<PathBuf>,
    #[arg(long)]
    img: PathBuf,
    /// Comma-separated metric names, e.g. ssim,psnr,niqe.
    #[arg(long, value_parser = parse_metrics)]
    metrics: MetricList,
    #[arg(long, default_value = "none")]
    norm: String,
    /// per-image | pair | dataset | fixed:<v>
    #[arg(long, default_value = "pair")]
    data_range: DataRangeMode,
    #[arg(long)]
    niqe_model: Option<PathBuf>,
    #[arg(long)]
    brisque_model: Option<PathBuf>,
    /// DSC class id; default compares total foreground.
    #[arg(long)]
    dsc_label: Option<u32>,
    /// Print the CSV header first.
    #[arg(long)]
    header: bool,
}

#[derive(Debug, Clone)]
struct MetricList(Vec<Metric>);

fn parse_metrics(text: &str) -> Result<MetricList, String> {
    let metrics = Metric::parse_list(text).map_err(|e| e.to_string())?;
    if metrics.is_empty() {
        return Err("no metrics given".into());
    }
    Ok(MetricList(metrics))
}

#[derive(Debug, Args)]
struct DistortArgs {
    #[arg(long)]
    input: PathBuf,
    /// bias-field | ghosting | stripe | blur | noise | replace | gamma-high |
    /// gamma-low | shift | translation | elastic
    #[arg(long)]
    kind: DistortionKind,
    /// Strength in [1, 5].
    #[arg(long, value_parser = parse_strength)]
    strength: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_strength(text: &str) -> Result<f64, String> {
    let s: f64 = text.parse().map_err(|_| format!("'{text}' is not a number"))?;
    if (distort::MIN_STRENGTH..=distort::MAX_STRENGTH).contains(&s) {
        Ok(s)
    } else {
        Err(format!("strength must lie in [1, 5], got {s}"))
    }
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides output_dir from the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides threads from the config.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct NiqeFitArgs {
    /// Directory of pristine rasters.
    #[arg(long, conflicts_with = "phantoms")]
    corpus: Option<PathBuf>,
    /// Fit on this many generated phantoms instead.
    #[arg(long)]
    phantoms: Option<usize>,
    #[arg(long, default_value_t = 240)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 96)]
    patch_size: usize,
    #[arg(long, default_value_t = 75.0)]
    sharpness_percentile: f64,
    #[arg(long)]
    out: PathBuf,
}

pub fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Phantom(a) => phantom(a),
        Command::Normalize(a) => normalize(a),
        Command::PlFit(a) => pl_fit_cmd(a),
        Command::Metric(a) => metric(a),
        Command::Distort(a) => distort_cmd(a),
        Command::Bench(a) => bench(a),
        Command::NiqeFit(a) => niqe_fit_cmd(a),
    }
}

fn read(path: &Path) -> CliResult<ImageGrid> {
    let format = RasterFormat::from_path(path)?;
    load_raster(path, format).map_err(|e| match e {
        Error::Io(io) => Error::Io(io::Error::new(io.kind(), format!("{}: {io}", path.display()))).into(),
        other => other.into(),
    })
}

fn write(image: &ImageGrid, path: &Path) -> CliResult {
    let format = RasterFormat::from_path(path)?;
    save_raster(image, path, format)?;
    info!("wrote {}", path.display());
    Ok(())
}

/// Syntax errors in a normalization spec are usage errors; a `pl:` model
/// that cannot be read is a data error.
fn parse_norm(spec: &str) -> CliResult<Normalization> {
    Normalization::from_spec(spec).map_err(|e| match e {
        Error::InvalidParameter(msg) => CliError::Usage(msg),
        other => CliError::Core(other),
    })
}

fn phantom(a: PhantomArgs) -> CliResult {
    let width = a.width.unwrap_or(a.size);
    let height = a.height.unwrap_or(a.size);
    let (image, info) = make_phantom_with_info(a.seed, width, height)?;
    write(&image, &a.out)?;
    if let Some(path) = a.labels {
        let labels = info.labels.labels().iter().map(|&l| l as f64).collect();
        write(&image.with_data(labels)?, &path)?;
    }
    Ok(())
}

fn normalize(a: NormalizeArgs) -> CliResult {
    let norm = parse_norm(&a.norm)?;
    let image = read(&a.input)?;
    write(&norm.apply(&image)?, &a.out)
}

fn pl_fit_cmd(a: PlFitArgs) -> CliResult {
    let images = a.inputs.iter().map(|p| read(p)).collect::<CliResult<Vec<_>>>()?;
    let model: PlModel = pl_fit(&images, a.p_low, a.p_high)?;
    model.save(&a.out)?;
    Ok(())
}

fn metric(a: MetricArgs) -> CliResult {
    let norm = parse_norm(&a.norm)?;
    let metrics = a.metrics.0;
    if a.reference.is_none() {
        if let Some(m) = metrics.iter().find(|m| m.is_reference()) {
            return Err(CliError::Usage(format!("{m} needs --ref")));
        }
    }
    if metrics.contains(&Metric::Niqe) && a.niqe_model.is_none() {
        return Err(CliError::Usage("niqe needs --niqe-model".into()));
    }
    if metrics.contains(&Metric::Brisque) && a.brisque_model.is_none() {
        return Err(CliError::Usage("brisque needs --brisque-model".into()));
    }

    let image = norm.apply(&read(&a.img)?)?;
    let reference = match &a.reference {
        Some(p) => Some(norm.apply(&read(p)?)?),
        None => None,
    };
    let ctx = MetricContext {
        data_range: a.data_range,
        dataset_range: None,
        niqe_model: a.niqe_model.as_deref().map(NiqeModel::load).transpose()?,
        brisque_model: a.brisque_model.as_deref().map(SvrModel::load).transpose()?,
        dsc_class: a.dsc_label.map(DscClass::Label),
    };

    // score everything first so a failure prints no partial output
    let label = norm.label();
    let reports = metrics
        .iter()
        .map(|&m| {
            let score = evaluate(m, &image, reference.as_ref(), &ctx)?;
            Ok(MetricReport::new(m, score, a.data_range, &label))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut out = io::stdout().lock();
    if a.header {
        writeln!(out, "{}", MetricReport::CSV_HEADER)?;
    }
    for r in reports {
        writeln!(out, "{}", r.csv_row())?;
    }
    Ok(())
}

fn distort_cmd(a: DistortArgs) -> CliResult {
    let image = read(&a.input)?;
    let spec = DistortionSpec::new(a.kind, a.strength, a.seed)?;
    write(&distort::apply(&image, &spec)?, &a.out)
}

fn bench(a: BenchArgs) -> CliResult {
    let mut config = BenchmarkConfig::load(&a.config).map_err(|e| match e {
        Error::Io(_) => CliError::Core(e),
        other => CliError::Usage(format!("{}: {other}", a.config.display())),
    })?;
    if let Some(out) = a.out {
        config.output_dir = out;
    }
    if let Some(t) = a.threads {
        config.threads = t;
    }
    let result = harness::run_and_write(&config)?;
    for (name, err) in &result.failures {
        log::warn!("{name} skipped: {err}");
    }
    let errors = result.rows.iter().filter(|r| r.score.is_err()).count();
    info!("{} rows, {} error rows", result.rows.len(), errors);
    let mut out = io::stdout().lock();
    for file in ["rows.csv", "medians.csv", "relative.csv", "table.md"] {
        writeln!(out, "{}", config.output_dir.join(file).display())?;
    }
    Ok(())
}

fn niqe_fit_cmd(a: NiqeFitArgs) -> CliResult {
    let set = match (&a.corpus, a.phantoms) {
        (Some(dir), None) => ImageSet::from_dir(dir)?,
        (None, Some(n)) => ImageSet::phantoms(n, a.size, a.seed)?,
        _ => return Err(CliError::Usage("give either --corpus or --phantoms".into())),
    };
    let options = NiqeFitOptions {
        patch_size: a.patch_size,
        sharpness_percentile: a.sharpness_percentile,
    };
    let model = niqe_fit_with(&set.images, &options)?;
    model.save(&a.out)?;
    info!(
        "fitted on {} images, {} patches",
        model.corpus_size, model.patch_count
    );
    Ok(())
}
