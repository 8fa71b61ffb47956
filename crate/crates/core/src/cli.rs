//! Command-line front end. Each subcommand is also callable as a library
//! function taking its parsed arguments.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::ablation::{run_ablation, AblationTable};
use crate::config::RunConfig;
use crate::data::{
    gen_synthetic_split, read_dataset_dir, read_f32_grid, read_mask_pgm, resample_bilinear, window_normalize,
    write_dataset_dir, DatasetSplit, Manifest, SplitSpec, Suite, MANIFEST_FILE,
};
use crate::error::{Error, Result};
use crate::geometry::box_from_mask;
use crate::metrics::evaluate_masks;
use crate::perturb::StatsAccumulator;
use crate::rng::{stream, Domain};
use crate::toyseg::{train, ToyModel};

/// Version stamped on every CSV and JSON artifact.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "boxperturb", version, about = "Adaptive bounding-box prompt perturbation toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw perturbed boxes around the bounding box of a mask.
    Perturb(PerturbArgs),
    /// Score a predicted mask against a reference mask.
    Eval(EvalArgs),
    /// Generate a synthetic dataset directory.
    Gen(GenArgs),
    /// Train the toy prompt segmenter.
    Train(TrainArgs),
    /// Train and evaluate every ablation row.
    Ablate(AblateArgs),
    /// Window-normalize and optionally resize an F32G image.
    Preprocess(PreprocessArgs),
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[arg(long)]
    pub mask: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Append a summary comment line with empirical means.
    #[arg(long)]
    pub stats: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long, default_value_t = crate::metrics::DEFAULT_TAU)]
    pub tau: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub suite: Suite,
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = crate::data::synth::DEFAULT_GRID)]
    pub grid: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Explicit `TRAIN,VAL,TEST` counts instead of the 80/10/10 split.
    #[arg(long, value_delimiter = ',')]
    pub split: Option<Vec<usize>>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// A generated dataset directory, or a parent holding one per suite.
    #[arg(long)]
    pub data_dir: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub history: PathBuf,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    /// Parent directory with `standard/` and `tiny/` datasets.
    #[arg(long)]
    pub data_dir: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the config threshold.
    #[arg(long)]
    pub error_dsc_threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], allow_negative_numbers = true)]
    pub window: Vec<f64>,
    #[arg(long, num_args = 2, value_names = ["W", "H"])]
    pub resize: Option<Vec<usize>>,
    #[arg(long)]
    pub out: PathBuf,
}

/// Removes every registered output unless `commit` is called.
#[derive(Default)]
pub struct OutputGuard {
    files: Vec<PathBuf>,
    dirs: Vec<PathBuf>,
    committed: bool,
}

impl OutputGuard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn register(&mut self, path: impl Into<PathBuf>) {
        self.files.push(path.into());
    }

    /// Creates `dir` if needed; a directory created here is removed on failure.
    pub fn create_dir(&mut self, dir: &Path) -> Result<()> {
        if !dir.exists() {
            fs::create_dir_all(dir)?;
            self.dirs.push(dir.to_path_buf());
        }
        Ok(())
    }

    /// Writes through a temporary sibling and renames into place.
    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        self.register(path);
        let tmp = tmp_path(path);
        self.register(&tmp);
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    pub fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        for f in &self.files {
            let _ = fs::remove_file(f);
        }
        for d in self.dirs.iter().rev() {
            let _ = fs::remove_dir_all(d);
        }
    }
}

fn tmp_path(path: &Path) -> PathBuf {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!(".{name}.tmp"))
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

/// `#`-prefixed preamble: schema version then the resolved config.
fn csv_preamble(cfg: Option<&RunConfig>) -> String {
    let mut s = format!("# schema_version = {SCHEMA_VERSION}\n");
    if let Some(cfg) = cfg {
        for (k, v) in cfg.resolved() {
            s.push_str(&format!("# {k} = {v}\n"));
        }
    }
    s
}

fn csv_body<S: AsRef<str>>(header: &[&str], rows: impl IntoIterator<Item = Vec<S>>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        w.write_record(r.iter().map(|c| c.as_ref()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Parses CSV text written by this module, skipping comment lines.
pub fn read_csv_records(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r.records().map(|rec| Ok(rec?.iter().map(String::from).collect())).collect::<Result<_>>()?;
    Ok((header, rows))
}

fn check_csv(text: &str, header: &[&str], rows: usize) -> Result<()> {
    let (h, r) = read_csv_records(text)?;
    if h != header || r.len() != rows {
        return Err(Error::Config("written CSV failed validation".into()));
    }
    Ok(())
}

pub const PERTURB_HEADER: [&str; 10] =
    ["draw", "x_min", "y_min", "x_max", "y_max", "eps1", "eps2", "delta1", "delta2", "resamples"];

pub fn cmd_perturb(args: &PerturbArgs) -> Result<()> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        cfg.train.seed = seed;
    }
    if args.n == 0 {
        return Err(Error::Config("--n must be >= 1".into()));
    }
    let mask = read_mask_pgm(&args.mask)?;
    let bbox = box_from_mask(&mask)?;
    let (w, h) = mask.dims();
    let perturber = cfg.train.perturber();
    let mut rng = stream(cfg.train.seed, Domain::Perturb, 0);
    let mut acc = StatsAccumulator::default();
    let mut rows = Vec::with_capacity(args.n);
    for i in 0..args.n {
        let p = perturber.perturb(&bbox, w, h, &mut rng)?;
        acc.push(&bbox, &p);
        let o = p.draw.offsets;
        let b = p.bbox;
        rows.push(
            [i as f64, b.x_min, b.y_min, b.x_max, b.y_max, o.eps1, o.eps2, o.delta1, o.delta2]
                .iter()
                .map(f64::to_string)
                .chain(std::iter::once(p.resample_count.to_string()))
                .collect::<Vec<_>>(),
        );
    }
    let mut text = csv_preamble(Some(&cfg));
    text.push_str(&format!("# perturber = {}\n# gt_box = {},{},{},{}\n", perturber.kind, bbox.x_min, bbox.y_min, bbox.x_max, bbox.y_max));
    text.push_str(&csv_body(&PERTURB_HEADER, rows)?);
    if args.stats {
        let s = acc.finish();
        text.push_str(&format!(
            "# stats n={} mean_width={} mean_height={} mean_center_x={} mean_center_y={} expand_fraction={} resample_rate={} aspect={}\n",
            s.n,
            s.mean_width,
            s.mean_height,
            s.mean_center_x,
            s.mean_center_y,
            s.expand_fraction,
            s.resample_rate,
            s.mean_width / s.mean_height
        ));
    }
    check_csv(&text, &PERTURB_HEADER, args.n)?;
    let mut guard = OutputGuard::new();
    guard.write(&args.out, text.as_bytes())?;
    guard.commit();
    Ok(())
}

#[derive(Debug, Serialize)]
struct EvalDocument {
    schema_version: u32,
    dsc: f64,
    nsd: f64,
    tau: f64,
    gt_pixels: usize,
    pred_pixels: usize,
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let gt = read_mask_pgm(&args.gt)?;
    let pred = read_mask_pgm(&args.pred)?;
    let report = evaluate_masks(&pred, &gt, args.tau)?;
    let doc = EvalDocument {
        schema_version: SCHEMA_VERSION,
        dsc: report.dsc,
        nsd: report.nsd,
        tau: report.tau,
        gt_pixels: gt.count(),
        pred_pixels: pred.count(),
    };
    let mut guard = OutputGuard::new();
    guard.write(&args.out, (serde_json::to_string_pretty(&doc)? + "\n").as_bytes())?;
    guard.commit();
    Ok(())
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    let split = match args.split.as_deref() {
        None => SplitSpec::default(),
        Some([train, val, test]) => SplitSpec::Counts { train: *train, val: *val, test: *test },
        Some(_) => return Err(Error::Config("--split takes TRAIN,VAL,TEST".into())),
    };
    let data = gen_synthetic_split(args.n, args.suite, args.grid, args.seed, split)?;
    let mut guard = OutputGuard::new();
    guard.create_dir(&args.out_dir)?;
    let m = Manifest::for_split(&data);
    for e in m.train.iter().chain(&m.val).chain(&m.test) {
        guard.register(args.out_dir.join(&e.image));
        guard.register(args.out_dir.join(&e.mask));
    }
    guard.register(args.out_dir.join(MANIFEST_FILE));
    write_dataset_dir(&data, &args.out_dir)?;
    let back = read_dataset_dir(&args.out_dir)?;
    if back.len() != data.len() {
        return Err(Error::SizeMismatch { declared: data.len(), actual: back.len() });
    }
    guard.commit();
    Ok(())
}

/// A dataset directory, or the `suite` subdirectory of a parent.
pub fn locate_dataset(dir: &Path, suite: Suite) -> Result<DatasetSplit> {
    if dir.join(MANIFEST_FILE).exists() {
        return read_dataset_dir(dir);
    }
    let sub = dir.join(suite.as_str());
    if sub.join(MANIFEST_FILE).exists() {
        return read_dataset_dir(sub);
    }
    Err(Error::MissingDataset(dir.to_path_buf()))
}

pub const HISTORY_HEADER: [&str; 4] = ["epoch", "train_loss", "val_loss", "lr"];

pub fn cmd_train(args: &TrainArgs) -> Result<()> {
    let cfg = load_config(args.config.as_deref())?;
    let data = locate_dataset(&args.data_dir, cfg.suite)?;
    let outcome = train(&data, &cfg.train)?;
    let model_text = outcome.model.to_json(&cfg.to_json())?;
    let (reloaded, _) = ToyModel::from_json(&model_text)?;
    if reloaded.weights != outcome.model.weights {
        return Err(Error::Model("model document failed round-trip validation".into()));
    }
    let mut history = csv_preamble(Some(&cfg));
    history.push_str(&format!("# initial_val_loss = {}\n", outcome.initial_val_loss));
    history.push_str(&csv_body(
        &HISTORY_HEADER,
        outcome.history.iter().map(|r| vec![r.epoch.to_string(), r.train_loss.to_string(), r.val_loss.to_string(), r.lr.to_string()]),
    )?);
    check_csv(&history, &HISTORY_HEADER, outcome.history.len())?;
    let mut guard = OutputGuard::new();
    guard.write(&args.out, model_text.as_bytes())?;
    guard.write(&args.history, history.as_bytes())?;
    guard.commit();
    Ok(())
}

pub fn ablation_csv(table: &AblationTable, cfg: &RunConfig) -> Result<String> {
    let o = &table.options;
    let mut text = csv_preamble(Some(cfg));
    text.push_str("# each row replaces the configured perturber with its own\n");
    text.push_str(&format!("# error_rate = fraction of tiny-suite test images with DSC < {}\n", o.error_dsc_threshold));
    text.push_str(&format!(
        "# expand/shrink columns move every prompt edge by {} of the box side (stand-in magnitude)\n",
        o.prompt_fraction
    ));
    text.push_str(&csv_body(&AblationTable::CSV_HEADER, table.csv_rows())?);
    Ok(text)
}

pub fn cmd_ablate(args: &AblateArgs) -> Result<()> {
    let mut cfg = load_config(args.config.as_deref())?;
    if let Some(t) = args.error_dsc_threshold {
        cfg.error_dsc_threshold = t;
        cfg.validate()?;
    }
    let mut suites = Vec::new();
    for suite in [Suite::Standard, Suite::Tiny] {
        let dir = args.data_dir.join(suite.as_str());
        if !dir.join(MANIFEST_FILE).exists() {
            return Err(Error::MissingDataset(dir));
        }
        suites.push(read_dataset_dir(dir)?);
    }
    let table = run_ablation(&suites[0], &suites[1], &cfg.train, &cfg.ablation_options())?;
    let text = ablation_csv(&table, &cfg)?;
    check_csv(&text, &AblationTable::CSV_HEADER, table.records.len())?;
    let mut guard = OutputGuard::new();
    guard.write(&args.out, text.as_bytes())?;
    guard.commit();
    Ok(())
}

pub fn cmd_preprocess(args: &PreprocessArgs) -> Result<()> {
    let [lo, hi] = args.window[..] else {
        return Err(Error::Config("--window takes LO HI".into()));
    };
    let raw = read_f32_grid(&args.input)?;
    let mut image = window_normalize(&raw, lo, hi)?;
    if let Some(size) = &args.resize {
        image = resample_bilinear(&image, size[0], size[1])?;
    }
    let out = image.map(|&v| v as f32);
    let mut guard = OutputGuard::new();
    guard.write(&args.out, &crate::data::encode_f32_grid(&out))?;
    guard.commit();
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Perturb(a) => cmd_perturb(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Train(a) => cmd_train(a),
        Command::Ablate(a) => cmd_ablate(a),
        Command::Preprocess(a) => cmd_preprocess(a),
    }
}

/// Exit code for a failed run: configuration problems count as usage errors.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
