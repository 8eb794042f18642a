//! Command-line front end.
//!
//! Every command validates its flags before touching the file system,
//! writes outputs atomically, and leaves a `.manifest` file next to each
//! output recording the flags, the crate version and the SHA-256 of every
//! input and output file.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::codebook::{Codebook, CodebookParams, DEFAULT_K};
use crate::descriptors::{describe_samples, Descriptor, DescriptorConfig, DescriptorKind};
use crate::error::Error;
use crate::numfmt::atomic_write;
use crate::recognition::{
    build_model, classify_bow, classify_iclap, classify_icp3, evaluate_sweep, EvalConfig, Method,
    ObjectModel, SubsetMode,
};
use crate::registration::{IcpParams, InitialGuess};
use crate::synth::{extended_catalog, generate_dataset, standard_catalog, ExplorationSpec};
use crate::tactile::{parse_exploration, Dataset, Exploration};

const MODEL_INDEX: &str = "index.txt";
const MODEL_EXT: &str = "model";

#[derive(Debug, Parser)]
#[command(name = "iclap", version, about = "Tactile object recognition with iterative closest labeled point")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate the synthetic benchmark dataset.
    Synth(SynthArgs),
    /// Fit a k-means codebook on dataset descriptors.
    Dictionary(DictionaryArgs),
    /// Build one reference model per object.
    Models(ModelsArgs),
    /// Classify one exploration file against saved models.
    Classify(ClassifyArgs),
    /// Leave-one-exploration-out recognition rate against touch count.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Catalog size: 10 (standard) or 20 (extended).
    #[arg(long, default_value_t = 10, value_parser = parse_catalog_size)]
    pub objects: usize,
    #[arg(long, default_value_t = 5)]
    pub explorations: usize,
    #[arg(long, default_value_t = 60)]
    pub touches: usize,
    #[arg(long, default_value_t = 0.5)]
    pub position_noise: f64,
    #[arg(long, default_value_t = 0.02)]
    pub pressure_noise: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DescriptorArg {
    Raw,
    Hu,
    Zernike,
}

impl From<DescriptorArg> for DescriptorKind {
    fn from(d: DescriptorArg) -> Self {
        match d {
            DescriptorArg::Raw => DescriptorKind::RawMoments,
            DescriptorArg::Hu => DescriptorKind::HuMoments,
            DescriptorArg::Zernike => DescriptorKind::ZernikeMoments,
        }
    }
}

#[derive(Debug, Args)]
pub struct DescriptorArgs {
    #[arg(long, value_enum, default_value_t = DescriptorArg::Zernike)]
    pub descriptor: DescriptorArg,
    #[arg(long, default_value_t = 4)]
    pub zernike_order: usize,
    /// Scale every frame to unit total pressure before describing it.
    #[arg(long)]
    pub normalize_pressure: bool,
}

impl DescriptorArgs {
    fn config(&self) -> DescriptorConfig {
        DescriptorConfig {
            kind: self.descriptor.into(),
            zernike_max_order: self.zernike_order,
            normalize_pressure: self.normalize_pressure,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Centroid,
    Identity,
}

#[derive(Debug, Args)]
pub struct IcpArgs {
    #[arg(long, default_value_t = 50)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub abs_tol: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub rel_tol: f64,
    #[arg(long, value_enum, default_value_t = InitArg::Centroid)]
    pub init: InitArg,
}

impl IcpArgs {
    fn params(&self) -> IcpParams {
        IcpParams {
            max_iters: self.max_iters,
            abs_tolerance: self.abs_tol,
            rel_change_threshold: self.rel_tol,
            init: match self.init {
                InitArg::Centroid => InitialGuess::CentroidAlignment,
                InitArg::Identity => InitialGuess::Identity,
            },
        }
    }
}

#[derive(Debug, Args)]
pub struct DictionaryArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[command(flatten)]
    pub descriptor: DescriptorArgs,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 100)]
    pub kmeans_iters: usize,
    /// Standardize descriptor dimensions before clustering.
    #[arg(long)]
    pub standardize: bool,
    /// Exploration id (file stem) to leave out of training; repeatable.
    #[arg(long)]
    pub exclude: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ModelsArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub codebook: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    pub w_scale: f64,
    #[arg(long)]
    pub normalize_pressure: bool,
    #[arg(long)]
    pub exclude: Vec<String>,
    /// Output directory; receives one `<object_id>.model` per object.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[arg(long)]
    pub models: PathBuf,
    /// Required by the iclap and bow methods.
    #[arg(long)]
    pub codebook: Option<PathBuf>,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::Iclap)]
    pub method: MethodArg,
    /// Use only this many touches of the test file, drawn at random.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub normalize_pressure: bool,
    #[command(flatten)]
    pub icp: IcpArgs,
    /// Report file; printed to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Iclap,
    Icp3,
    Bow,
    All,
}

impl MethodArg {
    fn methods(self) -> Vec<Method> {
        match self {
            MethodArg::Iclap => vec![Method::Iclap],
            MethodArg::Icp3 => vec![Method::Icp3],
            MethodArg::Bow => vec![Method::Bow],
            MethodArg::All => Method::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SubsetArg {
    Random,
    Prefix,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, value_enum, default_value_t = MethodArg::All)]
    pub method: MethodArg,
    /// Touch counts: `a..b` (inclusive) or a comma-separated list.
    #[arg(long, default_value = "1..20", value_parser = parse_touch_counts)]
    pub m: TouchCounts,
    #[arg(long, default_value_t = 5)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_K)]
    pub k: usize,
    #[arg(long)]
    pub standardize: bool,
    #[arg(long, default_value_t = 1.0)]
    pub w_scale: f64,
    #[command(flatten)]
    pub descriptor: DescriptorArgs,
    #[command(flatten)]
    pub icp: IcpArgs,
    #[arg(long, value_enum, default_value_t = SubsetArg::Random)]
    pub subset: SubsetArg,
    /// Test each object against its own training data.
    #[arg(long)]
    pub sanity: bool,
    /// Also write per-method confusion matrices to this file.
    #[arg(long)]
    pub confusion: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_catalog_size(s: &str) -> Result<usize, String> {
    match s {
        "10" => Ok(10),
        "20" => Ok(20),
        _ => Err("catalog size must be 10 or 20".into()),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TouchCounts(pub Vec<usize>);

pub fn parse_touch_counts(s: &str) -> Result<TouchCounts, String> {
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| format!("'{t}' is not a non-negative integer"))
    };
    let values = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (parse(a)?, parse(b)?);
        if a > b {
            return Err(format!("empty range {s}"));
        }
        (a..=b).collect()
    } else {
        s.split(',').map(parse).collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() || values.contains(&0) {
        return Err("touch counts must be positive".into());
    }
    Ok(TouchCounts(values))
}

/// Failure of a CLI run, carrying its exit status.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Pipeline(#[from] Error),
}

impl CliError {
    /// 2 for bad flags, 3 for missing inputs, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Pipeline(Error::MissingInput(_)) => 3,
            CliError::Pipeline(_) => 1,
        }
    }
}

fn usage(e: Error) -> CliError {
    match e {
        Error::InvalidArgument(msg) => CliError::Usage(msg),
        other => CliError::Pipeline(other),
    }
}

fn check(ok: bool, msg: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(msg.to_string()))
    }
}

fn check_descriptor(cfg: &DescriptorConfig) -> Result<(), CliError> {
    check(
        cfg.kind != DescriptorKind::ZernikeMoments || cfg.zernike_max_order > 0,
        "--zernike-order must be positive",
    )
}

fn check_w_scale(w: f64) -> Result<(), CliError> {
    check(w.is_finite() && w >= 0.0, "--w-scale must be finite and >= 0")
}

fn require_exists(path: &Path) -> Result<(), CliError> {
    if path.exists() {
        Ok(())
    } else {
        Err(Error::MissingInput(path.to_path_buf()).into())
    }
}

/// Dispatches one parsed command line.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Synth(a) => synth(a),
        Command::Dictionary(a) => dictionary(a),
        Command::Models(a) => models(a),
        Command::Classify(a) => classify(a),
        Command::Evaluate(a) => evaluate(a),
    }
}

/// Provenance record written beside every output.
struct Manifest {
    text: String,
}

impl Manifest {
    fn new(command: &str, config: &impl std::fmt::Debug) -> Self {
        Self {
            text: format!("command {command}\nversion {}\nconfig {config:?}\n", env!("CARGO_PKG_VERSION")),
        }
    }

    fn file(&mut self, role: &str, path: &Path, bytes: &[u8]) {
        let digest = hex::encode(Sha256::digest(bytes));
        let _ = writeln!(self.text, "{role} {} sha256:{digest}", path.display());
    }

    fn input(&mut self, path: &Path) -> Result<Vec<u8>, CliError> {
        let bytes = fs::read(path).map_err(|e| {
            if e.kind() == std::io::ErrorKind::NotFound {
                Error::MissingInput(path.to_path_buf())
            } else {
                Error::Io {
                    context: format!("reading {}", path.display()),
                    source: e,
                }
            }
        })?;
        self.file("input", path, &bytes);
        Ok(bytes)
    }

    fn dataset(&mut self, root: &Path) -> Result<Dataset, CliError> {
        let ds = Dataset::load(root)?;
        self.input(&root.join("objects.txt"))?;
        for obj in &ds.objects {
            for (eid, _) in &obj.explorations {
                self.input(&root.join(&obj.object_id).join(format!("{eid}.touches")))?;
            }
        }
        Ok(ds)
    }

    fn write_output(&mut self, path: &Path, bytes: &[u8]) -> Result<(), CliError> {
        atomic_write(path, bytes)?;
        self.file("output", path, bytes);
        Ok(())
    }

    fn finish(self, path: &Path) -> Result<(), CliError> {
        atomic_write(path, self.text.as_bytes())?;
        Ok(())
    }
}

fn manifest_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".manifest");
    out.with_file_name(name)
}

fn synth(a: &SynthArgs) -> Result<(), CliError> {
    let base = ExplorationSpec {
        n_touches: a.touches,
        position_noise: a.position_noise,
        pressure_noise: a.pressure_noise,
        ..ExplorationSpec::default()
    };
    base.validate().map_err(usage)?;
    check(a.explorations > 0, "--explorations must be positive")?;
    let catalog = if a.objects == 20 { extended_catalog() } else { standard_catalog() };
    let ds = generate_dataset(&catalog, a.seed, a.explorations, &base)?;
    ds.write(&a.out)?;

    let mut manifest = Manifest::new("synth", a);
    let _ = writeln!(manifest.text, "seed {}", a.seed);
    let listing = a.out.join("objects.txt");
    let bytes = fs::read(&listing).map_err(|e| Error::io(format!("reading {}", listing.display()), e))?;
    manifest.file("output", &listing, &bytes);
    for obj in &ds.objects {
        for (eid, _) in &obj.explorations {
            let p = a.out.join(&obj.object_id).join(format!("{eid}.touches"));
            let bytes = fs::read(&p).map_err(|e| Error::io(format!("reading {}", p.display()), e))?;
            manifest.file("output", &p, &bytes);
        }
    }
    manifest.finish(&a.out.join("manifest.txt"))
}

fn training_explorations<'a>(ds: &'a Dataset, exclude: &[String]) -> Vec<Vec<&'a Exploration>> {
    ds.objects
        .iter()
        .map(|o| {
            o.explorations
                .iter()
                .filter(|(id, _)| !exclude.contains(id))
                .map(|(_, e)| e)
                .collect()
        })
        .collect()
}

fn dictionary(a: &DictionaryArgs) -> Result<(), CliError> {
    let cfg = a.descriptor.config();
    check_descriptor(&cfg)?;
    check(a.k > 0, "--k must be positive")?;
    check(a.kmeans_iters > 0, "--kmeans-iters must be positive")?;
    require_exists(&a.dataset)?;

    let mut manifest = Manifest::new("dictionary", a);
    let ds = manifest.dataset(&a.dataset)?;
    let descriptors: Vec<Descriptor> = training_explorations(&ds, &a.exclude)
        .iter()
        .flatten()
        .flat_map(|e| describe_samples(e.samples(), &cfg).entries)
        .map(|(d, _)| d)
        .collect();
    let params = CodebookParams {
        k: a.k,
        seed: a.seed,
        max_iters: a.kmeans_iters,
        standardize: a.standardize,
    };
    let cb = Codebook::fit(&descriptors, &params)?;
    let _ = writeln!(manifest.text, "seed {}", a.seed);
    manifest.write_output(&a.out, cb.to_text().as_bytes())?;
    manifest.finish(&manifest_path(&a.out))
}

fn load_codebook(manifest: &mut Manifest, path: &Path) -> Result<Codebook, CliError> {
    let bytes = manifest.input(path)?;
    let text = String::from_utf8(bytes).map_err(|_| Error::invalid(format!("{} is not UTF-8", path.display())))?;
    Ok(Codebook::from_text(&text)?)
}

fn models(a: &ModelsArgs) -> Result<(), CliError> {
    check_w_scale(a.w_scale)?;
    require_exists(&a.dataset)?;
    require_exists(&a.codebook)?;

    let mut manifest = Manifest::new("models", a);
    let cb = load_codebook(&mut manifest, &a.codebook)?;
    let mut cfg = cb.descriptor_config();
    cfg.normalize_pressure = a.normalize_pressure;
    let ds = manifest.dataset(&a.dataset)?;
    let mut index = format!("w_scale {}\n", crate::numfmt::fmt_f64(a.w_scale));
    for (obj, exps) in ds.objects.iter().zip(training_explorations(&ds, &a.exclude)) {
        let model = build_model(&exps, &cb, &cfg, a.w_scale)?;
        let path = a.out.join(format!("{}.{MODEL_EXT}", obj.object_id));
        manifest.write_output(&path, model.to_text().as_bytes())?;
        index.push_str(&obj.object_id);
        index.push('\n');
    }
    manifest.write_output(&a.out.join(MODEL_INDEX), index.as_bytes())?;
    manifest.finish(&a.out.join("manifest.txt"))
}

/// Models in index order together with the w scale they were built with.
fn load_models(manifest: &mut Manifest, dir: &Path) -> Result<(Vec<ObjectModel>, f64), CliError> {
    let index_path = dir.join(MODEL_INDEX);
    let index = String::from_utf8(manifest.input(&index_path)?)
        .map_err(|_| Error::invalid(format!("{} is not UTF-8", index_path.display())))?;
    let mut w_scale = None;
    let mut models = Vec::new();
    for (i, line) in index.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(v) = line.strip_prefix("w_scale ") {
            w_scale = Some(
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::parse(i + 1, format!("bad w_scale '{v}'")))?,
            );
            continue;
        }
        let path = dir.join(format!("{line}.{MODEL_EXT}"));
        let text = String::from_utf8(manifest.input(&path)?)
            .map_err(|_| Error::invalid(format!("{} is not UTF-8", path.display())))?;
        models.push(ObjectModel::from_text(&text)?);
    }
    let w_scale = w_scale.ok_or_else(|| Error::parse(1, "model index lacks a w_scale line"))?;
    if models.is_empty() {
        return Err(Error::invalid("model index lists no objects").into());
    }
    Ok((models, w_scale))
}

fn classify(a: &ClassifyArgs) -> Result<(), CliError> {
    if a.method == MethodArg::All {
        return Err(CliError::Usage("classify takes a single method".into()));
    }
    let params = a.icp.params();
    params.validate().map_err(usage)?;
    check(a.m != Some(0), "--m must be positive")?;
    let method = a.method.methods()[0];
    let codebook_path = match (&a.codebook, method) {
        (Some(p), _) => Some(p),
        (None, Method::Icp3) => None,
        (None, _) => return Err(CliError::Usage(format!("--codebook is required for {method}"))),
    };
    require_exists(&a.models)?;
    require_exists(&a.test)?;
    if let Some(p) = codebook_path {
        require_exists(p)?;
    }

    let mut manifest = Manifest::new("classify", a);
    let (models, w_scale) = load_models(&mut manifest, &a.models)?;
    let cb = codebook_path.map(|p| load_codebook(&mut manifest, p)).transpose()?;
    let test_text = String::from_utf8(manifest.input(&a.test)?)
        .map_err(|_| Error::invalid(format!("{} is not UTF-8", a.test.display())))?;
    let test = parse_exploration("test", &test_text)?;
    let mut samples = test.samples().to_vec();
    if let Some(m) = a.m.filter(|&m| m < samples.len()) {
        let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
        let mut picked = index::sample(&mut rng, samples.len(), m).into_vec();
        picked.sort_unstable();
        samples = picked.into_iter().map(|i| samples[i].clone()).collect();
    }

    let report = match method {
        Method::Icp3 => classify_icp3(&samples, &models, &params)?,
        Method::Iclap | Method::Bow => {
            let cb = cb.as_ref().expect("checked above");
            let mut cfg = cb.descriptor_config();
            cfg.normalize_pressure = a.normalize_pressure;
            if method == Method::Iclap {
                classify_iclap(&samples, &models, cb, &cfg, w_scale, &params)?
            } else {
                classify_bow(&samples, &models, cb, &cfg)?
            }
        }
    };
    let text = report.to_text();
    match &a.out {
        Some(out) => {
            manifest.write_output(out, text.as_bytes())?;
            manifest.finish(&manifest_path(out))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    let cfg = EvalConfig {
        m_values: a.m.0.clone(),
        trials: a.trials,
        seed: a.seed,
        codebook: CodebookParams {
            k: a.k,
            seed: a.seed,
            standardize: a.standardize,
            ..CodebookParams::default()
        },
        descriptor: a.descriptor.config(),
        w_scale: a.w_scale,
        icp: a.icp.params(),
        subset: match a.subset {
            SubsetArg::Random => SubsetMode::Random,
            SubsetArg::Prefix => SubsetMode::Prefix,
        },
        sanity: a.sanity,
    };
    check_descriptor(&cfg.descriptor)?;
    cfg.validate().map_err(usage)?;
    require_exists(&a.dataset)?;

    let mut manifest = Manifest::new("evaluate", a);
    let ds = manifest.dataset(&a.dataset)?;
    let outcome = evaluate_sweep(&ds, &a.method.methods(), &cfg)?;
    let _ = writeln!(manifest.text, "seed {}", a.seed);
    manifest.write_output(&a.out, outcome.to_text().as_bytes())?;
    if let Some(path) = &a.confusion {
        let mut text = String::new();
        for (curve, tables) in outcome.curves.iter().zip(&outcome.confusion) {
            for (m, table) in curve.touches.iter().zip(tables) {
                let _ = writeln!(text, "# {} m={m} rows=truth cols=predicted: {}", curve.method, outcome.object_ids.join(" "));
                for row in &table.counts {
                    let cells: Vec<String> = row.iter().map(|c| c.to_string()).collect();
                    let _ = writeln!(text, "{}", cells.join(" "));
                }
            }
        }
        manifest.write_output(path, text.as_bytes())?;
    }
    manifest.finish(&manifest_path(&a.out))
}
