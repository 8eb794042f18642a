//! Leave-one-exploration-out evaluation of recognition rate against the
//! number of touches.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::classify::{
    classify_bow_prepared_with, classify_iclap_prepared, classify_icp3_prepared, histogram_distance,
    Method, PreparedTest,
};
use super::model::{build_model, ObjectModel};
use crate::codebook::{Codebook, CodebookParams};
use crate::descriptors::{describe_samples, Descriptor, DescriptorConfig};
use crate::error::{Error, Result};
use crate::numfmt::fmt_f64;
use crate::registration::IcpParams;
use crate::tactile::{Dataset, Exploration, TouchSample};

/// How `m` touches are chosen from a held-out exploration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SubsetMode {
    /// Uniformly without replacement, seeded per draw.
    #[default]
    Random,
    /// The first `m` usable touches in recording order.
    Prefix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub m_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub codebook: CodebookParams,
    pub descriptor: DescriptorConfig,
    pub w_scale: f64,
    pub icp: IcpParams,
    pub subset: SubsetMode,
    /// Test every object against its own pooled training samples instead of
    /// the held-out exploration.
    pub sanity: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            m_values: (1..=20).collect(),
            trials: 5,
            seed: 0,
            codebook: CodebookParams::default(),
            descriptor: DescriptorConfig::default(),
            w_scale: 1.0,
            icp: IcpParams::default(),
            subset: SubsetMode::Random,
            sanity: false,
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m_values.is_empty() || self.m_values.contains(&0) {
            return Err(Error::invalid("touch counts must be a non-empty list of positive integers"));
        }
        if self.trials == 0 {
            return Err(Error::invalid("trials must be positive"));
        }
        if self.codebook.k == 0 {
            return Err(Error::invalid("k must be positive"));
        }
        if !(self.w_scale.is_finite() && self.w_scale >= 0.0) {
            return Err(Error::invalid("w_scale must be finite and >= 0"));
        }
        self.icp.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalCurve {
    pub method: Method,
    pub touches: Vec<usize>,
    pub rate: Vec<f64>,
    pub trials_per_point: usize,
    pub seed: u64,
    /// Draws per `m` that had fewer usable touches than requested and fell
    /// back to the whole exploration.
    pub short_draws: Vec<usize>,
}

impl EvalCurve {
    pub fn rate_at(&self, m: usize) -> Option<f64> {
        self.touches.iter().position(|&t| t == m).map(|i| self.rate[i])
    }

    /// One `method m rate trials` row per touch count.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, m) in self.touches.iter().enumerate() {
            out.push_str(&format!(
                "{} {} {} {}\n",
                self.method,
                m,
                fmt_f64(self.rate[i]),
                self.trials_per_point
            ));
        }
        out
    }
}

/// `counts[truth][predicted]` over all folds and trials.
#[derive(Debug, Clone, PartialEq)]
pub struct Confusion {
    pub counts: Vec<Vec<usize>>,
}

impl Confusion {
    fn new(n: usize) -> Self {
        Self {
            counts: vec![vec![0; n]; n],
        }
    }

    fn merge(&mut self, other: &Confusion) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (c, v) in row.iter_mut().zip(o) {
                *c += v;
            }
        }
    }

    pub fn correct(&self) -> usize {
        (0..self.counts.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    /// Fraction of trials on `objects` that were classified correctly.
    pub fn accuracy_on(&self, objects: &[usize]) -> f64 {
        let correct: usize = objects.iter().map(|&i| self.counts[i][i]).sum();
        let total: usize = objects.iter().map(|&i| self.counts[i].iter().sum::<usize>()).sum();
        if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        }
    }
}

/// Curves plus confusion tables for every requested method.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub object_ids: Vec<String>,
    pub curves: Vec<EvalCurve>,
    /// `confusion[method][m index]`, methods in the order requested.
    pub confusion: Vec<Vec<Confusion>>,
}

impl SweepOutcome {
    pub fn curve(&self, method: Method) -> Option<&EvalCurve> {
        self.curves.iter().find(|c| c.method == method)
    }

    pub fn confusion_at(&self, method: Method, m: usize) -> Option<&Confusion> {
        let mi = self.curves.iter().position(|c| c.method == method)?;
        let ti = self.curves[mi].touches.iter().position(|&t| t == m)?;
        Some(&self.confusion[mi][ti])
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("# method m rate trials\n");
        for c in &self.curves {
            out.push_str(&c.to_text());
        }
        for c in &self.curves {
            for (m, n) in c.touches.iter().zip(&c.short_draws) {
                if *n > 0 {
                    out.push_str(&format!("# {} m={m}: {n} draws used every available touch\n", c.method));
                }
            }
        }
        out
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub(crate) fn derive_seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5EED_u64, |acc, &p| splitmix(acc ^ splitmix(p)))
}

/// Picks the touches used for one draw. Returns sorted indices into the
/// usable samples and whether the draw came up short.
pub fn draw_subset(available: usize, m: usize, mode: SubsetMode, seed: u64) -> (Vec<usize>, bool) {
    if m >= available {
        return ((0..available).collect(), m > available);
    }
    match mode {
        SubsetMode::Prefix => ((0..m).collect(), false),
        SubsetMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut picked = index::sample(&mut rng, available, m).into_vec();
            picked.sort_unstable();
            (picked, false)
        }
    }
}

struct FoldResult {
    /// `[method][m index]`
    confusion: Vec<Vec<Confusion>>,
    short: Vec<usize>,
}

/// Models and codebook trained on every exploration except `held_out` of
/// each object.
pub struct TrainedFold {
    pub codebook: Codebook,
    pub models: Vec<ObjectModel>,
}

pub fn train_fold(dataset: &Dataset, held_out: Option<usize>, cfg: &EvalConfig) -> Result<TrainedFold> {
    let training: Vec<Vec<&Exploration>> = dataset
        .objects
        .iter()
        .map(|o| {
            o.explorations
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != held_out)
                .map(|(_, (_, e))| e)
                .collect()
        })
        .collect();
    let descriptors: Vec<Descriptor> = training
        .iter()
        .flatten()
        .flat_map(|e| describe_samples(e.samples(), &cfg.descriptor).entries)
        .map(|(d, _)| d)
        .collect();
    let codebook = Codebook::fit(&descriptors, &cfg.codebook)?;
    let models = training
        .iter()
        .map(|exps| build_model(exps, &codebook, &cfg.descriptor, cfg.w_scale))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrainedFold { codebook, models })
}

fn classify(
    method: Method,
    test: &PreparedTest,
    fold: &TrainedFold,
    cfg: &EvalConfig,
) -> Result<usize> {
    let report = match method {
        Method::Iclap => classify_iclap_prepared(test, &fold.models, cfg.w_scale, &cfg.icp)?,
        Method::Icp3 => classify_icp3_prepared(test, &fold.models, &cfg.icp)?,
        Method::Bow => classify_bow_prepared_with(test, &fold.models, fold.codebook.k(), histogram_distance)?,
    };
    Ok(report.winner_index())
}

fn run_fold(dataset: &Dataset, fold_index: usize, methods: &[Method], cfg: &EvalConfig) -> Result<FoldResult> {
    let n = dataset.objects.len();
    let trained = train_fold(dataset, (!cfg.sanity).then_some(fold_index), cfg)?;
    let mut confusion = vec![vec![Confusion::new(n); cfg.m_values.len()]; methods.len()];
    let mut short = vec![0usize; cfg.m_values.len()];

    for (obj_index, obj) in dataset.objects.iter().enumerate() {
        let samples: Vec<TouchSample> = if cfg.sanity {
            obj.explorations.iter().flat_map(|(_, e)| e.samples().iter().cloned()).collect()
        } else {
            obj.explorations[fold_index].1.samples().to_vec()
        };
        let usable = PreparedTest::labeled(&samples, &trained.codebook, &cfg.descriptor)?;

        for (mi, &m) in cfg.m_values.iter().enumerate() {
            for trial in 0..cfg.trials {
                let draw_seed = derive_seed(&[cfg.seed, fold_index as u64, obj_index as u64, m as u64, trial as u64]);
                let (picked, was_short) = if cfg.sanity {
                    ((0..usable.len()).collect(), false)
                } else {
                    draw_subset(usable.len(), m, cfg.subset, draw_seed)
                };
                if was_short {
                    short[mi] += 1;
                }
                let test = usable.select(&picked);
                for (k, &method) in methods.iter().enumerate() {
                    let predicted = classify(method, &test, &trained, cfg)?;
                    confusion[k][mi].counts[obj_index][predicted] += 1;
                }
            }
        }
    }
    Ok(FoldResult { confusion, short })
}

/// Runs every method over the same folds and touch draws.
pub fn evaluate_sweep(dataset: &Dataset, methods: &[Method], cfg: &EvalConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    if methods.is_empty() {
        return Err(Error::invalid("no methods requested"));
    }
    if dataset.objects.is_empty() {
        return Err(Error::invalid("dataset has no objects"));
    }
    let folds = dataset
        .objects
        .iter()
        .map(|o| o.explorations.len())
        .min()
        .unwrap_or(0);
    if folds < 2 {
        return Err(Error::invalid(
            "leave-one-out evaluation needs at least two explorations per object",
        ));
    }

    let results = (0..folds)
        .into_par_iter()
        .map(|f| run_fold(dataset, f, methods, cfg))
        .collect::<Result<Vec<_>>>()?;

    let n = dataset.objects.len();
    let mut confusion = vec![vec![Confusion::new(n); cfg.m_values.len()]; methods.len()];
    let mut short = vec![0usize; cfg.m_values.len()];
    for r in &results {
        for (acc, fold) in confusion.iter_mut().zip(&r.confusion) {
            for (a, f) in acc.iter_mut().zip(fold) {
                a.merge(f);
            }
        }
        for (s, v) in short.iter_mut().zip(&r.short) {
            *s += v;
        }
    }

    let curves = methods
        .iter()
        .zip(&confusion)
        .map(|(&method, tables)| EvalCurve {
            method,
            touches: cfg.m_values.clone(),
            rate: tables
                .iter()
                .map(|t| t.correct() as f64 / t.total() as f64)
                .collect(),
            trials_per_point: cfg.trials,
            seed: cfg.seed,
            short_draws: short.clone(),
        })
        .collect();

    Ok(SweepOutcome {
        object_ids: dataset.objects.iter().map(|o| o.object_id.clone()).collect(),
        curves,
        confusion,
    })
}

/// Recognition rate against touch count for one method.
pub fn evaluate_touch_sweep(dataset: &Dataset, method: Method, cfg: &EvalConfig) -> Result<EvalCurve> {
    let mut outcome = evaluate_sweep(dataset, &[method], cfg)?;
    Ok(outcome.curves.remove(0))
}
