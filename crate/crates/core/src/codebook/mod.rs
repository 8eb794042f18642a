//! Tactile word dictionary: k-means codebook, word labels and
//! bag-of-words histograms.

mod kmeans;

pub use kmeans::{kmeans_fit, KMeansFit};

use kmeans::nearest_centroid;

use crate::descriptors::{zernike_order_for_len, Descriptor, DescriptorConfig, DescriptorKind};
use crate::error::{Error, Result};
use crate::numfmt::{parse_f64, push_joined};
use crate::tactile::Cloud;

/// Dictionary size used throughout the evaluation.
pub const DEFAULT_K: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CodebookParams {
    pub k: usize,
    pub seed: u64,
    pub max_iters: usize,
    /// Standardize each descriptor dimension before clustering.
    pub standardize: bool,
}

impl Default for CodebookParams {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            seed: 0,
            max_iters: 100,
            standardize: false,
        }
    }
}

/// Per-dimension standardization applied before clustering and labeling.
#[derive(Debug, Clone, PartialEq)]
pub struct NormStats {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl NormStats {
    fn from_data(data: &[Vec<f64>]) -> Self {
        let n = data.len() as f64;
        let dim = data[0].len();
        let mut mean = vec![0.0; dim];
        for x in data {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for x in data {
            for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Self { mean, std }
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.std)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Codebook {
    kind: DescriptorKind,
    centroids: Vec<Vec<f64>>,
    norm: Option<NormStats>,
}

impl Codebook {
    pub fn new(kind: DescriptorKind, centroids: Vec<Vec<f64>>, norm: Option<NormStats>) -> Result<Self> {
        let dim = centroids
            .first()
            .ok_or_else(|| Error::invalid("codebook needs at least one centroid"))?
            .len();
        if dim == 0 || centroids.iter().any(|c| c.len() != dim) {
            return Err(Error::invalid("centroids must share one non-zero length"));
        }
        if centroids.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("centroids must be finite"));
        }
        for (i, a) in centroids.iter().enumerate() {
            if let Some(j) = centroids[..i].iter().position(|b| b == a) {
                return Err(Error::Infeasible(format!("centroids {j} and {i} coincide")));
            }
        }
        if let Some(n) = &norm {
            if n.mean.len() != dim || n.std.len() != dim || n.std.iter().any(|s| s.is_nan() || *s <= 0.0) {
                return Err(Error::invalid("normalization stats do not match centroid length"));
            }
        }
        Ok(Self {
            kind,
            centroids,
            norm,
        })
    }

    pub fn fit(descriptors: &[Descriptor], params: &CodebookParams) -> Result<Self> {
        let kind = descriptors
            .first()
            .ok_or_else(|| Error::invalid("no descriptors to cluster"))?
            .kind;
        if descriptors.iter().any(|d| d.kind != kind) {
            return Err(Error::invalid("descriptors of mixed kinds"));
        }
        let raw: Vec<Vec<f64>> = descriptors.iter().map(|d| d.values.clone()).collect();
        Self::fit_vectors(kind, &raw, params)
    }

    pub fn fit_vectors(kind: DescriptorKind, data: &[Vec<f64>], params: &CodebookParams) -> Result<Self> {
        if data.is_empty() {
            return Err(Error::invalid("no descriptors to cluster"));
        }
        let (norm, scaled);
        let data = if params.standardize {
            let stats = NormStats::from_data(data);
            scaled = data.iter().map(|x| stats.apply(x)).collect::<Vec<_>>();
            norm = Some(stats);
            &scaled
        } else {
            norm = None;
            data
        };
        let fit = kmeans_fit(data, params.k, params.seed, params.max_iters)?;
        Self::new(kind, fit.centroids, norm)
    }

    pub fn k(&self) -> usize {
        self.centroids.len()
    }

    pub fn dim(&self) -> usize {
        self.centroids[0].len()
    }

    pub fn kind(&self) -> DescriptorKind {
        self.kind
    }

    pub fn centroids(&self) -> &[Vec<f64>] {
        &self.centroids
    }

    pub fn norm_stats(&self) -> Option<&NormStats> {
        self.norm.as_ref()
    }

    /// Descriptor settings implied by this codebook.
    pub fn descriptor_config(&self) -> DescriptorConfig {
        let mut cfg = DescriptorConfig::new(self.kind);
        if self.kind == DescriptorKind::ZernikeMoments {
            cfg.zernike_max_order = zernike_order_for_len(self.dim()).unwrap_or(cfg.zernike_max_order);
        }
        cfg
    }

    /// 1-based index of the nearest codeword; ties go to the lowest index.
    pub fn assign_label(&self, d: &[f64]) -> Result<usize> {
        if d.len() != self.dim() {
            return Err(Error::invalid(format!(
                "descriptor has length {}, codebook expects {}",
                d.len(),
                self.dim()
            )));
        }
        let j = match &self.norm {
            Some(n) => nearest_centroid(&self.centroids, &n.apply(d)).0,
            None => nearest_centroid(&self.centroids, d).0,
        };
        Ok(j + 1)
    }

    pub fn label_entries(&self, entries: &[(Descriptor, [f64; 3])]) -> Result<Vec<usize>> {
        entries
            .iter()
            .map(|(d, _)| {
                if d.kind != self.kind {
                    return Err(Error::invalid(format!(
                        "{} descriptor given to a {} codebook",
                        d.kind, self.kind
                    )));
                }
                self.assign_label(&d.values)
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!(
            "codebook k={} dim={} kind={}\n",
            self.k(),
            self.dim(),
            self.kind
        );
        if let Some(n) = &self.norm {
            out.push_str("norm_mean ");
            push_joined(&mut out, n.mean.iter().copied());
            out.push_str("\nnorm_std ");
            push_joined(&mut out, n.std.iter().copied());
            out.push('\n');
        }
        for c in &self.centroids {
            push_joined(&mut out, c.iter().copied());
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty codebook file"))?;
        let mut tokens = header.split_whitespace();
        if tokens.next() != Some("codebook") {
            return Err(Error::parse(hline, "expected 'codebook k=<k> dim=<dim> kind=<kind>'"));
        }
        let (mut k, mut dim, mut kind) = (None, None, None);
        for t in tokens {
            let (key, value) = t
                .split_once('=')
                .ok_or_else(|| Error::parse(hline, format!("bad header field '{t}'")))?;
            match key {
                "k" => k = value.parse::<usize>().ok(),
                "dim" => dim = value.parse::<usize>().ok(),
                "kind" => kind = Some(value.parse::<DescriptorKind>().map_err(|e| Error::parse(hline, e.to_string()))?),
                _ => return Err(Error::parse(hline, format!("unknown header field '{key}'"))),
            }
        }
        let (k, dim, kind) = match (k, dim, kind) {
            (Some(k), Some(d), Some(kind)) if k > 0 && d > 0 => (k, d, kind),
            _ => return Err(Error::parse(hline, "header needs positive k, dim and a kind")),
        };

        let row = |line: usize, body: &str| -> Result<Vec<f64>> {
            let v = body
                .split_whitespace()
                .map(|t| parse_f64(t, line))
                .collect::<Result<Vec<_>>>()?;
            if v.len() != dim {
                return Err(Error::parse(line, format!("expected {dim} values, found {}", v.len())));
            }
            Ok(v)
        };

        let mut mean = None;
        let mut std = None;
        let mut centroids = Vec::with_capacity(k);
        for (line, body) in lines {
            if let Some(rest) = body.strip_prefix("norm_mean") {
                mean = Some(row(line, rest)?);
            } else if let Some(rest) = body.strip_prefix("norm_std") {
                std = Some(row(line, rest)?);
            } else {
                centroids.push(row(line, body)?);
            }
        }
        if centroids.len() != k {
            return Err(Error::invalid(format!(
                "codebook header says k={k} but {} centroids follow",
                centroids.len()
            )));
        }
        let norm = match (mean, std) {
            (Some(mean), Some(std)) => Some(NormStats { mean, std }),
            (None, None) => None,
            _ => return Err(Error::invalid("norm_mean and norm_std must appear together")),
        };
        Self::new(kind, centroids, norm)
    }
}

/// Normalized word-occurrence histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct BowHistogram {
    bins: Vec<f64>,
}

impl BowHistogram {
    /// Wraps bins that already sum to one.
    pub fn from_bins(bins: Vec<f64>) -> Result<Self> {
        if bins.is_empty() || bins.iter().any(|b| !b.is_finite() || *b < 0.0) {
            return Err(Error::invalid("histogram bins must be finite and non-negative"));
        }
        let total: f64 = bins.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!("histogram sums to {total}, not 1")));
        }
        Ok(Self { bins })
    }

    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn k(&self) -> usize {
        self.bins.len()
    }

    pub fn euclidean(&self, other: &BowHistogram) -> f64 {
        kmeans::sq_dist(&self.bins, &other.bins).sqrt()
    }
}

pub fn bow_histogram(labels: &[usize], k: usize) -> Result<BowHistogram> {
    if k == 0 {
        return Err(Error::invalid("k must be positive"));
    }
    if labels.is_empty() {
        return Err(Error::invalid("cannot build a histogram from no labels"));
    }
    let mut counts = vec![0usize; k];
    for &l in labels {
        if l == 0 || l > k {
            return Err(Error::invalid(format!("label {l} outside 1..={k}")));
        }
        counts[l - 1] += 1;
    }
    let n = labels.len() as f64;
    Ok(BowHistogram {
        bins: counts.into_iter().map(|c| c as f64 / n).collect(),
    })
}

/// `(x, y, z, w_scale · label)` for every entry, in order.
pub fn labeled_cloud(positions: &[[f64; 3]], labels: &[usize], w_scale: f64) -> Result<Cloud> {
    if !(w_scale.is_finite() && w_scale >= 0.0) {
        return Err(Error::invalid(format!("w_scale must be finite and >= 0, got {w_scale}")));
    }
    if positions.len() != labels.len() {
        return Err(Error::invalid("positions and labels differ in length"));
    }
    Cloud::from_points(
        4,
        positions
            .iter()
            .zip(labels)
            .map(|(p, &l)| [p[0], p[1], p[2], w_scale * l as f64]),
    )
}

pub fn build_labeled_cloud(entries: &[(Descriptor, [f64; 3])], cb: &Codebook, w_scale: f64) -> Result<Cloud> {
    let labels = cb.label_entries(entries)?;
    let positions: Vec<[f64; 3]> = entries.iter().map(|(_, p)| *p).collect();
    labeled_cloud(&positions, &labels, w_scale)
}
