use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::model::ObjectModel;
use crate::codebook::{bow_histogram, labeled_cloud, BowHistogram, Codebook};
use crate::descriptors::{describe_samples, DescriptorConfig};
use crate::error::{Error, Result};
use crate::registration::{icp_register_with, IcpParams};
use crate::tactile::{Cloud, TouchSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Iclap,
    Icp3,
    Bow,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Iclap, Method::Icp3, Method::Bow];

    pub fn name(self) -> &'static str {
        match self {
            Method::Iclap => "iclap",
            Method::Icp3 => "icp3",
            Method::Bow => "bow",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "iclap" => Ok(Method::Iclap),
            "icp3" | "icp" => Ok(Method::Icp3),
            "bow" => Ok(Method::Bow),
            other => Err(Error::invalid(format!(
                "unknown method '{other}' (expected iclap, icp3 or bow)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedModel {
    pub object_id: String,
    /// Position of the model in the list passed to the classifier.
    pub model_index: usize,
    pub raw_error: f64,
    /// `raw_error / sqrt(Σ raw_error²)`; zero when every error is zero.
    pub normalized_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub method: Method,
    /// Ascending by raw error; equal errors keep model order.
    pub ranked: Vec<RankedModel>,
    pub winner: String,
}

impl ClassificationReport {
    pub fn from_errors(method: Method, models: &[ObjectModel], errors: &[f64]) -> Self {
        let norm = errors.iter().map(|e| e * e).sum::<f64>().sqrt();
        let mut ranked: Vec<RankedModel> = models
            .iter()
            .zip(errors)
            .enumerate()
            .map(|(i, (m, &e))| RankedModel {
                object_id: m.object_id().to_string(),
                model_index: i,
                raw_error: e,
                normalized_score: if norm > 0.0 { e / norm } else { 0.0 },
            })
            .collect();
        ranked.sort_by(|a, b| {
            a.raw_error
                .total_cmp(&b.raw_error)
                .then(a.model_index.cmp(&b.model_index))
        });
        let winner = ranked[0].object_id.clone();
        Self {
            method,
            ranked,
            winner,
        }
    }

    pub fn winner_index(&self) -> usize {
        self.ranked[0].model_index
    }

    /// Raw errors in model order.
    pub fn errors_by_model(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.ranked.len()];
        for r in &self.ranked {
            out[r.model_index] = r.raw_error;
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("method {}\nwinner {}\n", self.method, self.winner);
        for (rank, r) in self.ranked.iter().enumerate() {
            out.push_str(&format!(
                "{} {} {} {}\n",
                rank + 1,
                r.object_id,
                crate::numfmt::fmt_f64(r.raw_error),
                crate::numfmt::fmt_f64(r.normalized_score)
            ));
        }
        out
    }
}

/// Test touches reduced to what the classifiers consume.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedTest {
    pub positions: Vec<[f64; 3]>,
    /// Word labels; empty when prepared without a codebook.
    pub labels: Vec<usize>,
}

impl PreparedTest {
    /// Keeps samples whose frames pass the descriptor precondition and
    /// labels them.
    pub fn labeled(samples: &[TouchSample], cb: &Codebook, cfg: &DescriptorConfig) -> Result<Self> {
        let described = describe_samples(samples, cfg);
        if described.entries.is_empty() {
            return Err(Error::invalid("no usable test samples"));
        }
        Ok(Self {
            labels: cb.label_entries(&described.entries)?,
            positions: described.entries.iter().map(|(_, p)| *p).collect(),
        })
    }

    pub fn positions_only(samples: &[TouchSample]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("no test samples"));
        }
        Ok(Self {
            positions: samples.iter().map(|s| s.position).collect(),
            labels: Vec::new(),
        })
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            positions: indices.iter().map(|&i| self.positions[i]).collect(),
            labels: if self.labels.is_empty() {
                Vec::new()
            } else {
                indices.iter().map(|&i| self.labels[i]).collect()
            },
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

fn require_models(models: &[ObjectModel]) -> Result<()> {
    if models.is_empty() {
        return Err(Error::invalid("no reference models"));
    }
    Ok(())
}

pub fn classify_iclap_prepared(
    test: &PreparedTest,
    models: &[ObjectModel],
    w_scale: f64,
    params: &IcpParams,
) -> Result<ClassificationReport> {
    require_models(models)?;
    if test.labels.len() != test.positions.len() {
        return Err(Error::invalid("iCLAP needs labeled test samples"));
    }
    let cloud = labeled_cloud(&test.positions, &test.labels, w_scale)?;
    let errors = models
        .par_iter()
        .map(|m| icp_register_with(&cloud, m.tree4(), params).map(|r| r.error))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassificationReport::from_errors(Method::Iclap, models, &errors))
}

pub fn classify_icp3_prepared(
    test: &PreparedTest,
    models: &[ObjectModel],
    params: &IcpParams,
) -> Result<ClassificationReport> {
    require_models(models)?;
    let cloud = Cloud::from_points(3, &test.positions)?;
    let errors = models
        .par_iter()
        .map(|m| icp_register_with(&cloud, m.tree3(), params).map(|r| r.error))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClassificationReport::from_errors(Method::Icp3, models, &errors))
}

/// Euclidean distance between normalized histograms.
pub fn histogram_distance(a: &BowHistogram, b: &BowHistogram) -> f64 {
    a.euclidean(b)
}

pub fn classify_bow_prepared_with(
    test: &PreparedTest,
    models: &[ObjectModel],
    k: usize,
    distance: impl Fn(&BowHistogram, &BowHistogram) -> f64,
) -> Result<ClassificationReport> {
    require_models(models)?;
    let h = bow_histogram(&test.labels, k)?;
    if let Some(m) = models.iter().find(|m| m.histogram().k() != k) {
        return Err(Error::invalid(format!(
            "model '{}' histogram has {} bins, expected {k}",
            m.object_id(),
            m.histogram().k()
        )));
    }
    let errors: Vec<f64> = models.iter().map(|m| distance(&h, m.histogram())).collect();
    Ok(ClassificationReport::from_errors(Method::Bow, models, &errors))
}

pub fn classify_iclap(
    test_samples: &[TouchSample],
    models: &[ObjectModel],
    cb: &Codebook,
    cfg: &DescriptorConfig,
    w_scale: f64,
    params: &IcpParams,
) -> Result<ClassificationReport> {
    require_models(models)?;
    let test = PreparedTest::labeled(test_samples, cb, cfg)?;
    classify_iclap_prepared(&test, models, w_scale, params)
}

pub fn classify_icp3(
    test_samples: &[TouchSample],
    models: &[ObjectModel],
    params: &IcpParams,
) -> Result<ClassificationReport> {
    require_models(models)?;
    classify_icp3_prepared(&PreparedTest::positions_only(test_samples)?, models, params)
}

pub fn classify_bow(
    test_samples: &[TouchSample],
    models: &[ObjectModel],
    cb: &Codebook,
    cfg: &DescriptorConfig,
) -> Result<ClassificationReport> {
    require_models(models)?;
    let test = PreparedTest::labeled(test_samples, cb, cfg)?;
    classify_bow_prepared_with(&test, models, cb.k(), histogram_distance)
}
