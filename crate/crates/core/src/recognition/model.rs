use crate::codebook::{bow_histogram, labeled_cloud, BowHistogram, Codebook};
use crate::descriptors::{describe_samples, DescriptorConfig};
use crate::error::{Error, Result};
use crate::numfmt::{parse_f64, push_joined};
use crate::registration::KdTree;
use crate::tactile::{validate_identifier, Cloud, Exploration};

/// Reference model of one object built from its training explorations.
#[derive(Debug, Clone)]
pub struct ObjectModel {
    object_id: String,
    cloud4: Cloud,
    cloud3: Cloud,
    histogram: BowHistogram,
    tree4: KdTree,
    tree3: KdTree,
}

impl ObjectModel {
    /// Assembles a model from its labeled cloud and histogram, building the
    /// search trees.
    pub fn from_parts(object_id: impl Into<String>, cloud4: Cloud, histogram: BowHistogram) -> Result<Self> {
        let object_id = object_id.into();
        validate_identifier(&object_id)?;
        let cloud3 = cloud4.spatial()?;
        Ok(Self {
            object_id,
            tree4: KdTree::build(&cloud4),
            tree3: KdTree::build(&cloud3),
            cloud4,
            cloud3,
            histogram,
        })
    }

    pub fn object_id(&self) -> &str {
        &self.object_id
    }

    pub fn cloud4(&self) -> &Cloud {
        &self.cloud4
    }

    pub fn cloud3(&self) -> &Cloud {
        &self.cloud3
    }

    pub fn histogram(&self) -> &BowHistogram {
        &self.histogram
    }

    pub fn tree4(&self) -> &KdTree {
        &self.tree4
    }

    pub fn tree3(&self) -> &KdTree {
        &self.tree3
    }

    /// ```text
    /// model <object_id>
    /// x y z w          (one line per labeled point)
    /// histogram b_1 … b_k
    /// ```
    pub fn to_text(&self) -> String {
        let mut out = format!("model {}\n", self.object_id);
        for p in self.cloud4.points() {
            push_joined(&mut out, p.iter().copied());
            out.push('\n');
        }
        out.push_str("histogram ");
        push_joined(&mut out, self.histogram.bins().iter().copied());
        out.push('\n');
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut id = None;
        let mut coords = Vec::new();
        let mut histogram = None;
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("model ") {
                if id.is_some() {
                    return Err(Error::parse(line_no, "duplicate model header"));
                }
                id = Some(rest.trim().to_string());
            } else if let Some(rest) = line.strip_prefix("histogram") {
                let bins = rest
                    .split_whitespace()
                    .map(|t| parse_f64(t, line_no))
                    .collect::<Result<Vec<_>>>()?;
                histogram = Some(BowHistogram::from_bins(bins).map_err(|e| Error::parse(line_no, e.to_string()))?);
            } else {
                if id.is_none() {
                    return Err(Error::parse(line_no, "points before 'model <object_id>' header"));
                }
                let before = coords.len();
                for t in line.split_whitespace() {
                    coords.push(parse_f64(t, line_no)?);
                }
                if coords.len() - before != 4 {
                    return Err(Error::parse(line_no, "expected 'x y z w'"));
                }
            }
        }
        let id = id.ok_or_else(|| Error::parse(1, "missing 'model <object_id>' header"))?;
        let histogram = histogram.ok_or_else(|| Error::invalid("model file has no histogram line"))?;
        Self::from_parts(id, Cloud::new(4, coords)?, histogram)
    }
}

/// Pools the usable samples of `explorations` into one reference model.
pub fn build_model(
    explorations: &[&Exploration],
    cb: &Codebook,
    cfg: &DescriptorConfig,
    w_scale: f64,
) -> Result<ObjectModel> {
    let first = explorations
        .first()
        .ok_or_else(|| Error::ModelConstruction("no training explorations".into()))?;
    let object_id = first.object_id();
    if let Some(e) = explorations.iter().find(|e| e.object_id() != object_id) {
        return Err(Error::ModelConstruction(format!(
            "explorations of '{}' mixed into model of '{object_id}'",
            e.object_id()
        )));
    }
    if cfg.kind != cb.kind() {
        return Err(Error::invalid(format!(
            "descriptor kind {} does not match {} codebook",
            cfg.kind,
            cb.kind()
        )));
    }
    let mut positions = Vec::new();
    let mut labels = Vec::new();
    for e in explorations {
        let described = describe_samples(e.samples(), cfg);
        labels.extend(cb.label_entries(&described.entries)?);
        positions.extend(described.entries.iter().map(|(_, p)| *p));
    }
    if positions.is_empty() {
        return Err(Error::ModelConstruction(format!(
            "'{object_id}' has no usable samples"
        )));
    }
    let cloud4 = labeled_cloud(&positions, &labels, w_scale)?;
    let histogram = bow_histogram(&labels, cb.k())?;
    ObjectModel::from_parts(object_id, cloud4, histogram)
}
