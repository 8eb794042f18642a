use crate::error::{Error, Result};

/// Rows of the default 14×6 pressure array.
pub const DEFAULT_ROWS: usize = 14;
/// Columns of the default 14×6 pressure array.
pub const DEFAULT_COLS: usize = 6;

/// One pressure image from the sensor grid, stored row-major.
///
/// Pressures are in arbitrary units, finite and non-negative. Pixel
/// coordinates follow one convention everywhere: `x` is the column index and
/// `y` the row index, both 0-based.
#[derive(Debug, Clone, PartialEq)]
pub struct TactileFrame {
    rows: usize,
    cols: usize,
    pressures: Vec<f64>,
}

impl TactileFrame {
    pub fn new(rows: usize, cols: usize, pressures: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::invalid(format!(
                "frame dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if pressures.len() != rows * cols {
            return Err(Error::invalid(format!(
                "frame {rows}x{cols} needs {} pressures, got {}",
                rows * cols,
                pressures.len()
            )));
        }
        if let Some((i, v)) = pressures
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            return Err(Error::invalid(format!(
                "pressure {i} is {v}; pressures must be finite and non-negative"
            )));
        }
        Ok(Self {
            rows,
            cols,
            pressures,
        })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Self::new(rows, cols, vec![0.0; rows * cols])
    }

    /// Builds a frame by evaluating `f(row, col)` at every cell.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut pressures = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                pressures.push(f(r, c));
            }
        }
        Self::new(rows, cols, pressures)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn pressures(&self) -> &[f64] {
        &self.pressures
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pressures[row * self.cols + col]
    }

    /// Iterates `(x, y, value)` with `x` = column and `y` = row.
    pub fn cells(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let cols = self.cols;
        self.pressures
            .iter()
            .enumerate()
            .map(move |(i, &v)| (i % cols, i / cols, v))
    }

    pub fn total(&self) -> f64 {
        self.pressures.iter().sum()
    }

    /// A frame with zero total pressure carries no appearance information.
    pub fn is_degenerate(&self) -> bool {
        self.total() <= 0.0
    }
}

/// A tactile reading together with the contact position (millimeters).
#[derive(Debug, Clone, PartialEq)]
pub struct TouchSample {
    pub position: [f64; 3],
    pub frame: TactileFrame,
}

impl TouchSample {
    pub fn new(position: [f64; 3], frame: TactileFrame) -> Result<Self> {
        if position.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "contact position {position:?} is not finite"
            )));
        }
        Ok(Self { position, frame })
    }
}

/// One recorded exploration of an object: an ordered, non-empty list of
/// touches that all share one frame size.
#[derive(Debug, Clone, PartialEq)]
pub struct Exploration {
    object_id: String,
    samples: Vec<TouchSample>,
}

impl Exploration {
    pub fn new(object_id: impl Into<String>, samples: Vec<TouchSample>) -> Result<Self> {
        let object_id = object_id.into();
        validate_identifier(&object_id)?;
        let first = samples
            .first()
            .ok_or_else(|| Error::invalid(format!("exploration of '{object_id}' has no samples")))?;
        let dims = (first.frame.rows(), first.frame.cols());
        if let Some(i) = samples
            .iter()
            .position(|s| (s.frame.rows(), s.frame.cols()) != dims)
        {
            return Err(Error::invalid(format!(
                "sample {i} frame size differs from {}x{}",
                dims.0, dims.1
            )));
        }
        Ok(Self { object_id, samples })
    }

    pub fn object_id(&self) -> &str {
        &self.object_id
    }

    pub fn samples(&self) -> &[TouchSample] {
        &self.samples
    }

    pub fn frame_dims(&self) -> (usize, usize) {
        let f = &self.samples[0].frame;
        (f.rows(), f.cols())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Identifiers appear as directory names and whitespace-delimited tokens.
pub(crate) fn validate_identifier(id: &str) -> Result<()> {
    if id.is_empty()
        || id
            .chars()
            .any(|c| c.is_whitespace() || c == '/' || c == '\\')
        || id == "."
        || id == ".."
    {
        return Err(Error::invalid(format!("invalid identifier '{id}'")));
    }
    Ok(())
}

/// A contact position plus its word-label coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub w: f64,
}

impl LabeledPoint {
    pub fn new(position: [f64; 3], w: f64) -> Self {
        Self {
            x: position[0],
            y: position[1],
            z: position[2],
            w,
        }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.x, self.y, self.z, self.w]
    }
}

/// A non-empty set of 3D or 4D points stored contiguously.
#[derive(Debug, Clone, PartialEq)]
pub struct Cloud {
    dim: usize,
    coords: Vec<f64>,
}

impl Cloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim != 3 && dim != 4 {
            return Err(Error::invalid(format!("cloud dimension must be 3 or 4, got {dim}")));
        }
        if coords.is_empty() {
            return Err(Error::invalid("cloud has no points"));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::invalid(format!(
                "{} coordinates do not form {dim}-D points",
                coords.len()
            )));
        }
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("cloud contains non-finite coordinates"));
        }
        Ok(Self { dim, coords })
    }

    pub fn from_points<P: AsRef<[f64]>>(dim: usize, points: impl IntoIterator<Item = P>) -> Result<Self> {
        let mut coords = Vec::new();
        for (i, p) in points.into_iter().enumerate() {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::invalid(format!(
                    "point {i} has {} components, expected {dim}",
                    p.len()
                )));
            }
            coords.extend_from_slice(p);
        }
        Self::new(dim, coords)
    }

    pub fn from_labeled(points: &[LabeledPoint]) -> Result<Self> {
        Self::from_points(4, points.iter().map(|p| p.to_array()))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Drops the label coordinate of a 4D cloud.
    pub fn spatial(&self) -> Result<Cloud> {
        if self.dim != 4 {
            return Err(Error::invalid("only 4D clouds carry a label coordinate"));
        }
        Cloud::from_points(3, self.points().map(|p| [p[0], p[1], p[2]]))
    }

    pub fn labeled_points(&self) -> Option<Vec<LabeledPoint>> {
        (self.dim == 4).then(|| {
            self.points()
                .map(|p| LabeledPoint::new([p[0], p[1], p[2]], p[3]))
                .collect()
        })
    }
}
