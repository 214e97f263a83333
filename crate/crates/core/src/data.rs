//! Datasets: synthetic shifted domain pairs, CSV and IDX loaders.
//!
//! A [`DatasetSplit`] carries labels in one of two roles. Source splits hold
//! training labels. Target splits may carry ground truth too, but only as
//! evaluation labels: [`DatasetSplit::training_labels`] refuses to hand them
//! out, so nothing on the training path can read them.

use std::fs;
use std::io::Write;
use std::path::Path;

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelRole {
    /// Labels may be used to fit models.
    Training,
    /// Ground truth kept for scoring only.
    EvaluationOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    features: Array2<f64>,
    labels: Option<Vec<usize>>,
    role: LabelRole,
    k: usize,
}

impl DatasetSplit {
    pub fn new(features: Array2<f64>, labels: Option<Vec<usize>>, k: usize) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::Data("dataset must contain at least one row".into()));
        }
        if features.ncols() == 0 {
            return Err(Error::Data("dataset rows must have at least one feature".into()));
        }
        if k < 2 {
            return Err(Error::Data(format!("category count must be >= 2, got {k}")));
        }
        if let Some(labels) = &labels {
            if labels.len() != features.nrows() {
                return Err(Error::Data(format!(
                    "{} labels for {} rows",
                    labels.len(),
                    features.nrows()
                )));
            }
            if let Some((i, &y)) = labels.iter().enumerate().find(|(_, &y)| y >= k) {
                return Err(Error::Data(format!("label {y} at row {i} is not below k={k}")));
            }
        }
        Ok(Self {
            features,
            labels,
            role: LabelRole::Training,
            k,
        })
    }

    pub fn unlabeled(features: Array2<f64>, k: usize) -> Result<Self> {
        Self::new(features, None, k)
    }

    pub fn features(&self) -> &Array2<f64> {
        &self.features
    }

    pub fn len(&self) -> usize {
        self.features.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.features.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn role(&self) -> LabelRole {
        self.role
    }

    /// Labels usable for fitting. `None` for unlabeled or evaluation-only splits.
    pub fn training_labels(&self) -> Option<&[usize]> {
        match self.role {
            LabelRole::Training => self.labels.as_deref(),
            LabelRole::EvaluationOnly => None,
        }
    }

    /// Ground truth for scoring, whatever its role. Only evaluation code calls this.
    pub fn evaluation_labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    /// Demote labels to evaluation-only.
    pub fn hide_labels(mut self) -> Self {
        self.role = LabelRole::EvaluationOnly;
        self
    }

    /// Drop labels entirely.
    pub fn without_labels(mut self) -> Self {
        self.labels = None;
        self
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            features: self.features.select(Axis(0), rows),
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&i| l[i]).collect()),
            role: self.role,
            k: self.k,
        }
    }

    /// Draw `per_class` rows of each class (by evaluation labels) without replacement.
    ///
    /// Returns the labeled sample (training role) and the remaining rows.
    pub fn stratified_holdout(&self, per_class: usize, seed: u64) -> Result<(Self, Self)> {
        let labels = self
            .evaluation_labels()
            .ok_or_else(|| Error::Data("stratified holdout needs labels".into()))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut taken = vec![false; self.len()];
        for c in 0..self.k {
            let mut idx: Vec<usize> = (0..self.len()).filter(|&i| labels[i] == c).collect();
            idx.shuffle(&mut rng);
            for &i in idx.iter().take(per_class) {
                taken[i] = true;
            }
        }
        let held: Vec<usize> = (0..self.len()).filter(|&i| taken[i]).collect();
        let rest: Vec<usize> = (0..self.len()).filter(|&i| !taken[i]).collect();
        if held.is_empty() || rest.is_empty() {
            return Err(Error::Data("holdout leaves an empty side".into()));
        }
        let mut held = self.select(&held);
        held.role = LabelRole::Training;
        Ok((held, self.select(&rest)))
    }
}

/// Per-dimension affine standardization fitted on one split.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalizer {
    pub mean: Array1<f64>,
    pub std: Array1<f64>,
}

impl Normalizer {
    pub fn fit(features: &Array2<f64>) -> Self {
        let mean = features.mean_axis(Axis(0)).expect("non-empty features");
        let std = features
            .std_axis(Axis(0), 0.0)
            .mapv(|s| if s > 1e-12 { s } else { 1.0 });
        Self { mean, std }
    }

    pub fn apply(&self, features: &Array2<f64>) -> Array2<f64> {
        (features - &self.mean) / &self.std
    }
}

/// Gaussian-cluster domain pair whose target cluster means are a rigid motion
/// of the source means.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftSpec {
    pub k: usize,
    pub d: usize,
    pub n_source: usize,
    pub n_target: usize,
    /// Added to every rotated target mean. Length `d`, or empty for no translation.
    pub translation: Vec<f64>,
    /// Rotation in radians in the plane of the first two coordinates.
    pub rotation: f64,
    /// Standard deviation of every cluster.
    pub spread: f64,
    /// Standard deviation of the cluster means around the origin.
    pub mean_scale: f64,
    pub seed: u64,
}

impl ShiftSpec {
    /// Six classes in ten dimensions with the target shifted 6 units along the
    /// first axis. A linear source model lands near 67% on the target, and
    /// per-class accuracy there ranges from under 10% to 100%.
    pub fn unbalanced_benchmark() -> Self {
        let mut translation = vec![0.0; 10];
        translation[0] = 6.0;
        Self {
            k: 6,
            d: 10,
            n_source: 3000,
            n_target: 3000,
            translation,
            rotation: 0.0,
            spread: 1.0,
            mean_scale: 1.5,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k < 2 {
            return Err(Error::Config(format!("k must be >= 2, got {}", self.k)));
        }
        if self.d < 2 && self.rotation != 0.0 {
            return Err(Error::Config("rotation needs d >= 2".into()));
        }
        if self.d == 0 {
            return Err(Error::Config("d must be >= 1".into()));
        }
        if self.n_source == 0 || self.n_target == 0 {
            return Err(Error::Config("sample counts must be >= 1".into()));
        }
        if !self.translation.is_empty() && self.translation.len() != self.d {
            return Err(Error::Config(format!(
                "translation has {} entries, expected d={}",
                self.translation.len(),
                self.d
            )));
        }
        if !(self.spread > 0.0 && self.spread.is_finite()) {
            return Err(Error::Config("spread must be positive".into()));
        }
        if !(self.mean_scale >= 0.0 && self.mean_scale.is_finite()) {
            return Err(Error::Config("mean_scale must be non-negative".into()));
        }
        Ok(())
    }

    /// Source cluster means, one row per class.
    pub fn source_means(&self) -> Array2<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let normal = Normal::new(0.0, self.mean_scale.max(f64::MIN_POSITIVE)).unwrap();
        Array2::from_shape_fn((self.k, self.d), |_| {
            if self.mean_scale == 0.0 {
                0.0
            } else {
                normal.sample(&mut rng)
            }
        })
    }

    pub fn target_means(&self) -> Array2<f64> {
        let mut means = self.source_means();
        let (s, c) = self.rotation.sin_cos();
        for mut row in means.rows_mut() {
            if self.d >= 2 {
                let (x, y) = (row[0], row[1]);
                row[0] = c * x - s * y;
                row[1] = s * x + c * y;
            }
            for (v, t) in row.iter_mut().zip(&self.translation) {
                *v += t;
            }
        }
        means
    }
}

fn sample_clusters(
    means: &Array2<f64>,
    n: usize,
    spread: f64,
    rng: &mut ChaCha8Rng,
) -> (Array2<f64>, Vec<usize>) {
    let (k, d) = means.dim();
    let mut labels: Vec<usize> = (0..n).map(|i| i % k).collect();
    labels.shuffle(rng);
    let normal = Normal::new(0.0, spread).unwrap();
    let mut x = Array2::zeros((n, d));
    for (mut row, &y) in x.rows_mut().into_iter().zip(&labels) {
        for (v, m) in row.iter_mut().zip(means.row(y)) {
            *v = m + normal.sample(rng);
        }
    }
    (x, labels)
}

/// Labeled source split and a target split whose labels are evaluation-only.
///
/// Both splits are standardized with statistics of the source split.
pub fn make_synthetic_pair(spec: &ShiftSpec) -> Result<(DatasetSplit, DatasetSplit)> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x5eed_da7a);
    let (xs, ys) = sample_clusters(&spec.source_means(), spec.n_source, spec.spread, &mut rng);
    let (xt, yt) = sample_clusters(&spec.target_means(), spec.n_target, spec.spread, &mut rng);
    let norm = Normalizer::fit(&xs);
    let source = DatasetSplit::new(norm.apply(&xs), Some(ys), spec.k)?;
    let target = DatasetSplit::new(norm.apply(&xt), Some(yt), spec.k)?.hide_labels();
    Ok((source, target))
}

/// Parse a headerless comma-separated file. With `has_labels` the last column
/// is an integer class index. `k` bounds the labels; when `None` it is inferred
/// as `max(label) + 1` (at least 2), which requires labels.
pub fn load_csv(path: impl AsRef<Path>, has_labels: bool, k: Option<usize>) -> Result<DatasetSplit> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, path, has_labels, k)
}

fn parse_csv(text: &str, path: &Path, has_labels: bool, k: Option<usize>) -> Result<DatasetSplit> {
    let perr = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut values: Vec<f64> = Vec::new();
    let mut labels: Vec<(usize, usize)> = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        match width {
            None => width = Some(cells.len()),
            Some(w) if w != cells.len() => {
                return Err(perr(line_no, format!("expected {w} cells, found {}", cells.len())))
            }
            _ => {}
        }
        let n_feat = if has_labels { cells.len() - 1 } else { cells.len() };
        if n_feat == 0 {
            return Err(perr(line_no, "row has no feature columns".into()));
        }
        for cell in &cells[..n_feat] {
            let v: f64 = cell
                .parse()
                .map_err(|_| perr(line_no, format!("non-numeric cell {cell:?}")))?;
            values.push(v);
        }
        if has_labels {
            let cell = cells[n_feat];
            let y: usize = cell
                .parse()
                .map_err(|_| perr(line_no, format!("label {cell:?} is not a class index")))?;
            if let Some(k) = k {
                if y >= k {
                    return Err(perr(line_no, format!("label {y} is not below k={k}")));
                }
            }
            labels.push((line_no, y));
        }
        rows += 1;
    }
    let Some(width) = width else {
        return Err(perr(0, "file contains no rows".into()));
    };
    let d = if has_labels { width - 1 } else { width };
    let features = Array2::from_shape_vec((rows, d), values).expect("uniform rows");
    if has_labels {
        let k = k.unwrap_or_else(|| labels.iter().map(|&(_, y)| y + 1).max().unwrap_or(2).max(2));
        let labels = labels.into_iter().map(|(_, y)| y).collect();
        DatasetSplit::new(features, Some(labels), k)
    } else {
        let k = k.ok_or_else(|| {
            Error::Config(format!("{}: unlabeled CSV needs an explicit class count", path.display()))
        })?;
        DatasetSplit::unlabeled(features, k)
    }
}

/// Write rows as CSV with round-trip float formatting; labels (if any, and
/// if requested) go in the last column.
pub fn write_csv(split: &DatasetSplit, path: impl AsRef<Path>, with_labels: bool) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::new();
    let labels = if with_labels { split.evaluation_labels() } else { None };
    for (i, row) in split.features().rows().into_iter().enumerate() {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            first = false;
            out.push_str(&format!("{v:?}"));
        }
        if let Some(labels) = labels {
            out.push_str(&format!(",{}", labels[i]));
        }
        out.push('\n');
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(out.as_bytes()).map_err(|e| Error::io(path, e))
}

const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

fn be_u32(bytes: &[u8], at: usize, what: &str) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| Error::Data(format!("{what}: truncated header")))
}

/// Parse IDX image bytes (magic 0x00000803) into an `n × rows·cols` matrix scaled to [0, 1].
pub fn parse_idx_images(bytes: &[u8]) -> Result<Array2<f64>> {
    let magic = be_u32(bytes, 0, "images")?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::Data(format!("bad IDX image magic {magic:#010x}")));
    }
    let n = be_u32(bytes, 4, "images")? as usize;
    let rows = be_u32(bytes, 8, "images")? as usize;
    let cols = be_u32(bytes, 12, "images")? as usize;
    let d = rows * cols;
    let body = &bytes[16..];
    if body.len() != n * d {
        return Err(Error::Data(format!(
            "IDX image payload has {} bytes, header promises {}",
            body.len(),
            n * d
        )));
    }
    Array2::from_shape_vec((n, d), body.iter().map(|&b| f64::from(b) / 255.0).collect())
        .map_err(|e| Error::Data(e.to_string()))
}

/// Parse IDX label bytes (magic 0x00000801).
pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<usize>> {
    let magic = be_u32(bytes, 0, "labels")?;
    if magic != IDX_LABELS_MAGIC {
        return Err(Error::Data(format!("bad IDX label magic {magic:#010x}")));
    }
    let n = be_u32(bytes, 4, "labels")? as usize;
    let body = &bytes[8..];
    if body.len() != n {
        return Err(Error::Data(format!(
            "IDX label payload has {} bytes, header promises {n}",
            body.len()
        )));
    }
    Ok(body.iter().map(|&b| usize::from(b)).collect())
}

pub fn load_idx(images_path: impl AsRef<Path>, labels_path: impl AsRef<Path>) -> Result<DatasetSplit> {
    let (ip, lp) = (images_path.as_ref(), labels_path.as_ref());
    let images = parse_idx_images(&fs::read(ip).map_err(|e| Error::io(ip, e))?)?;
    let labels = parse_idx_labels(&fs::read(lp).map_err(|e| Error::io(lp, e))?)?;
    if images.nrows() != labels.len() {
        return Err(Error::Data(format!(
            "{} images but {} labels",
            images.nrows(),
            labels.len()
        )));
    }
    let k = labels.iter().max().map_or(2, |&m| (m + 1).max(2));
    DatasetSplit::new(images, Some(labels), k)
}

/// Random subset of `n` rows (all rows if `n >= len`), order preserved.
pub fn subsample(split: &DatasetSplit, n: usize, seed: u64) -> DatasetSplit {
    if n >= split.len() {
        return split.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut idx: Vec<usize> = (0..split.len()).collect();
    idx.shuffle(&mut rng);
    idx.truncate(n);
    idx.sort_unstable();
    split.select(&idx)
}

/// Bilinear resize of flattened square images (one per row) from
/// `from`×`from` to `to`×`to` pixels, with pixel centers aligned.
pub fn resize_images(images: &Array2<f64>, from: usize, to: usize) -> Result<Array2<f64>> {
    if images.ncols() != from * from {
        return Err(Error::Dimension {
            expected: from * from,
            got: images.ncols(),
        });
    }
    if from == 0 || to == 0 {
        return Err(Error::Config("image side must be >= 1".into()));
    }
    let scale = from as f64 / to as f64;
    // Source coordinate and weight for each output coordinate, shared by both axes.
    let taps: Vec<(usize, usize, f64)> = (0..to)
        .map(|i| {
            let x = ((i as f64 + 0.5) * scale - 0.5).clamp(0.0, (from - 1) as f64);
            let x0 = x.floor() as usize;
            let x1 = (x0 + 1).min(from - 1);
            (x0, x1, x - x0 as f64)
        })
        .collect();
    let mut out = Array2::zeros((images.nrows(), to * to));
    for (src, mut dst) in images.rows().into_iter().zip(out.rows_mut()) {
        for (r, &(r0, r1, fr)) in taps.iter().enumerate() {
            for (c, &(c0, c1, fc)) in taps.iter().enumerate() {
                let p = |y: usize, x: usize| src[y * from + x];
                let top = p(r0, c0) * (1.0 - fc) + p(r0, c1) * fc;
                let bottom = p(r1, c0) * (1.0 - fc) + p(r1, c1) * fc;
                dst[r * to + c] = top * (1.0 - fr) + bottom * fr;
            }
        }
    }
    Ok(out)
}

pub(crate) fn shuffled_indices(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resize_preserves_constants_and_identity() {
        let img = Array2::from_shape_fn((2, 16), |(r, c)| (r * 16 + c) as f64);
        assert_eq!(resize_images(&img, 4, 4).unwrap(), img);
        let flat = Array2::from_elem((1, 256), 0.25);
        let big = resize_images(&flat, 16, 28).unwrap();
        assert_eq!(big.ncols(), 784);
        assert!(big.iter().all(|&v| (v - 0.25).abs() < 1e-15));
        assert!(resize_images(&flat, 15, 28).is_err());
    }

    fn spec() -> ShiftSpec {
        ShiftSpec {
            k: 3,
            d: 2,
            n_source: 300,
            n_target: 300,
            translation: vec![2.0, 0.0],
            rotation: 0.0,
            spread: 0.3,
            mean_scale: 1.5,
            seed: 7,
        }
    }

    #[test]
    fn synthetic_pair_is_deterministic() {
        let a = make_synthetic_pair(&spec()).unwrap();
        let b = make_synthetic_pair(&spec()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_shift_gives_matching_target_means() {
        let mut s = spec();
        s.translation = vec![0.0, 0.0];
        assert_eq!(s.source_means(), s.target_means());
    }

    #[test]
    fn target_labels_are_evaluation_only() {
        let (src, tgt) = make_synthetic_pair(&spec()).unwrap();
        assert!(src.training_labels().is_some());
        assert!(tgt.training_labels().is_none());
        assert_eq!(tgt.evaluation_labels().unwrap().len(), 300);
    }

    #[test]
    fn source_is_standardized_and_balanced() {
        let (src, _) = make_synthetic_pair(&spec()).unwrap();
        let m = src.features().mean_axis(Axis(0)).unwrap();
        let s = src.features().std_axis(Axis(0), 0.0);
        for j in 0..2 {
            assert!(m[j].abs() < 1e-9);
            assert!((s[j] - 1.0).abs() < 1e-9);
        }
        let labels = src.training_labels().unwrap();
        for c in 0..3 {
            assert_eq!(labels.iter().filter(|&&y| y == c).count(), 100);
        }
    }

    #[test]
    fn invalid_spec_is_config_error() {
        let mut s = spec();
        s.k = 1;
        assert!(matches!(make_synthetic_pair(&s), Err(Error::Config(_))));
        let mut s = spec();
        s.translation = vec![1.0];
        assert!(matches!(make_synthetic_pair(&s), Err(Error::Config(_))));
    }

    #[test]
    fn csv_single_labeled_row() {
        let split = parse_csv("0.1,0.2,1\n", Path::new("x.csv"), true, None).unwrap();
        assert_eq!(split.len(), 1);
        assert_eq!(split.dim(), 2);
        assert_eq!(split.training_labels().unwrap(), &[1]);
        assert_eq!(split.features()[[0, 1]], 0.2);
    }

    #[test]
    fn csv_empty_file_is_error() {
        assert!(matches!(
            parse_csv("", Path::new("e.csv"), true, None),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn csv_without_labels() {
        let split = parse_csv("1,2\n3,4\n", Path::new("u.csv"), false, Some(3)).unwrap();
        assert!(split.evaluation_labels().is_none());
        assert_eq!(split.k(), 3);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let err = parse_csv("1,2,0\n1,2\n", Path::new("r.csv"), true, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_csv("1,2,0\n1,x,0\n", Path::new("r.csv"), true, None).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        let err = parse_csv("1,2,0\n1,2,5\n", Path::new("r.csv"), true, Some(3)).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let (src, _) = make_synthetic_pair(&spec()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_csv(&src, &p, true).unwrap();
        let back = load_csv(&p, true, Some(3)).unwrap();
        assert_eq!(back, src);
    }

    fn idx_images(n: u32, r: u32, c: u32, px: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        for v in [IDX_IMAGES_MAGIC, n, r, c] {
            b.extend_from_slice(&v.to_be_bytes());
        }
        b.extend_from_slice(px);
        b
    }

    #[test]
    fn idx_images_are_scaled() {
        let x = parse_idx_images(&idx_images(1, 2, 2, &[0, 255, 128, 64])).unwrap();
        assert_eq!(x.shape(), &[1, 4]);
        assert_eq!(x.row(0).to_vec(), vec![0.0, 1.0, 128.0 / 255.0, 64.0 / 255.0]);
    }

    #[test]
    fn idx_bad_magic_and_mismatch() {
        let mut bad = idx_images(1, 2, 2, &[0; 4]);
        bad[3] = 0x01;
        assert!(parse_idx_images(&bad).is_err());

        let dir = tempfile::tempdir().unwrap();
        let ip = dir.path().join("img");
        let lp = dir.path().join("lbl");
        fs::write(&ip, idx_images(2, 1, 1, &[0, 1])).unwrap();
        let mut lbl = Vec::new();
        lbl.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
        lbl.extend_from_slice(&3u32.to_be_bytes());
        lbl.extend_from_slice(&[0, 1, 1]);
        fs::write(&lp, lbl).unwrap();
        assert!(matches!(load_idx(&ip, &lp), Err(Error::Data(_))));
    }

    #[test]
    fn stratified_holdout_takes_per_class() {
        let (_, tgt) = make_synthetic_pair(&spec()).unwrap();
        let (val, rest) = tgt.stratified_holdout(30, 1).unwrap();
        assert_eq!(val.len(), 90);
        assert_eq!(rest.len(), 210);
        assert!(val.training_labels().is_some());
        assert!(rest.training_labels().is_none());
    }
}
