//! Feature/ground-truth file formats, chunk construction, and splits.
//!
//! Feature files are a small binary container: magic `VPRF`, a `u16`
//! version (currently 1), `u64` row and column counts, then row-major
//! `f32` values, everything little-endian. Ground truth is a two-column
//! CSV (`query_idx,ref_idx`). Pipeline configuration is a flat
//! `key = value` text file.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

const FEATURE_MAGIC: &[u8; 4] = b"VPRF";
const FEATURE_VERSION: u16 = 1;

/// Row-major matrix of per-image feature vectors, one row per image in
/// traverse order. Values are finite by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f32>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f32>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Data(format!(
                "feature matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(Error::Size(format!(
                "feature payload holds {} values, shape {rows}x{cols} needs {}",
                data.len(),
                rows * cols
            )));
        }
        for (i, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Data(format!(
                    "non-finite feature value at ({}, {})",
                    i / cols,
                    i % cols
                )));
            }
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn values(&self) -> &[f32] {
        &self.data
    }

    /// Load a feature file, validating magic, version, shape, and finiteness.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }

    pub(crate) fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 22 {
            return Err(Error::Format(format!(
                "feature file header needs 22 bytes, file has {}",
                bytes.len()
            )));
        }
        if &bytes[0..4] != FEATURE_MAGIC {
            return Err(Error::Format(format!(
                "bad magic {:?}, expected {:?}",
                &bytes[0..4],
                FEATURE_MAGIC
            )));
        }
        let version = u16::from_le_bytes([bytes[4], bytes[5]]);
        if version != FEATURE_VERSION {
            return Err(Error::Format(format!(
                "unsupported feature file version {version}, expected {FEATURE_VERSION}"
            )));
        }
        let rows = u64::from_le_bytes(bytes[6..14].try_into().unwrap()) as usize;
        let cols = u64::from_le_bytes(bytes[14..22].try_into().unwrap()) as usize;
        let expected = rows
            .checked_mul(cols)
            .and_then(|n| n.checked_mul(4))
            .ok_or_else(|| Error::Size(format!("shape {rows}x{cols} overflows")))?;
        let payload = &bytes[22..];
        if payload.len() != expected {
            return Err(Error::Size(format!(
                "payload is {} bytes, shape {rows}x{cols} needs {expected}"
            )));
        }
        let data: Vec<f32> = payload
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        Self::new(rows, cols, data)
    }

    /// Store in the feature file format; `load` reproduces the values
    /// bit-exactly.
    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = Vec::with_capacity(22 + self.data.len() * 4);
        out.extend_from_slice(FEATURE_MAGIC);
        out.extend_from_slice(&FEATURE_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.rows as u64).to_le_bytes());
        out.extend_from_slice(&(self.cols as u64).to_le_bytes());
        for v in &self.data {
            out.extend_from_slice(&v.to_le_bytes());
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// True reference frame for each query frame, plus the frame tolerance
/// under which a match counts as correct.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pairs: Vec<(usize, usize)>,
    pub tolerance_frames: usize,
}

pub const DEFAULT_TOLERANCE_FRAMES: usize = 3;

impl GroundTruth {
    /// `pairs` must be strictly increasing in query index.
    pub fn new(pairs: Vec<(usize, usize)>, tolerance_frames: usize) -> Result<Self> {
        for w in pairs.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Data(format!(
                    "query indices must be strictly increasing, got {} after {}",
                    w[1].0, w[0].0
                )));
            }
        }
        Ok(Self {
            pairs,
            tolerance_frames,
        })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// True reference index for a query, if it has one.
    pub fn ref_of(&self, query: usize) -> Option<usize> {
        self.pairs
            .binary_search_by_key(&query, |p| p.0)
            .ok()
            .map(|i| self.pairs[i].1)
    }

    /// Check every index against the matrices it will be used with.
    pub fn validate_against(&self, n_queries: usize, n_refs: usize) -> Result<()> {
        for &(q, r) in &self.pairs {
            if q >= n_queries {
                return Err(Error::Data(format!(
                    "ground-truth query index {q} out of range ({n_queries} queries)"
                )));
            }
            if r >= n_refs {
                return Err(Error::Data(format!(
                    "ground-truth reference index {r} out of range ({n_refs} references)"
                )));
            }
        }
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>, tolerance_frames: usize) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let headers = reader
            .headers()
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        if headers.iter().collect::<Vec<_>>() != ["query_idx", "ref_idx"] {
            return Err(Error::Format(format!(
                "{}: expected header query_idx,ref_idx",
                path.display()
            )));
        }
        let mut pairs = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            let parse = |field: usize| -> Result<usize> {
                record
                    .get(field)
                    .ok_or_else(|| {
                        Error::Format(format!("{}: row {line} missing field", path.display()))
                    })?
                    .trim()
                    .parse::<usize>()
                    .map_err(|e| Error::Data(format!("{}: row {line}: {e}", path.display())))
            };
            pairs.push((parse(0)?, parse(1)?));
        }
        Self::new(pairs, tolerance_frames)
    }

    pub fn store_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::from("query_idx,ref_idx\n");
        for &(q, r) in &self.pairs {
            out.push_str(&format!("{q},{r}\n"));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }
}

/// One coarse position prior: a half-open window over the reference
/// traverse and the queries whose true location falls inside it.
#[derive(Debug, Clone, PartialEq)]
pub struct Chunk {
    pub ref_start: usize,
    pub ref_end: usize,
    pub queries: Vec<usize>,
}

/// Sliding windows of `chunk_size` references, advanced by `step`.
/// Windows left with no queries after ground-truth assignment are dropped.
#[derive(Debug, Clone)]
pub struct ChunkSet {
    pub chunk_size: usize,
    pub step: usize,
    chunks: Vec<Chunk>,
}

impl ChunkSet {
    pub fn chunks(&self) -> &[Chunk] {
        &self.chunks
    }

    pub fn len(&self) -> usize {
        self.chunks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chunks.is_empty()
    }

    pub fn get(&self, chunk_id: usize) -> &Chunk {
        &self.chunks[chunk_id]
    }
}

/// Build chunk windows `[k*step, k*step + m)` over the reference traverse
/// and assign each query to the window containing its true reference.
pub fn build_chunks(
    refs: &FeatureMatrix,
    gt: &GroundTruth,
    chunk_size: usize,
    step: usize,
) -> Result<ChunkSet> {
    if chunk_size == 0 || chunk_size > refs.rows() {
        return Err(Error::Argument(format!(
            "chunk size {chunk_size} must be in 1..={}",
            refs.rows()
        )));
    }
    if step == 0 {
        return Err(Error::Argument("step must be at least 1".into()));
    }
    for &(_, r) in gt.pairs() {
        if r >= refs.rows() {
            return Err(Error::Data(format!(
                "ground-truth reference index {r} out of range ({} references)",
                refs.rows()
            )));
        }
    }

    let mut chunks = Vec::new();
    let mut dropped = 0usize;
    let mut start = 0usize;
    while start + chunk_size <= refs.rows() {
        let end = start + chunk_size;
        let queries: Vec<usize> = gt
            .pairs()
            .iter()
            .filter(|&&(_, r)| r >= start && r < end)
            .map(|&(q, _)| q)
            .collect();
        if queries.is_empty() {
            dropped += 1;
        } else {
            chunks.push(Chunk {
                ref_start: start,
                ref_end: end,
                queries,
            });
        }
        start += step;
    }
    if dropped > 0 {
        log::info!("dropped {dropped} chunks with no ground-truth queries");
    }
    Ok(ChunkSet {
        chunk_size,
        step,
        chunks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitRole {
    Train,
    Valid,
    Test,
}

impl fmt::Display for SplitRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitRole::Train => write!(f, "train"),
            SplitRole::Valid => write!(f, "valid"),
            SplitRole::Test => write!(f, "test"),
        }
    }
}

impl std::str::FromStr for SplitRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitRole::Train),
            "valid" => Ok(SplitRole::Valid),
            "test" => Ok(SplitRole::Test),
            other => Err(Error::Data(format!("unknown split role {other:?}"))),
        }
    }
}

/// Disjoint, exhaustive, contiguous blocks of chunk indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitAssignment {
    pub train: Vec<usize>,
    pub valid: Vec<usize>,
    pub test: Vec<usize>,
}

impl SplitAssignment {
    /// Contiguous block split. Block sizes come from flooring the train and
    /// valid fractions (the test block takes the remainder); the seed picks
    /// which rotation of the three blocks is used, so reruns with different
    /// seeds exercise different test regions without breaking contiguity.
    pub fn contiguous(n_chunks: usize, fractions: (f64, f64, f64), seed: u64) -> Result<Self> {
        if n_chunks < 10 {
            return Err(Error::Argument(format!(
                "need at least 10 chunks to split, got {n_chunks}"
            )));
        }
        let (ft, fv, fe) = fractions;
        if !(ft > 0.0 && fv > 0.0 && fe > 0.0) || (ft + fv + fe - 1.0).abs() > 1e-9 {
            return Err(Error::Argument(format!(
                "split fractions must be positive and sum to 1, got ({ft}, {fv}, {fe})"
            )));
        }
        let n_train = (ft * n_chunks as f64).floor() as usize;
        let n_valid = (fv * n_chunks as f64).floor() as usize;
        let n_test = n_chunks - n_train - n_valid;
        if n_train == 0 || n_valid == 0 || n_test == 0 {
            return Err(Error::Argument(format!(
                "split of {n_chunks} chunks leaves an empty block ({n_train}/{n_valid}/{n_test})"
            )));
        }

        let order = match seed % 3 {
            0 => [SplitRole::Train, SplitRole::Valid, SplitRole::Test],
            1 => [SplitRole::Valid, SplitRole::Test, SplitRole::Train],
            _ => [SplitRole::Test, SplitRole::Train, SplitRole::Valid],
        };
        let size_of = |role: SplitRole| match role {
            SplitRole::Train => n_train,
            SplitRole::Valid => n_valid,
            SplitRole::Test => n_test,
        };

        let mut assignment = SplitAssignment {
            train: Vec::with_capacity(n_train),
            valid: Vec::with_capacity(n_valid),
            test: Vec::with_capacity(n_test),
        };
        let mut next = 0usize;
        for role in order {
            let block: Vec<usize> = (next..next + size_of(role)).collect();
            next += block.len();
            match role {
                SplitRole::Train => assignment.train = block,
                SplitRole::Valid => assignment.valid = block,
                SplitRole::Test => assignment.test = block,
            }
        }
        Ok(assignment)
    }

    pub fn n_chunks(&self) -> usize {
        self.train.len() + self.valid.len() + self.test.len()
    }

    pub fn role_of(&self, chunk_id: usize) -> Option<SplitRole> {
        if self.train.contains(&chunk_id) {
            Some(SplitRole::Train)
        } else if self.valid.contains(&chunk_id) {
            Some(SplitRole::Valid)
        } else if self.test.contains(&chunk_id) {
            Some(SplitRole::Test)
        } else {
            None
        }
    }

    pub fn store_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut rows: Vec<(usize, SplitRole)> = Vec::with_capacity(self.n_chunks());
        for &c in &self.train {
            rows.push((c, SplitRole::Train));
        }
        for &c in &self.valid {
            rows.push((c, SplitRole::Valid));
        }
        for &c in &self.test {
            rows.push((c, SplitRole::Test));
        }
        rows.sort_unstable_by_key(|&(c, _)| c);
        let mut out = String::from("chunk_id,split\n");
        for (c, role) in rows {
            out.push_str(&format!("{c},{role}\n"));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        let mut assignment = SplitAssignment {
            train: Vec::new(),
            valid: Vec::new(),
            test: Vec::new(),
        };
        for record in reader.records() {
            let record = record.map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
            let chunk: usize = record
                .get(0)
                .unwrap_or("")
                .parse()
                .map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
            let role: SplitRole = record.get(1).unwrap_or("").parse()?;
            match role {
                SplitRole::Train => assignment.train.push(chunk),
                SplitRole::Valid => assignment.valid.push(chunk),
                SplitRole::Test => assignment.test.push(chunk),
            }
        }
        Ok(assignment)
    }
}

/// Split a chunk set into contiguous train/valid/test blocks.
pub fn split_chunks(
    chunks: &ChunkSet,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<SplitAssignment> {
    SplitAssignment::contiguous(chunks.len(), fractions, seed)
}

/// Resolved pipeline configuration. Field defaults are the values used
/// throughout the bundled benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Chunk size m (images per coarse position prior).
    pub chunk_size: usize,
    pub step: usize,
    /// Candidate sequence lengths, ascending odd values starting at 1.
    pub lengths: Vec<u32>,
    pub target_recall: f64,
    /// AMI retention threshold.
    pub alpha: f64,
    /// Under-prediction slope of the asymmetric loss.
    pub beta: f64,
    /// Over-prediction slope of the asymmetric loss.
    pub gamma: f64,
    pub hidden_layers: usize,
    pub hidden_width: usize,
    pub seed: u64,
    pub tolerance_frames: usize,
    pub fractions: (f64, f64, f64),
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            chunk_size: 75,
            step: 15,
            lengths: (0..11).map(|i| 2 * i + 1).collect(),
            target_recall: 0.75,
            alpha: 0.125,
            beta: 1.0,
            gamma: 0.01,
            hidden_layers: 3,
            hidden_width: 128,
            seed: 0,
            tolerance_frames: DEFAULT_TOLERANCE_FRAMES,
            fractions: (0.30, 0.20, 0.50),
        }
    }
}

impl PipelineConfig {
    /// Parse a flat `key = value` file. Lines starting with `#` and blank
    /// lines are ignored; unknown keys are an error.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = PipelineConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            let bad = |e: &dyn fmt::Display| Error::Config(format!("key {key}: {e}"));
            match key {
                "m" => cfg.chunk_size = value.parse().map_err(|e| bad(&e))?,
                "step" => cfg.step = value.parse().map_err(|e| bad(&e))?,
                "lengths" => {
                    cfg.lengths = value
                        .split(',')
                        .map(|s| s.trim().parse::<u32>().map_err(|e| bad(&e)))
                        .collect::<Result<Vec<u32>>>()?;
                }
                "target_recall" => cfg.target_recall = value.parse().map_err(|e| bad(&e))?,
                "alpha" => cfg.alpha = value.parse().map_err(|e| bad(&e))?,
                "beta" => cfg.beta = value.parse().map_err(|e| bad(&e))?,
                "gamma" => cfg.gamma = value.parse().map_err(|e| bad(&e))?,
                "hidden_layers" => cfg.hidden_layers = value.parse().map_err(|e| bad(&e))?,
                "hidden_width" => cfg.hidden_width = value.parse().map_err(|e| bad(&e))?,
                "seed" => cfg.seed = value.parse().map_err(|e| bad(&e))?,
                "tolerance_frames" => cfg.tolerance_frames = value.parse().map_err(|e| bad(&e))?,
                "fractions" => {
                    let parts: Vec<f64> = value
                        .split(',')
                        .map(|s| s.trim().parse::<f64>().map_err(|e| bad(&e)))
                        .collect::<Result<Vec<f64>>>()?;
                    if parts.len() != 3 {
                        return Err(Error::Config(format!(
                            "key fractions: expected 3 values, got {}",
                            parts.len()
                        )));
                    }
                    cfg.fractions = (parts[0], parts[1], parts[2]);
                }
                other => {
                    return Err(Error::Config(format!("unknown key {other:?}")));
                }
            }
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        write!(file, "{}", self.to_key_values()).map_err(|e| Error::io(path, e))
    }

    pub fn to_key_values(&self) -> String {
        let lengths = self
            .lengths
            .iter()
            .map(|l| l.to_string())
            .collect::<Vec<_>>()
            .join(",");
        format!(
            "m = {}\nstep = {}\nlengths = {}\ntarget_recall = {}\nalpha = {}\nbeta = {}\n\
             gamma = {}\nhidden_layers = {}\nhidden_width = {}\nseed = {}\n\
             tolerance_frames = {}\nfractions = {},{},{}\n",
            self.chunk_size,
            self.step,
            lengths,
            self.target_recall,
            self.alpha,
            self.beta,
            self.gamma,
            self.hidden_layers,
            self.hidden_width,
            self.seed,
            self.tolerance_frames,
            self.fractions.0,
            self.fractions.1,
            self.fractions.2,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(rows: usize, cols: usize) -> FeatureMatrix {
        let data = (0..rows * cols).map(|i| i as f32).collect();
        FeatureMatrix::new(rows, cols, data).unwrap()
    }

    fn full_coverage_gt(n: usize) -> GroundTruth {
        GroundTruth::new((0..n).map(|i| (i, i)).collect(), 3).unwrap()
    }

    #[test]
    fn feature_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vprf");
        let m = FeatureMatrix::new(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        m.store(&path).unwrap();
        let back = FeatureMatrix::load(&path).unwrap();
        assert_eq!(back.rows(), 2);
        assert_eq!(back.cols(), 3);
        assert_eq!(back.row(0), &[1.0, 2.0, 3.0]);
        assert_eq!(back.row(1), &[4.0, 5.0, 6.0]);
        assert_eq!(m, back);
    }

    #[test]
    fn feature_file_size_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vprf");
        matrix(2, 3).store(&path).unwrap();
        // Truncate one value off the payload.
        let mut bytes = fs::read(&path).unwrap();
        bytes.truncate(bytes.len() - 4);
        match FeatureMatrix::from_bytes(&bytes) {
            Err(Error::Size(_)) => {}
            other => panic!("expected size error, got {other:?}"),
        }
    }

    #[test]
    fn feature_file_nan_locates_cell() {
        let mut bytes = Vec::new();
        bytes.extend_from_slice(b"VPRF");
        bytes.extend_from_slice(&1u16.to_le_bytes());
        bytes.extend_from_slice(&2u64.to_le_bytes());
        bytes.extend_from_slice(&3u64.to_le_bytes());
        let payload = [1.0f32, f32::NAN, 3.0, 4.0, 5.0, 6.0];
        for v in payload {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
        match FeatureMatrix::from_bytes(&bytes) {
            Err(Error::Data(msg)) => assert!(msg.contains("(0, 1)"), "message was {msg:?}"),
            other => panic!("expected data error, got {other:?}"),
        }
    }

    #[test]
    fn feature_file_bad_magic_and_version() {
        let m = matrix(1, 1);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.vprf");
        m.store(&path).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        bytes[0] = b'X';
        assert!(matches!(
            FeatureMatrix::from_bytes(&bytes),
            Err(Error::Format(_))
        ));
        let mut bytes = fs::read(&path).unwrap();
        bytes[4] = 9;
        assert!(matches!(
            FeatureMatrix::from_bytes(&bytes),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn chunk_count_matches_window_enumeration() {
        // Independent count: enumerate window starts directly.
        let rows = 3876;
        let (m, step) = (75, 15);
        let mut expected = 0;
        let mut start = 0;
        while start + m <= rows {
            expected += 1;
            start += step;
        }
        assert_eq!(expected, (rows - m) / step + 1);
        assert_eq!(expected, 254);

        let refs = matrix(rows, 1);
        let gt = full_coverage_gt(rows);
        let chunks = build_chunks(&refs, &gt, m, step).unwrap();
        assert_eq!(chunks.len(), expected);
        // Starts tile with exact stride.
        for (k, c) in chunks.chunks().iter().enumerate() {
            assert_eq!(c.ref_start, k * step);
            assert_eq!(c.ref_end - c.ref_start, m);
        }
    }

    #[test]
    fn single_window_boundary() {
        let refs = matrix(75, 1);
        let chunks = build_chunks(&refs, &full_coverage_gt(75), 75, 15).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks.get(0).ref_start, 0);
        assert_eq!(chunks.get(0).ref_end, 75);
    }

    #[test]
    fn empty_chunks_are_dropped() {
        // Queries 0..9 all map into [0, 75); nothing maps into [15, 90) alone.
        let refs = matrix(90, 1);
        let gt = GroundTruth::new((0..10).map(|i| (i, i)).collect(), 3).unwrap();
        let chunks = build_chunks(&refs, &gt, 75, 15).unwrap();
        assert_eq!(chunks.len(), 1);
        assert_eq!(chunks.get(0).ref_start, 0);
    }

    #[test]
    fn chunk_size_larger_than_refs_is_an_error() {
        let refs = matrix(10, 1);
        assert!(matches!(
            build_chunks(&refs, &full_coverage_gt(10), 11, 1),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn split_counts_match_published_accounting() {
        let s = SplitAssignment::contiguous(765, (0.3, 0.2, 0.5), 0).unwrap();
        assert_eq!(s.train.len(), 229);
        assert_eq!(s.valid.len(), 153);
        assert_eq!(s.test.len(), 383);
    }

    #[test]
    fn split_ten_chunks_seed_zero() {
        let s = SplitAssignment::contiguous(10, (0.3, 0.2, 0.5), 0).unwrap();
        assert_eq!(s.train, vec![0, 1, 2]);
        assert_eq!(s.valid, vec![3, 4]);
        assert_eq!(s.test, vec![5, 6, 7, 8, 9]);
    }

    #[test]
    fn split_is_deterministic_and_rotations_stay_contiguous() {
        for seed in 0..6 {
            let a = SplitAssignment::contiguous(100, (0.3, 0.2, 0.5), seed).unwrap();
            let b = SplitAssignment::contiguous(100, (0.3, 0.2, 0.5), seed).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.train.len(), 30);
            assert_eq!(a.valid.len(), 20);
            assert_eq!(a.test.len(), 50);
            // Disjoint and exhaustive.
            let mut all: Vec<usize> = a
                .train
                .iter()
                .chain(&a.valid)
                .chain(&a.test)
                .copied()
                .collect();
            all.sort_unstable();
            assert_eq!(all, (0..100).collect::<Vec<_>>());
            // Contiguous blocks.
            for block in [&a.train, &a.valid, &a.test] {
                for w in block.windows(2) {
                    assert_eq!(w[1], w[0] + 1);
                }
            }
        }
        // Different rotations actually move the blocks.
        let s0 = SplitAssignment::contiguous(100, (0.3, 0.2, 0.5), 0).unwrap();
        let s1 = SplitAssignment::contiguous(100, (0.3, 0.2, 0.5), 1).unwrap();
        assert_ne!(s0.train, s1.train);
    }

    #[test]
    fn split_rejects_small_or_bad_input() {
        assert!(matches!(
            SplitAssignment::contiguous(9, (0.3, 0.2, 0.5), 0),
            Err(Error::Argument(_))
        ));
        assert!(matches!(
            SplitAssignment::contiguous(100, (0.5, 0.2, 0.5), 0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn ground_truth_requires_increasing_queries() {
        assert!(GroundTruth::new(vec![(0, 0), (0, 1)], 3).is_err());
        assert!(GroundTruth::new(vec![(2, 0), (1, 1)], 3).is_err());
        let gt = GroundTruth::new(vec![(1, 5), (4, 9)], 3).unwrap();
        assert_eq!(gt.ref_of(4), Some(9));
        assert_eq!(gt.ref_of(2), None);
    }

    #[test]
    fn ground_truth_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gt.csv");
        let gt = GroundTruth::new(vec![(0, 3), (1, 4), (7, 11)], 3).unwrap();
        gt.store_csv(&path).unwrap();
        let back = GroundTruth::load_csv(&path, 3).unwrap();
        assert_eq!(back.pairs(), gt.pairs());
    }

    #[test]
    fn config_parses_and_rejects_unknown_keys() {
        let cfg = PipelineConfig::parse(
            "# comment\nm = 50\nlengths = 1,3,5\ntarget_recall = 0.8\nfractions = 0.4,0.1,0.5\n",
        )
        .unwrap();
        assert_eq!(cfg.chunk_size, 50);
        assert_eq!(cfg.lengths, vec![1, 3, 5]);
        assert_eq!(cfg.target_recall, 0.8);
        assert_eq!(cfg.fractions, (0.4, 0.1, 0.5));
        assert_eq!(cfg.step, 15); // default survives

        match PipelineConfig::parse("bogus = 1\n") {
            Err(Error::Config(msg)) => assert!(msg.contains("bogus")),
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn config_round_trips_through_text() {
        let cfg = PipelineConfig::default();
        let back = PipelineConfig::parse(&cfg.to_key_values()).unwrap();
        assert_eq!(cfg, back);
    }

    #[test]
    fn split_roles_cover_all_chunks() {
        let s = SplitAssignment::contiguous(20, (0.3, 0.2, 0.5), 2).unwrap();
        for c in 0..20 {
            assert!(s.role_of(c).is_some());
        }
        assert_eq!(s.role_of(20), None);
    }
}
