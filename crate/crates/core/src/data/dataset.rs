//! Labeled sequence collections: directory layout, manifest, stratified split.

use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::format::{read_sequence, write_sequence, SEQUENCE_EXTENSION, SEQUENCE_VERSION};
use super::label::{ClassLabel, CLASS_NAMES, NUM_CLASSES};
use super::sequence::Sequence;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub sequence: Sequence,
    pub label: ClassLabel,
}

/// Summary written next to a dataset as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u16,
    pub fps: f32,
    pub steps: usize,
    pub dim: usize,
    pub classes: Vec<String>,
    /// Sequence count per class, aligned with `classes`.
    pub counts: Vec<usize>,
    pub total: usize,
    pub warnings: Vec<String>,
}

/// An in-memory set of labeled sequences sharing one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    samples: Vec<Sample>,
    fps: f32,
    warnings: Vec<String>,
}

impl LabeledDataset {
    pub fn new(samples: Vec<Sample>, fps: f32) -> Result<Self> {
        if let Some(first) = samples.first() {
            let shape = first.sequence.shape();
            if let Some(bad) = samples.iter().find(|s| s.sequence.shape() != shape) {
                return Err(Error::Shape(format!(
                    "mixed sequence shapes {:?} and {:?}",
                    shape,
                    bad.sequence.shape()
                )));
            }
        }
        Ok(LabeledDataset {
            samples,
            fps,
            warnings: Vec::new(),
        })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn fps(&self) -> f32 {
        self.fps
    }

    /// `(steps, dim)` of every sequence, `None` when empty.
    pub fn shape(&self) -> Option<(usize, usize)> {
        self.samples.first().map(|s| s.sequence.shape())
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for s in &self.samples {
            counts[s.label.index()] += 1;
        }
        counts
    }

    pub fn labels(&self) -> Vec<ClassLabel> {
        self.samples.iter().map(|s| s.label).collect()
    }

    pub fn manifest(&self) -> Manifest {
        let (steps, dim) = self.shape().unwrap_or((0, 0));
        Manifest {
            format_version: SEQUENCE_VERSION,
            fps: self.fps,
            steps,
            dim,
            classes: CLASS_NAMES.iter().map(|s| s.to_string()).collect(),
            counts: self.class_counts().to_vec(),
            total: self.samples.len(),
            warnings: self.warnings.clone(),
        }
    }

    fn subset(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            samples: indices.iter().map(|&i| self.samples[i].clone()).collect(),
            fps: self.fps,
            warnings: Vec::new(),
        }
    }
}

/// Per-class test count: `round(fraction · count)` rounded half away from
/// zero, kept within `1..=count-1` so both partitions see every class.
pub fn stratified_test_count(count: usize, test_fraction: f64) -> usize {
    let n = (test_fraction * count as f64).round() as usize;
    n.clamp(1, count.saturating_sub(1).max(1))
}

/// Stratified, seeded train/test partition.
///
/// Within each class the sample order is shuffled with one seeded generator
/// (classes visited in canonical order) and the first
/// [`stratified_test_count`] samples go to the test side. Both partitions keep
/// the original dataset order.
pub fn split(
    dataset: &LabeledDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<(LabeledDataset, LabeledDataset)> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(Error::Config(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); NUM_CLASSES];
    for (i, s) in dataset.samples.iter().enumerate() {
        by_class[s.label.index()].push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test = Vec::new();
    let mut train = Vec::new();
    for (class, mut members) in by_class.into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(Error::InsufficientData(format!(
                "class {} has {} sequence(s), at least 2 are needed to split",
                CLASS_NAMES[class],
                members.len()
            )));
        }
        let n_test = stratified_test_count(members.len(), test_fraction);
        members.shuffle(&mut rng);
        test.extend_from_slice(&members[..n_test]);
        train.extend_from_slice(&members[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((dataset.subset(&train), dataset.subset(&test)))
}

fn sequence_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::at(dir, e.into()))? {
        let path = entry.map_err(|e| Error::at(dir, e.into()))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == SEQUENCE_EXTENSION) {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Loads `<root>/<ClassName>/*.snk`. Samples are ordered by class index, then
/// by file name.
pub fn load_dataset(root: impl AsRef<Path>) -> Result<LabeledDataset> {
    let root = root.as_ref();
    let mut class_dirs: Vec<Option<PathBuf>> = vec![None; NUM_CLASSES];
    for entry in fs::read_dir(root).map_err(|e| Error::at(root, e.into()))? {
        let path = entry.map_err(|e| Error::at(root, e.into()))?.path();
        if !path.is_dir() {
            continue;
        }
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .ok_or_else(|| Error::at(&path, Error::UnknownClass("<non-utf8>".into())))?;
        let label = ClassLabel::from_name(name).map_err(|e| Error::at(&path, e))?;
        class_dirs[label.index()] = Some(path);
    }

    let mut samples = Vec::new();
    let mut warnings = Vec::new();
    let mut fps: Option<f32> = None;
    for (label, dir) in ClassLabel::all().zip(class_dirs) {
        let Some(dir) = dir else {
            warnings.push(format!("class {label} has no directory"));
            continue;
        };
        let files = sequence_files(&dir)?;
        if files.is_empty() {
            warnings.push(format!("class {label} has no sequences"));
        }
        for path in files {
            let record = read_sequence(&path)?;
            if record.label != label {
                return Err(Error::at(
                    &path,
                    Error::Format(format!(
                        "file is labeled {} but stored under {label}",
                        record.label
                    )),
                ));
            }
            match fps {
                None => fps = Some(record.fps),
                Some(f) if f.to_bits() != record.fps.to_bits() => {
                    warnings.push(format!(
                        "{} records {} fps, dataset uses {f}",
                        path.display(),
                        record.fps
                    ));
                }
                Some(_) => {}
            }
            samples.push(Sample {
                sequence: record.sequence,
                label,
            });
        }
    }
    for w in &warnings {
        log::warn!("{}: {w}", root.display());
    }
    let mut dataset = LabeledDataset::new(samples, fps.unwrap_or(0.0))?;
    dataset.warnings = warnings;
    Ok(dataset)
}

/// Writes every sample as `<root>/<ClassName>/seq_NNNN.snk` plus
/// `<root>/manifest.json`. All eight class directories are created.
pub fn write_dataset(root: impl AsRef<Path>, dataset: &LabeledDataset) -> Result<()> {
    let root = root.as_ref();
    let mut next = [0usize; NUM_CLASSES];
    for label in ClassLabel::all() {
        let dir = root.join(label.name());
        fs::create_dir_all(&dir).map_err(|e| Error::at(&dir, e.into()))?;
    }
    for sample in &dataset.samples {
        let n = &mut next[sample.label.index()];
        let path = root
            .join(sample.label.name())
            .join(format!("seq_{:04}.{SEQUENCE_EXTENSION}", *n));
        *n += 1;
        write_sequence(&path, &sample.sequence, sample.label, dataset.fps)?;
    }
    let path = root.join(MANIFEST_FILE);
    let json = serde_json::to_string_pretty(&dataset.manifest())?;
    fs::write(&path, json + "\n").map_err(|e| Error::at(&path, e.into()))
}
