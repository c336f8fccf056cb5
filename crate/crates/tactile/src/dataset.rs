//! Calibration datasets on disk: `manifest.json` plus one field CSV per sample.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tactile_core::field::GridSpec;
use tactile_core::surrogate::{DatasetRanges, LoadTriple, ObjectProfile, Sample, SurrogateConfig};

use crate::error::{CliError, Result};
use crate::fieldio;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleEntry {
    /// Field file relative to the dataset directory.
    pub file: String,
    pub object_id: usize,
    pub load: LoadTriple,
    /// Recorded `[f_n, |f_t|, f_tau]`.
    pub label: [f64; 3],
    pub outlier: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub grid: GridSpec,
    pub seed: u64,
    pub surrogate: SurrogateConfig,
    pub ranges: DatasetRanges,
    pub objects: Vec<ObjectProfile>,
    pub samples: Vec<SampleEntry>,
}

fn field_name(k: usize) -> String {
    format!("fields/sample_{k:04}.csv")
}

/// Writes the samples and manifest, returning the dataset hash.
pub fn write_dataset(
    dir: &Path,
    grid: GridSpec,
    seed: u64,
    surrogate: SurrogateConfig,
    ranges: DatasetRanges,
    objects: Vec<ObjectProfile>,
    samples: &[Sample],
) -> Result<String> {
    let mut entries = Vec::with_capacity(samples.len());
    for (k, s) in samples.iter().enumerate() {
        let file = field_name(k);
        fieldio::save_vector(&dir.join(&file), &s.field)?;
        entries.push(SampleEntry { file, object_id: s.object_id, load: s.load, label: s.label, outlier: s.outlier });
    }
    let manifest = Manifest { grid, seed, surrogate, ranges, objects, samples: entries };
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::json(dir.join(MANIFEST), e))?;
    fieldio::write_text(&dir.join(MANIFEST), &(text + "\n"))?;
    dataset_hash(dir)
}

pub fn read_manifest(dir: &Path) -> Result<Manifest> {
    let path = dir.join(MANIFEST);
    let m: Manifest = serde_json::from_str(&fieldio::read_text(&path)?).map_err(|e| CliError::json(&path, e))?;
    let g = m.grid;
    GridSpec::new(g.nx(), g.ny(), g.spacing(), g.origin())?;
    Ok(m)
}

/// Loads every sample, checking each field against the manifest grid.
pub fn read_dataset(dir: &Path) -> Result<(Manifest, Vec<Sample>)> {
    let manifest = read_manifest(dir)?;
    if manifest.samples.is_empty() {
        return Err(CliError::Config(format!("{}: manifest lists no samples", dir.display())));
    }
    let mut samples = Vec::with_capacity(manifest.samples.len());
    for e in &manifest.samples {
        let path = dir.join(&e.file);
        let field = fieldio::load_vector(&path)?;
        if *field.grid() != manifest.grid {
            return Err(CliError::Config(format!("{}: grid differs from the manifest", path.display())));
        }
        samples.push(Sample { field, load: e.load, label: e.label, object_id: e.object_id, outlier: e.outlier });
    }
    Ok((manifest, samples))
}

/// SHA-256 over the manifest followed by every field file in manifest order.
pub fn dataset_hash(dir: &Path) -> Result<String> {
    let manifest = read_manifest(dir)?;
    let mut h = Sha256::new();
    let mut feed = |p: PathBuf| -> Result<()> {
        h.update(std::fs::read(&p).map_err(|e| CliError::io(&p, e))?);
        Ok(())
    };
    feed(dir.join(MANIFEST))?;
    for e in &manifest.samples {
        feed(dir.join(&e.file))?;
    }
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}
