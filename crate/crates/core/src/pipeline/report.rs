use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::cluster::{ClusterAssignment, ClusterModel};
use crate::error::{Error, Result};
use crate::patterns::{ClusterProfile, PatternAssignment, SimilarityReport};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WrittenFile {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

/// An output directory and the files written to it so far.
#[derive(Debug)]
pub struct Bundle {
    dir: PathBuf,
    files: Vec<WrittenFile>,
}

impl Bundle {
    pub fn create(dir: &Path) -> Result<Bundle> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Bundle {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn files(&self) -> &[WrittenFile] {
        &self.files
    }

    pub fn write_bytes(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.path(name);
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.retain(|f| f.name != name);
        self.files.push(WrittenFile {
            name: name.to_string(),
            sha256: sha256_hex(bytes),
            bytes: bytes.len(),
        });
        Ok(path)
    }

    pub fn write_with(
        &mut self,
        name: &str,
        f: impl FnOnce(&mut Vec<u8>) -> Result<()>,
    ) -> Result<PathBuf> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        self.write_bytes(name, &buf)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }
}

pub fn write_assignments_csv<W: Write>(assignment: &ClusterAssignment, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "cluster", "strength"])?;
    for (id, m) in assignment.ids.iter().zip(&assignment.memberships) {
        w.write_record([id.clone(), m.label.to_string(), m.strength.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterSummary<'a> {
    pub records: usize,
    pub fitted: usize,
    pub clusters: usize,
    pub noise_records: usize,
    pub noise_fraction: f64,
    pub fit_noise_fraction: f64,
    pub cluster_info: &'a [crate::cluster::ClusterInfo],
}

pub fn cluster_summary<'a>(
    model: &'a ClusterModel,
    assignment: &ClusterAssignment,
) -> ClusterSummary<'a> {
    let noise = assignment.noise_count();
    ClusterSummary {
        records: assignment.len(),
        fitted: model.n_fitted(),
        clusters: model.clusters.len(),
        noise_records: noise,
        noise_fraction: if assignment.is_empty() {
            0.0
        } else {
            noise as f64 / assignment.len() as f64
        },
        fit_noise_fraction: model.noise_fraction(),
        cluster_info: &model.clusters,
    }
}

/// `clusters.csv`: id, size, pattern, dominant codes, centroid.
pub fn write_clusters_csv<W: Write>(
    profiles: &[ClusterProfile],
    assignments: &[PatternAssignment],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["id", "size", "pattern", "dominant", "centroid"])?;
    for p in profiles {
        let a = assignments.iter().find(|a| a.cluster == p.id);
        let centroid: Vec<String> = p.centroid.iter().map(|c| format!("{c:.6}")).collect();
        w.write_record([
            p.id.to_string(),
            p.size.to_string(),
            a.map(|a| a.pattern.clone()).unwrap_or_default(),
            p.dominant_codes().join("+"),
            centroid.join(" "),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Cosine matrix with a leading `cluster` column.
pub fn write_similarity_csv<W: Write>(report: &SimilarityReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["cluster".to_string()];
    header.extend(report.clusters.iter().map(|c| c.to_string()));
    w.write_record(&header)?;
    for (c, row) in report.clusters.iter().zip(&report.matrix) {
        let mut fields = vec![c.to_string()];
        fields.extend(row.iter().map(|x| format!("{x:.6}")));
        w.write_record(&fields)?;
    }
    w.flush()?;
    Ok(())
}
