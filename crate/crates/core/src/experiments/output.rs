use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::kernels::KernelMatrix;
use crate::Result;

/// Output directory of one run; stamps every file with the config hash
/// and seed.
#[derive(Debug, Clone)]
pub struct OutputDir {
    dir: PathBuf,
    config_hash: String,
    seed: u64,
}

impl OutputDir {
    pub fn create(dir: impl Into<PathBuf>, config_hash: impl Into<String>, seed: u64) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir)?;
        Ok(OutputDir {
            dir,
            config_hash: config_hash.into(),
            seed,
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// `{"config_hash", "seed", "data"}`.
    pub fn write_json<T: Serialize>(&self, name: &str, data: &T) -> Result<PathBuf> {
        let doc = serde_json::json!({
            "config_hash": self.config_hash,
            "seed": self.seed,
            "data": data,
        });
        let path = self.path(name);
        std::fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
        Ok(path)
    }

    /// CSV preceded by a `# config_hash=…,seed=…` comment line.
    pub fn write_csv(&self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.path(name);
        let mut f = std::io::BufWriter::new(std::fs::File::create(&path)?);
        writeln!(f, "# config_hash={},seed={}", self.config_hash, self.seed)?;
        if !header.is_empty() {
            writeln!(f, "{}", header.join(","))?;
        }
        for r in rows {
            writeln!(f, "{}", r.join(","))?;
        }
        f.flush()?;
        Ok(path)
    }

    /// Dense CSV plus JSON for one kernel matrix.
    pub fn write_kernel(&self, stem: &str, k: &KernelMatrix, params: serde_json::Value) -> Result<()> {
        let rows: Vec<Vec<String>> = (0..k.values.nrows())
            .map(|i| k.values.row(i).iter().map(|x| x.to_string()).collect())
            .collect();
        self.write_csv(&format!("{stem}.csv"), &[], &rows)?;
        let values: Vec<Vec<f64>> = (0..k.values.nrows())
            .map(|i| k.values.row(i).iter().copied().collect())
            .collect();
        self.write_json(
            &format!("{stem}.json"),
            &serde_json::json!({
                "kind": k.kind.name(),
                "params": params,
                "graph_ids": k.graph_ids,
                "values": values,
            }),
        )?;
        Ok(())
    }
}

/// Reads the `data` field back from a file written by [`OutputDir::write_json`].
pub fn read_json_data<T: serde::de::DeserializeOwned>(path: &Path) -> Result<(String, T)> {
    let text = std::fs::read_to_string(path)?;
    let mut doc: serde_json::Value = serde_json::from_str(&text)?;
    let hash = doc["config_hash"].as_str().unwrap_or_default().to_string();
    let data = serde_json::from_value(doc["data"].take())?;
    Ok((hash, data))
}
