//! Files written by a run: CSV tables plus a `manifest.json` describing
//! the run.

use anyhow::{Context, Result};
use arc_core::sweep::format_float;
use arc_core::NessResult;
use serde::Serialize;
use serde_json::Value;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub context: String,
    pub error: String,
}

pub struct Output {
    dir: PathBuf,
    files: Vec<String>,
    failures: Vec<Failure>,
}

/// `{experiment}_{N_W}_{T}.csv`; `None` stands for several values.
pub fn file_name(experiment: &str, n_modes: Option<usize>, temperature: Option<f64>) -> String {
    let n = n_modes.map_or("multi".to_string(), |n| n.to_string());
    let t = temperature.map_or("multi".to_string(), |t| format!("{t}"));
    format!("{experiment}_{n}_{t}.csv")
}

impl Output {
    pub fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Output { dir: dir.to_path_buf(), files: Vec::new(), failures: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn failures(&self) -> &[Failure] {
        &self.failures
    }

    pub fn fail(&mut self, context: impl Into<String>, error: impl ToString) {
        let f = Failure { context: context.into(), error: error.to_string() };
        log::warn!("{}: {}", f.context, f.error);
        self.failures.push(f);
    }

    pub fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("opening {}", path.display()))?;
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
        self.files.push(name.to_string());
        log::info!("wrote {} ({} rows)", path.display(), rows.len());
        Ok(path)
    }

    /// Steady-state results, optionally prefixed by extra label columns.
    pub fn results(&mut self, name: &str, labels: &[&str], rows: &[(Vec<String>, NessResult)]) -> Result<PathBuf> {
        let header: Vec<&str> = labels.iter().copied().chain(NessResult::HEADER).collect();
        let body: Vec<Vec<String>> = rows
            .iter()
            .map(|(l, r)| l.iter().cloned().chain(r.record()).collect())
            .collect();
        self.table(name, &header, &body)
    }

    pub fn manifest(&self, experiment: &str, config: &Value, wall_seconds: f64, summary: Value) -> Result<PathBuf> {
        let doc = serde_json::json!({
            "experiment": experiment,
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
            "wall_seconds": wall_seconds,
            "outputs": self.files,
            "failures": self.failures,
            "summary": summary,
        });
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, serde_json::to_string_pretty(&doc)?).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

pub fn f(x: f64) -> String {
    format_float(x)
}
