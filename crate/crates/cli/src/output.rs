use crate::Command;
use anyhow::{Context, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use ssrdc_core::params::CALIBRATION_FIELDS;
use ssrdc_core::Config;
use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Constants that were fitted rather than published, echoed in every report.
#[derive(Debug, Serialize)]
pub struct CalibrationEcho {
    pub fields: &'static [&'static str],
    pub km: f64,
    pub vdc: f64,
    pub kd: f64,
    pub kf: f64,
    pub v1: f64,
}

#[derive(Debug, Serialize)]
struct Report<'a, T: Serialize> {
    command: &'a Command,
    config_hash: &'a str,
    calibration_parameters: &'a CalibrationEcho,
    result: &'a T,
}

/// Writes reports into the output directory; timings go to their own file.
pub struct Output {
    dir: PathBuf,
    command: Command,
    hash: String,
    calib: CalibrationEcho,
    started: Instant,
    timings: BTreeMap<String, f64>,
}

pub fn config_hash(cfg: &Config) -> Result<String> {
    let text = serde_json::to_string(cfg)?;
    Ok(format!("{:x}", Sha256::digest(text.as_bytes())))
}

impl Output {
    pub fn new(dir: &Path, command: &Command, cfg: &Config) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let hash = config_hash(cfg)?;
        let out = Self {
            dir: dir.to_path_buf(),
            command: command.clone(),
            hash,
            calib: CalibrationEcho {
                fields: &CALIBRATION_FIELDS,
                km: cfg.plant.km,
                vdc: cfg.plant.vdc,
                kd: cfg.plant.kd,
                kf: cfg.plant.kf,
                v1: cfg.operating_point.v1,
            },
            started: Instant::now(),
            timings: BTreeMap::new(),
        };
        out.json("config.json", cfg)?;
        Ok(out)
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<()> {
        let path = self.path(name);
        let mut w = BufWriter::new(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }

    /// A report wrapped with the command echo, config hash and calibration.
    pub fn report<T: Serialize>(&self, name: &str, result: &T) -> Result<()> {
        self.json(
            name,
            &Report { command: &self.command, config_hash: &self.hash, calibration_parameters: &self.calib, result },
        )
    }

    /// A CSV file from a header and rows of already formatted cells.
    pub fn csv(&self, name: &str, header: &str, rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
        let path = self.path(name);
        let mut w = BufWriter::new(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        writeln!(w, "{header}")?;
        for r in rows {
            writeln!(w, "{}", r.join(","))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn writer(&self, name: &str) -> Result<BufWriter<fs::File>> {
        let path = self.path(name);
        Ok(BufWriter::new(fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?))
    }

    pub fn time(&mut self, key: impl Into<String>, seconds: f64) {
        self.timings.insert(key.into(), seconds);
    }

    pub fn finish(mut self) -> Result<()> {
        let total = self.started.elapsed().as_secs_f64();
        self.timings.insert("total".into(), total);
        self.json("timings.json", &self.timings)
    }
}

/// Shortest round-trip text of a float; empty for `None`.
pub fn num(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}
