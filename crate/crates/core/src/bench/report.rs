use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One measured timing point.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TimingRow {
    pub method: String,
    pub n: usize,
    pub d: usize,
    pub median_ns: f64,
}

/// Wall-clock summary of the tracking fast path. Nondeterministic by
/// nature; excluded from reports unless explicitly requested.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct LatencySummary {
    pub mean_ns: f64,
    pub max_ns: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EnvironmentMeta {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl EnvironmentMeta {
    pub fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            os: std::env::consts::OS.to_string(),
            arch: std::env::consts::ARCH.to_string(),
        }
    }
}

/// Output format for report files.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

impl std::str::FromStr for ReportFormat {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(crate::Error::InvalidConfig(format!(
                "unknown format '{other}' (expected json | csv)"
            ))),
        }
    }
}

/// Per-trial results: per-cycle means, per-frame traces, timing table,
/// environment metadata, and the seed that produced it all.
///
/// Everything except the `timing` table and `latency` summary is a pure
/// function of the configuration, so re-running with the same seed yields
/// byte-identical serialized output for those fields.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct TrialReport {
    pub kind: String,
    pub seed: u64,
    pub sigma: f64,
    pub frames: usize,
    pub cycles: Vec<usize>,
    /// Mean rotation error per cycle, degrees, coreset method.
    pub coreset_mean_deg: Vec<f64>,
    /// Mean rotation error per cycle, degrees, uniform-sample baseline.
    /// Empty for trials without the baseline.
    pub uniform_mean_deg: Vec<f64>,
    /// Coreset sparsity observed (0 when not applicable).
    pub coreset_size: usize,
    /// Per-frame traces indexed `[cycle][frame]`, degrees.
    pub per_frame_coreset_deg: Vec<Vec<f64>>,
    pub per_frame_uniform_deg: Vec<Vec<f64>>,
    /// Frames since the last coreset recomputation, `[cycle][frame]`.
    pub staleness: Vec<Vec<usize>>,
    /// Measured timings (empty outside timing trials).
    pub timing: Vec<TimingRow>,
    pub latency: Option<LatencySummary>,
    pub environment: EnvironmentMeta,
}

impl TrialReport {
    pub fn new(kind: &str, seed: u64, sigma: f64, frames: usize, cycles: Vec<usize>) -> Self {
        Self {
            kind: kind.to_string(),
            seed,
            sigma,
            frames,
            cycles,
            coreset_mean_deg: Vec::new(),
            uniform_mean_deg: Vec::new(),
            coreset_size: 0,
            per_frame_coreset_deg: Vec::new(),
            per_frame_uniform_deg: Vec::new(),
            staleness: Vec::new(),
            timing: Vec::new(),
            latency: None,
            environment: EnvironmentMeta::current(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    /// Flat CSV view. Error and tracking trials emit one row per cycle data
    /// point; the error trial's wide row carries `2 + 2 * |cycles|` columns
    /// (seed, sigma, then coreset/uniform means per cycle). Timing trials
    /// emit one row per measured size point.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        match self.kind.as_str() {
            "timing-trial" => {
                out.push_str("method,n,d,median_ns\n");
                for row in &self.timing {
                    out.push_str(&format!(
                        "{},{},{},{}\n",
                        row.method, row.n, row.d, row.median_ns
                    ));
                }
            }
            "tracking-loop" => {
                out.push_str("cycle,frame,staleness,error_deg\n");
                for (ci, &cycle) in self.cycles.iter().enumerate() {
                    for f in 0..self.frames {
                        out.push_str(&format!(
                            "{},{},{},{}\n",
                            cycle, f, self.staleness[ci][f], self.per_frame_coreset_deg[ci][f]
                        ));
                    }
                }
            }
            _ => {
                let mut header = String::from("seed,sigma");
                for &c in &self.cycles {
                    header.push_str(&format!(",coreset_mean_c{c},uniform_mean_c{c}"));
                }
                out.push_str(&header);
                out.push('\n');
                let mut row = format!("{},{}", self.seed, self.sigma);
                for i in 0..self.cycles.len() {
                    row.push_str(&format!(
                        ",{},{}",
                        self.coreset_mean_deg[i], self.uniform_mean_deg[i]
                    ));
                }
                out.push_str(&row);
                out.push('\n');
            }
        }
        out
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        match format {
            ReportFormat::Json => self.to_json(),
            ReportFormat::Csv => Ok(self.to_csv()),
        }
    }

    /// Writes the rendered report to `path`, or to stdout when absent.
    /// Byte-stable given identical report contents.
    pub fn emit(&self, path: Option<&Path>, format: ReportFormat) -> Result<()> {
        let text = self.render(format)?;
        match path {
            Some(p) => {
                let mut f = std::fs::File::create(p)?;
                f.write_all(text.as_bytes())?;
            }
            None => {
                std::io::stdout().write_all(text.as_bytes())?;
            }
        }
        Ok(())
    }
}
