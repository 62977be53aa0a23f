use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bench::layout;
use crate::error::{Error, Result};
use crate::geometry::PointSet;
use crate::seed;

/// Marker layout for synthetic trials.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub enum Layout {
    /// Ten coplanar markers in `R^3` (rank 2).
    Planar10,
    /// `n` Gaussian markers in `R^d`, unit-diameter scaled.
    Random { n: usize, d: usize },
    /// Markers loaded from a CSV file.
    FromFile(PathBuf),
}

impl Layout {
    /// Parses `planar10 | random | file:PATH` (the CLI grammar).
    pub fn parse(text: &str, n: usize, d: usize) -> Result<Layout> {
        match text {
            "planar10" => Ok(Layout::Planar10),
            "random" => Ok(Layout::Random { n, d }),
            other => {
                if let Some(path) = other.strip_prefix("file:") {
                    Ok(Layout::FromFile(PathBuf::from(path)))
                } else {
                    Err(Error::InvalidConfig(format!(
                        "unknown layout '{other}' (expected planar10 | random | file:PATH)"
                    )))
                }
            }
        }
    }
}

/// Per-frame motion of the simulated rig.
#[derive(Debug, Clone, Copy, Serialize, PartialEq)]
pub struct TrajectorySpec {
    /// Rotation rate in the first coordinate plane, degrees per frame.
    pub rot_deg_per_frame: f64,
    /// Translation rate along the normalized all-ones direction, units per
    /// frame.
    pub trans_per_frame: f64,
}

impl Default for TrajectorySpec {
    fn default() -> Self {
        Self {
            rot_deg_per_frame: 1.0,
            trans_per_frame: 0.002,
        }
    }
}

/// Configuration of an error or tracking trial.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct TrialConfig {
    pub layout: Layout,
    /// Noise standard deviation per coordinate, in marker units.
    pub sigma: f64,
    pub frames: usize,
    /// Calculation cycles: the coreset (and the paired uniform sample) are
    /// recomputed every `x` frames for each `x` listed here.
    pub cycles: Vec<usize>,
    pub seed: u64,
    pub trajectory: TrajectorySpec,
}

impl TrialConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "sigma must be finite and nonnegative, got {}",
                self.sigma
            )));
        }
        if self.frames < 1 {
            return Err(Error::InvalidConfig("frames must be at least 1".into()));
        }
        if self.cycles.is_empty() {
            return Err(Error::InvalidConfig("at least one cycle required".into()));
        }
        for &c in &self.cycles {
            if c < 1 || c > self.frames {
                return Err(Error::InvalidConfig(format!(
                    "cycle {c} outside [1, {}]",
                    self.frames
                )));
            }
        }
        if let Layout::Random { n, d } = self.layout {
            if n < 1 || d < 2 {
                return Err(Error::InvalidConfig(format!(
                    "random layout needs n >= 1 and d >= 2, got n={n} d={d}"
                )));
            }
        }
        Ok(())
    }

    /// The known marker set `P` for this configuration. Deterministic given
    /// the seed.
    pub fn base_points(&self) -> Result<PointSet> {
        match &self.layout {
            Layout::Planar10 => Ok(layout::planar10()),
            Layout::Random { n, d } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed::derive(self.seed, 0x4c41594f));
                layout::random_layout(*n, *d, &mut rng)
            }
            Layout::FromFile(path) => PointSet::from_csv_path(path),
        }
    }
}
