//! Run and sweep configuration, JSON-serializable.

use serde::{Deserialize, Serialize};

use crate::ensemble::ModelParams;
use crate::error::{Error, Result};
use crate::Real;

/// Binning of the driven-LSD histogram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramConfig {
    /// Number of uniform bins.
    #[serde(default = "default_bins")]
    pub bins: usize,
    /// Half-span of the histogram; sized from the predicted contour when
    /// absent.
    #[serde(default)]
    pub span: Option<Real>,
}

fn default_bins() -> usize {
    201
}

impl Default for HistogramConfig {
    fn default() -> Self {
        Self {
            bins: default_bins(),
            span: None,
        }
    }
}

/// Binning overrides for the field-free reference histogram.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReferenceConfig {
    #[serde(default)]
    pub bins: Option<usize>,
    #[serde(default)]
    pub span: Option<Real>,
}

/// Everything needed to run one ensemble point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    pub params: ModelParams,
    #[serde(default)]
    pub histogram: HistogramConfig,
    #[serde(default)]
    pub reference: ReferenceConfig,
    /// Weight fit samples uniformly instead of by per-bin counts.
    #[serde(default)]
    pub uniform_weights: bool,
}

impl PointConfig {
    pub fn new(params: ModelParams) -> Self {
        Self {
            params,
            histogram: HistogramConfig::default(),
            reference: ReferenceConfig::default(),
            uniform_weights: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.histogram.bins < 1 {
            return Err(Error::Config("histogram.bins must be >= 1".into()));
        }
        if let Some(span) = self.histogram.span {
            if !(span > 0.0) {
                return Err(Error::Config("histogram.span must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Rabi,
    VRms,
    NStates,
}

/// Localization-length cutoffs used to assign points to regression cohorts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohortThresholds {
    /// L below this counts as "L << 1".
    #[serde(default = "default_l_small")]
    pub l_small: Real,
    /// L above this counts as "L >> 1".
    #[serde(default = "default_l_large")]
    pub l_large: Real,
}

fn default_l_small() -> Real {
    0.3
}

fn default_l_large() -> Real {
    3.0
}

impl Default for CohortThresholds {
    fn default() -> Self {
        Self {
            l_small: default_l_small(),
            l_large: default_l_large(),
        }
    }
}

/// A one-axis sweep of ensemble points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub base: PointConfig,
    pub axis: SweepAxis,
    /// Axis values, strictly positive and sorted ascending.
    pub values: Vec<Real>,
    #[serde(default)]
    pub thresholds: CohortThresholds,
    /// Output directory; CLI --out overrides it.
    #[serde(default)]
    pub out_dir: Option<String>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.values.is_empty() {
            return Err(Error::Config("sweep has no axis values".into()));
        }
        for pair in self.values.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::Config(
                    "axis values must be strictly increasing".into(),
                ));
            }
        }
        if self.values.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Config("axis values must be positive".into()));
        }
        if self.axis == SweepAxis::NStates {
            for &v in &self.values {
                let n = v as usize;
                if n as Real != v || n < 3 || n % 2 == 0 {
                    return Err(Error::Config(format!(
                        "n_states axis values must be odd integers >= 3, got {v}"
                    )));
                }
            }
        }
        for i in 0..self.values.len() {
            self.point(i)?.validate()?;
        }
        Ok(())
    }

    /// The point configuration at axis index `i`.
    pub fn point(&self, i: usize) -> Result<PointConfig> {
        let value = *self
            .values
            .get(i)
            .ok_or_else(|| Error::Config(format!("axis index {i} out of range")))?;
        let mut cfg = self.base.clone();
        match self.axis {
            SweepAxis::Rabi => cfg.params.rabi = value,
            SweepAxis::VRms => cfg.params.v_rms = value,
            SweepAxis::NStates => cfg.params.n_states = value as usize,
        }
        Ok(cfg)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}
