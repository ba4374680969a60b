//! Flat `key = value` override files.
//!
//! ```text
//! # comments start with '#'
//! episodes = 4000
//! alpha1 = 0.1
//! epsilon_end = 0.05
//! target_sync_interval = 200
//! ```
//!
//! Every key is optional; unknown keys are rejected. The syntax is TOML
//! restricted to top-level scalars.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::approximator::TargetSync;
use crate::bilevel_ac::BiACConfig;
use crate::bilevel_tabular::{AlphaSchedule, TabularConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub episodes: Option<usize>,
    pub warmup_steps: Option<usize>,
    pub alpha1: Option<f64>,
    pub alpha2: Option<f64>,
    /// Harmonic decay constant for tabular learning rates.
    pub harmonic_h: Option<f64>,
    pub beta: Option<f64>,
    pub momentum: Option<f64>,
    pub gamma: Option<f64>,
    pub q0: Option<f64>,
    pub epsilon_start: Option<f64>,
    pub epsilon_end: Option<f64>,
    pub epsilon_decay: Option<f64>,
    pub hidden: Option<usize>,
    pub batch_size: Option<usize>,
    pub buffer_capacity: Option<usize>,
    pub target_sync_interval: Option<usize>,
    pub soft_sync_tau: Option<f64>,
    pub temperature_start: Option<f64>,
    pub temperature_end: Option<f64>,
    pub temperature_steps: Option<usize>,
    /// Value-iteration stopping tolerance.
    pub tolerance: Option<f64>,
    /// Study settings.
    pub size: Option<usize>,
    pub trials: Option<usize>,
    pub covariances: Option<Vec<f64>>,
}

impl Overrides {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn apply_tabular(&self, mut c: TabularConfig) -> TabularConfig {
        set(&mut c.episodes, self.episodes);
        set(&mut c.warmup_steps, self.warmup_steps);
        set(&mut c.alpha1, self.alpha1);
        set(&mut c.alpha2, self.alpha2);
        set(&mut c.q0, self.q0);
        set(&mut c.epsilon.start, self.epsilon_start);
        set(&mut c.epsilon.end, self.epsilon_end);
        set(&mut c.epsilon.decay_frac, self.epsilon_decay);
        if let Some(h) = self.harmonic_h {
            c.alpha_schedule = AlphaSchedule::Harmonic { h };
        }
        if self.gamma.is_some() {
            c.gamma = self.gamma;
        }
        c
    }

    pub fn apply_biac(&self, mut c: BiACConfig) -> BiACConfig {
        set(&mut c.episodes, self.episodes);
        set(&mut c.warmup_steps, self.warmup_steps);
        set(&mut c.alpha1, self.alpha1);
        set(&mut c.alpha2, self.alpha2);
        set(&mut c.beta, self.beta);
        set(&mut c.momentum, self.momentum);
        set(&mut c.hidden, self.hidden);
        set(&mut c.batch_size, self.batch_size);
        set(&mut c.buffer_capacity, self.buffer_capacity);
        set(&mut c.epsilon.start, self.epsilon_start);
        set(&mut c.epsilon.end, self.epsilon_end);
        set(&mut c.epsilon.decay_frac, self.epsilon_decay);
        set(&mut c.gumbel.initial, self.temperature_start);
        set(&mut c.gumbel.final_temperature, self.temperature_end);
        set(&mut c.gumbel.steps, self.temperature_steps);
        if let Some(interval) = self.target_sync_interval {
            c.target_sync = TargetSync::Hard { interval };
        }
        if let Some(tau) = self.soft_sync_tau {
            c.target_sync = TargetSync::Soft { tau };
        }
        if self.gamma.is_some() {
            c.gamma = self.gamma;
        }
        c
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}
