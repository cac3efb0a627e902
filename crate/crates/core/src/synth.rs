//! Synthetic benchmark populations: per-vertex Bernoulli labels with optional
//! blocks of vertices pushed below and above the base success probability.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{DatasetBuilder, DatasetView};
use crate::error::{Error, Result};
use crate::lattice::check_capacity;

/// How many rows each vertex receives.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum VertexSize {
    Fixed { size: usize },
    /// `unit·R` rows with `R` uniform in `1..=max_multiplier`.
    Multiple { unit: usize, max_multiplier: usize },
}

impl VertexSize {
    /// 200·R rows, R uniform in 1..=10.
    pub const fn standard() -> Self {
        VertexSize::Multiple {
            unit: 200,
            max_multiplier: 10,
        }
    }
}

/// Which vertices receive the shifted probabilities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BiasPlacement {
    /// The lowest-indexed vertices go low, the highest-indexed go high.
    #[default]
    Contiguous,
    /// Both sets drawn uniformly at random (disjoint) from a seeded shuffle.
    Shuffled,
}

fn default_p_base() -> f64 {
    0.5
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub m: usize,
    pub vertex_size: VertexSize,
    #[serde(default = "default_p_base")]
    pub p_base: f64,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub n_biased_low: usize,
    #[serde(default)]
    pub n_biased_high: usize,
    #[serde(default)]
    pub placement: BiasPlacement,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticConfig {
    /// Ten attributes, 200·R rows per vertex, `p = 0.5` everywhere.
    pub fn fair(seed: u64) -> Self {
        SyntheticConfig {
            m: 10,
            vertex_size: VertexSize::standard(),
            p_base: 0.5,
            delta: 0.0,
            n_biased_low: 0,
            n_biased_high: 0,
            placement: BiasPlacement::Contiguous,
            seed,
        }
    }

    /// [`SyntheticConfig::fair`] with 100 vertices at `0.5 − δ` and 100 at `0.5 + δ`.
    pub fn biased(delta: f64, seed: u64) -> Self {
        SyntheticConfig {
            delta,
            n_biased_low: 100,
            n_biased_high: 100,
            ..SyntheticConfig::fair(seed)
        }
    }

    pub fn n_vertices(&self) -> usize {
        1usize << self.m
    }

    pub fn validate(&self) -> Result<()> {
        check_capacity(self.m)?;
        let (lo, hi) = (self.p_base - self.delta, self.p_base + self.delta);
        if !(self.delta >= 0.0) || !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) {
            return Err(Error::Config(format!(
                "probabilities p_base ± delta = {lo} / {hi} must lie in [0, 1] (delta ≥ 0)"
            )));
        }
        if self.n_biased_low + self.n_biased_high > self.n_vertices() {
            return Err(Error::Config(format!(
                "{} biased vertices requested but only {} exist",
                self.n_biased_low + self.n_biased_high,
                self.n_vertices()
            )));
        }
        match self.vertex_size {
            VertexSize::Fixed { size: 0 } => Err(Error::Config("vertex size must be at least 1".into())),
            VertexSize::Multiple { unit, max_multiplier } if unit == 0 || max_multiplier == 0 => {
                Err(Error::Config("vertex size unit and multiplier must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Success probability of every vertex, indexed by vertex code.
    pub fn vertex_probabilities(&self) -> Result<Vec<f64>> {
        self.validate()?;
        let n = self.n_vertices();
        let mut p = vec![self.p_base; n];
        let order: Vec<usize> = match self.placement {
            BiasPlacement::Contiguous => {
                let mut o: Vec<usize> = (0..self.n_biased_low).collect();
                o.extend(n - self.n_biased_high..n);
                o
            }
            BiasPlacement::Shuffled => {
                let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
                rng.set_stream(1);
                let mut o: Vec<usize> = (0..n).collect();
                o.shuffle(&mut rng);
                o.truncate(self.n_biased_low + self.n_biased_high);
                o
            }
        };
        let (low, high) = order.split_at(self.n_biased_low);
        low.iter().for_each(|&v| p[v] = self.p_base - self.delta);
        high.iter().for_each(|&v| p[v] = self.p_base + self.delta);
        Ok(p)
    }
}

/// Draw a dataset. Rows are grouped by vertex in ascending vertex order.
pub fn generate(cfg: &SyntheticConfig) -> Result<DatasetView> {
    let probs = cfg.vertex_probabilities()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let m = cfg.m;
    let mut builder = DatasetBuilder::new(m, false);
    let mut attrs = vec![0u8; m];
    for (code, &p) in probs.iter().enumerate() {
        let size = match cfg.vertex_size {
            VertexSize::Fixed { size } => size,
            VertexSize::Multiple {
                unit,
                max_multiplier,
            } => unit * rng.random_range(1..=max_multiplier),
        };
        for (j, a) in attrs.iter_mut().enumerate() {
            *a = ((code >> (m - 1 - j)) & 1) as u8;
        }
        for _ in 0..size {
            builder.push(&attrs, rng.random_bool(p) as u8, None)?;
        }
    }
    builder.build()
}
