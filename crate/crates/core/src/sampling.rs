//! Balanced subsampling: every vertex contributes exactly `n_sub` rows to each
//! of `n_repeats` independent draws.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::DatasetView;
use crate::error::{Error, Result};
use crate::lattice::SubgroupSpec;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsampleConfig {
    pub n_sub: usize,
    pub n_repeats: usize,
    pub seed: u64,
    /// Let vertices with fewer than `n_sub` rows contribute all they have
    /// instead of failing.
    #[serde(default)]
    pub allow_sparse: bool,
}

impl SubsampleConfig {
    pub fn new(n_sub: usize, n_repeats: usize, seed: u64) -> Self {
        SubsampleConfig {
            n_sub,
            n_repeats,
            seed,
            allow_sparse: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sub == 0 || self.n_repeats == 0 {
            return Err(Error::Config(format!(
                "n_sub and n_repeats must be at least 1 (got {} and {})",
                self.n_sub, self.n_repeats
            )));
        }
        Ok(())
    }
}

/// Row indices of each vertex, keyed by the `M`-bit vertex code.
pub fn rows_by_vertex(data: &DatasetView) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); 1usize << data.m()];
    for row in 0..data.len() {
        groups[data.vertex_code(row)].push(row);
    }
    groups
}

pub fn vertex_spec(code: usize, m: usize) -> SubgroupSpec {
    let bits: Vec<u8> = (0..m).map(|j| ((code >> (m - 1 - j)) & 1) as u8).collect();
    SubgroupSpec::vertex(&bits).expect("bits are binary")
}

/// Vertices holding fewer than `n_sub` rows, with their counts.
pub fn sparse_vertices(data: &DatasetView, n_sub: usize) -> Vec<(SubgroupSpec, usize)> {
    rows_by_vertex(data)
        .iter()
        .enumerate()
        .filter(|(_, rows)| rows.len() < n_sub)
        .map(|(code, rows)| (vertex_spec(code, data.m()), rows.len()))
        .collect()
}

/// Random generator of repetition `repetition`: the seed picks the key and the
/// repetition picks the ChaCha stream, so repetitions are independent and can
/// be drawn in any order.
pub fn repetition_rng(seed: u64, repetition: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(repetition as u64);
    rng
}

/// `n_repeats` balanced views of `data`, rows grouped by ascending vertex.
pub fn balanced_subsample(data: &DatasetView, cfg: &SubsampleConfig) -> Result<Vec<DatasetView>> {
    cfg.validate()?;
    if data.m() >= usize::BITS as usize {
        return Err(Error::Capacity(format!("{} attributes", data.m())));
    }
    let groups = rows_by_vertex(data);
    if !cfg.allow_sparse {
        let thinnest = groups
            .iter()
            .enumerate()
            .filter(|(_, rows)| rows.len() < cfg.n_sub)
            .min_by_key(|(code, rows)| (rows.len(), *code));
        if let Some((code, rows)) = thinnest {
            return Err(Error::UnderPopulatedVertex {
                vertex: vertex_spec(code, data.m()).to_string(),
                count: rows.len(),
                required: cfg.n_sub,
            });
        }
    }

    (0..cfg.n_repeats)
        .map(|rep| {
            let mut rng = repetition_rng(cfg.seed, rep);
            let mut picked = Vec::with_capacity(groups.len() * cfg.n_sub);
            for rows in &groups {
                if rows.len() <= cfg.n_sub && cfg.allow_sparse {
                    picked.extend_from_slice(rows);
                } else {
                    let chosen = rand::seq::index::sample(&mut rng, rows.len(), cfg.n_sub);
                    picked.extend(chosen.iter().map(|i| rows[i]));
                }
            }
            data.select(&picked)
        })
        .collect()
}
