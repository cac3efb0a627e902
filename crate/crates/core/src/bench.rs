//! Timing comparison between lattice propagation and the brute-force oracle.
//!
//! Each row draws a uniform random dataset, counts it both ways, checks the
//! results are identical and reports wall times. When the full oracle would
//! exceed [`WORK_LIMIT`], only a random sample of subgroups is recounted and
//! the oracle time is extrapolated to the whole lattice; the row says so.

use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dataset::{DatasetBuilder, DatasetView};
use crate::error::{Error, Result};
use crate::lattice::check_capacity;
use crate::oracle::{brute_force_counts, brute_force_subset, first_difference, full_work, WORK_LIMIT};
use crate::tally::{propagate_counted, tally_vertices};

/// Row checks spent on a sampled oracle run.
pub const SAMPLED_WORK: u64 = 20_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    Full,
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub m: usize,
    pub n: usize,
    pub propagation_secs: f64,
    pub edges_traversed: u64,
    pub edge_bound: u64,
    pub oracle_mode: OracleMode,
    /// Subgroups the oracle actually recounted.
    pub oracle_specs: usize,
    /// Row checks the oracle performed.
    pub oracle_checks: u64,
    /// Measured, or extrapolated to all `3^m` subgroups in sampled mode.
    pub oracle_secs: f64,
    pub ratio: f64,
    pub equal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub notice: Option<String>,
}

/// Uniform random attributes and labels.
pub fn random_dataset(m: usize, n: usize, seed: u64) -> Result<DatasetView> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut builder = DatasetBuilder::new(m, false).with_capacity(n);
    let mut attrs = vec![0u8; m];
    for _ in 0..n {
        attrs.iter_mut().for_each(|a| *a = rng.random_range(0..2));
        builder.push(&attrs, rng.random_range(0..2), None)?;
    }
    builder.build()
}

fn secs(d: Duration) -> f64 {
    d.as_secs_f64().max(1e-9)
}

pub fn bench_one(m: usize, n: usize, seed: u64) -> Result<BenchRow> {
    check_capacity(m)?;
    let data = random_dataset(m, n, seed)?;

    let start = Instant::now();
    let (table, stats) = propagate_counted(tally_vertices(&data)?);
    let propagation_secs = secs(start.elapsed());
    let size = table.lattice().size();
    let edge_bound = 2 * m as u64 * size as u64;

    let work = full_work(m, n);
    let (oracle_mode, oracle_specs, oracle_checks, oracle_secs, notice) = if work <= WORK_LIMIT {
        let start = Instant::now();
        let brute = brute_force_counts(&data)?;
        let elapsed = secs(start.elapsed());
        if let Some(diff) = first_difference(&brute, &table) {
            return Err(Error::OracleMismatch(format!("m={m} n={n}: {diff}")));
        }
        (OracleMode::Full, size, work, elapsed, None)
    } else {
        let specs = ((SAMPLED_WORK / n.max(1) as u64) as usize).clamp(1, size);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(1);
        let mut picked = sample(&mut rng, size, specs).into_vec();
        picked.sort_unstable();
        let start = Instant::now();
        let (counts, checks) = brute_force_subset(&data, &picked);
        let elapsed = secs(start.elapsed());
        if let Some((&i, c)) = picked.iter().zip(&counts).find(|(&i, c)| table.counts(i) != **c) {
            return Err(Error::OracleMismatch(format!(
                "m={m} n={n}: index {i}: {c:?} vs {:?}",
                table.counts(i)
            )));
        }
        let notice = format!(
            "full oracle needs {work} row checks (limit {WORK_LIMIT}); timed {specs} of {size} subgroups and extrapolated"
        );
        (
            OracleMode::Sampled,
            specs,
            checks,
            elapsed * size as f64 / specs as f64,
            Some(notice),
        )
    };

    Ok(BenchRow {
        m,
        n,
        propagation_secs,
        edges_traversed: stats.edges_traversed,
        edge_bound,
        oracle_mode,
        oracle_specs,
        oracle_checks,
        oracle_secs,
        ratio: oracle_secs / propagation_secs,
        equal: true,
        notice,
    })
}

/// Every `(m, n)` pair; row `i` uses seed `seed + i`.
pub fn run_bench(ms: &[usize], ns: &[usize], seed: u64) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::with_capacity(ms.len() * ns.len());
    for &m in ms {
        for &n in ns {
            rows.push(bench_one(m, n, seed.wrapping_add(rows.len() as u64))?);
        }
    }
    Ok(rows)
}

pub fn write_bench_csv<W: std::io::Write>(rows: &[BenchRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "m",
        "n",
        "propagation_secs",
        "edges_traversed",
        "edge_bound",
        "oracle_mode",
        "oracle_specs",
        "oracle_checks",
        "oracle_secs",
        "ratio",
        "equal",
    ])?;
    for r in rows {
        let mode = match r.oracle_mode {
            OracleMode::Full => "full",
            OracleMode::Sampled => "sampled",
        };
        w.write_record([
            r.m.to_string(),
            r.n.to_string(),
            format!("{:.6e}", r.propagation_secs),
            r.edges_traversed.to_string(),
            r.edge_bound.to_string(),
            mode.to_string(),
            r.oracle_specs.to_string(),
            r.oracle_checks.to_string(),
            format!("{:.6e}", r.oracle_secs),
            format!("{:.2}", r.ratio),
            r.equal.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<bench csv>", e))?;
    Ok(())
}
