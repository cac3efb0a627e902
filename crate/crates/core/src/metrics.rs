//! Per-level fairness statistics over a propagated [`CountTable`].
//!
//! Worst-case metrics (extrema, disparate impact, statistical parity and their
//! confusion-matrix analogues) come straight from one table. The variance
//! family compares the spread of level-`K` rates, pooled over subsample
//! repetitions, against what perfectly independent labels would produce:
//! `Var_ISP(K) = p(1-p)/n_per_vertex · 2^-K`.
//!
//! Empty subgroups have no rate. They are left out of every statistic and
//! counted in [`LevelReport::empty_count`].

use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::level_size;
use crate::tally::{CountTable, MetricKind};

/// Defined rates of one level, ascending index order.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelRates {
    pub level: usize,
    pub rates: Vec<f64>,
    pub undefined: usize,
}

impl LevelRates {
    pub fn extrema(&self) -> Result<(f64, f64)> {
        let mut it = self.rates.iter().copied();
        let first = it.next().ok_or(Error::EmptyLevel { level: self.level })?;
        Ok(it.fold((first, first), |(lo, hi), r| (lo.min(r), hi.max(r))))
    }
}

fn check_level(table: &CountTable, k: usize) -> Result<()> {
    if k > table.m() {
        return Err(Error::LevelBounds { m: table.m(), k });
    }
    Ok(())
}

fn collect_rates(table: &CountTable, level: usize, indices: &[usize], kind: MetricKind) -> Result<LevelRates> {
    let mut rates = Vec::with_capacity(indices.len());
    let mut undefined = 0;
    for &i in indices {
        match table.rate_at(i, kind)? {
            Some(r) => rates.push(r),
            None => undefined += 1,
        }
    }
    Ok(LevelRates {
        level,
        rates,
        undefined,
    })
}

pub fn level_rates(table: &CountTable, k: usize, kind: MetricKind) -> Result<LevelRates> {
    check_level(table, k)?;
    let indices = table.lattice().level_indices(k)?;
    collect_rates(table, k, &indices, kind)
}

/// [`level_rates`] for every level `0..=M`, sharing one level index.
pub fn all_level_rates(table: &CountTable, kind: MetricKind) -> Result<Vec<LevelRates>> {
    table
        .lattice()
        .indices_by_level()
        .iter()
        .enumerate()
        .map(|(k, idx)| collect_rates(table, k, idx, kind))
        .collect()
}

/// `(min, max)` of `kind` over the defined subgroups at level `k`.
pub fn level_extrema(table: &CountTable, k: usize, kind: MetricKind) -> Result<(f64, f64)> {
    level_rates(table, k, kind)?.extrema()
}

/// Worst-case ratio `min/max`; `None` when `max` is zero.
pub fn disparate_impact(min: f64, max: f64) -> Option<f64> {
    (max > 0.0).then(|| min / max)
}

/// Worst-case difference `max - min`.
pub fn statistical_parity(min: f64, max: f64) -> f64 {
    max - min
}

/// Worst-case accuracy ratio and difference at level `k`.
pub fn accuracy_ratio_diff(table: &CountTable, k: usize) -> Result<(Option<f64>, f64)> {
    let (lo, hi) = level_extrema(table, k, MetricKind::Accuracy)?;
    Ok((disparate_impact(lo, hi), statistical_parity(lo, hi)))
}

/// Population variance of every rate of every repetition, around their grand mean.
///
/// `rate_sets[i]` holds the level rates of repetition `i`.
pub fn empirical_variance(rate_sets: &[Vec<f64>]) -> Result<f64> {
    let count: usize = rate_sets.iter().map(Vec::len).sum();
    if count < 2 {
        return Err(Error::DegenerateVariance(count));
    }
    let all = || rate_sets.iter().flatten();
    let mean = all().sum::<f64>() / count as f64;
    Ok(all().map(|r| (r - mean) * (r - mean)).sum::<f64>() / count as f64)
}

/// Reference variance under intersectional statistical parity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct IspBenchmark {
    pub p_tot: f64,
    /// Rows per vertex: `n_sub` when subsampled, otherwise `N / 2^M`.
    pub n_per_vertex: f64,
    /// Vertex-level benchmark variance, `p(1-p)/n_per_vertex`.
    pub alpha: f64,
}

impl IspBenchmark {
    pub fn new(p_tot: f64, n_per_vertex: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p_tot) {
            return Err(Error::Benchmark(format!("p_tot {p_tot} outside [0, 1]")));
        }
        if !(n_per_vertex > 0.0) || !n_per_vertex.is_finite() {
            return Err(Error::Benchmark(format!(
                "rows per vertex must be positive, got {n_per_vertex}"
            )));
        }
        Ok(IspBenchmark {
            p_tot,
            n_per_vertex,
            alpha: p_tot * (1.0 - p_tot) / n_per_vertex,
        })
    }
}

pub fn isp_variance(bench: &IspBenchmark, k: usize) -> f64 {
    bench.alpha * 0.5f64.powi(k as i32)
}

/// `log α − K·log 2`.
pub fn log_isp_variance(bench: &IspBenchmark, k: usize) -> f64 {
    bench.alpha.ln() - k as f64 * std::f64::consts::LN_2
}

pub fn var_ratio(var: f64, var_isp: f64) -> Result<f64> {
    if !(var_isp > 0.0) {
        return Err(Error::Benchmark(format!(
            "benchmark variance must be positive, got {var_isp}"
        )));
    }
    Ok(var / var_isp)
}

/// Half-width of the band around 1 read as "consistent with ISP".
pub const ISP_BAND: f64 = 0.15;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpretation {
    /// Spread matches independent labels.
    IspConsistent,
    /// More spread than independent labels produce.
    IntersectionalBias,
    /// Less spread than chance: a sign of bias mitigation.
    MitigationSuspected,
}

impl Interpretation {
    pub fn classify(ratio: f64) -> Self {
        if ratio > 1.0 + ISP_BAND {
            Interpretation::IntersectionalBias
        } else if ratio < 1.0 - ISP_BAND {
            Interpretation::MitigationSuspected
        } else {
            Interpretation::IspConsistent
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            Interpretation::IspConsistent => "consistent with intersectional statistical parity",
            Interpretation::IntersectionalBias => "intersectional bias present",
            Interpretation::MitigationSuspected => {
                "less spread than parity predicts; bias mitigation suspected"
            }
        }
    }
}

/// Mean rows per level-`k` hypercube, `N·2^(k−m)`.
pub fn balanced_level_size(n_total: u64, m: usize, k: usize) -> f64 {
    n_total as f64 * 2f64.powi(k as i32 - m as i32)
}

/// `((h_k−1)/h_k)·p(1−p)/n_k`, a lower bound on the expected level variance.
pub fn variance_lower_bound(p_tot: f64, h_k: u64, n_k: f64) -> f64 {
    if h_k == 0 {
        return 0.0;
    }
    (h_k as f64 - 1.0) / h_k as f64 * p_tot * (1.0 - p_tot) / n_k
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `(max_i min_j, min_i max_j)` of `kind` over the children of every star
/// split of `index` with both halves defined. `None` for vertices and when no
/// split qualifies.
pub fn split_bounds(table: &CountTable, index: usize, kind: MetricKind) -> Result<Option<(f64, f64)>> {
    let lattice = table.lattice();
    let mut bounds: Option<(f64, f64)> = None;
    for pos in 0..lattice.m() {
        let w = lattice.weight(pos);
        if (index / w) % 3 != 2 {
            continue;
        }
        let (Some(a), Some(b)) = (table.rate_at(index - 2 * w, kind)?, table.rate_at(index - w, kind)?) else {
            continue;
        };
        let (lo, hi) = (a.min(b), a.max(b));
        bounds = Some(match bounds {
            None => (lo, hi),
            Some((l, h)) => (l.max(lo), h.min(hi)),
        });
    }
    Ok(bounds)
}

/// Levels `K` at which `(min, max)` widens compared with level `K-1`.
pub fn narrowing_violations(extrema: &[(f64, f64)]) -> Vec<usize> {
    extrema
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1].0 < w[0].0 || w[1].1 > w[0].1)
        .map(|(k, _)| k + 1)
        .collect()
}

/// Everything reported about one level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub h_k: u64,
    pub n_avg: f64,
    pub n_min: u64,
    pub sr_min: f64,
    pub sr_max: f64,
    pub di: Option<f64>,
    pub sp: f64,
    pub var: Option<f64>,
    pub log_var: Option<f64>,
    pub var_isp: f64,
    pub var_ratio: Option<f64>,
    pub empty_count: usize,
}

/// Level reports for a dataset.
///
/// Counts and worst-case rates come from `full`; the variance is pooled over
/// `samples` (the subsample tables, or just `full` when not subsampling).
pub fn level_reports(
    full: &CountTable,
    samples: &[CountTable],
    bench: &IspBenchmark,
) -> Result<Vec<LevelReport>> {
    let m = full.m();
    let by_level = full.lattice().indices_by_level();
    let mut reports = Vec::with_capacity(m + 1);
    for (k, indices) in by_level.iter().enumerate() {
        let rates = collect_rates(full, k, indices, MetricKind::SuccessRate)?;
        let (sr_min, sr_max) = rates.extrema()?;
        let n_min = indices.iter().map(|&i| full.n(i)).min().unwrap_or(0);
        let n_sum: u64 = indices.iter().map(|&i| full.n(i)).sum();

        let sample_rates = samples
            .iter()
            .map(|t| collect_rates(t, k, indices, MetricKind::SuccessRate).map(|r| r.rates))
            .collect::<Result<Vec<_>>>()?;
        let var = match empirical_variance(&sample_rates) {
            Ok(v) => Some(v),
            Err(Error::DegenerateVariance(_)) => None,
            Err(e) => return Err(e),
        };
        let var_isp = isp_variance(bench, k);
        reports.push(LevelReport {
            level: k,
            h_k: level_size(m, k),
            n_avg: n_sum as f64 / indices.len() as f64,
            n_min,
            sr_min,
            sr_max,
            di: disparate_impact(sr_min, sr_max),
            sp: statistical_parity(sr_min, sr_max),
            var,
            log_var: var.filter(|v| *v > 0.0).map(f64::ln),
            var_isp,
            var_ratio: var.map(|v| var_ratio(v, var_isp)).transpose().ok().flatten(),
            empty_count: rates.undefined,
        });
    }
    Ok(reports)
}

/// Worst-case summary of one confusion metric at one level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OpportunityLevel {
    pub metric: MetricKind,
    pub level: usize,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub ratio: Option<f64>,
    pub diff: Option<f64>,
    pub undefined: usize,
}

/// Worst-case ratio/difference of every confusion metric at every level.
pub fn opportunity_reports(table: &CountTable) -> Result<Vec<OpportunityLevel>> {
    let by_level = table.lattice().indices_by_level();
    let mut out = Vec::new();
    for kind in MetricKind::CONFUSION {
        for (k, indices) in by_level.iter().enumerate() {
            let rates = collect_rates(table, k, indices, kind)?;
            let ext = rates.extrema().ok();
            out.push(OpportunityLevel {
                metric: kind,
                level: k,
                min: ext.map(|e| e.0),
                max: ext.map(|e| e.1),
                ratio: ext.and_then(|(lo, hi)| disparate_impact(lo, hi)),
                diff: ext.map(|(lo, hi)| statistical_parity(lo, hi)),
                undefined: rates.undefined,
            });
        }
    }
    Ok(out)
}
