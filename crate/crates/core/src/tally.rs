//! Vertex tallies and their upward propagation to every hypercube.
//!
//! One pass over the rows fills the `2^M` vertex entries of a dense `3^M`
//! table. Every other entry is then the sum of the two halves obtained by
//! resolving its first star, which turns the whole lattice into a single
//! ascending sweep: both halves have strictly smaller indices than the parent.
//!
//! Counts are exact integers. Rates are derived on demand and are `None` when
//! their denominator is zero.

use serde::Serialize;

use crate::dataset::DatasetView;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, SubgroupSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CountMode {
    /// Totals and positive labels only.
    Outcome,
    /// Totals, positive labels and the four confusion cells.
    Confusion,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: Vec<u64>,
    pub fp: Vec<u64>,
    pub tn: Vec<u64>,
    pub fn_: Vec<u64>,
}

impl ConfusionCounts {
    fn zeros(len: usize) -> Self {
        ConfusionCounts {
            tp: vec![0; len],
            fp: vec![0; len],
            tn: vec![0; len],
            fn_: vec![0; len],
        }
    }

    fn arrays_mut(&mut self) -> [&mut Vec<u64>; 4] {
        [&mut self.tp, &mut self.fp, &mut self.tn, &mut self.fn_]
    }

    pub fn arrays(&self) -> [&[u64]; 4] {
        [&self.tp, &self.fp, &self.tn, &self.fn_]
    }
}

/// Counts of one hypercube.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SubgroupCounts {
    pub n: u64,
    pub n_pos: u64,
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

/// Per-hypercube tallies over the full lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable {
    lattice: Lattice,
    n: Vec<u64>,
    n_pos: Vec<u64>,
    confusion: Option<ConfusionCounts>,
    propagated: bool,
}

/// Work done by one propagation sweep.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct PropagationStats {
    /// Parent-to-half reads; two per non-vertex hypercube.
    pub edges_traversed: u64,
}

impl CountTable {
    /// Wrap fully computed arrays (every entry filled).
    pub fn from_parts(
        m: usize,
        n: Vec<u64>,
        n_pos: Vec<u64>,
        confusion: Option<ConfusionCounts>,
    ) -> Result<Self> {
        let lattice = Lattice::new(m)?;
        let len = lattice.size();
        let bad_conf = confusion
            .as_ref()
            .is_some_and(|c| c.arrays().iter().any(|a| a.len() != len));
        if n.len() != len || n_pos.len() != len || bad_conf {
            return Err(Error::Capacity(format!(
                "count arrays must have 3^{m} = {len} entries"
            )));
        }
        Ok(CountTable {
            lattice,
            n,
            n_pos,
            confusion,
            propagated: true,
        })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn m(&self) -> usize {
        self.lattice.m()
    }

    pub fn mode(&self) -> CountMode {
        if self.confusion.is_some() {
            CountMode::Confusion
        } else {
            CountMode::Outcome
        }
    }

    pub fn is_propagated(&self) -> bool {
        self.propagated
    }

    pub fn n(&self, index: usize) -> u64 {
        self.n[index]
    }

    pub fn n_pos(&self, index: usize) -> u64 {
        self.n_pos[index]
    }

    pub fn n_all(&self) -> &[u64] {
        &self.n
    }

    pub fn n_pos_all(&self) -> &[u64] {
        &self.n_pos
    }

    pub fn confusion(&self) -> Option<&ConfusionCounts> {
        self.confusion.as_ref()
    }

    /// Rows in the main hypercube.
    pub fn total(&self) -> u64 {
        self.n[self.lattice.main_index()]
    }

    pub fn counts(&self, index: usize) -> SubgroupCounts {
        let mut c = SubgroupCounts {
            n: self.n[index],
            n_pos: self.n_pos[index],
            ..Default::default()
        };
        if let Some(conf) = &self.confusion {
            c.tp = conf.tp[index];
            c.fp = conf.fp[index];
            c.tn = conf.tn[index];
            c.fn_ = conf.fn_[index];
        }
        c
    }

    /// Success rate of the hypercube at `index`; `None` when it is empty.
    pub fn sr_at(&self, index: usize) -> Option<f64> {
        ratio(self.n_pos[index], self.n[index])
    }

    /// Success rate of the whole dataset.
    pub fn sr_tot(&self) -> Option<f64> {
        self.sr_at(self.lattice.main_index())
    }

    /// `kind` evaluated at `index`; errors only when a confusion metric is
    /// requested from an outcome-only table.
    pub fn rate_at(&self, index: usize, kind: MetricKind) -> Result<Option<f64>> {
        if kind.needs_confusion() && self.confusion.is_none() {
            return Err(Error::Mode(format!(
                "{} needs predictions; the table only holds outcome counts",
                kind.name()
            )));
        }
        Ok(kind.evaluate(&self.counts(index)))
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn check_table_capacity(data: &DatasetView) -> Result<Lattice> {
    Lattice::new(data.m())
}

/// One pass over the rows; only vertex entries are filled.
pub fn tally_vertices(data: &DatasetView) -> Result<CountTable> {
    let lattice = check_table_capacity(data)?;
    let mut n = vec![0u64; lattice.size()];
    let mut n_pos = vec![0u64; lattice.size()];
    for row in data.rows() {
        let v = lattice.vertex_index(row.attrs);
        n[v] += 1;
        n_pos[v] += row.y_true as u64;
    }
    Ok(CountTable {
        lattice,
        n,
        n_pos,
        confusion: None,
        propagated: false,
    })
}

/// Like [`tally_vertices`], also tallying the confusion cells per vertex.
pub fn tally_confusion(data: &DatasetView) -> Result<CountTable> {
    let preds = data
        .predictions()
        .ok_or_else(|| Error::Mode("confusion counts need predictions".into()))?;
    let mut table = tally_vertices(data)?;
    let mut conf = ConfusionCounts::zeros(table.lattice.size());
    for (i, row) in data.rows().enumerate() {
        let v = table.lattice.vertex_index(row.attrs);
        match (row.y_true, preds[i]) {
            (1, 1) => conf.tp[v] += 1,
            (0, 1) => conf.fp[v] += 1,
            (0, 0) => conf.tn[v] += 1,
            _ => conf.fn_[v] += 1,
        }
    }
    table.confusion = Some(conf);
    Ok(table)
}

#[inline]
fn sum_halves(values: &mut [u64], parent: usize, zero: usize, one: usize) {
    values[parent] = values[zero] + values[one];
}

/// Fill every non-vertex entry from its first-star split.
pub fn propagate(table: CountTable) -> CountTable {
    propagate_counted(table).0
}

pub fn propagate_counted(mut table: CountTable) -> (CountTable, PropagationStats) {
    let mut stats = PropagationStats::default();
    if table.propagated {
        return (table, stats);
    }
    let lattice = table.lattice.clone();
    for x in 0..lattice.size() {
        let Some((_, w)) = lattice.first_star(x) else {
            continue;
        };
        let (zero, one) = (x - 2 * w, x - w);
        sum_halves(&mut table.n, x, zero, one);
        sum_halves(&mut table.n_pos, x, zero, one);
        if let Some(conf) = &mut table.confusion {
            for arr in conf.arrays_mut() {
                sum_halves(arr, x, zero, one);
            }
        }
        stats.edges_traversed += 2;
    }
    table.propagated = true;
    (table, stats)
}

/// Tally and propagate in one go; confusion mode when the data has predictions.
pub fn count_all(data: &DatasetView) -> Result<CountTable> {
    let table = if data.has_predictions() {
        tally_confusion(data)?
    } else {
        tally_vertices(data)?
    };
    Ok(propagate(table))
}

/// `SR(x)`, or `None` for an empty subgroup.
pub fn success_rate(table: &CountTable, spec: &SubgroupSpec) -> Result<Option<f64>> {
    let i = table.lattice.check_spec(spec)?;
    Ok(table.sr_at(i))
}

pub fn rate_of(table: &CountTable, spec: &SubgroupSpec, kind: MetricKind) -> Result<Option<f64>> {
    let i = table.lattice.check_spec(spec)?;
    table.rate_at(i, kind)
}

/// A rate that can be read off a hypercube's counts.
///
/// Each confusion metric is the success rate of an indicator over a filtered
/// dataset (for instance TPR is the rate of correct predictions among rows
/// with a positive label), so every kind narrows up the levels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    SuccessRate,
    /// Rate of `y_true == y_pred`.
    Accuracy,
    Tpr,
    Fpr,
    Tnr,
    Fnr,
    Precision,
}

impl MetricKind {
    pub const ALL: [MetricKind; 7] = [
        MetricKind::SuccessRate,
        MetricKind::Accuracy,
        MetricKind::Tpr,
        MetricKind::Fpr,
        MetricKind::Tnr,
        MetricKind::Fnr,
        MetricKind::Precision,
    ];

    pub const CONFUSION: [MetricKind; 6] = [
        MetricKind::Accuracy,
        MetricKind::Tpr,
        MetricKind::Fpr,
        MetricKind::Tnr,
        MetricKind::Fnr,
        MetricKind::Precision,
    ];

    pub fn needs_confusion(self) -> bool {
        self != MetricKind::SuccessRate
    }

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::SuccessRate => "success_rate",
            MetricKind::Accuracy => "accuracy",
            MetricKind::Tpr => "tpr",
            MetricKind::Fpr => "fpr",
            MetricKind::Tnr => "tnr",
            MetricKind::Fnr => "fnr",
            MetricKind::Precision => "precision",
        }
    }

    /// `(successes, filtered total)` of the underlying indicator.
    pub fn fraction(self, c: &SubgroupCounts) -> (u64, u64) {
        match self {
            MetricKind::SuccessRate => (c.n_pos, c.n),
            MetricKind::Accuracy => (c.tp + c.tn, c.n),
            MetricKind::Tpr => (c.tp, c.tp + c.fn_),
            MetricKind::Fpr => (c.fp, c.fp + c.tn),
            MetricKind::Tnr => (c.tn, c.fp + c.tn),
            MetricKind::Fnr => (c.fn_, c.tp + c.fn_),
            MetricKind::Precision => (c.tp, c.tp + c.fp),
        }
    }

    pub fn evaluate(self, c: &SubgroupCounts) -> Option<f64> {
        let (num, den) = self.fraction(c);
        ratio(num, den)
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown metric {s:?}")))
    }
}
