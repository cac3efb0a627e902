//! Brute-force reference counts: every subgroup is recounted by filtering the
//! whole dataset. Used for equivalence testing and the complexity bench.
//!
//! Nothing here goes through the propagation path or the lattice helpers;
//! index decoding and row matching are done locally.

use crate::dataset::DatasetView;
use crate::error::{Error, Result};
use crate::tally::{ConfusionCounts, CountTable, SubgroupCounts};

/// Refuse full runs whose `3^M · N` exceeds this.
pub const WORK_LIMIT: u64 = 1_000_000_000;

fn pow3(m: usize) -> u64 {
    3u64.saturating_pow(m as u32)
}

/// `3^M · N`, the row checks a full oracle run performs.
pub fn full_work(m: usize, n: usize) -> u64 {
    pow3(m).saturating_mul(n as u64)
}

/// Trits of `index`, most significant first (`2` is the free attribute).
fn trits(index: usize, m: usize) -> Vec<u8> {
    let mut out = vec![0u8; m];
    let mut rest = index;
    for j in (0..m).rev() {
        out[j] = (rest % 3) as u8;
        rest /= 3;
    }
    out
}

fn count_matching(data: &DatasetView, pattern: &[u8]) -> SubgroupCounts {
    let mut c = SubgroupCounts::default();
    for i in 0..data.len() {
        let attrs = data.attrs(i);
        let member = pattern.iter().zip(attrs).all(|(&p, &a)| p == 2 || p == a);
        if !member {
            continue;
        }
        let y = data.y_true(i);
        c.n += 1;
        c.n_pos += y as u64;
        if let Some(p) = data.y_pred(i) {
            match (y, p) {
                (1, 1) => c.tp += 1,
                (0, 1) => c.fp += 1,
                (0, 0) => c.tn += 1,
                _ => c.fn_ += 1,
            }
        }
    }
    c
}

/// Counts of the listed subgroups, plus the number of row checks performed.
pub fn brute_force_subset(data: &DatasetView, indices: &[usize]) -> (Vec<SubgroupCounts>, u64) {
    let m = data.m();
    let counts = indices
        .iter()
        .map(|&i| count_matching(data, &trits(i, m)))
        .collect();
    (counts, indices.len() as u64 * data.len() as u64)
}

/// The full table, every entry computed by filtering.
pub fn brute_force_counts(data: &DatasetView) -> Result<CountTable> {
    let m = data.m();
    let work = full_work(m, data.len());
    if work > WORK_LIMIT {
        return Err(Error::Capacity(format!(
            "brute force over 3^{m} subgroups × {} rows = {work} checks exceeds {WORK_LIMIT}",
            data.len()
        )));
    }
    let size = pow3(m) as usize;
    let (counts, _) = brute_force_subset(data, &(0..size).collect::<Vec<_>>());
    let n = counts.iter().map(|c| c.n).collect();
    let n_pos = counts.iter().map(|c| c.n_pos).collect();
    let confusion = data.has_predictions().then(|| ConfusionCounts {
        tp: counts.iter().map(|c| c.tp).collect(),
        fp: counts.iter().map(|c| c.fp).collect(),
        tn: counts.iter().map(|c| c.tn).collect(),
        fn_: counts.iter().map(|c| c.fn_).collect(),
    });
    CountTable::from_parts(m, n, n_pos, confusion)
}

/// First differing entry between two tables, if any.
pub fn first_difference(a: &CountTable, b: &CountTable) -> Option<String> {
    if a.m() != b.m() {
        return Some(format!("dimension {} vs {}", a.m(), b.m()));
    }
    if a.mode() != b.mode() {
        return Some(format!("mode {:?} vs {:?}", a.mode(), b.mode()));
    }
    (0..a.lattice().size())
        .find(|&i| a.counts(i) != b.counts(i))
        .map(|i| format!("index {i}: {:?} vs {:?}", a.counts(i), b.counts(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tally::count_all;

    #[test]
    fn single_row() {
        let d = DatasetView::new(3, vec![1, 0, 1], vec![1], None).unwrap();
        let t = brute_force_counts(&d).unwrap();
        let mut members = 0;
        for i in 0..27 {
            let pat = trits(i, 3);
            let expected = pat.iter().zip([1, 0, 1]).all(|(&p, a)| p == 2 || p == a);
            assert_eq!(t.n(i), expected as u64, "index {i}");
            members += expected as usize;
        }
        assert_eq!(members, 8);
    }

    #[test]
    fn regions_without_rows_are_zero() {
        let d = DatasetView::new(2, vec![0, 0, 0, 0], vec![1, 0], None).unwrap();
        let t = brute_force_counts(&d).unwrap();
        // "1*" holds nothing
        assert_eq!(t.n(3 + 2), 0);
        assert_eq!(t.n(8), 2);
    }

    #[test]
    fn agrees_with_propagation() {
        let d = DatasetView::new(
            2,
            vec![0, 1, 1, 1, 0, 0, 1, 0, 1, 1],
            vec![1, 0, 1, 1, 0],
            Some(vec![1, 1, 0, 1, 0]),
        )
        .unwrap();
        let brute = brute_force_counts(&d).unwrap();
        assert_eq!(first_difference(&brute, &count_all(&d).unwrap()), None);
    }

    #[test]
    fn guard() {
        assert_eq!(full_work(2, 10), 90);
        let d = DatasetView::new(1, vec![0], vec![0], None).unwrap();
        assert!(brute_force_counts(&d).is_ok());
        assert!(full_work(12, 100_000) > WORK_LIMIT);
        let wide = DatasetView::new(12, vec![0; 12 * 2000], vec![0; 2000], None).unwrap();
        assert!(matches!(brute_force_counts(&wide), Err(Error::Capacity(_))));
    }
}
