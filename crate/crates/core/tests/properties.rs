use proptest::prelude::*;

use fairlattice::dataset::DatasetView;
use fairlattice::lattice::binomial;
use fairlattice::metrics::{all_level_rates, narrowing_violations, split_bounds};
use fairlattice::oracle::{brute_force_counts, first_difference};
use fairlattice::sampling::{balanced_subsample, rows_by_vertex, SubsampleConfig};
use fairlattice::tally::{count_all, propagate_counted, tally_vertices, MetricKind};

/// Rows biased towards a few vertices so that empty subgroups show up.
fn dataset(max_m: usize, max_n: usize, with_pred: bool) -> impl Strategy<Value = DatasetView> {
    (1..=max_m, 1..=max_n).prop_flat_map(move |(m, n)| {
        let skew = prop::collection::vec(0u8..4, m);
        (
            Just(m),
            skew,
            prop::collection::vec(any::<u8>(), n * m),
            prop::collection::vec(0u8..2, n),
            prop::collection::vec(0u8..2, n),
        )
            .prop_map(move |(m, skew, raw, y, pred)| {
                // attribute j is 1 with probability skew[j]/4 (approximately)
                let attrs = raw
                    .iter()
                    .enumerate()
                    .map(|(i, &r)| u8::from(r % 4 < skew[i % m]))
                    .collect();
                DatasetView::new(m, attrs, y, with_pred.then_some(pred)).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn propagation_matches_oracle(d in dataset(6, 400, true)) {
        let fast = count_all(&d).unwrap();
        let brute = brute_force_counts(&d).unwrap();
        prop_assert_eq!(first_difference(&fast, &brute), None);
    }

    #[test]
    fn edges_traversed_match_closed_form(d in dataset(8, 50, false)) {
        let m = d.m() as u32;
        let (_, stats) = propagate_counted(tally_vertices(&d).unwrap());
        prop_assert_eq!(stats.edges_traversed, 2 * (3u64.pow(m) - 2u64.pow(m)));
        prop_assert!(stats.edges_traversed <= 2 * m as u64 * 3u64.pow(m));
    }

    #[test]
    fn every_metric_narrows(d in dataset(5, 300, true)) {
        let t = count_all(&d).unwrap();
        for kind in MetricKind::ALL {
            let extrema: Vec<(f64, f64)> = all_level_rates(&t, kind)
                .unwrap()
                .iter()
                .filter_map(|l| l.extrema().ok())
                .collect();
            prop_assert!(narrowing_violations(&extrema).is_empty(), "{}", kind.name());
        }
    }

    #[test]
    fn parent_rate_lies_between_children(d in dataset(5, 300, true)) {
        let t = count_all(&d).unwrap();
        for kind in [MetricKind::SuccessRate, MetricKind::Tpr, MetricKind::Precision] {
            for i in 0..t.lattice().size() {
                let Some(r) = t.rate_at(i, kind).unwrap() else { continue };
                if let Some((lo, hi)) = split_bounds(&t, i, kind).unwrap() {
                    prop_assert!(lo <= r && r <= hi);
                }
            }
        }
    }

    #[test]
    fn level_sums_count_each_row_once_per_star_pattern(d in dataset(6, 300, false)) {
        let t = count_all(&d).unwrap();
        for (k, idx) in t.lattice().indices_by_level().iter().enumerate() {
            let sum: u64 = idx.iter().map(|&i| t.n(i)).sum();
            prop_assert_eq!(sum, d.len() as u64 * binomial(d.m(), k));
        }
    }

    #[test]
    fn subsampling_is_balanced_and_reproducible(seed in any::<u64>(), n_sub in 1usize..5) {
        let attrs: Vec<u8> = (0..3 * 64).map(|i| ((i / 3) >> (i % 3)) as u8 & 1).collect();
        let d = DatasetView::new(3, attrs, (0..64).map(|i| (i % 2) as u8).collect(), None).unwrap();
        let cfg = SubsampleConfig::new(n_sub, 3, seed);
        let a = balanced_subsample(&d, &cfg).unwrap();
        prop_assert_eq!(&a, &balanced_subsample(&d, &cfg).unwrap());
        for view in &a {
            prop_assert!(rows_by_vertex(view).iter().all(|g| g.len() == n_sub));
        }
    }
}
