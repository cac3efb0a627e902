//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS / FAIL / SKIP line; the process exits
//! nonzero when any criterion fails.
//!
//! The Adult criterion reads `FAIRLATTICE_ADULT_CSV`, falling back to
//! `data/adult.csv` at the workspace root.

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fairlattice::bench::bench_one;
use fairlattice::dataset::{DatasetBuilder, DatasetView};
use fairlattice::ingest::{adult_preset, load_csv};
use fairlattice::lattice::{binomial, level_size};
use fairlattice::metrics::{
    all_level_rates, balanced_level_size, disparate_impact, least_squares_slope, narrowing_violations,
    split_bounds, statistical_parity, variance_lower_bound,
};
use fairlattice::oracle::{brute_force_counts, first_difference};
use fairlattice::report::{run_audit, Audit, AuditOptions, InputInfo};
use fairlattice::sampling::SubsampleConfig;
use fairlattice::synth::{generate, SyntheticConfig};
use fairlattice::tally::{count_all, CountTable, MetricKind};

const SEED: u64 = 42;
const DELTAS: [f64; 5] = [0.0, 0.1, 0.2, 0.3, 0.4];
const REFERENCE_LEVEL0: [f64; 5] = [0.98, 1.73, 4.19, 7.96, 13.34];
const REFERENCE_LEVEL9: [f64; 5] = [1.013403, 25.073643, 103.158698, 223.463451, 396.570403];
const ADULT_N: usize = 48842;
const ADULT_MIN_COUNTS: [u64; 5] = [228, 521, 2511, 7080, 48842];

enum Outcome {
    Pass,
    Fail,
    Skip,
}

struct Line {
    id: usize,
    title: &'static str,
    outcome: Outcome,
    detail: String,
}

impl Line {
    fn new(id: usize, title: &'static str, pass: bool, detail: String) -> Self {
        let outcome = if pass { Outcome::Pass } else { Outcome::Fail };
        Line {
            id,
            title,
            outcome,
            detail,
        }
    }

    fn print(&self) {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Skip => "SKIP",
        };
        println!("[{tag}] criterion {}: {} | {}", self.id, self.title, self.detail);
    }
}

fn within(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

fn secs(d: Duration) -> String {
    format!("{:.1}s", d.as_secs_f64())
}

/// Random dataset with a random success probability per vertex and random predictions.
fn random_dataset(seed: u64) -> DatasetView {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = rng.random_range(1..=6);
    let n = rng.random_range(1..=10_000);
    let probs: Vec<f64> = (0..1usize << m).map(|_| rng.random_range(0.05..0.95)).collect();
    let mut b = DatasetBuilder::new(m, true).with_capacity(n);
    let mut attrs = vec![0u8; m];
    for _ in 0..n {
        let code = rng.random_range(0..1usize << m);
        for (j, a) in attrs.iter_mut().enumerate() {
            *a = ((code >> (m - 1 - j)) & 1) as u8;
        }
        let y = rng.random_bool(probs[code]) as u8;
        let pred = rng.random_bool(0.5) as u8;
        b.push(&attrs, y, Some(pred)).unwrap();
    }
    b.build().unwrap()
}

/// Violations of the narrowing, DI, SP and split-sandwich properties of the success rate.
fn success_rate_violations(table: &CountTable) -> Vec<String> {
    let mut out = Vec::new();
    let extrema: Vec<(f64, f64)> = all_level_rates(table, MetricKind::SuccessRate)
        .unwrap()
        .iter()
        .filter_map(|l| l.extrema().ok())
        .collect();
    for k in narrowing_violations(&extrema) {
        out.push(format!("extrema widen at level {k}"));
    }
    for (k, w) in extrema.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        if let (Some(da), Some(db)) = (disparate_impact(a.0, a.1), disparate_impact(b.0, b.1)) {
            if db < da {
                out.push(format!("DI falls at level {}", k + 1));
            }
        }
        if statistical_parity(b.0, b.1) > statistical_parity(a.0, a.1) {
            out.push(format!("SP grows at level {}", k + 1));
        }
    }
    for i in 0..table.lattice().size() {
        let Some(sr) = table.sr_at(i) else { continue };
        if let Some((lo, hi)) = split_bounds(table, i, MetricKind::SuccessRate).unwrap() {
            if !(lo <= sr && sr <= hi) {
                out.push(format!("sandwich broken at {}", table.lattice().spec(i)));
            }
        }
    }
    out
}

/// Level `K` holds `N·C(M,K)` memberships, so its mean count is `N·2^(K−M)`.
fn level_mean_violations(table: &CountTable) -> usize {
    let m = table.m();
    let total = table.total();
    table
        .lattice()
        .indices_by_level()
        .iter()
        .enumerate()
        .filter(|(k, idx)| {
            let sum: u64 = idx.iter().map(|&i| table.n(i)).sum();
            let mean = sum as f64 / idx.len() as f64;
            sum != total * binomial(m, *k) || mean != balanced_level_size(total, m, *k)
        })
        .count()
}

struct Experiment {
    audit: Audit,
}

fn experiment(cfg: &SyntheticConfig) -> Experiment {
    let data = generate(cfg).unwrap();
    let opts = AuditOptions {
        subsample: Some(SubsampleConfig::new(100, 20, SEED)),
    };
    let audit = run_audit(&data, InputInfo::default(), &opts).unwrap();
    Experiment { audit }
}

fn adult_path() -> PathBuf {
    std::env::var_os("FAIRLATTICE_ADULT_CSV")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/adult.csv"))
}

fn main() {
    let mut lines = Vec::new();
    // tables checked by the structural criteria: (name, table)
    let mut structural: Vec<(String, CountTable)> = Vec::new();

    // 1. oracle equivalence
    let start = Instant::now();
    let datasets: Vec<DatasetView> = (0..100).map(random_dataset).collect();
    let mut mismatches = Vec::new();
    for (seed, d) in datasets.iter().enumerate() {
        let fast = count_all(d).unwrap();
        let brute = brute_force_counts(d).unwrap();
        if let Some(diff) = first_difference(&fast, &brute) {
            mismatches.push(format!("seed {seed}: {diff}"));
        }
        structural.push((format!("random seed {seed}"), fast));
    }
    let elapsed = start.elapsed();
    let line = Line::new(
        1,
        "propagation equals brute-force oracle",
        mismatches.is_empty() && elapsed < Duration::from_secs(120),
        format!(
            "100 datasets (m 1..6, N up to 10000), {} mismatches {:?}, {} (limit 120s)",
            mismatches.len(),
            mismatches.first(),
            secs(elapsed)
        ),
    );
    line.print();
    lines.push(line);

    // 3. confusion-metric narrowing (uses the criterion-1 datasets)
    let mut violations = Vec::new();
    let mut checked = 0;
    for (name, table) in structural.iter() {
        for kind in MetricKind::CONFUSION {
            let extrema: Vec<(f64, f64)> = all_level_rates(table, kind)
                .unwrap()
                .iter()
                .filter_map(|l| l.extrema().ok())
                .collect();
            checked += 1;
            for k in narrowing_violations(&extrema) {
                violations.push(format!("{name} {}: level {k}", kind.name()));
            }
        }
    }
    let line3 = Line::new(
        3,
        "accuracy/tpr/fpr/tnr/fnr/precision extrema narrow",
        violations.is_empty(),
        format!("{checked} metric curves, {} violations {:?}", violations.len(), violations.first()),
    );

    // 4. experiment 1
    let start = Instant::now();
    let exp1 = experiment(&SyntheticConfig::fair(SEED));
    let elapsed = start.elapsed();
    let r = &exp1.audit.report;
    let vr0 = r.var_ratio_0.unwrap_or(f64::NAN);
    let ks: Vec<f64> = (0..=9).map(|k| k as f64).collect();
    let logs: Vec<f64> = r.levels[..=9].iter().map(|l| l.log_var.unwrap_or(f64::NAN)).collect();
    let slope = least_squares_slope(&ks, &logs).unwrap_or(f64::NAN);
    let ln2 = std::f64::consts::LN_2;
    let extrema: Vec<(f64, f64)> = r.levels.iter().map(|l| (l.sr_min, l.sr_max)).collect();
    let out_of_band: Vec<usize> = r
        .levels
        .iter()
        .filter(|l| l.sr_min < 0.40 || l.sr_max > 0.60)
        .map(|l| l.level)
        .collect();
    let widen = narrowing_violations(&extrema);
    let ok_ratio = (0.85..=1.15).contains(&vr0);
    let ok_slope = within(slope, -ln2, 0.05);
    let line = Line::new(
        4,
        "experiment 1 (M=10, p=0.5, n_sub=100, 20 repeats)",
        ok_ratio && ok_slope && out_of_band.is_empty() && widen.is_empty() && elapsed < Duration::from_secs(60),
        format!(
            "VarRatio(0)={vr0:.4} in [0.85,1.15]: {ok_ratio}; slope={slope:.4} vs -ln2={:.4} (5%): {ok_slope}; \
             level-0 extrema [{:.4}, {:.4}], levels outside [0.40,0.60]: {:?}; widening levels {:?}; {} (limit 60s)",
            -ln2,
            r.levels[0].sr_min,
            r.levels[0].sr_max,
            out_of_band,
            widen,
            secs(elapsed)
        ),
    );
    structural.push(("experiment 1".into(), exp1.audit.table.clone()));
    let line4 = line;

    // 5. experiment 2
    let start = Instant::now();
    let exp2: Vec<Experiment> = DELTAS
        .iter()
        .map(|&d| experiment(&SyntheticConfig::biased(d, SEED)))
        .collect();
    let elapsed = start.elapsed();
    let level0: Vec<f64> = exp2.iter().map(|e| e.audit.report.var_ratio_0.unwrap_or(f64::NAN)).collect();
    let level9: Vec<f64> = exp2
        .iter()
        .map(|e| e.audit.report.levels[9].var_ratio.unwrap_or(f64::NAN))
        .collect();
    let increasing = level0.windows(2).all(|w| w[1] > w[0]);
    let off0: Vec<f64> = DELTAS
        .iter()
        .zip(level0.iter().zip(REFERENCE_LEVEL0))
        .filter(|(_, (v, t))| !within(**v, *t, 0.20))
        .map(|(d, _)| *d)
        .collect();
    let off9: Vec<f64> = DELTAS
        .iter()
        .zip(level9.iter().zip(REFERENCE_LEVEL9))
        .filter(|(_, (v, t))| !within(**v, *t, 0.20))
        .map(|(d, _)| *d)
        .collect();
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.2}")).collect::<Vec<_>>().join(", ");
    let line5 = Line::new(
        5,
        "experiment 2 (delta 0..0.4, 100 low + 100 high vertices)",
        increasing && off0.is_empty() && off9.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "VarRatio(0) [{}] vs [{}], increasing: {increasing}, outside 20%: {off0:?}; \
             VarRatio(9) [{}] vs [{}], outside 20%: {off9:?}; {} (limit 300s)",
            fmt(&level0),
            fmt(&REFERENCE_LEVEL0),
            fmt(&level9),
            fmt(&REFERENCE_LEVEL9),
            secs(elapsed)
        ),
    );
    for (d, e) in DELTAS.iter().zip(&exp2) {
        structural.push((format!("experiment 2 delta {d}"), e.audit.table.clone()));
    }
    drop(exp2);

    // 6. Adult
    let path = adult_path();
    let line6 = if !path.exists() {
        Line {
            id: 6,
            title: "Adult reproduction",
            outcome: Outcome::Skip,
            detail: format!(
                "dataset not found at {} (set FAIRLATTICE_ADULT_CSV); criterion not evaluated",
                path.display()
            ),
        }
    } else {
        let loaded = load_csv(&path, &adult_preset()).unwrap();
        let n = loaded.data.len();
        let opts = AuditOptions {
            subsample: Some(SubsampleConfig::new(100, 20, SEED)),
        };
        let audit = run_audit(&loaded.data, InputInfo::default(), &opts).unwrap();
        let r = &audit.report;
        let mins: Vec<u64> = r.levels.iter().map(|l| l.n_min).collect();
        let means_exact = r
            .levels
            .iter()
            .all(|l| l.n_avg == balanced_level_size(n as u64, 4, l.level));
        let extrema: Vec<(f64, f64)> = r.levels.iter().map(|l| (l.sr_min, l.sr_max)).collect();
        let narrowing = narrowing_violations(&extrema).is_empty();
        let vars: Vec<f64> = r.levels.iter().filter_map(|l| l.var).collect();
        let logs: Vec<f64> = r.levels.iter().filter_map(|l| l.log_var).collect();
        let var_monotone = vars.len() == 5 && vars.windows(2).all(|w| w[1] <= w[0]);
        let log_monotone = logs.len() == 5 && logs.windows(2).all(|w| w[1] <= w[0]);
        let vr0 = r.var_ratio_0.unwrap_or(f64::NAN);
        let above = r
            .levels
            .iter()
            .filter(|l| l.var.is_some_and(|v| v > l.var_isp))
            .count();
        structural.push(("adult".into(), audit.table.clone()));
        Line::new(
            6,
            "Adult reproduction (preset, n_sub=100, 20 repeats)",
            n == ADULT_N
                && mins == ADULT_MIN_COUNTS
                && means_exact
                && narrowing
                && var_monotone
                && log_monotone
                && vr0 > 1.0,
            format!(
                "N={n} ({} dropped); minimum counts {mins:?}; means exactly N*2^(K-4): {means_exact}; \
                 extrema narrow: {narrowing}; Var non-increasing: {var_monotone}; log-Var non-increasing: \
                 {log_monotone}; VarRatio(0)={vr0:.3}; levels with Var above ISP benchmark: {above}/5",
                loaded.rows_dropped
            ),
        )
    };

    // 2. success-rate properties on every table gathered so far
    let mut sr_violations = Vec::new();
    for (name, table) in &structural {
        for v in success_rate_violations(table) {
            sr_violations.push(format!("{name}: {v}"));
        }
    }
    let line2 = Line::new(
        2,
        "sr_min/sr_max narrow, DI rises, SP falls, split sandwich holds",
        sr_violations.is_empty(),
        format!(
            "{} tables, {} violations {:?}",
            structural.len(),
            sr_violations.len(),
            sr_violations.first()
        ),
    );

    // 7. complexity
    let start = Instant::now();
    let mut rows = Vec::new();
    for m in [2, 4, 6, 8, 10] {
        rows.push(bench_one(m, 10_000, SEED + m as u64).unwrap());
    }
    let big = bench_one(12, 100_000, SEED).unwrap();
    rows.push(big.clone());
    let elapsed = start.elapsed();
    let within_bound = rows.iter().all(|r| r.edges_traversed <= r.edge_bound && r.equal);
    let trend = rows
        .iter()
        .map(|r| format!("m={}:{:.0}", r.m, r.ratio))
        .collect::<Vec<_>>()
        .join(" ");
    let line7 = Line::new(
        7,
        "edge traversals within 2M*3^M, oracle/propagation ratio > 10 at m=12 N=100000",
        within_bound && big.ratio > 10.0,
        format!(
            "edges within bound and results equal: {within_bound}; ratio at m=12 N=100000: {:.0} ({:?} oracle{}); \
             ratios {trend}; {}",
            big.ratio,
            big.oracle_mode,
            big.notice.as_ref().map(|n| format!(": {n}")).unwrap_or_default(),
            secs(elapsed)
        ),
    );

    // 8. balanced level size
    let bad: Vec<&str> = structural
        .iter()
        .filter(|(_, t)| level_mean_violations(t) > 0)
        .map(|(n, _)| n.as_str())
        .collect();
    let line8 = Line::new(
        8,
        "mean level-K count equals N*2^(K-M) exactly",
        bad.is_empty(),
        format!("{} tables, violations in {:?}", structural.len(), bad),
    );

    // 9. variance lower bound without subsampling
    let start = Instant::now();
    let (mut var_sum, mut bound_sum, mut exact_sum) = (0.0, 0.0, 0.0);
    let runs = 50;
    for i in 0..runs {
        let data = generate(&SyntheticConfig::fair(1000 + i)).unwrap();
        let audit = run_audit(&data, InputInfo::default(), &AuditOptions::default()).unwrap();
        let l0 = &audit.report.levels[0];
        let p = audit.report.benchmark.p_tot;
        var_sum += l0.var.unwrap();
        bound_sum += variance_lower_bound(p, l0.h_k, l0.n_avg);
        let h = level_size(10, 0) as f64;
        let vertices = audit.table.lattice().level_indices(0).unwrap();
        let inv: f64 = vertices.iter().map(|&v| 1.0 / audit.table.n(v) as f64).sum();
        exact_sum += (h - 1.0) / (h * h) * p * (1.0 - p) * inv;
    }
    let (mean_var, mean_bound, mean_exact) = (var_sum / runs as f64, bound_sum / runs as f64, exact_sum / runs as f64);
    let line9 = Line::new(
        9,
        "mean level-0 variance at least 0.95 x the lower bound",
        mean_var >= 0.95 * mean_bound,
        format!(
            "50 unbalanced ISP datasets (M=10, 200*R rows per vertex): mean Var(0)={mean_var:.4e}, bound={mean_bound:.4e}, \
             ratio {:.3}; exact expectation {mean_exact:.4e} (ratio {:.3}); {}",
            mean_var / mean_bound,
            mean_var / mean_exact,
            secs(start.elapsed())
        ),
    );

    for l in [line2, line3, line4, line5, line6, line7, line8, line9] {
        l.print();
        lines.push(l);
    }
    lines.sort_by_key(|l| l.id);

    let failed: Vec<usize> = lines
        .iter()
        .filter(|l| matches!(l.outcome, Outcome::Fail))
        .map(|l| l.id)
        .collect();
    let skipped = lines.iter().filter(|l| matches!(l.outcome, Outcome::Skip)).count();
    println!(
        "acceptance: {} passed, {} failed {:?}, {} skipped",
        lines.len() - failed.len() - skipped,
        failed.len(),
        failed,
        skipped
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
