//! End-to-end audits and their on-disk outputs.
//!
//! An audit writes three files into its output directory:
//!
//! * `report.json`: metadata, the ISP benchmark, one record per level, the
//!   headline vertex-level variance ratio and its reading;
//! * `levels.csv`: the per-level records, one row per level, for plotting;
//! * `subgroups.csv` (optional): counts and success rate of every hypercube.
//!
//! Files are written to a temporary sibling first and renamed into place.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::dataset::DatasetView;
use crate::error::{Error, Result};
use crate::metrics::{
    level_reports, opportunity_reports, Interpretation, IspBenchmark, LevelReport, OpportunityLevel,
};
use crate::sampling::{balanced_subsample, sparse_vertices, SubsampleConfig};
use crate::tally::{count_all, propagate, tally_vertices, CountTable};

pub const REPORT_FILE: &str = "report.json";
pub const LEVELS_FILE: &str = "levels.csv";
pub const SUBGROUPS_FILE: &str = "subgroups.csv";

pub const LEVEL_COLUMNS: [&str; 12] = [
    "level", "h_k", "n_avg", "n_min", "sr_min", "sr_max", "di", "sp", "var", "log_var", "var_isp",
    "var_ratio",
];

/// Where the audited rows came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct InputInfo {
    pub source: String,
    pub attributes: Vec<String>,
    pub rows_read: usize,
    pub rows_dropped: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SparseVertex {
    pub vertex: String,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditMetadata {
    pub input: InputInfo,
    pub m: usize,
    pub n: usize,
    pub seed: Option<u64>,
    pub n_sub: Option<usize>,
    pub n_repeats: Option<usize>,
    pub allow_sparse: bool,
    /// Subgroups with no rows, excluded from every statistic.
    pub empty_subgroups: usize,
    pub sparse_vertices: Vec<SparseVertex>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AuditReport {
    pub metadata: AuditMetadata,
    pub benchmark: IspBenchmark,
    pub levels: Vec<LevelReport>,
    pub var_ratio_0: Option<f64>,
    pub interpretation: Option<Interpretation>,
    pub interpretation_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub opportunity: Option<Vec<OpportunityLevel>>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AuditOptions {
    /// Balanced subsampling; `None` audits the data as given.
    pub subsample: Option<SubsampleConfig>,
}

/// The report plus the full-data table it was computed from.
#[derive(Clone, Debug)]
pub struct Audit {
    pub report: AuditReport,
    pub table: CountTable,
}

/// Run the whole pipeline: tally, propagate, subsample, and summarise each level.
pub fn run_audit(data: &DatasetView, input: InputInfo, opts: &AuditOptions) -> Result<Audit> {
    let full = count_all(data)?;
    let m = data.m();
    let mut warnings = Vec::new();

    let (samples, bench, sparse) = match &opts.subsample {
        Some(cfg) => {
            let sparse: Vec<SparseVertex> = sparse_vertices(data, cfg.n_sub)
                .into_iter()
                .map(|(v, count)| SparseVertex {
                    vertex: v.to_string(),
                    count,
                })
                .collect();
            let views = balanced_subsample(data, cfg)?;
            let tables = views
                .iter()
                .map(|v| tally_vertices(v).map(propagate))
                .collect::<Result<Vec<_>>>()?;
            let (pos, tot) = tables
                .iter()
                .fold((0u64, 0u64), |(p, t), tb| (p + tb.n_pos(tb.lattice().main_index()), t + tb.total()));
            let bench = IspBenchmark::new(pos as f64 / tot as f64, cfg.n_sub as f64)?;
            if !sparse.is_empty() {
                warnings.push(format!(
                    "{} vertices hold fewer than {} rows and contribute all their rows",
                    sparse.len(),
                    cfg.n_sub
                ));
            }
            (tables, bench, sparse)
        }
        None => {
            let p = full.sr_tot().expect("a dataset has at least one row");
            let bench = IspBenchmark::new(p, data.len() as f64 / (1u64 << m) as f64)?;
            (vec![full.clone()], bench, Vec::new())
        }
    };

    let levels = level_reports(&full, &samples, &bench)?;
    let empty_subgroups: usize = levels.iter().map(|l| l.empty_count).sum();
    if empty_subgroups > 0 {
        warnings.push(format!(
            "{empty_subgroups} subgroups hold no rows and are excluded from extrema and variances"
        ));
    }
    if bench.alpha == 0.0 {
        warnings.push("every label is identical; the ISP benchmark variance is zero".into());
    }
    let var_ratio_0 = levels.first().and_then(|l| l.var_ratio);
    let interpretation = var_ratio_0.map(Interpretation::classify);
    let opportunity = full
        .confusion()
        .is_some()
        .then(|| opportunity_reports(&full))
        .transpose()?;

    let report = AuditReport {
        metadata: AuditMetadata {
            input,
            m,
            n: data.len(),
            seed: opts.subsample.as_ref().map(|c| c.seed),
            n_sub: opts.subsample.as_ref().map(|c| c.n_sub),
            n_repeats: opts.subsample.as_ref().map(|c| c.n_repeats),
            allow_sparse: opts.subsample.as_ref().is_some_and(|c| c.allow_sparse),
            empty_subgroups,
            sparse_vertices: sparse,
            warnings,
        },
        benchmark: bench,
        levels,
        var_ratio_0,
        interpretation,
        interpretation_text: interpretation.map(|i| i.describe().to_string()),
        opportunity,
    };
    Ok(Audit {
        report,
        table: full,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_levels_csv<W: Write>(levels: &[LevelReport], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(LEVEL_COLUMNS)?;
    for l in levels {
        w.write_record([
            l.level.to_string(),
            l.h_k.to_string(),
            l.n_avg.to_string(),
            l.n_min.to_string(),
            l.sr_min.to_string(),
            l.sr_max.to_string(),
            opt(l.di),
            l.sp.to_string(),
            opt(l.var),
            opt(l.log_var),
            l.var_isp.to_string(),
            opt(l.var_ratio),
        ])?;
    }
    w.flush().map_err(|e| Error::io(LEVELS_FILE, e))?;
    Ok(())
}

/// One row per hypercube, ascending index.
pub fn write_subgroups_csv<W: Write>(table: &CountTable, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let confusion = table.confusion().is_some();
    let mut header = vec!["spec", "level", "n", "n_pos", "sr"];
    if confusion {
        header.extend(["tp", "fp", "tn", "fn"]);
    }
    w.write_record(&header)?;
    let levels = table.lattice().levels();
    for (i, level) in levels.iter().enumerate() {
        let c = table.counts(i);
        let mut rec = vec![
            table.lattice().spec(i).to_string(),
            level.to_string(),
            c.n.to_string(),
            c.n_pos.to_string(),
            opt(table.sr_at(i)),
        ];
        if confusion {
            rec.extend([c.tp, c.fp, c.tn, c.fn_].map(|v| v.to_string()));
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(SUBGROUPS_FILE, e))?;
    Ok(())
}

pub fn report_json(report: &AuditReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

/// Write `path` through a temporary file in the same directory.
pub fn write_atomic<F>(path: &Path, fill: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        fill(&mut buf)?;
        buf.flush().map_err(|e| Error::io(path, e))?;
    }
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Write the report, levels and (optionally) subgroup files into `out_dir`.
pub fn write_outputs(audit: &Audit, out_dir: &Path, dump_subgroups: bool) -> Result<()> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let json = report_json(&audit.report)?;
    write_atomic(&out_dir.join(REPORT_FILE), |w| {
        w.write_all(json.as_bytes()).map_err(|e| Error::io(REPORT_FILE, e))
    })?;
    write_atomic(&out_dir.join(LEVELS_FILE), |w| write_levels_csv(&audit.report.levels, w))?;
    if dump_subgroups {
        write_atomic(&out_dir.join(SUBGROUPS_FILE), |w| write_subgroups_csv(&audit.table, w))?;
    }
    Ok(())
}
