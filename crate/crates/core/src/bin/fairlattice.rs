use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fairlattice::bench::{run_bench, write_bench_csv};
use fairlattice::error::{Error, ErrorKind, Result};
use fairlattice::ingest::{adult_preset, load_csv, sniff_identity_config, write_csv, BinarizationConfig};
use fairlattice::report::{run_audit, write_atomic, write_outputs, Audit, AuditOptions, InputInfo};
use fairlattice::sampling::SubsampleConfig;
use fairlattice::synth::{generate, BiasPlacement, SyntheticConfig, VertexSize};

/// Intersectional fairness audits over the full subgroup lattice.
#[derive(Parser)]
#[command(name = "fairlattice", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Audit a CSV file and write report.json, levels.csv and optionally subgroups.csv.
    Audit {
        #[arg(long)]
        input: PathBuf,
        /// Binarization config (TOML). Without it the file must hold p1..pM and label columns.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Audit a user-supplied UCI Adult CSV with the built-in preset.
    AdultPrep {
        #[arg(long)]
        input: PathBuf,
        /// Also write the preset as TOML to this path.
        #[arg(long)]
        emit_config: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Generate a synthetic dataset with columns p1..pM, label.
    Synth(SynthArgs),
    /// Compare propagation against the brute-force oracle.
    Bench {
        /// Attribute counts, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [4usize, 6, 8, 10])]
        m: Vec<usize>,
        /// Row counts, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [1_000usize, 10_000])]
        n: Vec<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the table as CSV.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Rows drawn per vertex in each repetition; omit to audit the data as given.
    #[arg(long)]
    n_sub: Option<usize>,
    #[arg(long, default_value_t = 20)]
    n_repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Let vertices with fewer than n_sub rows contribute all their rows.
    #[arg(long)]
    allow_sparse: bool,
    /// Write every subgroup's counts to subgroups.csv.
    #[arg(long)]
    dump_subgroups: bool,
    #[arg(long, default_value = "fairlattice-out")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Placement {
    Contiguous,
    Shuffled,
}

#[derive(Args)]
struct SynthArgs {
    /// TOML config; the flags below are ignored when given, except --seed.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    #[arg(long, default_value_t = 0.5)]
    p_base: f64,
    /// Vertices at p_base - delta.
    #[arg(long, default_value_t = 0)]
    n_low: usize,
    /// Vertices at p_base + delta.
    #[arg(long, default_value_t = 0)]
    n_high: usize,
    /// Fixed rows per vertex, instead of unit times a random multiplier.
    #[arg(long)]
    vertex_size: Option<usize>,
    #[arg(long, default_value_t = 200)]
    unit: usize,
    #[arg(long, default_value_t = 10)]
    max_multiplier: usize,
    #[arg(long, value_enum, default_value_t = Placement::Contiguous)]
    placement: Placement,
    #[arg(long)]
    seed: Option<u64>,
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Config => 2,
        ErrorKind::Data => 3,
        ErrorKind::Capacity => 4,
        ErrorKind::Internal => 5,
    }
}

fn subsample(run: &RunArgs) -> Option<SubsampleConfig> {
    run.n_sub.map(|n_sub| SubsampleConfig {
        allow_sparse: run.allow_sparse,
        ..SubsampleConfig::new(n_sub, run.n_repeats, run.seed)
    })
}

fn audit_file(input: &Path, cfg: &BinarizationConfig, run: &RunArgs) -> Result<()> {
    let loaded = load_csv(input, cfg)?;
    let info = InputInfo {
        source: input.display().to_string(),
        attributes: loaded.attribute_names,
        rows_read: loaded.rows_read,
        rows_dropped: loaded.rows_dropped,
    };
    let opts = AuditOptions {
        subsample: subsample(run),
    };
    let audit = run_audit(&loaded.data, info, &opts)?;
    write_outputs(&audit, &run.out_dir, run.dump_subgroups)?;
    print_summary(&audit, &run.out_dir);
    Ok(())
}

fn print_summary(audit: &Audit, out_dir: &Path) {
    let r = &audit.report;
    for w in &r.metadata.warnings {
        eprintln!("warning: {w}");
    }
    println!(
        "{} rows, {} attributes ({}), {} dropped",
        r.metadata.n,
        r.metadata.m,
        r.metadata.input.attributes.join(", "),
        r.metadata.input.rows_dropped
    );
    println!("{:>5} {:>8} {:>8} {:>8} {:>10} {:>10}", "level", "sr_min", "sr_max", "sp", "var", "var_ratio");
    let fmt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    for l in &r.levels {
        println!(
            "{:>5} {:>8.4} {:>8.4} {:>8.4} {:>10} {:>10}",
            l.level,
            l.sr_min,
            l.sr_max,
            l.sp,
            l.var.map_or_else(|| "-".to_string(), |v| format!("{v:.3e}")),
            fmt(l.var_ratio)
        );
    }
    if let Some(text) = &r.interpretation_text {
        println!("VarRatio(0) = {}: {text}", fmt(r.var_ratio_0));
    }
    println!("outputs written to {}", out_dir.display());
}

fn synth(args: &SynthArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            toml::from_str::<SyntheticConfig>(&text).map_err(|e| Error::Config(e.to_string()))?
        }
        None => SyntheticConfig {
            m: args.m,
            vertex_size: match args.vertex_size {
                Some(size) => VertexSize::Fixed { size },
                None => VertexSize::Multiple {
                    unit: args.unit,
                    max_multiplier: args.max_multiplier,
                },
            },
            p_base: args.p_base,
            delta: args.delta,
            n_biased_low: args.n_low,
            n_biased_high: args.n_high,
            placement: match args.placement {
                Placement::Contiguous => BiasPlacement::Contiguous,
                Placement::Shuffled => BiasPlacement::Shuffled,
            },
            seed: 0,
        },
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let data = generate(&cfg)?;
    write_atomic(&args.output, |w| write_csv(&data, w))?;
    println!("{} rows over {} vertices written to {}", data.len(), cfg.n_vertices(), args.output.display());
    Ok(())
}

fn bench(m: &[usize], n: &[usize], seed: u64, output: Option<&Path>) -> Result<()> {
    let rows = run_bench(m, n, seed)?;
    println!(
        "{:>3} {:>8} {:>12} {:>10} {:>10} {:>8} {:>12} {:>9}",
        "m", "n", "prop_secs", "edges", "bound", "oracle", "oracle_secs", "ratio"
    );
    for r in &rows {
        let mode = if r.notice.is_some() { "sampled" } else { "full" };
        println!(
            "{:>3} {:>8} {:>12.3e} {:>10} {:>10} {:>8} {:>12.3e} {:>9.1}",
            r.m, r.n, r.propagation_secs, r.edges_traversed, r.edge_bound, mode, r.oracle_secs, r.ratio
        );
    }
    for r in &rows {
        if let Some(notice) = &r.notice {
            println!("note (m={}, n={}): {notice}", r.m, r.n);
        }
    }
    println!("all {} rows: propagation equals oracle", rows.len());
    if let Some(path) = output {
        write_atomic(path, |w| write_bench_csv(&rows, w))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Audit { input, config, run } => {
            let cfg = match config {
                Some(path) => BinarizationConfig::from_path(&path)?,
                None => sniff_identity_config(&input)?,
            };
            audit_file(&input, &cfg, &run)
        }
        Command::AdultPrep {
            input,
            emit_config,
            run,
        } => {
            let cfg = adult_preset();
            if let Some(path) = emit_config {
                let text = cfg.to_toml();
                write_atomic(&path, |w| w.write_all(text.as_bytes()).map_err(|e| Error::Config(e.to_string())))?;
            }
            audit_file(&input, &cfg, &run)
        }
        Command::Synth(args) => synth(&args),
        Command::Bench { m, n, seed, output } => bench(&m, &n, seed, output.as_deref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.kind();
            eprintln!("error: {e}");
            ExitCode::from(exit_code(kind))
        }
    }
}
