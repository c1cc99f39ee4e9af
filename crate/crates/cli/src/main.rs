use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use ehlstar::compress::{Mode, Outcome};
use ehlstar::geometry::Point;
use ehlstar::grid_index::DEFAULT_LABEL_BYTES;
use ehlstar::index_file::{hex, map_hash, IndexBundle};
use ehlstar::map::{load_map, PolygonalMap};
use ehlstar::oracle::oracle_query;
use ehlstar::pipeline::{build_index, BuildOptions};
use ehlstar::query::{shortest_distance, shortest_path};
use ehlstar::report::{micros, write_csv, BenchRow, Stats};
use ehlstar::svg::render_svg;
use ehlstar::visibility::build_visibility_graph;
use ehlstar::workload::{
    gen_cluster_spec, gen_mixed_queries, parse_queries, parse_scen, sample_queries, write_queries,
    ClusterSpec, Distribution, Query,
};

/// Relative tolerance when comparing against the oracle.
const VERIFY_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(
    name = "ehlstar",
    version,
    about = "Memory-budgeted Euclidean hub labeling"
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "EHLSTAR_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Uniform,
    Workload,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Uniform => Mode::Uniform,
            ModeArg::Workload => Mode::WorkloadAware,
        }
    }
}

#[derive(clap::Args, Clone)]
struct BuildArgs {
    /// Cell side length in map units.
    #[arg(long, default_value_t = 1.0)]
    cell_size: f64,
    /// Share of the uncompressed label count to keep; 100 disables compression.
    #[arg(long, default_value_t = 100.0)]
    budget_percent: f64,
    #[arg(long, value_enum, default_value = "uniform")]
    mode: ModeArg,
    /// Historical query file used to count per-cell endpoints.
    #[arg(long)]
    workload: Option<PathBuf>,
    /// Cluster rectangles to record in the index for rendering.
    #[arg(long)]
    clusters: Option<PathBuf>,
    #[arg(long, default_value_t = ehlstar::compress::DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build (and optionally compress) an index for a map.
    Build {
        #[arg(long)]
        map: PathBuf,
        #[command(flatten)]
        build: BuildArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer queries from an index.
    Query {
        #[arg(long)]
        index: PathBuf,
        /// Map file to check against the index's map hash.
        #[arg(long)]
        map: Option<PathBuf>,
        /// Query file (`sx sy tx ty` lines, or a `.scen` scenario).
        #[arg(long, conflicts_with = "pair")]
        queries: Option<PathBuf>,
        /// A single query given inline.
        #[arg(long, num_args = 4, value_names = ["SX", "SY", "TX", "TY"], allow_negative_numbers = true)]
        pair: Option<Vec<f64>>,
        /// Timed runs per query.
        #[arg(long, default_value_t = 5)]
        repeat: usize,
        /// Also print the path of each query.
        #[arg(long)]
        path: bool,
        /// Write a one-row CSV report here.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Compare index answers with the brute-force oracle.
    Verify {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        map: Option<PathBuf>,
        /// Number of random reachable queries.
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Verify these queries instead of random ones.
        #[arg(long)]
        queries: Option<PathBuf>,
    },
    /// Render the region layout as SVG.
    Visualize {
        #[arg(long)]
        index: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a query set and its cluster sidecar.
    GenQueries {
        #[arg(long)]
        map: PathBuf,
        /// `uniform` or `cluster-X` with X rectangles.
        #[arg(long, default_value = "uniform")]
        mode: String,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        /// Percentage of pairs drawn from the clusters; the rest are uniform.
        #[arg(long, default_value_t = 100)]
        adherence: u32,
        /// Reuse rectangles from an existing sidecar instead of drawing new ones.
        #[arg(long)]
        clusters: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build at several budgets and time queries, writing CSV rows.
    Bench {
        #[arg(long, required = true, num_args = 1..)]
        map: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "100,80,60,40,20,10,5")]
        budgets: Vec<f64>,
        #[command(flatten)]
        build: BuildArgs,
        /// Query file; random uniform queries when absent.
        #[arg(long)]
        queries: Option<PathBuf>,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 5)]
        repeat: usize,
        /// Also verify this many random queries per build.
        #[arg(long, default_value_t = 0)]
        verify: usize,
        #[arg(long, default_value_t = DEFAULT_LABEL_BYTES)]
        label_bytes: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    match run(cli.cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cmd: Cmd) -> Result<ExitCode> {
    match cmd {
        Cmd::Build { map, build, out } => cmd_build(&map, &build, &out),
        Cmd::Query {
            index,
            map,
            queries,
            pair,
            repeat,
            path,
            csv,
        } => cmd_query(
            &index,
            map.as_deref(),
            queries.as_deref(),
            pair,
            repeat,
            path,
            csv.as_deref(),
        ),
        Cmd::Verify {
            index,
            map,
            n,
            seed,
            queries,
        } => cmd_verify(&index, map.as_deref(), n, seed, queries.as_deref()),
        Cmd::Visualize { index, out } => {
            let bundle = IndexBundle::load(&index)
                .with_context(|| format!("loading {}", index.display()))?;
            fs::write(&out, render_svg(&bundle))?;
            println!("wrote {}", out.display());
            Ok(ExitCode::SUCCESS)
        }
        Cmd::GenQueries {
            map,
            mode,
            n,
            adherence,
            clusters,
            seed,
            out,
        } => cmd_gen_queries(&map, &mode, n, adherence, clusters.as_deref(), seed, &out),
        Cmd::Bench {
            map,
            budgets,
            build,
            queries,
            n,
            repeat,
            verify,
            label_bytes,
            csv,
        } => cmd_bench(
            &map,
            &budgets,
            &build,
            queries.as_deref(),
            n,
            repeat,
            verify,
            label_bytes,
            csv.as_deref(),
        ),
    }
}

fn read_map(path: &Path) -> Result<PolygonalMap> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    load_map(&bytes).with_context(|| format!("parsing {}", path.display()))
}

fn read_queries(path: &Path) -> Result<Vec<Query>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = if path.extension().is_some_and(|e| e == "scen") {
        parse_scen(&text)
    } else {
        parse_queries(&text)
    };
    parsed.with_context(|| format!("parsing {}", path.display()))
}

fn load_checked(index: &Path, map: Option<&Path>) -> Result<IndexBundle> {
    let bundle =
        IndexBundle::load(index).with_context(|| format!("loading {}", index.display()))?;
    if let Some(m) = map {
        let want = map_hash(&read_map(m)?);
        let have = bundle.map_hash();
        if want != have {
            bail!(
                "map {} (sha256 {}) does not match the index (sha256 {}); refusing to run",
                m.display(),
                hex(&want),
                hex(&have)
            );
        }
    }
    Ok(bundle)
}

fn options(map: &PolygonalMap, args: &BuildArgs, budget_percent: f64) -> Result<BuildOptions> {
    let mode: Mode = args.mode.into();
    let workload = match (mode, &args.workload) {
        (Mode::WorkloadAware, Some(p)) => {
            let (nx, ny) = map.cell_dims(args.cell_size);
            let mut counts = vec![0u64; nx * ny];
            for (s, t) in read_queries(p)? {
                counts[map.cell_of(s, args.cell_size)?] += 1;
                counts[map.cell_of(t, args.cell_size)?] += 1;
            }
            Some(counts)
        }
        (Mode::WorkloadAware, None) => bail!("--mode workload needs --workload"),
        (Mode::Uniform, Some(_)) => bail!("--workload is only used with --mode workload"),
        (Mode::Uniform, None) => None,
    };
    let clusters = match &args.clusters {
        Some(p) => Some(
            ClusterSpec::parse(&fs::read_to_string(p)?)
                .with_context(|| format!("parsing {}", p.display()))?,
        ),
        None => None,
    };
    Ok(BuildOptions {
        cell_size: args.cell_size,
        budget_percent,
        mode,
        alpha: args.alpha,
        seed: args.seed,
        workload,
        clusters,
    })
}

fn cmd_build(map_path: &Path, args: &BuildArgs, out: &Path) -> Result<ExitCode> {
    let map = read_map(map_path)?;
    let opts = options(&map, args, args.budget_percent)?;
    let (bundle, timings) = build_index(map, &opts)?;
    bundle
        .save(out)
        .with_context(|| format!("writing {}", out.display()))?;
    let m = &bundle.meta;
    let units = bundle.index.memory_units();
    println!("vertices: {}", bundle.map.vertices().len());
    println!("regions: {}", bundle.index.regions.len());
    println!("memory before: {} labels", m.initial_units);
    println!("memory after: {units} labels (budget {})", m.budget_units);
    println!("merges: {}", m.merges);
    println!("build seconds: {:.3}", timings.total().as_secs_f64());
    println!("outcome: {}", m.outcome.as_str());
    println!("wrote {}", out.display());
    if m.outcome == Outcome::SingleRegionOverflow {
        eprintln!("cannot fit {} labels: achieved {units}", m.budget_units);
        return Ok(ExitCode::from(2));
    }
    Ok(ExitCode::SUCCESS)
}

/// Shortest decimal form, e.g. `14` rather than `14.000000000000002`.
fn fmt_dist(d: Option<f64>) -> String {
    match d {
        None => "unreachable".into(),
        Some(v) => {
            let s = format!("{v:.6}");
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        }
    }
}

struct Timed {
    dist: Option<f64>,
    micros: f64,
    labels: usize,
}

fn time_queries(bundle: &IndexBundle, queries: &[Query], repeat: usize) -> Result<Vec<Timed>> {
    let repeat = repeat.max(1);
    queries
        .iter()
        .map(|&(s, t)| {
            let clock = Instant::now();
            let mut res = shortest_distance(&bundle.index, &bundle.map, s, t)?;
            for _ in 1..repeat {
                res = shortest_distance(&bundle.index, &bundle.map, s, t)?;
            }
            Ok(Timed {
                dist: res.dist,
                micros: micros(clock.elapsed()) / repeat as f64,
                labels: res.labels_inspected,
            })
        })
        .collect()
}

fn row_for(
    name: &str,
    bundle: &IndexBundle,
    build_seconds: f64,
    timed: &[Timed],
    label_bytes: usize,
) -> BenchRow {
    let us: Vec<f64> = timed.iter().map(|t| t.micros).collect();
    let labels: Vec<f64> = timed.iter().map(|t| t.labels as f64).collect();
    let (time, work) = (Stats::of(&us), Stats::of(&labels));
    BenchRow {
        map: name.to_string(),
        budget_percent: bundle.meta.budget_percent,
        mode: bundle.meta.mode.as_str().to_string(),
        outcome: bundle.meta.outcome.as_str().to_string(),
        memory_units: bundle.index.memory_units(),
        estimated_mb: bundle.index.estimated_bytes(label_bytes) as f64 / 1e6,
        build_seconds,
        queries: timed.len(),
        mean_us: time.mean,
        median_us: time.median,
        p99_us: time.p99,
        mean_labels_inspected: work.mean,
        median_labels_inspected: work.median,
        verify_pass_rate: None,
    }
}

fn cmd_query(
    index: &Path,
    map: Option<&Path>,
    queries: Option<&Path>,
    pair: Option<Vec<f64>>,
    repeat: usize,
    with_path: bool,
    csv: Option<&Path>,
) -> Result<ExitCode> {
    let bundle = load_checked(index, map)?;
    let qs = match (queries, pair) {
        (Some(p), _) => read_queries(p)?,
        (None, Some(v)) => vec![(Point::new(v[0], v[1]), Point::new(v[2], v[3]))],
        (None, None) => bail!("give --queries or --pair"),
    };
    let timed = time_queries(&bundle, &qs, repeat)?;
    for (&(s, t), r) in qs.iter().zip(&timed) {
        if with_path {
            let p = shortest_path(&bundle.index, &bundle.map, &bundle.labels, s, t)?;
            let pts: Vec<String> = p
                .path
                .iter()
                .map(|q| format!("({} {})", q.x, q.y))
                .collect();
            println!("{}\t{}", fmt_dist(r.dist), pts.join(" "));
        } else {
            println!("{}", fmt_dist(r.dist));
        }
    }
    let row = row_for(
        &index.display().to_string(),
        &bundle,
        0.0,
        &timed,
        DEFAULT_LABEL_BYTES,
    );
    eprintln!(
        "{} queries, mean {:.3} us, median {:.3} us, p99 {:.3} us, mean labels {:.2}",
        row.queries, row.mean_us, row.median_us, row.p99_us, row.mean_labels_inspected
    );
    if let Some(p) = csv {
        write_csv(fs::File::create(p)?, &[row])?;
    }
    Ok(ExitCode::SUCCESS)
}

struct Mismatch {
    s: Point,
    t: Point,
    index: Option<f64>,
    oracle: Option<f64>,
}

fn agrees(a: Option<f64>, b: Option<f64>) -> bool {
    match (a, b) {
        (Some(x), Some(y)) => (x - y).abs() <= VERIFY_TOL * y.abs().max(1.0),
        (None, None) => true,
        _ => false,
    }
}

/// Returns the pass count and the mismatches.
fn verify(bundle: &IndexBundle, queries: &[Query]) -> Result<(usize, Vec<Mismatch>)> {
    let graph = build_visibility_graph(&bundle.map);
    let results: Vec<Result<Option<Mismatch>>> = queries
        .par_iter()
        .map(|&(s, t)| {
            let got = shortest_distance(&bundle.index, &bundle.map, s, t)?.dist;
            let want = oracle_query(&bundle.map, &graph, s, t)?.dist;
            Ok((!agrees(got, want)).then_some(Mismatch {
                s,
                t,
                index: got,
                oracle: want,
            }))
        })
        .collect();
    let mut bad = Vec::new();
    for r in results {
        if let Some(m) = r? {
            bad.push(m);
        }
    }
    Ok((queries.len() - bad.len(), bad))
}

fn cmd_verify(
    index: &Path,
    map: Option<&Path>,
    n: usize,
    seed: u64,
    queries: Option<&Path>,
) -> Result<ExitCode> {
    let bundle = load_checked(index, map)?;
    let qs = match queries {
        Some(p) => read_queries(p)?,
        None if n == 0 => Vec::new(),
        None => sample_queries(&bundle.map, Distribution::Uniform, n, seed)?,
    };
    let (pass, bad) = verify(&bundle, &qs)?;
    println!("{pass}/{} queries match the oracle", qs.len());
    for m in bad.iter().take(10) {
        println!(
            "mismatch: {} {} {} {}: index {} oracle {}",
            m.s.x,
            m.s.y,
            m.t.x,
            m.t.y,
            fmt_dist(m.index),
            fmt_dist(m.oracle)
        );
    }
    Ok(if bad.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_gen_queries(
    map_path: &Path,
    mode: &str,
    n: usize,
    adherence: u32,
    clusters: Option<&Path>,
    seed: u64,
    out: &Path,
) -> Result<ExitCode> {
    let map = read_map(map_path)?;
    let queries = if mode == "uniform" {
        sample_queries(&map, Distribution::Uniform, n, seed)?
    } else {
        let x: usize = mode
            .strip_prefix("cluster-")
            .and_then(|x| x.parse().ok())
            .with_context(|| format!("mode {mode:?} is neither `uniform` nor `cluster-X`"))?;
        let spec = match clusters {
            Some(p) => ClusterSpec::parse(&fs::read_to_string(p)?)?,
            None => gen_cluster_spec(&map, x, seed)?,
        };
        if spec.rects.len() != x {
            bail!(
                "sidecar has {} rectangles, mode asks for {x}",
                spec.rects.len()
            );
        }
        let sidecar = PathBuf::from(format!("{}.clusters", out.display()));
        fs::write(&sidecar, spec.to_text())?;
        println!("wrote {}", sidecar.display());
        gen_mixed_queries(&map, &spec, n, adherence, seed)?
    };
    fs::write(out, write_queries(&queries))?;
    println!("wrote {} queries to {}", queries.len(), out.display());
    Ok(ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn cmd_bench(
    maps: &[PathBuf],
    budgets: &[f64],
    args: &BuildArgs,
    queries: Option<&Path>,
    n: usize,
    repeat: usize,
    verify_n: usize,
    label_bytes: usize,
    csv: Option<&Path>,
) -> Result<ExitCode> {
    let mut rows = Vec::new();
    let mut failed = false;
    for path in maps {
        let map = read_map(path)?;
        let qs = match queries {
            Some(p) => read_queries(p)?,
            None => sample_queries(&map, Distribution::Uniform, n, args.seed)?,
        };
        for &b in budgets {
            let opts = options(&map, args, b)?;
            let clock = Instant::now();
            let (bundle, _) = build_index(map.clone(), &opts)?;
            let secs = clock.elapsed().as_secs_f64();
            let timed = time_queries(&bundle, &qs, repeat)?;
            let mut row = row_for(
                &path.display().to_string(),
                &bundle,
                secs,
                &timed,
                label_bytes,
            );
            if verify_n > 0 {
                let vq = sample_queries(
                    &bundle.map,
                    Distribution::Uniform,
                    verify_n,
                    args.seed ^ 0x5eed,
                )?;
                let (pass, _) = verify(&bundle, &vq)?;
                row.verify_pass_rate = Some(pass as f64 / verify_n as f64);
                failed |= pass != verify_n;
            }
            eprintln!(
                "{} {}%: {} labels, {:.3} s build, {:.3} us mean, {:.2} labels inspected",
                row.map, b, row.memory_units, secs, row.mean_us, row.mean_labels_inspected
            );
            rows.push(row);
        }
    }
    match csv {
        Some(p) => write_csv(fs::File::create(p)?, &rows)?,
        None => write_csv(std::io::stdout().lock(), &rows)?,
    }
    Ok(if failed {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    })
}
