//! Batch evaluation over a directory of AIGER files: one record per
//! (benchmark, algorithm) pair, CSV output, and a cactus plot of solved
//! instances.
//!
//! A fixed pool of workers pulls jobs from a queue; each job runs one
//! algorithm on one file with a private manager, its own deadline token and
//! node limit, so a blowup in one run never touches another. After the
//! pool drains, records are sorted, cross-checked for verdict
//! disagreements, and handed back in a deterministic order: re-running the
//! same configuration reproduces the same file byte for byte except for the
//! timing columns.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::aiger::AigCircuit;
use crate::bdd::{BddManager, CancelToken};
use crate::decomp::{decompose, DecomposeOptions};
use crate::game::CompiledCircuit;
use crate::solvers::{run_algorithm, Algorithm, SolverError, SolverOptions, Verdict};

/// Node ceiling for the cheap decomposability probe; it only needs to
/// realize the part BDDs, never the monolithic error.
const PROBE_NODE_LIMIT: usize = 2_000_000;

pub const DEFAULT_NODE_LIMIT: usize = 20_000_000;

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub dir: PathBuf,
    pub algos: Vec<Algorithm>,
    pub timeout: Option<Duration>,
    pub jobs: usize,
    /// Per-run node ceiling; exceeding it records a TIMEOUT.
    pub node_limit: Option<usize>,
    pub solver: SolverOptions,
}

impl BenchConfig {
    pub fn new(dir: PathBuf) -> BenchConfig {
        BenchConfig {
            dir,
            algos: Algorithm::ALL.to_vec(),
            timeout: Some(Duration::from_secs(60)),
            jobs: 1,
            node_limit: Some(DEFAULT_NODE_LIMIT),
            solver: SolverOptions::default(),
        }
    }
}

/// One (benchmark, algorithm) measurement.
#[derive(Clone, Debug)]
pub struct RunRecord {
    /// File name relative to the benchmark directory.
    pub benchmark: String,
    pub algorithm: String,
    pub verdict: Verdict,
    pub wall: Duration,
    /// Total BDD nodes the run ever allocated; 0 when the run never got a
    /// manager off the ground (parse failures) or lost it (timeouts).
    pub peak_nodes: usize,
    /// Sub-games the algorithm actually solved; 1 for monolithic runs.
    pub subgames: usize,
    /// Whether the error function splits into two or more parts. Probed
    /// separately from the run, under a small node budget of its own.
    pub decomposable: bool,
    /// Failure detail or disagreement report; empty otherwise.
    pub note: String,
}

/// Lists `.aag` and `.aig` files directly under `dir`, sorted by name.
pub fn list_benchmarks(dir: &Path) -> io::Result<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if !path.is_file() {
            continue;
        }
        match path.extension().and_then(|e| e.to_str()) {
            Some("aag") | Some("aig") => {}
            _ => continue,
        }
        let name = entry.file_name().to_string_lossy().into_owned();
        out.push((name, path));
    }
    out.sort();
    Ok(out)
}

fn load_circuit(path: &Path) -> Result<AigCircuit, String> {
    let bytes = fs::read(path).map_err(|e| format!("read failed: {e}"))?;
    if bytes.starts_with(b"aag") {
        let text = String::from_utf8(bytes).map_err(|e| format!("bad utf-8: {e}"))?;
        AigCircuit::parse_ascii(&text).map_err(|e| format!("parse failed: {e}"))
    } else if bytes.starts_with(b"aig") {
        AigCircuit::parse_binary(&bytes).map_err(|e| format!("parse failed: {e}"))
    } else {
        Err("not an AIGER file (no aag/aig header)".into())
    }
}

/// Best-effort decomposability check with a private manager. A probe that
/// trips its node budget reports false rather than stalling the bench.
fn probe_decomposable(circuit: &AigCircuit) -> bool {
    let mut mgr = BddManager::new();
    mgr.set_node_limit(PROBE_NODE_LIMIT);
    let compiled = CompiledCircuit::build(&mut mgr, circuit);
    match decompose(&mut mgr, &compiled, circuit, &DecomposeOptions::default()) {
        Ok(d) => !mgr.interrupted() && d.is_decomposable(),
        Err(_) => false,
    }
}

fn run_one(id: &str, path: &Path, algo: Algorithm, cfg: &BenchConfig) -> RunRecord {
    let mut record = RunRecord {
        benchmark: id.to_string(),
        algorithm: algo.to_string(),
        verdict: Verdict::Error,
        wall: Duration::ZERO,
        peak_nodes: 0,
        subgames: 0,
        decomposable: false,
        note: String::new(),
    };
    let circuit = match load_circuit(path) {
        Ok(c) => c,
        Err(msg) => {
            record.note = msg;
            return record;
        }
    };
    record.decomposable = probe_decomposable(&circuit);
    let opts = SolverOptions {
        node_limit: cfg.node_limit,
        ..cfg.solver.clone()
    };
    let token = cfg.timeout.map(CancelToken::with_timeout);
    let start = Instant::now();
    match run_algorithm(&circuit, algo, &opts, token) {
        Ok(out) => {
            record.verdict = Verdict::from_realizable(out.realizable);
            record.wall = out.wall;
            record.peak_nodes = out.peak_nodes;
            record.subgames = out.subgames;
        }
        Err(SolverError::Timeout) => {
            record.verdict = Verdict::Timeout;
            record.wall = start.elapsed();
        }
        Err(e) => {
            record.verdict = Verdict::Error;
            record.wall = start.elapsed();
            record.note = e.to_string();
        }
    }
    record
}

/// Runs every algorithm on every benchmark file. Unreadable files yield
/// ERROR records and the run continues; a verdict disagreement between two
/// algorithms on the same file downgrades their records to ERROR with a
/// reproduction command, since a disagreement means a solver bug, not a
/// property of the instance.
pub fn bench_run(cfg: &BenchConfig) -> io::Result<Vec<RunRecord>> {
    let files = list_benchmarks(&cfg.dir)?;
    let mut jobs: VecDeque<(usize, Algorithm)> = VecDeque::new();
    for fi in 0..files.len() {
        for &algo in &cfg.algos {
            jobs.push_back((fi, algo));
        }
    }
    let queue = Mutex::new(jobs);
    let records: Mutex<Vec<RunRecord>> = Mutex::new(Vec::new());
    let workers = cfg.jobs.max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let job = queue.lock().unwrap().pop_front();
                let Some((fi, algo)) = job else { break };
                let (id, path) = &files[fi];
                let record = run_one(id, path, algo, cfg);
                records.lock().unwrap().push(record);
            });
        }
    });
    let mut records = records.into_inner().unwrap();
    mark_disagreements(&mut records, &cfg.dir);
    let algo_rank = |name: &str| {
        cfg.algos
            .iter()
            .position(|a| a.to_string() == name)
            .unwrap_or(usize::MAX)
    };
    records.sort_by(|a, b| {
        a.benchmark
            .cmp(&b.benchmark)
            .then_with(|| algo_rank(&a.algorithm).cmp(&algo_rank(&b.algorithm)))
    });
    Ok(records)
}

fn mark_disagreements(records: &mut [RunRecord], dir: &Path) {
    let mut by_file: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        by_file.entry(r.benchmark.clone()).or_default().push(i);
    }
    for (bench, idxs) in by_file {
        let decisive: Vec<usize> = idxs
            .iter()
            .copied()
            .filter(|&i| {
                matches!(records[i].verdict, Verdict::Realizable | Verdict::Unrealizable)
            })
            .collect();
        let has_r = decisive.iter().any(|&i| records[i].verdict == Verdict::Realizable);
        let has_u = decisive.iter().any(|&i| records[i].verdict == Verdict::Unrealizable);
        if !(has_r && has_u) {
            continue;
        }
        let summary = decisive
            .iter()
            .map(|&i| format!("{}={}", records[i].algorithm, records[i].verdict))
            .collect::<Vec<_>>()
            .join(", ");
        let file = dir.join(&bench);
        for &i in &decisive {
            let algo = records[i].algorithm.clone();
            records[i].verdict = Verdict::Error;
            records[i].note = format!(
                "solver disagreement ({summary}); reproduce: solve {} --algo {algo}",
                file.display()
            );
        }
    }
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit_csv(records: &[RunRecord]) -> String {
    let mut out = String::from("benchmark,algorithm,verdict,wall_ms,peak_nodes,subgames,decomposable,note\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{:.3},{},{},{},{}",
            csv_field(&r.benchmark),
            r.algorithm,
            r.verdict,
            r.wall.as_secs_f64() * 1e3,
            r.peak_nodes,
            r.subgames,
            r.decomposable,
            csv_field(&r.note)
        );
    }
    out
}

pub fn write_csv(records: &[RunRecord], path: &Path) -> io::Result<()> {
    fs::write(path, emit_csv(records))
}

const PLOT_COLORS: [(&str, &str); 4] = [
    ("classical", "#1f77b4"),
    ("comp1", "#d62728"),
    ("comp2", "#2ca02c"),
    ("comp3", "#9467bd"),
];

fn color_for(algo: &str) -> &'static str {
    PLOT_COLORS
        .iter()
        .find(|(a, _)| *a == algo)
        .map(|(_, c)| *c)
        .unwrap_or("#7f7f7f")
}

/// Cactus plot: for each algorithm the solved instances sorted by wall
/// time, cumulative count on x against log-scale time on y. Timeouts and
/// errors appear in the CSV but never here.
pub fn emit_cactus(records: &[RunRecord]) -> String {
    let (l, r, t, b) = (64.0, 616.0, 24.0, 372.0);
    let (width, height) = (640.0, 420.0);

    let mut algos: Vec<String> = Vec::new();
    for rec in records {
        if !algos.contains(&rec.algorithm) {
            algos.push(rec.algorithm.clone());
        }
    }
    let mut series: Vec<(String, Vec<f64>)> = Vec::new();
    for algo in &algos {
        let mut times: Vec<f64> = records
            .iter()
            .filter(|rec| {
                rec.algorithm == *algo
                    && matches!(rec.verdict, Verdict::Realizable | Verdict::Unrealizable)
            })
            .map(|rec| (rec.wall.as_secs_f64() * 1e3).max(1e-3))
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        series.push((algo.clone(), times));
    }

    let max_count = series.iter().map(|(_, s)| s.len()).max().unwrap_or(0);
    let lo = series
        .iter()
        .flat_map(|(_, s)| s.first().copied())
        .fold(f64::INFINITY, f64::min);
    let hi = series
        .iter()
        .flat_map(|(_, s)| s.last().copied())
        .fold(0.0f64, f64::max);
    // decade bounds around the data, with a sane default for empty plots
    let (lo_dec, hi_dec) = if max_count == 0 || !lo.is_finite() {
        (-1i32, 3i32)
    } else {
        let lo_dec = lo.log10().floor() as i32;
        let hi_dec = (hi.log10().ceil() as i32).max(lo_dec + 1);
        (lo_dec, hi_dec)
    };
    let x_of = |count: f64| {
        let span = max_count.max(1) as f64;
        l + (r - l) * count / span
    };
    let y_of = |ms: f64| {
        let ld = ms.log10();
        b - (b - t) * (ld - lo_dec as f64) / (hi_dec - lo_dec) as f64
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">"
    );
    let _ = writeln!(svg, "<rect width=\"{width}\" height=\"{height}\" fill=\"white\"/>");
    // axes
    let _ = writeln!(
        svg,
        "<line x1=\"{l}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{l}\" y1=\"{t}\" x2=\"{l}\" y2=\"{b}\" stroke=\"black\"/>"
    );
    // y ticks at decades
    for d in lo_dec..=hi_dec {
        let y = y_of(10f64.powi(d));
        let label = format!("1e{d}");
        let _ = writeln!(
            svg,
            "<line x1=\"{0}\" y1=\"{y}\" x2=\"{l}\" y2=\"{y}\" stroke=\"black\"/>",
            l - 4.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{0}\" y=\"{1}\" font-size=\"11\" text-anchor=\"end\">{label}</text>",
            l - 7.0,
            y + 4.0
        );
    }
    // x ticks
    let step = (max_count / 8).max(1);
    let mut c = 0;
    while c <= max_count {
        let x = x_of(c as f64);
        let _ = writeln!(
            svg,
            "<line x1=\"{x}\" y1=\"{b}\" x2=\"{x}\" y2=\"{0}\" stroke=\"black\"/>",
            b + 4.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x}\" y=\"{0}\" font-size=\"11\" text-anchor=\"middle\">{c}</text>",
            b + 16.0
        );
        c += step;
    }
    let _ = writeln!(
        svg,
        "<text x=\"{0}\" y=\"{1}\" font-size=\"12\" text-anchor=\"middle\">instances solved</text>",
        (l + r) / 2.0,
        height - 8.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"14\" y=\"{0}\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 {0})\">wall time (ms)</text>",
        (t + b) / 2.0
    );
    // series
    for (algo, times) in &series {
        if times.is_empty() {
            continue;
        }
        let color = color_for(algo);
        let points: Vec<String> = times
            .iter()
            .enumerate()
            .map(|(i, &ms)| format!("{:.2},{:.2}", x_of((i + 1) as f64), y_of(ms)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>",
            points.join(" ")
        );
    }
    // legend
    for (k, algo) in algos.iter().enumerate() {
        let y = t + 14.0 + 16.0 * k as f64;
        let color = color_for(algo);
        let _ = writeln!(
            svg,
            "<line x1=\"{0}\" y1=\"{y}\" x2=\"{1}\" y2=\"{y}\" stroke=\"{color}\" stroke-width=\"2\"/>",
            l + 10.0,
            l + 34.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{0}\" y=\"{1}\" font-size=\"12\">{algo}</text>",
            l + 40.0,
            y + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_cactus(records: &[RunRecord], path: &Path) -> io::Result<()> {
    fs::write(path, emit_cactus(records))
}
