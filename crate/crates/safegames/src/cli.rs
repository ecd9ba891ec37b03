//! Command-line front end: solve one file, inspect a decomposition,
//! generate benchmark instances, or sweep a whole directory.
//!
//! `solve` exits with SYNTCOMP-style codes (10 realizable, 20
//! unrealizable, 30 timeout); everything else exits 0 on success and 1 on
//! failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};

use crate::aiger::{AigCircuit, AigOutput, AndGate, Literal};
use crate::bdd::{BddManager, CancelToken};
use crate::benchgen::{gen_mult, gen_wash, MultSpec, WashSpec};
use crate::decomp::{decompose, DecomposeOptions, PartRecipe};
use crate::game::CompiledCircuit;
use crate::harness::{bench_run, write_cactus, write_csv, BenchConfig, DEFAULT_NODE_LIMIT};
use crate::solvers::{
    portfolio, run_algorithm, Algorithm, ScoreWeights, SolverOptions, Verdict, PORTFOLIO_ORDER,
};

#[derive(Parser, Debug)]
#[command(name = "safegames", version, about = "Realizability of AIGER safety specifications")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Decide whether the controllable inputs can always avoid the error output
    Solve(SolveArgs),
    /// Split the error function into parts and report their cones
    Decompose(DecomposeArgs),
    /// Generate a benchmark instance as ASCII AIGER
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// Run every algorithm over a directory of AIGER files
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum AlgoChoice {
    Classical,
    Comp1,
    Comp2,
    Comp3,
    Portfolio,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// AIGER file, ASCII or binary
    pub file: PathBuf,
    #[arg(long, value_enum)]
    pub algo: AlgoChoice,
    /// comp2 pair-selection weights alpha,beta,gamma
    #[arg(long, value_parser = ScoreWeights::from_str, allow_hyphen_values = true)]
    pub weights: Option<ScoreWeights>,
    /// Give up after this many seconds
    #[arg(long)]
    pub timeout: Option<f64>,
    /// Abort once the BDD manager holds this many nodes
    #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
    pub node_limit: usize,
    /// Print run statistics as JSON after the verdict
    #[arg(long)]
    pub json: bool,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    pub file: PathBuf,
    /// Keep splitting parts recursively instead of stopping after one pass
    #[arg(long)]
    pub deep_decompose: bool,
    /// Write each part as a standalone AIGER file into this directory
    #[arg(long, value_name = "DIR")]
    pub emit_parts: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum GenFamily {
    /// Boolean matrix multiplication: controller guesses the product bits
    Mult {
        /// Matrix dimension (1 to 8)
        #[arg(long)]
        n: u32,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Washing tanks with fill durations, deadlines and conflicts
    Wash {
        #[arg(long)]
        tanks: u32,
        /// Steps a tank stays filled once filling starts
        #[arg(long)]
        k: u32,
        /// Steps a request may wait before service
        #[arg(long)]
        deadline: u32,
        /// Conflicting tank pairs i:j,...; default pairs consecutive tanks
        #[arg(long, value_delimiter = ',')]
        conflicts: Option<Vec<String>>,
        #[arg(short, long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Directory of .aag / .aig files
    #[arg(long)]
    pub dir: PathBuf,
    /// Subset of classical,comp1,comp2,comp3
    #[arg(long, value_delimiter = ',', value_parser = Algorithm::from_str,
          default_value = "classical,comp1,comp2,comp3")]
    pub algos: Vec<Algorithm>,
    /// Per-run timeout in seconds
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
    /// Worker count; each worker owns a private solver stack
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long, value_name = "FILE")]
    pub csv: PathBuf,
    #[arg(long, value_name = "FILE")]
    pub plot: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_NODE_LIMIT)]
    pub node_limit: usize,
}

pub fn run(cli: Cli) -> i32 {
    match cli.command {
        Command::Solve(args) => cmd_solve(&args),
        Command::Decompose(args) => cmd_decompose(&args),
        Command::Gen { family } => cmd_gen(&family),
        Command::Bench(args) => cmd_bench(&args),
    }
}

fn read_circuit(path: &Path) -> Result<AigCircuit, String> {
    let bytes = fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if bytes.starts_with(b"aig") {
        AigCircuit::parse_binary(&bytes).map_err(|e| format!("{}: {e}", path.display()))
    } else {
        let text =
            String::from_utf8(bytes).map_err(|e| format!("{}: not utf-8: {e}", path.display()))?;
        AigCircuit::parse_ascii(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn secs(t: f64) -> Duration {
    Duration::from_secs_f64(t.max(0.0))
}

fn cmd_solve(args: &SolveArgs) -> i32 {
    let t0 = Instant::now();
    let circuit = match read_circuit(&args.file) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    let parse_time = t0.elapsed();
    if let [out] = circuit.outputs.as_slice() {
        if out.lit.is_const() {
            eprintln!(
                "note: error output is the constant {}",
                out.lit.is_negated() as u32
            );
        }
    }
    let mut opts = SolverOptions {
        node_limit: Some(args.node_limit),
        ..SolverOptions::default()
    };
    if let Some(w) = args.weights {
        opts.weights = w;
    }
    let timeout = args.timeout.map(secs);

    let (verdict, stats) = match args.algo {
        AlgoChoice::Portfolio => {
            let out = portfolio(&circuit, &PORTFOLIO_ORDER, timeout, &opts);
            if let Some(d) = &out.diagnostic {
                eprintln!("error: {d}");
            }
            let mut stats = serde_json::json!({
                "algorithm": "portfolio",
                "verdict": out.verdict.to_string(),
                "winner": out.winner.map(|a| a.to_string()),
            });
            add_phases(&mut stats, parse_time, out.wall);
            (out.verdict, stats)
        }
        other => {
            let algo = match other {
                AlgoChoice::Classical => Algorithm::Classical,
                AlgoChoice::Comp1 => Algorithm::Comp1,
                AlgoChoice::Comp2 => Algorithm::Comp2,
                AlgoChoice::Comp3 => Algorithm::Comp3,
                AlgoChoice::Portfolio => unreachable!(),
            };
            let token = timeout.map(CancelToken::with_timeout);
            match run_algorithm(&circuit, algo, &opts, token) {
                Ok(out) => {
                    let mut stats = serde_json::json!({
                        "algorithm": algo.to_string(),
                        "verdict": Verdict::from_realizable(out.realizable).to_string(),
                        "iterations": out.iterations,
                        "subgames": out.subgames,
                        "resolves": out.resolves,
                        "peak_nodes": out.peak_nodes,
                    });
                    add_phases(&mut stats, parse_time, out.wall);
                    (Verdict::from_realizable(out.realizable), stats)
                }
                Err(crate::solvers::SolverError::Timeout) => {
                    let stats = serde_json::json!({
                        "algorithm": algo.to_string(),
                        "verdict": Verdict::Timeout.to_string(),
                    });
                    (Verdict::Timeout, stats)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            }
        }
    };

    println!("{verdict}");
    if args.json {
        println!("{}", serde_json::to_string_pretty(&stats).unwrap());
    }
    verdict.exit_code()
}

fn add_phases(stats: &mut serde_json::Value, parse: Duration, solve: Duration) {
    if let Some(map) = stats.as_object_mut() {
        map.insert(
            "phase_ms".into(),
            serde_json::json!({
                "parse": parse.as_secs_f64() * 1e3,
                "solve": solve.as_secs_f64() * 1e3,
                "total": (parse + solve).as_secs_f64() * 1e3,
            }),
        );
    }
}

fn cmd_decompose(args: &DecomposeArgs) -> i32 {
    let circuit = match read_circuit(&args.file) {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("error: {msg}");
            return 1;
        }
    };
    let opts = DecomposeOptions {
        deep: args.deep_decompose,
        ..DecomposeOptions::default()
    };
    let mut mgr = BddManager::new();
    mgr.set_node_limit(DEFAULT_NODE_LIMIT);
    let compiled = CompiledCircuit::build(&mut mgr, &circuit);
    let decomp = match decompose(&mut mgr, &compiled, &circuit, &opts) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    // the game is only needed for its transition relation; the circuit's
    // own error function is never built
    let game = match compiled.game_without_error(&mut mgr, &circuit) {
        Ok(g) => g,
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    println!("parts: {}", decomp.parts.len());
    for (i, &part) in decomp.parts.iter().enumerate() {
        let latch_cone = game.cone_semantic(&mgr, part);
        let mut inputs: Vec<_> = mgr
            .support(part)
            .into_iter()
            .filter(|v| game.xu_vars.contains(v) || game.xc_vars.contains(v))
            .collect();
        for &l in &latch_cone {
            let f = game.transition_of(l).expect("cone latch has a transition");
            for v in mgr.support(f) {
                if (game.xu_vars.contains(&v) || game.xc_vars.contains(&v))
                    && !inputs.contains(&v)
                {
                    inputs.push(v);
                }
            }
        }
        println!(
            "part {i}: latches {}, inputs {}",
            latch_cone.len(),
            inputs.len()
        );
    }
    if let Some(dir) = &args.emit_parts {
        if let Err(e) = fs::create_dir_all(dir) {
            eprintln!("error: {}: {e}", dir.display());
            return 1;
        }
        for (i, recipe) in decomp.recipes.iter().enumerate() {
            let name = format!("part{i:03}");
            let standalone = part_circuit(&circuit, recipe, &name);
            let path = dir.join(format!("{name}.aag"));
            if let Err(e) = fs::write(&path, standalone.write_ascii()) {
                eprintln!("error: {}: {e}", path.display());
                return 1;
            }
            println!("wrote {}", path.display());
        }
    }
    0
}

/// The original circuit with its outputs replaced by the conjunction of one
/// recipe's factors. New gates go above `max_var`, so existing indices keep
/// their meaning.
fn part_circuit(circuit: &AigCircuit, recipe: &PartRecipe, name: &str) -> AigCircuit {
    let mut out = circuit.clone();
    out.outputs.clear();
    let mut acc = recipe.factors[0];
    for &f in &recipe.factors[1..] {
        out.max_var += 1;
        let lhs = Literal::from_var(out.max_var, false);
        out.ands.push(AndGate { lhs, rhs0: acc, rhs1: f });
        acc = lhs;
    }
    out.outputs.push(AigOutput { lit: acc, name: Some(name.to_string()) });
    out
}

fn cmd_gen(family: &GenFamily) -> i32 {
    let (circuit, dest) = match family {
        GenFamily::Mult { n, output } => {
            let spec = MultSpec { n: *n };
            match gen_mult(&spec) {
                Ok(c) => (c, output),
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            }
        }
        GenFamily::Wash { tanks, k, deadline, conflicts, output } => {
            let pairs = match conflicts {
                Some(raw) => match parse_conflicts(raw) {
                    Ok(p) => p,
                    Err(msg) => {
                        eprintln!("error: {msg}");
                        return 1;
                    }
                },
                None => WashSpec::default_conflicts(*tanks),
            };
            let spec = WashSpec {
                tanks: *tanks,
                min_fill: *k,
                deadline: *deadline,
                conflicts: pairs,
            };
            match gen_wash(&spec) {
                Ok(c) => (c, output),
                Err(e) => {
                    eprintln!("error: {e}");
                    return 1;
                }
            }
        }
    };
    let text = circuit.write_ascii();
    match dest {
        Some(path) => {
            if let Err(e) = fs::write(path, text) {
                eprintln!("error: {}: {e}", path.display());
                return 1;
            }
            println!("wrote {}", path.display());
            0
        }
        None => {
            print!("{text}");
            0
        }
    }
}

fn parse_conflicts(raw: &[String]) -> Result<Vec<(u32, u32)>, String> {
    raw.iter()
        .map(|pair| {
            let (a, b) = pair
                .split_once(':')
                .ok_or_else(|| format!("bad conflict {pair:?}; expected i:j"))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<u32>()
                    .map_err(|e| format!("bad tank index {s:?}: {e}"))
            };
            Ok((parse(a)?, parse(b)?))
        })
        .collect()
}

fn cmd_bench(args: &BenchArgs) -> i32 {
    let cfg = BenchConfig {
        dir: args.dir.clone(),
        algos: args.algos.clone(),
        timeout: Some(secs(args.timeout)),
        jobs: args.jobs,
        node_limit: Some(args.node_limit),
        solver: SolverOptions::default(),
    };
    let records = match bench_run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {}: {e}", args.dir.display());
            return 1;
        }
    };
    let mut counts = [0usize; 4];
    for r in &records {
        let slot = match r.verdict {
            Verdict::Realizable => 0,
            Verdict::Unrealizable => 1,
            Verdict::Timeout => 2,
            Verdict::Error => 3,
        };
        counts[slot] += 1;
    }
    println!(
        "{} runs: {} realizable, {} unrealizable, {} timeout, {} error",
        records.len(),
        counts[0],
        counts[1],
        counts[2],
        counts[3]
    );
    if let Err(e) = write_csv(&records, &args.csv) {
        eprintln!("error: {}: {e}", args.csv.display());
        return 1;
    }
    println!("wrote {}", args.csv.display());
    if let Some(plot) = &args.plot {
        if let Err(e) = write_cactus(&records, plot) {
            eprintln!("error: {}: {e}", plot.display());
            return 1;
        }
        println!("wrote {}", plot.display());
    }
    0
}
