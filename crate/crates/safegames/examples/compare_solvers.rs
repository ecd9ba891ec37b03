//! Race the four solving strategies on generated benchmark instances.
//!
//! ```text
//! cargo run --release --example compare_solvers -- mult 3 4 5
//! cargo run --release --example compare_solvers -- wash 2 4 6 8
//! ```
//!
//! Each instance is solved once per algorithm under a per-run timeout
//! (SOLVE_TIMEOUT_SECS env, default 60) and the wall time, verdict and peak
//! node count are tabulated. SOLVE_ALGOS narrows the field, for example
//! SOLVE_ALGOS=classical,comp1.

use std::time::Duration;

use safegames::bdd::CancelToken;
use safegames::benchgen::{gen_mult, gen_wash, MultSpec, WashSpec};
use safegames::solvers::{run_algorithm, Algorithm, SolverError, SolverOptions, Verdict};

fn main() {
    let mut args = std::env::args().skip(1);
    let family = args.next().unwrap_or_else(|| "mult".into());
    let sizes: Vec<u32> = args.filter_map(|a| a.parse().ok()).collect();
    let sizes = if sizes.is_empty() { vec![2, 3, 4] } else { sizes };
    let timeout = std::env::var("SOLVE_TIMEOUT_SECS")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(60u64);
    let algos: Vec<Algorithm> = match std::env::var("SOLVE_ALGOS") {
        Ok(list) => list
            .split(',')
            .map(|s| s.trim().parse().expect("unknown algorithm name"))
            .collect(),
        Err(_) => Algorithm::ALL.to_vec(),
    };
    let node_limit = std::env::var("SOLVE_NODE_LIMIT")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(40_000_000usize);

    println!(
        "{:<12} {:<10} {:>12} {:>10} {:>12} {:>6}",
        "instance", "algorithm", "verdict", "wall_ms", "peak_nodes", "parts"
    );
    for &n in &sizes {
        let circuit = match family.as_str() {
            "wash" => gen_wash(&WashSpec {
                tanks: n,
                min_fill: 2,
                deadline: 4,
                conflicts: WashSpec::default_conflicts(n),
            })
            .expect("valid wash size"),
            _ => gen_mult(&MultSpec { n }).expect("valid mult size"),
        };
        for &algo in &algos {
            let token = CancelToken::with_timeout(Duration::from_secs(timeout));
            let mut opts = SolverOptions::default();
            opts.node_limit = Some(node_limit);
            let label = format!("{family}-{n}");
            match run_algorithm(&circuit, algo, &opts, Some(token)) {
                Ok(out) => println!(
                    "{label:<12} {algo:<10} {:>12} {:>10} {:>12} {:>6}",
                    Verdict::from_realizable(out.realizable).to_string(),
                    out.wall.as_millis(),
                    out.peak_nodes,
                    out.subgames
                ),
                Err(SolverError::Timeout) => {
                    println!("{label:<12} {algo:<10} {:>12}", Verdict::Timeout.to_string())
                }
                Err(e) => println!("{label:<12} {algo:<10} failed: {e}"),
            }
        }
    }
}
