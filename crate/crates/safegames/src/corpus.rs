//! Seeded random game circuits for differential testing.
//!
//! Every batch is a pure function of its seed, so a failing instance can be
//! reproduced from the seed and index alone. The `SAFEGAMES_SEED`
//! environment variable overrides the default seed wherever a corpus feeds
//! a test or benchmark run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::aiger::{AigBuilder, AigCircuit, Literal};

pub const SEED_ENV: &str = "SAFEGAMES_SEED";
pub const DEFAULT_SEED: u64 = 20260823;

/// The seed to use for randomized corpora: `SAFEGAMES_SEED` when set to an
/// integer, the fixed default otherwise.
pub fn env_seed() -> u64 {
    parse_seed(std::env::var(SEED_ENV).ok().as_deref())
}

fn parse_seed(raw: Option<&str>) -> u64 {
    raw.and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_SEED)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Shape {
    /// One random formula drives the error output; rarely splits.
    Tangled,
    /// The error is a disjunction of small conjunction terms, which the
    /// decomposition usually takes apart.
    Disjunctive,
}

#[derive(Clone, Copy, Debug)]
pub struct CorpusOptions {
    pub count: usize,
    /// Cap on latches plus inputs of either kind, so the explicit oracle
    /// stays cheap on every instance.
    pub max_bits: usize,
    pub seed: u64,
}

impl Default for CorpusOptions {
    fn default() -> Self {
        CorpusOptions { count: 100, max_bits: 12, seed: DEFAULT_SEED }
    }
}

/// A deterministic batch alternating between the two shapes.
pub fn generate(opts: &CorpusOptions) -> Vec<AigCircuit> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    (0..opts.count)
        .map(|i| {
            let shape = if i % 2 == 0 { Shape::Disjunctive } else { Shape::Tangled };
            random_game(&mut rng, opts.max_bits, shape)
        })
        .collect()
}

pub fn random_game(rng: &mut impl Rng, max_bits: usize, shape: Shape) -> AigCircuit {
    assert!(max_bits >= 3, "a game needs room for at least one var of each kind");
    let nu = rng.gen_range(1..=3usize.min(max_bits - 2));
    let nc = rng.gen_range(1..=3usize.min(max_bits - nu - 1));
    let nl = rng.gen_range(0..=(max_bits - nu - nc).min(6));

    let mut b = AigBuilder::new();
    let mut vars = Vec::new();
    for i in 0..nu {
        vars.push(b.input(format!("u{i}")));
    }
    for i in 0..nc {
        vars.push(b.input(format!("controllable_c{i}")));
    }
    let mut latches = Vec::new();
    for i in 0..nl {
        let l = b.latch(format!("l{i}"));
        latches.push(l);
        vars.push(l);
    }
    for &l in &latches {
        let next = random_formula(&mut b, rng, &vars, 2);
        b.set_next(l, next);
    }
    let err = match shape {
        Shape::Tangled => random_formula(&mut b, rng, &vars, 3),
        Shape::Disjunctive => {
            let terms: Vec<Literal> = (0..rng.gen_range(2..=4))
                .map(|_| {
                    let lits: Vec<Literal> = (0..rng.gen_range(1..=3))
                        .map(|_| random_leaf(rng, &vars))
                        .collect();
                    b.and_many(&lits)
                })
                .collect();
            b.or_many(&terms)
        }
    };
    b.output(err, "err");
    b.build()
}

fn random_leaf(rng: &mut impl Rng, vars: &[Literal]) -> Literal {
    let v = vars[rng.gen_range(0..vars.len())];
    if rng.gen() {
        v.negate()
    } else {
        v
    }
}

fn random_formula(
    b: &mut AigBuilder,
    rng: &mut impl Rng,
    vars: &[Literal],
    depth: usize,
) -> Literal {
    if depth == 0 || rng.gen_ratio(1, 4) {
        // mostly variables, with the odd constant for degenerate coverage
        if rng.gen_ratio(1, 16) {
            return if rng.gen() { Literal::TRUE } else { Literal::FALSE };
        }
        return random_leaf(rng, vars);
    }
    let x = random_formula(b, rng, vars, depth - 1);
    let y = random_formula(b, rng, vars, depth - 1);
    match rng.gen_range(0..3) {
        0 => b.and(x, y),
        1 => b.or(x, y),
        _ => b.xor(x, y),
    }
}
