//! End-to-end realizability procedures. `classical` runs the plain backward
//! fixpoint over the whole game. `comp_1`, `comp_2` and `comp_3` first split
//! the error function into parts, solve the induced sub-games, and recombine
//! the results: all at once, pairwise by a merge heuristic, or interleaved
//! with the global fixpoint. All four agree on the verdict and, when they
//! run to completion, on the winning regions. `oracle_explicit` re-derives
//! the answer by brute-force enumeration and exists to check the others.

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use crate::aiger::AigCircuit;
use crate::bdd::{BddManager, BddRef, CancelToken, VarId};
use crate::decomp::{decompose, DecomposeOptions, Decomposition};
use crate::game::{CompiledCircuit, GameError, Stopped, SymbolicGame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Classical,
    Comp1,
    Comp2,
    Comp3,
}

impl Algorithm {
    pub const ALL: [Algorithm; 4] = [
        Algorithm::Classical,
        Algorithm::Comp1,
        Algorithm::Comp2,
        Algorithm::Comp3,
    ];
}

/// Priority order for the portfolio: the compositional solvers tend to win
/// on decomposable inputs, so they go first when workers are scarce.
pub const PORTFOLIO_ORDER: [Algorithm; 4] = [
    Algorithm::Comp1,
    Algorithm::Comp3,
    Algorithm::Comp2,
    Algorithm::Classical,
];

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Algorithm::Classical => "classical",
            Algorithm::Comp1 => "comp1",
            Algorithm::Comp2 => "comp2",
            Algorithm::Comp3 => "comp3",
        };
        f.write_str(name)
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Algorithm, String> {
        match s {
            "classical" => Ok(Algorithm::Classical),
            "comp1" => Ok(Algorithm::Comp1),
            "comp2" => Ok(Algorithm::Comp2),
            "comp3" => Ok(Algorithm::Comp3),
            other => Err(format!(
                "unknown algorithm {other:?}; expected classical, comp1, comp2 or comp3"
            )),
        }
    }
}

/// Weights of the pair-selection score in `comp_2`. Larger conjoined results
/// are penalized by `alpha`, shared latch cones rewarded by `beta`, wide
/// combined cones penalized by `gamma`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScoreWeights {
    pub alpha: i64,
    pub beta: i64,
    pub gamma: i64,
}

impl Default for ScoreWeights {
    fn default() -> Self {
        ScoreWeights { alpha: -2, beta: 1, gamma: -1 }
    }
}

impl FromStr for ScoreWeights {
    type Err = String;

    fn from_str(s: &str) -> Result<ScoreWeights, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected three comma-separated integers, got {s:?}"));
        }
        let parse = |t: &str| {
            t.parse::<i64>()
                .map_err(|e| format!("bad weight {t:?}: {e}"))
        };
        Ok(ScoreWeights {
            alpha: parse(parts[0])?,
            beta: parse(parts[1])?,
            gamma: parse(parts[2])?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct SolverOptions {
    pub decompose: DecomposeOptions,
    pub weights: ScoreWeights,
    /// Abort a run once its manager holds this many nodes. `None` means
    /// unbounded.
    pub node_limit: Option<usize>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            decompose: DecomposeOptions::default(),
            weights: ScoreWeights::default(),
            node_limit: None,
        }
    }
}

/// Winning regions of a completed solve, in the manager that ran it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Regions {
    /// States over the latches from which the controller wins.
    pub winning_states: BddRef,
    /// The maximal permissive strategy over latches and inputs.
    pub winning_valuations: BddRef,
}

/// What a solver concluded. `regions` is `None` when an unrealizable
/// sub-problem short-circuited the run before the global regions existed.
#[derive(Debug, Clone, Copy)]
pub struct SolveOutcome {
    pub realizable: bool,
    pub regions: Option<Regions>,
    /// Number of parts the error function was split into (1 when no
    /// decomposition was involved).
    pub subgames: usize,
    /// Fixpoint iterations across all solves this run performed.
    pub iterations: usize,
    /// Solve passes beyond the initial sub-games: merges for `comp_2`,
    /// sub-game refinements for `comp_3`.
    pub resolves: usize,
}

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error("run aborted by timeout or resource limit")]
    Timeout,
}

impl From<Stopped> for SolverError {
    fn from(_: Stopped) -> SolverError {
        SolverError::Timeout
    }
}

pub fn classical(mgr: &mut BddManager, game: &SymbolicGame) -> Result<SolveOutcome, Stopped> {
    let sol = game.solve(mgr)?;
    Ok(SolveOutcome {
        realizable: sol.realizable,
        regions: Some(Regions {
            winning_states: sol.winning_states,
            winning_valuations: sol.winning_valuations,
        }),
        subgames: 1,
        iterations: sol.iterations,
        resolves: 0,
    })
}

/// One solved sub-game: the error part it came from, its latch cone, and its
/// winning regions (over the cone, which embeds them in the full game).
pub struct SubgameSolution {
    pub part: BddRef,
    pub cone: Vec<VarId>,
    pub valuations: BddRef,
    pub states: BddRef,
    pub iterations: usize,
}

pub enum SubgameResult {
    Solved(Vec<SubgameSolution>),
    /// Some sub-game is lost from its initial state, which makes the whole
    /// game unrealizable without ever solving it.
    Unrealizable { solved: usize, iterations: usize },
}

/// Solve every sub-game induced by a decomposition, stopping at the first
/// unrealizable one.
pub fn solve_subgames(
    mgr: &mut BddManager,
    game: &SymbolicGame,
    decomp: &Decomposition,
) -> Result<SubgameResult, Stopped> {
    let mut out = Vec::with_capacity(decomp.parts.len());
    let mut iterations = 0;
    for &part in &decomp.parts {
        let cone = game.cone_semantic(mgr, part);
        let sub = game.restricted(mgr, &cone, part);
        let sol = sub.solve(mgr)?;
        iterations += sol.iterations;
        if !sol.realizable {
            return Ok(SubgameResult::Unrealizable { solved: out.len() + 1, iterations });
        }
        out.push(SubgameSolution {
            part,
            cone,
            valuations: sol.winning_valuations,
            states: sol.winning_states,
            iterations: sol.iterations,
        });
    }
    Ok(SubgameResult::Solved(out))
}

/// Regions in hand, recover the verdict and the valuations with respect to
/// the original dynamics so all solvers report literally the same BDDs.
fn finish(
    mgr: &mut BddManager,
    game: &SymbolicGame,
    realizable: bool,
    winning_states: BddRef,
    subgames: usize,
    iterations: usize,
    resolves: usize,
) -> Result<SolveOutcome, Stopped> {
    let winning_valuations = game.winning_valuations(mgr, winning_states);
    if mgr.interrupted() {
        return Err(Stopped::Timeout);
    }
    Ok(SolveOutcome {
        realizable,
        regions: Some(Regions { winning_states, winning_valuations }),
        subgames,
        iterations,
        resolves,
    })
}

fn early_unrealizable(subgames: usize, iterations: usize) -> SolveOutcome {
    SolveOutcome { realizable: false, regions: None, subgames, iterations, resolves: 0 }
}

/// True when every sub-game is winnable from every state of its cone and no
/// two parts constrain the same controllable input. Under those two facts
/// the whole game is realizable from every state: each part's avoidance
/// choice binds only its private controllables, so the per-part choices
/// always compose into one response, and whatever state that response
/// reaches is again winning in every sub-game.
fn independent_and_everywhere_winnable(
    mgr: &mut BddManager,
    game: &SymbolicGame,
    subs: &[SubgameSolution],
) -> bool {
    let top = mgr.const_true();
    if subs.iter().any(|s| s.states != top) {
        return false;
    }
    let xc: HashSet<VarId> = game.xc_vars.iter().copied().collect();
    let mut claimed: HashSet<VarId> = HashSet::new();
    for sub in subs {
        for v in mgr.support(sub.part) {
            if xc.contains(&v) && !claimed.insert(v) {
                return false;
            }
        }
    }
    true
}

/// Conjunction of the lifted sub-game winning valuations. Valuations rather
/// than states: they constrain the current inputs too, so the conjunction
/// already encodes every one-step conflict between sub-games and its
/// complement subsumes the original error. The reduced games never need the
/// monolithic error function.
fn valuation_intersection(mgr: &mut BddManager, subs: &[SubgameSolution]) -> BddRef {
    let mut lambda = mgr.const_true();
    for sub in subs {
        lambda = mgr.and(lambda, sub.valuations);
    }
    lambda
}

/// Solve the sub-games, intersect all their winning valuations into one
/// constraint, and solve a single reduced game that asks the controller to
/// stay inside that intersection. The dynamics are cofactored down to the
/// intersection since behavior outside it never matters.
pub fn comp_1(
    mgr: &mut BddManager,
    game: &SymbolicGame,
    decomp: &Decomposition,
) -> Result<SolveOutcome, Stopped> {
    if !decomp.is_decomposable() {
        return classical(mgr, game);
    }
    comp_1_run(mgr, game, decomp, true)
}

/// Requires a decomposable `decomp`. With `want_regions` false the caller
/// only needs the verdict: independent everywhere-winnable parts conclude
/// realizable without any global object, and the final valuation build
/// against the original game is skipped (`game.error` is never read).
fn comp_1_run(
    mgr: &mut BddManager,
    game: &SymbolicGame,
    decomp: &Decomposition,
    want_regions: bool,
) -> Result<SolveOutcome, Stopped> {
    let subgames = decomp.parts.len();
    let subs = match solve_subgames(mgr, game, decomp)? {
        SubgameResult::Solved(subs) => subs,
        SubgameResult::Unrealizable { iterations, .. } => {
            return Ok(early_unrealizable(subgames, iterations));
        }
    };
    let mut iterations: usize = subs.iter().map(|s| s.iterations).sum();
    if !want_regions && independent_and_everywhere_winnable(mgr, game, &subs) {
        return Ok(SolveOutcome {
            realizable: true,
            regions: None,
            subgames,
            iterations,
            resolves: 0,
        });
    }
    let lambda = valuation_intersection(mgr, &subs);
    let not_lambda = mgr.not(lambda);
    let cone = game.cone_semantic(mgr, lambda);
    let mut transitions = Vec::with_capacity(cone.len());
    for &v in &cone {
        let f = game.transition_of(v).expect("cone variable is not a latch");
        transitions.push(mgr.gencof(f, lambda));
    }
    let reduced = SymbolicGame::new(
        mgr,
        cone,
        transitions,
        not_lambda,
        game.xu_vars.clone(),
        game.xc_vars.clone(),
    );
    let (losing, its) = reduced.losing_states(mgr)?;
    iterations += its;
    let realizable = !mgr.eval_all_false(losing);
    if !want_regions {
        return Ok(SolveOutcome { realizable, regions: None, subgames, iterations, resolves: 0 });
    }
    let safe = mgr.not(losing);
    finish(mgr, game, realizable, safe, subgames, iterations, 0)
}

/// A pool member during incremental aggregation: the winning valuations of
/// the sub-games it covers, which original sub-games those are, and the
/// latch cone used for scoring.
pub struct AggregationEntry {
    pub w: BddRef,
    pub states: BddRef,
    pub members: BTreeSet<usize>,
    pub cone: Vec<VarId>,
}

fn sorted_intersection_len(a: &[VarId], b: &[VarId]) -> usize {
    let mut i = 0;
    let mut j = 0;
    let mut n = 0;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Solve the sub-games, then repeatedly merge the best-scoring pair of
/// results by solving the game whose error is violating either one. The
/// score prefers pairs whose combination stays small and whose cones
/// overlap. Ties go to the lexicographically first pair, so merge trees are
/// deterministic.
pub fn comp_2(
    mgr: &mut BddManager,
    game: &SymbolicGame,
    decomp: &Decomposition,
    weights: &ScoreWeights,
) -> Result<SolveOutcome, Stopped> {
    if !decomp.is_decomposable() {
        return classical(mgr, game);
    }
    comp_2_run(mgr, game, decomp, weights, true)
}

/// Requires a decomposable `decomp`; see `comp_1_run` for `want_regions`.
fn comp_2_run(
    mgr: &mut BddManager,
    game: &SymbolicGame,
    decomp: &Decomposition,
    weights: &ScoreWeights,
    want_regions: bool,
) -> Result<SolveOutcome, Stopped> {
    let subgames = decomp.parts.len();
    let subs = match solve_subgames(mgr, game, decomp)? {
        SubgameResult::Solved(subs) => subs,
        SubgameResult::Unrealizable { iterations, .. } => {
            return Ok(early_unrealizable(subgames, iterations));
        }
    };
    let mut iterations: usize = subs.iter().map(|s| s.iterations).sum();
    if !want_regions && independent_and_everywhere_winnable(mgr, game, &subs) {
        return Ok(SolveOutcome {
            realizable: true,
            regions: None,
            subgames,
            iterations,
            resolves: 0,
        });
    }
    let mut pool: Vec<AggregationEntry> = Vec::with_capacity(subs.len());
    for (i, sub) in subs.into_iter().enumerate() {
        let cone = game.cone_semantic(mgr, sub.valuations);
        pool.push(AggregationEntry {
            w: sub.valuations,
            states: sub.states,
            members: BTreeSet::from([i]),
            cone,
        });
    }
    let mut merges = 0;
    while pool.len() > 1 {
        if mgr.interrupted() {
            return Err(Stopped::Timeout);
        }
        let mut best: Option<(i64, usize, usize)> = None;
        for i in 0..pool.len() {
            for j in i + 1..pool.len() {
                let conj = mgr.and(pool[i].w, pool[j].w);
                let nconj = mgr.not(conj);
                let size = mgr.node_count(nconj) as i64;
                let inter = sorted_intersection_len(&pool[i].cone, &pool[j].cone) as i64;
                let union = pool[i].cone.len() as i64 + pool[j].cone.len() as i64 - inter;
                let score = weights.alpha * size + weights.beta * inter + weights.gamma * union;
                if best.is_none_or(|(b, _, _)| score > b) {
                    best = Some((score, i, j));
                }
            }
        }
        let (_, r, s) = best.expect("pool has at least two entries");
        let conj = mgr.and(pool[r].w, pool[s].w);
        let nconj = mgr.not(conj);
        let cone = game.cone_semantic(mgr, conj);
        let mut transitions = Vec::with_capacity(cone.len());
        for &v in &cone {
            let f = game.transition_of(v).expect("cone variable is not a latch");
            transitions.push(mgr.gencof(f, conj));
        }
        let merged_game = SymbolicGame::new(
            mgr,
            cone.clone(),
            transitions,
            nconj,
            game.xu_vars.clone(),
            game.xc_vars.clone(),
        );
        let sol = merged_game.solve(mgr)?;
        iterations += sol.iterations;
        merges += 1;
        if !sol.realizable {
            return Ok(SolveOutcome {
                realizable: false,
                regions: None,
                subgames,
                iterations,
                resolves: merges,
            });
        }
        // Valuations against the original dynamics, not the cofactored ones,
        // so later conjunctions see the same function every solver reports.
        let plain = game.restricted(mgr, &cone, nconj);
        let w = plain.winning_valuations(mgr, sol.winning_states);
        let removed_s = pool.swap_remove(s);
        let removed_r = pool.swap_remove(r);
        debug_assert!(removed_r.members.is_disjoint(&removed_s.members));
        let mut members = removed_r.members;
        members.extend(removed_s.members);
        let entry_cone = game.cone_semantic(mgr, w);
        pool.push(AggregationEntry { w, states: sol.winning_states, members, cone: entry_cone });
    }
    let last = pool.pop().expect("pool ends with exactly one entry");
    let realizable = mgr.eval_all_false(last.states);
    if !want_regions {
        return Ok(SolveOutcome {
            realizable,
            regions: None,
            subgames,
            iterations,
            resolves: merges,
        });
    }
    finish(mgr, game, realizable, last.states, subgames, iterations, merges)
}

/// Solve the sub-games, then grow the global losing region inside the
/// intersection game while feeding each newly discovered loss back into the
/// sub-game it projects onto. Converges to exactly the classical regions
/// without ever running the full global fixpoint.
pub fn comp_3(
    mgr: &mut BddManager,
    game: &SymbolicGame,
    decomp: &Decomposition,
) -> Result<SolveOutcome, Stopped> {
    if !decomp.is_decomposable() {
        return classical(mgr, game);
    }
    comp_3_run(mgr, game, decomp, true)
}

/// Requires a decomposable `decomp`; see `comp_1_run` for `want_regions`.
fn comp_3_run(
    mgr: &mut BddManager,
    game: &SymbolicGame,
    decomp: &Decomposition,
    want_regions: bool,
) -> Result<SolveOutcome, Stopped> {
    let subgames = decomp.parts.len();
    let subs = match solve_subgames(mgr, game, decomp)? {
        SubgameResult::Solved(subs) => subs,
        SubgameResult::Unrealizable { iterations, .. } => {
            return Ok(early_unrealizable(subgames, iterations));
        }
    };
    let mut iterations: usize = subs.iter().map(|s| s.iterations).sum();
    if !want_regions && independent_and_everywhere_winnable(mgr, game, &subs) {
        return Ok(SolveOutcome {
            realizable: true,
            regions: None,
            subgames,
            iterations,
            resolves: 0,
        });
    }
    let lambda = valuation_intersection(mgr, &subs);
    let not_lambda = mgr.not(lambda);
    let cone = game.cone_semantic(mgr, lambda);
    let mut transitions = Vec::with_capacity(cone.len());
    for &v in &cone {
        let f = game.transition_of(v).expect("cone variable is not a latch");
        transitions.push(mgr.gencof(f, lambda));
    }
    let global = SymbolicGame::new(
        mgr,
        cone,
        transitions,
        not_lambda,
        game.xu_vars.clone(),
        game.xc_vars.clone(),
    );
    // Quantifier set per sub-game: every latch outside its cone. Projecting
    // the losing region universally over these yields losses chargeable to
    // that sub-game alone.
    let other_latches: Vec<_> = subs
        .iter()
        .map(|sub| {
            let others: Vec<VarId> = game
                .latch_vars
                .iter()
                .copied()
                .filter(|v| !sub.cone.contains(v))
                .collect();
            mgr.intern_set(&others)
        })
        .collect();
    let mut states: Vec<BddRef> = subs.iter().map(|s| s.states).collect();
    let mut u_next = mgr.const_false();
    for &s in &states {
        let ns = mgr.not(s);
        u_next = mgr.or(u_next, ns);
    }
    let mut resolves = 0;
    // The loop body must run at least once even when u_next starts equal to
    // the previous value: sub-games can be individually winnable while their
    // joint constraint is not, and only the first pass can discover that.
    let losing = loop {
        let u = u_next;
        let step = global.upre_step(mgr, u);
        u_next = mgr.or(u, step);
        iterations += 1;
        if mgr.interrupted() {
            return Err(Stopped::Timeout);
        }
        for (i, &others) in other_latches.iter().enumerate() {
            let projected = mgr.forall(others, u_next);
            let meet = mgr.and(projected, states[i]);
            if meet == mgr.const_false() {
                continue;
            }
            // The sub-game believed these states winnable; re-solve it with
            // the projected losses as the error, off the losses' cone the
            // dynamics no longer matter.
            let not_projected = mgr.not(projected);
            let sub_cone = game.cone_semantic(mgr, projected);
            let mut transitions = Vec::with_capacity(sub_cone.len());
            for &v in &sub_cone {
                let f = game.transition_of(v).expect("cone variable is not a latch");
                transitions.push(mgr.gencof(f, not_projected));
            }
            let sub = SymbolicGame::new(
                mgr,
                sub_cone,
                transitions,
                projected,
                game.xu_vars.clone(),
                game.xc_vars.clone(),
            );
            let (safe, its) = sub.safe_states(mgr)?;
            iterations += its;
            resolves += 1;
            states[i] = safe;
        }
        let mut all_safe = mgr.const_true();
        for &s in &states {
            all_safe = mgr.and(all_safe, s);
        }
        let some_lost = mgr.not(all_safe);
        u_next = mgr.or(u_next, some_lost);
        if mgr.interrupted() {
            return Err(Stopped::Timeout);
        }
        if mgr.eval_all_false(u_next) {
            return Ok(SolveOutcome {
                realizable: false,
                regions: None,
                subgames,
                iterations,
                resolves,
            });
        }
        if u_next == u {
            break u;
        }
    };
    if !want_regions {
        return Ok(SolveOutcome {
            realizable: true,
            regions: None,
            subgames,
            iterations,
            resolves,
        });
    }
    let safe = mgr.not(losing);
    finish(mgr, game, true, safe, subgames, iterations, resolves)
}

pub const ORACLE_MAX_BITS: u32 = 22;

#[derive(Debug, thiserror::Error)]
#[error("{bits} state and input bits exceed the {limit}-bit enumeration guard")]
pub struct OracleTooLarge {
    pub bits: u32,
    pub limit: u32,
}

/// Brute-force ground truth: tabulate the error and transition functions at
/// every valuation, run the attractor computation over explicit states, and
/// hand the winning sets back as BDDs for direct comparison. Uses only
/// pointwise evaluation, never the symbolic fixpoint machinery.
pub fn oracle_explicit(
    mgr: &mut BddManager,
    game: &SymbolicGame,
    max_bits: u32,
) -> Result<SolveOutcome, OracleTooLarge> {
    let nl = game.latch_vars.len();
    let nu = game.xu_vars.len();
    let nc = game.xc_vars.len();
    let bits = (nl + nu + nc) as u32;
    if bits > max_bits {
        return Err(OracleTooLarge { bits, limit: max_bits });
    }
    let n_states = 1usize << nl;
    let n_u = 1usize << nu;
    let n_c = 1usize << nc;
    let n_vals = n_states * n_u * n_c;

    let mut point = vec![false; mgr.var_count() as usize];
    let mut bad = vec![false; n_vals];
    let mut next = vec![0u32; n_vals];
    for s in 0..n_states {
        for (k, &v) in game.latch_vars.iter().enumerate() {
            point[v.0 as usize] = s >> k & 1 == 1;
        }
        for u in 0..n_u {
            for (k, &v) in game.xu_vars.iter().enumerate() {
                point[v.0 as usize] = u >> k & 1 == 1;
            }
            for c in 0..n_c {
                for (k, &v) in game.xc_vars.iter().enumerate() {
                    point[v.0 as usize] = c >> k & 1 == 1;
                }
                let idx = (s * n_u + u) * n_c + c;
                bad[idx] = mgr.eval(game.error, &point);
                let mut ns = 0u32;
                for (k, &t) in game.transitions.iter().enumerate() {
                    if mgr.eval(t, &point) {
                        ns |= 1 << k;
                    }
                }
                next[idx] = ns;
            }
        }
    }

    // A state is lost once the environment has an input against which every
    // controller response either errors now or lands in a lost state.
    let mut losing = vec![false; n_states];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let mut changed = false;
        for s in 0..n_states {
            if losing[s] {
                continue;
            }
            let grabbed = (0..n_u).any(|u| {
                (0..n_c).all(|c| {
                    let idx = (s * n_u + u) * n_c + c;
                    bad[idx] || losing[next[idx] as usize]
                })
            });
            if grabbed {
                losing[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut winning_states = mgr.const_false();
    for s in 0..n_states {
        if losing[s] {
            continue;
        }
        let cube = state_cube(mgr, game, s);
        winning_states = mgr.or(winning_states, cube);
    }
    let mut winning_valuations = mgr.const_false();
    for s in 0..n_states {
        if losing[s] {
            continue;
        }
        for u in 0..n_u {
            for c in 0..n_c {
                let idx = (s * n_u + u) * n_c + c;
                if bad[idx] || losing[next[idx] as usize] {
                    continue;
                }
                let sc = state_cube(mgr, game, s);
                let uc = input_cube(mgr, &game.xu_vars, u);
                let cc = input_cube(mgr, &game.xc_vars, c);
                let su = mgr.and(sc, uc);
                let cube = mgr.and(su, cc);
                winning_valuations = mgr.or(winning_valuations, cube);
            }
        }
    }

    Ok(SolveOutcome {
        realizable: !losing[0],
        regions: Some(Regions { winning_states, winning_valuations }),
        subgames: 1,
        iterations,
        resolves: 0,
    })
}

fn state_cube(mgr: &mut BddManager, game: &SymbolicGame, s: usize) -> BddRef {
    let mut cube = mgr.const_true();
    for (k, &v) in game.latch_vars.iter().enumerate().rev() {
        let lit = if s >> k & 1 == 1 { mgr.var(v) } else { mgr.nvar(v) };
        cube = mgr.and(lit, cube);
    }
    cube
}

fn input_cube(mgr: &mut BddManager, vars: &[VarId], bits: usize) -> BddRef {
    let mut cube = mgr.const_true();
    for (k, &v) in vars.iter().enumerate().rev() {
        let lit = if bits >> k & 1 == 1 { mgr.var(v) } else { mgr.nvar(v) };
        cube = mgr.and(lit, cube);
    }
    cube
}

/// One complete run: fresh manager, compile, decompose if the algorithm
/// needs it, solve, report flat statistics.
pub fn run_algorithm(
    circuit: &AigCircuit,
    algo: Algorithm,
    opts: &SolverOptions,
    token: Option<CancelToken>,
) -> Result<RunOutcome, SolverError> {
    let start = Instant::now();
    let mut mgr = BddManager::new();
    if let Some(t) = token {
        mgr.set_token(t);
    }
    if let Some(limit) = opts.node_limit {
        mgr.set_node_limit(limit);
    }
    let compiled = CompiledCircuit::build(&mut mgr, circuit);
    let outcome = match algo {
        Algorithm::Classical => {
            let game = compiled.game(&mut mgr, circuit)?;
            if mgr.interrupted() {
                return Err(SolverError::Timeout);
            }
            classical(&mut mgr, &game)?
        }
        Algorithm::Comp1 | Algorithm::Comp2 | Algorithm::Comp3 => {
            let decomp = decompose(&mut mgr, &compiled, circuit, &opts.decompose)?;
            if mgr.interrupted() {
                return Err(SolverError::Timeout);
            }
            if !decomp.is_decomposable() {
                // One part: the compositional detour adds nothing, run the
                // plain fixpoint on the real game.
                let game = compiled.game(&mut mgr, circuit)?;
                if mgr.interrupted() {
                    return Err(SolverError::Timeout);
                }
                classical(&mut mgr, &game)?
            } else {
                // Verdict-only run: the game carries a constant-false error
                // stand-in, which no code on this path reads, and the
                // circuit's own error function is never realized. On
                // decomposable inputs that function is routinely the
                // largest BDD in sight.
                let game = compiled.game_without_error(&mut mgr, circuit)?;
                if mgr.interrupted() {
                    return Err(SolverError::Timeout);
                }
                match algo {
                    Algorithm::Comp1 => comp_1_run(&mut mgr, &game, &decomp, false)?,
                    Algorithm::Comp2 => {
                        comp_2_run(&mut mgr, &game, &decomp, &opts.weights, false)?
                    }
                    Algorithm::Comp3 => comp_3_run(&mut mgr, &game, &decomp, false)?,
                    Algorithm::Classical => unreachable!(),
                }
            }
        }
    };
    Ok(RunOutcome {
        realizable: outcome.realizable,
        subgames: outcome.subgames,
        iterations: outcome.iterations,
        resolves: outcome.resolves,
        peak_nodes: mgr.node_store_len(),
        wall: start.elapsed(),
    })
}

#[derive(Debug, Clone, Copy)]
pub struct RunOutcome {
    pub realizable: bool,
    pub subgames: usize,
    pub iterations: usize,
    pub resolves: usize,
    pub peak_nodes: usize,
    pub wall: Duration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Realizable,
    Unrealizable,
    Timeout,
    Error,
}

impl Verdict {
    pub fn from_realizable(realizable: bool) -> Verdict {
        if realizable {
            Verdict::Realizable
        } else {
            Verdict::Unrealizable
        }
    }

    /// SYNTCOMP-style process exit codes; errors keep the conventional 1.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Realizable => 10,
            Verdict::Unrealizable => 20,
            Verdict::Timeout => 30,
            Verdict::Error => 1,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Verdict::Realizable => "REALIZABLE",
            Verdict::Unrealizable => "UNREALIZABLE",
            Verdict::Timeout => "TIMEOUT",
            Verdict::Error => "ERROR",
        };
        f.write_str(name)
    }
}

#[derive(Debug)]
pub struct PortfolioOutcome {
    pub verdict: Verdict,
    pub winner: Option<Algorithm>,
    pub wall: Duration,
    pub diagnostic: Option<String>,
}

struct PortfolioShared {
    queue: VecDeque<Algorithm>,
    winner: Option<Algorithm>,
    completed: Vec<(Algorithm, bool)>,
    failure: Option<String>,
}

/// Race the given algorithms, each in its own worker with a private manager,
/// under one shared deadline. The first completed run wins and cancels the
/// rest. Any two runs that both complete must agree on the verdict; a
/// disagreement is a solver bug and is reported as an error, not papered
/// over.
pub fn portfolio(
    circuit: &AigCircuit,
    algos: &[Algorithm],
    timeout: Option<Duration>,
    opts: &SolverOptions,
) -> PortfolioOutcome {
    assert!(!algos.is_empty(), "portfolio needs at least one algorithm");
    let start = Instant::now();
    let token = match timeout {
        Some(t) => CancelToken::with_timeout(t),
        None => CancelToken::new(),
    };
    let shared = Mutex::new(PortfolioShared {
        queue: algos.iter().copied().collect(),
        winner: None,
        completed: Vec::new(),
        failure: None,
    });
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(algos.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let algo = {
                    let mut s = shared.lock().unwrap();
                    if s.winner.is_some() || s.failure.is_some() {
                        break;
                    }
                    match s.queue.pop_front() {
                        Some(a) => a,
                        None => break,
                    }
                };
                match run_algorithm(circuit, algo, opts, Some(token.clone())) {
                    Ok(out) => {
                        let mut s = shared.lock().unwrap();
                        s.completed.push((algo, out.realizable));
                        if s.winner.is_none() {
                            s.winner = Some(algo);
                            token.cancel();
                        }
                    }
                    Err(SolverError::Timeout) => continue,
                    Err(e) => {
                        let mut s = shared.lock().unwrap();
                        s.failure = Some(format!("{algo}: {e}"));
                        token.cancel();
                        break;
                    }
                }
            });
        }
    });
    let s = shared.into_inner().unwrap();
    let wall = start.elapsed();
    if let Some(diag) = s.failure {
        return PortfolioOutcome {
            verdict: Verdict::Error,
            winner: None,
            wall,
            diagnostic: Some(diag),
        };
    }
    let mut verdicts: Vec<bool> = s.completed.iter().map(|&(_, r)| r).collect();
    verdicts.sort_unstable();
    verdicts.dedup();
    if verdicts.len() > 1 {
        let detail = s
            .completed
            .iter()
            .map(|&(a, r)| format!("{a}={}", Verdict::from_realizable(r)))
            .collect::<Vec<_>>()
            .join(", ");
        return PortfolioOutcome {
            verdict: Verdict::Error,
            winner: None,
            wall,
            diagnostic: Some(format!("solver disagreement: {detail}")),
        };
    }
    match s.winner {
        Some(algo) => {
            let &(_, realizable) = s
                .completed
                .iter()
                .find(|&&(a, _)| a == algo)
                .expect("winner recorded a completion");
            PortfolioOutcome {
                verdict: Verdict::from_realizable(realizable),
                winner: Some(algo),
                wall,
                diagnostic: None,
            }
        }
        None => PortfolioOutcome {
            verdict: Verdict::Timeout,
            winner: None,
            wall,
            diagnostic: None,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aiger::{AigBuilder, Literal};
    use proptest::prelude::*;

    // Shared fixture plumbing: a circuit description small enough to cross
    // check every solver against the enumeration oracle.

    #[derive(Clone, Debug)]
    struct GameShape {
        nu: usize,
        nc: usize,
        nl: usize,
        // per latch: (a, a_neg, b, b_neg, op) with op 0=and 1=or 2=xor
        trans: Vec<(usize, bool, usize, bool, u8)>,
        // error: disjunction of conjunctions of (var, negated) literals
        terms: Vec<Vec<(usize, bool)>>,
    }

    fn build_shape(shape: &GameShape) -> AigCircuit {
        let mut b = AigBuilder::new();
        let mut vars = Vec::new();
        for u in 0..shape.nu {
            vars.push(b.input(format!("u{u}")));
        }
        for c in 0..shape.nc {
            vars.push(b.input(format!("controllable_c{c}")));
        }
        let mut latches = Vec::new();
        for l in 0..shape.nl {
            let lit = b.latch(format!("x{l}"));
            latches.push(lit);
            vars.push(lit);
        }
        for (i, &(a, an, c, cn, op)) in shape.trans.iter().enumerate() {
            let la = if an { vars[a].negate() } else { vars[a] };
            let lb = if cn { vars[c].negate() } else { vars[c] };
            let next = match op {
                0 => b.and(la, lb),
                1 => b.or(la, lb),
                _ => b.xor(la, lb),
            };
            b.set_next(latches[i], next);
        }
        let mut terms = Vec::new();
        for term in &shape.terms {
            let lits: Vec<Literal> = term
                .iter()
                .map(|&(v, neg)| if neg { vars[v].negate() } else { vars[v] })
                .collect();
            terms.push(b.and_many(&lits));
        }
        let err = b.or_many(&terms);
        b.output(err, "err");
        b.build()
    }

    fn arb_shape() -> impl Strategy<Value = GameShape> {
        (1..=2usize, 1..=2usize, 2..=3usize).prop_flat_map(|(nu, nc, nl)| {
            let nv = nu + nc + nl;
            let lit = (0..nv, any::<bool>());
            let term = prop::collection::vec(lit, 1..=3);
            let terms = prop::collection::vec(term, 2..=3);
            let trans = prop::collection::vec(
                (0..nv, any::<bool>(), 0..nv, any::<bool>(), 0..=2u8),
                nl,
            );
            (trans, terms).prop_map(move |(trans, terms)| GameShape {
                nu,
                nc,
                nl,
                trans,
                terms,
            })
        })
    }

    struct Arena {
        mgr: BddManager,
        circuit: AigCircuit,
        compiled: CompiledCircuit,
        game: SymbolicGame,
        decomp: Decomposition,
    }

    fn arena(circuit: AigCircuit) -> Arena {
        let mut mgr = BddManager::new();
        let compiled = CompiledCircuit::build(&mut mgr, &circuit);
        let game = compiled.game(&mut mgr, &circuit).unwrap();
        let decomp =
            decompose(&mut mgr, &compiled, &circuit, &DecomposeOptions::default()).unwrap();
        Arena { mgr, circuit, compiled, game, decomp }
    }

    proptest! {
        #![proptest_config(ProptestConfig { cases: 96, ..ProptestConfig::default() })]

        // Every solver, one manager, one random game: identical verdicts and,
        // for runs that produce them, identical winning region BDDs. The
        // enumeration oracle anchors the whole comparison.
        #[test]
        fn all_solvers_agree_with_the_oracle(shape in arb_shape()) {
            let mut a = arena(build_shape(&shape));
            let mgr = &mut a.mgr;
            let oracle = oracle_explicit(mgr, &a.game, ORACLE_MAX_BITS).unwrap();
            let ora = oracle.regions.unwrap();
            let cl = classical(mgr, &a.game).unwrap();
            let clr = cl.regions.unwrap();
            prop_assert_eq!(cl.realizable, oracle.realizable);
            prop_assert_eq!(clr.winning_states, ora.winning_states);
            prop_assert_eq!(clr.winning_valuations, ora.winning_valuations);

            let weird = ScoreWeights { alpha: 1, beta: -5, gamma: 2 };
            let runs = [
                comp_1(mgr, &a.game, &a.decomp).unwrap(),
                comp_2(mgr, &a.game, &a.decomp, &ScoreWeights::default()).unwrap(),
                comp_2(mgr, &a.game, &a.decomp, &weird).unwrap(),
                comp_3(mgr, &a.game, &a.decomp).unwrap(),
            ];
            for out in runs {
                prop_assert_eq!(out.realizable, cl.realizable);
                match out.regions {
                    Some(r) => {
                        prop_assert_eq!(r.winning_states, clr.winning_states);
                        prop_assert_eq!(r.winning_valuations, clr.winning_valuations);
                    }
                    None => prop_assert!(!out.realizable),
                }
            }

            // Deep decomposition produces more parts but the same answer.
            let deep_opts = DecomposeOptions { deep: true, ..DecomposeOptions::default() };
            let deep = decompose(mgr, &a.compiled, &a.circuit, &deep_opts).unwrap();
            let out = comp_1(mgr, &a.game, &deep).unwrap();
            prop_assert_eq!(out.realizable, cl.realizable);
            if let Some(r) = out.regions {
                prop_assert_eq!(r.winning_states, clr.winning_states);
            }
        }

        // Whenever the pool solves sub-games at all, the global winning
        // states sit inside every lifted sub-game winning region.
        #[test]
        fn global_win_implies_every_subgame_win(shape in arb_shape()) {
            let mut a = arena(build_shape(&shape));
            let mgr = &mut a.mgr;
            let cl = classical(mgr, &a.game).unwrap();
            let clr = cl.regions.unwrap();
            if let SubgameResult::Solved(subs) = solve_subgames(mgr, &a.game, &a.decomp).unwrap() {
                for sub in subs {
                    let inside_states = mgr.implies(clr.winning_states, sub.states);
                    prop_assert_eq!(inside_states, mgr.const_true());
                    let inside_vals = mgr.implies(clr.winning_valuations, sub.valuations);
                    prop_assert_eq!(inside_vals, mgr.const_true());
                }
            }
        }
    }

    // Two sub-games that are each winnable alone but clash through the
    // shared controllable: from the all-ones state no response satisfies
    // both. Catches any variant of comp_3 that trusts the initial sub-game
    // results without running the joint analysis at least once.
    fn coupled_circuit() -> AigCircuit {
        let mut b = AigBuilder::new();
        let u1 = b.input("u1");
        let u2 = b.input("u2");
        let c = b.input("controllable_c");
        let l1 = b.latch("l1");
        let l2 = b.latch("l2");
        let n1 = b.or(l1, u1);
        b.set_next(l1, n1);
        let n2 = b.or(l2, u2);
        b.set_next(l2, n2);
        let e1 = b.and(l1, c.negate());
        let e2 = b.and(l2, c);
        let err = b.or(e1, e2);
        b.output(err, "err");
        b.build()
    }

    #[test]
    fn coupled_subgames_are_jointly_unrealizable() {
        let mut a = arena(coupled_circuit());
        let mgr = &mut a.mgr;
        assert_eq!(a.decomp.parts.len(), 2);
        // Each sub-game alone is winnable.
        match solve_subgames(mgr, &a.game, &a.decomp).unwrap() {
            SubgameResult::Solved(subs) => {
                for sub in &subs {
                    assert!(mgr.eval_all_false(sub.states));
                }
            }
            SubgameResult::Unrealizable { .. } => panic!("sub-games are individually winnable"),
        }
        let cl = classical(mgr, &a.game).unwrap();
        assert!(!cl.realizable);
        let c1 = comp_1(mgr, &a.game, &a.decomp).unwrap();
        let c2 = comp_2(mgr, &a.game, &a.decomp, &ScoreWeights::default()).unwrap();
        let c3 = comp_3(mgr, &a.game, &a.decomp).unwrap();
        assert!(!c1.realizable);
        assert!(!c2.realizable);
        assert!(!c3.realizable);
        let oracle = oracle_explicit(mgr, &a.game, ORACLE_MAX_BITS).unwrap();
        assert!(!oracle.realizable);
    }

    // Fully independent sub-games: disjoint latch cones, private
    // controllables. comp_3 must converge without a single re-solve.
    fn independent_circuit() -> AigCircuit {
        let mut b = AigBuilder::new();
        let u1 = b.input("u1");
        let u2 = b.input("u2");
        let c1 = b.input("controllable_c1");
        let c2 = b.input("controllable_c2");
        let l1 = b.latch("l1");
        let l2 = b.latch("l2");
        b.set_next(l1, u1);
        b.set_next(l2, u2);
        let e1 = b.and(l1, c1.negate());
        let e2 = b.and(l2, c2.negate());
        let err = b.or(e1, e2);
        b.output(err, "err");
        b.build()
    }

    #[test]
    fn independent_subgames_need_no_refinement() {
        let mut a = arena(independent_circuit());
        let mgr = &mut a.mgr;
        let out = comp_3(mgr, &a.game, &a.decomp).unwrap();
        assert!(out.realizable);
        assert_eq!(out.resolves, 0);
        let cl = classical(mgr, &a.game).unwrap();
        assert_eq!(
            out.regions.unwrap().winning_states,
            cl.regions.unwrap().winning_states
        );
    }

    #[test]
    fn two_parts_merge_exactly_once() {
        let mut a = arena(independent_circuit());
        let mgr = &mut a.mgr;
        let out = comp_2(mgr, &a.game, &a.decomp, &ScoreWeights::default()).unwrap();
        assert!(out.realizable);
        assert_eq!(out.resolves, 1);
        let cl = classical(mgr, &a.game).unwrap();
        assert_eq!(
            out.regions.unwrap().winning_valuations,
            cl.regions.unwrap().winning_valuations
        );
    }

    #[test]
    fn comp_2_runs_are_deterministic() {
        let circuit = coupled_circuit();
        let opts = SolverOptions::default();
        let a = run_algorithm(&circuit, Algorithm::Comp2, &opts, None).unwrap();
        let b = run_algorithm(&circuit, Algorithm::Comp2, &opts, None).unwrap();
        assert_eq!(a.realizable, b.realizable);
        assert_eq!(a.subgames, b.subgames);
        assert_eq!(a.iterations, b.iterations);
        assert_eq!(a.resolves, b.resolves);
        assert_eq!(a.peak_nodes, b.peak_nodes);
    }

    // An error part made of a bare uncontrollable input: its sub-game has no
    // latches and is lost outright, so the compositional solvers must report
    // unrealizable without building the global regions.
    #[test]
    fn unwinnable_subgame_short_circuits() {
        let mut b = AigBuilder::new();
        let u = b.input("u");
        let c = b.input("controllable_c");
        let l = b.latch("l");
        b.set_next(l, c);
        let e2 = b.and(l, c);
        let err = b.or(u, e2);
        b.output(err, "err");
        let mut a = arena(b.build());
        let mgr = &mut a.mgr;
        assert!(a.decomp.is_decomposable());
        let out = comp_1(mgr, &a.game, &a.decomp).unwrap();
        assert!(!out.realizable);
        assert!(out.regions.is_none());
        let cl = classical(mgr, &a.game).unwrap();
        assert!(!cl.realizable);
    }

    #[test]
    fn constant_false_error_is_winnable_everywhere() {
        let mut b = AigBuilder::new();
        let u = b.input("u");
        let c = b.input("controllable_c");
        let l = b.latch("l");
        let n = b.and(u, c);
        b.set_next(l, n);
        b.output(Literal::FALSE, "err");
        let mut a = arena(b.build());
        let mgr = &mut a.mgr;
        for out in [
            classical(mgr, &a.game).unwrap(),
            comp_3(mgr, &a.game, &a.decomp).unwrap(),
        ] {
            assert!(out.realizable);
            assert_eq!(out.regions.unwrap().winning_states, mgr.const_true());
            assert_eq!(out.iterations, 1);
        }
    }

    #[test]
    fn bare_uncontrollable_error_is_unwinnable() {
        let mut b = AigBuilder::new();
        let u = b.input("u");
        let _c = b.input("controllable_c");
        b.output(u, "err");
        let mut a = arena(b.build());
        let mgr = &mut a.mgr;
        let cl = classical(mgr, &a.game).unwrap();
        assert!(!cl.realizable);
        let oracle = oracle_explicit(mgr, &a.game, ORACLE_MAX_BITS).unwrap();
        assert!(!oracle.realizable);
        assert_eq!(oracle.regions.unwrap().winning_states, mgr.const_false());
    }

    #[test]
    fn oracle_refuses_oversized_games() {
        let mut b = AigBuilder::new();
        let first = b.input("u0");
        for i in 1..23 {
            b.input(format!("u{i}"));
        }
        b.output(first, "err");
        let mut a = arena(b.build());
        let err = oracle_explicit(&mut a.mgr, &a.game, ORACLE_MAX_BITS).unwrap_err();
        assert_eq!(err.bits, 23);
        assert_eq!(err.limit, 22);
    }

    #[test]
    fn singleton_decomposition_falls_back_to_classical() {
        let mut b = AigBuilder::new();
        let u = b.input("u");
        let c = b.input("controllable_c");
        let l = b.latch("l");
        b.set_next(l, u);
        let e = b.and(l, c.negate());
        b.output(e, "err");
        let mut a = arena(b.build());
        let mgr = &mut a.mgr;
        assert!(!a.decomp.is_decomposable());
        let cl = classical(mgr, &a.game).unwrap();
        let c1 = comp_1(mgr, &a.game, &a.decomp).unwrap();
        assert_eq!(c1.subgames, 1);
        assert_eq!(c1.realizable, cl.realizable);
        assert_eq!(
            c1.regions.unwrap().winning_valuations,
            cl.regions.unwrap().winning_valuations
        );
    }

    #[test]
    fn portfolio_matches_classical_and_tags_a_winner() {
        let circuit = coupled_circuit();
        let opts = SolverOptions::default();
        let out = portfolio(&circuit, &PORTFOLIO_ORDER, None, &opts);
        assert_eq!(out.verdict, Verdict::Unrealizable);
        assert!(out.winner.is_some());
        assert!(out.diagnostic.is_none());

        let solo = portfolio(&circuit, &[Algorithm::Classical], None, &opts);
        assert_eq!(solo.verdict, Verdict::Unrealizable);
        assert_eq!(solo.winner, Some(Algorithm::Classical));
    }

    #[test]
    fn portfolio_zero_timeout_times_out() {
        let circuit = coupled_circuit();
        let opts = SolverOptions::default();
        let out = portfolio(&circuit, &PORTFOLIO_ORDER, Some(Duration::ZERO), &opts);
        assert_eq!(out.verdict, Verdict::Timeout);
        assert!(out.winner.is_none());
    }

    #[test]
    fn names_round_trip_and_codes_follow_syntcomp() {
        for algo in Algorithm::ALL {
            assert_eq!(algo.to_string().parse::<Algorithm>().unwrap(), algo);
        }
        assert!("upre".parse::<Algorithm>().is_err());
        assert_eq!(Verdict::Realizable.exit_code(), 10);
        assert_eq!(Verdict::Unrealizable.exit_code(), 20);
        assert_eq!(Verdict::Timeout.exit_code(), 30);
        assert_eq!("-2, 1,-1".parse::<ScoreWeights>().unwrap(), ScoreWeights::default());
        assert!("1,2".parse::<ScoreWeights>().is_err());
    }
}
