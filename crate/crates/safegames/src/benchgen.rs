//! Synthetic benchmark families. Both generators emit AIGER game circuits
//! with `controllable_` input naming and a single error output, determined
//! entirely by their parameters.
//!
//! `gen_mult` builds the Boolean matrix multiplication game: the
//! environment supplies two n*n factor matrices on uncontrollable inputs,
//! the controller answers with the product matrix on controllable inputs in
//! the same step, and the error output raises whenever some answer cell
//! disagrees with the inner product of its row and column. There are no
//! latches. Each cell's error term reads one row of `a`, one column of `b`
//! and one answer bit, so the specification falls apart into n*n
//! independent cells, while the error function taken whole couples all
//! 3n^2 inputs and its BDD blows up exponentially under the file variable
//! order.
//!
//! `gen_wash` builds the tank washing controller: requests arrive on
//! uncontrollable inputs, each tank must be filled within `deadline` steps,
//! stay filled at least `min_fill` steps, conflicting tanks may not be
//! filled together, and a light must mirror whether any tank is filled.

use thiserror::Error;

use crate::aiger::{AigBuilder, AigCircuit, Literal};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MultSpec {
    /// Matrix dimension; the game has n*n result cells.
    pub n: u32,
}

pub const MULT_MAX_N: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WashSpec {
    pub tanks: u32,
    /// Minimum number of steps a tank must stay filled once filling starts.
    pub min_fill: u32,
    /// Maximum number of steps a request may stay pending before service.
    pub deadline: u32,
    /// Pairs of tanks that must never be filled at the same time.
    pub conflicts: Vec<(u32, u32)>,
}

impl WashSpec {
    /// The stock conflict pattern: consecutive tanks paired two by two.
    pub fn default_conflicts(tanks: u32) -> Vec<(u32, u32)> {
        (0..tanks / 2).map(|m| (2 * m, 2 * m + 1)).collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BenchError {
    #[error("matrix dimension {0} outside 1..={MULT_MAX_N}")]
    BadDimension(u32),
    #[error("washing spec needs at least one tank")]
    NoTanks,
    #[error("washing parameters min_fill and deadline must be at least 1")]
    BadWashBounds,
    #[error("conflict pair ({0}, {1}) is out of range or degenerate")]
    BadConflict(u32, u32),
}

pub fn gen_mult(spec: &MultSpec) -> Result<AigCircuit, BenchError> {
    let n = spec.n;
    if n == 0 || n > MULT_MAX_N {
        return Err(BenchError::BadDimension(n));
    }
    let n = n as usize;

    let mut b = AigBuilder::new();
    let mut a_in = vec![vec![Literal::FALSE; n]; n];
    for i in 0..n {
        for k in 0..n {
            a_in[i][k] = b.input(format!("a{i}_{k}"));
        }
    }
    let mut b_in = vec![vec![Literal::FALSE; n]; n];
    for k in 0..n {
        for j in 0..n {
            b_in[k][j] = b.input(format!("b{k}_{j}"));
        }
    }
    let mut c_in = vec![vec![Literal::FALSE; n]; n];
    for i in 0..n {
        for j in 0..n {
            c_in[i][j] = b.input(format!("controllable_c{i}_{j}"));
        }
    }

    let mut terms = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let prods: Vec<Literal> =
                (0..n).map(|k| b.and(a_in[i][k], b_in[k][j])).collect();
            let p = b.or_many(&prods);
            // XOR spelled as (c or p) and not (c and p). The top gate is
            // then a plain AND vertex, so the decomposition walk stops at
            // each cell instead of flattening through it.
            let either = b.or(c_in[i][j], p);
            let both = b.and(c_in[i][j], p);
            terms.push(b.and(either, both.negate()));
        }
    }

    let err = b.or_many(&terms);
    b.output(err, "err");
    b.comment(format!("mult n={}", spec.n));
    Ok(b.build())
}

pub fn gen_wash(spec: &WashSpec) -> Result<AigCircuit, BenchError> {
    let n = spec.tanks;
    if n == 0 {
        return Err(BenchError::NoTanks);
    }
    if spec.min_fill == 0 || spec.deadline == 0 {
        return Err(BenchError::BadWashBounds);
    }
    for &(x, y) in &spec.conflicts {
        if x >= n || y >= n || x == y {
            return Err(BenchError::BadConflict(x, y));
        }
    }
    let n = n as usize;
    let k = spec.min_fill as u64;
    let d = spec.deadline as u64;

    let mut b = AigBuilder::new();
    let req: Vec<Literal> = (0..n).map(|i| b.input(format!("req{i}"))).collect();
    let fill: Vec<Literal> = (0..n)
        .map(|i| b.input(format!("controllable_fill{i}")))
        .collect();
    let light = b.input("controllable_light");

    let mut errors = Vec::new();
    let mut filled = vec![Literal::FALSE; n];
    let mut pending = vec![Literal::FALSE; n];
    for i in 0..n {
        pending[i] = b.latch(format!("pending{i}"));
        let page: Vec<Literal> = (0..width_for(d))
            .map(|c| b.latch(format!("page{i}_{c}")))
            .collect();
        filled[i] = b.latch(format!("filled{i}"));
        let fage: Vec<Literal> = (0..width_for(k))
            .map(|c| b.latch(format!("fage{i}_{c}")))
            .collect();

        // A request stays pending until the tank starts filling; its age
        // saturates at the deadline.
        let open = b.or(pending[i], req[i]);
        let pending_next = b.and(open, fill[i].negate());
        b.set_next(pending[i], pending_next);
        let bumped = sat_increment(&mut b, &page, d);
        for (c, &lat) in page.iter().enumerate() {
            let held = b.and(pending_next, bumped[c]);
            b.set_next(lat, held);
        }

        // The tank is filled exactly while the controller asserts fill; the
        // fill age counts the current streak and saturates at min_fill.
        b.set_next(filled[i], fill[i]);
        let bumped = sat_increment(&mut b, &fage, k);
        for (c, &lat) in fage.iter().enumerate() {
            // Restart the streak at 1 when filling begins, keep counting
            // while it continues, clear when fill drops.
            let fresh = if c == 0 { Literal::TRUE } else { Literal::FALSE };
            let cont = b.and(filled[i], bumped[c]);
            let start = b.and(filled[i].negate(), fresh);
            let streak = b.or(cont, start);
            let next = b.and(fill[i], streak);
            b.set_next(lat, next);
        }

        let overdue = eq_const(&mut b, &page, d);
        let missed = b.and(pending[i], overdue);
        errors.push(missed);

        let immature = lt_const(&mut b, &fage, k);
        let dropping = b.and(filled[i], fill[i].negate());
        let drained_early = b.and(dropping, immature);
        errors.push(drained_early);
    }

    for &(x, y) in &spec.conflicts {
        let both = b.and(filled[x as usize], filled[y as usize]);
        errors.push(both);
    }

    let any_filled = b.or_many(&filled);
    let dark = b.xor(light, any_filled);
    errors.push(dark);

    let err = b.or_many(&errors);
    b.output(err, "err");
    b.comment(format!(
        "wash tanks={} k={} d={} conflicts={}",
        spec.tanks,
        spec.min_fill,
        spec.deadline,
        spec.conflicts.len()
    ));
    Ok(b.build())
}

/// Bits needed to store values 0..=max.
fn width_for(max: u64) -> usize {
    (64 - max.leading_zeros() as usize).max(1)
}

/// Next-state literals for a binary counter that increments each step and
/// holds at `cap`.
fn sat_increment(b: &mut AigBuilder, bits: &[Literal], cap: u64) -> Vec<Literal> {
    let at_cap = eq_const(b, bits, cap);
    let mut carry = Literal::TRUE;
    let mut out = Vec::with_capacity(bits.len());
    for &bit in bits {
        let flipped = b.xor(bit, carry);
        let keep = b.and(at_cap, bit);
        let step = b.and(at_cap.negate(), flipped);
        out.push(b.or(keep, step));
        carry = b.and(bit, carry);
    }
    out
}

fn eq_const(b: &mut AigBuilder, bits: &[Literal], value: u64) -> Literal {
    let lits: Vec<Literal> = bits
        .iter()
        .enumerate()
        .map(|(c, &bit)| if value >> c & 1 == 1 { bit } else { bit.negate() })
        .collect();
    b.and_many(&lits)
}

/// True when the counter value is strictly below `value`.
fn lt_const(b: &mut AigBuilder, bits: &[Literal], value: u64) -> Literal {
    // Scan from the most significant bit: the value is smaller exactly when
    // some bit is 0 where the bound has 1 and everything above agrees.
    let mut cases = Vec::new();
    let mut agree_above = Literal::TRUE;
    for (c, &bit) in bits.iter().enumerate().rev() {
        let want = value >> c & 1 == 1;
        if want {
            let case = b.and(agree_above, bit.negate());
            cases.push(case);
        }
        let this = if want { bit } else { bit.negate() };
        agree_above = b.and(agree_above, this);
    }
    b.or_many(&cases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bdd::BddManager;
    use crate::decomp::{decompose, DecomposeOptions};
    use crate::game::CompiledCircuit;
    use crate::solvers::{
        classical, comp_1, comp_2, comp_3, oracle_explicit, ScoreWeights, ORACLE_MAX_BITS,
    };

    fn mult(n: u32) -> AigCircuit {
        gen_mult(&MultSpec { n }).unwrap()
    }

    struct Bench {
        mgr: BddManager,
        game: crate::game::SymbolicGame,
        decomp: crate::decomp::Decomposition,
    }

    fn load(circuit: &AigCircuit) -> Bench {
        let mut mgr = BddManager::new();
        let compiled = CompiledCircuit::build(&mut mgr, circuit);
        let game = compiled.game(&mut mgr, circuit).unwrap();
        let decomp =
            decompose(&mut mgr, &compiled, circuit, &DecomposeOptions::default()).unwrap();
        Bench { mgr, game, decomp }
    }

    #[test]
    fn mult_one_cell_is_realizable_and_oracle_agrees() {
        let c = mult(1);
        let mut b = load(&c);
        let cl = classical(&mut b.mgr, &b.game).unwrap();
        assert!(cl.realizable);
        let oracle = oracle_explicit(&mut b.mgr, &b.game, ORACLE_MAX_BITS).unwrap();
        assert!(oracle.realizable);
        assert_eq!(
            cl.regions.unwrap().winning_states,
            oracle.regions.unwrap().winning_states
        );
    }

    #[test]
    fn mult_two_solvers_all_agree() {
        let c = mult(2);
        let mut b = load(&c);
        assert_eq!(b.decomp.parts.len(), 4);
        let cl = classical(&mut b.mgr, &b.game).unwrap();
        assert!(cl.realizable);
        let clr = cl.regions.unwrap();
        for out in [
            comp_1(&mut b.mgr, &b.game, &b.decomp).unwrap(),
            comp_2(&mut b.mgr, &b.game, &b.decomp, &ScoreWeights::default()).unwrap(),
            comp_3(&mut b.mgr, &b.game, &b.decomp).unwrap(),
        ] {
            assert!(out.realizable);
            let r = out.regions.unwrap();
            assert_eq!(r.winning_states, clr.winning_states);
            assert_eq!(r.winning_valuations, clr.winning_valuations);
        }
    }

    #[test]
    fn mult_decomposes_into_one_part_per_cell() {
        // No `load` here: building the whole game would realize the
        // monolithic error function, which is exponential in n under the
        // file variable order. Decomposition never touches it.
        for n in 1..=MULT_MAX_N {
            let c = mult(n);
            let mut mgr = BddManager::new();
            let compiled = CompiledCircuit::build(&mut mgr, &c);
            let d = decompose(&mut mgr, &compiled, &c, &DecomposeOptions::default()).unwrap();
            assert!(d.parts.len() >= (n * n) as usize, "n={n} parts={}", d.parts.len());
            // A cell reads its answer bit, one row of a and one column of b.
            for &part in &d.parts {
                let cone = mgr.support(part);
                assert!(cone.len() <= (2 * n + 1) as usize, "n={n} cone={}", cone.len());
            }
        }
    }

    #[test]
    fn mult_small_instances_realizable_by_all_solvers() {
        for n in [1u32, 3] {
            let c = mult(n);
            let mut b = load(&c);
            let cl = classical(&mut b.mgr, &b.game).unwrap();
            assert!(cl.realizable, "n={n}");
            if b.decomp.is_decomposable() {
                for out in [
                    comp_1(&mut b.mgr, &b.game, &b.decomp).unwrap(),
                    comp_2(&mut b.mgr, &b.game, &b.decomp, &ScoreWeights::default()).unwrap(),
                    comp_3(&mut b.mgr, &b.game, &b.decomp).unwrap(),
                ] {
                    assert!(out.realizable, "n={n}");
                }
            }
        }
    }

    #[test]
    fn mult_rejects_out_of_range_dimensions() {
        assert_eq!(gen_mult(&MultSpec { n: 0 }).unwrap_err(), BenchError::BadDimension(0));
        assert_eq!(gen_mult(&MultSpec { n: 9 }).unwrap_err(), BenchError::BadDimension(9));
    }

    #[test]
    fn generators_are_deterministic_and_round_trip() {
        for circuit in [
            mult(3),
            gen_wash(&WashSpec {
                tanks: 3,
                min_fill: 2,
                deadline: 4,
                conflicts: WashSpec::default_conflicts(3),
            })
            .unwrap(),
        ] {
            let again = match circuit.comments[0].starts_with("mult") {
                true => mult(3),
                false => gen_wash(&WashSpec {
                    tanks: 3,
                    min_fill: 2,
                    deadline: 4,
                    conflicts: WashSpec::default_conflicts(3),
                })
                .unwrap(),
            };
            let text = circuit.write_ascii();
            assert_eq!(text, again.write_ascii());
            let parsed = AigCircuit::parse_ascii(&text).unwrap();
            assert_eq!(parsed.write_ascii(), text);
        }
    }

    #[test]
    fn wash_single_tank_is_realizable() {
        let c = gen_wash(&WashSpec {
            tanks: 1,
            min_fill: 1,
            deadline: 2,
            conflicts: vec![],
        })
        .unwrap();
        let mut b = load(&c);
        let cl = classical(&mut b.mgr, &b.game).unwrap();
        assert!(cl.realizable);
        let oracle = oracle_explicit(&mut b.mgr, &b.game, ORACLE_MAX_BITS).unwrap();
        assert!(oracle.realizable);
        assert_eq!(
            cl.regions.unwrap().winning_states,
            oracle.regions.unwrap().winning_states
        );
    }

    #[test]
    fn wash_conflicting_tanks_all_solvers_agree() {
        // Hold time above deadline: the verdict is whatever the solvers
        // jointly say, the point is that they say the same thing.
        let c = gen_wash(&WashSpec {
            tanks: 2,
            min_fill: 3,
            deadline: 2,
            conflicts: vec![(0, 1)],
        })
        .unwrap();
        let mut b = load(&c);
        let cl = classical(&mut b.mgr, &b.game).unwrap();
        let oracle = oracle_explicit(&mut b.mgr, &b.game, ORACLE_MAX_BITS).unwrap();
        assert_eq!(cl.realizable, oracle.realizable);
        for out in [
            comp_1(&mut b.mgr, &b.game, &b.decomp).unwrap(),
            comp_2(&mut b.mgr, &b.game, &b.decomp, &ScoreWeights::default()).unwrap(),
            comp_3(&mut b.mgr, &b.game, &b.decomp).unwrap(),
        ] {
            assert_eq!(out.realizable, cl.realizable);
        }
    }

    #[test]
    fn wash_part_count_scales_with_tanks() {
        for tanks in 1..=6u32 {
            let c = gen_wash(&WashSpec {
                tanks,
                min_fill: 2,
                deadline: 4,
                conflicts: WashSpec::default_conflicts(tanks),
            })
            .unwrap();
            let b = load(&c);
            assert!(
                b.decomp.parts.len() >= tanks as usize,
                "tanks={tanks} parts={}",
                b.decomp.parts.len()
            );
        }
    }

    #[test]
    fn wash_rejects_bad_parameters() {
        let base = WashSpec { tanks: 2, min_fill: 1, deadline: 1, conflicts: vec![] };
        assert_eq!(gen_wash(&WashSpec { tanks: 0, ..base.clone() }).unwrap_err(), BenchError::NoTanks);
        assert_eq!(
            gen_wash(&WashSpec { min_fill: 0, ..base.clone() }).unwrap_err(),
            BenchError::BadWashBounds
        );
        assert_eq!(
            gen_wash(&WashSpec { conflicts: vec![(0, 2)], ..base.clone() }).unwrap_err(),
            BenchError::BadConflict(0, 2)
        );
        assert_eq!(
            gen_wash(&WashSpec { conflicts: vec![(1, 1)], ..base }).unwrap_err(),
            BenchError::BadConflict(1, 1)
        );
    }

    #[test]
    fn counter_helpers_count_correctly() {
        // Drive a width-3 saturating counter through its whole range via
        // the circuit evaluator.
        let mut b = AigBuilder::new();
        let _u = b.input("u");
        let bits: Vec<Literal> = (0..3).map(|k| b.latch(format!("c{k}"))).collect();
        let next = sat_increment(&mut b, &bits, 5);
        for (k, &bit) in bits.iter().enumerate() {
            b.set_next(bit, next[k]);
        }
        let low = lt_const(&mut b, &bits, 3);
        let hit = eq_const(&mut b, &bits, 5);
        let flag = b.or(low, hit);
        b.output(flag, "flag");
        let c = b.build();
        let mut eval = crate::aiger::Evaluator::new(&c);
        let mut state = vec![false; 3];
        let mut seen = Vec::new();
        for _ in 0..8 {
            let value = state.iter().enumerate().map(|(k, &v)| (v as u32) << k).sum::<u32>();
            seen.push(value);
            let step = eval.step(&[false], &state);
            // flag = value < 3 or value == 5
            assert_eq!(step.outputs[0], value < 3 || value == 5, "value={value}");
            state = step.next_state;
        }
        assert_eq!(seen, vec![0, 1, 2, 3, 4, 5, 5, 5]);
    }
}
