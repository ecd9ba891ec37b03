//! Decomposing an error function into a disjunction of parts.
//!
//! The error output of an AIG is usually a conjunction at the top: an
//! implication "assumptions imply guarantees" negates into exactly that
//! shape. Walking the graph from the error vertex through non-inverted
//! edges exposes that conjunction; pushing the negation through one of the
//! inverted children turns it into a disjunction, and distributing yields
//! the parts. Each part is a pure conjunction of graph literals, so it can
//! be rebuilt both as a BDD and as a standalone circuit.

use std::collections::{BTreeSet, HashSet};

use crate::aiger::{AigCircuit, AigOutput, AndGate, Literal, VarDef};
use crate::bdd::{BddManager, BddRef};
use crate::game::{CompiledCircuit, GameError};

#[derive(Clone, Copy, Debug)]
pub struct DecomposeOptions {
    /// Keep splitting parts recursively instead of stopping after the first
    /// distribution step.
    pub deep: bool,
    /// Hard ceiling on the number of parts; splitting stops before
    /// crossing it.
    pub max_parts: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { deep: false, max_parts: 64 }
    }
}

/// A part as a conjunction of netlist literals, sorted and deduplicated.
/// `factors` is never empty; a constant part carries the constant literal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartRecipe {
    pub factors: Vec<Literal>,
}

/// The result of decomposing a circuit's error function. `parts[i]` is the
/// BDD realization of `recipes[i]`; parts are deduplicated by function and
/// constant-false parts are dropped. The disjunction of the parts is
/// exactly the circuit's error function, but it is never materialized
/// here: on decomposable circuits that BDD can dwarf every part.
pub struct Decomposition {
    pub parts: Vec<BddRef>,
    pub recipes: Vec<PartRecipe>,
}

impl Decomposition {
    /// A decomposition with a single part cannot drive the compositional
    /// solvers anywhere the monolithic one would not go.
    pub fn is_decomposable(&self) -> bool {
        self.parts.len() >= 2
    }
}

/// The multi-input AND rooted at `v0`: vertices conjoined positively
/// (always leaves) and vertices conjoined under a negation (arbitrary).
fn get_minput_and(
    circuit: &AigCircuit,
    defs: &[VarDef],
    v0: u32,
) -> (BTreeSet<u32>, BTreeSet<u32>) {
    let mut pos = BTreeSet::new();
    let mut neg = BTreeSet::new();
    let mut seen = HashSet::new();
    let mut stack = vec![v0];
    while let Some(u) = stack.pop() {
        if !seen.insert(u) {
            continue;
        }
        match defs[u as usize] {
            VarDef::And(i) => {
                let gate = circuit.ands[i];
                for rhs in [gate.rhs0, gate.rhs1] {
                    if rhs.is_negated() {
                        neg.insert(rhs.var());
                    } else {
                        stack.push(rhs.var());
                    }
                }
            }
            _ => {
                pos.insert(u);
            }
        }
    }
    (pos, neg)
}

fn gma_size(circuit: &AigCircuit, defs: &[VarDef], v: u32) -> usize {
    let (pos, neg) = get_minput_and(circuit, defs, v);
    pos.len() + neg.len()
}

fn is_and(defs: &[VarDef], v: u32) -> bool {
    matches!(defs[v as usize], VarDef::And(_))
}

/// Rewrites every positive non-leaf factor into its multi-input AND until
/// factors are positive leaves or negated vertices. Constant-true factors
/// are dropped; an empty result collapses to the single factor `true`.
fn normalize(
    mut factors: BTreeSet<Literal>,
    circuit: &AigCircuit,
    defs: &[VarDef],
) -> BTreeSet<Literal> {
    loop {
        let expandable = factors
            .iter()
            .find(|f| !f.is_negated() && is_and(defs, f.var()))
            .copied();
        let Some(f) = expandable else { break };
        factors.remove(&f);
        let (pos, neg) = get_minput_and(circuit, defs, f.var());
        for p in pos {
            factors.insert(Literal::from_var(p, false));
        }
        for n in neg {
            factors.insert(Literal::from_var(n, true));
        }
    }
    factors.remove(&Literal::TRUE);
    if factors.is_empty() {
        factors.insert(Literal::TRUE);
    }
    factors
}

/// The factor a split should distribute over: the negated non-leaf factor
/// with the widest multi-input AND, ties to the smallest vertex.
fn split_candidate(
    factors: &BTreeSet<Literal>,
    circuit: &AigCircuit,
    defs: &[VarDef],
) -> Option<Literal> {
    factors
        .iter()
        .filter(|f| f.is_negated() && is_and(defs, f.var()))
        .copied()
        .max_by(|a, b| {
            gma_size(circuit, defs, a.var())
                .cmp(&gma_size(circuit, defs, b.var()))
                .then(b.var().cmp(&a.var()))
        })
}

/// Distributes the part over the chosen factor's negation: one child per
/// member of the factor's multi-input AND, each normalized.
fn split(
    factors: &BTreeSet<Literal>,
    on: Literal,
    circuit: &AigCircuit,
    defs: &[VarDef],
) -> Vec<BTreeSet<Literal>> {
    let mut rest = factors.clone();
    rest.remove(&on);
    let (pos, neg) = get_minput_and(circuit, defs, on.var());
    let mut children = Vec::with_capacity(pos.len() + neg.len());
    for p in pos {
        let mut child = rest.clone();
        child.insert(Literal::from_var(p, true));
        children.push(normalize(child, circuit, defs));
    }
    for n in neg {
        let mut child = rest.clone();
        child.insert(Literal::from_var(n, false));
        children.push(normalize(child, circuit, defs));
    }
    children
}

/// Decomposes the circuit's single error output into parts. The disjunction
/// of the returned part BDDs is exactly the error function; this holds for
/// every option combination.
pub fn decompose(
    mgr: &mut BddManager,
    compiled: &CompiledCircuit,
    circuit: &AigCircuit,
    opts: &DecomposeOptions,
) -> Result<Decomposition, GameError> {
    if circuit.outputs.len() != 1 {
        return Err(GameError::OutputCount(circuit.outputs.len()));
    }
    let root = circuit.outputs[0].lit;
    let defs = circuit.def_table();

    let mut worklist: Vec<BTreeSet<Literal>> =
        vec![normalize(BTreeSet::from([root]), circuit, &defs)];

    if opts.deep {
        let mut i = 0;
        while i < worklist.len() {
            let Some(on) = split_candidate(&worklist[i], circuit, &defs) else {
                i += 1;
                continue;
            };
            let children = split(&worklist[i], on, circuit, &defs);
            if worklist.len() - 1 + children.len() > opts.max_parts {
                break;
            }
            worklist.splice(i..=i, children);
        }
    } else if let Some(on) = split_candidate(&worklist[0], circuit, &defs) {
        let children = split(&worklist[0], on, circuit, &defs);
        if children.len() <= opts.max_parts {
            worklist = children;
        }
    }

    // realize parts as BDDs, dropping dead parts and semantic duplicates
    let mut parts = Vec::new();
    let mut recipes = Vec::new();
    let mut seen: HashSet<BddRef> = HashSet::new();
    for factors in worklist {
        let mut bdd = mgr.const_true();
        for &f in &factors {
            let fb = compiled.literal(mgr, f);
            bdd = mgr.and(bdd, fb);
        }
        if bdd == mgr.const_false() || !seen.insert(bdd) {
            continue;
        }
        parts.push(bdd);
        recipes.push(PartRecipe { factors: factors.into_iter().collect() });
    }
    if parts.is_empty() {
        parts.push(mgr.const_false());
        recipes.push(PartRecipe { factors: vec![Literal::FALSE] });
    }

    Ok(Decomposition { parts, recipes })
}

/// A standalone circuit whose single output is the part's conjunction. The
/// original inputs, latches and gates are kept verbatim (names included, so
/// input classification carries over); fresh gates realize the conjunction.
pub fn part_to_circuit(circuit: &AigCircuit, recipe: &PartRecipe) -> AigCircuit {
    let mut out = circuit.clone();
    out.outputs.clear();
    out.comments.clear();
    let mut acc = Literal::TRUE;
    for &f in &recipe.factors {
        acc = append_and(&mut out, acc, f);
    }
    out.outputs.push(AigOutput { lit: acc, name: Some("error_part".into()) });
    out
}

fn append_and(circuit: &mut AigCircuit, a: Literal, b: Literal) -> Literal {
    if a == Literal::FALSE || b == Literal::FALSE {
        return Literal::FALSE;
    }
    if a == Literal::TRUE {
        return b;
    }
    if b == Literal::TRUE || a == b {
        return a;
    }
    circuit.max_var += 1;
    let lhs = Literal::from_var(circuit.max_var, false);
    let (rhs0, rhs1) = if a.0 >= b.0 { (a, b) } else { (b, a) };
    circuit.ands.push(AndGate { lhs, rhs0, rhs1 });
    lhs
}
