//! Safety games over AIGER circuits, solved symbolically.
//!
//! A game position is a latch valuation. Each round the environment fixes
//! the uncontrollable inputs, the controller answers with the controllable
//! ones, and the latches advance through their transition functions. The
//! controller loses a play as soon as the circuit's error output raises.
//! The error is never materialized as a latch: the predecessor operators
//! fold it into the step, which keeps the state space at exactly the
//! declared latches.

use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::aiger::{classify_inputs, AigCircuit, AndGate, InputClassification, Literal, VarDef};
use crate::bdd::{BddManager, BddRef, SetId, SubstId, VarId};

#[derive(Error, Debug)]
pub enum GameError {
    #[error("a game circuit needs exactly one output, found {0}")]
    OutputCount(usize),
}

/// A fixpoint ran out of time (or was cancelled by a sibling solver).
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Stopped {
    Timeout,
}

/// A circuit lowered onto a manager: one BDD variable per input and latch.
/// Variable order is uncontrollable inputs, then controllable inputs, then
/// latches, each in declaration order. Gate functions are realized on first
/// use and cached, so walking a small cone never pays for the rest of the
/// netlist.
pub struct CompiledCircuit {
    pub classification: InputClassification,
    pub xu_vars: Vec<VarId>,
    pub xc_vars: Vec<VarId>,
    pub latch_vars: Vec<VarId>,
    defs: Vec<VarDef>,
    ands: Vec<AndGate>,
    var_bdd: RefCell<Vec<Option<BddRef>>>,
}

impl CompiledCircuit {
    pub fn build(mgr: &mut BddManager, circuit: &AigCircuit) -> CompiledCircuit {
        let classification = classify_inputs(circuit);
        let defs = circuit.def_table();
        let mut input_var = vec![None; circuit.inputs.len()];
        let mut xu_vars = Vec::new();
        let mut xc_vars = Vec::new();
        for &i in &classification.uncontrollable {
            let v = mgr.fresh_var();
            input_var[i] = Some(v);
            xu_vars.push(v);
        }
        for &i in &classification.controllable {
            let v = mgr.fresh_var();
            input_var[i] = Some(v);
            xc_vars.push(v);
        }
        let latch_vars: Vec<VarId> = circuit.latches.iter().map(|_| mgr.fresh_var()).collect();

        let mut var_bdd = vec![None; circuit.max_var as usize + 1];
        var_bdd[0] = Some(mgr.const_false());
        for (v, def) in defs.iter().enumerate() {
            match *def {
                VarDef::Input(i) => var_bdd[v] = Some(mgr.var(input_var[i].unwrap())),
                VarDef::Latch(i) => var_bdd[v] = Some(mgr.var(latch_vars[i])),
                _ => {}
            }
        }

        CompiledCircuit {
            classification,
            xu_vars,
            xc_vars,
            latch_vars,
            defs,
            ands: circuit.ands.clone(),
            var_bdd: RefCell::new(var_bdd),
        }
    }

    /// The function computed by an arbitrary netlist literal.
    pub fn literal(&self, mgr: &mut BddManager, lit: Literal) -> BddRef {
        let f = self.realize(mgr, lit.var());
        if lit.is_negated() {
            mgr.not(f)
        } else {
            f
        }
    }

    fn realize(&self, mgr: &mut BddManager, root: u32) -> BddRef {
        if let Some(f) = self.var_bdd.borrow()[root as usize] {
            return f;
        }
        let mut stack = vec![root];
        while let Some(&v) = stack.last() {
            if self.var_bdd.borrow()[v as usize].is_some() {
                stack.pop();
                continue;
            }
            let VarDef::And(i) = self.defs[v as usize] else {
                // an undefined hole reads as constant false
                self.var_bdd.borrow_mut()[v as usize] = Some(mgr.const_false());
                continue;
            };
            let gate = &self.ands[i];
            let a = self.var_bdd.borrow()[gate.rhs0.var() as usize];
            let b = self.var_bdd.borrow()[gate.rhs1.var() as usize];
            match (a, b) {
                (Some(fa), Some(fb)) => {
                    let fa = if gate.rhs0.is_negated() { mgr.not(fa) } else { fa };
                    let fb = if gate.rhs1.is_negated() { mgr.not(fb) } else { fb };
                    let f = mgr.and(fa, fb);
                    self.var_bdd.borrow_mut()[v as usize] = Some(f);
                    stack.pop();
                }
                _ => {
                    if a.is_none() {
                        stack.push(gate.rhs0.var());
                    }
                    if b.is_none() {
                        stack.push(gate.rhs1.var());
                    }
                }
            }
        }
        self.var_bdd.borrow()[root as usize].unwrap()
    }

    /// The game induced by the circuit's single error output.
    pub fn game(
        &self,
        mgr: &mut BddManager,
        circuit: &AigCircuit,
    ) -> Result<SymbolicGame, GameError> {
        if circuit.outputs.len() != 1 {
            return Err(GameError::OutputCount(circuit.outputs.len()));
        }
        let error = self.literal(mgr, circuit.outputs[0].lit);
        Ok(self.game_with_error(mgr, circuit, error))
    }

    /// The game with the error predicate swapped for a caller-supplied one.
    /// Decomposition-driven solvers use this to avoid ever realizing the
    /// circuit's own error function, whose BDD may be far larger than
    /// anything they need.
    pub fn game_without_error(
        &self,
        mgr: &mut BddManager,
        circuit: &AigCircuit,
    ) -> Result<SymbolicGame, GameError> {
        if circuit.outputs.len() != 1 {
            return Err(GameError::OutputCount(circuit.outputs.len()));
        }
        let error = mgr.const_false();
        Ok(self.game_with_error(mgr, circuit, error))
    }

    fn game_with_error(
        &self,
        mgr: &mut BddManager,
        circuit: &AigCircuit,
        error: BddRef,
    ) -> SymbolicGame {
        let transitions: Vec<BddRef> = circuit
            .latches
            .iter()
            .map(|l| self.literal(mgr, l.next))
            .collect();
        SymbolicGame::new(
            mgr,
            self.latch_vars.clone(),
            transitions,
            error,
            self.xu_vars.clone(),
            self.xc_vars.clone(),
        )
    }

    /// Display name for a game variable, for diagnostics and DOT output.
    pub fn var_name(&self, circuit: &AigCircuit, v: VarId) -> String {
        for (k, &iv) in self.xu_vars.iter().enumerate() {
            if iv == v {
                let idx = self.classification.uncontrollable[k];
                return named_or(&circuit.inputs[idx].name, "in", idx);
            }
        }
        for (k, &iv) in self.xc_vars.iter().enumerate() {
            if iv == v {
                let idx = self.classification.controllable[k];
                return named_or(&circuit.inputs[idx].name, "in", idx);
            }
        }
        for (k, &lv) in self.latch_vars.iter().enumerate() {
            if lv == v {
                return named_or(&circuit.latches[k].name, "latch", k);
            }
        }
        format!("v{}", v.0)
    }
}

fn named_or(name: &Option<String>, fallback: &str, idx: usize) -> String {
    name.clone().unwrap_or_else(|| format!("{fallback}{idx}"))
}

/// Latch indices a literal depends on through the netlist structure,
/// closed under transition dependencies.
pub fn cone_syntactic(circuit: &AigCircuit, lit: Literal) -> Vec<usize> {
    let defs = circuit.def_table();
    let mut latches = BTreeSet::new();
    let mut seen = vec![false; circuit.max_var as usize + 1];
    let mut stack = vec![lit.var()];
    while let Some(v) = stack.pop() {
        if seen[v as usize] {
            continue;
        }
        seen[v as usize] = true;
        match defs[v as usize] {
            VarDef::And(i) => {
                stack.push(circuit.ands[i].rhs0.var());
                stack.push(circuit.ands[i].rhs1.var());
            }
            VarDef::Latch(i) => {
                latches.insert(i);
                stack.push(circuit.latches[i].next.var());
            }
            _ => {}
        }
    }
    latches.into_iter().collect()
}

/// Everything a game needs besides the manager: partitioned variables, one
/// transition function per latch, and the error predicate over latches and
/// current inputs.
pub struct SymbolicGame {
    pub latch_vars: Vec<VarId>,
    pub transitions: Vec<BddRef>,
    pub error: BddRef,
    pub xu_vars: Vec<VarId>,
    pub xc_vars: Vec<VarId>,
    xu_set: SetId,
    xc_set: SetId,
    subst: SubstId,
}

/// Result of a completed solve: the verdict plus both winning regions.
/// `winning_states` ranges over latches; `winning_valuations` over latches
/// and current inputs, and is the maximal permissive strategy relation.
#[derive(Clone, Debug)]
pub struct GameSolution {
    pub realizable: bool,
    pub winning_states: BddRef,
    pub winning_valuations: BddRef,
    pub iterations: usize,
}

impl SymbolicGame {
    pub fn new(
        mgr: &mut BddManager,
        latch_vars: Vec<VarId>,
        transitions: Vec<BddRef>,
        error: BddRef,
        xu_vars: Vec<VarId>,
        xc_vars: Vec<VarId>,
    ) -> SymbolicGame {
        assert_eq!(latch_vars.len(), transitions.len());
        let xu_set = mgr.intern_set(&xu_vars);
        let xc_set = mgr.intern_set(&xc_vars);
        let pairs: Vec<(VarId, BddRef)> = latch_vars
            .iter()
            .copied()
            .zip(transitions.iter().copied())
            .collect();
        let subst = mgr.intern_subst(&pairs);
        SymbolicGame {
            latch_vars,
            transitions,
            error,
            xu_vars,
            xc_vars,
            xu_set,
            xc_set,
            subst,
        }
    }

    /// Same latches and inputs, different transition functions and error.
    /// Used by solvers that cofactor the dynamics down to a care set.
    pub fn with_dynamics(
        &self,
        mgr: &mut BddManager,
        transitions: Vec<BddRef>,
        error: BddRef,
    ) -> SymbolicGame {
        SymbolicGame::new(
            mgr,
            self.latch_vars.clone(),
            transitions,
            error,
            self.xu_vars.clone(),
            self.xc_vars.clone(),
        )
    }

    /// The sub-game over a subset of the latches with its own error. The
    /// subset must be transition-closed or states outside it will leak in
    /// through composition.
    pub fn restricted(
        &self,
        mgr: &mut BddManager,
        cone: &[VarId],
        error: BddRef,
    ) -> SymbolicGame {
        let transitions: Vec<BddRef> = cone
            .iter()
            .map(|&v| self.transition_of(v).expect("cone variable is not a latch"))
            .collect();
        SymbolicGame::new(
            mgr,
            cone.to_vec(),
            transitions,
            error,
            self.xu_vars.clone(),
            self.xc_vars.clone(),
        )
    }

    pub fn transition_of(&self, v: VarId) -> Option<BddRef> {
        self.latch_vars
            .iter()
            .position(|&l| l == v)
            .map(|i| self.transitions[i])
    }

    /// S after one transition: S(delta(l, xu, xc)), over latches and inputs.
    pub fn post(&self, mgr: &mut BddManager, s: BddRef) -> BddRef {
        mgr.compose(s, self.subst)
    }

    /// States from which the environment can force the next state into `s`,
    /// ignoring the error output.
    pub fn upre(&self, mgr: &mut BddManager, s: BddRef) -> BddRef {
        let moved = self.post(mgr, s);
        let all_c = mgr.forall(self.xc_set, moved);
        mgr.exists(self.xu_set, all_c)
    }

    /// States from which the controller can steer the next state into `s`,
    /// ignoring the error output.
    pub fn cpre(&self, mgr: &mut BddManager, s: BddRef) -> BddRef {
        let moved = self.post(mgr, s);
        let some_c = mgr.exists(self.xc_set, moved);
        mgr.forall(self.xu_set, some_c)
    }

    /// One environment step with the error folded in: raise the error now or
    /// force into `s`.
    pub fn upre_step(&self, mgr: &mut BddManager, s: BddRef) -> BddRef {
        let moved = self.post(mgr, s);
        let bad_or_moved = mgr.or(self.error, moved);
        let all_c = mgr.forall(self.xc_set, bad_or_moved);
        mgr.exists(self.xu_set, all_c)
    }

    /// One controller step with the error folded in: avoid the error now and
    /// stay inside `s`.
    pub fn cpre_step(&self, mgr: &mut BddManager, s: BddRef) -> BddRef {
        let moved = self.post(mgr, s);
        let nerr = mgr.not(self.error);
        let good_and_moved = mgr.and(nerr, moved);
        let some_c = mgr.exists(self.xc_set, good_and_moved);
        mgr.forall(self.xu_set, some_c)
    }

    /// Least fixpoint of `upre_step`: states from which the environment
    /// eventually forces the error. Runs to convergence.
    pub fn losing_states(&self, mgr: &mut BddManager) -> Result<(BddRef, usize), Stopped> {
        let mut x = mgr.const_false();
        let mut iterations = 0;
        loop {
            let next = self.upre_step(mgr, x);
            iterations += 1;
            if mgr.interrupted() {
                return Err(Stopped::Timeout);
            }
            if next == x {
                return Ok((x, iterations));
            }
            x = next;
        }
    }

    /// Greatest fixpoint of `cpre_step`: states the controller can keep safe
    /// forever. Dual route to [`SymbolicGame::losing_states`].
    pub fn safe_states(&self, mgr: &mut BddManager) -> Result<(BddRef, usize), Stopped> {
        let mut x = mgr.const_true();
        let mut iterations = 0;
        loop {
            let next = self.cpre_step(mgr, x);
            iterations += 1;
            if mgr.interrupted() {
                return Err(Stopped::Timeout);
            }
            if next == x {
                return Ok((x, iterations));
            }
            x = next;
        }
    }

    /// The maximal permissive strategy over safe states `s`: stay in `s`,
    /// do not raise the error, and land back in `s`.
    ///
    /// The landing check composes transitions cofactored down to `s`. The
    /// conjunction with `s` cannot observe how the dynamics behave outside
    /// it, so the result is the same function either way, but the pruned
    /// compose skips whatever the transitions do in dead states.
    pub fn winning_valuations(&self, mgr: &mut BddManager, safe: BddRef) -> BddRef {
        if safe == mgr.const_false() {
            return safe;
        }
        let nerr = mgr.not(self.error);
        let stay = if safe == mgr.const_true() {
            self.post(mgr, safe)
        } else {
            let pairs: Vec<(VarId, BddRef)> = self
                .latch_vars
                .iter()
                .zip(self.transitions.iter())
                .map(|(&v, &f)| (v, mgr.gencof(f, safe)))
                .collect();
            let subst = mgr.intern_subst(&pairs);
            mgr.compose(safe, subst)
        };
        let ok_step = mgr.and(nerr, stay);
        mgr.and(safe, ok_step)
    }

    /// Full solve through the losing-states fixpoint. Realizable iff the
    /// all-zero initial state is not losing.
    pub fn solve(&self, mgr: &mut BddManager) -> Result<GameSolution, Stopped> {
        let (losing, iterations) = self.losing_states(mgr)?;
        let safe = mgr.not(losing);
        let winning_valuations = self.winning_valuations(mgr, safe);
        if mgr.interrupted() {
            return Err(Stopped::Timeout);
        }
        Ok(GameSolution {
            realizable: !mgr.eval_all_false(losing),
            winning_states: safe,
            winning_valuations,
            iterations,
        })
    }

    /// Full solve through the safe-states fixpoint. Must agree with
    /// [`SymbolicGame::solve`] exactly, including the winning regions.
    pub fn solve_states(&self, mgr: &mut BddManager) -> Result<GameSolution, Stopped> {
        let (safe, iterations) = self.safe_states(mgr)?;
        let winning_valuations = self.winning_valuations(mgr, safe);
        if mgr.interrupted() {
            return Err(Stopped::Timeout);
        }
        Ok(GameSolution {
            realizable: mgr.eval_all_false(safe),
            winning_states: safe,
            winning_valuations,
            iterations,
        })
    }

    /// Latches `f` depends on, closed under transition support. The closure
    /// matters: tracking a latch requires tracking everything that feeds it.
    pub fn cone_semantic(&self, mgr: &BddManager, f: BddRef) -> Vec<VarId> {
        let latch_index: HashMap<VarId, usize> = self
            .latch_vars
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        let mut cone: BTreeSet<VarId> = BTreeSet::new();
        let mut work: Vec<VarId> = mgr
            .support(f)
            .into_iter()
            .filter(|v| latch_index.contains_key(v))
            .collect();
        while let Some(v) = work.pop() {
            if !cone.insert(v) {
                continue;
            }
            let t = self.transitions[latch_index[&v]];
            for s in mgr.support(t) {
                if latch_index.contains_key(&s) && !cone.contains(&s) {
                    work.push(s);
                }
            }
        }
        cone.into_iter().collect()
    }
}
