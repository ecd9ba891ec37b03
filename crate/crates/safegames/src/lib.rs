//! Realizability checking for AIGER safety specifications.
//!
//! The library answers one question: given a circuit whose single output
//! flags an error, can the controllable inputs always be driven so the
//! error never raises, no matter what the uncontrollable inputs do? It
//! answers it by solving the induced safety game symbolically, either
//! monolithically or by decomposing the error function into parts, solving
//! each part's sub-game, and combining the results.
//!
//! Modules, roughly bottom-up:
//!
//! * [`bdd`]: a self-contained ROBDD engine with quantifiers, vector
//!   composition and generalized cofactors.
//! * [`aiger`]: reading and writing AIGER circuits, ASCII and binary.
//! * [`game`]: safety games over latches and partitioned inputs, with the
//!   fixpoint solvers.
//! * [`decomp`]: splitting an error function into a disjunction of parts.
//! * [`solvers`]: the end-to-end strategies, from the classical monolithic
//!   solve to the compositional variants and a portfolio runner.
//! * [`benchgen`]: parameterized benchmark families.
//! * [`corpus`]: seeded random instances for differential testing.
//! * [`harness`]: batch evaluation with CSV and plot output.
//! * [`cli`]: the command-line front end behind the `safegames` binary.

pub mod aiger;
pub mod bdd;
pub mod benchgen;
pub mod cli;
pub mod corpus;
pub mod decomp;
pub mod game;
pub mod harness;
pub mod solvers;
