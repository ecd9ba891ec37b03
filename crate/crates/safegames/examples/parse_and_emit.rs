//! Build a tiny specification circuit in memory, emit it in both AIGER
//! formats, and parse it back.
//!
//! ```text
//! cargo run --example parse_and_emit
//! ```
//!
//! The circuit is the usual shape for a safety specification: one output
//! that raises when something has gone wrong, inputs split into
//! environment-owned and controller-owned by the `controllable_` name
//! prefix.

use safegames::aiger::{classify_inputs, AigBuilder, AigCircuit};

fn main() {
    let mut b = AigBuilder::new();
    let request = b.input("request");
    let grant = b.input("controllable_grant");
    // error: a request that is not granted
    let no_grant = b.not(grant);
    let err = b.and(request, no_grant);
    b.output(err, "err");
    let circuit = b.build();

    let ascii = circuit.write_ascii();
    println!("--- ascii ---\n{ascii}");

    let binary = circuit.write_binary();
    println!("--- binary: {} bytes ---", binary.len());

    let back = AigCircuit::parse_binary(&binary).expect("own emission parses");
    assert_eq!(back, circuit.canonical_form());
    let again = AigCircuit::parse_ascii(&ascii).expect("own emission parses");
    assert_eq!(again.write_ascii(), ascii);
    println!("ascii and binary round trips agree");

    let split = classify_inputs(&circuit);
    println!(
        "inputs: {} uncontrollable, {} controllable",
        split.uncontrollable.len(),
        split.controllable.len()
    );
}
