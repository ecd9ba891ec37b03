//! AIGER circuits: parsing, emission, evaluation.
//!
//! Both the ASCII (`aag`) and binary (`aig`) formats are supported. Parsing
//! is strict: every referenced variable must be defined, definitions must be
//! unique, the and-graph must be acyclic, and latches must initialize to
//! zero. ASCII emission preserves the stored structure verbatim, so
//! `parse(write(c)) == c` and emission is idempotent. Binary emission
//! renumbers variables into the contiguous order the format requires.

use std::collections::BinaryHeap;
use std::fmt;
use thiserror::Error;

/// Inputs whose symbol name starts with this prefix belong to the controller.
pub const CONTROLLABLE_PREFIX: &str = "controllable_";

/// An AIGER literal: variable index shifted left once, low bit = negation.
/// Literal 0 is constant false, literal 1 constant true.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Literal(pub u32);

impl Literal {
    pub const FALSE: Literal = Literal(0);
    pub const TRUE: Literal = Literal(1);

    pub fn from_var(var: u32, negated: bool) -> Literal {
        Literal(var << 1 | negated as u32)
    }

    pub fn var(self) -> u32 {
        self.0 >> 1
    }

    pub fn is_negated(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn negate(self) -> Literal {
        Literal(self.0 ^ 1)
    }

    pub fn is_const(self) -> bool {
        self.0 <= 1
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AigInput {
    pub lit: Literal,
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AigLatch {
    pub current: Literal,
    pub next: Literal,
    pub name: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AigOutput {
    pub lit: Literal,
    pub name: Option<String>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct AndGate {
    pub lhs: Literal,
    pub rhs0: Literal,
    pub rhs1: Literal,
}

/// What a variable index stands for. Indices are positions into the
/// corresponding circuit section.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum VarDef {
    Const,
    Input(usize),
    Latch(usize),
    And(usize),
    /// A hole: legal in ASCII files as long as nothing references it.
    Undefined,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AigCircuit {
    pub max_var: u32,
    pub inputs: Vec<AigInput>,
    pub latches: Vec<AigLatch>,
    pub outputs: Vec<AigOutput>,
    pub ands: Vec<AndGate>,
    pub comments: Vec<String>,
}

#[derive(Error, Debug)]
pub enum AigerError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{0}")]
    Format(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn perr<T>(line: usize, msg: impl Into<String>) -> Result<T, AigerError> {
    Err(AigerError::Parse { line, msg: msg.into() })
}

/// Indices of uncontrollable and controllable inputs, by position in the
/// input section. Unnamed inputs count as uncontrollable.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InputClassification {
    pub uncontrollable: Vec<usize>,
    pub controllable: Vec<usize>,
}

pub fn classify_inputs(circuit: &AigCircuit) -> InputClassification {
    let mut out = InputClassification::default();
    for (i, input) in circuit.inputs.iter().enumerate() {
        let controllable = input
            .name
            .as_deref()
            .is_some_and(|n| n.starts_with(CONTROLLABLE_PREFIX));
        if controllable {
            out.controllable.push(i);
        } else {
            out.uncontrollable.push(i);
        }
    }
    out
}

impl AigCircuit {
    /// Definition of every variable index, 0..=max_var.
    pub fn def_table(&self) -> Vec<VarDef> {
        let mut defs = vec![VarDef::Undefined; self.max_var as usize + 1];
        defs[0] = VarDef::Const;
        for (i, input) in self.inputs.iter().enumerate() {
            defs[input.lit.var() as usize] = VarDef::Input(i);
        }
        for (i, latch) in self.latches.iter().enumerate() {
            defs[latch.current.var() as usize] = VarDef::Latch(i);
        }
        for (i, gate) in self.ands.iter().enumerate() {
            defs[gate.lhs.var() as usize] = VarDef::And(i);
        }
        defs
    }

    /// Checks section-level well-formedness shared by both parsers; `line`
    /// localization is coarse because the issue may span sections.
    fn validate(&self) -> Result<(), AigerError> {
        let mut defs = vec![VarDef::Undefined; self.max_var as usize + 1];
        defs[0] = VarDef::Const;
        let mut define = |lit: Literal, what: VarDef| -> Result<(), AigerError> {
            if lit.is_negated() {
                return Err(AigerError::Format(format!(
                    "literal {lit} defines a variable but is negated"
                )));
            }
            if lit.is_const() {
                return Err(AigerError::Format(
                    "constant literal cannot be defined".into(),
                ));
            }
            let v = lit.var() as usize;
            if v > self.max_var as usize {
                return Err(AigerError::Format(format!(
                    "literal {lit} exceeds declared maximum variable {}",
                    self.max_var
                )));
            }
            if defs[v] != VarDef::Undefined {
                return Err(AigerError::Format(format!(
                    "variable {v} defined more than once"
                )));
            }
            defs[v] = what;
            Ok(())
        };
        for (i, input) in self.inputs.iter().enumerate() {
            define(input.lit, VarDef::Input(i))?;
        }
        for (i, latch) in self.latches.iter().enumerate() {
            define(latch.current, VarDef::Latch(i))?;
        }
        for (i, gate) in self.ands.iter().enumerate() {
            define(gate.lhs, VarDef::And(i))?;
        }
        let reference = |lit: Literal| -> Result<(), AigerError> {
            let v = lit.var() as usize;
            if v > self.max_var as usize {
                return Err(AigerError::Format(format!(
                    "literal {lit} exceeds declared maximum variable {}",
                    self.max_var
                )));
            }
            if defs[v] == VarDef::Undefined {
                return Err(AigerError::Format(format!(
                    "literal {lit} references undefined variable {v}"
                )));
            }
            Ok(())
        };
        for latch in &self.latches {
            reference(latch.next)?;
        }
        for output in &self.outputs {
            reference(output.lit)?;
        }
        for gate in &self.ands {
            reference(gate.rhs0)?;
            reference(gate.rhs1)?;
        }
        self.check_acyclic(&defs)?;
        Ok(())
    }

    fn check_acyclic(&self, defs: &[VarDef]) -> Result<(), AigerError> {
        // iterative DFS: 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; self.max_var as usize + 1];
        for start in self.ands.iter().map(|g| g.lhs.var()) {
            if state[start as usize] == 2 {
                continue;
            }
            let mut stack = vec![(start, 0u8)];
            while let Some(&mut (v, ref mut phase)) = stack.last_mut() {
                if *phase == 0 {
                    *phase = 1;
                    if state[v as usize] == 1 {
                        return Err(AigerError::Format(format!(
                            "combinational cycle through variable {v}"
                        )));
                    }
                    if state[v as usize] == 2 {
                        stack.pop();
                        continue;
                    }
                    state[v as usize] = 1;
                    if let VarDef::And(i) = defs[v as usize] {
                        let g = self.ands[i];
                        for r in [g.rhs0.var(), g.rhs1.var()] {
                            if let VarDef::And(_) = defs[r as usize] {
                                if state[r as usize] == 1 {
                                    return Err(AigerError::Format(format!(
                                        "combinational cycle through variable {r}"
                                    )));
                                }
                                if state[r as usize] == 0 {
                                    stack.push((r, 0));
                                }
                            }
                        }
                    }
                } else {
                    state[v as usize] = 2;
                    stack.pop();
                }
            }
        }
        Ok(())
    }

    pub fn parse_ascii(text: &str) -> Result<AigCircuit, AigerError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = match lines.next() {
            Some(h) => h,
            None => return perr(1, "empty file"),
        };
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.first() != Some(&"aag") {
            return perr(1, "expected 'aag' header");
        }
        if fields.len() != 6 {
            return perr(
                1,
                format!(
                    "header must be 'aag M I L O A', found {} fields",
                    fields.len()
                ),
            );
        }
        let nums: Vec<u32> = fields[1..]
            .iter()
            .map(|f| f.parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|e| AigerError::Parse { line: 1, msg: format!("bad header count: {e}") })?;
        let (m, i, l, o, a) = (nums[0], nums[1], nums[2], nums[3], nums[4]);
        if (i as u64) + (l as u64) + (a as u64) > m as u64 {
            return perr(1, "maximum variable index smaller than I + L + A");
        }

        let mut next_line = |what: &str| -> Result<(usize, &str), AigerError> {
            match lines.next() {
                Some((idx, text)) => Ok((idx + 1, text)),
                None => perr(0, format!("unexpected end of file, expected {what}")),
            }
        };

        let mut inputs = Vec::with_capacity(i as usize);
        for _ in 0..i {
            let (ln, text) = next_line("an input literal")?;
            let lit = parse_u32(text.trim(), ln, "input literal")?;
            if lit & 1 == 1 || lit <= 1 {
                return perr(ln, format!("input literal {lit} must be even and nonconstant"));
            }
            inputs.push(AigInput { lit: Literal(lit), name: None });
        }

        let mut latches = Vec::with_capacity(l as usize);
        for _ in 0..l {
            let (ln, text) = next_line("a latch definition")?;
            let parts: Vec<&str> = text.split_whitespace().collect();
            if parts.len() != 2 && parts.len() != 3 {
                return perr(ln, "latch line must be 'current next' or 'current next 0'");
            }
            let current = parse_u32(parts[0], ln, "latch literal")?;
            let next = parse_u32(parts[1], ln, "latch next-state literal")?;
            if parts.len() == 3 && parts[2] != "0" {
                return perr(
                    ln,
                    format!("latch reset value '{}' unsupported; latches must start at 0", parts[2]),
                );
            }
            if current & 1 == 1 || current <= 1 {
                return perr(ln, format!("latch literal {current} must be even and nonconstant"));
            }
            latches.push(AigLatch {
                current: Literal(current),
                next: Literal(next),
                name: None,
            });
        }

        let mut outputs = Vec::with_capacity(o as usize);
        for _ in 0..o {
            let (ln, text) = next_line("an output literal")?;
            let lit = parse_u32(text.trim(), ln, "output literal")?;
            outputs.push(AigOutput { lit: Literal(lit), name: None });
        }

        let mut ands = Vec::with_capacity(a as usize);
        for _ in 0..a {
            let (ln, text) = next_line("an and gate")?;
            let parts: Vec<&str> = text.split_whitespace().collect();
            if parts.len() != 3 {
                return perr(ln, "and gate line must be 'lhs rhs0 rhs1'");
            }
            let lhs = parse_u32(parts[0], ln, "and gate literal")?;
            let rhs0 = parse_u32(parts[1], ln, "and gate operand")?;
            let rhs1 = parse_u32(parts[2], ln, "and gate operand")?;
            if lhs & 1 == 1 || lhs <= 1 {
                return perr(ln, format!("and gate literal {lhs} must be even and nonconstant"));
            }
            ands.push(AndGate {
                lhs: Literal(lhs),
                rhs0: Literal(rhs0),
                rhs1: Literal(rhs1),
            });
        }

        let mut circuit = AigCircuit {
            max_var: m,
            inputs,
            latches,
            outputs,
            ands,
            comments: Vec::new(),
        };

        // symbol table, then comments
        let mut in_comments = false;
        for (idx, text) in lines {
            let ln = idx + 1;
            if in_comments {
                circuit.comments.push(text.to_string());
                continue;
            }
            if text == "c" {
                in_comments = true;
                continue;
            }
            parse_symbol_line(text, ln, &mut circuit)?;
        }
        circuit.validate()?;
        Ok(circuit)
    }

    pub fn parse_binary(bytes: &[u8]) -> Result<AigCircuit, AigerError> {
        let mut pos = 0usize;
        let header = read_line(bytes, &mut pos)
            .ok_or_else(|| AigerError::Parse { line: 1, msg: "empty file".into() })?;
        let header = std::str::from_utf8(header)
            .map_err(|_| AigerError::Parse { line: 1, msg: "header is not valid text".into() })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.first() != Some(&"aig") {
            return perr(1, "expected 'aig' header");
        }
        if fields.len() != 6 {
            return perr(
                1,
                format!(
                    "header must be 'aig M I L O A', found {} fields",
                    fields.len()
                ),
            );
        }
        let nums: Vec<u32> = fields[1..]
            .iter()
            .map(|f| f.parse::<u32>())
            .collect::<Result<_, _>>()
            .map_err(|e| AigerError::Parse { line: 1, msg: format!("bad header count: {e}") })?;
        let (m, i, l, o, a) = (nums[0], nums[1], nums[2], nums[3], nums[4]);
        if (i as u64) + (l as u64) + (a as u64) != m as u64 {
            return perr(1, "binary format requires M = I + L + A");
        }

        let inputs: Vec<AigInput> = (0..i)
            .map(|k| AigInput { lit: Literal::from_var(k + 1, false), name: None })
            .collect();

        let mut line_no = 1;
        let mut latches = Vec::with_capacity(l as usize);
        for k in 0..l {
            line_no += 1;
            let text = read_line(bytes, &mut pos)
                .ok_or_else(|| AigerError::Parse {
                    line: line_no,
                    msg: "unexpected end of file, expected a latch line".into(),
                })?;
            let text = std::str::from_utf8(text).map_err(|_| AigerError::Parse {
                line: line_no,
                msg: "latch line is not valid text".into(),
            })?;
            let parts: Vec<&str> = text.split_whitespace().collect();
            if parts.len() != 1 && parts.len() != 2 {
                return perr(line_no, "latch line must be 'next' or 'next 0'");
            }
            let next = parse_u32(parts[0], line_no, "latch next-state literal")?;
            if parts.len() == 2 && parts[1] != "0" {
                return perr(
                    line_no,
                    format!("latch reset value '{}' unsupported; latches must start at 0", parts[1]),
                );
            }
            latches.push(AigLatch {
                current: Literal::from_var(i + k + 1, false),
                next: Literal(next),
                name: None,
            });
        }

        let mut outputs = Vec::with_capacity(o as usize);
        for _ in 0..o {
            line_no += 1;
            let text = read_line(bytes, &mut pos).ok_or_else(|| AigerError::Parse {
                line: line_no,
                msg: "unexpected end of file, expected an output line".into(),
            })?;
            let text = std::str::from_utf8(text).map_err(|_| AigerError::Parse {
                line: line_no,
                msg: "output line is not valid text".into(),
            })?;
            let lit = parse_u32(text.trim(), line_no, "output literal")?;
            outputs.push(AigOutput { lit: Literal(lit), name: None });
        }

        let mut ands = Vec::with_capacity(a as usize);
        for k in 0..a {
            let lhs = (i + l + k + 1) << 1;
            let delta0 = decode_delta(bytes, &mut pos).ok_or_else(|| {
                AigerError::Format(format!("truncated delta encoding in and gate {k}"))
            })?;
            let delta1 = decode_delta(bytes, &mut pos).ok_or_else(|| {
                AigerError::Format(format!("truncated delta encoding in and gate {k}"))
            })?;
            if delta0 == 0 {
                return Err(AigerError::Format(format!(
                    "and gate {k}: zero delta would make the gate its own operand"
                )));
            }
            let rhs0 = (lhs as u64)
                .checked_sub(delta0)
                .ok_or_else(|| AigerError::Format(format!("and gate {k}: delta underflows")))?;
            let rhs1 = rhs0
                .checked_sub(delta1)
                .ok_or_else(|| AigerError::Format(format!("and gate {k}: delta underflows")))?;
            ands.push(AndGate {
                lhs: Literal(lhs),
                rhs0: Literal(rhs0 as u32),
                rhs1: Literal(rhs1 as u32),
            });
        }

        let mut circuit = AigCircuit {
            max_var: m,
            inputs,
            latches,
            outputs,
            ands,
            comments: Vec::new(),
        };

        // trailing text: symbol table then comments
        let rest = &bytes[pos..];
        if !rest.is_empty() {
            let rest = std::str::from_utf8(rest).map_err(|_| {
                AigerError::Format("symbol table is not valid text".into())
            })?;
            let mut in_comments = false;
            for (k, text) in rest.lines().enumerate() {
                if in_comments {
                    circuit.comments.push(text.to_string());
                    continue;
                }
                if text == "c" {
                    in_comments = true;
                    continue;
                }
                parse_symbol_line(text, line_no + k + 1, &mut circuit)?;
            }
        }
        circuit.validate()?;
        Ok(circuit)
    }

    /// Dispatches on the magic word.
    pub fn parse_auto(bytes: &[u8]) -> Result<AigCircuit, AigerError> {
        if bytes.starts_with(b"aag") {
            let text = std::str::from_utf8(bytes).map_err(|_| {
                AigerError::Format("ascii file is not valid text".into())
            })?;
            Self::parse_ascii(text)
        } else if bytes.starts_with(b"aig") {
            Self::parse_binary(bytes)
        } else {
            perr(1, "file starts with neither 'aag' nor 'aig'")
        }
    }

    /// Emits ASCII verbatim from the stored structure: same literal values,
    /// same order, names attached by section position.
    pub fn write_ascii(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "aag {} {} {} {} {}",
            self.max_var,
            self.inputs.len(),
            self.latches.len(),
            self.outputs.len(),
            self.ands.len()
        );
        for input in &self.inputs {
            let _ = writeln!(out, "{}", input.lit);
        }
        for latch in &self.latches {
            let _ = writeln!(out, "{} {}", latch.current, latch.next);
        }
        for output in &self.outputs {
            let _ = writeln!(out, "{}", output.lit);
        }
        for gate in &self.ands {
            let _ = writeln!(out, "{} {} {}", gate.lhs, gate.rhs0, gate.rhs1);
        }
        for (k, input) in self.inputs.iter().enumerate() {
            if let Some(name) = &input.name {
                let _ = writeln!(out, "i{k} {name}");
            }
        }
        for (k, latch) in self.latches.iter().enumerate() {
            if let Some(name) = &latch.name {
                let _ = writeln!(out, "l{k} {name}");
            }
        }
        for (k, output) in self.outputs.iter().enumerate() {
            if let Some(name) = &output.name {
                let _ = writeln!(out, "o{k} {name}");
            }
        }
        if !self.comments.is_empty() {
            out.push_str("c\n");
            for comment in &self.comments {
                let _ = writeln!(out, "{comment}");
            }
        }
        out
    }

    /// Gate indices in a canonical topological order: dependencies first,
    /// ties broken by smallest defined variable. Deterministic for any valid
    /// circuit, and the identity when gates are already numbered that way.
    fn canonical_and_order(&self) -> Vec<usize> {
        let defs = self.def_table();
        let mut indegree = vec![0u32; self.ands.len()];
        let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); self.ands.len()];
        for (gi, gate) in self.ands.iter().enumerate() {
            for r in [gate.rhs0.var(), gate.rhs1.var()] {
                if let VarDef::And(src) = defs[r as usize] {
                    indegree[gi] += 1;
                    dependents[src].push(gi);
                }
            }
        }
        let mut heap: BinaryHeap<std::cmp::Reverse<(u32, usize)>> = self
            .ands
            .iter()
            .enumerate()
            .filter(|(gi, _)| indegree[*gi] == 0)
            .map(|(gi, gate)| std::cmp::Reverse((gate.lhs.var(), gi)))
            .collect();
        let mut order = Vec::with_capacity(self.ands.len());
        while let Some(std::cmp::Reverse((_, gi))) = heap.pop() {
            order.push(gi);
            for &dep in &dependents[gi] {
                indegree[dep] -= 1;
                if indegree[dep] == 0 {
                    heap.push(std::cmp::Reverse((self.ands[dep].lhs.var(), dep)));
                }
            }
        }
        debug_assert_eq!(order.len(), self.ands.len());
        order
    }

    /// The variable renumbering used by binary emission: inputs first, then
    /// latches, then gates in canonical topological order. Holes vanish.
    fn binary_var_map(&self) -> (Vec<u32>, Vec<usize>) {
        let order = self.canonical_and_order();
        let mut map = vec![0u32; self.max_var as usize + 1];
        let mut next = 1u32;
        for input in &self.inputs {
            map[input.lit.var() as usize] = next;
            next += 1;
        }
        for latch in &self.latches {
            map[latch.current.var() as usize] = next;
            next += 1;
        }
        for &gi in &order {
            map[self.ands[gi].lhs.var() as usize] = next;
            next += 1;
        }
        (map, order)
    }

    /// The circuit with variables renumbered exactly as binary emission does,
    /// as an in-memory structure. `parse_binary(write_binary(c))` equals
    /// `canonical_form(c)` up to the symbol table, which is preserved.
    pub fn canonical_form(&self) -> AigCircuit {
        let (map, order) = self.binary_var_map();
        let remap = |lit: Literal| Literal::from_var(map[lit.var() as usize], lit.is_negated());
        let ands = order
            .iter()
            .map(|&gi| {
                let g = self.ands[gi];
                let a = remap(g.rhs0);
                let b = remap(g.rhs1);
                let (rhs0, rhs1) = if a.0 >= b.0 { (a, b) } else { (b, a) };
                AndGate { lhs: remap(g.lhs), rhs0, rhs1 }
            })
            .collect();
        AigCircuit {
            max_var: (self.inputs.len() + self.latches.len() + self.ands.len()) as u32,
            inputs: self
                .inputs
                .iter()
                .map(|x| AigInput { lit: remap(x.lit), name: x.name.clone() })
                .collect(),
            latches: self
                .latches
                .iter()
                .map(|x| AigLatch {
                    current: remap(x.current),
                    next: remap(x.next),
                    name: x.name.clone(),
                })
                .collect(),
            outputs: self
                .outputs
                .iter()
                .map(|x| AigOutput { lit: remap(x.lit), name: x.name.clone() })
                .collect(),
            ands,
            comments: self.comments.clone(),
        }
    }

    pub fn write_binary(&self) -> Vec<u8> {
        let canon = self.canonical_form();
        let mut out = Vec::new();
        out.extend_from_slice(
            format!(
                "aig {} {} {} {} {}\n",
                canon.max_var,
                canon.inputs.len(),
                canon.latches.len(),
                canon.outputs.len(),
                canon.ands.len()
            )
            .as_bytes(),
        );
        for latch in &canon.latches {
            out.extend_from_slice(format!("{}\n", latch.next).as_bytes());
        }
        for output in &canon.outputs {
            out.extend_from_slice(format!("{}\n", output.lit).as_bytes());
        }
        for gate in &canon.ands {
            encode_delta(gate.lhs.0 - gate.rhs0.0, &mut out);
            encode_delta(gate.rhs0.0 - gate.rhs1.0, &mut out);
        }
        for (k, input) in canon.inputs.iter().enumerate() {
            if let Some(name) = &input.name {
                out.extend_from_slice(format!("i{k} {name}\n").as_bytes());
            }
        }
        for (k, latch) in canon.latches.iter().enumerate() {
            if let Some(name) = &latch.name {
                out.extend_from_slice(format!("l{k} {name}\n").as_bytes());
            }
        }
        for (k, output) in canon.outputs.iter().enumerate() {
            if let Some(name) = &output.name {
                out.extend_from_slice(format!("o{k} {name}\n").as_bytes());
            }
        }
        if !canon.comments.is_empty() {
            out.extend_from_slice(b"c\n");
            for comment in &canon.comments {
                out.extend_from_slice(format!("{comment}\n").as_bytes());
            }
        }
        out
    }
}

fn parse_u32(text: &str, line: usize, what: &str) -> Result<u32, AigerError> {
    text.parse::<u32>().map_err(|e| AigerError::Parse {
        line,
        msg: format!("bad {what} '{text}': {e}"),
    })
}

fn parse_symbol_line(
    text: &str,
    line: usize,
    circuit: &mut AigCircuit,
) -> Result<(), AigerError> {
    let (kind, rest) = match text.chars().next() {
        Some(c @ ('i' | 'l' | 'o')) => (c, &text[1..]),
        _ => return perr(line, format!("expected a symbol entry or 'c', found '{text}'")),
    };
    let space = match rest.find(' ') {
        Some(s) => s,
        None => return perr(line, "symbol entry is missing a name"),
    };
    let idx: usize = rest[..space]
        .parse()
        .map_err(|e| AigerError::Parse { line, msg: format!("bad symbol position: {e}") })?;
    let name = &rest[space + 1..];
    if name.is_empty() {
        return perr(line, "symbol entry is missing a name");
    }
    let slot = match kind {
        'i' => circuit.inputs.get_mut(idx).map(|x| &mut x.name),
        'l' => circuit.latches.get_mut(idx).map(|x| &mut x.name),
        _ => circuit.outputs.get_mut(idx).map(|x| &mut x.name),
    };
    match slot {
        None => perr(line, format!("symbol position {kind}{idx} out of range")),
        Some(Some(_)) => perr(line, format!("duplicate symbol entry for {kind}{idx}")),
        Some(slot @ None) => {
            *slot = Some(name.to_string());
            Ok(())
        }
    }
}

/// Reads up to the next newline; consumes the newline. None at end of input.
fn read_line<'a>(bytes: &'a [u8], pos: &mut usize) -> Option<&'a [u8]> {
    if *pos >= bytes.len() {
        return None;
    }
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos] != b'\n' {
        *pos += 1;
    }
    let line = &bytes[start..*pos];
    if *pos < bytes.len() {
        *pos += 1; // consume the newline
    }
    Some(line)
}

/// 7-bit little-endian chunks, high bit set on all but the last.
fn encode_delta(mut value: u32, out: &mut Vec<u8>) {
    loop {
        let chunk = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            out.push(chunk);
            return;
        }
        out.push(chunk | 0x80);
    }
}

fn decode_delta(bytes: &[u8], pos: &mut usize) -> Option<u64> {
    let mut value: u64 = 0;
    let mut shift = 0u32;
    loop {
        let byte = *bytes.get(*pos)?;
        *pos += 1;
        value |= ((byte & 0x7f) as u64) << shift;
        if byte & 0x80 == 0 {
            return Some(value);
        }
        shift += 7;
        if shift > 35 {
            return None; // would exceed any legal literal
        }
    }
}

/// Evaluates a circuit step by step. Construction fixes a topological gate
/// order; each `step` computes every wire, the outputs and the next state.
pub struct Evaluator<'a> {
    circuit: &'a AigCircuit,
    defs: Vec<VarDef>,
    topo: Vec<usize>,
    values: Vec<bool>,
}

/// One transition: output values and the successor latch state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepResult {
    pub outputs: Vec<bool>,
    pub next_state: Vec<bool>,
}

impl<'a> Evaluator<'a> {
    pub fn new(circuit: &'a AigCircuit) -> Evaluator<'a> {
        let defs = circuit.def_table();
        let topo = circuit.canonical_and_order();
        let values = vec![false; circuit.max_var as usize + 1];
        Evaluator { circuit, defs, topo, values }
    }

    fn lit_value(&self, lit: Literal) -> bool {
        self.values[lit.var() as usize] ^ lit.is_negated()
    }

    /// `inputs` by input-section position, `state` by latch-section position.
    pub fn step(&mut self, inputs: &[bool], state: &[bool]) -> StepResult {
        assert_eq!(inputs.len(), self.circuit.inputs.len());
        assert_eq!(state.len(), self.circuit.latches.len());
        for (v, def) in self.defs.iter().enumerate() {
            self.values[v] = match *def {
                VarDef::Input(i) => inputs[i],
                VarDef::Latch(i) => state[i],
                _ => false,
            };
        }
        for &gi in &self.topo {
            let gate = self.circuit.ands[gi];
            let value = self.lit_value(gate.rhs0) && self.lit_value(gate.rhs1);
            self.values[gate.lhs.var() as usize] = value;
        }
        StepResult {
            outputs: self.circuit.outputs.iter().map(|o| self.lit_value(o.lit)).collect(),
            next_state: self.circuit.latches.iter().map(|l| self.lit_value(l.next)).collect(),
        }
    }

    /// Value of an arbitrary literal after the most recent `step`.
    pub fn value_of(&self, lit: Literal) -> bool {
        self.lit_value(lit)
    }
}

/// Incremental and-inverter graph construction with constant folding and
/// structural hashing. Variables are numbered in creation order; emission
/// renumbers as needed.
pub struct AigBuilder {
    next_var: u32,
    inputs: Vec<AigInput>,
    latches: Vec<(Literal, Option<Literal>, Option<String>)>,
    outputs: Vec<AigOutput>,
    ands: Vec<AndGate>,
    strash: std::collections::HashMap<(u32, u32), Literal>,
    comments: Vec<String>,
}

impl AigBuilder {
    pub fn new() -> AigBuilder {
        AigBuilder {
            next_var: 1,
            inputs: Vec::new(),
            latches: Vec::new(),
            outputs: Vec::new(),
            ands: Vec::new(),
            strash: std::collections::HashMap::new(),
            comments: Vec::new(),
        }
    }

    fn fresh(&mut self) -> Literal {
        let lit = Literal::from_var(self.next_var, false);
        self.next_var += 1;
        lit
    }

    pub fn input(&mut self, name: impl Into<String>) -> Literal {
        let lit = self.fresh();
        self.inputs.push(AigInput { lit, name: Some(name.into()) });
        lit
    }

    /// Declares a latch; its transition function is supplied later through
    /// [`AigBuilder::set_next`]. Latches start at zero.
    pub fn latch(&mut self, name: impl Into<String>) -> Literal {
        let lit = self.fresh();
        self.latches.push((lit, None, Some(name.into())));
        lit
    }

    pub fn set_next(&mut self, latch: Literal, next: Literal) {
        let entry = self
            .latches
            .iter_mut()
            .find(|(cur, _, _)| *cur == latch)
            .expect("set_next on a literal that is not a declared latch");
        assert!(entry.1.is_none(), "latch next function set twice");
        entry.1 = Some(next);
    }

    pub fn output(&mut self, lit: Literal, name: impl Into<String>) {
        self.outputs.push(AigOutput { lit, name: Some(name.into()) });
    }

    pub fn comment(&mut self, text: impl Into<String>) {
        self.comments.push(text.into());
    }

    pub fn not(&self, a: Literal) -> Literal {
        a.negate()
    }

    pub fn and(&mut self, a: Literal, b: Literal) -> Literal {
        if a == Literal::FALSE || b == Literal::FALSE {
            return Literal::FALSE;
        }
        if a == Literal::TRUE {
            return b;
        }
        if b == Literal::TRUE || a == b {
            return a;
        }
        if a == b.negate() {
            return Literal::FALSE;
        }
        let key = if a.0 >= b.0 { (a.0, b.0) } else { (b.0, a.0) };
        if let Some(&hit) = self.strash.get(&key) {
            return hit;
        }
        let lhs = self.fresh();
        self.ands.push(AndGate { lhs, rhs0: Literal(key.0), rhs1: Literal(key.1) });
        self.strash.insert(key, lhs);
        lhs
    }

    pub fn or(&mut self, a: Literal, b: Literal) -> Literal {
        self.and(a.negate(), b.negate()).negate()
    }

    pub fn xor(&mut self, a: Literal, b: Literal) -> Literal {
        let l = self.and(a, b.negate());
        let r = self.and(a.negate(), b);
        self.or(l, r)
    }

    pub fn iff(&mut self, a: Literal, b: Literal) -> Literal {
        self.xor(a, b).negate()
    }

    pub fn implies(&mut self, a: Literal, b: Literal) -> Literal {
        self.or(a.negate(), b)
    }

    pub fn mux(&mut self, sel: Literal, then: Literal, els: Literal) -> Literal {
        let t = self.and(sel, then);
        let e = self.and(sel.negate(), els);
        self.or(t, e)
    }

    pub fn and_many(&mut self, lits: &[Literal]) -> Literal {
        let mut acc = Literal::TRUE;
        for &l in lits {
            acc = self.and(acc, l);
        }
        acc
    }

    pub fn or_many(&mut self, lits: &[Literal]) -> Literal {
        let mut acc = Literal::FALSE;
        for &l in lits {
            acc = self.or(acc, l);
        }
        acc
    }

    /// Finishes construction. Panics if some latch never received a next
    /// function; that is a construction bug, not an input error.
    pub fn build(self) -> AigCircuit {
        let latches = self
            .latches
            .into_iter()
            .map(|(current, next, name)| AigLatch {
                current,
                next: next.unwrap_or_else(|| {
                    panic!("latch {} has no next function", current)
                }),
                name,
            })
            .collect();
        let circuit = AigCircuit {
            max_var: self.next_var - 1,
            inputs: self.inputs,
            latches,
            outputs: self.outputs,
            ands: self.ands,
            comments: self.comments,
        };
        debug_assert!(circuit.validate().is_ok());
        circuit
    }
}

impl Default for AigBuilder {
    fn default() -> Self {
        Self::new()
    }
}
