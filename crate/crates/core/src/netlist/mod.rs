//! Gate-level netlists over the ten two-input Boolean functions.
//!
//! A [`Netlist`] is a DAG stored in topological order: wires `0..num_inputs`
//! are primary inputs, every further wire is the output of exactly one gate,
//! and a gate may only read wires created before it. Every gate costs one
//! unit; inputs and outputs are free.

pub mod text;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

pub use text::{export_text, import_text, ImportError};

/// The ten binary Boolean functions that depend on both arguments.
///
/// Inverted gate inputs are folded into `ANDN*`/`ORN*`; there are no
/// inverters and no constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum GateKind {
    And,
    Or,
    Xor,
    Nand,
    Nor,
    Xnor,
    /// `!a & b`
    AndN1,
    /// `a & !b`
    AndN2,
    /// `!a | b`
    OrN1,
    /// `a | !b`
    OrN2,
}

impl GateKind {
    pub const ALL: [GateKind; 10] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Xor,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Xnor,
        GateKind::AndN1,
        GateKind::AndN2,
        GateKind::OrN1,
        GateKind::OrN2,
    ];

    pub fn token(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Xor => "XOR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
            GateKind::Xnor => "XNOR",
            GateKind::AndN1 => "ANDN1",
            GateKind::AndN2 => "ANDN2",
            GateKind::OrN1 => "ORN1",
            GateKind::OrN2 => "ORN2",
        }
    }

    pub fn from_token(token: &str) -> Option<GateKind> {
        GateKind::ALL.into_iter().find(|k| k.token() == token)
    }

    /// Evaluates the gate on 64 independent lanes at once.
    #[inline]
    pub fn eval_word(self, a: u64, b: u64) -> u64 {
        match self {
            GateKind::And => a & b,
            GateKind::Or => a | b,
            GateKind::Xor => a ^ b,
            GateKind::Nand => !(a & b),
            GateKind::Nor => !(a | b),
            GateKind::Xnor => !(a ^ b),
            GateKind::AndN1 => !a & b,
            GateKind::AndN2 => a & !b,
            GateKind::OrN1 => !a | b,
            GateKind::OrN2 => a | !b,
        }
    }

    pub fn eval(self, a: bool, b: bool) -> bool {
        self.eval_word(a as u64, b as u64) & 1 == 1
    }

    /// Unit cost for every kind in the basis.
    pub fn cost(self) -> usize {
        1
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

/// Dense index into a netlist's wire table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WireRef(u32);

impl WireRef {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(index: usize) -> WireRef {
        WireRef(u32::try_from(index).expect("wire index exceeds u32"))
    }
}

impl fmt::Display for WireRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gate {
    pub kind: GateKind,
    pub a: WireRef,
    pub b: WireRef,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BuildError {
    #[error("duplicate name `{0}`")]
    DuplicateName(String),
    #[error("invalid name `{0}`")]
    InvalidName(String),
    #[error("wire {0} is not defined yet")]
    UndefinedWire(WireRef),
    #[error("input `{0}` declared after the first gate")]
    InputAfterGate(String),
    #[error("output `{name}` would rename wire `{existing}`")]
    OutputAlias { name: String, existing: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("assignment has {got} values, netlist has {expected} inputs")]
    AssignmentSize { expected: usize, got: usize },
}

pub(crate) fn is_valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Incremental netlist construction.
///
/// Gate names are assigned in [`NetlistBuilder::finish`]: gates driving an
/// output take the output's name, every other gate is called `g<index>`.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    names: Vec<Option<String>>,
    name_index: HashMap<String, WireRef>,
    num_inputs: usize,
    gates: Vec<Gate>,
}

impl NetlistBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_input(&mut self, name: &str) -> Result<WireRef, BuildError> {
        if !self.gates.is_empty() {
            return Err(BuildError::InputAfterGate(name.to_string()));
        }
        if !is_valid_name(name) {
            return Err(BuildError::InvalidName(name.to_string()));
        }
        if self.name_index.contains_key(name) {
            return Err(BuildError::DuplicateName(name.to_string()));
        }
        let wire = WireRef::from_index(self.names.len());
        self.names.push(Some(name.to_string()));
        self.name_index.insert(name.to_string(), wire);
        self.num_inputs += 1;
        Ok(wire)
    }

    /// Declares `prefix0 .. prefix{count-1}`.
    pub fn add_inputs(&mut self, prefix: &str, count: usize) -> Result<Vec<WireRef>, BuildError> {
        (0..count)
            .map(|i| self.add_input(&format!("{prefix}{i}")))
            .collect()
    }

    pub fn add_gate(&mut self, kind: GateKind, a: WireRef, b: WireRef) -> Result<WireRef, BuildError> {
        let next = self.names.len();
        for src in [a, b] {
            if src.index() >= next {
                return Err(BuildError::UndefinedWire(src));
            }
        }
        self.gates.push(Gate { kind, a, b });
        self.names.push(None);
        Ok(WireRef::from_index(next))
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn finish<S: AsRef<str>>(mut self, outputs: &[(S, WireRef)]) -> Result<Netlist, BuildError> {
        let mut out_wires = Vec::with_capacity(outputs.len());
        for (name, wire) in outputs {
            let name = name.as_ref();
            if wire.index() >= self.names.len() {
                return Err(BuildError::UndefinedWire(*wire));
            }
            if !is_valid_name(name) {
                return Err(BuildError::InvalidName(name.to_string()));
            }
            match &self.names[wire.index()] {
                Some(existing) if existing == name => {}
                Some(existing) => {
                    return Err(BuildError::OutputAlias {
                        name: name.to_string(),
                        existing: existing.clone(),
                    })
                }
                None => {
                    if self.name_index.contains_key(name) {
                        return Err(BuildError::DuplicateName(name.to_string()));
                    }
                    self.names[wire.index()] = Some(name.to_string());
                    self.name_index.insert(name.to_string(), *wire);
                }
            }
            out_wires.push(*wire);
        }
        let num_inputs = self.num_inputs;
        let mut names = Vec::with_capacity(self.names.len());
        for (index, name) in self.names.into_iter().enumerate() {
            let name = match name {
                Some(n) => n,
                None => {
                    let n = format!("g{}", index - num_inputs);
                    if self.name_index.contains_key(&n) {
                        return Err(BuildError::DuplicateName(n));
                    }
                    n
                }
            };
            names.push(name);
        }
        Ok(Netlist {
            names,
            num_inputs,
            gates: self.gates,
            outputs: out_wires,
        })
    }
}

/// Finished, immutable netlist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Netlist {
    names: Vec<String>,
    num_inputs: usize,
    gates: Vec<Gate>,
    outputs: Vec<WireRef>,
}

impl Netlist {
    pub fn num_inputs(&self) -> usize {
        self.num_inputs
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn num_wires(&self) -> usize {
        self.names.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[WireRef] {
        &self.outputs
    }

    pub fn wire_name(&self, wire: WireRef) -> &str {
        &self.names[wire.index()]
    }

    pub fn input_names(&self) -> impl Iterator<Item = &str> {
        self.names[..self.num_inputs].iter().map(String::as_str)
    }

    pub fn output_names(&self) -> impl Iterator<Item = &str> {
        self.outputs.iter().map(|w| self.names[w.index()].as_str())
    }

    /// Name and record of gate `index` (0-based among gates).
    pub fn gate(&self, index: usize) -> (&str, Gate) {
        (&self.names[self.num_inputs + index], self.gates[index])
    }

    pub fn count_gates(&self) -> usize {
        self.gates.iter().map(|g| g.kind.cost()).sum()
    }

    pub fn histogram(&self) -> BTreeMap<GateKind, usize> {
        let mut hist = BTreeMap::new();
        for g in &self.gates {
            *hist.entry(g.kind).or_insert(0) += 1;
        }
        hist
    }

    /// Copy of this netlist with one gate's function replaced.
    pub fn with_gate_kind(&self, index: usize, kind: GateKind) -> Netlist {
        let mut copy = self.clone();
        copy.gates[index].kind = kind;
        copy
    }

    /// Structural check. Netlists from the builder always pass; the check
    /// exists for imported data and as a regression guard.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut seen: HashMap<&str, usize> = HashMap::new();
        for (index, name) in self.names.iter().enumerate() {
            if !is_valid_name(name) {
                violations.push(Violation::InvalidName { name: name.clone() });
            }
            if seen.insert(name.as_str(), index).is_some() {
                violations.push(Violation::DuplicateName { name: name.clone() });
            }
        }
        for (i, g) in self.gates.iter().enumerate() {
            let own = self.num_inputs + i;
            for src in [g.a, g.b] {
                if src.index() >= own {
                    violations.push(Violation::SourceOutOfOrder {
                        gate: self.names[own].clone(),
                        source: self.names.get(src.index()).cloned().unwrap_or_else(|| src.to_string()),
                    });
                }
            }
        }
        for out in &self.outputs {
            if out.index() >= self.names.len() {
                violations.push(Violation::UndefinedOutput { name: out.to_string() });
            }
        }
        ValidationReport {
            violations,
            histogram: self.histogram(),
        }
    }

    /// Scalar evaluation of one assignment, outputs in declaration order.
    pub fn evaluate(&self, assignment: &[bool]) -> Result<Vec<bool>, EvalError> {
        let words: Vec<u64> = assignment.iter().map(|&b| b as u64).collect();
        let out = Simulator::new(self).run(&words)?;
        Ok(out.iter().map(|w| w & 1 == 1).collect())
    }

    /// Evaluates 64 assignments at once, one per bit lane.
    pub fn eval_words(&self, inputs: &[u64]) -> Result<Vec<u64>, EvalError> {
        Simulator::new(self).run(inputs)
    }
}

/// Word-parallel evaluator with a reusable value buffer.
pub struct Simulator<'a> {
    netlist: &'a Netlist,
    values: Vec<u64>,
}

impl<'a> Simulator<'a> {
    pub fn new(netlist: &'a Netlist) -> Self {
        Simulator {
            netlist,
            values: vec![0; netlist.num_wires()],
        }
    }

    pub fn run(&mut self, inputs: &[u64]) -> Result<Vec<u64>, EvalError> {
        self.run_in_place(inputs)?;
        Ok(self.netlist.outputs.iter().map(|w| self.values[w.index()]).collect())
    }

    /// Like [`Simulator::run`] but leaves the outputs readable via
    /// [`Simulator::output`] without allocating.
    pub fn run_in_place(&mut self, inputs: &[u64]) -> Result<(), EvalError> {
        let n = self.netlist.num_inputs;
        if inputs.len() != n {
            return Err(EvalError::AssignmentSize {
                expected: n,
                got: inputs.len(),
            });
        }
        self.values[..n].copy_from_slice(inputs);
        for (i, g) in self.netlist.gates.iter().enumerate() {
            let v = g.kind.eval_word(self.values[g.a.index()], self.values[g.b.index()]);
            self.values[n + i] = v;
        }
        Ok(())
    }

    pub fn output(&self, k: usize) -> u64 {
        self.values[self.netlist.outputs[k].index()]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    UnknownKind { line: usize, token: String },
    SourceOutOfOrder { gate: String, source: String },
    UndefinedSource { gate: String, source: String },
    DuplicateName { name: String },
    InvalidName { name: String },
    UndefinedOutput { name: String },
    NoInputs,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::UnknownKind { line, token } => {
                write!(f, "line {line}: unknown gate kind `{token}`")
            }
            Violation::SourceOutOfOrder { gate, source } => {
                write!(f, "gate `{gate}`: source out of order `{source}`")
            }
            Violation::UndefinedSource { gate, source } => {
                write!(f, "gate `{gate}`: undefined source `{source}`")
            }
            Violation::DuplicateName { name } => write!(f, "duplicate name `{name}`"),
            Violation::InvalidName { name } => write!(f, "invalid name `{name}`"),
            Violation::UndefinedOutput { name } => write!(f, "undefined output `{name}`"),
            Violation::NoInputs => write!(f, "netlist declares no inputs"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub histogram: BTreeMap<GateKind, usize>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn gate_count(&self) -> usize {
        self.histogram.values().sum()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid ({} gates)", self.gate_count());
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}
