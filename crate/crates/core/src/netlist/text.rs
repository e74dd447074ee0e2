//! `MULNET v1` text serialization.
//!
//! ```text
//! MULNET v1
//! inputs a0 a1 b0 b1
//! gate g0 AND a0 b0
//! outputs g0
//! ```
//!
//! `#` starts a comment, tokens are separated by runs of spaces or tabs,
//! every line ends in `\n`. `inputs` and `outputs` lines are cumulative.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use super::{is_valid_name, Gate, GateKind, Netlist, ValidationReport, Violation, WireRef};

const HEADER: &str = "MULNET v1";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ImportError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("invalid netlist:\n{0}")]
    Invalid(ValidationReport),
}

fn syntax(line: usize, message: impl Into<String>) -> ImportError {
    ImportError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn export_text(netlist: &Netlist) -> String {
    let mut out = String::with_capacity(32 * (netlist.num_wires() + 2));
    out.push_str(HEADER);
    out.push('\n');
    if netlist.num_inputs() > 0 {
        out.push_str("inputs");
        for name in netlist.input_names() {
            out.push(' ');
            out.push_str(name);
        }
        out.push('\n');
    }
    for i in 0..netlist.gates().len() {
        let (name, g) = netlist.gate(i);
        let _ = writeln!(
            out,
            "gate {name} {} {} {}",
            g.kind,
            netlist.wire_name(g.a),
            netlist.wire_name(g.b)
        );
    }
    if netlist.num_outputs() > 0 {
        out.push_str("outputs");
        for name in netlist.output_names() {
            out.push(' ');
            out.push_str(name);
        }
        out.push('\n');
    }
    out
}

struct RawGate<'t> {
    line: usize,
    name: &'t str,
    kind: &'t str,
    srcs: [&'t str; 2],
}

#[derive(PartialEq, PartialOrd)]
enum Section {
    Inputs,
    Gates,
    Outputs,
}

pub fn import_text(text: &str) -> Result<Netlist, ImportError> {
    if !text.ends_with('\n') {
        return Err(syntax(text.lines().count().max(1), "missing final newline"));
    }
    let mut inputs: Vec<(usize, &str)> = Vec::new();
    let mut gates: Vec<RawGate> = Vec::new();
    let mut outputs: Vec<(usize, &str)> = Vec::new();
    let mut section = Section::Inputs;
    let mut saw_header = false;

    for (idx, raw_line) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let content = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let tokens: Vec<&str> = content.split([' ', '\t']).filter(|t| !t.is_empty()).collect();
        if line_no == 1 {
            if tokens != ["MULNET", "v1"] {
                return Err(syntax(1, format!("expected header `{HEADER}`")));
            }
            saw_header = true;
            continue;
        }
        let Some((&keyword, rest)) = tokens.split_first() else {
            continue;
        };
        for name in rest {
            if keyword != "gate" && !is_valid_name(name) {
                return Err(syntax(line_no, format!("invalid name `{name}`")));
            }
        }
        match keyword {
            "inputs" => {
                if section > Section::Inputs {
                    return Err(syntax(line_no, "inputs must precede gates and outputs"));
                }
                if rest.is_empty() {
                    return Err(syntax(line_no, "`inputs` needs at least one name"));
                }
                inputs.extend(rest.iter().map(|n| (line_no, *n)));
            }
            "gate" => {
                if section > Section::Gates {
                    return Err(syntax(line_no, "gates must precede outputs"));
                }
                section = Section::Gates;
                if rest.len() != 4 {
                    return Err(syntax(
                        line_no,
                        format!("gate takes a name, a kind and 2 sources, found {} tokens", rest.len()),
                    ));
                }
                for t in [rest[0], rest[2], rest[3]] {
                    if !is_valid_name(t) {
                        return Err(syntax(line_no, format!("invalid name `{t}`")));
                    }
                }
                gates.push(RawGate {
                    line: line_no,
                    name: rest[0],
                    kind: rest[1],
                    srcs: [rest[2], rest[3]],
                });
            }
            "outputs" => {
                section = Section::Outputs;
                if rest.is_empty() {
                    return Err(syntax(line_no, "`outputs` needs at least one name"));
                }
                outputs.extend(rest.iter().map(|n| (line_no, *n)));
            }
            other => return Err(syntax(line_no, format!("unknown statement `{other}`"))),
        }
    }
    debug_assert!(saw_header);

    resolve(inputs, gates, outputs)
}

fn resolve(
    inputs: Vec<(usize, &str)>,
    gates: Vec<RawGate>,
    outputs: Vec<(usize, &str)>,
) -> Result<Netlist, ImportError> {
    let mut violations = Vec::new();
    let mut index: HashMap<&str, usize> = HashMap::new();
    let mut names: Vec<String> = Vec::with_capacity(inputs.len() + gates.len());

    if inputs.is_empty() {
        violations.push(Violation::NoInputs);
    }
    let all_names = inputs.iter().map(|(_, n)| *n).chain(gates.iter().map(|g| g.name));
    for (wire, name) in all_names.enumerate() {
        if index.insert(name, wire).is_some() {
            violations.push(Violation::DuplicateName { name: name.to_string() });
        }
        names.push(name.to_string());
    }

    let num_inputs = inputs.len();
    let mut resolved = Vec::with_capacity(gates.len());
    for (i, g) in gates.iter().enumerate() {
        let own = num_inputs + i;
        let kind = GateKind::from_token(g.kind);
        if kind.is_none() {
            violations.push(Violation::UnknownKind {
                line: g.line,
                token: g.kind.to_string(),
            });
        }
        let mut srcs = [WireRef::from_index(0); 2];
        for (slot, src) in srcs.iter_mut().zip(g.srcs) {
            match index.get(src) {
                Some(&w) if w < own => *slot = WireRef::from_index(w),
                Some(_) => violations.push(Violation::SourceOutOfOrder {
                    gate: g.name.to_string(),
                    source: src.to_string(),
                }),
                None => violations.push(Violation::UndefinedSource {
                    gate: g.name.to_string(),
                    source: src.to_string(),
                }),
            }
        }
        if let Some(kind) = kind {
            resolved.push(Gate {
                kind,
                a: srcs[0],
                b: srcs[1],
            });
        }
    }

    let mut out_wires = Vec::with_capacity(outputs.len());
    for (_, name) in &outputs {
        match index.get(name) {
            Some(&w) => out_wires.push(WireRef::from_index(w)),
            None => violations.push(Violation::UndefinedOutput { name: name.to_string() }),
        }
    }

    if !violations.is_empty() {
        let mut histogram = std::collections::BTreeMap::new();
        for g in &resolved {
            *histogram.entry(g.kind).or_insert(0) += 1;
        }
        return Err(ImportError::Invalid(ValidationReport { violations, histogram }));
    }
    let netlist = Netlist {
        names,
        num_inputs,
        gates: resolved,
        outputs: out_wires,
    };
    let report = netlist.validate();
    if !report.is_valid() {
        return Err(ImportError::Invalid(report));
    }
    Ok(netlist)
}
