//! OpenQASM 2.0 subset reader.
//!
//! Accepted statements: the version header, `include`, `qreg`/`creg`
//! declarations, one- and two-qubit gate applications (with optional
//! parameter lists and whole-register broadcast), and `barrier`, `measure`,
//! `reset` which are tallied but not scheduled. `gate`/`opaque` definitions
//! are skipped; applications are classified purely by operand count.

use thiserror::Error;

use crate::circuit::{Circuit, CircuitError, Qubit};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum QasmError {
    #[error("line {line}: syntax error: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unsupported gate `{name}`: {reason}")]
    UnsupportedGate {
        line: usize,
        name: String,
        reason: String,
    },
    #[error("line {line}: qubit {register}[{index}] out of range (size {size})")]
    Index {
        line: usize,
        register: String,
        index: usize,
        size: usize,
    },
}

struct Register {
    name: String,
    offset: usize,
    size: usize,
}

enum Operand {
    Single(Qubit),
    Whole(Vec<Qubit>),
}

struct Statement<'a> {
    text: &'a str,
    line: usize,
}

/// Parses a program into a [`Circuit`].
pub fn parse_qasm(source: &str) -> Result<Circuit, QasmError> {
    let cleaned = strip_comments(source);
    let mut qregs: Vec<Register> = Vec::new();
    let mut cregs: Vec<String> = Vec::new();
    let mut pending: Vec<(String, Vec<Vec<Qubit>>, usize)> = Vec::new();
    let mut circuit = Circuit::new(0);

    for stmt in split_statements(&cleaned)? {
        let text = stmt.text.trim();
        let line = stmt.line;
        if text.is_empty() {
            continue;
        }
        let (head, rest) = split_head(text);
        match head {
            "OPENQASM" => {
                if rest.trim() != "2.0" {
                    return Err(syntax(line, format!("unsupported version `{}`", rest.trim())));
                }
            }
            "include" => {}
            "qreg" | "creg" => {
                let (name, size) = parse_decl(rest, line)?;
                if qregs.iter().any(|r| r.name == name) || cregs.contains(&name) {
                    return Err(syntax(line, format!("register `{name}` declared twice")));
                }
                if head == "qreg" {
                    let offset = qregs.iter().map(|r| r.size).sum();
                    qregs.push(Register { name, offset, size });
                } else {
                    cregs.push(name);
                }
            }
            "barrier" => circuit.ignored.barriers += 1,
            "measure" => circuit.ignored.measurements += 1,
            "reset" => circuit.ignored.resets += 1,
            "if" => {
                return Err(QasmError::UnsupportedGate {
                    line,
                    name: "if".into(),
                    reason: "classical control is not supported".into(),
                })
            }
            "gate" | "opaque" => {}
            _ => {
                let (name, args) = split_application(text, line)?;
                let operands = args
                    .iter()
                    .map(|a| resolve_operand(a, &qregs, line))
                    .collect::<Result<Vec<_>, _>>()?;
                if operands.len() > 2 {
                    return Err(QasmError::UnsupportedGate {
                        line,
                        name,
                        reason: format!("{} operands; only 1- and 2-qubit gates are supported", operands.len()),
                    });
                }
                if operands.is_empty() {
                    return Err(syntax(line, format!("gate `{name}` has no operands")));
                }
                pending.push((name, broadcast(operands, line)?, line));
            }
        }
    }

    circuit.num_qubits = qregs.iter().map(|r| r.size).sum();
    for (name, applications, line) in pending {
        for qubits in applications {
            circuit.push(&name, &qubits).map_err(|e| match e {
                CircuitError::DuplicateOperand { qubit, .. } => {
                    syntax(line, format!("gate `{name}` repeats qubit {qubit}"))
                }
                other => syntax(line, other.to_string()),
            })?;
        }
    }
    Ok(circuit)
}

fn syntax(line: usize, message: String) -> QasmError {
    QasmError::Syntax { line, message }
}

fn strip_comments(source: &str) -> String {
    source
        .lines()
        .map(|l| match l.find("//") {
            Some(idx) => &l[..idx],
            None => l,
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Splits on `;`, skipping `{ ... }` bodies of gate definitions.
fn split_statements(src: &str) -> Result<Vec<Statement<'_>>, QasmError> {
    let mut out = Vec::new();
    let mut start = 0;
    let mut line = 1;
    // Line of the first non-blank character of the current statement.
    let mut start_line: Option<usize> = None;
    let mut depth = 0usize;
    for (idx, ch) in src.char_indices() {
        if depth == 0 && start_line.is_none() && !ch.is_whitespace() {
            start_line = Some(line);
        }
        match ch {
            '\n' => line += 1,
            '{' => {
                if depth == 0 {
                    out.push(Statement {
                        text: &src[start..idx],
                        line: start_line.unwrap_or(line),
                    });
                }
                depth += 1;
            }
            '}' => {
                if depth == 0 {
                    return Err(syntax(line, "unbalanced `}`".into()));
                }
                depth -= 1;
                if depth == 0 {
                    start = idx + 1;
                    start_line = None;
                }
            }
            ';' if depth == 0 => {
                out.push(Statement {
                    text: &src[start..idx],
                    line: start_line.unwrap_or(line),
                });
                start = idx + 1;
                start_line = None;
            }
            _ => {}
        }
    }
    if depth != 0 {
        return Err(syntax(line, "unterminated `{` block".into()));
    }
    if !src[start..].trim().is_empty() {
        return Err(syntax(
            start_line.unwrap_or(line),
            "missing `;` at end of statement".into(),
        ));
    }
    Ok(out)
}

fn split_head(text: &str) -> (&str, &str) {
    let end = text
        .find(|c: char| c.is_whitespace() || c == '(')
        .unwrap_or(text.len());
    (&text[..end], &text[end..])
}

fn parse_decl(rest: &str, line: usize) -> Result<(String, usize), QasmError> {
    let rest = rest.trim();
    let open = rest
        .find('[')
        .ok_or_else(|| syntax(line, format!("malformed declaration `{rest}`")))?;
    let close = rest
        .find(']')
        .filter(|&c| c > open && rest[c + 1..].trim().is_empty())
        .ok_or_else(|| syntax(line, format!("malformed declaration `{rest}`")))?;
    let name = rest[..open].trim();
    if !is_identifier(name) {
        return Err(syntax(line, format!("invalid register name `{name}`")));
    }
    let size = rest[open + 1..close]
        .trim()
        .parse::<usize>()
        .map_err(|_| syntax(line, format!("invalid register size in `{rest}`")))?;
    if size == 0 {
        return Err(syntax(line, format!("register `{name}` has size 0")));
    }
    Ok((name.to_string(), size))
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Returns the gate name and its raw operand strings.
fn split_application(text: &str, line: usize) -> Result<(String, Vec<&str>), QasmError> {
    let (name, mut rest) = split_head(text);
    if !is_identifier(name) {
        return Err(syntax(line, format!("unexpected token `{name}`")));
    }
    rest = rest.trim_start();
    if rest.starts_with('(') {
        let mut depth = 0usize;
        let mut end = None;
        for (idx, ch) in rest.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        end = Some(idx);
                        break;
                    }
                }
                _ => {}
            }
        }
        let end = end.ok_or_else(|| syntax(line, format!("unclosed parameter list in `{text}`")))?;
        rest = &rest[end + 1..];
    }
    let args: Vec<&str> = rest.split(',').map(str::trim).collect();
    if args.iter().any(|a| a.is_empty()) {
        if args.len() == 1 {
            return Ok((name.to_string(), Vec::new()));
        }
        return Err(syntax(line, format!("empty operand in `{text}`")));
    }
    Ok((name.to_string(), args))
}

fn resolve_operand(arg: &str, qregs: &[Register], line: usize) -> Result<Operand, QasmError> {
    let (name, index) = match arg.find('[') {
        Some(open) => {
            let close = arg
                .rfind(']')
                .filter(|&c| c > open && c == arg.len() - 1)
                .ok_or_else(|| syntax(line, format!("malformed operand `{arg}`")))?;
            let idx = arg[open + 1..close]
                .trim()
                .parse::<usize>()
                .map_err(|_| syntax(line, format!("malformed index in `{arg}`")))?;
            (arg[..open].trim(), Some(idx))
        }
        None => (arg, None),
    };
    let reg = qregs
        .iter()
        .find(|r| r.name == name)
        .ok_or_else(|| syntax(line, format!("unknown quantum register `{name}`")))?;
    match index {
        Some(i) if i >= reg.size => Err(QasmError::Index {
            line,
            register: reg.name.clone(),
            index: i,
            size: reg.size,
        }),
        Some(i) => Ok(Operand::Single(reg.offset + i)),
        None => Ok(Operand::Whole((reg.offset..reg.offset + reg.size).collect())),
    }
}

/// Expands whole-register operands into per-qubit applications.
fn broadcast(operands: Vec<Operand>, line: usize) -> Result<Vec<Vec<Qubit>>, QasmError> {
    let width = operands
        .iter()
        .filter_map(|o| match o {
            Operand::Whole(v) => Some(v.len()),
            Operand::Single(_) => None,
        })
        .try_fold(None, |acc: Option<usize>, len| match acc {
            Some(w) if w != len => Err(syntax(line, "register size mismatch in broadcast".into())),
            _ => Ok(Some(len)),
        })?;
    let Some(width) = width else {
        return Ok(vec![operands
            .iter()
            .map(|o| match o {
                Operand::Single(q) => *q,
                Operand::Whole(_) => unreachable!(),
            })
            .collect()]);
    };
    Ok((0..width)
        .map(|i| {
            operands
                .iter()
                .map(|o| match o {
                    Operand::Single(q) => *q,
                    Operand::Whole(v) => v[i],
                })
                .collect()
        })
        .collect())
}
