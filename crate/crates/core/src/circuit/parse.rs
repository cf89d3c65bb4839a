//! Parser for the Stim-compatible circuit subset.
//!
//! One instruction per line, `#` starts a comment. Gate names are
//! case-insensitive. Multi-target lines are split into one operation per
//! gate application, in order.

use thiserror::Error;

use super::{Circuit, CircuitBuilder, CircuitError, OpKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: unknown instruction `{name}`")]
    UnknownInstruction { name: String, line: usize },
    #[error("line {line}: bad measurement record reference")]
    BadRecordReference { line: usize },
    #[error("line {line}: wrong number of targets")]
    ArityError { line: usize },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

fn lookup_gate(name: &str) -> Option<OpKind> {
    let kind = match name.to_ascii_uppercase().as_str() {
        "R" | "RZ" => OpKind::Reset,
        "M" | "MZ" => OpKind::Measure,
        "MR" | "MRZ" => OpKind::MeasureReset,
        "X" => OpKind::PauliX,
        "Y" => OpKind::PauliY,
        "Z" => OpKind::PauliZ,
        "H" => OpKind::Hadamard,
        "S" => OpKind::Phase,
        "CX" | "CNOT" | "ZCX" => OpKind::Cnot,
        "I" => OpKind::Idle,
        "TICK" => OpKind::Tick,
        _ => return None,
    };
    Some(kind)
}

/// Splits `NAME(args)` into name and optional argument text.
fn split_head(head: &str, line: usize) -> Result<(&str, Option<&str>), ParseError> {
    match head.find('(') {
        None => Ok((head, None)),
        Some(open) => {
            let rest = &head[open + 1..];
            let args = rest.strip_suffix(')').ok_or_else(|| ParseError::Syntax {
                line,
                message: "unterminated argument list".into(),
            })?;
            Ok((&head[..open], Some(args)))
        }
    }
}

pub fn parse_circuit(text: &str) -> Result<Circuit, ParseError> {
    let mut b = CircuitBuilder::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut words = content.split_whitespace();
        let head = words.next().expect("non-empty line");
        let (name, args) = split_head(head, line)?;
        let upper = name.to_ascii_uppercase();
        match upper.as_str() {
            "DETECTOR" => {
                if args.is_some() {
                    return Err(ParseError::Syntax {
                        line,
                        message: "detector coordinates are not supported".into(),
                    });
                }
                let records = parse_records(words, b.num_measurements(), line)?;
                b.detector(records);
            }
            "OBSERVABLE_INCLUDE" => {
                let index = args
                    .and_then(|a| a.trim().parse::<usize>().ok())
                    .ok_or_else(|| ParseError::Syntax {
                        line,
                        message: "OBSERVABLE_INCLUDE needs an integer index".into(),
                    })?;
                let records = parse_records(words, b.num_measurements(), line)?;
                b.observable_include(index, &records);
            }
            _ => {
                let kind = lookup_gate(name).ok_or_else(|| ParseError::UnknownInstruction {
                    name: name.to_string(),
                    line,
                })?;
                if args.is_some() {
                    return Err(ParseError::Syntax {
                        line,
                        message: format!("{} takes no arguments", kind.name()),
                    });
                }
                let targets = words
                    .map(|w| {
                        w.parse::<u32>().map_err(|_| ParseError::Syntax {
                            line,
                            message: format!("bad qubit target `{w}`"),
                        })
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                push_gates(&mut b, kind, &targets, line)?;
            }
        }
    }
    b.build().map_err(|e| ParseError::Syntax {
        line: 0,
        message: e.to_string(),
    })
}

fn push_gates(b: &mut CircuitBuilder, kind: OpKind, targets: &[u32], line: usize) -> Result<(), ParseError> {
    if kind == OpKind::Tick {
        if !targets.is_empty() {
            return Err(ParseError::ArityError { line });
        }
        b.tick();
        return Ok(());
    }
    let arity = kind.arity();
    if targets.is_empty() || !targets.len().is_multiple_of(arity) {
        return Err(ParseError::ArityError { line });
    }
    for chunk in targets.chunks(arity) {
        b.push(kind, chunk).map_err(|e| match e {
            CircuitError::RepeatedTarget(_) => ParseError::ArityError { line },
            other => ParseError::Syntax {
                line,
                message: other.to_string(),
            },
        })?;
    }
    Ok(())
}

fn parse_records<'a>(
    words: impl Iterator<Item = &'a str>,
    measured: usize,
    line: usize,
) -> Result<Vec<usize>, ParseError> {
    words
        .map(|w| {
            let k = w
                .strip_prefix("rec[-")
                .and_then(|r| r.strip_suffix(']'))
                .and_then(|r| r.parse::<usize>().ok())
                .ok_or(ParseError::BadRecordReference { line })?;
            if k == 0 || k > measured {
                return Err(ParseError::BadRecordReference { line });
            }
            Ok(measured - k)
        })
        .collect()
}
