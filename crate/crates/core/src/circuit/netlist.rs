//! Text netlists of 2-input NOR gates.
//!
//! ```text
//! inputs 2
//! # x1 OR x2
//! g1 = NOR(x1, x2)
//! g2 = NOR(g1, g1)
//! ```
//!
//! Inputs are `x1..xn`, gates are numbered `g1, g2, ...` in order and may only
//! reference inputs or earlier gates. The last gate is the output.

use std::fmt;

/// Operand of a gate. Indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operand {
    Input(usize),
    Gate(usize),
}

impl fmt::Display for Operand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Operand::Input(i) => write!(f, "x{}", i + 1),
            Operand::Gate(j) => write!(f, "g{}", j + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NorCircuit {
    inputs: usize,
    gates: Vec<[Operand; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NetlistErrorKind {
    #[error("missing `inputs <n>` header")]
    MissingHeader,
    #[error("malformed line: {0}")]
    Malformed(String),
    #[error("forward reference to {0}")]
    ForwardReference(String),
    #[error("unknown identifier {0}")]
    UnknownIdentifier(String),
    #[error("circuit has no gates")]
    NoGates,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {kind}")]
pub struct NetlistError {
    /// 1-based line number; 0 when the problem is not tied to a line.
    pub line: usize,
    pub kind: NetlistErrorKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
#[error("circuit has {expected} inputs, got {got} bits")]
pub struct InputLengthError {
    pub expected: usize,
    pub got: usize,
}

impl NorCircuit {
    pub fn new(inputs: usize, gates: Vec<[Operand; 2]>) -> Result<Self, NetlistError> {
        let err = |line, kind| NetlistError { line, kind };
        if gates.is_empty() {
            return Err(err(0, NetlistErrorKind::NoGates));
        }
        for (k, ops) in gates.iter().enumerate() {
            for op in ops {
                match *op {
                    Operand::Input(i) if i >= inputs => {
                        return Err(err(0, NetlistErrorKind::UnknownIdentifier(op.to_string())))
                    }
                    Operand::Gate(j) if j >= k => {
                        return Err(err(0, NetlistErrorKind::ForwardReference(op.to_string())))
                    }
                    _ => {}
                }
            }
        }
        Ok(NorCircuit { inputs, gates })
    }

    pub fn inputs(&self) -> usize {
        self.inputs
    }

    pub fn gates(&self) -> &[[Operand; 2]] {
        &self.gates
    }

    pub fn gate_count(&self) -> usize {
        self.gates.len()
    }

    /// Output of every gate, in order.
    pub fn gate_values(&self, bits: &[bool]) -> Result<Vec<bool>, InputLengthError> {
        if bits.len() != self.inputs {
            return Err(InputLengthError {
                expected: self.inputs,
                got: bits.len(),
            });
        }
        let mut values: Vec<bool> = Vec::with_capacity(self.gates.len());
        for [a, b] in &self.gates {
            let v = |op: &Operand| match *op {
                Operand::Input(i) => bits[i],
                Operand::Gate(j) => values[j],
            };
            let out = !(v(a) || v(b));
            values.push(out);
        }
        Ok(values)
    }

    pub fn eval(&self, bits: &[bool]) -> Result<bool, InputLengthError> {
        Ok(*self.gate_values(bits)?.last().expect("at least one gate"))
    }
}

impl fmt::Display for NorCircuit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "inputs {}", self.inputs)?;
        for (k, [a, b]) in self.gates.iter().enumerate() {
            writeln!(f, "g{} = NOR({a}, {b})", k + 1)?;
        }
        Ok(())
    }
}

fn parse_index(token: &str, prefix: char) -> Option<usize> {
    let rest = token.strip_prefix(prefix)?;
    if rest.is_empty() || !rest.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    rest.parse().ok()
}

pub fn parse_netlist(text: &str) -> Result<NorCircuit, NetlistError> {
    let mut inputs: Option<usize> = None;
    let mut gates: Vec<[Operand; 2]> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |kind| NetlistError {
            line: line_no,
            kind,
        };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some(n) = inputs else {
            let n = line
                .strip_prefix("inputs")
                .map(str::trim)
                .and_then(|s| s.parse::<usize>().ok())
                .filter(|&n| n >= 1)
                .ok_or_else(|| err(NetlistErrorKind::MissingHeader))?;
            inputs = Some(n);
            continue;
        };

        let malformed = || err(NetlistErrorKind::Malformed(line.to_string()));
        let (lhs, rhs) = line.split_once('=').ok_or_else(malformed)?;
        let k = parse_index(lhs.trim(), 'g').ok_or_else(malformed)?;
        if k != gates.len() + 1 {
            return Err(err(NetlistErrorKind::Malformed(format!(
                "expected g{}, found g{k}",
                gates.len() + 1
            ))));
        }
        let body = rhs.trim();
        let args = body
            .strip_prefix("NOR")
            .map(str::trim_start)
            .and_then(|s| s.strip_prefix('('))
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(malformed)?;
        let parts: Vec<&str> = args.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(malformed());
        }
        let mut ops = [Operand::Input(0); 2];
        for (slot, token) in ops.iter_mut().zip(&parts) {
            *slot = if let Some(i) = parse_index(token, 'x') {
                if i == 0 || i > n {
                    return Err(err(NetlistErrorKind::UnknownIdentifier(token.to_string())));
                }
                Operand::Input(i - 1)
            } else if let Some(j) = parse_index(token, 'g') {
                if j == 0 {
                    return Err(err(NetlistErrorKind::UnknownIdentifier(token.to_string())));
                }
                if j >= k {
                    return Err(err(NetlistErrorKind::ForwardReference(token.to_string())));
                }
                Operand::Gate(j - 1)
            } else {
                return Err(err(NetlistErrorKind::UnknownIdentifier(token.to_string())));
            };
        }
        gates.push(ops);
    }
    let inputs = inputs.ok_or(NetlistError {
        line: 0,
        kind: NetlistErrorKind::MissingHeader,
    })?;
    NorCircuit::new(inputs, gates)
}
