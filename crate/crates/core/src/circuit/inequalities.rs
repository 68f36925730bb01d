use std::fmt;

use super::netlist::{NorCircuit, Operand};

/// Which circuit a gate column belongs to in a compiled market.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CircuitTag {
    Output,
    Condition,
}

/// Role of a column. All indices are 0-based; names print 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarRole {
    Input(usize),
    Gate {
        circuit: CircuitTag,
        index: usize,
    },
    /// One of the two always-one dummy columns.
    Dummy(usize),
    /// `u`, forced to one.
    Unit,
    /// `s_ij`, slack soaking up the excess of inequality `i`.
    Slack {
        row: usize,
        index: usize,
    },
    /// `t_ij`, slack of the ordering constraint `s_ij >= s_i,j+1`.
    Order {
        row: usize,
        index: usize,
    },
}

impl fmt::Display for VarRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarRole::Input(i) => write!(f, "x{}", i + 1),
            VarRole::Gate {
                circuit: CircuitTag::Output,
                index,
            } => write!(f, "g{}", index + 1),
            VarRole::Gate {
                circuit: CircuitTag::Condition,
                index,
            } => write!(f, "cg{}", index + 1),
            VarRole::Dummy(i) => write!(f, "d{}", i + 1),
            VarRole::Unit => write!(f, "u"),
            VarRole::Slack { row, index } => write!(f, "s{}_{}", row + 1, index + 1),
            VarRole::Order { row, index } => write!(f, "t{}_{}", row + 1, index + 1),
        }
    }
}

/// `A x > 0` with target `c`, and the role of each column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InequalitySystem {
    pub rows: Vec<Vec<i8>>,
    pub target: Vec<i8>,
    pub variables: Vec<VarRole>,
}

impl InequalitySystem {
    pub fn columns(&self) -> usize {
        self.variables.len()
    }
}

/// Appends the three NOR rows of every gate of `circuit`.
///
/// For gate `g = NOR(a, b)` with dummies `d1, d2` (both forced to one):
/// `-a - g + d1 + d2 > 0`, `-b - g + d1 + d2 > 0`, `a + b + g > 0`.
pub(crate) fn push_gate_rows(
    circuit: &NorCircuit,
    columns: usize,
    gate_col: impl Fn(usize) -> usize,
    dummies: [usize; 2],
    rows: &mut Vec<Vec<i8>>,
) {
    let col = |op: &Operand| match *op {
        Operand::Input(i) => i,
        Operand::Gate(j) => gate_col(j),
    };
    for (k, [a, b]) in circuit.gates().iter().enumerate() {
        let g = gate_col(k);
        let (a, b) = (col(a), col(b));
        for operand in [a, b] {
            let mut r = vec![0i8; columns];
            r[operand] -= 1;
            r[g] -= 1;
            r[dummies[0]] += 1;
            r[dummies[1]] += 1;
            rows.push(r);
        }
        let mut r = vec![0i8; columns];
        // A gate reading the same wire twice has coefficient 1 on it, not 2.
        r[a] = 1;
        r[b] = 1;
        r[g] = 1;
        rows.push(r);
    }
}

pub(crate) fn dummy_rows(columns: usize, dummies: [usize; 2]) -> [Vec<i8>; 2] {
    dummies.map(|d| {
        let mut r = vec![0i8; columns];
        r[d] = 1;
        r
    })
}

/// Encodes a NOR circuit with `n` inputs and `m` gates as `3m + 2` strict
/// inequalities over `n + m + 2` 0-1 unknowns: inputs, gate outputs, then two
/// dummies. Every input assignment has exactly one 0-1 extension satisfying
/// the system, and the target row selects the output gate.
pub fn circuit_to_inequalities(circuit: &NorCircuit) -> InequalitySystem {
    let n = circuit.inputs();
    let m = circuit.gate_count();
    let columns = n + m + 2;
    let dummies = [n + m, n + m + 1];
    let mut rows: Vec<Vec<i8>> = dummy_rows(columns, dummies).into();
    push_gate_rows(circuit, columns, |k| n + k, dummies, &mut rows);
    let mut target = vec![0i8; columns];
    target[n + m - 1] = 1;
    let variables = (0..n)
        .map(VarRole::Input)
        .chain((0..m).map(|index| VarRole::Gate {
            circuit: CircuitTag::Output,
            index,
        }))
        .chain([VarRole::Dummy(0), VarRole::Dummy(1)])
        .collect();
    InequalitySystem {
        rows,
        target,
        variables,
    }
}

/// The unique 0-1 extension of `bits` for [`circuit_to_inequalities`].
pub fn circuit_extension(circuit: &NorCircuit, bits: &[bool]) -> Option<Vec<bool>> {
    let gates = circuit.gate_values(bits).ok()?;
    Some(
        bits.iter()
            .copied()
            .chain(gates)
            .chain([true, true])
            .collect(),
    )
}
