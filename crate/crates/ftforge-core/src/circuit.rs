//! Circuits, hardware constraints, and the discrete action space.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::gate::{Gate, GateKind};
use crate::tableau::{CanonicalTableau, StabilizerTableau};
use crate::{Error, Result};

/// An ordered gate list over `n_data + n_flag` qubits. Flag qubits are
/// indexed last and start in `|0>` like everything else; their Z-basis
/// measurement is implicit at circuit end.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Circuit {
    pub n_data: usize,
    pub n_flag: usize,
    pub gates: Vec<Gate>,
}

impl Circuit {
    pub fn new(n_data: usize, n_flag: usize) -> Self {
        Circuit { n_data, n_flag, gates: Vec::new() }
    }

    pub fn n_total(&self) -> usize {
        self.n_data + self.n_flag
    }

    pub fn push(&mut self, g: Gate) -> Result<()> {
        g.check(self.n_total())?;
        self.gates.push(g);
        Ok(())
    }

    pub fn two_qubit_gate_count(&self) -> usize {
        self.gates.iter().filter(|g| g.kind.arity() == 2).count()
    }

    /// Simulate from `|0>^n`: fold each gate into the tableau, then canonicalize.
    pub fn simulate(&self) -> Result<CanonicalTableau> {
        let mut t = StabilizerTableau::zero_state(self.n_total())?;
        for g in &self.gates {
            t.apply_gate(g)?;
        }
        t.canonicalize()
    }

    /// Parse the exchange format: a required `qubits <n_data> <n_flag>`
    /// header, then one gate per line (`<KIND> <q> [<q2>]`), with `#`
    /// comments and blank lines ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut circ: Option<Circuit> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = idx + 1;
            let err = |msg: String| Error::Parse { line: lineno, msg };
            let mut parts = line.split_whitespace();
            let head = parts.next().unwrap();
            if circ.is_none() {
                if head != "qubits" {
                    return Err(err(String::from("expected header 'qubits <n_data> <n_flag>'")));
                }
                let n_data: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(String::from("bad n_data")))?;
                let n_flag: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(String::from("bad n_flag")))?;
                if parts.next().is_some() {
                    return Err(err(String::from("trailing tokens after header")));
                }
                if n_data == 0 || n_data + n_flag > 64 {
                    return Err(err(String::from("qubit count out of range")));
                }
                circ = Some(Circuit::new(n_data, n_flag));
                continue;
            }
            let c = circ.as_mut().unwrap();
            let kind = GateKind::parse(head)
                .map_err(|_| err(format!("unknown gate mnemonic '{head}'")))?;
            let q1: usize = parts
                .next()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| err(String::from("missing qubit index")))?;
            let gate = if kind.arity() == 2 {
                let q2: usize = parts
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| err(String::from("missing second qubit index")))?;
                Gate::two(kind, q1, q2)
            } else {
                Gate::one(kind, q1)
            };
            if parts.next().is_some() {
                return Err(err(String::from("trailing tokens after gate")));
            }
            gate.check(c.n_total()).map_err(|e| err(format!("{e}")))?;
            c.gates.push(gate);
        }
        circ.ok_or(Error::Parse { line: 0, msg: String::from("missing 'qubits' header") })
    }

    pub fn serialize(&self) -> String {
        let mut out = format!("qubits {} {}\n", self.n_data, self.n_flag);
        for g in &self.gates {
            out.push_str(&format!("{g}\n"));
        }
        out
    }
}

/// An undirected coupling graph on `n_qubits`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConnectivityGraph {
    n_qubits: usize,
    /// Normalized (lo, hi) pairs, sorted, deduplicated.
    edges: Vec<(usize, usize)>,
}

impl ConnectivityGraph {
    pub fn new(n_qubits: usize, raw_edges: &[(usize, usize)]) -> Result<Self> {
        let mut edges = Vec::with_capacity(raw_edges.len());
        for &(a, b) in raw_edges {
            if a == b {
                return Err(Error::QubitOutOfRange { qubit: a, n: n_qubits });
            }
            if a >= n_qubits || b >= n_qubits {
                return Err(Error::QubitOutOfRange { qubit: a.max(b), n: n_qubits });
            }
            edges.push((a.min(b), a.max(b)));
        }
        edges.sort_unstable();
        edges.dedup();
        Ok(ConnectivityGraph { n_qubits, edges })
    }

    pub fn all_to_all(n_qubits: usize) -> Self {
        let mut edges = Vec::new();
        for a in 0..n_qubits {
            for b in a + 1..n_qubits {
                edges.push((a, b));
            }
        }
        ConnectivityGraph { n_qubits, edges }
    }

    /// R x C grid with nearest-neighbor edges, row-major qubit numbering.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let q = r * cols + c;
                if c + 1 < cols {
                    edges.push((q, q + 1));
                }
                if r + 1 < rows {
                    edges.push((q, q + cols));
                }
            }
        }
        ConnectivityGraph { n_qubits: rows * cols, edges }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn is_subgraph_of(&self, other: &ConnectivityGraph) -> bool {
        self.n_qubits == other.n_qubits
            && self.edges.iter().all(|e| other.edges.binary_search(e).is_ok())
    }
}

/// The ordered list of gates the policy can choose from. Ordering is
/// lexicographic by gate kind (enum order) then qubit indices, so a given
/// (gate set, connectivity, restriction) always enumerates identically.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ActionTable {
    actions: Vec<Gate>,
}

/// Extra constraints on the action space.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct ActionRestriction {
    /// Drop two-qubit gates whose qubits are both data qubits (< n_data).
    pub no_data_data: bool,
    pub n_data: usize,
}

/// Enumerate the action space: one action per (1q kind, qubit), plus per
/// edge two directed CX orientations and/or one CZ.
pub fn enumerate_actions(
    gate_set: &[GateKind],
    connectivity: &ConnectivityGraph,
    restriction: ActionRestriction,
) -> Result<ActionTable> {
    let n = connectivity.n_qubits();
    let mut kinds: Vec<GateKind> = gate_set.to_vec();
    kinds.sort_unstable();
    kinds.dedup();
    let mut actions = Vec::new();
    for &kind in &kinds {
        match kind.arity() {
            1 => {
                for q in 0..n {
                    actions.push(Gate::one(kind, q));
                }
            }
            _ => {
                for &(a, b) in connectivity.edges() {
                    if restriction.no_data_data && a < restriction.n_data && b < restriction.n_data
                    {
                        continue;
                    }
                    if kind == GateKind::Cx {
                        actions.push(Gate::two(kind, a, b));
                        actions.push(Gate::two(kind, b, a));
                    } else {
                        actions.push(Gate::two(kind, a, b));
                    }
                }
            }
        }
    }
    if actions.is_empty() {
        return Err(Error::BadTask { msg: String::from("empty action set") });
    }
    Ok(ActionTable { actions })
}

impl ActionTable {
    pub fn from_gates(actions: Vec<Gate>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::BadTask { msg: String::from("empty action set") });
        }
        Ok(ActionTable { actions })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn gate(&self, idx: usize) -> Option<&Gate> {
        self.actions.get(idx)
    }

    pub fn gates(&self) -> &[Gate] {
        &self.actions
    }

    pub fn index_of(&self, g: &Gate) -> Option<usize> {
        self.actions.iter().position(|a| a == g)
    }

    /// Stable text serialization (one gate per line), used for hashing and
    /// for binding saved agents to their action space.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for g in &self.actions {
            out.push_str(&format!("{g}\n"));
        }
        out
    }
}
