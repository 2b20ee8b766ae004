//! Single-fault enumeration, propagation, and fault-tolerance verification.
//!
//! Noise model: after every gate, a depolarizing fault may inject one
//! non-identity Pauli on the gate's qubits (3 generators for one-qubit
//! gates, 15 for two-qubit gates). An injected fault is propagated by
//! conjugation through the remaining gates; the propagated error is
//! classified by its minimum weight over the state stabilizer group and by
//! whether it flips any flag-qubit Z measurement.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::circuit::Circuit;
use crate::codes::{state_stabilizer_group, LogicalTarget, StabilizerGroup};
use crate::gate::Gate;
use crate::pauli::Pauli;
use crate::{Error, Result};

/// A propagated error together with its injection point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaultError {
    pub pauli: Pauli,
    /// (index of the faulty gate, index into that gate's generator list).
    pub origin: (usize, usize),
}

/// The set of all propagated single-fault errors of a circuit prefix,
/// merged on Pauli bits (phase ignored).
#[derive(Clone, Debug)]
pub struct FaultSet {
    pub n_data: usize,
    pub n_flag: usize,
    errors: Vec<FaultError>,
    seen: BTreeSet<(u64, u64)>,
    /// Number of gates processed so far (origin indices count from here).
    gates_processed: usize,
}

/// Classification of a propagated error per the reward definition.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FaultClass {
    /// Weight reducible to 0 but a flag fires: false alarm, contributes 0.
    TrivialFlagged,
    /// Correctable by the code (weight <= t): contributes 1.
    Tolerable,
    /// Uncorrectable but caught by a flag: contributes 1.
    HarmfulFlagged,
    /// Uncorrectable and silent: contributes 0. Forbidden in an FT circuit.
    HarmfulUnflagged,
}

impl FaultClass {
    pub fn contribution(&self) -> u64 {
        match self {
            FaultClass::Tolerable | FaultClass::HarmfulFlagged => 1,
            FaultClass::TrivialFlagged | FaultClass::HarmfulUnflagged => 0,
        }
    }
}

/// The 3 (one-qubit) or 15 (two-qubit) non-identity error generators of a
/// gate, embedded into `n` total qubits.
pub fn error_generators(g: &Gate, n: usize) -> Vec<Pauli> {
    let mut out = Vec::new();
    if g.kind.arity() == 1 {
        for l in ['X', 'Y', 'Z'] {
            out.push(Pauli::single(n, g.a, l).unwrap());
        }
    } else {
        for la in ['I', 'X', 'Y', 'Z'] {
            for lb in ['I', 'X', 'Y', 'Z'] {
                if la == 'I' && lb == 'I' {
                    continue;
                }
                let pa = Pauli::single(n, g.a, la).unwrap();
                let pb = Pauli::single(n, g.b, lb).unwrap();
                out.push(pa.multiply(&pb).unwrap());
            }
        }
    }
    out
}

/// Bit mask selecting the data qubits (the first `n_data` of `n_total`).
pub fn data_mask(n_data: usize) -> u64 {
    if n_data == 64 {
        u64::MAX
    } else {
        (1u64 << n_data) - 1
    }
}

/// True iff the error flips any flag-qubit Z measurement (X or Y component
/// on a qubit >= n_data).
pub fn flag_triggered(e: &Pauli, n_data: usize) -> bool {
    e.x_bits() & !data_mask(n_data) != 0
}

/// Minimum weight of the data restriction of `e * s` over all state
/// stabilizer group elements `s`. Phases are ignored.
pub fn min_weight_data(e: &Pauli, group: &StabilizerGroup, n_data: usize) -> u32 {
    group.min_weight_on(e, data_mask(n_data))
}

/// Classify one propagated error. `t` is the correctable weight
/// `floor((d-1)/2)`; cases are checked in precedence order.
pub fn classify(e: &Pauli, group: &StabilizerGroup, n_data: usize, t: usize) -> FaultClass {
    let w = group.effective_weight_on(e, data_mask(n_data));
    let flagged = flag_triggered(e, n_data);
    if w == 0 && flagged {
        FaultClass::TrivialFlagged
    } else if w as usize <= t {
        FaultClass::Tolerable
    } else if flagged {
        FaultClass::HarmfulFlagged
    } else {
        FaultClass::HarmfulUnflagged
    }
}

impl FaultSet {
    pub fn empty(n_data: usize, n_flag: usize) -> Self {
        FaultSet {
            n_data,
            n_flag,
            errors: Vec::new(),
            seen: BTreeSet::new(),
            gates_processed: 0,
        }
    }

    pub fn errors(&self) -> &[FaultError] {
        &self.errors
    }

    pub fn len(&self) -> usize {
        self.errors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn gates_processed(&self) -> usize {
        self.gates_processed
    }

    /// Advance the set past one more gate: propagate every existing error
    /// through `g`, then append `g`'s own error generators. Errors whose
    /// propagated bits coincide (phase ignored) are merged, keeping the
    /// earliest origin.
    pub fn extend(&mut self, g: &Gate) {
        let n = self.n_data + self.n_flag;
        let mut merged: Vec<FaultError> = Vec::with_capacity(self.errors.len() + 15);
        self.seen.clear();
        for fe in &self.errors {
            let p = fe.pauli.conjugated(g);
            if self.seen.insert((p.x_bits(), p.z_bits())) {
                merged.push(FaultError { pauli: p, origin: fe.origin });
            }
        }
        for (gen_idx, p) in error_generators(g, n).into_iter().enumerate() {
            if self.seen.insert((p.x_bits(), p.z_bits())) {
                merged.push(FaultError { pauli: p, origin: (self.gates_processed, gen_idx) });
            }
        }
        self.errors = merged;
        self.gates_processed += 1;
    }

    /// Fraction of errors classified as contributing (tolerable or flagged
    /// harmful), as an exact (numerator, denominator) pair. Trivial flagged
    /// errors — trivial on the data, benign flag event — are obsolete for
    /// this score and excluded from both counts (they remain in the set,
    /// since a later flag-controlled gate could still spread them). An empty
    /// (or all-obsolete) set is vacuously fault-tolerant: (0, 0) with value 1.
    pub fn f_counts(&self, group: &StabilizerGroup, t: usize) -> (u64, u64) {
        let mut num = 0u64;
        let mut den = 0u64;
        for fe in &self.errors {
            match classify(&fe.pauli, group, self.n_data, t) {
                FaultClass::TrivialFlagged => {}
                c => {
                    num += c.contribution();
                    den += 1;
                }
            }
        }
        (num, den)
    }
}

/// `f` value in [0, 1]; empty set gives 1.
pub fn f_value(set: &FaultSet, group: &StabilizerGroup, t: usize) -> f64 {
    let (num, den) = set.f_counts(group, t);
    if den == 0 {
        1.0
    } else {
        num as f64 / den as f64
    }
}

/// Result of the independent fault-tolerance verification pass.
#[derive(Clone, Debug)]
pub struct VerifyReport {
    /// Data qubits end exactly in the target state.
    pub state_ok: bool,
    /// Flags end in |0> and are disentangled from data (product state).
    pub product_ok: bool,
    /// Every harmful unflagged fault, sorted by origin.
    pub harmful: Vec<FaultError>,
    /// Total (gate, generator) single-fault events enumerated.
    pub total_errors: usize,
    /// Events classified Tolerable or HarmfulFlagged.
    pub flagged_tolerable: usize,
}

impl VerifyReport {
    pub fn is_ft(&self) -> bool {
        self.state_ok && self.product_ok && self.harmful.is_empty()
    }

    /// Machine-readable report: one `HARMFUL gate=<i> gen=<j> pauli=<string>`
    /// line per silent harmful fault, then the `FT=...` summary line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for fe in &self.harmful {
            out.push_str(&format!(
                "HARMFUL gate={} gen={} pauli={}\n",
                fe.origin.0, fe.origin.1, fe.pauli
            ));
        }
        if !self.state_ok {
            out.push_str("STATE_MISMATCH data state differs from target\n");
        }
        if !self.product_ok {
            out.push_str("STATE_MISMATCH flags entangled or not in |0>\n");
        }
        out.push_str(&format!(
            "FT={} errors={} flagged_tolerable={}\n",
            if self.is_ft() { "yes" } else { "no" },
            self.total_errors,
            self.flagged_tolerable
        ));
        out
    }
}

/// Check that `c` noiselessly prepares `target` on its data qubits with all
/// flags returned to `|0>` as a product state. Returns (state_ok, product_ok).
pub fn check_preparation(c: &Circuit, target: &LogicalTarget) -> Result<(bool, bool)> {
    if c.n_data != target.code.n {
        return Err(Error::DimensionMismatch { expected: target.code.n, got: c.n_data });
    }
    let canon = c.simulate()?;
    // Product state with |0> flags <=> canonical rows n_data.. are exactly
    // +Z on one flag each, and rows 0..n_data act as identity on flags.
    let dm = data_mask(c.n_data);
    let mut product_ok = true;
    for (i, row) in canon.rows().iter().enumerate() {
        if i < c.n_data {
            if (row.x_bits() | row.z_bits()) & !dm != 0 {
                product_ok = false;
            }
        } else {
            let flag_bit = 1u64 << (c.n_data + (i - c.n_data));
            if row.x_bits() != 0 || row.z_bits() != flag_bit || row.phase() != 0 {
                product_ok = false;
            }
        }
    }
    // Compare the data rows (as a tableau on n_data qubits) with the target.
    let mut state_ok = product_ok;
    if product_ok {
        let target_canon = target.tableau.canonicalize()?;
        // Data rows are identity on the flags here, so their bit words can be
        // compared against the n_data-qubit target rows directly.
        for (row, trow) in canon.rows()[..c.n_data].iter().zip(target_canon.rows()) {
            if row.x_bits() != trow.x_bits()
                || row.z_bits() != trow.z_bits()
                || row.phase() != trow.phase()
            {
                state_ok = false;
                break;
            }
        }
    } else {
        state_ok = false;
    }
    Ok((state_ok, product_ok))
}

/// Independent brute-force verification: every (gate, generator) fault is
/// propagated through the circuit suffix on its own (no incremental set, no
/// merging), classified, and every silent harmful error reported.
pub fn verify_fault_tolerance(c: &Circuit, target: &LogicalTarget) -> Result<VerifyReport> {
    let (state_ok, product_ok) = check_preparation(c, target)?;
    let group = state_stabilizer_group(target)?;
    let t = target.code.t();
    let n = c.n_total();
    let mut harmful = Vec::new();
    let mut total = 0usize;
    let mut flagged_tolerable = 0usize;
    for (gate_idx, gate) in c.gates.iter().enumerate() {
        for (gen_idx, gen) in error_generators(gate, n).into_iter().enumerate() {
            total += 1;
            let mut e = gen;
            for later in &c.gates[gate_idx + 1..] {
                e = e.conjugated(later);
            }
            match classify(&e, &group, c.n_data, t) {
                FaultClass::HarmfulUnflagged => {
                    harmful.push(FaultError { pauli: e, origin: (gate_idx, gen_idx) });
                }
                FaultClass::Tolerable | FaultClass::HarmfulFlagged => flagged_tolerable += 1,
                FaultClass::TrivialFlagged => {}
            }
        }
    }
    harmful.sort_by_key(|fe| fe.origin);
    Ok(VerifyReport { state_ok, product_ok, harmful, total_errors: total, flagged_tolerable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codes::{builtin_code, make_target, StateLabel};
    use crate::gate::GateKind;

    #[test]
    fn error_generator_counts() {
        // 3 generators for 1q gates, 15 for 2q gates; none identity.
        let h = Gate::one(GateKind::H, 0);
        let cx = Gate::two(GateKind::Cx, 0, 1);
        let g1 = error_generators(&h, 3);
        let g15 = error_generators(&cx, 3);
        assert_eq!(g1.len(), 3);
        assert_eq!(g15.len(), 15);
        assert!(g1.iter().chain(&g15).all(|p| !p.is_identity_bits()));
    }

    #[test]
    fn extend_basics() {
        // empty set + H(0) -> 3 errors; CX propagates X on control.
        let mut set = FaultSet::empty(2, 0);
        set.extend(&Gate::one(GateKind::H, 0));
        assert_eq!(set.len(), 3);
        set.extend(&Gate::two(GateKind::Cx, 0, 1));
        let has_xx = set
            .errors()
            .iter()
            .any(|fe| fe.pauli.x_bits() == 0b11 && fe.pauli.z_bits() == 0);
        assert!(has_xx, "X on control must propagate to XX");
    }

    #[test]
    fn min_weight_examples() {
        // weight reduction over the Steane |0> group.
        let code = builtin_code("steane_7_1_3").unwrap();
        let target = make_target(&code, StateLabel::Zero, None).unwrap();
        let group = state_stabilizer_group(&target).unwrap();
        let zl = Pauli::parse("ZZZZZZZ").unwrap();
        assert_eq!(min_weight_data(&zl, &group, 7), 0);
        let x0 = Pauli::single(7, 0, 'X').unwrap();
        assert_eq!(min_weight_data(&x0, &group, 7), 1);
        // X on qubits 1 and 2 cannot be reduced below weight 2.
        let x12 = Pauli::from_bits(7, 0b0000110, 0, 0).unwrap();
        assert_eq!(min_weight_data(&x12, &group, 7), 2);
        // multiple Z errors stay tolerable for the CSS |0> target:
        // every pure-Z data error reduces to weight <= 1.
        for zbits in 1u64..128 {
            let e = Pauli::from_bits(7, 0, zbits, 0).unwrap();
            assert!(min_weight_data(&e, &group, 7) <= 1, "Z error {e} not tolerable");
        }
    }

    #[test]
    fn classification_cases() {
        // the four cases with t = 1 on the Steane |0> target (one flag).
        let code = builtin_code("steane_7_1_3").unwrap();
        let target = make_target(&code, StateLabel::Zero, None).unwrap();
        let group = state_stabilizer_group(&target).unwrap();
        let n_data = 7;
        // w=0, flagged: stabilizer times X on flag.
        let trivial = Pauli::from_bits(8, 1 << 7, 0b1010101, 0).unwrap();
        assert_eq!(classify(&trivial, &group, n_data, 1), FaultClass::TrivialFlagged);
        assert_eq!(classify(&trivial, &group, n_data, 1).contribution(), 0);
        // w=1: tolerable regardless of flag.
        let x0 = Pauli::from_bits(8, 1, 0, 0).unwrap();
        assert_eq!(classify(&x0, &group, n_data, 1), FaultClass::Tolerable);
        // w=2, flagged vs unflagged.
        let x12 = Pauli::from_bits(8, 0b0000110, 0, 0).unwrap();
        assert_eq!(classify(&x12, &group, n_data, 1), FaultClass::HarmfulUnflagged);
        let x12f = Pauli::from_bits(8, 0b0000110 | 1 << 7, 0, 0).unwrap();
        assert_eq!(classify(&x12f, &group, n_data, 1), FaultClass::HarmfulFlagged);
        // Monotone in flag: adding a flag X never lowers the contribution.
        for e in [x0, x12] {
            let flagged = Pauli::from_bits(8, e.x_bits() | 1 << 7, e.z_bits(), 0).unwrap();
            assert!(
                classify(&flagged, &group, n_data, 1).contribution()
                    >= classify(&e, &group, n_data, 1).contribution()
            );
        }
    }

    #[test]
    fn incremental_matches_independent_oracle() {
        // the incremental set equals per-fault suffix propagation
        // (modulo phase and duplicates) on a non-trivial circuit.
        let c = Circuit::parse(
            "qubits 7 1\nH 1\nH 2\nH 3\nCX 1 0\nCX 3 5\nCX 2 6\nCX 1 4\nCX 2 0\nCX 3 6\nCX 1 5\nCX 6 4\nCX 0 7\nCX 6 7\nCX 5 7\n",
        )
        .unwrap();
        let n = c.n_total();
        let mut set = FaultSet::empty(c.n_data, c.n_flag);
        for g in &c.gates {
            set.extend(g);
        }
        let incremental: BTreeSet<(u64, u64)> =
            set.errors().iter().map(|fe| (fe.pauli.x_bits(), fe.pauli.z_bits())).collect();
        let mut oracle = BTreeSet::new();
        for (i, g) in c.gates.iter().enumerate() {
            for gen in error_generators(g, n) {
                let mut e = gen;
                for later in &c.gates[i + 1..] {
                    e = e.conjugated(later);
                }
                oracle.insert((e.x_bits(), e.z_bits()));
            }
        }
        assert_eq!(incremental, oracle);
    }

    #[test]
    fn f_value_edges() {
        // empty set is vacuously 1.
        let code = builtin_code("steane_7_1_3").unwrap();
        let target = make_target(&code, StateLabel::Zero, None).unwrap();
        let group = state_stabilizer_group(&target).unwrap();
        let set = FaultSet::empty(7, 1);
        assert_eq!(f_value(&set, &group, 1), 1.0);
    }
}
