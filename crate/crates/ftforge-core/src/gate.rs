//! Clifford gates and Pauli conjugation (`P -> G P G^dagger`).

use alloc::string::String;

use crate::pauli::Pauli;
use crate::{Error, Result};

/// The gate alphabet. `Sx` is the square root of `X` (Hadamard-conjugated
/// phase gate); `Cx`/`Cz` are the two-qubit entangling gates.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum GateKind {
    H,
    S,
    Sx,
    X,
    Cx,
    Cz,
}

impl GateKind {
    pub fn arity(&self) -> usize {
        match self {
            GateKind::Cx | GateKind::Cz => 2,
            _ => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::S => "S",
            GateKind::Sx => "SX",
            GateKind::X => "X",
            GateKind::Cx => "CX",
            GateKind::Cz => "CZ",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "H" => Ok(GateKind::H),
            "S" => Ok(GateKind::S),
            "SX" => Ok(GateKind::Sx),
            "X" => Ok(GateKind::X),
            "CX" => Ok(GateKind::Cx),
            "CZ" => Ok(GateKind::Cz),
            _ => Err(Error::Parse { line: 0, msg: String::from("unknown gate kind") }),
        }
    }
}

/// A gate applied to concrete qubits. For `Cx`, `a` is the control and `b`
/// the target; for `Cz` the order is irrelevant. Single-qubit gates ignore `b`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Gate {
    pub kind: GateKind,
    pub a: usize,
    pub b: usize,
}

impl Gate {
    pub fn one(kind: GateKind, q: usize) -> Self {
        debug_assert_eq!(kind.arity(), 1);
        Gate { kind, a: q, b: usize::MAX }
    }

    pub fn two(kind: GateKind, a: usize, b: usize) -> Self {
        debug_assert_eq!(kind.arity(), 2);
        Gate { kind, a, b }
    }

    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        let second = if self.kind.arity() == 2 { Some(self.b) } else { None };
        core::iter::once(self.a).chain(second)
    }

    pub fn check(&self, n: usize) -> Result<()> {
        for q in self.qubits() {
            if q >= n {
                return Err(Error::QubitOutOfRange { qubit: q, n });
            }
        }
        if self.kind.arity() == 2 && self.a == self.b {
            return Err(Error::QubitOutOfRange { qubit: self.b, n });
        }
        Ok(())
    }
}

impl core::fmt::Display for Gate {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        if self.kind.arity() == 2 {
            write!(f, "{} {} {}", self.kind.name(), self.a, self.b)
        } else {
            write!(f, "{} {}", self.kind.name(), self.a)
        }
    }
}

impl Pauli {
    /// Conjugate by a Clifford gate: returns `G * self * G^dagger`.
    ///
    /// The bit update rules act only on the gate's qubits; the sign flips
    /// (phase += 2) exactly when the input letter anticommutes into a
    /// negated output letter (e.g. `S Y S^dagger = -X`... the full rules are
    /// verified exhaustively against a dense matrix oracle in the tests).
    pub fn conjugated(&self, g: &Gate) -> Pauli {
        let mut p = *self;
        match g.kind {
            GateKind::H => {
                // X <-> Z, Y -> -Y.
                let m = 1u64 << g.a;
                if p.x_bits() & p.z_bits() & m != 0 {
                    p = p.negated();
                }
                let x = (p.x_bits() & !m) | (p.z_bits() & m);
                let z = (p.z_bits() & !m) | (p.x_bits() & m);
                p = Pauli::from_bits(p.n(), x, z, p.phase()).unwrap();
            }
            GateKind::S => {
                // X -> Y, Y -> -X, Z -> Z.
                let m = 1u64 << g.a;
                if p.x_bits() & p.z_bits() & m != 0 {
                    p = p.negated();
                }
                p = Pauli::from_bits(
                    p.n(),
                    p.x_bits(),
                    p.z_bits() ^ (p.x_bits() & m),
                    p.phase(),
                )
                .unwrap();
            }
            GateKind::Sx => {
                // Z -> -Y, Y -> Z, X -> X.
                let m = 1u64 << g.a;
                if p.z_bits() & !p.x_bits() & m != 0 {
                    p = p.negated();
                }
                p = Pauli::from_bits(
                    p.n(),
                    p.x_bits() ^ (p.z_bits() & m),
                    p.z_bits(),
                    p.phase(),
                )
                .unwrap();
            }
            GateKind::X => {
                // Z -> -Z, Y -> -Y.
                if p.z_bit(g.a) {
                    p = p.negated();
                }
            }
            GateKind::Cx => {
                // x_t ^= x_c, z_c ^= z_t; sign flips iff x_c & z_t & !(x_t ^ z_c).
                let (c, t) = (g.a, g.b);
                let xc = p.x_bit(c);
                let zc = p.z_bit(c);
                let xt = p.x_bit(t);
                let zt = p.z_bit(t);
                if xc && zt && !(xt ^ zc) {
                    p = p.negated();
                }
                let x = p.x_bits() ^ if xc { 1 << t } else { 0 };
                let z = p.z_bits() ^ if zt { 1 << c } else { 0 };
                p = Pauli::from_bits(p.n(), x, z, p.phase()).unwrap();
            }
            GateKind::Cz => {
                // CZ(c,t) = H(t) CX(c,t) H(t).
                let h = Gate::one(GateKind::H, g.b);
                p = p.conjugated(&h).conjugated(&Gate::two(GateKind::Cx, g.a, g.b)).conjugated(&h);
            }
        }
        p
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;

    // Dense complex matrix oracle over 1 or 2 qubits (2x2 / 4x4).
    type C = (f64, f64);

    fn cmul(a: C, b: C) -> C {
        (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
    }

    fn mat_mul(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
        let n = a.len();
        let mut r = vec![vec![(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let p = cmul(a[i][k], b[k][j]);
                    r[i][j].0 += p.0;
                    r[i][j].1 += p.1;
                }
            }
        }
        r
    }

    fn dagger(a: &[Vec<C>]) -> Vec<Vec<C>> {
        let n = a.len();
        let mut r = vec![vec![(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                r[i][j] = (a[j][i].0, -a[j][i].1);
            }
        }
        r
    }

    fn kron(a: &[Vec<C>], b: &[Vec<C>]) -> Vec<Vec<C>> {
        let (na, nb) = (a.len(), b.len());
        let n = na * nb;
        let mut r = vec![vec![(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                r[i][j] = cmul(a[i / nb][j / nb], b[i % nb][j % nb]);
            }
        }
        r
    }

    fn letter(x: bool, z: bool) -> Vec<Vec<C>> {
        match (x, z) {
            (false, false) => vec![vec![(1.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (1.0, 0.0)]],
            (true, false) => vec![vec![(0.0, 0.0), (1.0, 0.0)], vec![(1.0, 0.0), (0.0, 0.0)]],
            (false, true) => vec![vec![(1.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (-1.0, 0.0)]],
            (true, true) => vec![vec![(0.0, 0.0), (0.0, -1.0)], vec![(0.0, 1.0), (0.0, 0.0)]],
        }
    }

    fn pauli_matrix(p: &Pauli) -> Vec<Vec<C>> {
        // Qubit 0 is the leftmost tensor factor.
        let mut m = letter(p.x_bit(0), p.z_bit(0));
        for j in 1..p.n() {
            m = kron(&m, &letter(p.x_bit(j), p.z_bit(j)));
        }
        let ph = match p.phase() & 3 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        };
        for row in m.iter_mut() {
            for e in row.iter_mut() {
                *e = cmul(*e, ph);
            }
        }
        m
    }

    const SQ: f64 = core::f64::consts::FRAC_1_SQRT_2;

    fn gate_matrix_1q(kind: GateKind) -> Vec<Vec<C>> {
        match kind {
            GateKind::H => vec![vec![(SQ, 0.0), (SQ, 0.0)], vec![(SQ, 0.0), (-SQ, 0.0)]],
            GateKind::S => vec![vec![(1.0, 0.0), (0.0, 0.0)], vec![(0.0, 0.0), (0.0, 1.0)]],
            GateKind::Sx => vec![
                vec![(0.5, 0.5), (0.5, -0.5)],
                vec![(0.5, -0.5), (0.5, 0.5)],
            ],
            GateKind::X => vec![vec![(0.0, 0.0), (1.0, 0.0)], vec![(1.0, 0.0), (0.0, 0.0)]],
            _ => unreachable!(),
        }
    }

    fn gate_matrix_2q(kind: GateKind, control_first: bool) -> Vec<Vec<C>> {
        // Basis order |q0 q1> with q0 the leftmost factor.
        let mut m = vec![vec![(0.0, 0.0); 4]; 4];
        match kind {
            GateKind::Cx => {
                for b0 in 0..2usize {
                    for b1 in 0..2usize {
                        let (c, t) = if control_first { (b0, b1) } else { (b1, b0) };
                        let t2 = t ^ c;
                        let (o0, o1) = if control_first { (c, t2) } else { (t2, c) };
                        m[o0 * 2 + o1][b0 * 2 + b1] = (1.0, 0.0);
                    }
                }
            }
            GateKind::Cz => {
                for b0 in 0..2usize {
                    for b1 in 0..2usize {
                        let s = if b0 == 1 && b1 == 1 { -1.0 } else { 1.0 };
                        m[b0 * 2 + b1][b0 * 2 + b1] = (s, 0.0);
                    }
                }
            }
            _ => unreachable!(),
        }
        m
    }

    fn approx(a: &[Vec<C>], b: &[Vec<C>]) -> bool {
        for (ra, rb) in a.iter().zip(b) {
            for (ea, eb) in ra.iter().zip(rb) {
                if (ea.0 - eb.0).abs() > 1e-12 || (ea.1 - eb.1).abs() > 1e-12 {
                    return false;
                }
            }
        }
        true
    }

    // exhaustive conjugation check against the dense matrix oracle:
    // every 1q gate over all 4 letters x 2 signs, and every 2q gate (both
    // orientations) over all 16 letter pairs x 2 signs.
    #[test]
    fn conjugation_matches_matrix_oracle() {
        for kind in [GateKind::H, GateKind::S, GateKind::Sx, GateKind::X] {
            let u = gate_matrix_1q(kind);
            let ud = dagger(&u);
            for code in 0..4u64 {
                for neg in [0u8, 2] {
                    let p = Pauli::from_bits(1, code & 1, code >> 1, neg).unwrap();
                    let got = p.conjugated(&Gate::one(kind, 0));
                    let want = mat_mul(&mat_mul(&u, &pauli_matrix(&p)), &ud);
                    assert!(
                        approx(&pauli_matrix(&got), &want),
                        "{kind:?} on {p} gave {got}"
                    );
                }
            }
        }
        for kind in [GateKind::Cx, GateKind::Cz] {
            for (a, b) in [(0usize, 1usize), (1, 0)] {
                let u = gate_matrix_2q(kind, a == 0);
                let ud = dagger(&u);
                for code in 0..16u64 {
                    for neg in [0u8, 2] {
                        let p = Pauli::from_bits(2, code & 3, code >> 2, neg).unwrap();
                        let got = p.conjugated(&Gate::two(kind, a, b));
                        let want = mat_mul(&mat_mul(&u, &pauli_matrix(&p)), &ud);
                        assert!(
                            approx(&pauli_matrix(&got), &want),
                            "{kind:?}({a},{b}) on {p} gave {got}"
                        );
                    }
                }
            }
        }
    }

    // textbook identities as a readable smoke test.
    #[test]
    fn known_identities() {
        use alloc::format;
        let h0 = Gate::one(GateKind::H, 0);
        assert_eq!(format!("{}", Pauli::parse("X").unwrap().conjugated(&h0)), "+Z");
        assert_eq!(format!("{}", Pauli::parse("Y").unwrap().conjugated(&h0)), "-Y");
        let cx = Gate::two(GateKind::Cx, 0, 1);
        assert_eq!(format!("{}", Pauli::parse("XI").unwrap().conjugated(&cx)), "+XX");
        assert_eq!(format!("{}", Pauli::parse("IZ").unwrap().conjugated(&cx)), "+ZZ");
        assert_eq!(format!("{}", Pauli::parse("ZI").unwrap().conjugated(&cx)), "+ZI");
    }
}
