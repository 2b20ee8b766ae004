//! Pauli operators on up to 64 qubits with exact phase tracking.
//!
//! An operator is stored as `i^phase * P_0 ⊗ ... ⊗ P_{n-1}` where each
//! `P_j ∈ {I, X, Y, Z}` is encoded by one bit in `x` and one in `z`
//! (`Y` has both set, as the Hermitian `Y = i X Z`). `phase` is the
//! exponent of `i` modulo 4; Hermitian operators have phase 0 (`+`) or
//! 2 (`-`).

use alloc::string::String;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Phase table for single-qubit products: `sigma_a * sigma_b = i^T[a][b] * sigma_{a^b}`
/// with codes `I=0, X=1, Z=2, Y=3` (code = x_bit + 2*z_bit).
const PHASE_TAB: [[u8; 4]; 4] = [
    [0, 0, 0, 0], // I *
    [0, 0, 3, 1], // X * {I,X,Z,Y}
    [0, 1, 0, 3], // Z * {I,X,Z,Y}
    [0, 3, 1, 0], // Y * {I,X,Z,Y}
];

/// A signed Pauli string on `n <= 64` qubits.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Pauli {
    n: u16,
    x: u64,
    z: u64,
    /// Exponent of `i`, modulo 4.
    phase: u8,
}

impl Pauli {
    /// The identity on `n` qubits.
    pub fn identity(n: usize) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::QubitOutOfRange { qubit: n, n: 64 });
        }
        Ok(Pauli { n: n as u16, x: 0, z: 0, phase: 0 })
    }

    /// Build from raw bit masks and an `i`-exponent.
    pub fn from_bits(n: usize, x: u64, z: u64, phase: u8) -> Result<Self> {
        let mut p = Pauli::identity(n)?;
        let mask = p.mask();
        if x & !mask != 0 || z & !mask != 0 {
            return Err(Error::QubitOutOfRange { qubit: 64, n });
        }
        p.x = x;
        p.z = z;
        p.phase = phase & 3;
        Ok(p)
    }

    /// A single `X`, `Y` or `Z` (given by `letter`) on `qubit`, identity elsewhere.
    pub fn single(n: usize, qubit: usize, letter: char) -> Result<Self> {
        let mut p = Pauli::identity(n)?;
        if qubit >= n {
            return Err(Error::QubitOutOfRange { qubit, n });
        }
        match letter {
            'I' => {}
            'X' => p.x |= 1 << qubit,
            'Z' => p.z |= 1 << qubit,
            'Y' => {
                p.x |= 1 << qubit;
                p.z |= 1 << qubit;
            }
            _ => {
                return Err(Error::Parse { line: 0, msg: String::from("unknown Pauli letter") })
            }
        }
        Ok(p)
    }

    /// Parse a string like `+XIZ`, `-YZI` or `XZZ` (no sign means `+`).
    /// Qubit 0 is the leftmost letter.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let (phase, body) = match s.as_bytes().first() {
            Some(b'+') => (0u8, &s[1..]),
            Some(b'-') => (2u8, &s[1..]),
            _ => (0u8, s),
        };
        if body.is_empty() || body.len() > 64 {
            return Err(Error::Parse { line: 0, msg: String::from("bad Pauli string length") });
        }
        let mut p = Pauli::identity(body.len())?;
        p.phase = phase;
        for (j, c) in body.chars().enumerate() {
            match c {
                'I' => {}
                'X' => p.x |= 1 << j,
                'Z' => p.z |= 1 << j,
                'Y' => {
                    p.x |= 1 << j;
                    p.z |= 1 << j;
                }
                _ => {
                    return Err(Error::Parse {
                        line: 0,
                        msg: String::from("unknown Pauli letter"),
                    })
                }
            }
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    pub fn x_bits(&self) -> u64 {
        self.x
    }

    pub fn z_bits(&self) -> u64 {
        self.z
    }

    /// The `i`-exponent, modulo 4.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    /// `true` when the operator is Hermitian with a `-` sign (phase 2).
    /// Errors if the phase is imaginary.
    pub fn sign_negative(&self) -> Result<bool> {
        match self.phase {
            0 => Ok(false),
            2 => Ok(true),
            _ => Err(Error::ImaginaryPhase),
        }
    }

    pub fn x_bit(&self, qubit: usize) -> bool {
        self.x >> qubit & 1 == 1
    }

    pub fn z_bit(&self, qubit: usize) -> bool {
        self.z >> qubit & 1 == 1
    }

    /// Identity up to phase (all letters `I`).
    pub fn is_identity_bits(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    fn mask(&self) -> u64 {
        if self.n == 64 {
            u64::MAX
        } else {
            (1u64 << self.n) - 1
        }
    }

    /// Number of qubits with a non-identity letter.
    pub fn weight(&self) -> u32 {
        (self.x | self.z).count_ones()
    }

    /// Weight restricted to the qubits selected by `mask`.
    pub fn weight_on(&self, mask: u64) -> u32 {
        ((self.x | self.z) & mask).count_ones()
    }

    /// Whether `self` and `other` commute (symplectic inner product is 0).
    pub fn commutes(&self, other: &Pauli) -> bool {
        let a = (self.x & other.z).count_ones();
        let b = (self.z & other.x).count_ones();
        (a + b) % 2 == 0
    }

    /// Exact product `self * other`, including the accumulated phase.
    pub fn multiply(&self, other: &Pauli) -> Result<Pauli> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n(), got: other.n() });
        }
        let mut phase = (self.phase + other.phase) & 3;
        // Only qubits where both factors are non-identity contribute a phase.
        let mut both = (self.x | self.z) & (other.x | other.z);
        while both != 0 {
            let j = both.trailing_zeros() as u64;
            both &= both - 1;
            let a = ((self.x >> j & 1) + 2 * (self.z >> j & 1)) as usize;
            let b = ((other.x >> j & 1) + 2 * (other.z >> j & 1)) as usize;
            phase = (phase + PHASE_TAB[a][b]) & 3;
        }
        Ok(Pauli { n: self.n, x: self.x ^ other.x, z: self.z ^ other.z, phase })
    }

    /// Flip the sign (multiply by -1).
    pub fn negated(&self) -> Pauli {
        Pauli { phase: (self.phase + 2) & 3, ..*self }
    }
}

impl core::fmt::Display for Pauli {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self.phase {
            0 => write!(f, "+")?,
            1 => write!(f, "i")?,
            2 => write!(f, "-")?,
            3 => write!(f, "-i")?,
            _ => unreachable!(),
        }
        for j in 0..self.n() {
            let c = match (self.x_bit(j), self.z_bit(j)) {
                (false, false) => 'I',
                (true, false) => 'X',
                (false, true) => 'Z',
                (true, true) => 'Y',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl core::fmt::Debug for Pauli {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        core::fmt::Display::fmt(self, f)
    }
}

/// Jaccard distance between two equal-length binary vectors:
/// `(c01 + c10) / (c01 + c10 + c11)`, and 0 when both vectors are all-zero.
pub fn jaccard_distance(u: &[u8], v: &[u8]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    let mut diff = 0u64;
    let mut c11 = 0u64;
    for (&a, &b) in u.iter().zip(v) {
        diff += (a != b) as u64;
        c11 += (a == 1 && b == 1) as u64;
    }
    if diff + c11 == 0 {
        0.0
    } else {
        diff as f64 / (diff + c11) as f64
    }
}

/// Normalized Hamming distance: fraction of positions that differ.
pub fn hamming_distance(u: &[u8], v: &[u8]) -> f64 {
    debug_assert_eq!(u.len(), v.len());
    if u.is_empty() {
        return 0.0;
    }
    let diff: u64 = u.iter().zip(v).map(|(&a, &b)| (a != b) as u64).sum();
    diff as f64 / u.len() as f64
}

/// Append one row's binary observation entries `[x_0..x_{n-1}, z_0..z_{n-1}, r]`
/// to `out`, where `r = 1` for a `-` sign.
pub(crate) fn push_row_bits(p: &Pauli, out: &mut Vec<u8>) -> Result<()> {
    let n = p.n();
    for j in 0..n {
        out.push(p.x_bit(j) as u8);
    }
    for j in 0..n {
        out.push(p.z_bit(j) as u8);
    }
    out.push(p.sign_negative()? as u8);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;

    // Dense 2x2 complex matrices over (re, im) pairs, used only as an oracle.
    type C = (f64, f64);
    type M2 = [[C; 2]; 2];
    const I2: M2 = [[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (1.0, 0.0)]];
    const XM: M2 = [[(0.0, 0.0), (1.0, 0.0)], [(1.0, 0.0), (0.0, 0.0)]];
    const YM: M2 = [[(0.0, 0.0), (0.0, -1.0)], [(0.0, 1.0), (0.0, 0.0)]];
    const ZM: M2 = [[(1.0, 0.0), (0.0, 0.0)], [(0.0, 0.0), (-1.0, 0.0)]];

    fn cmul(a: C, b: C) -> C {
        (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
    }

    fn cadd(a: C, b: C) -> C {
        (a.0 + b.0, a.1 + b.1)
    }

    fn mmul(a: &M2, b: &M2) -> M2 {
        let mut r = [[(0.0, 0.0); 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    r[i][j] = cadd(r[i][j], cmul(a[i][k], b[k][j]));
                }
            }
        }
        r
    }

    fn scale(a: &M2, s: C) -> M2 {
        let mut r = *a;
        for row in r.iter_mut() {
            for e in row.iter_mut() {
                *e = cmul(*e, s);
            }
        }
        r
    }

    fn approx(a: &M2, b: &M2) -> bool {
        for i in 0..2 {
            for j in 0..2 {
                if (a[i][j].0 - b[i][j].0).abs() > 1e-12 || (a[i][j].1 - b[i][j].1).abs() > 1e-12
                {
                    return false;
                }
            }
        }
        true
    }

    fn letter_matrix(x: bool, z: bool) -> M2 {
        match (x, z) {
            (false, false) => I2,
            (true, false) => XM,
            (false, true) => ZM,
            (true, true) => YM,
        }
    }

    fn phase_c(e: u8) -> C {
        match e & 3 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        }
    }

    // single-qubit products checked against dense 2x2 matrix algebra.
    #[test]
    fn multiply_matches_matrix_oracle_single_qubit() {
        for a in 0..4u8 {
            for b in 0..4u8 {
                for pa in 0..4u8 {
                    for pb in 0..4u8 {
                        let p = Pauli::from_bits(1, (a & 1) as u64, (a >> 1) as u64, pa).unwrap();
                        let q = Pauli::from_bits(1, (b & 1) as u64, (b >> 1) as u64, pb).unwrap();
                        let r = p.multiply(&q).unwrap();
                        let lhs = mmul(
                            &scale(&letter_matrix(p.x_bit(0), p.z_bit(0)), phase_c(pa)),
                            &scale(&letter_matrix(q.x_bit(0), q.z_bit(0)), phase_c(pb)),
                        );
                        let rhs =
                            scale(&letter_matrix(r.x_bit(0), r.z_bit(0)), phase_c(r.phase()));
                        assert!(approx(&lhs, &rhs), "{p} * {q} != {r}");
                    }
                }
            }
        }
    }

    // multi-qubit phases are sums of per-qubit phases; spot-check
    // a case computed by hand: (XZ)*(ZX) = (XZ)(ZX) = i^3 i^1 (YY) = YY.
    #[test]
    fn multiply_multi_qubit_phase() {
        let p = Pauli::parse("XZ").unwrap();
        let q = Pauli::parse("ZX").unwrap();
        let r = p.multiply(&q).unwrap();
        assert_eq!(format!("{r}"), "+YY");

        // X*Z = -iY on one qubit.
        let x = Pauli::parse("X").unwrap();
        let z = Pauli::parse("Z").unwrap();
        assert_eq!(format!("{}", x.multiply(&z).unwrap()), "-iY");
        assert_eq!(format!("{}", z.multiply(&x).unwrap()), "iY");
    }

    // commutation parity.
    #[test]
    fn commutes_basic() {
        let x = Pauli::parse("XI").unwrap();
        let z = Pauli::parse("ZI").unwrap();
        let zz = Pauli::parse("ZZ").unwrap();
        assert!(!x.commutes(&z));
        assert!(x.commutes(&x));
        assert!(zz.commutes(&Pauli::parse("XX").unwrap()));
    }

    // round trip through text.
    #[test]
    fn parse_display_round_trip() {
        for s in ["+XIZY", "-ZZZZ", "+IIII", "-YXZI"] {
            let p = Pauli::parse(s).unwrap();
            assert_eq!(format!("{p}"), s);
        }
        assert_eq!(format!("{}", Pauli::parse("XYZ").unwrap()), "+XYZ");
        assert!(Pauli::parse("XQZ").is_err());
        assert!(Pauli::parse("").is_err());
    }

    // Jaccard/Hamming on small hand-counted vectors.
    #[test]
    fn distances() {
        let u = [1, 0, 1, 1, 0];
        let v = [1, 1, 0, 1, 0];
        // c11 = 2 (positions 0,3), diff = 2 (positions 1,2).
        assert!((jaccard_distance(&u, &v) - 2.0 / 4.0).abs() < 1e-15);
        assert!((hamming_distance(&u, &v) - 2.0 / 5.0).abs() < 1e-15);
        // Two zero vectors are at Jaccard distance 0 by convention.
        assert_eq!(jaccard_distance(&[0, 0], &[0, 0]), 0.0);
        assert_eq!(hamming_distance(&[0, 0], &[0, 0]), 0.0);
    }

    // weight counting.
    #[test]
    fn weights() {
        let p = Pauli::parse("XIYZI").unwrap();
        assert_eq!(p.weight(), 3);
        assert_eq!(p.weight_on(0b00011), 1); // qubits 0,1 -> only X on 0
    }
}
