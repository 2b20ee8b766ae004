//! Stabilizer tableaus and their sign-exact canonical form.
//!
//! A tableau is a list of `n` commuting, independent, Hermitian Pauli rows
//! on `n` qubits (for a stabilizer state: `n - k` code generators plus `k`
//! signed logical operators). The canonical form is the reduced row echelon
//! form over GF(2) with the column order `x_0, z_0, x_1, z_1, ...`, with
//! phases carried exactly through every row multiplication, so two tableaus
//! describe the same state if and only if their canonical forms are
//! bit-for-bit identical.

use alloc::string::String;
use alloc::vec::Vec;

use crate::gate::Gate;
use crate::pauli::{push_row_bits, Pauli};
use crate::{Error, Result};

/// A (not necessarily canonical) stabilizer tableau.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StabilizerTableau {
    n: usize,
    rows: Vec<Pauli>,
}

/// A tableau frozen in canonical form. Obtained via [`StabilizerTableau::canonicalize`].
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CanonicalTableau {
    n: usize,
    rows: Vec<Pauli>,
}

impl StabilizerTableau {
    /// Build from rows, validating dimensions, Hermiticity and pairwise
    /// commutation. Rank is validated later by `canonicalize`.
    pub fn new(n: usize, rows: Vec<Pauli>) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            if r.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: r.n() });
            }
            if r.phase() % 2 != 0 {
                return Err(Error::ImaginaryPhase);
            }
            for (j, s) in rows.iter().enumerate().skip(i + 1) {
                if !r.commutes(s) {
                    return Err(Error::NonCommuting { row_a: i, row_b: j });
                }
            }
        }
        Ok(StabilizerTableau { n, rows })
    }

    /// The all-`|0>` state: one `+Z_j` row per qubit.
    pub fn zero_state(n: usize) -> Result<Self> {
        let rows = (0..n).map(|j| Pauli::single(n, j, 'Z')).collect::<Result<Vec<_>>>()?;
        Ok(StabilizerTableau { n, rows })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Pauli] {
        &self.rows
    }

    /// Conjugate every row by a gate (evolve the state by one circuit step).
    pub fn apply_gate(&mut self, g: &Gate) -> Result<()> {
        g.check(self.n)?;
        for r in self.rows.iter_mut() {
            *r = r.conjugated(g);
        }
        Ok(())
    }

    /// Reduce to canonical form. Fails if the rows are linearly dependent
    /// over GF(2) or a row picks up an imaginary phase (both indicate a
    /// programming error upstream, not a user error).
    pub fn canonicalize(&self) -> Result<CanonicalTableau> {
        let mut rows = self.rows.clone();
        let m = rows.len();
        let mut r = 0usize;
        for col in 0..2 * self.n {
            // Interleaved column order: x_j then z_j for qubit j.
            let qubit = col / 2;
            let want_x = col % 2 == 0;
            let bit = |p: &Pauli| if want_x { p.x_bit(qubit) } else { p.z_bit(qubit) };
            let Some(pivot) = (r..m).find(|&i| bit(&rows[i])) else {
                continue;
            };
            rows.swap(r, pivot);
            for i in 0..m {
                if i != r && bit(&rows[i]) {
                    rows[i] = rows[i].multiply(&rows[r])?;
                }
            }
            r += 1;
        }
        if r < m {
            return Err(Error::RankDeficient { rank: r, rows: m });
        }
        for row in &rows {
            if row.phase() % 2 != 0 {
                return Err(Error::ImaginaryPhase);
            }
        }
        Ok(CanonicalTableau { n: self.n, rows })
    }

    /// Parse one Pauli string per line (optional leading sign, `#` comments).
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        let mut n = 0;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let p = Pauli::parse(line).map_err(|e| match e {
                Error::Parse { msg, .. } => Error::Parse { line: idx + 1, msg },
                other => other,
            })?;
            if n == 0 {
                n = p.n();
            } else if p.n() != n {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: String::from("inconsistent row length"),
                });
            }
            rows.push(p);
        }
        if rows.is_empty() {
            return Err(Error::Parse { line: 0, msg: String::from("empty tableau") });
        }
        StabilizerTableau::new(n, rows)
    }
}

impl CanonicalTableau {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Pauli] {
        &self.rows
    }

    /// Flatten to the binary observation vector: row-major
    /// `[x_0..x_{n-1}, z_0..z_{n-1}, r]` per row, `r = 1` for a `-` sign.
    /// Length is `rows * (2n + 1)`.
    pub fn to_binary_vector(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.rows.len() * (2 * self.n + 1));
        for row in &self.rows {
            // Phases are guaranteed real by canonicalize().
            push_row_bits(row, &mut out).expect("canonical rows are Hermitian");
        }
        out
    }

    /// Binary vector restricted to rows `[lo, hi)`.
    pub fn rows_binary_vector(&self, lo: usize, hi: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity((hi - lo) * (2 * self.n + 1));
        for row in &self.rows[lo..hi] {
            push_row_bits(row, &mut out).expect("canonical rows are Hermitian");
        }
        out
    }
}

impl core::fmt::Display for StabilizerTableau {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for row in &self.rows {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl core::fmt::Display for CanonicalTableau {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        for row in &self.rows {
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}
