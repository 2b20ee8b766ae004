//! Built-in stabilizer QEC codes and logical-target construction.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::pauli::Pauli;
use crate::tableau::StabilizerTableau;
use crate::{Error, Result};

/// An `[[n, k, d]]` stabilizer code: `n - k` generators plus one logical
/// Z/X pair (only `k = 1` is supported).
#[derive(Clone, Debug)]
pub struct StabilizerCode {
    pub name: String,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub generators: Vec<Pauli>,
    pub logical_z: Pauli,
    pub logical_x: Pauli,
}

/// Which logical basis state a target tableau stabilizes.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum StateLabel {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl StateLabel {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(StateLabel::Zero),
            "one" => Ok(StateLabel::One),
            "plus" => Ok(StateLabel::Plus),
            "minus" => Ok(StateLabel::Minus),
            "plus_i" => Ok(StateLabel::PlusI),
            "minus_i" => Ok(StateLabel::MinusI),
            _ => Err(Error::Parse { line: 0, msg: format!("unknown state label '{s}'") }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            StateLabel::Zero => "zero",
            StateLabel::One => "one",
            StateLabel::Plus => "plus",
            StateLabel::Minus => "minus",
            StateLabel::PlusI => "plus_i",
            StateLabel::MinusI => "minus_i",
        }
    }
}

/// A concrete logical state: the code's generators plus one signed logical
/// operator, assembled into an `n`-row tableau.
#[derive(Clone, Debug)]
pub struct LogicalTarget {
    pub code: StabilizerCode,
    pub state_label: StateLabel,
    pub tableau: StabilizerTableau,
}

/// A state stabilizer group: all `2^n` signed products of a target tableau's rows.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    elements: Vec<Pauli>,
    /// True when every target row is a pure-X or pure-Z string, so the group
    /// factorizes into independent X and Z parts. For such targets QEC
    /// corrects the X and Z components of an error independently.
    css_separable: bool,
}

impl StabilizerCode {
    fn from_table(name: &str, d: usize, gens: &[&str]) -> Self {
        let generators: Vec<Pauli> = gens.iter().map(|s| Pauli::parse(s).unwrap()).collect();
        let n = generators[0].n();
        let logical_z = Pauli::parse(&"Z".repeat(n)).unwrap();
        let logical_x = Pauli::parse(&"X".repeat(n)).unwrap();
        StabilizerCode {
            name: String::from(name),
            n,
            k: n - generators.len(),
            d,
            generators,
            logical_z,
            logical_x,
        }
    }

    /// Validate commutation structure: generators pairwise commute, logicals
    /// commute with generators, and `Z_L`/`X_L` anticommute.
    pub fn validate(&self) -> Result<()> {
        for (i, g) in self.generators.iter().enumerate() {
            for (j, h) in self.generators.iter().enumerate().skip(i + 1) {
                if !g.commutes(h) {
                    return Err(Error::NonCommuting { row_a: i, row_b: j });
                }
            }
            if !g.commutes(&self.logical_z) || !g.commutes(&self.logical_x) {
                return Err(Error::BadLogical {
                    msg: format!("logical anticommutes with generator {i}"),
                });
            }
        }
        if self.logical_z.commutes(&self.logical_x) {
            return Err(Error::BadLogical { msg: String::from("Z_L and X_L must anticommute") });
        }
        Ok(())
    }

    /// Number of correctable errors `t = floor((d-1)/2)`.
    pub fn t(&self) -> usize {
        (self.d - 1) / 2
    }

    /// Parse a custom code definition: generator Pauli strings one per line,
    /// then `ZL: <string>` and `XL: <string>` lines. Distance defaults to 3
    /// unless a `D: <int>` line is given.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut gens = Vec::new();
        let mut zl = None;
        let mut xl = None;
        let mut d = 3usize;
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse { line: idx + 1, msg };
            if let Some(rest) = line.strip_prefix("ZL:") {
                zl = Some(Pauli::parse(rest.trim())?);
            } else if let Some(rest) = line.strip_prefix("XL:") {
                xl = Some(Pauli::parse(rest.trim())?);
            } else if let Some(rest) = line.strip_prefix("D:") {
                d = rest.trim().parse().map_err(|_| err(String::from("bad distance")))?;
            } else {
                gens.push(Pauli::parse(line)?);
            }
        }
        if gens.is_empty() {
            return Err(Error::Parse { line: 0, msg: String::from("no generators") });
        }
        let n = gens[0].n();
        for g in &gens {
            if g.n() != n {
                return Err(Error::Parse { line: 0, msg: String::from("inconsistent length") });
            }
        }
        let logical_z = zl.ok_or(Error::Parse { line: 0, msg: String::from("missing ZL:") })?;
        let logical_x = xl.ok_or(Error::Parse { line: 0, msg: String::from("missing XL:") })?;
        let code = StabilizerCode {
            name: String::from(name),
            n,
            k: n - gens.len(),
            d,
            generators: gens,
            logical_z,
            logical_x,
        };
        code.validate()?;
        Ok(code)
    }
}

/// Names of the compiled-in codes, in listing order.
pub const BUILTIN_CODE_NAMES: [&str; 6] = [
    "perfect_5_1_3",
    "steane_7_1_3",
    "shor_9_1_3",
    "surface17_9_1_3",
    "reedmuller_15_1_3",
    "color_17_1_5",
];

/// Look up a compiled-in code by name.
pub fn builtin_code(name: &str) -> Result<StabilizerCode> {
    let code = match name {
        "perfect_5_1_3" => {
            StabilizerCode::from_table(name, 3, &["IXZZX", "XZZXI", "ZZXIX", "ZXIXZ"])
        }
        "steane_7_1_3" => StabilizerCode::from_table(
            name,
            3,
            &["ZIZIZIZ", "XIXIXIX", "IZZIIZZ", "IXXIIXX", "IIIZZZZ", "IIIXXXX"],
        ),
        "shor_9_1_3" => StabilizerCode::from_table(
            name,
            3,
            &[
                "ZZIIIIIII",
                "ZIZIIIIII",
                "XXXXXXIII",
                "IIIZZIIII",
                "IIIZIZIII",
                "XXXIIIXXX",
                "IIIIIIZZI",
                "IIIIIIZIZ",
            ],
        ),
        "surface17_9_1_3" => StabilizerCode::from_table(
            name,
            3,
            &[
                "ZIIZIIIII",
                "IIIZZIZZI",
                "IZZIZZIII",
                "IIIIIZIIZ",
                "IXXIIIIII",
                "XXIXXIIII",
                "IIIIXXIXX",
                "IIIIIIXXI",
            ],
        ),
        "reedmuller_15_1_3" => StabilizerCode::from_table(
            name,
            3,
            &[
                "ZIZIZIZIZIZIZIZ",
                "XIXIXIXIXIXIXIX",
                "IZZIIZZIIZZIIZZ",
                "IXXIIXXIIXXIIXX",
                "IIIZZZZIIIIZZZZ",
                "IIIXXXXIIIIXXXX",
                "IIIIIIIZZZZZZZZ",
                "IIIIIIIXXXXXXXX",
                "IIZIIIZIIIZIIIZ",
                "IIIIZIZIIIIIZIZ",
                "IIIIIZZIIIIIIZZ",
                "IIIIIIIIIZZIIZZ",
                "IIIIIIIIIIIZZZZ",
                "IIIIIIIIZIZIZIZ",
            ],
        ),
        "color_17_1_5" => StabilizerCode::from_table(
            name,
            5,
            &[
                "XXXXIIIIIIIIIIIII",
                "ZZZZIIIIIIIIIIIII",
                "XIXIXXIIIIIIIIIII",
                "ZIZIZZIIIIIIIIIII",
                "IIIIXXIIXXIIIIIII",
                "IIIIZZIIZZIIIIIII",
                "IIIIIIXXIIXXIIIII",
                "IIIIIIZZIIZZIIIII",
                "IIIIIIIIXXIIXXIII",
                "IIIIIIIIZZIIZZIII",
                "IIIIIIIIIIXXIIXXI",
                "IIIIIIIIIIZZIIZZI",
                "IIIIIIIXIIIXIIIXX",
                "IIIIIIIZIIIZIIIZZ",
                "IIXXIXXIIXXIIXXII",
                "IIZZIZZIIZZIIZZII",
            ],
        ),
        _ => {
            return Err(Error::Parse { line: 0, msg: format!("unknown code '{name}'") });
        }
    };
    code.validate().expect("builtin code tables are consistent");
    Ok(code)
}

/// The n-qubit GHZ "code": generators `Z_i Z_{i+1}` with `Z_L = Z^n` and
/// `X_L = X^n`; its `plus` target is the GHZ state.
pub fn ghz_code(n: usize) -> Result<StabilizerCode> {
    if n < 2 || n > 64 {
        return Err(Error::QubitOutOfRange { qubit: n, n: 64 });
    }
    let mut generators = Vec::with_capacity(n - 1);
    for i in 0..n - 1 {
        let a = Pauli::single(n, i, 'Z')?;
        let b = Pauli::single(n, i + 1, 'Z')?;
        generators.push(a.multiply(&b)?);
    }
    let code = StabilizerCode {
        name: format!("ghz_{n}"),
        n,
        k: 1,
        d: 1,
        generators,
        logical_z: Pauli::parse(&"Z".repeat(n))?,
        logical_x: Pauli::parse(&"X".repeat(n))?,
    };
    code.validate()?;
    Ok(code)
}

/// Assemble the target tableau for a labeled logical state. An explicit
/// `override_logical` replaces the code's default `Z_L`/`X_L` for that axis.
pub fn make_target(
    code: &StabilizerCode,
    state_label: StateLabel,
    override_logical: Option<Pauli>,
) -> Result<LogicalTarget> {
    if code.k != 1 {
        return Err(Error::BadLogical { msg: String::from("only k = 1 codes are supported") });
    }
    let (base, complement, negate) = match state_label {
        StateLabel::Zero => (code.logical_z, code.logical_x, false),
        StateLabel::One => (code.logical_z, code.logical_x, true),
        StateLabel::Plus => (code.logical_x, code.logical_z, false),
        StateLabel::Minus => (code.logical_x, code.logical_z, true),
        StateLabel::PlusI | StateLabel::MinusI => {
            // Y_L = i * X_L * Z_L (Hermitian by construction).
            let y = code.logical_x.multiply(&code.logical_z)?;
            let y = Pauli::from_bits(y.n(), y.x_bits(), y.z_bits(), y.phase() + 1)?;
            if y.phase() % 2 != 0 {
                return Err(Error::ImaginaryPhase);
            }
            (y, code.logical_z, state_label == StateLabel::MinusI)
        }
    };
    let logical = match override_logical {
        Some(ov) => {
            if ov.n() != code.n {
                return Err(Error::DimensionMismatch { expected: code.n, got: ov.n() });
            }
            for (i, g) in code.generators.iter().enumerate() {
                if !ov.commutes(g) {
                    return Err(Error::BadLogical {
                        msg: format!("override anticommutes with generator {i}"),
                    });
                }
            }
            if ov.commutes(&complement) {
                return Err(Error::BadLogical {
                    msg: String::from("override must anticommute with the complementary logical"),
                });
            }
            ov
        }
        None => base,
    };
    let signed = if negate { logical.negated() } else { logical };
    let mut rows = code.generators.clone();
    rows.push(signed);
    let tableau = StabilizerTableau::new(code.n, rows)?;
    // Full-rank check up front so bad targets fail loudly here.
    tableau.canonicalize()?;
    Ok(LogicalTarget { code: code.clone(), state_label, tableau })
}

impl LogicalTarget {
    /// The signed logical row stabilizing this state.
    pub fn signed_logical(&self) -> &Pauli {
        self.tableau.rows().last().unwrap()
    }
}

/// Enumerate all `2^n` signed products of the target rows via a Gray code,
/// one row multiplication per element.
pub fn state_stabilizer_group(target: &LogicalTarget) -> Result<StabilizerGroup> {
    let rows = target.tableau.rows();
    let n = rows.len();
    if n > 20 {
        return Err(Error::BadTask { msg: String::from("stabilizer group too large (n > 20)") });
    }
    let mut elements = Vec::with_capacity(1 << n);
    let mut current = Pauli::identity(target.code.n)?;
    elements.push(current);
    for g in 1u64..(1 << n) {
        // Gray code g^(g>>1): consecutive codes differ in bit `trailing_zeros(g)`.
        let flip = g.trailing_zeros() as usize;
        current = current.multiply(&rows[flip])?;
        elements.push(current);
    }
    let css_separable = rows.iter().all(|r| r.x_bits() == 0 || r.z_bits() == 0);
    Ok(StabilizerGroup { elements, css_separable })
}

impl StabilizerGroup {
    pub fn elements(&self) -> &[Pauli] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn css_separable(&self) -> bool {
        self.css_separable
    }

    /// Minimum weight of `p * s` restricted to the qubits in `mask`, over all
    /// group elements `s` (group elements are padded with identity on any
    /// qubits beyond the code block). Phases are ignored.
    pub fn min_weight_on(&self, p: &Pauli, mask: u64) -> u32 {
        let px = p.x_bits();
        let pz = p.z_bits();
        let mut best = u32::MAX;
        for s in &self.elements {
            let w = (((px ^ s.x_bits()) | (pz ^ s.z_bits())) & mask).count_ones();
            if w < best {
                best = w;
                if best == 0 {
                    break;
                }
            }
        }
        best
    }

    /// The weight QEC must actually correct. For a CSS-separable group the X
    /// and Z components of an error are decoded independently, so the
    /// effective weight is the larger of the two component minima (each
    /// minimized over the group on its own); mixed errors like X_a Z_b stay
    /// correctable for d = 3. Otherwise this is the plain joint minimum.
    pub fn effective_weight_on(&self, p: &Pauli, mask: u64) -> u32 {
        if !self.css_separable {
            return self.min_weight_on(p, mask);
        }
        let px = p.x_bits();
        let pz = p.z_bits();
        let mut best_x = u32::MAX;
        let mut best_z = u32::MAX;
        for s in &self.elements {
            best_x = best_x.min(((px ^ s.x_bits()) & mask).count_ones());
            best_z = best_z.min(((pz ^ s.z_bits()) & mask).count_ones());
            if best_x == 0 && best_z == 0 {
                break;
            }
        }
        best_x.max(best_z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::collections::BTreeSet;
    use alloc::format;

    // all six published codes validate and have the stated shapes.
    #[test]
    fn builtin_codes_consistent() {
        let shapes = [
            ("perfect_5_1_3", 5, 4, 3),
            ("steane_7_1_3", 7, 6, 3),
            ("shor_9_1_3", 9, 8, 3),
            ("surface17_9_1_3", 9, 8, 3),
            ("reedmuller_15_1_3", 15, 14, 3),
            ("color_17_1_5", 17, 16, 5),
        ];
        for (name, n, gens, d) in shapes {
            let code = builtin_code(name).unwrap();
            assert_eq!(code.n, n);
            assert_eq!(code.k, 1);
            assert_eq!(code.d, d);
            assert_eq!(code.generators.len(), gens);
            code.validate().unwrap();
        }
        assert_eq!(
            format!("{}", builtin_code("steane_7_1_3").unwrap().generators[0]),
            "+ZIZIZIZ"
        );
        assert!(builtin_code("nope").is_err());
    }

    // brute-force distance check: for each d=3 code no Pauli of
    // weight <= 2 commutes with all generators while lying outside the
    // generator group.
    #[test]
    fn distance_three_brute_force() {
        for name in ["perfect_5_1_3", "steane_7_1_3", "shor_9_1_3", "surface17_9_1_3"] {
            let code = builtin_code(name).unwrap();
            let n = code.n;
            // Span of the generator bit rows for membership checks.
            let gen_bits: Vec<(u64, u64)> =
                code.generators.iter().map(|g| (g.x_bits(), g.z_bits())).collect();
            let in_group = |x: u64, z: u64| -> bool {
                // Reduce (x,z) against the generator span over GF(2).
                let mut basis = gen_bits.clone();
                let mut v = (x, z);
                // Simple elimination: repeatedly cancel the lowest set bit.
                for col in 0..2 * n {
                    let bit = |p: &(u64, u64)| {
                        if col < n {
                            p.0 >> col & 1 == 1
                        } else {
                            p.1 >> (col - n) & 1 == 1
                        }
                    };
                    if let Some(idx) = basis.iter().position(|b| bit(b)) {
                        let piv = basis.remove(idx);
                        if bit(&v) {
                            v = (v.0 ^ piv.0, v.1 ^ piv.1);
                        }
                        basis = basis
                            .into_iter()
                            .map(|b| if bit(&b) { (b.0 ^ piv.0, b.1 ^ piv.1) } else { b })
                            .collect();
                    }
                }
                v == (0, 0)
            };
            for q1 in 0..n {
                for l1 in ['X', 'Y', 'Z'] {
                    for q2 in q1..n {
                        for l2 in ['X', 'Y', 'Z'] {
                            if q1 == q2 && l1 != l2 {
                                continue;
                            }
                            let p1 = Pauli::single(n, q1, l1).unwrap();
                            let p2 = Pauli::single(n, q2, l2).unwrap();
                            let p = p1.multiply(&p2).unwrap();
                            if p.is_identity_bits() {
                                continue;
                            }
                            let commutes_all =
                                code.generators.iter().all(|g| g.commutes(&p));
                            if commutes_all {
                                assert!(
                                    in_group(p.x_bits(), p.z_bits()),
                                    "{name}: weight-{} logical {p} below distance",
                                    p.weight()
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    // target rows: |0> appends +Z^n, |-> appends -X^n, Steane Y_L = -Y^7.
    #[test]
    fn make_target_signs() {
        let steane = builtin_code("steane_7_1_3").unwrap();
        let t0 = make_target(&steane, StateLabel::Zero, None).unwrap();
        assert_eq!(format!("{}", t0.signed_logical()), "+ZZZZZZZ");
        let perfect = builtin_code("perfect_5_1_3").unwrap();
        let tm = make_target(&perfect, StateLabel::Minus, None).unwrap();
        assert_eq!(format!("{}", tm.signed_logical()), "-XXXXX");
        let ti = make_target(&steane, StateLabel::PlusI, None).unwrap();
        assert_eq!(format!("{}", ti.signed_logical()), "-YYYYYYY");
    }

    // the 5-qubit group has 32 elements; group closure properties.
    #[test]
    fn stabilizer_group_properties() {
        let code = builtin_code("perfect_5_1_3").unwrap();
        let target = make_target(&code, StateLabel::Zero, None).unwrap();
        let group = state_stabilizer_group(&target).unwrap();
        assert_eq!(group.len(), 32);
        let keys: BTreeSet<(u64, u64, u8)> = group
            .elements()
            .iter()
            .map(|p| (p.x_bits(), p.z_bits(), p.phase()))
            .collect();
        assert_eq!(keys.len(), 32, "duplicate group elements");
        assert!(group.elements().contains(&Pauli::identity(5).unwrap()));
        // Closure: product of any two elements is in the group.
        for a in group.elements().iter().take(8) {
            for b in group.elements().iter().take(8) {
                let prod = a.multiply(b).unwrap();
                assert!(keys.contains(&(prod.x_bits(), prod.z_bits(), prod.phase())));
            }
        }
        // Steane |0> group contains +ZZZZZZZ (it is a tableau row).
        let steane = builtin_code("steane_7_1_3").unwrap();
        let t0 = make_target(&steane, StateLabel::Zero, None).unwrap();
        let g = state_stabilizer_group(&t0).unwrap();
        assert!(g.elements().contains(&Pauli::parse("+ZZZZZZZ").unwrap()));
    }

    // custom code round trip and override validation.
    #[test]
    fn custom_code_parse() {
        let text = "# repetition-like demo\nZZI\nIZZ\nZL: ZZZ\nXL: XXX\nD: 1\n";
        let code = StabilizerCode::parse("demo", text).unwrap();
        assert_eq!(code.n, 3);
        assert_eq!(code.d, 1);
        // Override logical must anticommute with the complement.
        let steane = builtin_code("steane_7_1_3").unwrap();
        let bad = Pauli::parse("ZIZIZIZ").unwrap(); // a generator: commutes with X_L
        assert!(make_target(&steane, StateLabel::Zero, Some(bad)).is_err());
        let ok = Pauli::parse("IIZIZZI").unwrap(); // Z_L * ZIZIZIZ * IIIZZZZ
        let t = make_target(&steane, StateLabel::Zero, Some(ok)).unwrap();
        assert_eq!(format!("{}", t.signed_logical()), "+IIZIZZI");
    }
}
