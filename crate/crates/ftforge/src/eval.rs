//! Monte-Carlo evaluation of noisy preparation circuits: Pauli-frame
//! simulation under per-gate depolarizing noise, post-selection on flag
//! outcomes, one perfect round of lookup-table error correction, and
//! log-log slope fitting of the logical error rate.

use std::collections::HashMap;

use ftforge_core::codes::LogicalTarget;
use ftforge_core::faults::{check_preparation, data_mask, error_generators};
use ftforge_core::{Circuit, Pauli};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::CliError;

/// Syndrome lookup decoder for distance-3 codes. For CSS codes the X and Z
/// error components are decoded independently (each against the generators
/// of the opposite type), which is what makes mixed single-fault errors like
/// X_a Z_b correctable; non-CSS codes use one joint table over all
/// weight-<=t Paulis. Unknown syndromes decode to identity.
#[derive(Clone, Debug)]
pub struct Decoder {
    t: usize,
    generators: Vec<Pauli>,
    css: bool,
    /// CSS: syndrome over Z-type generators -> X-correction bits.
    x_table: HashMap<u64, u64>,
    /// CSS: syndrome over X-type generators -> Z-correction bits.
    z_table: HashMap<u64, u64>,
    /// Non-CSS: joint syndrome -> (x, z) correction bits.
    joint: HashMap<u64, (u64, u64)>,
}

fn parity(bits: u64) -> u64 {
    (bits.count_ones() & 1) as u64
}

/// Enumerate bit patterns of weight <= t over n bits (weight-ascending).
fn patterns_up_to(n: usize, t: usize) -> Vec<u64> {
    let mut out = vec![0u64];
    let mut level = vec![0u64];
    for _ in 0..t {
        let mut next = Vec::new();
        for &base in &level {
            let start = 64 - base.leading_zeros() as usize;
            for q in start..n {
                let p = base | 1 << q;
                next.push(p);
                out.push(p);
            }
        }
        level = next;
    }
    out
}

impl Decoder {
    /// Build the lookup tables from all weight-<=t data Paulis. Collisions
    /// keep the lower-weight (then lexicographically smaller) correction.
    pub fn build(target: &LogicalTarget) -> Result<Self, CliError> {
        let code = &target.code;
        let n = code.n;
        let t = code.t();
        let generators = code.generators.clone();
        let css = generators.iter().all(|g| g.x_bits() == 0 || g.z_bits() == 0);
        let mut dec = Decoder {
            t,
            generators,
            css,
            x_table: HashMap::new(),
            z_table: HashMap::new(),
            joint: HashMap::new(),
        };
        if css {
            let z_gens: Vec<u64> =
                dec.generators.iter().filter(|g| g.x_bits() == 0).map(|g| g.z_bits()).collect();
            let x_gens: Vec<u64> =
                dec.generators.iter().filter(|g| g.z_bits() == 0).map(|g| g.x_bits()).collect();
            for bits in patterns_up_to(n, t) {
                let sx = syndrome_bits(bits, &z_gens);
                dec.x_table.entry(sx).or_insert(bits);
                let sz = syndrome_bits(bits, &x_gens);
                dec.z_table.entry(sz).or_insert(bits);
            }
            // Two weight-1 errors of the same type may share a syndrome only
            // when they are equivalent modulo the stabilizer group (e.g. Z0
            // and Z1 of the Shor code, whose product Z0Z1 is a generator);
            // an inequivalent collision signals a bad code definition.
            if t >= 1 {
                for (checks, span) in [(&z_gens, &x_gens), (&x_gens, &z_gens)] {
                    let mut seen: HashMap<u64, u64> = HashMap::new();
                    for q in 0..n {
                        let s = syndrome_bits(1 << q, checks);
                        if let Some(&prev) = seen.get(&s) {
                            if !in_gf2_span(prev | 1 << q, span) {
                                return Err(CliError::Eval(format!(
                                    "inequivalent weight-1 errors share a syndrome \
                                     (qubits {} and {q})",
                                    prev.trailing_zeros()
                                )));
                            }
                        } else {
                            seen.insert(s, 1 << q);
                        }
                    }
                }
            }
        } else {
            // Joint enumeration: all Paulis of weight <= t, weight-ascending.
            let mut weight_order: Vec<(u64, u64)> = vec![(0, 0)];
            let mut level: Vec<(u64, u64, usize)> = vec![(0, 0, 0)];
            for _ in 0..t {
                let mut next = Vec::new();
                for &(x, z, lo) in &level {
                    for q in lo..n {
                        for (dx, dz) in [(1u64, 0u64), (0, 1), (1, 1)] {
                            let e = (x | dx << q, z | dz << q);
                            next.push((e.0, e.1, q + 1));
                            weight_order.push(e);
                        }
                    }
                }
                level = next;
            }
            for (x, z) in weight_order {
                let s = dec.joint_syndrome(x, z);
                dec.joint.entry(s).or_insert((x, z));
            }
        }
        Ok(dec)
    }

    fn joint_syndrome(&self, x: u64, z: u64) -> u64 {
        let mut s = 0u64;
        for (i, g) in self.generators.iter().enumerate() {
            // Symplectic product: anticommutes iff the overlap parity is odd.
            let anti = parity(x & g.z_bits()) ^ parity(z & g.x_bits());
            s |= anti << i;
        }
        s
    }

    /// Correction Pauli (bit masks) for the given residual error.
    pub fn correct(&self, residual: &Pauli) -> (u64, u64) {
        if self.css {
            let z_gens: Vec<u64> =
                self.generators.iter().filter(|g| g.x_bits() == 0).map(|g| g.z_bits()).collect();
            let x_gens: Vec<u64> =
                self.generators.iter().filter(|g| g.z_bits() == 0).map(|g| g.x_bits()).collect();
            let sx = syndrome_bits(residual.x_bits(), &z_gens);
            let sz = syndrome_bits(residual.z_bits(), &x_gens);
            let cx = self.x_table.get(&sx).copied().unwrap_or(0);
            let cz = self.z_table.get(&sz).copied().unwrap_or(0);
            (cx, cz)
        } else {
            self.joint
                .get(&self.joint_syndrome(residual.x_bits(), residual.z_bits()))
                .copied()
                .unwrap_or((0, 0))
        }
    }

    pub fn is_css(&self) -> bool {
        self.css
    }

    pub fn t(&self) -> usize {
        self.t
    }
}

/// Is `v` in the GF(2) span of `basis` (each element one bit mask)?
fn in_gf2_span(v: u64, basis: &[u64]) -> bool {
    let mut rows: Vec<u64> = basis.to_vec();
    let mut v = v;
    for i in 0..64 {
        let pivot = match rows.iter().position(|r| r >> i & 1 == 1) {
            Some(p) => rows.swap_remove(p),
            None => continue,
        };
        if v >> i & 1 == 1 {
            v ^= pivot;
        }
        for r in rows.iter_mut() {
            if *r >> i & 1 == 1 {
                *r ^= pivot;
            }
        }
    }
    v == 0
}

fn syndrome_bits(error_bits: u64, checks: &[u64]) -> u64 {
    let mut s = 0u64;
    for (i, &c) in checks.iter().enumerate() {
        s |= parity(error_bits & c) << i;
    }
    s
}

/// One perfect round of error correction on `residual`, then a logical
/// check: failure iff the corrected residual acts as a logical operator
/// that anticommutes with the state's stabilizing signed logical (e.g. Z_L
/// for |0>_L). A residual whose syndrome the table cannot decode is left
/// uncorrected and counts as a failure.
pub fn logical_failure(residual: &Pauli, target: &LogicalTarget, decoder: &Decoder) -> bool {
    let (cx, cz) = decoder.correct(residual);
    let rx = residual.x_bits() ^ cx;
    let rz = residual.z_bits() ^ cz;
    for g in &target.code.generators {
        if parity(rx & g.z_bits()) ^ parity(rz & g.x_bits()) == 1 {
            return true; // undecoded syndrome: still outside the codespace
        }
    }
    let l = target.signed_logical();
    parity(rx & l.z_bits()) ^ parity(rz & l.x_bits()) == 1
}

/// Pauli-frame simulator for one fixed circuit: the Clifford part is
/// deterministic, so only the random error frame is propagated per trial.
pub struct FrameSimulator {
    n_total: usize,
    n_data: usize,
    gates: Vec<ftforge_core::Gate>,
    /// Per gate: its depolarizing error generators (3 or 15 Paulis).
    gens: Vec<Vec<Pauli>>,
}

impl FrameSimulator {
    pub fn new(c: &Circuit) -> Self {
        let n = c.n_total();
        let gens = c.gates.iter().map(|g| error_generators(g, n)).collect();
        FrameSimulator { n_total: n, n_data: c.n_data, gates: c.gates.clone(), gens }
    }

    /// One noisy trajectory: returns (flag-triggered, residual data Pauli).
    pub fn trial<R: Rng>(&self, p: f64, rng: &mut R) -> (bool, Pauli) {
        let mut frame = Pauli::identity(self.n_total).expect("valid register");
        for (g, gens) in self.gates.iter().zip(&self.gens) {
            frame = frame.conjugated(g);
            if p > 0.0 && rng.gen::<f64>() < p {
                let e = &gens[rng.gen_range(0..gens.len())];
                frame = frame.multiply(e).expect("same register");
            }
        }
        let flag_mask = !data_mask(self.n_data) & (!0u64 >> (64 - self.n_total));
        let flagged = frame.x_bits() & flag_mask != 0;
        let residual = Pauli::from_bits(
            self.n_data,
            frame.x_bits() & data_mask(self.n_data),
            frame.z_bits() & data_mask(self.n_data),
            0,
        )
        .expect("data restriction");
        (flagged, residual)
    }
}

/// Single-call form of one noisy trajectory (see [`FrameSimulator::trial`]).
pub fn pauli_frame_trial<R: Rng>(c: &Circuit, p: f64, rng: &mut R) -> (bool, Pauli) {
    FrameSimulator::new(c).trial(p, rng)
}

/// Per-noise-level statistics.
#[derive(Clone, Debug)]
pub struct EvalRow {
    pub p: f64,
    pub trials: u64,
    pub accepted: u64,
    pub acceptance_rate: f64,
    pub logical_errors: u64,
    /// `None` when no trial was accepted at this noise level.
    pub logical_error_rate: Option<f64>,
    pub ler_ci_low: f64,
    pub ler_ci_high: f64,
}

/// Full evaluation output: per-p rows plus the fitted log-log LER slope.
#[derive(Clone, Debug)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
    /// (slope, intercept, r^2) of ln(LER) vs ln(p); `None` with < 3
    /// nonzero-LER points.
    pub fit: Option<(f64, f64, f64)>,
    /// Decay constant c of the acceptance ~ exp(-c p) fit.
    pub acceptance_decay: Option<f64>,
}

/// Wilson 95% score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959963984540054f64;
    let n = n as f64;
    let phat = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Ordinary least squares of ln(rate) on ln(p): (slope, intercept, r^2).
/// Needs at least 3 points with positive rate.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<(f64, f64, f64)> {
    let data: Vec<(f64, f64)> = points
        .iter()
        .filter(|(p, r)| *p > 0.0 && *r > 0.0)
        .map(|(p, r)| (p.ln(), r.ln()))
        .collect();
    if data.len() < 3 {
        return None;
    }
    let n = data.len() as f64;
    let sx: f64 = data.iter().map(|(x, _)| x).sum();
    let sy: f64 = data.iter().map(|(_, y)| y).sum();
    let (mx, my) = (sx / n, sy / n);
    let sxx: f64 = data.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    let sxy: f64 = data.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 =
        data.iter().map(|(x, y)| (y - (intercept + slope * x)).powi(2)).sum();
    let ss_tot: f64 = data.iter().map(|(_, y)| (y - my) * (y - my)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Some((slope, intercept, r2))
}

/// Default noise grid: 8 log-spaced points in [3e-4, 1e-2].
pub fn default_p_grid() -> Vec<f64> {
    log_spaced(3e-4, 1e-2, 8)
}

pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect()
}

/// Run `trials` noisy trajectories per noise level. Per-trial RNG streams
/// are indexed by (noise level, trial), so the report is byte-identical for
/// a fixed seed regardless of how trials are scheduled. The circuit must
/// pass the noiseless state and product checks first.
pub fn evaluate(
    c: &Circuit,
    target: &LogicalTarget,
    p_list: &[f64],
    trials: u64,
    seed: u64,
) -> Result<EvalReport, CliError> {
    let (state_ok, product_ok) = check_preparation(c, target)?;
    if !state_ok || !product_ok {
        return Err(CliError::Eval(String::from(
            "circuit does not prepare the target as a data x flag product state",
        )));
    }
    let decoder = Decoder::build(target)?;
    let sim = FrameSimulator::new(c);
    let base = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(p_list.len());
    for (pi, &p) in p_list.iter().enumerate() {
        let mut accepted = 0u64;
        let mut failures = 0u64;
        for trial in 0..trials {
            let mut rng = base.clone();
            rng.set_stream(((pi as u64) << 40) | trial);
            let (flagged, residual) = sim.trial(p, &mut rng);
            if flagged {
                continue;
            }
            accepted += 1;
            if logical_failure(&residual, target, &decoder) {
                failures += 1;
            }
        }
        let (lo, hi) = wilson_interval(failures, accepted);
        rows.push(EvalRow {
            p,
            trials,
            accepted,
            acceptance_rate: accepted as f64 / trials as f64,
            logical_errors: failures,
            logical_error_rate: if accepted > 0 {
                Some(failures as f64 / accepted as f64)
            } else {
                None
            },
            ler_ci_low: lo,
            ler_ci_high: hi,
        });
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.logical_error_rate.map(|l| (r.p, l)))
        .collect();
    let fit = fit_loglog_slope(&pts);
    let acc_pts: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.acceptance_rate > 0.0)
        .map(|r| (r.p, r.acceptance_rate.ln()))
        .collect();
    let acceptance_decay = if acc_pts.len() >= 2 {
        let n = acc_pts.len() as f64;
        let mx = acc_pts.iter().map(|(x, _)| x).sum::<f64>() / n;
        let my = acc_pts.iter().map(|(_, y)| y).sum::<f64>() / n;
        let sxx: f64 = acc_pts.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
        let sxy: f64 = acc_pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        Some(-sxy / sxx)
    } else {
        None
    };
    Ok(EvalReport { rows, fit, acceptance_decay })
}

impl EvalReport {
    /// External CSV format: one row per noise level, then footer rows for
    /// the fitted slope, intercept, and r^2.
    pub fn render_csv(&self) -> String {
        let mut out = String::from(
            "p,trials,accepted,acceptance_rate,logical_errors,logical_error_rate,ler_ci_low,ler_ci_high\n",
        );
        for r in &self.rows {
            let ler = r.logical_error_rate.map(|l| l.to_string()).unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.p,
                r.trials,
                r.accepted,
                r.acceptance_rate,
                r.logical_errors,
                ler,
                r.ler_ci_low,
                r.ler_ci_high
            ));
        }
        if let Some((slope, intercept, r2)) = self.fit {
            out.push_str(&format!("slope,{slope}\nintercept,{intercept}\nr2,{r2}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ftforge_core::codes::{builtin_code, make_target, StateLabel};

    fn steane_zero() -> LogicalTarget {
        let code = builtin_code("steane_7_1_3").unwrap();
        make_target(&code, StateLabel::Zero, None).unwrap()
    }

    #[test]
    fn decoder_basics() {
        // zero syndrome -> identity; X3 decodes to itself; all 21
        // single-Pauli syndromes of the Steane code are distinct.
        let target = steane_zero();
        let dec = Decoder::build(&target).unwrap();
        assert!(dec.is_css());
        let id = Pauli::identity(7).unwrap();
        assert_eq!(dec.correct(&id), (0, 0));
        let x3 = Pauli::single(7, 3, 'X').unwrap();
        let (cx, cz) = dec.correct(&x3);
        assert_eq!((cx, cz), (1 << 3, 0));
        let mut syndromes = std::collections::HashSet::new();
        for q in 0..7 {
            for letter in ['X', 'Y', 'Z'] {
                let e = Pauli::single(7, q, letter).unwrap();
                assert!(syndromes.insert(dec.joint_syndrome(e.x_bits(), e.z_bits())));
            }
        }
        assert_eq!(syndromes.len(), 21);
    }

    #[test]
    fn logical_failure_cases() {
        // identity and Z_L stabilize |0>_L; X_L flips it.
        let target = steane_zero();
        let dec = Decoder::build(&target).unwrap();
        assert!(!logical_failure(&Pauli::identity(7).unwrap(), &target, &dec));
        let zl = Pauli::parse("ZZZZZZZ").unwrap();
        assert!(!logical_failure(&zl, &target, &dec));
        let xl = Pauli::parse("XXXXXXX").unwrap();
        assert!(logical_failure(&xl, &target, &dec));
        // Mixed single-qubit components on different qubits decode
        // component-wise on a CSS code.
        let mixed = Pauli::parse("XZIIIII").unwrap();
        assert!(!logical_failure(&mixed, &target, &dec));
    }

    #[test]
    fn noiseless_trial_is_clean() {
        let c = Circuit::parse("qubits 3 0\nH 0\nCX 0 1\nCX 1 2\n").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (flagged, residual) = pauli_frame_trial(&c, 0.0, &mut rng);
        assert!(!flagged);
        assert!(residual.is_identity_bits());
    }

    #[test]
    fn injected_flag_x_flips_flag() {
        // an X landing on the flag after the last gate touching it
        // flips that flag. Drive p=1 on a 1-gate circuit whose only 2-qubit
        // gate targets the flag and check some trials flag.
        let c = Circuit::parse("qubits 1 1\nCX 0 1\n").unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut any_flag = false;
        for _ in 0..100 {
            let (flagged, _) = pauli_frame_trial(&c, 1.0, &mut rng);
            any_flag |= flagged;
        }
        assert!(any_flag);
    }

    #[test]
    fn fit_slope_exact_and_noisy() {
        // exact power-law data recover their exponent.
        let quad: Vec<(f64, f64)> = (1..=6).map(|i| {
            let p = 1e-3 * i as f64;
            (p, p * p)
        }).collect();
        let (s, _, r2) = fit_loglog_slope(&quad).unwrap();
        assert!((s - 2.0).abs() < 1e-9);
        assert!((r2 - 1.0).abs() < 1e-9);
        let lin: Vec<(f64, f64)> = (1..=6).map(|i| {
            let p = 1e-3 * i as f64;
            (p, 0.3 * p)
        }).collect();
        assert!((fit_loglog_slope(&lin).unwrap().0 - 1.0).abs() < 1e-9);
        // 5% multiplicative noise keeps the slope in [1.9, 2.1].
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let noisy: Vec<(f64, f64)> = (1..=8).map(|i| {
            let p = 4e-4 * 1.6f64.powi(i);
            (p, p * p * (1.0 + rng.gen_range(-0.05..0.05)))
        }).collect();
        let (s, _, _) = fit_loglog_slope(&noisy).unwrap();
        assert!((1.9..=2.1).contains(&s), "slope {s}");
        assert!(fit_loglog_slope(&quad[..2]).is_none());
    }

    #[test]
    fn wilson_interval_sane() {
        let (lo, hi) = wilson_interval(0, 1000);
        assert!(lo.abs() < 1e-12);
        assert!(hi < 0.01);
        let (lo, hi) = wilson_interval(500, 1000);
        assert!(lo < 0.5 && 0.5 < hi);
    }

    #[test]
    fn evaluate_p_zero_row() {
        // p = 0: acceptance 1, LER 0.
        let c = Circuit::parse(
            "qubits 7 0\nH 1\nH 2\nH 3\nCX 1 0\nCX 3 5\nCX 2 6\nCX 1 4\nCX 2 0\nCX 3 6\nCX 1 5\nCX 6 4\n",
        )
        .unwrap();
        let target = steane_zero();
        let report = evaluate(&c, &target, &[0.0], 100, 1).unwrap();
        assert_eq!(report.rows[0].accepted, 100);
        assert_eq!(report.rows[0].logical_errors, 0);
        assert_eq!(report.rows[0].logical_error_rate, Some(0.0));
    }

    #[test]
    fn evaluate_is_deterministic() {
        let c = Circuit::parse("qubits 3 0\nH 0\nCX 0 1\nCX 1 2\n").unwrap();
        let code = ftforge_core::codes::ghz_code(3).unwrap();
        let target = make_target(&code, StateLabel::Plus, None).unwrap();
        let a = evaluate(&c, &target, &[1e-3, 3e-3], 2000, 7).unwrap();
        let b = evaluate(&c, &target, &[1e-3, 3e-3], 2000, 7).unwrap();
        assert_eq!(a.render_csv(), b.render_csv());
    }

    #[test]
    fn rejects_non_product_circuit() {
        // A CX into a flag leaves data and flag entangled: evaluate refuses.
        let c = Circuit::parse("qubits 3 1\nH 0\nCX 0 1\nCX 1 2\nCX 0 3\n").unwrap();
        let code = ftforge_core::codes::ghz_code(3).unwrap();
        let target = make_target(&code, StateLabel::Zero, None).unwrap();
        assert!(evaluate(&c, &target, &[1e-3], 10, 0).is_err());
    }
}
