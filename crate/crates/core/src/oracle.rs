//! Exact simulation over dyadic Gaussian numbers `(a + b·i) / 2^m`.
//!
//! Every entry of a NOT/CNOT/V/V†/Toffoli/Fredkin unitary lives in this ring,
//! so equality checks here are exact. Dense unitaries are capped at
//! [`DENSE_LINE_CAP`] lines; [`apply_basis`] works on a sparse state vector
//! and scales to circuits of up to 64 lines.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ir::{Circuit, Gate, GateKind, IrError, Line};

/// Largest line count for which a full unitary is checked or materialized.
pub const DENSE_LINE_CAP: usize = 12;

/// Seed for sampled equivalence checks.
pub const SAMPLE_SEED: u64 = 0x4e43_5653_4545_4431;

/// Default number of basis states probed in sampled mode.
pub const DEFAULT_SAMPLES: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("{lines} lines exceeds the dense cap of {cap}")]
    DimensionTooLarge { lines: usize, cap: usize },
    #[error("sparse simulation supports at most 64 lines, got {0}")]
    TooWideForSparse(usize),
    #[error(transparent)]
    Ir(#[from] IrError),
}

/// `(re + im·i) / 2^exp`, kept in lowest terms.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct DyadicGaussian {
    re: i128,
    im: i128,
    exp: u32,
}

const OVERFLOW: &str = "dyadic arithmetic overflowed i128";

impl DyadicGaussian {
    pub const ZERO: Self = DyadicGaussian { re: 0, im: 0, exp: 0 };
    pub const ONE: Self = DyadicGaussian { re: 1, im: 0, exp: 0 };

    pub fn new(re: i128, im: i128, exp: u32) -> Self {
        DyadicGaussian { re, im, exp }.reduced()
    }

    pub fn from_int(v: i128) -> Self {
        DyadicGaussian { re: v, im: 0, exp: 0 }
    }

    /// `(1 + i) / 2`
    pub fn half_one_plus_i() -> Self {
        Self::new(1, 1, 1)
    }

    /// `(1 - i) / 2`
    pub fn half_one_minus_i() -> Self {
        Self::new(1, -1, 1)
    }

    pub fn parts(&self) -> (i128, i128, u32) {
        (self.re, self.im, self.exp)
    }

    pub fn is_zero(&self) -> bool {
        self.re == 0 && self.im == 0
    }

    pub fn conj(&self) -> Self {
        DyadicGaussian {
            re: self.re,
            im: -self.im,
            exp: self.exp,
        }
    }

    /// `|z|^2` as an exact rational.
    pub fn norm_sqr(&self) -> Ratio<i128> {
        let n = self
            .re
            .checked_mul(self.re)
            .and_then(|a| self.im.checked_mul(self.im).and_then(|b| a.checked_add(b)))
            .expect(OVERFLOW);
        let d = 1i128.checked_shl(2 * self.exp).filter(|_| 2 * self.exp < 127).expect(OVERFLOW);
        Ratio::new(n, d)
    }

    fn reduced(mut self) -> Self {
        if self.re == 0 && self.im == 0 {
            self.exp = 0;
            return self;
        }
        while self.exp > 0 && self.re % 2 == 0 && self.im % 2 == 0 {
            self.re /= 2;
            self.im /= 2;
            self.exp -= 1;
        }
        self
    }

    fn scaled_to(&self, exp: u32) -> (i128, i128) {
        let shift = exp - self.exp;
        let f = 1i128.checked_shl(shift).filter(|_| shift < 127).expect(OVERFLOW);
        (
            self.re.checked_mul(f).expect(OVERFLOW),
            self.im.checked_mul(f).expect(OVERFLOW),
        )
    }
}

impl Add for DyadicGaussian {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let exp = self.exp.max(o.exp);
        let (a, b) = self.scaled_to(exp);
        let (c, d) = o.scaled_to(exp);
        DyadicGaussian {
            re: a.checked_add(c).expect(OVERFLOW),
            im: b.checked_add(d).expect(OVERFLOW),
            exp,
        }
        .reduced()
    }
}

impl Neg for DyadicGaussian {
    type Output = Self;
    fn neg(self) -> Self {
        DyadicGaussian {
            re: -self.re,
            im: -self.im,
            exp: self.exp,
        }
    }
}

impl Sub for DyadicGaussian {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Mul for DyadicGaussian {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let m = |x: i128, y: i128| x.checked_mul(y).expect(OVERFLOW);
        let re = m(self.re, o.re).checked_sub(m(self.im, o.im)).expect(OVERFLOW);
        let im = m(self.re, o.im).checked_add(m(self.im, o.re)).expect(OVERFLOW);
        DyadicGaussian {
            re,
            im,
            exp: self.exp.checked_add(o.exp).expect(OVERFLOW),
        }
        .reduced()
    }
}

impl fmt::Debug for DyadicGaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for DyadicGaussian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = match (self.re, self.im) {
            (r, 0) => format!("{r}"),
            (0, i) => format!("{i}i"),
            (r, i) if i < 0 => format!("({r}{i}i)"),
            (r, i) => format!("({r}+{i}i)"),
        };
        if self.exp == 0 {
            write!(f, "{num}")
        } else {
            write!(f, "{num}/{}", 1u128 << self.exp)
        }
    }
}

/// 2×2 operator applied to the target of a controlled gate.
#[derive(Clone, Copy, Debug)]
enum TargetOp {
    Not,
    Sqrt { dag: bool },
    Swap,
}

fn target_op(g: &Gate) -> TargetOp {
    match g.kind {
        GateKind::X | GateKind::Cnot | GateKind::Toffoli => TargetOp::Not,
        GateKind::V => TargetOp::Sqrt { dag: false },
        GateKind::Vdag => TargetOp::Sqrt { dag: true },
        GateKind::Fredkin => TargetOp::Swap,
    }
}

/// Entries of V (or V†): `(diag, off)` with V = [[diag, off], [off, diag]].
fn sqrt_entries(dag: bool) -> (DyadicGaussian, DyadicGaussian) {
    if dag {
        (
            DyadicGaussian::half_one_minus_i(),
            DyadicGaussian::half_one_plus_i(),
        )
    } else {
        (
            DyadicGaussian::half_one_plus_i(),
            DyadicGaussian::half_one_minus_i(),
        )
    }
}

fn controls_fire(g: &Gate, basis: u64) -> bool {
    g.controls
        .iter()
        .all(|c| ((basis >> c.line) & 1 == 1) != c.negative)
}

/// Sparse state vector: basis index (bit `q` = line `q`) to amplitude.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SparseState {
    amps: HashMap<u64, DyadicGaussian>,
}

impl SparseState {
    pub fn basis(x: u64) -> Self {
        let mut amps = HashMap::new();
        amps.insert(x, DyadicGaussian::ONE);
        SparseState { amps }
    }

    pub fn amplitude(&self, x: u64) -> DyadicGaussian {
        self.amps.get(&x).copied().unwrap_or(DyadicGaussian::ZERO)
    }

    pub fn support_len(&self) -> usize {
        self.amps.len()
    }

    /// Nonzero entries sorted by basis index.
    pub fn entries(&self) -> Vec<(u64, DyadicGaussian)> {
        let mut v: Vec<_> = self.amps.iter().map(|(k, a)| (*k, *a)).collect();
        v.sort_unstable_by_key(|e| e.0);
        v
    }

    /// The single basis state this vector equals with amplitude 1, if any.
    pub fn as_classical(&self) -> Option<u64> {
        if self.amps.len() == 1 {
            let (k, a) = self.amps.iter().next().unwrap();
            (*a == DyadicGaussian::ONE).then_some(*k)
        } else {
            None
        }
    }

    pub fn apply(&mut self, g: &Gate) {
        let op = target_op(g);
        match op {
            TargetOp::Not | TargetOp::Swap => {
                // permutation: remap keys
                let old = std::mem::take(&mut self.amps);
                for (k, a) in old {
                    let k2 = if controls_fire(g, k) {
                        permute(op, g, k)
                    } else {
                        k
                    };
                    self.amps.insert(k2, a);
                }
            }
            TargetOp::Sqrt { dag } => {
                let (diag, off) = sqrt_entries(dag);
                let t = g.target();
                let bit = 1u64 << t;
                let old = std::mem::take(&mut self.amps);
                let mut next: HashMap<u64, DyadicGaussian> = HashMap::with_capacity(old.len() * 2);
                for (k, a) in old {
                    if controls_fire(g, k) {
                        *next.entry(k).or_insert(DyadicGaussian::ZERO) =
                            next.get(&k).copied().unwrap_or(DyadicGaussian::ZERO) + diag * a;
                        let k2 = k ^ bit;
                        *next.entry(k2).or_insert(DyadicGaussian::ZERO) =
                            next.get(&k2).copied().unwrap_or(DyadicGaussian::ZERO) + off * a;
                    } else {
                        let e = next.entry(k).or_insert(DyadicGaussian::ZERO);
                        *e = *e + a;
                    }
                }
                next.retain(|_, a| !a.is_zero());
                self.amps = next;
            }
        }
    }
}

fn permute(op: TargetOp, g: &Gate, k: u64) -> u64 {
    match op {
        TargetOp::Not => k ^ (1u64 << g.target()),
        TargetOp::Swap => {
            let (x, y) = (g.targets[0], g.targets[1]);
            let bx = (k >> x) & 1;
            let by = (k >> y) & 1;
            if bx == by {
                k
            } else {
                k ^ (1u64 << x) ^ (1u64 << y)
            }
        }
        TargetOp::Sqrt { .. } => unreachable!(),
    }
}

/// Applies `c` to the basis state `|x>` without building the unitary.
pub fn apply_basis(c: &Circuit, x: u64) -> Result<SparseState, OracleError> {
    if c.line_count > 64 {
        return Err(OracleError::TooWideForSparse(c.line_count));
    }
    c.validate()?;
    Ok(run_gates(&c.gates, x))
}

pub(crate) fn run_gates(gates: &[Gate], x: u64) -> SparseState {
    let mut s = SparseState::basis(x);
    for g in gates {
        s.apply(g);
    }
    s
}

/// Dense `2^n × 2^n` matrix, column-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ExactUnitary {
    lines: usize,
    data: Vec<DyadicGaussian>,
}

impl fmt::Debug for ExactUnitary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactUnitary({} lines)", self.lines)?;
        for r in 0..self.dim() {
            let row: Vec<String> = (0..self.dim()).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ExactUnitary {
    pub fn identity(lines: usize) -> Self {
        let dim = 1usize << lines;
        let mut data = vec![DyadicGaussian::ZERO; dim * dim];
        for i in 0..dim {
            data[i * dim + i] = DyadicGaussian::ONE;
        }
        ExactUnitary { lines, data }
    }

    /// Builds a matrix from rows of entries (test fixtures).
    pub fn from_rows(rows: &[Vec<DyadicGaussian>]) -> Self {
        let dim = rows.len();
        assert!(dim.is_power_of_two());
        let lines = dim.trailing_zeros() as usize;
        let mut data = vec![DyadicGaussian::ZERO; dim * dim];
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim);
            for (c, v) in row.iter().enumerate() {
                data[c * dim + r] = *v;
            }
        }
        ExactUnitary { lines, data }
    }

    pub fn lines(&self) -> usize {
        self.lines
    }

    pub fn dim(&self) -> usize {
        1 << self.lines
    }

    pub fn get(&self, row: usize, col: usize) -> DyadicGaussian {
        self.data[col * self.dim() + row]
    }

    pub fn column(&self, col: usize) -> &[DyadicGaussian] {
        let d = self.dim();
        &self.data[col * d..(col + 1) * d]
    }

    /// `self · other` (apply `other` first).
    pub fn mul(&self, other: &ExactUnitary) -> ExactUnitary {
        assert_eq!(self.lines, other.lines);
        let d = self.dim();
        let mut data = vec![DyadicGaussian::ZERO; d * d];
        for c in 0..d {
            for k in 0..d {
                let b = other.data[c * d + k];
                if b.is_zero() {
                    continue;
                }
                for r in 0..d {
                    let a = self.data[k * d + r];
                    if !a.is_zero() {
                        data[c * d + r] = data[c * d + r] + a * b;
                    }
                }
            }
        }
        ExactUnitary {
            lines: self.lines,
            data,
        }
    }

    pub fn adjoint(&self) -> ExactUnitary {
        let d = self.dim();
        let mut data = vec![DyadicGaussian::ZERO; d * d];
        for c in 0..d {
            for r in 0..d {
                data[r * d + c] = self.data[c * d + r].conj();
            }
        }
        ExactUnitary {
            lines: self.lines,
            data,
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == ExactUnitary::identity(self.lines)
    }

    /// Flat column-major entries; used as an exact hash key.
    pub fn entries(&self) -> &[DyadicGaussian] {
        &self.data
    }

    fn from_columns(lines: usize, col: impl Fn(u64) -> SparseState) -> ExactUnitary {
        let d = 1usize << lines;
        let mut data = vec![DyadicGaussian::ZERO; d * d];
        for c in 0..d {
            for (r, a) in col(c as u64).entries() {
                data[c * d + r as usize] = a;
            }
        }
        ExactUnitary { lines, data }
    }
}

fn check_dense(lines: usize) -> Result<(), OracleError> {
    if lines > DENSE_LINE_CAP {
        Err(OracleError::DimensionTooLarge {
            lines,
            cap: DENSE_LINE_CAP,
        })
    } else {
        Ok(())
    }
}

pub fn gate_unitary(g: &Gate, n: usize) -> Result<ExactUnitary, OracleError> {
    check_dense(n)?;
    let c = Circuit::from_gates(n, vec![g.clone()]);
    c.validate()?;
    Ok(ExactUnitary::from_columns(n, |x| run_gates(&c.gates, x)))
}

/// Product of the gate unitaries, leftmost gate applied first.
pub fn circuit_unitary(c: &Circuit) -> Result<ExactUnitary, OracleError> {
    check_dense(c.line_count)?;
    c.validate()?;
    Ok(ExactUnitary::from_columns(c.line_count, |x| run_gates(&c.gates, x)))
}

/// Exact identity test; streams columns so the matrix is never stored.
pub fn is_identity(c: &Circuit) -> Result<bool, OracleError> {
    check_dense(c.line_count)?;
    c.validate()?;
    Ok((0..1u64 << c.line_count).all(|x| run_gates(&c.gates, x).as_classical() == Some(x)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EquivMode {
    /// Every column compared exactly.
    Dense,
    /// `k` pseudo-random basis states, fixed seed. A pass means "consistent".
    Sampled(usize),
}

/// Basis states probed by sampled checks. Deterministic for a given width.
pub fn sample_basis_states(lines: usize, k: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(SAMPLE_SEED ^ lines as u64);
    let mask = if lines >= 64 { u64::MAX } else { (1u64 << lines) - 1 };
    let mut v = vec![0, mask];
    while v.len() < k.max(2) {
        v.push(rng.gen::<u64>() & mask);
    }
    v.truncate(k.max(1));
    v
}

pub fn equivalent(c1: &Circuit, c2: &Circuit, mode: EquivMode) -> Result<bool, OracleError> {
    if c1.line_count != c2.line_count {
        return Err(IrError::WidthMismatch(c1.line_count, c2.line_count).into());
    }
    c1.validate()?;
    c2.validate()?;
    let same = |x: u64| run_gates(&c1.gates, x) == run_gates(&c2.gates, x);
    match mode {
        EquivMode::Dense => {
            check_dense(c1.line_count)?;
            Ok((0..1u64 << c1.line_count).all(same))
        }
        EquivMode::Sampled(k) => {
            if c1.line_count > 64 {
                return Err(OracleError::TooWideForSparse(c1.line_count));
            }
            Ok(sample_basis_states(c1.line_count, k).into_iter().all(same))
        }
    }
}

/// How a pass result was checked.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verification {
    Exact,
    Sampled(usize),
    Skipped,
}

impl fmt::Display for Verification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verification::Exact => write!(f, "exact"),
            Verification::Sampled(k) => write!(f, "sampled({k})"),
            Verification::Skipped => write!(f, "skipped"),
        }
    }
}

/// Dense check up to the cap, sampled above it.
pub fn verify_auto(c1: &Circuit, c2: &Circuit) -> Result<(bool, Verification), OracleError> {
    if c1.line_count <= DENSE_LINE_CAP {
        Ok((equivalent(c1, c2, EquivMode::Dense)?, Verification::Exact))
    } else {
        let k = DEFAULT_SAMPLES;
        Ok((equivalent(c1, c2, EquivMode::Sampled(k))?, Verification::Sampled(k)))
    }
}

/// Inputs the boundary-aware check ranges over: constant lines pinned,
/// every other line free. Exhaustive only within the dense cap.
fn constrained_inputs(c: &Circuit) -> (Vec<u64>, bool) {
    let free: Vec<Line> = (0..c.line_count)
        .filter(|&l| c.lines[l].constant.is_none())
        .collect();
    let fixed: u64 = c
        .constant_lines()
        .filter(|&(_, v)| v)
        .fold(0, |acc, (l, _)| acc | (1u64 << l));
    let spread = |bits: u64| {
        free.iter()
            .enumerate()
            .fold(fixed, |acc, (i, &l)| acc | (((bits >> i) & 1) << l))
    };
    if c.line_count <= DENSE_LINE_CAP {
        ((0..1u64 << free.len()).map(spread).collect(), true)
    } else {
        (
            sample_basis_states(free.len(), DEFAULT_SAMPLES)
                .into_iter()
                .map(spread)
                .collect(),
            false,
        )
    }
}

/// Output distribution restricted to the non-garbage lines.
fn kept_distribution(c: &Circuit, s: &SparseState) -> Vec<(u64, Ratio<i128>)> {
    let keep: u64 = (0..c.line_count)
        .filter(|&l| !c.lines[l].garbage)
        .fold(0, |acc, l| acc | (1u64 << l));
    let mut dist: HashMap<u64, Ratio<i128>> = HashMap::new();
    for (k, a) in s.entries() {
        *dist.entry(k & keep).or_insert_with(|| Ratio::from_integer(0)) += a.norm_sqr();
    }
    let mut v: Vec<_> = dist.into_iter().filter(|(_, p)| *p != Ratio::from_integer(0)).collect();
    v.sort_unstable_by_key(|e| e.0);
    v
}

/// Equivalence on the subspace where constant inputs hold their declared
/// values, comparing only the measured non-garbage outputs. Line attributes
/// are taken from `reference`.
pub fn equivalent_on_outputs(
    reference: &Circuit,
    candidate: &Circuit,
) -> Result<(bool, Verification), OracleError> {
    if reference.line_count != candidate.line_count {
        return Err(IrError::WidthMismatch(reference.line_count, candidate.line_count).into());
    }
    if reference.line_count > 64 {
        return Err(OracleError::TooWideForSparse(reference.line_count));
    }
    reference.validate()?;
    candidate.validate()?;
    let (inputs, exhaustive) = constrained_inputs(reference);
    let n = inputs.len();
    let ok = inputs.into_iter().all(|x| {
        kept_distribution(reference, &run_gates(&reference.gates, x))
            == kept_distribution(reference, &run_gates(&candidate.gates, x))
    });
    Ok((
        ok,
        if exhaustive {
            Verification::Exact
        } else {
            Verification::Sampled(n)
        },
    ))
}

/// True when every probed basis input maps to a single basis output.
/// Exhaustive up to the dense cap, sampled above.
pub fn is_classical(c: &Circuit) -> Result<bool, OracleError> {
    if c.line_count > 64 {
        return Err(OracleError::TooWideForSparse(c.line_count));
    }
    c.validate()?;
    let inputs: Vec<u64> = if c.line_count <= DENSE_LINE_CAP {
        (0..1u64 << c.line_count).collect()
    } else {
        sample_basis_states(c.line_count, DEFAULT_SAMPLES)
    };
    Ok(inputs
        .into_iter()
        .all(|x| run_gates(&c.gates, x).as_classical().is_some()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::Control;

    fn dg(re: i128, im: i128, exp: u32) -> DyadicGaussian {
        DyadicGaussian::new(re, im, exp)
    }

    #[test]
    fn ring_basics() {
        let a = DyadicGaussian::half_one_plus_i();
        let b = DyadicGaussian::half_one_minus_i();
        assert_eq!(a * b, dg(1, 0, 1));
        assert_eq!(a + b, DyadicGaussian::ONE);
        assert_eq!(a * a, dg(0, 1, 1));
        assert_eq!(dg(2, 4, 2), dg(1, 2, 1));
        assert_eq!(dg(0, 0, 5).parts(), (0, 0, 0));
        assert_eq!(a.norm_sqr(), Ratio::new(1, 2));
    }

    #[test]
    fn v_matrix() {
        let u = gate_unitary(&Gate::v_free(0), 1).unwrap();
        let p = DyadicGaussian::half_one_plus_i();
        let m = DyadicGaussian::half_one_minus_i();
        assert_eq!(u, ExactUnitary::from_rows(&[vec![p, m], vec![m, p]]));
        let x = gate_unitary(&Gate::x(0), 1).unwrap();
        assert_eq!(u.mul(&u), x);
        assert!(u.mul(&u.adjoint()).is_identity());
    }

    #[test]
    fn cnot_permutation() {
        let u = gate_unitary(&Gate::cnot(0, 1), 2).unwrap();
        // index bit q = line q: |q0=1,q1=0> is index 1, |q0=1,q1=1> is index 3
        assert_eq!(u.get(3, 1), DyadicGaussian::ONE);
        assert_eq!(u.get(1, 3), DyadicGaussian::ONE);
        assert_eq!(u.get(0, 0), DyadicGaussian::ONE);
        assert_eq!(u.get(2, 2), DyadicGaussian::ONE);
    }

    #[test]
    fn empty_and_trivial_circuits() {
        assert!(circuit_unitary(&Circuit::new(2)).unwrap().is_identity());
        let xx = Circuit::from_gates(1, vec![Gate::x(0), Gate::x(0)]);
        assert!(is_identity(&xx).unwrap());
    }

    #[test]
    fn apply_basis_examples() {
        let c = Circuit::from_gates(1, vec![Gate::x(0)]);
        assert_eq!(apply_basis(&c, 0).unwrap().as_classical(), Some(1));
        let v = Circuit::from_gates(1, vec![Gate::v_free(0)]);
        let s = apply_basis(&v, 0).unwrap();
        assert_eq!(s.amplitude(0), DyadicGaussian::half_one_plus_i());
        assert_eq!(s.amplitude(1), DyadicGaussian::half_one_minus_i());
    }

    #[test]
    fn identity_examples() {
        let vvc = Circuit::from_gates(2, vec![Gate::v(0, 1), Gate::v(0, 1), Gate::cnot(0, 1)]);
        assert!(is_identity(&vvc).unwrap());
        let vv = Circuit::from_gates(2, vec![Gate::v(0, 1), Gate::v(0, 1)]);
        assert!(!is_identity(&vv).unwrap());
        assert!(equivalent(&vv, &Circuit::from_gates(2, vec![Gate::cnot(0, 1)]), EquivMode::Dense).unwrap());
    }

    #[test]
    fn dense_cap() {
        let c = Circuit::new(13);
        assert!(matches!(circuit_unitary(&c), Err(OracleError::DimensionTooLarge { .. })));
        assert!(matches!(
            equivalent(&c, &c, EquivMode::Dense),
            Err(OracleError::DimensionTooLarge { .. })
        ));
        assert!(equivalent(&c, &c, EquivMode::Sampled(8)).unwrap());
    }

    #[test]
    fn negative_controls_and_fredkin() {
        let t = Gate::toffoli(vec![Control::pos(0), Control::neg(1)], 2);
        let c = Circuit::from_gates(3, vec![t]);
        // q0=1, q1=0 flips q2
        assert_eq!(apply_basis(&c, 0b001).unwrap().as_classical(), Some(0b101));
        assert_eq!(apply_basis(&c, 0b011).unwrap().as_classical(), Some(0b011));
        let f = Circuit::from_gates(3, vec![Gate::fredkin(vec![Control::pos(0)], 1, 2)]);
        assert_eq!(apply_basis(&f, 0b011).unwrap().as_classical(), Some(0b101));
        assert_eq!(apply_basis(&f, 0b010).unwrap().as_classical(), Some(0b010));
    }

    #[test]
    fn sampled_states_are_deterministic() {
        assert_eq!(sample_basis_states(20, 16), sample_basis_states(20, 16));
        assert!(sample_basis_states(5, 40).iter().all(|&x| x < 32));
    }
}
