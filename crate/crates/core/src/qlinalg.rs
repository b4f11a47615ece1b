//! Dense complex linear algebra for 2- and 4-qubit systems.
//!
//! Basis labels follow a fixed convention: qubit 0 is the most significant
//! bit of a computational-basis index, so `|q0 q1 q2 q3>` has index
//! `q0·8 + q1·4 + q2·2 + q3`. Every operation below uses it.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Tolerances a [`DensityMatrix`] must satisfy on construction.
pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-9;
pub const UNITARITY_TOL: f64 = 1e-10;
pub const NORM_TOL: f64 = 1e-12;

/// Post-selection probabilities below this are treated as exact annihilation.
pub const ZERO_PROBABILITY_TOL: f64 = 1e-14;

/// Square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    entries: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self {
            dim,
            entries: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics unless `entries.len()` is a perfect square.
    pub fn from_entries(entries: Vec<C64>) -> Self {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        assert!(
            dim > 0 && dim * dim == entries.len(),
            "entry count {} is not a positive square",
            entries.len()
        );
        Self { dim, entries }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), dim, "row {i} has the wrong length");
            for (j, &x) in row.iter().enumerate() {
                m[(i, j)] = C64::new(x, 0.0);
            }
        }
        m
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// `|a><b|`
    pub fn outer(a: &[C64], b: &[C64]) -> Self {
        assert_eq!(a.len(), b.len());
        let dim = a.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = a[i] * b[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    /// Number of qubits if `dim` is a power of two.
    pub fn n_qubits(&self) -> Option<usize> {
        self.dim
            .is_power_of_two()
            .then(|| self.dim.trailing_zeros() as usize)
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(j, i)] = self[(i, j)].conj();
            }
        }
        m
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &other.entries[k * n..(k + 1) * n];
                let dst = &mut out.entries[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    /// `alpha·self + beta·other`
    pub fn linear_combination(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a * alpha + b * beta)
                .collect(),
        }
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |m[i][j] - conj(m[j][i])|`
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `max |u†u - I|`
    pub fn unitarity_deviation(&self) -> f64 {
        self.adjoint()
            .matmul(self)
            .max_abs_diff(&Self::identity(self.dim))
    }

    /// `(m + m†)/2`
    pub fn hermitian_part(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
            }
        }
        m
    }

    /// Eigenvalues of the Hermitian part `(m + m†)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let n = self.dim;
        let herm = self.hermitian_part();
        let herm = DMatrix::from_fn(n, n, |i, j| herm[(i, j)]);
        let mut eig: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
        eig.sort_by(f64::total_cmp);
        eig
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.entries[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.entries[r * self.dim + c]
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Kronecker product; `a` indexes the more significant block.
pub fn tensor_product(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (da, db) = (a.dim, b.dim);
    let mut out = ComplexMatrix::zeros(da * db);
    for ar in 0..da {
        for ac in 0..da {
            let x = a[(ar, ac)];
            if x == ZERO {
                continue;
            }
            for br in 0..db {
                for bc in 0..db {
                    out[(ar * db + br, ac * db + bc)] = x * b[(br, bc)];
                }
            }
        }
    }
    out
}

/// Normalized state vector on `n_qubits` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PureStateVector {
    n_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureStateVector {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::Domain(format!(
                "amplitude count {len} is not a power of two"
            )));
        }
        let norm: f64 = amplitudes.iter().map(C64::norm_sqr).sum();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Domain(format!("state norm {norm} is not 1")));
        }
        Ok(Self {
            n_qubits: len.trailing_zeros() as usize,
            amplitudes,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn projector(&self) -> DensityMatrix {
        DensityMatrix {
            n_qubits: self.n_qubits,
            matrix: ComplexMatrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }
}

/// A density operator on `n_qubits` qubits: Hermitian, unit trace, PSD.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates the matrix against [`TRACE_TOL`], [`HERMITICITY_TOL`] and [`PSD_TOL`].
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let n_qubits = matrix.n_qubits().ok_or_else(|| {
            Error::Domain(format!("dimension {} is not a power of two", matrix.dim()))
        })?;
        let state = Self { n_qubits, matrix };
        let report = check_physical(&state, TRACE_TOL);
        if report.trace_deviation > TRACE_TOL
            || report.hermiticity_deviation > HERMITICITY_TOL
            || report.min_eigenvalue < -PSD_TOL
        {
            return Err(Error::NotPhysical(report.to_string()));
        }
        Ok(state)
    }

    /// `I / 2^n`
    pub fn maximally_mixed(n_qubits: usize) -> Self {
        let dim = 1 << n_qubits;
        Self {
            n_qubits,
            matrix: ComplexMatrix::identity(dim).scale(1.0 / dim as f64),
        }
    }

    /// Wraps the output of a physical map without re-validating it.
    pub(crate) fn from_map_output(matrix: ComplexMatrix) -> Self {
        let n_qubits = matrix
            .n_qubits()
            .expect("map outputs have power-of-two dimension");
        Self { n_qubits, matrix }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `tr(ρ²)`
    pub fn purity(&self) -> f64 {
        self.matrix.matmul(&self.matrix).trace().re
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.matrix.max_abs_diff(&other.matrix)
    }

    /// `self ⊗ other`, with `self` on the lower-numbered qubits.
    pub fn tensor(&self, other: &Self) -> Self {
        Self {
            n_qubits: self.n_qubits + other.n_qubits,
            matrix: tensor_product(&self.matrix, &other.matrix),
        }
    }

    /// Convex combination `w·self + (1-w)·other`.
    pub fn mix(&self, weight: f64, other: &Self) -> Result<Self> {
        if self.n_qubits != other.n_qubits {
            return Err(Error::DimensionMismatch {
                expected: self.n_qubits,
                actual: other.n_qubits,
            });
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::Domain(format!("mixing weight {weight} not in [0, 1]")));
        }
        Ok(Self::from_map_output(self.matrix.linear_combination(
            weight,
            &other.matrix,
            1.0 - weight,
        )))
    }

    /// `U ρ U†` for a full-size unitary.
    pub fn conjugate(&self, u: &ComplexMatrix) -> Result<Self> {
        if u.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: u.dim(),
            });
        }
        let dev = u.unitarity_deviation();
        if dev > UNITARITY_TOL {
            return Err(Error::NotUnitary(dev));
        }
        Ok(Self::from_map_output(
            u.matmul(&self.matrix).matmul(&u.adjoint()),
        ))
    }
}

fn check_qubit(n_qubits: usize, q: usize) -> Result<()> {
    if q >= n_qubits {
        return Err(Error::Index(format!(
            "qubit {q} out of range for {n_qubits}-qubit state"
        )));
    }
    Ok(())
}

pub(crate) fn check_pair(n_qubits: usize, a: usize, b: usize) -> Result<()> {
    check_qubit(n_qubits, a)?;
    check_qubit(n_qubits, b)?;
    if a == b {
        return Err(Error::Index(format!("qubit indices must differ (both {a})")));
    }
    Ok(())
}

/// Bit mask of qubit `q` in an `n`-qubit basis index.
#[inline]
pub(crate) fn qubit_mask(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - 1 - q)
}

/// Applies `u` to qubits `(q_hi, q_lo)`, with `q_hi` the more significant of
/// `u`'s two slots: `ρ' = U ρ U†` where `U = u ⊗ I` up to qubit ordering.
pub fn apply_two_qubit_unitary(
    rho: &DensityMatrix,
    u: &ComplexMatrix,
    q_hi: usize,
    q_lo: usize,
) -> Result<DensityMatrix> {
    let n = rho.n_qubits;
    check_pair(n, q_hi, q_lo)?;
    if u.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            actual: u.dim(),
        });
    }
    let dev = u.unitarity_deviation();
    if dev > UNITARITY_TOL {
        return Err(Error::NotUnitary(dev));
    }
    let (mh, ml) = (qubit_mask(n, q_hi), qubit_mask(n, q_lo));
    let dim = rho.dim();
    let slot = |k: usize| -> usize { ((k >> 1) & 1) * mh | (k & 1) * ml };
    let u_dag = u.adjoint();

    // U ρ: mixes rows within each group of four that share the other qubits.
    let mut left = ComplexMatrix::zeros(dim);
    for base in (0..dim).filter(|i| i & (mh | ml) == 0) {
        for out in 0..4 {
            let r_out = base | slot(out);
            for inp in 0..4 {
                let coeff = u[(out, inp)];
                if coeff == ZERO {
                    continue;
                }
                let r_in = base | slot(inp);
                for c in 0..dim {
                    left[(r_out, c)] += coeff * rho.matrix[(r_in, c)];
                }
            }
        }
    }
    // (Uρ) U†: mixes columns the same way.
    let mut result = ComplexMatrix::zeros(dim);
    for base in (0..dim).filter(|i| i & (mh | ml) == 0) {
        for out in 0..4 {
            let c_out = base | slot(out);
            for inp in 0..4 {
                let coeff = u_dag[(inp, out)];
                if coeff == ZERO {
                    continue;
                }
                let c_in = base | slot(inp);
                for r in 0..dim {
                    result[(r, c_out)] += left[(r, c_in)] * coeff;
                }
            }
        }
    }
    Ok(DensityMatrix::from_map_output(result))
}

/// Traces out `traced_qubits`; the remaining qubits keep their relative order.
pub fn partial_trace(rho: &DensityMatrix, traced_qubits: &[usize]) -> Result<DensityMatrix> {
    let n = rho.n_qubits;
    let mut traced = traced_qubits.to_vec();
    traced.sort_unstable();
    traced.dedup();
    if traced.is_empty() || traced.len() >= n {
        return Err(Error::Index(format!(
            "traced set {traced_qubits:?} must be a non-empty strict subset of {n} qubits"
        )));
    }
    for &q in &traced {
        check_qubit(n, q)?;
    }
    let kept: Vec<usize> = (0..n).filter(|q| !traced.contains(q)).collect();
    Ok(DensityMatrix::from_map_output(reduce(
        &rho.matrix,
        n,
        &kept,
        &traced,
    )))
}

/// Reduced matrix on `kept` after summing over `traced` (both index lists over `n` qubits).
pub(crate) fn reduce(
    matrix: &ComplexMatrix,
    n: usize,
    kept: &[usize],
    traced: &[usize],
) -> ComplexMatrix {
    let spread = |bits: usize, qubits: &[usize]| -> usize {
        qubits
            .iter()
            .enumerate()
            .filter(|(k, _)| bits >> (qubits.len() - 1 - k) & 1 == 1)
            .map(|(_, &q)| qubit_mask(n, q))
            .fold(0, |acc, m| acc | m)
    };
    let kept_dim = 1 << kept.len();
    let kept_idx: Vec<usize> = (0..kept_dim).map(|b| spread(b, kept)).collect();
    let traced_idx: Vec<usize> = (0..1 << traced.len()).map(|b| spread(b, traced)).collect();
    let mut out = ComplexMatrix::zeros(kept_dim);
    for (r, &kr) in kept_idx.iter().enumerate() {
        for (c, &kc) in kept_idx.iter().enumerate() {
            out[(r, c)] = traced_idx.iter().map(|&t| matrix[(kr | t, kc | t)]).sum();
        }
    }
    out
}

/// Projects qubits `(q_a, q_b)` onto equal outcomes `{00, 11}`, pools both
/// accepted branches, renormalizes, and discards the measured qubits.
/// Returns the reduced state and the acceptance probability.
pub fn postselect_equal_outcomes(
    rho: &DensityMatrix,
    q_a: usize,
    q_b: usize,
) -> Result<(DensityMatrix, f64)> {
    let n = rho.n_qubits;
    check_pair(n, q_a, q_b)?;
    if n < 3 {
        return Err(Error::Index(format!(
            "post-selection on a {n}-qubit state leaves nothing to keep"
        )));
    }
    let (ma, mb) = (qubit_mask(n, q_a), qubit_mask(n, q_b));
    let accepted = |i: usize| (i & ma == 0) == (i & mb == 0);
    let dim = rho.dim();

    // P00 ρ P00 + P11 ρ P11: keep entries whose row and column both sit in the
    // same accepted branch.
    let mut projected = ComplexMatrix::zeros(dim);
    let mut probability = 0.0;
    for r in (0..dim).filter(|&r| accepted(r)) {
        probability += rho.matrix[(r, r)].re;
        for c in (0..dim).filter(|&c| accepted(c) && (c & ma) == (r & ma)) {
            projected[(r, c)] = rho.matrix[(r, c)];
        }
    }
    if probability < ZERO_PROBABILITY_TOL {
        return Err(Error::ZeroProbability(probability));
    }
    let kept: Vec<usize> = (0..n).filter(|&q| q != q_a && q != q_b).collect();
    let mut traced = vec![q_a, q_b];
    traced.sort_unstable();
    // Renormalization is the only nonlinear step; anti-Hermitian rounding
    // residue grows under repeated rounds unless it is dropped here.
    let reduced = reduce(&projected, n, &kept, &traced)
        .scale(1.0 / probability)
        .hermitian_part();
    Ok((DensityMatrix::from_map_output(reduced), probability))
}

/// `<ψ|ρ|ψ>`
pub fn fidelity_with_pure(rho: &DensityMatrix, psi: &PureStateVector) -> Result<f64> {
    if rho.n_qubits != psi.n_qubits {
        return Err(Error::DimensionMismatch {
            expected: rho.n_qubits,
            actual: psi.n_qubits,
        });
    }
    let amps = &psi.amplitudes;
    let mut acc = ZERO;
    for (i, a) in amps.iter().enumerate() {
        if *a == ZERO {
            continue;
        }
        for (j, b) in amps.iter().enumerate() {
            acc += a.conj() * rho.matrix[(i, j)] * b;
        }
    }
    if acc.im.abs() >= 1e-10 {
        return Err(Error::NotPhysical(format!(
            "fidelity has imaginary part {:e}",
            acc.im
        )));
    }
    Ok(acc.re)
}

/// Physicality diagnostics for a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalityReport {
    pub trace_deviation: f64,
    pub hermiticity_deviation: f64,
    pub min_eigenvalue: f64,
    pub tol: f64,
}

impl PhysicalityReport {
    /// All three checks at the report's tolerance.
    pub fn passes(&self) -> bool {
        self.trace_deviation <= self.tol
            && self.hermiticity_deviation <= self.tol
            && self.min_eigenvalue >= -self.tol
    }
}

impl fmt::Display for PhysicalityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "|tr-1|={:.3e} herm={:.3e} min_eig={:.3e}",
            self.trace_deviation, self.hermiticity_deviation, self.min_eigenvalue
        )
    }
}

pub fn check_physical(rho: &DensityMatrix, tol: f64) -> PhysicalityReport {
    let m = &rho.matrix;
    PhysicalityReport {
        trace_deviation: (m.trace() - ONE).norm(),
        hermiticity_deviation: m.hermiticity_deviation(),
        min_eigenvalue: m.hermitian_eigenvalues()[0],
        tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn basis_projector(n: usize, index: usize) -> DensityMatrix {
        let mut m = ComplexMatrix::zeros(1 << n);
        m[(index, index)] = ONE;
        DensityMatrix::new(m).unwrap()
    }

    fn psi_plus() -> PureStateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureStateVector::new(vec![c(0.0), c(s), c(s), c(0.0)]).unwrap()
    }

    fn phi_plus() -> PureStateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        PureStateVector::new(vec![c(s), c(0.0), c(0.0), c(s)]).unwrap()
    }

    fn cnot() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(tensor_product(&i2, &i2), ComplexMatrix::identity(4));
    }

    #[test]
    fn kron_of_basis_projectors() {
        let p0 = ComplexMatrix::diagonal(&[1.0, 0.0]);
        let p1 = ComplexMatrix::diagonal(&[0.0, 1.0]);
        assert_eq!(
            tensor_product(&p0, &p1),
            ComplexMatrix::diagonal(&[0.0, 1.0, 0.0, 0.0])
        );
    }

    #[test]
    fn kron_entry_layout() {
        let a = ComplexMatrix::from_entries((0..16).map(|k| C64::new(k as f64, 1.0)).collect());
        let b = ComplexMatrix::from_entries((0..16).map(|k| C64::new(1.0, -(k as f64))).collect());
        let k = tensor_product(&a, &b);
        assert_eq!(k.dim(), 16);
        for r in 0..16 {
            for col in 0..16 {
                assert_eq!(k[(r, col)], a[(r / 4, col / 4)] * b[(r % 4, col % 4)]);
            }
        }
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        let rho = basis_projector(2, 0b10);
        let out = apply_two_qubit_unitary(&rho, &cnot(), 0, 1).unwrap();
        assert!(out.max_abs_diff(&basis_projector(2, 0b11)) < 1e-15);
    }

    #[test]
    fn cnot_on_psi_plus_matches_hand_conjugation() {
        let rho = psi_plus().projector();
        let out = apply_two_qubit_unitary(&rho, &cnot(), 0, 1).unwrap();
        // CNOT (|01>+|10>)/√2 = (|01>+|11>)/√2, expanded by hand.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = PureStateVector::new(vec![c(0.0), c(s), c(0.0), c(s)])
            .unwrap()
            .projector();
        assert!(out.max_abs_diff(&expected) < 1e-15);
        // Same thing through a dense U ρ U†.
        let dense = rho.conjugate(&cnot()).unwrap();
        assert!(out.max_abs_diff(&dense) < 1e-15);
    }

    #[test]
    fn identity_gate_leaves_state_unchanged() {
        let rho = psi_plus().projector().tensor(&DensityMatrix::maximally_mixed(2));
        for (a, b) in [(0, 3), (2, 1), (1, 2)] {
            let out = apply_two_qubit_unitary(&rho, &ComplexMatrix::identity(4), a, b).unwrap();
            assert!(out.max_abs_diff(&rho) < 1e-14);
        }
    }

    #[test]
    fn embedded_gate_matches_reordered_dense_gate() {
        // CNOT with control q3, target q1 on a 4-qubit basis state |0001> -> |0101>.
        let rho = basis_projector(4, 0b0001);
        let out = apply_two_qubit_unitary(&rho, &cnot(), 3, 1).unwrap();
        assert!(out.max_abs_diff(&basis_projector(4, 0b0101)) < 1e-15);
    }

    #[test]
    fn gate_argument_errors() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(matches!(
            apply_two_qubit_unitary(&rho, &cnot(), 0, 0),
            Err(Error::Index(_))
        ));
        assert!(matches!(
            apply_two_qubit_unitary(&rho, &cnot(), 0, 2),
            Err(Error::Index(_))
        ));
        let not_unitary = ComplexMatrix::diagonal(&[1.0, 1.0, 1.0, 0.5]);
        assert!(matches!(
            apply_two_qubit_unitary(&rho, &not_unitary, 0, 1),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn partial_trace_of_product_recovers_factor() {
        let a = psi_plus().projector();
        let b = DensityMatrix::new(ComplexMatrix::diagonal(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        let ab = a.tensor(&b);
        assert!(partial_trace(&ab, &[2, 3]).unwrap().max_abs_diff(&a) < 1e-12);
        assert!(partial_trace(&ab, &[0, 1]).unwrap().max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let reduced = partial_trace(&psi_plus().projector(), &[1]).unwrap();
        assert!(reduced.max_abs_diff(&DensityMatrix::maximally_mixed(1)) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_sets() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(partial_trace(&rho, &[]).is_err());
        assert!(partial_trace(&rho, &[0, 1]).is_err());
        assert!(partial_trace(&rho, &[5]).is_err());
    }

    #[test]
    fn postselect_keeps_perfectly_correlated_pair() {
        let sigma = DensityMatrix::new(ComplexMatrix::diagonal(&[0.1, 0.2, 0.3, 0.4])).unwrap();
        let rho = sigma.tensor(&phi_plus().projector());
        let (out, p) = postselect_equal_outcomes(&rho, 2, 3).unwrap();
        assert!((p - 1.0).abs() < 1e-14);
        assert!(out.max_abs_diff(&sigma) < 1e-14);
    }

    #[test]
    fn postselect_rejects_anticorrelated_pair() {
        let sigma = DensityMatrix::maximally_mixed(2);
        let rho = sigma.tensor(&psi_plus().projector());
        assert!(matches!(
            postselect_equal_outcomes(&rho, 2, 3),
            Err(Error::ZeroProbability(_))
        ));
    }

    #[test]
    fn postselect_maximally_mixed() {
        let rho = DensityMatrix::maximally_mixed(4);
        for (a, b) in [(2, 3), (0, 1), (0, 3), (1, 2)] {
            let (out, p) = postselect_equal_outcomes(&rho, a, b).unwrap();
            assert!((p - 0.5).abs() < 1e-14);
            assert!(out.max_abs_diff(&DensityMatrix::maximally_mixed(2)) < 1e-14);
        }
    }

    #[test]
    fn postselect_drops_coherence_between_branches() {
        // (|0000> + |0011>)/√2: both branches accepted, measured qubits traced.
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![c(0.0); 16];
        amps[0b0000] = c(s);
        amps[0b0011] = c(s);
        let rho = PureStateVector::new(amps).unwrap().projector();
        let (out, p) = postselect_equal_outcomes(&rho, 2, 3).unwrap();
        assert!((p - 1.0).abs() < 1e-14);
        assert!(out.max_abs_diff(&basis_projector(2, 0)) < 1e-14);
    }

    #[test]
    fn fidelity_examples() {
        let psi = psi_plus();
        assert!((fidelity_with_pure(&psi.projector(), &psi).unwrap() - 1.0).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(2);
        assert!((fidelity_with_pure(&mixed, &psi).unwrap() - 0.25).abs() < 1e-15);
        assert!(matches!(
            fidelity_with_pure(&DensityMatrix::maximally_mixed(3), &psi),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn physicality_diagnostics() {
        let report = check_physical(&DensityMatrix::maximally_mixed(2), 1e-12);
        assert!(report.trace_deviation < 1e-15);
        assert_eq!(report.hermiticity_deviation, 0.0);
        assert!((report.min_eigenvalue - 0.25).abs() < 1e-14);
        assert!(report.passes());

        let report = check_physical(&psi_plus().projector(), 1e-10);
        assert!(report.min_eigenvalue.abs() < 1e-10);
        assert!(report.passes());
    }

    #[test]
    fn construction_rejects_unphysical_matrices() {
        assert!(DensityMatrix::new(ComplexMatrix::diagonal(&[0.5, 0.4])).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::diagonal(&[1.2, -0.2])).is_err());
        let mut m = ComplexMatrix::diagonal(&[0.5, 0.5]);
        m[(0, 1)] = C64::new(0.0, 0.1);
        assert!(DensityMatrix::new(m).is_err());
        assert!(DensityMatrix::new(ComplexMatrix::identity(3).scale(1.0 / 3.0)).is_err());
    }

    #[test]
    fn gates_on_disjoint_pairs_commute() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let h = ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]]);
        let u = tensor_product(&h, &ComplexMatrix::identity(2)).matmul(&cnot());
        let rho = phi_plus().projector().tensor(&psi_plus().projector());
        let ab = apply_two_qubit_unitary(&apply_two_qubit_unitary(&rho, &u, 0, 1).unwrap(), &cnot(), 2, 3)
            .unwrap();
        let ba = apply_two_qubit_unitary(&apply_two_qubit_unitary(&rho, &cnot(), 2, 3).unwrap(), &u, 0, 1)
            .unwrap();
        assert!(ab.max_abs_diff(&ba) < 1e-12);
        assert!((ab.trace() - 1.0).abs() < 1e-12);
    }
}
