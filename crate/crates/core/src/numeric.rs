// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra used by the rest of the crate.
//!
//! Frequencies are stored in cycles per unit time (GHz when times are in ns),
//! so every exponential of a Hamiltonian carries an explicit factor 2π.

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Result, SynthError};

pub type C64 = Complex64;

/// Elementwise tolerance used by the Hermiticity checks, relative to the
/// largest entry magnitude (floored at 1).
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix(DMatrix<C64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(SynthError::InvalidDimension(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if entries.len() != rows * cols {
            return Err(SynthError::InvalidDimension(format!(
                "expected {} entries for a {rows}x{cols} matrix, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if let Some(k) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SynthError::InvalidInput(format!(
                "non-finite entry at ({}, {})",
                k / cols,
                k % cols
            )));
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    pub fn from_real_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(rows, cols, entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let n = diag.len();
        Self(DMatrix::from_fn(n, n, |i, j| if i == j { diag[i] } else { C64::new(0.0, 0.0) }))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self(DMatrix::from_fn(rows, cols, f))
    }

    /// Wraps an nalgebra matrix; entries must be finite.
    pub fn from_dmatrix(m: DMatrix<C64>) -> Result<Self> {
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SynthError::InvalidInput("non-finite matrix entry".into()));
        }
        Ok(Self(m))
    }

    pub fn as_dmatrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.0[(i, j)]
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn scale(&self, factor: C64) -> Self {
        Self(&self.0 * factor)
    }

    pub fn scale_real(&self, factor: f64) -> Self {
        self.scale(C64::new(factor, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.0.diagonal().iter().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest elementwise deviation |A_ij - conj(A_ji)|.
    pub fn hermiticity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.0[(i, j)] - self.0[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol * self.max_abs().max(1.0)
    }

    /// ‖U†U − I‖_F.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let prod = self.0.adjoint() * &self.0;
        let id = DMatrix::<C64>::identity(self.rows(), self.rows());
        (prod - id).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Self {
        Self(DMatrix::from_fn(row_idx.len(), col_idx.len(), |i, j| {
            self.0[(row_idx[i], col_idx[j])]
        }))
    }

    /// Euclidean norm of column `j`.
    pub fn column_norm(&self, j: usize) -> f64 {
        self.0.column(j).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.rows()).all(|i| (0..self.cols()).all(|j| i == j || self.0[(i, j)].norm() <= tol))
    }

    fn require_square_hermitian(&self, what: &str) -> Result<()> {
        if !self.is_square() {
            return Err(SynthError::ContractViolation(format!(
                "{what}: matrix is {}x{}, not square",
                self.rows(),
                self.cols()
            )));
        }
        if !self.is_hermitian(HERMITIAN_TOL) {
            return Err(SynthError::ContractViolation(format!(
                "{what}: matrix is not Hermitian (defect {:.3e})",
                self.hermiticity_defect()
            )));
        }
        Ok(())
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns.
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    /// V·diag(λ)·V†.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let d = ComplexMatrix::from_real_diagonal(&self.eigenvalues);
        &(&self.eigenvectors * &d) * &self.eigenvectors.adjoint()
    }
}

/// Truncated annihilation and creation operators, `(a, a†)`.
pub fn ladder_ops(levels: usize) -> Result<(ComplexMatrix, ComplexMatrix)> {
    if levels < 2 {
        return Err(SynthError::InvalidDimension(format!(
            "ladder operators need at least 2 levels, got {levels}"
        )));
    }
    let a = ComplexMatrix::from_fn(levels, levels, |i, j| {
        if j == i + 1 {
            C64::new((j as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let adag = a.adjoint();
    Ok((a, adag))
}

/// Diagonalizes a Hermitian matrix.
///
/// Eigenvalues come back ascending. Each eigenvector is rephased so that its
/// largest-magnitude component (first one on ties) is real and positive.
pub fn hermitian_eig(a: &ComplexMatrix) -> Result<Spectrum> {
    a.require_square_hermitian("hermitian_eig")?;
    let n = a.rows();
    // Symmetrize exactly before handing over to the solver.
    let herm = DMatrix::from_fn(n, n, |i, j| (a.0[(i, j)] + a.0[(j, i)].conj()) * 0.5);
    let eig = SymmetricEigen::try_new(herm, 1e-15, 0).ok_or_else(|| {
        SynthError::ContractViolation("hermitian_eig: eigen-solver failed to converge".into())
    })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vecs = DMatrix::<C64>::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let v = eig.eigenvectors.column(k);
        let mut pivot = 0;
        let mut best = -1.0;
        for (i, z) in v.iter().enumerate() {
            // Ties resolved towards the lower index.
            if z.norm() > best * (1.0 + 1e-12) {
                best = z.norm();
                pivot = i;
            }
        }
        let phase = if best > 0.0 { v[pivot].conj() / best } else { C64::new(1.0, 0.0) };
        for i in 0..n {
            vecs[(i, col)] = v[i] * phase;
        }
    }
    Ok(Spectrum { eigenvalues, eigenvectors: ComplexMatrix(vecs) })
}

/// exp(−2πi·A·dt) for Hermitian `A` given in cycles per time unit.
pub fn expm_i(a: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix> {
    if !dt.is_finite() {
        return Err(SynthError::InvalidInput(format!("time step must be finite, got {dt}")));
    }
    a.require_square_hermitian("expm_i")?;
    let spec = hermitian_eig(a)?;
    let phases: Vec<C64> =
        spec.eigenvalues.iter().map(|&l| C64::from_polar(1.0, -TAU * l * dt)).collect();
    let v = &spec.eigenvectors;
    Ok(&(v * &ComplexMatrix::from_diagonal(&phases)) * &v.adjoint())
}

/// General matrix exponential exp(A) by scaling and squaring of a Taylor series.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !a.is_square() {
        return Err(SynthError::InvalidDimension(format!(
            "expm needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let norm1 = (0..n)
        .map(|j| (0..n).map(|i| a.0[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm1 > 0.5 { (norm1 / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = &a.0 * C64::new(0.5f64.powi(squarings), 0.0);

    let mut result = DMatrix::<C64>::identity(n, n);
    let mut term = DMatrix::<C64>::identity(n, n);
    for k in 1..=40 {
        term = (&term * &scaled) / C64::new(k as f64, 0.0);
        result += &term;
        let t = term.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if t < 1e-18 * result.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0) {
            break;
        }
    }
    for _ in 0..squarings {
        result = &result * &result;
    }
    ComplexMatrix::from_dmatrix(result)
}

/// Kronecker product A ⊗ B.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix(a.0.kronecker(&b.0))
}

/// One-sided magnitude spectrum of a real signal, normalized to a peak of 1.
///
/// The frequency axis is in reciprocal units of `dt` (GHz for ns).
pub fn fft_spectrum(samples: &[f64], dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    fft_spectrum_padded(samples, dt, samples.len())
}

/// Like [`fft_spectrum`], zero-padding the signal to at least `min_len` points
/// for a finer frequency grid.
pub fn fft_spectrum_padded(samples: &[f64], dt: f64, min_len: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if samples.len() < 2 {
        return Err(SynthError::InvalidInput(format!(
            "spectrum needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(SynthError::InvalidInput(format!("sample interval must be positive, got {dt}")));
    }
    let n = samples.len().max(min_len);
    let mut buf: Vec<C64> = samples.iter().map(|&x| C64::new(x, 0.0)).collect();
    buf.resize(n, C64::new(0.0, 0.0));
    FftPlanner::<f64>::new().plan_fft_forward(n).process(&mut buf);

    let bins = n / 2 + 1;
    let freqs: Vec<f64> = (0..bins).map(|k| k as f64 / (n as f64 * dt)).collect();
    let mut mags: Vec<f64> = buf[..bins].iter().map(|z| z.norm()).collect();
    let peak = mags.iter().cloned().fold(0.0, f64::max);
    if peak > 0.0 {
        mags.iter_mut().for_each(|m| *m /= peak);
    }
    Ok((freqs, mags))
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real_row_major(2, 2, &[0.0, 1.0, 1.0, 0.0]).expect("static")
}

pub fn pauli_y() -> ComplexMatrix {
    let i = C64::new(0.0, 1.0);
    let z = C64::new(0.0, 0.0);
    ComplexMatrix::from_row_major(2, 2, vec![z, -i, i, z]).expect("static")
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real_diagonal(&[1.0, -1.0])
}
