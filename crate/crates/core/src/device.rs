// SPDX-License-Identifier: Apache-2.0

//! Transmon drift models and the bases used to read out gates.
//!
//! A transmon is truncated to a few levels of the quartic anharmonic
//! oscillator with energies `E_n = n·ω − n(n−1)·λ/2`. The four lowest levels
//! are relabeled as the product states of two qubits:
//! `|0̄⟩ = |00⟩, |1̄⟩ = |01⟩, |2̄⟩ = |10⟩, |3̄⟩ = |11⟩`.
//! Higher levels count as leakage.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SynthError};
use crate::numeric::{hermitian_eig, kron, ladder_ops, pauli_x, pauli_y, pauli_z, ComplexMatrix, C64};

/// Default number of levels kept per transmon (four computational levels plus
/// one leakage level).
pub const DEFAULT_LEVELS: usize = 5;

/// One transmon. `omega` and `lambda` in GHz; `lambda` is the anharmonicity
/// magnitude (stored positive).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransmonSpec {
    pub omega: f64,
    pub lambda: f64,
    #[serde(default = "default_levels")]
    pub levels: usize,
}

fn default_levels() -> usize {
    DEFAULT_LEVELS
}

impl TransmonSpec {
    pub fn new(omega: f64, lambda: f64, levels: usize) -> Result<Self> {
        let spec = Self { omega, lambda, levels };
        spec.validate()?;
        Ok(spec)
    }

    /// A transmon truncated below the standard five levels. Only intended for
    /// analytic checks (e.g. a bare two-level Rabi problem); such a device
    /// has no complete computational subspace.
    pub fn with_truncation(omega: f64, lambda: f64, levels: usize) -> Result<Self> {
        let spec = Self { omega, lambda, levels };
        spec.validate_physics()?;
        if levels < 2 {
            return Err(SynthError::InvalidDimension(format!("need at least 2 levels, got {levels}")));
        }
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_physics()?;
        if self.levels < DEFAULT_LEVELS {
            return Err(SynthError::InvalidDimension(format!(
                "transmon needs at least {DEFAULT_LEVELS} levels, got {}",
                self.levels
            )));
        }
        Ok(())
    }

    fn validate_physics(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(SynthError::InvalidInput(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(SynthError::InvalidInput(format!(
                "lambda (anharmonicity magnitude) must be positive, got {}",
                self.lambda
            )));
        }
        if self.lambda >= self.omega {
            return Err(SynthError::InvalidInput(format!(
                "lambda ({}) must be smaller than omega ({})",
                self.lambda, self.omega
            )));
        }
        Ok(())
    }

    /// `E_n = n·ω − n(n−1)·λ/2`.
    pub fn energy(&self, n: usize) -> f64 {
        let n = n as f64;
        n * self.omega - 0.5 * n * (n - 1.0) * self.lambda
    }

    /// H0 = ω a†a − (λ/2) a†a†aa, diagonal in the number basis.
    pub fn drift(&self) -> ComplexMatrix {
        let e: Vec<f64> = (0..self.levels).map(|n| self.energy(n)).collect();
        ComplexMatrix::from_real_diagonal(&e)
    }

    /// a + a†.
    pub fn drive_operator(&self) -> ComplexMatrix {
        let (a, adag) = ladder_ops(self.levels).expect("levels validated");
        &a + &adag
    }
}

/// One or two transmons with a transverse capacitive coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub transmons: Vec<TransmonSpec>,
    /// Coupling J in GHz; zero for a single transmon.
    #[serde(default)]
    pub coupling_j: f64,
    /// Conversion from drive amplitude (V) to Hamiltonian frequency (GHz).
    #[serde(default = "default_transfer")]
    pub line_transfer: f64,
}

fn default_transfer() -> f64 {
    1.0
}

impl DeviceSpec {
    pub fn single(transmon: TransmonSpec) -> Self {
        Self { transmons: vec![transmon], coupling_j: 0.0, line_transfer: 1.0 }
    }

    pub fn coupled(first: TransmonSpec, second: TransmonSpec, coupling_j: f64) -> Result<Self> {
        let spec = Self { transmons: vec![first, second], coupling_j, line_transfer: 1.0 };
        spec.validate()?;
        Ok(spec)
    }

    /// The parameters used for all single-transmon gates: ω = 5 GHz, λ = 300 MHz.
    pub fn reference_single() -> Self {
        Self::single(TransmonSpec { omega: 5.0, lambda: 0.3, levels: DEFAULT_LEVELS })
    }

    /// The coupled pair: 5 / 4.5 GHz, λ = 300 / 250 MHz, J = 20 MHz.
    pub fn reference_pair() -> Self {
        Self {
            transmons: vec![
                TransmonSpec { omega: 5.0, lambda: 0.3, levels: DEFAULT_LEVELS },
                TransmonSpec { omega: 4.5, lambda: 0.25, levels: DEFAULT_LEVELS },
            ],
            coupling_j: 0.02,
            line_transfer: 1.0,
        }
    }

    pub fn with_line_transfer(mut self, transfer: f64) -> Self {
        self.line_transfer = transfer;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.transmons.len() {
            1 | 2 => {}
            n => {
                return Err(SynthError::InvalidDimension(format!(
                    "device must hold 1 or 2 transmons, got {n}"
                )))
            }
        }
        for t in &self.transmons {
            if t.levels < DEFAULT_LEVELS {
                t.validate_physics()?;
                if t.levels < 2 {
                    return Err(SynthError::InvalidDimension("transmon needs at least 2 levels".into()));
                }
            } else {
                t.validate()?;
            }
        }
        if !(self.coupling_j >= 0.0 && self.coupling_j.is_finite()) {
            return Err(SynthError::InvalidInput(format!(
                "coupling_j must be non-negative, got {}",
                self.coupling_j
            )));
        }
        if self.transmons.len() == 1 && self.coupling_j != 0.0 {
            return Err(SynthError::InvalidInput("a single transmon cannot have a coupling".into()));
        }
        let min_lambda = self.transmons.iter().map(|t| t.lambda).fold(f64::INFINITY, f64::min);
        if self.coupling_j >= min_lambda {
            return Err(SynthError::InvalidInput(format!(
                "coupling_j ({}) must be well below the smallest anharmonicity ({min_lambda})",
                self.coupling_j
            )));
        }
        if !(self.line_transfer > 0.0 && self.line_transfer.is_finite()) {
            return Err(SynthError::InvalidInput(format!(
                "line_transfer must be positive, got {}",
                self.line_transfer
            )));
        }
        Ok(())
    }

    pub fn levels(&self) -> Vec<usize> {
        self.transmons.iter().map(|t| t.levels).collect()
    }

    pub fn dim(&self) -> usize {
        self.transmons.iter().map(|t| t.levels).product()
    }

    /// Operator `op` acting on transmon `which`, identity on the partner.
    pub fn embed(&self, which: usize, op: &ComplexMatrix) -> ComplexMatrix {
        match (self.transmons.len(), which) {
            (1, 0) => op.clone(),
            (2, 0) => kron(op, &ComplexMatrix::identity(self.transmons[1].levels)),
            (2, 1) => kron(&ComplexMatrix::identity(self.transmons[0].levels), op),
            _ => panic!("transmon index {which} out of range"),
        }
    }

    /// (a_i + a_i†) embedded on transmon `which`.
    pub fn drive_operator(&self, which: usize) -> ComplexMatrix {
        self.embed(which, &self.transmons[which].drive_operator())
    }

    /// J (a1 + a1†)(a2 + a2†), or zero for a single transmon.
    pub fn coupling_hamiltonian(&self) -> ComplexMatrix {
        if self.transmons.len() < 2 {
            return ComplexMatrix::zeros(self.dim(), self.dim());
        }
        kron(&self.transmons[0].drive_operator(), &self.transmons[1].drive_operator())
            .scale_real(self.coupling_j)
    }

    /// Local drifts only (no coupling).
    pub fn uncoupled_drift(&self) -> ComplexMatrix {
        let mut h = ComplexMatrix::zeros(self.dim(), self.dim());
        for (i, t) in self.transmons.iter().enumerate() {
            h = &h + &self.embed(i, &t.drift());
        }
        h
    }

    /// Bare product-state energy for a multi-index of levels.
    pub fn bare_energy(&self, bare_index: usize) -> f64 {
        self.split_index(bare_index)
            .iter()
            .zip(&self.transmons)
            .map(|(&n, t)| t.energy(n))
            .sum()
    }

    /// Per-transmon levels of a bare product index.
    pub fn split_index(&self, bare_index: usize) -> Vec<usize> {
        match self.transmons.len() {
            1 => vec![bare_index],
            _ => {
                let l2 = self.transmons[1].levels;
                vec![bare_index / l2, bare_index % l2]
            }
        }
    }

    pub fn bare_label(&self, bare_index: usize) -> String {
        let parts: Vec<String> = self.split_index(bare_index).iter().map(|n| n.to_string()).collect();
        format!("|{}>", parts.join(","))
    }
}

/// Drift Hamiltonian H0 (+ H_J for two transmons) in GHz.
pub fn drift_hamiltonian(spec: &DeviceSpec) -> ComplexMatrix {
    &spec.uncoupled_drift() + &spec.coupling_hamiltonian()
}

/// Bohr frequency |E_n − E_m| in GHz.
pub fn transition_frequency(spec: &TransmonSpec, m: usize, n: usize) -> Result<f64> {
    if m >= spec.levels || n >= spec.levels {
        return Err(SynthError::InvalidInput(format!(
            "levels ({m}, {n}) out of range for a {}-level transmon",
            spec.levels
        )));
    }
    Ok((spec.energy(n) - spec.energy(m)).abs())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Bare,
    Dressed,
    Relabeled,
}

/// A change of basis together with the location of the qubit register in it.
#[derive(Clone, Debug)]
pub struct BasisMap {
    pub kind: BasisKind,
    /// Columns are the basis states expressed in the bare product basis.
    pub transform: ComplexMatrix,
    /// Indices (in the transformed basis) of the 2ⁿ computational states,
    /// ordered by the qubit bitstring.
    pub computational_indices: Vec<usize>,
    /// Bare product index associated with each column of `transform`.
    pub labels: Vec<usize>,
}

impl BasisMap {
    pub fn dim(&self) -> usize {
        self.transform.rows()
    }

    pub fn register_dim(&self) -> usize {
        self.computational_indices.len()
    }
}

fn computational_bare_indices(levels: &[usize]) -> Result<Vec<usize>> {
    if levels.iter().any(|&l| l < 4) {
        return Err(SynthError::InvalidDimension(
            "the qubit register needs at least 4 levels per transmon".into(),
        ));
    }
    match levels {
        [_] => Ok(vec![0, 1, 2, 3]),
        [_, l2] => Ok((0..16).map(|bits| (bits >> 2) * l2 + (bits & 3)).collect()),
        _ => Err(SynthError::InvalidDimension(format!(
            "relabeling supports 1 or 2 transmons, got {}",
            levels.len()
        ))),
    }
}

/// Relabeled two-qubit-per-transmon register in the bare basis.
///
/// For two transmons the register order is Q1 Q2 Q3 Q4 with Q1 Q2 stored in
/// transmon 1, so bitstring `b` lives at bare index `(b >> 2)·L2 + (b & 3)`.
pub fn relabel_map(levels: &[usize]) -> Result<BasisMap> {
    let computational_indices = computational_bare_indices(levels)?;
    let dim: usize = levels.iter().product();
    Ok(BasisMap {
        kind: BasisKind::Relabeled,
        transform: ComplexMatrix::identity(dim),
        computational_indices,
        labels: (0..dim).collect(),
    })
}

/// The bare basis with the same register location as [`relabel_map`].
pub fn bare_map(levels: &[usize]) -> Result<BasisMap> {
    let mut m = relabel_map(levels)?;
    m.kind = BasisKind::Bare;
    Ok(m)
}

/// Qubit bitstring of a relabeled transmon level, e.g. `2 → "10"`.
pub fn relabel_bits(level: usize) -> Result<String> {
    if level > 3 {
        return Err(SynthError::InvalidInput(format!("level {level} is outside the computational subspace")));
    }
    Ok(format!("{}{}", level >> 1, level & 1))
}

/// Assigns each eigenvector column to the bare state it overlaps most.
///
/// Returns the bare label per column, or a degeneracy error if two columns
/// claim the same label.
pub fn assign_bare_labels(vectors: &ComplexMatrix) -> Result<Vec<usize>> {
    let n = vectors.cols();
    let mut labels = Vec::with_capacity(n);
    let mut owner: Vec<Option<usize>> = vec![None; vectors.rows()];
    for col in 0..n {
        let mut best = 0;
        let mut best_w = -1.0;
        for row in 0..vectors.rows() {
            let w = vectors.get(row, col).norm_sqr();
            if w > best_w {
                best_w = w;
                best = row;
            }
        }
        if let Some(first) = owner[best] {
            return Err(SynthError::Degeneracy { first, second: col, bare: best });
        }
        owner[best] = Some(col);
        labels.push(best);
    }
    Ok(labels)
}

/// Eigenbasis of H0 + H_J with each dressed state labeled by its dominant
/// bare component.
pub fn dressed_map(spec: &DeviceSpec) -> Result<BasisMap> {
    spec.validate()?;
    if spec.transmons.len() != 2 || spec.coupling_j <= 0.0 {
        return Err(SynthError::InvalidInput(
            "the dressed basis needs two transmons with a positive coupling".into(),
        ));
    }
    let spectrum = hermitian_eig(&drift_hamiltonian(spec))?;
    let labels = assign_bare_labels(&spectrum.eigenvectors)?;
    let bare_comp = computational_bare_indices(&spec.levels())?;
    let computational_indices = bare_comp
        .iter()
        .map(|b| labels.iter().position(|l| l == b).expect("assignment is a bijection"))
        .collect();
    Ok(BasisMap {
        kind: BasisKind::Dressed,
        transform: spectrum.eigenvectors,
        computational_indices,
        labels,
    })
}

/// Builds the map of the requested kind for a device.
pub fn basis_map(spec: &DeviceSpec, kind: BasisKind) -> Result<BasisMap> {
    match kind {
        BasisKind::Bare => bare_map(&spec.levels()),
        BasisKind::Relabeled => relabel_map(&spec.levels()),
        BasisKind::Dressed => dressed_map(spec),
    }
}

/// Real coefficients of a 4×4 Hermitian operator in the {I, X, Y, Z}⊗2 basis.
#[derive(Clone, Debug, PartialEq)]
pub struct PauliTable {
    /// `coeffs[p][q]` multiplies `P ⊗ Q` with index order I, X, Y, Z.
    pub coeffs: [[f64; 4]; 4],
}

impl PauliTable {
    pub const LABELS: [char; 4] = ['I', 'X', 'Y', 'Z'];

    /// Coefficient by name, e.g. `"ZX"` for Z⊗X.
    pub fn get(&self, name: &str) -> Option<f64> {
        let chars: Vec<char> = name.chars().collect();
        let [a, b] = chars[..] else {
            return None;
        };
        let p = Self::LABELS.iter().position(|&c| c == a)?;
        let q = Self::LABELS.iter().position(|&c| c == b)?;
        Some(self.coeffs[p][q])
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        let basis = pauli_basis();
        let mut h = ComplexMatrix::zeros(4, 4);
        for p in 0..4 {
            for q in 0..4 {
                h = &h + &kron(&basis[p], &basis[q]).scale_real(self.coeffs[p][q]);
            }
        }
        h
    }
}

fn pauli_basis() -> [ComplexMatrix; 4] {
    [ComplexMatrix::identity(2), pauli_x(), pauli_y(), pauli_z()]
}

/// c_PQ = tr((P⊗Q)·H)/4.
pub fn pauli_decompose(h: &ComplexMatrix) -> Result<PauliTable> {
    if h.rows() != 4 || h.cols() != 4 {
        return Err(SynthError::InvalidDimension(format!(
            "Pauli decomposition needs a 4x4 operator, got {}x{}",
            h.rows(),
            h.cols()
        )));
    }
    if !h.is_hermitian(crate::numeric::HERMITIAN_TOL) {
        return Err(SynthError::ContractViolation("Pauli decomposition needs a Hermitian operator".into()));
    }
    let basis = pauli_basis();
    let mut coeffs = [[0.0; 4]; 4];
    for p in 0..4 {
        for q in 0..4 {
            let c: C64 = (&kron(&basis[p], &basis[q]) * h).trace() / 4.0;
            coeffs[p][q] = c.re;
        }
    }
    Ok(PauliTable { coeffs })
}

/// Restriction of an operator to the four computational levels of a single transmon.
pub fn project_single(op: &ComplexMatrix) -> ComplexMatrix {
    let idx = [0, 1, 2, 3];
    op.submatrix(&idx, &idx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_transmon() -> TransmonSpec {
        TransmonSpec::new(5.0, 0.3, 5).unwrap()
    }

    #[test]
    fn single_drift_levels() {
        let h = drift_hamiltonian(&DeviceSpec::reference_single());
        for (n, e) in [0.0, 5.0, 9.7, 14.1, 18.2].iter().enumerate() {
            assert!((h.get(n, n).re - e).abs() < 1e-12);
        }
        assert!(h.is_diagonal(0.0));
    }

    #[test]
    fn drift_matches_operator_form() {
        // ω a†a − (λ/2) a†a†aa built from ladder operators.
        let t = reference_transmon();
        let (a, adag) = ladder_ops(5).unwrap();
        let n = &adag * &a;
        let quartic = &(&(&adag * &adag) * &a) * &a;
        let h = &n.scale_real(t.omega) - &quartic.scale_real(t.lambda / 2.0);
        assert!((&h - &t.drift()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn transitions() {
        let t = reference_transmon();
        assert!((transition_frequency(&t, 0, 1).unwrap() - 5.0).abs() < 1e-12);
        assert!((transition_frequency(&t, 1, 2).unwrap() - 4.7).abs() < 1e-12);
        assert!((transition_frequency(&t, 2, 3).unwrap() - 4.4).abs() < 1e-12);
        assert!((transition_frequency(&t, 3, 2).unwrap() - 4.4).abs() < 1e-12);
        assert!(transition_frequency(&t, 0, 5).is_err());
    }

    #[test]
    fn uncoupled_pair_is_kron_sum() {
        let mut spec = DeviceSpec::reference_pair();
        spec.coupling_j = 0.0;
        let h = drift_hamiltonian(&spec);
        let t1 = &spec.transmons[0];
        let t2 = &spec.transmons[1];
        let expect = &kron(&t1.drift(), &ComplexMatrix::identity(5)) + &kron(&ComplexMatrix::identity(5), &t2.drift());
        assert!((&h - &expect).frobenius_norm() < 1e-14);
    }

    #[test]
    fn coupling_sparsity() {
        let spec = DeviceSpec::reference_pair();
        let h = drift_hamiltonian(&spec);
        let x = kron(&spec.transmons[0].drive_operator(), &spec.transmons[1].drive_operator());
        for i in 0..25 {
            for j in 0..25 {
                if i != j && x.get(i, j).norm() == 0.0 {
                    assert_eq!(h.get(i, j).norm(), 0.0);
                }
            }
        }
    }

    #[test]
    fn validation() {
        assert!(TransmonSpec::new(5.0, 0.3, 4).is_err());
        assert!(TransmonSpec::new(5.0, -0.3, 5).is_err());
        assert!(TransmonSpec::new(0.3, 0.5, 5).is_err());
        let t = reference_transmon();
        assert!(DeviceSpec::coupled(t.clone(), t.clone(), 0.5).is_err());
        let mut single = DeviceSpec::single(t);
        single.coupling_j = 0.01;
        assert!(single.validate().is_err());
    }

    #[test]
    fn relabel_indices() {
        let m = relabel_map(&[5]).unwrap();
        assert_eq!(m.computational_indices, vec![0, 1, 2, 3]);
        let m2 = relabel_map(&[5, 5]).unwrap();
        assert_eq!(m2.computational_indices.len(), 16);
        assert_eq!(m2.computational_indices[15], 18);
        assert_eq!(relabel_bits(2).unwrap(), "10");
        assert_eq!(relabel_bits(1).unwrap(), "01");
        assert!(relabel_bits(4).is_err());
        assert!(relabel_map(&[5, 5, 5]).is_err());
    }

    #[test]
    fn dressed_weak_coupling_is_near_identity() {
        let mut spec = DeviceSpec::reference_pair();
        spec.coupling_j = 1e-7;
        let m = dressed_map(&spec).unwrap();
        let bare = relabel_map(&[5, 5]).unwrap();
        for (k, &d) in m.computational_indices.iter().enumerate() {
            assert_eq!(m.labels[d], bare.computational_indices[k]);
            let overlap = m.transform.get(bare.computational_indices[k], d);
            assert!((overlap - C64::new(1.0, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn dressed_reference_overlaps() {
        let spec = DeviceSpec::reference_pair();
        let m = dressed_map(&spec).unwrap();
        // |3,x> of transmon 1 sits within 0.1 GHz of |2,x+1>, so only the
        // low-excitation states stay above 0.9.
        for &d in &m.computational_indices {
            let w = m.transform.get(m.labels[d], d).norm_sqr();
            let excitation: usize = spec.split_index(m.labels[d]).iter().sum();
            if excitation <= 3 {
                assert!(w > 0.9, "overlap {w}");
            }
            assert!(w > 0.77, "overlap {w}");
            // Margin over the runner-up bare component.
            let second = (0..25)
                .filter(|&r| r != m.labels[d])
                .map(|r| m.transform.get(r, d).norm_sqr())
                .fold(0.0, f64::max);
            assert!(w - second > 0.5);
        }
        // Transform diagonalizes H0 + H_J.
        let h = drift_hamiltonian(&spec);
        let d = &(&m.transform.adjoint() * &h) * &m.transform;
        let off: f64 = (0..25)
            .flat_map(|i| (0..25).map(move |j| (i, j)))
            .filter(|(i, j)| i != j)
            .map(|(i, j)| d.get(i, j).norm())
            .fold(0.0, f64::max);
        assert!(off < 1e-9);
        assert!(m.transform.unitarity_defect() < 1e-10);
    }

    #[test]
    fn dressed_needs_coupling() {
        assert!(dressed_map(&DeviceSpec::reference_single()).is_err());
    }

    #[test]
    fn degeneracy_is_reported() {
        // Both eigenvectors of X have equal weight on both bare states.
        let v = ComplexMatrix::from_real_row_major(2, 2, &[0.8, 0.6, 0.6, -0.8]).unwrap();
        assert_eq!(assign_bare_labels(&v).unwrap(), vec![0, 1]);
        let w = ComplexMatrix::from_real_row_major(2, 2, &[0.8, 0.8, 0.6, -0.6]).unwrap();
        assert!(matches!(assign_bare_labels(&w), Err(SynthError::Degeneracy { first: 0, second: 1, bare: 0 })));
    }

    #[test]
    fn pauli_drift_coefficients() {
        let h = project_single(&reference_transmon().drift());
        let t = pauli_decompose(&h).unwrap();
        // Direct traces of diag(0, ω, 2ω−λ, 3ω−3λ).
        assert!((t.get("II").unwrap() - 7.2).abs() < 1e-12);
        assert!((t.get("IZ").unwrap() + 2.35).abs() < 1e-12);
        assert!((t.get("ZI").unwrap() + 4.7).abs() < 1e-12);
        assert!((t.get("ZZ").unwrap() + 0.15).abs() < 1e-12);
        assert!((&t.reconstruct() - &h).frobenius_norm() < 1e-10);
    }

    #[test]
    fn pauli_drive_coefficients() {
        let x = project_single(&reference_transmon().drive_operator());
        let t = pauli_decompose(&x).unwrap();
        let s3 = 3f64.sqrt();
        assert!((t.get("IX").unwrap() - 0.5 * (1.0 + s3)).abs() < 1e-12);
        assert!((t.get("ZX").unwrap() - 0.5 * (1.0 - s3)).abs() < 1e-12);
        assert!((t.get("XX").unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-12);
        assert!((t.get("YY").unwrap() - 1.0 / 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn pauli_zero_and_errors() {
        let t = pauli_decompose(&ComplexMatrix::zeros(4, 4)).unwrap();
        assert!(t.coeffs.iter().flatten().all(|&c| c == 0.0));
        assert!(pauli_decompose(&ComplexMatrix::zeros(3, 3)).is_err());
        let nh = ComplexMatrix::from_fn(4, 4, |i, j| C64::new(if j == i + 1 { 1.0 } else { 0.0 }, 0.0));
        assert!(matches!(pauli_decompose(&nh), Err(SynthError::ContractViolation(_))));
    }
}
