use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative tolerance for the Hermiticity check on operators.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Slack allowed on density-matrix trace and eigenvalues at construction.
pub const DENSITY_TOL: f64 = 1e-9;

/// Ordered, unique state labels spanning the system's Hilbert space.
#[derive(Clone, PartialEq, Eq)]
pub struct BasisLabel(Arc<[String]>);

impl BasisLabel {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::InvalidBasis(format!(
                "dimension must be at least 2, got {}",
                names.len()
            )));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::InvalidBasis(format!("duplicate label {name:?}")));
            }
        }
        Ok(Self(names.into()))
    }

    /// Labels "0", "1", ..., "n-1".
    pub fn numbered(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.iter().position(|n| n == label)
    }
}

impl fmt::Debug for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// A complex N×N operator attached to a labeled basis.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    basis: BasisLabel,
    entries: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn new(basis: BasisLabel, entries: DMatrix<Complex64>) -> Result<Self> {
        let n = basis.dim();
        if entries.nrows() != n || entries.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: entries.nrows().max(entries.ncols()),
            });
        }
        Ok(Self { basis, entries })
    }

    /// Like [`OperatorMatrix::new`] but rejects operators with
    /// `‖A − A†‖ > 1e-12·‖A‖`.
    pub fn hermitian(basis: BasisLabel, entries: DMatrix<Complex64>) -> Result<Self> {
        let op = Self::new(basis, entries)?;
        let deviation = op.hermiticity_deviation();
        if deviation > HERMITIAN_TOL * op.entries.norm().max(f64::MIN_POSITIVE) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(op)
    }

    pub fn zeros(basis: &BasisLabel) -> Self {
        let n = basis.dim();
        Self { basis: basis.clone(), entries: DMatrix::zeros(n, n) }
    }

    pub fn identity(basis: &BasisLabel) -> Self {
        let n = basis.dim();
        Self { basis: basis.clone(), entries: DMatrix::identity(n, n) }
    }

    /// `|i⟩⟨j|`.
    pub fn ket_bra(basis: &BasisLabel, i: usize, j: usize) -> Result<Self> {
        let n = basis.dim();
        if i >= n || j >= n {
            return Err(Error::DimensionMismatch { expected: n, found: i.max(j) + 1 });
        }
        let mut op = Self::zeros(basis);
        op.entries[(i, j)] = Complex64::new(1.0, 0.0);
        Ok(op)
    }

    /// Projector `|i⟩⟨i|`.
    pub fn projector(basis: &BasisLabel, i: usize) -> Result<Self> {
        Self::ket_bra(basis, i, i)
    }

    pub fn from_real_diagonal(basis: &BasisLabel, diag: &[f64]) -> Result<Self> {
        if diag.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: diag.len() });
        }
        let mut op = Self::zeros(basis);
        for (i, &d) in diag.iter().enumerate() {
            op.entries[(i, i)] = Complex64::new(d, 0.0);
        }
        Ok(op)
    }

    pub fn basis(&self) -> &BasisLabel {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn into_entries(self) -> DMatrix<Complex64> {
        self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[(i, j)]
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        (&self.entries - self.entries.adjoint()).norm()
    }

    pub fn adjoint(&self) -> Self {
        Self { basis: self.basis.clone(), entries: self.entries.adjoint() }
    }

    pub fn trace(&self) -> Complex64 {
        self.entries.trace()
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self { basis: self.basis.clone(), entries: &self.entries * factor }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(Self { basis: self.basis.clone(), entries: &self.entries + &other.entries })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(Self { basis: self.basis.clone(), entries: &self.entries - &other.entries })
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(Self { basis: self.basis.clone(), entries: &self.entries * &other.entries })
    }

    /// Largest entry modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.same_basis(other)?;
        Ok((&self.entries - &other.entries).iter().map(|z| z.norm()).fold(0.0, f64::max))
    }

    pub(crate) fn same_basis(&self, other: &Self) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }

    pub(crate) fn from_parts_unchecked(basis: BasisLabel, entries: DMatrix<Complex64>) -> Self {
        debug_assert_eq!(entries.nrows(), basis.dim());
        Self { basis, entries }
    }
}

/// A Hermitian, positive semidefinite operator with `0 ≤ Tr ρ ≤ 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(OperatorMatrix);

impl DensityMatrix {
    pub fn new(op: OperatorMatrix) -> Result<Self> {
        let scale = op.entries.norm().max(1.0);
        let herm = op.hermiticity_deviation();
        if herm > DENSITY_TOL * scale {
            return Err(Error::InvalidDensity(format!("not Hermitian (deviation {herm:.3e})")));
        }
        let tr = op.trace();
        if tr.im.abs() > DENSITY_TOL || tr.re < -DENSITY_TOL || tr.re > 1.0 + DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("trace {tr} outside [0, 1]")));
        }
        let hermitian = (&op.entries + op.entries.adjoint()) * Complex64::new(0.5, 0.0);
        let min_eig = hermitian.symmetric_eigenvalues().min();
        if min_eig < -DENSITY_TOL {
            return Err(Error::InvalidDensity(format!("negative eigenvalue {min_eig:.3e}")));
        }
        Ok(Self(op))
    }

    /// `|ψ⟩⟨ψ|` for a state vector of norm ≤ 1.
    pub fn pure(basis: &BasisLabel, psi: &[Complex64]) -> Result<Self> {
        if psi.len() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), found: psi.len() });
        }
        let v = nalgebra::DVector::from_column_slice(psi);
        let entries = &v * v.adjoint();
        Self::new(OperatorMatrix::new(basis.clone(), entries)?)
    }

    /// Pure basis state `|i⟩⟨i|`.
    pub fn basis_state(basis: &BasisLabel, i: usize) -> Result<Self> {
        Self::new(OperatorMatrix::projector(basis, i)?)
    }

    pub fn maximally_mixed(basis: &BasisLabel) -> Self {
        let n = basis.dim();
        Self(OperatorMatrix::identity(basis).scaled(Complex64::new(1.0 / n as f64, 0.0)))
    }

    /// Hermitian part of a propagated state. Generators built by this crate
    /// preserve Hermiticity, so this only strips round-off.
    pub(crate) fn from_evolved(op: OperatorMatrix) -> Self {
        let herm = (&op.entries + op.entries.adjoint()) * Complex64::new(0.5, 0.0);
        Self(OperatorMatrix { basis: op.basis, entries: herm })
    }

    pub fn as_operator(&self) -> &OperatorMatrix {
        &self.0
    }

    pub fn into_operator(self) -> OperatorMatrix {
        self.0
    }

    pub fn basis(&self) -> &BasisLabel {
        self.0.basis()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0.get(i, j)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    pub fn population(&self, i: usize) -> f64 {
        self.0.get(i, i).re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.entries.symmetric_eigenvalues().min()
    }
}
