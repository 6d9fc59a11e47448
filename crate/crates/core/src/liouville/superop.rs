use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::operator::{BasisLabel, OperatorMatrix};
use crate::error::{Error, Result};

/// A linear map on density matrices, stored as an N²×N² matrix.
///
/// Density matrices are vectorized row-major: element `ρ[i][j]` sits at
/// index `i·N + j`. With that convention `vec(AρB) = (A ⊗ Bᵀ) vec(ρ)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Superoperator {
    basis: BasisLabel,
    matrix: DMatrix<Complex64>,
}

impl Superoperator {
    pub fn from_matrix(basis: BasisLabel, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n2 = basis.dim() * basis.dim();
        if matrix.nrows() != n2 || matrix.ncols() != n2 {
            return Err(Error::DimensionMismatch {
                expected: n2,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { basis, matrix })
    }

    pub fn zeros(basis: &BasisLabel) -> Self {
        let n2 = basis.dim() * basis.dim();
        Self { basis: basis.clone(), matrix: DMatrix::zeros(n2, n2) }
    }

    pub fn identity(basis: &BasisLabel) -> Self {
        let n2 = basis.dim() * basis.dim();
        Self { basis: basis.clone(), matrix: DMatrix::identity(n2, n2) }
    }

    pub fn basis(&self) -> &BasisLabel {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// Liouville-space index of `|i⟩⟨j|`.
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.dim() + j
    }

    /// `⟨ij|𝓛|kl⟩`: the coefficient of `ρ_kl` in `(𝓛ρ)_ij`.
    pub fn element(&self, (i, j): (usize, usize), (k, l): (usize, usize)) -> Complex64 {
        self.matrix[(self.index(i, j), self.index(k, l))]
    }

    pub fn apply(&self, rho: &OperatorMatrix) -> Result<OperatorMatrix> {
        if rho.basis() != &self.basis {
            return Err(Error::BasisMismatch);
        }
        let out = &self.matrix * vectorize(rho.entries());
        Ok(OperatorMatrix::from_parts_unchecked(self.basis.clone(), unvectorize(&out, self.dim())))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { basis: self.basis.clone(), matrix: &self.matrix * Complex64::new(factor, 0.0) }
    }

    pub fn scaled_complex(&self, factor: Complex64) -> Self {
        Self { basis: self.basis.clone(), matrix: &self.matrix * factor }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(Self { basis: self.basis.clone(), matrix: &self.matrix + &other.matrix })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_basis(other)?;
        Ok(Self { basis: self.basis.clone(), matrix: &self.matrix - &other.matrix })
    }

    pub(crate) fn add_scaled_in_place(&mut self, other: &Self, factor: Complex64) -> Result<()> {
        self.same_basis(other)?;
        self.matrix.zip_apply(&other.matrix, |a, b| *a += b * factor);
        Ok(())
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> f64 {
        if self.matrix.iter().all(|z| *z == Complex64::new(0.0, 0.0)) {
            return 0.0;
        }
        self.matrix.clone().svd(false, false).singular_values.max()
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        let schur = nalgebra::Schur::new(self.matrix.clone());
        schur.eigenvalues().map(|v| v.iter().copied().collect()).unwrap_or_default()
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn same_basis(&self, other: &Self) -> Result<()> {
        if self.basis != other.basis {
            return Err(Error::BasisMismatch);
        }
        Ok(())
    }
}

pub(crate) fn vectorize(m: &DMatrix<Complex64>) -> DVector<Complex64> {
    let n = m.nrows();
    DVector::from_fn(n * n, |idx, _| m[(idx / n, idx % n)])
}

pub(crate) fn unvectorize(v: &DVector<Complex64>, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

/// `ρ ↦ AρB`, the building block of every other constructor.
pub fn two_sided_super(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<Superoperator> {
    a.same_basis(b)?;
    let bt = b.entries().transpose();
    Ok(Superoperator { basis: a.basis().clone(), matrix: a.entries().kronecker(&bt) })
}

/// `ρ ↦ Aρ`.
pub fn left_super(a: &OperatorMatrix) -> Superoperator {
    let id = OperatorMatrix::identity(a.basis());
    two_sided_super(a, &id).expect("same basis")
}

/// `ρ ↦ ρA`.
pub fn right_super(a: &OperatorMatrix) -> Superoperator {
    let id = OperatorMatrix::identity(a.basis());
    two_sided_super(&id, a).expect("same basis")
}

/// `ρ ↦ [A, ρ] = Aρ − ρA`.
pub fn commutator_super(a: &OperatorMatrix) -> Superoperator {
    left_super(a).try_sub(&right_super(a)).expect("same basis")
}

/// `ρ ↦ [A, ρ]₊ = Aρ + ρA`.
pub fn anticommutator_super(a: &OperatorMatrix) -> Superoperator {
    left_super(a).try_add(&right_super(a)).expect("same basis")
}

/// `ρ ↦ AρA`.
pub fn sandwich_super(a: &OperatorMatrix) -> Superoperator {
    two_sided_super(a, a).expect("same basis")
}

/// Full generator `𝓛 = −i[H, ·] + Σ relaxers − Σ reactors`.
///
/// Reactors are passed as positive decay superoperators: each contributes
/// `−K̂ρ` to `ρ̇`.
pub fn assemble_generator(
    hamiltonian: &OperatorMatrix,
    relaxers: &[Superoperator],
    reactors: &[Superoperator],
) -> Result<Superoperator> {
    let basis = hamiltonian.basis();
    let mut gen = commutator_super(hamiltonian).scaled_complex(Complex64::new(0.0, -1.0));
    for r in relaxers {
        if r.basis() != basis {
            return Err(Error::BasisMismatch);
        }
        gen.add_scaled_in_place(r, Complex64::new(1.0, 0.0))?;
    }
    for k in reactors {
        if k.basis() != basis {
            return Err(Error::BasisMismatch);
        }
        gen.add_scaled_in_place(k, Complex64::new(-1.0, 0.0))?;
    }
    Ok(gen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
        DMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    fn random_op(rng: &mut ChaCha8Rng, basis: &BasisLabel) -> OperatorMatrix {
        OperatorMatrix::new(basis.clone(), random_matrix(rng, basis.dim())).unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, basis: &BasisLabel) -> OperatorMatrix {
        let m = random_matrix(rng, basis.dim());
        OperatorMatrix::new(basis.clone(), &m + m.adjoint()).unwrap()
    }

    #[test]
    fn identity_commutator_vanishes() {
        let b = BasisLabel::numbered(3).unwrap();
        let s = commutator_super(&OperatorMatrix::identity(&b));
        assert_eq!(s.max_abs(), 0.0);
    }

    #[test]
    fn diagonal_hamiltonian_gives_bohr_phase() {
        let b = BasisLabel::numbered(3).unwrap();
        let (w0, ws) = (3.0, 2.0);
        let h = OperatorMatrix::from_real_diagonal(&b, &[w0, ws / 2.0, -ws / 2.0]).unwrap();
        let rho = OperatorMatrix::ket_bra(&b, 0, 1).unwrap();
        let out = commutator_super(&h).apply(&rho).unwrap();
        assert!((out.get(0, 1) - Complex64::new(w0 - ws / 2.0, 0.0)).norm() < 1e-15);
        assert_eq!(out.entries().iter().filter(|z| z.norm() > 0.0).count(), 1);
    }

    #[test]
    fn anticommutator_and_sandwich_trivial_cases() {
        let b = BasisLabel::new(["S", "T+", "T0", "T-"]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rho = random_op(&mut rng, &b);
        let id = OperatorMatrix::identity(&b);
        let doubled = anticommutator_super(&id).apply(&rho).unwrap();
        assert!(doubled.max_abs_diff(&rho.scaled(Complex64::new(2.0, 0.0))).unwrap() < 1e-15);
        assert!(sandwich_super(&id).try_sub(&Superoperator::identity(&b)).unwrap().max_abs() < 1e-15);

        let ps = OperatorMatrix::projector(&b, 0).unwrap();
        let st0 = OperatorMatrix::ket_bra(&b, 0, 2).unwrap();
        let out = anticommutator_super(&ps).apply(&st0).unwrap();
        assert!(out.max_abs_diff(&st0).unwrap() < 1e-15);

        let b3 = BasisLabel::numbered(3).unwrap();
        let p1 = OperatorMatrix::projector(&b3, 1).unwrap();
        assert!(sandwich_super(&p1).apply(&p1).unwrap().max_abs_diff(&p1).unwrap() < 1e-15);
    }

    #[test]
    fn constructors_match_direct_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..=5 {
            let b = BasisLabel::numbered(n).unwrap();
            let a = random_op(&mut rng, &b);
            let c = random_op(&mut rng, &b);
            let rho = random_op(&mut rng, &b);
            let (am, cm, rm) = (a.entries(), c.entries(), rho.entries());
            let cases = [
                (commutator_super(&a), am * rm - rm * am),
                (anticommutator_super(&a), am * rm + rm * am),
                (sandwich_super(&a), am * rm * am),
                (two_sided_super(&a, &c).unwrap(), am * rm * cm),
            ];
            for (s, direct) in cases {
                let got = s.apply(&rho).unwrap();
                let diff = (got.entries() - direct).norm();
                assert!(diff < 1e-12, "n={n} diff={diff}");
            }
        }
    }

    #[test]
    fn element_indexing_is_row_major() {
        let b = BasisLabel::numbered(3).unwrap();
        let a = OperatorMatrix::from_real_diagonal(&b, &[1.0, 2.0, 5.0]).unwrap();
        let s = commutator_super(&a);
        assert_eq!(s.element((0, 2), (0, 2)), Complex64::new(-4.0, 0.0));
        assert_eq!(s.element((2, 1), (2, 1)), Complex64::new(3.0, 0.0));
        assert_eq!(s.index(2, 1), 7);
    }

    #[test]
    fn pure_decay_generator_is_minus_kappa_identity() {
        let b = BasisLabel::numbered(2).unwrap();
        let kappa = 2.5;
        let k = Superoperator::identity(&b).scaled(kappa);
        let gen = assemble_generator(&OperatorMatrix::zeros(&b), &[], &[k]).unwrap();
        let expected = Superoperator::identity(&b).scaled(-kappa);
        assert!(gen.try_sub(&expected).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn generator_rejects_foreign_basis() {
        let b2 = BasisLabel::numbered(2).unwrap();
        let other = BasisLabel::new(["a", "b"]).unwrap();
        let err = assemble_generator(&OperatorMatrix::zeros(&b2), &[Superoperator::zeros(&other)], &[]);
        assert_eq!(err.unwrap_err(), Error::BasisMismatch);
    }

    #[test]
    fn generator_preserves_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b = BasisLabel::numbered(4).unwrap();
        let h = random_hermitian(&mut rng, &b);
        let l = random_op(&mut rng, &b);
        // Lindblad dissipator for jump operator l.
        let ldl = l.adjoint().try_mul(&l).unwrap();
        let diss = two_sided_super(&l, &l.adjoint())
            .unwrap()
            .try_sub(&anticommutator_super(&ldl).scaled(0.5))
            .unwrap();
        let react = anticommutator_super(&OperatorMatrix::projector(&b, 0).unwrap());
        let gen = assemble_generator(&h, &[diss], &[react]).unwrap();
        let rho = random_hermitian(&mut rng, &b);
        let out = gen.apply(&rho).unwrap();
        assert!(out.hermiticity_deviation() < 1e-12);
    }

    #[test]
    fn apply_rejects_wrong_basis() {
        let b = BasisLabel::numbered(2).unwrap();
        let other = BasisLabel::new(["x", "y"]).unwrap();
        let s = Superoperator::identity(&b);
        assert_eq!(s.apply(&OperatorMatrix::zeros(&other)).unwrap_err(), Error::BasisMismatch);
    }
}
