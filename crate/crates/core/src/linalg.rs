//! Small dense complex linear-algebra helpers on top of nalgebra.

use nalgebra::ComplexField;
use nalgebra::{DMatrix, Schur, SymmetricEigen, SVD};
use num_complex::Complex;

use crate::scalar::{cis, creal, CMat, CVec, Scalar};

/// Frobenius norm of `m - m†`.
pub fn hermiticity_defect<T: Scalar>(m: &CMat<T>) -> T {
    (m - m.adjoint()).norm()
}

/// Frobenius norm of `m + m†`.
pub fn anti_hermiticity_defect<T: Scalar>(m: &CMat<T>) -> T {
    (m + m.adjoint()).norm()
}

/// Frobenius norm of `U†U - I`.
pub fn unitarity_defect<T: Scalar>(u: &CMat<T>) -> T {
    let n = u.nrows();
    (u.adjoint() * u - CMat::<T>::identity(n, n)).norm()
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues in ascending
/// order and eigenvectors as the matching columns.
pub fn eigh<T: Scalar>(h: &CMat<T>) -> (Vec<T>, CMat<T>) {
    let eig = SymmetricEigen::new(h.clone());
    let n = h.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::<T>::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// `exp(-i H t)` for Hermitian `H`; exactly unitary up to rounding.
pub fn expm_hermitian<T: Scalar>(h: &CMat<T>, t: T) -> CMat<T> {
    let (values, vectors) = eigh(h);
    let n = h.nrows();
    let phases = CMat::<T>::from_fn(n, n, |r, c| {
        if r == c {
            cis(-values[r] * t)
        } else {
            Complex::new(T::zero(), T::zero())
        }
    });
    &vectors * phases * vectors.adjoint()
}

/// `exp(X)` for an anti-Hermitian `X` (so the result is unitary).
pub fn expm_anti_hermitian<T: Scalar>(x: &CMat<T>) -> CMat<T> {
    // X = -i H with H = i X Hermitian; exp(X) = exp(-i H).
    let h = x * Complex::new(T::zero(), T::one());
    let h = (&h + h.adjoint()) * creal(T::lit(0.5));
    expm_hermitian(&h, T::one())
}

/// Principal logarithm of a unitary matrix, returned as an anti-Hermitian
/// matrix. Eigenphases are taken in `(-π, π]`; `None` when an eigenvalue is
/// within `edge` of `-1`, where the principal branch is discontinuous.
pub fn log_unitary<T: Scalar>(u: &CMat<T>, edge: T) -> Option<CMat<T>> {
    let n = u.nrows();
    let (q, t) = Schur::new(u.clone()).unpack();
    let mut d = CMat::<T>::zeros(n, n);
    for i in 0..n {
        let lambda = t[(i, i)];
        if (lambda + creal(T::one())).modulus() < edge {
            return None;
        }
        d[(i, i)] = Complex::new(T::zero(), lambda.argument());
    }
    let log = &q * d * q.adjoint();
    Some((&log - log.adjoint()) * creal(T::lit(0.5)))
}

/// Unitary factor of the polar decomposition `M = U P`.
pub fn polar_unitary<T: Scalar>(m: &CMat<T>) -> CMat<T> {
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("left singular vectors");
    let v_t = svd.v_t.expect("right singular vectors");
    u * v_t
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_hermitian_part_eigenvalue<T: Scalar>(m: &CMat<T>) -> T {
    let herm = (m + m.adjoint()) * creal(T::lit(0.5));
    let (values, _) = eigh(&herm);
    values.first().copied().unwrap_or_else(T::zero)
}

/// Kronecker product of two complex matrices.
pub fn kron<T: Scalar>(a: &CMat<T>, b: &CMat<T>) -> CMat<T> {
    a.kronecker(b)
}

/// Trace of a square complex matrix.
pub fn trace<T: Scalar>(m: &CMat<T>) -> Complex<T> {
    m.diagonal().iter().fold(Complex::new(T::zero(), T::zero()), |acc, z| acc + z)
}

/// Builds a complex matrix from real row-major entries.
pub fn real_matrix<T: Scalar>(n: usize, entries: &[f64]) -> CMat<T> {
    CMat::<T>::from_fn(n, n, |r, c| creal(T::lit(entries[r * n + c])))
}

/// Outer product `|a⟩⟨b|`.
pub fn outer<T: Scalar>(a: &CVec<T>, b: &CVec<T>) -> CMat<T> {
    a * b.adjoint()
}

/// Converts a real nalgebra matrix into a complex one.
pub fn complexify<T: Scalar>(m: &DMatrix<T>) -> CMat<T> {
    m.map(creal)
}
