//! States, density matrices, unitaries and the Bloch-sphere correspondence.
//!
//! Basis ordering is `|0⟩ = (1, 0)`, `|1⟩ = (0, 1)` and the Pauli matrices
//! follow the standard convention. A qubit density matrix is
//! `ρ = ½(I + s·σ)`; the ½ is what makes `tr ρ = 1`.

use nalgebra::ComplexField;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{hermiticity_defect, eigh, trace, unitarity_defect};
use crate::scalar::{cis, cplx, creal, CMat, CVec, Scalar};

/// Normalized state vector of dimension at least 2.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState<T: Scalar> {
    amplitudes: CVec<T>,
}

impl<T: Scalar> PureState<T> {
    /// Wraps an already normalized amplitude vector.
    pub fn new(amplitudes: CVec<T>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::Input(format!("state dimension {} < 2", amplitudes.len())));
        }
        let norm = amplitudes.norm();
        if (norm - T::one()).abs() > T::tol(1e-12) {
            return Err(Error::Validation(format!("state norm {} differs from 1", norm.as_f64())));
        }
        Ok(Self { amplitudes })
    }

    /// Wraps amplitudes produced by unitary evolution of a valid state,
    /// keeping whatever rounding drift they carry.
    pub(crate) fn from_evolved(amplitudes: CVec<T>) -> Self {
        Self { amplitudes }
    }

    /// Normalizes `amplitudes` and wraps them.
    pub fn normalized(amplitudes: CVec<T>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm <= T::tol(1e-300) || !norm.is_finite() {
            return Err(Error::Input("cannot normalize a zero vector".into()));
        }
        Self::new(amplitudes.unscale(norm))
    }

    /// Builds a state from `(re, im)` pairs, normalizing them.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::normalized(CVec::<T>::from_iterator(pairs.len(), pairs.iter().map(|&(r, i)| cplx(r, i))))
    }

    /// Computational basis vector `|k⟩` of dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        assert!(dim >= 2 && k < dim, "basis index out of range");
        let mut v = CVec::<T>::zeros(dim);
        v[k] = creal(T::one());
        Self { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVec<T> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVec<T> {
        self.amplitudes
    }

    /// The same ray with a global phase `e^{iα}` attached.
    pub fn rephased(&self, alpha: T) -> Self {
        Self { amplitudes: self.amplitudes.map(|a| a * cis(alpha)) }
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> CMat<T> {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    /// `|⟨a|b⟩|²`, which ignores global phases.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        Ok(overlap(self, other)?.norm_sqr())
    }
}

/// Bloch-sphere point of the qubit ray. Panics when `dim != 2`.
impl<T: Scalar> From<&PureState<T>> for BlochVector<T> {
    fn from(psi: &PureState<T>) -> Self {
        assert_eq!(psi.dim(), 2, "Bloch vectors exist only for qubits");
        let a = psi.amplitudes[0];
        let b = psi.amplitudes[1];
        let off = a.conj() * b;
        BlochVector {
            x: T::lit(2.0) * off.re,
            y: T::lit(2.0) * off.im,
            z: a.norm_sqr() - b.norm_sqr(),
        }
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Scalar> {
    entries: CMat<T>,
}

impl<T: Scalar> DensityMatrix<T> {
    pub fn new(entries: CMat<T>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension { expected: entries.nrows(), found: entries.ncols() });
        }
        if hermiticity_defect(&entries) > T::tol(1e-12) {
            return Err(Error::Validation("density matrix is not Hermitian".into()));
        }
        let tr = trace(&entries);
        if (tr.re - T::one()).abs() > T::tol(1e-12) || tr.im.abs() > T::tol(1e-12) {
            return Err(Error::Validation(format!("density matrix trace {} != 1", tr.re.as_f64())));
        }
        let herm = (&entries + entries.adjoint()) * creal(T::lit(0.5));
        let (values, _) = eigh(&herm);
        if values[0] < -T::tol(1e-10) {
            return Err(Error::Validation(format!("negative eigenvalue {}", values[0].as_f64())));
        }
        Ok(Self { entries: herm })
    }

    pub fn from_pure(psi: &PureState<T>) -> Self {
        Self { entries: psi.projector() }
    }

    /// `I/N`.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self { entries: CMat::<T>::identity(dim, dim) * creal(T::one() / T::lit(dim as f64)) }
    }

    /// Convex mixture `Σ p_k |ψ_k⟩⟨ψ_k|`; weights are renormalized.
    pub fn mixture(weights: &[T], states: &[PureState<T>]) -> Result<Self> {
        if weights.len() != states.len() || states.is_empty() {
            return Err(Error::Input("mixture needs one weight per state".into()));
        }
        let dim = states[0].dim();
        let total = weights.iter().fold(T::zero(), |a, &w| a + w);
        if weights.iter().any(|&w| w < T::zero()) || total <= T::zero() {
            return Err(Error::Input("mixture weights must be non-negative".into()));
        }
        let mut m = CMat::<T>::zeros(dim, dim);
        for (w, s) in weights.iter().zip(states) {
            if s.dim() != dim {
                return Err(Error::Dimension { expected: dim, found: s.dim() });
            }
            m += s.projector() * creal(*w / total);
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMat<T> {
        &self.entries
    }

    /// `tr ρ²`; 1 exactly for pure states.
    pub fn purity(&self) -> T {
        trace(&(&self.entries * &self.entries)).re
    }
}

/// Unitary operator, `‖U†U − I‖_F ≤ 1e-10`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp<T: Scalar> {
    entries: CMat<T>,
}

impl<T: Scalar> UnitaryOp<T> {
    pub fn new(entries: CMat<T>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension { expected: entries.nrows(), found: entries.ncols() });
        }
        let defect = unitarity_defect(&entries);
        if defect > T::tol(1e-10) {
            return Err(Error::Validation(format!("operator is not unitary (defect {:e})", defect.as_f64())));
        }
        Ok(Self { entries })
    }

    pub fn identity(dim: usize) -> Self {
        Self { entries: CMat::<T>::identity(dim, dim) }
    }

    /// `diag(e^{iφ_0}, e^{iφ_1}, …)`.
    pub fn diagonal_phases(phases: &[T]) -> Self {
        let n = phases.len();
        Self { entries: CMat::<T>::from_fn(n, n, |r, c| if r == c { cis(phases[r]) } else { creal(T::zero()) }) }
    }

    pub fn pauli_x() -> Self {
        Self { entries: pauli_x() }
    }

    pub fn pauli_y() -> Self {
        Self { entries: pauli_y() }
    }

    pub fn pauli_z() -> Self {
        Self { entries: pauli_z() }
    }

    pub fn hadamard() -> Self {
        let h = T::one() / T::lit(2.0).sqrt();
        Self { entries: CMat::<T>::from_row_slice(2, 2, &[creal(h), creal(h), creal(h), creal(-h)]) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &CMat<T> {
        &self.entries
    }

    pub fn into_entries(self) -> CMat<T> {
        self.entries
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.adjoint() }
    }

    /// Operator product `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        if self.dim() != rhs.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: rhs.dim() });
        }
        Ok(Self { entries: &self.entries * &rhs.entries })
    }

    /// `|tr(A†B)| / N`, i.e. equality up to a global phase.
    pub fn phase_insensitive_fidelity(&self, other: &Self) -> Result<T> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension { expected: self.dim(), found: other.dim() });
        }
        let t = trace(&(self.entries.adjoint() * &other.entries));
        Ok(t.modulus() / T::lit(self.dim() as f64))
    }
}

/// Real coordinates `s_i = tr(σ_i ρ)` inside the closed unit ball.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector<T: Scalar> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Scalar> BlochVector<T> {
    pub fn new(x: T, y: T, z: T) -> Result<Self> {
        let v = Self { x, y, z };
        if v.norm() > T::one() + T::tol(1e-10) {
            return Err(Error::Domain("point outside Bloch ball".into()));
        }
        Ok(v)
    }

    /// Unit vector from polar angle `theta` and azimuth `phi`.
    pub fn from_angles(theta: T, phi: T) -> Self {
        Self { x: theta.sin() * phi.cos(), y: theta.sin() * phi.sin(), z: theta.cos() }
    }

    pub fn norm(&self) -> T {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn is_pure(&self) -> bool {
        (self.norm() - T::one()).abs() <= T::tol(1e-10)
    }

    pub fn dot(&self, o: &Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self {
            x: self.y * o.z - self.z * o.y,
            y: self.z * o.x - self.x * o.z,
            z: self.x * o.y - self.y * o.x,
        }
    }

    pub fn scale(&self, k: T) -> Self {
        Self { x: self.x * k, y: self.y * k, z: self.z * k }
    }

    pub fn normalized(&self) -> Self {
        self.scale(T::one() / self.norm())
    }

    /// Polar angle in `[0, π]`.
    pub fn polar(&self) -> T {
        (self.z / self.norm()).max(-T::one()).min(T::one()).acos()
    }

    /// Azimuth in `(-π, π]`.
    pub fn azimuth(&self) -> T {
        self.y.atan2(self.x)
    }

    /// The pure state `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩` on this direction.
    pub fn to_state(&self) -> PureState<T> {
        let n = self.normalized();
        let half = n.polar() / T::lit(2.0);
        let phi = if n.x.abs() + n.y.abs() > T::zero() { n.azimuth() } else { T::zero() };
        let v = CVec::<T>::from_vec(vec![creal(half.cos()), cis(phi) * half.sin()]);
        PureState { amplitudes: v }
    }
}

pub fn pauli_x<T: Scalar>() -> CMat<T> {
    CMat::<T>::from_row_slice(2, 2, &[cplx(0.0, 0.0), cplx(1.0, 0.0), cplx(1.0, 0.0), cplx(0.0, 0.0)])
}

pub fn pauli_y<T: Scalar>() -> CMat<T> {
    CMat::<T>::from_row_slice(2, 2, &[cplx(0.0, 0.0), cplx(0.0, -1.0), cplx(0.0, 1.0), cplx(0.0, 0.0)])
}

pub fn pauli_z<T: Scalar>() -> CMat<T> {
    CMat::<T>::from_row_slice(2, 2, &[cplx(1.0, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(-1.0, 0.0)])
}

/// `ρ = ½(I + s_x σ_x + s_y σ_y + s_z σ_z)`.
pub fn density_from_bloch<T: Scalar>(s: &BlochVector<T>) -> Result<DensityMatrix<T>> {
    if s.norm() > T::one() + T::tol(1e-10) {
        return Err(Error::Domain("point outside Bloch ball".into()));
    }
    let half = creal(T::lit(0.5));
    let m = (CMat::<T>::identity(2, 2) + pauli_x::<T>() * creal(s.x) + pauli_y::<T>() * creal(s.y)
        + pauli_z::<T>() * creal(s.z))
        * half;
    Ok(DensityMatrix { entries: m })
}

/// `s_i = tr(σ_i ρ)` for a qubit density matrix.
pub fn bloch_from_density<T: Scalar>(rho: &DensityMatrix<T>) -> Result<BlochVector<T>> {
    if rho.dim() != 2 {
        return Err(Error::Dimension { expected: 2, found: rho.dim() });
    }
    let e = rho.entries();
    Ok(BlochVector {
        x: trace(&(pauli_x::<T>() * e)).re,
        y: trace(&(pauli_y::<T>() * e)).re,
        z: trace(&(pauli_z::<T>() * e)).re,
    })
}

/// `⟨a|b⟩`.
pub fn overlap<T: Scalar>(a: &PureState<T>, b: &PureState<T>) -> Result<Complex<T>> {
    if a.dim() != b.dim() {
        return Err(Error::Dimension { expected: a.dim(), found: b.dim() });
    }
    Ok(a.amplitudes.dotc(&b.amplitudes))
}

/// `U|ψ⟩`.
pub fn apply<T: Scalar>(u: &UnitaryOp<T>, psi: &PureState<T>) -> Result<PureState<T>> {
    if u.dim() != psi.dim() {
        return Err(Error::Dimension { expected: u.dim(), found: psi.dim() });
    }
    Ok(PureState { amplitudes: &u.entries * &psi.amplitudes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: &CMat<f64>, b: &CMat<f64>, tol: f64) -> bool {
        (a - b).norm() < tol
    }

    #[test]
    fn density_from_bloch_examples() {
        let center = density_from_bloch(&BlochVector::new(0.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(close(center.entries(), &(CMat::identity(2, 2) * creal(0.5)), 1e-15));

        let north = density_from_bloch(&BlochVector::new(0.0, 0.0, 1.0).unwrap()).unwrap();
        assert!(close(north.entries(), &PureState::<f64>::basis(2, 0).projector(), 1e-15));

        // |+⟩⟨+| by hand: all entries ½.
        let plus = density_from_bloch(&BlochVector::new(1.0, 0.0, 0.0).unwrap()).unwrap();
        assert!(close(plus.entries(), &CMat::from_element(2, 2, creal(0.5)), 1e-15));
        assert!((trace(&(pauli_x::<f64>() * plus.entries())).re - 1.0).abs() < 1e-12);

        let err = density_from_bloch(&BlochVector { x: 0.8, y: 0.8, z: 0.0 }).unwrap_err();
        assert_eq!(err, Error::Domain("point outside Bloch ball".into()));
    }

    #[test]
    fn bloch_from_density_examples() {
        let mixed = DensityMatrix::<f64>::maximally_mixed(2);
        let s = bloch_from_density(&mixed).unwrap();
        assert!(s.norm() < 1e-15);

        let south = DensityMatrix::from_pure(&PureState::<f64>::basis(2, 1));
        let s = bloch_from_density(&south).unwrap();
        assert!((s.z + 1.0).abs() < 1e-15 && s.x.abs() < 1e-15 && s.y.abs() < 1e-15);

        // (|0⟩+i|1⟩)(⟨0|−i⟨1|)/2 = [[1, -i], [i, 1]] / 2; tr(σ_y ρ) = (−i·i + i·(−i))/2 = 1.
        let rho = DensityMatrix::new(CMat::from_row_slice(
            2,
            2,
            &[cplx::<f64>(0.5, 0.0), cplx(0.0, -0.5), cplx(0.0, 0.5), cplx(0.5, 0.0)],
        ))
        .unwrap();
        let s = bloch_from_density(&rho).unwrap();
        assert!(s.x.abs() < 1e-15 && (s.y - 1.0).abs() < 1e-15 && s.z.abs() < 1e-15);

        let big = DensityMatrix::<f64>::maximally_mixed(3);
        assert!(matches!(bloch_from_density(&big), Err(Error::Dimension { .. })));
    }

    #[test]
    fn overlap_examples() {
        let zero = PureState::<f64>::basis(2, 0);
        let one = PureState::<f64>::basis(2, 1);
        assert_eq!(overlap(&zero, &zero).unwrap(), cplx(1.0, 0.0));
        assert_eq!(overlap(&zero, &one).unwrap(), cplx(0.0, 0.0));
        let y = PureState::<f64>::from_pairs(&[(1.0, 0.0), (0.0, 1.0)]).unwrap();
        assert!((overlap(&zero, &y).unwrap() - cplx(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        let three = PureState::<f64>::basis(3, 0);
        assert!(matches!(overlap(&zero, &three), Err(Error::Dimension { .. })));
    }

    #[test]
    fn apply_examples() {
        let zero = PureState::<f64>::basis(2, 0);
        assert_eq!(apply(&UnitaryOp::identity(2), &zero).unwrap(), zero);
        assert_eq!(apply(&UnitaryOp::pauli_x(), &zero).unwrap(), PureState::basis(2, 1));
        let plus = apply(&UnitaryOp::hadamard(), &zero).unwrap();
        let expected = PureState::<f64>::from_pairs(&[(1.0, 0.0), (1.0, 0.0)]).unwrap();
        assert!((plus.amplitudes() - expected.amplitudes()).norm() < 1e-15);
        assert!(matches!(apply(&UnitaryOp::identity(3), &zero), Err(Error::Dimension { .. })));
    }

    #[test]
    fn validation_rejects_bad_objects() {
        assert!(PureState::<f64>::new(CVec::from_vec(vec![cplx(1.0, 0.0), cplx(1.0, 0.0)])).is_err());
        assert!(PureState::<f64>::new(CVec::from_vec(vec![cplx(1.0, 0.0)])).is_err());
        assert!(UnitaryOp::<f64>::new(CMat::from_element(2, 2, cplx(1.0, 0.0))).is_err());
        assert!(DensityMatrix::<f64>::new(CMat::identity(2, 2)).is_err());
        let non_psd = CMat::from_row_slice(2, 2, &[cplx(1.5, 0.0), cplx(0.0, 0.0), cplx(0.0, 0.0), cplx(-0.5, 0.0)]);
        assert!(DensityMatrix::<f64>::new(non_psd).is_err());
    }

    #[test]
    fn bloch_state_round_trip() {
        let s = BlochVector::from_angles(1.1, -2.3);
        let psi = s.to_state();
        let back = BlochVector::from(&psi);
        assert!((back.x - s.x).abs() < 1e-14 && (back.y - s.y).abs() < 1e-14 && (back.z - s.z).abs() < 1e-14);
    }

    #[test]
    fn single_precision_works() {
        let s = BlochVector::<f32>::new(0.3, -0.4, 0.5).unwrap();
        let rho = density_from_bloch(&s).unwrap();
        let back = bloch_from_density(&rho).unwrap();
        assert!((back.x - 0.3).abs() < 1e-6 && (back.y + 0.4).abs() < 1e-6 && (back.z - 0.5).abs() < 1e-6);
    }
}
