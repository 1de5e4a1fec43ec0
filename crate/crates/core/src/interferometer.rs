//! Mach-Zehnder interferometer with an internal degree of freedom.
//!
//! The composite space is `path ⊗ internal` with path basis `|0̃⟩, |1̃⟩`;
//! index `p·N + i` addresses path `p`, internal level `i`. The arm phase
//! `e^{iχ}` sits on `|0̃⟩` and the internal operator `U_i` on `|1̃⟩`. With
//! the beam splitter `(1/√2)[[1, 1], [1, −1]]` and mirror `σ_x`, the
//! `|0̃⟩` port population is `½(1 + |Tr U_iρ₀| cos(χ − arg Tr U_iρ₀))`.

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{kron, real_matrix, trace, unitarity_defect};
use crate::phase::{PhaseValue, ORTHOGONAL_LINK};
use crate::qcore::{overlap, DensityMatrix, PureState, UnitaryOp};
use crate::scalar::{cis, creal, CMat, Scalar};

/// Arm phase, internal operator and internal input state.
///
/// The internal operator is normally unitary; [`MzConfig::with_operator`]
/// also admits contractions such as products of projectors.
#[derive(Debug, Clone)]
pub struct MzConfig<T: Scalar> {
    pub chi: T,
    op: CMat<T>,
    rho0: DensityMatrix<T>,
}

impl<T: Scalar> MzConfig<T> {
    pub fn new(chi: T, unitary: &UnitaryOp<T>, rho0: DensityMatrix<T>) -> Result<Self> {
        Self::with_operator(chi, unitary.entries().clone(), rho0)
    }

    pub fn with_operator(chi: T, op: CMat<T>, rho0: DensityMatrix<T>) -> Result<Self> {
        if !op.is_square() {
            return Err(Error::Dimension { expected: op.nrows(), found: op.ncols() });
        }
        if op.nrows() != rho0.dim() {
            return Err(Error::Dimension { expected: rho0.dim(), found: op.nrows() });
        }
        Ok(Self { chi, op, rho0 })
    }

    pub fn with_chi(&self, chi: T) -> Self {
        Self { chi, ..self.clone() }
    }

    pub fn internal_dim(&self) -> usize {
        self.op.nrows()
    }

    pub fn operator(&self) -> &CMat<T> {
        &self.op
    }

    pub fn rho0(&self) -> &DensityMatrix<T> {
        &self.rho0
    }

    /// `Tr(U_i ρ₀)`.
    pub fn internal_trace(&self) -> num_complex::Complex<T> {
        trace(&(&self.op * self.rho0.entries()))
    }
}

/// Balanced beam splitter `(1/√2)[[1, 1], [1, −1]]`.
pub fn beam_splitter<T: Scalar>() -> CMat<T> {
    real_matrix(2, &[1.0, 1.0, 1.0, -1.0]) * creal(T::one() / T::lit(2.0).sqrt())
}

/// Mirror pair `[[0, 1], [1, 0]]`.
pub fn mirrors<T: Scalar>() -> CMat<T> {
    real_matrix(2, &[0.0, 1.0, 1.0, 0.0])
}

/// `e^{iχ}|0̃⟩⟨0̃| ⊗ 1 + |1̃⟩⟨1̃| ⊗ U_i` as a raw matrix.
pub fn composite_operator<T: Scalar>(cfg: &MzConfig<T>) -> CMat<T> {
    let n = cfg.internal_dim();
    let mut m = CMat::<T>::zeros(2 * n, 2 * n);
    let phase = cis(cfg.chi);
    for i in 0..n {
        m[(i, i)] = phase;
    }
    m.view_mut((n, n), (n, n)).copy_from(&cfg.op);
    m
}

/// [`composite_operator`] for a unitary internal operator.
pub fn composite_unitary<T: Scalar>(cfg: &MzConfig<T>) -> Result<UnitaryOp<T>> {
    UnitaryOp::new(composite_operator(cfg))
}

/// Full interferometer map `U_B U_M U U_B` on the composite space.
pub fn interferometer_operator<T: Scalar>(cfg: &MzConfig<T>) -> CMat<T> {
    let n = cfg.internal_dim();
    let id = CMat::<T>::identity(n, n);
    let b = kron(&beam_splitter::<T>(), &id);
    let m = kron(&mirrors::<T>(), &id);
    &b * m * composite_operator(cfg) * &b
}

/// `W ϱ_in W†` with `ϱ_in = |0̃⟩⟨0̃| ⊗ ρ₀`, as a raw matrix (trace below 1
/// for non-unitary internal operators).
pub fn mz_output_matrix<T: Scalar>(cfg: &MzConfig<T>) -> CMat<T> {
    let n = cfg.internal_dim();
    let mut rho_in = CMat::<T>::zeros(2 * n, 2 * n);
    rho_in.view_mut((0, 0), (n, n)).copy_from(cfg.rho0.entries());
    let w = interferometer_operator(cfg);
    &w * rho_in * w.adjoint()
}

/// Output density matrix for a unitary internal operator.
pub fn mz_output<T: Scalar>(cfg: &MzConfig<T>) -> Result<DensityMatrix<T>> {
    if unitarity_defect(&cfg.op) > T::tol(1e-10) {
        return Err(Error::Validation("output is not a state for a non-unitary internal operator".into()));
    }
    DensityMatrix::new(mz_output_matrix(cfg))
}

/// Population of the `|0̃⟩` output port: the trace of the `|0̃⟩` block of
/// the output. The equal-arm, identity configuration gives 1.
pub fn intensity<T: Scalar>(cfg: &MzConfig<T>) -> T {
    let n = cfg.internal_dim();
    let out = mz_output_matrix(cfg);
    (0..n).fold(T::zero(), |acc, i| acc + out[(i, i)].re)
}

/// Intensities over a `χ` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeScan<T: Scalar> {
    chi: Vec<T>,
    intensity: Vec<T>,
}

impl<T: Scalar> FringeScan<T> {
    pub fn new(chi: Vec<T>, intensity: Vec<T>) -> Result<Self> {
        if chi.len() != intensity.len() {
            return Err(Error::Input("one intensity per χ sample is required".into()));
        }
        if chi.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Input("χ samples must be strictly increasing".into()));
        }
        if intensity.iter().any(|&i| i < -T::tol(1e-12)) {
            return Err(Error::Input("intensities must be non-negative".into()));
        }
        Ok(Self { chi, intensity })
    }

    pub fn chi(&self) -> &[T] {
        &self.chi
    }

    pub fn intensity(&self) -> &[T] {
        &self.intensity
    }

    pub fn len(&self) -> usize {
        self.chi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chi.is_empty()
    }

    /// The same scan rescaled to unit mean intensity.
    pub fn normalized(&self) -> Result<Self> {
        let mean = self.intensity.iter().fold(T::zero(), |a, &b| a + b) / T::lit(self.len().max(1) as f64);
        if mean <= T::zero() {
            return Err(Error::UndefinedPhase { visibility: 0.0 });
        }
        Self::new(self.chi.clone(), self.intensity.iter().map(|&i| i / mean).collect())
    }
}

/// `n` evenly spaced values of `χ` over `[0, 2π)`.
pub fn chi_grid<T: Scalar>(n: usize) -> Vec<T> {
    (0..n).map(|k| T::two_pi() * T::lit(k as f64) / T::lit(n as f64)).collect()
}

/// Scans `cfg` over the given arm phases.
pub fn fringe_scan<T: Scalar>(cfg: &MzConfig<T>, chis: &[T]) -> Result<FringeScan<T>> {
    let values = chis.iter().map(|&c| intensity(&cfg.with_chi(c))).collect();
    FringeScan::new(chis.to_vec(), values)
}

/// Fits `a + b cos(χ − φ)` by linear least squares on `(1, cos χ, sin χ)`
/// and returns `(φ, b/a)`.
pub fn extract_phase_visibility<T: Scalar>(scan: &FringeScan<T>) -> Result<(PhaseValue<T>, T)> {
    let n = scan.len();
    if n < 8 {
        return Err(Error::Input("fringe fit needs at least 8 samples".into()));
    }
    let span = scan.chi[n - 1] - scan.chi[0];
    let spacing = span / T::lit((n - 1) as f64);
    if span + spacing < T::two_pi() * (T::one() - T::lit(1e-9)) {
        return Err(Error::Input("fringe scan must cover a full 2π period".into()));
    }
    let design = DMatrix::<T>::from_fn(n, 3, |r, c| match c {
        0 => T::one(),
        1 => scan.chi[r].cos(),
        _ => scan.chi[r].sin(),
    });
    let rhs = DVector::<T>::from_column_slice(&scan.intensity);
    let coef = design
        .svd(true, true)
        .solve(&rhs, T::tol(1e-14))
        .map_err(|e| Error::Validation(e.to_string()))?;
    let (a, c, s) = (coef[0], coef[1], coef[2]);
    let b = (c * c + s * s).sqrt();
    if a <= T::zero() || b / a < T::lit(1e-9) {
        let v = if a > T::zero() { (b / a).as_f64() } else { 0.0 };
        return Err(Error::UndefinedPhase { visibility: v });
    }
    Ok((PhaseValue::new(s.atan2(c)), b / a))
}

/// Phase of a state sequence measured interferometrically.
///
/// The projector product `|ψ_n⟩⟨ψ_{n−1}|…|ψ₂⟩⟨ψ₁|` is placed in the
/// internal arm with `ρ₀ = |ψ₁⟩⟨ψ₁|`. The fringe shift is then
/// `arg⟨ψ₁|ψ_n⟩…⟨ψ₂|ψ₁⟩`, the reverse-ordered product, so the reported
/// value is its negative and coincides with
/// [`crate::phase::pancharatnam_phase`].
pub fn projective_sequence_phase<T: Scalar>(states: &[PureState<T>]) -> Result<PhaseValue<T>> {
    let n = states.len();
    if n == 0 {
        return Err(Error::Input("empty state sequence".into()));
    }
    for k in 0..n {
        let next = (k + 1) % n;
        let m = overlap(&states[k], &states[next])?.modulus();
        if m < T::lit(ORTHOGONAL_LINK) {
            return Err(Error::OrthogonalLink { index: k, next, modulus: m.as_f64() });
        }
    }
    let mut op = states[0].projector();
    for s in &states[1..] {
        op = s.projector() * op;
    }
    let cfg = MzConfig::with_operator(T::zero(), op, DensityMatrix::from_pure(&states[0]))?;
    let scan = fringe_scan(&cfg, &chi_grid(16))?;
    let (phase, _) = extract_phase_visibility(&scan)?;
    Ok(PhaseValue::new(-phase.radians()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase::pancharatnam_phase;
    use crate::scalar::cplx;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn plus() -> PureState<f64> {
        PureState::from_pairs(&[(1.0, 0.0), (1.0, 0.0)]).unwrap()
    }

    fn cfg(chi: f64, u: &UnitaryOp<f64>, rho: DensityMatrix<f64>) -> MzConfig<f64> {
        MzConfig::new(chi, u, rho).unwrap()
    }

    #[test]
    fn composite_examples() {
        let c = cfg(0.0, &UnitaryOp::identity(2), DensityMatrix::maximally_mixed(2));
        assert!((composite_operator(&c) - CMat::<f64>::identity(4, 4)).norm() < 1e-15);

        let phi = 0.8;
        let c = MzConfig::with_operator(phi, CMat::identity(1, 1), DensityMatrix::new(CMat::identity(1, 1)).unwrap()).unwrap();
        let u = composite_unitary(&c).unwrap();
        assert!((u.entries()[(0, 0)] - cis(phi)).norm() < 1e-15);
        assert!((u.entries()[(1, 1)] - cplx(1.0, 0.0)).norm() < 1e-15);

        let c = cfg(PI, &UnitaryOp::pauli_x(), DensityMatrix::maximally_mixed(2));
        #[rustfmt::skip]
        let expected = real_matrix::<f64>(4, &[
            -1.0, 0.0, 0.0, 0.0,
            0.0, -1.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, 1.0, 0.0,
        ]);
        assert!((composite_operator(&c) - expected).norm() < 1e-15);
    }

    #[test]
    fn output_matches_four_term_expansion() {
        let u = UnitaryOp::new(crate::linalg::expm_hermitian(&(crate::qcore::pauli_y::<f64>() * creal(0.3) + crate::qcore::pauli_z::<f64>()), 0.7)).unwrap();
        let rho = DensityMatrix::mixture(&[0.3, 0.7], &[plus(), PureState::basis(2, 1)]).unwrap();
        let c = cfg(1.1, &u, rho.clone());
        let half = creal(0.5);
        let e = cis(1.1);
        let r = rho.entries();
        let ui = u.entries();
        let blocks = [
            r * e * e.conj(),
            r * ui.adjoint() * e,
            ui * r * e.conj(),
            ui * r * ui.adjoint(),
        ];
        // Port operators: |0̃⟩ gets (e^{iχ} + U_i)/2, |1̃⟩ gets (U_i − e^{iχ})/2.
        let out = mz_output_matrix(&c);
        for p in 0..2 {
            for q in 0..2 {
                let mut block = CMat::<f64>::zeros(2, 2);
                for (t, m) in blocks.iter().enumerate() {
                    let left = if t < 2 { if p == 0 { 1.0 } else { -1.0 } } else { 1.0 };
                    let right = if t % 2 == 0 { if q == 0 { 1.0 } else { -1.0 } } else { 1.0 };
                    block += m * creal(left * right) * half * half;
                }
                let got = out.view((2 * p, 2 * q), (2, 2)).into_owned();
                assert!((got - block).norm() < 1e-12, "block ({p},{q})");
            }
        }
        assert!((trace(&out).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn port_populations() {
        let id = UnitaryOp::identity(2);
        assert!((intensity(&cfg(0.0, &id, DensityMatrix::from_pure(&plus()))) - 1.0).abs() < 1e-14);
        assert!(intensity(&cfg(PI, &id, DensityMatrix::maximally_mixed(2))).abs() < 1e-14);
        for chi in [0.3, 1.7, 4.0] {
            let i = intensity(&cfg(chi, &id, DensityMatrix::maximally_mixed(2)));
            assert!((i - (1.0 + chi.cos()) / 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn shift_and_visibility() {
        let phi = 1.2;
        let u = UnitaryOp::diagonal_phases(&[0.0, phi]);
        for rho in [DensityMatrix::from_pure(&plus()), DensityMatrix::maximally_mixed(2)] {
            let scan = fringe_scan(&cfg(0.0, &u, rho), &chi_grid(32)).unwrap();
            let (p, v) = extract_phase_visibility(&scan).unwrap();
            assert!(p.distance(phi / 2.0) < 1e-9);
            assert!((v - (phi / 2.0).cos().abs()).abs() < 1e-9);
        }
    }

    #[test]
    fn undefined_phase_cases() {
        let flat = FringeScan::new(chi_grid(16), vec![0.5; 16]).unwrap();
        assert!(matches!(extract_phase_visibility(&flat), Err(Error::UndefinedPhase { .. })));
        let scan = fringe_scan(&cfg(0.0, &UnitaryOp::pauli_z(), DensityMatrix::maximally_mixed(2)), &chi_grid(16)).unwrap();
        assert!(matches!(extract_phase_visibility(&scan), Err(Error::UndefinedPhase { .. })));
    }

    #[test]
    fn pure_state_reduction() {
        let psi = PureState::<f64>::from_pairs(&[(0.3, 0.1), (-0.2, 0.9)]).unwrap();
        let u = UnitaryOp::new(crate::linalg::expm_hermitian(&crate::qcore::pauli_x::<f64>(), 0.4)).unwrap();
        let scan = fringe_scan(&cfg(0.0, &u, DensityMatrix::from_pure(&psi)), &chi_grid(24)).unwrap();
        let (p, _) = extract_phase_visibility(&scan).unwrap();
        let expected = overlap(&psi, &apply_state(&u, &psi)).unwrap().argument();
        assert!(p.distance(expected) < 1e-9);
    }

    fn apply_state(u: &UnitaryOp<f64>, psi: &PureState<f64>) -> PureState<f64> {
        crate::qcore::apply(u, psi).unwrap()
    }

    #[test]
    fn short_scan_rejected() {
        let scan = FringeScan::new(vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7], vec![1.0; 8]).unwrap();
        assert!(matches!(extract_phase_visibility(&scan), Err(Error::Input(_))));
    }

    #[test]
    fn projective_sequences() {
        let psi = plus();
        assert!(projective_sequence_phase(&[psi.clone(), psi.clone()]).unwrap().radians().abs() < 1e-12);
        let octant = [
            PureState::basis(2, 0),
            plus(),
            PureState::from_pairs(&[(1.0, 0.0), (0.0, 1.0)]).unwrap(),
        ];
        assert!(projective_sequence_phase(&octant).unwrap().distance(FRAC_PI_4) < 1e-9);
        assert!(pancharatnam_phase(&octant).unwrap().distance(FRAC_PI_4) < 1e-12);
        let orth = [PureState::<f64>::basis(2, 0), PureState::basis(2, 1)];
        assert!(matches!(projective_sequence_phase(&orth), Err(Error::OrthogonalLink { .. })));
    }
}
