//! Standard gates, Deutsch's algorithm and their geometric realizations.
//!
//! A spin-½ whose field direction traces a loop of solid angle `Ω` starting
//! at the north pole returns with `e^{−iΩ/2}` on `|0⟩` (aligned) and
//! `e^{+iΩ/2}` on `|1⟩` once dynamical phases are removed, which is
//! `phase_gate(Ω)` up to a global phase.

use num_complex::Complex;

use crate::adiabatic::{evolve_schrodinger, spin_field_hamiltonian, HamiltonianPath};
use crate::compiler::{bloch_sector_loop, compile_bloch_loop, compile_rotation, CompileResult, CompileSettings, PulseFamily};
use crate::error::{Error, Result};
use crate::holonomy::usb_full_evolution_check;
use crate::linalg::trace;
use crate::qcore::{apply, BlochVector, PureState, UnitaryOp};
use crate::scalar::{cis, creal, wrap_phase, CMat, Scalar};

use nalgebra::ComplexField;

/// A unitary acting on `arity` qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct GateOp<T: Scalar> {
    pub unitary: UnitaryOp<T>,
    pub arity: usize,
    pub label: String,
}

impl<T: Scalar> GateOp<T> {
    pub fn new(unitary: UnitaryOp<T>, arity: usize, label: impl Into<String>) -> Result<Self> {
        if unitary.dim() != 1 << arity {
            return Err(Error::Dimension { expected: 1 << arity, found: unitary.dim() });
        }
        Ok(Self { unitary, arity, label: label.into() })
    }

    pub fn entries(&self) -> &CMat<T> {
        self.unitary.entries()
    }
}

pub fn hadamard<T: Scalar>() -> GateOp<T> {
    GateOp { unitary: UnitaryOp::hadamard(), arity: 1, label: "H".into() }
}

/// `diag(1, e^{iφ})`.
pub fn phase_gate<T: Scalar>(phi: T) -> GateOp<T> {
    GateOp { unitary: UnitaryOp::diagonal_phases(&[T::zero(), phi]), arity: 1, label: format!("P({})", phi.as_f64()) }
}

/// `diag(1, 1, 1, e^{iφ})`.
pub fn controlled_phase<T: Scalar>(phi: T) -> GateOp<T> {
    let z = T::zero();
    GateOp { unitary: UnitaryOp::diagonal_phases(&[z, z, z, phi]), arity: 2, label: format!("CP({})", phi.as_f64()) }
}

/// `P(π/2 + φ) · H · P(2θ) · H |0⟩ = e^{iθ}(cos θ|0⟩ + e^{iφ} sin θ|1⟩)`.
pub fn universal_single_qubit<T: Scalar>(theta: T, phi: T) -> PureState<T> {
    let h = hadamard::<T>().unitary;
    let steps = [h.clone(), phase_gate(T::lit(2.0) * theta).unitary, h, phase_gate(T::frac_pi_2() + phi).unitary];
    steps
        .iter()
        .try_fold(PureState::basis(2, 0), |psi, u| apply(u, &psi))
        .expect("single-qubit gates on a qubit")
}

/// `|tr(A†B)|² / (‖A‖² ‖B‖²)`: overlap of Choi vectors, insensitive to a
/// global phase and defined for non-unitary measured operators.
pub fn choi_fidelity<T: Scalar>(a: &CMat<T>, b: &CMat<T>) -> T {
    let t = trace(&(a.adjoint() * b)).modulus_squared();
    let n = a.norm_squared() * b.norm_squared();
    if n == T::zero() {
        T::zero()
    } else {
        t / n
    }
}

/// `e^{−inΦ}` computed as `(e^{−iΦ})^n`.
pub fn ab_phase<T: Scalar>(flux: T, winding: i32) -> Complex<T> {
    cis(-flux).powi(winding)
}

/// A Boolean function of one bit, `(f(0), f(1))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OracleSpec {
    pub f0: u8,
    pub f1: u8,
}

impl OracleSpec {
    pub fn new(f0: u8, f1: u8) -> Result<Self> {
        if f0 > 1 || f1 > 1 {
            return Err(Error::Input("oracle values must be bits".into()));
        }
        Ok(Self { f0, f1 })
    }

    pub fn all() -> [Self; 4] {
        [Self { f0: 0, f1: 0 }, Self { f0: 0, f1: 1 }, Self { f0: 1, f1: 0 }, Self { f0: 1, f1: 1 }]
    }

    pub fn is_constant(&self) -> bool {
        self.f0 == self.f1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    Constant,
    Varying,
}

impl Classification {
    fn expected(oracle: &OracleSpec) -> Self {
        if oracle.is_constant() {
            Self::Constant
        } else {
            Self::Varying
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Constant => "constant",
            Self::Varying => "varying",
        })
    }
}

/// Outcome of one Deutsch run.
#[derive(Debug, Clone)]
pub struct DeutschOutcome<T: Scalar> {
    pub classification: Classification,
    pub final_state: PureState<T>,
    /// Probability of the outcome that identifies the oracle correctly.
    pub success_probability: T,
}

fn classify<T: Scalar>(oracle: &OracleSpec, amp: &nalgebra::DVector<Complex<T>>) -> (Classification, T) {
    let p0 = amp[0].modulus_squared();
    let p1 = amp[1].modulus_squared();
    let class = if p0 >= p1 { Classification::Constant } else { Classification::Varying };
    let success = match Classification::expected(oracle) {
        Classification::Constant => p0,
        Classification::Varying => p1,
    };
    (class, success)
}

/// `H · diag(e^{iπf(0)}, e^{iπf(1)}) · (|0⟩ + |1⟩)/√2`, then a
/// computational-basis measurement: outcome 0 means constant.
pub fn deutsch<T: Scalar>(oracle: &OracleSpec) -> DeutschOutcome<T> {
    let plus = apply(&UnitaryOp::hadamard(), &PureState::basis(2, 0)).expect("qubit");
    let phases = [T::pi() * T::lit(oracle.f0 as f64), T::pi() * T::lit(oracle.f1 as f64)];
    let psi = apply(&UnitaryOp::diagonal_phases(&phases), &plus).expect("qubit");
    let out = apply(&UnitaryOp::hadamard(), &psi).expect("qubit");
    let (classification, success_probability) = classify(oracle, out.amplitudes());
    DeutschOutcome { classification, final_state: out, success_probability }
}

/// Field strength and timing for adiabatic spin transport.
#[derive(Debug, Clone, Copy)]
pub struct SpinTransportSettings {
    pub field: f64,
    /// Time spent on each geodesic arc.
    pub arc_duration: f64,
    pub steps_per_arc: usize,
}

impl Default for SpinTransportSettings {
    fn default() -> Self {
        Self { field: 1.0, arc_duration: 200.0, steps_per_arc: 5000 }
    }
}

fn slerp<T: Scalar>(a: &BlochVector<T>, b: &BlochVector<T>, s: T) -> BlochVector<T> {
    let cos = a.dot(b).min(T::one()).max(-T::one());
    let ang = cos.acos();
    if ang < T::tol(1e-15) {
        return *a;
    }
    let sa = ((T::one() - s) * ang).sin() / ang.sin();
    let sb = (s * ang).sin() / ang.sin();
    BlochVector { x: sa * a.x + sb * b.x, y: sa * a.y + sb * b.y, z: sa * a.z + sb * b.z }.normalized()
}

/// Moves the field direction around a closed geodesic polygon starting
/// at the north pole, one arc per `arc_duration` with a ramp whose angular
/// speed vanishes at every vertex, and returns the operator on
/// `(|0⟩, |1⟩)` with the dynamical phases `∓B T` removed. The residual
/// relative phase error falls off as `1/(B T)`.
pub fn spin_loop_transport<T: Scalar>(vertices: &[BlochVector<T>], settings: &SpinTransportSettings) -> Result<CMat<T>> {
    let north = BlochVector { x: T::zero(), y: T::zero(), z: T::one() };
    if vertices.is_empty() || vertices[0].dot(&north) < T::one() - T::tol(1e-12) {
        return Err(Error::Input("transport loops start at the north pole".into()));
    }
    if !(settings.field > 0.0 && settings.arc_duration > 0.0) || settings.steps_per_arc < 2 {
        return Err(Error::Input("field, duration and steps must be positive".into()));
    }
    let mut arcs: Vec<(BlochVector<T>, BlochVector<T>)> = Vec::new();
    for i in 0..vertices.len() {
        let (a, b) = (vertices[i], vertices[(i + 1) % vertices.len()]);
        if a.dot(&b) < T::one() - T::tol(1e-14) {
            if a.dot(&b) < -T::one() + T::tol(1e-12) {
                return Err(Error::DegenerateArc { index: i, next: (i + 1) % vertices.len() });
            }
            arcs.push((a, b));
        }
    }
    let field = T::lit(settings.field);
    if arcs.is_empty() {
        return Ok(CMat::identity(2, 2));
    }
    let arc_t = T::lit(settings.arc_duration);
    let total = arc_t * T::lit(arcs.len() as f64);
    let n_arcs = arcs.len();
    let h = HamiltonianPath::new(
        move |t: T| {
            let k = (t / arc_t).floor().to_usize().unwrap_or(0).min(n_arcs - 1);
            let tau = (t - arc_t * T::lit(k as f64)) / arc_t;
            let s = tau - (T::two_pi() * tau).sin() / T::two_pi();
            let n = slerp(&arcs[k].0, &arcs[k].1, s);
            spin_field_hamiltonian(field, n.polar(), n.azimuth())
        },
        total,
        true,
    )?;
    let steps = settings.steps_per_arc * n_arcs;
    let mut m = CMat::<T>::zeros(2, 2);
    for (col, sign) in [(0, T::one()), (1, -T::one())] {
        let traj = evolve_schrodinger(&h, &PureState::basis(2, col), steps)?;
        let undo = cis(sign * field * total);
        for row in 0..2 {
            m[(row, col)] = traj.last().amplitudes()[row] * undo;
        }
    }
    Ok(m)
}

/// A verified geometric phase gate.
#[derive(Debug, Clone)]
pub struct GeometricGate<T: Scalar> {
    pub gate: GateOp<T>,
    pub vertices: Vec<BlochVector<T>>,
    /// Simulated transport operator.
    pub measured: CMat<T>,
    /// `arg M₁₁ − arg M₀₀`.
    pub relative_phase: T,
    pub fidelity: T,
}

/// Realizes `phase_gate(φ)` by transporting a spin around the compiled
/// loop of solid angle `φ`. Fails when the Choi fidelity with the target
/// falls below `1 − tol`.
pub fn geometric_phase_gate<T: Scalar>(phi: T, settings: &SpinTransportSettings, tol: T) -> Result<GeometricGate<T>> {
    let vertices = compile_bloch_loop(phi)?;
    let measured = spin_loop_transport(&vertices, settings)?;
    let gate = phase_gate(phi);
    let fidelity = choi_fidelity(&measured, gate.entries());
    let relative_phase = wrap_phase(measured[(1, 1)].argument() - measured[(0, 0)].argument());
    if T::one() - fidelity > tol {
        return Err(Error::Synthesis {
            measured: relative_phase.as_f64(),
            target: phi.as_f64(),
            deviation: (T::one() - fidelity).as_f64(),
        });
    }
    Ok(GeometricGate { gate: GateOp { label: format!("Pgeo({})", phi.as_f64()), ..gate }, vertices, measured, relative_phase, fidelity })
}

/// How the oracle's phase is attached in [`deutsch_geometric`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseConvention {
    /// Branch `x` runs its own loop of solid angle `2π f(x)`, picking up
    /// `e^{−iπ f(x)} = (−1)^{f(x)}`.
    #[default]
    Branch,
    /// A single loop of solid angle `π (f(1) − f(0))` on the qubit gives
    /// the relative phase directly.
    Relative,
}

/// Hadamard built from the dark-subspace holonomy: the projected
/// four-level evolution around a loop with `γ_f = π/4`, followed by the
/// relabeling `diag(1, −1)` of the dark states.
#[derive(Debug, Clone)]
pub struct GeometricHadamard<T: Scalar> {
    pub compiled: CompileResult<T>,
    /// Projected evolution matrix of the loop alone.
    pub rotation: CMat<T>,
    pub matrix: CMat<T>,
    pub leakage: T,
}

impl<T: Scalar> GeometricHadamard<T> {
    /// `duration` is the time given to one traversal of the loop.
    pub fn build(duration: T, steps: usize, compile: &CompileSettings) -> Result<Self> {
        let family = PulseFamily::circular(T::one());
        let compiled = compile_rotation(T::frac_pi_4(), &family, compile)?;
        Self::from_compiled(compiled, duration, steps)
    }

    /// Reuses a compiled loop of [`PulseFamily::circular`] with `Q = 1`.
    pub fn from_compiled(compiled: CompileResult<T>, duration: T, steps: usize) -> Result<Self> {
        let schedule = PulseFamily::circular(T::one()).schedule(&compiled.params)?;
        let report = usb_full_evolution_check(&schedule, duration, steps)?;
        let reflect = CMat::<T>::from_diagonal(&nalgebra::DVector::from_vec(vec![creal(T::one()), creal(-T::one())]));
        let matrix = &report.projected * reflect;
        Ok(Self { compiled, rotation: report.projected, matrix, leakage: report.leakage })
    }
}

/// Knobs for [`deutsch_geometric`].
#[derive(Debug, Clone, Copy)]
pub struct DeutschSettings {
    pub transport: SpinTransportSettings,
    pub convention: PhaseConvention,
}

impl Default for DeutschSettings {
    fn default() -> Self {
        Self { transport: SpinTransportSettings::default(), convention: PhaseConvention::Branch }
    }
}

/// Deutsch run assembled from geometric pieces, with a record of where
/// each phase came from.
#[derive(Debug, Clone)]
pub struct GeometricDeutsch<T: Scalar> {
    pub classification: Classification,
    pub success_probability: T,
    /// Simulated oracle amplitudes on `|0⟩` and `|1⟩`.
    pub oracle_phases: [Complex<T>; 2],
    /// Solid angles used for the oracle loops.
    pub solid_angles: Vec<T>,
    pub convention: PhaseConvention,
    pub hadamard_leakage: T,
}

/// Deutsch's algorithm with the oracle phase from spin loops and the
/// Hadamards from the dark-subspace holonomy.
pub fn deutsch_geometric<T: Scalar>(
    oracle: &OracleSpec,
    hadamard: &GeometricHadamard<T>,
    settings: &DeutschSettings,
) -> Result<GeometricDeutsch<T>> {
    let (diag, solid_angles) = match settings.convention {
        PhaseConvention::Branch => {
            let mut amps = [creal(T::one()); 2];
            let mut angles = Vec::new();
            for (x, f) in [oracle.f0, oracle.f1].into_iter().enumerate() {
                let omega = T::two_pi() * T::lit(f as f64);
                angles.push(omega);
                let m = spin_loop_transport(&bloch_sector_loop(omega), &settings.transport)?;
                amps[x] = m[(0, 0)];
            }
            (amps, angles)
        }
        PhaseConvention::Relative => {
            let omega = T::pi() * (T::lit(oracle.f1 as f64) - T::lit(oracle.f0 as f64));
            let m = spin_loop_transport(&bloch_sector_loop(omega), &settings.transport)?;
            ([m[(0, 0)], m[(1, 1)]], vec![omega])
        }
    };
    let d = CMat::<T>::from_diagonal(&nalgebra::DVector::from_vec(diag.to_vec()));
    let start = nalgebra::DVector::from_vec(vec![creal(T::one()), creal(T::zero())]);
    let out = &hadamard.matrix * d * &hadamard.matrix * start;
    let (classification, success_probability) = classify(oracle, &out);
    Ok(GeometricDeutsch {
        classification,
        success_probability,
        oracle_phases: diag,
        solid_angles,
        convention: settings.convention,
        hadamard_leakage: hadamard.leakage,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cplx;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    #[test]
    fn fixed_gates() {
        let h = hadamard::<f64>();
        assert!((h.entries() * h.entries() - CMat::identity(2, 2)).norm() < 1e-15);
        assert_eq!(phase_gate(0.0f64).entries(), &CMat::identity(2, 2));
        let cp = controlled_phase(PI);
        for k in 0..4 {
            let expected = if k == 3 { -1.0 } else { 1.0 };
            assert!((cp.entries()[(k, k)] - cplx(expected, 0.0)).norm() < 1e-15);
        }
        assert!(GateOp::new(UnitaryOp::<f64>::identity(2), 2, "bad").is_err());
    }

    #[test]
    fn universal_examples() {
        let fid = |psi: &PureState<f64>, pairs: &[(f64, f64)]| psi.fidelity(&PureState::from_pairs(pairs).unwrap()).unwrap();
        assert!(fid(&universal_single_qubit(0.0, 0.3), &[(1.0, 0.0), (0.0, 0.0)]) > 1.0 - 1e-12);
        assert!(fid(&universal_single_qubit(FRAC_PI_2, 0.0), &[(0.0, 0.0), (1.0, 0.0)]) > 1.0 - 1e-12);
        assert!(fid(&universal_single_qubit(FRAC_PI_4, FRAC_PI_2), &[(1.0, 0.0), (0.0, 1.0)]) > 1.0 - 1e-12);
    }

    #[test]
    fn universal_grid_amplitudes() {
        for i in 0..4 {
            for j in 0..5 {
                let (theta, phi) = (0.37 * i as f64, 1.1 * j as f64);
                let psi = universal_single_qubit(theta, phi);
                let g = cis(theta);
                let a = psi.amplitudes();
                assert!((a.norm() - 1.0).abs() < 1e-12);
                assert!((a[0] - g * theta.cos()).norm() < 1e-12);
                assert!((a[1] - g * cis(phi) * theta.sin()).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn deutsch_is_exact() {
        for oracle in OracleSpec::all() {
            let out = deutsch::<f64>(&oracle);
            assert_eq!(out.classification, Classification::expected(&oracle));
            assert!((out.success_probability - 1.0).abs() < 1e-15);
        }
        let varying = deutsch::<f64>(&OracleSpec::new(0, 1).unwrap());
        assert!((varying.final_state.amplitudes()[1].modulus() - 1.0).abs() < 1e-15);
        assert!(OracleSpec::new(2, 0).is_err());
    }

    #[test]
    fn ab_examples() {
        assert_eq!(ab_phase(1.3f64, 0), cplx(1.0, 0.0));
        assert!((ab_phase(2.0 * PI, 1) - cplx(1.0, 0.0)).norm() < 1e-15);
        assert!((ab_phase(PI, 2) - cplx(1.0, 0.0)).norm() < 1e-15);
        assert!((ab_phase(PI, 1) - cplx(-1.0, 0.0)).norm() < 1e-15);
        for n in -3..4 {
            assert_eq!(ab_phase(0.7f64, n), ab_phase(0.7f64, 1).powi(n));
        }
    }

    #[test]
    fn geometric_gates() {
        let s = SpinTransportSettings::default();
        let id = geometric_phase_gate(0.0, &s, 0.05).unwrap();
        assert!(1.0 - id.fidelity < 1e-3);
        let slow = SpinTransportSettings { arc_duration: 800.0, steps_per_arc: 20_000, ..s };
        let dev = |m: CMat<f64>| (m - CMat::identity(2, 2)).norm();
        let fast_dev = dev(id.measured.clone());
        let slow_dev = dev(geometric_phase_gate(0.0, &slow, 0.05).unwrap().measured);
        assert!(slow_dev < 0.3 * fast_dev, "{fast_dev} {slow_dev}");
        let quarter = geometric_phase_gate(FRAC_PI_2, &s, 0.05).unwrap();
        assert!((quarter.relative_phase - FRAC_PI_2).abs() < 0.02);
        let z = geometric_phase_gate(PI, &s, 0.05).unwrap();
        assert!(choi_fidelity(&z.measured, UnitaryOp::<f64>::pauli_z().entries()) > 0.95);
    }

    #[test]
    fn geometric_gate_inverse() {
        let s = SpinTransportSettings::default();
        let a = geometric_phase_gate(1.1, &s, 0.05).unwrap();
        let b = geometric_phase_gate(-1.1, &s, 0.05).unwrap();
        assert!(1.0 - choi_fidelity(&(a.measured * b.measured), &CMat::identity(2, 2)) < 0.1);
    }

    #[test]
    fn non_north_start_rejected() {
        let v = [BlochVector::from_angles(1.0, 0.0), BlochVector::from_angles(0.0, 0.0), BlochVector::from_angles(1.0, 1.0)];
        assert!(matches!(spin_loop_transport(&v, &SpinTransportSettings::default()), Err(Error::Input(_))));
    }

    #[test]
    fn geometric_deutsch_all_oracles() {
        let had = GeometricHadamard::<f64>::build(100.0, 20_000, &CompileSettings { verify_steps: 20_000, ..Default::default() }).unwrap();
        for convention in [PhaseConvention::Branch, PhaseConvention::Relative] {
            let settings = DeutschSettings { convention, ..Default::default() };
            for oracle in OracleSpec::all() {
                let r = deutsch_geometric(&oracle, &had, &settings).unwrap();
                assert_eq!(r.classification, deutsch::<f64>(&oracle).classification);
                assert!(r.success_probability > 0.99, "{oracle:?} {convention:?}: {}", r.success_probability);
            }
        }
    }
}
