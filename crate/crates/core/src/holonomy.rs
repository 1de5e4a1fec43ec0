//! Non-abelian holonomy over degenerate eigenspaces.
//!
//! A frame `Φ(s)` is an `n × k` matrix with orthonormal columns. The
//! connection is stored anti-Hermitian, `A_ab = ⟨Φ_a|∂_sΦ_b⟩`, and a state
//! `Σ c_b Φ_b` transported parallel to the frame obeys `ċ = −A c`. Transport
//! composes like an evolution operator: later steps multiply on the left.
//! For `k = 1` the holonomy is `e^{iγ}` with `γ` the Berry phase of
//! [`crate::adiabatic::berry_phase`].
//!
//! The four-level model couples level 2 to levels 1, 3 and 4 with real
//! strengths `P`, `S` and `Q` (the latter optionally with a phase). Its dark
//! subspace is spanned by
//! `Φ₁ = (cos θ, 0, −sin θ, 0)` and `Φ₂ = (sin φ sin θ, 0, sin φ cos θ, −cos φ)`
//! with `tan θ = P/S`, `tan φ = Q/√(P² + S²)`, and a closed loop rotates
//! this frame by `γ = ∮ sin φ dθ`.

use std::sync::Arc;

use nalgebra::ComplexField;

use crate::adiabatic::{evolve_schrodinger, HamiltonianPath};
use crate::error::{Error, Result};
use crate::linalg::{
    anti_hermiticity_defect, eigh, expm_anti_hermitian, log_unitary, min_hermitian_part_eigenvalue, polar_unitary,
    unitarity_defect,
};
use crate::qcore::PureState;
use crate::scalar::{cis, creal, CMat, Scalar};

/// Default floor on the bright-state gap and on `P² + S²`.
pub const GAP_FLOOR: f64 = 1e-6;

/// Orthonormal frames of a `k`-dimensional subspace along a path.
#[derive(Debug, Clone)]
pub struct DegenerateFrame<T: Scalar> {
    params: Vec<T>,
    frames: Vec<CMat<T>>,
    closed: bool,
}

impl<T: Scalar> DegenerateFrame<T> {
    /// Checks orthonormality and that each consecutive overlap matrix has a
    /// positive definite Hermitian part.
    pub fn new(params: Vec<T>, frames: Vec<CMat<T>>, closed: bool) -> Result<Self> {
        if params.len() != frames.len() || params.len() < 2 {
            return Err(Error::Input("a frame needs at least 2 samples, one per parameter".into()));
        }
        let (n, k) = frames[0].shape();
        for (i, f) in frames.iter().enumerate() {
            if f.shape() != (n, k) {
                return Err(Error::Dimension { expected: k, found: f.ncols() });
            }
            if (f.adjoint() * f - CMat::<T>::identity(k, k)).norm() > T::tol(1e-10) {
                return Err(Error::Validation(format!("frame {i} is not orthonormal")));
            }
        }
        for i in 1..frames.len() {
            if params[i] <= params[i - 1] {
                return Err(Error::Input("frame parameters must be strictly increasing".into()));
            }
            let o = frames[i - 1].adjoint() * &frames[i];
            if min_hermitian_part_eigenvalue(&o) <= T::zero() {
                return Err(Error::Gauge { index: i });
            }
        }
        Ok(Self { params, frames, closed })
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn rank(&self) -> usize {
        self.frames[0].ncols()
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    pub fn frames(&self) -> &[CMat<T>] {
        &self.frames
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    /// Right-multiplies every frame by `g(k)` (a `k × k` unitary); the
    /// continuity condition is not rechecked.
    pub fn regauged(&self, g: impl Fn(usize) -> CMat<T>) -> Self {
        let frames = self.frames.iter().enumerate().map(|(i, f)| f * g(i)).collect();
        Self { params: self.params.clone(), frames, closed: self.closed }
    }
}

/// Per-interval anti-Hermitian connection and the link closing a loop.
#[derive(Debug, Clone)]
pub struct WzConnection<T: Scalar> {
    params: Vec<T>,
    generators: Vec<CMat<T>>,
    closure: CMat<T>,
    defect: T,
}

impl<T: Scalar> WzConnection<T> {
    /// Connection from explicit generators, `generators[i]` acting on
    /// `[params[i], params[i + 1]]`, on an open path.
    pub fn from_generators(params: Vec<T>, generators: Vec<CMat<T>>) -> Result<Self> {
        if params.len() < 2 || generators.len() + 1 != params.len() {
            return Err(Error::Input("need one generator per interval".into()));
        }
        let k = generators[0].nrows();
        for (i, a) in generators.iter().enumerate() {
            if a.shape() != (k, k) {
                return Err(Error::Dimension { expected: k, found: a.nrows() });
            }
            if anti_hermiticity_defect(a) > T::tol(1e-10) * (T::one() + a.norm()) {
                return Err(Error::Validation(format!("generator {i} is not anti-Hermitian")));
            }
        }
        Ok(Self { params, generators, closure: CMat::identity(k, k), defect: T::zero() })
    }

    pub fn generators(&self) -> &[CMat<T>] {
        &self.generators
    }

    pub fn params(&self) -> &[T] {
        &self.params
    }

    /// Unitary taking end-frame coordinates to start-frame coordinates
    /// (identity on open paths).
    pub fn closure(&self) -> &CMat<T> {
        &self.closure
    }

    /// Largest anti-Hermiticity defect of the plain forward difference
    /// `⟨Φ_a(s_k)|Φ_b(s_{k+1}) − Φ_b(s_k)⟩/Δs`, a measure of step size.
    pub fn forward_difference_defect(&self) -> T {
        self.defect
    }
}

/// Discrete Wilczek-Zee connection of a frame.
///
/// Each generator is `log(U_k)/Δs` with `U_k` the unitary part of the
/// overlap `Φ(s_k)†Φ(s_{k+1})`; to first order this is the anti-Hermitian
/// part of the forward difference, and it makes the transported frame
/// exact at every sample.
pub fn wz_connection<T: Scalar>(frame: &DegenerateFrame<T>) -> Result<WzConnection<T>> {
    let n = frame.len();
    let k = frame.rank();
    let id = CMat::<T>::identity(k, k);
    let mut generators = Vec::with_capacity(n - 1);
    let mut defect = T::zero();
    for i in 0..n - 1 {
        let ds = frame.params[i + 1] - frame.params[i];
        let o = frame.frames[i].adjoint() * &frame.frames[i + 1];
        if min_hermitian_part_eigenvalue(&o) <= T::zero() {
            return Err(Error::Gauge { index: i + 1 });
        }
        defect = defect.max(anti_hermiticity_defect(&((&o - &id) / creal(ds))));
        let log = log_unitary(&polar_unitary(&o), T::tol(1e-12)).ok_or(Error::Gauge { index: i + 1 })?;
        generators.push(log / creal(ds));
    }
    let closure = if frame.closed {
        let o = frame.frames[0].adjoint() * &frame.frames[n - 1];
        polar_unitary(&o)
    } else {
        id
    };
    Ok(WzConnection { params: frame.params.clone(), generators, closure, defect })
}

/// A unitary `k × k` transport matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyMatrix<T: Scalar> {
    entries: CMat<T>,
}

impl<T: Scalar> HolonomyMatrix<T> {
    pub fn new(entries: CMat<T>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::Dimension { expected: entries.nrows(), found: entries.ncols() });
        }
        if unitarity_defect(&entries) > T::tol(1e-9) {
            return Err(Error::Validation("holonomy is not unitary".into()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &CMat<T> {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self { entries: self.entries.adjoint() }
    }

    /// `self · other`.
    pub fn compose(&self, other: &Self) -> Self {
        Self { entries: &self.entries * &other.entries }
    }

    /// Largest imaginary part and `|det − 1|`: distance from `SO(2)`-like
    /// real rotation matrices.
    pub fn real_rotation_defect(&self) -> T {
        let im = self.entries.iter().fold(T::zero(), |a, z| a.max(z.im.abs()));
        let det = self.entries.determinant();
        im.max((det - creal(T::one())).modulus())
    }

    /// `atan2(U₁₀, U₀₀)` for a 2 × 2 rotation `[[cos γ, −sin γ], [sin γ, cos γ]]`.
    pub fn rotation_angle(&self) -> Option<T> {
        (self.dim() == 2).then(|| self.entries[(1, 0)].re.atan2(self.entries[(0, 0)].re))
    }

    /// Phase of a 1 × 1 holonomy.
    pub fn abelian_phase(&self) -> Option<T> {
        (self.dim() == 1).then(|| self.entries[(0, 0)].argument())
    }
}

/// Ordered product of `exp(−A_k Δs_k)` with later steps on the left,
/// followed by the closure link.
pub fn path_ordered_exp<T: Scalar>(a: &WzConnection<T>) -> Result<HolonomyMatrix<T>> {
    let k = a.closure.nrows();
    let mut u = CMat::<T>::identity(k, k);
    for (i, g) in a.generators.iter().enumerate() {
        let ds = a.params[i + 1] - a.params[i];
        u = expm_anti_hermitian(&(g * creal(-ds))) * u;
    }
    HolonomyMatrix::new(&a.closure * u)
}

/// Two-parameter family of `n × k` frames.
pub trait FrameFamily<T: Scalar>: Sync {
    fn frame(&self, u: T, v: T) -> Result<CMat<T>>;
}

/// Closure-backed [`FrameFamily`].
pub struct FnFrameFamily<F>(pub F);

impl<T: Scalar, F: Fn(T, T) -> Result<CMat<T>> + Sync> FrameFamily<T> for FnFrameFamily<F> {
    fn frame(&self, u: T, v: T) -> Result<CMat<T>> {
        (self.0)(u, v)
    }
}

/// `log(W)/δ²` for the counterclockwise square plaquette of side `δ`
/// centred on `point`, with `W` the discrete transport around its corners.
///
/// For `k = 1` on the Bloch family this is `−i K sin θ / 2`, i.e.
/// `K = 2i F / (area element)`.
pub fn field_strength_plaquette<T: Scalar, F: FrameFamily<T> + ?Sized>(family: &F, point: (T, T), delta: T) -> Result<CMat<T>> {
    let h = delta / T::lit(2.0);
    let (u, v) = point;
    let corners = [(u - h, v - h), (u + h, v - h), (u + h, v + h), (u - h, v + h)];
    let frames = corners.iter().map(|&(a, b)| family.frame(a, b)).collect::<Result<Vec<_>>>()?;
    let k = frames[0].ncols();
    let mut w = CMat::<T>::identity(k, k);
    for i in 0..4 {
        let next = (i + 1) % 4;
        w = polar_unitary(&(frames[next].adjoint() * &frames[i])) * w;
    }
    let log = log_unitary(&w, T::tol(1e-6)).ok_or(Error::StepTooLarge)?;
    Ok(log / creal(delta * delta))
}

/// The four-level Hamiltonian with real couplings.
pub fn usb_hamiltonian<T: Scalar>(p: T, q: T, s: T) -> CMat<T> {
    usb_hamiltonian_with_phase(p, q, s, T::zero())
}

/// The four-level Hamiltonian with `Q` carrying a phase `e^{iχ}` on the
/// level-2 to level-4 element.
pub fn usb_hamiltonian_with_phase<T: Scalar>(p: T, q: T, s: T, chi: T) -> CMat<T> {
    let mut h = CMat::<T>::zeros(4, 4);
    h[(0, 1)] = creal(p);
    h[(1, 0)] = creal(p);
    h[(1, 2)] = creal(s);
    h[(2, 1)] = creal(s);
    h[(1, 3)] = cis(chi) * q;
    h[(3, 1)] = cis(-chi) * q;
    h
}

/// `Φ₁`, `Φ₂` of the dark subspace as columns, or `None` when
/// `P = S = 0` leaves `θ` undefined.
pub fn usb_dark_states<T: Scalar>(p: T, q: T, s: T, chi: T) -> Option<CMat<T>> {
    let rho = (p * p + s * s).sqrt();
    if rho == T::zero() {
        return None;
    }
    let theta = p.atan2(s);
    let phi = q.atan2(rho);
    let mut m = CMat::<T>::zeros(4, 2);
    m[(0, 0)] = creal(theta.cos());
    m[(2, 0)] = creal(-theta.sin());
    m[(0, 1)] = creal(phi.sin() * theta.sin());
    m[(2, 1)] = creal(phi.sin() * theta.cos());
    m[(3, 1)] = cis(-chi) * -phi.cos();
    Some(m)
}

type Coupling<'a, T> = Arc<dyn Fn(T) -> T + Send + Sync + 'a>;

/// Time-dependent couplings `(P, Q, S)` and an optional phase on `Q`.
#[derive(Clone)]
pub struct PulseSchedule<'a, T: Scalar> {
    p: Coupling<'a, T>,
    q: Coupling<'a, T>,
    s: Coupling<'a, T>,
    q_phase: Option<Coupling<'a, T>>,
    duration: T,
    closed: bool,
    gap_floor: T,
}

impl<'a, T: Scalar> std::fmt::Debug for PulseSchedule<'a, T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PulseSchedule")
            .field("duration", &self.duration.as_f64())
            .field("closed", &self.closed)
            .field("phased", &self.q_phase.is_some())
            .finish()
    }
}

impl<'a, T: Scalar> PulseSchedule<'a, T> {
    pub fn new(
        p: impl Fn(T) -> T + Send + Sync + 'a,
        q: impl Fn(T) -> T + Send + Sync + 'a,
        s: impl Fn(T) -> T + Send + Sync + 'a,
        duration: T,
        closed: bool,
    ) -> Result<Self> {
        Self::build(Arc::new(p), Arc::new(q), Arc::new(s), None, duration, closed, T::lit(GAP_FLOOR))
    }

    /// Adds a phase `χ(t)` to the `Q` coupling.
    pub fn with_q_phase(self, chi: impl Fn(T) -> T + Send + Sync + 'a) -> Result<Self> {
        Self::build(self.p, self.q, self.s, Some(Arc::new(chi)), self.duration, self.closed, self.gap_floor)
    }

    pub fn with_gap_floor(self, floor: T) -> Result<Self> {
        Self::build(self.p, self.q, self.s, self.q_phase, self.duration, self.closed, floor)
    }

    /// Counterclockwise (for `radius > 0`) circle in the `(P, S)` plane at
    /// fixed `Q`; a negative radius reverses the orientation.
    pub fn circle(center: (T, T), radius: T, q: T, duration: T) -> Result<Self> {
        let (p0, s0) = center;
        let w = T::two_pi() / duration;
        Self::new(
            move |t| p0 + radius.abs() * (w * t).cos(),
            move |_| q,
            move |t| s0 + radius * (w * t).sin(),
            duration,
            true,
        )
    }

    /// Constant couplings held for `duration`.
    pub fn constant(p: T, q: T, s: T, duration: T) -> Result<Self> {
        Self::new(move |_| p, move |_| q, move |_| s, duration, true)
    }

    #[allow(clippy::too_many_arguments)]
    fn build(
        p: Coupling<'a, T>,
        q: Coupling<'a, T>,
        s: Coupling<'a, T>,
        q_phase: Option<Coupling<'a, T>>,
        duration: T,
        closed: bool,
        gap_floor: T,
    ) -> Result<Self> {
        if !(duration > T::zero()) {
            return Err(Error::Input("duration must be positive".into()));
        }
        if !(gap_floor > T::zero()) {
            return Err(Error::Input("gap floor must be positive".into()));
        }
        let sched = Self { p, q, s, q_phase, duration, closed, gap_floor };
        for k in 0..=1024 {
            sched.checked_couplings(duration * T::lit(k as f64 / 1024.0))?;
        }
        if closed {
            let (a, b) = (sched.couplings(T::zero()), sched.couplings(duration));
            let chi = |t| sched.q_phase.as_ref().map_or(T::zero(), |f| f(t));
            let za = cis(chi(T::zero())) * a.1;
            let zb = cis(chi(duration)) * b.1;
            if (a.0 - b.0).abs() > T::tol(1e-12) || (a.2 - b.2).abs() > T::tol(1e-12) || (za - zb).modulus() > T::tol(1e-12) {
                return Err(Error::Validation("closed schedule endpoints differ".into()));
            }
        }
        Ok(sched)
    }

    pub fn duration(&self) -> T {
        self.duration
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn is_phased(&self) -> bool {
        self.q_phase.is_some()
    }

    pub fn gap_floor(&self) -> T {
        self.gap_floor
    }

    /// `(P, Q, S)` at time `t`.
    pub fn couplings(&self, t: T) -> (T, T, T) {
        ((self.p)(t), (self.q)(t), (self.s)(t))
    }

    pub fn q_phase(&self, t: T) -> T {
        self.q_phase.as_ref().map_or(T::zero(), |f| f(t))
    }

    fn checked_couplings(&self, t: T) -> Result<(T, T, T)> {
        let (p, q, s) = self.couplings(t);
        let gap2 = p * p + q * q + s * s;
        if !(gap2 > self.gap_floor * self.gap_floor) {
            return Err(Error::DegeneracyCollapse { time: t.as_f64(), gap: gap2.sqrt().as_f64() });
        }
        Ok((p, q, s))
    }

    pub fn hamiltonian(&self, t: T) -> CMat<T> {
        let (p, q, s) = self.couplings(t);
        usb_hamiltonian_with_phase(p, q, s, self.q_phase(t))
    }

    /// The same loop traversed backwards.
    pub fn reversed(&self) -> Self {
        let d = self.duration;
        let rev = |f: &Coupling<'a, T>| -> Coupling<'a, T> {
            let f = f.clone();
            Arc::new(move |t| f(d - t))
        };
        Self {
            p: rev(&self.p),
            q: rev(&self.q),
            s: rev(&self.s),
            q_phase: self.q_phase.as_ref().map(rev),
            ..self.clone()
        }
    }

    /// The same loop run over a different duration.
    pub fn rescaled(&self, duration: T) -> Self {
        let k = self.duration / duration;
        let sc = |f: &Coupling<'a, T>| -> Coupling<'a, T> {
            let f = f.clone();
            Arc::new(move |t| f(t * k))
        };
        Self {
            p: sc(&self.p),
            q: sc(&self.q),
            s: sc(&self.s),
            q_phase: self.q_phase.as_ref().map(sc),
            duration,
            ..self.clone()
        }
    }
}

/// Dark-subspace frames at `steps + 1` uniform times from the numeric null
/// space of `H(t)`, aligned at `t = 0` to `(Φ₁, Φ₂)` and continued by
/// per-step Procrustes alignment.
pub fn usb_dark_frame<T: Scalar>(schedule: &PulseSchedule<'_, T>, steps: usize) -> Result<DegenerateFrame<T>> {
    if steps < 1 {
        return Err(Error::Input("need at least one step".into()));
    }
    let mut params = Vec::with_capacity(steps + 1);
    let mut frames: Vec<CMat<T>> = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let t = schedule.duration * T::lit(k as f64) / T::lit(steps as f64);
        let (p, q, s) = schedule.checked_couplings(t)?;
        let (_, vecs) = eigh(&schedule.hamiltonian(t));
        let mut null = vecs.columns(1, 2).into_owned();
        let target = match frames.last() {
            Some(prev) => Some(prev.clone()),
            None => usb_dark_states(p, q, s, schedule.q_phase(t)),
        };
        if let Some(target) = target {
            null = &null * polar_unitary(&(null.adjoint() * target));
        }
        params.push(t);
        frames.push(null);
    }
    DegenerateFrame::new(params, frames, schedule.closed)
}

/// Dark-subspace holonomy of a closed schedule in the `(Φ₁, Φ₂)` frame at
/// `t = 0`.
pub fn usb_holonomy<T: Scalar>(schedule: &PulseSchedule<'_, T>, steps: usize) -> Result<HolonomyMatrix<T>> {
    if !schedule.closed {
        return Err(Error::OpenPath);
    }
    path_ordered_exp(&wz_connection(&usb_dark_frame(schedule, steps)?)?)
}

/// Trapezoidal value of `∮ Q/((P² + S²)√(Q² + P² + S²)) (S dP − P dS)`.
pub fn usb_gamma_closed_form<T: Scalar>(schedule: &PulseSchedule<'_, T>, steps: usize) -> Result<T> {
    if !schedule.closed {
        return Err(Error::OpenPath);
    }
    if schedule.is_phased() {
        return Err(Error::Input("the closed form assumes a real Q coupling".into()));
    }
    if steps < 2 {
        return Err(Error::Input("need at least 2 quadrature steps".into()));
    }
    let samples: Vec<(T, T, T)> = (0..=steps)
        .map(|k| schedule.couplings(schedule.duration * T::lit(k as f64) / T::lit(steps as f64)))
        .collect();
    usb_gamma_polygon(&samples, schedule.gap_floor).map_err(|e| match e {
        Error::Singularity { time, radius2 } => {
            Error::Singularity { time: time * schedule.duration.as_f64() / steps as f64, radius2 }
        }
        other => other,
    })
}

/// Trapezoidal value of the `γ_f` 1-form along sampled `(P, Q, S)`
/// points (closed when the last sample repeats the first). A singular
/// sample is reported with its index as `time`.
pub fn usb_gamma_polygon<T: Scalar>(samples: &[(T, T, T)], floor: T) -> Result<T> {
    let floor2 = floor * floor;
    let form = |k: usize| -> Result<(T, T, T, T)> {
        let (p, q, s) = samples[k];
        let rho2 = p * p + s * s;
        if rho2 <= floor2 {
            return Err(Error::Singularity { time: k as f64, radius2: rho2.as_f64() });
        }
        let f = q / (rho2 * (rho2 + q * q).sqrt());
        Ok((p, s, f * s, -f * p))
    };
    let half = T::lit(0.5);
    let mut total = T::zero();
    let mut prev = form(0)?;
    for k in 1..samples.len() {
        let cur = form(k)?;
        total += half * (prev.2 + cur.2) * (cur.0 - prev.0) + half * (prev.3 + cur.3) * (cur.1 - prev.1);
        prev = cur;
    }
    Ok(total)
}

/// `Q / (P² + Q² + S²)^{3/2}`: the curvature of the dark-subspace
/// connection in the `(P, S)` plane.
pub fn usb_field_density<T: Scalar>(p: T, q: T, s: T) -> T {
    let r2 = p * p + q * q + s * s;
    q / (r2 * r2.sqrt())
}

/// Comparison of full four-level evolution with the adiabatic holonomy.
#[derive(Debug, Clone)]
pub struct EvolutionReport<T: Scalar> {
    /// Largest population lost from the dark subspace.
    pub leakage: T,
    /// `M_ba = ⟨Φ_b(0)|ψ_a(T)⟩`.
    pub projected: CMat<T>,
    pub holonomy: HolonomyMatrix<T>,
    /// Frobenius distance between `projected` and `holonomy`.
    pub distance: T,
}

/// Runs the schedule over `duration` with the full Schrödinger equation
/// from each dark state and projects the results back onto the dark frame.
pub fn usb_full_evolution_check<T: Scalar>(schedule: &PulseSchedule<'_, T>, duration: T, steps: usize) -> Result<EvolutionReport<T>> {
    let scaled = schedule.rescaled(duration);
    let frame0 = usb_dark_frame(&scaled, 1)?.frames[0].clone();
    let holonomy = usb_holonomy(&scaled, steps)?;
    let sched = scaled.clone();
    let h = HamiltonianPath::new(move |t: T| sched.hamiltonian(t), duration, true)?;
    let mut projected = CMat::<T>::zeros(2, 2);
    let mut leakage = T::zero();
    for a in 0..2 {
        let psi0 = PureState::normalized(frame0.column(a).into_owned())?;
        let traj = evolve_schrodinger(&h, &psi0, steps)?;
        let c = frame0.adjoint() * traj.last().amplitudes();
        leakage = leakage.max(T::one() - c.norm_squared());
        projected.set_column(a, &c);
    }
    let distance = (&projected - holonomy.entries()).norm();
    Ok(EvolutionReport { leakage, projected, holonomy, distance })
}

/// `‖AB − BA‖` (Frobenius).
pub fn commutator_norm<T: Scalar>(a: &HolonomyMatrix<T>, b: &HolonomyMatrix<T>) -> T {
    (a.entries() * b.entries() - b.entries() * a.entries()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adiabatic::{berry_connection, berry_phase, EigenFrame};
    use crate::phase::{plaquette_curvature, BlochFamily, TwoParamFamily};
    use crate::qcore::BlochVector;
    use crate::scalar::cplx;
    use std::f64::consts::PI;

    fn rotating_frame(s: f64) -> CMat<f64> {
        let mut m = CMat::zeros(3, 2);
        m[(0, 0)] = creal(s.cos());
        m[(1, 0)] = creal(s.sin());
        m[(0, 1)] = creal(-s.sin());
        m[(1, 1)] = creal(s.cos());
        m
    }

    fn standard_loop() -> PulseSchedule<'static, f64> {
        PulseSchedule::circle((2.0, 2.0), 0.5, 1.0, 1.0).unwrap()
    }

    #[test]
    fn constant_frame_has_zero_connection() {
        let f = rotating_frame(0.3);
        let frame = DegenerateFrame::new(vec![0.0, 0.5, 1.0], vec![f.clone(), f.clone(), f], false).unwrap();
        let a = wz_connection(&frame).unwrap();
        assert!(a.generators().iter().all(|g| g.norm() < 1e-15));
        let hol = path_ordered_exp(&a).unwrap();
        assert!((hol.entries() - CMat::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn rotating_frame_generator() {
        let params: Vec<f64> = (0..=100).map(|k| k as f64 * 0.01).collect();
        let frames = params.iter().map(|&s| rotating_frame(s)).collect();
        let a = wz_connection(&DegenerateFrame::new(params, frames, false).unwrap()).unwrap();
        let expected = crate::linalg::real_matrix::<f64>(2, &[0.0, -1.0, 1.0, 0.0]);
        assert!(a.generators().iter().all(|g| (g - &expected).norm() < 1e-12));
        assert!(a.forward_difference_defect() < 0.02);
    }

    #[test]
    fn abelian_reduction() {
        let theta = 0.9;
        let params: Vec<f64> = (0..=400).map(|k| k as f64 * 2.0 * PI / 400.0).collect();
        let states: Vec<_> = params.iter().map(|&p| BlochVector::from_angles(theta, p).to_state()).collect();
        let frames = states.iter().map(|s| CMat::from_column_slice(2, 1, s.amplitudes().as_slice())).collect();
        let frame = DegenerateFrame::new(params.clone(), frames, true).unwrap();
        let a = wz_connection(&frame).unwrap();
        let eig = EigenFrame::from_states(params, &states, true).unwrap();
        let beta = berry_connection(&eig, 0).unwrap();
        for (g, b) in a.generators().iter().zip(&beta) {
            assert!((g[(0, 0)] - cplx(0.0, -b)).norm() < 1e-9);
        }
        let hol = path_ordered_exp(&a).unwrap();
        let gamma = berry_phase(&eig, 0).unwrap();
        assert!(gamma.distance(hol.abelian_phase().unwrap()) < 1e-6);
    }

    #[test]
    fn commuting_generator_matches_exponential() {
        let g = crate::linalg::real_matrix::<f64>(2, &[0.0, -0.7, 0.7, 0.0]) + CMat::identity(2, 2) * cplx(0.0, 0.2);
        let params: Vec<f64> = (0..=50).map(|k| k as f64 * 0.06).collect();
        let a = WzConnection::from_generators(params, vec![g.clone(); 50]).unwrap();
        let hol = path_ordered_exp(&a).unwrap();
        let direct = expm_anti_hermitian(&(g * creal(-3.0)));
        assert!((hol.entries() - direct).norm() < 1e-10);
        let zero = WzConnection::from_generators(vec![0.0, 1.0], vec![CMat::zeros(2, 2)]).unwrap();
        assert!((path_ordered_exp(&zero).unwrap().entries() - CMat::identity(2, 2)).norm() < 1e-15);
    }

    #[test]
    fn ordering_of_non_commuting_segments() {
        let a1 = crate::qcore::pauli_x::<f64>() * cplx(0.0, 1.0);
        let a2 = crate::qcore::pauli_z::<f64>() * cplx(0.0, 1.0);
        let (l1, l2) = (0.6, 0.9);
        let a = WzConnection::from_generators(vec![0.0, l1, l1 + l2], vec![a1.clone(), a2.clone()]).unwrap();
        let hol = path_ordered_exp(&a).unwrap();
        let e1 = expm_anti_hermitian(&(&a1 * creal(-l1)));
        let e2 = expm_anti_hermitian(&(&a2 * creal(-l2)));
        assert!((hol.entries() - &e2 * &e1).norm() < 1e-12);
        assert!((hol.entries() - &e1 * &e2).norm() > 0.1);
        // Fine-step oracle.
        let n = 1_000_000;
        let ds = (l1 + l2) / n as f64;
        let mut u = CMat::<f64>::identity(2, 2);
        let s1 = expm_anti_hermitian(&(&a1 * creal(-ds)));
        let s2 = expm_anti_hermitian(&(&a2 * creal(-ds)));
        for k in 0..n {
            let mid = (k as f64 + 0.5) * ds;
            u = if mid < l1 { &s1 * u } else { &s2 * u };
        }
        assert!((hol.entries() - u).norm() < 1e-5);
    }

    #[test]
    fn second_order_in_step() {
        let s = standard_loop();
        let gamma = usb_gamma_closed_form(&s, 20_000).unwrap();
        let err = |n| (usb_holonomy(&s, n).unwrap().rotation_angle().unwrap() - gamma).abs();
        let (e1, e2) = (err(100), err(200));
        assert!(e1 / e2 > 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn flat_and_bloch_field_strength() {
        let flat = FnFrameFamily(|_u: f64, _v: f64| Ok(rotating_frame(0.2)));
        assert!(field_strength_plaquette(&flat, (0.1, 0.2), 1e-2).unwrap().norm() < 1e-12);
        let bloch = FnFrameFamily(|th: f64, ph: f64| {
            let s = <BlochFamily as TwoParamFamily<f64>>::state(&BlochFamily, th, ph);
            Ok(CMat::from_column_slice(2, 1, s.amplitudes().as_slice()))
        });
        for (th, ph) in [(0.7, 0.3), (1.9, 4.0)] {
            let f = field_strength_plaquette(&bloch, (th, ph), 1e-2).unwrap()[(0, 0)];
            let k = plaquette_curvature(&BlochFamily, (th, ph), 1e-2).unwrap();
            let area = <BlochFamily as TwoParamFamily<f64>>::area_element(&BlochFamily, th, ph);
            assert!(((cplx::<f64>(0.0, 2.0) * f).re / area - k).abs() < 1e-3);
        }
    }

    #[test]
    fn usb_field_strength_matches_closed_form_density() {
        let q = 1.0;
        let fam = FnFrameFamily(move |p: f64, s: f64| Ok(usb_dark_states(p, q, s, 0.0).unwrap()));
        for (p, s) in [(2.0, 2.0), (0.7, 1.4), (3.0, 0.5)] {
            let f = field_strength_plaquette(&fam, (p, s), 1e-2).unwrap();
            assert!((f[(1, 0)].re - usb_field_density(p, q, s)).abs() < 1e-3);
            assert!((f[(0, 1)].re + usb_field_density(p, q, s)).abs() < 1e-3);
        }
    }

    #[test]
    fn usb_hamiltonian_spectrum() {
        assert_eq!(usb_hamiltonian(0.0f64, 0.0, 0.0), CMat::zeros(4, 4));
        for (p, q, s, r) in [(1.0, 0.0, 0.0, 1.0), (3.0, 4.0, 0.0, 5.0), (1.0, 2.0, 2.0, 3.0)] {
            let (vals, _) = eigh(&usb_hamiltonian::<f64>(p, q, s));
            let expected = [-r, 0.0, 0.0, r];
            assert!(vals.iter().zip(expected).all(|(a, b)| (a - b).abs() < 1e-10));
        }
    }

    fn projector(m: &CMat<f64>) -> CMat<f64> {
        m * m.adjoint()
    }

    #[test]
    fn dark_frame_examples() {
        let e = |i: usize| {
            let mut v = CMat::<f64>::zeros(4, 1);
            v[(i, 0)] = creal(1.0);
            v
        };
        let span = |a: usize, b: usize| projector(&e(a)) + projector(&e(b));
        let one = |p: f64, q: f64, s: f64| usb_dark_frame(&PulseSchedule::constant(p, q, s, 1.0).unwrap(), 1).unwrap();
        assert!((projector(&one(1.0, 0.0, 0.0).frames()[0]) - span(2, 3)).norm() < 1e-10);
        assert!((projector(&one(0.0, 0.0, 1.0).frames()[0]) - span(0, 3)).norm() < 1e-10);
        let generic = one(1.0, 2.0, 2.0);
        let f = &generic.frames()[0];
        assert!((f.adjoint() * f - CMat::identity(2, 2)).norm() < 1e-12);
        assert!((usb_hamiltonian(1.0, 2.0, 2.0) * f).norm() < 1e-10);
        let analytic = usb_dark_states(1.0, 2.0, 2.0, 0.0).unwrap();
        assert!((projector(f) - projector(&analytic)).norm() < 1e-8);
        assert!((f - analytic).norm() < 1e-10);
    }

    #[test]
    fn collapse_is_reported() {
        let err = PulseSchedule::new(|t: f64| 1.0 - t, |_| 0.0, |_| 0.0, 2.0, false).unwrap_err();
        assert!(matches!(err, Error::DegeneracyCollapse { .. }));
    }

    #[test]
    fn standard_loop_three_way() {
        let s = standard_loop();
        let gamma = usb_gamma_closed_form(&s, 100_000).unwrap();
        let hol = usb_holonomy(&s, 100_000).unwrap();
        assert!(hol.real_rotation_defect() < 1e-6);
        assert!((hol.rotation_angle().unwrap() - gamma).abs() < 1e-4);
        assert!(gamma.abs() > 1e-3);
    }

    #[test]
    fn retraced_and_reversed() {
        let there_and_back = PulseSchedule::new(
            |t: f64| 2.0 + 0.5 * (2.0 * PI * t).sin(),
            |_| 1.0,
            |t: f64| 2.0 + 0.3 * (2.0 * PI * t).sin(),
            1.0,
            true,
        )
        .unwrap();
        let hol = usb_holonomy(&there_and_back, 2000).unwrap();
        assert!((hol.entries() - CMat::identity(2, 2)).norm() < 1e-6);
        let s = standard_loop();
        let fwd = usb_holonomy(&s, 4000).unwrap();
        let back = usb_holonomy(&s.reversed(), 4000).unwrap();
        assert!((fwd.compose(&back).entries() - CMat::identity(2, 2)).norm() < 1e-6);
    }

    #[test]
    fn closed_form_examples() {
        let flat = PulseSchedule::new(|t: f64| 2.0 + (2.0 * PI * t).cos(), |_| 1.0, |_| 0.0, 1.0, true).unwrap();
        assert!(usb_gamma_closed_form(&flat, 1000).unwrap().abs() < 1e-15);
        let once = usb_gamma_closed_form(&standard_loop(), 4000).unwrap();
        let twice = PulseSchedule::new(
            |t: f64| 2.0 + 0.5 * (4.0 * PI * t).cos(),
            |_| 1.0,
            |t: f64| 2.0 + 0.5 * (4.0 * PI * t).sin(),
            1.0,
            true,
        )
        .unwrap();
        assert!((usb_gamma_closed_form(&twice, 8000).unwrap() - 2.0 * once).abs() < 1e-9);
        let through_origin = PulseSchedule::new(|t: f64| (2.0 * PI * t).cos(), |_| 1.0, |_| 0.0, 1.0, true).unwrap();
        assert!(matches!(usb_gamma_closed_form(&through_origin, 4), Err(Error::Singularity { .. })));
    }

    #[test]
    fn gauge_covariance() {
        let s = standard_loop();
        let frame = usb_dark_frame(&s, 2000).unwrap();
        let hol = path_ordered_exp(&wz_connection(&frame).unwrap()).unwrap();
        let g = expm_anti_hermitian(&(crate::qcore::pauli_y::<f64>() * cplx(0.0, 0.4) + crate::qcore::pauli_z::<f64>() * cplx(0.0, 0.3)));
        let n = frame.len();
        let regauged = frame.regauged(|k| if k == 0 || k == n - 1 { g.clone() } else { CMat::identity(2, 2) });
        // Interior samples keep the old gauge; only the endpoints move.
        let hol2 = path_ordered_exp(&wz_connection(&regauged).unwrap()).unwrap();
        assert!((hol2.entries() - g.adjoint() * hol.entries() * &g).norm() < 1e-9);
    }

    #[test]
    fn non_commuting_loops() {
        let l1 = PulseSchedule::circle((1.0, 1.0), 0.6, 1.0, 1.0).unwrap();
        let l2 = PulseSchedule::new(|t: f64| 1.0 + 0.6 * (2.0 * PI * t).cos(), |t: f64| 1.0 + 0.6 * (2.0 * PI * t).sin(), |_| 1.0, 1.0, true)
            .unwrap()
            .with_q_phase(|t: f64| 1.5 * (2.0 * PI * t).sin())
            .unwrap();
        let h1 = usb_holonomy(&l1, 4000).unwrap();
        let h2 = usb_holonomy(&l2, 4000).unwrap();
        assert!(commutator_norm(&h1, &h2) > 0.1, "{}", commutator_norm(&h1, &h2));
    }

    #[test]
    fn full_evolution_trivial_schedule() {
        let s = PulseSchedule::constant(1.0, 2.0, 2.0, 1.0).unwrap();
        let r = usb_full_evolution_check(&s, 10.0, 200).unwrap();
        assert!((r.projected - CMat::identity(2, 2)).norm() < 1e-10);
        assert!(r.leakage < 1e-12);
    }
}
