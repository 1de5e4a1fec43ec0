//! Discrete and continuous abelian geometric phases.
//!
//! Sign convention: [`pancharatnam_phase`] returns
//! `arg ⟨ψ₁|ψ₂⟩⟨ψ₂|ψ₃⟩…⟨ψ_n|ψ₁⟩`. For a qubit loop whose Bloch vectors
//! bound an oriented solid angle `Ω` (counterclockwise seen from outside is
//! positive) this equals `+Ω/2`. A state carried around the same loop by
//! Schrödinger evolution acquires the opposite sign, `−Ω/2`; see
//! [`crate::adiabatic`].

use nalgebra::ComplexField;
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::qcore::{overlap, BlochVector, PureState};
use crate::scalar::{creal, wrap_phase, CVec, Scalar};

/// Modulus below which two consecutive states count as orthogonal.
pub const ORTHOGONAL_LINK: f64 = 1e-9;

/// Angle reduced to `(-π, π]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct PhaseValue<T: Scalar>(T);

impl<T: Scalar> PhaseValue<T> {
    pub fn new(radians: T) -> Self {
        Self(wrap_phase(radians))
    }

    pub fn radians(self) -> T {
        self.0
    }

    /// Distance to `other` on the circle.
    pub fn distance(self, other: T) -> T {
        wrap_phase(self.0 - other).abs()
    }
}

/// Sampled one-parameter family of states.
#[derive(Debug, Clone)]
pub struct StatePath<T: Scalar> {
    samples: Vec<(T, PureState<T>)>,
    closed: bool,
}

impl<T: Scalar> StatePath<T> {
    pub fn new(samples: Vec<(T, PureState<T>)>, closed: bool) -> Result<Self> {
        let Some((_, first)) = samples.first() else {
            return Err(Error::Input("empty state path".into()));
        };
        let dim = first.dim();
        for w in samples.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::Input("path parameters must be strictly increasing".into()));
            }
            if w[1].1.dim() != dim {
                return Err(Error::Dimension { expected: dim, found: w[1].1.dim() });
            }
        }
        if closed {
            let last = &samples[samples.len() - 1].1;
            let m = overlap(first, last)?.modulus();
            if m <= T::one() - T::tol(1e-8) {
                return Err(Error::Input(format!(
                    "closed path endpoints differ (|overlap| = {})",
                    m.as_f64()
                )));
            }
        }
        Ok(Self { samples, closed })
    }

    /// Uniformly parameterized path over `[0, 1]` (or `[0, 0]` for one state).
    pub fn from_states(states: Vec<PureState<T>>, closed: bool) -> Result<Self> {
        let n = states.len();
        let denom = T::lit((n.max(2) - 1) as f64);
        let samples = states.into_iter().enumerate().map(|(k, s)| (T::lit(k as f64) / denom, s)).collect();
        Self::new(samples, closed)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn samples(&self) -> &[(T, PureState<T>)] {
        &self.samples
    }

    pub fn states(&self) -> impl Iterator<Item = &PureState<T>> {
        self.samples.iter().map(|(_, s)| s)
    }

    /// The same loop traversed backwards (parameters mirrored).
    pub fn reversed(&self) -> Self {
        let end = self.samples[self.samples.len() - 1].0;
        let start = self.samples[0].0;
        let samples = self.samples.iter().rev().map(|(s, psi)| (start + end - *s, psi.clone())).collect();
        Self { samples, closed: self.closed }
    }

    /// Appends `other`, dropping its first sample when it repeats our last ray.
    pub fn concat(mut self, other: &Self, closed: bool) -> Result<Self> {
        let offset = self.samples[self.samples.len() - 1].0 - other.samples[0].0;
        let mut skip = 0;
        if let (Some((_, a)), Some((_, b))) = (self.samples.last(), other.samples.first()) {
            if overlap(a, b)?.modulus() > T::one() - T::tol(1e-12) {
                skip = 1;
            }
        }
        let step = if other.samples.len() > 1 { other.samples[1].0 - other.samples[0].0 } else { T::one() };
        let shift = if skip == 1 { offset } else { offset + step };
        for (s, psi) in other.samples.iter().skip(skip) {
            self.samples.push((*s + shift, psi.clone()));
        }
        Self::new(self.samples, closed)
    }
}

/// Deterministic map `(s, s') → state` over a rectangle of parameters.
pub trait TwoParamFamily<T: Scalar>: Sync {
    fn state(&self, s: T, t: T) -> PureState<T>;

    /// Area element of the parameterization at `(s, t)`.
    fn area_element(&self, _s: T, _t: T) -> T {
        T::one()
    }
}

/// Qubit rays by polar angle `θ` and azimuth `φ`; area element `sin θ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BlochFamily;

impl<T: Scalar> TwoParamFamily<T> for BlochFamily {
    fn state(&self, theta: T, phi: T) -> PureState<T> {
        BlochVector::from_angles(theta, phi).to_state()
    }

    fn area_element(&self, theta: T, _phi: T) -> T {
        theta.sin()
    }
}

/// Optical coherent states `|α⟩`, `α = s + i t`, truncated to `cutoff` Fock
/// levels and renormalized.
#[derive(Debug, Clone, Copy)]
pub struct CoherentFamily {
    pub cutoff: usize,
}

impl<T: Scalar> TwoParamFamily<T> for CoherentFamily {
    fn state(&self, s: T, t: T) -> PureState<T> {
        let alpha = Complex::new(s, t);
        let mut amps = Vec::with_capacity(self.cutoff);
        let mut term = creal(T::one());
        for n in 0..self.cutoff {
            if n > 0 {
                term = term * alpha / creal(T::lit(n as f64).sqrt());
            }
            amps.push(term);
        }
        PureState::normalized(CVec::<T>::from_vec(amps)).expect("coherent state has nonzero norm")
    }
}

/// Any closure `(s, t) → state` with unit area element.
pub struct FnFamily<F>(pub F);

impl<T: Scalar, F: Fn(T, T) -> PureState<T> + Sync> TwoParamFamily<T> for FnFamily<F> {
    fn state(&self, s: T, t: T) -> PureState<T> {
        (self.0)(s, t)
    }
}

fn link_args<'a, T: Scalar + 'a>(states: impl Iterator<Item = &'a PureState<T>>, n: usize) -> Result<Vec<T>> {
    let states: Vec<&PureState<T>> = states.collect();
    let mut args = Vec::with_capacity(n);
    for k in 0..n {
        let next = (k + 1) % n;
        let z = overlap(states[k], states[next])?;
        let m = z.modulus();
        if m <= T::lit(ORTHOGONAL_LINK) {
            return Err(Error::OrthogonalLink { index: k, next, modulus: m.as_f64() });
        }
        args.push(z.argument());
    }
    Ok(args)
}

/// `arg ⟨ψ₁|ψ₂⟩⟨ψ₂|ψ₃⟩…⟨ψ_n|ψ₁⟩`, the gauge-invariant discrete phase of the
/// closed sequence.
pub fn pancharatnam_phase<T: Scalar>(states: &[PureState<T>]) -> Result<PhaseValue<T>> {
    if states.is_empty() {
        return Err(Error::Input("empty state sequence".into()));
    }
    let dim = states[0].dim();
    if let Some(s) = states.iter().find(|s| s.dim() != dim) {
        return Err(Error::Dimension { expected: dim, found: s.dim() });
    }
    let mut product = Complex::new(T::one(), T::zero());
    for k in 0..states.len() {
        let next = (k + 1) % states.len();
        let z = overlap(&states[k], &states[next])?;
        let m = z.modulus();
        if m <= T::lit(ORTHOGONAL_LINK) {
            return Err(Error::OrthogonalLink { index: k, next, modulus: m.as_f64() });
        }
        // Unit factors keep long products away from underflow.
        product *= z / m;
    }
    Ok(PhaseValue::new(product.argument()))
}

/// Largest discrete `|Im⟨ψ|dψ⟩| / ds` along the path; zero means parallel
/// transport.
pub fn parallel_transport_defect<T: Scalar>(path: &StatePath<T>) -> Result<T> {
    if path.len() < 2 {
        return Err(Error::Input("parallel transport defect needs at least 2 samples".into()));
    }
    let mut worst = T::zero();
    for w in path.samples().windows(2) {
        let z = overlap(&w[0].1, &w[1].1)?;
        let d = z.im.abs() / (w[1].0 - w[0].0);
        if d > worst {
            worst = d;
        }
    }
    Ok(worst)
}

/// Loop phase together with how many times it wrapped around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoopPhase<T: Scalar> {
    pub phase: PhaseValue<T>,
    /// Accumulated phase before reduction.
    pub unwrapped: T,
    /// `round((unwrapped − phase) / 2π)`.
    pub winding: i64,
}

impl<T: Scalar> LoopPhase<T> {
    fn from_unwrapped(unwrapped: T) -> Self {
        let phase = PhaseValue::new(unwrapped);
        let winding = ((unwrapped - phase.radians()) / T::two_pi()).round().as_f64() as i64;
        Self { phase, unwrapped, winding }
    }
}

/// Quadrature of `∮ Im⟨ψ|dψ/ds⟩ ds` along a closed path.
///
/// Each step contributes `Im⟨ψ_k|ψ_{k+1}⟩`; the closing link `arg⟨ψ_N|ψ_0⟩`
/// removes the gauge term of the endpoints, so the result converges to the
/// Pancharatnam phase of the loop with error `O(Δs²)` in a smooth gauge.
pub fn geometric_phase_integral<T: Scalar>(path: &StatePath<T>) -> Result<LoopPhase<T>> {
    if !path.is_closed() {
        return Err(Error::OpenPath);
    }
    let n = path.len();
    let mut total = T::zero();
    for (k, w) in path.samples().windows(2).enumerate() {
        let z = overlap(&w[0].1, &w[1].1)?;
        if z.modulus() <= T::lit(ORTHOGONAL_LINK) {
            return Err(Error::OrthogonalLink { index: k, next: k + 1, modulus: z.modulus().as_f64() });
        }
        total += z.im;
    }
    let closing = overlap(&path.samples()[n - 1].1, &path.samples()[0].1)?;
    total += closing.argument();
    Ok(LoopPhase::from_unwrapped(total))
}

/// Same loop quantity accumulated as a sum of per-link arguments. Unlike
/// [`geometric_phase_integral`] every term is gauge invariant, so the result
/// is exact for any sampling; the winding count is kept.
pub fn accumulated_loop_phase<T: Scalar>(path: &StatePath<T>) -> Result<LoopPhase<T>> {
    if !path.is_closed() {
        return Err(Error::OpenPath);
    }
    let args = link_args(path.states(), path.len())?;
    Ok(LoopPhase::from_unwrapped(args.into_iter().fold(T::zero(), |a, b| a + b)))
}

/// Fubini–Study geodesic from `a` to `b` sampled at `n` points on `[0, 1]`.
///
/// The samples are horizontal: consecutive overlaps are real and positive.
pub fn geodesic_path<T: Scalar>(a: &PureState<T>, b: &PureState<T>, n: usize) -> Result<StatePath<T>> {
    if n == 0 {
        return Err(Error::Input("geodesic needs at least one sample".into()));
    }
    let z = overlap(a, b)?;
    let m = z.modulus();
    if m <= T::lit(ORTHOGONAL_LINK) {
        return Err(Error::OrthogonalEndpoints);
    }
    // Rephase b so that ⟨a|b'⟩ is real and positive.
    let b_aligned = b.amplitudes().map(|x| x * (z.conj() / m));
    let d = m.min(T::one()).acos();
    let denom = T::lit((n.max(2) - 1) as f64);
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = T::lit(k as f64) / denom;
        let v = if d < T::tol(1e-12) {
            a.amplitudes().clone()
        } else {
            let wa = ((T::one() - t) * d).sin() / d.sin();
            let wb = (t * d).sin() / d.sin();
            a.amplitudes().map(|x| x * creal(wa)) + b_aligned.map(|x| x * creal(wb))
        };
        samples.push((t, PureState::normalized(v)?));
    }
    StatePath::new(samples, false)
}

/// Closed loop through the given vertex states, joined by geodesic arcs of
/// `per_edge` samples each. The last sample repeats the first state.
pub fn geodesic_loop<T: Scalar>(vertices: &[PureState<T>], per_edge: usize) -> Result<StatePath<T>> {
    if vertices.len() < 2 || per_edge < 2 {
        return Err(Error::Input("geodesic loop needs ≥ 2 vertices and ≥ 2 samples per edge".into()));
    }
    let mut states: Vec<PureState<T>> = vec![vertices[0].clone()];
    for k in 0..vertices.len() {
        // Start each arc from where the previous one ended so the whole
        // chain stays horizontal; only the closing link carries phase.
        let start = states[states.len() - 1].clone();
        let edge = geodesic_path(&start, &vertices[(k + 1) % vertices.len()], per_edge)?;
        states.extend(edge.states().skip(1).cloned());
    }
    StatePath::from_states(states, true)
}

/// Closed loop along geodesic arcs between Bloch vertices, sampled in the
/// fixed gauge of [`BlochVector::to_state`] (not parallel transported).
/// `samples` counts the points of the whole loop, endpoints included.
pub fn bloch_polygon_loop<T: Scalar>(vertices: &[BlochVector<T>], samples: usize) -> Result<StatePath<T>> {
    let k = vertices.len();
    if k < 2 || samples < k + 1 {
        return Err(Error::Input("polygon loop needs ≥ 2 vertices and enough samples".into()));
    }
    let lengths: Vec<T> = (0..k)
        .map(|i| vertices[i].normalized().dot(&vertices[(i + 1) % k].normalized()).max(-T::one()).min(T::one()).acos())
        .collect();
    let total = lengths.iter().fold(T::zero(), |a, &b| a + b);
    let mut states = Vec::with_capacity(samples);
    for j in 0..samples {
        let mut arc = total * T::lit(j as f64) / T::lit((samples - 1) as f64);
        let mut edge = 0;
        while edge < k - 1 && arc > lengths[edge] {
            arc -= lengths[edge];
            edge += 1;
        }
        let a = vertices[edge].normalized();
        let b = vertices[(edge + 1) % k].normalized();
        let point = slerp(&a, &b, lengths[edge], arc.min(lengths[edge]));
        states.push(point.to_state());
    }
    StatePath::from_states(states, true)
}

fn slerp<T: Scalar>(a: &BlochVector<T>, b: &BlochVector<T>, len: T, at: T) -> BlochVector<T> {
    if len < T::tol(1e-14) {
        return *a;
    }
    let wa = (len - at).sin() / len.sin();
    let wb = at.sin() / len.sin();
    BlochVector { x: a.x * wa + b.x * wb, y: a.y * wa + b.y * wb, z: a.z * wa + b.z * wb }.normalized()
}

/// Oriented solid angle of the spherical triangle `(a, b, c)` in `(-2π, 2π)`.
fn triangle_solid_angle<T: Scalar>(a: &BlochVector<T>, b: &BlochVector<T>, c: &BlochVector<T>) -> T {
    let num = a.dot(&b.cross(c));
    let den = T::one() + a.dot(b) + b.dot(c) + c.dot(a);
    T::lit(2.0) * num.atan2(den)
}

/// Oriented solid angle of the closed geodesic polygon through `vertices`
/// (counterclockwise seen from outside is positive).
pub fn solid_angle<T: Scalar>(vertices: &[BlochVector<T>]) -> Result<T> {
    if vertices.len() < 3 {
        return Err(Error::Input("solid angle needs at least 3 vertices".into()));
    }
    for (i, v) in vertices.iter().enumerate() {
        if (v.norm() - T::one()).abs() > T::tol(1e-9) {
            return Err(Error::Domain(format!("vertex {i} is not on the unit sphere")));
        }
    }
    let n = vertices.len();
    for i in 0..n {
        let j = (i + 1) % n;
        if vertices[i].dot(&vertices[j]) < -T::one() + T::tol(1e-12) {
            return Err(Error::DegenerateArc { index: i, next: j });
        }
    }
    // Fan from the first vertex unless some vertex is antipodal to it, in
    // which case fan from a point off the polygon.
    let apex = if vertices.iter().any(|v| v.dot(&vertices[0]) < -T::one() + T::tol(1e-6)) {
        let sum = vertices.iter().fold(BlochVector { x: T::zero(), y: T::zero(), z: T::zero() }, |acc, v| {
            BlochVector { x: acc.x + v.x, y: acc.y + v.y, z: acc.z + v.z }
        });
        let tilt = BlochVector { x: T::lit(0.3141), y: T::lit(-0.2718), z: T::lit(0.1414) };
        BlochVector { x: sum.x + tilt.x, y: sum.y + tilt.y, z: sum.z + tilt.z }.normalized()
    } else {
        vertices[0]
    };
    let mut total = T::zero();
    for i in 0..n {
        total += triangle_solid_angle(&apex, &vertices[i], &vertices[(i + 1) % n]);
    }
    Ok(total)
}

/// Curvature `K = δθ/δA` at `point` from a centered `δ × δ` plaquette.
///
/// `δθ` is the rotation angle of a parallel-transported tangent vector,
/// twice the plaquette's Pancharatnam phase (a qubit acquires half the
/// solid angle), and `δA` uses the family's area element. The Bloch sphere
/// therefore has `K = 1`.
pub fn plaquette_curvature<T: Scalar, F: TwoParamFamily<T> + ?Sized>(family: &F, point: (T, T), delta: T) -> Result<T> {
    let phase = plaquette_phase(family, point, delta)?;
    let area = delta * delta * family.area_element(point.0, point.1);
    if area.abs() <= T::zero() {
        return Err(Error::Domain("zero area element at plaquette center".into()));
    }
    Ok(T::lit(2.0) * phase.radians() / area)
}

/// Pancharatnam phase of the counterclockwise plaquette centered at `point`.
pub fn plaquette_phase<T: Scalar, F: TwoParamFamily<T> + ?Sized>(
    family: &F,
    point: (T, T),
    delta: T,
) -> Result<PhaseValue<T>> {
    let h = delta / T::lit(2.0);
    let (s, t) = point;
    let corners = [
        family.state(s - h, t - h),
        family.state(s + h, t - h),
        family.state(s + h, t + h),
        family.state(s - h, t + h),
    ];
    pancharatnam_phase(&corners)
}
