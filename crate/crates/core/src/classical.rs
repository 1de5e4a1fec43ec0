//! Foucault pendulum in the small-oscillation, slowly rotating frame.
//!
//! With `c = Ω cos θ` the equations of motion are
//! `ẍ − 2c ẏ + ω²x = 0`, `ÿ + 2c ẋ + ω²y = 0`, or `z̈ + 2ic ż + ω²z = 0`
//! for `z = x + iy`. The centrifugal `Ω²` term is dropped. The swing plane
//! turns clockwise at rate `c`, so over one sidereal day it turns by
//! `2π cos θ`; modulo `2π` that equals the geometric phase `2π(1 − cos θ)`
//! up to sign.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{cis, Scalar};

/// Physical parameters. The mass drops out of the equations of motion and
/// is carried only for bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumParams<T: Scalar> {
    pub mass: T,
    /// Natural frequency `ω` (rad/s).
    pub omega: T,
    /// Earth rotation rate `Ω` (rad/s).
    pub earth_rate: T,
    /// Colatitude `θ` (rad), `0` at the north pole.
    pub colatitude: T,
}

impl<T: Scalar> PendulumParams<T> {
    pub fn new(mass: T, omega: T, earth_rate: T, colatitude: T) -> Result<Self> {
        if !(omega > T::zero()) {
            return Err(Error::Domain("natural frequency must be positive".into()));
        }
        if earth_rate < T::zero() {
            return Err(Error::Domain("rotation rate must be non-negative".into()));
        }
        if colatitude < T::zero() || colatitude > T::pi() {
            return Err(Error::Domain("colatitude must lie in [0, π]".into()));
        }
        Ok(Self { mass, omega, earth_rate, colatitude })
    }

    /// `Ω cos θ`, the precession rate.
    pub fn coriolis(&self) -> T {
        self.earth_rate * self.colatitude.cos()
    }

    /// `ω / Ω`; the closed form is only meaningful when this is large
    /// (at least 10).
    pub fn adiabatic_ratio(&self) -> T {
        if self.earth_rate == T::zero() {
            T::max_value().unwrap_or_else(|| T::lit(f64::MAX))
        } else {
            self.omega / self.earth_rate
        }
    }

    /// One rotation period `2π/Ω`.
    pub fn sidereal_period(&self) -> Option<T> {
        (self.earth_rate > T::zero()).then(|| T::two_pi() / self.earth_rate)
    }
}

/// How the bob is released at `x = x0, y = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Launch {
    /// Zero velocity: a planar swing.
    #[default]
    FromRest,
    /// `ż(0) = −i(ω + Ω cos θ) x0`, the single circular mode that the
    /// product form `x0 e^{−iΩcosθ t} e^{−iωt}` describes.
    CoRotating,
}

/// Uniformly sampled `(t, x, y, ẋ, ẏ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PendulumTrajectory<T: Scalar> {
    pub params: PendulumParams<T>,
    pub t: Vec<T>,
    pub x: Vec<T>,
    pub y: Vec<T>,
    pub vx: Vec<T>,
    pub vy: Vec<T>,
}

impl<T: Scalar> PendulumTrajectory<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn z(&self, k: usize) -> Complex<T> {
        Complex::new(self.x[k], self.y[k])
    }

    /// `½|v|² + ½ω²|r|²` at sample `k`.
    pub fn energy(&self, k: usize) -> T {
        let half = T::lit(0.5);
        let w2 = self.params.omega * self.params.omega;
        half * (self.vx[k] * self.vx[k] + self.vy[k] * self.vy[k]) + half * w2 * (self.x[k] * self.x[k] + self.y[k] * self.y[k])
    }

    /// Largest relative energy deviation from the initial value.
    pub fn energy_drift(&self) -> T {
        let e0 = self.energy(0);
        if e0 == T::zero() {
            return T::zero();
        }
        (0..self.len()).map(|k| ((self.energy(k) - e0) / e0).abs()).fold(T::zero(), |a, b| a.max(b))
    }
}

/// Integrates from rest at `x0` for `duration` with `steps` implicit
/// midpoint steps.
pub fn foucault_integrate<T: Scalar>(p: &PendulumParams<T>, x0: T, duration: T, steps: usize) -> Result<PendulumTrajectory<T>> {
    foucault_integrate_with(p, x0, duration, steps, Launch::FromRest)
}

/// Implicit midpoint integration of the linear equations of motion.
///
/// The scheme is symplectic and time-reversible and preserves the quadratic
/// energy exactly up to rounding.
pub fn foucault_integrate_with<T: Scalar>(
    p: &PendulumParams<T>,
    x0: T,
    duration: T,
    steps: usize,
    launch: Launch,
) -> Result<PendulumTrajectory<T>> {
    if !(duration > T::zero()) || steps == 0 {
        return Err(Error::Input("duration and step count must be positive".into()));
    }
    let h = duration / T::lit(steps as f64);
    let omega_dt = p.omega * h;
    if omega_dt >= T::lit(0.1) {
        return Err(Error::Resolution { omega_dt: omega_dt.as_f64() });
    }
    let c = p.coriolis();
    let w2 = p.omega * p.omega;
    let two = T::lit(2.0);
    #[rustfmt::skip]
    let a = Matrix4::new(
        T::zero(), T::zero(), T::one(), T::zero(),
        T::zero(), T::zero(), T::zero(), T::one(),
        -w2, T::zero(), T::zero(), two * c,
        T::zero(), -w2, -two * c, T::zero(),
    );
    let half = a * (h / two);
    let step = (Matrix4::identity() - half)
        .try_inverse()
        .ok_or_else(|| Error::Validation("singular midpoint system".into()))?
        * (Matrix4::identity() + half);

    let mut u = match launch {
        Launch::FromRest => Vector4::new(x0, T::zero(), T::zero(), T::zero()),
        Launch::CoRotating => Vector4::new(x0, T::zero(), T::zero(), -(p.omega + c) * x0),
    };
    let mut out = PendulumTrajectory {
        params: *p,
        t: Vec::with_capacity(steps + 1),
        x: Vec::with_capacity(steps + 1),
        y: Vec::with_capacity(steps + 1),
        vx: Vec::with_capacity(steps + 1),
        vy: Vec::with_capacity(steps + 1),
    };
    for k in 0..=steps {
        out.t.push(h * T::lit(k as f64));
        out.x.push(u[0]);
        out.y.push(u[1]);
        out.vx.push(u[2]);
        out.vy.push(u[3]);
        u = step * u;
    }
    Ok(out)
}

/// `x0 e^{−iΩcosθ t} e^{−iωt}`, valid when `ω ≫ Ω`.
pub fn foucault_closed_form<T: Scalar>(p: &PendulumParams<T>, x0: T, t: T) -> Complex<T> {
    cis(-(p.coriolis() + p.omega) * t) * x0
}

/// Swing-plane rotation per sidereal day, `2π cos θ` (clockwise).
pub fn precession_per_day<T: Scalar>(colatitude: T) -> T {
    T::two_pi() * colatitude.cos()
}

/// Geometric phase per sidereal day, `2π(1 − cos θ)`; differs from
/// [`precession_per_day`] by `2π` up to orientation.
pub fn geometric_phase_per_day<T: Scalar>(colatitude: T) -> T {
    T::two_pi() * (T::one() - colatitude.cos())
}

/// Clockwise rotation of the swing plane over the trajectory, extracted as
/// the fitted rate of the principal axis of sliding two-period windows of
/// `(x, y)` times the trajectory span.
pub fn precession_angle<T: Scalar>(traj: &PendulumTrajectory<T>) -> Result<T> {
    let (centers, angles) = swing_plane_angles(traj)?;
    let slope = least_squares_slope(&centers, &angles);
    let span = traj.t[traj.len() - 1] - traj.t[0];
    Ok(-slope * span)
}

/// Window centers and unwrapped swing-plane angles (mod π) of a trajectory.
pub fn swing_plane_angles<T: Scalar>(traj: &PendulumTrajectory<T>) -> Result<(Vec<T>, Vec<T>)> {
    let n = traj.len();
    if n < 3 {
        return Err(Error::Input("trajectory too short".into()));
    }
    let dt = traj.t[1] - traj.t[0];
    let period = T::two_pi() / traj.params.omega;
    let span = traj.t[n - 1] - traj.t[0];
    if span < period * T::lit(10.0) * (T::one() - T::lit(1e-9)) {
        return Err(Error::Input("trajectory must span at least 10 swing periods".into()));
    }
    let per_period = (period / dt).round().to_usize().unwrap_or(1).max(1);
    let window = 2 * per_period;
    let stride = (per_period / 4).max(1);
    let mut centers = Vec::new();
    let mut angles: Vec<T> = Vec::new();
    let mut start = 0;
    while start + window < n {
        let (mut sxx, mut syy, mut sxy) = (T::zero(), T::zero(), T::zero());
        for k in start..start + window {
            sxx += traj.x[k] * traj.x[k];
            syy += traj.y[k] * traj.y[k];
            sxy += traj.x[k] * traj.y[k];
        }
        let mut alpha = (T::lit(2.0) * sxy).atan2(sxx - syy) / T::lit(2.0);
        if let Some(&prev) = angles.last() {
            while alpha - prev > T::frac_pi_2() {
                alpha -= T::pi();
            }
            while alpha - prev < -T::frac_pi_2() {
                alpha += T::pi();
            }
        }
        angles.push(alpha);
        centers.push((traj.t[start] + traj.t[start + window - 1]) / T::lit(2.0));
        start += stride;
    }
    Ok((centers, angles))
}

fn least_squares_slope<T: Scalar>(xs: &[T], ys: &[T]) -> T {
    let n = T::lit(xs.len() as f64);
    let mx = xs.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ys.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mut sxy, mut sxx) = (T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    if sxx == T::zero() {
        T::zero()
    } else {
        sxy / sxx
    }
}

/// Slope and intercept of `rates` against `cos θ` over the given latitudes.
pub fn precession_rate_fit<T: Scalar>(colatitudes: &[T], rates: &[T]) -> (T, T) {
    let cos: Vec<T> = colatitudes.iter().map(|t| t.cos()).collect();
    let slope = least_squares_slope(&cos, rates);
    let n = T::lit(cos.len() as f64);
    let mx = cos.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = rates.iter().fold(T::zero(), |a, &b| a + b) / n;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6, PI};

    const W: f64 = 2.0 * PI;

    fn params(earth: f64, theta: f64) -> PendulumParams<f64> {
        PendulumParams::new(1.0, W, earth, theta).unwrap()
    }

    fn steps_for(duration: f64) -> usize {
        (duration * W / 0.01).ceil() as usize
    }

    #[test]
    fn no_rotation_keeps_plane() {
        let traj = foucault_integrate(&params(0.0, 1.0), 0.1, 20.0, steps_for(20.0)).unwrap();
        assert!(traj.y.iter().all(|y| y.abs() < 1e-15));
        assert!(precession_angle(&traj).unwrap().abs() < 1e-6);
    }

    #[test]
    fn zero_amplitude_stays_zero() {
        let traj = foucault_integrate(&params(0.1, 1.0), 0.0, 20.0, 20_000).unwrap();
        assert!(traj.x.iter().chain(&traj.y).all(|v| *v == 0.0));
    }

    #[test]
    fn coarse_steps_rejected() {
        assert!(matches!(foucault_integrate(&params(0.1, 1.0), 1.0, 10.0, 100), Err(Error::Resolution { .. })));
    }

    #[test]
    fn energy_is_conserved() {
        let traj = foucault_integrate(&params(0.3, 0.5), 0.2, 50.0, 5_000).unwrap();
        assert!(traj.energy_drift() < 1e-3 * 1e-6);
    }

    #[test]
    fn precession_rate_mid_latitude() {
        let p = params(0.02 * W, FRAC_PI_3);
        let traj = foucault_integrate(&p, 0.1, 50.0, steps_for(50.0)).unwrap();
        let rate = precession_angle(&traj).unwrap() / 50.0;
        assert!((rate / p.coriolis() - 1.0).abs() < 0.01, "rate {rate}");
    }

    #[test]
    fn equator_and_pole() {
        let eq = foucault_integrate(&params(0.02 * W, FRAC_PI_2), 0.1, 50.0, steps_for(50.0)).unwrap();
        assert!(precession_angle(&eq).unwrap().abs() < 1e-3);
        let p = params(0.02 * W, 0.0);
        let day = p.sidereal_period().unwrap();
        let pole = foucault_integrate(&p, 0.1, day, steps_for(day)).unwrap();
        assert!((precession_angle(&pole).unwrap() - 2.0 * PI).abs() < 0.02 * 2.0 * PI);
    }

    #[test]
    fn closed_form_examples() {
        let p = params(0.02 * W, FRAC_PI_3);
        assert_eq!(foucault_closed_form(&p, 0.3, 0.0), Complex::new(0.3, 0.0));
        let still = params(0.0, FRAC_PI_3);
        assert!((foucault_closed_form(&still, 1.0, 0.7) - cis(-W * 0.7)).norm() < 1e-15);
        // One sidereal day with ω a multiple of Ω: only the geometric factor remains.
        let day = p.sidereal_period().unwrap();
        let z = foucault_closed_form(&p, 1.0, day);
        let geometric = -2.0 * PI * (1.0 - FRAC_PI_3.cos());
        assert!((z - cis(geometric)).norm() < 1e-9);
        assert!(((precession_per_day(FRAC_PI_3) + geometric_phase_per_day(FRAC_PI_3)) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn numeric_tracks_closed_form() {
        let p = params(W / 50.0, FRAC_PI_6);
        let duration = 10.0;
        let traj = foucault_integrate_with(&p, 0.1, duration, steps_for(duration), Launch::CoRotating).unwrap();
        let worst = (0..traj.len())
            .map(|k| (traj.z(k) - foucault_closed_form(&p, 0.1, traj.t[k])).norm() / 0.1)
            .fold(0.0, f64::max);
        assert!(worst < 0.05, "worst {worst}");
    }

    #[test]
    fn rate_linear_in_cos() {
        let earth = 0.02 * W;
        let thetas = [0.0, FRAC_PI_6, FRAC_PI_3, FRAC_PI_2];
        let rates: Vec<f64> = thetas
            .iter()
            .map(|&th| {
                let traj = foucault_integrate(&params(earth, th), 0.1, 50.0, steps_for(50.0)).unwrap();
                precession_angle(&traj).unwrap() / 50.0
            })
            .collect();
        let (slope, intercept) = precession_rate_fit(&thetas, &rates);
        assert!((slope / earth - 1.0).abs() < 0.02);
        assert!(intercept.abs() < 1e-3 * earth);
    }

    #[test]
    fn mass_drops_out() {
        let a = PendulumParams::new(1.0, W, 0.1, 1.0).unwrap();
        let b = PendulumParams { mass: 10.0, ..a };
        let ta = foucault_integrate(&a, 0.1, 10.0, 10_000).unwrap();
        let tb = foucault_integrate(&b, 0.1, 10.0, 10_000).unwrap();
        assert_eq!(ta.x, tb.x);
        assert_eq!(ta.y, tb.y);
    }

    #[test]
    fn short_trajectory_rejected() {
        let traj = foucault_integrate(&params(0.1, 1.0), 0.1, 5.0, 5_000).unwrap();
        assert!(matches!(precession_angle(&traj), Err(Error::Input(_))));
    }
}
