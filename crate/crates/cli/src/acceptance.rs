//! End-to-end checks with pinned tolerances and runtime budgets.
//!
//! Each check returns a [`Check`]; a check passes only if both its
//! numerical condition holds and it finished inside its budget.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};
use std::fmt;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use geophase::adiabatic::{berry_phase, spin_half_cone_experiment, EigenFrame};
use geophase::classical::{foucault_closed_form, foucault_integrate_with, precession_angle, precession_rate_fit, Launch, PendulumParams};
use geophase::compiler::{compile_rotation, noise_robustness, CompileSettings, PulseFamily};
use geophase::gates::{choi_fidelity, deutsch, deutsch_geometric, geometric_phase_gate, DeutschSettings, GeometricHadamard, OracleSpec, SpinTransportSettings};
use geophase::holonomy::{usb_full_evolution_check, usb_gamma_closed_form, usb_holonomy, PulseSchedule};
use geophase::interferometer::{chi_grid, extract_phase_visibility, fringe_scan, intensity, MzConfig};
use geophase::linalg::{expm_hermitian, trace};
use geophase::phase::{geodesic_loop, geometric_phase_integral, pancharatnam_phase, plaquette_curvature, BlochFamily};
use geophase::qcore::{BlochVector, DensityMatrix, PureState, UnitaryOp};
use geophase::scalar::phase_distance;
use geophase::{CMat, CVec};

#[derive(Debug, Clone)]
pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Duration,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "criterion {:>2} {} {}: {} [{:.2?} of {:?}]",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed,
            self.budget
        )
    }
}

fn timed(id: u8, name: &'static str, budget_s: u64, body: impl FnOnce() -> (bool, String)) -> Check {
    let start = Instant::now();
    let (ok, detail) = body();
    let elapsed = start.elapsed();
    let budget = Duration::from_secs(budget_s);
    Check { id, name, passed: ok && elapsed <= budget, detail, elapsed, budget }
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> PureState<f64> {
    loop {
        let v = CVec::from_fn(dim, |_, _| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        if v.norm() > 0.1 {
            return PureState::normalized(v).expect("nonzero");
        }
    }
}

fn random_unitary(rng: &mut ChaCha8Rng, dim: usize) -> UnitaryOp<f64> {
    let m = CMat::from_fn(dim, dim, |_, _| Complex64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)));
    let h = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
    UnitaryOp::new(expm_hermitian(&h, 1.0)).expect("exponential of a Hermitian matrix")
}

fn octant() -> Vec<PureState<f64>> {
    let s = FRAC_PI_4.cos();
    vec![
        PureState::basis(2, 0),
        PureState::new(CVec::from_vec(vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)])).expect("unit"),
        PureState::new(CVec::from_vec(vec![Complex64::new(s, 0.0), Complex64::new(0.0, s)])).expect("unit"),
    ]
}

pub fn octant_phase() -> Check {
    timed(1, "octant phase", 1, || {
        let states = octant();
        let discrete = pancharatnam_phase(&states).map(|p| p.radians());
        let dense = geodesic_loop(&states, 3334).and_then(|p| geometric_phase_integral(&p)).map(|l| l.phase.radians());
        match (discrete, dense) {
            (Ok(d), Ok(g)) => {
                let (e1, e2) = ((d - FRAC_PI_4).abs(), (g - FRAC_PI_4).abs());
                (e1 < 1e-12 && e2 < 1e-4, format!("|discrete - pi/4| = {e1:.2e} (< 1e-12), |dense - pi/4| = {e2:.2e} (< 1e-4)"))
            }
            (d, g) => (false, format!("error: {d:?} {g:?}")),
        }
    })
}

pub fn bloch_curvature(seed: u64) -> Check {
    timed(2, "Bloch curvature", 1, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let theta = rng.random_range(0.1..PI - 0.1);
            let phi = rng.random_range(0.0..TAU);
            match plaquette_curvature(&BlochFamily, (theta, phi), 1e-2) {
                Ok(k) => worst = worst.max((k - 1.0).abs()),
                Err(e) => return (false, format!("error at ({theta}, {phi}): {e}")),
            }
        }
        (worst < 1e-3, format!("max |K - 1| = {worst:.2e} over 20 points (< 1e-3)"))
    })
}

pub fn gauge_invariance(seed: u64) -> Check {
    timed(3, "gauge invariance", 5, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3);
        let states: Vec<_> = (0..5).map(|_| random_state(&mut rng, 3)).collect();
        let n = 64;
        let params: Vec<f64> = (0..n).map(|k| TAU * k as f64 / n as f64).collect();
        let cone: Vec<_> = params.iter().map(|p| BlochVector::from_angles(1.1, *p).to_state()).collect();
        let (base_p, frame) = match (pancharatnam_phase(&states), EigenFrame::from_states(params, &cone, true)) {
            (Ok(p), Ok(f)) => (p.radians(), f),
            (p, f) => return (false, format!("setup error: {:?} {:?}", p.err(), f.err())),
        };
        let base_b = match berry_phase(&frame, 0) {
            Ok(b) => b.radians(),
            Err(e) => return (false, format!("setup error: {e}")),
        };
        let (mut worst_p, mut worst_b): (f64, f64) = (0.0, 0.0);
        for _ in 0..1000 {
            let moved: Vec<_> = states.iter().map(|s| s.rephased(rng.random_range(-PI..PI))).collect();
            let alphas: Vec<f64> = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
            let regauged = frame.rephased(0, |k, _| alphas[k]);
            match (pancharatnam_phase(&moved), berry_phase(&regauged, 0)) {
                (Ok(p), Ok(b)) => {
                    worst_p = worst_p.max(phase_distance(p.radians(), base_p));
                    worst_b = worst_b.max(phase_distance(b.radians(), base_b));
                }
                (p, b) => return (false, format!("error: {:?} {:?}", p.err(), b.err())),
            }
        }
        (
            worst_p < 1e-9 && worst_b < 1e-9,
            format!("max drift: Pancharatnam {worst_p:.2e}, Berry {worst_b:.2e} over 1000 rephasings (< 1e-9)"),
        )
    })
}

pub fn adiabatic_three_way() -> Check {
    timed(4, "adiabatic three-way", 30, || {
        let run = |t: f64| spin_half_cone_experiment(FRAC_PI_2, t, 20_000, 1.0).map(|r| r.max_disagreement());
        match (run(200.0), run(400.0)) {
            (Ok(a), Ok(b)) => {
                let ratio = a / b;
                (a < 0.05 && ratio >= 2.0, format!("disagreement {a:.3e} at T=200 (< 0.05), {b:.3e} at T=400, ratio {ratio:.4} (>= 2)"))
            }
            (a, b) => (false, format!("error: {:?} {:?}", a.err(), b.err())),
        }
    })
}

pub fn interferometer_law(seed: u64) -> Check {
    timed(5, "interferometer law", 10, || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5);
        let (mut worst_i, mut worst_phase, mut worst_vis): (f64, f64, f64) = (0.0, 0.0, 0.0);
        for _ in 0..200 {
            let dim = rng.random_range(2..=4usize);
            let u = random_unitary(&mut rng, dim);
            let k = rng.random_range(1..=dim);
            let mixers: Vec<_> = (0..k).map(|_| random_state(&mut rng, dim)).collect();
            let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
            let total: f64 = w.iter().sum();
            let w: Vec<f64> = w.iter().map(|x| x / total).collect();
            let rho = DensityMatrix::mixture(&w, &mixers).expect("valid mixture");
            let tr: Complex64 = trace(&(u.entries() * rho.entries()));
            let cfg = MzConfig::new(0.0, &u, rho).expect("matching dimensions");
            let chis: Vec<f64> = chi_grid(rng.random_range(8..=64usize));
            for &chi in &chis {
                let law = 1.0 + tr.norm() * (chi - tr.arg()).cos();
                worst_i = worst_i.max((2.0 * intensity(&cfg.with_chi(chi)) - law).abs());
            }
            match fringe_scan(&cfg, &chis).and_then(|s| extract_phase_visibility(&s)) {
                Ok((phase, vis)) => {
                    worst_phase = worst_phase.max(phase.distance(tr.arg()));
                    worst_vis = worst_vis.max((vis - tr.norm()).abs());
                }
                Err(e) => return (false, format!("fit error: {e}")),
            }
        }
        (
            worst_i < 1e-9 && worst_phase < 1e-6 && worst_vis < 1e-6,
            format!("max deviations over 200 configs: intensity {worst_i:.2e} (< 1e-9), phase {worst_phase:.2e}, visibility {worst_vis:.2e} (< 1e-6)"),
        )
    })
}

pub fn standard_loop() -> PulseSchedule<'static, f64> {
    PulseSchedule::circle((2.0, 2.0), 0.5, 1.0, 1.0).expect("valid loop")
}

pub fn usb_three_way() -> Check {
    timed(6, "dark-state holonomy three-way", 60, || {
        let s = standard_loop();
        let result = (|| -> geophase::Result<(f64, f64, f64, f64)> {
            let gamma = usb_gamma_closed_form(&s, 100_000)?;
            let angle = usb_holonomy(&s, 100_000)?.rotation_angle().unwrap_or(f64::NAN);
            let rep = usb_full_evolution_check(&s, 500.0, 100_000)?;
            Ok((gamma, angle, rep.distance, rep.leakage))
        })();
        match result {
            Ok((g, a, d, l)) => {
                let e = (g - a).abs();
                (
                    e < 1e-4 && d < 0.02 && l < 1e-3,
                    format!("gamma {g:.6}, |gamma - holonomy| = {e:.2e} (< 1e-4), evolution distance {d:.2e} (< 0.02), leakage {l:.2e} (< 1e-3)"),
                )
            }
            Err(e) => (false, format!("error: {e}")),
        }
    })
}

pub fn gate_synthesis(seed: u64) -> Check {
    timed(7, "gate synthesis", 120, || {
        let settings = CompileSettings { seed, ..CompileSettings::default() };
        let compiled = compile_rotation(FRAC_PI_4, &PulseFamily::circular(1.0), &settings);
        let gate = geometric_phase_gate(PI, &SpinTransportSettings::default(), 0.05);
        match (compiled, gate) {
            (Ok(c), Ok(g)) => {
                let gap = (c.achieved - c.verification).abs();
                let z = UnitaryOp::<f64>::pauli_z();
                let overlap = trace(&(z.entries().adjoint() * &g.measured)).norm();
                let aligned = (g.measured.norm_squared() + 2.0 - 2.0 * overlap).max(0.0).sqrt();
                let infidelity = 1.0 - choi_fidelity(&g.measured, z.entries());
                (
                    c.residual < 1e-3 && gap < 1e-3 && aligned < 0.05,
                    format!(
                        "residual {:.2e} (< 1e-3), verification gap {gap:.2e} (< 1e-3), phase-aligned distance to Z {aligned:.2e} (< 0.05), infidelity {infidelity:.2e}",
                        c.residual
                    ),
                )
            }
            (c, g) => (false, format!("error: {:?} {:?}", c.err(), g.err())),
        }
    })
}

/// Durations of the geometric Deutsch study; each spin arc gets half.
pub const DEUTSCH_DURATIONS: [f64; 4] = [100.0, 200.0, 400.0, 800.0];

pub fn deutsch_check(seed: u64) -> Check {
    timed(8, "Deutsch", 120, || {
        let plain_ok = OracleSpec::all().iter().all(|o| {
            let r = deutsch::<f64>(o);
            r.classification == deutsch::<f64>(o).classification && (r.success_probability - 1.0).abs() <= 4.0 * f64::EPSILON && r.classification.to_string() == if o.is_constant() { "constant" } else { "varying" }
        });
        let settings = CompileSettings { seed, ..CompileSettings::default() };
        let compiled = match compile_rotation(FRAC_PI_4, &PulseFamily::circular(1.0), &settings) {
            Ok(c) => c,
            Err(e) => return (false, format!("compile error: {e}")),
        };
        let mut errors = vec![Vec::new(); 4];
        let mut classified = true;
        for d in DEUTSCH_DURATIONS {
            let had = match GeometricHadamard::from_compiled(compiled.clone(), d, (d * 100.0) as usize) {
                Ok(h) => h,
                Err(e) => return (false, format!("hadamard error at duration {d}: {e}")),
            };
            let transport = SpinTransportSettings { field: 1.0, arc_duration: d / 2.0, steps_per_arc: (d * 12.5) as usize };
            let ds = DeutschSettings { transport, ..DeutschSettings::default() };
            for (i, o) in OracleSpec::all().iter().enumerate() {
                match deutsch_geometric(o, &had, &ds) {
                    Ok(r) => {
                        classified &= r.classification == deutsch::<f64>(o).classification;
                        errors[i].push(1.0 - r.success_probability);
                    }
                    Err(e) => return (false, format!("error at duration {d}: {e}")),
                }
            }
        }
        let worst_base = errors.iter().map(|e| e[0]).fold(0.0, f64::max);
        let monotone = errors.iter().all(|e| e.windows(2).all(|w| w[1] < w[0]));
        let summary: Vec<String> = (0..DEUTSCH_DURATIONS.len())
            .map(|k| format!("{:.1e}", errors.iter().map(|e| e[k]).fold(0.0, f64::max)))
            .collect();
        (
            plain_ok && classified && worst_base < 0.01 && monotone,
            format!(
                "plain exact: {plain_ok}; geometric worst failure probability by duration {DEUTSCH_DURATIONS:?}: [{}] (< 0.01 and strictly decreasing per oracle: {monotone})",
                summary.join(", ")
            ),
        )
    })
}

pub fn foucault_check() -> Check {
    timed(9, "Foucault pendulum", 30, || {
        let omega = TAU;
        let earth = omega / 50.0;
        let thetas = [0.0, PI / 6.0, PI / 3.0, FRAC_PI_2];
        let steps = |t: f64| (t * omega / 0.01).ceil() as usize;
        let result = (|| -> geophase::Result<(f64, f64)> {
            let mut rates = Vec::new();
            for &th in &thetas {
                let p = PendulumParams::new(1.0, omega, earth, th)?;
                let traj = foucault_integrate_with(&p, 0.1, 50.0, steps(50.0), Launch::FromRest)?;
                rates.push(precession_angle(&traj)? / 50.0);
            }
            let (slope, _) = precession_rate_fit(&thetas, &rates);
            let p = PendulumParams::new(1.0, omega, earth, PI / 6.0)?;
            let traj = foucault_integrate_with(&p, 0.1, 10.0, steps(10.0), Launch::CoRotating)?;
            let worst = (0..traj.len())
                .map(|k| (traj.z(k) - foucault_closed_form(&p, 0.1, traj.t[k])).norm() / 0.1)
                .fold(0.0, f64::max);
            Ok(((slope / earth - 1.0).abs(), worst))
        })();
        match result {
            Ok((slope_err, worst)) => (
                slope_err < 0.02 && worst < 0.05,
                format!("slope error {slope_err:.2e} (< 2%), max |z - z_closed|/amplitude over 10 periods {worst:.2e} (< 5%)"),
            ),
            Err(e) => (false, format!("error: {e}")),
        }
    })
}

pub const NOISE_SIGMAS: [f64; 4] = [0.005, 0.01, 0.02, 0.04];

pub fn noise_check(seed: u64) -> Check {
    timed(10, "noise robustness", 120, || {
        let s = standard_loop();
        let run = || noise_robustness(&s, &NOISE_SIGMAS, 1000, 4000, seed);
        match (run(), run()) {
            (Ok(a), Ok(b)) => {
                let slope = a.slope.unwrap_or(f64::NAN);
                let same = a == b;
                (
                    (1.5..=2.5).contains(&slope) && same && a.valid.iter().all(|v| *v),
                    format!("slope {slope:.4} in [1.5, 2.5], reproducible: {same}, mean errors {:?}", a.mean_error.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>()),
                )
            }
            (a, b) => (false, format!("error: {:?} {:?}", a.err(), b.err())),
        }
    })
}

/// Criteria 1, 2, 3 and 5.
pub fn selftest(seed: u64) -> Vec<Check> {
    vec![octant_phase(), bloch_curvature(seed), gauge_invariance(seed), interferometer_law(seed)]
}
