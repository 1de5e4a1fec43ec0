//! Compiling target phases into control loops, and their noise tolerance.

use argmin::core::{CostFunction, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::holonomy::{usb_gamma_closed_form, usb_gamma_polygon, usb_holonomy, PulseSchedule};
use crate::qcore::BlochVector;
use crate::scalar::Scalar;

type Generator<T> = Box<dyn Fn(&[f64]) -> Result<PulseSchedule<'static, T>> + Send + Sync>;

/// Box-bounded parameterization of closed pulse schedules.
pub struct PulseFamily<T: Scalar> {
    bounds: Vec<(f64, f64)>,
    generator: Generator<T>,
    description: String,
}

impl<T: Scalar> PulseFamily<T> {
    pub fn new(
        bounds: Vec<(f64, f64)>,
        generator: impl Fn(&[f64]) -> Result<PulseSchedule<'static, T>> + Send + Sync + 'static,
        description: impl Into<String>,
    ) -> Result<Self> {
        if bounds.is_empty() || bounds.iter().any(|&(lo, hi)| !(lo <= hi)) {
            return Err(Error::Input("family bounds must be non-empty intervals".into()));
        }
        Ok(Self { bounds, generator: Box::new(generator), description: description.into() })
    }

    /// Circles in the `(P, S)` plane at fixed `Q`, parameterized by the
    /// center `(P₀, S₀)` and a signed radius fraction `f`: the radius is
    /// `|f|·√(P₀² + S₀²)`, so the loop never reaches `P = S = 0`, and a
    /// negative `f` runs the circle clockwise.
    pub fn circular(q: T) -> Self {
        let generator = move |p: &[f64]| {
            let (p0, s0, f) = (T::lit(p[0]), T::lit(p[1]), T::lit(p[2]));
            let r = f * (p0 * p0 + s0 * s0).sqrt();
            let w = T::two_pi();
            PulseSchedule::new(
                move |t| p0 + r.abs() * (w * t).cos(),
                move |_| q,
                move |t| s0 + r * (w * t).sin(),
                T::one(),
                true,
            )
        };
        Self {
            bounds: vec![(0.2, 4.0), (0.2, 4.0), (-0.9, 0.9)],
            generator: Box::new(generator),
            description: format!("circle in (P, S) at Q = {}; params (P0, S0, radius fraction)", q.as_f64()),
        }
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(&self.bounds).all(|(x, &(lo, hi))| *x >= lo && *x <= hi)
    }

    pub fn schedule(&self, p: &[f64]) -> Result<PulseSchedule<'static, T>> {
        if !self.contains(p) {
            return Err(Error::Domain("parameters outside the family box".into()));
        }
        (self.generator)(p)
    }
}

/// Quadrature steps used for objective evaluations.
pub const OBJECTIVE_STEPS: usize = 2000;

/// `γ_f` of the family member at `p`.
pub fn evaluate_loop<T: Scalar>(family: &PulseFamily<T>, p: &[f64]) -> Result<T> {
    usb_gamma_closed_form(&family.schedule(p)?, OBJECTIVE_STEPS)
}

/// Optimizer knobs.
#[derive(Debug, Clone, Copy)]
pub struct CompileSettings {
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: u64,
    /// Residual below which the result counts as converged.
    pub tol: f64,
    /// Steps of the independent holonomy run.
    pub verify_steps: usize,
    /// Grid points per axis of the reachability scan.
    pub grid: usize,
}

impl Default for CompileSettings {
    fn default() -> Self {
        Self { seed: 0x5eed, restarts: 8, max_iters: 400, tol: 1e-6, verify_steps: 100_000, grid: 7 }
    }
}

/// Outcome of [`compile_rotation`].
#[derive(Debug, Clone, PartialEq)]
pub struct CompileResult<T: Scalar> {
    pub params: Vec<f64>,
    pub achieved: T,
    pub target: T,
    pub residual: T,
    pub converged: bool,
    /// Rotation angle of the path-ordered holonomy at `params`.
    pub verification: T,
    /// Smallest and largest values seen on the reachability grid.
    pub reachable: (T, T),
    pub seed: u64,
}

struct Objective<'a, T: Scalar> {
    family: &'a PulseFamily<T>,
    target: f64,
}

impl<T: Scalar> Objective<'_, T> {
    fn clamp(&self, p: &[f64]) -> (Vec<f64>, f64) {
        let mut excess = 0.0;
        let q = p
            .iter()
            .zip(&self.family.bounds)
            .map(|(&x, &(lo, hi))| {
                let c = x.clamp(lo, hi);
                excess += (x - c).abs();
                c
            })
            .collect();
        (q, excess)
    }
}

impl<T: Scalar> CostFunction for Objective<'_, T> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, argmin::core::Error> {
        let (q, excess) = self.clamp(p);
        let value = match evaluate_loop(self.family, &q) {
            Ok(g) => (g.as_f64() - self.target).powi(2),
            Err(_) => 1e6,
        };
        Ok(value + excess * excess * 1e3)
    }
}

fn grid_points(bounds: &[(f64, f64)], n: usize) -> Vec<Vec<f64>> {
    let n = n.max(2);
    let mut out = vec![Vec::new()];
    for &(lo, hi) in bounds {
        let axis: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        out = out
            .into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&x| {
                    let mut v = prefix.clone();
                    v.push(x);
                    v
                })
            })
            .collect();
    }
    out
}

/// Searches the family for a loop with holonomy angle `target`.
///
/// A coarse grid scan bounds the reachable range and seeds the first
/// simplex; further restarts start from seeded random points. The best
/// point is re-checked with the path-ordered holonomy. Missing the
/// tolerance is reported through `converged`, not as an error.
pub fn compile_rotation<T: Scalar>(target: T, family: &PulseFamily<T>, settings: &CompileSettings) -> Result<CompileResult<T>> {
    let target_f = target.as_f64();
    let grid: Vec<(Vec<f64>, f64)> = grid_points(family.bounds(), settings.grid)
        .into_par_iter()
        .filter_map(|p| evaluate_loop(family, &p).ok().map(|g| (p, g.as_f64())))
        .collect();
    if grid.is_empty() {
        return Err(Error::Domain("no valid loop in the family box".into()));
    }
    let lo = grid.iter().map(|g| g.1).fold(f64::INFINITY, f64::min);
    let hi = grid.iter().map(|g| g.1).fold(f64::NEG_INFINITY, f64::max);
    let best_grid = grid
        .iter()
        .min_by(|a, b| (a.1 - target_f).abs().total_cmp(&(b.1 - target_f).abs()))
        .map(|g| g.0.clone())
        .unwrap_or_default();

    let mut starts = vec![best_grid];
    for r in 0..settings.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
        rng.set_stream(r as u64 + 1);
        starts.push(family.bounds().iter().map(|&(lo, hi)| rng.random_range(lo..=hi)).collect());
    }

    let runs: Vec<(Vec<f64>, f64)> = starts
        .into_par_iter()
        .map(|start| run_simplex(family, target_f, start, settings.max_iters))
        .collect();
    let (params, _) = runs
        .into_iter()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one start");

    let achieved = evaluate_loop(family, &params)?;
    let residual = (achieved - target).abs();
    let verification = usb_holonomy(&family.schedule(&params)?, settings.verify_steps)?
        .rotation_angle()
        .expect("dark subspace is two-dimensional");
    let gap = (verification - achieved).abs();
    if gap >= T::lit(1e-3) {
        return Err(Error::Synthesis { measured: verification.as_f64(), target: achieved.as_f64(), deviation: gap.as_f64() });
    }
    Ok(CompileResult {
        params,
        achieved,
        target,
        residual,
        converged: residual < T::lit(settings.tol),
        verification,
        reachable: (T::lit(lo), T::lit(hi)),
        seed: settings.seed,
    })
}

fn run_simplex<T: Scalar>(family: &PulseFamily<T>, target: f64, start: Vec<f64>, max_iters: u64) -> (Vec<f64>, f64) {
    let objective = Objective { family, target };
    let start_cost = objective.cost(&start).unwrap_or(f64::INFINITY);
    if start_cost == 0.0 {
        return (start, 0.0);
    }
    let mut simplex = vec![start.clone()];
    for (i, &(lo, hi)) in family.bounds().iter().enumerate() {
        let mut v = start.clone();
        let step = 0.1 * (hi - lo);
        v[i] = if v[i] + step <= hi { v[i] + step } else { v[i] - step };
        simplex.push(v);
    }
    let fallback = (start.clone(), start_cost);
    let Ok(solver) = NelderMead::new(simplex).with_sd_tolerance(1e-20) else {
        return fallback;
    };
    match Executor::new(objective, solver).configure(|s| s.max_iters(max_iters)).run() {
        Ok(res) => {
            let state = res.state();
            match state.get_best_param() {
                Some(p) => {
                    let (clamped, _) = Objective { family, target }.clamp(p);
                    let cost = Objective { family, target }.cost(&clamped).unwrap_or(f64::INFINITY);
                    if cost <= start_cost {
                        (clamped, cost)
                    } else {
                        fallback
                    }
                }
                None => fallback,
            }
        }
        Err(_) => fallback,
    }
}

/// Geodesic polygon whose oriented solid angle is `omega`: apex at the
/// north pole and an equatorial arc of azimuthal width `omega`, split
/// into pieces of at most `π/2`.
pub fn compile_bloch_loop<T: Scalar>(omega: T) -> Result<Vec<BlochVector<T>>> {
    if !(omega.abs() < T::two_pi()) {
        return Err(Error::Domain("target solid angle must satisfy |Ω| < 2π".into()));
    }
    Ok(bloch_sector_loop(omega))
}

/// [`compile_bloch_loop`] without the range check; `|width| = 2π` yields
/// the full hemisphere boundary.
pub(crate) fn bloch_sector_loop<T: Scalar>(width: T) -> Vec<BlochVector<T>> {
    let north = BlochVector { x: T::zero(), y: T::zero(), z: T::one() };
    let pieces = (width.abs() / T::frac_pi_2()).ceil().to_usize().unwrap_or(1).max(1);
    let mut out = vec![north];
    for i in 0..=pieces {
        let phi = width * T::lit(i as f64) / T::lit(pieces as f64);
        out.push(BlochVector { x: phi.cos(), y: phi.sin(), z: T::zero() });
    }
    out
}

/// Monte-Carlo summary of phase errors under control noise.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport<T: Scalar> {
    pub sigmas: Vec<T>,
    /// Mean `|Δγ_f|` per level.
    pub mean_error: Vec<T>,
    pub std_error: Vec<T>,
    /// Trials per level that hit the `P = S = 0` singularity.
    pub singular: Vec<usize>,
    /// Levels whose singular fraction stayed below 1%.
    pub valid: Vec<bool>,
    /// Least-squares slope of `ln(mean_error)` against `ln σ` over valid,
    /// nonzero levels.
    pub slope: Option<T>,
    pub trials: usize,
    pub samples: usize,
    pub seed: u64,
}

/// Perturbs `samples + 1` control samples of a closed schedule with
/// independent Gaussian noise of standard deviation `σ·sin(πk/samples)`
/// on `P`, `Q` and `S` (zero at both ends, so the loop stays closed),
/// recomputes `γ_f` along the noisy polygon, and collects the deviation
/// from the noiseless value.
///
/// Each trial draws from its own ChaCha stream derived from `seed`, so
/// results do not depend on thread scheduling.
pub fn noise_robustness<T: Scalar>(
    schedule: &PulseSchedule<'_, T>,
    sigmas: &[T],
    trials: usize,
    samples: usize,
    seed: u64,
) -> Result<NoiseReport<T>> {
    if trials < 100 {
        return Err(Error::Input("at least 100 trials per level are required".into()));
    }
    if samples < 8 {
        return Err(Error::Input("at least 8 samples are required".into()));
    }
    if !schedule.is_closed() {
        return Err(Error::OpenPath);
    }
    let base: Vec<(T, T, T)> = (0..=samples)
        .map(|k| schedule.couplings(schedule.duration() * T::lit(k as f64) / T::lit(samples as f64)))
        .collect();
    let scale = loop_radius(&base);
    if sigmas.iter().any(|&s| s < T::zero() || s >= T::lit(0.1) * scale) {
        return Err(Error::Domain(format!("σ must lie in [0, {}) for this loop", 0.1 * scale.as_f64())));
    }
    let floor = schedule.gap_floor();
    let reference = usb_gamma_polygon(&base, floor)?;

    let mut report = NoiseReport {
        sigmas: sigmas.to_vec(),
        mean_error: Vec::new(),
        std_error: Vec::new(),
        singular: Vec::new(),
        valid: Vec::new(),
        slope: None,
        trials,
        samples,
        seed,
    };
    for (level, &sigma) in sigmas.iter().enumerate() {
        let errors: Vec<Option<T>> = (0..trials)
            .into_par_iter()
            .map(|trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((level * trials + trial) as u64);
                let noisy: Vec<(T, T, T)> = base
                    .iter()
                    .enumerate()
                    .map(|(k, &(p, q, s))| {
                        let w = sigma * (T::pi() * T::lit(k as f64) / T::lit(samples as f64)).sin();
                        let mut draw = || w * T::lit(StandardNormal.sample(&mut rng));
                        (p + draw(), q + draw(), s + draw())
                    })
                    .collect();
                usb_gamma_polygon(&noisy, floor).ok().map(|g| (g - reference).abs())
            })
            .collect();
        let ok: Vec<T> = errors.iter().flatten().copied().collect();
        let singular = trials - ok.len();
        let n = T::lit(ok.len().max(1) as f64);
        let mean = ok.iter().fold(T::zero(), |a, &b| a + b) / n;
        let var = ok.iter().fold(T::zero(), |a, &b| a + (b - mean) * (b - mean)) / n;
        report.mean_error.push(mean);
        report.std_error.push(var.sqrt());
        report.singular.push(singular);
        report.valid.push((singular as f64) < 0.01 * trials as f64);
    }
    let pts: Vec<(f64, f64)> = (0..sigmas.len())
        .filter(|&i| report.valid[i] && sigmas[i] > T::zero() && report.mean_error[i] > T::zero())
        .map(|i| (sigmas[i].as_f64().ln(), report.mean_error[i].as_f64().ln()))
        .collect();
    if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        report.slope = Some(T::lit(sxy / sxx));
    }
    Ok(report)
}

/// Half the largest extent of the loop in the `(P, S)` plane.
fn loop_radius<T: Scalar>(samples: &[(T, T, T)]) -> T {
    let ext = |f: fn(&(T, T, T)) -> T| {
        let lo = samples.iter().map(f).fold(T::max_value().unwrap_or_else(|| T::lit(f64::MAX)), |a, b| a.min(b));
        let hi = samples.iter().map(f).fold(T::min_value().unwrap_or_else(|| T::lit(f64::MIN)), |a, b| a.max(b));
        hi - lo
    };
    ext(|s| s.0).max(ext(|s| s.2)) / T::lit(2.0)
}
