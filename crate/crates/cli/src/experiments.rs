use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::Deserialize;

use geophase::adiabatic::spin_half_cone_experiment;
use geophase::classical::{foucault_closed_form, foucault_integrate_with, precession_angle, Launch, PendulumParams};
use geophase::compiler::{compile_rotation, noise_robustness, CompileSettings, PulseFamily};
use geophase::gates::{ab_phase, deutsch, deutsch_geometric, DeutschSettings, GeometricHadamard, OracleSpec, PhaseConvention, SpinTransportSettings};
use geophase::holonomy::{usb_full_evolution_check, usb_gamma_closed_form, usb_holonomy, PulseSchedule};
use geophase::interferometer::{chi_grid, extract_phase_visibility, fringe_scan, intensity, MzConfig};
use geophase::phase::{geodesic_loop, geometric_phase_integral, pancharatnam_phase, plaquette_curvature, solid_angle, BlochFamily, CoherentFamily};
use geophase::qcore::{bloch_from_density, density_from_bloch, BlochVector, DensityMatrix, PureState, UnitaryOp};
use geophase::{wrap_phase, CVec};

use crate::config::{decode, Spacing, Sweep};
use crate::error::CliError;
use crate::table::{Cell, Table};

/// One documented entry of an experiment's `[params]` table.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct ParamSpec {
    pub name: &'static str,
    pub kind: &'static str,
    pub default: Option<&'static str>,
    pub doc: &'static str,
}

const fn p(name: &'static str, kind: &'static str, default: Option<&'static str>, doc: &'static str) -> ParamSpec {
    ParamSpec { name, kind, default, doc }
}

type Runner = fn(&toml::Table, u64) -> Result<Table, CliError>;

pub struct Experiment {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [ParamSpec],
    /// A complete run file for this experiment.
    pub example: &'static str,
    run: Runner,
}

impl Experiment {
    pub fn run(&self, params: &toml::Table, seed: u64) -> Result<Table, CliError> {
        (self.run)(params, seed)
    }
}

impl std::fmt::Debug for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Experiment").field("name", &self.name).finish()
    }
}

static REGISTRY: [Experiment; 11] = [
    Experiment {
        name: "pancharatnam",
        summary: "Pancharatnam phase of a closed state sequence, with optional dense geodesic-loop integral",
        params: &[
            p("states", "array of states, each an array of [re, im] amplitudes", None, "state vectors (normalized on input); give this or bloch"),
            p("bloch", "array of [theta, phi]", None, "qubit states by Bloch angles; give this or states"),
            p("dense_samples", "integer", Some("0"), "total samples for the geodesic-loop integral; 0 skips it"),
        ],
        example: include_str!("../../../configs/pancharatnam.toml"),
        run: run_pancharatnam,
    },
    Experiment {
        name: "curvature",
        summary: "Plaquette curvature of a two-parameter state family",
        params: &[
            p("family", "\"bloch\" | \"coherent\"", Some("\"bloch\""), "state family"),
            p("u", "sweep", None, "first coordinate (theta, or Re alpha)"),
            p("v", "sweep", Some("0.3"), "second coordinate (phi, or Im alpha)"),
            p("delta", "float", Some("0.01"), "plaquette side"),
            p("cutoff", "integer", Some("40"), "Fock cutoff for the coherent family"),
        ],
        example: include_str!("../../../configs/curvature.toml"),
        run: run_curvature,
    },
    Experiment {
        name: "berry-cone",
        summary: "Spin-1/2 in a field sweeping a cone: connection, Pancharatnam and evolved geometric phases",
        params: &[
            p("theta", "sweep", None, "cone half-angle"),
            p("duration", "sweep", Some("200.0"), "sweep time T"),
            p("steps", "integer", Some("20000"), "time steps"),
            p("field", "float", Some("1.0"), "field strength B"),
        ],
        example: include_str!("../../../configs/berry-cone.toml"),
        run: run_berry_cone,
    },
    Experiment {
        name: "foucault",
        summary: "Foucault pendulum precession against colatitude",
        params: &[
            p("colatitude", "sweep", None, "colatitude theta"),
            p("omega", "float", Some("2 pi"), "pendulum angular frequency"),
            p("earth_rate", "float", Some("omega / 50"), "rotation rate of the frame"),
            p("mass", "float", Some("1.0"), "bob mass"),
            p("amplitude", "float", Some("0.1"), "initial displacement"),
            p("duration", "float", Some("50.0"), "integration time"),
            p("steps", "integer", Some("duration * omega / 0.01"), "integrator steps"),
            p("launch", "\"rest\" | \"co-rotating\"", Some("\"rest\""), "initial velocity; co-rotating also reports the closed-form deviation"),
        ],
        example: include_str!("../../../configs/foucault.toml"),
        run: run_foucault,
    },
    Experiment {
        name: "mzi",
        summary: "Mach-Zehnder fringe scan with a mixed internal state and the fitted phase and visibility",
        params: &[
            p("phases", "array of floats", None, "internal unitary diag(e^{i a_k})"),
            p("points", "integer", Some("64"), "number of chi samples over [0, 2 pi)"),
            p("bloch", "[x, y, z]", Some("maximally mixed"), "qubit input state as a Bloch vector"),
        ],
        example: include_str!("../../../configs/mzi.toml"),
        run: run_mzi,
    },
    Experiment {
        name: "usb-holonomy",
        summary: "Dark-subspace holonomy of a circular (P, S) loop: closed form, path-ordered product, full evolution",
        params: &[
            p("p0", "float", Some("2.0"), "loop center P"),
            p("s0", "float", Some("2.0"), "loop center S"),
            p("radius", "sweep", Some("0.5"), "loop radius"),
            p("q", "float", Some("1.0"), "constant coupling Q"),
            p("steps", "integer", Some("100000"), "loop samples"),
            p("evolve", "bool", Some("false"), "also integrate the four-level Schrodinger equation"),
            p("evolve_duration", "float", Some("500.0"), "traversal time for the evolution"),
            p("evolve_steps", "integer", Some("100000"), "evolution steps"),
        ],
        example: include_str!("../../../configs/usb-holonomy.toml"),
        run: run_usb,
    },
    Experiment {
        name: "compile-loop",
        summary: "Search circular pulse loops for a target holonomy angle",
        params: &[
            p("target", "sweep", None, "target rotation angle"),
            p("q", "float", Some("1.0"), "constant coupling Q"),
            p("restarts", "integer", Some("8"), "random simplex restarts"),
            p("max_iters", "integer", Some("400"), "iterations per simplex run"),
            p("tol", "float", Some("1e-6"), "residual counted as converged"),
            p("verify_steps", "integer", Some("100000"), "steps of the independent holonomy check"),
            p("grid", "integer", Some("7"), "grid points per parameter for the initial scan"),
        ],
        example: include_str!("../../../configs/compile-loop.toml"),
        run: run_compile,
    },
    Experiment {
        name: "noise-robustness",
        summary: "Mean holonomy-angle error under Gaussian control noise and its log-log slope",
        params: &[
            p("p0", "float", Some("2.0"), "loop center P"),
            p("s0", "float", Some("2.0"), "loop center S"),
            p("radius", "float", Some("0.5"), "loop radius"),
            p("q", "float", Some("1.0"), "constant coupling Q"),
            p("sigma", "sweep", None, "noise levels"),
            p("trials", "integer", Some("1000"), "trials per level (at least 100)"),
            p("samples", "integer", Some("4000"), "control samples per loop"),
        ],
        example: include_str!("../../../configs/noise-robustness.toml"),
        run: run_noise,
    },
    Experiment {
        name: "deutsch",
        summary: "Deutsch's algorithm on the four one-bit oracles",
        params: &[p("oracles", "array of [f0, f1]", Some("all four"), "oracles to run")],
        example: include_str!("../../../configs/deutsch.toml"),
        run: run_deutsch,
    },
    Experiment {
        name: "deutsch-geometric",
        summary: "Deutsch's algorithm with spin-loop oracle phases and holonomic Hadamards",
        params: &[
            p("duration", "sweep", Some("{ start = 100, stop = 800, count = 4, spacing = \"log\" }"), "loop traversal time for the Hadamard; each spin arc gets arc_fraction of it"),
            p("arc_fraction", "float", Some("0.5"), "spin arc time as a fraction of duration"),
            p("convention", "\"branch\" | \"relative\"", Some("\"branch\""), "how the oracle phase is attached"),
            p("field", "float", Some("1.0"), "spin field strength"),
            p("steps_per_time", "float", Some("100.0"), "evolution steps per unit time for the Hadamard"),
            p("arc_steps_per_time", "float", Some("25.0"), "evolution steps per unit time for spin arcs"),
            p("verify_steps", "integer", Some("100000"), "steps of the compile-time holonomy check"),
            p("oracles", "array of [f0, f1]", Some("all four"), "oracles to run"),
        ],
        example: include_str!("../../../configs/deutsch-geometric.toml"),
        run: run_deutsch_geometric,
    },
    Experiment {
        name: "ab-phase",
        summary: "Aharonov-Bohm factor e^{-i n flux}",
        params: &[
            p("flux", "sweep", None, "enclosed flux"),
            p("windings", "array of integers", Some("[1]"), "winding numbers"),
        ],
        example: include_str!("../../../configs/ab-phase.toml"),
        run: run_ab,
    },
];

pub fn registry() -> &'static [Experiment] {
    &REGISTRY
}

pub fn find(name: &str) -> Result<&'static Experiment, CliError> {
    REGISTRY.iter().find(|e| e.name == name).ok_or_else(|| {
        let names: Vec<_> = REGISTRY.iter().map(|e| e.name).collect();
        CliError::Schema(format!("unknown experiment '{name}'; `geophase list` shows the registry: {}", names.join(", ")))
    })
}

/// Runs `f` over the points in parallel and concatenates the row groups
/// in point order.
fn par_rows<X: Sync>(points: &[X], f: impl Fn(&X) -> Result<Vec<Vec<Cell>>, CliError> + Sync + Send) -> Result<Vec<Vec<Cell>>, CliError> {
    let groups: Vec<_> = points.par_iter().map(f).collect::<Result<_, _>>()?;
    Ok(groups.into_iter().flatten().collect())
}

fn filled(columns: &[&str], rows: Vec<Vec<Cell>>) -> Table {
    let mut t = Table::new(columns);
    for r in rows {
        t.push(r);
    }
    t
}

fn product(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|x| b.iter().map(move |y| (*x, *y))).collect()
}

fn oracle_list(spec: Option<Vec<[u8; 2]>>) -> Result<Vec<OracleSpec>, CliError> {
    match spec {
        None => Ok(OracleSpec::all().to_vec()),
        Some(v) => v
            .into_iter()
            .map(|[a, b]| OracleSpec::new(a, b).map_err(|_| CliError::Schema(format!("oracle [{a}, {b}] is not a pair of bits"))))
            .collect(),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PancharatnamParams {
    states: Option<Vec<Vec<[f64; 2]>>>,
    bloch: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    dense_samples: usize,
}

fn run_pancharatnam(params: &toml::Table, _seed: u64) -> Result<Table, CliError> {
    let p: PancharatnamParams = decode(params)?;
    let states: Vec<PureState<f64>> = match (p.states, p.bloch) {
        (Some(s), None) => s
            .into_iter()
            .map(|amps| {
                let v = CVec::from_iterator(amps.len(), amps.iter().map(|[re, im]| num_complex::Complex64::new(*re, *im)));
                PureState::normalized(v).map_err(|e| CliError::Schema(format!("states: {e}")))
            })
            .collect::<Result<_, _>>()?,
        (None, Some(b)) => b.iter().map(|[t, f]| BlochVector::from_angles(*t, *f).to_state()).collect(),
        _ => return Err(CliError::Schema("params: give exactly one of states or bloch".into())),
    };
    if states.len() < 2 {
        return Err(CliError::Schema("params: at least two states are needed".into()));
    }
    let phase = pancharatnam_phase(&states)?.radians();
    let mut columns = vec!["vertices", "dim", "phase"];
    let mut row: Vec<Cell> = vec![states.len().into(), states[0].dim().into(), phase.into()];
    if states[0].dim() == 2 {
        let v: Vec<_> = states.iter().map(|s| bloch_from_density(&DensityMatrix::from_pure(s))).collect::<Result<_, _>>()?;
        columns.push("solid_angle");
        row.push(solid_angle(&v)?.into());
    }
    if p.dense_samples > 0 {
        let per_edge = p.dense_samples.div_ceil(states.len()).max(1);
        let path = geodesic_loop(&states, per_edge)?;
        let dense = geometric_phase_integral(&path)?.phase.radians();
        columns.extend(["dense_samples", "dense_phase", "dense_error"]);
        row.extend([path.len().into(), dense.into(), wrap_phase(dense - phase).abs().into()]);
    }
    Ok(filled(&columns, vec![row]))
}

#[derive(Deserialize, Default, Clone, Copy, PartialEq)]
#[serde(rename_all = "lowercase")]
enum FamilyName {
    #[default]
    Bloch,
    Coherent,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurvatureParams {
    #[serde(default)]
    family: FamilyName,
    u: Sweep,
    #[serde(default = "default_v")]
    v: Sweep,
    #[serde(default = "default_delta")]
    delta: f64,
    #[serde(default = "default_cutoff")]
    cutoff: usize,
}

fn default_v() -> Sweep {
    Sweep::fixed(0.3)
}

fn default_delta() -> f64 {
    1e-2
}

fn default_cutoff() -> usize {
    40
}

fn run_curvature(params: &toml::Table, _seed: u64) -> Result<Table, CliError> {
    let p: CurvatureParams = decode(params)?;
    if !(p.delta > 0.0) {
        return Err(CliError::Schema("params: delta must be positive".into()));
    }
    let points = product(&p.u.values("u")?, &p.v.values("v")?);
    let rows = par_rows(&points, |&(u, v)| {
        let k = match p.family {
            FamilyName::Bloch => plaquette_curvature(&BlochFamily, (u, v), p.delta)?,
            FamilyName::Coherent => plaquette_curvature(&CoherentFamily { cutoff: p.cutoff }, (u, v), p.delta)?,
        };
        Ok(vec![vec![u.into(), v.into(), p.delta.into(), k.into()]])
    })?;
    let columns = match p.family {
        FamilyName::Bloch => ["theta", "phi", "delta", "curvature"],
        FamilyName::Coherent => ["re_alpha", "im_alpha", "delta", "curvature"],
    };
    Ok(filled(&columns, rows))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConeParams {
    theta: Sweep,
    #[serde(default = "default_cone_duration")]
    duration: Sweep,
    #[serde(default = "default_cone_steps")]
    steps: usize,
    #[serde(default = "one")]
    field: f64,
}

fn default_cone_duration() -> Sweep {
    Sweep::fixed(200.0)
}

fn default_cone_steps() -> usize {
    20_000
}

fn one() -> f64 {
    1.0
}

fn run_berry_cone(params: &toml::Table, _seed: u64) -> Result<Table, CliError> {
    let p: ConeParams = decode(params)?;
    let points = product(&p.theta.values("theta")?, &p.duration.values("duration")?);
    let rows = par_rows(&points, |&(theta, duration)| {
        let r = spin_half_cone_experiment(theta, duration, p.steps, p.field)?;
        Ok(vec![vec![
            theta.into(),
            duration.into(),
            r.berry_phase.into(),
            r.geometric_phase.into(),
            r.dynamical_phase.into(),
            r.pancharatnam_phase.into(),
            r.expected.into(),
            r.adiabatic_residual.into(),
            r.max_disagreement().into(),
        ]])
    })?;
    Ok(filled(
        &[
            "theta",
            "duration",
            "berry_phase",
            "geometric_phase",
            "dynamical_phase",
            "pancharatnam_phase",
            "expected",
            "adiabatic_residual",
            "max_disagreement",
        ],
        rows,
    ))
}

#[derive(Deserialize, Default, Clone, Copy, PartialEq)]
#[serde(rename_all = "kebab-case")]
enum LaunchName {
    #[default]
    Rest,
    CoRotating,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FoucaultParams {
    colatitude: Sweep,
    #[serde(default = "default_omega")]
    omega: f64,
    earth_rate: Option<f64>,
    #[serde(default = "one")]
    mass: f64,
    #[serde(default = "default_amplitude")]
    amplitude: f64,
    #[serde(default = "default_foucault_duration")]
    duration: f64,
    steps: Option<usize>,
    #[serde(default)]
    launch: LaunchName,
}

fn default_omega() -> f64 {
    TAU
}

fn default_amplitude() -> f64 {
    0.1
}

fn default_foucault_duration() -> f64 {
    50.0
}

fn run_foucault(params: &toml::Table, _seed: u64) -> Result<Table, CliError> {
    let p: FoucaultParams = decode(params)?;
    let earth = p.earth_rate.unwrap_or(p.omega / 50.0);
    let steps = p.steps.unwrap_or((p.duration * p.omega / 0.01).ceil() as usize);
    let launch = match p.launch {
        LaunchName::Rest => Launch::FromRest,
        LaunchName::CoRotating => Launch::CoRotating,
    };
    let thetas = p.colatitude.values("colatitude")?;
    let rows = par_rows(&thetas, |&theta| {
        let params = PendulumParams::new(p.mass, p.omega, earth, theta)?;
        let traj = foucault_integrate_with(&params, p.amplitude, p.duration, steps, launch)?;
        let angle = precession_angle(&traj)?;
        let expected = params.coriolis() * p.duration;
        let mut row: Vec<Cell> = vec![
            theta.into(),
            p.duration.into(),
            angle.into(),
            expected.into(),
            (angle / p.duration).into(),
            params.coriolis().into(),
            traj.energy_drift().into(),
        ];
        if launch == Launch::CoRotating {
            let worst = (0..traj.len())
                .map(|k| (traj.z(k) - foucault_closed_form(&params, p.amplitude, traj.t[k])).norm() / p.amplitude.abs())
                .fold(0.0, f64::max);
            row.push(worst.into());
        }
        Ok(vec![row])
    })?;
    let mut columns = vec!["colatitude", "duration", "precession", "expected_precession", "rate", "expected_rate", "energy_drift"];
    if launch == Launch::CoRotating {
        columns.push("closed_form_deviation");
    }
    Ok(filled(&columns, rows))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MziParams {
    phases: Vec<f64>,
    #[serde(default = "default_points")]
    points: usize,
    bloch: Option<[f64; 3]>,
}

fn default_points() -> usize {
    64
}

fn run_mzi(params: &toml::Table, _seed: u64) -> Result<Table, CliError> {
    let p: MziParams = decode(params)?;
    if p.phases.is_empty() {
        return Err(CliError::Schema("params: phases must not be empty".into()));
    }
    if p.points < 3 {
        return Err(CliError::Schema("params: points must be at least 3".into()));
    }
    let u = UnitaryOp::diagonal_phases(&p.phases);
    let rho = match p.bloch {
        None => DensityMatrix::maximally_mixed(p.phases.len()),
        Some([x, y, z]) => {
            if p.phases.len() != 2 {
                return Err(CliError::Schema("params: bloch needs exactly two phases".into()));
            }
            density_from_bloch(&BlochVector::new(x, y, z)?)?
        }
    };
    let cfg = MzConfig::new(0.0, &u, rho)?;
    let chis = chi_grid(p.points);
    let scan = fringe_scan(&cfg, &chis)?;
    let (phase, vis) = extract_phase_visibility(&scan)?;
    let tr = cfg.internal_trace();
    let rows = chis
        .iter()
        .map(|&chi| {
            vec![
                chi.into(),
                intensity(&cfg.with_chi(chi)).into(),
                phase.radians().into(),
                vis.into(),
                tr.arg().into(),
                tr.norm().into(),
            ]
        })
        .collect();
    Ok(filled(&["chi", "intensity", "fitted_phase", "visibility", "expected_phase", "expected_visibility"], rows))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UsbParams {
    #[serde(default = "two")]
    p0: f64,
    #[serde(default = "two")]
    s0: f64,
    #[serde(default = "default_radius")]
    radius: Sweep,
    #[serde(default = "one")]
    q: f64,
    #[serde(default = "default_long_steps")]
    steps: usize,
    #[serde(default)]
    evolve: bool,
    #[serde(default = "default_evolve_duration")]
    evolve_duration: f64,
    #[serde(default = "default_long_steps")]
    evolve_steps: usize,
}

fn two() -> f64 {
    2.0
}

fn default_radius() -> Sweep {
    Sweep::fixed(0.5)
}

fn default_long_steps() -> usize {
    100_000
}

fn default_evolve_duration() -> f64 {
    500.0
}

fn run_usb(params: &toml::Table, _seed: u64) -> Result<Table, CliError> {
    let p: UsbParams = decode(params)?;
    let radii = p.radius.values("radius")?;
    let rows = par_rows(&radii, |&r| {
        let s = PulseSchedule::circle((p.p0, p.s0), r, p.q, 1.0)?;
        let gamma = usb_gamma_closed_form(&s, p.steps)?;
        let hol = usb_holonomy(&s, p.steps)?;
        let angle = hol.rotation_angle().ok_or_else(|| geophase::Error::Validation("holonomy is not a real rotation".into()))?;
        let mut row: Vec<Cell> = vec![r.into(), gamma.into(), angle.into(), wrap_phase(angle - gamma).abs().into()];
        if p.evolve {
            let rep = usb_full_evolution_check(&s, p.evolve_duration, p.evolve_steps)?;
            row.extend([rep.leakage.into(), rep.distance.into()]);
        }
        Ok(vec![row])
    })?;
    let mut columns = vec!["radius", "gamma_closed_form", "holonomy_angle", "difference"];
    if p.evolve {
        columns.extend(["leakage", "evolution_distance"]);
    }
    Ok(filled(&columns, rows))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CompileParams {
    target: Sweep,
    #[serde(default = "one")]
    q: f64,
    restarts: Option<usize>,
    max_iters: Option<u64>,
    tol: Option<f64>,
    verify_steps: Option<usize>,
    grid: Option<usize>,
}

fn run_compile(params: &toml::Table, seed: u64) -> Result<Table, CliError> {
    let p: CompileParams = decode(params)?;
    let d = CompileSettings::default();
    let settings = CompileSettings {
        seed,
        restarts: p.restarts.unwrap_or(d.restarts),
        max_iters: p.max_iters.unwrap_or(d.max_iters),
        tol: p.tol.unwrap_or(d.tol),
        verify_steps: p.verify_steps.unwrap_or(d.verify_steps),
        grid: p.grid.unwrap_or(d.grid),
    };
    let targets = p.target.values("target")?;
    let rows = par_rows(&targets, |&target| {
        let family = PulseFamily::circular(p.q);
        let r = compile_rotation(target, &family, &settings)?;
        Ok(vec![vec![
            target.into(),
            r.params[0].into(),
            r.params[1].into(),
            r.params[2].into(),
            r.achieved.into(),
            r.residual.into(),
            r.verification.into(),
            r.converged.into(),
            r.reachable.0.into(),
            r.reachable.1.into(),
        ]])
    })?;
    Ok(filled(
        &["target", "p0", "s0", "radius_fraction", "achieved", "residual", "verification", "converged", "reachable_min", "reachable_max"],
        rows,
    ))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NoiseParams {
    #[serde(default = "two")]
    p0: f64,
    #[serde(default = "two")]
    s0: f64,
    #[serde(default = "half")]
    radius: f64,
    #[serde(default = "one")]
    q: f64,
    sigma: Sweep,
    #[serde(default = "default_trials")]
    trials: usize,
    #[serde(default = "default_samples")]
    samples: usize,
}

fn half() -> f64 {
    0.5
}

fn default_trials() -> usize {
    1000
}

fn default_samples() -> usize {
    4000
}

fn run_noise(params: &toml::Table, seed: u64) -> Result<Table, CliError> {
    let p: NoiseParams = decode(params)?;
    let sigmas = p.sigma.values("sigma")?;
    let s = PulseSchedule::circle((p.p0, p.s0), p.radius, p.q, 1.0)?;
    let r = noise_robustness(&s, &sigmas, p.trials, p.samples, seed)?;
    let slope = r.slope.unwrap_or(f64::NAN);
    let rows = (0..r.sigmas.len())
        .map(|i| {
            vec![
                r.sigmas[i].into(),
                r.mean_error[i].into(),
                r.std_error[i].into(),
                r.singular[i].into(),
                r.valid[i].into(),
                slope.into(),
            ]
        })
        .collect();
    Ok(filled(&["sigma", "mean_error", "std_error", "singular", "valid", "slope"], rows))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct DeutschParams {
    oracles: Option<Vec<[u8; 2]>>,
}

fn run_deutsch(params: &toml::Table, _seed: u64) -> Result<Table, CliError> {
    let p: DeutschParams = decode(params)?;
    let rows = oracle_list(p.oracles)?
        .iter()
        .map(|o| {
            let r = deutsch::<f64>(o);
            let expected = if o.is_constant() { "constant" } else { "varying" };
            vec![o.f0.into(), o.f1.into(), r.classification.to_string().into(), expected.into(), r.success_probability.into()]
        })
        .collect();
    Ok(filled(&["f0", "f1", "classification", "expected", "success_probability"], rows))
}

#[derive(Deserialize, Default, Clone, Copy)]
#[serde(rename_all = "lowercase")]
enum ConventionName {
    #[default]
    Branch,
    Relative,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeoDeutschParams {
    #[serde(default = "default_geo_duration")]
    duration: Sweep,
    #[serde(default = "half")]
    arc_fraction: f64,
    #[serde(default)]
    convention: ConventionName,
    #[serde(default = "one")]
    field: f64,
    #[serde(default = "default_steps_per_time")]
    steps_per_time: f64,
    #[serde(default = "default_arc_steps_per_time")]
    arc_steps_per_time: f64,
    #[serde(default = "default_long_steps")]
    verify_steps: usize,
    oracles: Option<Vec<[u8; 2]>>,
}

fn default_geo_duration() -> Sweep {
    Sweep { start: 100.0, stop: 800.0, count: 4, spacing: Spacing::Log }
}

fn default_steps_per_time() -> f64 {
    100.0
}

fn default_arc_steps_per_time() -> f64 {
    25.0
}

fn run_deutsch_geometric(params: &toml::Table, seed: u64) -> Result<Table, CliError> {
    let p: GeoDeutschParams = decode(params)?;
    let oracles = oracle_list(p.oracles)?;
    let durations = p.duration.values("duration")?;
    if durations.iter().any(|d| !(*d > 0.0)) || !(p.arc_fraction > 0.0) || !(p.steps_per_time > 0.0) || !(p.arc_steps_per_time > 0.0) {
        return Err(CliError::Schema("params: durations, arc_fraction and step densities must be positive".into()));
    }
    let compile = CompileSettings { seed, verify_steps: p.verify_steps, ..CompileSettings::default() };
    let compiled = compile_rotation(std::f64::consts::FRAC_PI_4, &PulseFamily::circular(1.0), &compile)?;
    let convention = match p.convention {
        ConventionName::Branch => PhaseConvention::Branch,
        ConventionName::Relative => PhaseConvention::Relative,
    };
    let rows = par_rows(&durations, |&d| {
        let had = GeometricHadamard::from_compiled(compiled.clone(), d, (d * p.steps_per_time).ceil() as usize)?;
        let arc = d * p.arc_fraction;
        let settings = DeutschSettings {
            transport: SpinTransportSettings { field: p.field, arc_duration: arc, steps_per_arc: (arc * p.arc_steps_per_time).ceil() as usize },
            convention,
        };
        oracles
            .iter()
            .map(|o| {
                let r = deutsch_geometric(o, &had, &settings)?;
                Ok(vec![
                    d.into(),
                    o.f0.into(),
                    o.f1.into(),
                    r.classification.to_string().into(),
                    r.success_probability.into(),
                    r.hadamard_leakage.into(),
                ])
            })
            .collect()
    })?;
    Ok(filled(&["duration", "f0", "f1", "classification", "success_probability", "hadamard_leakage"], rows))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AbParams {
    flux: Sweep,
    #[serde(default = "default_windings")]
    windings: Vec<i32>,
}

fn default_windings() -> Vec<i32> {
    vec![1]
}

fn run_ab(params: &toml::Table, _seed: u64) -> Result<Table, CliError> {
    let p: AbParams = decode(params)?;
    let mut rows = Vec::new();
    for flux in p.flux.values("flux")? {
        for &n in &p.windings {
            let z = ab_phase(flux, n);
            rows.push(vec![flux.into(), n.into(), z.re.into(), z.im.into(), z.arg().into()]);
        }
    }
    Ok(filled(&["flux", "winding", "re", "im", "phase"], rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_names_are_unique() {
        let mut names: Vec<_> = registry().iter().map(|e| e.name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), 11);
    }

    #[test]
    fn unknown_experiment_mentions_listing() {
        let e = find("nope").unwrap_err();
        assert!(e.to_string().contains("geophase list"));
    }

    #[test]
    fn ab_rows() {
        let t = run_ab(&"flux = 3.141592653589793\nwindings = [1, 2]".parse().unwrap(), 0).unwrap();
        assert_eq!(t.rows.len(), 2);
        assert!((t.rows[0][2].as_f64().unwrap() + 1.0).abs() < 1e-15);
        assert!((t.rows[1][2].as_f64().unwrap() - 1.0).abs() < 1e-15);
    }
}
