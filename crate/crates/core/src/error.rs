use thiserror::Error;

/// Errors raised by the numerical modules.
///
/// Values are reported as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("orthogonal link between states {index} and {next} (|overlap| = {modulus:e})")]
    OrthogonalLink { index: usize, next: usize, modulus: f64 },

    #[error("orthogonal endpoints: geodesic is not unique")]
    OrthogonalEndpoints,

    #[error("open path: the phase is gauge invariant only on closed loops")]
    OpenPath,

    #[error("degenerate arc between antipodal vertices {index} and {next}")]
    DegenerateArc { index: usize, next: usize },

    #[error("adiabaticity violated: band population {population:.6} at t = {time}")]
    AdiabaticityViolated { time: f64, population: f64 },

    #[error("degeneracy: eigenvalue gap {gap:e} at sample {index}; use the holonomy module for degenerate bands")]
    Degeneracy { index: usize, gap: f64 },

    #[error("frame discontinuity at sample {index}: overlap is not positive definite")]
    Gauge { index: usize },

    #[error("plaquette step too large: holonomy has an eigenvalue at -1")]
    StepTooLarge,

    #[error("degeneracy collapse at t = {time}: bright-state gap {gap:e} below floor")]
    DegeneracyCollapse { time: f64, gap: f64 },

    #[error("singular integrand at t = {time}: P^2 + S^2 = {radius2:e}")]
    Singularity { time: f64, radius2: f64 },

    #[error("resolution too coarse: omega * dt = {omega_dt} (must be < 0.1)")]
    Resolution { omega_dt: f64 },

    #[error("undefined phase: visibility {visibility:e} is zero")]
    UndefinedPhase { visibility: f64 },

    #[error("gate synthesis failed: measured phase {measured}, wanted {target}, deviation {deviation}")]
    Synthesis { measured: f64, target: f64, deviation: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Stable snake_case name of the variant, for machine-readable records.
    pub fn kind(&self) -> &'static str {
        match self {
            Self::Dimension { .. } => "dimension",
            Self::Domain(_) => "domain",
            Self::Input(_) => "input",
            Self::Validation(_) => "validation",
            Self::OrthogonalLink { .. } => "orthogonal_link",
            Self::OrthogonalEndpoints => "orthogonal_endpoints",
            Self::OpenPath => "open_path",
            Self::DegenerateArc { .. } => "degenerate_arc",
            Self::AdiabaticityViolated { .. } => "adiabaticity_violated",
            Self::Degeneracy { .. } => "degeneracy",
            Self::Gauge { .. } => "gauge",
            Self::StepTooLarge => "step_too_large",
            Self::DegeneracyCollapse { .. } => "degeneracy_collapse",
            Self::Singularity { .. } => "singularity",
            Self::Resolution { .. } => "resolution",
            Self::UndefinedPhase { .. } => "undefined_phase",
            Self::Synthesis { .. } => "synthesis",
        }
    }
}
