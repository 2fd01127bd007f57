use thiserror::Error;

/// Errors produced anywhere in the simulation and reconstruction stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh generation failed for radius {radius} and target_h {target_h}: {reason}")]
    Mesh {
        radius: f64,
        target_h: f64,
        reason: String,
    },

    #[error("gamma empty at this resolution")]
    GammaEmpty,

    #[error("invalid gamma arc [{start}, {end}): {reason}")]
    InvalidArc {
        start: f64,
        end: f64,
        reason: String,
    },

    #[error("pixel grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid pixel size {h_px} for domain radius {radius}")]
    InvalidPixelSize { h_px: f64, radius: f64 },

    #[error("basis size {requested} too large: gamma has only {edges} edges (need at least {} edges)", requested + 1)]
    BasisTooLarge { requested: usize, edges: usize },

    #[error("basis construction failed: {0}")]
    Basis(String),

    #[error("invalid conductivity field: {0}")]
    InvalidField(String),

    #[error("linear solver failed: {reason} (diagnostic: {diagnostic:.3e})")]
    Solver { reason: String, diagnostic: f64 },

    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("test inclusion is not contained in component {component}")]
    NotSubset { component: usize },

    #[error("index {index} out of range (have {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("perturbation value {value} outside admissible range [{lower}, {upper}]")]
    ValueOutOfRange { value: f64, lower: f64, upper: f64 },

    #[error(
        "initial test inclusion of component {component} is not PSD (T+ margin {plus:.3e}, T- margin {minus:.3e}, eps {eps:.3e})"
    )]
    InitNotPsd {
        component: usize,
        plus: f64,
        minus: f64,
        eps: f64,
    },

    #[error("sign ambiguous for component {component} (S+ margin {plus:.3e}, S- margin {minus:.3e}, eps {eps:.3e})")]
    SignAmbiguous {
        component: usize,
        plus: f64,
        minus: f64,
        eps: f64,
    },

    #[error("prior bounds violated for component {component}: test fails at cap {cap} (margin {margin:.3e})")]
    PriorBoundsViolated {
        component: usize,
        cap: f64,
        margin: f64,
    },

    #[error("bisection bracket for component {component} does not switch on [{lower}, {upper}]")]
    BracketFailed {
        component: usize,
        lower: f64,
        upper: f64,
    },

    #[error("detected component {component} straddles parents {parents:?}")]
    StraddlingComponent {
        component: usize,
        parents: Vec<usize>,
    },

    #[error("assumption ({item}) violated at layer {layer}, component {component}: {detail}")]
    Assumption {
        item: &'static str,
        layer: usize,
        component: usize,
        detail: String,
    },

    #[error("invalid phantom: {0}")]
    Phantom(String),

    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// True when the failure is the "both or neither PSD" outcome of a sign test.
    pub fn is_ambiguity(&self) -> bool {
        matches!(self.root(), Error::SignAmbiguous { .. })
    }

    pub fn is_config(&self) -> bool {
        matches!(
            self.root(),
            Error::Config(_) | Error::Json(_) | Error::Phantom(_) | Error::Assumption { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
