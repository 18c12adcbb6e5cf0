use thiserror::Error;

pub type Result<T> = std::result::Result<T, HanleError>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HanleError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("dimension cap exceeded: level with 2F+1 = {sublevels} sublevels (cap {cap})")]
    DimensionCap { sublevels: usize, cap: usize },

    #[error("no steady state: open transition drains population")]
    NoSteadyState,

    #[error("singular steady-state system ({0})")]
    Singular(String),

    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),

    #[error("resonance degenerate: discriminant 4*D0*D2 - D1^2 = {0} is not positive")]
    DegenerateResonance(f64),

    #[error("no reversal in range [{lo}, {hi}]")]
    NoReversal { lo: f64, hi: f64 },

    #[error("grid too narrow: {0}")]
    GridTooNarrow(String),

    #[error("fit input rejected: {0}")]
    FitInput(String),

    /// A per-node failure inside a velocity average or scan.
    #[error("at {context}: {source}")]
    AtNode {
        context: String,
        #[source]
        source: Box<HanleError>,
    },
}

impl HanleError {
    /// Wraps the error with the parameter point it occurred at.
    pub fn at(self, context: impl Into<String>) -> Self {
        HanleError::AtNode {
            context: context.into(),
            source: Box::new(self),
        }
    }
}
