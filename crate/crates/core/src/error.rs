use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid size {0}: at least 2 nodes are required")]
    InvalidSize(usize),

    #[error("incompatible grids: {0} vs {1}")]
    IncompatibleGrid(String, String),

    #[error("exponent out of domain: {0}")]
    Domain(String),

    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },

    #[error("singular Gram determinant {gamma:e} (threshold {threshold:e})")]
    SingularGram { gamma: f64, threshold: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("kernel is not antisymmetric (max |θ(u,v) + θ(v,u)| = {0:e}); a bilinear 2-functional is bounded with respect to a 2-norm only if it is antisymmetric")]
    NotAntisymmetric(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(input: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Parse {
            input: input.into(),
            reason: reason.into(),
        }
    }
}
