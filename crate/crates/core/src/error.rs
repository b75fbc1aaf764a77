use thiserror::Error;

/// Errors raised anywhere in the discretization pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("triangulation failed: {0}")]
    Triangulation(String),
    #[error("face is not planar within tolerance ({deviation:.3e} > {tolerance:.3e})")]
    NonPlanar { deviation: f64, tolerance: f64 },
    #[error("ill-conditioned local matrix {matrix}: {detail}")]
    Conditioning { matrix: &'static str, detail: String },
    #[error("mesh conformity violated: {0}")]
    Conformity(String),
    #[error("mesh topology error: {0}")]
    Topology(String),
    #[error("invalid element space: {0}")]
    InvalidSpace(String),
    #[error("boundary condition error: {0}")]
    BoundaryCondition(String),
    #[error("assembly error: {0}")]
    Assembly(String),
    #[error("singular system (estimated null-space dimension: {})", .nullity.map(|n| n.to_string()).unwrap_or_else(|| "unknown".into()))]
    Singular { nullity: Option<usize> },
    #[error("linear solver failed: {0}")]
    Solver(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Tags an error with the pipeline stage that produced it.
    pub fn at(self, stage: impl Into<String>) -> Self {
        Error::Stage { stage: stage.into(), source: Box::new(self) }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
