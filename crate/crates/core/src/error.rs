use thiserror::Error;

/// Every failure the engine can report.
///
/// Variants are grouped by the exit-code family the command-line front end
/// maps them to (see [`Error::exit_code`]).
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error("invalid region: {0}")]
    InvalidRegion(String),
    #[error("regions are not disjoint: {0}")]
    Disjointness(String),
    #[error("geometry mismatch: {0}")]
    Geometry(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("degenerate observable: {0}")]
    DegenerateObservable(String),
    #[error("operator is not hermitian: {0}")]
    NotHermitian(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("arity error: {0}")]
    Arity(String),
    #[error("partition error: {0}")]
    Partition(String),

    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("enumeration not feasible: {0}")]
    Feasibility(String),
    #[error("eigensolver failure: {0}")]
    Eigensolver(String),

    #[error("numeric integrity violated: {0}")]
    NumericIntegrity(String),
    #[error("unrealizable schedule: {0}")]
    Schedule(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("no exponential decay: {0}")]
    NoDecay(String),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error at `{path}`: {message}")]
    Json { path: String, message: String },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable process exit code: 2 configuration, 3 resource, 4 data.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Resource(_) | Error::Feasibility(_) | Error::Eigensolver(_) => 3,
            Error::NumericIntegrity(_)
            | Error::Schedule(_)
            | Error::InsufficientData(_)
            | Error::NoDecay(_)
            | Error::Csv(_) => 4,
            _ => 2,
        }
    }

    pub(crate) fn at(stage: &'static str) -> impl FnOnce(Error) -> Error {
        move |source| Error::Stage {
            stage,
            source: Box::new(source),
        }
    }

    pub(crate) fn from_path_error(e: serde_path_to_error::Error<serde_json::Error>) -> Self {
        let path = match e.path().to_string() {
            p if p == "?" => String::from("."),
            p => p,
        };
        Error::Json {
            path,
            message: e.into_inner().to_string(),
        }
    }

    /// The innermost error, with stage labels peeled off.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json {
            path: String::from("."),
            message: e.to_string(),
        }
    }
}
