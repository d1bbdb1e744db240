use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the multidimensional core, the model layer and the
/// intention pipelines. Parse errors live in [`crate::iql::ParseError`] and are
/// wrapped here so callers can handle a single type.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Parse(#[from] crate::iql::ParseError),

    #[error("dimension `{dimension}`: member `{member}` has two parents at level {level}: `{first}` and `{second}`")]
    Ambiguous {
        dimension: String,
        level: String,
        member: String,
        first: String,
        second: String,
    },
    #[error("dimension `{dimension}`: member `{member}` at level {level} has no parent at level {parent_level}")]
    Dangling {
        dimension: String,
        level: String,
        member: String,
        parent_level: String,
    },
    #[error("dimension `{dimension}`: duplicate member `{member}` in level {level}")]
    DuplicateMember {
        dimension: String,
        level: String,
        member: String,
    },
    #[error("dimension `{dimension}`: {message}")]
    LatticeViolation { dimension: String, message: String },

    #[error("unknown dimension `{0}`")]
    UnknownDimension(String),
    #[error("dimension `{dimension}` has no level `{level}`")]
    UnknownLevel { dimension: String, level: String },
    #[error("`{member}` is not a member of {dimension}.{level}")]
    UnknownMember {
        dimension: String,
        level: String,
        member: String,
    },
    #[error("levels {dimension}.{from} and {dimension}.{to} are not comparable")]
    Incomparable {
        dimension: String,
        from: String,
        to: String,
    },
    #[error("unknown measure `{0}`")]
    UnknownMeasure(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),

    #[error("duplicate coordinates {0:?}")]
    DuplicateCoordinates(Vec<String>),
    #[error("{0}")]
    Arity(String),
    #[error("fact row {row}: {message}")]
    FactRow { row: usize, message: String },
    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("unknown cube `{0}`")]
    UnknownCube(String),
    #[error("`{0}` is already registered")]
    Duplicate(String),
    #[error("invalid binding for `{function}`: {message}")]
    Binding { function: String, message: String },
    #[error("function `{function}` failed on class {class:?}: {message}")]
    Function {
        function: String,
        class: Vec<String>,
        message: String,
    },

    #[error("unknown model type `{0}`")]
    UnknownModel(String),
    #[error("model `{model}`: {message}")]
    Model { model: String, message: String },
    #[error("benchmark `{benchmark}` has no value for cell {coordinates:?}")]
    BenchmarkMismatch {
        benchmark: String,
        coordinates: Vec<String>,
    },
    #[error("nothing to highlight")]
    NothingToHighlight,
    #[error("plan: {0}")]
    Plan(String),

    #[error("io: {0}")]
    Io(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("json: {0}")]
    Json(String),
}

impl Error {
    pub fn model(model: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Model {
            model: model.into(),
            message: message.into(),
        }
    }

    /// Pipeline stage an error belongs to, as reported by the service layer.
    pub fn stage(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::UnknownCube(_)
            | Error::UnknownModel(_)
            | Error::UnknownDimension(_)
            | Error::UnknownLevel { .. }
            | Error::UnknownMeasure(_)
            | Error::Incomparable { .. }
            | Error::Plan(_) => "plan",
            Error::Ambiguous { .. }
            | Error::Dangling { .. }
            | Error::DuplicateMember { .. }
            | Error::LatticeViolation { .. }
            | Error::Duplicate(_)
            | Error::FactRow { .. }
            | Error::Io(_)
            | Error::Csv(_)
            | Error::Json(_) => "catalog",
            _ => "execute",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}
