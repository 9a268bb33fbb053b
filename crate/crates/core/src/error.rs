use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid channel size n = {n}: must lie in [{min}, {max}]")]
    InvalidChannelSize { n: u32, min: u32, max: u32 },

    #[error("value {value} out of range: {range}")]
    OutOfRange { value: String, range: String },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("unsupported query: {0}")]
    UnsupportedQuery(String),

    #[error("unknown {kind} `{name}`; available: {}", available.join(", "))]
    NotFound {
        kind: &'static str,
        name: String,
        available: Vec<String>,
    },

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn out_of_range(value: impl ToString, range: impl Into<String>) -> Self {
        Error::OutOfRange {
            value: value.to_string(),
            range: range.into(),
        }
    }
}
