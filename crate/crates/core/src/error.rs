use thiserror::Error;

/// Errors produced by quantization, selection, archive coding and analytics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum GdError {
    #[error("table is empty")]
    EmptyTable,

    #[error("column {column} has {found} rows, expected {expected}")]
    RaggedTable {
        column: usize,
        expected: usize,
        found: usize,
    },

    #[error("non-finite value at row {row}, column {column}")]
    NonFinite { row: usize, column: usize },

    #[error(
        "column {column} needs more than {cap} decimal digits to be exact; \
         compress it in raw-bits float mode instead"
    )]
    DecimalScaleExceeded { column: usize, cap: u8 },

    #[error("bit position {position} is out of range for chunk width {width}")]
    BitOutOfRange { position: usize, width: usize },

    #[error("bit position {0} is already selected")]
    DuplicateBit(usize),

    #[error("no selected bits to remove")]
    EmptySelection,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("integrity error in {section} section: {detail}")]
    Integrity {
        section: &'static str,
        detail: String,
    },

    #[error("undefined metric: {0}")]
    Undefined(&'static str),

    #[error("i/o error: {0}")]
    Io(String),
}

impl GdError {
    pub(crate) fn integrity(section: &'static str, detail: impl Into<String>) -> Self {
        GdError::Integrity {
            section,
            detail: detail.into(),
        }
    }
}

impl From<std::io::Error> for GdError {
    fn from(e: std::io::Error) -> Self {
        GdError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, GdError>;
