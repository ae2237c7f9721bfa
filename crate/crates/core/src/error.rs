use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GcsError {
    /// Caller violated an argument contract (bad index, even k, malformed orbs).
    #[error("usage error: {0}")]
    Usage(String),
    /// Arguments are well formed but the mathematical object does not exist.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = GcsError> = std::result::Result<T, E>;

impl From<std::io::Error> for GcsError {
    fn from(e: std::io::Error) -> Self {
        GcsError::Io(e.to_string())
    }
}

impl From<csv::Error> for GcsError {
    fn from(e: csv::Error) -> Self {
        GcsError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for GcsError {
    fn from(e: serde_json::Error) -> Self {
        GcsError::Parse(e.to_string())
    }
}

/// Rejects even or zero `k`.
pub fn check_k(k: u128) -> Result<()> {
    if k == 0 || k % 2 == 0 {
        return Err(GcsError::Usage(format!(
            "k must be odd and positive, got {k}"
        )));
    }
    Ok(())
}
