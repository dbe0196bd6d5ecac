use thiserror::Error;

pub type Result<T> = std::result::Result<T, AresError>;

#[derive(Debug, Error)]
pub enum AresError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("corrupt file: {0}")]
    Corrupt(String),

    #[error("unsupported format version {found} (this build reads version {supported})")]
    Version { found: u32, supported: u32 },

    #[error("unsupported method: {0}")]
    Unsupported(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AresError {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            AresError::Config(_) | AresError::InvalidArgument(_) | AresError::Unsupported(_) => 2,
            AresError::Dimension(_)
            | AresError::Data(_)
            | AresError::Corrupt(_)
            | AresError::Version { .. }
            | AresError::Io(_) => 3,
            AresError::Degenerate(_) | AresError::Numeric(_) => 4,
        }
    }
}

macro_rules! ensure {
    ($cond:expr, $variant:ident, $($fmt:tt)+) => {
        // negated so that NaN operands fail the check
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !$cond {
            return Err($crate::error::AresError::$variant(format!($($fmt)+)));
        }
    };
}
pub(crate) use ensure;
