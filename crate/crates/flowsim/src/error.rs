use std::io;
use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] flowsim_core::Error),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("malformed image: {0}")]
    MalformedImage(String),
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("malformed index, line {line}: {message}")]
    MalformedIndex { line: usize, message: String },
    #[error("malformed report: {0}")]
    MalformedReport(String),
    #[error("{0} is already indexed")]
    DuplicatePath(String),
    #[error("invalid layout file: {0}")]
    MalformedLayout(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Process exit status for each failure class.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const DATA: u8 = 2;
    pub const INTERNAL: u8 = 3;
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        use flowsim_core::Error as C;
        match self {
            Error::Core(C::InvalidConfig(_) | C::InvalidThreshold(_)) => exit::USAGE,
            Error::Core(C::LayoutInvalid(_) | C::InvalidDimensions { .. } | C::NotFound(_)) => {
                exit::DATA
            }
            Error::Core(_) => exit::INTERNAL,
            Error::Io { source, .. } => match source.kind() {
                io::ErrorKind::NotFound
                | io::ErrorKind::PermissionDenied
                | io::ErrorKind::InvalidData => exit::DATA,
                _ => exit::INTERNAL,
            },
            Error::MalformedImage(_)
            | Error::UnsupportedFormat(_)
            | Error::MalformedIndex { .. }
            | Error::MalformedReport(_)
            | Error::DuplicatePath(_)
            | Error::MalformedLayout(_) => exit::DATA,
        }
    }
}
