use std::fmt;

use rcnkit::{ErrorClass, RcnError};

/// Process exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;
/// Anything that fits none of the classes above.
pub const EXIT_OTHER: i32 = 1;

/// Front-end failures that carry their own exit class.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    CliError::Usage(msg.into()).into()
}

pub fn data(msg: impl Into<String>) -> anyhow::Error {
    CliError::Data(msg.into()).into()
}

/// Exit code for an error, from the first classified cause in its chain.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return match e {
                CliError::Usage(_) => EXIT_USAGE,
                CliError::Data(_) => EXIT_DATA,
            };
        }
        if let Some(e) = cause.downcast_ref::<RcnError>() {
            return match e.class() {
                ErrorClass::Usage => EXIT_USAGE,
                ErrorClass::Data => EXIT_DATA,
                ErrorClass::Numeric => EXIT_NUMERIC,
            };
        }
        if cause.is::<toml::de::Error>() {
            return EXIT_USAGE;
        }
        if cause.is::<std::io::Error>() {
            return EXIT_DATA;
        }
    }
    EXIT_OTHER
}
