use std::fmt;

/// Command failure, mapped to the process exit code.
#[derive(Debug)]
pub enum Failure {
    /// Bad or contradictory flags (exit 2).
    Usage(String),
    /// Missing, malformed or inconsistent inputs (exit 3).
    Data(String),
    /// Non-finite values during computation (exit 4).
    Numeric(String),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Data(_) => 3,
            Failure::Numeric(_) => 4,
        }
    }

    /// Wraps a library error with the input it concerns.
    pub fn context(what: impl fmt::Display) -> impl FnOnce(gauss4d_core::Error) -> Failure {
        move |e| match Failure::from(e) {
            Failure::Usage(m) => Failure::Usage(format!("{what}: {m}")),
            Failure::Data(m) => Failure::Data(format!("{what}: {m}")),
            Failure::Numeric(m) => Failure::Numeric(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Data(m) | Failure::Numeric(m) => f.write_str(m),
        }
    }
}

impl From<gauss4d_core::Error> for Failure {
    fn from(e: gauss4d_core::Error) -> Self {
        match e {
            gauss4d_core::Error::NonFinite(_) => Failure::Numeric(e.to_string()),
            _ => Failure::Data(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}
