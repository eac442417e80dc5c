use std::fmt;

/// Failure classes, each mapped to its own exit status.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Config(String),
    Output(String),
    Runtime(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Config(_) => 3,
            Failure::Output(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Usage(_) => "usage",
            Failure::Config(_) => "config",
            Failure::Output(_) => "output",
            Failure::Runtime(_) => "runtime",
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Config(m) | Failure::Output(m) | Failure::Runtime(m) => m,
        }
    }
}

/// Single line: `error kind=<kind> code=<n> message=<text>`.
impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flat: String = self.message().split_whitespace().collect::<Vec<_>>().join(" ");
        write!(f, "error kind={} code={} message={}", self.kind(), self.code(), flat)
    }
}

impl From<ftn::Error> for Failure {
    fn from(e: ftn::Error) -> Self {
        match e {
            ftn::Error::Parameter(m) => Failure::Config(m),
            other => Failure::Runtime(other.to_string()),
        }
    }
}
