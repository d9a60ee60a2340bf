//! Exit-code-bearing error split: a run can fail because the config file is
//! unusable (exit 3) or because a structurally valid model failed its
//! physics checks or the experiment itself errored (exit 2).

use std::fmt;

#[derive(Debug)]
pub enum Failure {
    /// Parse error, schema violation or out-of-domain parameter.
    Config(String),
    /// Model build or experiment failure after a valid config.
    Run(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 3,
            Failure::Run(_) => 2,
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Run(m) => write!(f, "run error: {m}"),
        }
    }
}

impl From<qamem::Error> for Failure {
    fn from(e: qamem::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

pub type CliResult<T> = Result<T, Failure>;
