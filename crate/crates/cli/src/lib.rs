//! Library side of the `mopo` binary: config parsing, fixed-schema figure
//! tables, and the three subcommand implementations. Kept as a library so
//! integration tests can drive the same code paths the binary runs.

pub mod commands;
pub mod config;
pub mod tables;

/// Failure classes mapped to process exit codes: problems with what the
/// user handed in (config files, dataset schemas, malformed tables) exit
/// with 2; failures while simulating, estimating, or writing results exit
/// with 3.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    Input(String),
    Runtime(String),
}

impl Failure {
    pub fn input(e: impl std::fmt::Display) -> Self {
        Failure::Input(e.to_string())
    }

    pub fn runtime(e: impl std::fmt::Display) -> Self {
        Failure::Runtime(e.to_string())
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Runtime(m) => m,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.message())
    }
}

impl std::error::Error for Failure {}

pub type CmdResult<T> = Result<T, Failure>;
