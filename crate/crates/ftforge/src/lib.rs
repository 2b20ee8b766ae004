//! Training, evaluation, and file-format companion to `ftforge-core`.
//!
//! The core crate holds the simulation and verification algebra; this crate
//! adds everything that needs an operating system: JSON run configs, the
//! PPO trainer with its agent files and training logs, the Monte-Carlo
//! noise evaluator, and the command-line interface.

pub mod config;
pub mod eval;
pub mod ppo;

/// Errors surfaced by the trainer, evaluator, and CLI plumbing.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Core(ftforge_core::Error),
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("agent file error: {0}")]
    AgentFile(String),
    #[error("training error: {0}")]
    Train(String),
    #[error("{0}")]
    Eval(String),
}

impl From<ftforge_core::Error> for CliError {
    fn from(e: ftforge_core::Error) -> Self {
        CliError::Core(e)
    }
}
