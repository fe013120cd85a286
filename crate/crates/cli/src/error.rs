use std::path::PathBuf;

use nlsim_core::Error as CoreError;

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Core(CoreError::Convergence { .. }) => "convergence",
            CliError::Io { .. } => "io",
            _ => "config",
        }
    }

    /// Process exit status: 2 config, 3 convergence, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self.kind() {
            "convergence" => 3,
            "io" => 4,
            _ => 2,
        }
    }

    /// Single tab-separated line for stderr: `nlsim-error <kind> <code> <message>`.
    pub fn machine_line(&self) -> String {
        let msg: String = self
            .to_string()
            .chars()
            .map(|c| if c == '\t' || c == '\n' || c == '\r' { ' ' } else { c })
            .collect();
        format!("nlsim-error\t{}\t{}\t{}", self.kind(), self.exit_code(), msg)
    }
}
