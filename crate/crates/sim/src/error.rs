use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config error in `{field}`: {reason}")]
    Config { field: String, reason: String },
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error(transparent)]
    Core(#[from] perturb_lloyd::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl SimError {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Self::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// Configuration problems map to exit code 2, everything else to 1.
    pub fn is_config(&self) -> bool {
        matches!(self, Self::Config { .. } | Self::Parse(_))
    }

    pub fn exit_code(&self) -> i32 {
        if self.is_config() {
            2
        } else {
            1
        }
    }
}

pub type SimResult<T> = std::result::Result<T, SimError>;
