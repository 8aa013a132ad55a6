use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;

#[derive(Debug)]
pub enum CliError {
    /// Bad flags or config file: exit status 2.
    Config(String),
    /// The numerics failed on a valid configuration: exit status 3.
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<myxo_core::Error> for CliError {
    fn from(e: myxo_core::Error) -> Self {
        use myxo_core::Error as E;
        match e {
            E::Unstable { .. } | E::NonPositiveData { .. } | E::VarianceDrift { .. } => {
                CliError::Numerical(e.to_string())
            }
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Parameters from `path`, or the defaults when no file is given. Unknown
/// keys and type errors are reported with their line and column.
pub fn load<T: DeserializeOwned + Default>(path: Option<&Path>) -> Result<T, CliError> {
    let Some(path) = path else {
        return Ok(T::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Config(format!(
            "{}:{}:{}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

/// Copies every flag that was given over the loaded parameters.
macro_rules! overlay {
    ($params:expr, $args:expr; $($field:ident),* $(,)?) => {
        $(
            if let Some(v) = $args.$field.clone() {
                $params.$field = v;
            }
        )*
    };
}
pub(crate) use overlay;
