//! Reading JSON inputs with diagnostics that name the file and the field.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{file}: cannot read input: {source}")]
    Io {
        file: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: at `{path}`: {message}")]
    Malformed {
        file: PathBuf,
        path: String,
        message: String,
    },
}

impl InputError {
    pub fn malformed(file: &Path, path: impl Into<String>, message: impl Into<String>) -> Self {
        InputError::Malformed {
            file: file.to_path_buf(),
            path: path.into(),
            message: message.into(),
        }
    }
}

pub fn read_text(file: &Path) -> Result<String, InputError> {
    fs::read_to_string(file).map_err(|source| InputError::Io {
        file: file.to_path_buf(),
        source,
    })
}

/// Parses `text` as `T`; errors carry the JSON path of the offending field.
pub fn parse_json<T: DeserializeOwned>(file: &Path, text: &str) -> Result<T, InputError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|err| {
        // Syntax errors have no field path.
        let path = match err.path().to_string() {
            p if p == "?" => "<document>".to_string(),
            p => p,
        };
        let message = err.into_inner().to_string();
        InputError::malformed(file, path, message)
    })
}

pub fn load_json<T: DeserializeOwned>(file: &Path) -> Result<T, InputError> {
    parse_json(file, &read_text(file)?)
}
