use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_COMPUTE: i32 = 3;
pub const EXIT_CONFIG: i32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Input,
    Computation,
    Config,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ErrorKind,
    pub code: String,
    pub message: String,
}

impl CliError {
    pub fn new(kind: ErrorKind, code: impl Into<String>, message: impl ToString) -> Self {
        Self {
            kind,
            code: code.into(),
            message: message.to_string(),
        }
    }

    pub fn input(code: &str, message: impl ToString) -> Self {
        Self::new(ErrorKind::Input, code, message)
    }

    pub fn compute(code: &str, message: impl ToString) -> Self {
        Self::new(ErrorKind::Computation, code, message)
    }

    pub fn config(code: &str, message: impl ToString) -> Self {
        Self::new(ErrorKind::Config, code, message)
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Input => EXIT_INPUT,
            ErrorKind::Computation => EXIT_COMPUTE,
            ErrorKind::Config => EXIT_CONFIG,
        }
    }

    pub fn to_json(&self) -> String {
        json!({
            "error": {
                "kind": self.kind,
                "code": self.code,
                "exit_code": self.exit_code(),
                "message": self.message,
            }
        })
        .to_string()
    }
}

/// The structured result every analysis subcommand prints.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub command: CommandEcho,
    pub input_sha256: String,
    pub config: Value,
    pub results: Value,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Serialize)]
pub struct CommandEcho {
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Debug, Default, Serialize)]
pub struct Diagnostics {
    pub warnings: Vec<String>,
    #[serde(flatten)]
    pub counters: serde_json::Map<String, Value>,
}

impl Diagnostics {
    pub fn count(&mut self, key: &str, value: usize) {
        self.counters.insert(key.to_string(), value.into());
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report values serialize")
}
