use parastat::{Error, ErrorKind};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    #[serde(serialize_with = "kind_name")]
    pub kind: ErrorKind,
    pub code: &'static str,
    pub message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub row: Option<usize>,
}

fn kind_name<S: serde::Serializer>(k: &ErrorKind, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(match k {
        ErrorKind::Usage => "usage",
        ErrorKind::Budget => "budget",
        ErrorKind::Data => "data",
        ErrorKind::NonConvergence => "non_convergence",
    })
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError { kind: ErrorKind::Usage, code: "usage", message: message.into(), row: None }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Usage => 2,
            ErrorKind::Budget => 3,
            ErrorKind::Data => 4,
            ErrorKind::NonConvergence => 5,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let row = match &e {
            Error::NonPositiveValue { row, .. } | Error::MalformedInput { row, .. } => Some(*row),
            _ => None,
        };
        CliError { kind: e.kind(), code: e.code(), message: e.to_string(), row }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string()).into()
    }
}
