use std::fmt;
use std::process::ExitCode;

use affect_fuzzy::classifier::ClassifierError;
use affect_fuzzy::cooccurrence::CooccurrenceError;
use affect_fuzzy::emotion::EmotionError;
use affect_fuzzy::evaluation::EvalError;
use affect_fuzzy::features::ExtractError;
use affect_fuzzy::io::IoError;
use affect_fuzzy::model_io::ModelIoError;
use affect_fuzzy::synth::SynthError;

/// Process exit status: 1 I/O, 2 usage or validation, 3 data or schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Io = 1,
    Usage = 2,
    Data = 3,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl CliError {
    pub fn io(message: impl fmt::Display) -> Self {
        CliError { kind: Kind::Io, message: message.to_string() }
    }

    pub fn usage(message: impl fmt::Display) -> Self {
        CliError { kind: Kind::Usage, message: message.to_string() }
    }

    pub fn data(message: impl fmt::Display) -> Self {
        CliError { kind: Kind::Data, message: message.to_string() }
    }

    pub fn context(self, what: impl fmt::Display) -> Self {
        CliError { kind: self.kind, message: format!("{what}: {}", self.message) }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.kind as u8)
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub type CliResult<T = ()> = Result<T, CliError>;

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e)
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Io(e) => CliError::io(e),
            other => CliError::data(other),
        }
    }
}

impl From<ModelIoError> for CliError {
    fn from(e: ModelIoError) -> Self {
        match e {
            ModelIoError::Io(e) => CliError::io(e),
            other => CliError::data(other),
        }
    }
}

impl From<ClassifierError> for CliError {
    fn from(e: ClassifierError) -> Self {
        match e {
            ClassifierError::InvalidConfig(_) => CliError::usage(e),
            other => CliError::data(other),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::InvalidThreshold(_) => CliError::usage(e),
            other => CliError::data(other),
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        CliError::usage(e)
    }
}

impl From<CooccurrenceError> for CliError {
    fn from(e: CooccurrenceError) -> Self {
        CliError::usage(e)
    }
}

impl From<EmotionError> for CliError {
    fn from(e: EmotionError) -> Self {
        CliError::usage(e)
    }
}

impl From<ExtractError> for CliError {
    fn from(e: ExtractError) -> Self {
        CliError::data(e)
    }
}
