//! Command-line pipeline around the `uqfraud` library: configuration,
//! digest-stamped stage manifests and the subcommand implementations.

pub mod commands;
pub mod config;
pub mod manifest;

use uqfraud::{Error, ErrorClass};

/// Process exit code for an error, by class.
pub fn exit_code(e: &Error) -> i32 {
    match e.class() {
        ErrorClass::Validation => 2,
        ErrorClass::Data => 3,
        ErrorClass::Numeric => 4,
        ErrorClass::Io => 5,
    }
}
