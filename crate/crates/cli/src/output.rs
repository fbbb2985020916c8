use std::fmt;
use std::io::Write;
use std::path::Path;
use std::process::ExitCode;

/// 2 for usage and configuration problems, 1 for everything else.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> ExitCode {
        match self {
            CliError::Usage(_) => ExitCode::from(2),
            CliError::Runtime(_) => ExitCode::from(1),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

pub fn usage(m: impl fmt::Display) -> CliError {
    CliError::Usage(m.to_string())
}

pub fn runtime(m: impl fmt::Display) -> CliError {
    CliError::Runtime(m.to_string())
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| runtime(format!("{}: {e}", parent.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| runtime(format!("{}: {e}", path.display())))
}

/// Writes `doc` plus a trailing LF to `out`, or to stdout.
pub fn emit_document(out: Option<&Path>, doc: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, &format!("{doc}\n")),
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{doc}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(runtime(format!("stdout: {e}")))
                }
                _ => Ok(()),
            }
        }
    }
}
