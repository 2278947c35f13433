//! Output plumbing: fixed float formatting and artifact emission.

use anyhow::{Context, Result};
use std::fs;
use std::path::{Path, PathBuf};

/// CSV floats carry 12 significant digits; rationals print exactly as p/q.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Writes `content` under the output directory (creating it) and returns
/// the path.
pub fn emit(out: &Path, name: &str, content: &str) -> Result<PathBuf> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let path = out.join(name);
    fs::write(&path, content).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Emits to the directory when given, otherwise prints to stdout.
pub fn emit_or_print(out: Option<&Path>, name: &str, content: &str) -> Result<()> {
    match out {
        Some(dir) => {
            let path = emit(dir, name, content)?;
            println!("wrote {}", path.display());
        }
        None => print!("{content}"),
    }
    Ok(())
}
