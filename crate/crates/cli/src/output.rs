use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use relaykit::McConfig;
use serde::Serialize;
use tempfile::NamedTempFile;

/// Writes through `body` to `path` atomically, or to stdout when `path` is
/// `None`. A failed write leaves no file behind.
pub fn write_output<F>(path: Option<&Path>, body: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let Some(path) = path else {
        let stdout = io::stdout();
        let mut lock = stdout.lock();
        body(&mut lock)?;
        lock.flush()?;
        return Ok(());
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    body(tmp.as_file_mut())?;
    tmp.as_file_mut().flush()?;
    tmp.persist(path)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

/// CSV writer with LF line endings.
pub fn csv_writer(w: &mut dyn Write) -> csv::Writer<&mut dyn Write> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

#[derive(Serialize)]
struct Meta<'a, C: Serialize> {
    command: &'a str,
    library_version: &'a str,
    cli_version: &'a str,
    /// Resolved sampling settings, including defaults the flags left out.
    monte_carlo: Option<&'a McConfig>,
    config: &'a C,
}

pub fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Records everything needed to rerun a command next to its output.
pub fn write_meta<C: Serialize>(
    out: &Path,
    command: &str,
    monte_carlo: Option<&McConfig>,
    config: &C,
) -> Result<()> {
    let meta = Meta {
        command,
        library_version: relaykit::VERSION,
        cli_version: env!("CARGO_PKG_VERSION"),
        monte_carlo,
        config,
    };
    write_output(Some(&meta_path(out)), |w| {
        serde_json::to_writer_pretty(&mut *w, &meta)?;
        writeln!(w)?;
        Ok(())
    })
}
