use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::json;

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<()> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_csv<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> Result<()> {
    let path = dir.join(name);
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("writing {}", path.display()))?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Resolved settings plus what is needed to rerun the command. The only
/// file that carries a timestamp.
pub fn write_manifest<T: Serialize>(dir: &Path, command: &str, resolved: &T, files: &[&str]) -> Result<()> {
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let manifest = json!({
        "command": command,
        "argv": std::env::args().collect::<Vec<_>>(),
        "config": resolved,
        "outputs": files,
        "version": env!("CARGO_PKG_VERSION"),
        "created_unix": now,
    });
    write_json(dir, "manifest.json", &manifest)
}
