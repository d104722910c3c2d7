use std::fs;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;

/// Writes `<name>.csv` and, when asked, `<name>.json` with the same rows.
pub fn emit<T: Serialize>(dir: &Path, name: &str, rows: &[T], json: bool) -> anyhow::Result<()> {
    ces_ge_core::io::write_rows(dir.join(format!("{name}.csv")), rows)?;
    if json {
        let path = dir.join(format!("{name}.json"));
        let mut text = serde_json::to_string_pretty(rows)?;
        text.push('\n');
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

pub fn out_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}
