//! Output artifacts: a header line with tool version, configuration and seed,
//! written through a temporary file that is renamed into place on success.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// `{"tool", "version", "command", "seed", "config"}`.
pub fn header<C: Serialize>(command: &str, seed: Option<u64>, config: &C) -> Result<Value> {
    Ok(json!({
        "tool": TOOL,
        "version": VERSION,
        "command": command,
        "seed": seed,
        "config": serde_json::to_value(config)?,
    }))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HeaderStyle {
    /// `# {json}` before CSV or plain text.
    Comment,
    /// `{"header": {json}}` as the first JSON line.
    JsonLine,
}

pub fn write_header<W: Write>(out: &mut W, header: &Value, style: HeaderStyle) -> Result<()> {
    match style {
        HeaderStyle::Comment => writeln!(out, "# {}", serde_json::to_string(header)?)?,
        HeaderStyle::JsonLine => writeln!(out, "{}", serde_json::to_string(&json!({ "header": header }))?)?,
    }
    Ok(())
}

fn temp_path(path: &Path) -> Result<PathBuf> {
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidArgument(format!("{} is not a file path", path.display())))?;
    let mut tmp = name.to_os_string();
    tmp.push(format!(".tmp{}", std::process::id()));
    Ok(path.with_file_name(tmp))
}

/// Writes `path` through `body`; nothing is left at `path` or beside it if
/// `body` fails.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let tmp = temp_path(path)?;
    let result = (|| {
        let mut w = BufWriter::new(File::create(&tmp)?);
        body(&mut w)?;
        w.flush()?;
        w.get_ref().sync_all()?;
        Ok(())
    })();
    match result {
        Ok(()) => {
            fs::rename(&tmp, path)?;
            Ok(())
        }
        Err(e) => {
            let _ = fs::remove_file(&tmp);
            Err(e)
        }
    }
}

/// [`write_atomic`] with a header line first.
pub fn write_artifact<F>(path: &Path, header: &Value, style: HeaderStyle, body: F) -> Result<()>
where
    F: FnOnce(&mut BufWriter<File>) -> Result<()>,
{
    write_atomic(path, |w| {
        write_header(w, header, style)?;
        body(w)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn failed_body_leaves_nothing() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let r = write_atomic(&path, |w| {
            writeln!(w, "partial")?;
            Err(Error::InvalidArgument("boom".into()))
        });
        assert!(r.is_err());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
    }

    #[test]
    fn header_comes_first() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sub/out.csv");
        let h = header("probs", Some(7), &json!({"lattice": "tri"})).unwrap();
        write_artifact(&path, &h, HeaderStyle::Comment, |w| {
            writeln!(w, "a,b")?;
            Ok(())
        })
        .unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let first = text.lines().next().unwrap();
        let v: Value = serde_json::from_str(first.trim_start_matches("# ")).unwrap();
        assert_eq!(v["seed"], 7);
        assert_eq!(v["version"], VERSION);
        assert_eq!(text.lines().nth(1), Some("a,b"));
    }
}
