use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::Failure;

/// Lossless fixed-width rendering for CSV cells.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

/// Quotes a CSV field when needed.
pub fn field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub struct Table {
    buf: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut t = Table { buf: String::new() };
        t.row(header.iter().map(|h| h.to_string()));
        t
    }

    pub fn row(&mut self, cells: impl IntoIterator<Item = String>) {
        let cells: Vec<String> = cells.into_iter().collect();
        let _ = writeln!(self.buf, "{}", cells.join(","));
    }

    pub fn finish(self) -> String {
        self.buf
    }
}

pub fn json<T: Serialize>(value: &T) -> Result<String, Failure> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Failure { code: 2, message: e.to_string() })?;
    s.push('\n');
    Ok(s)
}

/// Writes the finished document to `out`, or stdout. Files are written
/// beside the target and renamed, so a failed run leaves nothing behind.
pub fn emit(out: Option<&Path>, contents: &str) -> Result<(), Failure> {
    let io_fail = |p: &Path, e: std::io::Error| Failure { code: 2, message: format!("{}: {e}", p.display()) };
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(contents.as_bytes()).and_then(|_| stdout.flush()).map_err(|e| io_fail(Path::new("<stdout>"), e))
        }
        Some(path) => {
            let mut tmp = path.as_os_str().to_owned();
            tmp.push(".partial");
            let tmp = Path::new(&tmp);
            fs::write(tmp, contents).map_err(|e| io_fail(tmp, e))?;
            fs::rename(tmp, path).map_err(|e| {
                let _ = fs::remove_file(tmp);
                io_fail(path, e)
            })
        }
    }
}
