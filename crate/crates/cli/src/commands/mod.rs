pub mod modulus;
pub mod solve;
pub mod table;
pub mod verify;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::exit::CliError;

/// Writes `body` to `path`, mapping failures to input errors.
pub(crate) fn write_file(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> Result<(), CliError>,
) -> Result<(), CliError> {
    let file = File::create(path)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    body(&mut out)?;
    out.flush().map_err(CliError::io)
}

/// Two-column Markdown table.
pub(crate) fn markdown_pairs(rows: &[(&str, String)]) -> String {
    let mut s = String::from("| quantity | value |\n|---|---|\n");
    for (k, v) in rows {
        s.push_str(&format!("| {k} | {v} |\n"));
    }
    s
}

/// `key: value` lines.
pub(crate) fn plain_pairs(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter()
        .map(|(k, v)| format!("{k:<width$}  {v}\n"))
        .collect()
}
