//! CSV tables with a fixed header, written even when there are no rows.

use serde::de::DeserializeOwned;
use serde::Serialize;

pub fn write_rows<R: Serialize>(header: &[&str], rows: impl IntoIterator<Item = R>) -> String {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.serialize(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// Rows of `text`, after checking its header against `header`.
pub fn read_rows<R: DeserializeOwned>(text: &str, header: &[&str]) -> Result<Vec<R>, String> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let found = r.headers().map_err(|e| e.to_string())?;
    if found.iter().ne(header.iter().copied()) {
        return Err(format!(
            "expected header `{}`, found `{}`",
            header.join(","),
            found.iter().collect::<Vec<_>>().join(",")
        ));
    }
    r.deserialize()
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())
}
