use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::pgm::in_file;
use crate::io::text::{read_text, write_text};

/// Version written by this build for every JSON format.
pub const VERSION: u32 = 1;
pub const SUPPORTED_VERSIONS: &[u32] = &[1];

#[derive(Deserialize)]
struct Head {
    format: String,
    version: u32,
}

#[derive(Serialize)]
struct Out<'a, T> {
    format: &'a str,
    version: u32,
    data: &'a T,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct In<T> {
    #[allow(dead_code)]
    format: String,
    #[allow(dead_code)]
    version: u32,
    data: T,
}

fn json_error(e: serde_json::Error, text: &str) -> Error {
    // serde reports 1-based line and column; convert to a byte offset
    let offset: usize = text
        .split_inclusive('\n')
        .take(e.line().saturating_sub(1))
        .map(str::len)
        .sum::<usize>()
        + e.column().saturating_sub(1);
    Error::format(format!("json: {e}"), offset.min(text.len()))
}

/// Checks a `{"format", "version"}` header object.
pub(crate) fn check_header(text: &str, format: &str) -> Result<()> {
    let head: Head = serde_json::from_str(text).map_err(|e| json_error(e, text))?;
    if head.format != format {
        return Err(Error::format(
            format!("expected a {format} file, found {:?}", head.format),
            0,
        ));
    }
    if !SUPPORTED_VERSIONS.contains(&head.version) {
        return Err(Error::Version {
            format: format.into(),
            found: head.version,
            supported: SUPPORTED_VERSIONS.to_vec(),
        });
    }
    Ok(())
}

/// `{"format": .., "version": .., "data": ..}`, pretty-printed with a final
/// newline.
pub fn to_envelope<T: Serialize>(format: &str, data: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Out {
        format,
        version: VERSION,
        data,
    })?;
    s.push('\n');
    Ok(s)
}

pub fn from_envelope<T: DeserializeOwned>(text: &str, format: &str) -> Result<T> {
    check_header(text, format)?;
    let env: In<T> = serde_json::from_str(text).map_err(|e| json_error(e, text))?;
    Ok(env.data)
}

pub fn write_json<T: Serialize>(path: impl AsRef<Path>, format: &str, data: &T) -> Result<()> {
    write_text(path.as_ref(), &to_envelope(format, data)?)
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>, format: &str) -> Result<T> {
    let path = path.as_ref();
    from_envelope(&read_text(path)?, format).map_err(|e| in_file(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_round_trip() {
        let v = vec![0.1f64, 1.0 / 3.0, 1.000000000000001, -1e-300];
        let s = to_envelope("report", &v).unwrap();
        assert!(s.starts_with("{\n  \"format\": \"report\",\n  \"version\": 1,"));
        let back: Vec<f64> = from_envelope(&s, "report").unwrap();
        assert_eq!(
            back.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
            v.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn version_and_kind_checked() {
        let e = from_envelope::<u32>(r#"{"format": "model", "version": 7, "data": 1}"#, "model").unwrap_err();
        match e {
            Error::Version { found, supported, .. } => assert_eq!((found, supported), (7, vec![1])),
            other => panic!("{other:?}"),
        }
        assert!(e_is_format(from_envelope::<u32>(
            r#"{"format": "graph", "version": 1, "data": 1}"#,
            "model"
        )));
        assert!(e_is_format(from_envelope::<u32>(
            r#"{"format": "model", "data": 1}"#,
            "model"
        )));
        assert!(e_is_format(from_envelope::<u32>(
            r#"{"format": "model", "version": 1, "data": 1, "x": 0}"#,
            "model"
        )));
        assert!(e_is_format(from_envelope::<u32>("{\n  \"format\": ", "model")));
    }

    fn e_is_format<T: std::fmt::Debug>(r: Result<T>) -> bool {
        matches!(r, Err(Error::Format { .. }))
    }
}
