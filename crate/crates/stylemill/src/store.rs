//! On-disk formats: versioned JSON envelopes, the dataset CSV pair, the ILS
//! answer file and the feature mapping.

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use stylemill_core::dataset::{LearningDataset, ProfileRow};
use stylemill_core::features::FeatureMapping;
use stylemill_core::style::{label_response, IlsResponse};
use stylemill_core::{Dimension, DimensionLabel, Pole};

use crate::error::{Error, Result};
use crate::ingest::{parse_event_log, EventRecord, ParseOptions};

pub const SCHEMA_VERSION: u32 = 1;

pub const DEFAULT_MAPPING: &str = include_str!("../assets/default_mapping.json");

#[derive(Debug, Serialize, Deserialize)]
struct Envelope<T> {
    schema_version: u32,
    kind: String,
    data: T,
}

#[derive(Deserialize)]
struct Header {
    schema_version: u32,
    kind: String,
}

pub fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

/// Parses a plain (non-enveloped) JSON file.
pub fn read_plain_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// `data` inside a `{schema_version, kind, data}` envelope, as text.
pub fn envelope_string<T: Serialize>(kind: &str, data: &T) -> String {
    to_json_string(&Envelope {
        schema_version: SCHEMA_VERSION,
        kind: kind.to_string(),
        data,
    })
}

pub fn write_json<T: Serialize>(path: &Path, kind: &str, data: &T) -> Result<()> {
    write_text(path, &envelope_string(kind, data))
}

/// Reads an envelope of the given kind.
pub fn read_json<T: DeserializeOwned>(path: &Path, kind: &str) -> Result<T> {
    let text = read_text(path)?;
    let json_err = |source| Error::Json {
        path: path.to_path_buf(),
        source,
    };
    let header: Header = serde_json::from_str(&text).map_err(json_err)?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::SchemaVersion {
            path: path.to_path_buf(),
            found: header.schema_version,
            expected: SCHEMA_VERSION,
        });
    }
    if header.kind != kind {
        return Err(Error::Data(format!(
            "{}: expected a {kind} file, found {}",
            path.display(),
            header.kind
        )));
    }
    let env: Envelope<T> = serde_json::from_str(&text).map_err(json_err)?;
    Ok(env.data)
}

/// Kind recorded in an envelope file.
pub fn peek_kind(path: &Path) -> Result<String> {
    let text = read_text(path)?;
    let header: Header = serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(header.kind)
}

/// Hex SHA-256 of a file's bytes.
pub fn digest_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(format!("{:x}", hasher.finalize()))
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    format!("{:x}", Sha256::digest(bytes))
}

pub fn read_events(path: &Path, options: &ParseOptions) -> Result<(Vec<EventRecord>, crate::ingest::CleaningReport)> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_event_log(BufReader::new(f), options)
}

/// The mapping at `path`, or the bundled default.
pub fn load_mapping(path: Option<&Path>) -> Result<FeatureMapping> {
    let mapping: FeatureMapping = match path {
        Some(p) => read_plain_json(p)?,
        None => serde_json::from_str(DEFAULT_MAPPING).expect("bundled mapping parses"),
    };
    mapping.validate()?;
    Ok(mapping)
}

/// Reads an ILS answer file: one row per student, the user id followed by
/// either one 44-symbol field or 44 single-symbol fields. A header row is
/// detected and skipped.
pub fn read_ils(path: &Path) -> Result<Vec<(String, Vec<DimensionLabel>)>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_ils(BufReader::new(f))
}

pub fn parse_ils<R: Read>(source: R) -> Result<Vec<(String, Vec<DimensionLabel>)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 1;
        if rec.len() < 2 {
            return Err(Error::Data(format!("ILS line {line}: expected a user id and answers")));
        }
        let user = rec[0].trim().to_string();
        let answers: String = rec.iter().skip(1).map(str::trim).collect();
        let response = match IlsResponse::parse(&answers) {
            Ok(r) => r,
            Err(_) if i == 0 && !looks_like_answers(&answers) => continue,
            Err(e) => return Err(Error::Data(format!("ILS line {line} (user {user}): {e}"))),
        };
        out.push((user, label_response(&response).to_vec()));
    }
    Ok(out)
}

fn looks_like_answers(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| matches!(c, 'a' | 'b' | 'A' | 'B'))
}

/// Path of the label sidecar that goes with a dataset matrix CSV.
pub fn labels_sidecar(matrix: &Path) -> PathBuf {
    let stem = matrix
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    matrix.with_file_name(format!("{stem}.labels.csv"))
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

/// Writes a dataset as a JSON envelope, or, for `.csv` paths, as a matrix
/// plus a `<stem>.labels.csv` sidecar.
pub fn write_dataset(path: &Path, dataset: &LearningDataset) -> Result<Vec<PathBuf>> {
    if !is_csv(path) {
        write_json(path, "dataset", dataset)?;
        return Ok(vec![path.to_path_buf()]);
    }
    let mut w = csv::Writer::from_writer(create(path)?);
    let mut header = vec!["user_id".to_string()];
    header.extend(dataset.feature_names.iter().cloned());
    w.write_record(&header)?;
    for row in &dataset.rows {
        let mut rec = vec![row.user_id.clone()];
        rec.extend(row.counts.iter().map(u64::to_string));
        w.write_record(&rec)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;

    let sidecar = labels_sidecar(path);
    let mut w = csv::Writer::from_writer(create(&sidecar)?);
    w.write_record(["user_id", "dimension", "pole", "score"])?;
    for (dim, labels) in &dataset.labels {
        for (user, label) in labels {
            let score = label.score.map(|s| s.to_string()).unwrap_or_default();
            w.write_record([user.as_str(), dim.name(), dim.pole_name(label.pole), score.as_str()])?;
        }
    }
    w.flush().map_err(|e| Error::io(&sidecar, e))?;
    Ok(vec![path.to_path_buf(), sidecar])
}

pub fn read_dataset(path: &Path) -> Result<LearningDataset> {
    let dataset = if is_csv(path) {
        read_dataset_csv(path)?
    } else {
        read_json(path, "dataset")?
    };
    dataset.validate()?;
    Ok(dataset)
}

fn read_dataset_csv(path: &Path) -> Result<LearningDataset> {
    let mut r = csv::Reader::from_reader(File::open(path).map_err(|e| Error::io(path, e))?);
    let header = r.headers()?.clone();
    let feature_names: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let counts = rec
            .iter()
            .skip(1)
            .map(|v| v.trim().parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Data(format!("{} row {}: {e}", path.display(), i + 1)))?;
        rows.push(ProfileRow {
            user_id: rec[0].to_string(),
            counts,
        });
    }
    let mut dataset = LearningDataset::new(feature_names, rows)?;
    let sidecar = labels_sidecar(path);
    if sidecar.exists() {
        let mut r = csv::Reader::from_reader(File::open(&sidecar).map_err(|e| Error::io(&sidecar, e))?);
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let bad = |msg: String| Error::Data(format!("{} row {}: {msg}", sidecar.display(), i + 1));
            let dim: Dimension = rec.get(1).unwrap_or("").parse().map_err(|e| bad(format!("{e}")))?;
            let pole_name = rec.get(2).unwrap_or("");
            let pole = if pole_name.eq_ignore_ascii_case(dim.pole_name(Pole::First)) {
                Pole::First
            } else if pole_name.eq_ignore_ascii_case(dim.pole_name(Pole::Second)) {
                Pole::Second
            } else {
                return Err(bad(format!("'{pole_name}' is not a pole of {}", dim.name())));
            };
            let label = match rec.get(3).map(str::trim).filter(|s| !s.is_empty()) {
                Some(s) => {
                    let score: i32 = s.parse().map_err(|_| bad(format!("bad score '{s}'")))?;
                    stylemill_core::style::label_from_score(dim, score)?
                }
                None => DimensionLabel::pole_only(dim, pole),
            };
            if label.pole != pole {
                return Err(bad("score sign disagrees with pole".into()));
            }
            dataset.set_label(&rec[0], label);
        }
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_mapping_is_valid() {
        let m = load_mapping(None).unwrap();
        assert_eq!(m.feature_names.len(), 8);
    }

    #[test]
    fn ils_rows_with_and_without_header() {
        let a44 = "a".repeat(44);
        let text = format!("user,answers\ns1,{a44}\n");
        let rows = parse_ils(text.as_bytes()).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].1.iter().all(|l| l.score == Some(11)));
        let split: String = std::iter::repeat_n("b", 44).collect::<Vec<_>>().join(",");
        let rows = parse_ils(format!("s2,{split}\n").as_bytes()).unwrap();
        assert!(rows[0].1.iter().all(|l| l.pole == Pole::Second));
        let err = parse_ils("s3,abab\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("expected 44 answers"), "{err}");
    }

    #[test]
    fn dataset_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let mut ds = LearningDataset::new(
            vec!["a".into(), "b".into()],
            vec![
                ProfileRow {
                    user_id: "x".into(),
                    counts: vec![1, 2],
                },
                ProfileRow {
                    user_id: "y".into(),
                    counts: vec![3, 4],
                },
            ],
        )
        .unwrap();
        ds.set_label(
            "x",
            stylemill_core::style::label_from_score(Dimension::Input, -5).unwrap(),
        );
        ds.set_label("y", DimensionLabel::pole_only(Dimension::Processing, Pole::First));
        let path = dir.path().join("d.csv");
        let written = write_dataset(&path, &ds).unwrap();
        assert_eq!(written[1], dir.path().join("d.labels.csv"));
        assert_eq!(read_dataset(&path).unwrap(), ds);
        let json = dir.path().join("d.json");
        write_dataset(&json, &ds).unwrap();
        assert_eq!(read_dataset(&json).unwrap(), ds);
        assert!(read_json::<LearningDataset>(&json, "model").is_err());
    }
}
