//! Moodle log exports → canonical event records.

use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};
use stylemill_core::features::LogEvent;

use crate::error::{Error, Result};

/// The five columns that survive cleaning, in canonical order.
pub const CANONICAL_COLUMNS: [&str; 5] = ["time", "user_id", "event_name", "component", "event_context"];

/// Timestamp format of canonical files.
pub const CANONICAL_TIME_FORMAT: &str = "%Y-%m-%d %H:%M";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Time,
    UserId,
    EventName,
    Component,
    EventContext,
}

impl Field {
    pub const ALL: [Field; 5] = [
        Field::Time,
        Field::UserId,
        Field::EventName,
        Field::Component,
        Field::EventContext,
    ];

    pub fn canonical_name(self) -> &'static str {
        CANONICAL_COLUMNS[self as usize]
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventRecord {
    /// Minute precision.
    pub time: NaiveDateTime,
    pub user_id: String,
    pub event_name: String,
    pub component: String,
    pub event_context: String,
}

impl LogEvent for EventRecord {
    fn user_id(&self) -> &str {
        &self.user_id
    }
    fn event_name(&self) -> &str {
        &self.event_name
    }
    fn component(&self) -> &str {
        &self.component
    }
    fn event_context(&self) -> &str {
        &self.event_context
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CleaningReport {
    pub rows_read: usize,
    pub rows_kept: usize,
    pub rows_dropped_malformed: usize,
    /// Header columns that were discarded, in file order.
    pub fields_dropped: Vec<String>,
    pub users_removed_incomplete: usize,
    /// 1-based data row numbers of skipped rows (first 100).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub malformed_rows: Vec<usize>,
}

const MAX_LISTED_MALFORMED: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ParseOptions {
    /// Lower-case header name → field. Matching trims and lower-cases the
    /// header first.
    pub aliases: BTreeMap<String, Field>,
    /// chrono formats tried in order.
    pub time_formats: Vec<String>,
    /// Fail on the first malformed row instead of skipping it.
    pub strict: bool,
    pub delimiter: u8,
}

impl Default for ParseOptions {
    fn default() -> Self {
        let pairs: &[(&str, Field)] = &[
            ("time", Field::Time),
            ("timestamp", Field::Time),
            ("date", Field::Time),
            ("user full name", Field::UserId),
            ("user_id", Field::UserId),
            ("userid", Field::UserId),
            ("user", Field::UserId),
            ("event name", Field::EventName),
            ("event_name", Field::EventName),
            ("eventname", Field::EventName),
            ("component", Field::Component),
            ("event context", Field::EventContext),
            ("event_context", Field::EventContext),
            ("context", Field::EventContext),
        ];
        Self {
            aliases: pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            time_formats: [
                CANONICAL_TIME_FORMAT,
                "%d/%m/%y, %H:%M",
                "%d/%m/%Y, %H:%M",
                "%d/%m/%y %H:%M",
                "%d/%m/%Y %H:%M",
                "%Y-%m-%dT%H:%M",
                "%Y-%m-%d %H:%M:%S",
                "%Y-%m-%dT%H:%M:%S",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            strict: false,
            delimiter: b',',
        }
    }
}

impl ParseOptions {
    /// Adds user aliases (header name → canonical field name) on top of the
    /// defaults.
    pub fn with_aliases(mut self, extra: &BTreeMap<String, String>) -> Result<Self> {
        for (header, target) in extra {
            let field = Field::ALL
                .into_iter()
                .find(|f| f.canonical_name() == target.trim().to_ascii_lowercase())
                .ok_or_else(|| {
                    Error::Config(format!(
                        "alias '{header}' targets unknown field '{target}' (expected one of {})",
                        CANONICAL_COLUMNS.join(", ")
                    ))
                })?;
            self.aliases.insert(header.trim().to_lowercase(), field);
        }
        Ok(self)
    }

    fn parse_time(&self, raw: &str) -> Option<NaiveDateTime> {
        let raw = raw.trim();
        self.time_formats
            .iter()
            .find_map(|f| NaiveDateTime::parse_from_str(raw, f).ok())
            .map(truncate_to_minute)
    }
}

fn truncate_to_minute(t: NaiveDateTime) -> NaiveDateTime {
    use chrono::Timelike;
    t.with_second(0).and_then(|t| t.with_nanosecond(0)).unwrap_or(t)
}

/// Reads a delimited log export with a header row and keeps the five
/// canonical fields of every well-formed row.
pub fn parse_event_log<R: Read>(source: R, options: &ParseOptions) -> Result<(Vec<EventRecord>, CleaningReport)> {
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .flexible(true)
        .has_headers(true)
        .from_reader(source);
    let headers = reader.headers()?.clone();
    let mut columns: HashMap<Field, usize> = HashMap::new();
    let mut report = CleaningReport::default();
    for (i, name) in headers.iter().enumerate() {
        let key = name.trim().trim_start_matches('\u{feff}').to_lowercase();
        match options.aliases.get(&key) {
            Some(&field) if !columns.contains_key(&field) => {
                columns.insert(field, i);
            }
            _ => report.fields_dropped.push(name.to_string()),
        }
    }
    let missing: Vec<&str> = Field::ALL
        .into_iter()
        .filter(|f| !columns.contains_key(f))
        .map(Field::canonical_name)
        .collect();
    if !missing.is_empty() {
        return Err(Error::Config(format!(
            "log header lacks required column(s): {} (found: {})",
            missing.join(", "),
            headers.iter().collect::<Vec<_>>().join(", ")
        )));
    }
    let col = |f: Field| columns[&f];

    let mut records = Vec::new();
    for (row, result) in reader.records().enumerate() {
        let row_number = row + 1;
        report.rows_read += 1;
        let parsed = result.map_err(|e| e.to_string()).and_then(|rec| {
            let get = |f: Field| {
                rec.get(col(f))
                    .map(str::to_string)
                    .ok_or_else(|| format!("missing {}", f.canonical_name()))
            };
            let time_raw = get(Field::Time)?;
            let time = options
                .parse_time(&time_raw)
                .ok_or_else(|| format!("unparseable timestamp '{time_raw}'"))?;
            let user_id = get(Field::UserId)?.trim().to_string();
            if user_id.is_empty() {
                return Err("empty user id".to_string());
            }
            Ok(EventRecord {
                time,
                user_id,
                event_name: get(Field::EventName)?,
                component: get(Field::Component)?,
                event_context: get(Field::EventContext)?,
            })
        });
        match parsed {
            Ok(r) => {
                records.push(r);
                report.rows_kept += 1;
            }
            Err(msg) if options.strict => {
                return Err(Error::Data(format!("row {row_number}: {msg}")));
            }
            Err(_) => {
                report.rows_dropped_malformed += 1;
                if report.malformed_rows.len() < MAX_LISTED_MALFORMED {
                    report.malformed_rows.push(row_number);
                }
            }
        }
    }
    Ok((records, report))
}

/// Drops every record of users with fewer than `min_events` records.
pub fn remove_incomplete_users(records: Vec<EventRecord>, min_events: usize) -> (Vec<EventRecord>, CleaningReport) {
    let mut counts: HashMap<&str, usize> = HashMap::new();
    for r in &records {
        *counts.entry(r.user_id.as_str()).or_default() += 1;
    }
    let removed = counts.values().filter(|&&c| c < min_events).count();
    let keep: std::collections::HashSet<String> = counts
        .iter()
        .filter(|(_, &c)| c >= min_events)
        .map(|(u, _)| u.to_string())
        .collect();
    let read = records.len();
    let kept: Vec<EventRecord> = records.into_iter().filter(|r| keep.contains(&r.user_id)).collect();
    let report = CleaningReport {
        rows_read: read,
        rows_kept: kept.len(),
        users_removed_incomplete: removed,
        ..CleaningReport::default()
    };
    (kept, report)
}

/// Writes records with exactly the canonical five columns.
pub fn write_canonical<W: Write>(records: &[EventRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CANONICAL_COLUMNS)?;
    for r in records {
        let time = r.time.format(CANONICAL_TIME_FORMAT).to_string();
        w.write_record([time.as_str(), &r.user_id, &r.event_name, &r.component, &r.event_context])?;
    }
    w.flush().map_err(|e| Error::Csv(e.into()))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIG3: &str = "IP address,Origin,Description,Event name,Component,Event context,Affected user,User full name,Time\n\
46.248.200.91,web,The user with id '117840',Course viewed,System,Course: COMPUTER SKILLS,,u117840,\"15/11/20, 14:32\"\n";

    #[test]
    fn keeps_only_canonical_fields() {
        let (records, report) = parse_event_log(FIG3.as_bytes(), &ParseOptions::default()).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].user_id, "u117840");
        assert_eq!(records[0].event_name, "Course viewed");
        assert_eq!(
            records[0].time.format(CANONICAL_TIME_FORMAT).to_string(),
            "2020-11-15 14:32"
        );
        assert_eq!(
            report.fields_dropped,
            ["IP address", "Origin", "Description", "Affected user"]
        );
        let mut out = Vec::new();
        write_canonical(&records, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "time,user_id,event_name,component,event_context\n2020-11-15 14:32,u117840,Course viewed,System,Course: COMPUTER SKILLS\n");
        for dropped in ["IP address", "Origin", "Description", "Affected user"] {
            assert!(!text.contains(dropped));
        }
    }

    #[test]
    fn header_only_and_missing_column() {
        let (r, rep) = parse_event_log(
            "time,user_id,event_name,component,event_context\n".as_bytes(),
            &ParseOptions::default(),
        )
        .unwrap();
        assert!(r.is_empty());
        assert_eq!(rep.rows_read, 0);
        let err = parse_event_log("time,user_id,component\n".as_bytes(), &ParseOptions::default()).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("event_name"));
    }

    #[test]
    fn malformed_rows_skip_or_fail() {
        let src = "time,user_id,event_name,component,event_context\n2020-11-15 14:32,a,x,y,z\nyesterday,b,x,y,z\n";
        let (r, rep) = parse_event_log(src.as_bytes(), &ParseOptions::default()).unwrap();
        assert_eq!((r.len(), rep.rows_read, rep.rows_dropped_malformed), (1, 2, 1));
        assert_eq!(rep.malformed_rows, [2]);
        let strict = ParseOptions {
            strict: true,
            ..ParseOptions::default()
        };
        let err = parse_event_log(src.as_bytes(), &strict).unwrap_err();
        assert!(err.to_string().contains("row 2"), "{err}");
    }

    #[test]
    fn aliases_extend_defaults() {
        let extra: BTreeMap<String, String> = [("Nom complet".to_string(), "user_id".to_string())].into();
        let opts = ParseOptions::default().with_aliases(&extra).unwrap();
        let src = "time,Nom complet,event_name,component,event_context\n2020-11-15 14:32,a,x,y,z\n";
        assert_eq!(parse_event_log(src.as_bytes(), &opts).unwrap().0.len(), 1);
        let bad: BTreeMap<String, String> = [("x".to_string(), "nope".to_string())].into();
        assert!(ParseOptions::default().with_aliases(&bad).is_err());
    }

    fn rec(user: &str) -> EventRecord {
        EventRecord {
            time: NaiveDateTime::parse_from_str("2020-01-01 00:00", CANONICAL_TIME_FORMAT).unwrap(),
            user_id: user.into(),
            event_name: "e".into(),
            component: "c".into(),
            event_context: "x".into(),
        }
    }

    #[test]
    fn incomplete_users_are_removed() {
        let mut records: Vec<EventRecord> = (0..5).map(|_| rec("A")).collect();
        records.insert(2, rec("B"));
        let (kept, rep) = remove_incomplete_users(records.clone(), 2);
        assert_eq!(kept.len(), 5);
        assert!(kept.iter().all(|r| r.user_id == "A"));
        assert_eq!(rep.users_removed_incomplete, 1);
        assert_eq!(remove_incomplete_users(records.clone(), 0).0, records);
        let (none, rep) = remove_incomplete_users(records, 10);
        assert!(none.is_empty());
        assert_eq!(rep.users_removed_incomplete, 2);
    }
}
