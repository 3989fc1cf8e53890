//! Access-log readers and writers (JSON lines and CSV).

use std::io::{self, BufRead, Write};
use std::str::FromStr;

use botgraph_core::{HttpMethod, Label, Request, Timestamp};
use chrono::{DateTime, NaiveDate, NaiveDateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum LogFormat {
    Jsonl,
    Csv,
}

impl LogFormat {
    /// Guesses the format from a file extension, defaulting to JSON lines.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => LogFormat::Csv,
            _ => LogFormat::Jsonl,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("cannot read log stream: {0}")]
    Input(#[from] io::Error),
    #[error("{malformed} of {total} lines malformed, first at line {first_line}")]
    Format { first_line: usize, malformed: usize, total: usize },
    #[error("csv header: {0}")]
    Header(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedLog {
    pub requests: Vec<Request>,
    /// Lines that failed to parse or violated a field invariant.
    pub malformed: usize,
    /// 1-based line number of the first malformed line.
    pub first_malformed_line: Option<usize>,
}

/// Wire form of one log line.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct LogRecord {
    timestamp: String,
    http_method: String,
    request_uri: String,
    status: i64,
    host: String,
    user_agent: String,
    client_ip: String,
    session_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

const CSV_COLUMNS: [&str; 8] =
    ["timestamp", "http_method", "request_uri", "status", "host", "user_agent", "client_ip", "session_id"];

impl LogRecord {
    fn into_request(self) -> Option<Request> {
        let status = u16::try_from(self.status).ok()?;
        let label = match self.label.as_deref() {
            None | Some("") => None,
            Some(l) => Some(Label::from_str(l).ok()?),
        };
        let req = Request {
            timestamp: parse_timestamp(&self.timestamp)?,
            http_method: HttpMethod::from_str(&self.http_method).unwrap_or(HttpMethod::Get),
            request_uri: self.request_uri,
            status,
            host: self.host,
            user_agent: self.user_agent,
            client_ip: self.client_ip,
            session_id: self.session_id,
            label,
        };
        req.validate().ok()?;
        Some(req)
    }

    fn from_request(r: &Request) -> Self {
        LogRecord {
            timestamp: format_timestamp(r.timestamp),
            http_method: r.http_method.to_string(),
            request_uri: r.request_uri.clone(),
            status: i64::from(r.status),
            host: r.host.clone(),
            user_agent: r.user_agent.clone(),
            client_ip: r.client_ip.clone(),
            session_id: r.session_id.clone(),
            label: r.label.map(|l| l.as_str().to_string()),
        }
    }
}

/// ISO-8601 with optional offset; naive times are UTC. A bare date means midnight.
pub fn parse_timestamp(s: &str) -> Option<Timestamp> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(Timestamp(dt.timestamp_millis()));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(dt) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(Timestamp(dt.and_utc().timestamp_millis()));
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| Timestamp(dt.and_utc().timestamp_millis()))
}

pub fn format_timestamp(ts: Timestamp) -> String {
    DateTime::<Utc>::from_timestamp_millis(ts.as_millis())
        .map(|dt| dt.to_rfc3339_opts(SecondsFormat::Millis, true))
        .unwrap_or_else(|| ts.as_millis().to_string())
}

/// Parses a whole log. Malformed lines are skipped and counted; if more than
/// half of the non-blank lines are malformed the stream is rejected.
pub fn parse_log<R: BufRead>(reader: R, format: LogFormat) -> Result<ParsedLog, LogError> {
    let mut out = ParsedLog { requests: Vec::new(), malformed: 0, first_malformed_line: None };
    let mut total = 0;
    let bad = |line: usize, out: &mut ParsedLog| {
        out.malformed += 1;
        out.first_malformed_line.get_or_insert(line);
    };

    match format {
        LogFormat::Jsonl => {
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                total += 1;
                match serde_json::from_str::<LogRecord>(&line).ok().and_then(LogRecord::into_request) {
                    Some(r) => out.requests.push(r),
                    None => bad(i + 1, &mut out),
                }
            }
        }
        LogFormat::Csv => {
            let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(reader);
            let headers = rdr.headers().map_err(csv_to_log_error)?.clone();
            if headers.is_empty() {
                return Ok(out);
            }
            if let Some(missing) = CSV_COLUMNS.iter().find(|c| !headers.iter().any(|h| h == **c)) {
                return Err(LogError::Header(format!("missing column {missing:?}")));
            }
            for row in rdr.records() {
                let row = match row {
                    Ok(row) => row,
                    Err(e) => {
                        if let csv::ErrorKind::Io(_) = e.kind() {
                            return Err(csv_to_log_error(e));
                        }
                        total += 1;
                        let line = e.position().map_or(0, |p| p.line() as usize);
                        bad(line, &mut out);
                        continue;
                    }
                };
                total += 1;
                let line = row.position().map_or(0, |p| p.line() as usize);
                match row.deserialize::<LogRecord>(Some(&headers)).ok().and_then(LogRecord::into_request) {
                    Some(r) => out.requests.push(r),
                    None => bad(line, &mut out),
                }
            }
        }
    }

    if out.malformed * 2 > total {
        return Err(LogError::Format {
            first_line: out.first_malformed_line.unwrap_or(0),
            malformed: out.malformed,
            total,
        });
    }
    Ok(out)
}

fn csv_to_log_error(e: csv::Error) -> LogError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => LogError::Input(io),
        other => LogError::Header(format!("{other:?}")),
    }
}

pub fn write_jsonl<W: Write>(mut w: W, requests: &[Request]) -> io::Result<()> {
    for r in requests {
        serde_json::to_writer(&mut w, &LogRecord::from_request(r))?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn write_csv<W: Write>(w: W, requests: &[Request]) -> io::Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = CSV_COLUMNS.to_vec();
    header.push("label");
    wtr.write_record(&header)?;
    for r in requests {
        let rec = LogRecord::from_request(r);
        wtr.write_record([
            rec.timestamp.as_str(),
            &rec.http_method,
            &rec.request_uri,
            &rec.status.to_string(),
            &rec.host,
            &rec.user_agent,
            &rec.client_ip,
            &rec.session_id,
            rec.label.as_deref().unwrap_or(""),
        ])?;
    }
    wtr.flush()
}
