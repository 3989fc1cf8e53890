//! Prediction files in, `report.json` out.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use botgraph_core::{EvalReport, Label};
use serde::Serialize;

use crate::dataset::ManifestRow;

#[derive(Debug, thiserror::Error)]
pub enum EvalIoError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub score: f64,
}

/// Reads `session_id,label,score` rows.
pub fn read_predictions(path: &Path) -> Result<BTreeMap<String, Prediction>, EvalIoError> {
    let fmt = |reason: String| EvalIoError::Format { path: path.to_path_buf(), reason };
    let f = File::open(path).map_err(|source| EvalIoError::Io { path: path.to_path_buf(), source })?;
    let mut rdr = csv::Reader::from_reader(f);
    let headers = rdr.headers().map_err(|e| fmt(e.to_string()))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).ok_or_else(|| fmt(format!("missing column {name:?}")));
    let (si, li, sc) = (col("session_id")?, col("label")?, col("score")?);
    let mut out = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| fmt(e.to_string()))?;
        let row = i + 2;
        let id = rec.get(si).unwrap_or("").to_string();
        let label = Label::from_str(rec.get(li).unwrap_or("")).map_err(|e| fmt(format!("row {row}: {e}")))?;
        let score: f64 = rec
            .get(sc)
            .unwrap_or("")
            .trim()
            .parse()
            .map_err(|_| fmt(format!("row {row}: score is not a number")))?;
        if out.insert(id.clone(), Prediction { label, score }).is_some() {
            return Err(fmt(format!("row {row}: duplicate session id {id:?}")));
        }
    }
    Ok(out)
}

/// Ground truth from a dataset manifest; every row must be labeled.
pub fn truth_from_manifest(rows: &[ManifestRow], path: &Path) -> Result<BTreeMap<String, Label>, EvalIoError> {
    rows.iter()
        .map(|r| {
            r.label.map(|l| (r.session_id.clone(), l)).ok_or_else(|| EvalIoError::Format {
                path: path.to_path_buf(),
                reason: format!("session {:?} has no label", r.session_id),
            })
        })
        .collect()
}

#[derive(Serialize)]
struct ReportDoc {
    precision: Option<f64>,
    recall: Option<f64>,
    accuracy: Option<f64>,
    bor: Option<f64>,
    bos: Option<f64>,
    counts: CountsDoc,
}

#[derive(Serialize)]
struct CountsDoc {
    tp: u64,
    fp: u64,
    tn: u64,
    #[serde(rename = "fn")]
    fn_: u64,
}

pub fn report_json(report: &EvalReport) -> serde_json::Value {
    let doc = ReportDoc {
        precision: report.precision,
        recall: report.recall,
        accuracy: report.accuracy,
        bor: report.bor,
        bos: report.bos,
        counts: CountsDoc {
            tp: report.counts.tp,
            fp: report.counts.fp,
            tn: report.counts.tn,
            fn_: report.counts.fn_,
        },
    };
    serde_json::to_value(doc).expect("plain struct serializes")
}

pub fn write_report(path: &Path, report: &EvalReport) -> Result<(), EvalIoError> {
    let io_err = |source: io::Error| EvalIoError::Io { path: path.to_path_buf(), source };
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    serde_json::to_writer_pretty(&mut w, &report_json(report)).map_err(|e| io_err(e.into()))?;
    w.write_all(b"\n").and_then(|_| w.flush()).map_err(io_err)
}

/// Short human-readable summary; undefined metrics print as `n/a`.
pub fn summary(report: &EvalReport) -> String {
    let pct = |v: Option<f64>| v.map_or_else(|| "n/a".to_string(), |v| format!("{:.1}%", v * 100.0));
    let c = &report.counts;
    let mut s = String::new();
    let _ = write!(
        s,
        "precision {}  recall {}  accuracy {}  BoR {}  BoS {}  (tp={} fp={} tn={} fn={})",
        pct(report.precision),
        pct(report.recall),
        pct(report.accuracy),
        pct(report.bor),
        pct(report.bos),
        c.tp,
        c.fp,
        c.tn,
        c.fn_
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use botgraph_core::metrics::Confusion;

    fn tmp_file(name: &str, contents: &str) -> PathBuf {
        let p = std::env::temp_dir().join(format!("botgraph-eval-{name}-{}", std::process::id()));
        std::fs::write(&p, contents).unwrap();
        p
    }

    #[test]
    fn predictions_parse() {
        let p = tmp_file("ok", "session_id,label,score\na,bot,0.93\nb,human,0.1\n");
        let preds = read_predictions(&p).unwrap();
        assert_eq!(preds["a"], Prediction { label: Label::Bot, score: 0.93 });
        assert_eq!(preds["b"].label, Label::Human);
        std::fs::remove_file(p).unwrap();
    }

    #[test]
    fn predictions_errors() {
        let p = tmp_file("dup", "session_id,label,score\na,bot,1\na,bot,1\n");
        assert!(read_predictions(&p).unwrap_err().to_string().contains("duplicate"));
        let p2 = tmp_file("nolabel", "session_id,label,score\na,robot,1\n");
        assert!(read_predictions(&p2).is_err());
        for f in [p, p2] {
            std::fs::remove_file(f).unwrap();
        }
        assert!(matches!(read_predictions(Path::new("/nonexistent/p.csv")), Err(EvalIoError::Io { .. })));
    }

    #[test]
    fn report_shape() {
        let r = EvalReport {
            precision: Some(0.75),
            recall: None,
            accuracy: Some(0.7),
            bor: None,
            bos: Some(0.5),
            counts: Confusion { tp: 3, fp: 1, tn: 4, fn_: 2 },
        };
        let v = report_json(&r);
        assert_eq!(v["precision"], 0.75);
        assert!(v["recall"].is_null());
        assert_eq!(v["counts"]["fn"], 2);
        assert!(summary(&r).contains("recall n/a"));
    }
}
