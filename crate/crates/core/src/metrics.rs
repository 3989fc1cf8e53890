//! Detection metrics with `bot` as the positive class.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::request::{Label, Session};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Confusion {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl Confusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn precision(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> Option<f64> {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn accuracy(&self) -> Option<f64> {
        ratio(self.tp + self.tn, self.total())
    }
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// `None` marks a metric whose denominator is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub accuracy: Option<f64>,
    /// Bot share of requests; needs per-session request counts.
    pub bor: Option<f64>,
    /// Bot share of sessions, from the ground truth.
    pub bos: Option<f64>,
    pub counts: Confusion,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("metrics undefined on an empty session set")]
    Empty,
    #[error("session {0:?} has no label")]
    Unlabeled(String),
    #[error("no prediction for {} session(s): {}", .0.len(), .0.join(", "))]
    MissingPredictions(Vec<String>),
    #[error("prediction for unknown session {0:?}")]
    UnknownSession(String),
}

/// `(bor, bos)`: bot share of requests and of sessions.
pub fn bot_shares(sessions: &[Session]) -> Result<(f64, f64), MetricsError> {
    let counted = sessions
        .iter()
        .map(|s| s.label.map(|l| (l, s.requests.len() as u64)).ok_or_else(|| MetricsError::Unlabeled(s.session_id.clone())))
        .collect::<Result<Vec<_>, _>>()?;
    shares_from_counts(counted)
}

/// Same as [`bot_shares`] over `(label, request count)` pairs.
pub fn shares_from_counts<I: IntoIterator<Item = (Label, u64)>>(sessions: I) -> Result<(f64, f64), MetricsError> {
    let (mut n_sessions, mut n_bot_sessions, mut n_requests, mut n_bot_requests) = (0u64, 0u64, 0u64, 0u64);
    for (label, len) in sessions {
        n_sessions += 1;
        n_requests += len;
        if label.is_bot() {
            n_bot_sessions += 1;
            n_bot_requests += len;
        }
    }
    if n_sessions == 0 || n_requests == 0 {
        return Err(MetricsError::Empty);
    }
    Ok((n_bot_requests as f64 / n_requests as f64, n_bot_sessions as f64 / n_sessions as f64))
}

/// Compares predictions against ground truth. Every truth key needs a
/// prediction and no prediction may name an unknown session.
pub fn evaluate(
    truth: &BTreeMap<String, Label>,
    predictions: &BTreeMap<String, Label>,
) -> Result<EvalReport, MetricsError> {
    if let Some(extra) = predictions.keys().find(|k| !truth.contains_key(*k)) {
        return Err(MetricsError::UnknownSession(extra.clone()));
    }
    let missing: Vec<String> = truth.keys().filter(|k| !predictions.contains_key(*k)).cloned().collect();
    if !missing.is_empty() {
        return Err(MetricsError::MissingPredictions(missing));
    }
    let mut c = Confusion::default();
    for (id, actual) in truth {
        match (actual.is_bot(), predictions[id].is_bot()) {
            (true, true) => c.tp += 1,
            (false, true) => c.fp += 1,
            (false, false) => c.tn += 1,
            (true, false) => c.fn_ += 1,
        }
    }
    Ok(EvalReport {
        precision: c.precision(),
        recall: c.recall(),
        accuracy: c.accuracy(),
        bor: None,
        bos: ratio(c.tp + c.fn_, c.total()),
        counts: c,
    })
}

impl EvalReport {
    /// Fills in `bor` from per-session request counts of the truth set.
    pub fn with_request_counts(
        mut self,
        truth: &BTreeMap<String, Label>,
        lengths: &BTreeMap<String, u64>,
    ) -> Self {
        let pairs = truth.iter().map(|(id, l)| (*l, lengths.get(id).copied().unwrap_or(0)));
        self.bor = shares_from_counts(pairs).ok().map(|(bor, _)| bor);
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::request::{HttpMethod, Request, Timestamp};
    use alloc::format;
    use alloc::string::ToString;
    use alloc::vec;

    fn labels(v: &[(&str, Label)]) -> BTreeMap<String, Label> {
        v.iter().map(|(k, l)| (k.to_string(), *l)).collect()
    }

    fn session(id: &str, label: Option<Label>, len: usize) -> Session {
        let r = Request {
            timestamp: Timestamp(0),
            http_method: HttpMethod::Get,
            request_uri: "/".into(),
            status: 200,
            host: "h".into(),
            user_agent: "u".into(),
            client_ip: "i".into(),
            session_id: id.into(),
            label,
        };
        Session { session_id: id.into(), requests: vec![r; len], label }
    }

    #[test]
    fn shares_direct_ratios() {
        // 7 bot sessions holding 90 requests, 3 human sessions holding 10
        let mut sessions = Vec::new();
        for i in 0..7 {
            sessions.push(session(&format!("b{i}"), Some(Label::Bot), if i < 6 { 13 } else { 12 }));
        }
        for i in 0..3 {
            sessions.push(session(&format!("h{i}"), Some(Label::Human), if i < 2 { 3 } else { 4 }));
        }
        let (bor, bos) = bot_shares(&sessions).unwrap();
        assert!((bor - 0.9).abs() < 1e-12);
        assert!((bos - 0.7).abs() < 1e-12);
    }

    #[test]
    fn all_human_shares_are_zero() {
        let sessions = vec![session("a", Some(Label::Human), 3), session("b", Some(Label::Human), 2)];
        assert_eq!(bot_shares(&sessions).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn longer_bot_sessions_push_bor_above_bos() {
        let mut sessions = Vec::new();
        for i in 0..50 {
            sessions.push(session(&format!("b{i}"), Some(Label::Bot), 40 + i % 7));
            sessions.push(session(&format!("h{i}"), Some(Label::Human), 5 + i % 4));
        }
        let (bor, bos) = bot_shares(&sessions).unwrap();
        assert!(bos >= 0.49);
        assert!(bor > bos);
    }

    #[test]
    fn shares_errors() {
        assert_eq!(bot_shares(&[]), Err(MetricsError::Empty));
        assert_eq!(bot_shares(&[session("x", None, 1)]), Err(MetricsError::Unlabeled("x".into())));
    }

    #[test]
    fn perfect_predictions() {
        let t = labels(&[("a", Label::Bot), ("b", Label::Human), ("c", Label::Bot)]);
        let r = evaluate(&t, &t).unwrap();
        assert_eq!((r.precision, r.recall, r.accuracy), (Some(1.0), Some(1.0), Some(1.0)));
    }

    #[test]
    fn everything_flagged() {
        let t = labels(&[("a", Label::Bot), ("b", Label::Human), ("c", Label::Bot), ("d", Label::Human)]);
        let p = t.keys().map(|k| (k.clone(), Label::Bot)).collect();
        let r = evaluate(&t, &p).unwrap();
        assert_eq!((r.precision, r.recall, r.accuracy), (Some(0.5), Some(1.0), Some(0.5)));
        assert_eq!(r.bos, Some(0.5));
    }

    #[test]
    fn hand_counted_confusion() {
        // tp=3 fp=1 fn=2 tn=4
        let mut t = BTreeMap::new();
        let mut p = BTreeMap::new();
        let rows = [(3, Label::Bot, Label::Bot), (1, Label::Human, Label::Bot), (2, Label::Bot, Label::Human), (4, Label::Human, Label::Human)];
        let mut k = 0;
        for (n, truth, pred) in rows {
            for _ in 0..n {
                t.insert(format!("s{k:02}"), truth);
                p.insert(format!("s{k:02}"), pred);
                k += 1;
            }
        }
        let r = evaluate(&t, &p).unwrap();
        assert_eq!(r.counts, Confusion { tp: 3, fp: 1, tn: 4, fn_: 2 });
        assert!((r.precision.unwrap() - 0.75).abs() < 1e-12);
        assert!((r.recall.unwrap() - 0.6).abs() < 1e-12);
        assert!((r.accuracy.unwrap() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn zero_denominators_are_undefined() {
        let t = labels(&[("a", Label::Human)]);
        let r = evaluate(&t, &t).unwrap();
        assert_eq!(r.precision, None);
        assert_eq!(r.recall, None);
        assert_eq!(r.accuracy, Some(1.0));
        let r = evaluate(&BTreeMap::new(), &BTreeMap::new()).unwrap();
        assert_eq!(r.accuracy, None);
    }

    #[test]
    fn coverage_errors() {
        let t = labels(&[("a", Label::Bot), ("b", Label::Human)]);
        let p = labels(&[("a", Label::Bot)]);
        assert_eq!(evaluate(&t, &p), Err(MetricsError::MissingPredictions(vec!["b".into()])));
        let p = labels(&[("a", Label::Bot), ("b", Label::Bot), ("z", Label::Bot)]);
        assert_eq!(evaluate(&t, &p), Err(MetricsError::UnknownSession("z".into())));
    }

    #[test]
    fn bor_from_lengths() {
        let t = labels(&[("a", Label::Bot), ("b", Label::Human)]);
        let lengths = [("a".to_string(), 30u64), ("b".to_string(), 10)].into_iter().collect();
        let r = evaluate(&t, &t).unwrap().with_request_counts(&t, &lengths);
        assert_eq!(r.bor, Some(0.75));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn bounded_and_order_free(rows in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..60)) {
                let lab = |b: bool| if b { Label::Bot } else { Label::Human };
                let t: BTreeMap<String, Label> = rows.iter().enumerate().map(|(i, r)| (format!("{i}"), lab(r.0))).collect();
                let p: BTreeMap<String, Label> = rows.iter().enumerate().map(|(i, r)| (format!("{i}"), lab(r.1))).collect();
                let r = evaluate(&t, &p).unwrap();
                prop_assert_eq!(r.counts.total(), rows.len() as u64);
                for m in [r.precision, r.recall, r.accuracy, r.bos].into_iter().flatten() {
                    prop_assert!((0.0..=1.0).contains(&m));
                }
                // re-keyed in reverse order gives the same counts
                let n = rows.len();
                let t2: BTreeMap<String, Label> = rows.iter().enumerate().map(|(i, r)| (format!("{}", n - i), lab(r.0))).collect();
                let p2: BTreeMap<String, Label> = rows.iter().enumerate().map(|(i, r)| (format!("{}", n - i), lab(r.1))).collect();
                prop_assert_eq!(evaluate(&t2, &p2).unwrap().counts, r.counts);
            }
        }
    }
}
