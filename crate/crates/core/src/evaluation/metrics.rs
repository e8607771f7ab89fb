//! Confusion matrices and per-class reports.

use std::collections::BTreeSet;
use std::io::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    labels: Vec<String>,
    /// `counts[i][j]`: documents of true class `i` predicted as class `j`.
    counts: Vec<Vec<usize>>,
}

impl ConfusionMatrix {
    /// Builds a matrix directly from counts. `labels` must be sorted and
    /// unique, and `counts` square with one row per label.
    pub fn from_counts(labels: Vec<String>, counts: Vec<Vec<usize>>) -> Result<Self> {
        if labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::contract("confusion labels must be sorted and unique"));
        }
        if counts.len() != labels.len() || counts.iter().any(|r| r.len() != labels.len()) {
            return Err(Error::contract("confusion counts must be square over the labels"));
        }
        Ok(ConfusionMatrix { labels, counts })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn counts(&self) -> &[Vec<usize>] {
        &self.counts
    }

    pub fn get(&self, true_idx: usize, pred_idx: usize) -> usize {
        self.counts[true_idx][pred_idx]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> usize {
        (0..self.labels.len()).map(|i| self.counts[i][i]).sum()
    }

    pub fn class_counts(&self, c: usize) -> ClassCounts {
        let tp = self.counts[c][c];
        let row: usize = self.counts[c].iter().sum();
        let col: usize = self.counts.iter().map(|r| r[c]).sum();
        let fp = col - tp;
        let fn_ = row - tp;
        ClassCounts {
            tp,
            fp,
            fn_,
            tn: self.total() - tp - fp - fn_,
        }
    }

    /// Labeled CSV: header row of predicted labels, one row per true label.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["true\\predicted".to_string()];
        header.extend(self.labels.iter().cloned());
        out.write_record(&header)?;
        for (label, row) in self.labels.iter().zip(&self.counts) {
            let mut rec = vec![label.clone()];
            rec.extend(row.iter().map(usize::to_string));
            out.write_record(&rec)?;
        }
        out.flush().map_err(|e| Error::io("<csv>", e))
    }
}

/// Tallies predictions against the sorted, deduplicated `labels`.
pub fn confusion<A, B, L>(y_true: &[A], y_pred: &[B], labels: &[L]) -> Result<ConfusionMatrix>
where
    A: AsRef<str>,
    B: AsRef<str>,
    L: AsRef<str>,
{
    if y_true.len() != y_pred.len() {
        return Err(Error::contract(format!(
            "{} true labels but {} predictions",
            y_true.len(),
            y_pred.len()
        )));
    }
    let labels: Vec<String> = labels
        .iter()
        .map(|l| l.as_ref().to_string())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index = |l: &str, what: &str| {
        labels
            .binary_search_by(|x| x.as_str().cmp(l))
            .map_err(|_| Error::contract(format!("{what} label {l:?} is not a known class")))
    };
    let mut counts = vec![vec![0usize; labels.len()]; labels.len()];
    for (t, p) in y_true.iter().zip(y_pred) {
        counts[index(t.as_ref(), "true")?][index(p.as_ref(), "predicted")?] += 1;
    }
    Ok(ConfusionMatrix { labels, counts })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClassCounts {
    pub tp: usize,
    pub tn: usize,
    pub fp: usize,
    pub fn_: usize,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl ClassCounts {
    pub fn support(&self) -> usize {
        self.tp + self.fn_
    }

    pub fn total(&self) -> usize {
        self.tp + self.tn + self.fp + self.fn_
    }

    /// Ratios derived from the counts. Empty denominators give 0.
    pub fn metrics(&self) -> ClassMetrics {
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.support());
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        ClassMetrics {
            counts: *self,
            tpr: recall,
            fnr: if self.support() == 0 { 0.0 } else { 1.0 - recall },
            precision,
            recall,
            f1,
            support: self.support(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassMetrics {
    pub counts: ClassCounts,
    pub tpr: f64,
    pub fnr: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassReport {
    pub classes: Vec<(String, ClassMetrics)>,
    pub total: usize,
    pub accuracy: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
}

pub const REPORT_COLUMNS: [&str; 10] = [
    "TP", "TN", "FP", "FN", "TPR", "FNR", "precision", "recall", "f1-score", "support",
];

pub fn class_report(cm: &ConfusionMatrix) -> ClassReport {
    let classes: Vec<(String, ClassMetrics)> = cm
        .labels
        .iter()
        .enumerate()
        .map(|(i, l)| (l.clone(), cm.class_counts(i).metrics()))
        .collect();
    let k = classes.len().max(1) as f64;
    let mean = |f: fn(&ClassMetrics) -> f64| classes.iter().map(|(_, m)| f(m)).sum::<f64>() / k;
    ClassReport {
        total: cm.total(),
        accuracy: ratio(cm.trace(), cm.total()),
        macro_precision: mean(|m| m.precision),
        macro_recall: mean(|m| m.recall),
        macro_f1: mean(|m| m.f1),
        classes,
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.6}")
}

impl ClassReport {
    /// One row per class in the fixed column order, then `accuracy` and
    /// `macro avg` summary rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let mut header = vec!["category"];
        header.extend(REPORT_COLUMNS);
        out.write_record(&header)?;
        for (label, m) in &self.classes {
            let c = m.counts;
            out.write_record([
                label.clone(),
                c.tp.to_string(),
                c.tn.to_string(),
                c.fp.to_string(),
                c.fn_.to_string(),
                fmt(m.tpr),
                fmt(m.fnr),
                fmt(m.precision),
                fmt(m.recall),
                fmt(m.f1),
                m.support.to_string(),
            ])?;
        }
        let blank = || String::new();
        let mut acc = vec![blank(); 11];
        acc[0] = "accuracy".into();
        acc[9] = fmt(self.accuracy);
        acc[10] = self.total.to_string();
        out.write_record(&acc)?;
        let mut avg = vec![blank(); 11];
        avg[0] = "macro avg".into();
        avg[7] = fmt(self.macro_precision);
        avg[8] = fmt(self.macro_recall);
        avg[9] = fmt(self.macro_f1);
        avg[10] = self.total.to_string();
        out.write_record(&avg)?;
        out.flush().map_err(|e| Error::io("<csv>", e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn toy_two_items() {
        let cm = confusion(&["a", "b"], &["b", "b"], &["b", "a"]).unwrap();
        assert_eq!(cm.labels(), ["a", "b"]);
        assert_eq!(cm.counts(), [vec![0, 1], vec![0, 1]]);
    }

    #[test]
    fn unknown_prediction_rejected() {
        let err = confusion(&["a"], &["z"], &["a"]).unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
        assert!(confusion(&["a", "a"], &["a"], &["a"]).is_err());
    }

    #[test]
    fn books_row() {
        let m = ClassCounts { tp: 76, tn: 1988, fp: 1, fn_: 9 }.metrics();
        assert!((m.precision - 0.99).abs() < 0.005);
        assert!((m.recall - 0.89).abs() < 0.005);
        assert!((m.f1 - 0.94).abs() < 0.005);
        assert_eq!(m.support, 85);
    }

    #[test]
    fn empty_class_has_zero_metrics() {
        let m = ClassCounts { tp: 0, tn: 10, fp: 3, fn_: 0 }.metrics();
        assert_eq!((m.precision, m.recall, m.f1, m.fnr), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn report_csv_layout() {
        let cm = confusion(&["a", "b", "b"], &["a", "b", "a"], &["a", "b"]).unwrap();
        let mut buf = Vec::new();
        class_report(&cm).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(
            lines[0],
            "category,TP,TN,FP,FN,TPR,FNR,precision,recall,f1-score,support"
        );
        assert_eq!(lines[1], "a,1,1,1,0,1.000000,0.000000,0.500000,1.000000,0.666667,1");
        assert_eq!(lines[3], "accuracy,,,,,,,,,0.666667,3");
        let mut cm_buf = Vec::new();
        cm.write_csv(&mut cm_buf).unwrap();
        assert_eq!(
            String::from_utf8(cm_buf).unwrap(),
            "true\\predicted,a,b\na,1,0\nb,1,1\n"
        );
    }

    proptest! {
        #[test]
        fn identities_hold(pairs in prop::collection::vec((0u8..5, 0u8..5), 1..200)) {
            let t: Vec<String> = pairs.iter().map(|p| format!("c{}", p.0)).collect();
            let p: Vec<String> = pairs.iter().map(|p| format!("c{}", p.1)).collect();
            let labels: Vec<String> = (0..5).map(|i| format!("c{i}")).collect();
            let cm = confusion(&t, &p, &labels).unwrap();
            let r = class_report(&cm);
            let mut tp_sum = 0;
            for (i, (_, m)) in r.classes.iter().enumerate() {
                prop_assert_eq!(m.counts.total(), pairs.len());
                prop_assert_eq!(m.support, cm.counts()[i].iter().sum::<usize>());
                if m.support > 0 {
                    prop_assert!((m.tpr + m.fnr - 1.0).abs() < 1e-12);
                }
                tp_sum += m.counts.tp;
            }
            prop_assert_eq!(tp_sum, cm.trace());
            prop_assert!((r.accuracy * pairs.len() as f64 - tp_sum as f64).abs() < 1e-9);
        }
    }
}
