//! Binary confusion counts and the accuracy / precision / recall / F1 row.
//!
//! The positive class is `+1.0`. Precision, recall and F1 are 0 whenever
//! their denominator is 0.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    /// Counts with predicted labels flipped.
    pub fn flip_predictions(&self) -> Self {
        Self {
            tp: self.fn_,
            fn_: self.tp,
            fp: self.tn,
            tn: self.fp,
        }
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            tp: self.tp + o.tp,
            fp: self.fp + o.fp,
            tn: self.tn + o.tn,
            fn_: self.fn_ + o.fn_,
        }
    }
}

pub fn confusion(predicted: &[f64], actual: &[f64]) -> Result<ConfusionCounts> {
    if predicted.len() != actual.len() {
        return Err(Error::LengthMismatch {
            left: predicted.len(),
            right: actual.len(),
        });
    }
    if predicted.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut c = ConfusionCounts::default();
    for (&p, &a) in predicted.iter().zip(actual) {
        if !is_sign(p) || !is_sign(a) {
            return Err(Error::InvalidDataset(format!(
                "labels must be +1 or -1, got prediction {p}, actual {a}"
            )));
        }
        match (p > 0.0, a > 0.0) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(c)
}

fn is_sign(v: f64) -> bool {
    v == 1.0 || v == -1.0
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// One row of the comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub model_name: String,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: ConfusionCounts,
}

pub fn report(c: ConfusionCounts) -> EvalReport {
    report_named("", c)
}

pub fn report_named(model_name: impl Into<String>, c: ConfusionCounts) -> EvalReport {
    let accuracy = ratio(c.tp + c.tn, c.total());
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    EvalReport {
        model_name: model_name.into(),
        accuracy,
        precision,
        recall,
        f1,
        counts: c,
    }
}

impl EvalReport {
    pub const TSV_HEADER: &'static str = "model\taccuracy\tprecision\trecall\tf1";

    pub fn tsv_row(&self) -> String {
        format!(
            "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
            self.model_name, self.accuracy, self.precision, self.recall, self.f1
        )
    }

    pub fn markdown_row(&self) -> String {
        format!(
            "| {} | {:.4} | {:.4} | {:.4} | {:.4} |",
            self.model_name, self.accuracy, self.precision, self.recall, self.f1
        )
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tsv_row())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn confusion_examples() {
        let c = confusion(&[1.0, -1.0], &[1.0, -1.0]).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 1,
                tn: 1,
                fp: 0,
                fn_: 0
            }
        );
        let c = confusion(&[1.0, 1.0], &[-1.0, -1.0]).unwrap();
        assert_eq!(c.fp, 2);
        let c = confusion(&[1.0, -1.0, 1.0, -1.0], &[1.0, 1.0, -1.0, -1.0]).unwrap();
        assert_eq!(
            c,
            ConfusionCounts {
                tp: 1,
                fn_: 1,
                fp: 1,
                tn: 1
            }
        );
    }

    #[test]
    fn confusion_errors() {
        assert!(matches!(confusion(&[1.0], &[]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(confusion(&[], &[]), Err(Error::EmptyInput)));
        assert!(confusion(&[0.5], &[1.0]).is_err());
    }

    #[test]
    fn report_examples() {
        let r = report(ConfusionCounts {
            tp: 1,
            tn: 1,
            fp: 0,
            fn_: 0,
        });
        assert_eq!((r.accuracy, r.precision, r.recall, r.f1), (1.0, 1.0, 1.0, 1.0));

        let r = report(ConfusionCounts {
            tp: 0,
            fp: 0,
            fn_: 5,
            tn: 5,
        });
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        assert_eq!(r.accuracy, 0.5);

        let r = report(ConfusionCounts {
            tp: 3,
            fp: 1,
            fn_: 2,
            tn: 4,
        });
        assert_eq!(r.precision, 0.75);
        assert_eq!(r.recall, 0.6);
        assert!((r.f1 - 2.0 * 0.45 / 1.35).abs() < 1e-15);
        assert!((r.accuracy - 0.7).abs() < 1e-15);
    }

    #[test]
    fn tsv_formatting() {
        let r = report_named(
            "SVM",
            ConfusionCounts {
                tp: 3,
                fp: 1,
                fn_: 2,
                tn: 4,
            },
        );
        assert_eq!(r.tsv_row(), "SVM\t0.7000\t0.7500\t0.6000\t0.6667");
    }

    fn counts() -> impl Strategy<Value = ConfusionCounts> {
        (0u64..50, 0u64..50, 0u64..50, 0u64..50)
            .prop_filter("nonempty", |(a, b, c, d)| a + b + c + d > 0)
            .prop_map(|(tp, fp, tn, fn_)| ConfusionCounts { tp, fp, tn, fn_ })
    }

    proptest! {
        #[test]
        fn statistics_are_bounded(c in counts()) {
            let r = report(c);
            for v in [r.accuracy, r.precision, r.recall, r.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            if r.precision > 0.0 && r.recall > 0.0 {
                prop_assert!(r.f1 >= r.precision.min(r.recall) - 1e-15);
                prop_assert!(r.f1 <= r.precision.max(r.recall) + 1e-15);
            }
        }

        #[test]
        fn label_swap(labels in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..40)) {
            let pred: Vec<f64> = labels.iter().map(|l| if l.0 { 1.0 } else { -1.0 }).collect();
            let act: Vec<f64> = labels.iter().map(|l| if l.1 { 1.0 } else { -1.0 }).collect();
            let c = confusion(&pred, &act).unwrap();
            let neg: Vec<f64> = pred.iter().map(|p| -p).collect();
            prop_assert_eq!(confusion(&neg, &act).unwrap(), c.flip_predictions());
            let neg_act: Vec<f64> = act.iter().map(|a| -a).collect();
            prop_assert_eq!(report(confusion(&neg, &neg_act).unwrap()).accuracy, report(c).accuracy);
        }
    }
}
