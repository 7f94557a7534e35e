use std::fmt;

use crate::model::{Class, NUM_CLASSES};

/// 4x4 counts, rows = true class, columns = predicted class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: [[u64; NUM_CLASSES]; NUM_CLASSES],
}

impl ConfusionMatrix {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (Class, Class)>) -> Self {
        let mut cm = ConfusionMatrix::default();
        for (truth, pred) in pairs {
            cm.record(truth, pred);
        }
        cm
    }

    pub fn record(&mut self, truth: Class, predicted: Class) {
        self.counts[truth.index()][predicted.index()] += 1;
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..NUM_CLASSES).map(|i| self.counts[i][i]).sum()
    }

    pub fn true_positives(&self, c: usize) -> u64 {
        self.counts[c][c]
    }

    /// Predicted as `c` but truly another class.
    pub fn false_positives(&self, c: usize) -> u64 {
        (0..NUM_CLASSES).filter(|&r| r != c).map(|r| self.counts[r][c]).sum()
    }

    /// Truly `c` but predicted as another class.
    pub fn false_negatives(&self, c: usize) -> u64 {
        (0..NUM_CLASSES).filter(|&p| p != c).map(|p| self.counts[c][p]).sum()
    }

    pub fn support(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }
}

/// Precision, recall and F1 of one class, read one-vs-rest.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvaluationReport {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub per_class: [ClassMetrics; NUM_CLASSES],
    pub macro_f1: f64,
    pub weighted_f1: f64,
    /// Mean cross-entropy over the evaluated examples.
    pub mean_loss: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl EvaluationReport {
    /// Derives all metrics from a confusion matrix. Undefined ratios are 0.
    pub fn from_confusion(confusion: ConfusionMatrix, mean_loss: f64) -> Self {
        let mut per_class = [ClassMetrics::default(); NUM_CLASSES];
        for (c, m) in per_class.iter_mut().enumerate() {
            let tp = confusion.true_positives(c);
            let (fp, fn_) = (confusion.false_positives(c), confusion.false_negatives(c));
            let precision = ratio(tp, tp + fp);
            let recall = ratio(tp, tp + fn_);
            // 2PR/(P+R) without the intermediate roundings.
            let f1 = ratio(2 * tp, 2 * tp + fp + fn_);
            *m = ClassMetrics {
                precision,
                recall,
                f1,
                support: confusion.support(c),
            };
        }
        let total = confusion.total();
        let macro_f1 = per_class.iter().map(|m| m.f1).sum::<f64>() / NUM_CLASSES as f64;
        let weighted_f1 = if total == 0 {
            0.0
        } else {
            per_class.iter().map(|m| m.f1 * m.support as f64).sum::<f64>() / total as f64
        };
        EvaluationReport {
            accuracy: ratio(confusion.trace(), total),
            confusion,
            per_class,
            macro_f1,
            weighted_f1,
            mean_loss,
        }
    }
}

impl fmt::Display for EvaluationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Validation Accuracy = {:?}", self.accuracy)?;
        writeln!(f, "F1 Score = {:?}", self.weighted_f1)?;
        writeln!(f, "Macro F1 = {:?}", self.macro_f1)?;
        writeln!(f)?;
        writeln!(f, "{:<10} {:>9} {:>9} {:>9} {:>8}", "class", "precision", "recall", "f1", "support")?;
        for c in Class::ALL {
            let m = &self.per_class[c.index()];
            writeln!(
                f,
                "{:<10} {:>9.4} {:>9.4} {:>9.4} {:>8}",
                c.name(),
                m.precision,
                m.recall,
                m.f1,
                m.support
            )?;
        }
        writeln!(f)?;
        write!(f, "{:<10}", "true\\pred")?;
        for c in Class::ALL {
            write!(f, " {:>8}", c.name())?;
        }
        writeln!(f)?;
        for c in Class::ALL {
            write!(f, "{:<10}", c.name())?;
            for v in self.confusion.counts[c.index()] {
                write!(f, " {v:>8}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use Class::*;

    #[test]
    fn ten_prediction_example() {
        let truth = [Abusive, Abusive, Abusive, Normal, Normal, Normal, Hateful, Hateful, Spam, Spam];
        let pred = [Abusive, Abusive, Normal, Normal, Normal, Abusive, Hateful, Spam, Spam, Spam];
        let r = EvaluationReport::from_confusion(
            ConfusionMatrix::from_pairs(truth.into_iter().zip(pred)),
            0.0,
        );
        assert_eq!(r.accuracy, 0.7);
        // Abusive: TP 2, FP 1 (a normal), FN 1.
        let a = r.per_class[Abusive.index()];
        assert_eq!((a.precision, a.recall), (2.0 / 3.0, 2.0 / 3.0));
        // Spam: TP 2, FP 1 (a hateful), FN 0.
        let s = r.per_class[Spam.index()];
        assert_eq!((s.precision, s.recall), (2.0 / 3.0, 1.0));
        assert_eq!(s.f1, 0.8);
        let h = r.per_class[Hateful.index()];
        assert_eq!((h.precision, h.recall), (1.0, 0.5));
    }

    #[test]
    fn perfect_predictions() {
        let pairs = Class::ALL.into_iter().map(|c| (c, c));
        let r = EvaluationReport::from_confusion(ConfusionMatrix::from_pairs(pairs), 0.0);
        assert_eq!(r.accuracy, 1.0);
        assert!(r.per_class.iter().all(|m| m.f1 == 1.0));
        assert_eq!(r.macro_f1, 1.0);
    }

    #[test]
    fn single_class_predictions_on_balanced_set() {
        let pairs = Class::ALL.into_iter().flat_map(|c| [(c, Spam); 5]);
        let r = EvaluationReport::from_confusion(ConfusionMatrix::from_pairs(pairs), 0.0);
        assert_eq!(r.accuracy, 0.25);
        assert_eq!(r.per_class[Normal.index()].f1, 0.0);
    }

    #[test]
    fn absent_class_contributes_zero() {
        let r = EvaluationReport::from_confusion(
            ConfusionMatrix::from_pairs([(Normal, Normal), (Spam, Spam)]),
            0.0,
        );
        assert_eq!(r.per_class[Hateful.index()], ClassMetrics::default());
        assert_eq!(r.macro_f1, 0.5);
        assert_eq!(r.weighted_f1, 1.0);
    }

    #[test]
    fn display_uses_log_format() {
        let r = EvaluationReport::from_confusion(ConfusionMatrix::from_pairs([(Normal, Normal)]), 0.0);
        let text = r.to_string();
        assert!(text.starts_with("Validation Accuracy = 1.0\nF1 Score = "));
    }
}
