use serde::{Deserialize, Serialize};

use super::LinkPredError;

/// Probability that a random positive outranks a random negative, ties
/// counted as one half. Computed from average ranks in `O(n log n)`.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<f64, LinkPredError> {
    assert_eq!(scores.len(), labels.len(), "scores and labels differ in length");
    let p = labels.iter().filter(|&&l| l).count();
    let n = labels.len() - p;
    if p == 0 || n == 0 {
        return Err(LinkPredError::SingleClass);
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut rank_sum = 0.0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && scores[order[j + 1]] == scores[order[i]] {
            j += 1;
        }
        // Ranks i+1 ..= j+1 share their mean.
        let avg = (i + j + 2) as f64 / 2.0;
        rank_sum += avg * order[i..=j].iter().filter(|&&k| labels[k]).count() as f64;
        i = j + 1;
    }
    let (p, n) = (p as f64, n as f64);
    Ok((rank_sum - p * (p + 1.0) / 2.0) / (p * n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdmMetrics {
    /// Fraction of held-out positives scored at or above the threshold.
    pub positive_sample_accuracy: f64,
    /// Fraction of negatives scored at or above the threshold.
    pub positive_predictions_on_negatives: f64,
    /// Plain accuracy over both sets at the threshold.
    pub accuracy: f64,
}

pub fn mdm_metrics(scores_pos: &[f64], scores_neg: &[f64], threshold: f64) -> MdmMetrics {
    let hits = |s: &[f64]| s.iter().filter(|&&x| x >= threshold).count();
    let frac = |k: usize, s: &[f64]| if s.is_empty() { 0.0 } else { k as f64 / s.len() as f64 };
    let tp = hits(scores_pos);
    let fp = hits(scores_neg);
    let total = scores_pos.len() + scores_neg.len();
    MdmMetrics {
        positive_sample_accuracy: frac(tp, scores_pos),
        positive_predictions_on_negatives: frac(fp, scores_neg),
        accuracy: if total == 0 { 0.0 } else { (tp + scores_neg.len() - fp) as f64 / total as f64 },
    }
}

/// Held-out metrics of a single training run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub seed: u64,
    pub roc_auc: f64,
    pub accuracy: f64,
    pub positive_sample_accuracy: f64,
    pub positive_predictions_on_negatives: f64,
    pub final_loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation, zero for a single run.
    pub std_dev: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Summary {
        let n = values.len() as f64;
        if values.is_empty() {
            return Summary { mean: 0.0, std_dev: 0.0 };
        }
        let mean = values.iter().sum::<f64>() / n;
        let var = if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Summary { mean, std_dev: var.sqrt() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub roc_auc: Summary,
    pub accuracy: Summary,
    pub positive_sample_accuracy: Summary,
    pub positive_predictions_on_negatives: Summary,
    pub runs: Vec<RunMetrics>,
}

impl MetricsReport {
    pub fn from_runs(runs: Vec<RunMetrics>) -> Self {
        let col = |f: fn(&RunMetrics) -> f64| Summary::of(&runs.iter().map(f).collect::<Vec<_>>());
        MetricsReport {
            roc_auc: col(|r| r.roc_auc),
            accuracy: col(|r| r.accuracy),
            positive_sample_accuracy: col(|r| r.positive_sample_accuracy),
            positive_predictions_on_negatives: col(|r| r.positive_predictions_on_negatives),
            runs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auc_edges() {
        assert_eq!(roc_auc(&[0.9, 0.8, 0.1], &[true, true, false]).unwrap(), 1.0);
        assert_eq!(roc_auc(&[0.5; 4], &[true, false, true, false]).unwrap(), 0.5);
        assert!(matches!(roc_auc(&[0.1], &[true]), Err(LinkPredError::SingleClass)));
    }

    #[test]
    fn hand_counted_metrics() {
        let m = mdm_metrics(&[0.6, 0.4], &[0.7, 0.2], 0.5);
        assert_eq!((m.positive_sample_accuracy, m.positive_predictions_on_negatives), (0.5, 0.5));
        let m = mdm_metrics(&[0.9; 3], &[0.1; 3], 0.5);
        assert_eq!((m.positive_sample_accuracy, m.positive_predictions_on_negatives, m.accuracy), (1.0, 0.0, 1.0));
        let m = mdm_metrics(&[0.1; 3], &[0.1; 3], 0.5);
        assert_eq!((m.positive_sample_accuracy, m.positive_predictions_on_negatives), (0.0, 0.0));
    }

    #[test]
    fn summary_std() {
        let s = Summary::of(&[1.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert!((s.std_dev - 2f64.sqrt()).abs() < 1e-12);
    }
}
