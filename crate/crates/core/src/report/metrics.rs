use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Confusion counts with class 1 as the positive class.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Confusion {
    pub fn total(&self) -> usize {
        self.tp + self.fp + self.tn + self.fn_
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub accuracy: f64,
    /// `tp / (tp + fn)`; absent without positives.
    pub sensitivity: Option<f64>,
    /// `tn / (tn + fp)`; absent without negatives.
    pub specificity: Option<f64>,
    /// Absent when only one class is present.
    pub roc_auc: Option<f64>,
    pub confusion: Confusion,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn compute_metrics(outputs: &[f64], labels: &[u8], threshold: f64) -> Result<MetricsBundle> {
    if outputs.is_empty() || outputs.len() != labels.len() {
        return Err(Error::Contract(format!(
            "{} outputs for {} labels",
            outputs.len(),
            labels.len()
        )));
    }
    let mut c = Confusion::default();
    for (&o, &l) in outputs.iter().zip(labels) {
        match (o > threshold, l == 1) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    Ok(MetricsBundle {
        accuracy: (c.tp + c.tn) as f64 / c.total() as f64,
        sensitivity: ratio(c.tp, c.tp + c.fn_),
        specificity: ratio(c.tn, c.tn + c.fp),
        roc_auc: roc_auc(outputs, labels),
        confusion: c,
    })
}

/// Area under the ROC curve via the Mann-Whitney rank statistic: the chance
/// that a random positive outscores a random negative, ties counting half.
pub fn roc_auc(outputs: &[f64], labels: &[u8]) -> Option<f64> {
    let positives = labels.iter().filter(|&&l| l == 1).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return None;
    }
    let mut order: Vec<usize> = (0..outputs.len()).collect();
    order.sort_by(|&a, &b| score_order(outputs[a], outputs[b]));

    // Twice the rank sum of the positives, so tied mid-ranks stay integral.
    let mut rank_sum2: u64 = 0;
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && score_order(outputs[order[end]], outputs[order[start]]).is_eq() {
            end += 1;
        }
        // ranks start+1 ..= end, mid-rank (start + 1 + end) / 2
        let mid2 = (start + 1 + end) as u64;
        let pos_in_group = order[start..end]
            .iter()
            .filter(|&&i| labels[i] == 1)
            .count() as u64;
        rank_sum2 += mid2 * pos_in_group;
        start = end;
    }
    let p = positives as u64;
    let u2 = rank_sum2 - p * (p + 1);
    Some(u2 as f64 / (2 * p * negatives as u64) as f64)
}

// Numeric order with -0 == +0; NaN sorts above everything and ties with NaN.
fn score_order(a: f64, b: f64) -> std::cmp::Ordering {
    a.partial_cmp(&b)
        .unwrap_or_else(|| a.is_nan().cmp(&b.is_nan()))
}

/// Accuracy of always predicting the larger class.
pub fn majority_baseline(labels: &[u8]) -> Result<f64> {
    if labels.is_empty() {
        return Err(Error::Contract("baseline of an empty label set".into()));
    }
    let ones = labels.iter().filter(|&&l| l == 1).count();
    Ok(ones.max(labels.len() - ones) as f64 / labels.len() as f64)
}
