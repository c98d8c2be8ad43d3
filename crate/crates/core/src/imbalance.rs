//! ADASYN oversampling of the minority class.
//!
//! Each minority sample gets a share of the synthetic budget proportional to
//! how many of its K nearest neighbours belong to the majority class, so
//! samples near the class boundary are oversampled hardest. Synthetic points
//! are interpolated between a minority sample and one of its K nearest
//! minority neighbours.
//!
//! Distances are Euclidean on the raw stored values; sequential samples are
//! compared as their row-major flattening. Equal distances are ordered by
//! sample index.

use std::cmp::Ordering;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::error::{Error, Result};
use crate::seed::{self, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdasynConfig {
    pub k_neighbors: usize,
    /// Fraction of the class gap to fill; 1 balances exactly.
    pub beta: f64,
    /// Imbalance degrees at or above this generate nothing.
    pub threshold: f64,
}

impl Default for AdasynConfig {
    fn default() -> Self {
        AdasynConfig {
            k_neighbors: 5,
            beta: 1.0,
            threshold: 1.0,
        }
    }
}

impl AdasynConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_neighbors == 0 {
            return Err(Error::Config(
                "ADASYN k_neighbors must be at least 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::Config(format!(
                "ADASYN beta {} not in [0, 1]",
                self.beta
            )));
        }
        if !(self.threshold > 0.0 && self.threshold <= 1.0) {
            return Err(Error::Config(format!(
                "ADASYN threshold {} not in (0, 1]",
                self.threshold
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinorityRecord {
    /// Majority samples among the K nearest neighbours.
    pub majority_neighbors: usize,
    /// `majority_neighbors / K`.
    pub ratio: f64,
    /// Ratio normalised over all minority samples.
    pub density: f64,
    /// Synthetic samples to grow from this one.
    pub quota: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdasynPlan {
    pub k_neighbors: usize,
    pub minority_count: usize,
    pub majority_count: usize,
    /// `minority_count / majority_count`.
    pub imbalance_degree: f64,
    pub total: usize,
    /// One record per minority sample, in input order.
    pub records: Vec<MinorityRecord>,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn by_distance(a: &(f64, usize), b: &(f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
}

/// Indices of the `k` points nearest to `points[query]`, excluding the query
/// itself, nearest first.
pub fn nearest_neighbors(points: &[&[f64]], query: usize, k: usize) -> Vec<usize> {
    let mut candidates: Vec<(f64, usize)> = points
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != query)
        .map(|(j, p)| (squared_distance(points[query], p), j))
        .collect();
    let k = k.min(candidates.len());
    if k == 0 {
        return Vec::new();
    }
    if k < candidates.len() {
        candidates.select_nth_unstable_by(k - 1, by_distance);
        candidates.truncate(k);
    }
    candidates.sort_unstable_by(by_distance);
    candidates.into_iter().map(|(_, j)| j).collect()
}

/// Splits `total` into integer parts proportional to `weights` (which must
/// not all be zero). Floors first, then hands the remainder out by largest
/// fractional part, lower index first on ties. Exact integer arithmetic.
fn apportion(weights: &[u64], total: u64) -> Vec<u64> {
    let sum: u64 = weights.iter().sum();
    let mut parts: Vec<u64> = weights.iter().map(|&w| w * total / sum).collect();
    let assigned: u64 = parts.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(weights[i] * total % sum));
    for &i in order.iter().take((total - assigned) as usize) {
        parts[i] += 1;
    }
    parts
}

/// Computes how many synthetic samples each minority sample contributes.
/// Neighbours are searched over `minority` followed by `majority`; that
/// concatenated order breaks distance ties.
pub fn plan(minority: &[Sample], majority: &[Sample], cfg: &AdasynConfig) -> Result<AdasynPlan> {
    cfg.validate()?;
    let (m_s, m_l) = (minority.len(), majority.len());
    if m_s == 0 {
        return Err(Error::Imbalance("no minority samples".into()));
    }
    if m_l < m_s {
        return Err(Error::Imbalance(format!(
            "minority has {m_s} samples but majority only {m_l}"
        )));
    }
    if cfg.k_neighbors >= m_s + m_l {
        return Err(Error::Config(format!(
            "k_neighbors {} needs more than {} training samples",
            cfg.k_neighbors,
            m_s + m_l
        )));
    }

    let degree = m_s as f64 / m_l as f64;
    let total = if degree >= cfg.threshold {
        0
    } else {
        ((m_l - m_s) as f64 * cfg.beta).round() as usize
    };

    let points: Vec<&[f64]> = minority
        .iter()
        .chain(majority)
        .map(|s| s.features.as_slice())
        .collect();
    let k = cfg.k_neighbors;
    let counts: Vec<usize> = (0..m_s)
        .map(|i| {
            nearest_neighbors(&points, i, k)
                .into_iter()
                .filter(|&j| j >= m_s)
                .count()
        })
        .collect();

    let any = counts.iter().any(|&c| c > 0);
    let weights: Vec<u64> = counts
        .iter()
        .map(|&c| if any { c as u64 } else { 1 })
        .collect();
    let weight_sum: u64 = weights.iter().sum();
    let quotas = apportion(&weights, total as u64);

    let records = counts
        .iter()
        .zip(&weights)
        .zip(quotas)
        .map(|((&c, &w), q)| MinorityRecord {
            majority_neighbors: c,
            ratio: c as f64 / k as f64,
            density: w as f64 / weight_sum as f64,
            quota: q as usize,
        })
        .collect();

    Ok(AdasynPlan {
        k_neighbors: k,
        minority_count: m_s,
        majority_count: m_l,
        imbalance_degree: degree,
        total,
        records,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSample {
    pub sample: Sample,
    /// Minority sample the point was grown from.
    pub parent: usize,
    /// Minority neighbour it was interpolated towards; `None` for a copy.
    pub neighbor: Option<usize>,
    pub weight: f64,
}

/// Generates the synthetic samples a plan calls for. Indices in the result
/// refer to positions in `minority`.
pub fn synthesize(plan: &AdasynPlan, minority: &[Sample], rng: &mut Rng) -> Vec<SyntheticSample> {
    assert_eq!(
        plan.records.len(),
        minority.len(),
        "plan does not match minority set"
    );
    let points: Vec<&[f64]> = minority.iter().map(|s| s.features.as_slice()).collect();
    let mut out = Vec::with_capacity(plan.total);
    for (i, record) in plan.records.iter().enumerate() {
        if record.quota == 0 {
            continue;
        }
        let parent = &minority[i];
        let neighbors = nearest_neighbors(&points, i, plan.k_neighbors);
        for n in 0..record.quota {
            let id = format!("{}~syn{n}", parent.id);
            let (features, neighbor, weight) = if neighbors.is_empty() {
                (parent.features.clone(), None, 0.0)
            } else {
                let z = neighbors[seed::index(rng, neighbors.len())];
                let u = seed::unit(rng);
                let features = parent
                    .features
                    .iter()
                    .zip(&minority[z].features)
                    .map(|(&a, &b)| (a + (b - a) * u).clamp(a.min(b), a.max(b)))
                    .collect();
                (features, Some(z), u)
            };
            out.push(SyntheticSample {
                sample: Sample {
                    id,
                    features,
                    label: parent.label,
                    synthetic: true,
                },
                parent: i,
                neighbor,
                weight,
            });
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct Balanced {
    /// Original training samples followed by the synthetic ones.
    pub samples: Vec<Sample>,
    pub plan: AdasynPlan,
    /// Provenance, with `parent` and `neighbor` as indices into the training
    /// set passed to [`balance_training`].
    pub synthetic: Vec<SyntheticSample>,
    pub minority_class: u8,
}

impl Balanced {
    pub fn synthetic_count(&self) -> usize {
        self.synthetic.len()
    }
}

/// Oversamples the smaller class of a training set. Validation and test data
/// never pass through here.
pub fn balance_training(train: &[Sample], cfg: &AdasynConfig, rng: &mut Rng) -> Result<Balanced> {
    let mut by_class: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, s) in train.iter().enumerate() {
        by_class[s.label as usize].push(i);
    }
    if by_class.iter().any(Vec::is_empty) {
        return Err(Error::Imbalance(format!(
            "training set needs both classes, has {} of class 0 and {} of class 1",
            by_class[0].len(),
            by_class[1].len()
        )));
    }
    let minority_class = u8::from(by_class[1].len() < by_class[0].len());
    let minority_idx = &by_class[minority_class as usize];
    let majority_idx = &by_class[1 - minority_class as usize];
    let minority: Vec<Sample> = minority_idx.iter().map(|&i| train[i].clone()).collect();
    let majority: Vec<Sample> = majority_idx.iter().map(|&i| train[i].clone()).collect();

    let plan = plan(&minority, &majority, cfg)?;
    let mut synthetic = synthesize(&plan, &minority, rng);
    for s in &mut synthetic {
        s.parent = minority_idx[s.parent];
        s.neighbor = s.neighbor.map(|z| minority_idx[z]);
    }
    let mut samples = train.to_vec();
    samples.extend(synthetic.iter().map(|s| s.sample.clone()));
    Ok(Balanced {
        samples,
        plan,
        synthetic,
        minority_class,
    })
}

/// Writes one CSV row per synthetic sample: id, parent, neighbour and
/// interpolation weight. Copies have an empty neighbour cell.
pub fn write_audit(path: &Path, synthetic: &[SyntheticSample]) -> Result<()> {
    let mut text = String::from("synthetic_id,parent,neighbor,weight\n");
    for s in synthetic {
        let neighbor = s.neighbor.map(|n| n.to_string()).unwrap_or_default();
        text.push_str(&format!(
            "{},{},{},{}\n",
            s.sample.id, s.parent, neighbor, s.weight
        ));
    }
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
