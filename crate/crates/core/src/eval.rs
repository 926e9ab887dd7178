//! Clustering, classification and detection metrics, and cross-validation
//! folds.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::LabeledDataset;

fn check_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch(a, b));
    }
    Ok(())
}

/// Counts `n[k][l]` of observations in predicted cluster `k` with true
/// label `l`. Rows and columns follow the ascending order of the distinct
/// cluster ids and labels.
#[derive(Debug, Clone, PartialEq)]
pub struct ContingencyTable {
    pub clusters: Vec<u32>,
    pub labels: Vec<u32>,
    pub counts: Vec<Vec<u64>>,
}

impl ContingencyTable {
    pub fn new(predicted: &[u32], truth: &[u32]) -> Result<Self> {
        check_len(predicted.len(), truth.len())?;
        let index = |v: &[u32]| -> BTreeMap<u32, usize> {
            let mut m = BTreeMap::new();
            for &x in v {
                m.entry(x).or_insert(0);
            }
            for (i, val) in m.values_mut().enumerate() {
                *val = i;
            }
            m
        };
        let ki = index(predicted);
        let li = index(truth);
        let mut counts = vec![vec![0u64; li.len()]; ki.len()];
        for (p, t) in predicted.iter().zip(truth) {
            counts[ki[p]][li[t]] += 1;
        }
        Ok(Self {
            clusters: ki.into_keys().collect(),
            labels: li.into_keys().collect(),
            counts,
        })
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    fn row_sums(&self) -> Vec<u64> {
        self.counts.iter().map(|r| r.iter().sum()).collect()
    }

    fn col_sums(&self) -> Vec<u64> {
        (0..self.labels.len())
            .map(|l| self.counts.iter().map(|r| r[l]).sum())
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusteringMetrics {
    pub purity: f64,
    pub nmi: f64,
    pub rand_index: f64,
    pub f1: f64,
}

fn entropy(sums: &[u64], n: f64) -> f64 {
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

fn pairs(x: u64) -> f64 {
    (x as f64) * (x as f64 - 1.0) / 2.0
}

/// Purity, NMI (geometric-mean normalisation, natural logs, 0 when either
/// partition is trivial), Rand index and pair-counting F1.
pub fn clustering_metrics(predicted: &[u32], truth: &[u32]) -> Result<ClusteringMetrics> {
    let t = ContingencyTable::new(predicted, truth)?;
    let n_obs = t.total();
    if n_obs < 2 {
        return Err(Error::InvalidParameter(
            "clustering metrics need at least 2 observations".into(),
        ));
    }
    let n = n_obs as f64;
    let rows = t.row_sums();
    let cols = t.col_sums();

    let purity = t
        .counts
        .iter()
        .map(|r| *r.iter().max().unwrap_or(&0))
        .sum::<u64>() as f64
        / n;

    let hk = entropy(&rows, n);
    let hl = entropy(&cols, n);
    let mut mi = 0.0;
    for (k, row) in t.counts.iter().enumerate() {
        for (l, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (rows[k] as f64 * cols[l] as f64)).ln();
            }
        }
    }
    let nmi = if hk <= 0.0 || hl <= 0.0 {
        0.0
    } else {
        (mi / (hk * hl).sqrt()).clamp(0.0, 1.0)
    };

    let tp: f64 = t.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let same_cluster: f64 = rows.iter().map(|&c| pairs(c)).sum();
    let same_label: f64 = cols.iter().map(|&c| pairs(c)).sum();
    let fp = same_cluster - tp;
    let fne = same_label - tp;
    let total = pairs(n_obs);
    let tn = total - tp - fp - fne;
    let rand_index = (tp + tn) / total;
    let f1 = if tp == 0.0 {
        0.0
    } else {
        2.0 * tp / (2.0 * tp + fp + fne)
    };

    Ok(ClusteringMetrics {
        purity,
        nmi,
        rand_index,
        f1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    /// `(label, f1)` for every label seen in either vector, ascending.
    pub per_class_f1: Vec<(u32, f64)>,
    pub macro_f1: f64,
}

fn f1_from_counts(tp: u64, fp: u64, fne: u64) -> f64 {
    if tp == 0 {
        0.0
    } else {
        2.0 * tp as f64 / (2 * tp + fp + fne) as f64
    }
}

pub fn classification_metrics(predicted: &[u32], truth: &[u32]) -> Result<ClassificationMetrics> {
    check_len(predicted.len(), truth.len())?;
    if truth.is_empty() {
        return Err(Error::InvalidParameter("no predictions to score".into()));
    }
    let correct = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    let mut labels: Vec<u32> = predicted.iter().chain(truth).copied().collect();
    labels.sort_unstable();
    labels.dedup();
    let per_class_f1: Vec<(u32, f64)> = labels
        .iter()
        .map(|&l| {
            let mut tp = 0;
            let mut fp = 0;
            let mut fne = 0;
            for (&p, &t) in predicted.iter().zip(truth) {
                match (p == l, t == l) {
                    (true, true) => tp += 1,
                    (true, false) => fp += 1,
                    (false, true) => fne += 1,
                    _ => {}
                }
            }
            (l, f1_from_counts(tp, fp, fne))
        })
        .collect();
    let macro_f1 = per_class_f1.iter().map(|x| x.1).sum::<f64>() / per_class_f1.len() as f64;
    Ok(ClassificationMetrics {
        accuracy: correct as f64 / truth.len() as f64,
        per_class_f1,
        macro_f1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetectionMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Novel is the positive class. Precision is 0 when nothing is flagged,
/// recall is 0 when there are no novelties.
pub fn detection_metrics(flags: &[bool], novel: &[bool]) -> Result<DetectionMetrics> {
    check_len(flags.len(), novel.len())?;
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut fne = 0u64;
    for (&f, &t) in flags.iter().zip(novel) {
        match (f, t) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fne += 1,
            _ => {}
        }
    }
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    Ok(DetectionMetrics {
        precision: ratio(tp, tp + fp),
        recall: ratio(tp, tp + fne),
        f1: f1_from_counts(tp, fp, fne),
    })
}

/// Shuffled index list, position `i` going to fold `i % k`.
fn deal(order: &[usize], k: usize, folds: &mut [Vec<usize>], offset: usize) {
    for (pos, &idx) in order.iter().enumerate() {
        folds[(pos + offset) % k].push(idx);
    }
}

/// Partition of `0..n` into `k` folds of near-equal size (the first
/// `n % k` folds get one extra element). Every fold is sorted.
pub fn kfold_indices(n: usize, k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!(
            "fold count {k} must be in 2..={n}"
        )));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut folds = vec![Vec::with_capacity(n / k + 1); k];
    deal(&order, k, &mut folds, 0);
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// Folds for a dataset. The stratified variant shuffles each class
/// separately and deals the classes (ascending label order) one after the
/// other, continuing the round-robin, so every fold holds each class to
/// within one member.
pub fn kfold(ds: &LabeledDataset, k: usize, seed: u64, stratified: bool) -> Result<Vec<Vec<usize>>> {
    if !stratified {
        return kfold_indices(ds.len(), k, seed);
    }
    let n = ds.len();
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!(
            "fold count {k} must be in 2..={n}"
        )));
    }
    ds.require_labels()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for label in ds.classes() {
        let mut members = ds.indices_with_label(label);
        members.shuffle(&mut rng);
        deal(&members, k, &mut folds, offset);
        offset = (offset + members.len()) % k;
    }
    folds.iter_mut().for_each(|f| f.sort_unstable());
    Ok(folds)
}

/// Indices outside `fold`, ascending.
pub fn complement(n: usize, fold: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; n];
    for &i in fold {
        inside[i] = true;
    }
    (0..n).filter(|&i| !inside[i]).collect()
}

/// Mean and sample standard deviation (0 for a single value).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
    pub n: usize,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: f64::NAN,
                std: f64::NAN,
                n,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let std = if n < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self { mean, std, n }
    }
}

impl std::fmt::Display for Summary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:.4} ± {:.4}", self.mean, self.std)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::PointPattern;
    use proptest::prelude::*;

    #[test]
    fn perfect_partition_scores_one() {
        let l = [1, 1, 2, 2, 3];
        let m = clustering_metrics(&[7, 7, 4, 4, 9], &l).unwrap();
        assert_eq!(m.purity, 1.0);
        assert!((m.nmi - 1.0).abs() < 1e-12);
        assert_eq!(m.rand_index, 1.0);
        assert_eq!(m.f1, 1.0);
    }

    #[test]
    fn purity_hand_count() {
        // Clusters {a,a,b} and {b,b}.
        let m = clustering_metrics(&[1, 1, 1, 2, 2], &[1, 1, 2, 2, 2]).unwrap();
        assert!((m.purity - 0.8).abs() < 1e-15);
        // Pairs: 10 total; same cluster 3+1, same label 1+3, both 1+1.
        assert!((m.rand_index - 0.6).abs() < 1e-15);
        assert!((m.f1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn nmi_by_hand() {
        let pred = [1, 1, 2, 2];
        let truth = [1, 2, 1, 2];
        let m = clustering_metrics(&pred, &truth).unwrap();
        assert!(m.nmi.abs() < 1e-15);
        let m = clustering_metrics(&[1, 1, 1, 2], &[1, 1, 2, 2]).unwrap();
        // Mutual information straight from the joint table.
        let n = 4.0f64;
        let mi = 2.0 / n * ((2.0 * n) / (3.0 * 2.0)).ln()
            + 1.0 / n * ((1.0 * n) / (3.0 * 2.0)).ln()
            + 1.0 / n * ((1.0 * n) / (1.0 * 2.0)).ln();
        let hk = -(0.75f64 * 0.75f64.ln() + 0.25 * 0.25f64.ln());
        let hl = 2.0f64.ln();
        assert!((m.nmi - mi / (hk * hl).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn single_cluster_nmi_is_zero() {
        let m = clustering_metrics(&[1, 1, 1], &[1, 2, 2]).unwrap();
        assert_eq!(m.nmi, 0.0);
    }

    #[test]
    fn length_mismatch_is_an_error() {
        assert!(matches!(
            clustering_metrics(&[1], &[1, 2]),
            Err(Error::LengthMismatch(1, 2))
        ));
        assert!(classification_metrics(&[1], &[]).is_err());
        assert!(detection_metrics(&[true], &[]).is_err());
    }

    #[test]
    fn classification_counts() {
        assert_eq!(classification_metrics(&[1, 2], &[1, 2]).unwrap().accuracy, 1.0);
        assert_eq!(classification_metrics(&[2, 1], &[1, 2]).unwrap().accuracy, 0.0);
        let m = classification_metrics(&[1, 1, 2, 2], &[1, 1, 2, 1]).unwrap();
        assert_eq!(m.accuracy, 0.75);
        // Class 1: tp 2, fn 1 -> 0.8. Class 2: tp 1, fp 1 -> 2/3.
        assert!((m.per_class_f1[0].1 - 0.8).abs() < 1e-15);
        assert!((m.per_class_f1[1].1 - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.macro_f1 - (0.8 + 2.0 / 3.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn detection_counts() {
        let mut flags = vec![true; 10];
        let mut novel = vec![true; 10];
        flags.extend([false, false]);
        novel.extend([true, true]);
        novel[0] = false;
        novel[1] = false;
        // TP 8, FP 2, FN 2.
        let m = detection_metrics(&flags, &novel).unwrap();
        assert!((m.precision - 0.8).abs() < 1e-15);
        assert!((m.recall - 0.8).abs() < 1e-15);
        assert!((m.f1 - 0.8).abs() < 1e-15);

        let m = detection_metrics(&[false, false], &[true, false]).unwrap();
        assert_eq!((m.recall, m.f1), (0.0, 0.0));
        let m = detection_metrics(&[true, false], &[true, false]).unwrap();
        assert_eq!(m.f1, 1.0);
    }

    #[test]
    fn fold_sizes() {
        let f = kfold_indices(10, 10, 1).unwrap();
        assert!(f.iter().all(|x| x.len() == 1));
        let f = kfold_indices(9, 4, 1).unwrap();
        let sizes: Vec<usize> = f.iter().map(Vec::len).collect();
        assert_eq!(sizes, vec![3, 2, 2, 2]);
        assert!(kfold_indices(5, 1, 0).is_err());
        assert!(kfold_indices(5, 6, 0).is_err());
    }

    fn labelled(labels: Vec<u32>) -> LabeledDataset {
        let pats = (0..labels.len())
            .map(|i| PointPattern::empty(format!("p{i}")))
            .collect();
        LabeledDataset::new(pats, Some(labels)).unwrap()
    }

    #[test]
    fn stratified_divisible_case() {
        let labels: Vec<u32> = (0..600).map(|i| i / 200 + 1).collect();
        let ds = labelled(labels.clone());
        let folds = kfold(&ds, 10, 3, true).unwrap();
        for f in &folds {
            for c in 1..=3 {
                assert_eq!(f.iter().filter(|&&i| labels[i] == c).count(), 20);
            }
        }
    }

    #[test]
    fn stratified_uneven_classes_within_one() {
        let labels: Vec<u32> = (0..47).map(|i| if i < 13 { 1 } else if i < 30 { 2 } else { 3 }).collect();
        let ds = labelled(labels.clone());
        let folds = kfold(&ds, 5, 9, true).unwrap();
        for c in 1..=3u32 {
            let counts: Vec<usize> = folds
                .iter()
                .map(|f| f.iter().filter(|&&i| labels[i] == c).count())
                .collect();
            assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }

    #[test]
    fn summary_stats() {
        let s = Summary::of(&[1.0, 2.0, 3.0]);
        assert_eq!(s.mean, 2.0);
        assert_eq!(s.std, 1.0);
        assert_eq!(Summary::of(&[4.0]).std, 0.0);
    }

    proptest! {
        #[test]
        fn folds_partition_the_indices(n in 2usize..60, k in 2usize..12, seed: u64) {
            prop_assume!(k <= n);
            let folds = kfold_indices(n, k, seed).unwrap();
            let mut all: Vec<usize> = folds.concat();
            all.sort_unstable();
            prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
            prop_assert_eq!(&folds, &kfold_indices(n, k, seed).unwrap());
        }

        #[test]
        fn clustering_metrics_bounded_and_relabel_invariant(
            pairs in prop::collection::vec((1u32..5, 1u32..4), 2..40),
            shift in 1u32..50,
        ) {
            let (pred, truth): (Vec<u32>, Vec<u32>) = pairs.into_iter().unzip();
            let m = clustering_metrics(&pred, &truth).unwrap();
            for v in [m.purity, m.nmi, m.rand_index, m.f1] {
                prop_assert!((0.0..=1.0).contains(&v));
            }
            let relabelled: Vec<u32> = pred.iter().map(|&p| 100 - p * shift % 97).collect();
            // Relabelling must stay injective for the check to be meaningful.
            let mut a = pred.clone(); a.sort(); a.dedup();
            let mut b = relabelled.clone(); b.sort(); b.dedup();
            prop_assume!(a.len() == b.len());
            let r = clustering_metrics(&relabelled, &truth).unwrap();
            prop_assert!((r.purity - m.purity).abs() < 1e-12);
            prop_assert!((r.rand_index - m.rand_index).abs() < 1e-12);
            prop_assert!((r.f1 - m.f1).abs() < 1e-12);
            let swapped = clustering_metrics(&truth, &pred).unwrap();
            prop_assert!((swapped.nmi - m.nmi).abs() < 1e-12);
        }
    }
}
