//! k-nearest-neighbour classification of point patterns, and OSPA cutoff
//! learning by minimising the class-separation ratio ρ(c).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::base::BaseDistance;
use crate::error::{Error, Result};
use crate::eval::complement;
use crate::pattern::{LabeledDataset, PointPattern};
use crate::setdist::{cross_distances, ospa_matrices, DistanceMatrix, DistanceSpec};

/// Lazy k-NN classifier: all work happens at query time.
#[derive(Debug, Clone)]
pub struct KnnModel {
    train: LabeledDataset,
    spec: DistanceSpec,
    k: usize,
}

impl KnnModel {
    pub fn new(train: LabeledDataset, spec: DistanceSpec, k: usize) -> Result<Self> {
        spec.validate()?;
        train.require_labels()?;
        if k == 0 || k > train.len() {
            return Err(Error::InvalidParameter(format!(
                "k = {k} must be in 1..={}",
                train.len()
            )));
        }
        if let Some(kind) = train.kind() {
            if !spec.base.supports(kind) {
                return Err(Error::IncompatibleElements(spec.base.name()));
            }
        }
        if !spec.family.handles_empty() {
            let ids = train.empty_ids();
            if !ids.is_empty() {
                return Err(Error::EmptyPatterns {
                    distance: spec.family.name(),
                    ids,
                });
            }
        }
        Ok(Self { train, spec, k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn spec(&self) -> &DistanceSpec {
        &self.spec
    }

    pub fn train(&self) -> &LabeledDataset {
        &self.train
    }

    pub fn classify(&self, query: &PointPattern) -> Result<u32> {
        Ok(self.classify_all(std::slice::from_ref(query))?[0])
    }

    /// Labels for many queries, computed in parallel.
    pub fn classify_all(&self, queries: &[PointPattern]) -> Result<Vec<u32>> {
        let labels = self.train.require_labels()?;
        let dists = cross_distances(queries, self.train.patterns(), &self.spec)?;
        Ok(dists
            .iter()
            .map(|row| classify_from_distances(row, labels, self.k))
            .collect())
    }
}

/// Majority label among the `k` nearest training items given the distances
/// from the query to every training item.
///
/// Neighbours are ranked by distance, then by training index. A tied vote
/// goes to the label whose nearest member ranks first.
pub fn classify_from_distances(dists: &[f64], labels: &[u32], k: usize) -> u32 {
    assert_eq!(dists.len(), labels.len());
    assert!(k >= 1 && k <= dists.len());
    let nearest = k_nearest(dists, k, None);
    // (label, votes, rank of first member)
    let mut tally: Vec<(u32, usize, usize)> = Vec::new();
    for (rank, &i) in nearest.iter().enumerate() {
        match tally.iter_mut().find(|t| t.0 == labels[i]) {
            Some(t) => t.1 += 1,
            None => tally.push((labels[i], 1, rank)),
        }
    }
    tally
        .iter()
        .min_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)))
        .map(|t| t.0)
        .expect("k >= 1")
}

/// Indices of the `k` smallest distances, ties by index; `skip` is left out.
fn k_nearest(dists: &[f64], k: usize, skip: Option<usize>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..dists.len()).filter(|&i| Some(i) != skip).collect();
    let by = |a: &usize, b: &usize| dists[*a].total_cmp(&dists[*b]).then(a.cmp(b));
    if k < idx.len() {
        idx.select_nth_unstable_by(k - 1, by);
        idx.truncate(k);
    }
    idx.sort_by(by);
    idx
}

/// Cross-validated accuracy of k-NN on a precomputed distance matrix.
/// Returns `acc[ki][fold]` for every `k` in `ks`.
pub fn cv_accuracy(
    d: &DistanceMatrix,
    labels: &[u32],
    folds: &[Vec<usize>],
    ks: &[usize],
) -> Result<Vec<Vec<f64>>> {
    let n = d.len();
    if labels.len() != n {
        return Err(Error::LengthMismatch(labels.len(), n));
    }
    let per_fold: Vec<Vec<f64>> = folds
        .par_iter()
        .map(|test| {
            let train = complement(n, test);
            let train_labels: Vec<u32> = train.iter().map(|&i| labels[i]).collect();
            let mut correct = vec![0usize; ks.len()];
            let mut row = vec![0.0; train.len()];
            for &q in test {
                for (slot, &t) in row.iter_mut().zip(&train) {
                    *slot = d.get(q, t);
                }
                for (ki, &k) in ks.iter().enumerate() {
                    let k = k.min(train.len());
                    if classify_from_distances(&row, &train_labels, k) == labels[q] {
                        correct[ki] += 1;
                    }
                }
            }
            correct
                .iter()
                .map(|&c| c as f64 / test.len().max(1) as f64)
                .collect()
        })
        .collect();
    Ok((0..ks.len())
        .map(|ki| per_fold.iter().map(|f| f[ki]).collect())
        .collect())
}

/// How per-pattern and per-class quantities are combined in ρ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Largest spread, smallest separation, largest class ratio.
    #[default]
    WorstCase,
    /// Every max and min replaced by a mean.
    Average,
}

impl std::str::FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "worst-case" | "worst_case" | "max" => Ok(Aggregation::WorstCase),
            "average" | "mean" => Ok(Aggregation::Average),
            other => Err(Error::InvalidParameter(format!(
                "unknown aggregation {other:?}"
            ))),
        }
    }
}

/// Per-class spread `d_hat` (k-NN distance within the class, leave-one-out)
/// and separation `d_check` (k-NN distance to the other classes).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassDissimilarity {
    pub label: u32,
    pub spread: f64,
    pub separation: f64,
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    s / n as f64
}

fn combine(agg: Aggregation, xs: impl Iterator<Item = f64>, worst: fn(f64, f64) -> f64, init: f64) -> f64 {
    match agg {
        Aggregation::WorstCase => xs.fold(init, worst),
        Aggregation::Average => mean(xs),
    }
}

/// Average distance from `x` to its `k` nearest among `members`.
fn knn_mean(d: &DistanceMatrix, x: usize, members: &[usize], k: usize) -> f64 {
    let row: Vec<f64> = members.iter().map(|&j| d.get(x, j)).collect();
    let skip = members.iter().position(|&j| j == x);
    let nearest = k_nearest(&row, k, skip);
    mean(nearest.iter().map(|&i| row[i]))
}

fn group_by_class(labels: &[u32], k: usize) -> Result<Vec<(u32, Vec<usize>)>> {
    let mut classes: Vec<u32> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::DegenerateSeparation(
            "need at least two classes".into(),
        ));
    }
    classes
        .into_iter()
        .map(|l| {
            let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == l).collect();
            if members.len() < k + 1 {
                return Err(Error::ClassTooSmall {
                    label: l,
                    size: members.len(),
                    needed: k + 1,
                });
            }
            Ok((l, members))
        })
        .collect()
}

/// Spread and separation of every class from a precomputed matrix.
pub fn class_dissimilarities_from_matrix(
    d: &DistanceMatrix,
    labels: &[u32],
    k: usize,
    agg: Aggregation,
) -> Result<Vec<ClassDissimilarity>> {
    if labels.len() != d.len() {
        return Err(Error::LengthMismatch(labels.len(), d.len()));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let classes = group_by_class(labels, k)?;
    Ok(classes
        .iter()
        .map(|(label, members)| {
            let spread = combine(
                agg,
                members.iter().map(|&x| knn_mean(d, x, members, k)),
                f64::max,
                0.0,
            );
            let separation = combine(
                agg,
                members.iter().flat_map(|&x| {
                    classes
                        .iter()
                        .filter(|(other, _)| other != label)
                        .map(move |(_, others)| knn_mean(d, x, others, k))
                }),
                f64::min,
                f64::INFINITY,
            );
            ClassDissimilarity {
                label: *label,
                spread,
                separation,
            }
        })
        .collect())
}

/// Spread and separation under OSPA with cutoff `c` and order `p`.
pub fn class_dissimilarities(
    train: &LabeledDataset,
    c: f64,
    p: f64,
    k: usize,
    agg: Aggregation,
    base: BaseDistance,
) -> Result<Vec<ClassDissimilarity>> {
    let labels = train.require_labels()?;
    let d = ospa_matrices(train, p, &[c], base)?.remove(0);
    class_dissimilarities_from_matrix(&d, labels, k, agg)
}

/// Combines per-class ratios `spread / separation`.
pub fn rho_from_parts(parts: &[ClassDissimilarity], agg: Aggregation) -> Result<f64> {
    if let Some(bad) = parts.iter().find(|p| !(p.separation > 0.0)) {
        return Err(Error::DegenerateSeparation(format!(
            "class {} has zero separation from the other classes",
            bad.label
        )));
    }
    let ratios = parts.iter().map(|p| p.spread / p.separation);
    Ok(combine(agg, ratios, f64::max, 0.0))
}

pub fn rho_from_matrix(
    d: &DistanceMatrix,
    labels: &[u32],
    k: usize,
    agg: Aggregation,
) -> Result<f64> {
    rho_from_parts(&class_dissimilarities_from_matrix(d, labels, k, agg)?, agg)
}

/// Ratio of class spread to class separation under OSPA with cutoff `c`.
/// Smaller is better.
pub fn rho(
    train: &LabeledDataset,
    c: f64,
    p: f64,
    k: usize,
    agg: Aggregation,
    base: BaseDistance,
) -> Result<f64> {
    rho_from_parts(&class_dissimilarities(train, c, p, k, agg, base)?, agg)
}

/// Settings of the cutoff search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffSearchConfig {
    /// Candidate cutoffs, ascending.
    pub grid: Vec<f64>,
    pub order: f64,
    pub k: usize,
    pub aggregation: Aggregation,
    pub base: BaseDistance,
}

impl CutoffSearchConfig {
    pub fn new(grid: Vec<f64>, order: f64, k: usize, aggregation: Aggregation) -> Self {
        Self {
            grid,
            order,
            k,
            aggregation,
            base: BaseDistance::Euclidean,
        }
    }

    /// Configuration using [`default_grid`] on `train`.
    pub fn with_default_grid(
        train: &LabeledDataset,
        order: f64,
        k: usize,
        aggregation: Aggregation,
    ) -> Result<Self> {
        let base = train
            .kind()
            .map(BaseDistance::for_kind)
            .unwrap_or_default();
        Ok(Self {
            grid: default_grid(train, base, DEFAULT_GRID_SIZE)?,
            order,
            k,
            aggregation,
            base,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::InvalidParameter("cutoff grid is empty".into()));
        }
        if self.grid.iter().any(|c| !(*c > 0.0 && c.is_finite())) {
            return Err(Error::InvalidParameter(
                "cutoff grid values must be finite and > 0".into(),
            ));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "cutoff grid must be strictly ascending".into(),
            ));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        DistanceSpec::ospa(self.order, self.grid[0]).validate()
    }
}

pub const DEFAULT_GRID_SIZE: usize = 20;
const MAX_GRID_PAIRS: usize = 1_000_000;

/// Base distances between elements pooled over the whole dataset, sorted
/// ascending, zeros included.
///
/// Every pair of elements is used when there are at most a million pairs;
/// otherwise a fixed-seed sample of a million pairs (drawn with
/// replacement, distinct elements) stands in for the full set.
pub fn pooled_base_distances(ds: &LabeledDataset, base: BaseDistance) -> Result<Vec<f64>> {
    let elems: Vec<_> = ds.patterns().iter().flat_map(|p| p.elements()).collect();
    let m = elems.len();
    if m < 2 {
        return Err(Error::InvalidParameter(
            "need at least two elements in the dataset".into(),
        ));
    }
    let total = m * (m - 1) / 2;
    let mut dists = Vec::with_capacity(total.min(MAX_GRID_PAIRS));
    if total <= MAX_GRID_PAIRS {
        for i in 0..m {
            for j in i + 1..m {
                dists.push(base.eval(elems[i], elems[j])?);
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        while dists.len() < MAX_GRID_PAIRS {
            let i = rng.random_range(0..m);
            let j = rng.random_range(0..m);
            if i != j {
                dists.push(base.eval(elems[i], elems[j])?);
            }
        }
    }
    dists.sort_by(f64::total_cmp);
    Ok(dists)
}

/// `size` log-spaced cutoffs from the 5th percentile of the nonzero pooled
/// base distances to twice their maximum.
pub fn default_grid(ds: &LabeledDataset, base: BaseDistance, size: usize) -> Result<Vec<f64>> {
    if size == 0 {
        return Err(Error::InvalidParameter("grid size must be >= 1".into()));
    }
    let mut dists = pooled_base_distances(ds, base)?;
    dists.retain(|&d| d > 0.0);
    if dists.is_empty() {
        return Err(Error::DegenerateSeparation(
            "all elements coincide".into(),
        ));
    }
    let lo = crate::novelty::percentile_sorted(&dists, 5.0);
    let hi = 2.0 * dists[dists.len() - 1];
    if size == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..size)
        .map(|i| (a + (b - a) * i as f64 / (size - 1) as f64).exp())
        .collect())
}

/// Outcome of a cutoff search: the chosen value and ρ at every grid point
/// (`None` where ρ is undefined).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffSearch {
    pub cutoff: f64,
    pub rho: f64,
    pub profile: Vec<(f64, Option<f64>)>,
}

/// Grid value minimising ρ; ties go to the smaller cutoff.
pub fn learn_cutoff(train: &LabeledDataset, cfg: &CutoffSearchConfig) -> Result<CutoffSearch> {
    cfg.validate()?;
    let labels = train.require_labels()?;
    group_by_class(labels, cfg.k)?;
    let mats = ospa_matrices(train, cfg.order, &cfg.grid, cfg.base)?;
    let profile: Vec<(f64, Option<f64>)> = cfg
        .grid
        .iter()
        .zip(&mats)
        .map(|(&c, d)| (c, rho_from_matrix(d, labels, cfg.k, cfg.aggregation).ok()))
        .collect();
    let mut best: Option<(f64, f64)> = None;
    for &(c, r) in &profile {
        if let Some(r) = r {
            if best.is_none_or(|(_, br)| r < br) {
                best = Some((c, r));
            }
        }
    }
    let (cutoff, rho) = best.ok_or_else(|| {
        Error::DegenerateSeparation("ρ is undefined at every grid point".into())
    })?;
    Ok(CutoffSearch {
        cutoff,
        rho,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simgen::{PppSpec, ScenarioSpec, ClusterSpec};

    fn pp1(id: &str, xs: &[f64]) -> PointPattern {
        PointPattern::numeric(id, xs.iter().map(|&x| vec![x]).collect()).unwrap()
    }

    fn ds(items: &[(&[f64], u32)]) -> LabeledDataset {
        let pats = items
            .iter()
            .enumerate()
            .map(|(i, (xs, _))| pp1(&format!("p{i}"), xs))
            .collect();
        LabeledDataset::new(pats, Some(items.iter().map(|x| x.1).collect())).unwrap()
    }

    #[test]
    fn exact_match_wins_with_k1() {
        let train = ds(&[(&[0.0], 1), (&[5.0], 2), (&[9.0, 9.5], 3)]);
        for spec in [
            DistanceSpec::hausdorff(),
            DistanceSpec::wasserstein(2.0),
            DistanceSpec::ospa(2.0, 4.0),
        ] {
            let m = KnnModel::new(train.clone(), spec, 1).unwrap();
            assert_eq!(m.classify(&pp1("q", &[9.5, 9.0])).unwrap(), 3);
            assert_eq!(m.classify(&pp1("q", &[5.0])).unwrap(), 2);
        }
    }

    #[test]
    fn majority_of_three() {
        let train = ds(&[(&[1.0], 1), (&[-1.0], 1), (&[20.0], 2)]);
        let m = KnnModel::new(train, DistanceSpec::hausdorff(), 3).unwrap();
        assert_eq!(m.classify(&pp1("q", &[0.0])).unwrap(), 1);
    }

    #[test]
    fn vote_tie_goes_to_nearest_member() {
        // k=2, one vote each: label 2 owns the nearest neighbour.
        assert_eq!(classify_from_distances(&[3.0, 1.0], &[1, 2], 2), 2);
        // Equal distances: the lower training index ranks first.
        assert_eq!(classify_from_distances(&[1.0, 1.0], &[4, 3], 2), 4);
        assert_eq!(classify_from_distances(&[1.0, 1.0, 0.5], &[4, 3, 4], 1), 4);
    }

    #[test]
    fn kth_rank_distance_ties_use_index_order() {
        // Neighbours 1 and 2 tie at the k-th rank; index 1 is kept.
        let d = [0.0, 2.0, 2.0];
        assert_eq!(k_nearest(&d, 2, None), vec![0, 1]);
        assert_eq!(classify_from_distances(&d, &[5, 6, 7], 1), 5);
    }

    #[test]
    fn empty_query_errors_under_hausdorff() {
        let train = ds(&[(&[1.0], 1), (&[2.0], 2)]);
        let m = KnnModel::new(train.clone(), DistanceSpec::hausdorff(), 1).unwrap();
        assert!(matches!(
            m.classify(&PointPattern::empty("e")),
            Err(Error::EmptyInput { .. })
        ));
        let m = KnnModel::new(train, DistanceSpec::ospa(1.0, 3.0), 1).unwrap();
        assert!(m.classify(&PointPattern::empty("e")).is_ok());
    }

    #[test]
    fn model_validation() {
        let train = ds(&[(&[1.0], 1), (&[2.0], 2)]);
        assert!(KnnModel::new(train.clone(), DistanceSpec::hausdorff(), 0).is_err());
        assert!(KnnModel::new(train.clone(), DistanceSpec::hausdorff(), 3).is_err());
        let unlabeled = LabeledDataset::unlabeled(train.patterns().to_vec()).unwrap();
        assert!(KnnModel::new(unlabeled, DistanceSpec::hausdorff(), 1).is_err());
    }

    #[test]
    fn four_pattern_hand_instance() {
        // Class 1: {0}, {1}. Class 2: {10}, {12}. Base distances stay below c.
        let train = ds(&[(&[0.0], 1), (&[1.0], 1), (&[10.0], 2), (&[12.0], 2)]);
        let parts = class_dissimilarities(
            &train,
            100.0,
            1.0,
            1,
            Aggregation::WorstCase,
            BaseDistance::Euclidean,
        )
        .unwrap();
        assert_eq!(parts[0].spread, 1.0);
        assert_eq!(parts[0].separation, 9.0);
        assert_eq!(parts[1].spread, 2.0);
        assert_eq!(parts[1].separation, 9.0);
        let r = rho(&train, 100.0, 1.0, 1, Aggregation::WorstCase, BaseDistance::Euclidean).unwrap();
        assert_eq!(r, 2.0 / 9.0);
        let r = rho(&train, 100.0, 1.0, 1, Aggregation::Average, BaseDistance::Euclidean).unwrap();
        // Average: spreads 1 and 2; separations mean(10, 9) and mean(9, 11).
        assert!((r - (1.0 / 9.5 + 2.0 / 10.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn rho_combines_ratios() {
        let parts = [
            ClassDissimilarity { label: 1, spread: 1.0, separation: 2.0 },
            ClassDissimilarity { label: 2, spread: 1.0, separation: 5.0 },
        ];
        assert_eq!(rho_from_parts(&parts, Aggregation::WorstCase).unwrap(), 0.5);
        assert!((rho_from_parts(&parts, Aggregation::Average).unwrap() - 0.35).abs() < 1e-15);
    }

    #[test]
    fn identical_patterns_are_degenerate() {
        let train = ds(&[(&[1.0], 1), (&[1.0], 1), (&[1.0], 2), (&[1.0], 2)]);
        let parts = class_dissimilarities(&train, 5.0, 2.0, 1, Aggregation::WorstCase, BaseDistance::Euclidean).unwrap();
        assert!(parts.iter().all(|p| p.spread == 0.0 && p.separation == 0.0));
        assert!(matches!(
            rho(&train, 5.0, 2.0, 1, Aggregation::WorstCase, BaseDistance::Euclidean),
            Err(Error::DegenerateSeparation(_))
        ));
        let cfg = CutoffSearchConfig::new(vec![1.0, 2.0], 2.0, 1, Aggregation::WorstCase);
        assert!(matches!(
            learn_cutoff(&train, &cfg),
            Err(Error::DegenerateSeparation(_))
        ));
    }

    #[test]
    fn tight_class_has_smaller_spread() {
        let train = ds(&[
            (&[0.0], 1),
            (&[0.1], 1),
            (&[0.2], 1),
            (&[20.0], 2),
            (&[25.0], 2),
            (&[31.0], 2),
        ]);
        let parts = class_dissimilarities(&train, 50.0, 1.0, 1, Aggregation::WorstCase, BaseDistance::Euclidean).unwrap();
        assert!(parts[0].spread < parts[1].spread);
    }

    #[test]
    fn class_too_small() {
        let train = ds(&[(&[0.0], 1), (&[1.0], 2), (&[2.0], 2)]);
        assert!(matches!(
            rho(&train, 5.0, 1.0, 1, Aggregation::WorstCase, BaseDistance::Euclidean),
            Err(Error::ClassTooSmall { label: 1, size: 1, needed: 2 })
        ));
    }

    #[test]
    fn single_value_grid() {
        let train = ds(&[(&[0.0], 1), (&[1.0], 1), (&[10.0], 2), (&[12.0], 2)]);
        let cfg = CutoffSearchConfig::new(vec![3.0], 2.0, 1, Aggregation::WorstCase);
        assert_eq!(learn_cutoff(&train, &cfg).unwrap().cutoff, 3.0);
    }

    #[test]
    fn flat_profile_picks_smallest_cutoff() {
        // All distances are below every cutoff, so ρ does not depend on c.
        let train = ds(&[(&[0.0], 1), (&[1.0], 1), (&[3.0], 2), (&[5.0], 2)]);
        let cfg = CutoffSearchConfig::new(vec![10.0, 20.0, 40.0], 1.0, 1, Aggregation::WorstCase);
        let s = learn_cutoff(&train, &cfg).unwrap();
        assert_eq!(s.cutoff, 10.0);
        assert!(s.profile.iter().all(|(_, r)| *r == Some(s.rho)));
    }

    #[test]
    fn grid_validation() {
        let train = ds(&[(&[0.0], 1), (&[1.0], 1), (&[10.0], 2), (&[12.0], 2)]);
        for grid in [vec![], vec![2.0, 1.0], vec![0.0, 1.0], vec![f64::INFINITY]] {
            let cfg = CutoffSearchConfig::new(grid, 2.0, 1, Aggregation::WorstCase);
            assert!(learn_cutoff(&train, &cfg).is_err());
        }
    }

    #[test]
    fn default_grid_shape() {
        let train = ds(&[(&[0.0, 1.0], 1), (&[2.0], 1), (&[10.0], 2), (&[12.0, 4.0], 2)]);
        let g = default_grid(&train, BaseDistance::Euclidean, 20).unwrap();
        assert_eq!(g.len(), 20);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!((g[19] - 24.0).abs() < 1e-9);
        let ratio = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - ratio).abs() < 1e-9));
    }

    fn small_scenario(seed: u64) -> LabeledDataset {
        ScenarioSpec {
            clusters: vec![
                ClusterSpec { ppp: PppSpec::isotropic(4.0, [0.0, 0.0], 1.0), count: 12 },
                ClusterSpec { ppp: PppSpec::isotropic(12.0, [1.0, 0.5], 2.0), count: 12 },
            ],
            seed,
        }
        .generate()
        .unwrap()
    }

    #[test]
    fn rho_is_scale_consistent() {
        let train = small_scenario(4);
        let factor = 3.7;
        let scaled = LabeledDataset::new(
            train.patterns().iter().map(|p| p.scaled(factor)).collect(),
            train.labels().map(<[u32]>::to_vec),
        )
        .unwrap();
        for agg in [Aggregation::WorstCase, Aggregation::Average] {
            for c in [0.5, 2.0, 8.0] {
                let a = rho(&train, c, 2.0, 3, agg, BaseDistance::Euclidean).unwrap();
                let b = rho(&scaled, c * factor, 2.0, 3, agg, BaseDistance::Euclidean).unwrap();
                assert!((a - b).abs() < 1e-9, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn training_order_only_matters_through_ties() {
        let train = small_scenario(9);
        let query = small_scenario(10).patterns()[3].clone();
        let spec = DistanceSpec::ospa(2.0, 3.0);
        let a = KnnModel::new(train.clone(), spec, 5).unwrap().classify(&query).unwrap();
        let rev: Vec<usize> = (0..train.len()).rev().collect();
        let b = KnnModel::new(train.subset(&rev), spec, 5).unwrap().classify(&query).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn cv_on_precomputed_matrix() {
        let train = small_scenario(2);
        let labels = train.require_labels().unwrap();
        let d = crate::setdist::distance_matrix(&train, &DistanceSpec::ospa(2.0, 3.0), None).unwrap();
        let folds = crate::eval::kfold(&train, 4, 0, true).unwrap();
        let acc = cv_accuracy(&d, labels, &folds, &[1, 3]).unwrap();
        assert_eq!(acc.len(), 2);
        assert!(acc.iter().flatten().all(|a| (0.0..=1.0).contains(a)));
        // Same numbers through the model interface for k=1.
        for (fi, fold) in folds.iter().enumerate() {
            let tr = train.subset(&complement(train.len(), fold));
            let m = KnnModel::new(tr, DistanceSpec::ospa(2.0, 3.0), 1).unwrap();
            let test = train.subset(fold);
            let pred = m.classify_all(test.patterns()).unwrap();
            let correct = pred.iter().zip(test.labels().unwrap()).filter(|(a, b)| a == b).count();
            assert_eq!(acc[0][fi], correct as f64 / fold.len() as f64);
        }
    }
}
