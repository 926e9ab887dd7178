//! Affinity propagation over set-distance similarities.
//!
//! Similarities are negated distances, `s(n, k) = -d(X_n, X_k)`, and the
//! diagonal holds the exemplar preferences `s(k, k) = -gamma(X_k)`. Messages
//! start at zero and are updated synchronously with damping until they
//! settle, the labels stop changing, or the iteration cap is hit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::LabeledDataset;
use crate::setdist::{distance_matrix, DistanceMatrix, DistanceSpec};

/// How the shared exemplar preference is chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preference {
    /// Median of the off-diagonal similarities (moderate number of clusters).
    Median,
    /// Minimum of the off-diagonal similarities (few clusters).
    Min,
    /// One preference per observation.
    Explicit(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApConfig {
    pub preference: Preference,
    /// Weight of the previous message, in `[0, 1)`.
    pub damping: f64,
    /// Stop once no message moves by `threshold` or more in a sweep.
    pub threshold: f64,
    pub max_iterations: usize,
    /// Stop once the labels are unchanged for this many sweeps.
    pub stable_iterations: usize,
}

impl Default for ApConfig {
    fn default() -> Self {
        Self {
            preference: Preference::Median,
            damping: 0.5,
            threshold: 1e-6,
            max_iterations: 1000,
            stable_iterations: 50,
        }
    }
}

impl ApConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.damping) {
            return Err(Error::InvalidParameter(format!(
                "damping must lie in [0, 1), got {}",
                self.damping
            )));
        }
        if !(self.threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "stop threshold must be > 0, got {}",
                self.threshold
            )));
        }
        if self.max_iterations == 0 || self.stable_iterations == 0 {
            return Err(Error::InvalidParameter(
                "iteration limits must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Square similarity matrix; only off-diagonal entries are meaningful.
#[derive(Debug, Clone, PartialEq)]
pub struct Similarities {
    n: usize,
    data: Vec<f64>,
}

impl Similarities {
    /// `s(n, k) = -d(n, k)`.
    pub fn from_distances(d: &DistanceMatrix) -> Self {
        Self {
            n: d.len(),
            data: d.as_slice().iter().map(|x| -x).collect(),
        }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Shape(format!(
                "{} similarities for {n} observations",
                data.len()
            )));
        }
        Ok(Self { n, data })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> f64 {
        self.data[i * self.n + k]
    }

    pub fn off_diagonal(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n * self.n.saturating_sub(1));
        for i in 0..self.n {
            for k in 0..self.n {
                if i != k {
                    v.push(self.get(i, k));
                }
            }
        }
        v
    }
}

/// Median of a non-empty sample (mean of the middle pair for even sizes).
fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-observation preferences for a strategy. A single observation gets
/// preference 0 under the median and min strategies.
pub fn preferences(sim: &Similarities, strategy: &Preference) -> Result<Vec<f64>> {
    let n = sim.len();
    match strategy {
        Preference::Explicit(v) => {
            if v.len() != n {
                return Err(Error::LengthMismatch(v.len(), n));
            }
            Ok(v.clone())
        }
        Preference::Median | Preference::Min => {
            let off = sim.off_diagonal();
            let value = if off.is_empty() {
                0.0
            } else if *strategy == Preference::Median {
                median(off)
            } else {
                off.into_iter().fold(f64::INFINITY, f64::min)
            };
            Ok(vec![value; n])
        }
    }
}

/// Output of affinity propagation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusteringResult {
    /// `labels[n]` is the index of the exemplar of observation `n`.
    pub labels: Vec<usize>,
    /// Exemplar indices, ascending.
    pub exemplars: Vec<usize>,
    pub iterations: usize,
    pub converged: bool,
    /// Summed distances to exemplars plus the exemplar penalties.
    pub objective: f64,
}

impl ClusteringResult {
    pub fn n_clusters(&self) -> usize {
        self.exemplars.len()
    }

    /// True when every label is a fixed point (`c[c[n]] == c[n]`).
    pub fn is_self_consistent(&self) -> bool {
        self.labels.iter().all(|&k| self.labels[k] == k)
    }

    /// Labels as dense cluster ids `0..n_clusters`, by exemplar order.
    pub fn cluster_ids(&self) -> Vec<usize> {
        self.labels
            .iter()
            .map(|k| self.exemplars.binary_search(k).expect("label is an exemplar"))
            .collect()
    }

    /// JSON export with 1-based exemplar indices.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "labels": self.labels.iter().map(|k| k + 1).collect::<Vec<_>>(),
            "exemplars": self.exemplars.iter().map(|k| k + 1).collect::<Vec<_>>(),
            "iterations": self.iterations,
            "converged": self.converged,
            "objective": self.objective,
        })
    }

    /// Reads the JSON export back (labels converted to 0-based).
    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Raw {
            labels: Vec<usize>,
            exemplars: Vec<usize>,
            iterations: usize,
            converged: bool,
            objective: f64,
        }
        let raw: Raw = serde_json::from_value(v.clone())?;
        let to_zero = |v: Vec<usize>| -> Result<Vec<usize>> {
            v.into_iter()
                .map(|k| {
                    k.checked_sub(1)
                        .ok_or_else(|| Error::Schema("exemplar indices are 1-based".into()))
                })
                .collect()
        };
        Ok(Self {
            labels: to_zero(raw.labels)?,
            exemplars: to_zero(raw.exemplars)?,
            iterations: raw.iterations,
            converged: raw.converged,
            objective: raw.objective,
        })
    }
}

/// Clustering objective of a labelling: `sum d(n, c_n)` over non-exemplars
/// plus `gamma(k) = -preference(k)` over exemplars.
pub fn objective(sim: &Similarities, prefs: &[f64], labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(n, &k)| if n == k { -prefs[k] } else { -sim.get(n, k) })
        .sum()
}

fn argmax_row(vals: impl Iterator<Item = f64>) -> usize {
    let mut best = f64::NEG_INFINITY;
    let mut arg = 0;
    for (k, v) in vals.enumerate() {
        if v > best {
            best = v;
            arg = k;
        }
    }
    arg
}

/// Smallest index on every cycle of the map `n -> labels[n]`. Fixed points
/// are cycles of length one; longer cycles arise when identical observations
/// each pick the other as exemplar.
fn cycle_representatives(labels: &[usize]) -> Vec<usize> {
    let n = labels.len();
    // 0 = unvisited, 1 = on the current walk, 2 = finished.
    let mut state = vec![0u8; n];
    let mut reps = Vec::new();
    for start in 0..n {
        let mut walk = Vec::new();
        let mut v = start;
        while state[v] == 0 {
            state[v] = 1;
            walk.push(v);
            v = labels[v];
        }
        if state[v] == 1 {
            let pos = walk.iter().position(|&w| w == v).expect("v is on the walk");
            reps.push(*walk[pos..].iter().min().expect("non-empty cycle"));
        }
        for w in walk {
            state[w] = 2;
        }
    }
    reps.sort_unstable();
    reps
}

/// Runs affinity propagation on `sim` with diagonal `prefs`.
///
/// Labels come from `argmax_k r(n,k) + a(n,k)` (ties to the smallest `k`).
/// Exemplars are the fixed points of that map (and the smallest member of any
/// longer cycle); any observation labelled with a non-exemplar is moved to
/// its most similar exemplar, so the result always satisfies
/// `c[c[n]] == c[n]`.
pub fn affinity_propagation(
    sim: &Similarities,
    prefs: &[f64],
    config: &ApConfig,
) -> Result<ClusteringResult> {
    config.validate()?;
    let n = sim.len();
    if n == 0 {
        return Err(Error::InvalidParameter("no observations to cluster".into()));
    }
    if prefs.len() != n {
        return Err(Error::LengthMismatch(prefs.len(), n));
    }
    if sim.data.iter().any(|x| !x.is_finite()) || prefs.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("similarities"));
    }

    let mut s = sim.data.clone();
    for k in 0..n {
        s[k * n + k] = prefs[k];
    }
    let lam = config.damping;
    let mut r = vec![0.0f64; n * n];
    let mut a = vec![0.0f64; n * n];
    let mut colsum = vec![0.0f64; n];
    let mut labels = vec![0usize; n];
    let mut prev_labels: Vec<usize> = Vec::new();
    let mut stable = 0usize;
    let mut converged = false;
    let mut iterations = 0usize;

    while iterations < config.max_iterations {
        iterations += 1;
        let mut max_change = 0.0f64;

        // Responsibilities.
        for i in 0..n {
            let row = i * n;
            let (mut first, mut second, mut arg) = (f64::NEG_INFINITY, f64::NEG_INFINITY, 0);
            for k in 0..n {
                let v = a[row + k] + s[row + k];
                if v > first {
                    second = first;
                    first = v;
                    arg = k;
                } else if v > second {
                    second = v;
                }
            }
            for k in 0..n {
                let other = if k == arg { second } else { first };
                let fresh = s[row + k] - other;
                let old = r[row + k];
                let new = lam * old + (1.0 - lam) * fresh;
                max_change = max_change.max((new - old).abs());
                r[row + k] = new;
            }
        }

        // Availabilities.
        colsum.fill(0.0);
        for i in 0..n {
            let row = i * n;
            for k in 0..n {
                if i != k {
                    colsum[k] += r[row + k].max(0.0);
                }
            }
        }
        for i in 0..n {
            let row = i * n;
            for k in 0..n {
                let fresh = if i == k {
                    colsum[k]
                } else {
                    (r[k * n + k] + colsum[k] - r[row + k].max(0.0)).min(0.0)
                };
                let old = a[row + k];
                let new = lam * old + (1.0 - lam) * fresh;
                max_change = max_change.max((new - old).abs());
                a[row + k] = new;
            }
        }

        for i in 0..n {
            let row = i * n;
            labels[i] = argmax_row((0..n).map(|k| r[row + k] + a[row + k]));
        }
        if labels == prev_labels {
            stable += 1;
        } else {
            stable = 0;
            prev_labels.clone_from(&labels);
        }
        if max_change < config.threshold || stable >= config.stable_iterations {
            converged = true;
            break;
        }
    }

    let exemplars = cycle_representatives(&labels);
    let is_exemplar = {
        let mut v = vec![false; n];
        for &e in &exemplars {
            v[e] = true;
        }
        v
    };
    for i in 0..n {
        if is_exemplar[i] {
            labels[i] = i;
        } else if !is_exemplar[labels[i]] {
            let mut best = exemplars[0];
            for &e in &exemplars[1..] {
                if sim.get(i, e) > sim.get(i, best) {
                    best = e;
                }
            }
            labels[i] = best;
        }
    }

    let objective = objective(sim, prefs, &labels);
    Ok(ClusteringResult {
        labels,
        exemplars,
        iterations,
        converged,
        objective,
    })
}

/// Distance matrix, negation, preferences, then affinity propagation.
pub fn cluster_point_patterns(
    ds: &LabeledDataset,
    spec: &DistanceSpec,
    config: &ApConfig,
) -> Result<ClusteringResult> {
    let d = distance_matrix(ds, spec, None)?;
    cluster_distances(&d, config)
}

/// Affinity propagation on a precomputed distance matrix.
pub fn cluster_distances(d: &DistanceMatrix, config: &ApConfig) -> Result<ClusteringResult> {
    let sim = Similarities::from_distances(d);
    let prefs = preferences(&sim, &config.preference)?;
    affinity_propagation(&sim, &prefs, config)
}

/// Searches a shared preference value that yields `target` clusters.
///
/// Bisects between the minimum off-diagonal similarity times `n` (few
/// clusters) and the median similarity, for at most `probes` runs. Returns
/// the preference and result whose cluster count is closest to `target`
/// (first found on ties).
pub fn tune_preference(
    d: &DistanceMatrix,
    target: usize,
    config: &ApConfig,
    probes: usize,
) -> Result<(f64, ClusteringResult)> {
    let sim = Similarities::from_distances(d);
    let n = sim.len();
    let off = sim.off_diagonal();
    if off.is_empty() {
        let r = affinity_propagation(&sim, &[0.0], config)?;
        return Ok((0.0, r));
    }
    let min = off.iter().copied().fold(f64::INFINITY, f64::min);
    let mut lo = min * n as f64;
    let mut hi = median(off);
    if lo >= hi {
        lo = hi - 1.0;
    }
    let mut best: Option<(f64, ClusteringResult)> = None;
    for _ in 0..probes.max(1) {
        let mid = 0.5 * (lo + hi);
        let res = affinity_propagation(&sim, &vec![mid; n], config)?;
        let k = res.n_clusters();
        let better = match &best {
            None => true,
            Some((_, b)) => k.abs_diff(target) < b.n_clusters().abs_diff(target),
        };
        if better {
            best = Some((mid, res));
        }
        match k.cmp(&target) {
            std::cmp::Ordering::Equal => break,
            std::cmp::Ordering::Greater => hi = mid,
            std::cmp::Ordering::Less => lo = mid,
        }
    }
    Ok(best.expect("at least one probe"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sims(d: &[&[f64]]) -> Similarities {
        let n = d.len();
        Similarities::from_vec(n, d.iter().flat_map(|r| r.iter().map(|x| -x)).collect()).unwrap()
    }

    #[test]
    fn preference_strategies() {
        let s = sims(&[&[0.0, 4.0], &[4.0, 0.0]]);
        assert_eq!(preferences(&s, &Preference::Median).unwrap(), vec![-4.0, -4.0]);

        let s = sims(&[&[0.0, 1.0, 2.0], &[1.0, 0.0, 3.0], &[2.0, 3.0, 0.0]]);
        assert_eq!(preferences(&s, &Preference::Min).unwrap(), vec![-3.0; 3]);
        assert_eq!(preferences(&s, &Preference::Median).unwrap(), vec![-2.0; 3]);
        let explicit = Preference::Explicit(vec![-1.0; 3]);
        assert_eq!(preferences(&s, &explicit).unwrap(), vec![-1.0; 3]);
        assert!(preferences(&s, &Preference::Explicit(vec![-1.0; 2])).is_err());
    }

    #[test]
    fn single_observation_is_its_own_exemplar() {
        let s = sims(&[&[0.0]]);
        let r = affinity_propagation(&s, &[0.0], &ApConfig::default()).unwrap();
        assert_eq!(r.labels, vec![0]);
        assert_eq!(r.exemplars, vec![0]);
    }

    #[test]
    fn two_pairs_of_copies_form_two_clusters() {
        let d: &[&[f64]] = &[
            &[0.0, 0.0, 9.0, 9.0],
            &[0.0, 0.0, 9.0, 9.0],
            &[9.0, 9.0, 0.0, 0.0],
            &[9.0, 9.0, 0.0, 0.0],
        ];
        let s = sims(d);
        let prefs = preferences(&s, &Preference::Median).unwrap();
        let r = affinity_propagation(&s, &prefs, &ApConfig::default()).unwrap();
        assert_eq!(r.n_clusters(), 2);
        assert_eq!(r.labels[0], r.labels[1]);
        assert_eq!(r.labels[2], r.labels[3]);
        assert_ne!(r.labels[0], r.labels[2]);
        assert!(r.is_self_consistent());
    }

    #[test]
    fn symmetric_tie_goes_to_smallest_index() {
        let s = sims(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let r = affinity_propagation(&s, &[-1.0, -1.0], &ApConfig::default()).unwrap();
        assert!(r.is_self_consistent());
        assert_eq!(r.labels, vec![0, 0]);
    }

    #[test]
    fn dominant_preference_forces_an_exemplar() {
        let d: &[&[f64]] = &[
            &[0.0, 1.0, 1.5, 2.0],
            &[1.0, 0.0, 0.5, 1.0],
            &[1.5, 0.5, 0.0, 0.5],
            &[2.0, 1.0, 0.5, 0.0],
        ];
        let s = sims(d);
        let mut prefs = vec![-100.0; 4];
        prefs[3] = 100.0;
        let r = affinity_propagation(&s, &prefs, &ApConfig::default()).unwrap();
        assert_eq!(r.labels[3], 3);
        assert!(r.exemplars.contains(&3));
    }

    #[test]
    fn rejects_non_finite_input_and_bad_config() {
        let s = Similarities::from_vec(2, vec![0.0, f64::NAN, -1.0, 0.0]).unwrap();
        assert!(affinity_propagation(&s, &[-1.0, -1.0], &ApConfig::default()).is_err());
        let s = sims(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let cfg = ApConfig {
            damping: 1.0,
            ..ApConfig::default()
        };
        assert!(affinity_propagation(&s, &[-1.0, -1.0], &cfg).is_err());
    }

    #[test]
    fn deterministic() {
        let d: Vec<Vec<f64>> = (0..7)
            .map(|i| (0..7).map(|j| ((i as f64) - (j as f64)).abs().sqrt()).collect())
            .collect();
        let refs: Vec<&[f64]> = d.iter().map(|r| r.as_slice()).collect();
        let s = sims(&refs);
        let p = preferences(&s, &Preference::Median).unwrap();
        let a = affinity_propagation(&s, &p, &ApConfig::default()).unwrap();
        let b = affinity_propagation(&s, &p, &ApConfig::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn label_cycles_yield_one_exemplar_each() {
        assert_eq!(cycle_representatives(&[1, 0, 3, 2, 2]), vec![0, 2]);
        assert_eq!(cycle_representatives(&[0, 0, 1]), vec![0]);
        assert_eq!(cycle_representatives(&[1, 2, 0]), vec![0]);
    }

    #[test]
    fn json_round_trip_is_one_based() {
        let r = ClusteringResult {
            labels: vec![0, 0, 2],
            exemplars: vec![0, 2],
            iterations: 12,
            converged: true,
            objective: 3.5,
        };
        let v = r.to_json();
        assert_eq!(v["labels"], serde_json::json!([1, 1, 3]));
        assert_eq!(ClusteringResult::from_json(&v).unwrap(), r);
    }
}
