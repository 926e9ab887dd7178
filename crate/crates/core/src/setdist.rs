//! Distances between point patterns: Hausdorff, Wasserstein and OSPA.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::base::{capped, BaseDistance};
use crate::error::{Error, Result};
use crate::pattern::{LabeledDataset, PointPattern};
use crate::solver::{solve_assignment, solve_transport, CostMatrix};

/// Default order used throughout the toolkit.
pub const DEFAULT_ORDER: f64 = 2.0;

/// Which set distance to use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Hausdorff,
    Wasserstein,
    Ospa { cutoff: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Hausdorff => "hausdorff",
            Family::Wasserstein => "wasserstein",
            Family::Ospa { .. } => "ospa",
        }
    }

    /// Hausdorff and Wasserstein are undefined when a pattern is empty.
    pub fn handles_empty(&self) -> bool {
        matches!(self, Family::Ospa { .. })
    }
}

/// Set distance, order `p` and base distance: the handle every learner takes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceSpec {
    #[serde(flatten)]
    pub family: Family,
    pub order: f64,
    pub base: BaseDistance,
}

impl DistanceSpec {
    pub fn hausdorff() -> Self {
        Self {
            family: Family::Hausdorff,
            order: DEFAULT_ORDER,
            base: BaseDistance::Euclidean,
        }
    }

    pub fn wasserstein(order: f64) -> Self {
        Self {
            family: Family::Wasserstein,
            order,
            base: BaseDistance::Euclidean,
        }
    }

    pub fn ospa(order: f64, cutoff: f64) -> Self {
        Self {
            family: Family::Ospa { cutoff },
            order,
            base: BaseDistance::Euclidean,
        }
    }

    pub fn with_base(mut self, base: BaseDistance) -> Self {
        self.base = base;
        self
    }

    pub fn cutoff(&self) -> Option<f64> {
        match self.family {
            Family::Ospa { cutoff } => Some(cutoff),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.order >= 1.0 && self.order.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "order p must be a finite real >= 1, got {}",
                self.order
            )));
        }
        if let Family::Ospa { cutoff } = self.family {
            if !(cutoff > 0.0 && cutoff.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "OSPA cutoff must be a finite real > 0, got {cutoff}"
                )));
            }
        }
        Ok(())
    }

    /// Distance between two patterns under this spec.
    pub fn distance(&self, x: &PointPattern, y: &PointPattern) -> Result<f64> {
        self.validate()?;
        match self.family {
            Family::Hausdorff => hausdorff(x, y, self.base),
            Family::Wasserstein => wasserstein(x, y, self.order, self.base),
            Family::Ospa { cutoff } => ospa(x, y, self.order, cutoff, self.base),
        }
    }
}

impl std::fmt::Display for DistanceSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.family {
            Family::Hausdorff => write!(f, "hausdorff"),
            Family::Wasserstein => write!(f, "wasserstein(p={})", self.order),
            Family::Ospa { cutoff } => write!(f, "ospa(p={}, c={cutoff})", self.order),
        }
    }
}

#[inline]
pub(crate) fn pow_p(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else {
        x.powf(p)
    }
}

#[inline]
pub(crate) fn root_p(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x.sqrt()
    } else {
        x.powf(1.0 / p)
    }
}

/// Orders a pair so that the first pattern is the smaller one, with a
/// content-based tie-break so that `f(x, y)` and `f(y, x)` see the same
/// orientation.
fn orient<'a>(x: &'a PointPattern, y: &'a PointPattern) -> (&'a PointPattern, &'a PointPattern) {
    match x.len().cmp(&y.len()) {
        Ordering::Less => (x, y),
        Ordering::Greater => (y, x),
        Ordering::Equal => {
            let ord = x
                .elements()
                .iter()
                .zip(y.elements())
                .map(|(a, b)| a.total_cmp(b))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal);
            if ord == Ordering::Greater {
                (y, x)
            } else {
                (x, y)
            }
        }
    }
}

/// Base distances between every element of `x` (rows) and `y` (columns).
pub fn base_cost_matrix(
    x: &PointPattern,
    y: &PointPattern,
    base: BaseDistance,
) -> Result<CostMatrix> {
    let (xs, ys) = (x.elements(), y.elements());
    CostMatrix::try_from_fn(xs.len(), ys.len(), |i, j| base.eval(&xs[i], &ys[j]))
}

/// Hausdorff distance: the larger of the two directed max-min distances.
pub fn hausdorff(x: &PointPattern, y: &PointPattern, base: BaseDistance) -> Result<f64> {
    check_non_empty("Hausdorff", x, y)?;
    let d = base_cost_matrix(x, y, base)?;
    let forward = (0..d.rows())
        .map(|i| (0..d.cols()).map(|j| d.get(i, j)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let backward = (0..d.cols())
        .map(|j| (0..d.rows()).map(|i| d.get(i, j)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    Ok(forward.max(backward))
}

fn check_non_empty(distance: &'static str, x: &PointPattern, y: &PointPattern) -> Result<()> {
    let which = match (x.is_empty(), y.is_empty()) {
        (false, false) => return Ok(()),
        (true, true) => "both arguments",
        (true, false) => "first argument",
        (false, true) => "second argument",
    };
    Err(Error::EmptyInput { distance, which })
}

/// Wasserstein distance of order `p`: optimal transport between the uniform
/// empirical measures on `x` and `y` under cost `d^p`, raised to `1/p`.
pub fn wasserstein(x: &PointPattern, y: &PointPattern, p: f64, base: BaseDistance) -> Result<f64> {
    check_non_empty("Wasserstein", x, y)?;
    check_order(p)?;
    let (x, y) = orient(x, y);
    let cost = base_cost_matrix(x, y, base)?.map(|d| pow_p(d, p));
    let (_, total) = solve_transport(&cost);
    Ok(root_p(total, p))
}

fn check_order(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "order p must be a finite real >= 1, got {p}"
        )))
    }
}

fn check_cutoff(c: f64) -> Result<()> {
    if c > 0.0 && c.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "cutoff must be a finite real > 0, got {c}"
        )))
    }
}

/// OSPA distance of order `p` and cutoff `c`.
///
/// Defined for every pair: 0 for two empty patterns, `c` when exactly one is
/// empty, and otherwise the per-element average of optimally assigned capped
/// distances plus `c^p` for each unmatched element of the larger pattern.
pub fn ospa(x: &PointPattern, y: &PointPattern, p: f64, c: f64, base: BaseDistance) -> Result<f64> {
    check_order(p)?;
    check_cutoff(c)?;
    let (small, large) = orient(x, y);
    let (m, n) = (small.len(), large.len());
    if n == 0 {
        return Ok(0.0);
    }
    if m == 0 {
        return Ok(c);
    }
    let base_cost = base_cost_matrix(small, large, base)?;
    Ok(ospa_from_base(&base_cost, p, c))
}

/// OSPA from a precomputed base-distance matrix with `rows <= cols`, both
/// non-zero.
fn ospa_from_base(base_cost: &CostMatrix, p: f64, c: f64) -> f64 {
    let (m, n) = (base_cost.rows(), base_cost.cols());
    let cost = base_cost.map(|d| pow_p(capped(d, c), p));
    let (_, assigned) = solve_assignment(&cost).expect("oriented so rows <= cols");
    let total = assigned + pow_p(c, p) * (n - m) as f64;
    root_p(total / n as f64, p).min(c)
}

/// OSPA for several cutoffs at once, sharing the base-distance matrix.
pub fn ospa_multi(
    x: &PointPattern,
    y: &PointPattern,
    p: f64,
    cutoffs: &[f64],
    base: BaseDistance,
) -> Result<Vec<f64>> {
    check_order(p)?;
    for &c in cutoffs {
        check_cutoff(c)?;
    }
    let (small, large) = orient(x, y);
    let (m, n) = (small.len(), large.len());
    if n == 0 {
        return Ok(vec![0.0; cutoffs.len()]);
    }
    if m == 0 {
        return Ok(cutoffs.to_vec());
    }
    let base_cost = base_cost_matrix(small, large, base)?;
    Ok(cutoffs
        .iter()
        .map(|&c| ospa_from_base(&base_cost, p, c))
        .collect())
}

/// Cardinality and feature parts of the OSPA construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OspaParts {
    /// `(n - m) / n`.
    pub card: f64,
    /// `(1/n) min_pi sum d(x_i, y_pi(i))^p` with the uncapped base distance.
    pub feat: f64,
}

/// Splits the pair into cardinality dissimilarity and uncapped feature
/// dissimilarity, with `m <= n` the smaller and larger cardinalities.
pub fn ospa_decompose(
    x: &PointPattern,
    y: &PointPattern,
    p: f64,
    base: BaseDistance,
) -> Result<OspaParts> {
    check_order(p)?;
    let (small, large) = orient(x, y);
    let (m, n) = (small.len(), large.len());
    if n == 0 {
        return Err(Error::BothEmpty);
    }
    let card = (n - m) as f64 / n as f64;
    if m == 0 {
        return Ok(OspaParts { card, feat: 0.0 });
    }
    let cost = base_cost_matrix(small, large, base)?.map(|d| pow_p(d, p));
    let (_, assigned) = solve_assignment(&cost)?;
    Ok(OspaParts {
        card,
        feat: assigned / n as f64,
    })
}

/// Symmetric matrix of pairwise distances over a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Shape(format!(
                "{} entries for a {n}x{n} matrix",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("distance matrix"));
        }
        Ok(Self { n, data })
    }

    /// Builds a symmetric matrix from `f(i, j)` evaluated for `i < j`.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let d = f(i, j);
                data[i * n + j] = d;
                data[j * n + i] = d;
            }
        }
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Restriction to the given indices, in order.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let k = idx.len();
        let mut data = Vec::with_capacity(k * k);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        Self { n: k, data }
    }

    /// Largest `|M - M^T|` entry.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for j in 0..self.n {
                worst = worst.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        worst
    }
}

/// Progress callback: `(rows finished, total rows)`.
pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

fn pairwise<F>(n: usize, progress: Option<Progress<'_>>, f: F) -> Result<Vec<Vec<f64>>>
where
    F: Fn(usize, usize) -> Result<f64> + Sync,
{
    let done = std::sync::atomic::AtomicUsize::new(0);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let row = (i + 1..n).map(|j| f(i, j)).collect::<Result<Vec<_>>>();
            if let Some(cb) = progress {
                let k = done.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
                cb(k, n);
            }
            row
        })
        .collect()
}

fn assemble(n: usize, upper: Vec<Vec<f64>>) -> DistanceMatrix {
    let mut data = vec![0.0; n * n];
    for (i, row) in upper.into_iter().enumerate() {
        for (off, d) in row.into_iter().enumerate() {
            let j = i + 1 + off;
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    DistanceMatrix { n, data }
}

/// Pairwise distances over a dataset. Pairs are evaluated in parallel; the
/// result does not depend on scheduling.
pub fn distance_matrix(
    ds: &LabeledDataset,
    spec: &DistanceSpec,
    progress: Option<Progress<'_>>,
) -> Result<DistanceMatrix> {
    spec.validate()?;
    if let (Some(kind), base) = (ds.kind(), spec.base) {
        if !base.supports(kind) {
            return Err(Error::IncompatibleElements(base.name()));
        }
    }
    if !spec.family.handles_empty() {
        let ids = ds.empty_ids();
        if !ids.is_empty() {
            return Err(Error::EmptyPatterns {
                distance: spec.family.name(),
                ids,
            });
        }
    }
    let pats = ds.patterns();
    let upper = pairwise(pats.len(), progress, |i, j| spec.distance(&pats[i], &pats[j]))?;
    Ok(assemble(pats.len(), upper))
}

/// OSPA distance matrices for several cutoffs, one per cutoff.
pub fn ospa_matrices(
    ds: &LabeledDataset,
    p: f64,
    cutoffs: &[f64],
    base: BaseDistance,
) -> Result<Vec<DistanceMatrix>> {
    let pats = ds.patterns();
    let n = pats.len();
    let upper = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| ospa_multi(&pats[i], &pats[j], p, cutoffs, base))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((0..cutoffs.len())
        .map(|k| {
            let rows = upper
                .iter()
                .map(|row| row.iter().map(|v| v[k]).collect())
                .collect();
            assemble(n, rows)
        })
        .collect())
}

/// Distances from each query to every reference pattern (`queries x refs`).
pub fn cross_distances(
    queries: &[PointPattern],
    refs: &[PointPattern],
    spec: &DistanceSpec,
) -> Result<Vec<Vec<f64>>> {
    spec.validate()?;
    queries
        .par_iter()
        .map(|q| refs.iter().map(|r| spec.distance(q, r)).collect())
        .collect()
}
