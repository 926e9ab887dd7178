//! Synthetic point patterns from Poisson point processes with 2-D Gaussian
//! intensities.
//!
//! A pattern is drawn by sampling its cardinality from `Poisson(rate)` and
//! then that many i.i.d. points from `N(mean, cov)`.
//!
//! Random streams: every cluster of a scenario uses its own ChaCha8 stream,
//! seeded with the scenario seed and selected with `set_stream(cluster
//! index)`, so clusters can be generated in any order (or concurrently)
//! without affecting each other.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{Element, LabeledDataset, PointPattern};

/// Poisson point process with Gaussian intensity `(rate, mean, cov)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PppSpec {
    pub rate: f64,
    pub mean: [f64; 2],
    pub cov: [[f64; 2]; 2],
}

impl PppSpec {
    pub fn isotropic(rate: f64, mean: [f64; 2], var: f64) -> Self {
        Self {
            rate,
            mean,
            cov: [[var, 0.0], [0.0, var]],
        }
    }

    /// Lower Cholesky factor of the covariance.
    pub fn cholesky(&self) -> Result<[[f64; 2]; 2]> {
        let [[a, b], [b2, d]] = self.cov;
        if a.is_nan() || b.is_nan() || d.is_nan() || b != b2 {
            return Err(Error::InvalidParameter(
                "covariance must be symmetric".into(),
            ));
        }
        if !(a > 0.0) {
            return Err(Error::InvalidParameter(
                "covariance is not positive definite".into(),
            ));
        }
        let l11 = a.sqrt();
        let l21 = b / l11;
        let rem = d - l21 * l21;
        if !(rem > 0.0) {
            return Err(Error::InvalidParameter(
                "covariance is not positive definite".into(),
            ));
        }
        Ok([[l11, 0.0], [l21, rem.sqrt()]])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate > 0.0 && self.rate.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rate must be > 0, got {}",
                self.rate
            )));
        }
        if self.mean.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("mean"));
        }
        self.cholesky().map(|_| ())
    }
}

/// Draws one pattern.
pub fn sample_ppp<R: Rng + ?Sized>(
    spec: &PppSpec,
    id: impl Into<String>,
    rng: &mut R,
) -> Result<PointPattern> {
    spec.validate()?;
    let chol = spec.cholesky()?;
    let poisson = Poisson::new(spec.rate)
        .map_err(|e| Error::InvalidParameter(format!("poisson rate: {e}")))?;
    let count = poisson.sample(rng) as usize;
    let mut elements = Vec::with_capacity(count);
    for _ in 0..count {
        let z0: f64 = StandardNormal.sample(rng);
        let z1: f64 = StandardNormal.sample(rng);
        let x = spec.mean[0] + chol[0][0] * z0;
        let y = spec.mean[1] + chol[1][0] * z0 + chol[1][1] * z1;
        elements.push(Element::Numeric(vec![x, y]));
    }
    PointPattern::new(id, elements)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub ppp: PppSpec,
    pub count: usize,
}

/// Clusters (labelled 1, 2, ... in order) plus the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub clusters: Vec<ClusterSpec>,
    pub seed: u64,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if self.clusters.is_empty() {
            return Err(Error::InvalidParameter("scenario has no clusters".into()));
        }
        for c in &self.clusters {
            if c.count == 0 {
                return Err(Error::InvalidParameter(
                    "cluster counts must be positive".into(),
                ));
            }
            c.ppp.validate()?;
        }
        Ok(())
    }

    /// Random stream of cluster `index`.
    pub fn cluster_rng(&self, index: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index as u64);
        rng
    }

    /// Generates the labelled dataset; ids are `c{label}-{index:03}`.
    pub fn generate(&self) -> Result<LabeledDataset> {
        self.validate()?;
        let per_cluster: Vec<Vec<PointPattern>> = self
            .clusters
            .par_iter()
            .enumerate()
            .map(|(ci, c)| {
                let mut rng = self.cluster_rng(ci);
                (0..c.count)
                    .map(|j| sample_ppp(&c.ppp, format!("c{}-{j:03}", ci + 1), &mut rng))
                    .collect()
            })
            .collect::<Result<_>>()?;
        let mut patterns = Vec::new();
        let mut labels = Vec::new();
        for (ci, pats) in per_cluster.into_iter().enumerate() {
            labels.extend(std::iter::repeat_n(ci as u32 + 1, pats.len()));
            patterns.extend(pats);
        }
        LabeledDataset::new(patterns, Some(labels))
    }
}

/// The three benchmark scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// Separated in feature, overlapping in cardinality.
    I,
    /// Separated in cardinality, overlapping in feature.
    II,
    /// Two clusters apart in feature, a third sharing the first one's
    /// features but not its cardinality.
    III,
}

pub const PATTERNS_PER_CLUSTER: usize = 200;

impl Scenario {
    pub const ALL: [Scenario; 3] = [Scenario::I, Scenario::II, Scenario::III];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::I => "i",
            Scenario::II => "ii",
            Scenario::III => "iii",
        }
    }

    /// Default cluster parameters, 200 patterns per cluster.
    pub fn spec(self, seed: u64) -> ScenarioSpec {
        let ppps = match self {
            Scenario::I => vec![
                PppSpec::isotropic(10.0, [0.0, 0.0], 1.0),
                PppSpec::isotropic(10.0, [10.0, 0.0], 1.0),
                PppSpec::isotropic(10.0, [5.0, 8.0], 1.0),
            ],
            Scenario::II => vec![
                PppSpec::isotropic(5.0, [5.0, 4.0], 1.0),
                PppSpec::isotropic(15.0, [5.0, 4.0], 1.0),
                PppSpec::isotropic(30.0, [5.0, 4.0], 1.0),
            ],
            // Cluster 3 doubles cluster 1's rate on the same support.
            Scenario::III => vec![
                PppSpec::isotropic(20.0, [0.0, 0.0], 1.0),
                PppSpec::isotropic(10.0, [10.0, 0.0], 1.0),
                PppSpec::isotropic(40.0, [0.0, 0.0], 1.0),
            ],
        };
        ScenarioSpec {
            clusters: ppps
                .into_iter()
                .map(|ppp| ClusterSpec {
                    ppp,
                    count: PATTERNS_PER_CLUSTER,
                })
                .collect(),
            seed,
        }
    }
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "i" | "1" => Ok(Scenario::I),
            "ii" | "2" => Ok(Scenario::II),
            "iii" | "3" => Ok(Scenario::III),
            other => Err(Error::InvalidParameter(format!("unknown scenario {other:?}"))),
        }
    }
}

/// Datasets (i), (ii) and (iii) for one seed.
pub fn generate_scenarios(seed: u64) -> Result<[LabeledDataset; 3]> {
    Ok([
        Scenario::I.spec(seed).generate()?,
        Scenario::II.spec(seed).generate()?,
        Scenario::III.spec(seed).generate()?,
    ])
}
