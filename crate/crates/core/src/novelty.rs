//! Novelty detection by nearest-normal-neighbour distance.
//!
//! A candidate is novel when its distance to the closest normal pattern is
//! strictly greater than a threshold τ. τ is a percentile of the
//! leave-one-out nearest-neighbour distances within the normal set.
//!
//! Percentiles use linear interpolation between order statistics: for `n`
//! sorted values and `q` in `[0, 100]` the rank is `q / 100 * (n - 1)`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::base::BaseDistance;
use crate::error::{Error, Result};
use crate::pattern::{LabeledDataset, PointPattern};
use crate::setdist::{ospa_decompose, pow_p, root_p, DistanceSpec, Family};

pub const DEFAULT_PERCENTILE: f64 = 95.0;

fn check_q(q: f64) -> Result<()> {
    if (0.0..=100.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "percentile must be in [0, 100], got {q}"
        )))
    }
}

/// Percentile of already sorted values (linear interpolation).
pub fn percentile_sorted(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty());
    let rank = q / 100.0 * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let hi = rank.ceil() as usize;
    let frac = rank - lo as f64;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (sorted[hi] - sorted[lo]) * frac
    }
}

pub fn percentile(values: &[f64], q: f64) -> Result<f64> {
    check_q(q)?;
    if values.is_empty() {
        return Err(Error::InvalidParameter("percentile of no values".into()));
    }
    if values.iter().any(|x| x.is_nan()) {
        return Err(Error::NonFinite("percentile input"));
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(percentile_sorted(&v, q))
}

/// How a candidate is compared with a normal pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scoring {
    /// The configured set distance.
    #[default]
    Distance,
    /// OSPA without the final cap: `(c^p d_card + d_feat)^(1/p)`, where
    /// `c` is the cutoff of the OSPA `DistanceSpec`; other families are rejected.
    UncappedOspa,
}

impl std::str::FromStr for Scoring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "distance" => Ok(Scoring::Distance),
            "uncapped-ospa" => Ok(Scoring::UncappedOspa),
            other => Err(Error::InvalidParameter(format!("unknown scoring {other:?}"))),
        }
    }
}

fn pair_score(spec: &DistanceSpec, scoring: Scoring, a: &PointPattern, b: &PointPattern) -> Result<f64> {
    match scoring {
        Scoring::Distance => spec.distance(a, b),
        Scoring::UncappedOspa => {
            let c = spec.cutoff().ok_or_else(|| {
                Error::InvalidParameter("uncapped-ospa scoring needs an OSPA spec".into())
            })?;
            if a.is_empty() && b.is_empty() {
                return Ok(0.0);
            }
            let parts = ospa_decompose(a, b, spec.order, spec.base)?;
            Ok(root_p(pow_p(c, spec.order) * parts.card + parts.feat, spec.order))
        }
    }
}

fn check_scoring(spec: &DistanceSpec, scoring: Scoring) -> Result<()> {
    spec.validate()?;
    if scoring == Scoring::UncappedOspa && !matches!(spec.family, Family::Ospa { .. }) {
        return Err(Error::InvalidParameter(
            "uncapped-ospa scoring needs an OSPA spec".into(),
        ));
    }
    Ok(())
}

fn check_normal(normal: &LabeledDataset, spec: &DistanceSpec, min: usize) -> Result<()> {
    if normal.len() < min {
        return Err(Error::InvalidParameter(format!(
            "normal set needs at least {min} patterns, got {}",
            normal.len()
        )));
    }
    if let Some(kind) = normal.kind() {
        if !spec.base.supports(kind) {
            return Err(Error::IncompatibleElements(spec.base.name()));
        }
    }
    if !spec.family.handles_empty() {
        let ids = normal.empty_ids();
        if !ids.is_empty() {
            return Err(Error::EmptyPatterns {
                distance: spec.family.name(),
                ids,
            });
        }
    }
    Ok(())
}

/// Distance from `t` to its nearest normal neighbour.
pub fn nnn_distance(normal: &LabeledDataset, t: &PointPattern, spec: &DistanceSpec) -> Result<f64> {
    check_normal(normal, spec, 1)?;
    nnn_score(normal.patterns(), t, spec, Scoring::Distance, None)
}

fn nnn_score(
    normal: &[PointPattern],
    t: &PointPattern,
    spec: &DistanceSpec,
    scoring: Scoring,
    skip: Option<usize>,
) -> Result<f64> {
    let mut best = f64::INFINITY;
    for (i, x) in normal.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        best = best.min(pair_score(spec, scoring, t, x)?);
    }
    Ok(best)
}

/// Leave-one-out nearest-normal-neighbour scores within the normal set.
pub fn loo_scores(normal: &LabeledDataset, spec: &DistanceSpec, scoring: Scoring) -> Result<Vec<f64>> {
    check_scoring(spec, scoring)?;
    check_normal(normal, spec, 2)?;
    let pats = normal.patterns();
    (0..pats.len())
        .into_par_iter()
        .map(|i| nnn_score(pats, &pats[i], spec, scoring, Some(i)))
        .collect()
}

/// Threshold τ: the `q`-th percentile of the leave-one-out scores.
pub fn fit_threshold(normal: &LabeledDataset, spec: &DistanceSpec, q: f64) -> Result<f64> {
    check_q(q)?;
    percentile(&loo_scores(normal, spec, Scoring::Distance)?, q)
}

/// Data-driven OSPA cutoff with the large-value statistics it came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSelection {
    pub cutoff: f64,
    pub m_card: f64,
    pub m_feat: f64,
}

/// Balances cardinality and feature dissimilarity over the normal set:
/// `c = (m_feat / m_card)^(1/p)`, where `m_card` and `m_feat` are the
/// `q_m`-th percentiles of the two parts over all pairs of normal
/// patterns. Pairs of two empty patterns are skipped.
pub fn select_cutoff(
    normal: &LabeledDataset,
    p: f64,
    q_m: f64,
    base: BaseDistance,
) -> Result<CutoffSelection> {
    check_q(q_m)?;
    DistanceSpec::ospa(p, 1.0).validate()?;
    let pats = normal.patterns();
    if pats.len() < 2 {
        return Err(Error::InvalidParameter(
            "normal set needs at least 2 patterns".into(),
        ));
    }
    if let Some(kind) = normal.kind() {
        if !base.supports(kind) {
            return Err(Error::IncompatibleElements(base.name()));
        }
    }
    let rows: Vec<Vec<(f64, f64)>> = (0..pats.len())
        .into_par_iter()
        .map(|i| {
            (i + 1..pats.len())
                .filter(|&j| !(pats[i].is_empty() && pats[j].is_empty()))
                .map(|j| ospa_decompose(&pats[i], &pats[j], p, base).map(|o| (o.card, o.feat)))
                .collect()
        })
        .collect::<Result<_>>()?;
    let (cards, feats): (Vec<f64>, Vec<f64>) = rows.into_iter().flatten().unzip();
    if cards.is_empty() {
        return Err(Error::Degenerate("every normal pattern is empty".into()));
    }
    let m_card = percentile(&cards, q_m)?;
    let m_feat = percentile(&feats, q_m)?;
    if m_card <= 0.0 {
        return Err(Error::Degenerate(
            "no cardinality variation among normal patterns".into(),
        ));
    }
    if m_feat <= 0.0 {
        return Err(Error::Degenerate(
            "no feature variation among normal patterns".into(),
        ));
    }
    Ok(CutoffSelection {
        cutoff: root_p(m_feat / m_card, p),
        m_card,
        m_feat,
    })
}

/// Fitted detector.
#[derive(Debug, Clone)]
pub struct NoveltyModel {
    normal: LabeledDataset,
    spec: DistanceSpec,
    threshold: f64,
    scoring: Scoring,
}

impl NoveltyModel {
    /// Detector with an explicit threshold.
    pub fn new(normal: LabeledDataset, spec: DistanceSpec, threshold: f64, scoring: Scoring) -> Result<Self> {
        check_scoring(&spec, scoring)?;
        check_normal(&normal, &spec, 1)?;
        if !(threshold >= 0.0 && threshold.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be finite and >= 0, got {threshold}"
            )));
        }
        Ok(Self {
            normal,
            spec,
            threshold,
            scoring,
        })
    }

    /// Detector whose threshold is the `q`-th percentile of the
    /// leave-one-out scores of the normal set.
    pub fn fit(normal: LabeledDataset, spec: DistanceSpec, scoring: Scoring, q: f64) -> Result<Self> {
        check_q(q)?;
        let tau = percentile(&loo_scores(&normal, &spec, scoring)?, q)?;
        Self::new(normal, spec, tau, scoring)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn spec(&self) -> &DistanceSpec {
        &self.spec
    }

    pub fn scoring(&self) -> Scoring {
        self.scoring
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold >= 0.0 && threshold.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be finite and >= 0, got {threshold}"
            )));
        }
        self.threshold = threshold;
        Ok(self)
    }

    pub fn score(&self, t: &PointPattern) -> Result<f64> {
        nnn_score(self.normal.patterns(), t, &self.spec, self.scoring, None)
    }

    /// Scores and verdicts for every candidate, in input order.
    pub fn detect(&self, candidates: &LabeledDataset) -> Result<Vec<Verdict>> {
        if let Some(kind) = candidates.kind() {
            if !self.spec.base.supports(kind) {
                return Err(Error::IncompatibleElements(self.spec.base.name()));
            }
        }
        candidates
            .patterns()
            .par_iter()
            .map(|t| {
                let score = self.score(t)?;
                Ok(Verdict {
                    id: t.id().to_owned(),
                    score,
                    threshold: self.threshold,
                    novel: score > self.threshold,
                })
            })
            .collect()
    }
}

/// Outcome for one candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub id: String,
    pub score: f64,
    pub threshold: f64,
    pub novel: bool,
}

/// JSON-lines report, one verdict per line.
pub fn write_report<W: Write>(verdicts: &[Verdict], mut out: W) -> Result<()> {
    for v in verdicts {
        crate::io::write_json_line(&mut out, v)?;
    }
    Ok(())
}
