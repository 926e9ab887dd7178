//! Element-level (base) distances.
//!
//! Categorical elements use the discrete 0/1 metric. With a cutoff `c >= 1`
//! this turns OSPA on token patterns into a normalised set-difference
//! measure.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pattern::{Element, ElementKind};

/// Base metric between two elements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseDistance {
    #[default]
    Euclidean,
    Discrete,
}

impl BaseDistance {
    pub fn name(self) -> &'static str {
        match self {
            BaseDistance::Euclidean => "euclidean",
            BaseDistance::Discrete => "discrete",
        }
    }

    /// The natural base distance for a kind of element.
    pub fn for_kind(kind: ElementKind) -> Self {
        match kind {
            ElementKind::Numeric { .. } => BaseDistance::Euclidean,
            ElementKind::Categorical => BaseDistance::Discrete,
        }
    }

    pub fn supports(self, kind: ElementKind) -> bool {
        matches!(
            (self, kind),
            (BaseDistance::Euclidean, ElementKind::Numeric { .. })
                | (BaseDistance::Discrete, ElementKind::Categorical)
        )
    }

    pub fn eval(self, x: &Element, y: &Element) -> Result<f64> {
        match (self, x, y) {
            (BaseDistance::Euclidean, Element::Numeric(a), Element::Numeric(b)) => euclidean(a, b),
            (BaseDistance::Discrete, Element::Categorical(a), Element::Categorical(b)) => {
                Ok(discrete(a, b))
            }
            _ => Err(Error::IncompatibleElements(self.name())),
        }
    }
}

impl std::str::FromStr for BaseDistance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(BaseDistance::Euclidean),
            "discrete" => Ok(BaseDistance::Discrete),
            other => Err(Error::InvalidParameter(format!(
                "unknown base distance {other:?}"
            ))),
        }
    }
}

/// L2 norm of `x - y`.
pub fn euclidean(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch(x.len(), y.len()));
    }
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// 0 for equal tokens, 1 otherwise.
pub fn discrete(a: &str, b: &str) -> f64 {
    if a == b {
        0.0
    } else {
        1.0
    }
}

/// `min(c, d)`.
#[inline]
pub fn capped(d: f64, c: f64) -> f64 {
    d.min(c)
}
