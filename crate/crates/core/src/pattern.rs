//! Point patterns and labelled collections of them.
//!
//! A [`PointPattern`] is a finite multiset of elements. Elements are either
//! numeric vectors or categorical tokens; every pattern in a dataset uses the
//! same kind (and, for numeric data, the same dimension).

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// One element of a point pattern.
#[derive(Debug, Clone, PartialEq)]
pub enum Element {
    Numeric(Vec<f64>),
    Categorical(String),
}

impl Element {
    pub fn kind(&self) -> ElementKind {
        match self {
            Element::Numeric(v) => ElementKind::Numeric { dim: v.len() },
            Element::Categorical(_) => ElementKind::Categorical,
        }
    }

    pub fn as_numeric(&self) -> Option<&[f64]> {
        match self {
            Element::Numeric(v) => Some(v),
            Element::Categorical(_) => None,
        }
    }

    pub fn as_token(&self) -> Option<&str> {
        match self {
            Element::Numeric(_) => None,
            Element::Categorical(s) => Some(s),
        }
    }

    // Total order used only for multiset comparison.
    pub(crate) fn total_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Element::Numeric(a), Element::Numeric(b)) => {
                for (x, y) in a.iter().zip(b) {
                    match x.total_cmp(y) {
                        Ordering::Equal => continue,
                        o => return o,
                    }
                }
                a.len().cmp(&b.len())
            }
            (Element::Categorical(a), Element::Categorical(b)) => a.cmp(b),
            (Element::Numeric(_), Element::Categorical(_)) => Ordering::Less,
            (Element::Categorical(_), Element::Numeric(_)) => Ordering::Greater,
        }
    }
}

impl From<Vec<f64>> for Element {
    fn from(v: Vec<f64>) -> Self {
        Element::Numeric(v)
    }
}

impl From<&str> for Element {
    fn from(s: &str) -> Self {
        Element::Categorical(s.to_owned())
    }
}

/// Kind of the elements stored in a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ElementKind {
    Numeric { dim: usize },
    Categorical,
}

impl std::fmt::Display for ElementKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ElementKind::Numeric { dim } => write!(f, "numeric (dimension {dim})"),
            ElementKind::Categorical => f.write_str("categorical"),
        }
    }
}

/// A finite multiset of elements with an opaque identifier.
///
/// Element order is kept for storage but carries no meaning: two patterns
/// compare equal when they hold the same elements with the same
/// multiplicities.
#[derive(Debug, Clone)]
pub struct PointPattern {
    id: String,
    elements: Vec<Element>,
}

impl PointPattern {
    /// Builds a pattern, checking that all elements share one kind and that
    /// numeric coordinates are finite.
    pub fn new(id: impl Into<String>, elements: Vec<Element>) -> Result<Self> {
        let id = id.into();
        let mut kind = None;
        for e in &elements {
            if let Element::Numeric(v) = e {
                if v.is_empty() {
                    return Err(Error::Schema(format!(
                        "pattern {id}: numeric element with zero coordinates"
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Schema(format!(
                        "pattern {id}: non-finite coordinate"
                    )));
                }
            }
            match kind {
                None => kind = Some(e.kind()),
                Some(k) if k != e.kind() => {
                    return Err(Error::Schema(format!(
                        "pattern {id}: mixes {k} and {} elements",
                        e.kind()
                    )))
                }
                _ => {}
            }
        }
        Ok(Self { id, elements })
    }

    /// Numeric pattern from coordinate rows.
    pub fn numeric(id: impl Into<String>, points: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(id, points.into_iter().map(Element::Numeric).collect())
    }

    /// Categorical pattern from tokens.
    pub fn categorical<S: Into<String>>(
        id: impl Into<String>,
        tokens: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            id: id.into(),
            elements: tokens
                .into_iter()
                .map(|t| Element::Categorical(t.into()))
                .collect(),
        }
    }

    pub fn empty(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            elements: Vec::new(),
        }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// `None` for the empty pattern, which is compatible with every kind.
    pub fn kind(&self) -> Option<ElementKind> {
        self.elements.first().map(Element::kind)
    }

    /// Scales every numeric coordinate by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let elements = self
            .elements
            .iter()
            .map(|e| match e {
                Element::Numeric(v) => Element::Numeric(v.iter().map(|x| x * factor).collect()),
                other => other.clone(),
            })
            .collect();
        Self {
            id: self.id.clone(),
            elements,
        }
    }

    fn sorted_elements(&self) -> Vec<&Element> {
        let mut v: Vec<&Element> = self.elements.iter().collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    }
}

impl PartialEq for PointPattern {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
            && self.len() == other.len()
            && self
                .sorted_elements()
                .into_iter()
                .zip(other.sorted_elements())
                .all(|(a, b)| a.total_cmp(b) == Ordering::Equal)
    }
}

/// Point patterns with optional class labels (1-based), aligned by index.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LabeledDataset {
    patterns: Vec<PointPattern>,
    labels: Option<Vec<u32>>,
    kind: Option<ElementKind>,
}

impl LabeledDataset {
    /// Validates the shared-kind and label invariants.
    pub fn new(patterns: Vec<PointPattern>, labels: Option<Vec<u32>>) -> Result<Self> {
        let labels = labels.filter(|l| !(l.is_empty() && patterns.is_empty()));
        let mut kind: Option<ElementKind> = None;
        for p in &patterns {
            if let Some(k) = p.kind() {
                match kind {
                    None => kind = Some(k),
                    Some(prev) if prev != k => {
                        return Err(Error::Schema(format!(
                            "pattern {} is {k} but the dataset is {prev}",
                            p.id()
                        )))
                    }
                    _ => {}
                }
            }
        }
        if let Some(l) = &labels {
            if l.len() != patterns.len() {
                return Err(Error::Schema(format!(
                    "{} labels for {} patterns",
                    l.len(),
                    patterns.len()
                )));
            }
            if let Some(i) = l.iter().position(|&x| x == 0) {
                return Err(Error::Schema(format!(
                    "pattern {}: labels must be >= 1",
                    patterns[i].id()
                )));
            }
        }
        Ok(Self {
            patterns,
            labels,
            kind,
        })
    }

    pub fn unlabeled(patterns: Vec<PointPattern>) -> Result<Self> {
        Self::new(patterns, None)
    }

    pub fn patterns(&self) -> &[PointPattern] {
        &self.patterns
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    /// Labels, or a schema error when the dataset is unlabelled.
    pub fn require_labels(&self) -> Result<&[u32]> {
        self.labels()
            .ok_or_else(|| Error::Schema("dataset has no class labels".into()))
    }

    pub fn kind(&self) -> Option<ElementKind> {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Sub-dataset made of the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            patterns: indices.iter().map(|&i| self.patterns[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
            kind: self.kind,
        }
    }

    /// Indices of patterns carrying `label`.
    pub fn indices_with_label(&self, label: u32) -> Vec<usize> {
        match &self.labels {
            Some(l) => (0..l.len()).filter(|&i| l[i] == label).collect(),
            None => Vec::new(),
        }
    }

    /// Distinct labels in ascending order.
    pub fn classes(&self) -> Vec<u32> {
        let mut c: Vec<u32> = self.labels.clone().unwrap_or_default();
        c.sort_unstable();
        c.dedup();
        c
    }

    /// Ids of empty patterns.
    pub fn empty_ids(&self) -> Vec<String> {
        self.patterns
            .iter()
            .filter(|p| p.is_empty())
            .map(|p| p.id().to_owned())
            .collect()
    }

    /// Copy of the dataset without its empty patterns.
    pub fn without_empty(&self) -> Self {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| !self.patterns[i].is_empty())
            .collect();
        self.subset(&keep)
    }

    /// Concatenates two datasets of compatible kinds.
    pub fn concat(&self, other: &Self) -> Result<Self> {
        let mut patterns = self.patterns.clone();
        patterns.extend(other.patterns.iter().cloned());
        let labels = match (&self.labels, &other.labels) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            (None, None) => None,
            _ => {
                return Err(Error::Schema(
                    "cannot concatenate labelled and unlabelled datasets".into(),
                ))
            }
        };
        Self::new(patterns, labels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multiset_equality_ignores_order() {
        let a = PointPattern::numeric("x", vec![vec![1.0, 2.0], vec![0.0, 0.0]]).unwrap();
        let b = PointPattern::numeric("x", vec![vec![0.0, 0.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(a, b);
        let c = PointPattern::numeric("x", vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn duplicates_are_kept() {
        let p = PointPattern::categorical("w", ["ap1", "ap1"]);
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn rejects_non_finite_and_mixed_dimensions() {
        assert!(PointPattern::numeric("a", vec![vec![f64::NAN]]).is_err());
        assert!(PointPattern::numeric("a", vec![vec![1.0], vec![1.0, 2.0]]).is_err());
    }

    #[test]
    fn dataset_rejects_mixed_kinds() {
        let a = PointPattern::numeric("a", vec![vec![0.0]]).unwrap();
        let b = PointPattern::categorical("b", ["ap1"]);
        assert!(matches!(
            LabeledDataset::unlabeled(vec![a, b]),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn empty_pattern_fits_any_dataset() {
        let a = PointPattern::categorical("a", ["ap1"]);
        let e = PointPattern::empty("e");
        let ds = LabeledDataset::unlabeled(vec![e, a]).unwrap();
        assert_eq!(ds.kind(), Some(ElementKind::Categorical));
    }

    #[test]
    fn labels_must_align_and_be_positive() {
        let a = PointPattern::empty("a");
        assert!(LabeledDataset::new(vec![a.clone()], Some(vec![])).is_err());
        assert!(LabeledDataset::new(vec![a.clone()], Some(vec![0])).is_err());
        assert!(LabeledDataset::new(vec![a], Some(vec![3])).is_ok());
    }
}
