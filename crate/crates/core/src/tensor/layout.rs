use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// One labeled tensor factor.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of labeled tensor factors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Factor>", into = "Vec<Factor>")]
pub struct SubsystemLayout {
    factors: Vec<Factor>,
}

impl TryFrom<Vec<Factor>> for SubsystemLayout {
    type Error = LabError;

    fn try_from(factors: Vec<Factor>) -> Result<Self> {
        let mut seen = HashSet::new();
        for f in &factors {
            if f.dim == 0 {
                return Err(LabError::InvalidArgument(format!(
                    "factor `{}` has dimension 0",
                    f.label
                )));
            }
            if !seen.insert(f.label.as_str()) {
                return Err(LabError::DuplicateLabel(f.label.clone()));
            }
        }
        Ok(SubsystemLayout { factors })
    }
}

impl From<SubsystemLayout> for Vec<Factor> {
    fn from(layout: SubsystemLayout) -> Self {
        layout.factors
    }
}

impl SubsystemLayout {
    pub fn new<S: Into<String>>(factors: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        factors
            .into_iter()
            .map(|(label, dim)| Factor {
                label: label.into(),
                dim,
            })
            .collect::<Vec<_>>()
            .try_into()
    }

    /// A single factor.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    pub fn empty() -> Self {
        SubsystemLayout {
            factors: Vec::new(),
        }
    }

    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.dim).collect()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.factors.iter().map(|f| f.label.as_str()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.factors.iter().map(|f| f.dim).product()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.factors.iter().any(|f| f.label == label)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.factors
            .iter()
            .position(|f| f.label == label)
            .ok_or_else(|| LabError::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.factors[self.index_of(label)?].dim)
    }

    /// Positions of `labels` in layout order, rejecting unknown or repeated labels.
    pub fn indices<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut idx = Vec::with_capacity(labels.len());
        for l in labels {
            let i = self.index_of(l.as_ref())?;
            if idx.contains(&i) {
                return Err(LabError::DuplicateLabel(l.as_ref().to_string()));
            }
            idx.push(i);
        }
        idx.sort_unstable();
        Ok(idx)
    }

    /// Sub-layout of the given positions, in the order given.
    pub fn select(&self, positions: &[usize]) -> SubsystemLayout {
        SubsystemLayout {
            factors: positions.iter().map(|&i| self.factors[i].clone()).collect(),
        }
    }

    /// Positions not in `positions`, ascending.
    pub fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.len()).filter(|i| !positions.contains(i)).collect()
    }

    /// Product dimension of a label set.
    pub fn region_dim<S: AsRef<str>>(&self, labels: &[S]) -> Result<usize> {
        Ok(self
            .indices(labels)?
            .iter()
            .map(|&i| self.factors[i].dim)
            .product())
    }

    pub fn concat(&self, other: &SubsystemLayout) -> Result<SubsystemLayout> {
        let mut factors = self.factors.clone();
        factors.extend(other.factors.iter().cloned());
        factors.try_into()
    }

    pub fn relabel(&self, from: &str, to: &str) -> Result<SubsystemLayout> {
        let i = self.index_of(from)?;
        let mut factors = self.factors.clone();
        factors[i].label = to.to_string();
        factors.try_into()
    }

    /// Same factors with fresh labels.
    pub fn with_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<SubsystemLayout> {
        if labels.len() != self.len() {
            return Err(LabError::DimensionMismatch(format!(
                "{} labels for {} factors",
                labels.len(),
                self.len()
            )));
        }
        Self::new(
            labels
                .iter()
                .zip(&self.factors)
                .map(|(l, f)| (l.as_ref().to_string(), f.dim)),
        )
    }
}

/// Flat offsets of every multi-index over `axes` (row-major in the order given)
/// inside a tensor with shape `dims`.
pub(crate) fn axis_offsets(dims: &[usize], axes: &[usize]) -> Vec<usize> {
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }
    let mut out = vec![0usize];
    for &ax in axes {
        let mut next = Vec::with_capacity(out.len() * dims[ax]);
        for &base in &out {
            for v in 0..dims[ax] {
                next.push(base + v * strides[ax]);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_duplicates_and_zero() {
        assert_eq!(
            SubsystemLayout::new([("A", 2), ("A", 3)]),
            Err(LabError::DuplicateLabel("A".into()))
        );
        assert!(SubsystemLayout::new([("A", 0)]).is_err());
    }

    #[test]
    fn unknown_label_is_named() {
        let l = SubsystemLayout::new([("A", 2), ("B", 3)]).unwrap();
        assert_eq!(l.indices(&["C"]), Err(LabError::UnknownLabel("C".into())));
        assert_eq!(l.indices(&["B", "A"]).unwrap(), vec![0, 1]);
        assert_eq!(l.total_dim(), 6);
    }

    #[test]
    fn json_shape() {
        let l = SubsystemLayout::new([("A", 2)]).unwrap();
        let s = serde_json::to_string(&l).unwrap();
        assert_eq!(s, r#"[{"label":"A","dim":2}]"#);
        let bad: std::result::Result<SubsystemLayout, _> =
            serde_json::from_str(r#"[{"label":"A","dim":2},{"label":"A","dim":2}]"#);
        assert!(bad.is_err());
    }

    #[test]
    fn offsets_enumerate_axes() {
        // shape (2,3,2): strides (6,2,1)
        assert_eq!(axis_offsets(&[2, 3, 2], &[0, 2]), vec![0, 1, 6, 7]);
        assert_eq!(axis_offsets(&[2, 3, 2], &[2, 0]), vec![0, 6, 1, 7]);
        assert_eq!(axis_offsets(&[2, 3], &[]), vec![0]);
    }
}
