use serde::{Deserialize, Serialize};

use super::{stinespring, Isometry, KrausChannel};
use crate::error::{LabError, Result};
use crate::tensor::{ComplexMatrix, SubsystemLayout};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChannelKind {
    Kraus,
    Isometry,
}

/// JSON description of a channel or isometry.
///
/// For an isometry the output splits into kept (`B`) and environment (`E`)
/// factors: the `env` list names the environment factors explicitly, otherwise
/// every output label starting with `E` is environment. A Kraus channel is
/// dilated canonically and its environment is the Kraus index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub kind: ChannelKind,
    #[serde(rename = "in")]
    pub input: Vec<usize>,
    pub out: SubsystemLayout,
    pub ops: Vec<ComplexMatrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub env: Option<Vec<String>>,
}

/// An isometry with its output partition.
#[derive(Clone, Debug, PartialEq)]
pub struct PartitionedIsometry {
    pub isometry: Isometry,
    pub b_labels: Vec<String>,
    pub e_labels: Vec<String>,
}

impl ChannelSpec {
    fn in_layout(&self) -> Result<SubsystemLayout> {
        if self.input.len() == 2 {
            return SubsystemLayout::new([("L", self.input[0]), ("R", self.input[1])]);
        }
        SubsystemLayout::new(
            self.input
                .iter()
                .enumerate()
                .map(|(i, &d)| (format!("in{i}"), d)),
        )
    }

    pub fn to_channel(&self) -> Result<KrausChannel> {
        match self.kind {
            ChannelKind::Kraus => {
                KrausChannel::new(self.ops.clone(), self.in_layout()?, self.out.clone())
            }
            ChannelKind::Isometry => Ok(self.single_op()?.as_channel()),
        }
    }

    pub fn to_isometry(&self) -> Result<PartitionedIsometry> {
        match self.kind {
            ChannelKind::Kraus => {
                let v = stinespring(&self.to_channel()?)?;
                let labels = v.out_layout().labels();
                let (b, e) = labels.split_at(labels.len() - 1);
                Ok(PartitionedIsometry {
                    b_labels: b.iter().map(|s| s.to_string()).collect(),
                    e_labels: e.iter().map(|s| s.to_string()).collect(),
                    isometry: v,
                })
            }
            ChannelKind::Isometry => {
                let v = self.single_op()?;
                let labels: Vec<String> =
                    self.out.labels().iter().map(|s| s.to_string()).collect();
                let e_labels: Vec<String> = match &self.env {
                    Some(env) => {
                        self.out.indices(env)?;
                        env.clone()
                    }
                    None => labels.iter().filter(|l| l.starts_with('E')).cloned().collect(),
                };
                let b_labels = labels
                    .into_iter()
                    .filter(|l| !e_labels.contains(l))
                    .collect();
                Ok(PartitionedIsometry {
                    isometry: v,
                    b_labels,
                    e_labels,
                })
            }
        }
    }

    fn single_op(&self) -> Result<Isometry> {
        match self.ops.as_slice() {
            [m] => Isometry::new(m.clone(), self.in_layout()?, self.out.clone()),
            ops => Err(LabError::InvalidArgument(format!(
                "an isometry takes exactly one matrix, got {}",
                ops.len()
            ))),
        }
    }

    pub fn from_isometry(v: &Isometry, e_labels: &[String]) -> Self {
        ChannelSpec {
            kind: ChannelKind::Isometry,
            input: v.in_layout().dims(),
            out: v.out_layout().clone(),
            ops: vec![v.matrix().clone()],
            env: Some(e_labels.to_vec()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_dephasing_kraus() {
        let text = r#"{"kind":"kraus","in":[2],"out":[{"label":"B","dim":2}],
            "ops":[[[[1,0],[0,0]],[[0,0],[0,0]]], [[[0,0],[0,0]],[[0,0],[1,0]]]]}"#;
        let spec: ChannelSpec = serde_json::from_str(text).unwrap();
        let ch = spec.to_channel().unwrap();
        assert_eq!(ch.env_dim(), 2);
        let p = spec.to_isometry().unwrap();
        assert_eq!(p.b_labels, vec!["B"]);
        assert_eq!(p.e_labels, vec!["Env"]);
    }

    #[test]
    fn isometry_env_by_prefix() {
        // |i> -> |i>_B |0>_E
        let m = ComplexMatrix::from_real_rows(&[&[1.0, 0.0], &[0.0, 0.0], &[0.0, 1.0], &[0.0, 0.0]]);
        let spec = ChannelSpec {
            kind: ChannelKind::Isometry,
            input: vec![2],
            out: SubsystemLayout::new([("B", 2), ("E", 2)]).unwrap(),
            ops: vec![m],
            env: None,
        };
        let p = spec.to_isometry().unwrap();
        assert_eq!(p.e_labels, vec!["E"]);
        let text = serde_json::to_string(&spec).unwrap();
        let back: ChannelSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn rejects_non_trace_preserving() {
        let spec = ChannelSpec {
            kind: ChannelKind::Kraus,
            input: vec![2],
            out: SubsystemLayout::single("B", 2).unwrap(),
            ops: vec![ComplexMatrix::identity(2).scale_real(0.5)],
            env: None,
        };
        assert!(matches!(spec.to_channel(), Err(LabError::InvalidChannel(_))));
    }
}
