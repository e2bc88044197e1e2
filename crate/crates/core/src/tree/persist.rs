//! JSON model documents. See `docs/model-format.md` for the field layout.

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::Value;

use super::{TreeModel, TreeNode};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const FORMAT_VERSION: u64 = 1;

#[derive(Serialize)]
struct Document<'a, T> {
    version: u64,
    #[serde(flatten)]
    model: &'a TreeModel<T>,
}

pub fn to_document<T: Scalar + Serialize>(model: &TreeModel<T>) -> Result<String> {
    let doc = Document {
        version: FORMAT_VERSION,
        model,
    };
    serde_json::to_string_pretty(&doc).map_err(|e| Error::Parse(e.to_string()))
}

pub fn from_document<T: Scalar + DeserializeOwned>(text: &str) -> Result<TreeModel<T>> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::Parse("document is not an object".into()))?;
    let version = obj
        .remove("version")
        .ok_or_else(|| Error::Parse("missing field `version`".into()))?;
    let version = version
        .as_u64()
        .ok_or_else(|| Error::Parse("field `version` must be a nonnegative integer".into()))?;
    if version != FORMAT_VERSION {
        return Err(Error::FormatVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let model: TreeModel<T> = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    check_node(&model.root, model.n_features())?;
    model.hyperparams.validate().map_err(|e| Error::Parse(e.to_string()))?;
    Ok(model)
}

fn check_node<T: Scalar>(node: &TreeNode<T>, n_features: usize) -> Result<()> {
    match node {
        TreeNode::Leaf { n_pos, n_neg, score } => {
            if !score.is_finite_value() || *score < T::zero() || *score > T::one() {
                return Err(Error::Parse(format!("leaf score {score} outside [0, 1]")));
            }
            if n_pos + n_neg == 0 {
                return Err(Error::Parse("leaf with no training instances".into()));
            }
            Ok(())
        }
        TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        } => {
            if *feature >= n_features {
                return Err(Error::Parse(format!(
                    "split feature {feature} out of range for {n_features} features"
                )));
            }
            if !threshold.is_finite() {
                return Err(Error::Parse("non-finite split threshold".into()));
            }
            check_node(left, n_features)?;
            check_node(right, n_features)
        }
    }
}
