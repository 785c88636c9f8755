//! JSON spec documents.
//!
//! ```json
//! {"family": "explicit", "values": ["1/2", "1/4"],
//!  "tail": {"family": "constant", "q": "1/8"},
//!  "properties": [{"kind": "monotone_decreasing", "from": 2}]}
//! ```
//!
//! Every real parameter is a string holding a decimal or `p/q` literal.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDoc {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q1: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<Box<SpecDoc>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub properties: Vec<PropertyDoc>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PropertyDoc {
    MonotoneDecreasing { from: u64 },
    ConstantSubsequence { indices: String, value: String },
}
