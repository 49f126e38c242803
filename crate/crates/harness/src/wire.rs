//! The JSON body exchanged with external transducers, identical over
//! standard input/output and HTTP.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use transduce::{Color, InputSequence, Pair, Response};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Request {
    pub support: Vec<Pair>,
    pub query: InputSequence,
    pub sample: usize,
}

impl Request {
    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("request serializes")
    }
}

/// Reads one response body. A list of strings under `out` becomes a color
/// sequence even when the strings are not colors; any other `out` value is
/// kept verbatim as a raw response. A body without `out` is a protocol error.
pub fn decode_reply(payload: &str) -> Result<Response> {
    let protocol = |message: String| HarnessError::Protocol {
        message,
        payload: payload.trim_end().to_string(),
    };
    let v: Value = serde_json::from_str(payload).map_err(|e| protocol(format!("response is not JSON: {e}")))?;
    let out = v
        .get("out")
        .ok_or_else(|| protocol("response object has no `out` field".into()))?;
    let tokens = out.as_array().and_then(|items| {
        items
            .iter()
            .map(|t| t.as_str().map(Color::new))
            .collect::<Option<Vec<Color>>>()
    });
    Ok(match tokens {
        Some(colors) => Response::Colors(colors),
        None => Response::Raw(out.to_string()),
    })
}

pub fn encode_reply(out: &[impl AsRef<str>]) -> String {
    let out: Vec<&str> = out.iter().map(|s| s.as_ref()).collect();
    serde_json::json!({ "out": out }).to_string()
}

pub fn encode_error(message: &str) -> String {
    serde_json::json!({ "error": message }).to_string()
}
