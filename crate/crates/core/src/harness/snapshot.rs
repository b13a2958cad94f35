//! Network snapshots: JSON (sorted keys, 9 significant digits) and DOT.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{ConfigError, HarnessError};
use crate::substrate::{EdgeKind, EdgeState, Network, NodeKind, NodeState, Params};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub format_version: u32,
    pub tick_count: u64,
    pub seed: u64,
    pub params: Params,
    pub nodes: Vec<NodeState>,
    pub edges: Vec<EdgeState>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    Dot,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(Format::Json),
            "dot" => Ok(Format::Dot),
            _ => Err(format!("unknown format `{s}` (json or dot)")),
        }
    }
}

/// Round to 9 significant digits.
pub fn round9(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round9(n.as_f64().expect("f64"));
            *v = serde_json::Number::from_f64(r).map_or(Value::Null, Value::Number);
        }
        Value::Array(a) => a.iter_mut().for_each(round_floats),
        Value::Object(m) => m.values_mut().for_each(round_floats),
        _ => {}
    }
}

impl Snapshot {
    pub fn capture(net: &Network, seed: u64) -> Self {
        Snapshot {
            format_version: FORMAT_VERSION,
            tick_count: net.tick_count(),
            seed,
            params: net.params,
            nodes: net.nodes().to_vec(),
            edges: net.edges().to_vec(),
        }
    }

    pub fn to_network(&self) -> Result<Network, ConfigError> {
        Network::from_parts(self.params, self.tick_count, self.nodes.clone(), self.edges.clone())
            .map_err(|e| ConfigError::invalid("snapshot", e))
    }

    /// The snapshot as it reads back from JSON: every float at 9 significant digits.
    pub fn quantized(&self) -> Self {
        Self::from_json(&self.to_json()).expect("own output parses")
    }

    /// Canonical JSON text: keys sorted, floats at 9 significant digits, trailing newline.
    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("snapshot serializes");
        round_floats(&mut v);
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let s: Snapshot =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse { path: "snapshot".into(), message: e.to_string() })?;
        if s.format_version != FORMAT_VERSION {
            return Err(ConfigError::Version { found: s.format_version, expected: FORMAT_VERSION });
        }
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::from_json(&text).map_err(|e| match e {
            ConfigError::Parse { message, .. } => ConfigError::Parse { path: path.display().to_string(), message },
            other => other,
        })
    }

    /// Graphviz text. Fixated nodes are double circles; pen width grows with weight.
    pub fn to_dot(&self) -> String {
        let w_max = self.params.w_max;
        let pen = |w: f64| (5.0 * w / w_max).max(0.1);
        let mut s = String::from("digraph tnet {\n  node [shape=circle];\n");
        for n in &self.nodes {
            let label = n.label.clone().unwrap_or_else(|| format!("n{}", n.id.0));
            let shape = if n.fixated { "doublecircle" } else { "circle" };
            let kind = match n.kind {
                NodeKind::Sensory => "sensory",
                NodeKind::Reward => "reward",
                NodeKind::Effector => "effector",
                NodeKind::Chunk => "chunk",
                NodeKind::Plain => "plain",
            };
            let _ = writeln!(
                s,
                "  n{} [label={}, shape={shape}, penwidth={:.3}, tooltip=\"{kind} w={}\"];",
                n.id.0,
                quote(&label),
                pen(n.weight),
                round9(n.weight)
            );
        }
        for e in &self.edges {
            let style = match e.kind {
                EdgeKind::Forward => "solid",
                EdgeKind::Back => "dashed",
                EdgeKind::Member => "dotted",
            };
            let _ = writeln!(
                s,
                "  n{} -> n{} [penwidth={:.3}, style={style}, tooltip=\"w={}\"];",
                e.src.0,
                e.dst.0,
                pen(e.weight),
                round9(e.weight)
            );
        }
        s.push_str("}\n");
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Dot => self.to_dot(),
        }
    }

    pub fn export(&self, format: Format, path: &Path) -> Result<(), HarnessError> {
        write_file(path, &self.render(format))
    }
}

fn quote(s: &str) -> String {
    let mut q = String::from("\"");
    for c in s.chars() {
        match c {
            '"' => q.push_str("\\\""),
            '\\' => q.push_str("\\\\"),
            '\n' => q.push_str("\\n"),
            c => q.push(c),
        }
    }
    q.push('"');
    q
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), HarnessError> {
    std::fs::write(path, text).map_err(|source| HarnessError::Output { path: path.display().to_string(), source })
}
