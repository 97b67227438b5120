//! JSON model manifest. Layout and field meanings are documented in
//! `docs/manifest.md`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::PostOp;
use crate::synth::{CombineLayer, SynthGraph, TransposedConvLayer};

pub const FORMAT_VERSION: u32 = 1;
pub const TENSOR_DTYPE: &str = "f64le";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tensor {
    pub dtype: String,
    pub shape: Vec<usize>,
    /// Hex of the little-endian IEEE-754 doubles, row-major.
    pub data: String,
}

impl Tensor {
    pub fn from_values(shape: Vec<usize>, values: &[f64]) -> Self {
        let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        Self {
            dtype: TENSOR_DTYPE.to_string(),
            shape,
            data: hex::encode(bytes),
        }
    }

    fn decode(&self, node: &str, name: &str) -> Result<Vec<f64>> {
        if self.dtype != TENSOR_DTYPE {
            return Err(Error::Schema(format!(
                "{node}: tensor `{name}` has dtype `{}`, expected `{TENSOR_DTYPE}`",
                self.dtype
            )));
        }
        let bytes = hex::decode(&self.data)
            .map_err(|e| Error::Schema(format!("{node}: tensor `{name}` payload is not valid hex ({e})")))?;
        let count: usize = self.shape.iter().product();
        if bytes.len() != 8 * count {
            return Err(Error::Schema(format!(
                "{node}: tensor `{name}` payload has {} bytes, shape {:?} needs {}",
                bytes.len(),
                self.shape,
                8 * count
            )));
        }
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Node {
    pub op: String,
    #[serde(default)]
    pub attributes: BTreeMap<String, u64>,
    #[serde(default)]
    pub tensors: BTreeMap<String, Tensor>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Metadata {
    pub scheme: String,
    pub symbol_dimension: usize,
    pub samples_per_symbol: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelManifest {
    pub format_version: u32,
    pub metadata: Metadata,
    pub graph: Vec<Node>,
}

fn node(op: &str, attributes: &[(&str, usize)], tensors: Vec<(&str, Tensor)>) -> Node {
    Node {
        op: op.to_string(),
        attributes: attributes.iter().map(|(k, v)| (k.to_string(), *v as u64)).collect(),
        tensors: tensors.into_iter().map(|(k, t)| (k.to_string(), t)).collect(),
    }
}

pub fn export_manifest(graph: &SynthGraph, scheme: &str) -> ModelManifest {
    let conv = graph.conv();
    let mut nodes = vec![node(
        "ConvTranspose",
        &[
            ("groups", conv.groups()),
            ("in_channels", conv.in_channels()),
            ("kernel_len", conv.kernel_len()),
            ("out_channels", conv.out_channels()),
            ("stride", conv.stride()),
        ],
        vec![(
            "weight",
            Tensor::from_values(
                vec![conv.out_channels(), conv.group_in_channels(), conv.kernel_len()],
                conv.kernels(),
            ),
        )],
    )];
    let combine = graph.combine();
    if combine.enabled() {
        let w = combine.weights();
        let flat: Vec<f64> = w.iter().flatten().copied().collect();
        nodes.push(node(
            "MatMul",
            &[("in_features", combine.in_channels()), ("out_features", 2)],
            vec![("weight", Tensor::from_values(vec![2, combine.in_channels()], &flat))],
        ));
    }
    for op in graph.post_ops() {
        let attrs: Vec<(&str, usize)> = match *op {
            PostOp::QuadratureDelay { samples } => vec![("samples", samples)],
            PostOp::CyclicPrefix { cp_len, block_len } => vec![("block_len", block_len), ("cp_len", cp_len)],
            PostOp::Repeat { count } => vec![("count", count)],
            PostOp::Crop { start, len } => vec![("len", len), ("start", start)],
        };
        nodes.push(node(op.name(), &attrs, Vec::new()));
    }
    ModelManifest {
        format_version: FORMAT_VERSION,
        metadata: Metadata {
            scheme: scheme.to_string(),
            symbol_dimension: graph.symbol_dimension(),
            samples_per_symbol: graph.samples_per_symbol(),
        },
        graph: nodes,
    }
}

fn attr(node: &Node, label: &str, key: &str) -> Result<usize> {
    let v = node
        .attributes
        .get(key)
        .ok_or_else(|| Error::Schema(format!("{label}: missing attribute `{key}`")))?;
    usize::try_from(*v).map_err(|_| Error::Schema(format!("{label}: attribute `{key}` out of range")))
}

fn expect_keys(node: &Node, label: &str, attrs: &[&str], tensors: &[&str]) -> Result<()> {
    if let Some(k) = node.attributes.keys().find(|k| !attrs.contains(&k.as_str())) {
        return Err(Error::Schema(format!("{label}: unexpected attribute `{k}`")));
    }
    if let Some(k) = node.tensors.keys().find(|k| !tensors.contains(&k.as_str())) {
        return Err(Error::Schema(format!("{label}: unexpected tensor `{k}`")));
    }
    Ok(())
}

fn tensor<'a>(node: &'a Node, label: &str, name: &str) -> Result<&'a Tensor> {
    node.tensors
        .get(name)
        .ok_or_else(|| Error::Schema(format!("{label}: missing tensor `{name}`")))
}

fn layer_error(label: &str, e: Error) -> Error {
    match e {
        Error::InvalidLayer(msg) | Error::InvalidArgument(msg) => Error::Schema(format!("{label}: {msg}")),
        Error::NonFinite { index } => Error::Schema(format!("{label}: non-finite weight at index {index}")),
        other => other,
    }
}

impl ModelManifest {
    /// Pretty-printed JSON with object keys in sorted order.
    pub fn to_json(&self) -> String {
        let value = serde_json::to_value(self).expect("manifest serializes");
        let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: ModelManifest =
            serde_json::from_str(text).map_err(|e| Error::Schema(format!("malformed manifest: {e}")))?;
        if m.format_version != FORMAT_VERSION {
            return Err(Error::Schema(format!(
                "format_version {} is not supported (expected {FORMAT_VERSION})",
                m.format_version
            )));
        }
        Ok(m)
    }

    pub fn to_graph(&self) -> Result<SynthGraph> {
        let mut nodes = self.graph.iter().enumerate();
        let (_, first) = nodes
            .next()
            .ok_or_else(|| Error::Schema("graph has no nodes".into()))?;
        let label = |i: usize, n: &Node| format!("node {i} ({})", n.op);
        if first.op != "ConvTranspose" {
            return Err(Error::Schema(format!("{}: graph must start with ConvTranspose", label(0, first))));
        }
        let l0 = label(0, first);
        expect_keys(first, &l0, &["groups", "in_channels", "kernel_len", "out_channels", "stride"], &["weight"])?;
        let (groups, cin, k, cout, stride) = (
            attr(first, &l0, "groups")?,
            attr(first, &l0, "in_channels")?,
            attr(first, &l0, "kernel_len")?,
            attr(first, &l0, "out_channels")?,
            attr(first, &l0, "stride")?,
        );
        let w = tensor(first, &l0, "weight")?;
        let expected = vec![cout, if groups == 0 { 0 } else { cin / groups }, k];
        if w.shape != expected {
            return Err(Error::Schema(format!(
                "{l0}: weight shape {:?} does not match attributes (expected {expected:?})",
                w.shape
            )));
        }
        let conv = TransposedConvLayer::new(cin, cout, groups, stride, k, w.decode(&l0, "weight")?)
            .map_err(|e| layer_error(&l0, e))?;

        let mut combine = CombineLayer::disabled();
        let mut post_ops = Vec::new();
        for (i, n) in nodes {
            let li = label(i, n);
            let op = match n.op.as_str() {
                "MatMul" => {
                    if combine.enabled() || !post_ops.is_empty() {
                        return Err(Error::Schema(format!("{li}: MatMul must directly follow ConvTranspose")));
                    }
                    expect_keys(n, &li, &["in_features", "out_features"], &["weight"])?;
                    let fin = attr(n, &li, "in_features")?;
                    if attr(n, &li, "out_features")? != 2 {
                        return Err(Error::Schema(format!("{li}: out_features must be 2 (I and Q)")));
                    }
                    let t = tensor(n, &li, "weight")?;
                    if t.shape != [2, fin] {
                        return Err(Error::Schema(format!("{li}: weight shape {:?}, expected [2, {fin}]", t.shape)));
                    }
                    let v = t.decode(&li, "weight")?;
                    combine = CombineLayer::new([v[..fin].to_vec(), v[fin..].to_vec()]).map_err(|e| layer_error(&li, e))?;
                    continue;
                }
                "QuadratureDelay" => {
                    expect_keys(n, &li, &["samples"], &[])?;
                    PostOp::QuadratureDelay {
                        samples: attr(n, &li, "samples")?,
                    }
                }
                "CyclicPrefix" => {
                    expect_keys(n, &li, &["block_len", "cp_len"], &[])?;
                    PostOp::CyclicPrefix {
                        cp_len: attr(n, &li, "cp_len")?,
                        block_len: attr(n, &li, "block_len")?,
                    }
                }
                "Repeat" => {
                    expect_keys(n, &li, &["count"], &[])?;
                    PostOp::Repeat {
                        count: attr(n, &li, "count")?,
                    }
                }
                "Crop" => {
                    expect_keys(n, &li, &["len", "start"], &[])?;
                    PostOp::Crop {
                        start: attr(n, &li, "start")?,
                        len: attr(n, &li, "len")?,
                    }
                }
                other => return Err(Error::Schema(format!("{li}: unknown op `{other}`"))),
            };
            op.validate().map_err(|e| layer_error(&li, e))?;
            post_ops.push(op);
        }
        let graph = SynthGraph::new(conv, combine, self.metadata.symbol_dimension, post_ops)
            .map_err(|e| layer_error("graph", e))?;
        if graph.samples_per_symbol() != self.metadata.samples_per_symbol {
            return Err(Error::Schema(format!(
                "metadata samples_per_symbol {} disagrees with ConvTranspose stride {}",
                self.metadata.samples_per_symbol,
                graph.samples_per_symbol()
            )));
        }
        Ok(graph)
    }
}

pub fn import_manifest(json: &str) -> Result<SynthGraph> {
    ModelManifest::from_json(json)?.to_graph()
}

pub fn write_manifest(path: &Path, manifest: &ModelManifest) -> Result<()> {
    std::fs::write(path, manifest.to_json())?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<ModelManifest> {
    ModelManifest::from_json(&std::fs::read_to_string(path)?)
}
