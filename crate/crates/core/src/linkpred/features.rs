//! Node attribute encoding into dense feature rows.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::matrix::DenseMatrix;
use crate::graph::PropertyGraph;

/// How one attribute becomes feature columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Recipe {
    /// `cap` columns: the `cap - 1` most frequent values plus one overflow slot
    /// shared by rarer and unseen values.
    OneHot { cap: usize },
    /// Stable FNV-1a hash of the value into `buckets` columns.
    HashBucket { buckets: usize },
    /// Leading integer of the value scaled to `[0, 1]` by the training range.
    MinMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub fields: Vec<(String, Recipe)>,
}

/// The default encodes structure only: every node gets the normalized degree
/// column and nothing else. Attribute recipes are opt-in.
impl Default for EncoderSpec {
    fn default() -> Self {
        EncoderSpec { fields: Vec::new() }
    }
}

impl EncoderSpec {
    /// Demographic, location, birth date and employer columns.
    pub fn attributes() -> Self {
        EncoderSpec {
            fields: vec![
                ("gender".into(), Recipe::OneHot { cap: 3 }),
                ("ethnicity".into(), Recipe::OneHot { cap: 6 }),
                ("state".into(), Recipe::OneHot { cap: 16 }),
                ("dob".into(), Recipe::MinMax),
                ("employer".into(), Recipe::OneHot { cap: 16 }),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum FieldEncoder {
    OneHot { attr: String, vocab: BTreeMap<String, usize>, cap: usize },
    HashBucket { attr: String, buckets: usize },
    MinMax { attr: String, min: f64, max: f64 },
}

impl FieldEncoder {
    fn width(&self) -> usize {
        match self {
            FieldEncoder::OneHot { cap, .. } => *cap,
            FieldEncoder::HashBucket { buckets, .. } => *buckets,
            FieldEncoder::MinMax { .. } => 1,
        }
    }
}

/// Fitted encoder. The vocabulary is fixed at fit time and reused for inference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoder {
    fields: Vec<FieldEncoder>,
    max_degree: f64,
}

fn leading_number(s: &str) -> Option<f64> {
    let digits: String = s.trim().chars().take_while(|c| c.is_ascii_digit()).collect();
    digits.parse().ok()
}

pub fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

impl FeatureEncoder {
    pub fn fit(g: &PropertyGraph, spec: &EncoderSpec) -> Self {
        let fields = spec
            .fields
            .iter()
            .map(|(attr, recipe)| match recipe {
                Recipe::OneHot { cap } => {
                    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                    for n in g.nodes() {
                        if let Some(v) = n.attr(attr) {
                            *counts.entry(v).or_default() += 1;
                        }
                    }
                    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
                    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
                    let cap = (*cap).max(1);
                    let vocab =
                        ranked.into_iter().take(cap - 1).enumerate().map(|(i, (v, _))| (v.to_string(), i)).collect();
                    FieldEncoder::OneHot { attr: attr.clone(), vocab, cap }
                }
                Recipe::HashBucket { buckets } => {
                    FieldEncoder::HashBucket { attr: attr.clone(), buckets: (*buckets).max(1) }
                }
                Recipe::MinMax => {
                    let vals: Vec<f64> = g.nodes().iter().filter_map(|n| n.attr(attr).and_then(leading_number)).collect();
                    let min = vals.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let (min, max) = if vals.is_empty() { (0.0, 1.0) } else { (min, max) };
                    FieldEncoder::MinMax { attr: attr.clone(), min, max }
                }
            })
            .collect();
        let max_degree = g.nodes().iter().map(|n| g.degree(n.id)).max().unwrap_or(0).max(1) as f64;
        FeatureEncoder { fields, max_degree }
    }

    /// Feature width including the trailing degree column.
    pub fn dim(&self) -> usize {
        self.fields.iter().map(FieldEncoder::width).sum::<usize>() + 1
    }

    /// Column index of the normalized degree.
    pub fn degree_column(&self) -> usize {
        self.dim() - 1
    }

    /// Column that a one-hot value lands in, relative to its field start.
    pub fn one_hot_slot(&self, attr: &str, value: &str) -> Option<usize> {
        self.fields.iter().find_map(|f| match f {
            FieldEncoder::OneHot { attr: a, vocab, cap } if a == attr => Some(*vocab.get(value).unwrap_or(&(cap - 1))),
            _ => None,
        })
    }

    pub fn encode(&self, g: &PropertyGraph) -> DenseMatrix {
        let mut x = DenseMatrix::zeros(g.node_count(), self.dim());
        for node in g.nodes() {
            let row = x.row_mut(node.id.index());
            let mut offset = 0;
            for f in &self.fields {
                match f {
                    FieldEncoder::OneHot { attr, vocab, cap } => {
                        if let Some(v) = node.attr(attr) {
                            row[offset + *vocab.get(v).unwrap_or(&(cap - 1))] = 1.0;
                        }
                    }
                    FieldEncoder::HashBucket { attr, buckets } => {
                        if let Some(v) = node.attr(attr) {
                            row[offset + (fnv1a(v) % *buckets as u64) as usize] = 1.0;
                        }
                    }
                    FieldEncoder::MinMax { attr, min, max } => {
                        if let Some(v) = node.attr(attr).and_then(leading_number) {
                            let span = max - min;
                            row[offset] = if span > 0.0 { (v - min) / span } else { 0.0 };
                        }
                    }
                }
                offset += f.width();
            }
            row[offset] = g.degree(node.id) as f64 / self.max_degree;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, Node, Relation};

    #[test]
    fn empty_node_only_has_degree() {
        let nodes = vec![Node::person(0usize), Node::person(1usize).with_attr("gender", "F")];
        let g = PropertyGraph::build(nodes, vec![Edge::new(0usize, 1usize, Relation::Knows)]).unwrap();
        let enc = FeatureEncoder::fit(&g, &EncoderSpec::attributes());
        let x = enc.encode(&g);
        let row = x.row(0);
        assert_eq!(row[enc.degree_column()], 1.0);
        assert!(row[..enc.degree_column()].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identical_nodes_identical_rows() {
        let mk = |i: usize| Node::person(i).with_attr("gender", "M").with_attr("dob", "1970-01-01").with_attr("state", "NY");
        let nodes = vec![mk(0), mk(1), Node::person(2usize).with_attr("dob", "1990-05-05")];
        let edges = vec![Edge::new(0usize, 2usize, Relation::Knows), Edge::new(1usize, 2usize, Relation::Knows)];
        let g = PropertyGraph::build(nodes, edges).unwrap();
        let x = FeatureEncoder::fit(&g, &EncoderSpec::attributes()).encode(&g);
        assert_eq!(x.row(0), x.row(1));
        assert_ne!(x.row(0), x.row(2));
    }

    #[test]
    fn vocabulary_cap_overflow() {
        let nodes: Vec<Node> = (0..150).map(|i| Node::person(i).with_attr("surname", &format!("NAME{i:03}"))).collect();
        let g = PropertyGraph::build(nodes, vec![]).unwrap();
        let spec = EncoderSpec { fields: vec![("surname".into(), Recipe::OneHot { cap: 100 })] };
        let enc = FeatureEncoder::fit(&g, &spec);
        let overflow = (0..150).filter(|i| enc.one_hot_slot("surname", &format!("NAME{i:03}")) == Some(99)).count();
        assert_eq!(overflow, 51);
        assert_eq!(enc.one_hot_slot("surname", "UNSEEN"), Some(99));
    }
}
