//! Probabilistic matching engine.
//!
//! Records are standardized, bucketed into candidate pairs, compared attribute
//! by attribute with frequency-based agreement weights, and decided against an
//! auto-link and a clerical-review threshold. Linked records are merged by
//! transitive closure.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Edge, Node, NodeId, NodeKind, PropertyGraph};
use crate::sources::{RecordLink, Source, SourceRecord};
use crate::tables;
use crate::text::{digits_only, normalize, soundex, within_one_edit};
use crate::unionfind::UnionFind;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("invalid thresholds: review {review} exceeds autolink {autolink}")]
    InvalidThresholds { autolink: f64, review: f64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

const NAME_ATTRS: &[&str] = &["given_name", "surname"];
const DIGIT_ATTRS: &[&str] = &["phone", "ssn", "zip", "dob"];

/// Normalized, comparison-ready view of a source record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StandardizedRecord {
    pub record_id: String,
    pub source: Source,
    pub values: BTreeMap<String, String>,
    /// Soundex codes of name attributes.
    pub phonetic: BTreeMap<String, String>,
    /// Given name after nickname canonicalization.
    pub canonical_given: Option<String>,
}

impl StandardizedRecord {
    pub fn get(&self, attr: &str) -> Option<&str> {
        self.values.get(attr).map(String::as_str)
    }

    pub fn birth_year(&self) -> Option<&str> {
        self.get("dob").filter(|d| d.len() >= 4).map(|d| &d[..4])
    }
}

/// Normalized form of a single attribute value.
pub fn standardize_value(attr: &str, value: &str) -> String {
    if DIGIT_ATTRS.contains(&attr) {
        return digits_only(value);
    }
    let norm = normalize(value);
    if NAME_ATTRS.contains(&attr) {
        return norm.replace(' ', "");
    }
    if attr == "street" {
        let mut tokens: Vec<&str> = norm.split(' ').collect();
        if let Some(last) = tokens.last_mut() {
            if let Some(abbr) = tables::street_suffix_abbrev(last) {
                *last = abbr;
            }
        }
        return tokens.join(" ");
    }
    norm
}

pub fn standardize(record: &SourceRecord) -> StandardizedRecord {
    let mut values = BTreeMap::new();
    for (attr, value) in &record.attributes {
        let v = standardize_value(attr, value);
        if !v.is_empty() {
            values.insert(attr.clone(), v);
        }
    }
    let phonetic = NAME_ATTRS
        .iter()
        .filter_map(|a| values.get(*a).map(|v| (a.to_string(), soundex(v))))
        .collect();
    let canonical_given = values
        .get("given_name")
        .map(|g| tables::canonical_given(g).map(str::to_string).unwrap_or_else(|| g.clone()));
    StandardizedRecord { record_id: record.record_id.clone(), source: record.source, values, phonetic, canonical_given }
}

/// Candidate-generation key recipes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BucketRecipe {
    SurnameSoundexBirthYear,
    GivenSoundexDob,
    Phone,
    Ssn,
    Email,
    SurnameSoundexStreetNumber,
}

impl BucketRecipe {
    pub fn key(self, r: &StandardizedRecord) -> Option<String> {
        let tag = match self {
            BucketRecipe::SurnameSoundexBirthYear => {
                return Some(format!("sy:{}:{}", r.phonetic.get("surname")?, r.birth_year()?));
            }
            BucketRecipe::GivenSoundexDob => {
                let g = soundex(r.canonical_given.as_deref()?);
                return Some(format!("gd:{g}:{}", r.get("dob")?));
            }
            BucketRecipe::SurnameSoundexStreetNumber => {
                let num = r.get("street")?.split(' ').next()?;
                return Some(format!("ss:{}:{num}", r.phonetic.get("surname")?));
            }
            BucketRecipe::Phone => "phone",
            BucketRecipe::Ssn => "ssn",
            BucketRecipe::Email => "email",
        };
        r.get(tag).map(|v| format!("{tag}:{v}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub autolink: f64,
    pub review: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { autolink: 20.0, review: 11.0 }
    }
}

impl Thresholds {
    pub fn new(autolink: f64, review: f64) -> Result<Self, MatchError> {
        let t = Thresholds { autolink, review };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<(), MatchError> {
        if self.review <= self.autolink {
            Ok(())
        } else {
            Err(MatchError::InvalidThresholds { autolink: self.autolink, review: self.review })
        }
    }
}

impl std::str::FromStr for Thresholds {
    type Err = String;

    /// Parses `autolink:review`, e.g. `20:11`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, r) = s.split_once(':').ok_or("expected AUTOLINK:REVIEW")?;
        let a: f64 = a.trim().parse().map_err(|e| format!("autolink: {e}"))?;
        let r: f64 = r.trim().parse().map_err(|e| format!("review: {e}"))?;
        Thresholds::new(a, r).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MatchConfig {
    pub attributes: Vec<String>,
    pub w_max: f64,
    pub disagreement: f64,
    pub near_credit: f64,
    pub thresholds: Thresholds,
    pub buckets: Vec<BucketRecipe>,
    /// Buckets larger than this do not generate pairs.
    pub max_bucket_size: usize,
}

impl Default for MatchConfig {
    fn default() -> Self {
        MatchConfig {
            attributes: [
                "given_name", "surname", "gender", "ethnicity", "dob", "street", "city", "state", "zip", "phone", "email",
                "ssn", "employer",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            w_max: 15.0,
            disagreement: -4.0,
            near_credit: 0.7,
            thresholds: Thresholds::default(),
            buckets: vec![
                BucketRecipe::SurnameSoundexBirthYear,
                BucketRecipe::GivenSoundexDob,
                BucketRecipe::Phone,
                BucketRecipe::Ssn,
                BucketRecipe::Email,
                BucketRecipe::SurnameSoundexStreetNumber,
            ],
            max_bucket_size: 2000,
        }
    }
}

/// Frequency-based agreement weights per attribute value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTable {
    pub w_max: f64,
    pub values: BTreeMap<String, BTreeMap<String, f64>>,
    /// Agreement weight for a value absent from the corpus.
    pub default_agreement: BTreeMap<String, f64>,
    pub disagreement: BTreeMap<String, f64>,
}

impl WeightTable {
    pub fn agreement(&self, attr: &str, value: &str) -> f64 {
        self.values
            .get(attr)
            .and_then(|m| m.get(value))
            .or_else(|| self.default_agreement.get(attr))
            .copied()
            .unwrap_or(self.w_max)
    }

    pub fn disagreement(&self, attr: &str) -> f64 {
        self.disagreement.get(attr).copied().unwrap_or(-4.0)
    }

    pub fn save(&self, path: &Path) -> io::Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

/// `log2(1 / relative frequency)` per value, clipped to `[0, w_max]`.
pub fn compute_weights(records: &[StandardizedRecord], config: &MatchConfig) -> WeightTable {
    let mut counts: BTreeMap<&str, BTreeMap<&str, u64>> = BTreeMap::new();
    for r in records {
        for attr in &config.attributes {
            if let Some(v) = r.get(attr) {
                *counts.entry(attr.as_str()).or_default().entry(v).or_default() += 1;
            }
        }
    }
    let clip = |w: f64| w.clamp(0.0, config.w_max);
    let mut values = BTreeMap::new();
    let mut default_agreement = BTreeMap::new();
    for (attr, per_value) in counts {
        let total: u64 = per_value.values().sum();
        let weights = per_value
            .into_iter()
            .map(|(v, c)| (v.to_string(), clip((total as f64 / c as f64).log2())))
            .collect();
        values.insert(attr.to_string(), weights);
        default_agreement.insert(attr.to_string(), clip((total as f64).log2()));
    }
    let disagreement = config.attributes.iter().map(|a| (a.clone(), config.disagreement)).collect();
    WeightTable { w_max: config.w_max, values, default_agreement, disagreement }
}

/// Scored record pair. `a < b` by record id.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchScore {
    pub a: String,
    pub b: String,
    pub contributions: BTreeMap<String, f64>,
    pub total: f64,
}

/// How two present values relate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Agreement {
    Exact,
    Near,
    Different,
}

pub fn agreement(attr: &str, a: &StandardizedRecord, b: &StandardizedRecord) -> Option<Agreement> {
    let (va, vb) = (a.get(attr)?, b.get(attr)?);
    if va == vb {
        return Some(Agreement::Exact);
    }
    let phonetic_eq = NAME_ATTRS.contains(&attr) && a.phonetic.get(attr) == b.phonetic.get(attr);
    let nickname_eq = attr == "given_name" && a.canonical_given == b.canonical_given;
    if within_one_edit(va, vb) || phonetic_eq || nickname_eq {
        Some(Agreement::Near)
    } else {
        Some(Agreement::Different)
    }
}

pub fn compare(a: &StandardizedRecord, b: &StandardizedRecord, w: &WeightTable, config: &MatchConfig) -> MatchScore {
    let (a, b) = if a.record_id <= b.record_id { (a, b) } else { (b, a) };
    let mut contributions = BTreeMap::new();
    for attr in &config.attributes {
        let c = match agreement(attr, a, b) {
            None => {
                if a.get(attr).is_none() && b.get(attr).is_none() {
                    continue;
                }
                0.0
            }
            Some(Agreement::Exact) => w.agreement(attr, a.get(attr).unwrap_or_default()),
            Some(Agreement::Near) => {
                let wa = w.agreement(attr, a.get(attr).unwrap_or_default());
                let wb = w.agreement(attr, b.get(attr).unwrap_or_default());
                config.near_credit * wa.min(wb)
            }
            Some(Agreement::Different) => w.disagreement(attr),
        };
        contributions.insert(attr.clone(), c);
    }
    let total = contributions.values().sum();
    MatchScore { a: a.record_id.clone(), b: b.record_id.clone(), contributions, total }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Link,
    ClericalReview,
    NoLink,
}

pub fn classify(total: f64, t: &Thresholds) -> Decision {
    if total >= t.autolink {
        Decision::Link
    } else if total >= t.review {
        Decision::ClericalReview
    } else {
        Decision::NoLink
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchDecision {
    pub decision: Decision,
    pub score: MatchScore,
}

pub fn decide(score: &MatchScore, t: &Thresholds) -> Result<MatchDecision, MatchError> {
    t.validate()?;
    Ok(MatchDecision { decision: classify(score.total, t), score: score.clone() })
}

/// Bucket key → member record indices (ascending).
pub fn bucket(records: &[StandardizedRecord], recipes: &[BucketRecipe]) -> BTreeMap<String, Vec<usize>> {
    let mut out: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        for recipe in recipes {
            if let Some(k) = recipe.key(r) {
                out.entry(k).or_default().push(i);
            }
        }
    }
    out
}

/// Index pairs `(i, j)`, `i < j`, that share at least one bucket.
pub fn candidate_pairs(buckets: &BTreeMap<String, Vec<usize>>, max_bucket_size: usize) -> Vec<(usize, usize)> {
    let mut pairs = BTreeSet::new();
    for members in buckets.values() {
        if members.len() > max_bucket_size {
            continue;
        }
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                pairs.insert((i.min(j), i.max(j)));
            }
        }
    }
    pairs.into_iter().collect()
}

/// Outcome of entity resolution.
#[derive(Debug, Clone)]
pub struct Resolution {
    /// Record indices per resolved entity, ordered by smallest index.
    pub clusters: Vec<Vec<usize>>,
    /// Cluster index per record.
    pub record_cluster: Vec<usize>,
    /// Every scored candidate pair with its decision under the thresholds used.
    pub decisions: Vec<MatchDecision>,
}

impl Resolution {
    pub fn review_queue(&self) -> Vec<&MatchScore> {
        self.decisions.iter().filter(|d| d.decision == Decision::ClericalReview).map(|d| &d.score).collect()
    }

    pub fn link_count(&self) -> usize {
        self.decisions.iter().filter(|d| d.decision == Decision::Link).count()
    }

    /// Clusters as sets of record ids.
    pub fn clusters_by_id(&self, records: &[SourceRecord]) -> Vec<BTreeSet<String>> {
        self.clusters
            .iter()
            .map(|c| c.iter().map(|&i| records[i].record_id.clone()).collect())
            .collect()
    }
}

/// Standardized records, the weight table and the config used to score them.
#[derive(Debug, Clone)]
pub struct MatchEngine {
    pub config: MatchConfig,
    pub weights: WeightTable,
    pub standardized: Vec<StandardizedRecord>,
}

impl MatchEngine {
    /// Standardizes the corpus and derives weights from it.
    pub fn fit(records: &[SourceRecord], config: MatchConfig) -> Self {
        let standardized: Vec<_> = records.iter().map(standardize).collect();
        let weights = compute_weights(&standardized, &config);
        MatchEngine { config, weights, standardized }
    }

    pub fn with_weights(records: &[SourceRecord], config: MatchConfig, weights: WeightTable) -> Self {
        let standardized = records.iter().map(standardize).collect();
        MatchEngine { config, weights, standardized }
    }

    pub fn candidates(&self) -> Vec<(usize, usize)> {
        candidate_pairs(&bucket(&self.standardized, &self.config.buckets), self.config.max_bucket_size)
    }

    /// Scores pairs on worker threads; output order follows `pairs`.
    pub fn score_pairs(&self, pairs: &[(usize, usize)]) -> Vec<MatchScore> {
        let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(8);
        let chunk = pairs.len().div_ceil(workers).max(1);
        std::thread::scope(|scope| {
            let handles: Vec<_> = pairs
                .chunks(chunk)
                .map(|part| {
                    scope.spawn(move || {
                        part.iter()
                            .map(|&(i, j)| {
                                compare(&self.standardized[i], &self.standardized[j], &self.weights, &self.config)
                            })
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
            handles.into_iter().flat_map(|h| h.join().expect("scoring worker panicked")).collect()
        })
    }

    /// Buckets, scores and decides all candidate pairs, then merges links by
    /// transitive closure.
    pub fn resolve(&self, thresholds: &Thresholds) -> Result<Resolution, MatchError> {
        thresholds.validate()?;
        let pairs = self.candidates();
        let scores = self.score_pairs(&pairs);
        let mut uf = UnionFind::new(self.standardized.len());
        let mut decisions = Vec::with_capacity(scores.len());
        for (&(i, j), score) in pairs.iter().zip(scores) {
            let decision = classify(score.total, thresholds);
            if decision == Decision::Link {
                uf.union(i, j);
            }
            decisions.push(MatchDecision { decision, score });
        }
        let clusters = uf.groups();
        let mut record_cluster = vec![0; self.standardized.len()];
        for (ci, c) in clusters.iter().enumerate() {
            for &r in c {
                record_cluster[r] = ci;
            }
        }
        Ok(Resolution { clusters, record_cluster, decisions })
    }
}

/// One node per resolved entity with merged attributes (Structured over
/// SemiStructured over Unstructured, then lowest record id), and record-level
/// relationships lifted onto entities.
pub fn entity_graph(records: &[SourceRecord], resolution: &Resolution, links: &[RecordLink]) -> PropertyGraph {
    let index: HashMap<&str, usize> = records.iter().enumerate().map(|(i, r)| (r.record_id.as_str(), i)).collect();
    let nodes = resolution
        .clusters
        .iter()
        .enumerate()
        .map(|(ci, members)| {
            let mut ordered: Vec<&SourceRecord> = members.iter().map(|&i| &records[i]).collect();
            ordered.sort_by(|x, y| {
                y.source.precedence().cmp(&x.source.precedence()).then_with(|| x.record_id.cmp(&y.record_id))
            });
            let mut attributes = BTreeMap::new();
            for r in &ordered {
                for (k, v) in &r.attributes {
                    attributes.entry(k.clone()).or_insert_with(|| v.clone());
                }
            }
            let first = members.iter().map(|&i| records[i].record_id.as_str()).min().unwrap_or_default();
            attributes.insert("entity_key".into(), first.to_string());
            attributes.insert("record_count".into(), members.len().to_string());
            Node { id: NodeId(ci as u32), kind: NodeKind::Person, attributes }
        })
        .collect();
    let mut seen = BTreeSet::new();
    let mut edges = Vec::new();
    for l in links {
        let (Some(&ia), Some(&ib)) = (index.get(l.a.as_str()), index.get(l.b.as_str())) else {
            continue;
        };
        let (ca, cb) = (resolution.record_cluster[ia], resolution.record_cluster[ib]);
        if ca == cb {
            continue;
        }
        if seen.insert((ca.min(cb), ca.max(cb), l.relation)) {
            edges.push(Edge::new(ca, cb, l.relation));
        }
    }
    PropertyGraph::build(nodes, edges).expect("lifted edges reference resolved entities")
}

/// Writes `{"a","b","total","contributions"}` lines.
pub fn write_review_queue(path: &Path, scores: &[&MatchScore]) -> io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for s in scores {
        serde_json::to_writer(&mut w, s)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// Reads lines written by [`write_review_queue`]; blank lines are skipped.
pub fn read_match_scores(path: &Path) -> io::Result<Vec<MatchScore>> {
    let reader = io::BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in io::BufRead::lines(reader) {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Pairwise clustering quality against a reference labelling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairwiseEval {
    pub true_positive_pairs: u64,
    pub predicted_pairs: u64,
    pub true_pairs: u64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

fn choose2(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// `predicted[i]` and `truth[i]` are cluster labels of record `i`.
pub fn pairwise_eval<P: Ord + Clone, T: Ord + Clone>(predicted: &[P], truth: &[T]) -> PairwiseEval {
    assert_eq!(predicted.len(), truth.len());
    let mut pred_sizes: BTreeMap<P, u64> = BTreeMap::new();
    let mut true_sizes: BTreeMap<T, u64> = BTreeMap::new();
    let mut joint: BTreeMap<(P, T), u64> = BTreeMap::new();
    for (p, t) in predicted.iter().zip(truth) {
        *pred_sizes.entry(p.clone()).or_default() += 1;
        *true_sizes.entry(t.clone()).or_default() += 1;
        *joint.entry((p.clone(), t.clone())).or_default() += 1;
    }
    let tp: u64 = joint.values().map(|&c| choose2(c)).sum();
    let pp: u64 = pred_sizes.values().map(|&c| choose2(c)).sum();
    let tt: u64 = true_sizes.values().map(|&c| choose2(c)).sum();
    let precision = if pp == 0 { 1.0 } else { tp as f64 / pp as f64 };
    let recall = if tt == 0 { 1.0 } else { tp as f64 / tt as f64 };
    let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    PairwiseEval { true_positive_pairs: tp, predicted_pairs: pp, true_pairs: tt, precision, recall, f1 }
}

/// Fraction of same-entity record pairs that appear among `candidates`.
pub fn candidate_recall<T: Eq + std::hash::Hash>(candidates: &[(usize, usize)], truth: &[T]) -> f64 {
    let mut groups: HashMap<&T, Vec<usize>> = HashMap::new();
    for (i, t) in truth.iter().enumerate() {
        groups.entry(t).or_default().push(i);
    }
    let cand: std::collections::HashSet<(usize, usize)> = candidates.iter().copied().collect();
    let mut total = 0u64;
    let mut hit = 0u64;
    for members in groups.values() {
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                total += 1;
                if cand.contains(&(i.min(j), i.max(j))) {
                    hit += 1;
                }
            }
        }
    }
    if total == 0 {
        1.0
    } else {
        hit as f64 / total as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(id: &str, source: Source, pairs: &[(&str, &str)]) -> SourceRecord {
        SourceRecord {
            record_id: id.into(),
            source,
            attributes: pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }

    #[test]
    fn standardize_examples() {
        let r = standardize(&rec(
            "R1",
            Source::Structured,
            &[("surname", "  o'Brien "), ("phone", "(555) 123-4567"), ("given_name", "Kate"), ("street", "12 Oak Street")],
        ));
        assert_eq!(r.get("surname"), Some("OBRIEN"));
        assert_eq!(r.phonetic["surname"], soundex("OBRIEN"));
        assert_eq!(r.get("phone"), Some("5551234567"));
        assert_eq!(r.canonical_given.as_deref(), Some("CATHERINE"));
        assert_eq!(r.get("street"), Some("12 OAK ST"));
        assert!(r.get("email").is_none());
    }

    fn std_recs(values: &[(&str, &str)], n: usize) -> Vec<StandardizedRecord> {
        (0..n).map(|i| standardize(&rec(&format!("R{i:04}"), Source::Structured, values))).collect()
    }

    #[test]
    fn weights_follow_frequency() {
        let mut recs = std_recs(&[("surname", "SMITH"), ("gender", "F")], 1023);
        recs.push(standardize(&rec("R9999", Source::Structured, &[("surname", "ZYLSTRA"), ("gender", "F")])));
        let w = compute_weights(&recs, &MatchConfig::default());
        assert_eq!(w.agreement("gender", "F"), 0.0);
        assert!((w.agreement("surname", "ZYLSTRA") - 10.0).abs() < 1e-12);
        assert!(w.agreement("surname", "ZYLSTRA") >= w.agreement("surname", "SMITH"));
    }

    #[test]
    fn near_match_credit() {
        let cfg = MatchConfig::default();
        let recs = vec![
            standardize(&rec("A", Source::Structured, &[("surname", "SMITH")])),
            standardize(&rec("B", Source::Structured, &[("surname", "SMYTH")])),
            standardize(&rec("C", Source::Structured, &[("surname", "SMITH")])),
            standardize(&rec("D", Source::Structured, &[("surname", "JONES")])),
        ];
        let w = compute_weights(&recs, &cfg);
        let s = compare(&recs[0], &recs[1], &w, &cfg);
        assert!((s.total - 0.7 * w.agreement("surname", "SMITH")).abs() < 1e-12);
        assert_eq!(compare(&recs[1], &recs[0], &w, &cfg), s);
        let s = compare(&recs[0], &recs[3], &w, &cfg);
        assert_eq!(s.total, -4.0);
    }

    #[test]
    fn identical_records_sum_agreements() {
        let cfg = MatchConfig::default();
        let vals = [("given_name", "ANNA"), ("surname", "LEE"), ("dob", "1980-01-02"), ("phone", "555-000-1111")];
        let mut recs = std_recs(&vals, 2);
        recs.push(standardize(&rec("X", Source::Structured, &[("given_name", "BOB"), ("surname", "KIM")])));
        let w = compute_weights(&recs, &cfg);
        let s = compare(&recs[0], &recs[1], &w, &cfg);
        let expect: f64 = vals.iter().map(|(a, _)| w.agreement(a, recs[0].get(a).unwrap())).sum();
        assert!((s.total - expect).abs() < 1e-12);
        assert_eq!(s.total, s.contributions.values().sum::<f64>());
    }

    #[test]
    fn decide_boundaries() {
        let t = Thresholds::new(20.0, 11.0).unwrap();
        let mk = |total| MatchScore { a: "A".into(), b: "B".into(), contributions: BTreeMap::new(), total };
        assert_eq!(decide(&mk(20.0), &t).unwrap().decision, Decision::Link);
        assert_eq!(decide(&mk(11.0), &t).unwrap().decision, Decision::ClericalReview);
        assert_eq!(decide(&mk(10.999), &t).unwrap().decision, Decision::NoLink);
        let bad = Thresholds { autolink: 5.0, review: 6.0 };
        assert!(matches!(decide(&mk(1.0), &bad), Err(MatchError::InvalidThresholds { .. })));
        assert_eq!("20:11".parse::<Thresholds>().unwrap(), t);
        assert!("5:6".parse::<Thresholds>().is_err());
    }

    #[test]
    fn bucketing_shares_keys() {
        let base = [("surname", "LEE"), ("dob", "1980-01-02"), ("phone", "555-000-1111"), ("given_name", "ANNA")];
        let a = standardize(&rec("A", Source::Structured, &base));
        let b = standardize(&rec("B", Source::Structured, &base));
        let mut other = base;
        other[2] = ("phone", "555-999-0000");
        let c = standardize(&rec("C", Source::Structured, &other));
        let recipes = MatchConfig::default().buckets;
        let keys = |r: &StandardizedRecord| recipes.iter().filter_map(|x| x.key(r)).collect::<Vec<_>>();
        assert_eq!(keys(&a), keys(&b));
        let pairs = candidate_pairs(&bucket(&[a, b, c], &recipes), 100);
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2)]);
    }

    #[test]
    fn no_links_means_singletons() {
        let records = vec![
            rec("A", Source::Structured, &[("surname", "LEE")]),
            rec("B", Source::Structured, &[("surname", "LEE")]),
        ];
        let engine = MatchEngine::fit(&records, MatchConfig::default());
        let res = engine.resolve(&Thresholds::new(1000.0, 500.0).unwrap()).unwrap();
        assert_eq!(res.clusters.len(), 2);
        assert_eq!(res.link_count(), 0);
    }

    #[test]
    fn pairwise_eval_counts() {
        let e = pairwise_eval(&[0, 0, 1, 1], &["a", "a", "a", "b"]);
        assert_eq!((e.true_positive_pairs, e.predicted_pairs, e.true_pairs), (1, 2, 3));
        let perfect = pairwise_eval(&[3, 3, 7], &[1, 1, 2]);
        assert_eq!(perfect.f1, 1.0);
    }
}
