//! Seeded synthetic master data: canonical people, Zipf-sized duplicate
//! groups with typos, stated relationships wired as a rewired ring lattice,
//! and the ground truth needed to score everything downstream.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{Edge, Node, NodeId, NodeKind, PropertyGraph, Relation};
use crate::rng::{self, CountTable, Rng};
use crate::sources::{self, RecordLink, Source, SourceRecord};
use crate::tables;

#[derive(Debug, Error)]
pub enum DatagenError {
    #[error("invalid generator config: {0}")]
    Config(String),
    #[error("edge ratio {ratio} is infeasible for {n} entities (max {max})")]
    InfeasibleRatio { ratio: f64, n: usize, max: f64 },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub const DEFAULT_SCHEMA: &[&str] = &[
    "given_name", "surname", "gender", "ethnicity", "dob", "street", "city", "state", "zip", "phone", "email", "ssn",
    "employer",
];

/// Optional lineage columns. Emitted when listed in the schema, ignored by matching.
pub const LINEAGE_ATTRIBUTES: &[&str] = &["ingested_at", "source_system"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeneratorConfig {
    pub seed: u64,
    pub n_entities: usize,
    pub zipf_exponent: f64,
    pub max_records_per_entity: usize,
    pub typo_rate: f64,
    pub edge_to_node_ratio: f64,
    pub relation_type_weights: BTreeMap<Relation, f64>,
    pub attribute_schema: Vec<String>,
    /// attribute → category → target proportion
    pub protected_attributes: BTreeMap<String, BTreeMap<String, f64>>,
    pub target_avg_path_length: f64,
    /// Fixed ring rewiring probability; tuned toward the target path length when absent.
    pub rewire_probability: Option<f64>,
    /// Entity pairs sampled for the degree-of-separation table.
    pub separation_samples: usize,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        let relation_type_weights = [
            (Relation::Knows, 0.30),
            (Relation::Colleague, 0.20),
            (Relation::Friend, 0.18),
            (Relation::Neighbor, 0.10),
            (Relation::Household, 0.07),
            (Relation::Classmate, 0.06),
            (Relation::Sibling, 0.04),
            (Relation::Parent, 0.03),
            (Relation::Spouse, 0.02),
        ]
        .into_iter()
        .collect();
        let to_map = |t: &[(&str, f64)]| t.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        GeneratorConfig {
            seed: 42,
            n_entities: 2000,
            zipf_exponent: 2.0,
            max_records_per_entity: 10,
            typo_rate: 0.1,
            edge_to_node_ratio: 5.0,
            relation_type_weights,
            attribute_schema: DEFAULT_SCHEMA.iter().map(|s| s.to_string()).collect(),
            protected_attributes: [("gender".to_string(), to_map(tables::GENDERS)), ("ethnicity".to_string(), to_map(tables::ETHNICITIES))]
                .into_iter()
                .collect(),
            target_avg_path_length: 6.0,
            rewire_probability: None,
            separation_samples: 200,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), DatagenError> {
        let bad = |m: &str| Err(DatagenError::Config(m.to_string()));
        if self.n_entities == 0 {
            return bad("n_entities must be at least 1");
        }
        if self.zipf_exponent.is_nan() || self.zipf_exponent <= 1.0 {
            return bad("zipf_exponent must be > 1");
        }
        if self.max_records_per_entity == 0 {
            return bad("max_records_per_entity must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.typo_rate) {
            return bad("typo_rate must lie in [0, 1]");
        }
        if self.edge_to_node_ratio.is_nan() || self.edge_to_node_ratio <= 0.0 {
            return bad("edge_to_node_ratio must be > 0");
        }
        if self.attribute_schema.is_empty() {
            return bad("attribute_schema must not be empty");
        }
        for a in &self.attribute_schema {
            if !DEFAULT_SCHEMA.contains(&a.as_str()) && !LINEAGE_ATTRIBUTES.contains(&a.as_str()) {
                return Err(DatagenError::Config(format!("unknown schema attribute {a:?}")));
            }
        }
        if self.relation_type_weights.values().any(|w| *w < 0.0) || self.relation_type_weights.values().sum::<f64>() <= 0.0 {
            return bad("relation_type_weights must be non-negative with a positive sum");
        }
        for (attr, cats) in &self.protected_attributes {
            if cats.is_empty() || cats.values().any(|p| *p < 0.0) || cats.values().sum::<f64>() <= 0.0 {
                return Err(DatagenError::Config(format!("protected attribute {attr:?} needs positive proportions")));
            }
        }
        if let Some(p) = self.rewire_probability {
            if !(0.0..=1.0).contains(&p) {
                return bad("rewire_probability must lie in [0, 1]");
            }
        }
        Ok(())
    }

    /// Reads TOML, or JSON when the extension is `.json`.
    pub fn from_file(path: &Path) -> Result<Self, DatagenError> {
        let text = std::fs::read_to_string(path)?;
        let cfg: GeneratorConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| DatagenError::Config(e.to_string()))?
        } else {
            toml::from_str(&text).map_err(|e| DatagenError::Config(e.to_string()))?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn has(&self, attr: &str) -> bool {
        self.attribute_schema.iter().any(|a| a == attr)
    }
}

/// Truncated Zipf probabilities `P(k) ∝ k^-s` for `k = 1..=max_k`.
pub fn zipf_pmf(s: f64, max_k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (1..=max_k).map(|k| (k as f64).powf(-s)).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / z).collect()
}

/// Records-per-entity counts drawn from a truncated Zipf law.
pub fn sample_duplicate_counts(n_entities: usize, zipf_exponent: f64, max_k: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng::stream(seed, "duplicate-counts");
    sample_counts_with(&mut rng, n_entities, zipf_exponent, max_k)
}

fn sample_counts_with(rng: &mut Rng, n: usize, s: f64, max_k: usize) -> Vec<usize> {
    let max_k = max_k.max(1);
    let pmf = zipf_pmf(s, max_k);
    let mut cdf = Vec::with_capacity(max_k);
    let mut acc = 0.0;
    for p in &pmf {
        acc += p;
        cdf.push(acc);
    }
    (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            cdf.iter().position(|&c| u < c).unwrap_or(max_k - 1) + 1
        })
        .collect()
}

/// A canonical person before duplication.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub entity_id: String,
    pub attributes: BTreeMap<String, String>,
}

fn categorical(rng: &mut Rng, cats: &BTreeMap<String, f64>) -> String {
    let names: Vec<&String> = cats.keys().collect();
    let weights: Vec<f64> = cats.values().copied().collect();
    names[rng::weighted_index(rng, &weights)].clone()
}

fn days_in_month(year: i32, month: u32) -> u32 {
    match month {
        1 | 3 | 5 | 7 | 8 | 10 | 12 => 31,
        4 | 6 | 9 | 11 => 30,
        _ if (year % 4 == 0 && year % 100 != 0) || year % 400 == 0 => 29,
        _ => 28,
    }
}

pub(crate) fn is_valid_date(s: &str) -> bool {
    let parts: Vec<&str> = s.split('-').collect();
    if parts.len() != 3 || parts[0].len() != 4 || parts[1].len() != 2 || parts[2].len() != 2 {
        return false;
    }
    let (Ok(y), Ok(m), Ok(d)) = (parts[0].parse::<i32>(), parts[1].parse::<u32>(), parts[2].parse::<u32>()) else {
        return false;
    };
    (1800..=2200).contains(&y) && (1..=12).contains(&m) && d >= 1 && d <= days_in_month(y, m)
}

struct Samplers {
    surname: CountTable,
    female: CountTable,
    male: CountTable,
    city: CountTable,
    employer: CountTable,
}

impl Samplers {
    fn new() -> Self {
        Samplers {
            surname: CountTable::new(tables::SURNAMES.iter().map(|x| x.1)),
            female: CountTable::new(tables::GIVEN_FEMALE.iter().map(|x| x.1)),
            male: CountTable::new(tables::GIVEN_MALE.iter().map(|x| x.1)),
            city: CountTable::new(tables::CITIES.iter().map(|x| x.3)),
            employer: CountTable::new(tables::EMPLOYERS.iter().map(|x| x.1)),
        }
    }
}

/// Canonical entities with attribute values drawn from the bundled tables.
pub fn generate_entities(config: &GeneratorConfig) -> Result<Vec<Entity>, DatagenError> {
    config.validate()?;
    let mut rng = rng::stream(config.seed, "entities");
    let samplers = Samplers::new();
    let gender_cats: BTreeMap<String, f64> = config
        .protected_attributes
        .get("gender")
        .cloned()
        .unwrap_or_else(|| tables::GENDERS.iter().map(|(k, v)| (k.to_string(), *v)).collect());
    let ethnicity_cats: BTreeMap<String, f64> = config
        .protected_attributes
        .get("ethnicity")
        .cloned()
        .unwrap_or_else(|| tables::ETHNICITIES.iter().map(|(k, v)| (k.to_string(), *v)).collect());

    let mut used_phones = HashSet::new();
    let mut used_ssn = HashSet::new();
    let mut out = Vec::with_capacity(config.n_entities);
    for idx in 0..config.n_entities {
        // Draw every field so the stream stays aligned regardless of schema.
        let gender = categorical(&mut rng, &gender_cats);
        let ethnicity = categorical(&mut rng, &ethnicity_cats);
        let given = match gender.as_str() {
            "F" => tables::GIVEN_FEMALE[samplers.female.sample(&mut rng)].0,
            "M" => tables::GIVEN_MALE[samplers.male.sample(&mut rng)].0,
            _ if rng.gen_bool(0.5) => tables::GIVEN_FEMALE[samplers.female.sample(&mut rng)].0,
            _ => tables::GIVEN_MALE[samplers.male.sample(&mut rng)].0,
        };
        let surname = tables::SURNAMES[samplers.surname.sample(&mut rng)].0;
        let year = rng.gen_range(1940..=2004);
        let month = rng.gen_range(1..=12);
        let day = rng.gen_range(1..=days_in_month(year, month));
        let dob = format!("{year:04}-{month:02}-{day:02}");
        let street_name = tables::STREET_NAMES[rng.gen_range(0..tables::STREET_NAMES.len())];
        let suffix = tables::STREET_SUFFIXES[rng.gen_range(0..tables::STREET_SUFFIXES.len())].0;
        let street = format!("{} {street_name} {suffix}", rng.gen_range(1..=9999));
        let (city, state, zip_prefix, _) = tables::CITIES[samplers.city.sample(&mut rng)];
        let zip = format!("{zip_prefix}{:02}", rng.gen_range(0..100));
        let phone = loop {
            let p = format!("{}-{}-{:04}", rng.gen_range(201..=989), rng.gen_range(200..=999), rng.gen_range(0..10000));
            if used_phones.insert(p.clone()) {
                break p;
            }
        };
        let ssn = loop {
            let area = loop {
                let a = rng.gen_range(1..=899);
                if a != 666 {
                    break a;
                }
            };
            let s = format!("{area:03}-{:02}-{:04}", rng.gen_range(1..100), rng.gen_range(1..10000));
            if used_ssn.insert(s.clone()) {
                break s;
            }
        };
        let domain = tables::EMAIL_DOMAINS[rng.gen_range(0..tables::EMAIL_DOMAINS.len())];
        let email = format!("{}.{}{}@{}", given, surname, rng.gen_range(1..100), domain).to_lowercase();
        let employer = tables::EMPLOYERS[samplers.employer.sample(&mut rng)].0;

        let all = [
            ("given_name", given.to_string()),
            ("surname", surname.to_string()),
            ("gender", gender),
            ("ethnicity", ethnicity),
            ("dob", dob),
            ("street", street),
            ("city", city.to_string()),
            ("state", state.to_string()),
            ("zip", zip),
            ("phone", phone),
            ("email", email),
            ("ssn", ssn),
            ("employer", employer.to_string()),
        ];
        let attributes = all.into_iter().filter(|(k, _)| config.has(k)).map(|(k, v)| (k.to_string(), v)).collect();
        out.push(Entity { entity_id: format!("E{idx:06}"), attributes });
    }
    Ok(out)
}

/// Kinds of perturbation applied to a duplicate attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    CharEdit,
    Nickname,
    AddressVariant,
    FieldDrop,
}

const PERTURBATIONS: [Perturbation; 4] =
    [Perturbation::CharEdit, Perturbation::Nickname, Perturbation::AddressVariant, Perturbation::FieldDrop];

fn is_categorical(attr: &str) -> bool {
    matches!(attr, "gender" | "ethnicity" | "state" | "source_system" | "ingested_at")
}

fn is_digit_attr(attr: &str) -> bool {
    matches!(attr, "phone" | "ssn" | "zip")
}

/// One-letter substitution, insertion or deletion; the result always differs.
pub(crate) fn letter_edit(rng: &mut Rng, value: &str) -> String {
    let chars: Vec<char> = value.chars().collect();
    let letter_pos: Vec<usize> = chars.iter().enumerate().filter(|(_, c)| c.is_alphabetic()).map(|(i, _)| i).collect();
    let lower = chars.iter().any(|c| c.is_lowercase());
    let pick_letter = |rng: &mut Rng, not: Option<char>| loop {
        let c = (b'A' + rng.gen_range(0..26u8)) as char;
        let c = if lower { c.to_ascii_lowercase() } else { c };
        if Some(c) != not {
            break c;
        }
    };
    if letter_pos.is_empty() {
        let mut out = chars;
        let at = rng.gen_range(0..=out.len());
        out.insert(at, pick_letter(rng, None));
        return out.into_iter().collect();
    }
    let op = if letter_pos.len() > 1 { rng.gen_range(0..3) } else { rng.gen_range(0..2) };
    let pos = letter_pos[rng.gen_range(0..letter_pos.len())];
    let mut out = chars;
    match op {
        0 => {
            let c = pick_letter(rng, Some(out[pos]));
            out[pos] = c;
        }
        1 => {
            let c = pick_letter(rng, None);
            out.insert(pos + rng.gen_range(0..2), c);
        }
        _ => {
            out.remove(pos);
        }
    }
    out.into_iter().collect()
}

fn digit_edit(rng: &mut Rng, value: &str) -> String {
    let mut chars: Vec<char> = value.chars().collect();
    let pos: Vec<usize> = chars.iter().enumerate().filter(|(_, c)| c.is_ascii_digit()).map(|(i, _)| i).collect();
    if pos.is_empty() {
        return letter_edit(rng, value);
    }
    let at = pos[rng.gen_range(0..pos.len())];
    let old = chars[at];
    chars[at] = loop {
        let c = char::from(b'0' + rng.gen_range(0..10u8));
        if c != old {
            break c;
        }
    };
    chars.into_iter().collect()
}

fn date_edit(rng: &mut Rng, value: &str) -> String {
    for _ in 0..32 {
        let cand = digit_edit(rng, value);
        if is_valid_date(&cand) && cand[..4].parse::<i32>().is_ok_and(|y| (1900..=2025).contains(&y)) {
            return cand;
        }
    }
    // Shift the day by one within the month.
    let mut parts: Vec<String> = value.split('-').map(str::to_string).collect();
    if parts.len() == 3 {
        let d: u32 = parts[2].parse().unwrap_or(1);
        parts[2] = format!("{:02}", if d > 1 { d - 1 } else { d + 1 });
        return parts.join("-");
    }
    letter_edit(rng, value)
}

fn char_edit(rng: &mut Rng, attr: &str, value: &str) -> String {
    if attr == "dob" {
        date_edit(rng, value)
    } else if is_digit_attr(attr) {
        digit_edit(rng, value)
    } else {
        letter_edit(rng, value)
    }
}

fn address_variant(rng: &mut Rng, value: &str) -> Option<String> {
    let mut tokens: Vec<&str> = value.split(' ').collect();
    let last = *tokens.last()?;
    let (abbr, long) = tables::STREET_SUFFIXES.iter().find(|(a, l)| *a == last || *l == last)?;
    if abbr == long {
        return None;
    }
    let swapped = if last == *abbr { *long } else { *abbr };
    let n = tokens.len();
    tokens[n - 1] = swapped;
    let _ = rng;
    Some(tokens.join(" "))
}

/// Applies one perturbation to a present attribute. `None` means the field is dropped.
pub fn perturb(rng: &mut Rng, attr: &str, value: &str, kind: Perturbation) -> Option<String> {
    match kind {
        Perturbation::FieldDrop => None,
        _ if is_categorical(attr) => None,
        Perturbation::Nickname if attr == "given_name" => {
            let nicks: Vec<&str> = tables::nicknames_of(value).collect();
            if let Some(n) = nicks.choose(rng) {
                Some(n.to_string())
            } else if let Some(c) = tables::canonical_given(value) {
                Some(c.to_string())
            } else {
                Some(char_edit(rng, attr, value))
            }
        }
        Perturbation::AddressVariant if attr == "street" => {
            Some(address_variant(rng, value).unwrap_or_else(|| char_edit(rng, attr, value)))
        }
        _ => Some(char_edit(rng, attr, value)),
    }
}

/// `k` perturbed copies of an entity's attributes. Each attribute is perturbed
/// independently with probability `typo_rate`; at least one attribute of every
/// copy is kept verbatim.
pub fn derive_duplicates(entity: &Entity, k: usize, typo_rate: f64, rng: &mut Rng) -> Vec<BTreeMap<String, String>> {
    (0..k)
        .map(|_| {
            let mut copy = BTreeMap::new();
            let mut verbatim = 0usize;
            for (attr, value) in &entity.attributes {
                if rng.gen_bool(typo_rate) {
                    let kind = PERTURBATIONS[rng.gen_range(0..PERTURBATIONS.len())];
                    if let Some(v) = perturb(rng, attr, value, kind) {
                        copy.insert(attr.clone(), v);
                    }
                } else {
                    copy.insert(attr.clone(), value.clone());
                    verbatim += 1;
                }
            }
            if verbatim == 0 && !entity.attributes.is_empty() {
                let keys: Vec<&String> = entity.attributes.keys().collect();
                let keep = keys[rng.gen_range(0..keys.len())];
                copy.insert(keep.clone(), entity.attributes[keep].clone());
            }
            copy
        })
        .collect()
}

/// Stated relationship between entities (indices into the entity list).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityLink {
    pub a: usize,
    pub b: usize,
    pub relation: Relation,
}

/// Result of relationship wiring.
#[derive(Debug, Clone)]
pub struct Wiring {
    pub links: Vec<EntityLink>,
    pub rewire_probability: f64,
    pub avg_path_length: f64,
}

fn lattice_and_rewire(n: usize, m: usize, p: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = rng::stream(seed, "wiring");
    let mut present: HashSet<(usize, usize)> = HashSet::with_capacity(m * 2);
    let mut edges = Vec::with_capacity(m);
    let norm = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
    'fill: for offset in 1..n {
        for i in 0..n {
            if edges.len() == m {
                break 'fill;
            }
            let e = norm(i, (i + offset) % n);
            if present.insert(e) {
                edges.push((i, (i + offset) % n));
            }
        }
    }
    if p > 0.0 {
        for slot in edges.iter_mut() {
            if !rng.gen_bool(p) {
                continue;
            }
            let (i, j) = *slot;
            for _ in 0..16 {
                let w = rng.gen_range(0..n);
                if w == i || present.contains(&norm(i, w)) {
                    continue;
                }
                present.remove(&norm(i, j));
                present.insert(norm(i, w));
                *slot = (i, w);
                break;
            }
        }
    }
    edges
}

/// Mean shortest-path length inside the largest component, estimated by BFS
/// from up to `max_sources` evenly spaced members.
pub fn average_path_length(n: usize, edges: &[(usize, usize)], max_sources: usize) -> f64 {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut comp = vec![usize::MAX; n];
    let mut sizes = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let c = sizes.len();
        let mut size = 0;
        let mut q = VecDeque::from([s]);
        comp[s] = c;
        while let Some(u) = q.pop_front() {
            size += 1;
            for &v in &adj[u] {
                if comp[v] == usize::MAX {
                    comp[v] = c;
                    q.push_back(v);
                }
            }
        }
        sizes.push(size);
    }
    let Some((giant, _)) = sizes.iter().enumerate().max_by_key(|(i, s)| (**s, std::cmp::Reverse(*i))) else {
        return 0.0;
    };
    let members: Vec<usize> = (0..n).filter(|&v| comp[v] == giant).collect();
    if members.len() < 2 {
        return 0.0;
    }
    let step = (members.len() / max_sources.max(1)).max(1);
    let mut total = 0u64;
    let mut pairs = 0u64;
    let mut dist = vec![u32::MAX; n];
    for &s in members.iter().step_by(step).take(max_sources) {
        dist.iter_mut().for_each(|d| *d = u32::MAX);
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            for &v in &adj[u] {
                if dist[v] == u32::MAX {
                    dist[v] = dist[u] + 1;
                    total += u64::from(dist[v]);
                    pairs += 1;
                    q.push_back(v);
                }
            }
        }
    }
    total as f64 / pairs.max(1) as f64
}

/// Wires `⌈ratio · n⌉` undirected typed edges over a ring lattice with random
/// rewiring, tuning the rewiring probability toward the target path length.
pub fn generate_relationships(n: usize, config: &GeneratorConfig) -> Result<Wiring, DatagenError> {
    if n < 2 {
        return Err(DatagenError::Config("at least two entities are needed for relationships".into()));
    }
    let max = (n as f64 - 1.0) / 2.0;
    if config.edge_to_node_ratio > max {
        return Err(DatagenError::InfeasibleRatio { ratio: config.edge_to_node_ratio, n, max });
    }
    let m = (config.edge_to_node_ratio * n as f64).ceil() as usize;
    const APL_SOURCES: usize = 48;
    let p = match config.rewire_probability {
        Some(p) => p,
        None => {
            let target = config.target_avg_path_length;
            let apl = |p: f64| average_path_length(n, &lattice_and_rewire(n, m, p, config.seed), APL_SOURCES);
            if apl(0.0) <= target {
                0.0
            } else if apl(1.0) >= target {
                1.0
            } else {
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                // Path length falls as p grows; search on a log scale.
                for _ in 0..20 {
                    let mid = (lo.max(1e-5) * hi).sqrt();
                    if apl(mid) > target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-4 {
                        break;
                    }
                }
                hi
            }
        }
    };
    let pairs = lattice_and_rewire(n, m, p, config.seed);
    let avg_path_length = average_path_length(n, &pairs, APL_SOURCES);
    let rels: Vec<Relation> = config.relation_type_weights.keys().copied().collect();
    let weights: Vec<f64> = config.relation_type_weights.values().copied().collect();
    let mut rng = rng::stream(config.seed, "relation-types");
    let links = pairs
        .into_iter()
        .map(|(a, b)| EntityLink { a, b, relation: rels[rng::weighted_index(&mut rng, &weights)] })
        .collect();
    Ok(Wiring { links, rewire_probability: p, avg_path_length })
}

/// Hop distance between a sampled pair of entities; `None` when disconnected.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparationSample {
    pub a: String,
    pub b: String,
    pub distance: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatedRelationship {
    pub a: String,
    pub b: String,
    pub relation: Relation,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruth {
    pub record_entity: BTreeMap<String, String>,
    pub relationships: Vec<StatedRelationship>,
    pub separation: Vec<SeparationSample>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum TruthLine {
    Record { record_id: String, entity_id: String },
    Relationship(StatedRelationship),
    Separation(SeparationSample),
}

pub const GROUND_TRUTH_FILE: &str = "ground_truth.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

impl GroundTruth {
    pub fn write(&self, path: &Path) -> io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        let mut put = |line: TruthLine| -> io::Result<()> {
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")
        };
        for (r, e) in &self.record_entity {
            put(TruthLine::Record { record_id: r.clone(), entity_id: e.clone() })?;
        }
        for rel in &self.relationships {
            put(TruthLine::Relationship(rel.clone()))?;
        }
        for s in &self.separation {
            put(TruthLine::Separation(s.clone()))?;
        }
        w.flush()
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        let mut gt = GroundTruth::default();
        for line in BufReader::new(File::open(path)?).lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str(&line)? {
                TruthLine::Record { record_id, entity_id } => {
                    gt.record_entity.insert(record_id, entity_id);
                }
                TruthLine::Relationship(r) => gt.relationships.push(r),
                TruthLine::Separation(s) => gt.separation.push(s),
            }
        }
        Ok(gt)
    }
}

/// Counts and hashes written next to the generated files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub n_entities: usize,
    pub n_records: usize,
    pub n_relationships: usize,
    pub rewire_probability: f64,
    pub avg_path_length: f64,
    pub files: BTreeMap<String, String>,
}

/// A complete generated dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub config: GeneratorConfig,
    pub entities: Vec<Entity>,
    pub records: Vec<SourceRecord>,
    pub links: Vec<EntityLink>,
    pub truth: GroundTruth,
    pub rewire_probability: f64,
    pub avg_path_length: f64,
}

/// Runs the whole generator.
pub fn generate(config: &GeneratorConfig) -> Result<Dataset, DatagenError> {
    config.validate()?;
    let entities = generate_entities(config)?;
    let counts = sample_duplicate_counts(config.n_entities, config.zipf_exponent, config.max_records_per_entity, config.seed);
    let mut dup_rng = rng::stream(config.seed, "duplicates");
    let mut records = Vec::new();
    let mut record_entity = BTreeMap::new();
    let mut next_id = 0usize;
    for (ei, (entity, &k)) in entities.iter().zip(&counts).enumerate() {
        for (ci, attrs) in derive_duplicates(entity, k, config.typo_rate, &mut dup_rng).into_iter().enumerate() {
            let source = Source::ALL[(ei + ci) % Source::ALL.len()];
            let allowed = source.attributes();
            let mut attributes: BTreeMap<String, String> =
                attrs.into_iter().filter(|(k, _)| allowed.contains(&k.as_str())).collect();
            if config.has("ingested_at") && allowed.contains(&"ingested_at") {
                let minute = next_id % 1440;
                attributes.insert(
                    "ingested_at".into(),
                    format!("2020-01-{:02}T{:02}:{:02}:00Z", 1 + (next_id / 1440) % 28, minute / 60, minute % 60),
                );
            }
            if config.has("source_system") && allowed.contains(&"source_system") {
                attributes.insert("source_system".into(), source.to_string().to_uppercase());
            }
            let record_id = format!("R{next_id:07}");
            next_id += 1;
            record_entity.insert(record_id.clone(), entity.entity_id.clone());
            records.push(SourceRecord { record_id, source, attributes });
        }
    }

    let (links, rewire_probability, avg_path_length) = if config.n_entities >= 2 {
        let w = generate_relationships(config.n_entities, config)?;
        (w.links, w.rewire_probability, w.avg_path_length)
    } else {
        (Vec::new(), 0.0, 0.0)
    };
    let relationships = links
        .iter()
        .map(|l| StatedRelationship {
            a: entities[l.a].entity_id.clone(),
            b: entities[l.b].entity_id.clone(),
            relation: l.relation,
        })
        .collect();
    let mut ds = Dataset {
        config: config.clone(),
        entities,
        records,
        links,
        truth: GroundTruth { record_entity, relationships, separation: Vec::new() },
        rewire_probability,
        avg_path_length,
    };
    ds.truth.separation = ds.sample_separation();
    Ok(ds)
}

impl Dataset {
    /// Entity-level graph: one node per canonical entity, stated relationships as edges.
    pub fn truth_graph(&self) -> PropertyGraph {
        let nodes = self
            .entities
            .iter()
            .enumerate()
            .map(|(i, e)| {
                let mut attributes = e.attributes.clone();
                attributes.insert("entity_id".into(), e.entity_id.clone());
                Node { id: NodeId(i as u32), kind: NodeKind::Person, attributes }
            })
            .collect();
        let edges = self.links.iter().map(|l| Edge::new(l.a, l.b, l.relation)).collect();
        PropertyGraph::build(nodes, edges).expect("generator emits a valid graph")
    }

    fn sample_separation(&self) -> Vec<SeparationSample> {
        let n = self.entities.len();
        if n < 2 || self.config.separation_samples == 0 {
            return Vec::new();
        }
        let g = self.truth_graph();
        let mut rng = rng::stream(self.config.seed, "separation");
        (0..self.config.separation_samples)
            .map(|_| {
                let a = rng.gen_range(0..n);
                let b = loop {
                    let b = rng.gen_range(0..n);
                    if b != a {
                        break b;
                    }
                };
                let row = g.bfs_distances(NodeId(a as u32), u32::MAX).expect("valid node");
                SeparationSample {
                    a: self.entities[a].entity_id.clone(),
                    b: self.entities[b].entity_id.clone(),
                    distance: row.get(NodeId(b as u32)),
                }
            })
            .collect()
    }

    /// Stated relationships attached to the first record of each entity.
    pub fn record_links(&self) -> Vec<RecordLink> {
        let mut first: BTreeMap<&str, &str> = BTreeMap::new();
        for (r, e) in &self.truth.record_entity {
            first.entry(e.as_str()).or_insert(r.as_str());
        }
        self.truth
            .relationships
            .iter()
            .map(|rel| RecordLink {
                a: first[rel.a.as_str()].to_string(),
                b: first[rel.b.as_str()].to_string(),
                relation: rel.relation,
            })
            .collect()
    }

    /// Writes the three sources, relationships, ground truth and a manifest.
    pub fn write(&self, dir: &Path) -> Result<Manifest, DatagenError> {
        sources::write_sources(dir, &self.records, &self.record_links())?;
        self.truth.write(&dir.join(GROUND_TRUTH_FILE))?;
        let mut files = BTreeMap::new();
        for name in [sources::TEXT_FILE, sources::SEMI_FILE, sources::TAB_FILE, sources::RELATIONSHIPS_FILE, GROUND_TRUTH_FILE] {
            let bytes = std::fs::read(dir.join(name))?;
            files.insert(name.to_string(), format!("{:x}", Sha256::digest(&bytes)));
        }
        let manifest = Manifest {
            seed: self.config.seed,
            n_entities: self.entities.len(),
            n_records: self.records.len(),
            n_relationships: self.links.len(),
            rewire_probability: self.rewire_probability,
            avg_path_length: self.avg_path_length,
            files,
        };
        let text = serde_json::to_string_pretty(&manifest).map_err(io::Error::from)?;
        std::fs::write(dir.join(MANIFEST_FILE), text + "\n")?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::levenshtein;

    fn small(n: usize) -> GeneratorConfig {
        GeneratorConfig { n_entities: n, ..GeneratorConfig::default() }
    }

    #[test]
    fn degenerate_zipf_support() {
        assert!(sample_duplicate_counts(500, 2.0, 1, 7).iter().all(|&k| k == 1));
        assert_eq!(sample_duplicate_counts(300, 2.0, 10, 7), sample_duplicate_counts(300, 2.0, 10, 7));
    }

    #[test]
    fn single_entity_fully_populated() {
        let e = generate_entities(&small(1)).unwrap();
        assert_eq!(e.len(), 1);
        for attr in DEFAULT_SCHEMA {
            assert!(e[0].attributes.contains_key(*attr), "{attr} missing");
        }
        assert!(is_valid_date(&e[0].attributes["dob"]));
    }

    #[test]
    fn config_errors() {
        let mut c = small(10);
        c.typo_rate = 1.5;
        assert!(matches!(generate_entities(&c), Err(DatagenError::Config(_))));
        let mut c = small(10);
        c.attribute_schema = vec!["shoe_size".into()];
        assert!(matches!(c.validate(), Err(DatagenError::Config(_))));
        let c = GeneratorConfig { edge_to_node_ratio: 3.0, ..small(5) };
        assert!(matches!(generate_relationships(5, &c), Err(DatagenError::InfeasibleRatio { .. })));
    }

    #[test]
    fn zero_typo_copies_identical() {
        let e = &generate_entities(&small(3)).unwrap()[0];
        let mut rng = rng::seeded(1);
        for copy in derive_duplicates(e, 5, 0.0, &mut rng) {
            assert_eq!(copy, e.attributes);
        }
    }

    #[test]
    fn full_typo_perturbs_given_name() {
        let e = Entity {
            entity_id: "E0".into(),
            attributes: [("given_name", "CATHERINE"), ("surname", "SMITH"), ("city", "SALEM")]
                .iter()
                .map(|(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        };
        let mut rng = rng::seeded(3);
        let nick: Vec<&str> = tables::nicknames_of("CATHERINE").collect();
        let mut seen_perturbed = 0;
        for copy in derive_duplicates(&e, 400, 1.0, &mut rng) {
            let verbatim = copy.iter().filter(|(k, v)| e.attributes.get(*k) == Some(v)).count();
            assert!(verbatim >= 1);
            if let Some(g) = copy.get("given_name") {
                if g != "CATHERINE" {
                    seen_perturbed += 1;
                    assert!(nick.contains(&g.as_str()) || levenshtein(g, "CATHERINE") == 1, "{g}");
                }
            }
            // dropped fields are absent, never empty
            assert!(copy.values().all(|v| !v.is_empty()));
        }
        assert!(seen_perturbed > 100);
    }

    #[test]
    fn date_edits_stay_valid() {
        let mut rng = rng::seeded(9);
        for _ in 0..500 {
            let d = date_edit(&mut rng, "1980-02-28");
            assert!(is_valid_date(&d), "{d}");
            assert_eq!(levenshtein(&d, "1980-02-28"), 1);
        }
    }

    #[test]
    fn relationship_counts() {
        let c = GeneratorConfig { edge_to_node_ratio: 0.5, ..small(2) };
        assert_eq!(generate_relationships(2, &c).unwrap().links.len(), 1);
        let c = small(1000);
        let w = generate_relationships(1000, &c).unwrap();
        assert_eq!(w.links.len(), 5000);
        let mut seen = HashSet::new();
        for l in &w.links {
            assert_ne!(l.a, l.b);
            assert!(seen.insert((l.a.min(l.b), l.a.max(l.b))));
        }
    }

    #[test]
    fn round_robin_routing() {
        let mut c = small(40);
        c.typo_rate = 0.0;
        let ds = generate(&c).unwrap();
        let mut by_entity: BTreeMap<&str, Vec<Source>> = BTreeMap::new();
        for r in &ds.records {
            by_entity.entry(&ds.truth.record_entity[&r.record_id]).or_default().push(r.source);
        }
        for sources in by_entity.values().filter(|s| s.len() == 3) {
            let mut s = sources.clone();
            s.sort();
            assert_eq!(s, Source::ALL.to_vec());
        }
        assert_eq!(ds.truth.record_entity.len(), ds.records.len());
    }
}
