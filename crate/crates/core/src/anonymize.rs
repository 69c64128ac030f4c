//! Pseudonymization of identifying attributes.
//!
//! Each attribute class gets an injective value map. Values are processed in
//! order of decreasing frequency: a value that is not within one edit of an
//! already mapped value gets a fresh pseudonym, and a value that is gets its
//! parent's pseudonym with the same kind of edit replayed on it. Equality,
//! one-edit nearness, phonetic codes and nickname canonicalization therefore
//! carry over, and record matching on the output behaves like matching on
//! the input. Dates move by a constant offset per entity.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{GraphError, Node, PropertyGraph};
use crate::matching::standardize_value;
use crate::rng::{self, Rng};
use crate::sources::{SourceBundle, SourceRecord};
use crate::tables;
use crate::text::{digits_only, soundex, within_one_edit};

#[derive(Debug, Error)]
pub enum AnonymizeError {
    #[error("attribute {0:?} is declared sensitive but has no attribute class")]
    UnclassedSensitiveAttribute(String),
    #[error("could not find a free pseudonym for a {0:?} value")]
    Exhausted(AttributeClass),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeClass {
    Name,
    Address,
    Phone,
    Id,
    Email,
    Date,
}

/// Which attributes are sensitive and how each one is pseudonymized.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnonymizerSchema {
    pub classes: BTreeMap<String, AttributeClass>,
    pub sensitive: BTreeSet<String>,
}

impl Default for AnonymizerSchema {
    fn default() -> Self {
        let classes: BTreeMap<String, AttributeClass> = [
            ("given_name", AttributeClass::Name),
            ("surname", AttributeClass::Name),
            ("street", AttributeClass::Address),
            ("city", AttributeClass::Address),
            ("zip", AttributeClass::Address),
            ("phone", AttributeClass::Phone),
            ("ssn", AttributeClass::Id),
            ("email", AttributeClass::Email),
            ("dob", AttributeClass::Date),
        ]
        .into_iter()
        .map(|(a, c)| (a.to_string(), c))
        .collect();
        let sensitive = classes.keys().cloned().collect();
        AnonymizerSchema { classes, sensitive }
    }
}

impl AnonymizerSchema {
    pub fn validate(&self) -> Result<(), AnonymizeError> {
        match self.sensitive.iter().find(|a| !self.classes.contains_key(*a)) {
            Some(a) => Err(AnonymizeError::UnclassedSensitiveAttribute(a.clone())),
            None => Ok(()),
        }
    }
}

/// The secret part of an anonymization run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftMap {
    /// Per class: original value to pseudonym. Injective within a class.
    pub values: BTreeMap<AttributeClass, BTreeMap<String, String>>,
    /// Per entity (node id, or the supplied date group): offset in days.
    pub date_offsets: BTreeMap<String, i64>,
}

impl ShiftMap {
    /// Writes the map as JSON readable only by its owner. Encryption at rest
    /// is left to the storage layer.
    pub fn save(&self, path: &Path) -> io::Result<()> {
        let json = serde_json::to_vec_pretty(self)?;
        let mut opts = fs::OpenOptions::new();
        opts.write(true).create(true).truncate(true);
        #[cfg(unix)]
        {
            use std::os::unix::fs::OpenOptionsExt;
            opts.mode(0o600);
        }
        opts.open(path)?.write_all(&json)
    }

    pub fn load(path: &Path) -> io::Result<Self> {
        Ok(serde_json::from_slice(&fs::read(path)?)?)
    }

    pub fn pseudonym(&self, class: AttributeClass, original: &str) -> Option<&str> {
        self.values.get(&class)?.get(original).map(String::as_str)
    }
}

#[derive(Debug, Clone, Default)]
pub struct AnonymizeOptions {
    pub seed: u64,
    pub keep_map: bool,
    pub schema: AnonymizerSchema,
    /// Entity key per item for date offsets; defaults to one entity per item.
    pub date_groups: Option<Vec<String>>,
}

/// Pseudonymizes every classed attribute of `g`; structure and unclassed
/// attributes are untouched.
pub fn anonymize_graph(
    g: &PropertyGraph,
    seed: u64,
    keep_map: bool,
) -> Result<(PropertyGraph, Option<ShiftMap>), AnonymizeError> {
    anonymize_graph_with(g, &AnonymizeOptions { seed, keep_map, ..AnonymizeOptions::default() })
}

pub fn anonymize_graph_with(
    g: &PropertyGraph,
    opts: &AnonymizeOptions,
) -> Result<(PropertyGraph, Option<ShiftMap>), AnonymizeError> {
    let items: Vec<BTreeMap<String, String>> = g.nodes().iter().map(|n| n.attributes.clone()).collect();
    let groups = opts.date_groups.clone().unwrap_or_else(|| g.nodes().iter().map(|n| n.id.to_string()).collect());
    let (out, map) = anonymize_items(&items, &groups, opts)?;
    let nodes: Vec<Node> = g
        .nodes()
        .iter()
        .zip(out)
        .map(|(n, attributes)| Node { id: n.id, kind: n.kind, attributes })
        .collect();
    Ok((g.with_nodes(nodes)?, opts.keep_map.then_some(map)))
}

/// Pseudonymizes source records. `date_groups[i]` names the entity of record
/// `i`, normally its resolved cluster, so one person's dates shift together.
pub fn anonymize_sources(
    bundle: &SourceBundle,
    opts: &AnonymizeOptions,
) -> Result<(SourceBundle, Option<ShiftMap>), AnonymizeError> {
    let items: Vec<BTreeMap<String, String>> = bundle.records.iter().map(|r| r.attributes.clone()).collect();
    let groups = opts.date_groups.clone().unwrap_or_else(|| bundle.records.iter().map(|r| r.record_id.clone()).collect());
    let (out, map) = anonymize_items(&items, &groups, opts)?;
    let records = bundle
        .records
        .iter()
        .zip(out)
        .map(|(r, attributes)| SourceRecord { record_id: r.record_id.clone(), source: r.source, attributes })
        .collect();
    Ok((SourceBundle { records, links: bundle.links.clone() }, opts.keep_map.then_some(map)))
}

/// Classed original values of an item that reappear, as substrings, in any
/// classed attribute of the same anonymized item. Unclassed attributes pass
/// through unchanged and are not scanned. Comparison ignores case.
pub fn leaked_values(
    original: &[BTreeMap<String, String>],
    anonymized: &[BTreeMap<String, String>],
    schema: &AnonymizerSchema,
) -> Vec<(usize, String, String)> {
    let mut out = Vec::new();
    for (i, (orig, anon)) in original.iter().zip(anonymized).enumerate() {
        let outputs: Vec<String> =
            anon.iter().filter(|(a, _)| schema.classes.contains_key(*a)).map(|(_, v)| v.to_uppercase()).collect();
        for (attr, value) in orig {
            if !schema.classes.contains_key(attr) || value.trim().is_empty() {
                continue;
            }
            let needle = value.to_uppercase();
            if outputs.iter().any(|o| o.contains(&needle)) {
                out.push((i, attr.clone(), value.clone()));
            }
        }
    }
    out
}

/// Value families that share a key space and a pseudonym generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Family {
    Name,
    Street,
    City,
    Zip,
    Phone,
    Id,
    Email,
}

impl Family {
    fn of(attr: &str, class: AttributeClass) -> Option<Family> {
        Some(match (class, attr) {
            (AttributeClass::Name, _) => Family::Name,
            (AttributeClass::Address, "street") => Family::Street,
            (AttributeClass::Address, "zip") => Family::Zip,
            (AttributeClass::Address, _) => Family::City,
            (AttributeClass::Phone, _) => Family::Phone,
            (AttributeClass::Id, _) => Family::Id,
            (AttributeClass::Email, _) => Family::Email,
            (AttributeClass::Date, _) => return None,
        })
    }

    fn key(self, attr: &str, raw: &str) -> String {
        match self {
            Family::Email => raw.to_string(),
            Family::Zip | Family::Phone | Family::Id => digits_only(raw),
            _ => standardize_value(attr, raw),
        }
    }
}

fn render(family: Family, raw: &str, pseudo: &str) -> String {
    match family {
        Family::Zip | Family::Phone | Family::Id => {
            let mut digits = pseudo.chars();
            let out: String = raw.chars().map(|c| if c.is_ascii_digit() { digits.next().unwrap_or(c) } else { c }).collect();
            if digits.next().is_some() || digits_only(&out) != pseudo {
                pseudo.to_string()
            } else {
                out
            }
        }
        Family::Street => {
            let last_raw = raw.rsplit(' ').next().unwrap_or("").to_uppercase();
            let long_form = tables::STREET_SUFFIXES.iter().any(|(a, l)| *l == last_raw && a != l);
            let mut tokens: Vec<&str> = pseudo.split(' ').collect();
            if long_form {
                if let Some(last) = tokens.last_mut() {
                    if let Some((_, l)) = tables::STREET_SUFFIXES.iter().find(|(a, _)| a == last) {
                        *last = l;
                    }
                }
            }
            match_case(raw, &tokens.join(" "))
        }
        Family::Email => pseudo.to_string(),
        _ => match_case(raw, pseudo),
    }
}

fn match_case(raw: &str, pseudo: &str) -> String {
    if raw.chars().any(|c| c.is_lowercase()) && !raw.chars().any(|c| c.is_uppercase()) {
        pseudo.to_lowercase()
    } else {
        pseudo.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Edit {
    Sub(usize, char),
    Ins(usize, char),
    Del(usize),
}

/// The single edit turning `from` into `to`, if they are one edit apart.
fn edit_between(from: &[char], to: &[char]) -> Option<Edit> {
    let i = from.iter().zip(to).take_while(|(a, b)| a == b).count();
    match to.len() as isize - from.len() as isize {
        0 if i < from.len() && from[i + 1..] == to[i + 1..] => Some(Edit::Sub(i, to[i])),
        1 if from[i..] == to[i + 1..] => Some(Edit::Ins(i, to[i])),
        -1 if from[i + 1..] == to[i..] => Some(Edit::Del(i)),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CharKind {
    Upper,
    Lower,
    Digit,
    Other(char),
}

fn kind_of(c: char) -> CharKind {
    if c.is_ascii_digit() {
        CharKind::Digit
    } else if c.is_ascii_uppercase() {
        CharKind::Upper
    } else if c.is_ascii_lowercase() {
        CharKind::Lower
    } else {
        CharKind::Other(c)
    }
}

fn alphabet(kind: CharKind) -> Vec<char> {
    match kind {
        CharKind::Upper => ('A'..='Z').collect(),
        CharKind::Lower => ('a'..='z').collect(),
        CharKind::Digit => ('0'..='9').collect(),
        CharKind::Other(c) => vec![c],
    }
}

/// Candidate positions ordered by distance from `i`.
fn positions_near(i: usize, len: usize) -> Vec<usize> {
    let mut pos: Vec<usize> = (0..len).collect();
    pos.sort_by_key(|&p| (p as isize - i as isize).unsigned_abs());
    pos
}

struct FamilyState<'a> {
    family: Family,
    used: &'a mut HashSet<String>,
    rng: Rng,
    pools: HashMap<&'static str, Vec<(&'static str, u64)>>,
}

impl FamilyState<'_> {
    fn allowed(&self, candidate: &str, forbidden: &BTreeSet<String>) -> bool {
        if candidate.is_empty() || self.used.contains(candidate) {
            return false;
        }
        let upper = candidate.to_uppercase();
        !forbidden.iter().any(|f| upper.contains(f.as_str()))
    }

    /// Weighted draw without replacement from a table pool.
    fn draw(&mut self, pool: &'static str) -> Option<&'static str> {
        let list = self.pools.get_mut(pool)?;
        if list.is_empty() {
            return None;
        }
        let weights: Vec<f64> = list.iter().map(|x| x.1 as f64).collect();
        let i = rng::weighted_index(&mut self.rng, &weights);
        Some(list.swap_remove(i).0)
    }

    fn synth_name(&mut self) -> String {
        let a = tables::SURNAMES[self.rng.gen_range(0..tables::SURNAMES.len())].0;
        let b = tables::SURNAMES[self.rng.gen_range(0..tables::SURNAMES.len())].0;
        let head: String = a.chars().take(a.len().div_ceil(2)).collect();
        let tail: String = b.chars().skip(b.len() / 2).collect();
        head + &tail
    }

    fn fresh(&mut self, key: &str, pool: &'static str, forbidden: &BTreeSet<String>) -> Result<String, AnonymizeError> {
        for _ in 0..10_000 {
            let cand = match self.family {
                Family::Name | Family::City => match self.draw(pool) {
                    Some(v) => v.to_string(),
                    None if self.family == Family::City => {
                        let stem = tables::STREET_NAMES[self.rng.gen_range(0..tables::STREET_NAMES.len())];
                        let end = ["VILLE", "TON", "FIELD", "BURG", "PORT", " SPRINGS", " FALLS"][self.rng.gen_range(0..7)];
                        format!("{stem}{end}")
                    }
                    None => self.synth_name(),
                },
                Family::Street => {
                    let name = tables::STREET_NAMES[self.rng.gen_range(0..tables::STREET_NAMES.len())];
                    let suffix = tables::STREET_SUFFIXES[self.rng.gen_range(0..tables::STREET_SUFFIXES.len())].0;
                    format!("{} {name} {suffix}", self.rng.gen_range(1..=9999))
                }
                Family::Email => {
                    let g = tables::GIVEN_FEMALE
                        .iter()
                        .chain(tables::GIVEN_MALE)
                        .nth(self.rng.gen_range(0..tables::GIVEN_FEMALE.len() + tables::GIVEN_MALE.len()))
                        .map(|x| x.0)
                        .unwrap_or("ALEX");
                    let s = tables::SURNAMES[self.rng.gen_range(0..tables::SURNAMES.len())].0;
                    let d = tables::EMAIL_DOMAINS[self.rng.gen_range(0..tables::EMAIL_DOMAINS.len())];
                    format!("{g}.{s}{}@{d}", self.rng.gen_range(1..100)).to_lowercase()
                }
                Family::Zip | Family::Phone | Family::Id => {
                    let len = key.len().max(1);
                    let mut s: String = (0..len).map(|_| char::from(b'0' + self.rng.gen_range(0..10u8))).collect();
                    if len > 1 && s.starts_with('0') && !key.starts_with('0') {
                        s.replace_range(0..1, "1");
                    }
                    s
                }
            };
            let cand = match self.family {
                Family::Name => standardize_value("surname", &cand),
                Family::City => standardize_value("city", &cand),
                Family::Street => standardize_value("street", &cand),
                _ => cand,
            };
            if self.allowed(&cand, forbidden) {
                self.used.insert(cand.clone());
                return Ok(cand);
            }
        }
        Err(AnonymizeError::Exhausted(match self.family {
            Family::Name => AttributeClass::Name,
            Family::Phone => AttributeClass::Phone,
            Family::Id => AttributeClass::Id,
            Family::Email => AttributeClass::Email,
            _ => AttributeClass::Address,
        }))
    }

    /// Applies the edit `parent → key` to `parent_pseudo`, choosing the
    /// position and character so the result is unused and, for names, so that
    /// the phonetic code agrees with the parent's exactly when it did originally.
    fn replay(&mut self, parent: &str, key: &str, parent_pseudo: &str, forbidden: &BTreeSet<String>) -> Option<String> {
        let from: Vec<char> = parent.chars().collect();
        let to: Vec<char> = key.chars().collect();
        let edit = edit_between(&from, &to)?;
        let base: Vec<char> = parent_pseudo.chars().collect();
        let same_sound = soundex(parent) == soundex(key);
        let check_sound = self.family == Family::Name;
        let attempt = |cand: Vec<char>, st: &mut Self| -> Option<String> {
            let s: String = cand.into_iter().collect();
            let sound_ok = !check_sound || (soundex(&s) == soundex(parent_pseudo)) == same_sound;
            (sound_ok && s != parent_pseudo && st.allowed(&s, forbidden)).then_some(s)
        };
        let result = match edit {
            Edit::Sub(i, c) => {
                let old_kind = kind_of(from[i]);
                let mut found = None;
                'outer: for j in positions_near(i, base.len()) {
                    if kind_of(base[j]) != old_kind {
                        continue;
                    }
                    let mut chars = alphabet(kind_of(c));
                    chars.shuffle(&mut self.rng);
                    for ch in chars {
                        if ch == base[j] {
                            continue;
                        }
                        let mut cand = base.clone();
                        cand[j] = ch;
                        if let Some(s) = attempt(cand, self) {
                            found = Some(s);
                            break 'outer;
                        }
                    }
                }
                found
            }
            Edit::Ins(i, c) => {
                let mut found = None;
                'outer: for j in positions_near(i, base.len() + 1) {
                    let mut chars = alphabet(kind_of(c));
                    chars.shuffle(&mut self.rng);
                    for ch in chars {
                        let mut cand = base.clone();
                        cand.insert(j, ch);
                        if let Some(s) = attempt(cand, self) {
                            found = Some(s);
                            break 'outer;
                        }
                    }
                }
                found
            }
            Edit::Del(i) => {
                let old_kind = kind_of(from[i]);
                let mut found = None;
                for j in positions_near(i, base.len()) {
                    if kind_of(base[j]) != old_kind {
                        continue;
                    }
                    let mut cand = base.clone();
                    cand.remove(j);
                    if let Some(s) = attempt(cand, self) {
                        found = Some(s);
                        break;
                    }
                }
                found
            }
        };
        if let Some(s) = &result {
            self.used.insert(s.clone());
        }
        result
    }
}

struct KeyInfo {
    count: usize,
    /// Attribute the key occurs under most often; picks the pseudonym pool.
    attr: String,
    forbidden: BTreeSet<String>,
}

fn name_pools() -> HashMap<&'static str, Vec<(&'static str, u64)>> {
    let in_nick_table = |n: &str| tables::NICKNAMES.iter().any(|(a, b)| *a == n || *b == n);
    let given: Vec<(&str, u64)> =
        tables::GIVEN_FEMALE.iter().chain(tables::GIVEN_MALE).copied().filter(|(n, _)| !in_nick_table(n)).collect();
    let surname: Vec<(&str, u64)> = tables::SURNAMES.iter().copied().filter(|(n, _)| !in_nick_table(n)).collect();
    let mut canon: Vec<&str> = tables::NICKNAMES.iter().map(|x| x.1).collect();
    canon.sort();
    canon.dedup();
    let nick_canon = canon.into_iter().map(|c| (c, 1)).collect();
    HashMap::from([("given_name", given), ("surname", surname), ("nick_canon", nick_canon)])
}

fn nickname_group(key: &str) -> Option<&'static str> {
    if let Some(c) = tables::canonical_given(key) {
        return Some(c);
    }
    tables::NICKNAMES.iter().find(|(_, c)| *c == key).map(|x| x.1)
}

/// Maps every key of one family. Returns key → pseudonym key.
fn map_family(
    family: Family,
    keys: BTreeMap<String, KeyInfo>,
    used: &mut HashSet<String>,
    seed: u64,
) -> Result<HashMap<String, String>, AnonymizeError> {
    let pools = match family {
        Family::Name => name_pools(),
        Family::City => HashMap::from([("city", tables::CITIES.iter().map(|c| (c.0, c.3)).collect())]),
        _ => HashMap::new(),
    };
    let mut st = FamilyState { family, used, rng: rng::stream(seed, &format!("anonymize-{family:?}")), pools };
    let mut order: Vec<(&String, &KeyInfo)> = keys.iter().collect();
    order.sort_by(|a, b| b.1.count.cmp(&a.1.count).then(a.0.cmp(b.0)));

    let mut out: HashMap<String, String> = HashMap::new();
    // Mapped keys by length, in mapping order, for parent lookup.
    let mut by_len: HashMap<usize, Vec<String>> = HashMap::new();
    let mut groups: HashMap<&'static str, Option<&'static str>> = HashMap::new();

    for (key, info) in order {
        let mut pseudo = None;
        if family == Family::Name && info.attr == "given_name" {
            if let Some(canon) = nickname_group(key) {
                let target = *groups.entry(canon).or_insert_with(|| {
                    let need = tables::nicknames_of(canon).count();
                    let pool = st.pools.get_mut("nick_canon").expect("pool");
                    let mut options: Vec<&'static str> = pool
                        .iter()
                        .map(|x| x.0)
                        .filter(|p| *p != canon && tables::nicknames_of(p).count() >= need)
                        .collect();
                    options.shuffle(&mut st.rng);
                    let choice = options.into_iter().find(|p| {
                        !st.used.contains(*p) && tables::nicknames_of(p).all(|n| !st.used.contains(n))
                    })?;
                    pool.retain(|x| x.0 != choice);
                    Some(choice)
                });
                if let Some(p) = target {
                    let member = if key == canon {
                        Some(p)
                    } else {
                        tables::nicknames_of(canon)
                            .position(|n| n == key)
                            .and_then(|idx| tables::nicknames_of(p).nth(idx))
                    };
                    if let Some(m) = member {
                        if st.allowed(m, &info.forbidden) {
                            st.used.insert(m.to_string());
                            pseudo = Some(m.to_string());
                        }
                    }
                }
            }
        }
        if pseudo.is_none() {
            // Most frequent mapped neighbour within one edit; ties by key order.
            let len = key.chars().count();
            let parent = [len.saturating_sub(1), len, len + 1]
                .iter()
                .filter_map(|l| by_len.get(l))
                .flatten()
                .filter(|p| within_one_edit(p, key))
                .min_by(|a, b| keys[*b].count.cmp(&keys[*a].count).then(a.cmp(b)))
                .cloned();
            if let Some(p) = parent {
                pseudo = st.replay(&p, key, &out[&p], &info.forbidden);
            }
        }
        let pseudo = match pseudo {
            Some(p) => p,
            None => {
                let pool: &'static str = match family {
                    Family::Name if info.attr == "given_name" => "given_name",
                    Family::Name => "surname",
                    _ => "city",
                };
                st.fresh(key, pool, &info.forbidden)?
            }
        };
        by_len.entry(key.chars().count()).or_default().push(key.clone());
        out.insert(key.clone(), pseudo);
    }
    Ok(out)
}

const DAY_LIMIT: i64 = 3650;

/// Days since 1970-01-01 for a proleptic Gregorian date.
pub fn days_from_civil(y: i64, m: u32, d: u32) -> i64 {
    let y = if m <= 2 { y - 1 } else { y };
    let era = if y >= 0 { y } else { y - 399 } / 400;
    let yoe = y - era * 400;
    let mp = (i64::from(m) + 9) % 12;
    let doy = (153 * mp + 2) / 5 + i64::from(d) - 1;
    let doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    era * 146_097 + doe - 719_468
}

pub fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { yoe + era * 400 + 1 } else { yoe + era * 400 }, m, d)
}

/// Shifts an ISO `YYYY-MM-DD` date by `offset` days.
pub fn shift_date(value: &str, offset: i64) -> Option<String> {
    let mut parts = value.trim().splitn(3, '-');
    let y: i64 = parts.next()?.parse().ok()?;
    let m: u32 = parts.next()?.parse().ok()?;
    let d: u32 = parts.next()?.parse().ok()?;
    if !(1..=12).contains(&m) || d == 0 || d > 31 {
        return None;
    }
    let (y, m, d) = civil_from_days(days_from_civil(y, m, d) + offset);
    Some(format!("{y:04}-{m:02}-{d:02}"))
}

fn anonymize_items(
    items: &[BTreeMap<String, String>],
    groups: &[String],
    opts: &AnonymizeOptions,
) -> Result<(Vec<BTreeMap<String, String>>, ShiftMap), AnonymizeError> {
    opts.schema.validate()?;
    assert_eq!(items.len(), groups.len(), "one date group per item");
    let class_of = |attr: &str| opts.schema.classes.get(attr).copied();

    // Collect keys per family with counts and co-occurring originals.
    let mut families: BTreeMap<Family, BTreeMap<String, KeyInfo>> = BTreeMap::new();
    let mut attr_counts: HashMap<(Family, String), BTreeMap<String, usize>> = HashMap::new();
    for item in items {
        let originals: BTreeSet<String> = item
            .iter()
            .filter(|(a, v)| class_of(a).is_some() && !v.trim().is_empty())
            .map(|(_, v)| v.to_uppercase())
            .collect();
        for (attr, raw) in item {
            let Some(family) = class_of(attr).and_then(|c| Family::of(attr, c)) else { continue };
            let key = family.key(attr, raw);
            if key.is_empty() {
                continue;
            }
            let info = families.entry(family).or_default().entry(key.clone()).or_insert_with(|| KeyInfo {
                count: 0,
                attr: attr.clone(),
                forbidden: BTreeSet::new(),
            });
            info.count += 1;
            info.forbidden.extend(originals.iter().cloned());
            *attr_counts.entry((family, key)).or_default().entry(attr.clone()).or_default() += 1;
        }
    }
    for (family, keys) in families.iter_mut() {
        for (key, info) in keys.iter_mut() {
            if let Some(counts) = attr_counts.get(&(*family, key.clone())) {
                info.attr = counts.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|x| x.0.clone()).unwrap_or_default();
            }
        }
    }

    let mut used_by_class: HashMap<AttributeClass, HashSet<String>> = HashMap::new();
    let mut key_maps: HashMap<Family, HashMap<String, String>> = HashMap::new();
    for (family, keys) in families {
        let class = match family {
            Family::Name => AttributeClass::Name,
            Family::Street | Family::City | Family::Zip => AttributeClass::Address,
            Family::Phone => AttributeClass::Phone,
            Family::Id => AttributeClass::Id,
            Family::Email => AttributeClass::Email,
        };
        let used = used_by_class.entry(class).or_default();
        key_maps.insert(family, map_family(family, keys, used, opts.seed)?);
    }

    // One nonzero offset per date group, drawn in sorted group order.
    let mut offset_rng = rng::stream(opts.seed, "anonymize-dates");
    let distinct: BTreeSet<&String> = groups.iter().collect();
    let offsets: BTreeMap<String, i64> = distinct
        .into_iter()
        .map(|g| {
            let off = loop {
                let o = offset_rng.gen_range(-DAY_LIMIT..=DAY_LIMIT);
                if o != 0 {
                    break o;
                }
            };
            (g.clone(), off)
        })
        .collect();

    let mut map = ShiftMap { values: BTreeMap::new(), date_offsets: offsets.clone() };
    let mut digit_fallback = rng::stream(opts.seed, "anonymize-date-fallback");
    let mut out = Vec::with_capacity(items.len());
    for (item, group) in items.iter().zip(groups) {
        let mut anon = BTreeMap::new();
        for (attr, raw) in item {
            let value = match class_of(attr) {
                None => raw.clone(),
                Some(AttributeClass::Date) => shift_date(raw, offsets[group]).unwrap_or_else(|| {
                    raw.chars()
                        .map(|c| if c.is_ascii_digit() { char::from(b'0' + digit_fallback.gen_range(0..10u8)) } else { c })
                        .collect()
                }),
                Some(class) => {
                    let family = Family::of(attr, class).expect("non-date class");
                    let key = family.key(attr, raw);
                    match key_maps.get(&family).and_then(|m| m.get(&key)) {
                        Some(pseudo) => {
                            let v = render(family, raw, pseudo);
                            map.values.entry(class).or_default().insert(raw.clone(), v.clone());
                            v
                        }
                        None => raw.clone(),
                    }
                }
            };
            anon.insert(attr.clone(), value);
        }
        out.push(anon);
    }
    Ok((out, map))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, NodeId, Relation};

    #[test]
    fn civil_round_trip() {
        for z in (-40_000..40_000).step_by(37) {
            let (y, m, d) = civil_from_days(z);
            assert_eq!(days_from_civil(y, m, d), z);
        }
        assert_eq!(days_from_civil(1970, 1, 1), 0);
        assert_eq!(shift_date("2000-02-28", 1).unwrap(), "2000-02-29");
        assert_eq!(shift_date("1999-12-31", 1).unwrap(), "2000-01-01");
    }

    #[test]
    fn edit_detection() {
        let c = |s: &str| s.chars().collect::<Vec<_>>();
        assert_eq!(edit_between(&c("SMITH"), &c("SMYTH")), Some(Edit::Sub(2, 'Y')));
        assert_eq!(edit_between(&c("SMITH"), &c("SMITHE")), Some(Edit::Ins(5, 'E')));
        assert_eq!(edit_between(&c("SMITH"), &c("SMTH")), Some(Edit::Del(2)));
        assert_eq!(edit_between(&c("SMITH"), &c("JONES")), None);
    }

    #[test]
    fn consistent_and_structure_preserving() {
        let nodes = vec![
            Node::person(0usize).with_attr("surname", "SMITH").with_attr("dob", "1970-01-05").with_attr("gender", "F"),
            Node::person(1usize).with_attr("surname", "SMITH").with_attr("phone", "555-123-4567"),
            Node::person(2usize).with_attr("surname", "SMYTH").with_attr("phone", "555-123-4568"),
        ];
        let g = PropertyGraph::build(nodes, vec![Edge::new(0usize, 1usize, Relation::Sibling)]).unwrap();
        let (a, map) = anonymize_graph(&g, 9, true).unwrap();
        let map = map.unwrap();
        assert_eq!(a.edges(), g.edges());
        assert_eq!(a.node(NodeId(0)).unwrap().attr("surname"), a.node(NodeId(1)).unwrap().attr("surname"));
        assert_ne!(a.node(NodeId(0)).unwrap().attr("surname"), Some("SMITH"));
        assert_eq!(a.node(NodeId(0)).unwrap().attr("gender"), Some("F"));
        let p1 = digits_only(a.node(NodeId(1)).unwrap().attr("phone").unwrap());
        let p2 = digits_only(a.node(NodeId(2)).unwrap().attr("phone").unwrap());
        assert!(within_one_edit(&p1, &p2) && p1 != p2);
        assert!(within_one_edit(map.pseudonym(AttributeClass::Name, "SMITH").unwrap(), map.pseudonym(AttributeClass::Name, "SMYTH").unwrap()));
        let off = map.date_offsets["0"];
        assert!(off != 0 && off.abs() <= DAY_LIMIT);
        assert_eq!(a.node(NodeId(0)).unwrap().attr("dob").unwrap(), shift_date("1970-01-05", off).unwrap());
        assert_eq!(anonymize_graph(&g, 9, false).unwrap().0, a);
    }

    #[test]
    fn dates_of_one_entity_move_together() {
        let mut schema = AnonymizerSchema::default();
        schema.classes.insert("employment_start".into(), AttributeClass::Date);
        schema.sensitive.insert("employment_start".into());
        let g = PropertyGraph::build(
            vec![Node::person(0usize).with_attr("dob", "1980-06-30").with_attr("employment_start", "2004-09-01")],
            vec![],
        )
        .unwrap();
        let (a, _) = anonymize_graph_with(&g, &AnonymizeOptions { seed: 3, schema, ..Default::default() }).unwrap();
        let n = a.node(NodeId(0)).unwrap();
        let day = |s: &str| {
            let p: Vec<i64> = s.split('-').map(|x| x.parse().unwrap()).collect();
            days_from_civil(p[0], p[1] as u32, p[2] as u32)
        };
        let (dob, start) = (n.attr("dob").unwrap(), n.attr("employment_start").unwrap());
        assert_eq!(day(start) - day(dob), day("2004-09-01") - day("1980-06-30"));
    }

    #[test]
    fn unclassed_sensitive_rejected() {
        let mut schema = AnonymizerSchema::default();
        schema.sensitive.insert("mothers_maiden_name".into());
        let g = PropertyGraph::build(vec![Node::person(0usize)], vec![]).unwrap();
        let err = anonymize_graph_with(&g, &AnonymizeOptions { schema, ..Default::default() }).unwrap_err();
        assert!(matches!(err, AnonymizeError::UnclassedSensitiveAttribute(a) if a == "mothers_maiden_name"));
    }

    #[test]
    fn nickname_groups_keep_canonical_form() {
        let nodes = vec![
            Node::person(0usize).with_attr("given_name", "ROBERT"),
            Node::person(1usize).with_attr("given_name", "BOB"),
            Node::person(2usize).with_attr("given_name", "BOBBY"),
        ];
        let g = PropertyGraph::build(nodes, vec![]).unwrap();
        let (a, _) = anonymize_graph(&g, 1, false).unwrap();
        let canon = |i: u32| {
            let v = a.node(NodeId(i)).unwrap().attr("given_name").unwrap().to_string();
            tables::canonical_given(&v).map(str::to_string).unwrap_or(v)
        };
        assert_eq!(canon(0), canon(1));
        assert_eq!(canon(1), canon(2));
        assert_ne!(canon(0), "ROBERT");
    }
}
