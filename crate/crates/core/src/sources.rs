//! The three source feeds (sentence text, JSON lines, CSV), their record type
//! and the readers/writers for each format.
//!
//! Every source carries a different attribute subset. The text feed is written
//! from fixed sentence templates so it can be ingested back without an
//! extraction model.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::graph::Relation;

pub const TEXT_FILE: &str = "source_text.txt";
pub const SEMI_FILE: &str = "source_semi.jsonl";
pub const TAB_FILE: &str = "source_tab.csv";
pub const RELATIONSHIPS_FILE: &str = "relationships.jsonl";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Source {
    Unstructured,
    SemiStructured,
    Structured,
}

impl Source {
    pub const ALL: [Source; 3] = [Source::Unstructured, Source::SemiStructured, Source::Structured];

    /// Attributes this feed carries.
    pub fn attributes(self) -> &'static [&'static str] {
        match self {
            Source::Structured => &[
                "given_name", "surname", "gender", "ethnicity", "dob", "ssn", "phone", "street", "city", "state",
                "zip", "ingested_at", "source_system",
            ],
            Source::SemiStructured => &[
                "given_name", "surname", "gender", "dob", "email", "phone", "street", "city", "state", "employer",
                "ingested_at", "source_system",
            ],
            Source::Unstructured => &["given_name", "surname", "dob", "street", "city", "state", "employer", "phone"],
        }
    }

    /// Higher wins when attribute values of merged records disagree.
    pub fn precedence(self) -> u8 {
        match self {
            Source::Structured => 2,
            Source::SemiStructured => 1,
            Source::Unstructured => 0,
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::Unstructured => "unstructured",
            Source::SemiStructured => "semistructured",
            Source::Structured => "structured",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceRecord {
    pub record_id: String,
    pub source: Source,
    pub attributes: BTreeMap<String, String>,
}

impl SourceRecord {
    pub fn get(&self, attr: &str) -> Option<&str> {
        self.attributes.get(attr).map(String::as_str)
    }
}

/// A stated relationship between two records' entities.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordLink {
    pub a: String,
    pub b: String,
    pub relation: Relation,
}

/// Everything read back from a sources directory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SourceBundle {
    /// Sorted by record id.
    pub records: Vec<SourceRecord>,
    pub links: Vec<RecordLink>,
}

const TAB_COLUMNS: &[&str] = &[
    "record_id", "given_name", "surname", "gender", "ethnicity", "dob", "ssn", "phone", "street", "city", "state",
    "zip", "ingested_at", "source_system",
];

/// Writes the three feeds plus the record-level relationship list.
pub fn write_sources(dir: &Path, records: &[SourceRecord], links: &[RecordLink]) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut text = BufWriter::new(File::create(dir.join(TEXT_FILE))?);
    let mut semi = BufWriter::new(File::create(dir.join(SEMI_FILE))?);
    let mut tab = csv::Writer::from_path(dir.join(TAB_FILE))?;
    tab.write_record(TAB_COLUMNS)?;
    for rec in records {
        match rec.source {
            Source::Unstructured => writeln!(text, "{}\t{}", rec.record_id, render_sentences(&rec.attributes))?,
            Source::SemiStructured => {
                serde_json::to_writer(&mut semi, &semi_json(rec))?;
                semi.write_all(b"\n")?;
            }
            Source::Structured => {
                let row: Vec<&str> = TAB_COLUMNS
                    .iter()
                    .map(|c| if *c == "record_id" { rec.record_id.as_str() } else { rec.get(c).unwrap_or("") })
                    .collect();
                tab.write_record(&row)?;
            }
        }
    }
    text.flush()?;
    semi.flush()?;
    tab.flush()?;
    let mut w = BufWriter::new(File::create(dir.join(RELATIONSHIPS_FILE))?);
    for link in links {
        serde_json::to_writer(&mut w, link)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_sources(dir: &Path) -> io::Result<SourceBundle> {
    let mut records = Vec::new();
    for line in BufReader::new(File::open(dir.join(TEXT_FILE))?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (id, body) = line
            .split_once('\t')
            .ok_or_else(|| invalid(format!("text record without id: {line:?}")))?;
        let attributes = parse_sentences(body).map_err(invalid)?;
        records.push(SourceRecord { record_id: id.to_string(), source: Source::Unstructured, attributes });
    }
    for line in BufReader::new(File::open(dir.join(SEMI_FILE))?).lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let value: Value = serde_json::from_str(&line)?;
        records.push(parse_semi(&value).map_err(invalid)?);
    }
    let mut tab = csv::Reader::from_path(dir.join(TAB_FILE))?;
    let headers = tab.headers()?.clone();
    for row in tab.records() {
        let row = row?;
        let mut id = None;
        let mut attributes = BTreeMap::new();
        for (h, v) in headers.iter().zip(row.iter()) {
            if h == "record_id" {
                id = Some(v.to_string());
            } else if !v.is_empty() {
                attributes.insert(h.to_string(), v.to_string());
            }
        }
        let record_id = id.ok_or_else(|| invalid("csv row without record_id".into()))?;
        records.push(SourceRecord { record_id, source: Source::Structured, attributes });
    }
    records.sort_by(|a, b| a.record_id.cmp(&b.record_id));

    let mut links = Vec::new();
    let path = dir.join(RELATIONSHIPS_FILE);
    if path.exists() {
        for line in BufReader::new(File::open(path)?).lines() {
            let line = line?;
            if !line.trim().is_empty() {
                links.push(serde_json::from_str(&line)?);
            }
        }
    }
    Ok(SourceBundle { records, links })
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

const GIVEN_ONLY: &str = " (given name only)";
const SURNAME_ONLY: &str = " (surname only)";
const NO_NAME: &str = "This person";

fn subject(attrs: &BTreeMap<String, String>) -> String {
    match (attrs.get("given_name"), attrs.get("surname")) {
        (Some(g), Some(s)) => format!("{g} {s}"),
        (Some(g), None) => format!("{g}{GIVEN_ONLY}"),
        (None, Some(s)) => format!("{s}{SURNAME_ONLY}"),
        (None, None) => NO_NAME.to_string(),
    }
}

/// Renders a record as template sentences, e.g. `ANNA LEE lives in SALEM, OR.`
pub fn render_sentences(attrs: &BTreeMap<String, String>) -> String {
    let s = subject(attrs);
    let mut out: Vec<String> = Vec::new();
    if let Some(dob) = attrs.get("dob") {
        out.push(format!("{s} was born on {dob}."));
    }
    if let Some(street) = attrs.get("street") {
        out.push(format!("{s} lives at {street}."));
    }
    match (attrs.get("city"), attrs.get("state")) {
        (Some(c), Some(st)) => out.push(format!("{s} lives in {c}, {st}.")),
        (Some(c), None) => out.push(format!("{s} lives in {c}.")),
        (None, Some(st)) => out.push(format!("{s} lives in the state of {st}.")),
        (None, None) => {}
    }
    if let Some(e) = attrs.get("employer") {
        out.push(format!("{s} works at {e}."));
    }
    if let Some(p) = attrs.get("phone") {
        out.push(format!("{s} can be reached at {p}."));
    }
    if out.is_empty() {
        out.push(format!("{s} is on record."));
    }
    out.join(" ")
}

const PREDICATES: &[&str] = &[" was born on ", " lives at ", " lives in ", " works at ", " can be reached at ", " is on record"];

/// Inverse of [`render_sentences`].
pub fn parse_sentences(text: &str) -> Result<BTreeMap<String, String>, String> {
    let first_pred = PREDICATES
        .iter()
        .filter_map(|p| text.find(p))
        .min()
        .ok_or_else(|| format!("no recognizable sentence in {text:?}"))?;
    let subj = &text[..first_pred];
    let mut attrs = BTreeMap::new();
    if let Some(g) = subj.strip_suffix(GIVEN_ONLY) {
        attrs.insert("given_name".to_string(), g.to_string());
    } else if let Some(s) = subj.strip_suffix(SURNAME_ONLY) {
        attrs.insert("surname".to_string(), s.to_string());
    } else if subj != NO_NAME {
        let (g, s) = subj.split_once(' ').ok_or_else(|| format!("unparseable subject {subj:?}"))?;
        attrs.insert("given_name".to_string(), g.to_string());
        attrs.insert("surname".to_string(), s.to_string());
    }
    let prefix = format!("{subj} ");
    for sentence in text.split(". ") {
        let sentence = sentence.strip_suffix('.').unwrap_or(sentence);
        let rest = sentence
            .strip_prefix(&prefix)
            .ok_or_else(|| format!("sentence does not start with subject: {sentence:?}"))?;
        if let Some(v) = rest.strip_prefix("was born on ") {
            attrs.insert("dob".into(), v.into());
        } else if let Some(v) = rest.strip_prefix("lives at ") {
            attrs.insert("street".into(), v.into());
        } else if let Some(v) = rest.strip_prefix("lives in the state of ") {
            attrs.insert("state".into(), v.into());
        } else if let Some(v) = rest.strip_prefix("lives in ") {
            match v.split_once(", ") {
                Some((c, st)) => {
                    attrs.insert("city".into(), c.into());
                    attrs.insert("state".into(), st.into());
                }
                None => {
                    attrs.insert("city".into(), v.into());
                }
            }
        } else if let Some(v) = rest.strip_prefix("works at ") {
            attrs.insert("employer".into(), v.into());
        } else if let Some(v) = rest.strip_prefix("can be reached at ") {
            attrs.insert("phone".into(), v.into());
        } else if rest != "is on record" {
            return Err(format!("unknown sentence {sentence:?}"));
        }
    }
    Ok(attrs)
}

fn semi_json(rec: &SourceRecord) -> Value {
    let mut person = Map::new();
    let mut put = |section: Option<&str>, key: &str, attr: &str| {
        if let Some(v) = rec.get(attr) {
            let target = match section {
                Some(sec) => person
                    .entry(sec.to_string())
                    .or_insert_with(|| Value::Object(Map::new()))
                    .as_object_mut()
                    .expect("section object"),
                None => &mut person,
            };
            target.insert(key.to_string(), Value::String(v.to_string()));
        }
    };
    put(Some("name"), "given", "given_name");
    put(Some("name"), "family", "surname");
    put(None, "gender", "gender");
    put(None, "birth_date", "dob");
    put(Some("contact"), "email", "email");
    put(Some("contact"), "phone", "phone");
    put(Some("address"), "street", "street");
    put(Some("address"), "city", "city");
    put(Some("address"), "state", "state");
    put(None, "employer", "employer");
    let mut meta = Map::new();
    if let Some(v) = rec.get("ingested_at") {
        meta.insert("ingested_at".into(), Value::String(v.into()));
    }
    if let Some(v) = rec.get("source_system") {
        meta.insert("source_system".into(), Value::String(v.into()));
    }
    let mut root = json!({ "record_id": rec.record_id, "person": Value::Object(person) });
    if !meta.is_empty() {
        root["meta"] = Value::Object(meta);
    }
    root
}

const SEMI_PATHS: &[(&[&str], &str)] = &[
    (&["person", "name", "given"], "given_name"),
    (&["person", "name", "family"], "surname"),
    (&["person", "gender"], "gender"),
    (&["person", "birth_date"], "dob"),
    (&["person", "contact", "email"], "email"),
    (&["person", "contact", "phone"], "phone"),
    (&["person", "address", "street"], "street"),
    (&["person", "address", "city"], "city"),
    (&["person", "address", "state"], "state"),
    (&["person", "employer"], "employer"),
    (&["meta", "ingested_at"], "ingested_at"),
    (&["meta", "source_system"], "source_system"),
];

fn parse_semi(v: &Value) -> Result<SourceRecord, String> {
    let record_id = v["record_id"].as_str().ok_or("semi record without record_id")?.to_string();
    let mut attributes = BTreeMap::new();
    for (path, attr) in SEMI_PATHS {
        let mut cur = v;
        for key in *path {
            cur = &cur[*key];
        }
        if let Some(s) = cur.as_str() {
            attributes.insert(attr.to_string(), s.to_string());
        }
    }
    Ok(SourceRecord { record_id, source: Source::SemiStructured, attributes })
}
