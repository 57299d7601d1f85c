//! Supervised records, the line-delimited corpus file format, augmentation,
//! splitting and synthetic generation.

mod augment;
mod split;
mod synth;

pub use augment::{
    augment, augment_input_states, augment_output_states, paper_profile, AugRule, AugmentConfig, PAPER_PROFILE_TOTAL,
};
pub use split::{split, split_counts, SplitMode, SplitRule};
pub use synth::{synthesize_corpus, synthesize_records, ScriptedHel};

use crate::domain::{BeliefState, DialogueAct, EldAction};
use crate::features::{encode_input, feature_schema_hash, EncodedInput, InteractionContext, TargetLabels};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use thiserror::Error;

pub const SCHEMA_VERSION: &str = "1";
const FORMAT_TAG: &str = "musim-corpus";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error("invalid record {dialogue_id}#{turn_index}: {reason}")]
    InvalidRecord {
        dialogue_id: String,
        turn_index: u32,
        reason: String,
    },
    #[error("no source record matches the sampling predicate of rule {0}")]
    InsufficientSource(AugRule),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Provenance {
    Original,
    #[serde(rename = "AugOut_EstabOT")]
    AugOutEstabOT,
    #[serde(rename = "AugOut_WrongOT")]
    AugOutWrongOT,
    #[serde(rename = "AugOut_WrongLO")]
    AugOutWrongLO,
    #[serde(rename = "AugIn_112")]
    AugIn112,
    #[serde(rename = "AugIn_120")]
    AugIn120,
    #[serde(rename = "AugIn_210")]
    AugIn210,
    #[serde(rename = "AugIn_220")]
    AugIn220,
    #[serde(rename = "AugIn_200")]
    AugIn200,
    Synthetic,
}

impl Provenance {
    /// Original and synthetic records are sources; augmented ones are not.
    pub fn is_augmented(self) -> bool {
        !matches!(self, Provenance::Original | Provenance::Synthetic)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub input: InteractionContext,
    pub targets: TargetLabels,
    pub provenance: Provenance,
    pub dialogue_id: String,
    pub turn_index: u32,
}

impl Record {
    pub fn validate(&self) -> Result<(), CorpusError> {
        let invalid = |reason: String| CorpusError::InvalidRecord {
            dialogue_id: self.dialogue_id.clone(),
            turn_index: self.turn_index,
            reason,
        };
        self.input.validate().map_err(|e| invalid(e.to_string()))?;
        self.targets.validate().map_err(|e| invalid(e.to_string()))?;
        encode_input(&self.input).map_err(|e| invalid(e.to_string()))?;
        Ok(())
    }

    pub fn encoded(&self) -> EncodedInput {
        encode_input(&self.input).expect("records are validated on construction and load")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub schema_version: String,
    pub records: Vec<Record>,
}

impl Default for Corpus {
    fn default() -> Self {
        Corpus::new(Vec::new())
    }
}

impl Corpus {
    pub fn new(records: Vec<Record>) -> Self {
        Corpus {
            schema_version: SCHEMA_VERSION.to_string(),
            records,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Checks every record plus key uniqueness and dialogue contiguity.
    pub fn validate(&self) -> Result<(), CorpusError> {
        let mut seen_dialogues: HashSet<&str> = HashSet::new();
        let mut keys: HashSet<(&str, u32)> = HashSet::new();
        let mut prev: Option<&Record> = None;
        for r in &self.records {
            r.validate()?;
            let invalid = |reason: &str| CorpusError::InvalidRecord {
                dialogue_id: r.dialogue_id.clone(),
                turn_index: r.turn_index,
                reason: reason.to_string(),
            };
            if !keys.insert((&r.dialogue_id, r.turn_index)) {
                return Err(invalid("duplicate dialogue id and turn index"));
            }
            match prev {
                Some(p) if p.dialogue_id == r.dialogue_id => {
                    if r.turn_index <= p.turn_index {
                        return Err(invalid("turns of a dialogue must be in increasing order"));
                    }
                }
                _ => {
                    if !seen_dialogues.insert(&r.dialogue_id) {
                        return Err(invalid("records of a dialogue must be contiguous"));
                    }
                }
            }
            prev = Some(r);
        }
        Ok(())
    }

    pub fn inputs(&self) -> Vec<EncodedInput> {
        self.records.iter().map(Record::encoded).collect()
    }

    pub fn targets(&self) -> Vec<TargetLabels> {
        self.records.iter().map(|r| r.targets).collect()
    }

    /// Number of records whose input belief is each of the 13 states.
    pub fn input_belief_histogram(&self) -> [usize; BeliefState::COUNT] {
        let mut h = [0; BeliefState::COUNT];
        for r in &self.records {
            h[r.input.prev_belief.index()] += 1;
        }
        h
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    format: String,
    schema_version: String,
    feature_schema: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileTargets {
    eld_action: EldAction,
    eld_da: DialogueAct,
    next_belief: BeliefState,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileRecord {
    dialogue_id: String,
    turn_index: u32,
    provenance: Provenance,
    context: InteractionContext,
    targets: FileTargets,
}

/// Just the key of a record line, so errors can name the record even when
/// the rest of the line does not deserialize.
#[derive(Deserialize)]
struct RecordKey {
    dialogue_id: String,
    turn_index: u32,
}

fn header_line() -> String {
    serde_json::to_string(&Header {
        format: FORMAT_TAG.to_string(),
        schema_version: SCHEMA_VERSION.to_string(),
        feature_schema: feature_schema_hash().to_string(),
    })
    .expect("header serializes")
}

/// Serializes a corpus to its textual form.
pub fn corpus_to_string(c: &Corpus) -> String {
    let mut out = header_line();
    out.push('\n');
    for r in &c.records {
        let fr = FileRecord {
            dialogue_id: r.dialogue_id.clone(),
            turn_index: r.turn_index,
            provenance: r.provenance,
            context: r.input.clone(),
            targets: FileTargets {
                eld_action: r.targets.action(),
                eld_da: r.targets.da(),
                next_belief: r.targets.belief(),
            },
        };
        out.push_str(&serde_json::to_string(&fr).expect("records serialize"));
        out.push('\n');
    }
    out
}

pub fn parse_corpus(text: &str) -> Result<Corpus, CorpusError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let Some((_, first)) = lines.next() else {
        return Ok(Corpus::default());
    };
    let header: Header = serde_json::from_str(first)
        .map_err(|e| CorpusError::SchemaMismatch(format!("missing or malformed header: {e}")))?;
    if header.format != FORMAT_TAG {
        return Err(CorpusError::SchemaMismatch(format!("unknown format '{}'", header.format)));
    }
    if header.schema_version != SCHEMA_VERSION {
        return Err(CorpusError::SchemaMismatch(format!(
            "schema version {} (expected {SCHEMA_VERSION})",
            header.schema_version
        )));
    }
    if header.feature_schema != feature_schema_hash() {
        return Err(CorpusError::SchemaMismatch(format!(
            "feature schema {} (expected {})",
            header.feature_schema,
            feature_schema_hash()
        )));
    }
    let mut records = Vec::new();
    for (i, line) in lines {
        let key: RecordKey = serde_json::from_str(line).map_err(|e| CorpusError::ParseError {
            line: i + 1,
            reason: e.to_string(),
        })?;
        let fr: FileRecord = serde_json::from_str(line).map_err(|e| CorpusError::InvalidRecord {
            dialogue_id: key.dialogue_id.clone(),
            turn_index: key.turn_index,
            reason: e.to_string(),
        })?;
        records.push(Record {
            input: fr.context,
            targets: TargetLabels::new(fr.targets.eld_action, fr.targets.eld_da, fr.targets.next_belief),
            provenance: fr.provenance,
            dialogue_id: fr.dialogue_id,
            turn_index: fr.turn_index,
        });
    }
    let c = Corpus::new(records);
    c.validate()?;
    Ok(c)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let mut text = String::new();
    for line in BufReader::new(File::open(path)?).lines() {
        text.push_str(&line?);
        text.push('\n');
    }
    parse_corpus(&text)
}

pub fn save_corpus(c: &Corpus, path: impl AsRef<Path>) -> Result<(), CorpusError> {
    write_atomic(path.as_ref(), corpus_to_string(c).as_bytes())?;
    Ok(())
}

/// Writes through a temporary file in the target directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::Oracle;

    fn sample() -> Corpus {
        synthesize_records(&Oracle::default(), 0.3, 3, 5)
    }

    #[test]
    fn text_round_trip() {
        let c = sample();
        assert_eq!(c.len(), 3);
        let back = parse_corpus(&corpus_to_string(&c)).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn empty_text_is_empty_corpus() {
        assert!(parse_corpus("").unwrap().is_empty());
    }

    #[test]
    fn invalid_belief_names_the_record() {
        let good = corpus_to_string(&sample());
        let mut lines: Vec<String> = good.lines().map(String::from).collect();
        let mut v: serde_json::Value = serde_json::from_str(&lines[1]).unwrap();
        v["targets"]["next_belief"] = serde_json::json!([0, 0, 1]);
        lines[1] = v.to_string();
        match parse_corpus(&lines.join("\n")) {
            Err(CorpusError::InvalidRecord { turn_index, .. }) => assert_eq!(turn_index, 0),
            other => panic!("expected InvalidRecord, got {other:?}"),
        }
    }

    #[test]
    fn header_mismatch() {
        let text = corpus_to_string(&sample()).replacen("\"schema_version\":\"1\"", "\"schema_version\":\"9\"", 1);
        assert!(matches!(parse_corpus(&text), Err(CorpusError::SchemaMismatch(_))));
        assert!(matches!(parse_corpus("{\"a\":1}\n"), Err(CorpusError::SchemaMismatch(_))));
    }

    #[test]
    fn garbage_record_line_is_parse_error() {
        let text = format!("{}\nnot json\n", header_line());
        assert!(matches!(parse_corpus(&text), Err(CorpusError::ParseError { line: 2, .. })));
    }

    #[test]
    fn non_contiguous_dialogue_rejected() {
        let mut c = synthesize_records(&Oracle::default(), 0.0, 20, 1);
        let first = c.records[0].clone();
        let mut moved = first.clone();
        moved.turn_index = 99;
        c.records.push(moved);
        assert!(matches!(c.validate(), Err(CorpusError::InvalidRecord { .. })));
    }
}
