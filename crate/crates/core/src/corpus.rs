//! Essay draft pairs, purpose annotations, and scores.
//!
//! A corpus directory holds one JSON file per essay plus an optional
//! `scores.csv`. Drafts arrive pre-segmented into paragraphs and sentences.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;
use crate::vocab::Purpose;

pub const SCORES_FILE: &str = "scores.csv";

/// Paragraph position of a revision within the revised essay.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Position {
    Beg,
    Mid,
    End,
}

impl Position {
    pub const ALL: [Position; 3] = [Position::Beg, Position::Mid, Position::End];

    pub fn as_str(self) -> &'static str {
        match self {
            Position::Beg => "beg",
            Position::Mid => "mid",
            Position::End => "end",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Position {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "beg" => Ok(Position::Beg),
            "mid" => Ok(Position::Mid),
            "end" => Ok(Position::End),
            _ => Err(Error::format("position", format!("unknown position `{s}`"))),
        }
    }
}

/// First paragraph is `beg`, last is `end`, everything between is `mid`.
/// A single-paragraph essay maps to `beg`.
pub fn position_of(paragraph_index: usize, paragraph_count: usize) -> Result<Position> {
    if paragraph_index >= paragraph_count {
        return Err(Error::PositionOutOfRange {
            index: paragraph_index,
            count: paragraph_count,
        });
    }
    Ok(if paragraph_index == 0 {
        Position::Beg
    } else if paragraph_index == paragraph_count - 1 {
        Position::End
    } else {
        Position::Mid
    })
}

/// Linear rescaling of a raw score onto [0, 100].
pub fn scale_score<T: Real>(x: T, min: T, max: T) -> Result<T> {
    if !(min < max) {
        return Err(Error::InvalidRubric {
            min: min.to_f64().unwrap_or(f64::NAN),
            max: max.to_f64().unwrap_or(f64::NAN),
        });
    }
    // ratio first so both endpoints are exact
    Ok((x - min) / (max - min) * T::lit(100.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Original,
    Revised,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub side: Side,
    #[serde(rename = "paragraph")]
    pub paragraph_index: usize,
    #[serde(rename = "sentence")]
    pub sentence_index: usize,
    pub purpose: Purpose,
}

pub type Paragraph = Vec<String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DraftPair {
    pub essay_id: String,
    pub original: Vec<Paragraph>,
    pub revised: Vec<Paragraph>,
    pub annotations: Vec<AnnotationRecord>,
}

impl DraftPair {
    pub fn draft(&self, side: Side) -> &[Paragraph] {
        match side {
            Side::Original => &self.original,
            Side::Revised => &self.revised,
        }
    }

    /// Checks shape invariants and annotation indices.
    pub fn validate(&self) -> Result<()> {
        let id = &self.essay_id;
        if id.is_empty() {
            return Err(Error::load("<unnamed>", "essay_id", "must be nonempty"));
        }
        for (name, draft) in [("original", &self.original), ("revised", &self.revised)] {
            if draft.is_empty() {
                return Err(Error::load(id, name, "draft needs at least one paragraph"));
            }
            if let Some(p) = draft.iter().position(Vec::is_empty) {
                return Err(Error::load(
                    id,
                    format!("{name}[{p}]"),
                    "paragraph needs at least one sentence",
                ));
            }
        }
        let mut seen = HashSet::new();
        for (i, a) in self.annotations.iter().enumerate() {
            let draft = self.draft(a.side);
            let in_range = draft
                .get(a.paragraph_index)
                .is_some_and(|p| a.sentence_index < p.len());
            if !in_range {
                return Err(Error::load(
                    id,
                    format!("annotations[{i}]"),
                    format!(
                        "({}, {}) out of range for {:?} draft",
                        a.paragraph_index, a.sentence_index, a.side
                    ),
                ));
            }
            if !seen.insert((a.side, a.paragraph_index, a.sentence_index)) {
                return Err(Error::load(
                    id,
                    format!("annotations[{i}]"),
                    "sentence already annotated; one purpose per revision",
                ));
            }
        }
        Ok(())
    }

    /// Canonical JSON text: field order as declared, two-space indent, trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("draft pair serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        let raw: RawDraftPair = serde_json::from_str(text)
            .map_err(|e| Error::load(source, "<json>", e.to_string()))?;
        let essay_id = raw.essay_id;
        let who = if essay_id.is_empty() { source } else { &essay_id };
        let annotations = raw
            .annotations
            .into_iter()
            .enumerate()
            .map(|(i, a)| {
                let purpose = a.purpose.parse::<Purpose>().map_err(|_| {
                    Error::load(
                        who,
                        format!("annotations[{i}].purpose"),
                        format!("unknown purpose `{}`", a.purpose),
                    )
                })?;
                Ok(AnnotationRecord {
                    side: a.side,
                    paragraph_index: a.paragraph,
                    sentence_index: a.sentence,
                    purpose,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let pair = DraftPair {
            essay_id,
            original: raw.original,
            revised: raw.revised,
            annotations,
        };
        pair.validate()?;
        Ok(pair)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDraftPair {
    essay_id: String,
    original: Vec<Paragraph>,
    revised: Vec<Paragraph>,
    #[serde(default)]
    annotations: Vec<RawAnnotation>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnnotation {
    side: Side,
    paragraph: usize,
    sentence: usize,
    purpose: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreRecord {
    pub essay_id: String,
    pub score1_raw: f64,
    pub score2_raw: f64,
    pub rubric_min: f64,
    pub rubric_max: f64,
    pub score1: f64,
    pub score2: f64,
}

/// Where the bounds used for score scaling come from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum ScaleMode {
    /// The rubric bounds written in the score file.
    #[default]
    Rubric,
    /// Observed min/max of raw scores pooled over essays sharing a rubric.
    Observed,
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    essay_id: String,
    score1_raw: f64,
    score2_raw: f64,
    rubric_min: f64,
    rubric_max: f64,
}

/// Reads and scales a score CSV.
pub fn load_scores(path: &Path, mode: ScaleMode) -> Result<Vec<ScoreRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_scores(&text, mode)
}

pub fn parse_scores(text: &str, mode: ScaleMode) -> Result<Vec<ScoreRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut rows: Vec<ScoreRow> = Vec::new();
    let mut seen = HashSet::new();
    for (line, row) in reader.deserialize::<ScoreRow>().enumerate() {
        let row = row.map_err(|e| Error::load(SCORES_FILE, format!("row {}", line + 1), e.to_string()))?;
        if !seen.insert(row.essay_id.clone()) {
            return Err(Error::load(&row.essay_id, "essay_id", "duplicate score row"));
        }
        if !(row.rubric_min < row.rubric_max) {
            return Err(Error::load(
                &row.essay_id,
                "rubric_min",
                format!("rubric_min {} must be below rubric_max {}", row.rubric_min, row.rubric_max),
            ));
        }
        rows.push(row);
    }

    let mut observed: BTreeMap<(u64, u64), (f64, f64)> = BTreeMap::new();
    if mode == ScaleMode::Observed {
        for r in &rows {
            let key = (r.rubric_min.to_bits(), r.rubric_max.to_bits());
            let e = observed.entry(key).or_insert((f64::INFINITY, f64::NEG_INFINITY));
            e.0 = e.0.min(r.score1_raw).min(r.score2_raw);
            e.1 = e.1.max(r.score1_raw).max(r.score2_raw);
        }
    }

    rows.into_iter()
        .map(|r| {
            let (lo, hi) = match mode {
                ScaleMode::Rubric => (r.rubric_min, r.rubric_max),
                ScaleMode::Observed => observed[&(r.rubric_min.to_bits(), r.rubric_max.to_bits())],
            };
            let scale = |x| {
                scale_score(x, lo, hi).map_err(|e| Error::load(&r.essay_id, "scores", e.to_string()))
            };
            Ok(ScoreRecord {
                score1: scale(r.score1_raw)?,
                score2: scale(r.score2_raw)?,
                essay_id: r.essay_id,
                score1_raw: r.score1_raw,
                score2_raw: r.score2_raw,
                rubric_min: r.rubric_min,
                rubric_max: r.rubric_max,
            })
        })
        .collect()
}

/// One essay of a loaded corpus; `score` is present for evaluation essays.
#[derive(Debug, Clone, PartialEq)]
pub struct Essay {
    pub draft: DraftPair,
    pub score: Option<ScoreRecord>,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct LoadOptions {
    pub scale: ScaleMode,
}

/// Loads every `*.json` essay in `dir` (sorted by file name) and joins `scores.csv`.
pub fn load_corpus(dir: &Path, options: LoadOptions) -> Result<Vec<Essay>> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|entry| entry.map(|e| e.path()).map_err(|e| Error::io(dir, e)))
        .collect::<Result<_>>()?;
    files.retain(|p| p.is_file() && p.extension().is_some_and(|ext| ext == "json"));
    files.sort();

    let mut essays = Vec::with_capacity(files.len());
    let mut ids = HashSet::new();
    for path in &files {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let source = path.file_name().unwrap_or_default().to_string_lossy();
        let draft = DraftPair::from_json(&text, &source)?;
        if !ids.insert(draft.essay_id.clone()) {
            return Err(Error::load(&draft.essay_id, "essay_id", "duplicate essay id"));
        }
        essays.push(Essay { draft, score: None });
    }

    let scores_path = dir.join(SCORES_FILE);
    if scores_path.is_file() {
        let scores = load_scores(&scores_path, options.scale)?;
        for score in scores {
            let essay = essays
                .iter_mut()
                .find(|e| e.draft.essay_id == score.essay_id)
                .ok_or_else(|| {
                    Error::load(&score.essay_id, "essay_id", "score row has no matching essay file")
                })?;
            essay.score = Some(score);
        }
    }
    Ok(essays)
}

/// Writes one essay as `<essay_id>.json` in canonical form.
pub fn save_essay(dir: &Path, draft: &DraftPair) -> Result<()> {
    let path = dir.join(format!("{}.json", draft.essay_id));
    fs::write(&path, draft.to_json()).map_err(|e| Error::io(path, e))
}
