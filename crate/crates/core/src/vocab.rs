//! Revision purposes and the 63-word revision vocabulary.
//!
//! A revision word joins an operation sign (`+` add, `-` delete, none for
//! modify), a purpose label, and the paragraph position: `+Reasoning_mid`.
//! Content purposes occur with all three operations; surface purposes are
//! modify-only, giving 6·3·3 + 3·3 = 63 words.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::alignment::Revision;
use crate::corpus::Position;
use crate::error::{Error, Result};

pub const VOCAB_SIZE: usize = 63;
pub const CONTENT_WORDS: usize = 54;
pub const SURFACE_WORDS: usize = 9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Purpose {
    Claims,
    Reasoning,
    Evidence,
    Rebuttal,
    General,
    Precision,
    Grammar,
    #[serde(rename = "Word-Usage")]
    WordUsage,
    Organization,
}

impl Purpose {
    pub const ALL: [Purpose; 9] = [
        Purpose::Claims,
        Purpose::Reasoning,
        Purpose::Evidence,
        Purpose::Rebuttal,
        Purpose::General,
        Purpose::Precision,
        Purpose::Grammar,
        Purpose::WordUsage,
        Purpose::Organization,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Purpose::Claims => "Claims",
            Purpose::Reasoning => "Reasoning",
            Purpose::Evidence => "Evidence",
            Purpose::Rebuttal => "Rebuttal",
            Purpose::General => "General",
            Purpose::Precision => "Precision",
            Purpose::Grammar => "Grammar",
            Purpose::WordUsage => "Word-Usage",
            Purpose::Organization => "Organization",
        }
    }

    /// Surface purposes change form, not meaning.
    pub fn is_surface(self) -> bool {
        matches!(
            self,
            Purpose::Grammar | Purpose::WordUsage | Purpose::Organization
        )
    }

    pub fn is_content(self) -> bool {
        !self.is_surface()
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Purpose {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Purpose {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Purpose::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| Error::format("purpose label", format!("unknown purpose `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Operation {
    Modify,
    Add,
    Delete,
}

impl Operation {
    pub const ALL: [Operation; 3] = [Operation::Modify, Operation::Add, Operation::Delete];

    pub fn sign(self) -> &'static str {
        match self {
            Operation::Modify => "",
            Operation::Add => "+",
            Operation::Delete => "-",
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Operation::Modify => "Modify",
            Operation::Add => "Add",
            Operation::Delete => "Delete",
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One vocabulary entry: the (operation, purpose, position) triple behind a word.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RevisionWord {
    pub operation: Operation,
    pub purpose: Purpose,
    pub position: Position,
}

impl RevisionWord {
    /// Checks the modify-only rule for surface purposes.
    pub fn new(operation: Operation, purpose: Purpose, position: Position) -> Result<Self> {
        if purpose.is_surface() && operation != Operation::Modify {
            return Err(Error::TaxonomyViolation {
                operation: operation.to_string(),
                purpose: purpose.to_string(),
            });
        }
        Ok(Self {
            operation,
            purpose,
            position,
        })
    }

    /// Dense id in vocabulary order: purpose, then operation, then position.
    pub fn id(&self) -> usize {
        let op = Operation::ALL
            .iter()
            .position(|&o| o == self.operation)
            .unwrap();
        let pos = self.position.index();
        let p = self.purpose.index();
        if self.purpose.is_content() {
            p * 9 + op * 3 + pos
        } else {
            CONTENT_WORDS + (p - 6) * 3 + pos
        }
    }

    pub fn text(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for RevisionWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}{}_{}",
            self.operation.sign(),
            self.purpose,
            self.position
        )
    }
}

impl FromStr for RevisionWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let unknown = || Error::UnknownWord(s.to_string());
        let (operation, rest) = if let Some(rest) = s.strip_prefix('+') {
            (Operation::Add, rest)
        } else if let Some(rest) = s.strip_prefix('-') {
            (Operation::Delete, rest)
        } else {
            (Operation::Modify, s)
        };
        let (purpose, position) = rest.rsplit_once('_').ok_or_else(unknown)?;
        let purpose: Purpose = purpose.parse().map_err(|_| unknown())?;
        let position: Position = position.parse().map_err(|_| unknown())?;
        RevisionWord::new(operation, purpose, position).map_err(|_| unknown())
    }
}

/// The fixed 63-word universe in id order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<RevisionWord>,
    index: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn words(&self) -> &[RevisionWord] {
        &self.words
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, id: usize) -> Option<&RevisionWord> {
        self.words.get(id)
    }

    pub fn id_of(&self, text: &str) -> Option<usize> {
        self.index.get(text).copied()
    }

    pub fn contains(&self, text: &str) -> bool {
        self.index.contains_key(text)
    }

    /// Word strings in id order, as written into docs and model files.
    pub fn word_strings(&self) -> Vec<String> {
        self.words.iter().map(RevisionWord::to_string).collect()
    }

    /// Fails unless `words` lists this vocabulary in id order.
    pub fn check_matches(&self, words: &[String]) -> Result<()> {
        if words.len() != self.len() {
            return Err(Error::VocabularyMismatch(format!(
                "expected {} words, found {}",
                self.len(),
                words.len()
            )));
        }
        for (id, (ours, theirs)) in self.words.iter().zip(words).enumerate() {
            if ours.to_string() != *theirs {
                return Err(Error::VocabularyMismatch(format!(
                    "word {id} is `{theirs}`, expected `{ours}`"
                )));
            }
        }
        Ok(())
    }
}

pub fn build_vocabulary() -> Vocabulary {
    let mut words = Vec::with_capacity(VOCAB_SIZE);
    for purpose in Purpose::ALL {
        for operation in Operation::ALL {
            if purpose.is_surface() && operation != Operation::Modify {
                continue;
            }
            for position in Position::ALL {
                words.push(RevisionWord {
                    operation,
                    purpose,
                    position,
                });
            }
        }
    }
    let index = words
        .iter()
        .enumerate()
        .map(|(id, w)| (w.to_string(), id))
        .collect();
    Vocabulary { words, index }
}

pub fn encode_revision(revision: &Revision) -> Result<RevisionWord> {
    RevisionWord::new(revision.operation, revision.purpose, revision.position)
}

/// Bag-of-words view of one editor's revision history.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EditorDocument {
    pub editor_id: String,
    pub counts: Vec<u32>,
}

impl EditorDocument {
    pub fn empty(editor_id: impl Into<String>) -> Self {
        Self {
            editor_id: editor_id.into(),
            counts: vec![0; VOCAB_SIZE],
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Token word ids in ascending id order, each repeated by its count.
    pub fn tokens(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(w, &c)| std::iter::repeat_n(w, c as usize))
            .collect()
    }

    /// Per-purpose counts indexed by [`Purpose::index`].
    pub fn purpose_counts(&self) -> [u64; 9] {
        let vocab = build_vocabulary();
        let mut out = [0u64; 9];
        for (w, &c) in self.counts.iter().enumerate() {
            if let Some(word) = vocab.word(w) {
                out[word.purpose.index()] += u64::from(c);
            }
        }
        out
    }

    pub(crate) fn check_len(&self) -> Result<()> {
        if self.counts.len() != VOCAB_SIZE {
            return Err(Error::VocabularyMismatch(format!(
                "document `{}` has {} counts, expected {VOCAB_SIZE}",
                self.editor_id,
                self.counts.len()
            )));
        }
        Ok(())
    }
}

pub fn editor_document(editor_id: &str, revisions: &[Revision]) -> Result<EditorDocument> {
    let mut doc = EditorDocument::empty(editor_id);
    for revision in revisions {
        let word = encode_revision(revision)?;
        doc.counts[word.id()] += 1;
    }
    Ok(doc)
}
