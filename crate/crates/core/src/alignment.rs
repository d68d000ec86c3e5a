//! Sentence alignment between drafts and revision extraction.
//!
//! Sentences are matched by token term-frequency cosine with a monotone
//! (non-crossing) dynamic program. Matched pairs whose text differs become
//! Modify revisions; unmatched revised sentences become Add, unmatched
//! original sentences Delete.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::{position_of, AnnotationRecord, DraftPair, Position, Side};
use crate::error::{Error, Result};
use crate::vocab::{Operation, Purpose};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SentenceRef {
    pub paragraph: usize,
    pub sentence: usize,
}

/// One aligned unit. `R` is a flat sentence index or a [`SentenceRef`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignedPair<R = SentenceRef> {
    pub original: Option<R>,
    pub revised: Option<R>,
    pub similarity: f64,
}

impl<R> AlignedPair<R> {
    pub fn is_match(&self) -> bool {
        self.original.is_some() && self.revised.is_some()
    }

    pub fn map_refs<S>(self, mut f: impl FnMut(Side, R) -> S) -> AlignedPair<S> {
        AlignedPair {
            original: self.original.map(|r| f(Side::Original, r)),
            revised: self.revised.map(|r| f(Side::Revised, r)),
            similarity: self.similarity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Revision {
    pub essay_id: String,
    pub operation: Operation,
    pub purpose: Purpose,
    pub position: Position,
    pub original_ref: Option<SentenceRef>,
    pub revised_ref: Option<SentenceRef>,
}

fn term_counts(sentence: &str) -> HashMap<String, u64> {
    let mut counts = HashMap::new();
    for token in sentence
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
    {
        *counts.entry(token.to_lowercase()).or_insert(0) += 1;
    }
    counts
}

fn cosine(a: &HashMap<String, u64>, b: &HashMap<String, u64>) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    let dot: u64 = small
        .iter()
        .filter_map(|(t, &c)| large.get(t).map(|&d| c * d))
        .sum();
    let na: u64 = a.values().map(|c| c * c).sum();
    let nb: u64 = b.values().map(|c| c * c).sum();
    // sqrt of the product keeps identical multisets at exactly 1.0
    (dot as f64 / ((na as f64) * (nb as f64)).sqrt()).clamp(0.0, 1.0)
}

/// Cosine similarity of lowercase token count vectors.
pub fn sentence_similarity(a: &str, b: &str) -> f64 {
    cosine(&term_counts(a), &term_counts(b))
}

/// Pairwise similarity matrix, `original.len()` rows.
pub fn similarity_matrix<S: AsRef<str>>(original: &[S], revised: &[S]) -> Vec<Vec<f64>> {
    let revised: Vec<_> = revised.iter().map(|s| term_counts(s.as_ref())).collect();
    original
        .iter()
        .map(|s| {
            let a = term_counts(s.as_ref());
            revised.iter().map(|b| cosine(&a, b)).collect()
        })
        .collect()
}

/// Sum of matched similarities, accumulated in alignment order.
pub fn alignment_score<R>(pairs: &[AlignedPair<R>]) -> f64 {
    pairs
        .iter()
        .filter(|p| p.is_match())
        .fold(0.0, |acc, p| acc + p.similarity)
}

/// Monotone alignment of two flat sentence lists.
///
/// Only pairs with similarity at or above `threshold` may be matched; the
/// result maximizes total matched similarity. Every sentence appears in
/// exactly one returned pair. Between consecutive matches, original-only
/// entries precede revised-only entries.
pub fn align_drafts<S: AsRef<str>>(
    original: &[S],
    revised: &[S],
    threshold: f64,
) -> Result<Vec<AlignedPair<usize>>> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::InvalidThreshold(threshold));
    }
    let sim = similarity_matrix(original, revised);
    Ok(align_with_matrix(&sim, original.len(), revised.len(), threshold))
}

pub(crate) fn align_with_matrix(
    sim: &[Vec<f64>],
    n: usize,
    m: usize,
    threshold: f64,
) -> Vec<AlignedPair<usize>> {
    let admissible = |i: usize, j: usize| sim[i][j] >= threshold;
    let mut score = vec![vec![0.0f64; m + 1]; n + 1];
    for i in 1..=n {
        for j in 1..=m {
            let mut best = score[i - 1][j].max(score[i][j - 1]);
            if admissible(i - 1, j - 1) {
                best = best.max(score[i - 1][j - 1] + sim[i - 1][j - 1]);
            }
            score[i][j] = best;
        }
    }

    let mut pairs = Vec::with_capacity(n + m);
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0
            && j > 0
            && admissible(i - 1, j - 1)
            && score[i - 1][j - 1] + sim[i - 1][j - 1] == score[i][j]
        {
            pairs.push(AlignedPair {
                original: Some(i - 1),
                revised: Some(j - 1),
                similarity: sim[i - 1][j - 1],
            });
            i -= 1;
            j -= 1;
        } else if j > 0 && (i == 0 || score[i][j - 1] == score[i][j]) {
            pairs.push(AlignedPair {
                original: None,
                revised: Some(j - 1),
                similarity: 0.0,
            });
            j -= 1;
        } else {
            pairs.push(AlignedPair {
                original: Some(i - 1),
                revised: None,
                similarity: 0.0,
            });
            i -= 1;
        }
    }
    pairs.reverse();
    pairs
}

fn flatten(draft: &[Vec<String>]) -> Vec<(SentenceRef, &str)> {
    draft
        .iter()
        .enumerate()
        .flat_map(|(p, para)| {
            para.iter().enumerate().map(move |(s, text)| {
                (
                    SentenceRef {
                        paragraph: p,
                        sentence: s,
                    },
                    text.as_str(),
                )
            })
        })
        .collect()
}

/// Aligns the two drafts of an essay, reporting paragraph/sentence refs.
pub fn align_draft_pair(draft: &DraftPair, threshold: f64) -> Result<Vec<AlignedPair>> {
    let original = flatten(&draft.original);
    let revised = flatten(&draft.revised);
    let orig_text: Vec<&str> = original.iter().map(|(_, t)| *t).collect();
    let rev_text: Vec<&str> = revised.iter().map(|(_, t)| *t).collect();
    let flat = align_drafts(&orig_text, &rev_text, threshold)?;
    Ok(flat
        .into_iter()
        .map(|p| {
            p.map_refs(|side, idx| match side {
                Side::Original => original[idx].0,
                Side::Revised => revised[idx].0,
            })
        })
        .collect())
}

fn sentence(draft: &DraftPair, side: Side, r: SentenceRef) -> Option<&str> {
    draft
        .draft(side)
        .get(r.paragraph)
        .and_then(|p| p.get(r.sentence))
        .map(String::as_str)
}

/// Turns aligned pairs into labelled revisions.
///
/// Positions come from the revised draft. A deleted sentence takes the
/// revised paragraph of the nearest preceding matched pair, or failing
/// that its own original paragraph index clamped to the revised draft.
pub fn extract_revisions(
    pairs: &[AlignedPair],
    annotations: &[AnnotationRecord],
    draft: &DraftPair,
) -> Result<Vec<Revision>> {
    let lookup: HashMap<(Side, usize, usize), Purpose> = annotations
        .iter()
        .map(|a| ((a.side, a.paragraph_index, a.sentence_index), a.purpose))
        .collect();
    let purpose_at = |side: Side, r: Option<SentenceRef>| {
        r.and_then(|r| lookup.get(&(side, r.paragraph, r.sentence)).copied())
    };
    let paragraph_count = draft.revised.len();

    let mut revisions = Vec::new();
    let mut context_paragraph: Option<usize> = None;
    for pair in pairs {
        let (operation, paragraph) = match (pair.original, pair.revised) {
            (Some(o), Some(r)) => {
                context_paragraph = Some(r.paragraph);
                let same = sentence(draft, Side::Original, o) == sentence(draft, Side::Revised, r);
                if same {
                    continue;
                }
                (Operation::Modify, r.paragraph)
            }
            (None, Some(r)) => (Operation::Add, r.paragraph),
            (Some(o), None) => {
                let paragraph = context_paragraph
                    .unwrap_or_else(|| o.paragraph.min(paragraph_count.saturating_sub(1)));
                log::debug!(
                    "{}: delete of original {:?} positioned in revised paragraph {} ({})",
                    draft.essay_id,
                    o,
                    paragraph,
                    if context_paragraph.is_some() { "context" } else { "clamped" }
                );
                (Operation::Delete, paragraph)
            }
            (None, None) => continue,
        };

        let original_purpose = purpose_at(Side::Original, pair.original);
        let revised_purpose = purpose_at(Side::Revised, pair.revised);
        let purpose = match (original_purpose, revised_purpose) {
            (Some(a), Some(b)) if a != b => {
                return Err(Error::ConflictingAnnotation {
                    essay_id: draft.essay_id.clone(),
                    first: a.to_string(),
                    second: b.to_string(),
                })
            }
            (a, b) => b.or(a).ok_or_else(|| Error::MissingAnnotation {
                essay_id: draft.essay_id.clone(),
                original: pair.original,
                revised: pair.revised,
            })?,
        };

        revisions.push(Revision {
            essay_id: draft.essay_id.clone(),
            operation,
            purpose,
            position: position_of(paragraph, paragraph_count)?,
            original_ref: pair.original,
            revised_ref: pair.revised,
        });
    }
    Ok(revisions)
}

/// Aligns and extracts in one step.
pub fn essay_revisions(draft: &DraftPair, threshold: f64) -> Result<Vec<Revision>> {
    let pairs = align_draft_pair(draft, threshold)?;
    extract_revisions(&pairs, &draft.annotations, draft)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::AnnotationRecord;
    use proptest::prelude::*;

    /// Exhaustive maximum over all monotone sets of admissible matches.
    fn brute_force(sim: &[Vec<f64>], threshold: f64) -> f64 {
        fn go(sim: &[Vec<f64>], thr: f64, i: usize, j: usize, acc: f64, best: &mut f64) {
            *best = best.max(acc);
            for a in i..sim.len() {
                for b in j..sim[a].len() {
                    if sim[a][b] >= thr {
                        go(sim, thr, a + 1, b + 1, acc + sim[a][b], best);
                    }
                }
            }
        }
        let mut best = 0.0;
        go(sim, threshold, 0, 0, 0.0, &mut best);
        best
    }

    #[test]
    fn similarity_examples() {
        assert_eq!(sentence_similarity("The cat sat", "the cat sat"), 1.0);
        assert_eq!(sentence_similarity("alpha beta", "gamma delta"), 0.0);
        assert_eq!(sentence_similarity("a b", "a c"), 0.5);
        assert_eq!(sentence_similarity("", ""), 1.0);
        assert_eq!(sentence_similarity("", "x"), 0.0);
        assert_eq!(sentence_similarity("Cat, sat.", "sat cat"), 1.0);
    }

    #[test]
    fn identical_drafts_align_one_to_one() {
        let s = ["one two", "three four", "five six", "seven eight"];
        let pairs = align_drafts(&s, &s, 0.5).unwrap();
        assert_eq!(pairs.len(), 4);
        for (k, p) in pairs.iter().enumerate() {
            assert_eq!((p.original, p.revised, p.similarity), (Some(k), Some(k), 1.0));
        }
    }

    #[test]
    fn empty_original_is_all_additions() {
        let pairs = align_drafts::<&str>(&[], &["a", "b", "c"], 0.5).unwrap();
        assert_eq!(pairs.len(), 3);
        assert!(pairs.iter().all(|p| p.original.is_none() && p.similarity == 0.0));
    }

    #[test]
    fn two_by_two_instance() {
        // 16 distinct tokens vs the same 16 plus 9 more: cosine 16/sqrt(16*25) = 0.8
        let base: Vec<String> = (0..16).map(|k| format!("w{k}")).collect();
        let extra: Vec<String> = (0..9).map(|k| format!("x{k}")).collect();
        let s1 = "the first sentence stays".to_string();
        let s2 = base.join(" ");
        let s2b = format!("{} {}", s2, extra.join(" "));
        assert_eq!(sentence_similarity(&s2, &s2b), 0.8);
        let pairs = align_drafts(&[s1.clone(), s2], &[s1, s2b], 0.5).unwrap();
        assert_eq!(
            pairs,
            vec![
                AlignedPair { original: Some(0), revised: Some(0), similarity: 1.0 },
                AlignedPair { original: Some(1), revised: Some(1), similarity: 0.8 },
            ]
        );

        let sim = vec![vec![1.0, 0.1], vec![0.2, 0.8]];
        let pairs = align_with_matrix(&sim, 2, 2, 0.5);
        assert_eq!(
            pairs,
            vec![
                AlignedPair { original: Some(0), revised: Some(0), similarity: 1.0 },
                AlignedPair { original: Some(1), revised: Some(1), similarity: 0.8 },
            ]
        );
        assert_eq!(alignment_score(&pairs), brute_force(&sim, 0.5));
    }

    #[test]
    fn below_threshold_pairs_split() {
        let pairs = align_drafts(&["a b c d"], &["a x y z"], 0.5).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!((pairs[0].original, pairs[0].revised), (Some(0), None));
        assert_eq!((pairs[1].original, pairs[1].revised), (None, Some(0)));
    }

    #[test]
    fn rejects_bad_threshold() {
        assert!(align_drafts(&["a"], &["a"], 0.0).is_err());
        assert!(align_drafts(&["a"], &["a"], 1.5).is_err());
        assert!(align_drafts(&["a"], &["a"], 1.0).is_ok());
    }

    fn draft(original: Vec<Vec<&str>>, revised: Vec<Vec<&str>>, ann: Vec<AnnotationRecord>) -> DraftPair {
        let conv = |d: Vec<Vec<&str>>| d.into_iter().map(|p| p.into_iter().map(String::from).collect()).collect();
        DraftPair {
            essay_id: "t".into(),
            original: conv(original),
            revised: conv(revised),
            annotations: ann,
        }
    }

    fn ann(side: Side, p: usize, s: usize, purpose: Purpose) -> AnnotationRecord {
        AnnotationRecord { side, paragraph_index: p, sentence_index: s, purpose }
    }

    #[test]
    fn modified_claim_at_beginning() {
        let d = draft(
            vec![vec!["Self-driving vehicles pose many advantages and disadvantages."], vec!["Body."], vec!["End."]],
            vec![
                vec!["While self-driving vehicles pose many advantages and disadvantages, I am not on the bandwagon for them at this time."],
                vec!["Body."],
                vec!["End."],
            ],
            vec![ann(Side::Revised, 0, 0, Purpose::Claims)],
        );
        let revs = essay_revisions(&d, 0.5).unwrap();
        assert_eq!(revs.len(), 1);
        let r = &revs[0];
        assert_eq!((r.operation, r.purpose, r.position), (Operation::Modify, Purpose::Claims, Position::Beg));
        assert_eq!(crate::vocab::encode_revision(r).unwrap().to_string(), "Claims_beg");
    }

    #[test]
    fn identical_match_emits_nothing() {
        let d = draft(vec![vec!["Same text."]], vec![vec!["Same text."]], vec![]);
        assert!(essay_revisions(&d, 0.5).unwrap().is_empty());
    }

    #[test]
    fn case_change_is_a_modify() {
        let d = draft(vec![vec!["same text"]], vec![vec!["Same text"]], vec![ann(Side::Revised, 0, 0, Purpose::Grammar)]);
        let revs = essay_revisions(&d, 0.5).unwrap();
        assert_eq!(revs[0].operation, Operation::Modify);
    }

    #[test]
    fn added_sentence_in_last_paragraph() {
        let d = draft(
            vec![vec!["Intro here."], vec!["Middle here."], vec!["Conclusion here."]],
            vec![vec!["Intro here."], vec!["Middle here."], vec!["Conclusion here.", "Because reasons matter a lot."]],
            vec![ann(Side::Revised, 2, 1, Purpose::Reasoning)],
        );
        let revs = essay_revisions(&d, 0.5).unwrap();
        assert_eq!(revs.len(), 1);
        let r = &revs[0];
        assert_eq!((r.operation, r.purpose, r.position), (Operation::Add, Purpose::Reasoning, Position::End));
        assert_eq!(r.revised_ref, Some(SentenceRef { paragraph: 2, sentence: 1 }));
    }

    #[test]
    fn delete_takes_context_paragraph() {
        let d = draft(
            vec![vec!["Intro."], vec!["Keep this one.", "Drop this sentence entirely."], vec!["Bye."]],
            vec![vec!["Intro."], vec!["Keep this one."], vec!["Bye."]],
            vec![ann(Side::Original, 1, 1, Purpose::Evidence)],
        );
        let revs = essay_revisions(&d, 0.5).unwrap();
        assert_eq!(revs.len(), 1);
        assert_eq!((revs[0].operation, revs[0].position), (Operation::Delete, Position::Mid));
    }

    #[test]
    fn leading_delete_falls_back_to_clamped_paragraph() {
        let d = draft(
            vec![vec!["Gone forever now."], vec!["Stays."]],
            vec![vec!["Stays."]],
            vec![ann(Side::Original, 0, 0, Purpose::General)],
        );
        let revs = essay_revisions(&d, 0.5).unwrap();
        assert_eq!((revs[0].operation, revs[0].position), (Operation::Delete, Position::Beg));
    }

    #[test]
    fn missing_annotation_lists_refs() {
        let d = draft(vec![vec!["a b c"]], vec![vec!["a b c", "new sentence"]], vec![]);
        let err = essay_revisions(&d, 0.5).unwrap_err();
        assert_eq!(err.kind(), "missing-annotation");
        assert!(err.to_string().contains("revised paragraph 0 sentence 1"));
    }

    #[test]
    fn conflicting_sides_rejected() {
        let d = draft(
            vec![vec!["a b c d"]],
            vec![vec!["a b c e"]],
            vec![ann(Side::Original, 0, 0, Purpose::Claims), ann(Side::Revised, 0, 0, Purpose::Evidence)],
        );
        assert_eq!(essay_revisions(&d, 0.5).unwrap_err().kind(), "conflicting-annotation");
    }

    fn sentence_strategy() -> impl Strategy<Value = String> {
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 0..5)
            .prop_map(|w| w.join(" "))
    }

    proptest! {
        #[test]
        fn dp_matches_brute_force(
            orig in prop::collection::vec(sentence_strategy(), 0..=6),
            rev in prop::collection::vec(sentence_strategy(), 0..=6),
            threshold in 0.05f64..=1.0,
        ) {
            let pairs = align_drafts(&orig, &rev, threshold).unwrap();
            let sim = similarity_matrix(&orig, &rev);
            prop_assert_eq!(alignment_score(&pairs), brute_force(&sim, threshold));

            // coverage and monotonicity
            let mut seen_o = vec![0; orig.len()];
            let mut seen_r = vec![0; rev.len()];
            let (mut last_o, mut last_r) = (None, None);
            for p in &pairs {
                prop_assert!(p.original.is_some() || p.revised.is_some());
                if let Some(o) = p.original { seen_o[o] += 1; prop_assert!(last_o < Some(o)); last_o = Some(o); }
                if let Some(r) = p.revised { seen_r[r] += 1; prop_assert!(last_r < Some(r)); last_r = Some(r); }
                if p.is_match() { prop_assert!(p.similarity >= threshold); } else { prop_assert_eq!(p.similarity, 0.0); }
            }
            prop_assert!(seen_o.iter().all(|&c| c == 1));
            prop_assert!(seen_r.iter().all(|&c| c == 1));
            prop_assert_eq!(pairs, align_drafts(&orig, &rev, threshold).unwrap());
        }

        #[test]
        fn similarity_symmetric_and_bounded(a in sentence_strategy(), b in sentence_strategy()) {
            let s = sentence_similarity(&a, &b);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert_eq!(s, sentence_similarity(&b, &a));
        }

        #[test]
        fn operation_counts_follow_pairs(
            orig in prop::collection::vec(prop::collection::vec(sentence_strategy().prop_map(|s| format!("x {s}")), 1..3), 1..3),
            rev in prop::collection::vec(prop::collection::vec(sentence_strategy().prop_map(|s| format!("x {s}")), 1..3), 1..3),
        ) {
            let mut annotations = Vec::new();
            for (side, d) in [(Side::Original, &orig), (Side::Revised, &rev)] {
                for (p, para) in d.iter().enumerate() {
                    for s in 0..para.len() {
                        annotations.push(ann(side, p, s, Purpose::General));
                    }
                }
            }
            let d = DraftPair { essay_id: "p".into(), original: orig.clone(), revised: rev.clone(), annotations };
            let pairs = align_draft_pair(&d, 0.5).unwrap();
            let revs = extract_revisions(&pairs, &d.annotations, &d).unwrap();
            let n_orig: usize = orig.iter().map(Vec::len).sum();
            let n_rev: usize = rev.iter().map(Vec::len).sum();
            prop_assert!(revs.len() <= n_orig + n_rev);
            let count = |op| revs.iter().filter(|r| r.operation == op).count();
            prop_assert_eq!(count(Operation::Add), pairs.iter().filter(|p| p.original.is_none()).count());
            prop_assert_eq!(count(Operation::Delete), pairs.iter().filter(|p| p.revised.is_none()).count());
            let modifies = pairs.iter().filter(|p| {
                p.is_match() && sentence(&d, Side::Original, p.original.unwrap()) != sentence(&d, Side::Revised, p.revised.unwrap())
            }).count();
            prop_assert_eq!(count(Operation::Modify), modifies);
        }
    }
}
