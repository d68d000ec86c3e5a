//! Latent Dirichlet allocation over editor documents.
//!
//! Training is collapsed Gibbs sampling over token-topic assignments.
//! All randomness comes from `ChaCha8Rng` seeded with the caller's `u64`,
//! so a model is a pure function of (documents, hyperparameters, seed).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::vocab::{build_vocabulary, EditorDocument, RevisionWord, VOCAB_SIZE};

/// Generator used for every seeded draw in the crate.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream `stream` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    pub sweeps: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Average estimates over post-burn-in sweeps instead of using the final state.
    #[serde(default)]
    pub average_samples: bool,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            k: 5,
            alpha: 0.1,
            beta: 0.01,
            sweeps: 2000,
            burn_in: 1000,
            seed: 0,
            average_samples: false,
        }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.k == 0 {
            return fail("k must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return fail("alpha must be a positive finite number");
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return fail("beta must be a positive finite number");
        }
        if self.sweeps == 0 {
            return fail("sweeps must be at least 1");
        }
        if self.burn_in >= self.sweeps {
            return fail("burn_in must be smaller than sweeps");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LdaModel {
    pub hyperparams: Hyperparams,
    pub vocabulary: Vec<String>,
    /// K rows of topic-word probabilities.
    pub phi: Vec<Vec<f64>>,
    /// One row of topic probabilities per training document.
    pub theta_train: Vec<Vec<f64>>,
    pub train_log_likelihood: f64,
}

struct GibbsState {
    k: usize,
    tokens: Vec<Vec<usize>>,
    assignments: Vec<Vec<usize>>,
    doc_topic: Vec<Vec<u32>>,
    topic_word: Vec<Vec<u32>>,
    topic_total: Vec<u32>,
}

impl GibbsState {
    fn init(docs: &[EditorDocument], k: usize, rng: &mut SeededRng) -> Self {
        let tokens: Vec<Vec<usize>> = docs.iter().map(EditorDocument::tokens).collect();
        let mut doc_topic = vec![vec![0u32; k]; docs.len()];
        let mut topic_word = vec![vec![0u32; VOCAB_SIZE]; k];
        let mut topic_total = vec![0u32; k];
        let assignments = tokens
            .iter()
            .enumerate()
            .map(|(d, words)| {
                words
                    .iter()
                    .map(|&w| {
                        let z = rng.random_range(0..k);
                        doc_topic[d][z] += 1;
                        topic_word[z][w] += 1;
                        topic_total[z] += 1;
                        z
                    })
                    .collect()
            })
            .collect();
        Self {
            k,
            tokens,
            assignments,
            doc_topic,
            topic_word,
            topic_total,
        }
    }

    fn sweep(&mut self, alpha: f64, beta: f64, rng: &mut SeededRng, weights: &mut [f64]) {
        let vbeta = VOCAB_SIZE as f64 * beta;
        for d in 0..self.tokens.len() {
            for i in 0..self.tokens[d].len() {
                let w = self.tokens[d][i];
                let old = self.assignments[d][i];
                self.doc_topic[d][old] -= 1;
                self.topic_word[old][w] -= 1;
                self.topic_total[old] -= 1;

                let mut total = 0.0;
                for (t, weight) in weights.iter_mut().enumerate() {
                    total += (f64::from(self.doc_topic[d][t]) + alpha)
                        * (f64::from(self.topic_word[t][w]) + beta)
                        / (f64::from(self.topic_total[t]) + vbeta);
                    *weight = total;
                }
                let new = draw_cumulative(weights, total, rng);

                self.assignments[d][i] = new;
                self.doc_topic[d][new] += 1;
                self.topic_word[new][w] += 1;
                self.topic_total[new] += 1;
            }
        }
        debug_assert!(self.counts_conserved());
    }

    fn counts_conserved(&self) -> bool {
        let docs_ok = self
            .doc_topic
            .iter()
            .zip(&self.tokens)
            .all(|(row, toks)| row.iter().map(|&c| c as usize).sum::<usize>() == toks.len());
        let topics_ok = (0..self.k).all(|t| {
            let by_word: u64 = self.topic_word[t].iter().map(|&c| u64::from(c)).sum();
            let by_doc: u64 = self.doc_topic.iter().map(|row| u64::from(row[t])).sum();
            by_word == by_doc && by_word == u64::from(self.topic_total[t])
        });
        docs_ok && topics_ok
    }

    fn phi(&self, beta: f64) -> Vec<Vec<f64>> {
        let vbeta = VOCAB_SIZE as f64 * beta;
        self.topic_word
            .iter()
            .zip(&self.topic_total)
            .map(|(row, &total)| {
                row.iter()
                    .map(|&c| (f64::from(c) + beta) / (f64::from(total) + vbeta))
                    .collect()
            })
            .collect()
    }

    fn theta(&self, alpha: f64) -> Vec<Vec<f64>> {
        self.doc_topic
            .iter()
            .zip(&self.tokens)
            .map(|(row, toks)| smoothed_theta(row, toks.len(), alpha))
            .collect()
    }
}

fn smoothed_theta(counts: &[u32], len: usize, alpha: f64) -> Vec<f64> {
    let denom = len as f64 + counts.len() as f64 * alpha;
    counts
        .iter()
        .map(|&c| (f64::from(c) + alpha) / denom)
        .collect()
}

/// Index of the first cumulative weight exceeding a uniform draw on `[0, total)`.
fn draw_cumulative(cumulative: &[f64], total: f64, rng: &mut SeededRng) -> usize {
    let u = rng.random::<f64>() * total;
    cumulative
        .iter()
        .position(|&c| u < c)
        .unwrap_or(cumulative.len() - 1)
}

fn accumulate(sum: &mut [Vec<f64>], add: &[Vec<f64>]) {
    for (s, a) in sum.iter_mut().zip(add) {
        for (x, y) in s.iter_mut().zip(a) {
            *x += y;
        }
    }
}

fn check_docs(docs: &[EditorDocument]) -> Result<()> {
    docs.iter().try_for_each(EditorDocument::check_len)
}

/// Trains a model by collapsed Gibbs sampling.
pub fn train(docs: &[EditorDocument], h: &Hyperparams) -> Result<LdaModel> {
    h.validate()?;
    check_docs(docs)?;
    if docs.iter().all(|d| d.total() == 0) {
        return Err(Error::Training(
            "corpus has no documents with revisions".to_string(),
        ));
    }

    let mut rng = seeded_rng(h.seed);
    let mut state = GibbsState::init(docs, h.k, &mut rng);
    let mut weights = vec![0.0; h.k];

    let mut phi_sum = vec![vec![0.0; VOCAB_SIZE]; h.k];
    let mut theta_sum = vec![vec![0.0; h.k]; docs.len()];
    let mut samples = 0usize;
    for sweep in 0..h.sweeps {
        state.sweep(h.alpha, h.beta, &mut rng, &mut weights);
        if h.average_samples && sweep >= h.burn_in {
            accumulate(&mut phi_sum, &state.phi(h.beta));
            accumulate(&mut theta_sum, &state.theta(h.alpha));
            samples += 1;
        }
    }

    let (phi, theta_train) = if h.average_samples {
        let scale = |m: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
            m.into_iter()
                .map(|row| normalize(row.into_iter().map(|v| v / samples as f64).collect()))
                .collect()
        };
        (scale(phi_sum), scale(theta_sum))
    } else {
        (state.phi(h.beta), state.theta(h.alpha))
    };

    let mut model = LdaModel {
        hyperparams: *h,
        vocabulary: build_vocabulary().word_strings(),
        phi,
        theta_train,
        train_log_likelihood: 0.0,
    };
    model.train_log_likelihood = docs
        .iter()
        .zip(&model.theta_train)
        .map(|(doc, theta)| doc_log_likelihood(&model, doc, theta))
        .sum();
    log::info!(
        "trained K={} on {} documents, log-likelihood {:.4}",
        h.k,
        docs.len(),
        model.train_log_likelihood
    );
    Ok(model)
}

fn normalize(row: Vec<f64>) -> Vec<f64> {
    let total: f64 = row.iter().sum();
    row.into_iter().map(|v| v / total).collect()
}

impl LdaModel {
    pub fn k(&self) -> usize {
        self.phi.len()
    }

    /// Checks shapes and the vocabulary word list against the built-in vocabulary.
    pub fn validate(&self) -> Result<()> {
        build_vocabulary().check_matches(&self.vocabulary)?;
        let k = self.hyperparams.k;
        if self.phi.len() != k {
            return Err(Error::ShapeMismatch(format!(
                "phi has {} rows for K={k}",
                self.phi.len()
            )));
        }
        if let Some(row) = self.phi.iter().find(|r| r.len() != VOCAB_SIZE) {
            return Err(Error::ShapeMismatch(format!(
                "phi row has {} columns, expected {VOCAB_SIZE}",
                row.len()
            )));
        }
        if let Some(row) = self.theta_train.iter().find(|r| r.len() != k) {
            return Err(Error::ShapeMismatch(format!(
                "theta row has {} columns, expected {k}",
                row.len()
            )));
        }
        if self.phi.iter().flatten().any(|&p| !(p > 0.0 && p.is_finite())) {
            return Err(Error::format("model", "phi entries must be positive and finite"));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let model: LdaModel =
            serde_json::from_str(text).map_err(|e| Error::format("model file", e))?;
        model.validate()?;
        Ok(model)
    }
}

/// Fold-in estimate of a new document's topic mixture.
///
/// Topic-word probabilities stay frozen at the model's `phi`; only the
/// document's own assignments are resampled for `sweeps` passes.
pub fn infer(model: &LdaModel, doc: &EditorDocument, sweeps: usize, seed: u64) -> Result<Vec<f64>> {
    infer_with_rng(model, doc, sweeps, &mut seeded_rng(seed))
}

fn infer_with_rng(
    model: &LdaModel,
    doc: &EditorDocument,
    sweeps: usize,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    doc.check_len()?;
    if model.vocabulary.len() != VOCAB_SIZE || model.phi.iter().any(|r| r.len() != VOCAB_SIZE) {
        return Err(Error::VocabularyMismatch(
            "model does not use the 63-word vocabulary".to_string(),
        ));
    }
    if sweeps == 0 {
        return Err(Error::Config("inference sweeps must be at least 1".to_string()));
    }
    let k = model.k();
    let alpha = model.hyperparams.alpha;
    let tokens = doc.tokens();
    if tokens.is_empty() {
        return Ok(vec![1.0 / k as f64; k]);
    }

    let mut counts = vec![0u32; k];
    let mut assignments: Vec<usize> = tokens
        .iter()
        .map(|_| {
            let z = rng.random_range(0..k);
            counts[z] += 1;
            z
        })
        .collect();
    let mut weights = vec![0.0; k];
    for _ in 0..sweeps {
        for (i, &w) in tokens.iter().enumerate() {
            counts[assignments[i]] -= 1;
            let mut total = 0.0;
            for (t, weight) in weights.iter_mut().enumerate() {
                total += (f64::from(counts[t]) + alpha) * model.phi[t][w];
                *weight = total;
            }
            let z = draw_cumulative(&weights, total, rng);
            assignments[i] = z;
            counts[z] += 1;
        }
    }
    Ok(smoothed_theta(&counts, tokens.len(), alpha))
}

/// Folds in every document; document `i` uses stream `i` of `seed`.
pub fn infer_all(
    model: &LdaModel,
    docs: &[EditorDocument],
    sweeps: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    docs.par_iter()
        .enumerate()
        .map(|(i, doc)| infer_with_rng(model, doc, sweeps, &mut stream_rng(seed, i as u64)))
        .collect()
}

/// Log-likelihood of one document under a fixed mixture `theta`.
pub fn doc_log_likelihood(model: &LdaModel, doc: &EditorDocument, theta: &[f64]) -> f64 {
    doc.counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(w, &c)| {
            let p: f64 = theta
                .iter()
                .zip(&model.phi)
                .map(|(t, row)| t * row[w])
                .sum();
            f64::from(c) * p.ln()
        })
        .sum()
}

/// Corpus log-likelihood using fold-in mixtures for each document.
pub fn log_likelihood(
    model: &LdaModel,
    docs: &[EditorDocument],
    sweeps: usize,
    seed: u64,
) -> Result<f64> {
    let thetas = infer_all(model, docs, sweeps, seed)?;
    Ok(docs
        .iter()
        .zip(&thetas)
        .map(|(doc, theta)| doc_log_likelihood(model, doc, theta))
        .sum())
}

/// The `n` most probable words of `topic`, ties broken by ascending word id.
pub fn top_words(model: &LdaModel, topic: usize, n: usize) -> Result<Vec<(RevisionWord, f64)>> {
    let k = model.k();
    if topic >= k {
        return Err(Error::TopicOutOfRange { topic, k });
    }
    if n == 0 {
        return Err(Error::Config("top-n must be at least 1".to_string()));
    }
    let vocab = build_vocabulary();
    let row = &model.phi[topic];
    let mut ids: Vec<usize> = (0..row.len()).collect();
    ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    Ok(ids
        .into_iter()
        .take(n.min(VOCAB_SIZE))
        .map(|id| (*vocab.word(id).expect("id in vocabulary"), row[id]))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub k: usize,
    pub train_log_likelihood: f64,
    pub top_words: Vec<Vec<String>>,
}

/// Trains one model per K in `k_range` (in parallel) and summarizes each.
pub fn sweep(
    docs: &[EditorDocument],
    k_range: std::ops::RangeInclusive<usize>,
    base: &Hyperparams,
    top_n: usize,
) -> Result<Vec<SweepEntry>> {
    let ks: Vec<usize> = k_range.collect();
    ks.par_iter()
        .map(|&k| {
            let model = train(docs, &Hyperparams { k, ..*base })?;
            let top_words = (0..k)
                .map(|t| {
                    top_words(&model, t, top_n)
                        .map(|ws| ws.into_iter().map(|(w, _)| w.to_string()).collect())
                })
                .collect::<Result<_>>()?;
            Ok(SweepEntry {
                k,
                train_log_likelihood: model.train_log_likelihood,
                top_words,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn doc_from(pairs: &[(usize, u32)], id: &str) -> EditorDocument {
        let mut d = EditorDocument::empty(id);
        for &(w, c) in pairs {
            d.counts[w] += c;
        }
        d
    }

    fn two_group_corpus() -> Vec<EditorDocument> {
        (0..40)
            .map(|i| {
                if i % 2 == 0 {
                    doc_from(&[(0, 4), (1, 3), (2, 5)], &format!("a{i}"))
                } else {
                    doc_from(&[(60, 4), (61, 3), (62, 5)], &format!("b{i}"))
                }
            })
            .collect()
    }

    fn small(k: usize, sweeps: usize, seed: u64) -> Hyperparams {
        Hyperparams { k, sweeps, burn_in: sweeps / 2, seed, ..Hyperparams::default() }
    }

    fn assert_stochastic(rows: &[Vec<f64>]) {
        for row in rows {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            assert!(row.iter().all(|&p| p > 0.0));
        }
    }

    #[test]
    fn single_topic_is_degenerate() {
        let docs = two_group_corpus();
        let h = small(1, 20, 3);
        let model = train(&docs, &h).unwrap();
        assert!(model.theta_train.iter().all(|r| r == &vec![1.0]));
        let n: u64 = docs.iter().map(EditorDocument::total).sum();
        let mut word_counts = vec![0u64; VOCAB_SIZE];
        for d in &docs {
            for (w, &c) in d.counts.iter().enumerate() {
                word_counts[w] += u64::from(c);
            }
        }
        for w in 0..VOCAB_SIZE {
            let expected = (word_counts[w] as f64 + h.beta) / (n as f64 + 63.0 * h.beta);
            assert_abs_diff_eq!(model.phi[0][w], expected, epsilon = 1e-15);
        }
    }

    #[test]
    fn separates_disjoint_groups() {
        let docs = two_group_corpus();
        let model = train(&docs, &small(2, 500, 9)).unwrap();
        assert_stochastic(&model.phi);
        assert_stochastic(&model.theta_train);
        let dominant = |row: &Vec<f64>| if row[0] > row[1] { 0 } else { 1 };
        let a = dominant(&model.theta_train[0]);
        let b = dominant(&model.theta_train[1]);
        assert_ne!(a, b);
        for (i, row) in model.theta_train.iter().enumerate() {
            let t = if i % 2 == 0 { a } else { b };
            assert!(row[t] >= 0.9, "doc {i}: {row:?}");
        }
    }

    #[test]
    fn training_is_deterministic() {
        let docs = two_group_corpus();
        let h = small(3, 50, 42);
        assert_eq!(train(&docs, &h).unwrap().to_json(), train(&docs, &h).unwrap().to_json());
        let other = train(&docs, &Hyperparams { seed: 43, ..h }).unwrap();
        assert_ne!(train(&docs, &h).unwrap().phi, other.phi);
    }

    #[test]
    fn averaged_estimates_are_stochastic() {
        let docs = two_group_corpus();
        let h = Hyperparams { average_samples: true, ..small(2, 60, 1) };
        let model = train(&docs, &h).unwrap();
        assert_stochastic(&model.phi);
        assert_stochastic(&model.theta_train);
    }

    #[test]
    fn training_errors() {
        assert_eq!(train(&[], &small(2, 10, 0)).unwrap_err().kind(), "training");
        let empty = vec![EditorDocument::empty("x")];
        assert_eq!(train(&empty, &small(2, 10, 0)).unwrap_err().kind(), "training");
        let docs = two_group_corpus();
        for h in [
            Hyperparams { k: 0, ..small(2, 10, 0) },
            Hyperparams { alpha: 0.0, ..small(2, 10, 0) },
            Hyperparams { beta: -1.0, ..small(2, 10, 0) },
            Hyperparams { burn_in: 10, ..small(2, 10, 0) },
        ] {
            assert_eq!(train(&docs, &h).unwrap_err().kind(), "config");
        }
        let short = EditorDocument { editor_id: "s".into(), counts: vec![1; 10] };
        assert_eq!(train(&[short], &small(2, 10, 0)).unwrap_err().kind(), "vocabulary-mismatch");
    }

    #[test]
    fn model_json_round_trips() {
        let model = train(&two_group_corpus(), &small(2, 30, 5)).unwrap();
        let text = model.to_json();
        let back = LdaModel::from_json(&text).unwrap();
        assert_eq!(back, model);
        assert_eq!(back.to_json(), text);
        let mut bad = model.clone();
        bad.vocabulary[0] = "Claim_beg".into();
        assert_eq!(LdaModel::from_json(&bad.to_json()).unwrap_err().kind(), "vocabulary-mismatch");
    }

    fn handmade_model(phi: Vec<Vec<f64>>, alpha: f64) -> LdaModel {
        let k = phi.len();
        LdaModel {
            hyperparams: Hyperparams { k, alpha, ..Hyperparams::default() },
            vocabulary: build_vocabulary().word_strings(),
            phi,
            theta_train: vec![],
            train_log_likelihood: 0.0,
        }
    }

    /// Two topics; word 0 is 10x likelier under topic 0.
    fn dominant_model() -> LdaModel {
        let mut a = vec![0.5 / 62.0; VOCAB_SIZE];
        a[0] = 0.5;
        let mut b = vec![0.95 / 62.0; VOCAB_SIZE];
        b[0] = 0.05;
        handmade_model(vec![a, b], 0.1)
    }

    /// Exact posterior mean of the smoothed mixture for `n` copies of one word,
    /// by enumerating how many tokens topic 0 receives.
    fn exact_fold_in_mean(p0: f64, p1: f64, n: usize, alpha: f64) -> f64 {
        let ln_gamma = crate::stats::ln_gamma::<f64>;
        let log_w: Vec<f64> = (0..=n)
            .map(|m| {
                let choose = ln_gamma((n + 1) as f64) - ln_gamma((m + 1) as f64) - ln_gamma((n - m + 1) as f64);
                choose + ln_gamma(m as f64 + alpha) + ln_gamma((n - m) as f64 + alpha)
                    + m as f64 * p0.ln() + (n - m) as f64 * p1.ln()
            })
            .collect();
        let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
        let z: f64 = w.iter().sum();
        (0..=n)
            .map(|m| w[m] / z * (m as f64 + alpha) / (n as f64 + 2.0 * alpha))
            .sum()
    }

    #[test]
    fn infer_dominant_word() {
        let model = dominant_model();
        let doc = doc_from(&[(0, 50)], "d");
        let oracle = exact_fold_in_mean(0.5, 0.05, 50, 0.1);
        assert!(oracle >= 0.8, "{oracle}");
        let theta = infer(&model, &doc, 100, 7).unwrap();
        assert!(theta[0] >= 0.8, "{theta:?}");
        assert_abs_diff_eq!(theta.iter().sum::<f64>(), 1.0, epsilon = 1e-9);
    }

    #[test]
    fn infer_matches_exact_posterior_on_average() {
        // weaker separation so the posterior is not a point mass
        let mut a = vec![0.9 / 62.0; VOCAB_SIZE];
        a[0] = 0.1;
        let mut b = vec![0.95 / 62.0; VOCAB_SIZE];
        b[0] = 0.05;
        let model = handmade_model(vec![a, b], 1.0);
        let doc = doc_from(&[(0, 6)], "d");
        let oracle = exact_fold_in_mean(0.1, 0.05, 6, 1.0);
        let runs = 4000;
        let mean: f64 = (0..runs)
            .map(|s| infer(&model, &doc, 20, s).unwrap()[0])
            .sum::<f64>() / runs as f64;
        assert_abs_diff_eq!(mean, oracle, epsilon = 0.01);
    }

    #[test]
    fn infer_empty_is_uniform() {
        let model = dominant_model();
        assert_eq!(infer(&model, &EditorDocument::empty("e"), 10, 1).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn infer_rejects_bad_input() {
        let model = dominant_model();
        let short = EditorDocument { editor_id: "s".into(), counts: vec![1; 62] };
        assert_eq!(infer(&model, &short, 10, 1).unwrap_err().kind(), "vocabulary-mismatch");
        assert_eq!(infer(&model, &doc_from(&[(0, 1)], "x"), 0, 1).unwrap_err().kind(), "config");
    }

    #[test]
    fn infer_all_is_order_stable() {
        let model = dominant_model();
        let docs: Vec<_> = (0..8).map(|i| doc_from(&[(i, 3), (0, 2)], "d")).collect();
        let a = infer_all(&model, &docs, 30, 11).unwrap();
        let b = infer_all(&model, &docs, 30, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn log_likelihood_examples() {
        let model = train(&two_group_corpus(), &small(1, 5, 0)).unwrap();
        let doc = doc_from(&[(7, 1)], "one");
        let ll = log_likelihood(&model, std::slice::from_ref(&doc), 10, 0).unwrap();
        assert_abs_diff_eq!(ll, model.phi[0][7].ln(), epsilon = 1e-15);

        let model = dominant_model();
        let theta = [0.3, 0.7];
        let d1 = doc_from(&[(0, 2), (5, 1), (40, 3)], "d");
        let d2 = doc_from(&[(0, 4), (5, 2), (40, 6)], "d");
        let single = doc_log_likelihood(&model, &d1, &theta);
        // direct recomputation
        let direct: f64 = [(0usize, 2.0), (5, 1.0), (40, 3.0)]
            .iter()
            .map(|&(w, c)| c * (0.3 * model.phi[0][w] + 0.7 * model.phi[1][w]).ln())
            .sum();
        assert_abs_diff_eq!(single, direct, epsilon = 1e-12);
        assert_abs_diff_eq!(doc_log_likelihood(&model, &d2, &theta), 2.0 * single, epsilon = 1e-6);
        assert!(single <= 0.0);
    }

    #[test]
    fn top_words_examples() {
        let model = dominant_model();
        let top = top_words(&model, 0, 1).unwrap();
        assert_eq!(top[0].0.id(), 0);
        assert_eq!(top_words(&model, 1, 100).unwrap().len(), 63);
        assert_eq!(top_words(&model, 2, 1).unwrap_err().kind(), "bounds");

        let uniform = handmade_model(vec![vec![1.0 / 63.0; VOCAB_SIZE]], 0.1);
        let ids: Vec<usize> = top_words(&uniform, 0, 5).unwrap().iter().map(|(w, _)| w.id()).collect();
        assert_eq!(ids, vec![0, 1, 2, 3, 4]);
        // word 0 leads topic 1 too (0.05 > 0.95/62); the tied rest follow in id order
        let ids: Vec<usize> = top_words(&model, 1, 4).unwrap().iter().map(|(w, _)| w.id()).collect();
        assert_eq!(ids, vec![0, 1, 2, 3]);
    }

    #[test]
    fn sweep_reports_each_k() {
        let entries = sweep(&two_group_corpus(), 2..=4, &small(2, 40, 1), 10).unwrap();
        assert_eq!(entries.iter().map(|e| e.k).collect::<Vec<_>>(), vec![2, 3, 4]);
        assert_eq!(entries[1].top_words.len(), 3);
        assert_eq!(entries[1].top_words[0].len(), 10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn rows_are_stochastic(
            counts in prop::collection::vec(prop::collection::vec(0u32..4, VOCAB_SIZE), 1..6),
            k in 1usize..5,
            seed in any::<u64>(),
        ) {
            let docs: Vec<EditorDocument> = counts
                .into_iter()
                .enumerate()
                .map(|(i, c)| EditorDocument { editor_id: i.to_string(), counts: c })
                .collect();
            prop_assume!(docs.iter().any(|d| d.total() > 0));
            let model = train(&docs, &small(k, 6, seed)).unwrap();
            for row in model.phi.iter().chain(&model.theta_train) {
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
                prop_assert!(row.iter().all(|&p| p > 0.0));
            }
            let theta = infer(&model, &docs[0], 5, seed).unwrap();
            prop_assert!((theta.iter().sum::<f64>() - 1.0).abs() < 1e-9);
            prop_assert!(model.train_log_likelihood <= 0.0 && model.train_log_likelihood.is_finite());
        }
    }
}
