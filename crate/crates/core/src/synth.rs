//! Synthetic editor corpora drawn from a known LDA generative process,
//! and scoring of learned topics against the generating ones.

use rand::Rng;
use rand_distr::{Distribution, Gamma, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lda::{stream_rng, SeededRng};
use crate::vocab::{build_vocabulary, EditorDocument, VOCAB_SIZE};

/// Largest K accepted by [`match_topics`]; it enumerates all K! assignments.
pub const MAX_MATCH_TOPICS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub phi_true: Vec<Vec<f64>>,
    pub alpha_true: f64,
    /// Per-document mixtures; left empty to have them drawn from Dirichlet(alpha_true).
    #[serde(default)]
    pub theta_true: Vec<Vec<f64>>,
    pub doc_lengths: Vec<usize>,
}

fn check_stochastic(rows: &[Vec<f64>], width: usize, what: &str) -> Result<()> {
    for (i, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::Config(format!(
                "{what} row {i} has {} entries, expected {width}",
                row.len()
            )));
        }
        if row.iter().any(|&p| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::Config(format!("{what} row {i} has a negative or non-finite entry")));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!("{what} row {i} sums to {sum}")));
        }
    }
    Ok(())
}

impl GroundTruth {
    pub fn k(&self) -> usize {
        self.phi_true.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.phi_true.is_empty() {
            return Err(Error::Config("ground truth needs at least one topic".into()));
        }
        check_stochastic(&self.phi_true, VOCAB_SIZE, "phi_true")?;
        if !(self.alpha_true > 0.0 && self.alpha_true.is_finite()) {
            return Err(Error::Config("alpha_true must be positive".into()));
        }
        if !self.theta_true.is_empty() {
            if self.theta_true.len() != self.doc_lengths.len() {
                return Err(Error::Config(format!(
                    "{} theta rows for {} documents",
                    self.theta_true.len(),
                    self.doc_lengths.len()
                )));
            }
            check_stochastic(&self.theta_true, self.k(), "theta_true")?;
        }
        Ok(())
    }
}

fn draw_index(weights: &[f64], rng: &mut SeededRng) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        acc += w;
        if u < acc {
            return i;
        }
    }
    // rounding can leave u at the total; fall back to the last positive weight
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}

/// Symmetric Dirichlet draw via normalized Gamma variates.
pub fn sample_dirichlet(k: usize, alpha: f64, rng: &mut SeededRng) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("alpha validated positive");
    let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
    let sum: f64 = draws.iter().sum();
    if sum > 0.0 && sum.is_finite() {
        draws.into_iter().map(|g| g / sum).collect()
    } else {
        // every variate underflowed: the limit is a vertex of the simplex
        let mut one_hot = vec![0.0; k];
        one_hot[rng.random_range(0..k)] = 1.0;
        one_hot
    }
}

/// Samples documents from `truth`, filling in `theta_true` when absent.
pub fn generate_corpus(truth: &GroundTruth, seed: u64) -> Result<(Vec<EditorDocument>, GroundTruth)> {
    truth.validate()?;
    let mut rng = stream_rng(seed, 1);
    let k = truth.k();
    let mut truth = truth.clone();
    if truth.theta_true.is_empty() {
        truth.theta_true = (0..truth.doc_lengths.len())
            .map(|_| sample_dirichlet(k, truth.alpha_true, &mut rng))
            .collect();
    }
    let docs = truth
        .doc_lengths
        .iter()
        .zip(&truth.theta_true)
        .enumerate()
        .map(|(d, (&len, theta))| {
            let mut doc = EditorDocument::empty(format!("synth-{d:04}"));
            for _ in 0..len {
                let topic = draw_index(theta, &mut rng);
                let word = draw_index(&truth.phi_true[topic], &mut rng);
                doc.counts[word] += 1;
            }
            doc
        })
        .collect();
    Ok((docs, truth))
}

/// Top revisions of the five roles in the reference role table, most probable first.
pub const ROLE_SHAPES: [[&str; 10]; 5] = [
    [
        "Grammar_mid", "Grammar_beg", "Word-Usage_mid", "Grammar_end", "Word-Usage_end",
        "Word-Usage_beg", "Precision_beg", "General_mid", "General_end", "Reasoning_beg",
    ],
    [
        "Word-Usage_mid", "Word-Usage_beg", "+Reasoning_mid", "Word-Usage_end", "Organization_mid",
        "-General_end", "General_end", "-Reasoning_mid", "Claims_mid", "-General_mid",
    ],
    [
        "+General_mid", "Word-Usage_mid", "-General_mid", "General_mid", "Evidence_mid",
        "Precision_mid", "-General_beg", "+General_beg", "Reasoning_mid", "+Claims_beg",
    ],
    [
        "Word-Usage_beg", "+General_end", "+Reasoning_end", "Word-Usage_end", "Organization_beg",
        "-Reasoning_end", "+Claims_end", "+Evidence_mid", "+Rebuttal_end", "Organization_mid",
    ],
    [
        "+Reasoning_mid", "-Reasoning_mid", "+Claims_mid", "+Evidence_mid", "+General_mid",
        "-General_mid", "Reasoning_mid", "-General_beg", "-Claims_mid", "+General_beg",
    ],
];

/// Share of each synthetic topic spread uniformly over the whole vocabulary.
pub const BACKGROUND_MASS: f64 = 0.1;

/// Topic row with linearly decaying weight on `words` plus a uniform floor.
pub fn cluster_row(words: &[usize]) -> Vec<f64> {
    let n = words.len();
    let weight_total = (n * (n + 1) / 2) as f64;
    let mut row = vec![BACKGROUND_MASS / VOCAB_SIZE as f64; VOCAB_SIZE];
    for (rank, &w) in words.iter().enumerate() {
        row[w] += (1.0 - BACKGROUND_MASS) * (n - rank) as f64 / weight_total;
    }
    row
}

/// K topic rows: the five reference role shapes first, then random
/// 10-word clusters for any further topics.
pub fn role_shaped_phi(k: usize, rng: &mut SeededRng) -> Vec<Vec<f64>> {
    let vocab = build_vocabulary();
    (0..k)
        .map(|t| {
            let words: Vec<usize> = match ROLE_SHAPES.get(t) {
                Some(shape) => shape
                    .iter()
                    .map(|w| vocab.id_of(w).expect("role shape word in vocabulary"))
                    .collect(),
                None => rand::seq::index::sample(rng, VOCAB_SIZE, 10).into_vec(),
            };
            cluster_row(&words)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub k: usize,
    pub docs: usize,
    pub mean_len: f64,
    pub alpha: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            k: 5,
            docs: 200,
            mean_len: 18.0,
            alpha: 0.1,
            seed: 7,
        }
    }
}

/// Builds a role-shaped ground truth with Poisson document lengths and samples from it.
pub fn synthesize(config: &SynthConfig) -> Result<(Vec<EditorDocument>, GroundTruth)> {
    if config.k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if !(config.mean_len > 0.0 && config.mean_len.is_finite()) {
        return Err(Error::Config("mean length must be positive".into()));
    }
    let mut rng = stream_rng(config.seed, 0);
    let phi_true = role_shaped_phi(config.k, &mut rng);
    let poisson = Poisson::new(config.mean_len).map_err(|e| Error::Config(e.to_string()))?;
    let doc_lengths = (0..config.docs)
        .map(|_| poisson.sample(&mut rng) as usize)
        .collect();
    let truth = GroundTruth {
        phi_true,
        alpha_true: config.alpha,
        theta_true: Vec::new(),
        doc_lengths,
    };
    generate_corpus(&truth, config.seed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicMatch {
    /// `assignment[i]` is the true topic matched to learned topic `i`.
    pub assignment: Vec<usize>,
    pub cosines: Vec<f64>,
    pub mean_cosine: f64,
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum();
    let nb: f64 = b.iter().map(|x| x * x).sum();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na * nb).sqrt()
}

/// One-to-one matching of learned to true topics maximizing total cosine,
/// by exhaustive search over all assignments.
pub fn match_topics(learned: &[Vec<f64>], truth: &[Vec<f64>]) -> Result<TopicMatch> {
    let k = learned.len();
    if truth.len() != k {
        return Err(Error::ShapeMismatch(format!(
            "{k} learned topics vs {} true topics",
            truth.len()
        )));
    }
    if k == 0 || k > MAX_MATCH_TOPICS {
        return Err(Error::Config(format!(
            "topic matching supports 1..={MAX_MATCH_TOPICS} topics, got {k}"
        )));
    }
    let width = learned[0].len();
    if learned.iter().chain(truth).any(|r| r.len() != width) {
        return Err(Error::ShapeMismatch("topic rows differ in length".into()));
    }

    let sim: Vec<Vec<f64>> = learned
        .iter()
        .map(|l| truth.iter().map(|t| cosine(l, t)).collect())
        .collect();

    struct Search<'a> {
        sim: &'a [Vec<f64>],
        current: Vec<usize>,
        used: Vec<bool>,
        best: Vec<usize>,
        best_total: f64,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, total: f64) {
            let k = self.sim.len();
            if i == k {
                if total > self.best_total {
                    self.best_total = total;
                    self.best.clone_from(&self.current);
                }
                return;
            }
            for j in 0..k {
                if !self.used[j] {
                    self.used[j] = true;
                    self.current.push(j);
                    self.go(i + 1, total + self.sim[i][j]);
                    self.current.pop();
                    self.used[j] = false;
                }
            }
        }
    }
    let mut search = Search {
        sim: &sim,
        current: Vec::with_capacity(k),
        used: vec![false; k],
        best: (0..k).collect(),
        best_total: f64::NEG_INFINITY,
    };
    search.go(0, 0.0);

    let cosines: Vec<f64> = search
        .best
        .iter()
        .enumerate()
        .map(|(i, &j)| sim[i][j])
        .collect();
    let mean_cosine = cosines.iter().sum::<f64>() / k as f64;
    Ok(TopicMatch {
        assignment: search.best,
        cosines,
        mean_cosine,
    })
}

/// Ids of every vocabulary word satisfying `pred`.
pub fn words_matching(pred: impl Fn(&crate::vocab::RevisionWord) -> bool) -> Vec<usize> {
    build_vocabulary()
        .words()
        .iter()
        .filter(|w| pred(w))
        .map(|w| w.id())
        .collect()
}
