//! Role validation: how much per-purpose edit volume the role mixtures
//! explain, and how each role relates to score improvement.

use serde::{Deserialize, Serialize};

use crate::alignment::Revision;
use crate::error::{Error, Result};
use crate::stats::{ols_fit, partial_correlation, pearson_test, Correlation, RegressionResult};
use crate::vocab::Purpose;

pub type PurposeCounts = [f64; 9];

/// Per-purpose counts for one editor, indexed by [`Purpose::index`].
pub fn purpose_counts(revisions: &[Revision], normalize: bool) -> PurposeCounts {
    let mut counts = [0.0; 9];
    for r in revisions {
        counts[r.purpose.index()] += 1.0;
    }
    if normalize && !revisions.is_empty() {
        let total = revisions.len() as f64;
        counts.iter_mut().for_each(|c| *c /= total);
    }
    counts
}

fn is_constant(column: &[f64]) -> bool {
    column.iter().all(|&v| v == column[0])
}

/// Theta columns used as regressors.
///
/// Constant columns are dropped. Because mixture rows sum to one, the
/// remaining columns still sum to a constant and would be collinear with
/// the intercept, so the last of them is dropped as well. The explained
/// variance is unaffected: the column space is unchanged.
pub fn role_predictors(theta: &[Vec<f64>]) -> Vec<usize> {
    let k = theta.first().map_or(0, Vec::len);
    let mut keep: Vec<usize> = (0..k)
        .filter(|&j| {
            let col: Vec<f64> = theta.iter().map(|row| row[j]).collect();
            !is_constant(&col)
        })
        .collect();
    keep.pop();
    keep
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurposeFit {
    pub purpose: Purpose,
    pub r_squared: f64,
    pub p_value: f64,
    pub regression: RegressionResult<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedPurpose {
    pub purpose: Purpose,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurposeVariance {
    pub predictors: Vec<usize>,
    pub fits: Vec<PurposeFit>,
    pub skipped: Vec<SkippedPurpose>,
}

fn check_theta(theta: &[Vec<f64>]) -> Result<usize> {
    let k = theta.first().map_or(0, Vec::len);
    for (i, row) in theta.iter().enumerate() {
        if row.len() != k {
            return Err(Error::ShapeMismatch(format!("theta row {i} has {} columns, expected {k}", row.len())));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::ShapeMismatch(format!("theta row {i} sums to {sum}")));
        }
    }
    Ok(k)
}

/// Regresses each purpose's per-editor counts on the editors' role mixtures.
pub fn purpose_variance_from_counts(theta: &[Vec<f64>], counts: &[PurposeCounts]) -> Result<PurposeVariance> {
    check_theta(theta)?;
    if theta.len() != counts.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} theta rows for {} editors",
            theta.len(),
            counts.len()
        )));
    }
    let predictors = role_predictors(theta);
    let design: Vec<Vec<f64>> = theta
        .iter()
        .map(|row| predictors.iter().map(|&j| row[j]).collect())
        .collect();

    let mut fits = Vec::new();
    let mut skipped = Vec::new();
    for purpose in Purpose::ALL {
        let y: Vec<f64> = counts.iter().map(|c| c[purpose.index()]).collect();
        if y.iter().all(|&v| v == 0.0) {
            skipped.push(SkippedPurpose {
                purpose,
                reason: "no revisions with this purpose".to_string(),
            });
            continue;
        }
        match ols_fit(&design, &y) {
            Ok(regression) => fits.push(PurposeFit {
                purpose,
                r_squared: regression.r_squared,
                p_value: regression.f_test_p_value(),
                regression,
            }),
            Err(e) => {
                log::info!("purpose {purpose}: regression skipped: {e}");
                skipped.push(SkippedPurpose {
                    purpose,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok(PurposeVariance {
        predictors,
        fits,
        skipped,
    })
}

pub fn purpose_variance_analysis(
    theta: &[Vec<f64>],
    revisions_by_editor: &[Vec<Revision>],
    normalize: bool,
) -> Result<PurposeVariance> {
    let counts: Vec<PurposeCounts> = revisions_by_editor
        .iter()
        .map(|revs| purpose_counts(revs, normalize))
        .collect();
    purpose_variance_from_counts(theta, &counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleCorrelation {
    pub role: usize,
    pub result: Option<Correlation<f64>>,
    /// Why no correlation was computed for this role.
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementAnalysis {
    pub score_corr: Correlation<f64>,
    pub roles: Vec<RoleCorrelation>,
}

/// Partial correlation of each role's probability with Score2, controlling Score1.
pub fn improvement_correlation_analysis(
    theta: &[Vec<f64>],
    score1: &[f64],
    score2: &[f64],
) -> Result<ImprovementAnalysis> {
    let k = check_theta(theta)?;
    let n = theta.len();
    if score1.len() != n || score2.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "{n} theta rows, {} Score1 and {} Score2 values",
            score1.len(),
            score2.len()
        )));
    }
    if n < 4 {
        return Err(Error::InsufficientData { needed: 4, got: n });
    }
    let score_corr = pearson_test(score1, score2)?;
    if 1.0 - score_corr.r.abs() <= 1e-12 {
        return Err(Error::PerfectConfound);
    }
    let roles = (0..k)
        .map(|role| {
            let column: Vec<f64> = theta.iter().map(|row| row[role]).collect();
            match partial_correlation(&column, score2, score1) {
                Ok(result) => RoleCorrelation {
                    role,
                    result: Some(result),
                    flag: None,
                },
                Err(e) => RoleCorrelation {
                    role,
                    result: None,
                    flag: Some(match e {
                        Error::DegenerateVariance => {
                            "degenerate: role probability is constant across editors".to_string()
                        }
                        other => other.to_string(),
                    }),
                },
            }
        })
        .collect();
    Ok(ImprovementAnalysis { score_corr, roles })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PurposeRow {
    pub purpose: Purpose,
    pub r_squared: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoleRow {
    pub role: usize,
    pub label: String,
    pub r: Option<f64>,
    pub p_value: Option<f64>,
    pub flag: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    /// Editors with both a role mixture and scores.
    pub n: usize,
    pub k: usize,
    pub normalized: bool,
    pub purpose_r2: Vec<PurposeRow>,
    pub skipped_purposes: Vec<SkippedPurpose>,
    pub score_corr: Option<Correlation<f64>>,
    pub role_partial: Vec<RoleRow>,
}

/// Default role labels `Topic 0..K-1`.
pub fn default_labels(k: usize) -> Vec<String> {
    (0..k).map(|i| format!("Topic {i}")).collect()
}

/// Runs both analyses over the scored editors and assembles the report.
///
/// Too few editors for an analysis is recorded in the report rather than
/// raised; structural problems and a perfect Score1/Score2 confound are errors.
pub fn validate(
    theta: &[Vec<f64>],
    revisions_by_editor: &[Vec<Revision>],
    score1: &[f64],
    score2: &[f64],
    labels: &[String],
    normalize: bool,
) -> Result<ValidationReport> {
    let k = check_theta(theta)?;
    if labels.len() != k {
        return Err(Error::Config(format!("{} role labels for {k} roles", labels.len())));
    }
    let variance = purpose_variance_analysis(theta, revisions_by_editor, normalize)?;

    let (score_corr, role_partial) = match improvement_correlation_analysis(theta, score1, score2) {
        Ok(analysis) => {
            let rows = analysis
                .roles
                .into_iter()
                .map(|rc| RoleRow {
                    label: labels[rc.role].clone(),
                    role: rc.role,
                    r: rc.result.map(|c| c.r),
                    p_value: rc.result.map(|c| c.p_value),
                    flag: rc.flag,
                })
                .collect();
            (Some(analysis.score_corr), rows)
        }
        Err(e @ Error::InsufficientData { .. }) => {
            let rows = (0..k)
                .map(|role| RoleRow {
                    role,
                    label: labels[role].clone(),
                    r: None,
                    p_value: None,
                    flag: Some(e.to_string()),
                })
                .collect();
            (None, rows)
        }
        Err(e) => return Err(e),
    };

    Ok(ValidationReport {
        n: theta.len(),
        k,
        normalized: normalize,
        purpose_r2: variance
            .fits
            .iter()
            .map(|f| PurposeRow {
                purpose: f.purpose,
                r_squared: f.r_squared,
                p_value: f.p_value,
            })
            .collect(),
        skipped_purposes: variance.skipped,
        score_corr,
        role_partial,
    })
}
