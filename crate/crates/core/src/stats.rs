//! OLS regression, Pearson and partial correlation, Student-t p-values.
//!
//! Everything here is generic over [`Real`]; the crate root re-exports
//! `f64` aliases of the result types.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegressionResult<T> {
    pub coefficients: Vec<T>,
    pub intercept: T,
    pub r_squared: T,
    pub n: usize,
}

impl<T: Real> RegressionResult<T> {
    pub fn predictors(&self) -> usize {
        self.coefficients.len()
    }

    pub fn predict(&self, row: &[T]) -> T {
        self.coefficients
            .iter()
            .zip(row)
            .fold(self.intercept, |acc, (&b, &x)| acc + b * x)
    }

    /// Overall F-test of the regression against the intercept-only model.
    pub fn f_test_p_value(&self) -> T {
        let p = self.predictors();
        if p == 0 {
            return T::one();
        }
        let df_model = T::from_usize_lossy(p);
        let df_resid = T::from_usize_lossy(self.n - p - 1);
        if self.r_squared >= T::one() {
            return T::zero();
        }
        let f = (self.r_squared / df_model) / ((T::one() - self.r_squared) / df_resid);
        f_upper_tail(f, p, self.n - p - 1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correlation<T> {
    pub r: T,
    pub p_value: T,
    pub df: usize,
}

/// Partial correlation with its two-tailed p-value on `n - 3` degrees of freedom.
pub type PartialCorrResult<T> = Correlation<T>;

fn mean<T: Real>(v: &[T]) -> T {
    v.iter().copied().sum::<T>() / T::from_usize_lossy(v.len())
}

fn centered<T: Real>(v: &[T]) -> Vec<T> {
    let m = mean(v);
    v.iter().map(|&x| x - m).collect()
}

fn is_constant<T: Real>(v: &[T]) -> bool {
    v.iter().all(|&x| x == v[0])
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

/// Solves `a · x = b` in place by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot falls below `tol`.
fn solve<T: Real>(mut a: Vec<Vec<T>>, mut b: Vec<T>, tol: T) -> Option<Vec<T>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| {
            a[i][col]
                .abs()
                .partial_cmp(&a[j][col].abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })?;
        if !(a[pivot][col].abs() > tol) {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == T::zero() {
                continue;
            }
            for k in col..n {
                let v = a[col][k];
                a[row][k] = a[row][k] - factor * v;
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let tail: T = (row + 1..n).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// Least-squares fit of `y` on the columns of `x` plus an intercept.
///
/// `x` is row-major, `n` rows of `p` predictors. The intercept is
/// eliminated by centering, then the normal equations are solved on
/// unit-norm columns so the singularity tolerance is scale-free.
pub fn ols_fit<T: Real>(x: &[Vec<T>], y: &[T]) -> Result<RegressionResult<T>> {
    let n = y.len();
    if x.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "design has {} rows, target has {n}",
            x.len()
        )));
    }
    let p = x.first().map_or(0, Vec::len);
    if let Some(bad) = x.iter().position(|row| row.len() != p) {
        return Err(Error::ShapeMismatch(format!(
            "design row {bad} has {} columns, expected {p}",
            x[bad].len()
        )));
    }
    if n < p + 2 {
        return Err(Error::InsufficientData {
            needed: p + 2,
            got: n,
        });
    }
    if is_constant(y) {
        return Err(Error::DegenerateTarget);
    }

    let yc = centered(y);
    let y_mean = mean(y);
    let ss_tot = dot(&yc, &yc);
    if ss_tot == T::zero() {
        return Err(Error::DegenerateTarget);
    }

    let columns: Vec<Vec<T>> = (0..p)
        .map(|j| x.iter().map(|row| row[j]).collect())
        .collect();
    let col_means: Vec<T> = columns.iter().map(|c| mean(c)).collect();
    let centered_cols: Vec<Vec<T>> = columns.iter().map(|c| centered(c)).collect();
    let norms: Vec<T> = centered_cols.iter().map(|c| dot(c, c).sqrt()).collect();
    if norms.iter().any(|&s| s == T::zero()) {
        return Err(Error::SingularDesign);
    }
    let scaled: Vec<Vec<T>> = centered_cols
        .iter()
        .zip(&norms)
        .map(|(c, &s)| c.iter().map(|&v| v / s).collect())
        .collect();

    let gram: Vec<Vec<T>> = scaled
        .iter()
        .map(|a| scaled.iter().map(|b| dot(a, b)).collect())
        .collect();
    let rhs: Vec<T> = scaled.iter().map(|c| dot(c, &yc)).collect();
    let tol = T::epsilon().powf(T::lit(2.0 / 3.0));
    let scaled_beta = solve(gram, rhs, tol).ok_or(Error::SingularDesign)?;

    let coefficients: Vec<T> = scaled_beta
        .iter()
        .zip(&norms)
        .map(|(&b, &s)| b / s)
        .collect();
    let intercept = y_mean - dot(&coefficients, &col_means);

    let ss_res: T = x
        .iter()
        .zip(y)
        .map(|(row, &yi)| {
            let fitted = coefficients
                .iter()
                .zip(row)
                .fold(intercept, |acc, (&b, &v)| acc + b * v);
            (yi - fitted) * (yi - fitted)
        })
        .sum();
    let r_squared = (T::one() - ss_res / ss_tot).max(T::zero()).min(T::one());

    Ok(RegressionResult {
        coefficients,
        intercept,
        r_squared,
        n,
    })
}

/// Sample Pearson correlation.
pub fn pearson<T: Real>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch(format!(
            "vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: x.len(),
        });
    }
    if is_constant(x) || is_constant(y) {
        return Err(Error::DegenerateVariance);
    }
    let xc = centered(x);
    let yc = centered(y);
    let sxx = dot(&xc, &xc);
    let syy = dot(&yc, &yc);
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::DegenerateVariance);
    }
    let r = dot(&xc, &yc) / (sxx * syy).sqrt();
    Ok(r.max(-T::one()).min(T::one()))
}

fn correlation_p<T: Real>(r: T, df: usize) -> T {
    if r.abs() >= T::one() {
        return T::zero();
    }
    let t = r * (T::from_usize_lossy(df) / (T::one() - r * r)).sqrt();
    t_two_tailed_p(t, df)
}

/// Pearson correlation with its two-tailed p-value on `n - 2` degrees of freedom.
pub fn pearson_test<T: Real>(x: &[T], y: &[T]) -> Result<Correlation<T>> {
    let r = pearson(x, y)?;
    let df = x.len() - 2;
    Ok(Correlation {
        r,
        p_value: correlation_p(r, df),
        df,
    })
}

fn near_unit<T: Real>(r: T) -> bool {
    T::one() - r.abs() <= T::epsilon() * T::lit(1024.0)
}

/// Correlation of `x` and `y` with the linear effect of `z` removed from both.
pub fn partial_correlation<T: Real>(x: &[T], y: &[T], z: &[T]) -> Result<PartialCorrResult<T>> {
    let n = x.len();
    if y.len() != n || z.len() != n {
        return Err(Error::ShapeMismatch(format!(
            "vectors of length {n}, {} and {}",
            y.len(),
            z.len()
        )));
    }
    if n < 4 {
        return Err(Error::InsufficientData { needed: 4, got: n });
    }
    let r_xy = pearson(x, y)?;
    let r_xz = pearson(x, z)?;
    let r_yz = pearson(y, z)?;
    if near_unit(r_xz) || near_unit(r_yz) {
        return Err(Error::PerfectConfound);
    }
    let denom = ((T::one() - r_xz * r_xz) * (T::one() - r_yz * r_yz)).sqrt();
    let r = ((r_xy - r_xz * r_yz) / denom).max(-T::one()).min(T::one());
    let df = n - 3;
    Ok(Correlation {
        r,
        p_value: correlation_p(r, df),
        df,
    })
}

/// Two-tailed Student-t p-value, `2·P(T_df > |t|)`.
pub fn t_two_tailed_p<T: Real>(t: T, df: usize) -> T {
    assert!(df >= 1, "t distribution needs df >= 1");
    if t.is_nan() {
        return T::nan();
    }
    if t == T::zero() {
        return T::one();
    }
    let nu = T::from_usize_lossy(df);
    let t2 = t * t;
    if t2.is_infinite() {
        return T::zero();
    }
    let half = T::lit(0.5);
    // x = nu/(nu+t²) and 1-x computed separately to keep both tails accurate
    let x = nu / (nu + t2);
    let one_minus_x = t2 / (nu + t2);
    beta_reg_pair(half * nu, half, x, one_minus_x)
        .max(T::zero())
        .min(T::one())
}

/// Upper tail `P(F_{d1,d2} > f)`.
pub fn f_upper_tail<T: Real>(f: T, d1: usize, d2: usize) -> T {
    if f <= T::zero() {
        return T::one();
    }
    let a = T::from_usize_lossy(d1);
    let b = T::from_usize_lossy(d2);
    let half = T::lit(0.5);
    let x = b / (b + a * f);
    let one_minus_x = a * f / (b + a * f);
    beta_reg_pair(half * b, half * a, x, one_minus_x)
        .max(T::zero())
        .min(T::one())
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma<T: Real>(x: T) -> T {
    if x < T::lit(0.5) {
        // reflection: Γ(x)Γ(1-x) = π / sin(πx)
        return (T::PI() / (T::PI() * x).sin()).abs().ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (i, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (x + T::from_usize_lossy(i));
    }
    let t = x + T::lit(LANCZOS_G + 0.5);
    T::lit(0.5) * (T::lit(2.0) * T::PI()).ln() + (x + T::lit(0.5)) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta `I_x(a, b)` with `y = 1 - x` supplied by the caller.
fn beta_reg_pair<T: Real>(a: T, b: T, x: T, y: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if y <= T::zero() {
        return T::one();
    }
    let ln_front = a * x.ln() + b * y.ln() + ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b);
    let front = ln_front.exp();
    if x < (a + T::one()) / (a + b + T::lit(2.0)) {
        front * beta_continued_fraction(a, b, x) / a
    } else {
        T::one() - front * beta_continued_fraction(b, a, y) / b
    }
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn beta_reg<T: Real>(a: T, b: T, x: T) -> T {
    beta_reg_pair(a, b, x, T::one() - x)
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_continued_fraction<T: Real>(a: T, b: T, x: T) -> T {
    let tiny = T::min_positive_value() / T::epsilon();
    let eps = T::epsilon();
    let one = T::one();
    let two = T::lit(2.0);
    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = one - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = one / d;
    let mut h = d;
    for m in 1..=10_000usize {
        let m = T::from_usize_lossy(m);
        let m2 = two * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = one + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = one + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = one / d;
        let delta = d * c;
        h = h * delta;
        if (delta - one).abs() <= eps {
            break;
        }
    }
    h
}
