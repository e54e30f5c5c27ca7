//! Distributional comparison machinery used by the experiment suites:
//! two-sample Kolmogorov-Smirnov, moment tables, independence probes, binned
//! variance profiles, and joint-law checks.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A labelled sample with seed provenance; values must be finite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleSet {
    pub label: String,
    pub values: Vec<f64>,
    pub seed_note: String,
}

impl SampleSet {
    pub fn new(
        label: impl Into<String>,
        values: Vec<f64>,
        seed_note: impl Into<String>,
    ) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientData("empty sample set".into()));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InsufficientData(format!(
                "sample set contains non-finite value {bad}"
            )));
        }
        Ok(SampleSet {
            label: label.into(),
            values,
            seed_note: seed_note.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Mean, variance, and standard error of one sample.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MomentRow {
    pub mean: f64,
    pub variance: f64,
    pub stderr: f64,
}

pub fn moments(values: &[f64]) -> MomentRow {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let variance = if values.len() > 1 {
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    MomentRow {
        mean,
        variance,
        stderr: (variance / n).sqrt(),
    }
}

/// Two-sample KS comparison result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub label_a: String,
    pub label_b: String,
    pub len_a: usize,
    pub len_b: usize,
    pub statistic: f64,
    pub critical_value: f64,
    pub alpha: f64,
    pub moments_a: MomentRow,
    pub moments_b: MomentRow,
    pub pass: bool,
}

impl ComparisonReport {
    pub const CSV_HEADER: &'static str =
        "label_a,label_b,len_a,len_b,statistic,critical_value,alpha,verdict";

    /// One-line CSV row (no header) for batch sweeps.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.label_a,
            self.label_b,
            self.len_a,
            self.len_b,
            self.statistic,
            self.critical_value,
            self.alpha,
            if self.pass { "pass" } else { "fail" }
        )
    }
}

/// Asymptotic two-sample critical value `c(α)·√((m+n)/(mn))` with
/// `c(α) = √(−ln(α/2)/2)`; `c(0.01) ≈ 1.628`.
pub fn ks_critical_value(len_a: usize, len_b: usize, alpha: f64) -> f64 {
    let c = (-(alpha / 2.0).ln() / 2.0).sqrt();
    let (m, n) = (len_a as f64, len_b as f64);
    c * ((m + n) / (m * n)).sqrt()
}

/// Maximum vertical distance between the two empirical CDFs.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(f64::total_cmp);
    ys.sort_unstable_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0_f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Two-sample Kolmogorov-Smirnov test at level `alpha`; both samples need at
/// least 100 points for the asymptotic critical value to be meaningful.
pub fn ks_two_sample(a: &SampleSet, b: &SampleSet, alpha: f64) -> Result<ComparisonReport> {
    if a.len() < 100 || b.len() < 100 {
        return Err(Error::InsufficientData(format!(
            "ks test needs >= 100 samples per set, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let statistic = ks_statistic(&a.values, &b.values);
    let critical_value = ks_critical_value(a.len(), b.len(), alpha);
    Ok(ComparisonReport {
        label_a: a.label.clone(),
        label_b: b.label.clone(),
        len_a: a.len(),
        len_b: b.len(),
        statistic,
        critical_value,
        alpha,
        moments_a: moments(&a.values),
        moments_b: moments(&b.values),
        pass: statistic <= critical_value,
    })
}

fn pearson(u: &[f64], y: &[f64]) -> f64 {
    let n = u.len() as f64;
    let mu = u.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut suu = 0.0;
    let mut syy = 0.0;
    let mut suy = 0.0;
    for (a, b) in u.iter().zip(y) {
        suu += (a - mu) * (a - mu);
        syy += (b - my) * (b - my);
        suy += (a - mu) * (b - my);
    }
    suy / (suu * syy).sqrt()
}

/// Independence probe between paired samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IndependenceReport {
    /// Correlation of u with y.
    pub r_linear: f64,
    /// Correlation of u with y² (second-moment dependence probe).
    pub r_squared_probe: f64,
    /// Acceptance bound 3/√pairs.
    pub bound: f64,
    pub pairs: usize,
    pub pass: bool,
}

/// Tests |corr(u, y)| ≤ 3/√pairs and repeats with y replaced by y².
pub fn independence_check(u: &SampleSet, y: &SampleSet) -> Result<IndependenceReport> {
    if u.len() != y.len() {
        return Err(Error::InsufficientData(format!(
            "paired samples have different lengths: {} vs {}",
            u.len(),
            y.len()
        )));
    }
    if u.len() < 1000 {
        return Err(Error::InsufficientData(
            "independence check needs >= 1000 pairs".into(),
        ));
    }
    let r_linear = pearson(&u.values, &y.values);
    let y_sq: Vec<f64> = y.values.iter().map(|v| v * v).collect();
    let r_squared_probe = pearson(&u.values, &y_sq);
    let bound = 3.0 / (u.len() as f64).sqrt();
    Ok(IndependenceReport {
        r_linear,
        r_squared_probe,
        bound,
        pairs: u.len(),
        pass: r_linear.abs() <= bound && r_squared_probe.abs() <= bound,
    })
}

/// Per-bin increment variance with its standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BinVariance {
    pub variance: f64,
    pub stderr: f64,
}

/// Variance of path increments per time bin.
///
/// `rows` holds, per path, the path values at the `bins + 1` bin boundaries
/// (equally spaced on the experiment horizon, boundaries on mesh points).
pub fn binned_variance_profile(rows: &[Vec<f64>], bins: usize) -> Result<Vec<BinVariance>> {
    if bins < 2 {
        return Err(Error::Config("need at least 2 bins".into()));
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData("no paths".into()));
    }
    if rows.iter().any(|r| r.len() != bins + 1) {
        return Err(Error::Config(format!(
            "each row must carry {} boundary values",
            bins + 1
        )));
    }
    let n = rows.len() as f64;
    let mut out = Vec::with_capacity(bins);
    for b in 0..bins {
        let incs: Vec<f64> = rows.iter().map(|r| r[b + 1] - r[b]).collect();
        let m = moments(&incs);
        // sampling std of a variance estimate for near-Gaussian increments
        let stderr = m.variance * (2.0 / (n - 1.0)).sqrt();
        out.push(BinVariance {
            variance: m.variance,
            stderr,
        });
    }
    Ok(out)
}

/// Result of the joint-law check between `(Y(T), U^n(T))` pairs and
/// `(Y(T), U*(T))` pairs: KS on each marginal plus KS on the projections
/// `u ± standardized(y)`, each at level α divided by the number of
/// sub-tests (Bonferroni).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JointLawReport {
    pub marginal_y: ComparisonReport,
    pub marginal_u: ComparisonReport,
    pub projection_plus: ComparisonReport,
    pub projection_minus: ComparisonReport,
    pub alpha: f64,
    pub pass: bool,
}

fn standardized(values: &[f64]) -> Vec<f64> {
    let m = moments(values);
    let sd = m.variance.sqrt();
    values.iter().map(|v| (v - m.mean) / sd).collect()
}

/// Joint 2-D comparison of paired ensembles via marginals and the two
/// diagonal projections.
pub fn joint_law_check(
    pairs_n: &[(f64, f64)],
    pairs_star: &[(f64, f64)],
    alpha: f64,
) -> Result<JointLawReport> {
    if pairs_n.len() < 5000 || pairs_star.len() < 5000 {
        return Err(Error::InsufficientData(format!(
            "joint-law check needs >= 5000 pairs per ensemble, got {} and {}",
            pairs_n.len(),
            pairs_star.len()
        )));
    }
    let alpha_each = alpha / 4.0;
    let split = |pairs: &[(f64, f64)]| -> (Vec<f64>, Vec<f64>) {
        (
            pairs.iter().map(|p| p.0).collect(),
            pairs.iter().map(|p| p.1).collect(),
        )
    };
    let (y_n, u_n) = split(pairs_n);
    let (y_star, u_star) = split(pairs_star);
    let (zy_n, zy_star) = (standardized(&y_n), standardized(&y_star));
    let project = |u: &[f64], zy: &[f64], sign: f64| -> Vec<f64> {
        u.iter().zip(zy).map(|(a, b)| a + sign * b).collect()
    };

    let set = |label: &str, values: Vec<f64>| SampleSet::new(label, values, "derived");
    let marginal_y = ks_two_sample(&set("y_n", y_n)?, &set("y_star", y_star)?, alpha_each)?;
    let marginal_u = ks_two_sample(
        &set("u_n", u_n.clone())?,
        &set("u_star", u_star.clone())?,
        alpha_each,
    )?;
    let projection_plus = ks_two_sample(
        &set("u_n+zy", project(&u_n, &zy_n, 1.0))?,
        &set("u_star+zy", project(&u_star, &zy_star, 1.0))?,
        alpha_each,
    )?;
    let projection_minus = ks_two_sample(
        &set("u_n-zy", project(&u_n, &zy_n, -1.0))?,
        &set("u_star-zy", project(&u_star, &zy_star, -1.0))?,
        alpha_each,
    )?;
    let pass = marginal_y.pass && marginal_u.pass && projection_plus.pass && projection_minus.pass;
    Ok(JointLawReport {
        marginal_y,
        marginal_u,
        projection_plus,
        projection_minus,
        alpha,
        pass,
    })
}
