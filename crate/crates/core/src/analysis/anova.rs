//! One-way between-group ANOVA with Cohen's f.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::AnalysisError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub label: String,
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator).
    pub sd: f64,
}

impl GroupSummary {
    pub fn new(label: impl Into<String>, n: usize, mean: f64, sd: f64) -> Self {
        GroupSummary {
            label: label.into(),
            n,
            mean,
            sd,
        }
    }

    /// Exact summary of raw values. `sd` is 0 for fewer than two values.
    pub fn from_values(label: impl Into<String>, values: &[f64]) -> Self {
        let n = values.len();
        let mean = if n == 0 {
            0.0
        } else {
            values.iter().sum::<f64>() / n as f64
        };
        let sd = if n < 2 {
            0.0
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        };
        GroupSummary::new(label, n, mean, sd)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnovaResult {
    #[serde(rename = "F")]
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p: f64,
    pub cohens_f: f64,
    pub ss_between: f64,
    pub ss_within: f64,
    pub groups: Vec<GroupSummary>,
}

/// Upper tail P(F > x) of the F distribution with `(d1, d2)` degrees of freedom.
pub fn f_upper_tail(x: f64, d1: f64, d2: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x.is_infinite() {
        return 0.0;
    }
    let dist = FisherSnedecor::new(d1, d2).expect("positive degrees of freedom");
    dist.sf(x).clamp(0.0, 1.0)
}

pub fn anova_from_summaries(groups: &[GroupSummary]) -> Result<AnovaResult, AnalysisError> {
    if groups.len() < 2 {
        return Err(AnalysisError::TooFewGroups {
            needed: 2,
            got: groups.len(),
        });
    }
    for g in groups {
        if g.n < 2 {
            return Err(AnalysisError::GroupTooSmall {
                label: g.label.clone(),
                n: g.n,
            });
        }
        if !(g.mean.is_finite() && g.sd.is_finite()) || g.sd < 0.0 {
            return Err(AnalysisError::NonFinite("group summary"));
        }
    }
    let total: usize = groups.iter().map(|g| g.n).sum();
    let grand = groups.iter().map(|g| g.n as f64 * g.mean).sum::<f64>() / total as f64;
    let ss_between: f64 = groups
        .iter()
        .map(|g| g.n as f64 * (g.mean - grand).powi(2))
        .sum();
    let ss_within: f64 = groups
        .iter()
        .map(|g| (g.n - 1) as f64 * g.sd * g.sd)
        .sum();
    let df_between = groups.len() - 1;
    let df_within = total - groups.len();

    let (f, p, cohens_f) = if ss_between == 0.0 {
        (0.0, 1.0, 0.0)
    } else if ss_within == 0.0 {
        (f64::INFINITY, 0.0, f64::INFINITY)
    } else {
        let f = (ss_between / df_between as f64) / (ss_within / df_within as f64);
        (
            f,
            f_upper_tail(f, df_between as f64, df_within as f64),
            (ss_between / ss_within).sqrt(),
        )
    };
    Ok(AnovaResult {
        f,
        df_between,
        df_within,
        p,
        cohens_f,
        ss_between,
        ss_within,
        groups: groups.to_vec(),
    })
}

/// ANOVA on raw per-group values, with sums of squares taken directly
/// from the observations.
pub fn anova_raw(groups: &[(String, Vec<f64>)]) -> Result<AnovaResult, AnalysisError> {
    if groups.iter().flat_map(|(_, v)| v).any(|v| !v.is_finite()) {
        return Err(AnalysisError::NonFinite("group values"));
    }
    let summaries: Vec<GroupSummary> = groups
        .iter()
        .map(|(label, v)| GroupSummary::from_values(label.clone(), v))
        .collect();
    // Validates group count and sizes.
    let mut result = anova_from_summaries(&summaries)?;

    let all: Vec<f64> = groups.iter().flat_map(|(_, v)| v.iter().copied()).collect();
    let grand = all.iter().sum::<f64>() / all.len() as f64;
    let ss_total: f64 = all.iter().map(|v| (v - grand).powi(2)).sum();
    let ss_within: f64 = groups
        .iter()
        .zip(&summaries)
        .map(|((_, v), g)| v.iter().map(|x| (x - g.mean).powi(2)).sum::<f64>())
        .sum();
    let ss_between = (ss_total - ss_within).max(0.0);
    let (dfb, dfw) = (result.df_between as f64, result.df_within as f64);
    if ss_between == 0.0 {
        (result.f, result.p, result.cohens_f) = (0.0, 1.0, 0.0);
    } else if ss_within == 0.0 {
        (result.f, result.p, result.cohens_f) = (f64::INFINITY, 0.0, f64::INFINITY);
    } else {
        result.f = (ss_between / dfb) / (ss_within / dfw);
        result.p = f_upper_tail(result.f, dfb, dfw);
        result.cohens_f = (ss_between / ss_within).sqrt();
    }
    result.ss_between = ss_between;
    result.ss_within = ss_within;
    Ok(result)
}
