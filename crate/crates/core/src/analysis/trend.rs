//! Hierarchical linear trend of avoidance over the movements of a trial.
//!
//! Model, per trial `i` in condition `c` and movement `m`:
//!
//! ```text
//! a[i,m]  ~ Normal(b1[i] * m + b0[i], s2)
//! b0[i]   ~ Normal(mu0[c], s0)
//! b1[i]   ~ Normal(mu1[c], s1)
//! mu0[c]  ~ Normal(0.25, 0.5^2)
//! mu1[c]  ~ Normal(0, 0.1^2)
//! s0, s1, s2 ~ HalfNormal(0.5)
//! ```
//!
//! Sampled with block Gibbs updates for each trial's `(b0, b1)`, conjugate
//! Gibbs updates for the condition means and random-walk Metropolis on
//! `log s` for the three scales. `s0` and `s1` also get a second Metropolis
//! move that rescales the trial deviations along with the scale, which keeps
//! the chain from sticking when a scale is small.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::metrics::compute_avoidance;
use crate::error::AnalysisError;
use crate::sim::TrajectoryLog;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendRecord {
    pub trial: usize,
    /// 1-based movement index over the pole tasks of the trial.
    pub m: usize,
    pub condition: String,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalData {
    pub records: Vec<TrendRecord>,
}

impl HierarchicalData {
    /// Checks ordering, condition consistency and finiteness.
    pub fn validate(&self) -> Result<(), AnalysisError> {
        let mut seen: BTreeMap<usize, (&str, usize)> = BTreeMap::new();
        for r in &self.records {
            if !r.value.is_finite() {
                return Err(AnalysisError::NonFinite("trend record"));
            }
            match seen.get_mut(&r.trial) {
                None => {
                    seen.insert(r.trial, (&r.condition, r.m));
                }
                Some((cond, last)) => {
                    if *cond != r.condition {
                        return Err(AnalysisError::ConflictingCondition { trial: r.trial });
                    }
                    if r.m <= *last {
                        return Err(AnalysisError::UnorderedMovements { trial: r.trial });
                    }
                    *last = r.m;
                }
            }
        }
        Ok(())
    }

    /// Condition labels in sorted order.
    pub fn conditions(&self) -> Vec<String> {
        let mut c: Vec<String> = self.records.iter().map(|r| r.condition.clone()).collect();
        c.sort();
        c.dedup();
        c
    }
}

/// Flattens logs into trend records, numbering pole tasks `m = 1, 2, ...`.
///
/// Returns the data and the number of pole tasks skipped for lack of an
/// a_void value.
pub fn avoidance_trend_table<'a>(
    logs: impl IntoIterator<Item = (usize, &'a TrajectoryLog)>,
) -> (HierarchicalData, usize) {
    let mut data = HierarchicalData::default();
    let mut missing = 0;
    for (trial, log) in logs {
        let condition = log
            .meta
            .condition
            .map(|c| c.label().to_string())
            .unwrap_or_default();
        let mut m = 0;
        for (task, target) in log.meta.schedule.iter().enumerate() {
            if !target.is_pole() {
                continue;
            }
            m += 1;
            match compute_avoidance(log, task) {
                Some(s) => data.records.push(TrendRecord {
                    trial,
                    m,
                    condition: condition.clone(),
                    value: s.a_void,
                }),
                None => missing += 1,
            }
        }
    }
    (data, missing)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcConfig {
    pub chains: usize,
    /// Iterations per chain, burn-in included.
    pub length: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Drop the likelihood and sample the prior.
    #[serde(default)]
    pub prior_only: bool,
}

impl Default for McmcConfig {
    fn default() -> Self {
        McmcConfig {
            chains: 4,
            length: 10_000,
            burn_in: 5_000,
            seed: 0,
            prior_only: false,
        }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<(), AnalysisError> {
        if self.chains < 2 {
            return Err(AnalysisError::BadMcmcConfig("need at least 2 chains".into()));
        }
        if self.burn_in >= self.length || self.length - self.burn_in < 4 {
            return Err(AnalysisError::BadMcmcConfig(
                "need at least 4 retained draws per chain".into(),
            ));
        }
        Ok(())
    }

    pub fn retained(&self) -> usize {
        self.length - self.burn_in
    }
}

pub const PRIOR_MU0: (f64, f64) = (0.25, 0.5);
pub const PRIOR_MU1: (f64, f64) = (0.0, 0.1);
pub const PRIOR_SIGMA_SCALE: f64 = 0.5;
/// R-hat above this is flagged in the summary.
pub const RHAT_FLAG: f64 = 1.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub mean: f64,
    pub sd: f64,
    pub ci80: [f64; 2],
    pub ci95: [f64; 2],
    pub rhat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionPosterior {
    pub condition: String,
    pub trials: usize,
    pub mu0: ParamSummary,
    pub mu1: ParamSummary,
    /// Fraction of retained `mu1` draws above zero.
    pub p_beta1_positive: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosteriorSummary {
    pub conditions: Vec<ConditionPosterior>,
    pub sigma0: ParamSummary,
    pub sigma1: ParamSummary,
    pub sigma2: ParamSummary,
    pub chains: usize,
    pub length: usize,
    pub burn_in: usize,
    pub retained_draws: usize,
    pub seed: u64,
    pub prior_only: bool,
    pub observations: usize,
    pub max_rhat: f64,
    /// Some parameter has R-hat above 1.1.
    pub rhat_flagged: bool,
    /// Mean Metropolis acceptance rate of `(s0, s1, s2)` after burn-in.
    pub sigma_acceptance: [f64; 3],
}

impl PosteriorSummary {
    pub fn condition(&self, label: &str) -> Option<&ConditionPosterior> {
        self.conditions.iter().find(|c| c.condition == label)
    }
}

/// Data rearranged per trial for the sampler.
struct Trial {
    cond: usize,
    m: Vec<f64>,
    y: Vec<f64>,
    // Sufficient statistics of the trial's regression.
    sm: f64,
    smm: f64,
    sy: f64,
    smy: f64,
    syy: f64,
}

impl Trial {
    /// Residual sum of squares of the line `b0 + b1 * m`.
    fn rss(&self, b0: f64, b1: f64) -> f64 {
        let n = self.m.len() as f64;
        self.syy - 2.0 * b0 * self.sy - 2.0 * b1 * self.smy
            + n * b0 * b0
            + 2.0 * b0 * b1 * self.sm
            + b1 * b1 * self.smm
    }
}

struct Prepared {
    trials: Vec<Trial>,
    n_cond: usize,
    n_obs: usize,
}

fn prepare(data: &HierarchicalData, conditions: &[String]) -> Prepared {
    let mut by_trial: BTreeMap<usize, Trial> = BTreeMap::new();
    for r in &data.records {
        let cond = conditions.iter().position(|c| *c == r.condition).unwrap();
        let t = by_trial.entry(r.trial).or_insert_with(|| Trial {
            cond,
            m: Vec::new(),
            y: Vec::new(),
            sm: 0.0,
            smm: 0.0,
            sy: 0.0,
            smy: 0.0,
            syy: 0.0,
        });
        let m = r.m as f64;
        t.m.push(m);
        t.y.push(r.value);
        t.sm += m;
        t.smm += m * m;
        t.sy += r.value;
        t.smy += m * r.value;
        t.syy += r.value * r.value;
    }
    Prepared {
        trials: by_trial.into_values().collect(),
        n_cond: conditions.len(),
        n_obs: data.records.len(),
    }
}

/// One chain's retained draws: `mu0[c]`, `mu1[c]`, then `s0, s1, s2`.
struct ChainDraws {
    params: Vec<Vec<f64>>,
    acceptance: [f64; 3],
}

struct State {
    b0: Vec<f64>,
    b1: Vec<f64>,
    mu0: Vec<f64>,
    mu1: Vec<f64>,
    sigma: [f64; 3],
}

impl State {
    /// Trial `i`'s coefficients with its deviation on coefficient `k`
    /// (0 intercept, 1 slope) scaled by `factor`.
    fn rescaled(&self, k: usize, factor: f64, i: usize, cond: usize) -> (f64, f64) {
        if k == 0 {
            (self.mu0[cond] + (self.b0[i] - self.mu0[cond]) * factor, self.b1[i])
        } else {
            (self.b0[i], self.mu1[cond] + (self.b1[i] - self.mu1[cond]) * factor)
        }
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn half_normal_logpdf(s: f64) -> f64 {
    -0.5 * (s / PRIOR_SIGMA_SCALE).powi(2)
}

fn run_chain(p: &Prepared, cfg: &McmcConfig, chain: usize) -> Result<ChainDraws, AnalysisError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chain as u64 + 1);
    let use_lik = !cfg.prior_only;
    let nt = p.trials.len();
    let nc = p.n_cond;

    // Overdispersed start drawn from the priors.
    let mut st = State {
        b0: vec![0.0; nt],
        b1: vec![0.0; nt],
        mu0: (0..nc)
            .map(|_| PRIOR_MU0.0 + PRIOR_MU0.1 * normal(&mut rng))
            .collect(),
        mu1: (0..nc)
            .map(|_| PRIOR_MU1.0 + PRIOR_MU1.1 * normal(&mut rng))
            .collect(),
        sigma: [0; 3].map(|_| (PRIOR_SIGMA_SCALE * normal(&mut rng)).abs().max(1e-3)),
    };
    for (i, t) in p.trials.iter().enumerate() {
        st.b0[i] = st.mu0[t.cond];
        st.b1[i] = st.mu1[t.cond];
    }

    let mut step = [0.5f64; 3];
    let mut accepted = [0usize; 3];
    let mut tried = [0usize; 3];
    let mut window_acc = [0usize; 3];
    let mut rescale_step = [0.5f64; 2];
    let mut rescale_acc = [0usize; 2];
    let retained = cfg.retained();
    let mut params = vec![Vec::with_capacity(retained); 2 * nc + 3];

    for iter in 0..cfg.length {
        // (b0, b1) per trial from the bivariate normal conditional.
        let [s0, s1, s2] = st.sigma;
        let (p0, p1) = (1.0 / (s0 * s0), 1.0 / (s1 * s1));
        let lik = if use_lik { 1.0 / (s2 * s2) } else { 0.0 };
        for (i, t) in p.trials.iter().enumerate() {
            let n = t.m.len() as f64;
            let a11 = n * lik + p0;
            let a12 = t.sm * lik;
            let a22 = t.smm * lik + p1;
            let r0 = t.sy * lik + st.mu0[t.cond] * p0;
            let r1 = t.smy * lik + st.mu1[t.cond] * p1;
            // Cholesky of the precision matrix, then solve for the mean and
            // draw through the transposed factor.
            let l11 = a11.sqrt();
            let l21 = a12 / l11;
            let l22 = (a22 - l21 * l21).sqrt();
            if !(l22.is_finite() && l22 > 0.0) {
                return Err(AnalysisError::NonFinite("trial coefficient precision"));
            }
            let w0 = r0 / l11;
            let w1 = (r1 - l21 * w0) / l22;
            let z1 = w1 + normal(&mut rng);
            let z0 = w0 + normal(&mut rng);
            let x1 = z1 / l22;
            let x0 = (z0 - l21 * x1) / l11;
            st.b0[i] = x0;
            st.b1[i] = x1;
        }

        // Condition means.
        for c in 0..nc {
            let (mut n, mut s_b0, mut s_b1) = (0.0, 0.0, 0.0);
            for (i, t) in p.trials.iter().enumerate() {
                if t.cond == c {
                    n += 1.0;
                    s_b0 += st.b0[i];
                    s_b1 += st.b1[i];
                }
            }
            let (m0, sd0) = PRIOR_MU0;
            let prec = n * p0 + 1.0 / (sd0 * sd0);
            let mean = (s_b0 * p0 + m0 / (sd0 * sd0)) / prec;
            st.mu0[c] = mean + normal(&mut rng) / prec.sqrt();
            let (m1, sd1) = PRIOR_MU1;
            let prec = n * p1 + 1.0 / (sd1 * sd1);
            let mean = (s_b1 * p1 + m1 / (sd1 * sd1)) / prec;
            st.mu1[c] = mean + normal(&mut rng) / prec.sqrt();
        }

        // Scales by Metropolis on log s with the Jacobian term.
        for k in 0..3 {
            let current = st.sigma[k];
            let proposal = current * (step[k] * normal(&mut rng)).exp();
            let log_target = |s: f64| -> f64 {
                let mut lp = half_normal_logpdf(s) + s.ln();
                match k {
                    0 => {
                        let ss: f64 = p
                            .trials
                            .iter()
                            .enumerate()
                            .map(|(i, t)| (st.b0[i] - st.mu0[t.cond]).powi(2))
                            .sum();
                        lp += -(nt as f64) * s.ln() - 0.5 * ss / (s * s);
                    }
                    1 => {
                        let ss: f64 = p
                            .trials
                            .iter()
                            .enumerate()
                            .map(|(i, t)| (st.b1[i] - st.mu1[t.cond]).powi(2))
                            .sum();
                        lp += -(nt as f64) * s.ln() - 0.5 * ss / (s * s);
                    }
                    _ if use_lik => {
                        let ss: f64 = p
                            .trials
                            .iter()
                            .enumerate()
                            .map(|(i, t)| t.rss(st.b0[i], st.b1[i]))
                            .sum();
                        lp += -(p.n_obs as f64) * s.ln() - 0.5 * ss / (s * s);
                    }
                    _ => {}
                }
                lp
            };
            let log_ratio = log_target(proposal) - log_target(current);
            if log_ratio.is_nan() {
                return Err(AnalysisError::NonFinite("scale log density"));
            }
            if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
                st.sigma[k] = proposal;
                if iter >= cfg.burn_in {
                    accepted[k] += 1;
                }
                window_acc[k] += 1;
            }
            if iter >= cfg.burn_in {
                tried[k] += 1;
            }
        }

        // Rescale s0 or s1 together with the trial deviations it governs.
        // In standardized coordinates the coefficient prior is unchanged, so
        // only the data, the scale prior and the log-scale Jacobian enter.
        for k in 0..2 {
            let factor = (rescale_step[k] * normal(&mut rng)).exp();
            let mut log_ratio = half_normal_logpdf(st.sigma[k] * factor)
                - half_normal_logpdf(st.sigma[k])
                + factor.ln();
            if use_lik {
                let s2 = st.sigma[2];
                let delta: f64 = p
                    .trials
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        let (b0, b1) = st.rescaled(k, factor, i, t.cond);
                        t.rss(b0, b1) - t.rss(st.b0[i], st.b1[i])
                    })
                    .sum();
                log_ratio -= 0.5 * delta / (s2 * s2);
            }
            if log_ratio.is_nan() {
                return Err(AnalysisError::NonFinite("rescaling log density"));
            }
            if log_ratio >= 0.0 || rng.random::<f64>().ln() < log_ratio {
                for (i, t) in p.trials.iter().enumerate() {
                    (st.b0[i], st.b1[i]) = st.rescaled(k, factor, i, t.cond);
                }
                st.sigma[k] *= factor;
                rescale_acc[k] += 1;
            }
        }

        // Adapt proposal widths toward ~0.44 acceptance during burn-in only.
        if iter < cfg.burn_in && (iter + 1) % 50 == 0 {
            for k in 0..3 {
                let rate = window_acc[k] as f64 / 50.0;
                step[k] *= if rate > 0.44 { 1.1 } else { 0.9 };
                window_acc[k] = 0;
            }
            for k in 0..2 {
                let rate = rescale_acc[k] as f64 / 50.0;
                rescale_step[k] *= if rate > 0.44 { 1.1 } else { 0.9 };
                rescale_acc[k] = 0;
            }
        }

        if iter >= cfg.burn_in {
            for c in 0..nc {
                params[c].push(st.mu0[c]);
                params[nc + c].push(st.mu1[c]);
            }
            for k in 0..3 {
                params[2 * nc + k].push(st.sigma[k]);
            }
        }
    }
    let acceptance = [0, 1, 2].map(|k| accepted[k] as f64 / tried[k].max(1) as f64);
    Ok(ChainDraws { params, acceptance })
}

/// Split-chain potential scale reduction factor.
pub fn split_rhat(chains: &[Vec<f64>]) -> f64 {
    let half = chains.iter().map(|c| c.len()).min().unwrap_or(0) / 2;
    if half < 2 {
        return f64::NAN;
    }
    let splits: Vec<&[f64]> = chains
        .iter()
        .flat_map(|c| [&c[..half], &c[half..2 * half]])
        .collect();
    let n = half as f64;
    let m = splits.len() as f64;
    let means: Vec<f64> = splits.iter().map(|s| s.iter().sum::<f64>() / n).collect();
    let grand = means.iter().sum::<f64>() / m;
    let b = n / (m - 1.0) * means.iter().map(|x| (x - grand).powi(2)).sum::<f64>();
    let w = splits
        .iter()
        .zip(&means)
        .map(|(s, mu)| s.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1.0))
        .sum::<f64>()
        / m;
    if w == 0.0 {
        return if b == 0.0 { 1.0 } else { f64::INFINITY };
    }
    let var_plus = (n - 1.0) / n * w + b / n;
    (var_plus / w).sqrt()
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn summarize(chains: &[Vec<f64>]) -> ParamSummary {
    let mut all: Vec<f64> = chains.iter().flatten().copied().collect();
    let n = all.len() as f64;
    let mean = all.iter().sum::<f64>() / n;
    let sd = (all.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    all.sort_by(f64::total_cmp);
    ParamSummary {
        mean,
        sd,
        ci80: [quantile(&all, 0.10), quantile(&all, 0.90)],
        ci95: [quantile(&all, 0.025), quantile(&all, 0.975)],
        rhat: split_rhat(chains),
    }
}

/// Samples the hierarchical trend model; chains run in parallel.
pub fn fit_hierarchical(
    data: &HierarchicalData,
    cfg: &McmcConfig,
) -> Result<PosteriorSummary, AnalysisError> {
    cfg.validate()?;
    if data.records.is_empty() {
        return Err(AnalysisError::NoData);
    }
    data.validate()?;
    let conditions = data.conditions();
    let prepared = prepare(data, &conditions);
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for r in &data.records {
        *counts.entry(r.trial).or_default() += 1;
    }
    if let Some((&trial, &n)) = counts.iter().find(|(_, &n)| n < 2) {
        return Err(AnalysisError::TrialTooShort { trial, n });
    }

    let results: Vec<Result<ChainDraws, AnalysisError>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..cfg.chains)
            .map(|k| {
                let prepared = &prepared;
                s.spawn(move || run_chain(prepared, cfg, k))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    });
    let draws = results.into_iter().collect::<Result<Vec<_>, _>>()?;

    let nc = conditions.len();
    let param = |j: usize| -> Vec<Vec<f64>> { draws.iter().map(|d| d.params[j].clone()).collect() };
    let conditions_out: Vec<ConditionPosterior> = conditions
        .iter()
        .enumerate()
        .map(|(c, label)| {
            let mu1 = param(nc + c);
            let total: usize = mu1.iter().map(|v| v.len()).sum();
            let positive = mu1.iter().flatten().filter(|&&x| x > 0.0).count();
            ConditionPosterior {
                condition: label.clone(),
                trials: prepared.trials.iter().filter(|t| t.cond == c).count(),
                mu0: summarize(&param(c)),
                mu1: summarize(&mu1),
                p_beta1_positive: positive as f64 / total as f64,
            }
        })
        .collect();
    let sigma0 = summarize(&param(2 * nc));
    let sigma1 = summarize(&param(2 * nc + 1));
    let sigma2 = summarize(&param(2 * nc + 2));

    let mut rhats: Vec<f64> = conditions_out
        .iter()
        .flat_map(|c| [c.mu0.rhat, c.mu1.rhat])
        .collect();
    rhats.extend([sigma0.rhat, sigma1.rhat, sigma2.rhat]);
    let max_rhat = rhats.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut acceptance = [0.0; 3];
    for d in &draws {
        for (acc, chain) in acceptance.iter_mut().zip(d.acceptance) {
            *acc += chain / draws.len() as f64;
        }
    }
    Ok(PosteriorSummary {
        conditions: conditions_out,
        sigma0,
        sigma1,
        sigma2,
        chains: cfg.chains,
        length: cfg.length,
        burn_in: cfg.burn_in,
        retained_draws: cfg.chains * cfg.retained(),
        seed: cfg.seed,
        prior_only: cfg.prior_only,
        observations: prepared.n_obs,
        max_rhat,
        rhat_flagged: !(max_rhat <= RHAT_FLAG),
        sigma_acceptance: acceptance,
    })
}

/// Synthetic trend data for recovery checks.
///
/// Each condition gets `trials` trials of `movements` movements with slope
/// `b1 ~ N(mu1, s1)`, a trial offset `N(0, s0)` on the value at the middle
/// movement, and residuals `N(0, s2)`. With
/// `antithetic`, trials come in pairs whose coefficient deviations and
/// residual sequences mirror each other around the middle movement, so the
/// noise carries no trend of its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    /// `(label, mu0, mu1)` per condition.
    pub conditions: Vec<(String, f64, f64)>,
    pub trials: usize,
    pub movements: usize,
    pub sigma: [f64; 3],
    pub antithetic: bool,
    pub seed: u64,
}

pub fn synthetic_trend_data(spec: &SyntheticSpec) -> HierarchicalData {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let [s0, s1, s2] = spec.sigma;
    let mid = (spec.movements + 1) as f64 / 2.0;
    let mut records = Vec::new();
    let mut trial = 0;
    for (label, mu0, mu1) in &spec.conditions {
        let mut i = 0;
        while i < spec.trials {
            let d1 = s1 * normal(&mut rng);
            // Keeps the value at the middle movement independent of the slope deviation.
            let d0 = s0 * normal(&mut rng) - d1 * mid;
            let eps: Vec<f64> = (0..spec.movements).map(|_| s2 * normal(&mut rng)).collect();
            let mut emit = |d0: f64, d1: f64, eps: &mut dyn Iterator<Item = f64>| {
                for (k, e) in (1..=spec.movements).zip(eps) {
                    let m = k as f64;
                    records.push(TrendRecord {
                        trial,
                        m: k,
                        condition: label.clone(),
                        value: (mu0 + d0) + (mu1 + d1) * m + e,
                    });
                }
                trial += 1;
            };
            emit(d0, d1, &mut eps.iter().copied());
            i += 1;
            if spec.antithetic && i < spec.trials {
                emit(d0 + 2.0 * d1 * mid, -d1, &mut eps.iter().rev().copied());
                i += 1;
            }
        }
    }
    HierarchicalData { records }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(mu1: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            conditions: vec![("x".into(), 0.2, mu1)],
            trials: 30,
            movements: 8,
            sigma: [0.03, 0.005, 0.03],
            antithetic: false,
            seed,
        }
    }

    fn quick() -> McmcConfig {
        McmcConfig {
            chains: 4,
            length: 3000,
            burn_in: 1000,
            seed: 11,
            prior_only: false,
        }
    }

    #[test]
    fn validation_catches_malformed_data() {
        let rec = |trial, m, c: &str| TrendRecord {
            trial,
            m,
            condition: c.into(),
            value: 0.1,
        };
        let bad_order = HierarchicalData {
            records: vec![rec(0, 2, "a"), rec(0, 1, "a")],
        };
        assert_eq!(
            bad_order.validate(),
            Err(AnalysisError::UnorderedMovements { trial: 0 })
        );
        let bad_cond = HierarchicalData {
            records: vec![rec(0, 1, "a"), rec(0, 2, "b")],
        };
        assert_eq!(
            bad_cond.validate(),
            Err(AnalysisError::ConflictingCondition { trial: 0 })
        );
        let short = HierarchicalData {
            records: vec![rec(0, 1, "a"), rec(0, 2, "a"), rec(1, 1, "a")],
        };
        assert_eq!(
            fit_hierarchical(&short, &quick()).unwrap_err(),
            AnalysisError::TrialTooShort { trial: 1, n: 1 }
        );
        assert_eq!(
            fit_hierarchical(&HierarchicalData::default(), &quick()).unwrap_err(),
            AnalysisError::NoData
        );
    }

    #[test]
    fn minimal_data_runs_with_wide_posterior() {
        let data = HierarchicalData {
            records: vec![
                TrendRecord { trial: 0, m: 1, condition: "a".into(), value: 0.2 },
                TrendRecord { trial: 0, m: 2, condition: "a".into(), value: 0.3 },
            ],
        };
        let s = fit_hierarchical(&data, &quick()).unwrap();
        assert!(s.max_rhat.is_finite());
        let c = &s.conditions[0];
        assert!(c.mu1.ci95[1] - c.mu1.ci95[0] > 0.05);
        assert!(c.mu1.ci80[0] >= c.mu1.ci95[0] && c.mu1.ci80[1] <= c.mu1.ci95[1]);
    }

    #[test]
    fn recovers_known_slope() {
        let data = synthetic_trend_data(&spec(0.02, 5));
        let s = fit_hierarchical(&data, &quick()).unwrap();
        let c = &s.conditions[0];
        assert!((c.mu1.mean - 0.02).abs() < 0.01, "{:?}", c.mu1);
        assert!(c.mu1.ci95[0] <= 0.02 && 0.02 <= c.mu1.ci95[1]);
        assert!(c.p_beta1_positive > 0.99);
        assert!(s.max_rhat < 1.05, "{}", s.max_rhat);
    }

    #[test]
    fn prior_only_reproduces_priors() {
        let data = synthetic_trend_data(&spec(0.0, 1));
        let cfg = McmcConfig {
            prior_only: true,
            length: 20_000,
            burn_in: 2_000,
            ..quick()
        };
        let s = fit_hierarchical(&data, &cfg).unwrap();
        let c = &s.conditions[0];
        // With the likelihood removed the condition means follow their priors.
        assert!((c.mu1.mean - PRIOR_MU1.0).abs() < 0.01, "{:?}", c.mu1);
        assert!((c.mu1.sd - PRIOR_MU1.1).abs() < 0.01, "{:?}", c.mu1);
        assert!((c.mu0.mean - PRIOR_MU0.0).abs() < 0.05, "{:?}", c.mu0);
        assert!((c.mu0.sd - PRIOR_MU0.1).abs() < 0.05, "{:?}", c.mu0);
        assert!((c.p_beta1_positive - 0.5).abs() < 0.05);
        // HalfNormal(0.5) has mean 0.5 * sqrt(2/pi).
        let hn_mean = PRIOR_SIGMA_SCALE * (2.0 / std::f64::consts::PI).sqrt();
        assert!((s.sigma2.mean - hn_mean).abs() < 0.03, "{:?}", s.sigma2);
    }

    #[test]
    fn rhat_of_identical_iid_chains_is_near_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let chains: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..2000).map(|_| normal(&mut rng)).collect())
            .collect();
        assert!((split_rhat(&chains) - 1.0).abs() < 0.01);
        let shifted: Vec<Vec<f64>> = chains
            .iter()
            .enumerate()
            .map(|(k, c)| c.iter().map(|x| x + 3.0 * k as f64).collect())
            .collect();
        assert!(split_rhat(&shifted) > 1.5);
    }

    #[test]
    fn antithetic_pairs_cancel_noise_trend() {
        let s = SyntheticSpec {
            antithetic: true,
            ..spec(0.0, 9)
        };
        let data = synthetic_trend_data(&s);
        // Pooled least-squares slope over all trials is exactly zero.
        let n = data.records.len() as f64;
        let mm = data.records.iter().map(|r| r.m as f64).sum::<f64>() / n;
        let my = data.records.iter().map(|r| r.value).sum::<f64>() / n;
        let sxy: f64 = data
            .records
            .iter()
            .map(|r| (r.m as f64 - mm) * (r.value - my))
            .sum();
        assert!(sxy.abs() < 1e-12);
    }
}
