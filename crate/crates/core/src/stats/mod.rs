//! Statistical analysis of human ratings of retrieval results.

pub mod ratings;
pub mod special;

use serde::Serialize;
use thiserror::Error;

pub use ratings::{
    eval_report, method_summary, read_ratings, EvalReport, MatchScore, Measure, MethodStats, MethodSummary, RatingRecord,
};
pub use special::{beta_reg, f_sf, ptukey, q_crit, t_two_sided};

/// Two-sided 95% normal quantile.
pub const Z_975: f64 = 1.959964;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StatsError {
    #[error("need at least {needed} groups, got {got}")]
    TooFewGroups { needed: usize, got: usize },
    #[error("group {index} has {size} values; at least 2 are needed")]
    GroupTooSmall { index: usize, size: usize },
    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },
    #[error("samples have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("a sample has zero variance")]
    ZeroVariance,
    #[error("rating matrix is incomplete")]
    IncompleteMatrix,
    #[error("value {0} is not finite")]
    NonFinite(f64),
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance (n - 1 denominator).
fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

fn check_finite(groups: &[Vec<f64>]) -> Result<(), StatsError> {
    match groups.iter().flatten().find(|x| !x.is_finite()) {
        Some(&x) => Err(StatsError::NonFinite(x)),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnovaResult {
    #[serde(rename = "F")]
    pub f: f64,
    pub df_between: usize,
    pub df_within: usize,
    pub p: f64,
    pub ms_within: f64,
}

impl AnovaResult {
    /// `F(3,396) = 14.1, p = 0.000` style summary.
    pub fn display(&self) -> String {
        format!("F({},{}) = {:.1}, p = {:.3}", self.df_between, self.df_within, self.f, self.p)
    }
}

fn check_groups(groups: &[Vec<f64>]) -> Result<(), StatsError> {
    if groups.len() < 2 {
        return Err(StatsError::TooFewGroups { needed: 2, got: groups.len() });
    }
    if let Some((index, g)) = groups.iter().enumerate().find(|(_, g)| g.len() < 2) {
        return Err(StatsError::GroupTooSmall { index, size: g.len() });
    }
    check_finite(groups)
}

pub fn one_way_anova(groups: &[Vec<f64>]) -> Result<AnovaResult, StatsError> {
    check_groups(groups)?;
    let n: usize = groups.iter().map(Vec::len).sum();
    let grand = groups.iter().flatten().sum::<f64>() / n as f64;
    let ss_between: f64 = groups.iter().map(|g| g.len() as f64 * (mean(g) - grand).powi(2)).sum();
    let ss_within: f64 = groups
        .iter()
        .map(|g| {
            let m = mean(g);
            g.iter().map(|x| (x - m).powi(2)).sum::<f64>()
        })
        .sum();
    let df_between = groups.len() - 1;
    let df_within = n - groups.len();
    let ms_between = ss_between / df_between as f64;
    let ms_within = ss_within / df_within as f64;
    let scale = groups.iter().flatten().map(|x| x.abs()).fold(1.0, f64::max);
    let negligible = |ss: f64| ss <= 1e-24 * scale * scale * n as f64;
    let (f, p) = if negligible(ss_within) {
        if negligible(ss_between) {
            (0.0, 1.0)
        } else {
            (f64::INFINITY, 0.0)
        }
    } else {
        let f = ms_between / ms_within;
        (f, f_sf(f, df_between as f64, df_within as f64))
    };
    Ok(AnovaResult { f, df_between, df_within, p, ms_within })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TukeyPair {
    pub i: usize,
    pub j: usize,
    /// mean_i - mean_j
    pub mean_diff: f64,
    pub q_stat: f64,
    pub p_adj: f64,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TukeyResult {
    pub alpha: f64,
    pub q_crit: f64,
    pub df_within: usize,
    /// Set when group sizes differ and the Tukey-Kramer standard error was
    /// used.
    pub unequal_sizes: bool,
    pub pairs: Vec<TukeyPair>,
}

impl TukeyResult {
    pub fn pair(&self, i: usize, j: usize) -> Option<&TukeyPair> {
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        self.pairs.iter().find(|p| p.i == a && p.j == b)
    }

    pub fn significant(&self, i: usize, j: usize) -> bool {
        self.pair(i, j).is_some_and(|p| p.significant)
    }
}

/// Pairwise Tukey HSD comparisons for `i < j`.
pub fn tukey_hsd(groups: &[Vec<f64>], alpha: f64) -> Result<TukeyResult, StatsError> {
    let anova = one_way_anova(groups)?;
    let k = groups.len();
    let q_crit = special::q_crit(alpha, k, anova.df_within as f64);
    let unequal_sizes = groups.iter().any(|g| g.len() != groups[0].len());
    let means: Vec<f64> = groups.iter().map(|g| mean(g)).collect();
    let mut pairs = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let (ni, nj) = (groups[i].len() as f64, groups[j].len() as f64);
            let se = (anova.ms_within / 2.0 * (1.0 / ni + 1.0 / nj)).sqrt();
            let diff = means[i] - means[j];
            let q_stat = if se > 0.0 {
                diff.abs() / se
            } else if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            let p_adj = if q_stat.is_infinite() { 0.0 } else { 1.0 - ptukey(q_stat, k, anova.df_within as f64) };
            pairs.push(TukeyPair { i, j, mean_diff: diff, q_stat, p_adj: p_adj.clamp(0.0, 1.0), significant: q_stat > q_crit });
        }
    }
    Ok(TukeyResult { alpha, q_crit, df_within: anova.df_within, unequal_sizes, pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationResult {
    pub r: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p: f64,
    pub n: usize,
}

impl CorrelationResult {
    pub fn from_r(r: f64, n: usize) -> Self {
        let (ci_low, ci_high) = fisher_ci(r, n);
        CorrelationResult { r, ci_low, ci_high, p: correlation_p(r, n), n }
    }

    /// `r = -0.19, 95% CI = [-0.28, -0.09], p = 0.000` style summary.
    pub fn display(&self) -> String {
        format!("r = {:.2}, 95% CI = [{:.2}, {:.2}], p = {:.3}, n = {}", self.r, self.ci_low, self.ci_high, self.p, self.n)
    }
}

/// 95% interval for a correlation from the Fisher transform.
pub fn fisher_ci(r: f64, n: usize) -> (f64, f64) {
    if r.abs() >= 1.0 || n <= 3 {
        return if r.abs() >= 1.0 { (r, r) } else { (-1.0, 1.0) };
    }
    let z = r.atanh();
    let half = Z_975 / ((n - 3) as f64).sqrt();
    ((z - half).tanh(), (z + half).tanh())
}

/// Two-sided p-value of `r` from the t statistic with `n - 2` df.
pub fn correlation_p(r: f64, n: usize) -> f64 {
    if r.abs() >= 1.0 {
        return 0.0;
    }
    let df = n as f64 - 2.0;
    let t = r * df.sqrt() / (1.0 - r * r).sqrt();
    t_two_sided(t, df)
}

pub fn pearson(x: &[f64], y: &[f64]) -> Result<CorrelationResult, StatsError> {
    if x.len() != y.len() {
        return Err(StatsError::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 4 {
        return Err(StatsError::TooFewObservations { needed: 4, got: x.len() });
    }
    check_finite(&[x.to_vec(), y.to_vec()])?;
    let (mx, my) = (mean(x), mean(y));
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    if sxx == 0.0 || syy == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let r = (sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0);
    Ok(CorrelationResult::from_r(r, x.len()))
}

/// Cronbach's alpha over a raters x items matrix.
pub fn cronbach_alpha(ratings: &[Vec<f64>]) -> Result<f64, StatsError> {
    let k = ratings.len();
    if k < 2 {
        return Err(StatsError::TooFewGroups { needed: 2, got: k });
    }
    let items = ratings[0].len();
    if items < 2 {
        return Err(StatsError::TooFewObservations { needed: 2, got: items });
    }
    if ratings.iter().any(|r| r.len() != items) {
        return Err(StatsError::IncompleteMatrix);
    }
    check_finite(ratings)?;
    let totals: Vec<f64> = (0..items).map(|i| ratings.iter().map(|r| r[i]).sum()).collect();
    let var_total = variance(&totals);
    if var_total == 0.0 {
        return Err(StatsError::ZeroVariance);
    }
    let sum_var: f64 = ratings.iter().map(|r| variance(r)).sum();
    let k = k as f64;
    Ok(k / (k - 1.0) * (1.0 - sum_var / var_total))
}
