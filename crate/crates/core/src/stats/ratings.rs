//! Rating records, per-match aggregation and the evaluation report.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write as _;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{cronbach_alpha, one_way_anova, pearson, tukey_hsd, AnovaResult, CorrelationResult, StatsError, TukeyResult};
use crate::search::Method;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Relevance,
    Distance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatingRecord {
    pub match_id: String,
    pub scenario_id: String,
    #[serde(deserialize_with = "method_from_str")]
    pub method: Method,
    pub rater_id: String,
    pub measure: Measure,
    pub value: f64,
}

fn method_from_str<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Method, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

#[derive(Debug, Error)]
pub enum RatingsError {
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: value {value} outside [1, 5]")]
    OutOfRange { line: u64, value: f64 },
    #[error("line {line}: duplicate rating of {measure:?} for match {match_id:?} by {rater_id:?}")]
    Duplicate { line: u64, match_id: String, rater_id: String, measure: Measure },
    #[error("match {match_id:?} is listed under more than one method or scenario")]
    InconsistentMatch { match_id: String },
    #[error("match {match_id:?} has {raters} distance rating(s); at least 2 are needed")]
    MissingRaterPair { match_id: String, raters: usize },
    #[error(transparent)]
    Stats(#[from] StatsError),
}

/// Reads the ratings CSV (header `match_id,scenario_id,method,rater_id,measure,value`).
pub fn read_ratings<R: Read>(reader: R) -> Result<Vec<RatingRecord>, RatingsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let parse_err = |e: csv::Error| RatingsError::Parse { line: e.position().map_or(1, |p| p.line()), message: e.to_string() };
    let headers = rdr.headers().map_err(parse_err)?.clone();
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(parse_err)?;
        let line = row.position().map_or(0, |p| p.line());
        let rec: RatingRecord = row
            .deserialize(Some(&headers))
            .map_err(|e| RatingsError::Parse { line, message: e.to_string() })?;
        if !(1.0..=5.0).contains(&rec.value) {
            return Err(RatingsError::OutOfRange { line, value: rec.value });
        }
        if !seen.insert((rec.match_id.clone(), rec.rater_id.clone(), rec.measure)) {
            return Err(RatingsError::Duplicate { line, match_id: rec.match_id, rater_id: rec.rater_id, measure: rec.measure });
        }
        out.push(rec);
    }
    Ok(out)
}

/// One rated match with its measures averaged over raters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchScore {
    pub match_id: String,
    pub scenario_id: String,
    pub method: Method,
    pub relevance: Option<f64>,
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodStats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
}

impl MethodStats {
    fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let sd = if n > 1 {
            (values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(MethodStats { n, mean, sd })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MethodSummary {
    pub method: Method,
    pub relevance: Option<MethodStats>,
    pub distance: Option<MethodStats>,
}

/// Scenario, method, relevance values and distance values for one match.
type MatchRatings<'a> = (&'a str, Method, Vec<f64>, Vec<f64>);

/// Averages each match's ratings per measure. Distance needs at least two
/// raters per match.
pub fn match_scores(records: &[RatingRecord]) -> Result<Vec<MatchScore>, RatingsError> {
    let mut by_match: BTreeMap<&str, MatchRatings<'_>> = BTreeMap::new();
    for r in records {
        let entry = by_match
            .entry(r.match_id.as_str())
            .or_insert_with(|| (r.scenario_id.as_str(), r.method, Vec::new(), Vec::new()));
        if entry.0 != r.scenario_id || entry.1 != r.method {
            return Err(RatingsError::InconsistentMatch { match_id: r.match_id.clone() });
        }
        match r.measure {
            Measure::Relevance => entry.2.push(r.value),
            Measure::Distance => entry.3.push(r.value),
        }
    }
    let avg = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    by_match
        .into_iter()
        .map(|(id, (scenario, method, rel, dist))| {
            if dist.len() == 1 {
                return Err(RatingsError::MissingRaterPair { match_id: id.to_string(), raters: 1 });
            }
            Ok(MatchScore {
                match_id: id.to_string(),
                scenario_id: scenario.to_string(),
                method,
                relevance: avg(&rel),
                distance: avg(&dist),
            })
        })
        .collect()
}

pub fn method_summary(records: &[RatingRecord]) -> Result<Vec<MethodSummary>, RatingsError> {
    let scores = match_scores(records)?;
    Ok(Method::ALL
        .into_iter()
        .filter(|m| scores.iter().any(|s| s.method == *m))
        .map(|method| {
            let of = |f: fn(&MatchScore) -> Option<f64>| {
                let v: Vec<f64> = scores.iter().filter(|s| s.method == method).filter_map(f).collect();
                MethodStats::of(&v)
            };
            MethodSummary { method, relevance: of(|s| s.relevance), distance: of(|s| s.distance) }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureAnalysis {
    pub measure: Measure,
    pub methods: Vec<Method>,
    pub anova: AnovaResult,
    pub tukey: TukeyResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub summary: Vec<MethodSummary>,
    pub analyses: Vec<MeasureAnalysis>,
    /// Relevance against distance over all matches rated on both.
    pub overall_correlation: Option<CorrelationResult>,
    pub method_correlations: Vec<(Method, CorrelationResult)>,
    /// Inter-rater reliability of distance, when exactly two raters rated
    /// every match.
    pub distance_alpha: Option<f64>,
}

fn analyze(scores: &[MatchScore], measure: Measure) -> Option<MeasureAnalysis> {
    let pick = |s: &MatchScore| match measure {
        Measure::Relevance => s.relevance,
        Measure::Distance => s.distance,
    };
    let mut methods = Vec::new();
    let mut groups = Vec::new();
    for m in Method::ALL {
        let g: Vec<f64> = scores.iter().filter(|s| s.method == m).filter_map(pick).collect();
        if !g.is_empty() {
            methods.push(m);
            groups.push(g);
        }
    }
    let anova = one_way_anova(&groups).ok()?;
    let tukey = tukey_hsd(&groups, 0.05).ok()?;
    Some(MeasureAnalysis { measure, methods, anova, tukey })
}

fn paired(scores: &[MatchScore], method: Option<Method>) -> (Vec<f64>, Vec<f64>) {
    scores
        .iter()
        .filter(|s| method.is_none_or(|m| s.method == m))
        .filter_map(|s| Some((s.relevance?, s.distance?)))
        .unzip()
}

fn distance_alpha(records: &[RatingRecord]) -> Option<f64> {
    let dist: Vec<&RatingRecord> = records.iter().filter(|r| r.measure == Measure::Distance).collect();
    let raters: BTreeSet<&str> = dist.iter().map(|r| r.rater_id.as_str()).collect();
    if raters.len() != 2 {
        return None;
    }
    let matches: BTreeSet<&str> = dist.iter().map(|r| r.match_id.as_str()).collect();
    let lookup: BTreeMap<(&str, &str), f64> = dist.iter().map(|r| ((r.rater_id.as_str(), r.match_id.as_str()), r.value)).collect();
    let matrix: Option<Vec<Vec<f64>>> = raters
        .iter()
        .map(|rater| matches.iter().map(|m| lookup.get(&(*rater, *m)).copied()).collect())
        .collect();
    cronbach_alpha(&matrix?).ok()
}

pub fn eval_report(records: &[RatingRecord]) -> Result<EvalReport, RatingsError> {
    let scores = match_scores(records)?;
    let summary = method_summary(records)?;
    let analyses = [Measure::Relevance, Measure::Distance]
        .into_iter()
        .filter_map(|m| analyze(&scores, m))
        .collect();
    let (x, y) = paired(&scores, None);
    let overall_correlation = pearson(&x, &y).ok();
    let method_correlations = Method::ALL
        .into_iter()
        .filter_map(|m| {
            let (x, y) = paired(&scores, Some(m));
            pearson(&x, &y).ok().map(|c| (m, c))
        })
        .collect();
    Ok(EvalReport { summary, analyses, overall_correlation, method_correlations, distance_alpha: distance_alpha(records) })
}

fn fmt_stats(s: &Option<MethodStats>) -> String {
    match s {
        Some(s) => format!("{}\t{:.2}\t{:.2}", s.n, s.mean, s.sd),
        None => "0\t\t".to_string(),
    }
}

impl EvalReport {
    /// Tab-separated tables for reading; values rounded for display.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        out.push_str("# method summary\nmethod\trelevance_n\trelevance_mean\trelevance_sd\tdistance_n\tdistance_mean\tdistance_sd\n");
        for s in &self.summary {
            let _ = writeln!(out, "{}\t{}\t{}", s.method, fmt_stats(&s.relevance), fmt_stats(&s.distance));
        }
        for a in &self.analyses {
            let measure = serde_json::to_value(a.measure).unwrap_or_default();
            let measure = measure.as_str().unwrap_or_default();
            let _ = write!(
                out,
                "\n# anova {measure}\ndf_between\tdf_within\tF\tp\n{}\t{}\t{:.1}\t{:.3}\n",
                a.anova.df_between, a.anova.df_within, a.anova.f, a.anova.p
            );
            let _ = write!(out, "\n# tukey {measure} (q_crit = {:.3})\na\tb\tmean_diff\tq\tp_adj\tsignificant\n", a.tukey.q_crit);
            for p in &a.tukey.pairs {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{:.2}\t{:.2}\t{:.3}\t{}",
                    a.methods[p.i], a.methods[p.j], p.mean_diff, p.q_stat, p.p_adj, p.significant
                );
            }
        }
        out.push_str("\n# correlation relevance~distance\nscope\tn\tr\tci_low\tci_high\tp\n");
        let row = |scope: &str, c: &CorrelationResult| format!("{scope}\t{}\t{:.2}\t{:.2}\t{:.2}\t{:.3}\n", c.n, c.r, c.ci_low, c.ci_high, c.p);
        if let Some(c) = &self.overall_correlation {
            out.push_str(&row("all", c));
        }
        for (m, c) in &self.method_correlations {
            out.push_str(&row(m.as_str(), c));
        }
        match self.distance_alpha {
            Some(a) => {
                let _ = write!(out, "\n# reliability\ncronbach_alpha_distance\n{a:.2}\n");
            }
            None => out.push_str("\n# reliability\ncronbach_alpha_distance\nNA\n"),
        }
        out
    }

    /// One JSON object per line at full precision.
    pub fn to_json_lines(&self) -> String {
        let mut lines = Vec::new();
        for s in &self.summary {
            lines.push(serde_json::json!({ "kind": "summary", "data": s }));
        }
        for a in &self.analyses {
            lines.push(serde_json::json!({ "kind": "anova", "measure": a.measure, "methods": a.methods, "data": a.anova }));
            lines.push(serde_json::json!({ "kind": "tukey", "measure": a.measure, "methods": a.methods, "data": a.tukey }));
        }
        if let Some(c) = &self.overall_correlation {
            lines.push(serde_json::json!({ "kind": "correlation", "scope": "all", "data": c }));
        }
        for (m, c) in &self.method_correlations {
            lines.push(serde_json::json!({ "kind": "correlation", "scope": m, "data": c }));
        }
        lines.push(serde_json::json!({ "kind": "reliability", "cronbach_alpha_distance": self.distance_alpha }));
        lines.into_iter().map(|v| v.to_string() + "\n").collect()
    }
}
