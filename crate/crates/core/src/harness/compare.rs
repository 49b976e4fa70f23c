//! Scheme ranking and pairwise orderings from experiment results.

use std::fmt::Write as _;

use super::experiment::{Architecture, ExperimentResults, Scheme};

#[derive(Debug, Clone, PartialEq)]
pub struct RankedScheme {
    pub scheme: Scheme,
    pub mean_db: f64,
    pub std_db: f64,
    pub trials: usize,
}

/// How a higher-ranked scheme compares with a lower-ranked one.
#[derive(Debug, Clone, PartialEq)]
pub struct PairOrdering {
    pub better: Scheme,
    pub worse: Scheme,
    pub gap_db: f64,
    /// Trials in which `better` was at least as good as `worse`.
    pub wins: usize,
    pub trials: usize,
    /// Every trial of `better` beats every trial of `worse`.
    pub disjoint: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub architecture: Architecture,
    /// Schemes by decreasing mean metric.
    pub ranking: Vec<RankedScheme>,
    pub pairs: Vec<PairOrdering>,
}

impl ComparisonReport {
    fn mean_db(&self, scheme: Scheme) -> Option<f64> {
        self.ranking.iter().find(|r| r.scheme == scheme).map(|r| r.mean_db)
    }

    /// Whether the mean metric is non-increasing along `order`.
    pub fn holds(&self, order: &[Scheme]) -> bool {
        order.windows(2).all(|w| match (self.mean_db(w[0]), self.mean_db(w[1])) {
            (Some(a), Some(b)) => a >= b,
            _ => false,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("[{}]\n", self.architecture);
        for (i, r) in self.ranking.iter().enumerate() {
            let _ = writeln!(
                out,
                "{:>2}. {:<16} {:>9.3} dB  (std {:.3} dB, {} trials)",
                i + 1,
                r.scheme.name(),
                r.mean_db,
                r.std_db,
                r.trials
            );
        }
        for p in &self.pairs {
            let _ = writeln!(
                out,
                "    {} >= {}: {:+.3} dB, {}/{} trials{}",
                p.better,
                p.worse,
                p.gap_db,
                p.wins,
                p.trials,
                if p.disjoint { ", disjoint" } else { "" }
            );
        }
        out
    }
}

/// One report per architecture present in the results.
pub fn compare_schemes(results: &ExperimentResults) -> Vec<ComparisonReport> {
    let mut archs: Vec<Architecture> = results.summaries.iter().map(|s| s.architecture).collect();
    archs.dedup();
    archs
        .into_iter()
        .map(|architecture| {
            let mut ranking: Vec<RankedScheme> = results
                .summaries
                .iter()
                .filter(|s| s.architecture == architecture)
                .map(|s| RankedScheme {
                    scheme: s.scheme,
                    mean_db: s.mean_db,
                    std_db: s.std_db,
                    trials: s.trials,
                })
                .collect();
            ranking.sort_by(|a, b| b.mean_db.total_cmp(&a.mean_db));
            let mut pairs = Vec::new();
            for (i, a) in ranking.iter().enumerate() {
                for b in &ranking[i + 1..] {
                    let va = results.values(architecture, a.scheme);
                    let vb = results.values(architecture, b.scheme);
                    let wins = va.iter().zip(&vb).filter(|(x, y)| x >= y).count();
                    let min_a = va.iter().copied().fold(f64::INFINITY, f64::min);
                    let max_b = vb.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    pairs.push(PairOrdering {
                        better: a.scheme,
                        worse: b.scheme,
                        gap_db: a.mean_db - b.mean_db,
                        wins,
                        trials: va.len().min(vb.len()),
                        disjoint: min_a > max_b,
                    });
                }
            }
            ComparisonReport { architecture, ranking, pairs }
        })
        .collect()
}
