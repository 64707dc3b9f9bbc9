//! Summary-alignment and label-agreement metrics: ROUGE-L, BLEU, an
//! exact-match METEOR variant, cosine similarity and agreement rates.
//!
//! All scores lie in `[0, 1]`. Tokenisation is deterministic: lowercase,
//! then split on Unicode whitespace.

mod eval;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::{evaluate_pairs, parse_pairs, EvalReport, PairRecord, PairScores, References};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("vectors differ in dimension ({0} vs {1})")]
    Dimension(usize, usize),
    #[error("cosine is undefined for a zero or empty vector")]
    ZeroVector,
    #[error("label sequences differ in length ({0} vs {1})")]
    Length(usize, usize),
    #[error("label sequences are misaligned at position {0}")]
    Misaligned(usize),
    #[error("label sequences are empty")]
    Empty,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tokenizer {
    /// Lowercase, then split on whitespace.
    #[default]
    Lowercase,
    /// Split on whitespace only.
    CaseSensitive,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSeq(pub Vec<String>);

impl TokenSeq {
    pub fn new(text: &str) -> Self {
        Self::with(text, Tokenizer::default())
    }

    pub fn with(text: &str, tokenizer: Tokenizer) -> Self {
        let text = match tokenizer {
            Tokenizer::Lowercase => text.to_lowercase(),
            Tokenizer::CaseSensitive => text.to_string(),
        };
        Self(text.split_whitespace().map(str::to_string).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl<S: AsRef<str>> FromIterator<S> for TokenSeq {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        Self(iter.into_iter().map(|s| s.as_ref().to_string()).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Length of the longest common subsequence.
pub fn lcs_len(a: &[String], b: &[String]) -> usize {
    let mut row = vec![0usize; b.len() + 1];
    for x in a {
        let mut diag = 0;
        for (j, y) in b.iter().enumerate() {
            let up = row[j + 1];
            row[j + 1] = if x == y { diag + 1 } else { up.max(row[j]) };
            diag = up;
        }
    }
    row[b.len()]
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// LCS-based ROUGE-L with β = 1. Two empty sequences score 1; one empty scores 0.
pub fn rouge_l(candidate: &TokenSeq, reference: &TokenSeq) -> RougeScore {
    match (candidate.is_empty(), reference.is_empty()) {
        (true, true) => {
            return RougeScore {
                precision: 1.0,
                recall: 1.0,
                f1: 1.0,
            }
        }
        (true, false) | (false, true) => {
            return RougeScore {
                precision: 0.0,
                recall: 0.0,
                f1: 0.0,
            }
        }
        _ => {}
    }
    let l = lcs_len(&candidate.0, &reference.0) as f64;
    let p = l / candidate.len() as f64;
    let r = l / reference.len() as f64;
    RougeScore {
        precision: p,
        recall: r,
        f1: harmonic(p, r),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuParams {
    pub max_n: usize,
}

impl Default for BleuParams {
    fn default() -> Self {
        Self { max_n: 4 }
    }
}

impl BleuParams {
    pub fn describe(&self) -> String {
        format!(
            "bleu max_n={} weights=uniform smoothing=add-one-on-zero-matches(n>=2) brevity=closest-reference",
            self.max_n
        )
    }
}

fn ngram_counts(tokens: &[String], n: usize) -> BTreeMap<&[String], usize> {
    let mut counts = BTreeMap::new();
    if n > 0 && tokens.len() >= n {
        for w in tokens.windows(n) {
            *counts.entry(w).or_insert(0) += 1;
        }
    }
    counts
}

/// Clipped matches and candidate n-gram totals for one order.
fn clipped(candidate: &TokenSeq, references: &[TokenSeq], n: usize) -> (usize, usize) {
    let cand = ngram_counts(&candidate.0, n);
    let refs: Vec<_> = references.iter().map(|r| ngram_counts(&r.0, n)).collect();
    let mut matched = 0;
    let mut total = 0;
    for (gram, count) in cand {
        let max_ref = refs.iter().map(|r| r.get(gram).copied().unwrap_or(0)).max().unwrap_or(0);
        matched += count.min(max_ref);
        total += count;
    }
    (matched, total)
}

/// Reference length closest to `c`, ties going to the shorter one.
fn closest_ref_len(c: usize, references: &[TokenSeq]) -> usize {
    references
        .iter()
        .map(TokenSeq::len)
        .min_by_key(|&r| (r.abs_diff(c), r))
        .unwrap_or(0)
}

/// Combines per-order (matched, total) counts with the brevity penalty.
/// A zero match count is smoothed to `1 / (total + 1)`, so orders the
/// candidate is too short to contain contribute a precision of 1.
fn bleu_from_counts(counts: &[(usize, usize)], cand_len: usize, ref_len: usize) -> f64 {
    // Unigram precision is never smoothed, so disjoint vocabularies score 0.
    if cand_len == 0 || counts.first().is_some_and(|&(m, _)| m == 0) {
        return 0.0;
    }
    let log_p: f64 = counts
        .iter()
        .map(|&(m, t)| {
            if m == 0 {
                (1.0 / (t as f64 + 1.0)).ln()
            } else {
                (m as f64 / t as f64).ln()
            }
        })
        .sum::<f64>()
        / counts.len() as f64;
    let bp = if cand_len >= ref_len {
        1.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    };
    bp * log_p.exp()
}

/// Sentence BLEU against one or more references.
pub fn bleu(candidate: &TokenSeq, references: &[TokenSeq], params: BleuParams) -> f64 {
    if candidate.is_empty() || references.is_empty() {
        return 0.0;
    }
    let counts: Vec<_> = (1..=params.max_n).map(|n| clipped(candidate, references, n)).collect();
    bleu_from_counts(&counts, candidate.len(), closest_ref_len(candidate.len(), references))
}

/// Corpus BLEU: clipped counts and lengths pooled over all pairs before combining.
pub fn corpus_bleu(pairs: &[(TokenSeq, Vec<TokenSeq>)], params: BleuParams) -> f64 {
    let mut counts = vec![(0usize, 0usize); params.max_n];
    let (mut c_len, mut r_len) = (0, 0);
    for (cand, refs) in pairs {
        if refs.is_empty() {
            continue;
        }
        for (n, slot) in counts.iter_mut().enumerate() {
            let (m, t) = clipped(cand, refs, n + 1);
            slot.0 += m;
            slot.1 += t;
        }
        c_len += cand.len();
        r_len += closest_ref_len(cand.len(), refs);
    }
    bleu_from_counts(&counts, c_len, r_len)
}

/// Matches, chunks and lengths of a greedy exact unigram alignment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Alignment {
    pub matches: usize,
    pub chunks: usize,
    pub candidate_len: usize,
    pub reference_len: usize,
}

/// Each candidate token, left to right, takes the first unused equal reference token.
pub fn align(candidate: &TokenSeq, reference: &TokenSeq) -> Alignment {
    let mut used = vec![false; reference.len()];
    let mut pairs = Vec::new();
    for (i, tok) in candidate.0.iter().enumerate() {
        if let Some(j) = (0..reference.len()).find(|&j| !used[j] && &reference.0[j] == tok) {
            used[j] = true;
            pairs.push((i, j));
        }
    }
    let chunks = pairs
        .iter()
        .enumerate()
        .filter(|(k, (i, j))| *k == 0 || !(pairs[k - 1].0 + 1 == *i && pairs[k - 1].1 + 1 == *j))
        .count();
    Alignment {
        matches: pairs.len(),
        chunks,
        candidate_len: candidate.len(),
        reference_len: reference.len(),
    }
}

fn meteor_from(a: &Alignment) -> f64 {
    if a.matches == 0 {
        return 0.0;
    }
    let m = a.matches as f64;
    let p = m / a.candidate_len as f64;
    let r = m / a.reference_len as f64;
    let f = 10.0 * p * r / (r + 9.0 * p);
    let penalty = 0.5 * (a.chunks as f64 / m).powi(3);
    f * (1.0 - penalty)
}

/// Exact-match METEOR: recall-weighted harmonic mean times a fragmentation
/// penalty `0.5·(chunks/m)³`. There are no stem or synonym stages, so an
/// identical pair of length m scores `1 - 0.5/m³`, not 1.
pub fn meteor_lite(candidate: &TokenSeq, reference: &TokenSeq) -> f64 {
    meteor_from(&align(candidate, reference))
}

/// METEOR over pooled alignment counts.
pub fn pooled_meteor(alignments: &[Alignment]) -> f64 {
    let mut sum = Alignment::default();
    for a in alignments {
        sum.matches += a.matches;
        sum.chunks += a.chunks;
        sum.candidate_len += a.candidate_len;
        sum.reference_len += a.reference_len;
    }
    meteor_from(&sum)
}

pub fn cosine(u: &[f64], v: &[f64]) -> Result<f64, MetricError> {
    if u.len() != v.len() {
        return Err(MetricError::Dimension(u.len(), v.len()));
    }
    let dot: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let nu = u.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = v.iter().map(|b| b * b).sum::<f64>().sqrt();
    if nu == 0.0 || nv == 0.0 {
        return Err(MetricError::ZeroVector);
    }
    Ok((dot / (nu * nv)).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActivityLabel {
    Marketing,
    Organizational,
    Rejected,
}

/// Labels for a list of items, compared position by position.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSeq {
    pub items: Vec<(String, ActivityLabel)>,
}

impl LabelSeq {
    pub fn push(&mut self, id: &str, label: ActivityLabel) {
        self.items.push((id.to_string(), label));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub agreement_rate: f64,
    pub acceptance_rate_a: f64,
    pub acceptance_rate_b: f64,
}

pub fn agreement(a: &LabelSeq, b: &LabelSeq) -> Result<Agreement, MetricError> {
    if a.items.len() != b.items.len() {
        return Err(MetricError::Length(a.items.len(), b.items.len()));
    }
    if a.items.is_empty() {
        return Err(MetricError::Empty);
    }
    if let Some(pos) = a.items.iter().zip(&b.items).position(|(x, y)| x.0 != y.0) {
        return Err(MetricError::Misaligned(pos));
    }
    let n = a.items.len() as f64;
    let same = a.items.iter().zip(&b.items).filter(|(x, y)| x.1 == y.1).count() as f64;
    let accepted = |s: &LabelSeq| s.items.iter().filter(|(_, l)| *l != ActivityLabel::Rejected).count() as f64 / n;
    Ok(Agreement {
        agreement_rate: same / n,
        acceptance_rate_a: accepted(a),
        acceptance_rate_b: accepted(b),
    })
}
