use std::fmt::Write as _;
use std::io::BufRead;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    agreement, align, bleu, cosine, corpus_bleu, pooled_meteor, rouge_l, ActivityLabel, Agreement, BleuParams, LabelSeq,
    MetricError, TokenSeq,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum References {
    One(String),
    Many(Vec<String>),
}

/// One line of a `pairs.jsonl` file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub id: String,
    pub candidate: String,
    pub reference: References,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub candidate_embedding: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reference_embedding: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_a: Option<ActivityLabel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_b: Option<ActivityLabel>,
}

impl PairRecord {
    fn references(&self) -> Vec<TokenSeq> {
        match &self.reference {
            References::One(r) => vec![TokenSeq::new(r)],
            References::Many(rs) => rs.iter().map(|r| TokenSeq::new(r)).collect(),
        }
    }
}

pub fn parse_pairs(reader: impl BufRead) -> Result<Vec<PairRecord>, String> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairScores {
    pub id: String,
    pub rouge_l_precision: f64,
    pub rouge_l_recall: f64,
    pub rouge_l_f1: f64,
    pub bleu: f64,
    pub meteor_lite: f64,
    pub cosine: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub params: String,
    pub pairs: Vec<PairScores>,
    pub mean: PairScores,
    pub pooled: PairScores,
    pub agreement: Option<Agreement>,
}

fn score(rec: &PairRecord, params: BleuParams) -> Result<PairScores, MetricError> {
    let cand = TokenSeq::new(&rec.candidate);
    let refs = rec.references();
    let first = refs.first().cloned().unwrap_or_default();
    let r = rouge_l(&cand, &first);
    let cos = match (&rec.candidate_embedding, &rec.reference_embedding) {
        (Some(u), Some(v)) => Some(cosine(u, v)?),
        _ => None,
    };
    Ok(PairScores {
        id: rec.id.clone(),
        rouge_l_precision: r.precision,
        rouge_l_recall: r.recall,
        rouge_l_f1: r.f1,
        bleu: bleu(&cand, &refs, params),
        meteor_lite: super::meteor_lite(&cand, &first),
        cosine: cos,
    })
}

/// Scores every pair, then reports per-pair values, their means, and
/// pooled corpus-level values. ROUGE-L and METEOR use the first reference.
pub fn evaluate_pairs(records: &[PairRecord], params: BleuParams) -> Result<EvalReport, String> {
    let pairs: Vec<PairScores> = records
        .par_iter()
        .map(|r| score(r, params).map_err(|e| format!("pair {}: {e}", r.id)))
        .collect::<Result<_, _>>()?;
    let n = pairs.len().max(1) as f64;
    let mean_of = |f: &dyn Fn(&PairScores) -> f64| pairs.iter().map(f).sum::<f64>() / n;
    let cosines: Vec<f64> = pairs.iter().filter_map(|p| p.cosine).collect();
    let mean = PairScores {
        id: "mean".into(),
        rouge_l_precision: mean_of(&|p| p.rouge_l_precision),
        rouge_l_recall: mean_of(&|p| p.rouge_l_recall),
        rouge_l_f1: mean_of(&|p| p.rouge_l_f1),
        bleu: mean_of(&|p| p.bleu),
        meteor_lite: mean_of(&|p| p.meteor_lite),
        cosine: (!cosines.is_empty()).then(|| cosines.iter().sum::<f64>() / cosines.len() as f64),
    };

    let tokenised: Vec<(TokenSeq, Vec<TokenSeq>)> =
        records.iter().map(|r| (TokenSeq::new(&r.candidate), r.references())).collect();
    let (mut lcs, mut clen, mut rlen) = (0usize, 0usize, 0usize);
    let mut alignments = Vec::new();
    for (c, refs) in &tokenised {
        let first = refs.first().cloned().unwrap_or_default();
        lcs += super::lcs_len(&c.0, &first.0);
        clen += c.len();
        rlen += first.len();
        alignments.push(align(c, &first));
    }
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let (p, r) = (ratio(lcs, clen), ratio(lcs, rlen));
    let pooled = PairScores {
        id: "pooled".into(),
        rouge_l_precision: p,
        rouge_l_recall: r,
        rouge_l_f1: if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) },
        bleu: corpus_bleu(&tokenised, params),
        meteor_lite: pooled_meteor(&alignments),
        cosine: None,
    };

    let labelled: Vec<_> = records
        .iter()
        .filter_map(|r| Some((r.id.as_str(), r.label_a?, r.label_b?)))
        .collect();
    let agreement = if labelled.is_empty() {
        None
    } else {
        let mut a = LabelSeq::default();
        let mut b = LabelSeq::default();
        for (id, la, lb) in labelled {
            a.push(id, la);
            b.push(id, lb);
        }
        Some(agreement(&a, &b).map_err(|e| e.to_string())?)
    };

    Ok(EvalReport {
        params: format!("{}; rouge_l beta=1; meteor_lite exact-match alpha=0.9 penalty=0.5*(chunks/m)^3", params.describe()),
        pairs,
        mean,
        pooled,
        agreement,
    })
}

impl EvalReport {
    /// Per-pair rows, then `mean` and `pooled`; a `#` line records parameters.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\n", self.params);
        out.push_str("id,rouge_l_precision,rouge_l_recall,rouge_l_f1,bleu,meteor_lite,cosine\n");
        for p in self.pairs.iter().chain([&self.mean, &self.pooled]) {
            let cos = p.cosine.map(|c| format!("{c:.6}")).unwrap_or_default();
            let _ = writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                p.id, p.rouge_l_precision, p.rouge_l_recall, p.rouge_l_f1, p.bleu, p.meteor_lite, cos
            );
        }
        if let Some(a) = &self.agreement {
            let _ = writeln!(
                out,
                "# agreement_rate={:.6} acceptance_rate_a={:.6} acceptance_rate_b={:.6}",
                a.agreement_rate, a.acceptance_rate_a, a.acceptance_rate_b
            );
        }
        out
    }
}
