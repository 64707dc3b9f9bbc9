use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use reclaim_core::textmetrics::{agreement, bleu, cosine, rouge_l, ActivityLabel, BleuParams, LabelSeq, TokenSeq};

const ALPHABET: [&str; 3] = ["a", "b", "c"];
const MAX_LEN: usize = 6;

fn all_sequences() -> Vec<Vec<&'static str>> {
    let mut out = vec![vec![]];
    let mut frontier = vec![vec![]];
    for _ in 0..MAX_LEN {
        let mut next = Vec::new();
        for s in &frontier {
            for t in ALPHABET {
                let mut s2: Vec<&str> = s.clone();
                s2.push(t);
                next.push(s2);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn is_subsequence(needle: &[&str], hay: &[&str]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

/// Longest common subsequence by trying every subset of `a`.
fn brute_lcs(a: &[&str], b: &[&str]) -> usize {
    (0u32..1 << a.len())
        .filter_map(|mask| {
            let pick: Vec<&str> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| a[i]).collect();
            is_subsequence(&pick, b).then_some(pick.len())
        })
        .max()
        .unwrap_or(0)
}

fn brute_rouge_f1(c: &[&str], r: &[&str]) -> f64 {
    match (c.is_empty(), r.is_empty()) {
        (true, true) => return 1.0,
        (true, false) | (false, true) => return 0.0,
        _ => {}
    }
    let l = brute_lcs(c, r) as f64;
    let (p, rec) = (l / c.len() as f64, l / r.len() as f64);
    if l == 0.0 {
        0.0
    } else {
        2.0 * p * rec / (p + rec)
    }
}

fn count_of(seq: &[&str], gram: &[&str]) -> usize {
    if gram.len() > seq.len() {
        return 0;
    }
    (0..=seq.len() - gram.len()).filter(|&i| seq[i..i + gram.len()] == *gram).count()
}

/// Sentence BLEU-4 with uniform weights: clipped precisions, add-one on
/// zero-match orders above unigrams, orders with no candidate n-grams
/// count as precision 1, brevity penalty against the single reference.
fn brute_bleu(c: &[&str], r: &[&str]) -> f64 {
    if c.is_empty() {
        return 0.0;
    }
    let mut log_sum = 0.0;
    for n in 1..=4 {
        let mut matched = 0;
        let mut total = 0;
        if c.len() >= n {
            for i in 0..=c.len() - n {
                let gram = &c[i..i + n];
                // Count each distinct gram once, at its first position.
                if (0..i).any(|j| c[j..j + n] == *gram) {
                    continue;
                }
                let in_c = count_of(c, gram);
                matched += in_c.min(count_of(r, gram));
                total += in_c;
            }
        }
        if n == 1 && matched == 0 {
            return 0.0;
        }
        let p = if matched == 0 { 1.0 / (total as f64 + 1.0) } else { matched as f64 / total as f64 };
        log_sum += p.ln();
    }
    let bp = if c.len() >= r.len() { 1.0 } else { (1.0 - r.len() as f64 / c.len() as f64).exp() };
    bp * (log_sum / 4.0).exp()
}

fn seq(s: &[&str]) -> TokenSeq {
    s.iter().collect()
}

pub fn run() -> Result<String, String> {
    let seqs = all_sequences();
    let toks: Vec<TokenSeq> = seqs.iter().map(|s| seq(s)).collect();
    let params = BleuParams::default();
    let mut pairs = 0usize;
    for (i, c) in seqs.iter().enumerate() {
        for (j, r) in seqs.iter().enumerate() {
            let got = rouge_l(&toks[i], &toks[j]).f1;
            let want = brute_rouge_f1(c, r);
            if (got - want).abs() > 1e-12 {
                return Err(format!("rouge_l {c:?} vs {r:?}: {got} != {want}"));
            }
            let got = bleu(&toks[i], std::slice::from_ref(&toks[j]), params);
            let want = brute_bleu(c, r);
            if (got - want).abs() > 1e-12 {
                return Err(format!("bleu {c:?} vs {r:?}: {got} != {want}"));
            }
            pairs += 1;
        }
    }

    // Identity scores 1 for all four metrics.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for s in toks.iter().filter(|s| !s.is_empty()).take(200) {
        let r = rouge_l(s, s).f1;
        let b = bleu(s, std::slice::from_ref(s), params);
        if r != 1.0 || (b - 1.0).abs() > 1e-12 {
            return Err(format!("identity {:?}: rouge {r} bleu {b}", s.0));
        }
    }
    for _ in 0..200 {
        let u: Vec<f64> = (0..8).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let c = cosine(&u, &u).map_err(|e| e.to_string())?;
        if (c - 1.0).abs() > 1e-12 {
            return Err(format!("cosine identity {c}"));
        }
    }
    let labels = [ActivityLabel::Marketing, ActivityLabel::Organizational, ActivityLabel::Rejected];
    let mut a = LabelSeq::default();
    for k in 0..10 {
        a.push(&format!("i{k}"), labels[k % 3]);
    }
    let same = agreement(&a, &a).map_err(|e| e.to_string())?.agreement_rate;
    if same != 1.0 {
        return Err(format!("agreement identity {same}"));
    }

    // Scale invariance.
    for _ in 0..1000 {
        let dim = rng.gen_range(1..12);
        let u: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let Ok(base) = cosine(&u, &v) else { continue };
        for alpha in [0.5, 2.0, 10.0] {
            let scaled: Vec<f64> = u.iter().map(|x| alpha * x).collect();
            let c = cosine(&scaled, &v).map_err(|e| e.to_string())?;
            if (c - base).abs() > 1e-12 {
                return Err(format!("cosine scale {alpha}: {c} vs {base}"));
            }
        }
    }

    // Hand count: 7 of 10 labels agree.
    let mut b = LabelSeq::default();
    for (k, (_, l)) in a.items.iter().enumerate() {
        let flipped = if k < 3 {
            if *l == ActivityLabel::Marketing { ActivityLabel::Organizational } else { ActivityLabel::Marketing }
        } else {
            *l
        };
        b.push(&format!("i{k}"), flipped);
    }
    let rate = agreement(&a, &b).map_err(|e| e.to_string())?.agreement_rate;
    if (rate - 0.7).abs() > 1e-12 {
        return Err(format!("7/10 agreement gave {rate}"));
    }
    Ok(format!("{pairs} exhaustive pairs, identity, scale invariance and 7/10 agreement"))
}
