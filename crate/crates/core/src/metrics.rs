//! ROUGE-n, BLEU and METEOR over simply tokenized text.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, MetricsError>;

const TRAILING_PUNCT: &[char] = &['.', ',', ';', ':', '!', '?'];

/// Lower-cases, splits on whitespace and detaches trailing punctuation
/// marks as tokens of their own.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        let word = word.to_lowercase();
        let core = word.trim_end_matches(TRAILING_PUNCT);
        if !core.is_empty() {
            out.push(core.to_string());
        }
        out.extend(word[core.len()..].chars().map(|c| c.to_string()));
    }
    out
}

fn ngram_counts<'a>(tokens: &'a [String], n: usize) -> HashMap<&'a [String], usize> {
    let mut m = HashMap::new();
    if n > 0 && tokens.len() >= n {
        for g in tokens.windows(n) {
            *m.entry(g).or_insert(0) += 1;
        }
    }
    m
}

fn total(m: &HashMap<&[String], usize>) -> usize {
    m.values().sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RougeScore {
    pub recall: f64,
    pub precision: f64,
    pub f1: f64,
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

fn harmonic(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Co-occurring n-grams summed over all references; recall divides by the
/// references' n-gram totals, precision by the candidate total once per
/// reference.
pub fn rouge_n(candidate: &[String], references: &[Vec<String>], n: usize) -> Result<RougeScore> {
    if n == 0 {
        return Err(MetricsError::InvalidConfig("n must be at least 1".into()));
    }
    if references.is_empty() {
        return Err(MetricsError::InvalidInput("at least one reference is required".into()));
    }
    let cand = ngram_counts(candidate, n);
    let cand_total = total(&cand);
    let (mut matched, mut ref_total) = (0, 0);
    for r in references {
        let rc = ngram_counts(r, n);
        ref_total += total(&rc);
        matched += rc.iter().map(|(g, &c)| c.min(cand.get(g).copied().unwrap_or(0))).sum::<usize>();
    }
    let recall = ratio(matched, ref_total);
    let precision = ratio(matched, cand_total * references.len());
    Ok(RougeScore { recall, precision, f1: harmonic(precision, recall) })
}

/// Sufficient statistics of BLEU for one candidate, poolable over a corpus.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BleuStats {
    pub clipped: Vec<usize>,
    pub totals: Vec<usize>,
    pub cand_len: usize,
    pub ref_len: usize,
}

impl BleuStats {
    pub fn new(candidate: &[String], references: &[Vec<String>], max_n: usize) -> Result<Self> {
        if references.is_empty() {
            return Err(MetricsError::InvalidInput("at least one reference is required".into()));
        }
        let mut s = BleuStats { cand_len: candidate.len(), ..Default::default() };
        for n in 1..=max_n {
            let cand = ngram_counts(candidate, n);
            let refs: Vec<_> = references.iter().map(|r| ngram_counts(r, n)).collect();
            let clipped = cand
                .iter()
                .map(|(g, &c)| c.min(refs.iter().map(|r| r.get(g).copied().unwrap_or(0)).max().unwrap_or(0)))
                .sum();
            s.clipped.push(clipped);
            s.totals.push(total(&cand));
        }
        // closest reference length, the shorter one on ties
        let c = candidate.len() as i64;
        s.ref_len = references.iter().map(|r| r.len()).min_by_key(|&l| ((l as i64 - c).abs(), l)).unwrap();
        Ok(s)
    }

    pub fn add(&mut self, other: &BleuStats) {
        if self.clipped.is_empty() {
            self.clipped = vec![0; other.clipped.len()];
            self.totals = vec![0; other.totals.len()];
        }
        for i in 0..self.clipped.len().min(other.clipped.len()) {
            self.clipped[i] += other.clipped[i];
            self.totals[i] += other.totals[i];
        }
        self.cand_len += other.cand_len;
        self.ref_len += other.ref_len;
    }

    /// Modified n-gram precision p_n (1-based n).
    pub fn precision(&self, n: usize) -> f64 {
        ratio(self.clipped[n - 1], self.totals[n - 1])
    }

    pub fn brevity_penalty(&self) -> f64 {
        let (c, r) = (self.cand_len as f64, self.ref_len as f64);
        if c > r {
            1.0
        } else if c == 0.0 {
            0.0
        } else {
            (1.0 - r / c).exp()
        }
    }

    pub fn score(&self, weights: &[f64]) -> Result<f64> {
        check_weights(weights)?;
        if weights.len() > self.clipped.len() {
            return Err(MetricsError::InvalidConfig(format!("statistics cover only {} n-gram orders", self.clipped.len())));
        }
        let mut log_sum = 0.0;
        for (i, w) in weights.iter().enumerate() {
            let p = self.precision(i + 1);
            if p == 0.0 {
                return Ok(0.0);
            }
            log_sum += w * p.ln();
        }
        Ok(self.brevity_penalty() * log_sum.exp())
    }
}

fn check_weights(weights: &[f64]) -> Result<()> {
    if weights.is_empty() {
        return Err(MetricsError::InvalidConfig("BLEU needs at least one weight".into()));
    }
    let s: f64 = weights.iter().sum();
    if (s - 1.0).abs() > 1e-9 || weights.iter().any(|w| *w < 0.0) {
        return Err(MetricsError::InvalidConfig(format!("BLEU weights must be non-negative and sum to 1, got {s}")));
    }
    Ok(())
}

/// BLEU with the n-gram order given by the number of weights.
pub fn bleu(candidate: &[String], references: &[Vec<String>], weights: &[f64]) -> Result<f64> {
    check_weights(weights)?;
    BleuStats::new(candidate, references, weights.len())?.score(weights)
}

/// Uniform weights for BLEU-n.
pub fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MeteorScore {
    pub precision: f64,
    pub recall: f64,
    pub penalty: f64,
    pub score: f64,
    pub matches: usize,
    pub chunks: usize,
}

/// Alignments with at most this many matches are searched exhaustively.
pub const METEOR_EXHAUSTIVE_LIMIT: usize = 12;

fn count_chunks(pairs: &[(usize, usize)]) -> usize {
    let mut sorted = pairs.to_vec();
    sorted.sort_unstable();
    let mut chunks = 0;
    for (k, &(i, j)) in sorted.iter().enumerate() {
        if k == 0 || !(i == sorted[k - 1].0 + 1 && j == sorted[k - 1].1 + 1) {
            chunks += 1;
        }
    }
    chunks
}

fn max_matches(candidate: &[String], reference: &[String]) -> usize {
    let mut rc: HashMap<&str, usize> = HashMap::new();
    for t in reference {
        *rc.entry(t).or_insert(0) += 1;
    }
    let mut cc: HashMap<&str, usize> = HashMap::new();
    for t in candidate {
        *cc.entry(t).or_insert(0) += 1;
    }
    cc.iter().map(|(t, &c)| c.min(rc.get(t).copied().unwrap_or(0))).sum()
}

struct Search<'a> {
    cand: &'a [String],
    reference: &'a [String],
    target: usize,
    used: Vec<bool>,
    pairs: Vec<(usize, usize)>,
    best: Option<(usize, Vec<(usize, usize)>)>,
}

impl Search<'_> {
    // candidate positions are visited in order, so chunks can be counted
    // incrementally
    fn run(&mut self, i: usize, chunks: usize, remaining_matchable: usize) {
        if let Some((b, _)) = &self.best {
            if chunks >= *b {
                return;
            }
        }
        if self.pairs.len() == self.target {
            self.best = Some((chunks, self.pairs.clone()));
            return;
        }
        if i == self.cand.len() || self.pairs.len() + remaining_matchable < self.target {
            return;
        }
        let tok = &self.cand[i];
        let matchable_here = self.reference.iter().zip(&self.used).any(|(r, u)| !u && r == tok);
        let rest = remaining_matchable - usize::from(matchable_here);
        let prev = self.pairs.last().copied();
        // continuing the current chunk first finds cheap alignments early
        let mut order: Vec<usize> = (0..self.reference.len()).filter(|&j| !self.used[j] && &self.reference[j] == tok).collect();
        if let Some((pi, pj)) = prev {
            if pi + 1 == i {
                order.sort_by_key(|&j| (j != pj + 1, j));
            }
        }
        for j in order {
            let extends = matches!(prev, Some((pi, pj)) if pi + 1 == i && pj + 1 == j);
            self.used[j] = true;
            self.pairs.push((i, j));
            self.run(i + 1, chunks + usize::from(!extends), rest);
            self.pairs.pop();
            self.used[j] = false;
        }
        self.run(i + 1, chunks, rest);
    }
}

fn exhaustive_alignment(cand: &[String], reference: &[String], target: usize) -> Vec<(usize, usize)> {
    let matchable = cand.iter().filter(|t| reference.contains(t)).count();
    let mut s = Search { cand, reference, target, used: vec![false; reference.len()], pairs: Vec::new(), best: None };
    s.run(0, 0, matchable);
    s.best.map(|(_, p)| p).unwrap_or_default()
}

/// Repeatedly aligns the longest common run of unmatched tokens (earliest
/// candidate position, then earliest reference position, on ties).
fn greedy_alignment(cand: &[String], reference: &[String]) -> Vec<(usize, usize)> {
    let mut cu = vec![false; cand.len()];
    let mut ru = vec![false; reference.len()];
    let mut pairs = Vec::new();
    loop {
        let mut best = (0, 0, 0);
        for i in 0..cand.len() {
            for j in 0..reference.len() {
                let mut k = 0;
                while i + k < cand.len() && j + k < reference.len() && !cu[i + k] && !ru[j + k] && cand[i + k] == reference[j + k] {
                    k += 1;
                }
                if k > best.2 {
                    best = (i, j, k);
                }
            }
        }
        let (i, j, k) = best;
        if k == 0 {
            return pairs;
        }
        for d in 0..k {
            cu[i + d] = true;
            ru[j + d] = true;
            pairs.push((i + d, j + d));
        }
    }
}

/// METEOR with exact matches only: F_mean = 10PR/(R+9P), penalty
/// 0.5 * chunks / matches.
pub fn meteor(candidate: &[String], reference: &[String]) -> MeteorScore {
    let target = max_matches(candidate, reference);
    if target == 0 {
        return MeteorScore::default();
    }
    let pairs = if target <= METEOR_EXHAUSTIVE_LIMIT {
        exhaustive_alignment(candidate, reference, target)
    } else {
        greedy_alignment(candidate, reference)
    };
    let m = pairs.len();
    let chunks = count_chunks(&pairs);
    let p = m as f64 / candidate.len() as f64;
    let r = m as f64 / reference.len() as f64;
    let fmean = 10.0 * p * r / (r + 9.0 * p);
    let penalty = 0.5 * chunks as f64 / m as f64;
    MeteorScore { precision: p, recall: r, penalty, score: fmean * (1.0 - penalty), matches: m, chunks }
}

/// Best METEOR over several references.
pub fn meteor_multi(candidate: &[String], references: &[Vec<String>]) -> MeteorScore {
    references
        .iter()
        .map(|r| meteor(candidate, r))
        .fold(None, |best: Option<MeteorScore>, s| match best {
            Some(b) if b.score >= s.score => Some(b),
            _ => Some(s),
        })
        .unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct MetricReport {
    pub items: usize,
    /// ROUGE-1, ROUGE-2, ROUGE-3 averages.
    pub rouge: [RougeScore; 3],
    /// BLEU-1 to BLEU-4 averaged over items.
    pub bleu: [f64; 4],
    /// BLEU-1 to BLEU-4 from pooled counts and lengths.
    pub bleu_corpus: [f64; 4],
    pub meteor: MeteorScore,
}

/// Per-item metrics averaged over the corpus.
pub fn evaluate_corpus(candidates: &[String], references: &[Vec<String>]) -> Result<MetricReport> {
    if candidates.len() != references.len() {
        return Err(MetricsError::InvalidInput(format!(
            "{} candidates but {} reference sets",
            candidates.len(),
            references.len()
        )));
    }
    if candidates.is_empty() {
        return Err(MetricsError::InvalidInput("empty corpus".into()));
    }
    let n = candidates.len() as f64;
    let mut rep = MetricReport { items: candidates.len(), ..Default::default() };
    let mut pooled = BleuStats::default();
    for (c, refs) in candidates.iter().zip(references) {
        let ct = tokenize(c);
        let rt: Vec<Vec<String>> = refs.iter().map(|r| tokenize(r)).collect();
        for k in 0..3 {
            let s = rouge_n(&ct, &rt, k + 1)?;
            rep.rouge[k].recall += s.recall / n;
            rep.rouge[k].precision += s.precision / n;
            rep.rouge[k].f1 += s.f1 / n;
        }
        let stats = BleuStats::new(&ct, &rt, 4)?;
        for k in 0..4 {
            rep.bleu[k] += stats.score(&uniform_weights(k + 1))? / n;
        }
        pooled.add(&stats);
        let m = meteor_multi(&ct, &rt);
        rep.meteor.precision += m.precision / n;
        rep.meteor.recall += m.recall / n;
        rep.meteor.penalty += m.penalty / n;
        rep.meteor.score += m.score / n;
    }
    for k in 0..4 {
        rep.bleu_corpus[k] = pooled.score(&uniform_weights(k + 1))?;
    }
    Ok(rep)
}

impl MetricReport {
    /// Tab-separated table: metric, average recall, average precision, score.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("metric\trecall\tprecision\tscore\n");
        for (k, r) in self.rouge.iter().enumerate() {
            let _ = writeln!(s, "ROUGE-{}\t{:.4}\t{:.4}\t{:.4}", k + 1, r.recall, r.precision, r.f1);
        }
        for k in 0..4 {
            let _ = writeln!(s, "BLEU-{}\t-\t-\t{:.4}", k + 1, self.bleu[k]);
        }
        for k in 0..4 {
            let _ = writeln!(s, "BLEU-{} (corpus)\t-\t-\t{:.4}", k + 1, self.bleu_corpus[k]);
        }
        let m = &self.meteor;
        let _ = writeln!(s, "METEOR\t{:.4}\t{:.4}\t{:.4}", m.recall, m.precision, m.score);
        s
    }
}

/// Reference descriptions of one plan: blocks separated by blank lines.
pub fn parse_reference_blocks(text: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut cur: Vec<&str> = Vec::new();
    for line in text.lines() {
        if line.trim().is_empty() {
            if !cur.is_empty() {
                blocks.push(cur.join("\n"));
                cur.clear();
            }
        } else {
            cur.push(line);
        }
    }
    if !cur.is_empty() {
        blocks.push(cur.join("\n"));
    }
    blocks
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toks(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn tokenizer() {
        assert_eq!(tokenize("Go 6 steps."), toks("go 6 steps ."));
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("It has an area of 25.50"), toks("it has an area of 25.50"));
        assert_eq!(tokenize("Wait?!  Yes,"), toks("wait ? ! yes ,"));
    }

    #[test]
    fn rouge_examples() {
        let (c, r) = (toks("the cat sat"), toks("the cat ate"));
        let s1 = rouge_n(&c, &[r.clone()], 1).unwrap();
        assert!((s1.recall - 2.0 / 3.0).abs() < 1e-12);
        let s2 = rouge_n(&c, &[r], 2).unwrap();
        assert!((s2.recall - 0.5).abs() < 1e-12);
        let same = rouge_n(&c, &[c.clone()], 3).unwrap();
        assert_eq!((same.recall, same.precision, same.f1), (1.0, 1.0, 1.0));
        assert_eq!(rouge_n(&toks("a"), &[toks("a b")], 2).unwrap(), RougeScore::default());
    }

    #[test]
    fn bleu_examples() {
        let w = uniform_weights(4);
        let c = toks("there is a door and a room .");
        assert_eq!(bleu(&c, &[c.clone()], &w).unwrap(), 1.0);
        assert!((bleu(&toks("a a a"), &[toks("a a")], &[1.0]).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!((bleu(&toks("a"), &[toks("a b")], &[1.0]).unwrap() - (-1.0f64).exp()).abs() < 1e-12);
        assert!(matches!(bleu(&c, &[c.clone()], &[0.5, 0.4]), Err(MetricsError::InvalidConfig(_))));
        // closest reference length, shorter on ties
        let s = BleuStats::new(&toks("a b c"), &[toks("a b c d"), toks("a b")], 1).unwrap();
        assert_eq!(s.ref_len, 2);
    }

    #[test]
    fn meteor_examples() {
        let m = meteor(&toks("a b c"), &toks("a b c"));
        assert_eq!((m.precision, m.recall, m.chunks), (1.0, 1.0, 1));
        assert!((m.score - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(meteor(&toks("x y"), &toks("a b")).score, 0.0);
        let m = meteor(&toks("a x b"), &toks("a b"));
        assert_eq!((m.matches, m.chunks), (2, 2));
        assert!((m.score - 10.0 / 21.0).abs() < 1e-12);
        assert!((m.penalty - 0.5).abs() < 1e-12);
    }

    #[test]
    fn meteor_prefers_fewest_chunks() {
        // "the" could align to either occurrence; the second keeps one chunk
        let m = meteor(&toks("the cat"), &toks("the dog the cat"));
        assert_eq!((m.matches, m.chunks), (2, 1));
        let many: Vec<String> = (0..20).map(|i| format!("w{}", i % 7)).collect();
        let m = meteor(&many, &many);
        assert_eq!((m.matches, m.chunks), (20, 1));
    }

    #[test]
    fn corpus_averages() {
        let c = vec!["the cat sat".to_string(), "a b c".to_string()];
        let r = vec![vec!["the cat ate".to_string()], vec!["a b c".to_string()]];
        let rep = evaluate_corpus(&c, &r).unwrap();
        assert!((rep.rouge[0].recall - (2.0 / 3.0 + 1.0) / 2.0).abs() < 1e-12);
        assert!((rep.meteor.score - (meteor(&toks("the cat sat"), &toks("the cat ate")).score + 5.0 / 6.0) / 2.0).abs() < 1e-12);
        assert!(evaluate_corpus(&c, &r[..1]).is_err());
        let tsv = rep.to_tsv();
        assert!(tsv.starts_with("metric\trecall\tprecision\tscore\nROUGE-1\t"));
        assert_eq!(tsv.lines().count(), 1 + 3 + 8 + 1);
    }

    #[test]
    fn reference_blocks() {
        let text = "one line\nsecond\n\n\nthird block\n  \nfourth\n";
        assert_eq!(parse_reference_blocks(text), vec!["one line\nsecond", "third block", "fourth"]);
    }

    fn exhaustive_chunks(c: &[String], r: &[String]) -> (usize, usize) {
        // every injective partial matching of equal tokens
        fn go(c: &[String], r: &[String], i: usize, used: &mut Vec<bool>, pairs: &mut Vec<(usize, usize)>, best: &mut (usize, usize)) {
            if i == c.len() {
                let m = pairs.len();
                let ch = count_chunks(pairs);
                if m > best.0 || (m == best.0 && ch < best.1) {
                    *best = (m, ch);
                }
                return;
            }
            for j in 0..r.len() {
                if !used[j] && r[j] == c[i] {
                    used[j] = true;
                    pairs.push((i, j));
                    go(c, r, i + 1, used, pairs, best);
                    pairs.pop();
                    used[j] = false;
                }
            }
            go(c, r, i + 1, used, pairs, best);
        }
        let mut best = (0, usize::MAX);
        go(c, r, 0, &mut vec![false; r.len()], &mut Vec::new(), &mut best);
        best
    }

    fn words(max: usize) -> impl Strategy<Value = Vec<String>> {
        prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d"]), 0..max)
            .prop_map(|v| v.into_iter().map(String::from).collect())
    }

    proptest! {
        #[test]
        fn metric_bounds(c in words(9), r in words(9)) {
            for n in 1..=3 {
                let s = rouge_n(&c, &[r.clone()], n).unwrap();
                for v in [s.recall, s.precision, s.f1] {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
            }
            if !r.is_empty() {
                let stats = BleuStats::new(&c, &[r.clone()], 4).unwrap();
                for n in 1..=4 {
                    prop_assert!(stats.precision(n) <= 1.0);
                }
                let b = bleu(&c, &[r.clone()], &uniform_weights(2)).unwrap();
                prop_assert!((0.0..=1.0).contains(&b));
            }
            let m = meteor(&c, &r);
            prop_assert!((0.0..=1.0).contains(&m.score));
            if m.matches > 0 {
                prop_assert!(m.penalty > 0.0 && m.penalty <= 0.5);
                let fmean = 10.0 * m.precision * m.recall / (m.recall + 9.0 * m.precision);
                prop_assert!(m.score <= fmean + 1e-12);
                prop_assert_eq!((m.matches, m.chunks), exhaustive_chunks(&c, &r));
            }
        }

        #[test]
        fn self_scores_are_one(c in words(9)) {
            if c.len() >= 2 {
                prop_assert_eq!(rouge_n(&c, &[c.clone()], 2).unwrap(), RougeScore { recall: 1.0, precision: 1.0, f1: 1.0 });
                prop_assert_eq!(bleu(&c, &[c.clone()], &uniform_weights(2)).unwrap(), 1.0);
            }
        }

        #[test]
        fn clipping_caps_repetition(k in 2usize..8) {
            // "a" occurs twice in the reference; more copies only dilute p_1
            let r = toks("a b a");
            let p = |m: usize| BleuStats::new(&vec!["a".to_string(); m], &[r.clone()], 1).unwrap().precision(1);
            prop_assert!(p(k + 1) <= p(k));
            prop_assert!(p(k) <= 1.0);
        }
    }
}
