//! Seeded synthetic corpora with planted sequential patterns, and recall of a
//! ranking against the planted ground truth.
//!
//! Item probabilities follow a flat Dirichlet. Background records draw their
//! length from a shifted Poisson and their items i.i.d. from the item
//! distribution. Each planted pattern has its own embedding probability; a
//! record that receives a pattern gets its items spliced in at uniformly
//! chosen slots, keeping both the record's and the pattern's order.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::{BufRead, Write};

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{is_subsequence, ItemTable, SequenceDatabase};
use crate::error::{Error, Result};
use crate::expectation::ScoredPattern;
use crate::fraction::Fraction;

#[derive(Clone, Debug, PartialEq)]
pub struct GenConfig {
    pub vocab_size: usize,
    pub n_sequences: usize,
    /// Record length is `Poisson(base_length_rate) + 1`.
    pub base_length_rate: f64,
    pub n_patterns: usize,
    /// Pattern length is `Poisson(pattern_length_rate) + 2`.
    pub pattern_length_rate: f64,
    pub pattern_prob_range: (f64, f64),
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            vocab_size: 10,
            n_sequences: 10_000,
            base_length_rate: 9.0,
            n_patterns: 1,
            pattern_length_rate: 1.0,
            pattern_prob_range: (0.05, 0.2),
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.pattern_prob_range;
        if self.vocab_size == 0 {
            return Err(Error::Config("vocabulary must not be empty".into()));
        }
        if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
            return Err(Error::Config(format!("pattern probability range [{lo}, {hi}] must lie in (0, 1]")));
        }
        if !(self.base_length_rate >= 0.0 && self.pattern_length_rate >= 0.0) {
            return Err(Error::Config("Poisson rates must be nonnegative".into()));
        }
        if self.base_length_rate > 700.0 || self.pattern_length_rate > 700.0 {
            return Err(Error::Config("Poisson rates above 700 are not supported".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddedPattern {
    pub tokens: Vec<String>,
    pub probability: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GroundTruth {
    pub patterns: Vec<EmbeddedPattern>,
    pub vocabulary: Vec<String>,
    /// Aligned with `vocabulary`.
    pub item_distribution: Vec<f64>,
    /// Header lines written verbatim (after `# `) by [`GroundTruth::write_to`].
    pub header: Vec<String>,
    /// Number of records each pattern was embedded in. Not persisted.
    pub embed_counts: Vec<usize>,
}

impl GroundTruth {
    /// One line per pattern: tokens, a tab, the embedding probability.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for line in &self.header {
            writeln!(out, "# {line}")?;
        }
        if !self.vocabulary.is_empty() {
            let mut line = String::from("# vocab");
            for (tok, p) in self.vocabulary.iter().zip(&self.item_distribution) {
                write!(line, " {tok}:{p}").unwrap();
            }
            writeln!(out, "{line}")?;
        }
        for p in &self.patterns {
            writeln!(out, "{}\t{}", p.tokens.join(" "), p.probability)?;
        }
        Ok(())
    }

    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut truth = GroundTruth::default();
        for (lineno, line) in reader.lines().enumerate() {
            let line = line?;
            if let Some(comment) = line.trim_start().strip_prefix('#') {
                let comment = comment.trim();
                if let Some(vocab) = comment.strip_prefix("vocab") {
                    for entry in vocab.split_whitespace() {
                        let (tok, p) = entry
                            .rsplit_once(':')
                            .ok_or_else(|| Error::Malformed(format!("line {}: bad vocab entry", lineno + 1)))?;
                        truth.vocabulary.push(tok.to_owned());
                        truth.item_distribution.push(parse_prob(p, lineno)?);
                    }
                } else {
                    truth.header.push(comment.to_owned());
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (tokens, prob) = line
                .split_once('\t')
                .ok_or_else(|| Error::Malformed(format!("line {}: expected tokens<TAB>probability", lineno + 1)))?;
            let tokens: Vec<String> = tokens.split_whitespace().map(str::to_owned).collect();
            if tokens.is_empty() {
                return Err(Error::Malformed(format!("line {}: empty pattern", lineno + 1)));
            }
            truth.patterns.push(EmbeddedPattern {
                tokens,
                probability: parse_prob(prob.trim(), lineno)?,
            });
        }
        Ok(truth)
    }
}

fn parse_prob(text: &str, lineno: usize) -> Result<f64> {
    text.parse::<f64>()
        .map_err(|_| Error::Malformed(format!("line {}: bad probability {text:?}", lineno + 1)))
}

/// `a`..`z`, then `aa`, `ab`, … (bijective base 26).
pub fn token_name(mut index: usize) -> String {
    let mut out = Vec::new();
    loop {
        out.push(b'a' + (index % 26) as u8);
        if index < 26 {
            break;
        }
        index = index / 26 - 1;
    }
    out.reverse();
    String::from_utf8(out).unwrap()
}

/// Poisson draw by sequential search of the inverse CDF.
pub fn sample_poisson<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> usize {
    let u: f64 = rng.gen();
    let mut p = (-rate).exp();
    let mut cdf = p;
    let mut x = 0usize;
    while u > cdf {
        x += 1;
        p *= rate / x as f64;
        cdf += p;
        // guard against the tail underflowing before the CDF reaches u
        if p == 0.0 && x as f64 > rate {
            break;
        }
    }
    x
}

/// Flat Dirichlet via normalized unit-rate exponentials.
pub fn sample_flat_dirichlet<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..dim)
        .map(|_| {
            let u: f64 = rng.gen();
            -(1.0 - u).ln()
        })
        .collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}

struct Categorical {
    cdf: Vec<f64>,
}

impl Categorical {
    fn new(probs: &[f64]) -> Self {
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Categorical { cdf }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen::<f64>() * self.cdf.last().copied().unwrap_or(1.0);
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// Inserts `pattern` into `host` at `pattern.len()` slots drawn uniformly
/// from all `C(host + pattern, pattern)` placements.
fn embed<R: Rng + ?Sized>(rng: &mut R, host: &[usize], pattern: &[usize]) -> Vec<usize> {
    let total = host.len() + pattern.len();
    let mut slots = index::sample(rng, total, pattern.len()).into_vec();
    slots.sort_unstable();
    let mut out = Vec::with_capacity(total);
    let (mut h, mut p) = (0, 0);
    for slot in 0..total {
        if p < slots.len() && slots[p] == slot {
            out.push(pattern[p]);
            p += 1;
        } else {
            out.push(host[h]);
            h += 1;
        }
    }
    out
}

/// Generates a corpus and its ground truth. Deterministic in `cfg`.
pub fn generate(cfg: &GenConfig) -> Result<(SequenceDatabase, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocabulary: Vec<String> = (0..cfg.vocab_size).map(token_name).collect();

    let dist = sample_flat_dirichlet(&mut rng, cfg.vocab_size);
    let items = Categorical::new(&dist);

    // patterns come before the background so the planted truth does not depend on n_sequences
    let (lo, hi) = cfg.pattern_prob_range;
    let mut patterns: Vec<(Vec<usize>, f64)> = Vec::with_capacity(cfg.n_patterns);
    let mut seen: HashSet<Vec<usize>> = HashSet::new();
    for _ in 0..cfg.n_patterns {
        let draw = |rng: &mut ChaCha8Rng| -> Vec<usize> {
            let len = sample_poisson(rng, cfg.pattern_length_rate) + 2;
            (0..len).map(|_| items.sample(rng)).collect()
        };
        let mut pattern = draw(&mut rng);
        if seen.contains(&pattern) {
            pattern = draw(&mut rng);
        }
        seen.insert(pattern.clone());
        let prob = lo + (hi - lo) * rng.gen::<f64>();
        patterns.push((pattern, prob));
    }

    let mut records: Vec<Vec<usize>> = (0..cfg.n_sequences)
        .map(|_| {
            let len = sample_poisson(&mut rng, cfg.base_length_rate) + 1;
            (0..len).map(|_| items.sample(&mut rng)).collect()
        })
        .collect();

    let mut embed_counts = vec![0usize; patterns.len()];
    for record in &mut records {
        for (j, (pattern, prob)) in patterns.iter().enumerate() {
            if rng.gen::<f64>() < *prob {
                *record = embed(&mut rng, record, pattern);
                assert!(is_subsequence(pattern, record), "embedding lost the pattern order");
                embed_counts[j] += 1;
            }
        }
    }

    let db = SequenceDatabase::from_token_records(
        records
            .iter()
            .map(|r| r.iter().map(|&i| vocabulary[i].as_str())),
    );
    let truth = GroundTruth {
        patterns: patterns
            .into_iter()
            .map(|(p, probability)| EmbeddedPattern {
                tokens: p.into_iter().map(|i| vocabulary[i].clone()).collect(),
                probability,
            })
            .collect(),
        header: vec![
            format!("seed={}", cfg.seed),
            format!(
                "config vocab_size={} n_sequences={} base_length_rate={} n_patterns={} pattern_length_rate={} prob_min={} prob_max={}",
                cfg.vocab_size, cfg.n_sequences, cfg.base_length_rate, cfg.n_patterns, cfg.pattern_length_rate, lo, hi
            ),
        ],
        vocabulary,
        item_distribution: dist,
        embed_counts,
    };
    Ok((db, truth))
}

/// How a ranked pattern relates to the planted ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchFlag {
    Exact,
    /// A strict subsequence of some planted pattern.
    Subpattern,
    Other,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecallReport {
    pub k: usize,
    /// 1-based rank of each planted pattern within the top `k`.
    pub found_at: Vec<Option<usize>>,
    /// One flag per ranked pattern considered (at most `k`).
    pub flags: Vec<MatchFlag>,
}

impl RecallReport {
    pub fn found(&self) -> usize {
        self.found_at.iter().filter(|r| r.is_some()).count()
    }

    /// Fraction of planted patterns found; 0 when nothing was planted.
    pub fn recall(&self) -> Fraction {
        if self.found_at.is_empty() {
            return Fraction::ZERO;
        }
        Fraction::new(self.found() as i128, self.found_at.len() as i128)
    }
}

/// Exact-match recall of the first `k` entries of `ranking`.
pub fn recall_at_k<S: AsRef<str>>(truth: &GroundTruth, ranking: &[Vec<S>], k: usize) -> RecallReport {
    let top: Vec<Vec<&str>> = ranking
        .iter()
        .take(k)
        .map(|p| p.iter().map(AsRef::as_ref).collect())
        .collect();
    let planted: Vec<Vec<&str>> = truth
        .patterns
        .iter()
        .map(|p| p.tokens.iter().map(String::as_str).collect())
        .collect();
    let found_at = planted
        .iter()
        .map(|p| top.iter().position(|r| r == p).map(|i| i + 1))
        .collect();
    let flags = top
        .iter()
        .map(|r| {
            if planted.iter().any(|p| p == r) {
                MatchFlag::Exact
            } else if planted.iter().any(|p| r.len() < p.len() && is_subsequence(r, p)) {
                MatchFlag::Subpattern
            } else {
                MatchFlag::Other
            }
        })
        .collect();
    RecallReport { k, found_at, flags }
}

/// [`recall_at_k`] for patterns scored against `items`.
pub fn recall_of_scored(truth: &GroundTruth, ranking: &[ScoredPattern], items: &ItemTable, k: usize) -> RecallReport {
    let tokens: Vec<Vec<&str>> = ranking
        .iter()
        .map(|s| s.pattern.iter().map(|&i| items.token(i)).collect())
        .collect();
    recall_at_k(truth, &tokens, k)
}
