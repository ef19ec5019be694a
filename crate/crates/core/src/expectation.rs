//! Expected support, leverage and plain support behind one scoring interface.
//!
//! The expected support of a pattern is the largest, over its binary
//! sequential partitions, of the mean support of every interleaving of the
//! two parts. Supports are summed as integer counts and each mean is kept as
//! an exact fraction; nothing is rounded until a value is displayed.

use std::sync::Arc;

use rustc_hash::FxHashMap;

use crate::combinator::{first_bsp_template, BspTemplate, CompositionSet, TemplateCache};
use crate::corpus::{ItemId, Pattern, SequenceDatabase};
use crate::error::{Error, Result};
use crate::fraction::Fraction;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum MeasureKind {
    #[default]
    Leverage,
    Support,
}

/// How the supports of one partition's compositions are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Aggregation {
    /// A pattern must beat the mean of its recompositions.
    #[default]
    Mean,
    /// A pattern must beat at least one of its recompositions.
    Min,
}

/// Default number of patterns the support cache holds before it stops
/// accepting new entries.
pub const DEFAULT_CACHE_CAPACITY: usize = 1 << 21;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MeasureConfig {
    pub kind: MeasureKind,
    /// Only consulted for [`MeasureKind::Leverage`].
    pub aggregation: Aggregation,
    pub support_cache: bool,
    /// `None` lets the cache grow without bound.
    pub cache_capacity: Option<usize>,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig {
            kind: MeasureKind::Leverage,
            aggregation: Aggregation::Mean,
            support_cache: true,
            cache_capacity: Some(DEFAULT_CACHE_CAPACITY),
        }
    }
}

impl MeasureConfig {
    pub fn support() -> Self {
        MeasureConfig {
            kind: MeasureKind::Support,
            ..Self::default()
        }
    }

    pub fn leverage(aggregation: Aggregation) -> Self {
        MeasureConfig {
            aggregation,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ExpectedSupport {
    pub value: Fraction,
    /// First partition, in template order, attaining the maximum.
    pub witness: BspTemplate,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ScoredPattern {
    pub pattern: Pattern,
    pub count: usize,
    pub score: Fraction,
    pub support: Fraction,
    pub expected_support: Option<Fraction>,
    pub witness_partition: Option<BspTemplate>,
}

impl ScoredPattern {
    pub fn score_f64(&self) -> f64 {
        self.score.to_f64()
    }

    pub fn support_f64(&self) -> f64 {
        self.support.to_f64()
    }

    pub fn expected_support_f64(&self) -> Option<f64> {
        self.expected_support.map(|e| e.to_f64())
    }
}

/// Memoized pattern counts.
#[derive(Debug, Default)]
pub struct SupportCache {
    counts: FxHashMap<Vec<ItemId>, u32>,
    capacity: Option<usize>,
    hits: u64,
    misses: u64,
}

impl SupportCache {
    pub fn new(capacity: Option<usize>) -> Self {
        SupportCache {
            capacity,
            ..Default::default()
        }
    }

    pub fn get_or_count(&mut self, db: &SequenceDatabase, pattern: &[ItemId]) -> u32 {
        if let Some(&c) = self.counts.get(pattern) {
            self.hits += 1;
            return c;
        }
        self.misses += 1;
        let c = db.count(pattern) as u32;
        if self.capacity.is_none_or(|cap| self.counts.len() < cap) {
            self.counts.insert(pattern.to_vec(), c);
        }
        c
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }
}

/// Scores patterns against one database. Owns the template and support
/// caches, so it is meant to be confined to a single search.
pub struct Scorer<'db> {
    db: &'db SequenceDatabase,
    cfg: MeasureConfig,
    templates: TemplateCache,
    cache: Option<SupportCache>,
    left: Vec<ItemId>,
    right: Vec<ItemId>,
    composed: Vec<ItemId>,
}

impl<'db> Scorer<'db> {
    pub fn new(db: &'db SequenceDatabase, cfg: MeasureConfig) -> Self {
        Scorer {
            db,
            cfg,
            templates: TemplateCache::default(),
            cache: cfg.support_cache.then(|| SupportCache::new(cfg.cache_capacity)),
            left: Vec::new(),
            right: Vec::new(),
            composed: Vec::new(),
        }
    }

    pub fn config(&self) -> &MeasureConfig {
        &self.cfg
    }

    pub fn database(&self) -> &'db SequenceDatabase {
        self.db
    }

    pub fn support_cache(&self) -> Option<&SupportCache> {
        self.cache.as_ref()
    }

    fn n(&self) -> i128 {
        self.db.n() as i128
    }

    fn require_records(&self) -> Result<()> {
        if self.db.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        Ok(())
    }

    /// Count through the support cache when enabled.
    pub fn count(&mut self, pattern: &[ItemId]) -> usize {
        match &mut self.cache {
            Some(cache) => cache.get_or_count(self.db, pattern) as usize,
            None => self.db.count(pattern),
        }
    }

    pub fn expected_support(&mut self, pattern: &[ItemId]) -> Result<ExpectedSupport> {
        Ok(self
            .expected_support_bounded(pattern, None)?
            .expect("no cutoff was given"))
    }

    /// Like [`Scorer::expected_support`], but gives up and returns `None` as
    /// soon as the expected support is known to exceed `abandon_above`.
    pub fn expected_support_bounded(
        &mut self,
        pattern: &[ItemId],
        abandon_above: Option<Fraction>,
    ) -> Result<Option<ExpectedSupport>> {
        if pattern.len() < 2 {
            return Err(Error::Singleton);
        }
        self.require_records()?;
        let n = self.n();
        // compositions are reorderings of the pattern's items
        if !self.db.contains_multiset(pattern) {
            let witness = first_bsp_template(pattern.len())?;
            if abandon_above.is_some_and(|cut| Fraction::ZERO > cut) {
                return Ok(None);
            }
            return Ok(Some(ExpectedSupport {
                value: Fraction::ZERO,
                witness,
            }));
        }
        let partitions: Arc<[BspTemplate]> = self.templates.bsp(pattern.len())?;
        let mut best: Option<ExpectedSupport> = None;

        for partition in partitions.iter() {
            partition.split_into(pattern, &mut self.left, &mut self.right);
            let comps = self.templates.compositions(self.left.len(), self.right.len());
            let Some(value) = self.aggregate(&comps, n, abandon_above) else {
                return Ok(None);
            };
            if best.is_none_or(|b| value > b.value) {
                best = Some(ExpectedSupport {
                    value,
                    witness: *partition,
                });
                if abandon_above.is_some_and(|cut| value > cut) {
                    return Ok(None);
                }
            }
        }
        Ok(best)
    }

    /// Mean (or min) support over the compositions of `self.left` and
    /// `self.right`.
    fn aggregate(&mut self, comps: &CompositionSet, n: i128, abandon_above: Option<Fraction>) -> Option<Fraction> {
        let total = comps.len() as i128;
        let left = std::mem::take(&mut self.left);
        let right = std::mem::take(&mut self.right);
        let mut composed = std::mem::take(&mut self.composed);
        let mut result = None;
        match self.cfg.aggregation {
            Aggregation::Mean => {
                let mut sum: i128 = 0;
                let mut abandoned = false;
                for i in 0..comps.len() {
                    comps.apply_into(i, &left, &right, &mut composed);
                    sum += self.count(&composed) as i128;
                    // the running sum only grows, so the partial mean is a lower bound
                    if abandon_above.is_some_and(|cut| Fraction::new(sum, total * n) > cut) {
                        abandoned = true;
                        break;
                    }
                }
                if !abandoned {
                    result = Some(Fraction::new(sum, total * n));
                }
            }
            Aggregation::Min => {
                let mut min = i128::MAX;
                for i in 0..comps.len() {
                    comps.apply_into(i, &left, &right, &mut composed);
                    min = min.min(self.count(&composed) as i128);
                    if min == 0 {
                        break;
                    }
                }
                result = Some(Fraction::new(min, n));
            }
        }
        self.left = left;
        self.right = right;
        self.composed = composed;
        result
    }

    /// `sup(p) − ExpSupport(p)`; may be negative.
    pub fn leverage(&mut self, pattern: &[ItemId]) -> Result<ScoredPattern> {
        let count = self.count(pattern);
        self.leverage_with_count(pattern, count, None)
            .map(|s| s.expect("no cutoff was given"))
    }

    fn leverage_with_count(
        &mut self,
        pattern: &[ItemId],
        count: usize,
        floor: Option<Fraction>,
    ) -> Result<Option<ScoredPattern>> {
        let support = Fraction::new(count as i128, self.n());
        // score < floor  <=>  expected support > support − floor
        let abandon_above = floor.map(|f| support - f);
        let Some(exp) = self.expected_support_bounded(pattern, abandon_above)? else {
            return Ok(None);
        };
        // common denominator: both are over n, expected support over C·n
        let score = Fraction::new(
            count as i128 * (exp.value.den() / self.n()) - exp.value.num(),
            exp.value.den(),
        );
        debug_assert_eq!(score, support - exp.value);
        Ok(Some(ScoredPattern {
            pattern: Pattern::from(pattern),
            count,
            score,
            support,
            expected_support: Some(exp.value),
            witness_partition: Some(exp.witness),
        }))
    }

    /// Plain support as a score. Singletons are rejected like for leverage.
    pub fn support_measure(&mut self, pattern: &[ItemId]) -> Result<ScoredPattern> {
        if pattern.len() < 2 {
            return Err(Error::Singleton);
        }
        self.require_records()?;
        let count = self.count(pattern);
        Ok(self.support_scored(pattern, count))
    }

    fn support_scored(&self, pattern: &[ItemId], count: usize) -> ScoredPattern {
        let support = Fraction::new(count as i128, self.n());
        ScoredPattern {
            pattern: Pattern::from(pattern),
            count,
            score: support,
            support,
            expected_support: None,
            witness_partition: None,
        }
    }

    /// Scores with the configured measure.
    pub fn score(&mut self, pattern: &[ItemId]) -> Result<ScoredPattern> {
        match self.cfg.kind {
            MeasureKind::Leverage => self.leverage(pattern),
            MeasureKind::Support => self.support_measure(pattern),
        }
    }

    /// Scores a pattern whose count is already known. With a `floor`, returns
    /// `None` once the score is certain to be strictly below it; any pattern
    /// scoring at or above the floor is always returned in full.
    pub fn score_counted(
        &mut self,
        pattern: &[ItemId],
        count: usize,
        floor: Option<Fraction>,
    ) -> Result<Option<ScoredPattern>> {
        if pattern.len() < 2 {
            return Err(Error::Singleton);
        }
        self.require_records()?;
        match self.cfg.kind {
            MeasureKind::Leverage => self.leverage_with_count(pattern, count, floor),
            MeasureKind::Support => Ok(Some(self.support_scored(pattern, count))),
        }
    }

    /// Largest score any pattern of length `len` with `count` covering
    /// records can reach. Under mean aggregation the expected support is at
    /// least `sup / len`, because the partition splitting off the first item
    /// has `len` compositions and one of them is the pattern itself.
    pub fn score_cap(&self, count: usize, len: usize) -> Fraction {
        let count = count as i128;
        match (self.cfg.kind, self.cfg.aggregation) {
            (MeasureKind::Leverage, Aggregation::Mean) => {
                let len = len as i128;
                Fraction::new(count * (len - 1), len * self.n())
            }
            _ => Fraction::new(count, self.n()),
        }
    }

    /// Bound on the score of every extension `⟨p | …⟩`: its support, because
    /// supports shrink under extension and expected supports are nonnegative.
    pub fn upper_bound(&mut self, pattern: &[ItemId]) -> Result<Fraction> {
        self.require_records()?;
        let count = self.count(pattern);
        Ok(self.bound_from_count(count))
    }

    pub fn bound_from_count(&self, count: usize) -> Fraction {
        Fraction::new(count as i128, self.n())
    }
}
