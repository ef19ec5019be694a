//! Exact top-k search over sequential patterns.
//!
//! Depth-first branch-and-bound over suffix extensions. Each node keeps the
//! queue of items still worth appending; an item whose one-step extension has
//! support too small to beat the current k-th best is dropped from the queue
//! for the whole subtree, since every pattern below that would contain the
//! extension as a subsequence. Items stay in the queue after use so patterns
//! may repeat items. An optional breadth-first pass over all two-item
//! patterns fills the top-k before the depth-first search starts.

mod topk;

pub use topk::{rank_order, TopKQueue};

use crate::corpus::{BulkExtender, CoverState, ItemId, Pattern, SequenceDatabase};
use crate::error::{Error, Result};
use crate::expectation::{MeasureConfig, ScoredPattern, Scorer};
use crate::fraction::Fraction;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    pub k: usize,
    /// `None` means unlimited.
    pub max_pattern_length: Option<usize>,
    pub measure: MeasureConfig,
    pub bootstrap: bool,
    /// Disabling pruning enumerates everything up to `max_pattern_length`;
    /// only useful for measurements and tests.
    pub pruning: bool,
    /// Record every pruning decision in [`SearchOutcome::prunes`].
    pub trace_prunes: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            k: 20,
            max_pattern_length: None,
            measure: MeasureConfig::default(),
            bootstrap: true,
            pruning: true,
            trace_prunes: false,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.max_pattern_length.is_some_and(|m| m < 2) {
            return Err(Error::Config("maximum pattern length must be at least 2".into()));
        }
        if !self.pruning && self.max_pattern_length.is_none() {
            return Err(Error::Config("an unpruned search needs a maximum pattern length".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes_expanded: u64,
    pub patterns_scored: u64,
    /// Extensions dropped from a queue or subtrees skipped at recursion time.
    pub pruned_subtrees: u64,
    /// Candidates whose score could not reach the floor, skipped unscored.
    pub candidates_skipped: u64,
    pub bootstrap_pairs_scored: u64,
    pub max_depth: usize,
}

/// What a recorded pruning decision excluded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PruneKind {
    /// The pattern itself was not scored.
    Candidate,
    /// Every `node ++ X` where `X` has length at least 2 and contains `item`.
    QueueDrop { node: Pattern, item: ItemId },
    /// Every strict extension of the pattern.
    Subtree,
}

#[derive(Clone, Debug)]
pub struct PruneRecord {
    pub kind: PruneKind,
    /// For `QueueDrop` this is `node ++ item`.
    pub pattern: Pattern,
    /// The k-th entry at the time of the decision.
    pub floor: ScoredPattern,
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub ranking: Vec<ScoredPattern>,
    pub stats: SearchStats,
    pub prunes: Vec<PruneRecord>,
}

/// The exact top-k patterns (length ≥ 2) in rank order.
pub fn mine_topk(db: &SequenceDatabase, cfg: &SearchConfig) -> Result<Vec<ScoredPattern>> {
    Ok(search(db, cfg)?.ranking)
}

/// [`mine_topk`] with statistics and, if requested, the pruning trace.
pub fn search(db: &SequenceDatabase, cfg: &SearchConfig) -> Result<SearchOutcome> {
    cfg.validate()?;
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let mut miner = Miner::new(db, cfg);
    if cfg.bootstrap {
        miner.bootstrap()?;
    }
    let root_queue = miner.root_queue();
    let mut prefix = Vec::new();
    miner.expand(&mut prefix, None, &root_queue)?;
    Ok(SearchOutcome {
        ranking: miner.topk.into_vec(),
        stats: miner.stats,
        prunes: miner.prunes,
    })
}

/// Scores every ordered pair of items, breadth-first, into a fresh queue.
pub fn bootstrap_pairs(db: &SequenceDatabase, cfg: &SearchConfig) -> Result<(TopKQueue, SearchStats)> {
    cfg.validate()?;
    if db.is_empty() {
        return Err(Error::EmptyDatabase);
    }
    let mut miner = Miner::new(db, cfg);
    miner.bootstrap()?;
    Ok((miner.topk, miner.stats))
}

struct Miner<'db> {
    db: &'db SequenceDatabase,
    cfg: SearchConfig,
    scorer: Scorer<'db>,
    topk: TopKQueue,
    extender: BulkExtender,
    stats: SearchStats,
    prunes: Vec<PruneRecord>,
    // pairs already went through the bootstrap
    pairs_done: bool,
}

struct Child {
    item: ItemId,
    cover: CoverState,
    score: Option<Fraction>,
}

impl<'db> Miner<'db> {
    fn new(db: &'db SequenceDatabase, cfg: &SearchConfig) -> Self {
        Miner {
            db,
            cfg: *cfg,
            scorer: Scorer::new(db, cfg.measure),
            topk: TopKQueue::new(cfg.k),
            extender: BulkExtender::new(db.num_items()),
            stats: SearchStats::default(),
            prunes: Vec::new(),
            pairs_done: false,
        }
    }

    /// Items by descending singleton support; ties keep id order.
    fn root_queue(&self) -> Vec<ItemId> {
        let table = self.db.item_table();
        let mut items: Vec<ItemId> = table.ids().filter(|&i| table.support_count(i) > 0).collect();
        items.sort_by_key(|&i| std::cmp::Reverse(table.support_count(i)));
        items
    }

    fn allows_length(&self, len: usize) -> bool {
        self.cfg.max_pattern_length.is_none_or(|m| len <= m)
    }

    fn trace(&mut self, kind: PruneKind, pattern: &[ItemId]) {
        if self.cfg.trace_prunes {
            let floor = self.topk.floor_entry().expect("pruning needs a full queue").clone();
            self.prunes.push(PruneRecord {
                kind,
                pattern: Pattern::from(pattern),
                floor,
            });
        }
    }

    /// Whether a subtree bounded by `bound` below `prefix` must be explored.
    fn admits(&self, bound: Fraction, prefix: &[ItemId]) -> bool {
        !self.cfg.pruning || self.topk.admits_bound(bound, prefix)
    }

    /// Scores `pattern` (whose count is known) and offers it to the top-k.
    /// Returns the score when it was computed in full.
    fn consider(&mut self, pattern: &[ItemId], count: usize) -> Result<Option<Fraction>> {
        let floor = if self.cfg.pruning { self.topk.floor() } else { None };
        if let Some(f) = floor {
            if self.scorer.score_cap(count, pattern.len()) < f {
                self.stats.candidates_skipped += 1;
                self.trace(PruneKind::Candidate, pattern);
                return Ok(None);
            }
        }
        self.stats.patterns_scored += 1;
        let Some(scored) = self.scorer.score_counted(pattern, count, floor)? else {
            self.trace(PruneKind::Candidate, pattern);
            return Ok(None);
        };
        let score = scored.score;
        self.topk.insert(scored);
        Ok(Some(score))
    }

    fn bootstrap(&mut self) -> Result<()> {
        let items = self.root_queue();
        if !self.allows_length(2) {
            return Ok(());
        }
        for &first in &items {
            let first_count = self.db.item_table().support_count(first) as usize;
            // both queues are sorted by support, so every later pair is capped lower
            if self.cap_excludes(first_count) {
                break;
            }
            let covers = self
                .extender
                .extend_many(self.db, &self.db.singleton_cover(first), &items);
            for (&second, cover) in items.iter().zip(&covers) {
                let second_count = self.db.item_table().support_count(second) as usize;
                if self.cap_excludes(second_count) {
                    break;
                }
                let pair = [first, second];
                let before = self.stats.patterns_scored;
                self.consider(&pair, cover.count())?;
                self.stats.bootstrap_pairs_scored += self.stats.patterns_scored - before;
            }
        }
        self.pairs_done = true;
        Ok(())
    }

    /// Whether no pair involving an item with `count` records can enter.
    fn cap_excludes(&self, count: usize) -> bool {
        if !self.cfg.pruning {
            return false;
        }
        match self.topk.floor() {
            Some(f) => self.scorer.score_cap(count, 2) < f,
            None => false,
        }
    }

    fn expand(&mut self, prefix: &mut Vec<ItemId>, cover: Option<&CoverState>, queue: &[ItemId]) -> Result<()> {
        self.stats.nodes_expanded += 1;
        self.stats.max_depth = self.stats.max_depth.max(prefix.len());
        let child_len = prefix.len() + 1;
        let may_recurse = self.allows_length(child_len + 1);

        let covers: Vec<CoverState> = match cover {
            Some(parent) => self.extender.extend_many(self.db, parent, queue),
            None => queue.iter().map(|&i| self.db.singleton_cover(i)).collect(),
        };

        let mut children: Vec<Child> = Vec::new();
        for (&item, child_cover) in queue.iter().zip(covers) {
            let count = child_cover.count();
            prefix.push(item);
            let mut score = None;
            if child_len >= 2 && !(child_len == 2 && self.pairs_done) {
                score = self.consider(prefix, count)?;
            }
            if may_recurse {
                prefix.pop();
                let bound = self.scorer.bound_from_count(count);
                if self.admits(bound, prefix) {
                    children.push(Child {
                        item,
                        cover: child_cover,
                        score,
                    });
                } else {
                    self.stats.pruned_subtrees += 1;
                    if self.cfg.trace_prunes {
                        let node = Pattern::from(prefix.as_slice());
                        prefix.push(item);
                        self.trace(PruneKind::QueueDrop { node, item }, prefix);
                        prefix.pop();
                    }
                }
            } else {
                prefix.pop();
            }
        }
        if children.is_empty() {
            return Ok(());
        }

        let child_queue: Vec<ItemId> = children.iter().map(|c| c.item).collect();
        // best one-step extensions first; unscored ones by support
        children.sort_by(|a, b| match (a.score, b.score) {
            (Some(x), Some(y)) => y.cmp(&x),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => b.cover.count().cmp(&a.cover.count()),
        });

        for child in children {
            prefix.push(child.item);
            let bound = self.scorer.bound_from_count(child.cover.count());
            if self.admits(bound, prefix) {
                self.expand(prefix, Some(&child.cover), &child_queue)?;
            } else {
                self.stats.pruned_subtrees += 1;
                self.trace(PruneKind::Subtree, prefix);
            }
            prefix.pop();
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expectation::Aggregation;

    fn toy() -> SequenceDatabase {
        SequenceDatabase::parse_str("a b\na b\na b\na b\nb a\n")
    }

    fn render(db: &SequenceDatabase, r: &[ScoredPattern]) -> Vec<(String, f64)> {
        r.iter()
            .map(|s| (db.item_table().render(&s.pattern), s.score_f64()))
            .collect()
    }

    #[test]
    fn toy_leverage_top2() {
        let db = toy();
        let cfg = SearchConfig {
            k: 2,
            max_pattern_length: Some(4),
            ..Default::default()
        };
        let r = mine_topk(&db, &cfg).unwrap();
        assert_eq!(r.len(), 2);
        assert_eq!(db.item_table().render(&r[0].pattern), "a b");
        assert_eq!(r[0].score, Fraction::new(3, 10));
    }

    #[test]
    fn toy_support_top2() {
        let db = toy();
        let cfg = SearchConfig {
            k: 2,
            measure: MeasureConfig::support(),
            ..Default::default()
        };
        let r = mine_topk(&db, &cfg).unwrap();
        assert_eq!(render(&db, &r), vec![("a b".into(), 0.8), ("b a".into(), 0.2)]);
    }

    #[test]
    fn empty_database_is_an_error() {
        let db = SequenceDatabase::parse_str("");
        assert!(matches!(mine_topk(&db, &SearchConfig::default()), Err(Error::EmptyDatabase)));
    }

    #[test]
    fn invalid_configs() {
        let db = toy();
        for cfg in [
            SearchConfig { k: 0, ..Default::default() },
            SearchConfig { max_pattern_length: Some(1), ..Default::default() },
            SearchConfig { pruning: false, ..Default::default() },
        ] {
            assert!(matches!(mine_topk(&db, &cfg), Err(Error::Config(_))));
        }
    }

    #[test]
    fn single_item_database_is_deterministic_and_terminates() {
        let db = SequenceDatabase::parse_str("a\na\na\na\na\n");
        let cfg = SearchConfig { k: 3, ..Default::default() };
        let a = mine_topk(&db, &cfg).unwrap();
        let b = mine_topk(&db, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.iter().all(|s| s.score <= Fraction::ZERO));
        // nothing scores above zero, so the lexicographically smallest zero-score patterns win
        assert_eq!(
            render(&db, &a),
            vec![("a a".into(), 0.0), ("a a a".into(), 0.0), ("a a a a".into(), 0.0)]
        );
    }

    #[test]
    fn bootstrap_scores_every_pair_while_filling() {
        let letters: Vec<String> = (b'a'..=b'j').map(|c| (c as char).to_string()).collect();
        let text = format!("{}\n{}\n", letters.join(" "), letters.iter().rev().cloned().collect::<Vec<_>>().join(" "));
        let db = SequenceDatabase::parse_str(&text);
        let cfg = SearchConfig { k: 200, ..Default::default() };
        let (q, stats) = bootstrap_pairs(&db, &cfg).unwrap();
        assert_eq!(stats.bootstrap_pairs_scored, 100);
        assert_eq!(q.len(), 100);
    }

    #[test]
    fn bootstrap_on_toy() {
        let db = toy();
        let cfg = SearchConfig { k: 1, ..Default::default() };
        let (q, _) = bootstrap_pairs(&db, &cfg).unwrap();
        assert_eq!(render(&db, q.entries()), vec![("a b".into(), 0.3)]);
    }

    #[test]
    fn toy_prunes_reversed_pair_subtree() {
        let db = toy();
        let cfg = SearchConfig {
            k: 1,
            trace_prunes: true,
            ..Default::default()
        };
        let out = search(&db, &cfg).unwrap();
        assert_eq!(render(&db, &out.ranking), vec![("a b".into(), 0.3)]);
        let b = db.item_table().id("b").unwrap();
        let a = db.item_table().id("a").unwrap();
        // sup(⟨b,a⟩) = 0.2 < 0.3: never expanded
        assert!(out.prunes.iter().any(|p| p.pattern.items() == [b, a]));
        assert!(out.stats.pruned_subtrees > 0);
    }

    #[test]
    fn repeated_items_are_reachable() {
        // ⟨a,b,a⟩ needs the item a twice; both of its pairs score 0
        let db = SequenceDatabase::parse_str("a b a\na b a\na b a\na b a\na a b\nb a a\n");
        let cfg = SearchConfig { k: 1, ..Default::default() };
        let r = mine_topk(&db, &cfg).unwrap();
        assert_eq!(db.item_table().render(&r[0].pattern), "a b a");
        assert_eq!(r[0].score, Fraction::new(1, 3));
    }

    #[test]
    fn depth_respects_max_length() {
        let db = SequenceDatabase::parse_str("a b c d e\na b c d e\ne d c b a\n");
        for max in 2..=4 {
            let cfg = SearchConfig {
                k: 50,
                max_pattern_length: Some(max),
                ..Default::default()
            };
            let out = search(&db, &cfg).unwrap();
            assert!(out.stats.max_depth < max);
            assert!(out.ranking.iter().all(|s| s.pattern.len() <= max));
        }
    }

    #[test]
    fn pruning_reduces_work() {
        let db = SequenceDatabase::parse_str("a b c d\na b c d\nd c b a\nb a d c\nc a\n");
        let base = SearchConfig {
            k: 5,
            max_pattern_length: Some(4),
            ..Default::default()
        };
        let pruned = search(&db, &base).unwrap();
        let full = search(&db, &SearchConfig { pruning: false, ..base }).unwrap();
        assert!(pruned.stats.nodes_expanded <= full.stats.nodes_expanded);
        assert_eq!(pruned.ranking, full.ranking);
    }

    #[test]
    fn min_aggregation_runs() {
        let db = SequenceDatabase::parse_str("a b c\na b c\nc b a\nb a c\n");
        let cfg = SearchConfig {
            k: 5,
            max_pattern_length: Some(3),
            measure: MeasureConfig::leverage(Aggregation::Min),
            ..Default::default()
        };
        let r = mine_topk(&db, &cfg).unwrap();
        assert_eq!(r.len(), 5);
        assert!(r.windows(2).all(|w| rank_order(&w[0], &w[1]).is_lt()));
    }
}
