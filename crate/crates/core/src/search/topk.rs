use std::cmp::Ordering;

use rustc_hash::FxHashSet;

use crate::corpus::{ItemId, Pattern};
use crate::expectation::ScoredPattern;
use crate::fraction::Fraction;

/// Total rank order: higher score first, then higher support, then the
/// lexicographically smaller item-id sequence. `Less` means `a` ranks
/// above `b`.
pub fn rank_order(a: &ScoredPattern, b: &ScoredPattern) -> Ordering {
    b.score
        .cmp(&a.score)
        .then_with(|| b.support.cmp(&a.support))
        .then_with(|| a.pattern.cmp(&b.pattern))
}

/// Bounded collection of the best patterns seen so far, kept in rank order.
#[derive(Clone, Debug)]
pub struct TopKQueue {
    capacity: usize,
    entries: Vec<ScoredPattern>,
    members: FxHashSet<Pattern>,
}

impl TopKQueue {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "top-k capacity must be positive");
        TopKQueue {
            capacity,
            entries: Vec::with_capacity(capacity + 1),
            members: FxHashSet::default(),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    pub fn entries(&self) -> &[ScoredPattern] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<ScoredPattern> {
        self.entries
    }

    pub fn contains(&self, pattern: &[ItemId]) -> bool {
        self.members.contains(pattern)
    }

    /// The k-th entry once the queue is full.
    pub fn floor_entry(&self) -> Option<&ScoredPattern> {
        if self.is_full() {
            self.entries.last()
        } else {
            None
        }
    }

    /// Score of the k-th entry; `None` stands for −∞ while not full.
    pub fn floor(&self) -> Option<Fraction> {
        self.floor_entry().map(|e| e.score)
    }

    /// Whether `candidate` would be kept: it must rank strictly above the
    /// current k-th entry and not already be present.
    pub fn would_admit(&self, candidate: &ScoredPattern) -> bool {
        if self.members.contains(&candidate.pattern) {
            return false;
        }
        match self.floor_entry() {
            None => true,
            Some(floor) => rank_order(candidate, floor) == Ordering::Less,
        }
    }

    /// Returns `true` if the candidate was inserted.
    pub fn insert(&mut self, candidate: ScoredPattern) -> bool {
        if !self.would_admit(&candidate) {
            return false;
        }
        let at = self
            .entries
            .partition_point(|e| rank_order(e, &candidate) == Ordering::Less);
        self.members.insert(candidate.pattern.clone());
        self.entries.insert(at, candidate);
        if self.entries.len() > self.capacity {
            let evicted = self.entries.pop().expect("over capacity");
            self.members.remove(&evicted.pattern);
        }
        true
    }

    /// Whether some pattern of the form `prefix ++ X` (X non-empty) with
    /// support at most `bound` could still rank above the k-th entry.
    ///
    /// Scores never exceed supports, so this needs `bound > floor`, except on
    /// an exact tie where the k-th entry also scores its full support; then
    /// only the lexicographic tie-break is left to decide.
    pub fn admits_bound(&self, bound: Fraction, prefix: &[ItemId]) -> bool {
        let Some(floor) = self.floor_entry() else {
            return true;
        };
        match bound.cmp(&floor.score) {
            Ordering::Greater => true,
            Ordering::Less => false,
            Ordering::Equal => floor.support == floor.score && extension_may_precede(prefix, &floor.pattern),
        }
    }
}

/// Whether some `prefix ++ X` with non-empty `X` sorts before `other`.
fn extension_may_precede(prefix: &[ItemId], other: &[ItemId]) -> bool {
    match prefix.iter().zip(other).position(|(a, b)| a != b) {
        Some(i) => prefix[i] < other[i],
        // one is a prefix of the other
        None => other.len() > prefix.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sp(items: &[u32], score: (i128, i128), support: (i128, i128)) -> ScoredPattern {
        ScoredPattern {
            pattern: Pattern::new(items.iter().map(|&i| ItemId(i)).collect()),
            count: 0,
            score: Fraction::new(score.0, score.1),
            support: Fraction::new(support.0, support.1),
            expected_support: None,
            witness_partition: None,
        }
    }

    #[test]
    fn non_full_always_admits() {
        let mut q = TopKQueue::new(3);
        assert!(q.insert(sp(&[0, 1], (-1, 2), (0, 1))));
        assert!(q.insert(sp(&[1, 0], (-3, 4), (0, 1))));
        assert_eq!(q.floor(), None);
        assert!(q.admits_bound(Fraction::new(-5, 1), &[]));
    }

    #[test]
    fn equal_score_at_floor_is_rejected() {
        let mut q = TopKQueue::new(2);
        q.insert(sp(&[0, 1], (3, 10), (4, 5)));
        q.insert(sp(&[0, 2], (1, 10), (1, 5)));
        assert_eq!(q.floor(), Some(Fraction::new(1, 10)));
        // same score and support, lexicographically later
        assert!(!q.insert(sp(&[1, 2], (1, 10), (1, 5))));
        // same score, lower support
        assert!(!q.insert(sp(&[0, 0], (1, 10), (1, 10))));
        assert_eq!(q.len(), 2);
        assert!(q.insert(sp(&[2, 2], (2, 10), (1, 5))));
        assert_eq!(q.floor(), Some(Fraction::new(2, 10)));
    }

    #[test]
    fn duplicates_are_rejected() {
        let mut q = TopKQueue::new(4);
        assert!(q.insert(sp(&[0, 1], (3, 10), (4, 5))));
        assert!(!q.insert(sp(&[0, 1], (3, 10), (4, 5))));
        assert_eq!(q.len(), 1);
    }

    #[test]
    fn ties_resolve_by_support_then_items() {
        let mut q = TopKQueue::new(4);
        q.insert(sp(&[1, 0], (1, 10), (1, 5)));
        q.insert(sp(&[0, 1], (1, 10), (1, 5)));
        q.insert(sp(&[2, 0], (1, 10), (2, 5)));
        let order: Vec<Vec<u32>> = q
            .entries()
            .iter()
            .map(|e| e.pattern.iter().map(|i| i.0).collect())
            .collect();
        assert_eq!(order, vec![vec![2, 0], vec![0, 1], vec![1, 0]]);
    }

    fn ids(v: &[u32]) -> Vec<ItemId> {
        v.iter().map(|&i| ItemId(i)).collect()
    }

    #[test]
    fn bound_admission() {
        let mut q = TopKQueue::new(1);
        q.insert(sp(&[0, 1], (3, 10), (4, 5)));
        assert!(q.admits_bound(Fraction::new(4, 10), &ids(&[2])));
        assert!(!q.admits_bound(Fraction::new(3, 10), &ids(&[0])));
        assert!(!q.admits_bound(Fraction::new(2, 10), &ids(&[0])));

        // k-th entry scores its whole support: only lexicographic ties remain
        let mut q = TopKQueue::new(1);
        q.insert(sp(&[1, 1], (0, 1), (0, 1)));
        assert!(q.admits_bound(Fraction::ZERO, &ids(&[0])));
        assert!(q.admits_bound(Fraction::ZERO, &ids(&[1])));
        assert!(!q.admits_bound(Fraction::ZERO, &ids(&[1, 1])));
        assert!(!q.admits_bound(Fraction::ZERO, &ids(&[2])));
        assert!(!q.admits_bound(Fraction::ZERO, &ids(&[1, 2])));
    }

    #[test]
    fn may_precede() {
        assert!(extension_may_precede(&ids(&[]), &ids(&[0])));
        assert!(!extension_may_precede(&ids(&[]), &ids(&[])));
        assert!(extension_may_precede(&ids(&[0]), &ids(&[0, 5])));
        assert!(!extension_may_precede(&ids(&[0, 5]), &ids(&[0, 5])));
        assert!(!extension_may_precede(&ids(&[0, 5, 1]), &ids(&[0, 5])));
        assert!(extension_may_precede(&ids(&[0, 4, 9]), &ids(&[0, 5])));
        assert!(!extension_may_precede(&ids(&[0, 6]), &ids(&[0, 5, 1])));
    }

    proptest! {
        #[test]
        fn invariants_under_random_inserts(
            ops in prop::collection::vec((prop::collection::vec(0u32..3, 2..4), -5i128..6, 0i128..6), 1..60),
            k in 1usize..6,
        ) {
            let mut q = TopKQueue::new(k);
            let mut last_floor: Option<ScoredPattern> = None;
            let mut all: Vec<ScoredPattern> = Vec::new();
            for (items, score, support) in ops {
                let c = sp(&items, (score, 5), (support.max(score), 5));
                if all.iter().any(|e| e.pattern == c.pattern) {
                    // a re-insert of a known pattern is always a no-op
                    let before = q.entries().to_vec();
                    if q.contains(&c.pattern) {
                        prop_assert!(!q.insert(c));
                        prop_assert_eq!(q.entries(), &before[..]);
                    }
                    continue;
                }
                all.push(c.clone());
                q.insert(c);
                prop_assert!(q.len() <= k);
                let mut pats: Vec<_> = q.entries().iter().map(|e| e.pattern.clone()).collect();
                pats.sort();
                pats.dedup();
                prop_assert_eq!(pats.len(), q.len());
                prop_assert!(q.entries().windows(2).all(|w| rank_order(&w[0], &w[1]) == Ordering::Less));
                if let Some(f) = q.floor_entry() {
                    if let Some(prev) = &last_floor {
                        prop_assert!(rank_order(f, prev) != Ordering::Greater);
                        prop_assert!(f.score >= prev.score);
                    }
                    last_floor = Some(f.clone());
                }
            }
            all.sort_by(rank_order);
            all.truncate(k);
            prop_assert_eq!(q.entries(), &all[..]);
        }
    }
}
