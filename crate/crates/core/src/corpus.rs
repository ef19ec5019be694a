//! Sequence databases: token interning, the line-oriented ingestion format,
//! and the cover/support engine used by the scorer and the search.
//!
//! Every record is stored twice: once as its original item order, and once as
//! an item-sorted `(item, position)` index so that "next occurrence of item `i`
//! after position `e` in record `r`" is a pair of binary searches. Per-item
//! postings (records containing the item, and the positions inside each) give
//! singleton covers without scanning.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};

/// Dense identifier of an interned token.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemId(pub u32);

impl ItemId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Bijection between tokens and dense ids, plus the number of records each
/// item occurs in.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ItemTable {
    token_to_id: HashMap<String, ItemId>,
    id_to_token: Vec<String>,
    support_counts: Vec<u32>,
}

impl ItemTable {
    pub fn len(&self) -> usize {
        self.id_to_token.len()
    }

    pub fn is_empty(&self) -> bool {
        self.id_to_token.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<ItemId> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: ItemId) -> &str {
        &self.id_to_token[id.index()]
    }

    /// Number of records containing `id` at least once.
    pub fn support_count(&self, id: ItemId) -> u32 {
        self.support_counts[id.index()]
    }

    pub fn ids(&self) -> impl Iterator<Item = ItemId> + '_ {
        (0..self.id_to_token.len() as u32).map(ItemId)
    }

    /// Resolves every token of `tokens`; `None` if any is unknown.
    pub fn pattern<S: AsRef<str>>(&self, tokens: &[S]) -> Option<Pattern> {
        tokens
            .iter()
            .map(|t| self.id(t.as_ref()))
            .collect::<Option<Vec<_>>>()
            .map(Pattern::from)
    }

    /// Tokens of `pattern` joined by single spaces.
    pub fn render(&self, pattern: &[ItemId]) -> String {
        let mut out = String::new();
        for (i, id) in pattern.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push_str(self.token(*id));
        }
        out
    }

    fn intern(&mut self, token: &str) -> ItemId {
        if let Some(id) = self.token_to_id.get(token) {
            return *id;
        }
        let id = ItemId(self.id_to_token.len() as u32);
        self.token_to_id.insert(token.to_owned(), id);
        self.id_to_token.push(token.to_owned());
        self.support_counts.push(0);
        id
    }
}

/// One database record.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Sequence {
    items: Vec<ItemId>,
}

impl Sequence {
    pub fn new(items: Vec<ItemId>) -> Self {
        Sequence { items }
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// An ordered list of items; repetitions are allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pattern {
    items: Vec<ItemId>,
}

impl Pattern {
    pub fn new(items: Vec<ItemId>) -> Self {
        Pattern { items }
    }

    pub fn items(&self) -> &[ItemId] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `⟨self | item⟩`.
    pub fn extended(&self, item: ItemId) -> Pattern {
        let mut items = Vec::with_capacity(self.items.len() + 1);
        items.extend_from_slice(&self.items);
        items.push(item);
        Pattern { items }
    }
}

impl From<Vec<ItemId>> for Pattern {
    fn from(items: Vec<ItemId>) -> Self {
        Pattern { items }
    }
}

impl From<&[ItemId]> for Pattern {
    fn from(items: &[ItemId]) -> Self {
        Pattern {
            items: items.to_vec(),
        }
    }
}

impl std::borrow::Borrow<[ItemId]> for Pattern {
    fn borrow(&self) -> &[ItemId] {
        &self.items
    }
}

impl std::ops::Deref for Pattern {
    type Target = [ItemId];

    fn deref(&self) -> &[ItemId] {
        &self.items
    }
}

/// A record covered by a pattern, with the leftmost position at which a
/// greedy match of the pattern ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverEntry {
    pub record: u32,
    pub match_end: u32,
}

/// The cover of a pattern, sorted by record id.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoverState {
    entries: Vec<CoverEntry>,
}

impl CoverState {
    pub fn new(entries: Vec<CoverEntry>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].record < w[1].record));
        CoverState { entries }
    }

    pub fn entries(&self) -> &[CoverEntry] {
        &self.entries
    }

    pub fn count(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn records(&self) -> impl Iterator<Item = u32> + '_ {
        self.entries.iter().map(|e| e.record)
    }
}

/// Records containing one item, and where.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Postings {
    records: Vec<u32>,
    // positions of the j-th record are positions[offsets[j]..offsets[j + 1]]
    offsets: Vec<u32>,
    positions: Vec<u32>,
}

impl Postings {
    fn positions_at(&self, slot: usize) -> &[u32] {
        &self.positions[self.offsets[slot] as usize..self.offsets[slot + 1] as usize]
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SequenceDatabase {
    records: Vec<Sequence>,
    items: ItemTable,
    postings: Vec<Postings>,
    // per record, (item, position) pairs sorted by item then position
    record_index: Vec<(ItemId, u32)>,
    record_offsets: Vec<u32>,
}

impl SequenceDatabase {
    /// Reads the line format: one record per line, whitespace-separated
    /// tokens, lines whose first non-blank character is `#` are comments.
    /// Blank lines are kept as empty records.
    pub fn parse<R: BufRead>(reader: R) -> Result<Self> {
        let mut builder = Builder::default();
        for line in reader.lines() {
            let line = line?;
            if line.trim_start().starts_with('#') {
                continue;
            }
            builder.push_record(line.split_whitespace());
        }
        Ok(builder.finish())
    }

    pub fn parse_str(text: &str) -> Self {
        Self::parse(text.as_bytes()).expect("reading from memory cannot fail")
    }

    /// Builds a database from already tokenized records.
    pub fn from_token_records<R, T>(records: R) -> Self
    where
        R: IntoIterator,
        R::Item: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let mut builder = Builder::default();
        for record in records {
            builder.push_record(record);
        }
        builder.finish()
    }

    /// Writes the database back in the line format.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for record in &self.records {
            let line = self.items.render(record.items());
            out.write_all(line.as_bytes())?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// Number of records, empty ones included.
    pub fn n(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn records(&self) -> &[Sequence] {
        &self.records
    }

    pub fn item_table(&self) -> &ItemTable {
        &self.items
    }

    pub fn num_items(&self) -> usize {
        self.items.len()
    }

    /// Records containing `item`, ascending.
    pub fn item_records(&self, item: ItemId) -> &[u32] {
        &self.postings[item.index()].records
    }

    /// Sorted positions of `item` inside `record`; empty if absent.
    pub fn item_positions(&self, item: ItemId, record: u32) -> &[u32] {
        let postings = &self.postings[item.index()];
        match postings.records.binary_search(&record) {
            Ok(slot) => postings.positions_at(slot),
            Err(_) => &[],
        }
    }

    /// Smallest position of `item` in `record` strictly after `after`
    /// (or anywhere when `after` is `None`).
    #[inline]
    pub fn next_occurrence(&self, record: u32, item: ItemId, after: Option<u32>) -> Option<u32> {
        let r = record as usize;
        let slice =
            &self.record_index[self.record_offsets[r] as usize..self.record_offsets[r + 1] as usize];
        let start = slice.partition_point(|&(it, _)| it < item);
        let run = &slice[start..];
        let run = &run[..run.partition_point(|&(it, _)| it == item)];
        let idx = match after {
            None => 0,
            Some(e) => run.partition_point(|&(_, pos)| pos <= e),
        };
        run.get(idx).map(|&(_, pos)| pos)
    }

    /// Leftmost-greedy match end of `pattern` in `record`, if it matches.
    pub fn match_end(&self, pattern: &[ItemId], record: u32) -> Option<u32> {
        let mut end = None;
        for &item in pattern {
            end = Some(self.next_occurrence(record, item, end)?);
        }
        end
    }

    /// The cover of `pattern`. Singletons are read straight from the postings.
    ///
    /// Panics on an empty pattern or an item id outside the table.
    pub fn cover(&self, pattern: &[ItemId]) -> CoverState {
        let (&first, rest) = pattern.split_first().expect("cover of an empty pattern");
        let mut state = self.singleton_cover(first);
        for &item in rest {
            state = self.extend_cover(&state, item);
        }
        state
    }

    pub fn singleton_cover(&self, item: ItemId) -> CoverState {
        let postings = &self.postings[item.index()];
        let entries = postings
            .records
            .iter()
            .enumerate()
            .map(|(slot, &record)| CoverEntry {
                record,
                match_end: postings.positions[postings.offsets[slot] as usize],
            })
            .collect();
        CoverState { entries }
    }

    /// Cover of `⟨S | item⟩` from the cover of `S`: keeps the parent records
    /// where `item` occurs after the parent's match end, with the first such
    /// position as the new match end.
    pub fn extend_cover(&self, parent: &CoverState, item: ItemId) -> CoverState {
        let postings = &self.postings[item.index()];
        let mut entries = Vec::new();
        let mut lo = 0usize;
        for entry in &parent.entries {
            lo += postings.records[lo..].partition_point(|&r| r < entry.record);
            if lo == postings.records.len() {
                break;
            }
            if postings.records[lo] != entry.record {
                continue;
            }
            let positions = postings.positions_at(lo);
            let idx = positions.partition_point(|&p| p <= entry.match_end);
            if let Some(&pos) = positions.get(idx) {
                entries.push(CoverEntry {
                    record: entry.record,
                    match_end: pos,
                });
            }
        }
        CoverState { entries }
    }

    /// Number of records containing `pattern`. Only the records of the
    /// pattern's rarest item are examined. The empty pattern covers every
    /// record.
    pub fn count(&self, pattern: &[ItemId]) -> usize {
        let Some(rarest) = pattern
            .iter()
            .min_by_key(|item| self.postings[item.index()].records.len())
        else {
            return self.n();
        };
        if pattern.len() == 1 {
            return self.postings[rarest.index()].records.len();
        }
        self.postings[rarest.index()]
            .records
            .iter()
            .filter(|&&r| self.match_end(pattern, r).is_some())
            .count()
    }

    /// Whether some record holds every item of `items` at least as often as
    /// `items` does, in any order. Every reordering of a pattern has zero
    /// support when this is false.
    pub fn contains_multiset(&self, items: &[ItemId]) -> bool {
        let mut counts: Vec<(ItemId, usize)> = Vec::with_capacity(items.len());
        for &item in items {
            match counts.iter_mut().find(|(i, _)| *i == item) {
                Some((_, c)) => *c += 1,
                None => counts.push((item, 1)),
            }
        }
        let Some(&(rarest, _)) = counts
            .iter()
            .min_by_key(|(item, _)| self.postings[item.index()].records.len())
        else {
            return !self.is_empty();
        };
        self.postings[rarest.index()]
            .records
            .iter()
            .any(|&r| counts.iter().all(|&(item, c)| self.item_positions(item, r).len() >= c))
    }

    /// `count / n`.
    pub fn support(&self, pattern: &[ItemId]) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::EmptyDatabase);
        }
        Ok(self.count(pattern) as f64 / self.n() as f64)
    }
}

/// Greedy left-to-right subsequence test.
pub fn is_subsequence<T: PartialEq>(candidate: &[T], record: &[T]) -> bool {
    let mut want = candidate.iter().peekable();
    for x in record {
        match want.peek() {
            None => return true,
            Some(&c) if c == x => {
                want.next();
            }
            Some(_) => {}
        }
    }
    want.peek().is_none()
}

/// Computes the covers of many single-item extensions of one parent in a
/// single pass over the parent's record suffixes.
///
/// Holds scratch buffers sized by the vocabulary so repeated calls do not
/// allocate per item.
#[derive(Debug, Default)]
pub struct BulkExtender {
    slot_of: Vec<u32>,
    seen_stamp: Vec<u32>,
    stamp: u32,
}

const NO_SLOT: u32 = u32::MAX;

impl BulkExtender {
    pub fn new(num_items: usize) -> Self {
        BulkExtender {
            slot_of: vec![NO_SLOT; num_items],
            seen_stamp: vec![0; num_items],
            stamp: 0,
        }
    }

    /// Returns one cover per entry of `items`, equal to
    /// `db.extend_cover(parent, items[j])`. `items` must be distinct.
    pub fn extend_many(
        &mut self,
        db: &SequenceDatabase,
        parent: &CoverState,
        items: &[ItemId],
    ) -> Vec<CoverState> {
        if self.slot_of.len() < db.num_items() {
            self.slot_of.resize(db.num_items(), NO_SLOT);
            self.seen_stamp.resize(db.num_items(), 0);
        }
        for (slot, item) in items.iter().enumerate() {
            debug_assert_eq!(self.slot_of[item.index()], NO_SLOT, "duplicate item");
            self.slot_of[item.index()] = slot as u32;
        }
        let mut children = vec![CoverState::default(); items.len()];
        for entry in &parent.entries {
            self.next_stamp();
            let record = db.records[entry.record as usize].items();
            for (pos, item) in record
                .iter()
                .enumerate()
                .skip(entry.match_end as usize + 1)
            {
                let slot = self.slot_of[item.index()];
                if slot == NO_SLOT || self.seen_stamp[item.index()] == self.stamp {
                    continue;
                }
                self.seen_stamp[item.index()] = self.stamp;
                children[slot as usize].entries.push(CoverEntry {
                    record: entry.record,
                    match_end: pos as u32,
                });
            }
        }
        for item in items {
            self.slot_of[item.index()] = NO_SLOT;
        }
        children
    }

    fn next_stamp(&mut self) {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.seen_stamp.iter_mut().for_each(|s| *s = 0);
            self.stamp = 1;
        }
    }
}

#[derive(Default)]
struct Builder {
    items: ItemTable,
    records: Vec<Sequence>,
}

impl Builder {
    fn push_record<I, T>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let items = tokens
            .into_iter()
            .map(|t| self.items.intern(t.as_ref()))
            .collect();
        self.records.push(Sequence::new(items));
    }

    fn finish(self) -> SequenceDatabase {
        let Builder { mut items, records } = self;
        let num_items = items.len();

        let mut record_index = Vec::with_capacity(records.iter().map(Sequence::len).sum());
        let mut record_offsets = Vec::with_capacity(records.len() + 1);
        record_offsets.push(0u32);
        for record in &records {
            let start = record_index.len();
            record_index.extend(
                record
                    .items()
                    .iter()
                    .enumerate()
                    .map(|(pos, &item)| (item, pos as u32)),
            );
            record_index[start..].sort_unstable();
            record_offsets.push(record_index.len() as u32);
        }

        let mut postings = vec![Postings::default(); num_items];
        for r in 0..records.len() {
            let slice = &record_index[record_offsets[r] as usize..record_offsets[r + 1] as usize];
            let mut i = 0;
            while i < slice.len() {
                let item = slice[i].0;
                let p = &mut postings[item.index()];
                if p.offsets.is_empty() {
                    p.offsets.push(0);
                }
                p.records.push(r as u32);
                while i < slice.len() && slice[i].0 == item {
                    p.positions.push(slice[i].1);
                    i += 1;
                }
                p.offsets.push(p.positions.len() as u32);
            }
        }
        for (id, p) in postings.iter_mut().enumerate() {
            if p.offsets.is_empty() {
                p.offsets.push(0);
            }
            items.support_counts[id] = p.records.len() as u32;
        }

        SequenceDatabase {
            records,
            items,
            postings,
            record_index,
            record_offsets,
        }
    }
}
