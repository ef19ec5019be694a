//! Position-level templates for binary sequential partitions and sequential
//! compositions.
//!
//! Both depend only on lengths, never on the items involved, so they are
//! generated once per length (partitions) or per unordered length pair
//! (compositions) and applied to concrete patterns afterwards.

use std::collections::HashMap;
use std::sync::Arc;

use crate::corpus::{ItemId, Pattern};
use crate::error::{Error, Result};

/// Templates are bitmasks over positions.
pub const MAX_TEMPLATE_LEN: usize = 64;

/// Lengths up to this value are retained by [`TemplateCache`] by default.
pub const DEFAULT_RETAIN_LEN: usize = 12;

/// Lexicographic successor of a `k`-combination of `0..n`, in place.
/// Returns `false` once `combo` is the last combination.
pub fn next_combination(combo: &mut [usize], n: usize) -> bool {
    let k = combo.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if combo[i] < n - k + i {
            combo[i] += 1;
            for j in i + 1..k {
                combo[j] = combo[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// All `k`-combinations of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Combinations {
    Combinations {
        n,
        current: (0..k).collect(),
        done: k > n,
    }
}

pub struct Combinations {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        self.done = !next_combination(&mut self.current, self.n);
        Some(out)
    }
}

fn mask_of(positions: &[usize]) -> u64 {
    positions.iter().fold(0u64, |m, &p| m | (1u64 << p))
}

/// Selects the left part of a binary sequential partition of a pattern of
/// length `length`; the right part is the complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BspTemplate {
    length: usize,
    left: u64,
}

impl BspTemplate {
    pub fn length(&self) -> usize {
        self.length
    }

    pub fn left_positions(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.length).filter(|&p| self.left & (1 << p) != 0)
    }

    pub fn left_len(&self) -> usize {
        self.left.count_ones() as usize
    }

    pub fn right_len(&self) -> usize {
        self.length - self.left_len()
    }

    /// Splits `pattern` into the buffers, reusing their allocations.
    pub fn split_into(&self, pattern: &[ItemId], left: &mut Vec<ItemId>, right: &mut Vec<ItemId>) {
        assert_eq!(pattern.len(), self.length, "partition template length mismatch");
        left.clear();
        right.clear();
        for (p, &item) in pattern.iter().enumerate() {
            if self.left & (1 << p) != 0 {
                left.push(item);
            } else {
                right.push(item);
            }
        }
    }
}

/// One interleaving of a length-`first_len` and a length-`second_len`
/// sequence. Bit `j` of the mask set means output slot `j` takes the next
/// element of the first input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CompositionTemplate {
    first_len: usize,
    second_len: usize,
    first_slots: u64,
}

/// Which input an output slot draws from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Source {
    First,
    Second,
}

impl CompositionTemplate {
    pub fn lengths(&self) -> (usize, usize) {
        (self.first_len, self.second_len)
    }

    pub fn len(&self) -> usize {
        self.first_len + self.second_len
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn slot_sources(&self) -> impl Iterator<Item = Source> + '_ {
        (0..self.len()).map(|j| {
            if self.first_slots & (1 << j) != 0 {
                Source::First
            } else {
                Source::Second
            }
        })
    }

    /// The same interleaving with the roles of the inputs exchanged.
    pub fn transposed(&self) -> CompositionTemplate {
        let full = if self.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.len()) - 1
        };
        CompositionTemplate {
            first_len: self.second_len,
            second_len: self.first_len,
            first_slots: !self.first_slots & full,
        }
    }

    pub fn apply_into(&self, first: &[ItemId], second: &[ItemId], out: &mut Vec<ItemId>) {
        assert!(
            first.len() == self.first_len && second.len() == self.second_len,
            "composition template length mismatch"
        );
        out.clear();
        let (mut i, mut j) = (0, 0);
        for slot in 0..self.len() {
            if self.first_slots & (1 << slot) != 0 {
                out.push(first[i]);
                i += 1;
            } else {
                out.push(second[j]);
                j += 1;
            }
        }
    }
}

fn check_len(len: usize) -> Result<()> {
    if len > MAX_TEMPLATE_LEN {
        return Err(Error::PatternTooLong(len));
    }
    Ok(())
}

/// Every binary sequential partition of a length-`len` pattern, each
/// unordered pair exactly once: left sizes run from 1 to `len / 2`, and when
/// both halves have equal size only the left sets containing position 0 are
/// kept. There are `2^(len-1) - 1` of them.
pub fn bsp_templates(len: usize) -> Result<Vec<BspTemplate>> {
    if len < 2 {
        return Err(Error::PartitionTooShort(len));
    }
    check_len(len)?;
    let mut out = Vec::new();
    for left_len in 1..=len / 2 {
        let symmetric = 2 * left_len == len;
        for combo in combinations(len, left_len) {
            if symmetric && combo[0] != 0 {
                // lexicographic order: every later combination also lacks 0
                break;
            }
            out.push(BspTemplate {
                length: len,
                left: mask_of(&combo),
            });
        }
    }
    Ok(out)
}

/// The first template [`bsp_templates`] yields: `{0}` against the rest.
pub fn first_bsp_template(len: usize) -> Result<BspTemplate> {
    if len < 2 {
        return Err(Error::PartitionTooShort(len));
    }
    check_len(len)?;
    Ok(BspTemplate { length: len, left: 1 })
}

/// All `C(first_len + second_len, first_len)` interleavings, ordered
/// lexicographically by the slots taken from the first input.
pub fn composition_templates(first_len: usize, second_len: usize) -> Vec<CompositionTemplate> {
    assert!(first_len >= 1 && second_len >= 1, "composition sides must be non-empty");
    let total = first_len + second_len;
    assert!(total <= MAX_TEMPLATE_LEN, "composition too long");
    combinations(total, first_len)
        .map(|combo| CompositionTemplate {
            first_len,
            second_len,
            first_slots: mask_of(&combo),
        })
        .collect()
}

pub fn apply_bsp(pattern: &[ItemId], template: &BspTemplate) -> (Pattern, Pattern) {
    let (mut left, mut right) = (Vec::new(), Vec::new());
    template.split_into(pattern, &mut left, &mut right);
    (Pattern::new(left), Pattern::new(right))
}

pub fn apply_composition(first: &[ItemId], second: &[ItemId], template: &CompositionTemplate) -> Pattern {
    let mut out = Vec::with_capacity(template.len());
    template.apply_into(first, second, &mut out);
    Pattern::new(out)
}

/// Composition templates for a length pair, stored in canonical
/// `(shorter, longer)` orientation.
#[derive(Clone, Debug)]
pub struct CompositionSet {
    templates: Arc<[CompositionTemplate]>,
    swapped: bool,
}

impl CompositionSet {
    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub fn templates(&self) -> &Arc<[CompositionTemplate]> {
        &self.templates
    }

    /// Writes the `index`-th composition of `first` and `second` into `out`.
    /// The set of sequences produced over all indices does not depend on the
    /// stored orientation.
    pub fn apply_into(&self, index: usize, first: &[ItemId], second: &[ItemId], out: &mut Vec<ItemId>) {
        let t = &self.templates[index];
        if self.swapped {
            t.apply_into(second, first, out);
        } else {
            t.apply_into(first, second, out);
        }
    }
}

/// Memoizes templates by length. Lengths above `retain_len` are generated on
/// demand and not kept.
#[derive(Debug)]
pub struct TemplateCache {
    retain_len: usize,
    bsp_by_length: Vec<Option<Arc<[BspTemplate]>>>,
    comp_by_length_pair: HashMap<(usize, usize), Arc<[CompositionTemplate]>>,
    generated: usize,
}

impl Default for TemplateCache {
    fn default() -> Self {
        Self::new(DEFAULT_RETAIN_LEN)
    }
}

impl TemplateCache {
    pub fn new(retain_len: usize) -> Self {
        TemplateCache {
            retain_len,
            bsp_by_length: Vec::new(),
            comp_by_length_pair: HashMap::new(),
            generated: 0,
        }
    }

    /// How many template lists have been generated so far.
    pub fn generated(&self) -> usize {
        self.generated
    }

    pub fn bsp(&mut self, len: usize) -> Result<Arc<[BspTemplate]>> {
        if let Some(Some(cached)) = self.bsp_by_length.get(len) {
            return Ok(cached.clone());
        }
        let templates: Arc<[BspTemplate]> = bsp_templates(len)?.into();
        self.generated += 1;
        if len <= self.retain_len {
            if self.bsp_by_length.len() <= len {
                self.bsp_by_length.resize(len + 1, None);
            }
            self.bsp_by_length[len] = Some(templates.clone());
        }
        Ok(templates)
    }

    pub fn compositions(&mut self, first_len: usize, second_len: usize) -> CompositionSet {
        let key = (first_len.min(second_len), first_len.max(second_len));
        let swapped = first_len > second_len;
        let templates = match self.comp_by_length_pair.get(&key) {
            Some(t) => t.clone(),
            None => {
                let t: Arc<[CompositionTemplate]> = composition_templates(key.0, key.1).into();
                self.generated += 1;
                if key.0 + key.1 <= self.retain_len {
                    self.comp_by_length_pair.insert(key, t.clone());
                }
                t
            }
        };
        CompositionSet { templates, swapped }
    }
}
