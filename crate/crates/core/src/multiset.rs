//! Canonical multisets: sorted unique symbols with positive counts.

use std::fmt;

/// A multiset in canonical form.
///
/// Entries are kept sorted by symbol with strictly increasing symbols and
/// counts of at least one, so two multisets with the same contents compare
/// equal regardless of how they were built.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Multiset<S> {
    entries: Vec<(S, u64)>,
    total: u64,
}

impl<S> Default for Multiset<S> {
    fn default() -> Self {
        Multiset {
            entries: Vec::new(),
            total: 0,
        }
    }
}

impl<S: fmt::Debug> fmt::Debug for Multiset<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map()
            .entries(self.entries.iter().map(|(s, c)| (s, c)))
            .finish()
    }
}

impl<S: Ord> Multiset<S> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a multiset from `(symbol, count)` pairs in any order. Repeated
    /// symbols are merged and zero counts dropped.
    pub fn from_counts<I: IntoIterator<Item = (S, u64)>>(counts: I) -> Self {
        let mut entries: Vec<(S, u64)> = counts.into_iter().filter(|(_, c)| *c > 0).collect();
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        let mut merged: Vec<(S, u64)> = Vec::with_capacity(entries.len());
        for (symbol, count) in entries {
            match merged.last_mut() {
                Some((last, c)) if *last == symbol => *c += count,
                _ => merged.push((symbol, count)),
            }
        }
        let total = merged.iter().map(|(_, c)| c).sum();
        Multiset {
            entries: merged,
            total,
        }
    }

    /// Builds from entries that are already canonical. Used where the caller
    /// produces symbols in order, e.g. an in-order tree walk.
    pub(crate) fn from_sorted_unchecked(entries: Vec<(S, u64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|(_, c)| *c > 0));
        let total = entries.iter().map(|(_, c)| c).sum();
        Multiset { entries, total }
    }

    /// Multiplicity of `symbol`, zero if absent.
    pub fn count(&self, symbol: &S) -> u64 {
        self.entries
            .binary_search_by(|(s, _)| s.cmp(symbol))
            .map_or(0, |i| self.entries[i].1)
    }

    pub fn insert(&mut self, symbol: S) {
        match self.entries.binary_search_by(|(s, _)| s.cmp(&symbol)) {
            Ok(i) => self.entries[i].1 += 1,
            Err(i) => self.entries.insert(i, (symbol, 1)),
        }
        self.total += 1;
    }
}

impl<S> Multiset<S> {
    /// Total number of elements, `|M|`.
    #[inline]
    pub fn len(&self) -> u64 {
        self.total
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    /// Number of distinct symbols, `M`.
    #[inline]
    pub fn unique_len(&self) -> usize {
        self.entries.len()
    }

    /// `(symbol, count)` pairs in increasing symbol order.
    #[inline]
    pub fn entries(&self) -> &[(S, u64)] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<(S, u64)> {
        self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (&S, u64)> + '_ {
        self.entries.iter().map(|(s, c)| (s, *c))
    }

    /// Every element with repetition, in canonical order.
    pub fn elements(&self) -> impl DoubleEndedIterator<Item = &S> + '_ {
        self.entries
            .iter()
            .flat_map(|(s, c)| std::iter::repeat_n(s, *c as usize))
    }
}

impl<S: Ord> FromIterator<S> for Multiset<S> {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut symbols: Vec<S> = iter.into_iter().collect();
        symbols.sort();
        let mut entries: Vec<(S, u64)> = Vec::new();
        for symbol in symbols {
            match entries.last_mut() {
                Some((last, c)) if *last == symbol => *c += 1,
                _ => entries.push((symbol, 1)),
            }
        }
        Self::from_sorted_unchecked(entries)
    }
}
