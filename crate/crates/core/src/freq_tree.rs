//! Order-statistics search tree over the symbols of a multiset.
//!
//! Each node stores one distinct symbol and the total number of elements in
//! the subtree rooted at it. A node's own count is its branch total minus the
//! totals of its two children, and the cumulative count `c_x` of a symbol is
//! the sum of the interval sizes left of it, gathered on the way down.
//!
//! For the multiset `{a, b, b, c, c, c, d, e}` a balanced build gives
//!
//! ```text
//!         b:8
//!        /   \
//!      a:1   d:5
//!           /   \
//!         c:3   e:1
//! ```
//!
//! so `b` owns indices `[1, 3)`, `c` owns `[3, 6)`, and so on.
//!
//! Lookups, insertion and removal touch one root-to-node path each. The fused
//! [`FreqTree::lookup_and_remove`] and [`FreqTree::insert_and_lookup`] update
//! branch totals on the way down. Every node touched is counted so the cost
//! of an operation can be measured in node visits.

use std::cell::Cell;
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::multiset::Multiset;

const NIL: usize = usize::MAX;

#[derive(Clone, Debug)]
struct Node<S> {
    symbol: Option<S>,
    total: u64,
    left: usize,
    right: usize,
}

impl<S> Node<S> {
    #[inline]
    fn symbol(&self) -> &S {
        self.symbol.as_ref().expect("live node has a symbol")
    }
}

#[derive(Clone, Copy, Debug)]
enum Link {
    Root,
    Left(usize),
    Right(usize),
}

/// Binary search tree with subtree totals, representing a multiset.
#[derive(Clone, Debug)]
pub struct FreqTree<S> {
    nodes: Vec<Node<S>>,
    free: Vec<usize>,
    root: usize,
    unique: usize,
    visits: Cell<u64>,
}

impl<S> Default for FreqTree<S> {
    fn default() -> Self {
        FreqTree {
            nodes: Vec::new(),
            free: Vec::new(),
            root: NIL,
            unique: 0,
            visits: Cell::new(0),
        }
    }
}

/// Size of the left subtree when `n` sorted keys are laid out as a complete
/// tree whose last level is filled from the right.
fn balanced_left_size(n: usize) -> usize {
    if n <= 1 {
        return 0;
    }
    let height = (usize::BITS - 1 - n.leading_zeros()) as usize;
    let upper = (1usize << height) - 1;
    let last = n - upper;
    let half = 1usize << (height - 1);
    let mirrored = (half - 1) + last.min(half);
    n - 1 - mirrored
}

impl<S> FreqTree<S> {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    fn branch_total(&self, idx: usize) -> u64 {
        if idx == NIL {
            0
        } else {
            self.nodes[idx].total
        }
    }

    #[inline]
    fn visit(&self) {
        self.visits.set(self.visits.get() + 1);
    }

    #[inline]
    fn set_link(&mut self, link: Link, idx: usize) {
        match link {
            Link::Root => self.root = idx,
            Link::Left(p) => self.nodes[p].left = idx,
            Link::Right(p) => self.nodes[p].right = idx,
        }
    }

    fn alloc(&mut self, symbol: S) -> usize {
        let node = Node {
            symbol: Some(symbol),
            total: 1,
            left: NIL,
            right: NIL,
        };
        match self.free.pop() {
            Some(idx) => {
                self.nodes[idx] = node;
                idx
            }
            None => {
                self.nodes.push(node);
                self.nodes.len() - 1
            }
        }
    }

    /// Total number of elements, `|M_n|`.
    #[inline]
    pub fn total(&self) -> u64 {
        self.branch_total(self.root)
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.root == NIL
    }

    /// Number of distinct symbols currently stored.
    #[inline]
    pub fn unique_len(&self) -> usize {
        self.unique
    }

    /// Number of nodes on the longest root-to-leaf path.
    pub fn height(&self) -> usize {
        let mut best = 0;
        let mut stack = Vec::new();
        if self.root != NIL {
            stack.push((self.root, 1));
        }
        while let Some((idx, depth)) = stack.pop() {
            best = best.max(depth);
            let node = &self.nodes[idx];
            for child in [node.left, node.right] {
                if child != NIL {
                    stack.push((child, depth + 1));
                }
            }
        }
        best
    }

    /// Nodes touched by all operations since construction or the last reset.
    #[inline]
    pub fn node_visits(&self) -> u64 {
        self.visits.get()
    }

    pub fn reset_node_visits(&self) {
        self.visits.set(0);
    }

    /// In-order walk yielding `(symbol, count)`.
    pub fn iter(&self) -> impl Iterator<Item = (&S, u64)> + '_ {
        let mut stack = Vec::new();
        let mut cur = self.root;
        std::iter::from_fn(move || {
            while cur != NIL {
                stack.push(cur);
                cur = self.nodes[cur].left;
            }
            let idx = stack.pop()?;
            let node = &self.nodes[idx];
            cur = node.right;
            let count = node.total - self.branch_total(node.left) - self.branch_total(node.right);
            Some((node.symbol(), count))
        })
    }

    /// Index `i`, `0 <= i < total`, to the symbol whose interval
    /// `[c_x, c_x + p_x)` contains it.
    pub fn reverse_lookup(&self, index: u64) -> Result<(&S, u64, u64)> {
        let total = self.total();
        if index >= total {
            return Err(Error::IndexOutOfRange { index, total });
        }
        let mut i = index;
        let mut offset = 0;
        let mut cur = self.root;
        loop {
            self.visit();
            let node = &self.nodes[cur];
            let left = self.branch_total(node.left);
            let count = node.total - left - self.branch_total(node.right);
            if i < left {
                cur = node.left;
            } else if i < left + count {
                return Ok((node.symbol(), offset + left, count));
            } else {
                i -= left + count;
                offset += left + count;
                cur = node.right;
            }
        }
    }

    /// Sorted unique entries as a canonical multiset.
    pub fn to_multiset(&self) -> Multiset<S>
    where
        S: Ord + Clone,
    {
        Multiset::from_sorted_unchecked(self.iter().map(|(s, c)| (s.clone(), c)).collect())
    }

    /// Checks ordering, branch totals and the unique count.
    #[doc(hidden)]
    pub fn validate(&self) -> bool
    where
        S: Ord,
    {
        fn walk<S: Ord>(tree: &FreqTree<S>, idx: usize, nodes: &mut usize) -> Option<u64> {
            if idx == NIL {
                return Some(0);
            }
            *nodes += 1;
            let node = &tree.nodes[idx];
            let left = walk(tree, node.left, nodes)?;
            let right = walk(tree, node.right, nodes)?;
            (node.total > left + right).then_some(node.total)
        }
        let mut nodes = 0;
        let totals_ok = walk(self, self.root, &mut nodes).is_some();
        let symbols: Vec<&S> = self.iter().map(|(s, _)| s).collect();
        totals_ok && nodes == self.unique && symbols.windows(2).all(|w| w[0] < w[1])
    }
}

impl<S: Ord> FreqTree<S> {
    /// Builds a tree of minimal height from a canonical multiset.
    pub fn from_multiset(multiset: Multiset<S>) -> Self {
        let entries = multiset.into_entries();
        let mut tree = FreqTree {
            nodes: Vec::with_capacity(entries.len()),
            free: Vec::new(),
            root: NIL,
            unique: entries.len(),
            visits: Cell::new(0),
        };
        for (symbol, count) in entries {
            tree.nodes.push(Node {
                symbol: Some(symbol),
                total: count,
                left: NIL,
                right: NIL,
            });
        }
        tree.root = tree.link_range(0, tree.nodes.len());
        tree
    }

    /// Like [`from_multiset`](Self::from_multiset), cloning the symbols.
    pub fn build_balanced(multiset: &Multiset<S>) -> Self
    where
        S: Clone,
    {
        Self::from_multiset(multiset.clone())
    }

    // Nodes [lo, hi) hold their own counts in `total` on entry.
    fn link_range(&mut self, lo: usize, hi: usize) -> usize {
        if lo == hi {
            return NIL;
        }
        let mid = lo + balanced_left_size(hi - lo);
        let left = self.link_range(lo, mid);
        let right = self.link_range(mid + 1, hi);
        let total = self.nodes[mid].total + self.branch_total(left) + self.branch_total(right);
        let node = &mut self.nodes[mid];
        node.left = left;
        node.right = right;
        node.total = total;
        mid
    }

    /// `(c_x, p_x)` for a stored symbol.
    pub fn forward_lookup(&self, symbol: &S) -> Result<(u64, u64)> {
        let mut offset = 0;
        let mut cur = self.root;
        while cur != NIL {
            self.visit();
            let node = &self.nodes[cur];
            let left = self.branch_total(node.left);
            match symbol.cmp(node.symbol()) {
                Ordering::Less => cur = node.left,
                Ordering::Equal => {
                    let count = node.total - left - self.branch_total(node.right);
                    return Ok((offset + left, count));
                }
                Ordering::Greater => {
                    offset += node.total - self.branch_total(node.right);
                    cur = node.right;
                }
            }
        }
        Err(Error::SymbolNotFound)
    }

    /// Adds one occurrence of `symbol` and returns its `(c_x, p_x)` in the
    /// updated tree.
    pub fn insert_and_lookup(&mut self, symbol: S) -> (u64, u64) {
        let mut offset = 0;
        let mut cur = self.root;
        let mut link = Link::Root;
        while cur != NIL {
            self.visit();
            let (left_idx, right_idx) = (self.nodes[cur].left, self.nodes[cur].right);
            let left = self.branch_total(left_idx);
            let right = self.branch_total(right_idx);
            match symbol.cmp(self.nodes[cur].symbol()) {
                Ordering::Less => {
                    self.nodes[cur].total += 1;
                    link = Link::Left(cur);
                    cur = left_idx;
                }
                Ordering::Equal => {
                    self.nodes[cur].total += 1;
                    let count = self.nodes[cur].total - left - right;
                    return (offset + left, count);
                }
                Ordering::Greater => {
                    offset += self.nodes[cur].total - right;
                    self.nodes[cur].total += 1;
                    link = Link::Right(cur);
                    cur = right_idx;
                }
            }
        }
        let idx = self.alloc(symbol);
        self.set_link(link, idx);
        self.unique += 1;
        (offset, 1)
    }

    /// Finds the symbol owning index `i` and removes one occurrence of it, in
    /// a single descent. Returns `(x, c_x, p_x)` as seen before removal.
    pub fn lookup_and_remove(&mut self, index: u64) -> Result<(S, u64, u64)>
    where
        S: Clone,
    {
        let total = self.total();
        if index >= total {
            return Err(Error::IndexOutOfRange { index, total });
        }
        let mut i = index;
        let mut offset = 0;
        let mut cur = self.root;
        let mut link = Link::Root;
        loop {
            self.visit();
            let (left_idx, right_idx) = (self.nodes[cur].left, self.nodes[cur].right);
            let left = self.branch_total(left_idx);
            let count = self.nodes[cur].total - left - self.branch_total(right_idx);
            self.nodes[cur].total -= 1;
            if i < left {
                link = Link::Left(cur);
                cur = left_idx;
            } else if i < left + count {
                let symbol = if count > 1 {
                    self.nodes[cur].symbol().clone()
                } else {
                    self.delete(cur, link)
                };
                return Ok((symbol, offset + left, count));
            } else {
                i -= left + count;
                offset += left + count;
                link = Link::Right(cur);
                cur = right_idx;
            }
        }
    }

    /// Unlinks a node whose count has dropped to zero. Its branch total must
    /// already equal the sum of its children's totals.
    fn delete(&mut self, idx: usize, link: Link) -> S {
        let Node { left, right, .. } = self.nodes[idx];
        let replacement = if left == NIL {
            right
        } else if right == NIL {
            left
        } else {
            // Promote the in-order successor: the leftmost node of the right
            // subtree.
            let mut succ = right;
            self.visit();
            while self.nodes[succ].left != NIL {
                succ = self.nodes[succ].left;
                self.visit();
            }
            let moved = self.nodes[succ].total - self.branch_total(self.nodes[succ].right);
            let mut parent = NIL;
            let mut walk = right;
            while walk != succ {
                self.nodes[walk].total -= moved;
                parent = walk;
                walk = self.nodes[walk].left;
            }
            if parent != NIL {
                self.nodes[parent].left = self.nodes[succ].right;
                self.nodes[succ].right = right;
            }
            self.nodes[succ].left = left;
            self.nodes[succ].total = self.nodes[idx].total;
            succ
        };
        self.set_link(link, replacement);
        self.unique -= 1;
        self.free.push(idx);
        self.nodes[idx].symbol.take().expect("live node has a symbol")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abbcccde() -> FreqTree<char> {
        FreqTree::from_multiset("abbcccde".chars().collect())
    }

    /// `(symbol, total, left symbol, right symbol)` in pre-order.
    fn shape(tree: &FreqTree<char>) -> Vec<(char, u64, Option<char>, Option<char>)> {
        let mut out = Vec::new();
        let mut stack = vec![tree.root];
        while let Some(idx) = stack.pop() {
            if idx == NIL {
                continue;
            }
            let n = &tree.nodes[idx];
            let sym = |i: usize| (i != NIL).then(|| *tree.nodes[i].symbol());
            out.push((*n.symbol(), n.total, sym(n.left), sym(n.right)));
            stack.push(n.right);
            stack.push(n.left);
        }
        out
    }

    #[test]
    fn balanced_build_shape() {
        let tree = abbcccde();
        assert_eq!(
            shape(&tree),
            vec![
                ('b', 8, Some('a'), Some('d')),
                ('a', 1, None, None),
                ('d', 5, Some('c'), Some('e')),
                ('c', 3, None, None),
                ('e', 1, None, None),
            ]
        );
        assert_eq!(tree.total(), 8);
        assert_eq!(tree.height(), 3);
        assert!(tree.validate());
    }

    #[test]
    fn left_sizes() {
        let sizes: Vec<usize> = (0..9).map(balanced_left_size).collect();
        assert_eq!(sizes, vec![0, 0, 0, 1, 1, 1, 2, 3, 3]);
    }

    #[test]
    fn balanced_height_is_minimal() {
        for n in 1..300usize {
            let m: Multiset<usize> = (0..n).collect();
            let tree = FreqTree::from_multiset(m);
            let bound = (usize::BITS - n.leading_zeros()) as usize; // ceil(log2(n+1))
            assert_eq!(tree.height(), bound, "n={n}");
            assert!(tree.validate());
        }
    }

    #[test]
    fn empty_and_singleton() {
        let tree: FreqTree<u8> = FreqTree::from_multiset(Multiset::new());
        assert_eq!(tree.total(), 0);
        assert!(tree.is_empty());
        assert!(tree.reverse_lookup(0).is_err());

        let mut tree = FreqTree::from_multiset(Multiset::from_counts([('x', 5)]));
        assert_eq!(tree.total(), 5);
        assert_eq!(tree.height(), 1);

        let mut one = FreqTree::from_multiset(Multiset::from_counts([('x', 1)]));
        assert_eq!(one.lookup_and_remove(0).unwrap(), ('x', 0, 1));
        assert!(one.is_empty());
        assert_eq!(one.total(), 0);

        assert_eq!(tree.lookup_and_remove(4).unwrap(), ('x', 0, 5));
        assert_eq!(tree.total(), 4);
    }

    #[test]
    fn abbcccde_lookups() {
        let tree = abbcccde();
        assert_eq!(tree.forward_lookup(&'b').unwrap(), (1, 2));
        assert_eq!(tree.forward_lookup(&'a').unwrap(), (0, 1));
        assert_eq!(tree.forward_lookup(&'e').unwrap(), (7, 1));
        assert_eq!(tree.forward_lookup(&'z'), Err(Error::SymbolNotFound));
        assert_eq!(tree.reverse_lookup(4).unwrap(), (&'c', 3, 3));
        assert_eq!(tree.reverse_lookup(0).unwrap(), (&'a', 0, 1));
        assert_eq!(tree.reverse_lookup(7).unwrap(), (&'e', 7, 1));
        assert_eq!(
            tree.reverse_lookup(8),
            Err(Error::IndexOutOfRange { index: 8, total: 8 })
        );
    }

    #[test]
    fn remove_decrements_count() {
        let mut tree = abbcccde();
        assert_eq!(tree.lookup_and_remove(4).unwrap(), ('c', 3, 3));
        assert_eq!(tree.total(), 7);
        assert_eq!(tree.to_multiset(), "abbccde".chars().collect());
        assert!(tree.validate());
    }

    #[test]
    fn remove_least_symbol() {
        let mut tree = abbcccde();
        assert_eq!(tree.lookup_and_remove(0).unwrap(), ('a', 0, 1));
        assert_eq!(tree.forward_lookup(&'b').unwrap(), (0, 2));
        assert_eq!(tree.unique_len(), 4);
        assert!(tree.validate());
    }

    #[test]
    fn remove_node_with_two_children() {
        // root b has children a and d; empty out b
        let mut tree = abbcccde();
        assert_eq!(tree.lookup_and_remove(1).unwrap(), ('b', 1, 2));
        assert_eq!(tree.lookup_and_remove(1).unwrap(), ('b', 1, 1));
        assert!(tree.validate());
        assert_eq!(tree.to_multiset(), "acccde".chars().collect());
        assert_eq!(tree.forward_lookup(&'c').unwrap(), (1, 3));
        // d also has two children, and its successor e is a leaf
        for _ in 0..1 {
            let (c, _) = tree.forward_lookup(&'d').unwrap();
            assert_eq!(tree.lookup_and_remove(c).unwrap().0, 'd');
        }
        assert!(tree.validate());
        assert_eq!(tree.to_multiset(), "accce".chars().collect());
    }

    #[test]
    fn insert_examples() {
        let mut tree = abbcccde();
        assert_eq!(tree.insert_and_lookup('b'), (1, 3));
        assert_eq!(tree.total(), 9);
        let mut tree = abbcccde();
        assert_eq!(tree.insert_and_lookup('f'), (8, 1));
        assert!(tree.validate());

        let mut empty = FreqTree::new();
        assert_eq!(empty.insert_and_lookup('x'), (0, 1));
        assert_eq!(empty.total(), 1);
    }

    #[test]
    fn visits_are_counted() {
        let tree = abbcccde();
        tree.reset_node_visits();
        tree.reverse_lookup(4).unwrap();
        assert_eq!(tree.node_visits(), 3);
        tree.forward_lookup(&'a').unwrap();
        assert_eq!(tree.node_visits(), 5);
    }
}
