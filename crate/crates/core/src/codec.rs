//! Multiset coding by sampling without replacement.
//!
//! Encoding repeatedly *decodes* a symbol from the ANS state using the
//! distribution of the remaining elements, `Pr(z | M_n) = M_n(z) / |M_n|`,
//! removes it, and encodes it with the symbol codec. Each sample takes back
//! about `log2(|M_n| / M_n(z))` bits, so over the whole multiset the order
//! costs nothing and the final state holds `-log2 Pr(M)` bits plus a small
//! constant.
//!
//! Decoding runs the steps backwards: decode a symbol with the symbol codec,
//! insert it into a growing tree, and encode it with the same sampling
//! distribution, which puts the sampled bits back.

use crate::ans::{AnsState, CodeTriple, MAX_PRECISION};
use crate::error::{Error, Result};
use crate::freq_tree::FreqTree;
use crate::multiset::Multiset;
use crate::symbol::SymbolCodec;

fn check_size(size: u64) -> Result<()> {
    if size > MAX_PRECISION {
        Err(Error::Capacity(format!(
            "multiset of {size} elements exceeds 2^31"
        )))
    } else {
        Ok(())
    }
}

/// Samples one element of `tree` using the state as the source of
/// randomness, removing it. Returns the symbol and the triple it was sampled
/// with.
pub fn sample<S: Ord + Clone>(
    state: &mut AnsState,
    tree: &mut FreqTree<S>,
) -> Result<(S, CodeTriple)> {
    let n = tree.total();
    let i = state.peek(n)?;
    let (symbol, c, p) = tree.lookup_and_remove(i)?;
    let triple = CodeTriple::new(c, p, n)?;
    state.decode(triple)?;
    Ok((symbol, triple))
}

/// Inverse of [`sample`]: inserts `symbol` and encodes it with its
/// probability in the grown tree.
pub fn unsample<S: Ord>(
    state: &mut AnsState,
    tree: &mut FreqTree<S>,
    symbol: S,
) -> Result<CodeTriple> {
    let (c, p) = tree.insert_and_lookup(symbol);
    let triple = CodeTriple::new(c, p, tree.total())?;
    state.encode(triple)?;
    Ok(triple)
}

/// Drains `tree`, sampling each element and encoding it with `codec`.
pub fn encode_tree<S, C>(state: &mut AnsState, tree: &mut FreqTree<S>, codec: &C) -> Result<()>
where
    S: Ord + Clone,
    C: SymbolCodec<S> + ?Sized,
{
    check_size(tree.total())?;
    while !tree.is_empty() {
        let (symbol, _) = sample(state, tree)?;
        codec.encode(state, &symbol)?;
    }
    Ok(())
}

/// Decodes `size` elements into `tree`, restoring the bits used to sample
/// them.
pub fn decode_tree<S, C>(
    state: &mut AnsState,
    tree: &mut FreqTree<S>,
    size: u64,
    codec: &C,
) -> Result<()>
where
    S: Ord,
    C: SymbolCodec<S> + ?Sized,
{
    check_size(tree.total() + size)?;
    for _ in 0..size {
        let symbol = codec.decode(state)?;
        unsample(state, tree, symbol)?;
    }
    Ok(())
}

/// Pushes `multiset` onto an existing state.
pub fn encode_multiset_onto<S, C>(
    state: &mut AnsState,
    multiset: &Multiset<S>,
    codec: &C,
) -> Result<()>
where
    S: Ord + Clone,
    C: SymbolCodec<S> + ?Sized,
{
    let mut tree = FreqTree::build_balanced(multiset);
    encode_tree(state, &mut tree, codec)
}

/// Compresses `multiset` into a fresh state.
pub fn encode_multiset<S, C>(multiset: &Multiset<S>, codec: &C) -> Result<AnsState>
where
    S: Ord + Clone,
    C: SymbolCodec<S> + ?Sized,
{
    let mut state = AnsState::new();
    encode_multiset_onto(&mut state, multiset, codec)?;
    Ok(state)
}

/// Pops a multiset of `size` elements off `state`.
///
/// A state produced by [`encode_multiset`] is left equal to
/// [`AnsState::new`] afterwards. Decoding with the wrong codec or size is not
/// detected here and yields an arbitrary multiset.
pub fn decode_multiset<S, C>(state: &mut AnsState, size: u64, codec: &C) -> Result<Multiset<S>>
where
    S: Ord + Clone,
    C: SymbolCodec<S> + ?Sized,
{
    let mut tree = FreqTree::new();
    decode_tree(state, &mut tree, size, codec)?;
    Ok(tree.to_multiset())
}

/// Encodes the elements as an ordered sequence in canonical order, without
/// sampling. This is the baseline the multiset coder saves against.
pub fn encode_sequence<'a, S, C, I>(symbols: I, codec: &C) -> Result<AnsState>
where
    S: 'a,
    C: SymbolCodec<S> + ?Sized,
    I: IntoIterator<Item = &'a S>,
    I::IntoIter: DoubleEndedIterator,
{
    let mut state = AnsState::new();
    for symbol in symbols.into_iter().rev() {
        codec.encode(&mut state, symbol)?;
    }
    Ok(state)
}

#[inline]
fn log2_factorial(n: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0) / std::f64::consts::LN_2
}

/// `log2 |M|!` for a multiset of `n` elements.
pub fn log2_factorial_bits(n: u64) -> f64 {
    log2_factorial(n)
}

/// `log2(|M|! / Π_z M(z)!)`, the number of bits an ordering of `multiset`
/// carries.
pub fn permutation_bits<S>(multiset: &Multiset<S>) -> f64 {
    let repeats: f64 = multiset.iter().map(|(_, c)| log2_factorial(c)).sum();
    (log2_factorial(multiset.len()) - repeats).max(0.0)
}

/// `-log2 Pr(M)` for i.i.d. symbols from `codec`:
/// `Σ_z M(z)·(-log2 D(z)) - permutation_bits(M)`.
pub fn info_content<S, C>(multiset: &Multiset<S>, codec: &C) -> Result<f64>
where
    C: SymbolCodec<S> + ?Sized,
{
    let mut sequence = 0.0;
    for (symbol, count) in multiset.iter() {
        sequence += count as f64 * codec.cost_bits(symbol)?;
    }
    Ok(sequence - permutation_bits(multiset))
}

/// Measured and ideal sizes for one multiset.
#[derive(Clone, Debug, PartialEq)]
pub struct RateReport {
    /// Serialized size of the multiset-coded state.
    pub compressed_bits: u64,
    /// `-log2 Pr(M)`.
    pub info_content_bits: f64,
    /// Serialized size when the elements are coded as a sequence.
    pub sequence_bits: u64,
    /// `sequence_bits - compressed_bits`.
    pub savings_bits: i64,
    pub permutation_bits: f64,
}

/// Runs both the sequence coder and the multiset coder on `multiset`.
pub fn rate_report<S, C>(multiset: &Multiset<S>, codec: &C) -> Result<RateReport>
where
    S: Ord + Clone,
    C: SymbolCodec<S> + ?Sized,
{
    let sequence = encode_sequence(multiset.elements(), codec)?;
    let compressed = encode_multiset(multiset, codec)?;
    let sequence_bits = sequence.length_bits();
    let compressed_bits = compressed.length_bits();
    Ok(RateReport {
        compressed_bits,
        info_content_bits: info_content(multiset, codec)?,
        sequence_bits,
        savings_bits: sequence_bits as i64 - compressed_bits as i64,
        permutation_bits: permutation_bits(multiset),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::QuantizedCategorical;

    fn abc() -> QuantizedCategorical<char> {
        QuantizedCategorical::uniform(vec!['a', 'b', 'c'], 16).unwrap()
    }

    #[test]
    fn round_trip_small() {
        let m: Multiset<char> = "aac".chars().collect();
        let mut s = encode_multiset(&m, &abc()).unwrap();
        assert_eq!(decode_multiset(&mut s, 3, &abc()).unwrap(), m);
        assert!(s.is_initial());
    }

    #[test]
    fn empty_multiset_is_initial_state() {
        let m: Multiset<char> = Multiset::new();
        let s = encode_multiset(&m, &abc()).unwrap();
        assert!(s.is_initial());
        let mut s = s;
        assert!(decode_multiset::<char, _>(&mut s, 0, &abc()).unwrap().is_empty());
    }

    #[test]
    fn size_one_matches_plain_symbol_coding() {
        let d = abc();
        let m: Multiset<char> = "b".chars().collect();
        let s = encode_multiset(&m, &d).unwrap();
        let mut plain = AnsState::new();
        d.encode(&mut plain, &'b').unwrap();
        assert_eq!(s, plain);
    }

    #[test]
    fn permutation_bits_examples() {
        let aac: Multiset<char> = "aac".chars().collect();
        assert!((permutation_bits(&aac) - 3f64.log2()).abs() < 1e-12);
        let abc: Multiset<char> = "abc".chars().collect();
        assert!((permutation_bits(&abc) - 6f64.log2()).abs() < 1e-12);
        let same: Multiset<char> = "zzzz".chars().collect();
        assert_eq!(permutation_bits(&same), 0.0);
    }

    #[test]
    fn info_content_singleton() {
        let d = QuantizedCategorical::new(vec![0u8, 1], &[1, 1]).unwrap();
        let m: Multiset<u8> = [0u8].into_iter().collect();
        assert!((info_content(&m, &d).unwrap() - 1.0).abs() < 1e-12);
        let unknown: Multiset<u8> = [9u8].into_iter().collect();
        assert_eq!(info_content(&unknown, &d), Err(Error::SymbolNotFound));
    }

    #[test]
    fn oversized_multiset_rejected() {
        let d = QuantizedCategorical::uniform(vec![0u8], 4).unwrap();
        let m = Multiset::from_counts([(0u8, MAX_PRECISION + 1)]);
        assert!(matches!(encode_multiset(&m, &d), Err(Error::Capacity(_))));
    }
}
