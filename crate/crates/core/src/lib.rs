//! Lossless compression of multisets with ANS.
//!
//! A multiset carries no order, yet coding its elements one after another
//! pays for an order. [`encode_multiset`] removes that cost: it picks each
//! next element by *decoding* from the ANS state with the distribution of the
//! remaining elements, so the bits that choose the order are taken back out
//! of the message. The result is within a few dozen bits of `-log2 Pr(M)`.
//!
//! ```
//! use multiset_ans::{decode_multiset, encode_multiset, Multiset, QuantizedCategorical};
//!
//! let codec = QuantizedCategorical::uniform(vec!['a', 'b', 'c'], 16).unwrap();
//! let m: Multiset<char> = "aac".chars().collect();
//! let mut state = encode_multiset(&m, &codec).unwrap();
//! assert_eq!(decode_multiset(&mut state, 3, &codec).unwrap(), m);
//! assert!(state.is_initial());
//! ```
//!
//! The [`nested`] module applies the same idea to collections of flat JSON
//! objects, [`mod@container`] wraps a compressed state in a checksummed file
//! format and [`mod@bench`] holds the benchmark generators.

pub mod ans;
pub mod bench;
pub mod codec;
pub mod container;
pub mod error;
pub mod freq_tree;
pub mod multiset;
pub mod nested;
pub mod symbol;

// The book's snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/ans.md")]
    mod ans {}
    #[doc = include_str!("../../../book/src/codecs.md")]
    mod codecs {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/rate.md")]
    mod rate {}
    #[doc = include_str!("../../../book/src/nested.md")]
    mod nested {}
    #[doc = include_str!("../../../book/src/container.md")]
    mod container {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
}

pub use ans::{AnsState, CodeTriple};
pub use codec::{
    decode_multiset, encode_multiset, encode_multiset_onto, info_content, permutation_bits,
    rate_report, RateReport,
};
pub use container::{Container, Contents};
pub use error::{Error, Result};
pub use freq_tree::FreqTree;
pub use multiset::Multiset;
pub use nested::{decode_nested, encode_nested, ingest_json, nested_savings_bound, NestedMultiset};
pub use symbol::{
    quantize_pmf, ByteStringCodec, IndexCategorical, QuantizedCategorical, SymbolCodec,
};
