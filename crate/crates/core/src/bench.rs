//! Synthetic and JSON benchmarks.
//!
//! The synthetic source draws a distribution over `|A|` symbols from a
//! Dirichlet prior with `α_k = k`, then a multiset with exactly `M` distinct
//! symbols: a support of `M` symbols is drawn by weighted sampling without
//! replacement, each support symbol gets one count, and the remaining
//! `|M| - M` elements are drawn i.i.d. from the distribution restricted to the
//! support. All randomness comes from ChaCha8 seeded per run.

use std::time::Instant;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use serde::Serialize;

use crate::ans::AnsState;
use crate::codec::{decode_tree, encode_sequence, encode_tree, info_content};
use crate::error::{Error, Result};
use crate::freq_tree::FreqTree;
use crate::multiset::Multiset;
use crate::nested::{
    decode_nested, encode_nested, encode_nested_sequence, nested_savings_bound, NestedMultiset,
    Pair, PairCodec, Record,
};
use crate::symbol::{ByteStringCodec, IndexCategorical, SymbolCodec};

/// Precision used for the synthetic source. Large enough that every symbol
/// of a `2^18` alphabet keeps a mass close to its real probability.
pub const BENCH_PRECISION_BITS: u32 = 24;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BenchConfig {
    /// Number of distinct symbols `M` in every multiset.
    pub unique: u64,
    pub multiset_sizes: Vec<u64>,
    pub alphabet_sizes: Vec<u64>,
    pub repetitions: u32,
    pub seed: u64,
    pub precision_bits: u32,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            unique: 512,
            multiset_sizes: (10..=14).map(|k| 1 << k).collect(),
            alphabet_sizes: vec![1 << 10, 1 << 14, 1 << 18],
            repetitions: 3,
            seed: 0,
            precision_bits: BENCH_PRECISION_BITS,
        }
    }
}

impl BenchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repetitions == 0 {
            return Err(Error::Config("repetitions must be at least 1".into()));
        }
        if self.unique == 0 {
            return Err(Error::Config("unique count must be at least 1".into()));
        }
        for &a in &self.alphabet_sizes {
            if self.unique > a {
                return Err(Error::Config(format!(
                    "{} unique symbols do not fit an alphabet of {a}",
                    self.unique
                )));
            }
            if a > 1 << self.precision_bits {
                return Err(Error::Config(format!(
                    "alphabet of {a} needs more than 2^{} precision",
                    self.precision_bits
                )));
            }
        }
        for &n in &self.multiset_sizes {
            if self.unique > n {
                return Err(Error::Config(format!(
                    "{} unique symbols do not fit a multiset of {n}",
                    self.unique
                )));
            }
        }
        Ok(())
    }
}

/// Seed for one run, mixed from the base seed and the run coordinates.
pub fn run_seed(seed: u64, alphabet_size: u64, multiset_size: u64, rep: u32) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut h = rng.random::<u64>();
    for v in [alphabet_size, multiset_size, rep as u64] {
        h = (h ^ v).wrapping_mul(0x9e37_79b9_7f4a_7c15).rotate_left(29);
    }
    h
}

/// Distribution over `alphabet_size` symbols drawn from `Dirichlet(α_k = k)`,
/// `k = 1..=|A|`, by normalizing independent `Gamma(k, 1)` draws.
pub fn gen_dirichlet_source(alphabet_size: u64, seed: u64) -> Result<Vec<f64>> {
    if alphabet_size == 0 {
        return Err(Error::Config("alphabet must be non-empty".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draws = Vec::with_capacity(alphabet_size as usize);
    for k in 1..=alphabet_size {
        let gamma = Gamma::new(k as f64, 1.0).expect("positive shape");
        draws.push(gamma.sample(&mut rng));
    }
    let sum: f64 = draws.iter().sum();
    Ok(draws.into_iter().map(|x| x / sum).collect())
}

/// Multiset over symbol indices with exactly `unique` distinct symbols and
/// `size` elements.
pub fn gen_fixed_unique_multiset(
    pmf: &[f64],
    unique: u64,
    size: u64,
    seed: u64,
) -> Result<Multiset<u32>> {
    if unique == 0 || unique > pmf.len() as u64 || unique > size {
        return Err(Error::Config(format!(
            "cannot draw {unique} unique symbols into {size} elements from {} symbols",
            pmf.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = rand::seq::index::sample_weighted(
        &mut rng,
        pmf.len(),
        |i| pmf[i],
        unique as usize,
    )
    .map_err(|e| Error::Config(format!("support draw failed: {e}")))?;
    let mut support: Vec<usize> = support.into_iter().collect();
    support.sort_unstable();
    let mut counts = vec![1u64; support.len()];
    let restricted = WeightedIndex::new(support.iter().map(|&i| pmf[i]))
        .map_err(|e| Error::Config(format!("restricted pmf: {e}")))?;
    for _ in unique..size {
        counts[restricted.sample(&mut rng)] += 1;
    }
    Ok(Multiset::from_counts(
        support.into_iter().map(|i| i as u32).zip(counts),
    ))
}

/// One synthetic run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SyntheticRow {
    pub alphabet_size: u64,
    pub multiset_size: u64,
    pub unique: u64,
    pub rep: u32,
    pub seed: u64,
    pub precision_bits: u32,
    pub compressed_bits: u64,
    pub info_content_bits: f64,
    pub sequence_bits: u64,
    pub overhead_bits: f64,
    pub encode_ns: u64,
    pub decode_ns: u64,
    pub total_ns: u64,
    pub encoder_node_visits: u64,
    pub decoder_node_visits: u64,
}

/// Timed multiset round trip. Times cover the tree build, sampling and
/// coding; the input is already canonical.
pub struct Timed {
    pub state: AnsState,
    pub encode_ns: u64,
    pub decode_ns: u64,
    pub encoder_node_visits: u64,
    pub decoder_node_visits: u64,
}

pub fn timed_round_trip<S, C>(multiset: &Multiset<S>, codec: &C) -> Result<Timed>
where
    S: Ord + Clone,
    C: SymbolCodec<S> + ?Sized,
{
    let start = Instant::now();
    let mut tree = FreqTree::build_balanced(multiset);
    let mut state = AnsState::new();
    encode_tree(&mut state, &mut tree, codec)?;
    let encode_ns = start.elapsed().as_nanos() as u64;
    let encoder_node_visits = tree.node_visits();

    let compressed = state.clone();
    let start = Instant::now();
    let mut tree = FreqTree::new();
    decode_tree(&mut state, &mut tree, multiset.len(), codec)?;
    let decode_ns = start.elapsed().as_nanos() as u64;
    let decoder_node_visits = tree.node_visits();

    if tree.to_multiset() != *multiset {
        return Err(Error::Format("benchmark round trip mismatch".into()));
    }
    Ok(Timed {
        state: compressed,
        encode_ns,
        decode_ns,
        encoder_node_visits,
        decoder_node_visits,
    })
}

/// Source distribution and multiset for one run of `cfg`.
pub fn synthetic_instance(
    cfg: &BenchConfig,
    alphabet_size: u64,
    multiset_size: u64,
    rep: u32,
) -> Result<(IndexCategorical, Multiset<u32>, u64)> {
    let seed = run_seed(cfg.seed, alphabet_size, multiset_size, rep);
    let pmf = gen_dirichlet_source(alphabet_size, seed)?;
    let multiset = gen_fixed_unique_multiset(&pmf, cfg.unique, multiset_size, seed ^ 1)?;
    let codec = IndexCategorical::from_weights(&pmf, cfg.precision_bits)?;
    Ok((codec, multiset, seed))
}

pub fn run_synthetic_one(
    cfg: &BenchConfig,
    alphabet_size: u64,
    multiset_size: u64,
    rep: u32,
) -> Result<SyntheticRow> {
    let (codec, multiset, seed) = synthetic_instance(cfg, alphabet_size, multiset_size, rep)?;
    let timed = timed_round_trip(&multiset, &codec)?;
    let info = info_content(&multiset, &codec)?;
    let sequence = encode_sequence(multiset.elements(), &codec)?;
    let compressed_bits = timed.state.length_bits();
    Ok(SyntheticRow {
        alphabet_size,
        multiset_size,
        unique: cfg.unique,
        rep,
        seed,
        precision_bits: cfg.precision_bits,
        compressed_bits,
        info_content_bits: info,
        sequence_bits: sequence.length_bits(),
        overhead_bits: compressed_bits as f64 - info,
        encode_ns: timed.encode_ns,
        decode_ns: timed.decode_ns,
        total_ns: timed.encode_ns + timed.decode_ns,
        encoder_node_visits: timed.encoder_node_visits,
        decoder_node_visits: timed.decoder_node_visits,
    })
}

/// Every `(|A|, |M|, rep)` combination of `cfg`, alphabet-major.
pub fn run_synthetic(cfg: &BenchConfig) -> Result<Vec<SyntheticRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &a in &cfg.alphabet_sizes {
        for &n in &cfg.multiset_sizes {
            for rep in 0..cfg.repetitions {
                rows.push(run_synthetic_one(cfg, a, n, rep)?);
            }
        }
    }
    Ok(rows)
}

/// One JSON run over the first `records` records.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JsonRow {
    pub records: u64,
    pub pairs: u64,
    pub rep: u32,
    pub compressed_bits: u64,
    pub sequence_bits: u64,
    pub savings_bits: i64,
    pub bound_bits: f64,
    pub encode_ns: u64,
    pub decode_ns: u64,
    pub total_ns: u64,
}

/// Prefix lengths `1, 2, 4, …` up to and including `n`.
pub fn doubling_prefixes(n: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(1usize), |k| k.checked_mul(2))
        .take_while(|&k| k < n)
        .collect();
    if n > 0 {
        out.push(n);
    }
    out
}

pub fn run_json_prefix(
    records: &[Record],
    rep: u32,
    codec: ByteStringCodec,
) -> Result<JsonRow> {
    let nested: NestedMultiset = records.iter().cloned().collect();
    let pair_codec = PairCodec::new(codec);

    let start = Instant::now();
    let (state, sizes) = encode_nested(&nested, &pair_codec)?;
    let encode_ns = start.elapsed().as_nanos() as u64;
    let compressed_bits = state.length_bits();

    let start = Instant::now();
    let mut work = state;
    let decoded = decode_nested(&mut work, &sizes, &pair_codec)?;
    let decode_ns = start.elapsed().as_nanos() as u64;
    if decoded != nested {
        return Err(Error::Format("benchmark round trip mismatch".into()));
    }

    let sequence_bits = encode_nested_sequence(&nested, &pair_codec)?.length_bits();
    Ok(JsonRow {
        records: nested.len(),
        pairs: nested.pair_count(),
        rep,
        compressed_bits,
        sequence_bits,
        savings_bits: sequence_bits as i64 - compressed_bits as i64,
        bound_bits: nested_savings_bound(&nested),
        encode_ns,
        decode_ns,
        total_ns: encode_ns + decode_ns,
    })
}

/// Runs growing prefixes of `records` in input order.
pub fn run_json(records: &[Record], repetitions: u32, codec: ByteStringCodec) -> Result<Vec<JsonRow>> {
    if repetitions == 0 {
        return Err(Error::Config("repetitions must be at least 1".into()));
    }
    let mut rows = Vec::new();
    for n in doubling_prefixes(records.len()) {
        for rep in 0..repetitions {
            rows.push(run_json_prefix(&records[..n], rep, codec)?);
        }
    }
    Ok(rows)
}

const LOCATIONS: &[&str] = &[
    "Berlin", "Lagos", "Lima", "Osaka", "Toronto", "Pune", "Oslo", "Austin", "",
];
const KINDS: &[&str] = &["User", "User", "User", "Organization", "Bot"];

/// Flat records in the style of a public user listing: a unique login and
/// id plus a few low-entropy fields. Every record is distinct and every
/// record has `5` distinct pairs.
pub fn synthetic_user_records(n: usize, seed: u64) -> Vec<Record> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids: Vec<u64> = (1..=n as u64).map(|i| i * 7 + rng.random_range(0..7)).collect();
    ids.shuffle(&mut rng);
    ids.into_iter()
        .map(|id| {
            let login_len = rng.random_range(4..12);
            let mut login: String = (0..login_len)
                .map(|_| (b'a' + rng.random_range(0..26u8)) as char)
                .collect();
            login.push_str(&id.to_string());
            [
                Pair::new("login", login),
                Pair::new("id", id.to_string()),
                Pair::new("type", *KINDS.choose(&mut rng).expect("non-empty")),
                Pair::new("site_admin", if rng.random_bool(0.02) { "true" } else { "false" }),
                Pair::new("location", *LOCATIONS.choose(&mut rng).expect("non-empty")),
            ]
            .into_iter()
            .collect()
        })
        .collect()
}

/// The records of [`synthetic_user_records`] as a JSON array.
pub fn synthetic_user_json(n: usize, seed: u64) -> String {
    let nested: NestedMultiset = synthetic_user_records(n, seed).into_iter().collect();
    crate::nested::records_to_json(&nested)
}
