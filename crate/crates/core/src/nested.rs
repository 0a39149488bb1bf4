//! Multisets of multisets: collections of flat JSON objects.
//!
//! Each object is a multiset of key-value pairs and the collection is a
//! multiset of objects. Encoding is depth first: sample an object without
//! replacement from the outer multiset, then sample and encode its pairs
//! until it is empty, and repeat. Both levels of ordering are recovered, so
//! the saving is up to `log2 |M|! + Σ_i log2 |J_i|!` bits.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::Deserialize;

use crate::ans::AnsState;
use crate::codec::{decode_tree, encode_tree, log2_factorial_bits, sample, unsample};
use crate::container::put_varint;
use crate::error::{Error, Result};
use crate::freq_tree::FreqTree;
use crate::multiset::Multiset;
use crate::symbol::{ByteStringCodec, SymbolCodec};

/// One key-value pair, ordered by key and then value.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair {
    pub key: Vec<u8>,
    pub value: Vec<u8>,
}

impl Pair {
    pub fn new(key: impl Into<Vec<u8>>, value: impl Into<Vec<u8>>) -> Self {
        Pair {
            key: key.into(),
            value: value.into(),
        }
    }
}

/// A flat object as a multiset of pairs.
///
/// Records compare by their canonical serialization: the sorted pairs, each
/// written as length-prefixed key then length-prefixed value.
#[derive(Clone, Debug)]
pub struct Record {
    pairs: Multiset<Pair>,
    canonical: Vec<u8>,
}

impl Record {
    pub fn new(pairs: Multiset<Pair>) -> Self {
        let mut canonical = Vec::new();
        for pair in pairs.elements() {
            put_varint(&mut canonical, pair.key.len() as u64);
            canonical.extend_from_slice(&pair.key);
            put_varint(&mut canonical, pair.value.len() as u64);
            canonical.extend_from_slice(&pair.value);
        }
        Record { pairs, canonical }
    }

    pub fn pairs(&self) -> &Multiset<Pair> {
        &self.pairs
    }

    /// Number of pairs, `|J|`.
    pub fn len(&self) -> u64 {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn canonical_bytes(&self) -> &[u8] {
        &self.canonical
    }
}

impl FromIterator<Pair> for Record {
    fn from_iter<I: IntoIterator<Item = Pair>>(iter: I) -> Self {
        Record::new(iter.into_iter().collect())
    }
}

impl PartialEq for Record {
    fn eq(&self, other: &Self) -> bool {
        self.canonical == other.canonical
    }
}

impl Eq for Record {}

impl PartialOrd for Record {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Record {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical.cmp(&other.canonical)
    }
}

/// A multiset of records.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct NestedMultiset {
    outer: Multiset<Record>,
}

impl NestedMultiset {
    pub fn new(outer: Multiset<Record>) -> Self {
        NestedMultiset { outer }
    }

    pub fn outer(&self) -> &Multiset<Record> {
        &self.outer
    }

    /// Number of records, `|M|`.
    pub fn len(&self) -> u64 {
        self.outer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outer.is_empty()
    }

    /// Total number of pairs over all records.
    pub fn pair_count(&self) -> u64 {
        self.outer.iter().map(|(r, c)| r.len() * c).sum()
    }
}

impl FromIterator<Record> for NestedMultiset {
    fn from_iter<I: IntoIterator<Item = Record>>(iter: I) -> Self {
        NestedMultiset::new(iter.into_iter().collect())
    }
}

/// Codes a pair as two byte strings, key first when decoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairCodec {
    bytes: ByteStringCodec,
}

impl PairCodec {
    pub fn new(bytes: ByteStringCodec) -> Self {
        PairCodec { bytes }
    }

    pub fn bytes(&self) -> ByteStringCodec {
        self.bytes
    }
}

impl SymbolCodec<Pair> for PairCodec {
    fn encode(&self, state: &mut AnsState, pair: &Pair) -> Result<()> {
        self.bytes.encode_bytes(state, &pair.value)?;
        self.bytes.encode_bytes(state, &pair.key)
    }

    fn decode(&self, state: &mut AnsState) -> Result<Pair> {
        let key = self.bytes.decode_bytes(state)?;
        let value = self.bytes.decode_bytes(state)?;
        Ok(Pair { key, value })
    }

    fn cost_bits(&self, pair: &Pair) -> Result<f64> {
        Ok(self.bytes.payload_cost_bits(&pair.key)? + self.bytes.payload_cost_bits(&pair.value)?)
    }
}

/// Compresses `nested` into `state`. Returns the record sizes `|J|` in the
/// order the records were sampled; the decoder needs them.
pub fn encode_nested_onto(
    state: &mut AnsState,
    nested: &NestedMultiset,
    codec: &PairCodec,
) -> Result<Vec<u64>> {
    let mut outer = FreqTree::build_balanced(&nested.outer);
    let mut sizes = Vec::with_capacity(nested.len() as usize);
    while !outer.is_empty() {
        let (record, _) = sample(state, &mut outer)?;
        sizes.push(record.len());
        let mut inner = FreqTree::build_balanced(&record.pairs);
        encode_tree(state, &mut inner, codec)?;
    }
    Ok(sizes)
}

/// Compresses `nested` into a fresh state.
pub fn encode_nested(nested: &NestedMultiset, codec: &PairCodec) -> Result<(AnsState, Vec<u64>)> {
    let mut state = AnsState::new();
    let sizes = encode_nested_onto(&mut state, nested, codec)?;
    Ok((state, sizes))
}

/// Inverse of [`encode_nested`]; `sizes` is the list it returned.
pub fn decode_nested(
    state: &mut AnsState,
    sizes: &[u64],
    codec: &PairCodec,
) -> Result<NestedMultiset> {
    let mut outer = FreqTree::new();
    for &size in sizes.iter().rev() {
        let mut inner = FreqTree::new();
        decode_tree(state, &mut inner, size, codec)?;
        let record = Record::new(inner.to_multiset());
        unsample(state, &mut outer, record)?;
    }
    Ok(NestedMultiset::new(outer.to_multiset()))
}

/// Encodes every pair of every record in canonical order, without sampling.
pub fn encode_nested_sequence(nested: &NestedMultiset, codec: &PairCodec) -> Result<AnsState> {
    let mut state = AnsState::new();
    for record in nested.outer.elements().rev() {
        for pair in record.pairs.elements().rev() {
            codec.encode(&mut state, pair)?;
        }
    }
    Ok(state)
}

/// `log2 |M|! + Σ_i log2 |J_i|!`, the most that forgetting both levels of
/// order can save.
pub fn nested_savings_bound(nested: &NestedMultiset) -> f64 {
    let inner: f64 = nested
        .outer
        .iter()
        .map(|(record, count)| count as f64 * log2_factorial_bits(record.len()))
        .sum();
    log2_factorial_bits(nested.len()) + inner
}

/// Measured savings for one nested multiset.
#[derive(Clone, Debug, PartialEq)]
pub struct NestedReport {
    pub compressed_bits: u64,
    pub sequence_bits: u64,
    pub savings_bits: i64,
    pub bound_bits: f64,
}

pub fn nested_report(nested: &NestedMultiset, codec: &PairCodec) -> Result<NestedReport> {
    let (state, _) = encode_nested(nested, codec)?;
    let sequence = encode_nested_sequence(nested, codec)?;
    Ok(NestedReport {
        compressed_bits: state.length_bits(),
        sequence_bits: sequence.length_bits(),
        savings_bits: sequence.length_bits() as i64 - state.length_bits() as i64,
        bound_bits: nested_savings_bound(nested),
    })
}

struct FlatRecords(Vec<Record>);

struct ScalarString(String);

impl<'de> Deserialize<'de> for ScalarString {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ScalarVisitor;

        impl<'de> Visitor<'de> for ScalarVisitor {
            type Value = ScalarString;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a string, number, boolean or null")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Self::Value, E> {
                Ok(ScalarString(v.to_owned()))
            }

            fn visit_string<E: de::Error>(self, v: String) -> std::result::Result<Self::Value, E> {
                Ok(ScalarString(v))
            }

            fn visit_bool<E: de::Error>(self, v: bool) -> std::result::Result<Self::Value, E> {
                Ok(ScalarString(v.to_string()))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Self::Value, E> {
                Ok(ScalarString(v.to_string()))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Self::Value, E> {
                Ok(ScalarString(v.to_string()))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Self::Value, E> {
                Ok(ScalarString(serde_json::Number::from_f64(v).map_or_else(
                    || v.to_string(),
                    |n| n.to_string(),
                )))
            }

            fn visit_unit<E: de::Error>(self) -> std::result::Result<Self::Value, E> {
                Ok(ScalarString("null".to_owned()))
            }

            fn visit_map<A: MapAccess<'de>>(self, _: A) -> std::result::Result<Self::Value, A::Error> {
                Err(de::Error::custom("nested objects are not supported"))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, _: A) -> std::result::Result<Self::Value, A::Error> {
                Err(de::Error::custom("arrays inside objects are not supported"))
            }
        }

        deserializer.deserialize_any(ScalarVisitor)
    }
}

struct FlatRecord(Record);

impl<'de> Deserialize<'de> for FlatRecord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct RecordVisitor;

        impl<'de> Visitor<'de> for RecordVisitor {
            type Value = FlatRecord;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a flat JSON object")
            }

            // Walking the entries directly keeps duplicate keys.
            fn visit_map<A: MapAccess<'de>>(
                self,
                mut map: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut pairs = Vec::new();
                while let Some((key, value)) = map.next_entry::<String, ScalarString>()? {
                    pairs.push(Pair::new(key, value.0));
                }
                Ok(FlatRecord(pairs.into_iter().collect()))
            }
        }

        deserializer.deserialize_map(RecordVisitor)
    }
}

impl<'de> Deserialize<'de> for FlatRecords {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct ArrayVisitor;

        impl<'de> Visitor<'de> for ArrayVisitor {
            type Value = FlatRecords;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON array of flat objects")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Self::Value, A::Error> {
                let mut records = Vec::with_capacity(seq.size_hint().unwrap_or(0));
                while let Some(FlatRecord(record)) = seq.next_element()? {
                    records.push(record);
                }
                Ok(FlatRecords(records))
            }
        }

        deserializer.deserialize_seq(ArrayVisitor)
    }
}

/// Parses a JSON array of flat objects into records, in input order.
///
/// Scalars become strings: strings as is, numbers in their JSON form,
/// booleans as `true`/`false`, null as `null`. Duplicate keys are kept.
pub fn parse_json_records(input: &[u8]) -> Result<Vec<Record>> {
    serde_json::from_slice::<FlatRecords>(input)
        .map(|r| r.0)
        .map_err(|e| {
            let (line, column) = (e.line(), e.column());
            let text = e.to_string();
            let suffix = format!(" at line {line} column {column}");
            Error::Ingest {
                message: text.strip_suffix(&suffix).unwrap_or(&text).to_owned(),
                line,
                column,
            }
        })
}

/// Parses a JSON array of flat objects into its canonical nested multiset.
pub fn ingest_json(input: &[u8]) -> Result<NestedMultiset> {
    Ok(parse_json_records(input)?.into_iter().collect())
}

/// Renders records as a JSON array of objects with string values.
pub fn records_to_json(nested: &NestedMultiset) -> String {
    let mut out = String::from("[");
    let mut first_record = true;
    for record in nested.outer.elements() {
        if !first_record {
            out.push(',');
        }
        first_record = false;
        out.push('{');
        let mut first_pair = true;
        for pair in record.pairs.elements() {
            if !first_pair {
                out.push(',');
            }
            first_pair = false;
            let key = String::from_utf8_lossy(&pair.key);
            let value = String::from_utf8_lossy(&pair.value);
            out.push_str(&serde_json::to_string(&key).expect("string serializes"));
            out.push(':');
            out.push_str(&serde_json::to_string(&value).expect("string serializes"));
        }
        out.push('}');
    }
    out.push(']');
    out
}
