//! Self-describing container for a compressed multiset.
//!
//! Layout, all integers big-endian or unsigned LEB128 varints:
//!
//! ```text
//! "MSZ1"               magic
//! u8                   version (1)
//! u8                   codec id: 0 bytes, 1 categorical
//! varint + bytes       codec parameters
//! u8                   payload kind: 0 flat, 1 nested
//! varint               |M|
//! varint × |M|         nested only: record sizes in sampling order
//! u32                  CRC-32C over every byte after the magic except itself
//! bytes                ANS state: stack words bottom to top, then the head
//! ```
//!
//! Codec parameters for `bytes` are `varint max_len`. For `categorical` they
//! are `u8 precision_bits`, `varint count`, then per symbol `varint len`,
//! the symbol bytes and `varint mass`.

use crate::ans::AnsState;
use crate::codec::{decode_multiset, encode_multiset};
use crate::error::{Error, Result};
use crate::multiset::Multiset;
use crate::nested::{decode_nested, encode_nested, NestedMultiset, PairCodec};
use crate::symbol::{ByteStringCodec, QuantizedCategorical};

pub const MAGIC: &[u8; 4] = b"MSZ1";
pub const VERSION: u8 = 1;

const CODEC_BYTES: u8 = 0;
const CODEC_CATEGORICAL: u8 = 1;
const KIND_FLAT: u8 = 0;
const KIND_NESTED: u8 = 1;
const CRC_LEN: usize = 4;

/// Symbol codec recorded in the header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CodecParams {
    Bytes(ByteStringCodec),
    Categorical(QuantizedCategorical<Vec<u8>>),
}

impl CodecParams {
    pub fn name(&self) -> &'static str {
        match self {
            CodecParams::Bytes(_) => "bytes",
            CodecParams::Categorical(_) => "categorical",
        }
    }
}

/// What the state holds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Payload {
    Flat { size: u64 },
    Nested { sizes: Vec<u64> },
}

impl Payload {
    /// Number of outer elements.
    pub fn len(&self) -> u64 {
        match self {
            Payload::Flat { size } => *size,
            Payload::Nested { sizes } => sizes.len() as u64,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Container {
    pub codec: CodecParams,
    pub payload: Payload,
    pub state: AnsState,
}

/// Decompressed contents.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Contents {
    Flat(Multiset<Vec<u8>>),
    Nested(NestedMultiset),
}

pub(crate) fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push(v as u8 | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(Error::Format(format!("truncated {what}")));
        }
        let out = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u8(&mut self, what: &str) -> Result<u8> {
        Ok(self.take(1, what)?[0])
    }

    fn varint(&mut self, what: &str) -> Result<u64> {
        let mut v = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.u8(what)?;
            let bits = (b & 0x7f) as u64;
            if shift == 63 && bits > 1 {
                break;
            }
            v |= bits << shift;
            if b & 0x80 == 0 {
                return Ok(v);
            }
        }
        Err(Error::Format(format!("{what} varint overflows 64 bits")))
    }

    fn len(&mut self, what: &str) -> Result<usize> {
        let v = self.varint(what)?;
        if v > (self.bytes.len() - self.pos) as u64 {
            return Err(Error::Format(format!("{what} {v} exceeds remaining input")));
        }
        Ok(v as usize)
    }
}

fn write_params(codec: &CodecParams) -> Vec<u8> {
    let mut out = Vec::new();
    match codec {
        CodecParams::Bytes(b) => put_varint(&mut out, b.max_len() as u64),
        CodecParams::Categorical(d) => {
            out.push(d.precision_bits() as u8);
            put_varint(&mut out, d.alphabet().len() as u64);
            for (symbol, mass) in d.alphabet().iter().zip(d.masses()) {
                put_varint(&mut out, symbol.len() as u64);
                out.extend_from_slice(symbol);
                put_varint(&mut out, mass);
            }
        }
    }
    out
}

fn read_params(id: u8, params: &[u8]) -> Result<CodecParams> {
    let mut r = Reader {
        bytes: params,
        pos: 0,
    };
    let codec = match id {
        CODEC_BYTES => {
            let max_len = r.varint("max_len")?;
            let max_len = usize::try_from(max_len)
                .map_err(|_| Error::Format(format!("max_len {max_len} too large")))?;
            CodecParams::Bytes(ByteStringCodec::new(max_len)?)
        }
        CODEC_CATEGORICAL => {
            let bits = r.u8("precision")? as u32;
            let count = r.len("alphabet size")?;
            let mut alphabet = Vec::with_capacity(count);
            let mut masses = Vec::with_capacity(count);
            for _ in 0..count {
                let n = r.len("symbol length")?;
                alphabet.push(r.take(n, "symbol")?.to_vec());
                masses.push(r.varint("mass")?);
            }
            let d = QuantizedCategorical::new(alphabet, &masses)
                .map_err(|e| Error::Format(format!("categorical parameters: {e}")))?;
            if d.precision_bits() != bits {
                return Err(Error::Format(format!(
                    "masses sum to 2^{}, header says 2^{bits}",
                    d.precision_bits()
                )));
            }
            CodecParams::Categorical(d)
        }
        other => return Err(Error::Format(format!("unknown codec id {other}"))),
    };
    if r.pos != params.len() {
        return Err(Error::Format("trailing bytes in codec parameters".into()));
    }
    Ok(codec)
}

impl Container {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.push(VERSION);
        let (id, params) = match &self.codec {
            CodecParams::Bytes(_) => (CODEC_BYTES, write_params(&self.codec)),
            CodecParams::Categorical(_) => (CODEC_CATEGORICAL, write_params(&self.codec)),
        };
        out.push(id);
        put_varint(&mut out, params.len() as u64);
        out.extend_from_slice(&params);
        match &self.payload {
            Payload::Flat { size } => {
                out.push(KIND_FLAT);
                put_varint(&mut out, *size);
            }
            Payload::Nested { sizes } => {
                out.push(KIND_NESTED);
                put_varint(&mut out, sizes.len() as u64);
                for &s in sizes {
                    put_varint(&mut out, s);
                }
            }
        }
        let crc_at = out.len();
        let state = self.state.to_bytes();
        let crc = crc32c::crc32c_append(crc32c::crc32c(&out[MAGIC.len()..]), &state);
        out.extend_from_slice(&crc.to_be_bytes());
        out.extend_from_slice(&state);
        debug_assert_eq!(out.len(), crc_at + CRC_LEN + state.len());
        out
    }

    /// Parses and checks a container. The checksum is verified before any
    /// field other than the framing is interpreted.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
            return Err(Error::Format("bad magic".into()));
        }
        let mut r = Reader {
            bytes,
            pos: MAGIC.len(),
        };
        let version = r.u8("version")?;
        if version != VERSION {
            return Err(Error::Format(format!("unsupported version {version}")));
        }
        let id = r.u8("codec id")?;
        let params_len = r.len("codec parameter length")?;
        let params = r.take(params_len, "codec parameters")?;
        let kind = r.u8("payload kind")?;
        let size = r.varint("multiset size")?;
        let sizes = match kind {
            KIND_FLAT => None,
            KIND_NESTED => {
                if size > (bytes.len() - r.pos) as u64 {
                    return Err(Error::Format(format!("{size} record sizes exceed input")));
                }
                let mut sizes = Vec::with_capacity(size as usize);
                for _ in 0..size {
                    sizes.push(r.varint("record size")?);
                }
                Some(sizes)
            }
            other => return Err(Error::Format(format!("unknown payload kind {other}"))),
        };
        let crc_at = r.pos;
        let stored = u32::from_be_bytes(
            r.take(CRC_LEN, "checksum")?
                .try_into()
                .expect("4 bytes"),
        );
        let state_bytes = &bytes[r.pos..];
        let computed =
            crc32c::crc32c_append(crc32c::crc32c(&bytes[MAGIC.len()..crc_at]), state_bytes);
        if stored != computed {
            return Err(Error::Checksum { stored, computed });
        }
        let codec = read_params(id, params)?;
        let payload = match sizes {
            None => Payload::Flat { size },
            Some(sizes) => {
                if !matches!(codec, CodecParams::Bytes(_)) {
                    return Err(Error::Format("nested payload needs the bytes codec".into()));
                }
                Payload::Nested { sizes }
            }
        };
        let state = AnsState::from_bytes(state_bytes)?;
        Ok(Container {
            codec,
            payload,
            state,
        })
    }

    /// Compresses a multiset of byte strings.
    pub fn compress_flat(multiset: &Multiset<Vec<u8>>, codec: CodecParams) -> Result<Self> {
        let state = match &codec {
            CodecParams::Bytes(b) => encode_multiset(multiset, b)?,
            CodecParams::Categorical(d) => encode_multiset(multiset, d)?,
        };
        Ok(Container {
            codec,
            payload: Payload::Flat {
                size: multiset.len(),
            },
            state,
        })
    }

    /// Compresses a collection of records.
    pub fn compress_nested(nested: &NestedMultiset, codec: ByteStringCodec) -> Result<Self> {
        let (state, sizes) = encode_nested(nested, &PairCodec::new(codec))?;
        Ok(Container {
            codec: CodecParams::Bytes(codec),
            payload: Payload::Nested { sizes },
            state,
        })
    }

    /// Decodes the contents. The second value is true when the state was
    /// consumed down to the initial state, as it is for every container this
    /// crate writes.
    pub fn decompress(&self) -> Result<(Contents, bool)> {
        let mut state = self.state.clone();
        let contents = match (&self.payload, &self.codec) {
            (Payload::Flat { size }, CodecParams::Bytes(b)) => {
                Contents::Flat(decode_multiset(&mut state, *size, b)?)
            }
            (Payload::Flat { size }, CodecParams::Categorical(d)) => {
                Contents::Flat(decode_multiset(&mut state, *size, d)?)
            }
            (Payload::Nested { sizes }, CodecParams::Bytes(b)) => {
                Contents::Nested(decode_nested(&mut state, sizes, &PairCodec::new(*b))?)
            }
            (Payload::Nested { .. }, CodecParams::Categorical(_)) => {
                return Err(Error::Format("nested payload needs the bytes codec".into()))
            }
        };
        Ok((contents, state.is_initial()))
    }
}

/// Categorical codec over the distinct elements of `multiset`, with masses
/// quantized from their empirical counts.
pub fn empirical_categorical(
    multiset: &Multiset<Vec<u8>>,
    precision_bits: u32,
) -> Result<QuantizedCategorical<Vec<u8>>> {
    let alphabet: Vec<Vec<u8>> = multiset.iter().map(|(s, _)| s.clone()).collect();
    let weights: Vec<f64> = multiset.iter().map(|(_, c)| c as f64).collect();
    if alphabet.is_empty() {
        return QuantizedCategorical::uniform(vec![Vec::new()], precision_bits);
    }
    QuantizedCategorical::from_weights(alphabet, &weights, precision_bits)
}
