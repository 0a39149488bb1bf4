//! Stack-like range ANS coder with a per-operation precision.
//!
//! The state is a 64-bit head plus a stack of 32-bit words. Between
//! operations the head always lies in `[L, B·L)` with `L = 2^31` and
//! `B = 2^32`. Encoding a symbol with interval `[c, c + p)` out of `N`
//! maps the head through
//!
//! ```text
//! head' = N·(head ÷ p) + c + head mod p
//! ```
//!
//! and decoding inverts it with `head = p·(head' ÷ N) + head' mod N − c`.
//! Renormalization moves whole words between the head and the stack so that
//! the arithmetic stays in 64 bits.
//!
//! The precision `N` may be any integer in `[1, L]`. When `N` does not divide
//! `L`, a single fixed interval `[L, B·L)` cannot be closed under both
//! operations, so each operation first re-expresses the head in
//! `[y, B·y)` with `y = (L ÷ N)·N`, codes there, and re-expresses the result
//! in `[L, B·L)`. Re-expressing only moves a word between head and stack,
//! which leaves the represented number untouched. For `N | L` (every
//! power-of-two precision) `y = L` and both steps are no-ops.
//!
//! Popping from an empty stack yields a zero word. The stack is treated as
//! padded with infinitely many zero words, so a zero pushed onto an empty
//! stack is not stored.

use crate::error::{Error, Result};

/// Lower end of the head interval, `L = 2^31`.
pub const HEAD_MIN: u64 = 1 << 31;
/// Bits per stack word (`B = 2^WORD_BITS`).
pub const WORD_BITS: u32 = 32;
/// Largest precision an operation may use.
pub const MAX_PRECISION: u64 = HEAD_MIN;

const HEAD_BYTES: usize = 8;
const WORD_BYTES: usize = 4;

/// A quantized interval `[cumulative, cumulative + mass)` out of `precision`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CodeTriple {
    cumulative: u64,
    mass: u64,
    precision: u64,
}

impl CodeTriple {
    pub fn new(cumulative: u64, mass: u64, precision: u64) -> Result<Self> {
        let valid = mass >= 1
            && (1..=MAX_PRECISION).contains(&precision)
            && cumulative
                .checked_add(mass)
                .is_some_and(|end| end <= precision);
        if valid {
            Ok(CodeTriple {
                cumulative,
                mass,
                precision,
            })
        } else {
            Err(Error::InvalidTriple {
                cumulative,
                mass,
                precision,
            })
        }
    }

    #[inline]
    pub fn cumulative(&self) -> u64 {
        self.cumulative
    }

    #[inline]
    pub fn mass(&self) -> u64 {
        self.mass
    }

    #[inline]
    pub fn precision(&self) -> u64 {
        self.precision
    }

    /// `log2(N / p)`, the ideal cost of coding with this triple.
    pub fn cost_bits(&self) -> f64 {
        (self.precision as f64 / self.mass as f64).log2()
    }
}

/// Renormalized ANS state: a head in `[L, B·L)` and a word stack whose last
/// element is the top.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AnsState {
    head: u64,
    words: Vec<u32>,
}

impl Default for AnsState {
    fn default() -> Self {
        Self::new()
    }
}

#[inline]
fn check_precision(precision: u64) -> Result<()> {
    if (1..=MAX_PRECISION).contains(&precision) {
        Ok(())
    } else {
        Err(Error::InvalidTriple {
            cumulative: 0,
            mass: 1,
            precision,
        })
    }
}

/// Lower end `y` of the coding interval `[y, B·y)` used for precision `n`.
#[inline]
fn coding_floor(precision: u64) -> u64 {
    (HEAD_MIN / precision) * precision
}

impl AnsState {
    /// The minimal state: head `L`, empty stack.
    pub fn new() -> Self {
        AnsState {
            head: HEAD_MIN,
            words: Vec::new(),
        }
    }

    /// Builds a state from raw parts, checking the head interval.
    pub fn from_parts(head: u64, words: Vec<u32>) -> Result<Self> {
        if !(HEAD_MIN..HEAD_MIN << WORD_BITS).contains(&head) {
            return Err(Error::Format(format!(
                "head {head:#x} outside [2^31, 2^63)"
            )));
        }
        Ok(AnsState { head, words })
    }

    #[inline]
    pub fn head(&self) -> u64 {
        self.head
    }

    /// Stack words, bottom first.
    #[inline]
    pub fn words(&self) -> &[u32] {
        &self.words
    }

    /// Serialized size in bits: `32·|words| + 64`.
    #[inline]
    pub fn length_bits(&self) -> u64 {
        WORD_BITS as u64 * self.words.len() as u64 + 64
    }

    /// Information held by the state, `32·|words| + log2(head)`.
    ///
    /// Unlike [`length_bits`](Self::length_bits) this moves by fractional
    /// amounts, which makes it the right measure for per-operation rates.
    pub fn content_bits(&self) -> f64 {
        WORD_BITS as f64 * self.words.len() as f64 + (self.head as f64).log2()
    }

    /// True if this is exactly [`AnsState::new`].
    pub fn is_initial(&self) -> bool {
        self.head == HEAD_MIN && self.words.is_empty()
    }

    #[inline]
    fn push_word(&mut self) {
        let word = self.head as u32;
        if word != 0 || !self.words.is_empty() {
            self.words.push(word);
        }
        self.head >>= WORD_BITS;
    }

    #[inline]
    fn pop_word(&mut self) {
        let word = self.words.pop().unwrap_or(0);
        self.head = (self.head << WORD_BITS) | word as u64;
    }

    /// Moves the head from `[L, B·L)` into `[y, B·y)`.
    #[inline]
    fn enter(&mut self, floor: u64) {
        if self.head >= floor << WORD_BITS {
            self.push_word();
        }
    }

    /// Moves the head from `[y, B·y)` back into `[L, B·L)`.
    #[inline]
    fn leave(&mut self) {
        if self.head < HEAD_MIN {
            self.pop_word();
        }
    }

    /// The index `head mod N` that a decode with precision `N` would see.
    pub fn peek(&self, precision: u64) -> Result<u64> {
        check_precision(precision)?;
        let floor = coding_floor(precision);
        let head = if self.head >= floor << WORD_BITS {
            self.head >> WORD_BITS
        } else {
            self.head
        };
        Ok(head % precision)
    }

    /// Pushes the interval `triple` onto the state.
    pub fn encode(&mut self, triple: CodeTriple) -> Result<()> {
        let CodeTriple {
            cumulative,
            mass,
            precision,
        } = triple;
        // Triples built through `CodeTriple::new` are always valid; the check
        // guards against hand-edited copies.
        CodeTriple::new(cumulative, mass, precision)?;

        let floor = coding_floor(precision);
        self.enter(floor);
        // (L ÷ N)·B·p ≤ B·L = 2^63, no overflow.
        let bound = ((HEAD_MIN / precision) << WORD_BITS) * mass;
        if self.head >= bound {
            self.push_word();
        }
        self.head = precision * (self.head / mass) + cumulative + self.head % mass;
        self.leave();
        Ok(())
    }

    /// Pops the interval `triple` off the state. The index reported by
    /// [`peek`](Self::peek) must lie inside the interval.
    pub fn decode(&mut self, triple: CodeTriple) -> Result<()> {
        let CodeTriple {
            cumulative,
            mass,
            precision,
        } = triple;
        CodeTriple::new(cumulative, mass, precision)?;

        let floor = coding_floor(precision);
        let pushed = self.head >= floor << WORD_BITS;
        let head = if pushed {
            self.head >> WORD_BITS
        } else {
            self.head
        };
        let index = head % precision;
        if index < cumulative || index >= cumulative + mass {
            return Err(Error::IndexOutsideInterval {
                index,
                start: cumulative,
                end: cumulative + mass,
            });
        }
        if pushed {
            self.push_word();
        }
        self.head = mass * (self.head / precision) + index - cumulative;
        if self.head < floor {
            self.pop_word();
        }
        self.leave();
        Ok(())
    }

    /// Serializes as stack words bottom-to-top (32-bit big-endian) followed by
    /// the head (64-bit big-endian).
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.words.len() * WORD_BYTES + HEAD_BYTES);
        for word in &self.words {
            out.extend_from_slice(&word.to_be_bytes());
        }
        out.extend_from_slice(&self.head.to_be_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEAD_BYTES || !(bytes.len() - HEAD_BYTES).is_multiple_of(WORD_BYTES) {
            return Err(Error::Format(format!(
                "ANS state of {} bytes is not 8 + 4k bytes",
                bytes.len()
            )));
        }
        let (stack, head) = bytes.split_at(bytes.len() - HEAD_BYTES);
        let words = stack
            .chunks_exact(WORD_BYTES)
            .map(|c| u32::from_be_bytes(c.try_into().expect("chunk of 4")))
            .collect();
        let head = u64::from_be_bytes(head.try_into().expect("8 bytes"));
        Self::from_parts(head, words)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(c: u64, p: u64, n: u64) -> CodeTriple {
        CodeTriple::new(c, p, n).unwrap()
    }

    #[test]
    fn initial_state() {
        let s = AnsState::new();
        assert_eq!(s.head(), 1 << 31);
        assert!(s.words().is_empty());
        assert_eq!(s.length_bits(), 64);
        assert_eq!(s.peek(8).unwrap(), 0);
        assert_eq!(s.to_bytes(), 0x0000_0000_8000_0000u64.to_be_bytes());
    }

    #[test]
    fn peek_precision_one_is_zero() {
        let mut s = AnsState::new();
        s.encode(triple(3, 5, 11)).unwrap();
        assert_eq!(s.peek(1).unwrap(), 0);
    }

    #[test]
    fn invalid_triples_rejected() {
        assert!(CodeTriple::new(0, 0, 4).is_err());
        assert!(CodeTriple::new(3, 2, 4).is_err());
        assert!(CodeTriple::new(0, 1, 0).is_err());
        assert!(CodeTriple::new(0, 1, MAX_PRECISION + 1).is_err());
        assert!(CodeTriple::new(u64::MAX, 2, 4).is_err());
        assert!(CodeTriple::new(0, MAX_PRECISION, MAX_PRECISION).is_ok());
    }

    #[test]
    fn decode_outside_interval_is_error() {
        let mut s = AnsState::new();
        s.encode(triple(1, 2, 4)).unwrap();
        let before = s.clone();
        let err = s.decode(triple(3, 1, 4)).unwrap_err();
        assert!(matches!(err, Error::IndexOutsideInterval { .. }));
        assert_eq!(s, before);
    }

    #[test]
    fn full_mass_is_identity() {
        let mut s = AnsState::from_parts(0x1234_5678_9abc_def0 >> 1, vec![7, 8]).unwrap();
        let before = s.clone();
        s.encode(triple(0, 1000, 1000)).unwrap();
        assert_eq!(s, before);
        s.decode(triple(0, 1000, 1000)).unwrap();
        assert_eq!(s, before);
    }

    #[test]
    fn length_bits_counts_words() {
        let s = AnsState::from_parts(HEAD_MIN, vec![1, 2, 3]).unwrap();
        assert_eq!(s.length_bits(), 160);
        let s = AnsState::from_parts(HEAD_MIN, vec![1, 2]).unwrap();
        assert_eq!(s.to_bytes().len(), 16);
    }

    #[test]
    fn from_bytes_rejects_truncation() {
        assert!(AnsState::from_bytes(&[0; 7]).is_err());
        assert!(AnsState::from_bytes(&[0x80, 0, 0, 0, 0, 0, 0, 0, 1]).is_err());
        // head below L
        assert!(AnsState::from_bytes(&[0; 8]).is_err());
    }

    #[test]
    fn boundary_heads_round_trip_for_non_dividing_precision() {
        // Heads just below B·L and just above the coding floor, where a
        // renormalization keyed on L alone would lose track of the push.
        let n = 3u64;
        let k = HEAD_MIN / n;
        let heads = [
            HEAD_MIN,
            HEAD_MIN + 1,
            (k * n) << WORD_BITS,
            ((k * n) << WORD_BITS) - 1,
            (HEAD_MIN << WORD_BITS) - 1,
            k << WORD_BITS,
            ((k << WORD_BITS) * 2) - 1,
            (k << WORD_BITS) * 2,
        ];
        for &head in &heads {
            if !(HEAD_MIN..HEAD_MIN << WORD_BITS).contains(&head) {
                continue;
            }
            for words in [vec![], vec![0xdead_beef]] {
                let start = AnsState::from_parts(head, words).unwrap();
                for (c, p) in [(0, 1), (1, 1), (2, 1), (0, 2), (1, 2)] {
                    let t = triple(c, p, n);
                    let mut s = start.clone();
                    s.encode(t).unwrap();
                    assert!((HEAD_MIN..HEAD_MIN << 32).contains(&s.head()));
                    let i = s.peek(n).unwrap();
                    assert!((c..c + p).contains(&i), "head {head:#x} triple {t:?}");
                    s.decode(t).unwrap();
                    assert_eq!(s, start, "head {head:#x} triple {t:?}");

                    // decode first (sampling), then re-encode
                    let mut s = start.clone();
                    let i = s.peek(n).unwrap();
                    let (c2, p2) = if i < 2 { (0, 2) } else { (2, 1) };
                    let t2 = triple(c2, p2, n);
                    s.decode(t2).unwrap();
                    assert!((HEAD_MIN..HEAD_MIN << 32).contains(&s.head()));
                    s.encode(t2).unwrap();
                    assert_eq!(s, start, "sampling head {head:#x}");
                }
            }
        }
    }
}
