//! Symbol codecs: the distribution `D` used to code individual symbols.

use crate::ans::{AnsState, CodeTriple, MAX_PRECISION};
use crate::error::{Error, Result};

/// A distribution that can push symbols onto and pop symbols off an
/// [`AnsState`].
///
/// Implementations must be pure functions of the state and their own
/// configuration: `decode` after `encode` returns the same symbol and
/// restores the state exactly.
pub trait SymbolCodec<S> {
    fn encode(&self, state: &mut AnsState, symbol: &S) -> Result<()>;

    fn decode(&self, state: &mut AnsState) -> Result<S>;

    /// Ideal code length `-log2 D(symbol)` in bits.
    fn cost_bits(&self, symbol: &S) -> Result<f64>;
}

impl<S, C: SymbolCodec<S> + ?Sized> SymbolCodec<S> for &C {
    fn encode(&self, state: &mut AnsState, symbol: &S) -> Result<()> {
        (**self).encode(state, symbol)
    }

    fn decode(&self, state: &mut AnsState) -> Result<S> {
        (**self).decode(state)
    }

    fn cost_bits(&self, symbol: &S) -> Result<f64> {
        (**self).cost_bits(symbol)
    }
}

/// Default precision exponent for quantized distributions, `N_D = 2^16`.
pub const DEFAULT_PRECISION_BITS: u32 = 16;

/// Largest supported precision exponent.
pub const MAX_PRECISION_BITS: u32 = MAX_PRECISION.trailing_zeros();

/// Quantizes nonnegative weights to integer masses that are each at least one
/// and sum to exactly `precision`.
///
/// Masses start at `max(1, floor(q_i))` with `q_i = w_i·N/Σw`. A shortfall is
/// handed out one unit at a time by largest remainder `q_i - m_i`; an excess
/// (from lifting tiny weights to one) is taken back from the most
/// over-allocated masses. Ties go to the lower index.
pub fn quantize_pmf(weights: &[f64], precision: u64) -> Result<Vec<u64>> {
    if weights.is_empty() {
        return Err(Error::InvalidDistribution("no weights".into()));
    }
    if weights.len() as u64 > precision {
        return Err(Error::Capacity(format!(
            "{} symbols do not fit precision {precision}",
            weights.len()
        )));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidDistribution(
            "weights must be finite and nonnegative".into(),
        ));
    }
    let sum: f64 = weights.iter().sum();
    if sum <= 0.0 {
        return Err(Error::InvalidDistribution(
            "at least one weight must be positive".into(),
        ));
    }

    let ideal: Vec<f64> = weights
        .iter()
        .map(|w| w / sum * precision as f64)
        .collect();
    let mut masses: Vec<u64> = ideal.iter().map(|q| (q.floor() as u64).max(1)).collect();
    let assigned: u64 = masses.iter().sum();

    if assigned < precision {
        let mut order: Vec<usize> = (0..masses.len()).collect();
        order.sort_by(|&a, &b| {
            let ra = ideal[a] - masses[a] as f64;
            let rb = ideal[b] - masses[b] as f64;
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        let mut short = precision - assigned;
        for &i in order.iter().cycle() {
            if short == 0 {
                break;
            }
            masses[i] += 1;
            short -= 1;
        }
    } else {
        let mut excess = assigned - precision;
        while excess > 0 {
            let mut order: Vec<usize> = (0..masses.len()).filter(|&i| masses[i] > 1).collect();
            order.sort_by(|&a, &b| {
                let oa = masses[a] as f64 - ideal[a];
                let ob = masses[b] as f64 - ideal[b];
                ob.total_cmp(&oa).then(a.cmp(&b))
            });
            for i in order {
                if excess == 0 {
                    break;
                }
                masses[i] -= 1;
                excess -= 1;
            }
        }
    }
    Ok(masses)
}

/// Categorical distribution over the dense alphabet `0..len` with integer
/// masses summing to a power of two.
///
/// Encoding reads the interval of a symbol straight from the table; decoding
/// binary searches the cumulative counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndexCategorical {
    // cdf[i] = sum of masses of symbols below i; cdf.len() == len + 1
    cdf: Vec<u32>,
    precision_bits: u32,
}

impl IndexCategorical {
    /// `masses` must be positive with a power-of-two sum no larger than
    /// `2^31`.
    pub fn new(masses: &[u64]) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidDistribution("no symbols".into()));
        }
        if masses.len() > u32::MAX as usize {
            return Err(Error::Capacity(format!("{} symbols", masses.len())));
        }
        if masses.contains(&0) {
            return Err(Error::InvalidDistribution(
                "every symbol needs a positive mass".into(),
            ));
        }
        let mut cdf = Vec::with_capacity(masses.len() + 1);
        let mut acc = 0u64;
        cdf.push(0);
        for &m in masses {
            acc = acc.saturating_add(m);
            if acc > MAX_PRECISION {
                break;
            }
            cdf.push(acc as u32);
        }
        if !acc.is_power_of_two() || acc > MAX_PRECISION {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {acc}, expected a power of two up to 2^31"
            )));
        }
        Ok(IndexCategorical {
            cdf,
            precision_bits: acc.trailing_zeros(),
        })
    }

    /// Quantizes `weights` at precision `2^precision_bits`.
    pub fn from_weights(weights: &[f64], precision_bits: u32) -> Result<Self> {
        if precision_bits > MAX_PRECISION_BITS {
            return Err(Error::InvalidDistribution(format!(
                "precision 2^{precision_bits} exceeds 2^{MAX_PRECISION_BITS}"
            )));
        }
        Self::new(&quantize_pmf(weights, 1 << precision_bits)?)
    }

    /// Number of symbols.
    #[inline]
    pub fn len(&self) -> usize {
        self.cdf.len() - 1
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn precision(&self) -> u64 {
        1 << self.precision_bits
    }

    #[inline]
    pub fn precision_bits(&self) -> u32 {
        self.precision_bits
    }

    pub fn masses(&self) -> Vec<u64> {
        self.cdf.windows(2).map(|w| (w[1] - w[0]) as u64).collect()
    }

    #[inline]
    fn interval(&self, k: usize) -> (u64, u64) {
        let c = self.cdf[k];
        (c as u64, (self.cdf[k + 1] - c) as u64)
    }

    /// `(c_x, p_x)` for symbol `x`.
    #[inline]
    pub fn forward_lookup(&self, x: u32) -> Result<(u64, u64)> {
        if x as usize >= self.len() {
            return Err(Error::SymbolNotFound);
        }
        Ok(self.interval(x as usize))
    }

    #[inline]
    fn reverse_index(&self, i: u64) -> usize {
        self.cdf.partition_point(|&c| c as u64 <= i) - 1
    }

    /// `(x, c_x, p_x)` for the symbol whose interval contains `i`.
    pub fn reverse_lookup(&self, i: u64) -> Result<(u32, u64, u64)> {
        if i >= self.precision() {
            return Err(Error::IndexOutOfRange {
                index: i,
                total: self.precision(),
            });
        }
        let k = self.reverse_index(i);
        let (c, p) = self.interval(k);
        Ok((k as u32, c, p))
    }

    #[inline]
    fn encode_index(&self, state: &mut AnsState, k: usize) -> Result<()> {
        let (c, p) = self.interval(k);
        state.encode(CodeTriple::new(c, p, self.precision())?)
    }

    #[inline]
    fn decode_index(&self, state: &mut AnsState) -> Result<usize> {
        let i = state.peek(self.precision())?;
        let k = self.reverse_index(i);
        let (c, p) = self.interval(k);
        state.decode(CodeTriple::new(c, p, self.precision())?)?;
        Ok(k)
    }

    fn cost_of_index(&self, k: usize) -> f64 {
        let (_, p) = self.interval(k);
        self.precision_bits as f64 - (p as f64).log2()
    }
}

impl SymbolCodec<u32> for IndexCategorical {
    fn encode(&self, state: &mut AnsState, symbol: &u32) -> Result<()> {
        self.forward_lookup(*symbol)?;
        self.encode_index(state, *symbol as usize)
    }

    fn decode(&self, state: &mut AnsState) -> Result<u32> {
        self.decode_index(state).map(|k| k as u32)
    }

    fn cost_bits(&self, symbol: &u32) -> Result<f64> {
        self.forward_lookup(*symbol)?;
        Ok(self.cost_of_index(*symbol as usize))
    }
}

/// Categorical distribution over a sorted alphabet with integer masses summing
/// to a power of two.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedCategorical<S> {
    alphabet: Vec<S>,
    table: IndexCategorical,
}

impl<S: Ord> QuantizedCategorical<S> {
    /// `alphabet` must be strictly increasing and `masses` positive with a
    /// power-of-two sum no larger than `2^31`.
    pub fn new(alphabet: Vec<S>, masses: &[u64]) -> Result<Self> {
        if alphabet.is_empty() || alphabet.len() != masses.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} symbols with {} masses",
                alphabet.len(),
                masses.len()
            )));
        }
        if !alphabet.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidDistribution(
                "alphabet must be strictly increasing".into(),
            ));
        }
        Ok(QuantizedCategorical {
            alphabet,
            table: IndexCategorical::new(masses)?,
        })
    }

    /// Quantizes `weights` at precision `2^precision_bits`.
    pub fn from_weights(alphabet: Vec<S>, weights: &[f64], precision_bits: u32) -> Result<Self> {
        if precision_bits > MAX_PRECISION_BITS {
            return Err(Error::InvalidDistribution(format!(
                "precision 2^{precision_bits} exceeds 2^{MAX_PRECISION_BITS}"
            )));
        }
        if alphabet.len() != weights.len() {
            return Err(Error::InvalidDistribution(format!(
                "{} symbols with {} weights",
                alphabet.len(),
                weights.len()
            )));
        }
        let masses = quantize_pmf(weights, 1 << precision_bits)?;
        Self::new(alphabet, &masses)
    }

    /// Equal weights over `alphabet`.
    pub fn uniform(alphabet: Vec<S>, precision_bits: u32) -> Result<Self> {
        let weights = vec![1.0; alphabet.len()];
        Self::from_weights(alphabet, &weights, precision_bits)
    }

    fn index_of(&self, symbol: &S) -> Result<usize> {
        self.alphabet
            .binary_search(symbol)
            .map_err(|_| Error::SymbolNotFound)
    }

    /// `(c_x, p_x)` for `symbol`.
    pub fn forward_lookup(&self, symbol: &S) -> Result<(u64, u64)> {
        Ok(self.table.interval(self.index_of(symbol)?))
    }

    /// `D(symbol) = p_x / N`.
    pub fn probability(&self, symbol: &S) -> Result<f64> {
        let (_, p) = self.forward_lookup(symbol)?;
        Ok(p as f64 / self.precision() as f64)
    }
}

impl<S> QuantizedCategorical<S> {
    /// `N_D`.
    #[inline]
    pub fn precision(&self) -> u64 {
        self.table.precision()
    }

    #[inline]
    pub fn precision_bits(&self) -> u32 {
        self.table.precision_bits()
    }

    pub fn alphabet(&self) -> &[S] {
        &self.alphabet
    }

    pub fn masses(&self) -> Vec<u64> {
        self.table.masses()
    }

    /// The underlying table indexed by alphabet position.
    pub fn table(&self) -> &IndexCategorical {
        &self.table
    }

    /// `(x, c_x, p_x)` for the symbol whose interval contains `i`.
    pub fn reverse_lookup(&self, i: u64) -> Result<(&S, u64, u64)> {
        let (k, c, p) = self.table.reverse_lookup(i)?;
        Ok((&self.alphabet[k as usize], c, p))
    }
}

impl<S: Ord + Clone> SymbolCodec<S> for QuantizedCategorical<S> {
    fn encode(&self, state: &mut AnsState, symbol: &S) -> Result<()> {
        self.table.encode_index(state, self.index_of(symbol)?)
    }

    fn decode(&self, state: &mut AnsState) -> Result<S> {
        let k = self.table.decode_index(state)?;
        Ok(self.alphabet[k].clone())
    }

    fn cost_bits(&self, symbol: &S) -> Result<f64> {
        Ok(self.table.cost_of_index(self.index_of(symbol)?))
    }
}

/// Uniform code for byte strings of length up to `max_len`.
///
/// Bytes are pushed last-to-first with a uniform distribution over 256
/// values, then the length with a uniform distribution over `[0, max_len]`,
/// so decoding reads the length and then the bytes in their natural order.
/// The length code costs `log2(max_len + 1)` bits per string.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ByteStringCodec {
    max_len: usize,
}

impl ByteStringCodec {
    pub fn new(max_len: usize) -> Result<Self> {
        if max_len as u64 >= MAX_PRECISION {
            return Err(Error::Capacity(format!(
                "max_len {max_len} must be below 2^31"
            )));
        }
        Ok(ByteStringCodec { max_len })
    }

    #[inline]
    pub fn max_len(&self) -> usize {
        self.max_len
    }

    #[inline]
    fn length_precision(&self) -> u64 {
        self.max_len as u64 + 1
    }

    pub fn encode_bytes(&self, state: &mut AnsState, payload: &[u8]) -> Result<()> {
        if payload.len() > self.max_len {
            return Err(Error::Capacity(format!(
                "payload of {} bytes exceeds max_len {}",
                payload.len(),
                self.max_len
            )));
        }
        for &byte in payload.iter().rev() {
            state.encode(CodeTriple::new(byte as u64, 1, 256)?)?;
        }
        state.encode(CodeTriple::new(
            payload.len() as u64,
            1,
            self.length_precision(),
        )?)
    }

    pub fn decode_bytes(&self, state: &mut AnsState) -> Result<Vec<u8>> {
        let n = self.length_precision();
        let len = state.peek(n)?;
        state.decode(CodeTriple::new(len, 1, n)?)?;
        let mut out = Vec::with_capacity(len as usize);
        for _ in 0..len {
            let byte = state.peek(256)?;
            state.decode(CodeTriple::new(byte, 1, 256)?)?;
            out.push(byte as u8);
        }
        Ok(out)
    }

    /// `8·len + log2(max_len + 1)`.
    pub fn payload_cost_bits(&self, payload: &[u8]) -> Result<f64> {
        if payload.len() > self.max_len {
            return Err(Error::Capacity(format!(
                "payload of {} bytes exceeds max_len {}",
                payload.len(),
                self.max_len
            )));
        }
        Ok(8.0 * payload.len() as f64 + (self.length_precision() as f64).log2())
    }
}

impl SymbolCodec<Vec<u8>> for ByteStringCodec {
    fn encode(&self, state: &mut AnsState, symbol: &Vec<u8>) -> Result<()> {
        self.encode_bytes(state, symbol)
    }

    fn decode(&self, state: &mut AnsState) -> Result<Vec<u8>> {
        self.decode_bytes(state)
    }

    fn cost_bits(&self, symbol: &Vec<u8>) -> Result<f64> {
        self.payload_cost_bits(symbol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantize_examples() {
        assert_eq!(quantize_pmf(&[1.0; 4], 8).unwrap(), vec![2, 2, 2, 2]);
        assert_eq!(quantize_pmf(&[0.5, 0.25, 0.25], 4).unwrap(), vec![2, 1, 1]);
        assert_eq!(quantize_pmf(&[0.9, 0.05, 0.05], 8).unwrap(), vec![6, 1, 1]);
        assert_eq!(quantize_pmf(&[0.25, 0.75], 4).unwrap(), vec![1, 3]);
    }

    #[test]
    fn quantize_errors() {
        assert!(matches!(
            quantize_pmf(&[1.0; 9], 8),
            Err(Error::Capacity(_))
        ));
        assert!(quantize_pmf(&[0.0, 0.0], 8).is_err());
        assert!(quantize_pmf(&[], 8).is_err());
        assert!(quantize_pmf(&[1.0, -1.0], 8).is_err());
        assert!(quantize_pmf(&[1.0, f64::NAN], 8).is_err());
    }

    #[test]
    fn quantize_zero_weight_gets_unit_mass() {
        let m = quantize_pmf(&[0.0, 1.0, 0.0], 16).unwrap();
        assert_eq!(m, vec![1, 14, 1]);
    }

    #[test]
    fn categorical_lookups() {
        let d = QuantizedCategorical::new(vec!['a', 'b', 'c'], &[2, 1, 1]).unwrap();
        assert_eq!(d.precision(), 4);
        assert_eq!(d.forward_lookup(&'b').unwrap(), (2, 1));
        assert_eq!(d.table().reverse_index(0), 0);
        assert_eq!(d.table().reverse_index(1), 0);
        assert_eq!(d.table().reverse_index(2), 1);
        assert_eq!(d.table().reverse_index(3), 2);
        assert_eq!(d.forward_lookup(&'z'), Err(Error::SymbolNotFound));
        assert_eq!(d.cost_bits(&'a').unwrap(), 1.0);
    }

    #[test]
    fn categorical_rejects_bad_tables() {
        assert!(QuantizedCategorical::new(vec![1, 2], &[1, 2]).is_err());
        assert!(QuantizedCategorical::new(vec![2, 1], &[2, 2]).is_err());
        assert!(QuantizedCategorical::new(vec![1, 2], &[4, 0]).is_err());
        assert!(QuantizedCategorical::<u8>::new(vec![], &[]).is_err());
    }

    #[test]
    fn single_symbol_leaves_state_unchanged() {
        let d = QuantizedCategorical::uniform(vec![7u32], 16).unwrap();
        let mut s = AnsState::new();
        d.encode(&mut s, &7).unwrap();
        assert!(s.is_initial());
        assert_eq!(d.decode(&mut s).unwrap(), 7);
        assert!(s.is_initial());
    }

    #[test]
    fn categorical_round_trip() {
        let d = QuantizedCategorical::from_weights(
            (0u32..10).collect(),
            &[5.0, 1.0, 1.0, 3.0, 0.5, 0.5, 9.0, 2.0, 2.0, 1.0],
            12,
        )
        .unwrap();
        let symbols = [3u32, 0, 9, 9, 6, 4, 1, 2, 8, 5, 7];
        let mut s = AnsState::new();
        for x in &symbols {
            d.encode(&mut s, x).unwrap();
        }
        for x in symbols.iter().rev() {
            assert_eq!(d.decode(&mut s).unwrap(), *x);
        }
        assert!(s.is_initial());
    }

    #[test]
    fn bytes_round_trip_and_limits() {
        let codec = ByteStringCodec::new(4).unwrap();
        let mut s = AnsState::new();
        codec.encode_bytes(&mut s, b"ab").unwrap();
        codec.encode_bytes(&mut s, b"").unwrap();
        assert_eq!(codec.decode_bytes(&mut s).unwrap(), b"");
        assert_eq!(codec.decode_bytes(&mut s).unwrap(), b"ab");
        assert!(s.is_initial());
        assert!(matches!(
            codec.encode_bytes(&mut s, b"hello"),
            Err(Error::Capacity(_))
        ));
        assert!(ByteStringCodec::new(1 << 31).is_err());
    }
}
