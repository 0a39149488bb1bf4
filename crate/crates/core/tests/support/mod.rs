#![allow(dead_code)]

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// ANS on an unbounded natural number, no renormalization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactAns {
    pub value: BigUint,
}

impl ExactAns {
    pub fn new(value: u64) -> Self {
        ExactAns {
            value: BigUint::from(value),
        }
    }

    pub fn encode(&mut self, c: u64, p: u64, n: u64) {
        assert!(p >= 1 && c + p <= n);
        let s = &self.value;
        self.value = (s / p) * n + c + (s % p);
    }

    pub fn peek(&self, n: u64) -> u64 {
        u64::try_from(&self.value % n).expect("below n")
    }

    pub fn decode(&mut self, c: u64, p: u64, n: u64) {
        let i = self.peek(n);
        assert!((c..c + p).contains(&i), "index {i} outside [{c}, {})", c + p);
        self.value = (&self.value / n) * p + i - c;
    }

    pub fn bits(&self) -> u64 {
        self.value.bits()
    }
}

/// `(symbol, c, p)` for index `i` by scanning the sorted counts.
pub fn scan_reverse<S: Clone>(entries: &[(S, u64)], i: u64) -> Option<(S, u64, u64)> {
    let mut c = 0;
    for (s, p) in entries {
        if i < c + p {
            return Some((s.clone(), c, *p));
        }
        c += p;
    }
    None
}

/// `(c, p)` for `symbol` by scanning the sorted counts.
pub fn scan_forward<S: PartialEq>(entries: &[(S, u64)], symbol: &S) -> Option<(u64, u64)> {
    let mut c = 0;
    for (s, p) in entries {
        if s == symbol {
            return Some((c, *p));
        }
        c += p;
    }
    None
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random counts over `0..alphabet`: all unique, a few heavy symbols, or
/// geometric-like repeats.
pub fn random_counts(rng: &mut ChaCha8Rng, alphabet: u32, size: u64) -> Vec<(u32, u64)> {
    let profile = rng.random_range(0..3);
    (0..size)
        .map(|_| {
            let symbol = match profile {
                0 => rng.random_range(0..alphabet),
                1 => rng.random_range(0..alphabet.min(4)),
                _ => {
                    let top = rng.random_range(1..=alphabet);
                    rng.random_range(0..top).min(rng.random_range(0..top))
                }
            };
            (symbol, 1)
        })
        .collect()
}

/// Spearman rank correlation, ties given their average rank.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut k = 0;
        while k < idx.len() {
            let mut j = k;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[k]] {
                j += 1;
            }
            let avg = (k + j) as f64 / 2.0;
            for &i in &idx[k..=j] {
                r[i] = avg;
            }
            k = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}
