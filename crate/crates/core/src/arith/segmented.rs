use rayon::prelude::*;

use super::{try_zeroed, ArithError, ArithFn, ArithSource, MAX_SIEVE_N};

const SEGMENT_LEN: usize = 1 << 17;

/// Streaming φ/σ values on `1..=n_max` computed segment by segment from the
/// primes up to √n_max. Memory use is O(√n_max) plus one segment per reader.
#[derive(Debug, Clone)]
pub struct SegmentedSieve {
    func: ArithFn,
    n_max: u64,
    base_primes: Vec<u64>,
}

impl SegmentedSieve {
    pub fn new(func: ArithFn, n_max: u64) -> Result<Self, ArithError> {
        if n_max == 0 || n_max > MAX_STREAM_N {
            return Err(ArithError::InvalidSize {
                got: n_max,
                max: MAX_STREAM_N,
            });
        }
        Ok(Self {
            func,
            n_max,
            base_primes: primes_up_to(n_max.isqrt()),
        })
    }
}

/// Upper bound for [`SegmentedSieve`]. Values stay below 2^53 so the f64
/// conversion done by the summation layer is exact.
pub const MAX_STREAM_N: u64 = 1 << 48;

impl ArithSource for SegmentedSieve {
    fn func(&self) -> ArithFn {
        self.func
    }

    fn len(&self) -> u64 {
        self.n_max
    }

    fn fill(&self, first: u64, out: &mut [u64]) {
        fill_segment(self.func, &self.base_primes, first, out);
    }
}

/// Flat table via independent segments filled in parallel.
pub(super) fn sieve(func: ArithFn, n_max: u64) -> Result<Vec<u64>, ArithError> {
    if n_max > MAX_SIEVE_N {
        return Err(ArithError::InvalidSize {
            got: n_max,
            max: MAX_SIEVE_N,
        });
    }
    let base = primes_up_to(n_max.isqrt());
    let mut values: Vec<u64> = try_zeroed(n_max as usize, n_max)?;
    values
        .par_chunks_mut(SEGMENT_LEN)
        .enumerate()
        .for_each(|(i, chunk)| fill_segment(func, &base, 1 + (i * SEGMENT_LEN) as u64, chunk));
    Ok(values)
}

/// Eratosthenes up to `limit` inclusive.
fn primes_up_to(limit: u64) -> Vec<u64> {
    let limit = limit as usize;
    if limit < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; limit + 1];
    let mut primes = Vec::new();
    for i in 2..=limit {
        if composite[i] {
            continue;
        }
        primes.push(i as u64);
        let mut j = i * i;
        while j <= limit {
            composite[j] = true;
            j += i;
        }
    }
    primes
}

/// out[i] = f(first + i). `base` must hold every prime up to √(last index).
fn fill_segment(func: ArithFn, base: &[u64], first: u64, out: &mut [u64]) {
    let len = out.len() as u64;
    if len == 0 {
        return;
    }
    let last = first + len - 1;
    let mut rest: Vec<u64> = (first..=last).collect();
    match func {
        ArithFn::Phi => out.iter_mut().zip(first..).for_each(|(v, k)| *v = k),
        ArithFn::Sigma => out.fill(1),
    }

    for &p in base {
        if p * p > last {
            break;
        }
        let mut m = first.div_ceil(p) * p;
        while m <= last {
            let i = (m - first) as usize;
            let mut r = rest[i] / p;
            // σ(p^e) = 1 + p + ... + p^e
            let mut sigma_power = 1 + p;
            while r.is_multiple_of(p) {
                r /= p;
                sigma_power = sigma_power * p + 1;
            }
            rest[i] = r;
            match func {
                ArithFn::Phi => out[i] = out[i] / p * (p - 1),
                ArithFn::Sigma => out[i] *= sigma_power,
            }
            m += p;
        }
    }

    // whatever is left is 1 or a single prime above √last
    for (v, &q) in out.iter_mut().zip(&rest) {
        if q > 1 {
            match func {
                ArithFn::Phi => *v = *v / q * (q - 1),
                ArithFn::Sigma => *v *= q + 1,
            }
        }
    }
}
