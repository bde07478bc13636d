use super::{try_zeroed, ArithError, ArithFn};

/// Linear sieve over smallest prime factors. Returns f(1..=n_max) with
/// `out[k - 1] = f(k)`.
///
/// Every composite i·p is reached exactly once, from its smallest prime p.
/// For σ the largest power of the smallest prime dividing each index is kept
/// alongside, so σ(p^e · m) = σ(p^e) · σ(m) can be applied directly.
pub(super) fn sieve(func: ArithFn, n_max: u64) -> Result<Vec<u64>, ArithError> {
    let n = n_max as usize;
    // 1-based scratch arrays, index 0 unused
    let mut values: Vec<u64> = try_zeroed(n + 1, n_max)?;
    let mut spf: Vec<u32> = try_zeroed(n + 1, n_max)?;
    let mut prime_power: Vec<u32> = match func {
        ArithFn::Sigma => try_zeroed(n + 1, n_max)?,
        ArithFn::Phi => Vec::new(),
    };
    let mut primes: Vec<u32> = Vec::new();

    values[1] = 1;
    for i in 2..=n {
        if spf[i] == 0 {
            spf[i] = i as u32;
            primes.push(i as u32);
            values[i] = match func {
                ArithFn::Phi => i as u64 - 1,
                ArithFn::Sigma => {
                    prime_power[i] = i as u32;
                    i as u64 + 1
                }
            };
        }
        let smallest = spf[i];
        for &p in &primes {
            let m = i * p as usize;
            if p > smallest || m > n {
                break;
            }
            spf[m] = p;
            let p64 = p as u64;
            if p == smallest {
                match func {
                    ArithFn::Phi => values[m] = values[i] * p64,
                    ArithFn::Sigma => {
                        let pe = prime_power[i] as usize;
                        let sigma_power = values[pe] * p64 + 1;
                        prime_power[m] = pe as u32 * p;
                        values[m] = values[i / pe] * sigma_power;
                    }
                }
            } else {
                if func == ArithFn::Sigma {
                    prime_power[m] = p;
                }
                values[m] = values[i] * values[p as usize];
            }
        }
    }

    values.remove(0);
    Ok(values)
}
