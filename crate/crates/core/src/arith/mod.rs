//! Tables of the Euler totient φ and the divisor sum σ.
//!
//! Tables are built once, are immutable afterwards and can be shared between
//! threads. Small and medium tables come from a linear sieve over smallest
//! prime factors; larger ones are filled segment by segment in parallel.
//! [`SegmentedSieve`] offers the same values as a stream when a flat table
//! would not fit in memory.

mod cache;
mod linear;
mod segmented;
mod store;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cache::{checksum, load_table, save_table, FormatError, MAGIC};
pub use segmented::{SegmentedSieve, MAX_STREAM_N};
pub use store::TableStore;

/// Largest `n_max` accepted by [`sieve`].
pub const MAX_SIEVE_N: u64 = 1_000_000_000;

/// Largest argument accepted by [`brute_force_value`].
pub const MAX_BRUTE_FORCE_K: u64 = 1_000_000;

/// Tables up to this size use the linear sieve; above it the segmented path.
pub(crate) const LINEAR_SIEVE_LIMIT: u64 = 1 << 24;

#[derive(Debug, Error)]
pub enum ArithError {
    #[error("n_max must be in 1..={max}, got {got}")]
    InvalidSize { got: u64, max: u64 },
    #[error("argument k must be in 1..={max}, got {got}")]
    InvalidIndex { got: u64, max: u64 },
    #[error("cannot allocate a table of {n_max} entries")]
    Resource { n_max: u64 },
    #[error("expected a {expected} table, got {found}")]
    WrongFunction { expected: ArithFn, found: ArithFn },
    #[error("table covers 1..={len}, {needed} required")]
    TooShort { len: u64, needed: u64 },
    #[error("cache format: {0}")]
    Format(#[from] FormatError),
    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// The arithmetic functions a table can hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArithFn {
    Phi,
    Sigma,
}

impl ArithFn {
    /// Byte stored in the cache file header.
    pub fn id(self) -> u8 {
        match self {
            ArithFn::Phi => 1,
            ArithFn::Sigma => 2,
        }
    }

    pub fn from_id(id: u8) -> Option<Self> {
        match id {
            1 => Some(ArithFn::Phi),
            2 => Some(ArithFn::Sigma),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ArithFn::Phi => "phi",
            ArithFn::Sigma => "sigma",
        }
    }
}

impl fmt::Display for ArithFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ArithFn {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "phi" | "totient" => Ok(ArithFn::Phi),
            "sigma" => Ok(ArithFn::Sigma),
            other => Err(format!(
                "unknown arithmetic function '{other}' (expected phi or sigma)"
            )),
        }
    }
}

/// Values of φ or σ on `1..=n_max`.
#[derive(Clone, PartialEq, Eq)]
pub struct SieveTable {
    func: ArithFn,
    // values[k - 1] holds f(k)
    values: Vec<u64>,
}

impl fmt::Debug for SieveTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SieveTable")
            .field("func", &self.func)
            .field("n_max", &self.n_max())
            .finish_non_exhaustive()
    }
}

impl SieveTable {
    pub(crate) fn from_parts(func: ArithFn, values: Vec<u64>) -> Self {
        debug_assert!(!values.is_empty());
        Self { func, values }
    }

    pub fn func(&self) -> ArithFn {
        self.func
    }

    pub fn n_max(&self) -> u64 {
        self.values.len() as u64
    }

    /// f(k) for `1 <= k <= n_max`.
    ///
    /// Panics when `k` is outside the table.
    pub fn get(&self, k: u64) -> u64 {
        assert!(
            k >= 1 && k <= self.n_max(),
            "index {k} outside 1..={}",
            self.n_max()
        );
        self.values[(k - 1) as usize]
    }

    /// The values as a slice, `values()[k - 1] == get(k)`.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    /// Σ_{k ≤ n} f(k), exact.
    pub fn summatory(&self, n: u64) -> u128 {
        let n = n.min(self.n_max()) as usize;
        self.values[..n].iter().map(|&v| v as u128).sum()
    }
}

/// A sequence of φ or σ values that can be read in contiguous blocks.
///
/// Implemented by flat tables and by the streaming [`SegmentedSieve`].
pub trait ArithSource: Send + Sync {
    fn func(&self) -> ArithFn;

    /// Highest index covered.
    fn len(&self) -> u64;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Writes f(first), f(first + 1), ... into `out`.
    ///
    /// Callers guarantee `first >= 1` and `first + out.len() - 1 <= len()`.
    fn fill(&self, first: u64, out: &mut [u64]);
}

impl ArithSource for SieveTable {
    fn func(&self) -> ArithFn {
        self.func
    }

    fn len(&self) -> u64 {
        self.n_max()
    }

    fn fill(&self, first: u64, out: &mut [u64]) {
        let start = (first - 1) as usize;
        out.copy_from_slice(&self.values[start..start + out.len()]);
    }
}

/// Builds the table of `func` on `1..=n_max`.
///
/// The result does not depend on the size of the rayon thread pool.
pub fn sieve(func: ArithFn, n_max: u64) -> Result<SieveTable, ArithError> {
    if n_max == 0 || n_max > MAX_SIEVE_N {
        return Err(ArithError::InvalidSize {
            got: n_max,
            max: MAX_SIEVE_N,
        });
    }
    let values = if n_max <= LINEAR_SIEVE_LIMIT {
        linear::sieve(func, n_max)?
    } else {
        segmented::sieve(func, n_max)?
    };
    Ok(SieveTable::from_parts(func, values))
}

/// Allocates a zeroed vector, reporting allocation failure instead of aborting.
pub(crate) fn try_zeroed<T: Clone + Default>(len: usize, n_max: u64) -> Result<Vec<T>, ArithError> {
    let mut v = Vec::new();
    v.try_reserve_exact(len)
        .map_err(|_| ArithError::Resource { n_max })?;
    v.resize(len, T::default());
    Ok(v)
}

/// φ(k) by counting `j <= k` with gcd(j, k) = 1, or σ(k) by trial division
/// over all `d <= k`. O(k) per call; intended as an oracle.
pub fn brute_force_value(func: ArithFn, k: u64) -> Result<u64, ArithError> {
    if k == 0 || k > MAX_BRUTE_FORCE_K {
        return Err(ArithError::InvalidIndex {
            got: k,
            max: MAX_BRUTE_FORCE_K,
        });
    }
    Ok(match func {
        ArithFn::Phi => (1..=k).filter(|&j| gcd(j, k) == 1).count() as u64,
        ArithFn::Sigma => (1..=k).filter(|&d| k.is_multiple_of(d)).sum(),
    })
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_small_tables() {
        let t = sieve(ArithFn::Phi, 1).unwrap();
        assert_eq!(t.values(), &[1]);

        let t = sieve(ArithFn::Phi, 10).unwrap();
        assert_eq!(t.get(10), 4);
        assert_eq!(t.summatory(10), 32);
        assert_eq!(t.values(), &[1, 1, 2, 2, 4, 2, 6, 4, 6, 4]);
    }

    #[test]
    fn sigma_small_tables() {
        let t = sieve(ArithFn::Sigma, 10).unwrap();
        assert_eq!(t.get(10), 18);
        assert_eq!(t.summatory(10), 87);
        assert_eq!(t.values(), &[1, 3, 4, 7, 6, 12, 8, 15, 13, 18]);
    }

    #[test]
    fn brute_force_examples() {
        assert_eq!(brute_force_value(ArithFn::Phi, 7).unwrap(), 6);
        assert_eq!(brute_force_value(ArithFn::Sigma, 6).unwrap(), 12);
        assert_eq!(brute_force_value(ArithFn::Phi, 1).unwrap(), 1);
        assert_eq!(brute_force_value(ArithFn::Sigma, 1).unwrap(), 1);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(matches!(
            sieve(ArithFn::Phi, 0),
            Err(ArithError::InvalidSize { .. })
        ));
        assert!(matches!(
            sieve(ArithFn::Sigma, MAX_SIEVE_N + 1),
            Err(ArithError::InvalidSize { .. })
        ));
        assert!(matches!(
            brute_force_value(ArithFn::Phi, 0),
            Err(ArithError::InvalidIndex { .. })
        ));
        assert!(brute_force_value(ArithFn::Phi, MAX_BRUTE_FORCE_K + 1).is_err());
    }

    #[test]
    fn linear_and_segmented_agree() {
        for func in [ArithFn::Phi, ArithFn::Sigma] {
            for n in [1u64, 2, 3, 97, 1000, 131_073, 300_001] {
                let a = linear::sieve(func, n).unwrap();
                let b = segmented::sieve(func, n).unwrap();
                assert_eq!(a, b, "{func} n={n}");
            }
        }
    }

    #[test]
    fn parse_function_names() {
        assert_eq!("phi".parse::<ArithFn>().unwrap(), ArithFn::Phi);
        assert_eq!("Sigma".parse::<ArithFn>().unwrap(), ArithFn::Sigma);
        assert!("mu".parse::<ArithFn>().is_err());
        for f in [ArithFn::Phi, ArithFn::Sigma] {
            assert_eq!(ArithFn::from_id(f.id()), Some(f));
        }
        assert_eq!(ArithFn::from_id(0), None);
    }
}
