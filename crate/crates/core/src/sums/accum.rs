use rayon::prelude::*;

/// Indices per reduction chunk. Fixed so results never depend on how rayon
/// schedules the work.
pub const CHUNK_LEN: u64 = 1 << 15;

/// Kahan–Neumaier compensated accumulator.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    #[inline]
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another accumulator in, keeping its compensation term.
    pub fn merge(&mut self, other: &Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::default();
        iter.into_iter().for_each(|v| acc.add(v));
        acc
    }
}

/// Sums over `1..=n` split into fixed chunks of [`CHUNK_LEN`] indices.
///
/// `chunk(first, last, acc)` accumulates the terms for `first..=last`.
/// Chunks run in parallel; their partial sums are merged in index order, so
/// the result is bit-identical for any thread count. The first error in
/// index order is returned.
pub fn chunked_sum<E, F>(n: u64, chunk: F) -> Result<f64, E>
where
    E: Send,
    F: Fn(u64, u64, &mut Neumaier) -> Result<(), E> + Sync,
{
    let chunks = n.div_ceil(CHUNK_LEN);
    let partials: Vec<Result<Neumaier, E>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let first = c * CHUNK_LEN + 1;
            let last = (first + CHUNK_LEN - 1).min(n);
            let mut acc = Neumaier::default();
            chunk(first, last, &mut acc)?;
            Ok(acc)
        })
        .collect();

    let mut total = Neumaier::default();
    for p in partials {
        total.merge(&p?);
    }
    Ok(total.value())
}
