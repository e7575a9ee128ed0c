//! Compensated summation with a thread-count independent reduction order.

use rayon::prelude::*;

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for Neumaier {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = Neumaier::default();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

pub fn sum(iter: impl IntoIterator<Item = f64>) -> f64 {
    iter.into_iter().collect::<Neumaier>().value()
}

pub const CHUNK: u64 = 1 << 12;

/// `sum_{i < n} f(i)`: fixed-size chunks summed in parallel, chunk totals
/// merged in index order, so the result does not depend on the thread count.
pub fn par_sum(n: u64, f: impl Fn(u64) -> f64 + Sync) -> f64 {
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| sum((c * CHUNK..((c + 1) * CHUNK).min(n)).map(&f)))
        .collect();
    sum(partial)
}

/// As [`par_sum`] over the items of a slice.
pub fn par_sum_slice<T: Sync>(items: &[T], f: impl Fn(&T) -> f64 + Sync) -> f64 {
    par_sum(items.len() as u64, |i| f(&items[i as usize]))
}
