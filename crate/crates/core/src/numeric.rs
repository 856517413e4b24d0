//! Small numeric kernels shared by the losses and metrics.

/// Correctly rounded floating point summation (Shewchuk / `math.fsum`).
///
/// The result is the exact sum rounded once, so it does not depend on the
/// order in which values are added. Non-finite inputs fall back to naive
/// summation.
#[derive(Debug, Clone, Default)]
pub struct ExactSum {
    partials: Vec<f64>,
    special: f64,
    has_special: bool,
}

impl ExactSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, value: f64) {
        if !value.is_finite() {
            self.special += value;
            self.has_special = true;
            return;
        }
        let mut x = value;
        let mut i = 0;
        for j in 0..self.partials.len() {
            let mut y = self.partials[j];
            if x.abs() < y.abs() {
                std::mem::swap(&mut x, &mut y);
            }
            let hi = x + y;
            let lo = y - (hi - x);
            if lo != 0.0 {
                self.partials[i] = lo;
                i += 1;
            }
            x = hi;
        }
        self.partials.truncate(i);
        self.partials.push(x);
    }

    pub fn value(&self) -> f64 {
        if self.has_special {
            return self.special + self.partials.iter().sum::<f64>();
        }
        let p = &self.partials;
        let mut n = p.len();
        if n == 0 {
            return 0.0;
        }
        n -= 1;
        let mut hi = p[n];
        let mut lo = 0.0;
        while n > 0 {
            let x = hi;
            let y = p[n - 1];
            n -= 1;
            hi = x + y;
            let yr = hi - x;
            lo = y - yr;
            if lo != 0.0 {
                break;
            }
        }
        // round-half-even correction across the remaining partials
        if n > 0 && ((lo < 0.0 && p[n - 1] < 0.0) || (lo > 0.0 && p[n - 1] > 0.0)) {
            let y = lo * 2.0;
            let x = hi + y;
            if y == x - hi {
                hi = x;
            }
        }
        hi
    }
}

impl Extend<f64> for ExactSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for v in iter {
            self.add(v);
        }
    }
}

pub fn fsum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = ExactSum::new();
    acc.extend(values);
    acc.value()
}

/// Sign with `sign(0) = 0`, the subgradient convention of the L1 losses.
#[inline]
pub fn sign0(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Median with the midpoint convention for even counts. Reorders `values`.
pub fn median_in_place(values: &mut [f64]) -> Option<f64> {
    let n = values.len();
    if n == 0 {
        return None;
    }
    values.sort_by(f64::total_cmp);
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    })
}

/// Welford running mean/variance. Constant sequences give exactly zero
/// variance, which the depth metric relies on.
#[derive(Debug, Clone, Copy, Default)]
pub struct RunningStats {
    count: usize,
    mean: f64,
    m2: f64,
}

impl RunningStats {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Divide-by-N variance.
    pub fn population_variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.m2 / self.count as f64).max(0.0)
        }
    }
}

/// Number of elements removed by top-fraction trimming: `ceil(frac * n)` when
/// `n >= min_count`, otherwise zero.
pub(crate) fn trim_count(n: usize, frac: f64, min_count: usize) -> usize {
    if n < min_count || frac <= 0.0 {
        return 0;
    }
    // guard against 0.02 * 50 = 1.0000000000000002
    let k = (frac * n as f64 - 1e-9).ceil().max(0.0) as usize;
    k.min(n)
}

/// Indices of the `keep` smallest values under the total order (value, index).
pub(crate) fn smallest_indices(values: &[f64], keep: usize) -> Vec<bool> {
    let n = values.len();
    let mut mask = vec![false; n];
    if keep >= n {
        mask.iter_mut().for_each(|m| *m = true);
        return mask;
    }
    if keep == 0 {
        return mask;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.select_nth_unstable_by(keep - 1, |&a, &b| {
        values[a].total_cmp(&values[b]).then(a.cmp(&b))
    });
    for &i in &order[..keep] {
        mask[i] = true;
    }
    mask
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fsum_is_order_independent() {
        let vals = [1e16, 1.0, -1e16, 3.0, 1e-3, 0.1, 0.2];
        let a = fsum(vals.iter().copied());
        let b = fsum(vals.iter().rev().copied());
        assert_eq!(a, b);
        assert_eq!(a, 4.301);
    }

    #[test]
    fn fsum_matches_known_hard_case() {
        assert_eq!(fsum([0.1; 10]), 1.0);
        assert_eq!(fsum([1.0, 1e100, 1.0, -1e100]), 2.0);
    }

    #[test]
    fn welford_constant_is_exactly_zero() {
        let mut s = RunningStats::default();
        for _ in 0..80 {
            s.push(0.1 + 0.2);
        }
        assert_eq!(s.population_variance(), 0.0);
        assert_eq!(s.mean(), 0.1 + 0.2);
    }

    #[test]
    fn trim_count_rule() {
        assert_eq!(trim_count(49, 0.02, 50), 0);
        assert_eq!(trim_count(50, 0.02, 50), 1);
        assert_eq!(trim_count(51, 0.02, 50), 2);
        assert_eq!(trim_count(100, 0.02, 50), 2);
    }

    #[test]
    fn smallest_indices_breaks_ties_by_index() {
        let mask = smallest_indices(&[1.0, 2.0, 2.0, 0.5], 3);
        assert_eq!(mask, vec![true, true, false, true]);
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median_in_place(&mut [3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median_in_place(&mut [4.0, 1.0, 2.0, 3.0]), Some(2.5));
        assert_eq!(median_in_place(&mut []), None);
    }
}
