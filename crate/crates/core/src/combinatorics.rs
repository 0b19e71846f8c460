//! Exact binomial coefficients and a compensated floating-point accumulator.

use num_bigint::BigUint;
use num_traits::One;

/// Row `C(n, 0..=n)` of Pascal's triangle as exact big integers.
///
/// Uses the multiplicative recurrence `C(n, k+1) = C(n, k)·(n−k)/(k+1)`; each
/// division is exact.
pub fn binomial_row(n: u32) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 0..n {
        c = c * (n - k) / (k + 1);
        row.push(c.clone());
    }
    row
}

pub fn binomial(n: u32, k: u32) -> BigUint {
    if k > n {
        return BigUint::default();
    }
    let k = k.min(n - k);
    let mut c = BigUint::one();
    for i in 0..k {
        c = c * (n - i) / (i + 1);
    }
    c
}

/// `ln C(n, k)` for all k, for tables too large for `f64` counts.
pub fn ln_binomial_row(n: u32) -> Vec<f64> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut acc = 0.0f64;
    row.push(acc);
    for k in 0..n {
        acc += ((n - k) as f64).ln() - ((k + 1) as f64).ln();
        row.push(acc);
    }
    row
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.compensation);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Pascal's rule, additions only.
    fn pascal(n: u32) -> Vec<BigUint> {
        let mut row = vec![BigUint::one()];
        for _ in 0..n {
            let mut next = vec![BigUint::one(); row.len() + 1];
            for k in 1..row.len() {
                next[k] = &row[k - 1] + &row[k];
            }
            row = next;
        }
        row
    }

    #[test]
    fn matches_pascal() {
        for n in 0..=60 {
            assert_eq!(binomial_row(n), pascal(n), "n = {n}");
        }
    }

    #[test]
    fn known_values() {
        assert_eq!(binomial(10, 5), BigUint::from(252u32));
        assert_eq!(binomial(10, 6), BigUint::from(210u32));
        assert_eq!(binomial(10, 11), BigUint::default());
        assert_eq!(
            binomial(100, 49),
            "98913082887808032681188722800".parse::<BigUint>().unwrap()
        );
        assert_eq!(
            binomial(1000, 42),
            "297242911333923795640059429176065863139989673213703918037987737481286092000"
                .parse::<BigUint>()
                .unwrap()
        );
        assert_eq!(binomial_row(1000)[42], binomial(1000, 42));
    }

    #[test]
    fn ln_row_agrees() {
        let exact = binomial_row(200);
        let ln = ln_binomial_row(200);
        for (c, l) in exact.iter().zip(&ln) {
            let c: f64 = c.to_string().parse().unwrap();
            assert!((c.ln() - l).abs() < 1e-10);
        }
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::default();
        s.add(1.0);
        for _ in 0..10_000 {
            s.add(1e-16);
        }
        s.add(-1.0);
        assert!((s.value() - 1e-12).abs() < 1e-24);
    }
}
