//! Basic sanity statistics for generated key bits (frequency and runs).

use super::BitString;

/// Monobit statistic |S_n| / sqrt(n), where S_n sums +1/-1 per bit.
/// Values above ~2.58 reject uniformity at the 1% level.
pub fn monobit_statistic(bits: &BitString) -> f64 {
    let n = bits.len() as f64;
    if n == 0.0 {
        return 0.0;
    }
    let ones = bits.count_ones() as f64;
    (2.0 * ones - n).abs() / n.sqrt()
}

/// Number of maximal runs of identical bits.
pub fn runs(bits: &BitString) -> usize {
    let mut it = bits.iter();
    let Some(mut prev) = it.next() else {
        return 0;
    };
    let mut count = 1;
    for b in it {
        if b != prev {
            count += 1;
            prev = b;
        }
    }
    count
}

/// Normal-approximation z-score of the runs count against its expectation
/// given the observed proportion of ones.
pub fn runs_z(bits: &BitString) -> f64 {
    let n = bits.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    let pi = bits.count_ones() as f64 / n;
    let expected = 2.0 * n * pi * (1.0 - pi);
    let sd = 2.0 * n.sqrt() * pi * (1.0 - pi);
    if sd == 0.0 {
        return f64::INFINITY;
    }
    (runs(bits) as f64 - expected).abs() / sd
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_of_known_string() {
        let b: BitString = [true, true, false, true, false, false].into_iter().collect();
        assert_eq!(runs(&b), 4);
        assert_eq!(runs(&BitString::new()), 0);
    }

    #[test]
    fn constant_string_fails_monobit() {
        let b: BitString = std::iter::repeat_n(true, 1000).collect();
        assert!(monobit_statistic(&b) > 30.0);
    }
}
