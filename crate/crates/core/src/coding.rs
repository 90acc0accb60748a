//! Prefix-free integer codes and Kraft sums.

/// `⌈log2 n⌉` for `n ≥ 1`, so a one-symbol alphabet costs zero bits.
pub fn ceil_log2(n: u64) -> u32 {
    assert!(n > 0, "ceil_log2 of zero");
    if n == 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Length of the Elias gamma code of `n ≥ 1`: `2⌊log2 n⌋ + 1`.
pub fn gamma_len(n: u64) -> u32 {
    assert!(n > 0, "gamma code is defined for positive integers");
    2 * (63 - n.leading_zeros()) + 1
}

/// Elias gamma code of `n ≥ 1` as a bit vector, most significant bit first.
pub fn gamma_encode(n: u64) -> Vec<bool> {
    let width = 64 - n.leading_zeros();
    let mut out = vec![false; (width - 1) as usize];
    out.extend((0..width).rev().map(|b| (n >> b) & 1 == 1));
    out
}

/// Decodes one gamma code word from the front of `bits`, returning the value
/// and the number of bits consumed.
pub fn gamma_decode(bits: &[bool]) -> Option<(u64, usize)> {
    let zeros = bits.iter().take_while(|b| !**b).count();
    if zeros >= 64 || bits.len() < 2 * zeros + 1 {
        return None;
    }
    let value = bits[zeros..=2 * zeros]
        .iter()
        .fold(0u64, |acc, &b| (acc << 1) | b as u64);
    Some((value, 2 * zeros + 1))
}

/// `Σ 2^-ℓ` over a list of code word lengths.
pub fn kraft_sum(lengths: impl IntoIterator<Item = u32>) -> f64 {
    lengths.into_iter().map(|l| (-(l as f64)).exp2()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_gamma_words() {
        assert_eq!(gamma_encode(1), vec![true]);
        assert_eq!(gamma_encode(2), vec![false, true, false]);
        assert_eq!(gamma_encode(5), vec![false, false, true, false, true]);
        assert_eq!(gamma_len(1), 1);
        assert_eq!(gamma_len(3), 3);
        assert_eq!(gamma_len(4), 5);
        assert_eq!(gamma_len(65_537), 33);
    }

    #[test]
    fn ceil_log2_values() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(4), 2);
        assert_eq!(ceil_log2(5), 3);
        assert_eq!(ceil_log2(1 << 40), 40);
    }

    #[test]
    fn gamma_kraft_sum_below_one() {
        assert!(kraft_sum((1..=100_000u64).map(gamma_len)) < 1.0);
    }

    proptest! {
        #[test]
        fn gamma_round_trip(n in 1u64..u64::MAX / 2) {
            let w = gamma_encode(n);
            prop_assert_eq!(w.len() as u32, gamma_len(n));
            prop_assert_eq!(gamma_decode(&w), Some((n, w.len())));
        }

        #[test]
        fn gamma_concatenation_parses(a in 1u64..1_000_000, b in 1u64..1_000_000) {
            let mut w = gamma_encode(a);
            w.extend(gamma_encode(b));
            let (x, used) = gamma_decode(&w).unwrap();
            prop_assert_eq!(x, a);
            prop_assert_eq!(gamma_decode(&w[used..]).map(|p| p.0), Some(b));
        }
    }
}
