//! The extended polar transform `u = x G_N` and its inverse.
//!
//! `G_N = B_N K^{(x)n}` where `K = [[1, 0], [alpha, 1]]` acts on row vectors
//! (`u1 = x1 + alpha x2`, `u2 = x2`) and `B_N` is the bit-reversal
//! permutation. Both directions run as butterfly networks: the channel-side
//! vector is bit-reversed into a scratch buffer and then `n` stages of
//! stride-`2^s` butterflies are applied in place. `G_N` is never formed.
//!
//! Vectors are indexed from 0. `x` is in channel order (position `j` is the
//! `j`-th use of the channel or the `j`-th source symbol); `u` is in the
//! order in which the successive-cancellation decoder resolves it.

use crate::error::{Error, Result};
use crate::gfq::{FieldSpec, Symbol};

/// `log2(len)` for a power of two.
pub fn log2_len(len: usize) -> Result<usize> {
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::LengthNotPowerOfTwo(len));
    }
    Ok(len.trailing_zeros() as usize)
}

#[inline]
pub(crate) fn reverse_bits(i: usize, bits: usize) -> usize {
    if bits == 0 {
        0
    } else {
        i.reverse_bits() >> (usize::BITS as usize - bits)
    }
}

/// The bit-reversal permutation of `[0, len)`; an involution.
pub fn bit_reversal(len: usize) -> Result<Vec<usize>> {
    let n = log2_len(len)?;
    Ok((0..len).map(|i| reverse_bits(i, n)).collect())
}

fn permute_bit_reversed(v: &mut [Symbol]) {
    let n = v.len().trailing_zeros() as usize;
    for i in 0..v.len() {
        let j = reverse_bits(i, n);
        if i < j {
            v.swap(i, j);
        }
    }
}

/// In-place `u = x G_N`.
pub fn polar_encode_in_place(f: &FieldSpec, v: &mut [Symbol]) -> Result<()> {
    log2_len(v.len())?;
    permute_bit_reversed(v);
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_exact_mut(2 * h) {
            let (top, bot) = block.split_at_mut(h);
            for (a, &b) in top.iter_mut().zip(bot.iter()) {
                *a = f.add_alpha(*a, b);
            }
        }
        h *= 2;
    }
    Ok(())
}

/// In-place `x = u G_N^{-1}`. Each kernel is inverted as `x1 = u1 - alpha u2`;
/// for q > 2 this differs from re-encoding.
pub fn polar_decode_transform_in_place(f: &FieldSpec, v: &mut [Symbol]) -> Result<()> {
    log2_len(v.len())?;
    let mut h = 1;
    while h < v.len() {
        for block in v.chunks_exact_mut(2 * h) {
            let (top, bot) = block.split_at_mut(h);
            for (a, &b) in top.iter_mut().zip(bot.iter()) {
                *a = f.sub_alpha(*a, b);
            }
        }
        h *= 2;
    }
    permute_bit_reversed(v);
    Ok(())
}

/// `u = x G_N`.
pub fn polar_encode(f: &FieldSpec, x: &[Symbol]) -> Result<Vec<Symbol>> {
    let mut u = x.to_vec();
    polar_encode_in_place(f, &mut u)?;
    Ok(u)
}

/// `x = u G_N^{-1}`.
pub fn polar_decode_transform(f: &FieldSpec, u: &[Symbol]) -> Result<Vec<Symbol>> {
    let mut x = u.to_vec();
    polar_decode_transform_in_place(f, &mut x)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn kernel_example_over_f3() {
        let f = FieldSpec::new(3).unwrap();
        assert_eq!(polar_encode(&f, &[1, 2]).unwrap(), vec![0, 2]);
        assert_eq!(polar_decode_transform(&f, &[0, 2]).unwrap(), vec![1, 2]);
        assert_eq!(polar_encode(&f, &[2]).unwrap(), vec![2]);
    }

    #[test]
    fn bit_reversal_examples() {
        assert_eq!(bit_reversal(8).unwrap(), vec![0, 4, 2, 6, 1, 5, 3, 7]);
        assert_eq!(bit_reversal(2).unwrap(), vec![0, 1]);
        assert_eq!(bit_reversal(1).unwrap(), vec![0]);
        let p = bit_reversal(16).unwrap();
        assert!((0..16).all(|i| p[p[i]] == i));
        assert!(matches!(bit_reversal(12), Err(Error::LengthNotPowerOfTwo(12))));
        assert!(matches!(bit_reversal(0), Err(Error::LengthNotPowerOfTwo(0))));
    }

    #[test]
    fn rejects_bad_lengths() {
        let f = FieldSpec::new(3).unwrap();
        assert!(polar_encode(&f, &[0, 1, 2]).is_err());
        assert!(polar_decode_transform(&f, &[]).is_err());
    }

    /// Recursive definition: encode each half of `x`, then interleave
    /// `(s_i + alpha t_i, t_i)`.
    fn encode_recursive(f: &FieldSpec, x: &[Symbol]) -> Vec<Symbol> {
        if x.len() == 1 {
            return x.to_vec();
        }
        let h = x.len() / 2;
        let s = encode_recursive(f, &x[..h]);
        let t = encode_recursive(f, &x[h..]);
        s.iter().zip(&t).flat_map(|(&a, &b)| [f.add_alpha(a, b), b]).collect()
    }

    fn field_and_vector() -> impl Strategy<Value = (usize, Vec<Symbol>)> {
        (prop::sample::select(vec![2usize, 3, 4, 5, 8]), 0usize..=4).prop_flat_map(|(q, n)| {
            (Just(q), prop::collection::vec(0..q as Symbol, 1 << n))
        })
    }

    proptest! {
        #[test]
        fn roundtrip((q, x) in field_and_vector()) {
            let f = FieldSpec::new(q).unwrap();
            let u = polar_encode(&f, &x).unwrap();
            prop_assert_eq!(polar_decode_transform(&f, &u).unwrap(), x);
        }

        #[test]
        fn butterfly_matches_half_split_recursion((q, x) in field_and_vector()) {
            let f = FieldSpec::new(q).unwrap();
            prop_assert_eq!(polar_encode(&f, &x).unwrap(), encode_recursive(&f, &x));
        }

        #[test]
        fn linear((q, x) in field_and_vector(), seed in any::<u64>()) {
            let f = FieldSpec::new(q).unwrap();
            let y: Vec<Symbol> = x.iter().enumerate()
                .map(|(i, _)| ((seed >> (i % 60)) as usize % q) as Symbol).collect();
            let sum: Vec<Symbol> = x.iter().zip(&y).map(|(&a, &b)| f.add(a, b)).collect();
            let lhs = polar_encode(&f, &sum).unwrap();
            let (ex, ey) = (polar_encode(&f, &x).unwrap(), polar_encode(&f, &y).unwrap());
            let rhs: Vec<Symbol> = ex.iter().zip(&ey).map(|(&a, &b)| f.add(a, b)).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn binary_transform_is_an_involution(x in prop::collection::vec(0..2 as Symbol, 64)) {
            let f = FieldSpec::new(2).unwrap();
            prop_assert_eq!(polar_encode(&f, &x).unwrap(), polar_decode_transform(&f, &x).unwrap());
        }
    }
}
