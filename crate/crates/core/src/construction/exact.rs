//! Exact Bhattacharyya parameters by enumerating every `(y, u)` pair.

use crate::error::{Error, Result};
use crate::gfq::{FieldSpec, Symbol};
use crate::source::JointSource;
use crate::transform::{log2_len, polar_decode_transform_in_place};

/// Default cap on `|Y|^N * q^N * N`.
pub const DEFAULT_EXACT_BUDGET: u128 = 400_000_000;

/// Exact `Z(U_i | Y, U_0..U_{i-1})` for one index.
pub fn exact_z(f: &FieldSpec, model: &JointSource, len: usize, i: usize) -> Result<f64> {
    if i >= len {
        return Err(Error::ShapeMismatch(format!("index {i} out of range for N={len}")));
    }
    Ok(exact_z_all(f, model, len)?[i])
}

/// Exact Z for every index, within [`DEFAULT_EXACT_BUDGET`].
pub fn exact_z_all(f: &FieldSpec, model: &JointSource, len: usize) -> Result<Vec<f64>> {
    exact_z_budget(f, model, len, DEFAULT_EXACT_BUDGET)
}

/// Exact Z for every index with an explicit enumeration budget.
///
/// For each observation vector the joint weight `W(u) = prod_j P(x_j, y_j)`
/// of every `u` (lexicographic, `u_0` most significant) is computed with
/// `x = u G_N^{-1}`. Summing out trailing symbols gives the prefix weights
/// `S(u_0..u_i)`, and index `i` collects
/// `sum_{u_i != u_i'} sqrt(S(.., u_i) S(.., u_i'))` over all prefixes.
pub fn exact_z_budget(f: &FieldSpec, model: &JointSource, len: usize, budget: u128) -> Result<Vec<f64>> {
    log2_len(len)?;
    let q = f.q();
    if model.q() != q {
        return Err(Error::ShapeMismatch(format!("model is over F_{}, field is F_{q}", model.q())));
    }
    let ny = model.ny();
    let needed = (ny as u128).saturating_pow(len as u32).saturating_mul((q as u128).saturating_pow(len as u32))
        .saturating_mul(len as u128);
    if needed > budget {
        return Err(Error::TooLarge { needed, budget });
    }
    let n_y = ny.pow(len as u32);
    let n_u = q.pow(len as u32);

    // x_of[u] = u G^{-1}, shared by every observation vector.
    let mut x_of = vec![0 as Symbol; n_u * len];
    for (ui, x) in x_of.chunks_exact_mut(len).enumerate() {
        let mut rest = ui;
        for j in (0..len).rev() {
            x[j] = (rest % q) as Symbol;
            rest /= q;
        }
        polar_decode_transform_in_place(f, x)?;
    }

    let mut z = vec![0.0; len];
    let mut y = vec![0usize; len];
    let mut weights = vec![0.0; n_u];
    let mut upper = vec![0.0; n_u];
    for yi in 0..n_y {
        let mut rest = yi;
        for j in (0..len).rev() {
            y[j] = rest % ny;
            rest /= ny;
        }
        for (w, x) in weights.iter_mut().zip(x_of.chunks_exact(len)) {
            *w = x.iter().zip(&y).map(|(&xs, &ys)| model.joint(xs as usize, ys)).product();
        }
        // Walk from the longest prefix down: at step i `weights` holds
        // S(u_0..u_i) in its first q^(i+1) entries.
        let mut width = n_u;
        for i in (0..len).rev() {
            let groups = width / q;
            for g in 0..groups {
                let s = &weights[g * q..(g + 1) * q];
                let mut acc = 0.0;
                for a in 0..q {
                    for b in 0..q {
                        if a != b {
                            acc += (s[a] * s[b]).sqrt();
                        }
                    }
                }
                z[i] += acc;
                upper[g] = s.iter().sum();
            }
            weights[..groups].copy_from_slice(&upper[..groups]);
            width = groups;
        }
    }
    z.iter_mut().for_each(|v| *v /= (q - 1) as f64);
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_binary_source_has_unit_z() {
        let f = FieldSpec::new(2).unwrap();
        let m = JointSource::from_joint(&[vec![0.25, 0.25], vec![0.25, 0.25]]).unwrap();
        assert!((exact_z(&f, &m, 1, 0).unwrap() - 1.0).abs() < 1e-15);
        let all = exact_z_all(&f, &m, 4).unwrap();
        assert!(all.iter().all(|v| (v - 1.0).abs() < 1e-12), "{all:?}");
    }

    #[test]
    fn deterministic_source_has_zero_z() {
        let f = FieldSpec::new(3).unwrap();
        let m = JointSource::from_joint(&[vec![0.5, 0.5], vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(exact_z(&f, &m, 1, 0).unwrap(), 0.0);
        assert!(exact_z_all(&f, &m, 4).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_symbol_matches_closed_form() {
        // N = 1: Z = sum_y 1/(q-1) sum_{a != b} sqrt(P(a,y) P(b,y)).
        let f = FieldSpec::new(3).unwrap();
        let joint = vec![vec![0.2, 0.1], vec![0.05, 0.25], vec![0.3, 0.1]];
        let m = JointSource::from_joint(&joint).unwrap();
        let mut want = 0.0;
        for y in 0..2 {
            for a in 0..3 {
                for b in 0..3 {
                    if a != b {
                        want += (joint[a][y] * joint[b][y]).sqrt();
                    }
                }
            }
        }
        assert!((exact_z(&f, &m, 1, 0).unwrap() - want / 2.0).abs() < 1e-14);
    }

    #[test]
    fn budget_is_enforced() {
        let f = FieldSpec::new(5).unwrap();
        let m = JointSource::tables();
        assert!(matches!(exact_z_budget(&f, &m, 8, 1_000_000), Err(Error::TooLarge { .. })));
        assert!(exact_z(&f, &m, 2, 2).is_err());
    }
}
