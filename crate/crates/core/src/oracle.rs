//! Brute-force references: explicit transform matrices, exact posteriors by
//! enumeration of every input vector, and a classic binary SC decoder.
//!
//! None of this touches the butterfly networks or the LR lattice, so it can
//! serve as ground truth for both.

use crate::decoder::clamp_llr;
use crate::error::{Error, Result};
use crate::gfq::{FieldSpec, Symbol};
use crate::transform::{bit_reversal, log2_len};

/// Square matrix over F_q, row-major.
pub type Matrix = Vec<Vec<Symbol>>;

/// Largest length accepted by [`explicit_gn`].
pub const MAX_EXPLICIT_LEN: usize = 64;

/// Default cap on the number of input vectors enumerated by the posterior
/// oracles.
pub const DEFAULT_ENUM_BUDGET: u128 = 50_000_000;

/// `G_N` and `G_N^{-1}` with `u = x G_N`.
///
/// `G_N = B_N K^{(x)n}` with `K = [[1, 0], [alpha, 1]]`, so entry `(i, j)` is the
/// product over bit positions `b` of `K[bit_b(rev(i))][bit_b(j)]`. The
/// inverse is `(K^{-1})^{(x)n} B_N` with `K^{-1} = [[1, 0], [-alpha, 1]]`. The
/// product of the two is checked against the identity.
pub fn explicit_gn(f: &FieldSpec, len: usize) -> Result<(Matrix, Matrix)> {
    let n = log2_len(len)?;
    if len > MAX_EXPLICIT_LEN {
        return Err(Error::TooLarge { needed: len as u128, budget: MAX_EXPLICIT_LEN as u128 });
    }
    let rev = bit_reversal(len)?;
    let alpha = f.alpha();
    let kernel = [[1, 0], [alpha, 1]];
    let kernel_inv = [[1, 0], [f.neg(alpha), 1]];
    let kron = |k: &[[Symbol; 2]; 2], r: usize, c: usize| {
        (0..n).fold(1, |acc, b| f.mul(acc, k[(r >> b) & 1][(c >> b) & 1]))
    };
    let g: Matrix = (0..len).map(|i| (0..len).map(|j| kron(&kernel, rev[i], j)).collect()).collect();
    let g_inv: Matrix = (0..len).map(|i| (0..len).map(|j| kron(&kernel_inv, i, rev[j])).collect()).collect();
    for i in 0..len {
        for j in 0..len {
            let dot = (0..len).fold(0, |acc, k| f.add(acc, f.mul(g[i][k], g_inv[k][j])));
            assert_eq!(dot, (i == j) as Symbol, "G_N G_N^-1 is not the identity at ({i}, {j})");
        }
    }
    Ok((g, g_inv))
}

/// Row vector times matrix.
pub fn vec_mat(f: &FieldSpec, v: &[Symbol], m: &Matrix) -> Vec<Symbol> {
    (0..m[0].len()).map(|j| v.iter().zip(m).fold(0, |acc, (&a, row)| f.add(acc, f.mul(a, row[j])))).collect()
}

fn enumeration_size(q: usize, len: usize, budget: u128) -> Result<usize> {
    let needed = (q as u128).saturating_pow(len as u32);
    if needed > budget {
        return Err(Error::TooLarge { needed, budget });
    }
    Ok(needed as usize)
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Every `(x, u = x G_N, log prod_j P(x_j | y_j))` in lexicographic order of `x`.
fn enumerate(f: &FieldSpec, likelihoods: &[Vec<f64>], budget: u128) -> Result<Vec<(Vec<Symbol>, f64)>> {
    let len = likelihoods.len();
    let q = f.q();
    if likelihoods.iter().any(|l| l.len() != q) {
        return Err(Error::ShapeMismatch(format!("every position needs {q} likelihoods")));
    }
    let count = enumeration_size(q, len, budget)?;
    let (g, _) = explicit_gn(f, len)?;
    let logs: Vec<Vec<f64>> = likelihoods.iter().map(|l| l.iter().map(|p| p.ln()).collect()).collect();
    let mut out = Vec::with_capacity(count);
    let mut x = vec![0 as Symbol; len];
    for k in 0..count {
        let mut rest = k;
        for j in (0..len).rev() {
            x[j] = (rest % q) as Symbol;
            rest /= q;
        }
        let w: f64 = x.iter().zip(&logs).map(|(&s, l)| l[s as usize]).sum();
        out.push((vec_mat(f, &x, &g), w));
    }
    Ok(out)
}

/// `P(u_i | y, u_0..u_{i-1})` by summing the joint over every `x` with
/// `u = x G_N` matching the prefix. `likelihoods[j][s]` is proportional to
/// `P(x_j = s | y_j)`.
pub fn exact_posterior(f: &FieldSpec, likelihoods: &[Vec<f64>], i: usize, prefix: &[Symbol]) -> Result<Vec<f64>> {
    if prefix.len() != i || i >= likelihoods.len() {
        return Err(Error::ShapeMismatch(format!("index {i} needs a prefix of length {i}")));
    }
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); f.q()];
    for (u, w) in enumerate(f, likelihoods, DEFAULT_ENUM_BUDGET)? {
        if u[..i] == *prefix {
            buckets[u[i] as usize].push(w);
        }
    }
    let logs: Vec<f64> = buckets.iter().map(|b| log_sum_exp(b)).collect();
    let total = log_sum_exp(&logs);
    Ok(logs.iter().map(|l| (l - total).exp()).collect())
}

/// Log-domain LR vectors `ln P(u | y, u_<i) / P(0 | y, u_<i)` for every index
/// `i`, conditioned on the prefixes of `truth`, from one enumeration pass.
pub fn exact_llrs_genie(f: &FieldSpec, likelihoods: &[Vec<f64>], truth: &[Symbol]) -> Result<Vec<Vec<f64>>> {
    let len = likelihoods.len();
    if truth.len() != len {
        return Err(Error::ShapeMismatch("truth and observation lengths differ".into()));
    }
    let q = f.q();
    let mut buckets: Vec<Vec<Vec<f64>>> = vec![vec![Vec::new(); q]; len];
    for (u, w) in enumerate(f, likelihoods, DEFAULT_ENUM_BUDGET)? {
        for i in 0..len {
            buckets[i][u[i] as usize].push(w);
            if u[i] != truth[i] {
                break;
            }
        }
    }
    Ok(buckets
        .iter()
        .map(|b| {
            let l0 = log_sum_exp(&b[0]);
            b[1..].iter().map(|bu| clamp_llr(log_sum_exp(bu) - l0)).collect()
        })
        .collect())
}

/// Classic binary SC decoding. `llr[j] = ln P(x_j = 1 | y_j) / P(x_j = 0 | y_j)`
/// in channel order; `frozen[i]` is the value of a frozen index. Internally
/// works with `L = -llr` and the textbook `f` / `g` update rules on
/// bit-reversed observations, clamping at the same bound as the q-ary decoder.
pub fn binary_reference_sc(llr: &[f64], frozen: &[Option<u8>]) -> Result<Vec<u8>> {
    let len = llr.len();
    let rev = bit_reversal(len)?;
    if frozen.len() != len {
        return Err(Error::FrozenSetInvalid("frozen pattern length differs from the code".into()));
    }
    let l: Vec<f64> = (0..len).map(|j| -llr[rev[j]]).collect();
    let mut u = Vec::with_capacity(len);
    sc_node(&l, frozen, &mut u);
    Ok(u)
}

fn f_rule(a: f64, b: f64) -> f64 {
    let s = a.signum() * b.signum() * a.abs().min(b.abs());
    clamp_llr(s + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p())
}

fn g_rule(a: f64, b: f64, v: u8) -> f64 {
    clamp_llr(if v == 0 { b + a } else { b - a })
}

/// Decodes the bits of one subtree and returns their re-encoding.
fn sc_node(l: &[f64], frozen: &[Option<u8>], u: &mut Vec<u8>) -> Vec<u8> {
    if l.len() == 1 {
        let bit = frozen[u.len()].unwrap_or((l[0] < 0.0) as u8);
        u.push(bit);
        return vec![bit];
    }
    let h = l.len() / 2;
    let (a, b) = l.split_at(h);
    let left_in: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| f_rule(x, y)).collect();
    let v = sc_node(&left_in, frozen, u);
    let right_in: Vec<f64> = a.iter().zip(b).zip(&v).map(|((&x, &y), &s)| g_rule(x, y, s)).collect();
    let w = sc_node(&right_in, frozen, u);
    v.iter().zip(&w).map(|(&p, &r)| p ^ r).chain(w.iter().copied()).collect()
}
