//! Successive-cancellation decoding over GF(q) with log-domain LR vectors.
//!
//! An LR vector holds, for every non-zero symbol `k`, the log-ratio
//! `ln P(k | .) / P(0 | .)`; component `k - 1` belongs to symbol `k` and the
//! zero symbol's implicit component is 0. Every stored value is clamped to
//! `[-LLR_CLAMP, LLR_CLAMP]`.
//!
//! The decoder keeps a `(n + 1) x N` lattice of LR vectors and symbols.
//! Level `n` holds the channel-side vectors in channel order; level 0 holds
//! the per-index vectors `L_N^(i)`. At level `d` the row is split into
//! `2^d` contiguous blocks of `B = N / 2^d` slots, each block being a
//! length-`B` polar code over its slice of the observations. The two
//! children of block `b` at level `d` are the halves of the same slot range
//! at level `d + 1`: the first half carries `u_odd - alpha u_even`, the second
//! `u_even`. (This contiguous layout is the bit-reversed relabeling of the
//! classic butterfly drawing, which is why observations enter in plain
//! channel order.)
//!
//! Every slot is computed at most once per codeword, on demand, depth first.

use crate::channel::FrozenStream;
use crate::error::{Error, Result};
use crate::gfq::{FieldSpec, Symbol};
use crate::transform::log2_len;

/// Bound applied to every log-ratio. It only guards against infinities:
/// channel log-ratios at high SNR already reach several hundred, and a bound
/// that binds there would merge the leading components into ties.
pub const LLR_CLAMP: f64 = 1e8;

/// Floor for natural-log probabilities before a ratio is formed, so that
/// zero-probability symbols still give finite log-ratios.
pub const LOG_PROB_FLOOR: f64 = -500.0;

// Below this the linear-domain convolution sum may have lost terms to
// underflow, so the component is recomputed with a full log-sum-exp.
const LINEAR_FLOOR: f64 = 1e-280;

// Odd-rule inputs with every |LLR| below this take the deviation form.
const NEAR_UNIFORM: f64 = 0.5;

#[inline]
pub fn clamp_llr(v: f64) -> f64 {
    v.clamp(-LLR_CLAMP, LLR_CLAMP)
}

/// A length-`(q - 1)` log-domain likelihood-ratio vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(pub Vec<f64>);

impl LlrVector {
    /// The uninformative vector (all symbols equally likely).
    pub fn uniform(q: usize) -> Self {
        LlrVector(vec![0.0; q - 1])
    }

    /// Certainty on `symbol`, the way a noiseless observation looks.
    pub fn certain(q: usize, symbol: Symbol) -> Self {
        let mut v = vec![0.0; q - 1];
        if symbol == 0 {
            v.fill(-LLR_CLAMP);
        } else {
            v[symbol as usize - 1] = LLR_CLAMP;
        }
        LlrVector(v)
    }

    /// From natural-log probabilities of every symbol (index 0 included).
    pub fn from_log_probs(log_probs: &[f64]) -> Self {
        let base = log_probs[0].max(LOG_PROB_FLOOR);
        LlrVector(log_probs[1..].iter().map(|&l| clamp_llr(l.max(LOG_PROB_FLOOR) - base)).collect())
    }

    /// Normalized posterior over all q symbols.
    pub fn probabilities(&self) -> Vec<f64> {
        let max = self.0.iter().copied().fold(0.0, f64::max);
        let mut p: Vec<f64> = std::iter::once(0.0)
            .chain(self.0.iter().copied())
            .map(|l| (l - max).exp())
            .collect();
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        p
    }

    pub fn detect(&self) -> Symbol {
        detect(&self.0)
    }
}

/// Hard decision: the symbol of the largest component if it is positive,
/// otherwise 0. Among tied maxima the lowest symbol wins.
pub fn detect(llr: &[f64]) -> Symbol {
    let mut best = 0.0;
    let mut symbol = 0;
    for (k, &v) in llr.iter().enumerate() {
        if v > best {
            best = v;
            symbol = k + 1;
        }
    }
    symbol as Symbol
}

/// Scratch buffers for the two LR combining rules.
#[derive(Debug, Clone)]
pub(crate) struct Kernel {
    ea: Vec<f64>,
    eb: Vec<f64>,
    pa: Vec<f64>,
    pb: Vec<f64>,
    sums: Vec<f64>,
    // prime fields: pa repeated twice and pb reversed, so that every output
    // is a contiguous dot product
    pa2: Vec<f64>,
    pb_rev: Vec<f64>,
}

/// Dot product with four independent accumulators.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let (ra, rb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    let tail: f64 = ra.iter().zip(rb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

impl Kernel {
    pub(crate) fn new(q: usize) -> Self {
        Kernel {
            ea: vec![0.0; q],
            eb: vec![0.0; q],
            pa: vec![0.0; q],
            pb: vec![0.0; q],
            sums: vec![0.0; q],
            pa2: vec![0.0; 2 * q],
            pb_rev: vec![0.0; q],
        }
    }

    /// Odd rule: `L(u) = sum_v L_a(u - alpha v) L_b(v) / sum_v L_a(-alpha v) L_b(v)`.
    ///
    /// Both inputs are shifted by their maxima and exponentiated once, the
    /// q x q convolution runs in the linear domain and each output takes one
    /// log. Components whose sum fell into the underflow range are redone
    /// with an exact log-sum-exp. Inputs close to uniform go through
    /// [`Kernel::odd_near_uniform`] instead.
    pub(crate) fn odd(&mut self, f: &FieldSpec, a: &[f64], b: &[f64], out: &mut [f64]) {
        let q = f.q();
        self.ea[0] = 0.0;
        self.ea[1..].copy_from_slice(a);
        self.eb[0] = 0.0;
        self.eb[1..].copy_from_slice(b);
        let small = |v: &[f64]| v.iter().all(|l| l.abs() < NEAR_UNIFORM);
        if small(a) && small(b) {
            self.odd_near_uniform(f, out);
            return;
        }
        let ma = self.ea.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mb = self.eb.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for k in 0..q {
            self.pa[k] = (self.ea[k] - ma).exp();
            self.pb[k] = (self.eb[k] - mb).exp();
        }
        self.convolve(f);
        let s0 = self.sums[0];
        let mut lse0 = None;
        for u in 1..q {
            let su = self.sums[u];
            out[u - 1] = if su > LINEAR_FLOOR && s0 > LINEAR_FLOOR {
                clamp_llr((su / s0).ln())
            } else {
                let l0 = *lse0.get_or_insert_with(|| self.exact_log_sum(f, 0));
                clamp_llr(self.exact_log_sum(f, u) - l0)
            };
        }
    }

    /// Odd rule on deviations from the uniform vector. With
    /// `d(s) = exp(l(s)) - 1` and `C(u) = sum_v d_a(u - alpha v) d_b(v)`,
    /// `L(u) = 1 + (C(u) - C(0)) / (q + sum d_a + sum d_b + C(0))`, which keeps
    /// full relative precision when the output LLRs are far below 1e-16.
    fn odd_near_uniform(&mut self, f: &FieldSpec, out: &mut [f64]) {
        let q = f.q();
        for k in 0..q {
            self.pa[k] = self.ea[k].exp_m1();
            self.pb[k] = self.eb[k].exp_m1();
        }
        let base = q as f64 + self.pa.iter().sum::<f64>() + self.pb.iter().sum::<f64>();
        self.convolve(f);
        let c0 = self.sums[0];
        for u in 1..q {
            out[u - 1] = ((self.sums[u] - c0) / (base + c0)).ln_1p();
        }
    }

    /// `sums[u] = sum_v pa[u - alpha v] pb[v]`.
    fn convolve(&mut self, f: &FieldSpec) {
        let q = f.q();
        if f.m() == 1 {
            // alpha = 1: sums[u] = sum_v pa[(u - v) mod q] pb[v]
            //                    = sum_k pb[q - 1 - k] pa[(u + 1 + k) mod q]
            self.pa2[..q].copy_from_slice(&self.pa);
            self.pa2[q..].copy_from_slice(&self.pa);
            for (r, &v) in self.pb_rev.iter_mut().zip(self.pb.iter().rev()) {
                *r = v;
            }
            for u in 0..q {
                self.sums[u] = dot(&self.pb_rev, &self.pa2[u + 1..u + 1 + q]);
            }
        } else {
            for u in 0..q {
                let row = f.sub_alpha_row(u as Symbol);
                let mut s = 0.0;
                for (&w, &pb) in row.iter().zip(&self.pb) {
                    s += self.pa[w as usize] * pb;
                }
                self.sums[u] = s;
            }
        }
    }

    fn exact_log_sum(&self, f: &FieldSpec, u: usize) -> f64 {
        let row = f.sub_alpha_row(u as Symbol);
        let terms = row.iter().zip(&self.eb).map(|(&w, &lb)| self.ea[w as usize] + lb);
        let max = terms.clone().fold(f64::NEG_INFINITY, f64::max);
        // terms 50 nats below the maximum do not change the sum in f64
        let sum: f64 = terms.filter(|&t| t - max > -50.0).map(|t| (t - max).exp()).sum();
        max + sum.ln()
    }

    /// Even rule: `l(u) = l_a(u_prev - alpha u) - l_a(u_prev) + l_b(u)`.
    #[inline]
    pub(crate) fn even(f: &FieldSpec, a: &[f64], b: &[f64], u_prev: Symbol, out: &mut [f64]) {
        let la = |s: Symbol| if s == 0 { 0.0 } else { a[s as usize - 1] };
        let base = la(u_prev);
        let row = f.sub_alpha_row(u_prev);
        for (k, o) in out.iter_mut().enumerate() {
            *o = clamp_llr(la(row[k + 1]) - base + b[k]);
        }
    }
}

/// Odd-index combining rule on standalone vectors.
pub fn lr_combine_odd(f: &FieldSpec, left: &LlrVector, right: &LlrVector) -> LlrVector {
    let mut out = vec![0.0; f.q() - 1];
    Kernel::new(f.q()).odd(f, &left.0, &right.0, &mut out);
    LlrVector(out)
}

/// Even-index combining rule, given the decided odd symbol.
pub fn lr_combine_even(f: &FieldSpec, left: &LlrVector, right: &LlrVector, u_prev: Symbol) -> LlrVector {
    let mut out = vec![0.0; f.q() - 1];
    Kernel::even(f, &left.0, &right.0, u_prev, &mut out);
    LlrVector(out)
}

/// Where the decoder takes the values of frozen indices from.
#[derive(Debug, Clone)]
pub enum FrozenValues<'a> {
    /// Values for the frozen indices in ascending index order.
    Explicit(&'a [Symbol]),
    /// Values drawn in ascending index order from a synchronized stream.
    Stream(FrozenStream),
    /// The true `u` is known; frozen index `i` takes `u[i]`.
    Genie(&'a [Symbol]),
}

/// Frozen index set plus the source of its values. Every other index is
/// decided by [`detect`].
#[derive(Debug, Clone)]
pub struct FrozenPolicy<'a> {
    frozen: Vec<bool>,
    values: FrozenValues<'a>,
}

impl<'a> FrozenPolicy<'a> {
    fn mask(len: usize, frozen_set: &[usize]) -> Result<Vec<bool>> {
        let mut mask = vec![false; len];
        for &i in frozen_set {
            if i >= len {
                return Err(Error::FrozenSetInvalid(format!("index {i} out of range for N={len}")));
            }
            if mask[i] {
                return Err(Error::FrozenSetInvalid(format!("index {i} listed twice")));
            }
            mask[i] = true;
        }
        Ok(mask)
    }

    /// No frozen index; everything is detected.
    pub fn none(len: usize) -> Self {
        FrozenPolicy { frozen: vec![false; len], values: FrozenValues::Explicit(&[]) }
    }

    pub fn explicit(len: usize, frozen_set: &[usize], values: &'a [Symbol]) -> Result<Self> {
        if values.len() != frozen_set.len() {
            return Err(Error::FrozenSetInvalid(format!(
                "{} frozen indices but {} values",
                frozen_set.len(),
                values.len()
            )));
        }
        Ok(FrozenPolicy { frozen: Self::mask(len, frozen_set)?, values: FrozenValues::Explicit(values) })
    }

    pub fn stream(len: usize, frozen_set: &[usize], stream: FrozenStream) -> Result<Self> {
        Ok(FrozenPolicy { frozen: Self::mask(len, frozen_set)?, values: FrozenValues::Stream(stream) })
    }

    /// Genie-aided decoding: every index is frozen to the true `u`.
    pub fn genie(u: &'a [Symbol]) -> Self {
        FrozenPolicy { frozen: vec![true; u.len()], values: FrozenValues::Genie(u) }
    }

    /// The true `u` supplies the values of `frozen_set` only.
    pub fn genie_on(frozen_set: &[usize], u: &'a [Symbol]) -> Result<Self> {
        Ok(FrozenPolicy { frozen: Self::mask(u.len(), frozen_set)?, values: FrozenValues::Genie(u) })
    }

    pub fn len(&self) -> usize {
        self.frozen.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frozen.is_empty()
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen[i]
    }
}

/// Output of one SC decoding run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decoded {
    /// Decided `u`, frozen indices included.
    pub u: Vec<Symbol>,
    /// `u G_N^{-1}` as read off the channel side of the lattice.
    pub x: Vec<Symbol>,
}

/// A successive-cancellation decoder with its lattice workspace. One
/// instance serves one codeword at a time and is reused across codewords.
#[derive(Debug, Clone)]
pub struct ScDecoder {
    field: FieldSpec,
    levels: usize,
    len: usize,
    width: usize,
    llr: Vec<f64>,
    sym: Vec<Symbol>,
    kernel: Kernel,
}

impl ScDecoder {
    pub fn new(field: &FieldSpec, len: usize) -> Result<Self> {
        let levels = log2_len(len)?;
        let width = field.q() - 1;
        Ok(ScDecoder {
            field: field.clone(),
            levels,
            len,
            width,
            llr: vec![0.0; (levels + 1) * len * width],
            sym: vec![0; (levels + 1) * len],
            kernel: Kernel::new(field.q()),
        })
    }

    pub fn field(&self) -> &FieldSpec {
        &self.field
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Real-valued cells held by the lattice: `(q - 1) N (log2 N + 1)`.
    pub fn workspace_cells(&self) -> usize {
        self.llr.len()
    }

    /// LR vector stored at `(level, slot)` by the last decoding run.
    pub fn llr_at(&self, level: usize, slot: usize) -> &[f64] {
        let start = (level * self.len + slot) * self.width;
        &self.llr[start..start + self.width]
    }

    /// Symbol stored at `(level, slot)` by the last decoding run.
    pub fn symbol_at(&self, level: usize, slot: usize) -> Symbol {
        self.sym[level * self.len + slot]
    }

    pub fn decode(&mut self, init: &[f64], frozen: &mut FrozenPolicy<'_>) -> Result<Decoded> {
        self.decode_with(init, frozen, |_, _| {})
    }

    /// Decodes one codeword. `init` holds N channel-side LR vectors, flat, in
    /// channel order. `observe(i, L_N^(i))` is called for every index before
    /// its decision.
    pub fn decode_with(
        &mut self,
        init: &[f64],
        frozen: &mut FrozenPolicy<'_>,
        mut observe: impl FnMut(usize, &[f64]),
    ) -> Result<Decoded> {
        let (len, width) = (self.len, self.width);
        if init.len() != len * width {
            return Err(Error::ShapeMismatch(format!(
                "expected {} LR vectors of width {width}, got {} values",
                len,
                init.len()
            )));
        }
        if frozen.len() != len {
            return Err(Error::FrozenSetInvalid(format!(
                "policy covers {} indices, code has {len}",
                frozen.len()
            )));
        }
        let q = self.field.q();
        let top = self.levels * len * width;
        self.llr[top..].copy_from_slice(init);

        let mut u = vec![0; len];
        let mut explicit_pos = 0;
        for i in 0..len {
            self.compute(0, i);
            observe(i, self.llr_at(0, i));
            let v = if frozen.frozen[i] {
                match &mut frozen.values {
                    FrozenValues::Explicit(vals) => {
                        let v = *vals.get(explicit_pos).ok_or_else(|| {
                            Error::FrozenSetInvalid("explicit frozen values exhausted".into())
                        })?;
                        explicit_pos += 1;
                        v
                    }
                    FrozenValues::Stream(s) => s.next_symbol(),
                    FrozenValues::Genie(truth) => *truth.get(i).ok_or_else(|| {
                        Error::FrozenSetInvalid("genie vector shorter than the code".into())
                    })?,
                }
            } else {
                detect(self.llr_at(0, i))
            };
            if v as usize >= q {
                return Err(Error::FrozenSetInvalid(format!("frozen value {v} is not in F_{q}")));
            }
            u[i] = v;
            self.set_symbol(0, i, v);
        }
        let x = self.sym[self.levels * len..].to_vec();
        Ok(Decoded { u, x })
    }

    fn compute(&mut self, level: usize, slot: usize) {
        if level == self.levels {
            return;
        }
        let block = self.len >> level;
        let j = slot % block;
        let base = slot - j;
        let left = base + j / 2;
        let right = base + block / 2 + j / 2;
        if j.is_multiple_of(2) {
            self.compute(level + 1, left);
            self.compute(level + 1, right);
        }
        let w = self.width;
        let (lo, hi) = self.llr.split_at_mut((level + 1) * self.len * w);
        let out = &mut lo[(level * self.len + slot) * w..][..w];
        let a = &hi[left * w..][..w];
        let b = &hi[right * w..][..w];
        if j.is_multiple_of(2) {
            self.kernel.odd(&self.field, a, b, out);
        } else {
            let u_prev = self.sym[level * self.len + slot - 1];
            Kernel::even(&self.field, a, b, u_prev, out);
        }
    }

    fn set_symbol(&mut self, level: usize, slot: usize, v: Symbol) {
        self.sym[level * self.len + slot] = v;
        if level == self.levels {
            return;
        }
        let block = self.len >> level;
        let j = slot % block;
        if j % 2 == 1 {
            let base = slot - j;
            let odd = self.sym[level * self.len + slot - 1];
            let s = self.field.sub_alpha(odd, v);
            self.set_symbol(level + 1, base + j / 2, s);
            self.set_symbol(level + 1, base + block / 2 + j / 2, v);
        }
    }
}
