//! Channel coding: message and frozen symbols are scattered into `u`, the
//! codeword is `x = u G_N^{-1}`, and the receiver replays the same frozen
//! symbols from a synchronized stream during SC decoding.

use std::fmt;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::construction::PolarCode;
use crate::decoder::{FrozenPolicy, ScDecoder};
use crate::error::{Error, Result};
use crate::gfq::{FieldSpec, Symbol};
use crate::transform::polar_decode_transform_in_place;

/// Counter-based pseudorandom symbol stream.
///
/// Symbol `k` is derived from the `k`-th 64-bit output of ChaCha8 keyed by
/// `seed` (stream 0), mapped onto `[0, q)` by the multiply-high reduction
/// `(w * q) >> 64`. The stream is random access: two instances with equal
/// seed and position produce equal symbols on every platform.
#[derive(Clone)]
pub struct FrozenStream {
    seed: u64,
    q: u64,
    pos: u64,
    rng: ChaCha8Rng,
}

impl fmt::Debug for FrozenStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FrozenStream").field("seed", &self.seed).field("q", &self.q).field("pos", &self.pos).finish()
    }
}

impl FrozenStream {
    pub fn new(seed: u64, field: &FieldSpec) -> Self {
        Self::at(seed, field, 0)
    }

    /// A stream positioned at symbol `pos`.
    pub fn at(seed: u64, field: &FieldSpec, pos: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(2 * pos as u128);
        FrozenStream { seed, q: field.q() as u64, pos, rng }
    }

    /// Stream for frame `frame` of a code with `frozen_per_frame` frozen
    /// indices: frames occupy consecutive, disjoint position ranges.
    pub fn for_frame(seed: u64, field: &FieldSpec, frame: u64, frozen_per_frame: usize) -> Self {
        Self::at(seed, field, frame * frozen_per_frame as u64)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn position(&self) -> u64 {
        self.pos
    }

    pub fn next_symbol(&mut self) -> Symbol {
        let w = self.rng.next_u64();
        self.pos += 1;
        ((w as u128 * self.q as u128) >> 64) as Symbol
    }

    /// Symbol at an arbitrary position, without moving this stream.
    pub fn symbol_at(&self, pos: u64) -> Symbol {
        let mut s = self.clone();
        s.rng.set_word_pos(2 * pos as u128);
        s.next_symbol()
    }
}

/// `x = u G_N^{-1}` with `u[A] = message` and `u[A^c]` drawn from `frozen`,
/// both in ascending index order.
pub fn channel_encode(code: &PolarCode, message: &[Symbol], frozen: &mut FrozenStream) -> Result<Vec<Symbol>> {
    let info = code.info_set();
    if message.len() != info.len() {
        return Err(Error::MessageLengthMismatch { expected: info.len(), got: message.len() });
    }
    let f = code.field();
    if let Some(&s) = message.iter().find(|&&s| !f.contains(s)) {
        return Err(Error::CodeMismatch(format!("message symbol {s} is not in F_{}", f.q())));
    }
    let mut u = vec![0; code.len()];
    for (&i, &s) in info.iter().zip(message) {
        u[i] = s;
    }
    for &i in code.frozen_set() {
        u[i] = frozen.next_symbol();
    }
    polar_decode_transform_in_place(f, &mut u)?;
    Ok(u)
}

/// SC decoding with the frozen values replayed from `frozen`; returns the
/// estimate of the message.
pub fn channel_decode(
    code: &PolarCode,
    decoder: &mut ScDecoder,
    init: &[f64],
    frozen: FrozenStream,
) -> Result<Vec<Symbol>> {
    if decoder.len() != code.len() {
        return Err(Error::BlockLengthMismatch { expected: code.len(), got: decoder.len() });
    }
    let mut policy = FrozenPolicy::stream(code.len(), code.frozen_set(), frozen)?;
    let out = decoder.decode(init, &mut policy)?;
    Ok(code.info_set().iter().map(|&i| out.u[i]).collect())
}

fn hex_width(q: usize) -> usize {
    let mut width = 1;
    while (1usize << (4 * width)) < q {
        width += 1;
    }
    width
}

/// One frame as a line of fixed-width lowercase hex digits per symbol.
pub fn frame_to_hex(field: &FieldSpec, frame: &[Symbol]) -> String {
    let w = hex_width(field.q());
    frame.iter().map(|&s| format!("{s:0w$x}")).collect()
}

pub fn frame_from_hex(field: &FieldSpec, line: &str) -> Result<Vec<Symbol>> {
    let w = hex_width(field.q());
    let line = line.trim();
    if !line.len().is_multiple_of(w) || !line.is_ascii() {
        return Err(Error::ShapeMismatch(format!("hex frame length {} is not a multiple of {w}", line.len())));
    }
    (0..line.len() / w)
        .map(|k| {
            let digits = &line[k * w..(k + 1) * w];
            let s = u16::from_str_radix(digits, 16)
                .map_err(|e| Error::ShapeMismatch(format!("bad hex symbol {digits:?}: {e}")))?;
            if !field.contains(s) {
                return Err(Error::ShapeMismatch(format!("symbol {s} is not in F_{}", field.q())));
            }
            Ok(s)
        })
        .collect()
}
