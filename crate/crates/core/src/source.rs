//! Discrete sources with side information and lossless polar compression.
//!
//! The encoder keeps `u_{A^c}` of `u = x G_N`; the decoder rebuilds `u` by SC
//! decoding with those values frozen, using `ln P(u | y_j) / P(0 | y_j)` as
//! channel-side LR vectors, and returns `x = u G_N^{-1}`.

use std::fmt::Write as _;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::construction::{DmcChannel, JointSampler, PolarCode};
use crate::decoder::{clamp_llr, FrozenPolicy, ScDecoder, LOG_PROB_FLOOR};
use crate::error::{parse_err, Error, Result};
use crate::gfq::Symbol;
use crate::transform::polar_encode;

const SUM_TOL: f64 = 1e-9;

/// Joint law of `(X, Y)` over `F_q x [0, ny)`, stored as `P(Y)` and `P(X | Y)`.
#[derive(Debug, Clone)]
pub struct JointSource {
    p_x: Vec<f64>,
    /// `cond[x][y] = P(X = x | Y = y)`
    cond: Vec<Vec<f64>>,
    p_y: Vec<f64>,
    py_given: bool,
    residual: f64,
    joint: Vec<Vec<f64>>,
    llr: Vec<Vec<f64>>,
    y_dist: WeightedIndex<f64>,
    x_dist: Vec<WeightedIndex<f64>>,
}

impl PartialEq for JointSource {
    fn eq(&self, o: &Self) -> bool {
        self.p_x == o.p_x && self.cond == o.cond && self.p_y == o.p_y && self.py_given == o.py_given
    }
}

fn normalize(v: &mut [f64], what: &str) -> Result<()> {
    if v.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidModel(format!("{what} has a negative or non-finite entry")));
    }
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(Error::InvalidModel(format!("{what} sums to {s}, not 1")));
    }
    v.iter_mut().for_each(|p| *p /= s);
    Ok(())
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &mut [f64]) {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut acc = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        acc += s;
        let t = (acc - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter_mut().for_each(|x| *x = (*x - theta).max(0.0));
}

/// `argmin_{p in simplex} || C p - p_x ||^2` by accelerated projected
/// gradient, where `C[x][y] = P(x | y)`.
fn derive_p_y(cond: &[Vec<f64>], p_x: &[f64]) -> Vec<f64> {
    let ny = cond[0].len();
    let lipschitz: f64 = cond.iter().flatten().map(|c| c * c).sum::<f64>().max(1e-12);
    let step = 1.0 / lipschitz;
    let residual = |p: &[f64]| -> Vec<f64> {
        cond.iter().zip(p_x).map(|(row, px)| row.iter().zip(p).map(|(c, v)| c * v).sum::<f64>() - px).collect()
    };
    let mut p = vec![1.0 / ny as f64; ny];
    let mut look = p.clone();
    let mut t = 1.0f64;
    for _ in 0..200_000 {
        let r = residual(&look);
        let mut next: Vec<f64> =
            (0..ny).map(|y| look[y] - step * cond.iter().zip(&r).map(|(row, ri)| row[y] * ri).sum::<f64>()).collect();
        project_simplex(&mut next);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let moved: f64 = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        look = next.iter().zip(&p).map(|(n, o)| n + (t - 1.0) / t_next * (n - o)).collect();
        p = next;
        t = t_next;
        if moved < 1e-17 {
            break;
        }
    }
    p
}

impl JointSource {
    /// From the marginal of X and the conditional table `cond[x][y]`. When
    /// `p_y` is absent it is fitted to `p_x = sum_y P(x|y) P(y)` over the
    /// simplex by least squares.
    pub fn new(p_x: Vec<f64>, cond: Vec<Vec<f64>>, p_y: Option<Vec<f64>>) -> Result<Self> {
        let q = p_x.len();
        if q < 2 || cond.len() != q {
            return Err(Error::InvalidModel(format!("need q >= 2 marginal entries and q conditional rows, got {q} and {}", cond.len())));
        }
        let ny = cond[0].len();
        if ny == 0 || cond.iter().any(|r| r.len() != ny) {
            return Err(Error::InvalidModel("conditional rows differ in length".into()));
        }
        let mut p_x = p_x;
        normalize(&mut p_x, "p_x")?;
        let mut cond = cond;
        for y in 0..ny {
            let mut col: Vec<f64> = cond.iter().map(|r| r[y]).collect();
            normalize(&mut col, &format!("P(. | y = {y})"))?;
            for (x, v) in col.into_iter().enumerate() {
                cond[x][y] = v;
            }
        }
        let py_given = p_y.is_some();
        let p_y = match p_y {
            Some(mut p) => {
                if p.len() != ny {
                    return Err(Error::InvalidModel(format!("p_y has {} entries, expected {ny}", p.len())));
                }
                normalize(&mut p, "p_y")?;
                p
            }
            None => derive_p_y(&cond, &p_x),
        };
        let residual = (0..q)
            .map(|x| ((0..ny).map(|y| cond[x][y] * p_y[y]).sum::<f64>() - p_x[x]).abs())
            .fold(0.0, f64::max);
        Self::finish(p_x, cond, p_y, py_given, residual)
    }

    fn finish(p_x: Vec<f64>, cond: Vec<Vec<f64>>, p_y: Vec<f64>, py_given: bool, residual: f64) -> Result<Self> {
        let (q, ny) = (cond.len(), p_y.len());
        let joint: Vec<Vec<f64>> = (0..q).map(|x| (0..ny).map(|y| cond[x][y] * p_y[y]).collect()).collect();
        let llr = (0..ny)
            .map(|y| {
                let base = cond[0][y].ln().max(LOG_PROB_FLOOR);
                (1..q).map(|x| clamp_llr(cond[x][y].ln().max(LOG_PROB_FLOOR) - base)).collect()
            })
            .collect();
        let y_dist = WeightedIndex::new(&p_y).map_err(|e| Error::InvalidModel(format!("p_y: {e}")))?;
        let x_dist = (0..ny)
            .map(|y| {
                WeightedIndex::new((0..q).map(|x| cond[x][y]))
                    .map_err(|e| Error::InvalidModel(format!("P(. | y = {y}): {e}")))
            })
            .collect::<Result<_>>()?;
        Ok(JointSource { p_x, cond, p_y, py_given, residual, joint, llr, y_dist, x_dist })
    }

    /// From a joint table `joint[x][y]` summing to 1.
    pub fn from_joint(joint: &[Vec<f64>]) -> Result<Self> {
        let q = joint.len();
        let ny = joint.first().map(Vec::len).unwrap_or(0);
        if q < 2 || ny == 0 || joint.iter().any(|r| r.len() != ny) {
            return Err(Error::InvalidModel("joint table must be q x ny with q >= 2".into()));
        }
        let mut flat: Vec<f64> = joint.iter().flatten().copied().collect();
        normalize(&mut flat, "joint table")?;
        let p_x: Vec<f64> = flat.chunks(ny).map(|r| r.iter().sum()).collect();
        let p_y: Vec<f64> = (0..ny).map(|y| (0..q).map(|x| flat[x * ny + y]).sum()).collect();
        let cond = (0..q)
            .map(|x| {
                (0..ny)
                    .map(|y| if p_y[y] > 0.0 { flat[x * ny + y] / p_y[y] } else { 1.0 / q as f64 })
                    .collect()
            })
            .collect();
        Self::finish(p_x, cond, p_y, true, 0.0)
    }

    /// Uniform input through a DMC: `P(x, y) = P(y | x) / q`.
    pub fn from_dmc_uniform(channel: &DmcChannel) -> Self {
        let q = channel.q() as f64;
        let joint: Vec<Vec<f64>> = channel.rows().iter().map(|r| r.iter().map(|p| p / q).collect()).collect();
        Self::from_joint(&joint).expect("channel rows are stochastic")
    }

    /// A random model with strictly positive entries.
    pub fn random(q: usize, ny: usize, rng: &mut impl Rng) -> Self {
        let mut joint: Vec<Vec<f64>> =
            (0..q).map(|_| (0..ny).map(|_| rng.random_range(0.05..1.0)).collect()).collect();
        let total: f64 = joint.iter().flatten().sum();
        joint.iter_mut().flatten().for_each(|v| *v /= total);
        Self::from_joint(&joint).expect("positive table")
    }

    /// The built-in five-symbol source with five-valued side information.
    pub fn tables() -> Self {
        Self::parse(include_str!("../data/source_tables.txt")).expect("built-in source table is valid")
    }

    pub fn q(&self) -> usize {
        self.p_x.len()
    }

    pub fn ny(&self) -> usize {
        self.p_y.len()
    }

    pub fn p_x(&self) -> &[f64] {
        &self.p_x
    }

    pub fn p_y(&self) -> &[f64] {
        &self.p_y
    }

    /// True when `p_y` was given rather than fitted.
    pub fn p_y_given(&self) -> bool {
        self.py_given
    }

    /// Largest `|sum_y P(x|y) P(y) - P_X(x)|`.
    pub fn p_y_residual(&self) -> f64 {
        self.residual
    }

    pub fn cond(&self, x: usize, y: usize) -> f64 {
        self.cond[x][y]
    }

    pub fn joint(&self, x: usize, y: usize) -> f64 {
        self.joint[x][y]
    }

    /// `H(X | Y)` in bits.
    pub fn conditional_entropy_bits(&self) -> f64 {
        let mut h = 0.0;
        for (y, &py) in self.p_y.iter().enumerate() {
            for row in &self.cond {
                let c = row[y];
                if c > 0.0 {
                    h -= py * c * c.log2();
                }
            }
        }
        h
    }

    /// LR vector `ln P(u|y) / P(0|y)` for one observation; log-probabilities
    /// are floored at -500 before the ratio is formed.
    pub fn llr(&self, y: usize) -> &[f64] {
        &self.llr[y]
    }

    /// Channel-side LR vectors for an observation block.
    pub fn init_llr(&self, y: &[usize], out: &mut [f64]) {
        let w = self.q() - 1;
        for (chunk, &yj) in out.chunks_exact_mut(w).zip(y) {
            chunk.copy_from_slice(&self.llr[yj]);
        }
    }

    /// Draws `y ~ P(Y)` then `x ~ P(X | y)` per position.
    pub fn sample(&self, rng: &mut ChaCha8Rng, x: &mut [Symbol], y: &mut [usize]) {
        for (xj, yj) in x.iter_mut().zip(y.iter_mut()) {
            *yj = self.y_dist.sample(rng);
            *xj = self.x_dist[*yj].sample(rng) as Symbol;
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (mut q, mut ny) = (None, None);
        let (mut p_x, mut p_y, mut cond) = (None, None, Vec::new());
        for (k, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lineno = k + 1;
            let mut parts = line.split_whitespace();
            let key = parts.next().unwrap_or_default();
            let vals: Vec<&str> = parts.collect();
            let floats = || -> Result<Vec<f64>> {
                vals.iter().map(|v| v.parse::<f64>().map_err(|e| parse_err(lineno, format!("{v:?}: {e}")))).collect()
            };
            let int = || -> Result<usize> {
                match vals.as_slice() {
                    [v] => v.parse().map_err(|e| parse_err(lineno, format!("{v:?}: {e}"))),
                    _ => Err(parse_err(lineno, format!("{key} takes one integer"))),
                }
            };
            match key {
                "q" => q = Some(int()?),
                "ny" => ny = Some(int()?),
                "px" => p_x = Some(floats()?),
                "py" => p_y = Some(floats()?),
                "cond" => cond.push(floats()?),
                _ => return Err(parse_err(lineno, format!("unknown key {key:?}"))),
            }
        }
        let p_x = p_x.ok_or_else(|| parse_err(0, "missing px line"))?;
        if let Some(q) = q {
            if q != p_x.len() || q != cond.len() {
                return Err(parse_err(0, format!("q = {q} but px has {} entries and {} cond rows", p_x.len(), cond.len())));
            }
        }
        if let Some(ny) = ny {
            if cond.iter().any(|r| r.len() != ny) {
                return Err(parse_err(0, format!("cond rows must have ny = {ny} entries")));
            }
        }
        Self::new(p_x, cond, p_y)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Text form accepted by [`JointSource::parse`]; `py` is written only if
    /// it was given.
    pub fn to_text(&self) -> String {
        let row = |v: &[f64]| v.iter().map(|p| format!("{p:e}")).collect::<Vec<_>>().join(" ");
        let mut s = format!("q {}\nny {}\npx {}\n", self.q(), self.ny(), row(&self.p_x));
        for r in &self.cond {
            let _ = writeln!(s, "cond {}", row(r));
        }
        if self.py_given {
            let _ = writeln!(s, "py {}", row(&self.p_y));
        }
        s
    }
}

impl JointSampler for JointSource {
    fn q(&self) -> usize {
        self.q()
    }

    fn sample_block(&self, rng: &mut ChaCha8Rng, x: &mut [Symbol], init: &mut [f64]) -> Result<()> {
        let w = self.q() - 1;
        for (xj, chunk) in x.iter_mut().zip(init.chunks_exact_mut(w)) {
            let y = self.y_dist.sample(rng);
            *xj = self.x_dist[y].sample(rng) as Symbol;
            if self.joint[*xj as usize][y] <= 0.0 {
                return Err(Error::DegenerateSampler);
            }
            chunk.copy_from_slice(&self.llr[y]);
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!("joint-source q={} ny={}", self.q(), self.ny())
    }
}

/// Output of the source encoder: `u` on the frozen set, ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompressedBlock {
    pub code_id: String,
    pub frozen: Vec<Symbol>,
}

/// Keeps `u_{A^c}` of `u = x G_N`.
pub fn compress(code: &PolarCode, x: &[Symbol]) -> Result<CompressedBlock> {
    if x.len() != code.len() {
        return Err(Error::CodeMismatch(format!("block of {} symbols for a code of length {}", x.len(), code.len())));
    }
    if let Some(&s) = x.iter().find(|&&s| !code.field().contains(s)) {
        return Err(Error::CodeMismatch(format!("symbol {s} is not in F_{}", code.field().q())));
    }
    let u = polar_encode(code.field(), x)?;
    Ok(CompressedBlock { code_id: code.id().to_owned(), frozen: code.frozen_set().iter().map(|&i| u[i]).collect() })
}

/// Reusable source decoder for one (code, model) pair.
#[derive(Debug, Clone)]
pub struct SourceDecoder<'a> {
    code: &'a PolarCode,
    model: &'a JointSource,
    decoder: ScDecoder,
    init: Vec<f64>,
}

impl<'a> SourceDecoder<'a> {
    pub fn new(code: &'a PolarCode, model: &'a JointSource) -> Result<Self> {
        if model.q() != code.field().q() {
            return Err(Error::CodeMismatch(format!("model is over F_{}, code over F_{}", model.q(), code.field().q())));
        }
        let decoder = ScDecoder::new(code.field(), code.len())?;
        Ok(SourceDecoder { code, model, decoder, init: vec![0.0; code.len() * (model.q() - 1)] })
    }

    pub fn decompress(&mut self, block: &CompressedBlock, y: &[usize]) -> Result<Vec<Symbol>> {
        let code = self.code;
        if block.code_id != code.id() {
            return Err(Error::CodeMismatch(format!("block was made by code {}, not {}", block.code_id, code.id())));
        }
        if block.frozen.len() != code.frozen_set().len() {
            return Err(Error::BlockLengthMismatch { expected: code.frozen_set().len(), got: block.frozen.len() });
        }
        if y.len() != code.len() {
            return Err(Error::BlockLengthMismatch { expected: code.len(), got: y.len() });
        }
        if let Some(&v) = y.iter().find(|&&v| v >= self.model.ny()) {
            return Err(Error::ShapeMismatch(format!("side information {v} outside [0, {})", self.model.ny())));
        }
        self.model.init_llr(y, &mut self.init);
        let mut policy = FrozenPolicy::explicit(code.len(), code.frozen_set(), &block.frozen)?;
        Ok(self.decoder.decode(&self.init, &mut policy)?.x)
    }
}

/// SC decompression of one block given its side information.
pub fn decompress(code: &PolarCode, block: &CompressedBlock, y: &[usize], model: &JointSource) -> Result<Vec<Symbol>> {
    SourceDecoder::new(code, model)?.decompress(block, y)
}

/// `(q - 1) * sum_{i in A} z_i`.
pub fn error_bound(code: &PolarCode) -> f64 {
    code.bound_pe()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::trial_rng;
    use crate::gfq::FieldSpec;
    use crate::transform::polar_decode_transform;

    #[test]
    fn tables_model_is_consistent() {
        let m = JointSource::tables();
        assert_eq!((m.q(), m.ny()), (5, 5));
        assert!(!m.p_y_given());
        assert!(m.p_y_residual() < 1e-9, "residual {}", m.p_y_residual());
        assert!((m.p_y().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(m.p_y().iter().all(|&p| p > 0.0));
        // The 3-decimal tables give 1.90019 bits for the fitted P(Y).
        assert!((m.conditional_entropy_bits() - 1.9002).abs() < 1e-3);
    }

    #[test]
    fn simplex_projection() {
        let mut v = vec![0.5, 0.5, 0.5];
        project_simplex(&mut v);
        assert!(v.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        let mut w = vec![2.0, 0.0, -1.0];
        project_simplex(&mut w);
        assert_eq!(w, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn boundary_fit_is_on_the_simplex() {
        // p_x not reachable from the interior: the fit lands on a face.
        let cond = vec![vec![0.9, 0.5], vec![0.1, 0.5]];
        let m = JointSource::new(vec![0.95, 0.05], cond, None).unwrap();
        assert!((m.p_y()[0] - 1.0).abs() < 1e-9 && m.p_y()[1].abs() < 1e-9);
        assert!((m.p_y_residual() - 0.05).abs() < 1e-9);
    }

    #[test]
    fn text_roundtrip_and_errors() {
        let m = JointSource::tables();
        let again = JointSource::parse(&m.to_text()).unwrap();
        assert_eq!(again, m);
        let mut rng = trial_rng(3, 0);
        let r = JointSource::random(3, 4, &mut rng);
        assert_eq!(JointSource::parse(&r.to_text()).unwrap(), r);
        assert!(matches!(JointSource::parse("px 0.5 0.5\ncond 0.5\ncond 0.5 x"), Err(Error::Parse { line: 3, .. })));
        assert!(JointSource::parse("px 0.5 0.6\ncond 1\ncond 0").is_err());
        assert!(JointSource::parse("bogus 1").is_err());
    }

    #[test]
    fn zero_probability_reference_stays_finite() {
        let m = JointSource::from_joint(&[vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        assert_eq!(m.llr(0), &[-LOG_PROB_FLOOR]);
        assert_eq!(m.llr(1), &[LOG_PROB_FLOOR]);
    }

    fn all_frozen_code(f: &FieldSpec, len: usize) -> PolarCode {
        PolarCode::from_info_set(f, len, &[]).unwrap()
    }

    #[test]
    fn compress_extremes() {
        let f = FieldSpec::new(3).unwrap();
        let x = vec![2, 0, 1, 1, 0, 2, 2, 1];
        let code = all_frozen_code(&f, 8);
        let block = compress(&code, &x).unwrap();
        assert_eq!(block.frozen, polar_encode(&f, &x).unwrap());
        let m = JointSource::from_joint(&[vec![0.2, 0.1], vec![0.3, 0.1], vec![0.1, 0.2]]).unwrap();
        // Nothing is detected, so y is irrelevant.
        assert_eq!(decompress(&code, &block, &[1; 8], &m).unwrap(), x);
        assert_eq!(polar_decode_transform(&f, &block.frozen).unwrap(), x);

        let full = PolarCode::from_info_set(&f, 8, &(0..8).collect::<Vec<_>>()).unwrap();
        assert!(compress(&full, &x).unwrap().frozen.is_empty());
        assert!(matches!(compress(&full, &x[..4]), Err(Error::CodeMismatch(_))));
    }

    #[test]
    fn perfect_side_information_is_lossless() {
        let f = FieldSpec::new(5).unwrap();
        let identity: Vec<Vec<f64>> =
            (0..5).map(|x| (0..5).map(|y| if x == y { 0.2 } else { 0.0 }).collect()).collect();
        let m = JointSource::from_joint(&identity).unwrap();
        let code = PolarCode::from_info_set(&f, 16, &(0..16).collect::<Vec<_>>()).unwrap();
        let mut rng = trial_rng(9, 0);
        let (mut x, mut y) = (vec![0; 16], vec![0; 16]);
        for _ in 0..20 {
            m.sample(&mut rng, &mut x, &mut y);
            let block = compress(&code, &x).unwrap();
            assert_eq!(decompress(&code, &block, &y, &m).unwrap(), x);
        }
    }

    #[test]
    fn decompress_validates_inputs() {
        let f = FieldSpec::new(3).unwrap();
        let code = PolarCode::from_info_set(&f, 4, &[3]).unwrap();
        let m = JointSource::from_joint(&[vec![0.2, 0.1], vec![0.3, 0.1], vec![0.1, 0.2]]).unwrap();
        let block = compress(&code, &[0, 1, 2, 0]).unwrap();
        let short = CompressedBlock { frozen: block.frozen[..2].to_vec(), ..block.clone() };
        assert!(matches!(decompress(&code, &short, &[0; 4], &m), Err(Error::BlockLengthMismatch { .. })));
        assert!(matches!(decompress(&code, &block, &[0; 3], &m), Err(Error::BlockLengthMismatch { .. })));
        let foreign = CompressedBlock { code_id: "0".into(), ..block };
        assert!(matches!(decompress(&code, &foreign, &[0; 4], &m), Err(Error::CodeMismatch(_))));
    }

    #[test]
    fn error_bound_arithmetic() {
        let f = FieldSpec::new(5).unwrap();
        let z = crate::construction::ZEstimate::exact(vec![1e-5, 1.5e-5, 0.9, 0.8]);
        let code = crate::construction::select_info_set(&f, z, crate::construction::Criterion::FixedRate(2)).unwrap();
        assert!((error_bound(&code) - 1e-4).abs() < 1e-18);
        let f2 = FieldSpec::new(2).unwrap();
        let z2 = crate::construction::ZEstimate::exact(vec![0.01, 0.7]);
        let c2 = crate::construction::select_info_set(&f2, z2, crate::construction::Criterion::FixedRate(1)).unwrap();
        assert!((error_bound(&c2) - 0.01).abs() < 1e-18);
    }
}
