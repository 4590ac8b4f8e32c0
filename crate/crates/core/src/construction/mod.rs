//! Code construction: per-index Bhattacharyya parameters and the choice of
//! the information set.
//!
//! `Z(U_i | Y, U_0..U_{i-1}) = E[ 1/(q-1) sum_{u != u'} sqrt(P(u|.) P(u'|.)) ]`
//! summed over ordered pairs, so a uniform posterior gives exactly 1. The
//! Monte-Carlo estimator runs genie-aided SC decoding on sampled blocks and
//! reads the posterior of every index off its LR vector.

mod degrade;
mod exact;

use std::sync::OnceLock;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use degrade::{check_degradation_ordering, degrade_channel, DegradationMode, DegradationReport, DmcChannel};
pub use exact::{exact_z, exact_z_all, exact_z_budget, DEFAULT_EXACT_BUDGET};

use crate::decoder::{FrozenPolicy, ScDecoder};
use crate::error::{Error, Result};
use crate::gfq::{FieldSpec, Symbol};
use crate::transform::polar_encode_in_place;

/// A source of iid blocks: true symbols plus the decoder's channel-side LR
/// vectors for the matching observations.
pub trait JointSampler: Sync {
    fn q(&self) -> usize;

    /// Fills `x` (length N) and `init` (N vectors of width q-1, flat).
    fn sample_block(&self, rng: &mut ChaCha8Rng, x: &mut [Symbol], init: &mut [f64]) -> Result<()>;

    /// Short human-readable description recorded in code files.
    fn describe(&self) -> String;
}

/// How the per-index Z values were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZMode {
    /// Full enumeration.
    Exact,
    /// Monte Carlo, posterior-averaged pair affinity (the default).
    Averaged,
    /// Monte Carlo, `Delta / (q L(u_i))` with the trial's true `u_i`.
    TrueSymbol,
    /// Monte Carlo, `1{u_i = beta} Delta / L(beta)` for a fixed `beta`.
    Fixed(Symbol),
    /// Not estimated (hand-picked information set).
    None,
}

impl ZMode {
    pub fn name(&self) -> String {
        match self {
            ZMode::Exact => "exact".into(),
            ZMode::Averaged => "averaged".into(),
            ZMode::TrueSymbol => "true-symbol".into(),
            ZMode::Fixed(b) => format!("fixed:{b}"),
            ZMode::None => "none".into(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" => ZMode::Exact,
            "averaged" => ZMode::Averaged,
            "true-symbol" => ZMode::TrueSymbol,
            "none" => ZMode::None,
            _ => match s.strip_prefix("fixed:").map(str::parse) {
                Some(Ok(b)) => ZMode::Fixed(b),
                _ => return Err(Error::InvalidModel(format!("unknown z mode {s:?}"))),
            },
        })
    }
}

/// Per-index Bhattacharyya estimates.
#[derive(Debug, Clone, PartialEq)]
pub struct ZEstimate {
    pub z: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Mean of `1 - z` per index, resolved where z rounds to 1.
    pub deficit: Vec<f64>,
    pub trials: u64,
    pub mode: ZMode,
    pub seed: Option<u64>,
}

impl ZEstimate {
    pub fn exact(z: Vec<f64>) -> Self {
        let stderr = vec![0.0; z.len()];
        let deficit = z.iter().map(|v| 1.0 - v).collect();
        ZEstimate { z, stderr, deficit, trials: 0, mode: ZMode::Exact, seed: None }
    }

    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// Indices whose estimate exceeds 1 (possible under MC noise).
    pub fn above_one(&self) -> Vec<usize> {
        (0..self.z.len()).filter(|&i| self.z[i] > 1.0).collect()
    }

    /// z values in ascending order.
    pub fn sorted(&self) -> Vec<f64> {
        let mut s = self.z.clone();
        s.sort_by(f64::total_cmp);
        s
    }

    /// `1 - z` values in ascending order (z descending).
    pub fn sorted_deficit(&self) -> Vec<f64> {
        let mut s = self.deficit.clone();
        s.sort_by(f64::total_cmp);
        s
    }
}

/// Sum over ordered pairs `u != u'` of `sqrt(p_u p_u')` for the posterior
/// described by `llr`, divided by `q - 1`.
///
/// With `w_u = exp(l_u - max)`, dominant symbol `k` and `R = sum_{u != k} sqrt(w_u)`,
/// the pair sum is `2 R + R^2 - sum_{u != k} w_u`, which keeps full relative
/// accuracy when the posterior is nearly a point mass.
pub fn pair_affinity(llr: &[f64]) -> f64 {
    let (num, total) = pair_sum_weights(llr);
    num / total / llr.len() as f64
}

/// `1 - pair_affinity(llr)` without cancellation near uniform posteriors.
///
/// With `a_u = exp((l_u - max) / 2)` the deficit is
/// `q sum_u (a_u - mean a)^2 / ((q - 1) sum_u a_u^2)`; the deviations
/// `a_u - 1 = expm1(..)` keep their relative precision for tiny LLRs.
pub fn pair_deficit(llr: &[f64]) -> f64 {
    let q = llr.len() + 1;
    let max = llr.iter().copied().fold(0.0, f64::max);
    let dev = |l: f64| ((l - max) / 2.0).exp_m1();
    let all = || std::iter::once(0.0).chain(llr.iter().copied()).map(dev);
    let mean = all().sum::<f64>() / q as f64;
    let spread: f64 = all().map(|b| (b - mean) * (b - mean)).sum();
    let norm: f64 = all().map(|b| (1.0 + b) * (1.0 + b)).sum();
    (q as f64 * spread / ((q - 1) as f64 * norm)).clamp(0.0, 1.0)
}

fn pair_sum_weights(llr: &[f64]) -> (f64, f64) {
    let max = llr.iter().copied().fold(0.0, f64::max);
    let mut dominant_seen = false;
    let (mut r, mut s2, mut total) = (0.0, 0.0, 0.0);
    for l in std::iter::once(0.0).chain(llr.iter().copied()) {
        let w = (l - max).exp();
        total += w;
        if !dominant_seen && l == max {
            dominant_seen = true;
            continue;
        }
        r += w.sqrt();
        s2 += w;
    }
    (2.0 * r + (r * r - s2).max(0.0), total)
}

/// One Monte-Carlo sample of Z for index `i` given its LR vector and true
/// symbol, with the matching sample of `1 - Z`.
fn z_sample(mode: ZMode, llr: &[f64], truth: Symbol) -> (f64, f64) {
    let q = llr.len() + 1;
    let l = |s: Symbol| if s == 0 { 0.0 } else { llr[s as usize - 1] };
    // Delta / L(beta) = pair affinity / P(beta | .)
    let over = |beta: Symbol| {
        let max = llr.iter().copied().fold(0.0, f64::max);
        let (num, _) = pair_sum_weights(llr);
        num / (q - 1) as f64 * (max - l(beta)).exp()
    };
    let z = match mode {
        ZMode::Averaged | ZMode::Exact | ZMode::None => return (pair_affinity(llr), pair_deficit(llr)),
        ZMode::TrueSymbol => over(truth) / q as f64,
        ZMode::Fixed(beta) if beta == truth => over(beta),
        ZMode::Fixed(_) => 0.0,
    };
    (z, 1.0 - z)
}

/// Monte-Carlo settings. Results depend only on `(trials, seed, mode)`,
/// never on `workers`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub trials: u64,
    pub seed: u64,
    pub mode: ZMode,
    pub workers: usize,
}

impl McConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        McConfig { trials, seed, mode: ZMode::Averaged, workers: 1 }
    }
}

/// Trials are grouped into fixed chunks; chunk sums are combined by a
/// pairwise tree whose shape depends only on the chunk count.
const CHUNK: u64 = 64;

#[derive(Debug, Clone)]
struct Moments {
    sum: Vec<f64>,
    sum_sq: Vec<f64>,
    deficit: Vec<f64>,
}

fn tree_reduce(mut parts: Vec<Moments>) -> Moments {
    if parts.len() == 1 {
        return parts.pop().unwrap();
    }
    let right = parts.split_off(parts.len() / 2);
    let mut a = tree_reduce(parts);
    let b = tree_reduce(right);
    for (x, y) in a.sum.iter_mut().zip(&b.sum) {
        *x += y;
    }
    for (x, y) in a.sum_sq.iter_mut().zip(&b.sum_sq) {
        *x += y;
    }
    for (x, y) in a.deficit.iter_mut().zip(&b.deficit) {
        *x += y;
    }
    a
}

pub(crate) fn worker_pool(workers: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("failed to start worker threads")
}

/// RNG of trial (or frame) `index` under `seed`: ChaCha8 keyed by the seed,
/// one stream per index.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Monte-Carlo estimate of every `Z(U_i | Y, U_0..U_{i-1})` for length `len`.
pub fn estimate_z_mc(f: &FieldSpec, sampler: &dyn JointSampler, len: usize, cfg: &McConfig) -> Result<ZEstimate> {
    if cfg.trials == 0 {
        return Err(Error::InvalidModel("at least one trial is required".into()));
    }
    if sampler.q() != f.q() {
        return Err(Error::ShapeMismatch(format!("sampler is over F_{}, field is F_{}", sampler.q(), f.q())));
    }
    if matches!(cfg.mode, ZMode::Exact | ZMode::None) {
        return Err(Error::InvalidModel(format!("{} is not a Monte-Carlo mode", cfg.mode.name())));
    }
    ScDecoder::new(f, len)?;
    let width = f.q() - 1;
    let chunks = cfg.trials.div_ceil(CHUNK);
    let run_chunk = |dec: &mut ScDecoder, c: u64| -> Result<Moments> {
        let mut m = Moments { sum: vec![0.0; len], sum_sq: vec![0.0; len], deficit: vec![0.0; len] };
        let mut x = vec![0; len];
        let mut init = vec![0.0; len * width];
        for t in c * CHUNK..((c + 1) * CHUNK).min(cfg.trials) {
            let mut rng = trial_rng(cfg.seed, t);
            sampler.sample_block(&mut rng, &mut x, &mut init)?;
            let mut u = x.clone();
            polar_encode_in_place(f, &mut u)?;
            let mut policy = FrozenPolicy::genie(&u);
            dec.decode_with(&init, &mut policy, |i, llr| {
                let (v, d) = z_sample(cfg.mode, llr, u[i]);
                m.sum[i] += v;
                m.sum_sq[i] += v * v;
                m.deficit[i] += d;
            })?;
        }
        Ok(m)
    };
    let parts: Vec<Moments> = worker_pool(cfg.workers).install(|| {
        (0..chunks)
            .into_par_iter()
            .map_init(|| ScDecoder::new(f, len).expect("length checked above"), |dec, c| run_chunk(dec, c))
            .collect::<Result<Vec<_>>>()
    })?;
    let total = tree_reduce(parts);
    let t = cfg.trials as f64;
    let z: Vec<f64> = total.sum.iter().map(|s| s / t).collect();
    let stderr = z
        .iter()
        .zip(&total.sum_sq)
        .map(|(&mean, &sq)| {
            if cfg.trials < 2 {
                f64::INFINITY
            } else {
                ((sq - t * mean * mean).max(0.0) / (t - 1.0) / t).sqrt()
            }
        })
        .collect();
    let deficit = total.deficit.iter().map(|s| s / t).collect();
    Ok(ZEstimate { z, stderr, deficit, trials: cfg.trials, mode: cfg.mode, seed: Some(cfg.seed) })
}

/// Rule turning a Z profile into an information set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    /// Add indices in ascending z while the running sum stays within the bound.
    SumBound(f64),
    /// Every index with z strictly below the threshold.
    PerIndex(f64),
    /// The K indices with the smallest z.
    FixedRate(usize),
    /// Information set given by hand.
    Explicit,
}

impl Criterion {
    pub fn describe(&self) -> String {
        match self {
            Criterion::SumBound(d) => format!("sum-bound {d:e}"),
            Criterion::PerIndex(d) => format!("per-index {d:e}"),
            Criterion::FixedRate(k) => format!("fixed-rate {k}"),
            Criterion::Explicit => "explicit".into(),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let bad = || Error::InvalidModel(format!("bad criterion {s:?}"));
        let mut parts = s.split_whitespace();
        let kind = parts.next().ok_or_else(bad)?;
        let arg = parts.next();
        if parts.next().is_some() {
            return Err(bad());
        }
        let float = |a: Option<&str>| a.and_then(|v| v.parse::<f64>().ok()).filter(|v| *v >= 0.0).ok_or_else(bad);
        Ok(match kind {
            "sum-bound" => Criterion::SumBound(float(arg)?),
            "per-index" => Criterion::PerIndex(float(arg)?),
            "fixed-rate" => Criterion::FixedRate(arg.and_then(|v| v.parse().ok()).ok_or_else(bad)?),
            "explicit" if arg.is_none() => Criterion::Explicit,
            _ => return Err(bad()),
        })
    }
}

/// A constructed polar code.
#[derive(Debug, Clone)]
pub struct PolarCode {
    field: FieldSpec,
    len: usize,
    info: Vec<usize>,
    frozen: Vec<usize>,
    z: ZEstimate,
    criterion: Criterion,
    model: String,
    id: OnceLock<String>,
}

impl PartialEq for PolarCode {
    fn eq(&self, o: &Self) -> bool {
        self.field == o.field
            && self.len == o.len
            && self.info == o.info
            && self.z == o.z
            && self.criterion == o.criterion
            && self.model == o.model
    }
}

impl PolarCode {
    pub(crate) fn assemble(
        field: FieldSpec,
        len: usize,
        mut info: Vec<usize>,
        z: ZEstimate,
        criterion: Criterion,
        model: String,
    ) -> Result<Self> {
        crate::transform::log2_len(len)?;
        if z.len() != len || z.stderr.len() != len {
            return Err(Error::ShapeMismatch(format!("z profile has {} entries, code has {len}", z.len())));
        }
        info.sort_unstable();
        let mut member = vec![false; len];
        for &i in &info {
            if i >= len || member[i] {
                return Err(Error::FrozenSetInvalid(format!("information index {i} repeated or out of range")));
            }
            member[i] = true;
        }
        let frozen = (0..len).filter(|&i| !member[i]).collect();
        Ok(PolarCode { field, len, info, frozen, z, criterion, model, id: OnceLock::new() })
    }

    /// A code with a hand-picked information set and no Z profile.
    pub fn from_info_set(field: &FieldSpec, len: usize, info: &[usize]) -> Result<Self> {
        let mut z = ZEstimate::exact(vec![0.0; len]);
        z.mode = ZMode::None;
        Self::assemble(field.clone(), len, info.to_vec(), z, Criterion::Explicit, String::new())
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

    /// Information set, ascending.
    pub fn info_set(&self) -> &[usize] {
        &self.info
    }

    /// Complement of the information set, ascending.
    pub fn frozen_set(&self) -> &[usize] {
        &self.frozen
    }

    pub fn z(&self) -> &ZEstimate {
        &self.z
    }

    pub fn criterion(&self) -> Criterion {
        self.criterion
    }

    /// Description of the model the code was built for.
    pub fn model(&self) -> &str {
        &self.model
    }

    pub fn with_model(mut self, model: impl Into<String>) -> Self {
        self.model = model.into();
        self.id = OnceLock::new();
        self
    }

    /// `|A| / N`, the channel-coding rate in q-ary symbols.
    pub fn channel_rate(&self) -> f64 {
        self.info.len() as f64 / self.len as f64
    }

    /// `|A^c| / N`, the source-coding rate in q-ary symbols.
    pub fn source_rate(&self) -> f64 {
        self.frozen.len() as f64 / self.len as f64
    }

    /// `(q - 1) * sum_{i in A} z_i`.
    pub fn bound_pe(&self) -> f64 {
        (self.field.q() - 1) as f64 * self.info.iter().map(|&i| self.z.z[i]).sum::<f64>()
    }

    /// Content hash of the serialized code (first 16 hex digits of SHA-256).
    pub fn id(&self) -> &str {
        self.id.get_or_init(|| crate::codefile::code_id(&self.to_text()))
    }
}

/// Applies `criterion` to a Z profile. Ties in z are broken by index.
pub fn select_info_set(field: &FieldSpec, z: ZEstimate, criterion: Criterion) -> Result<PolarCode> {
    let len = z.len();
    let mut order: Vec<usize> = (0..len).collect();
    order.sort_by(|&a, &b| z.z[a].total_cmp(&z.z[b]).then(a.cmp(&b)));
    let info: Vec<usize> = match criterion {
        Criterion::SumBound(bound) => {
            let mut acc = 0.0;
            order
                .iter()
                .copied()
                .take_while(|&i| {
                    acc += z.z[i];
                    acc <= bound
                })
                .collect()
        }
        Criterion::PerIndex(delta) => order.iter().copied().filter(|&i| z.z[i] < delta).collect(),
        Criterion::FixedRate(k) => {
            if k > len {
                return Err(Error::InvalidModel(format!("rate {k} exceeds block length {len}")));
            }
            order[..k].to_vec()
        }
        Criterion::Explicit => {
            return Err(Error::InvalidModel("an explicit information set is built with from_info_set".into()))
        }
    };
    if info.is_empty() {
        return Err(Error::EmptyInformationSet);
    }
    PolarCode::assemble(field.clone(), len, info, z, criterion, String::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn profile(z: &[f64]) -> ZEstimate {
        ZEstimate::exact(z.to_vec())
    }

    #[test]
    fn affinity_extremes() {
        for q in [2usize, 3, 5, 67] {
            assert!((pair_affinity(&vec![0.0; q - 1]) - 1.0).abs() < 1e-12);
            let mut sure = vec![-500.0; q - 1];
            assert!(pair_affinity(&sure) < 1e-100);
            sure[0] = 500.0;
            assert!(pair_affinity(&sure) < 1e-100);
        }
    }

    #[test]
    fn deficit_is_one_minus_affinity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for q in [2usize, 3, 5, 67] {
            for scale in [0.1, 3.0, 40.0] {
                let llr: Vec<f64> = (1..q).map(|_| rng.random_range(-scale..scale)).collect();
                assert!((pair_deficit(&llr) - (1.0 - pair_affinity(&llr))).abs() < 1e-12);
            }
            assert_eq!(pair_deficit(&vec![0.0; q - 1]), 0.0);
            assert!((pair_deficit(&vec![-500.0; q - 1]) - 1.0).abs() < 1e-12);
        }
    }

    /// For LLRs of size eps, `1 - z = sum_u (l_u - mean l)^2 / (4 (q - 1))` to leading order.
    #[test]
    fn deficit_resolves_nearly_uniform_posteriors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for q in [2usize, 5, 67] {
            let shape: Vec<f64> = (1..q).map(|_| rng.random_range(-1.0..1.0)).collect();
            for eps in [1e-9, 1e-40, 1e-100] {
                let llr: Vec<f64> = shape.iter().map(|v| v * eps).collect();
                let all: Vec<f64> = std::iter::once(0.0).chain(llr.iter().copied()).collect();
                let mean = all.iter().sum::<f64>() / q as f64;
                let want = all.iter().map(|l| (l - mean) * (l - mean)).sum::<f64>() / (4.0 * (q - 1) as f64);
                let got = pair_deficit(&llr);
                assert!((got - want).abs() <= 1e-6 * want, "q={q} eps={eps}: {got} vs {want}");
                assert!((pair_affinity(&llr) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn affinity_matches_direct_pair_sum() {
        let llr = [0.3, -2.0, 4.0, 1.5];
        let p = crate::decoder::LlrVector(llr.to_vec()).probabilities();
        let mut direct = 0.0;
        for a in 0..5 {
            for b in 0..5 {
                if a != b {
                    direct += (p[a] * p[b]).sqrt();
                }
            }
        }
        assert!((pair_affinity(&llr) - direct / 4.0).abs() < 1e-14);
    }

    #[test]
    fn estimator_modes_agree_in_expectation() {
        // Average each unbiased form over the posterior itself.
        let llr = [0.7, -1.1, 2.2];
        let p = crate::decoder::LlrVector(llr.to_vec()).probabilities();
        let target = pair_affinity(&llr);
        let avg = |mode: ZMode| (0..4).map(|u| p[u] * z_sample(mode, &llr, u as Symbol).0).sum::<f64>();
        assert!((avg(ZMode::TrueSymbol) - target).abs() < 1e-12);
        for beta in 0..4 {
            assert!((avg(ZMode::Fixed(beta)) - target).abs() < 1e-12);
        }
    }

    #[test]
    fn selection_rules() {
        let f = FieldSpec::new(5).unwrap();
        let all = select_info_set(&f, profile(&[0.0; 8]), Criterion::FixedRate(8)).unwrap();
        assert_eq!(all.info_set(), &[0, 1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(all.bound_pe(), 0.0);

        let z = [0.5, 3e-5, 0.9, 2e-5, 0.2, 0.3, 1.0, 0.8];
        let per = select_info_set(&f, profile(&z), Criterion::PerIndex(1e-4)).unwrap();
        assert_eq!(per.info_set(), &[1, 3]);
        assert!((per.bound_pe() - 4.0 * 5e-5).abs() < 1e-18);
        assert_eq!(per.frozen_set(), &[0, 2, 4, 5, 6, 7]);

        let sum = select_info_set(&f, profile(&z), Criterion::SumBound(0.25)).unwrap();
        assert_eq!(sum.info_set(), &[1, 3, 4]);
        let k = select_info_set(&f, profile(&z), Criterion::FixedRate(2)).unwrap();
        assert_eq!(k.info_set(), &[1, 3]);

        assert!(matches!(
            select_info_set(&f, profile(&[0.5; 4]), Criterion::PerIndex(0.1)),
            Err(Error::EmptyInformationSet)
        ));
        assert!(matches!(
            select_info_set(&f, profile(&[0.5; 4]), Criterion::SumBound(0.1)),
            Err(Error::EmptyInformationSet)
        ));
    }

    #[test]
    fn per_index_rule_is_monotone() {
        let f = FieldSpec::new(3).unwrap();
        let z: Vec<f64> = (0..64).map(|i| ((i * 37) % 64) as f64 / 64.0).collect();
        let mut prev: Vec<usize> = Vec::new();
        for delta in [0.05, 0.1, 0.3, 0.6, 1.01] {
            let code = select_info_set(&f, profile(&z), Criterion::PerIndex(delta)).unwrap();
            assert!(prev.iter().all(|i| code.info_set().contains(i)));
            prev = code.info_set().to_vec();
        }
    }

    #[test]
    fn criterion_text_roundtrip() {
        for c in [Criterion::SumBound(1e-4), Criterion::PerIndex(0.5), Criterion::FixedRate(12), Criterion::Explicit] {
            assert_eq!(Criterion::parse(&c.describe()).unwrap(), c);
        }
        assert!(Criterion::parse("sum-bound").is_err());
        assert!(Criterion::parse("bogus 1").is_err());
        for m in [ZMode::Exact, ZMode::Averaged, ZMode::TrueSymbol, ZMode::Fixed(3), ZMode::None] {
            assert_eq!(ZMode::parse(&m.name()).unwrap(), m);
        }
    }

    #[test]
    fn tree_reduction_shape_is_fixed() {
        let parts: Vec<Moments> =
            (0..7).map(|k| Moments { sum: vec![0.1 * k as f64], sum_sq: vec![1e-17 * k as f64], deficit: vec![0.0] }).collect();
        let a = tree_reduce(parts.clone());
        let b = tree_reduce(parts);
        assert_eq!(a.sum[0].to_bits(), b.sum[0].to_bits());
    }
}
