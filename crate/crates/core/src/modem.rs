//! Constellations over F_q, complex AWGN and the channel-side LR vectors.
//!
//! Symbol `j` is sent as point `j` (identity labeling). Noise is circular
//! complex Gaussian with variance `sigma2` per dimension, so
//! `E|Z|^2 = 2 sigma2` and `SNR = Es / (2 sigma2)`.

use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::construction::{trial_rng, JointSampler};
use crate::decoder::clamp_llr;
use crate::error::{parse_err, Error, Result};
use crate::gfq::{prime_power, Symbol, MAX_FIELD_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstellationKind {
    PamPrime,
    PamPow2,
    RectQam,
    Circular,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
}

fn is_prime(n: usize) -> bool {
    matches!(prime_power(n), Some((p, 1)) if p == n)
}

fn pam_axis(q: usize) -> Result<(ConstellationKind, Vec<f64>)> {
    if q >= 2 && is_prime(q) && q != 2 {
        let half = (q / 2) as f64;
        return Ok((ConstellationKind::PamPrime, (0..q).map(|i| i as f64 - half).collect()));
    }
    if q >= 2 && q.is_power_of_two() {
        return Ok((ConstellationKind::PamPow2, (1..=q).map(|i| (2 * i) as f64 - (q + 1) as f64).collect()));
    }
    Err(Error::UnsupportedSize(q))
}

/// Real PAM: `{i - floor(q/2)}` for odd prime q, `{2i - (q + 1) : i = 1..q}`
/// for q a power of two (q = 2 gives `{-1, 1}`).
pub fn make_pam(q: usize) -> Result<Constellation> {
    let (kind, axis) = pam_axis(q)?;
    Ok(Constellation { kind, points: axis.into_iter().map(|r| Complex64::new(r, 0.0)).collect() })
}

/// Product of two PAM axes; symbol `j` maps to
/// `pam[j mod q_axis] + i pam[j div q_axis]`.
pub fn make_rect_qam(q_axis: usize) -> Result<Constellation> {
    let (_, axis) = pam_axis(q_axis)?;
    let q = q_axis * q_axis;
    if prime_power(q).is_none() || q > MAX_FIELD_ORDER {
        return Err(Error::UnsupportedSize(q));
    }
    let points = (0..q).map(|j| Complex64::new(axis[j % q_axis], axis[j / q_axis])).collect();
    Ok(Constellation { kind: ConstellationKind::RectQam, points })
}

/// Reads a circle-packing file: one `x y` center per line, `#` comments and
/// an optional `radius r` header. Points are normalized to unit energy.
pub fn parse_circular(text: &str) -> Result<(Constellation, Option<f64>)> {
    let mut radius = None;
    let mut points = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |s: &str| s.parse::<f64>().map_err(|e| parse_err(k + 1, format!("{s:?}: {e}")));
        match fields.as_slice() {
            ["radius", r] => radius = Some(num(r)?),
            [x, y] => points.push(Complex64::new(num(x)?, num(y)?)),
            _ => return Err(Error::BadPackingFile(format!("line {}: expected \"x y\"", k + 1))),
        }
    }
    let q = points.len();
    if q < 2 {
        return Err(Error::BadPackingFile(format!("{q} point(s); at least 2 are needed")));
    }
    if q > MAX_FIELD_ORDER || prime_power(q).is_none() {
        return Err(Error::CountNotFieldOrder(q));
    }
    for a in 0..q {
        for b in a + 1..q {
            if (points[a] - points[b]).norm() < 1e-12 {
                return Err(Error::BadPackingFile(format!("points {a} and {b} coincide")));
            }
        }
    }
    if points.iter().any(|p| !p.re.is_finite() || !p.im.is_finite()) {
        return Err(Error::BadPackingFile("non-finite coordinate".into()));
    }
    Ok((Constellation { kind: ConstellationKind::Circular, points }.normalized(), radius))
}

pub fn load_circular(path: impl AsRef<Path>) -> Result<Constellation> {
    Ok(parse_circular(&std::fs::read_to_string(path)?)?.0)
}

/// The bundled 67-point circular constellation, unit energy.
pub fn circular67() -> Constellation {
    parse_circular(CIRC67).expect("bundled packing is valid").0
}

/// Raw text of the bundled 67-point packing.
pub const CIRC67: &str = include_str!("../data/circ67.txt");

impl Constellation {
    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn q(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn point(&self, s: Symbol) -> Complex64 {
        self.points[s as usize]
    }

    /// Mean energy over equiprobable symbols.
    pub fn es(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.q() as f64
    }

    pub fn scaled_to(&self, es: f64) -> Self {
        let k = (es / self.es()).sqrt();
        Constellation { kind: self.kind, points: self.points.iter().map(|p| p * k).collect() }
    }

    /// Unit mean energy.
    pub fn normalized(&self) -> Self {
        self.scaled_to(1.0)
    }

    /// Smallest distance between two points.
    pub fn min_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for a in 0..self.q() {
            for b in a + 1..self.q() {
                best = best.min((self.points[a] - self.points[b]).norm());
            }
        }
        best
    }

    /// Index of the nearest point.
    pub fn nearest(&self, y: Complex64) -> Symbol {
        let mut best = (f64::INFINITY, 0);
        for (j, p) in self.points.iter().enumerate() {
            let d = (y - p).norm_sqr();
            if d < best.0 {
                best = (d, j);
            }
        }
        best.1 as Symbol
    }
}

/// Complex AWGN with per-dimension variance `sigma2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    sigma2: f64,
}

impl NoiseModel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidModel(format!("noise variance must be positive, got {sigma2}")));
        }
        Ok(NoiseModel { sigma2 })
    }

    /// `sigma2 = Es / (2 * 10^(snr_db / 10))`.
    pub fn from_snr_db(snr_db: f64, es: f64) -> Result<Self> {
        Self::new(es / (2.0 * 10f64.powf(snr_db / 10.0)))
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    /// `10 log10(Es / (2 sigma2))`.
    pub fn snr_db(&self, es: f64) -> f64 {
        10.0 * (es / (2.0 * self.sigma2)).log10()
    }
}

/// `y_j = t(x_j) + z_j`.
pub fn transmit(c: &Constellation, x: &[Symbol], nm: &NoiseModel, rng: &mut impl Rng) -> Vec<Complex64> {
    let normal = Normal::new(0.0, nm.sigma2.sqrt()).expect("positive variance");
    x.iter().map(|&s| c.point(s) + Complex64::new(normal.sample(rng), normal.sample(rng))).collect()
}

/// [`transmit`] driven by the RNG of (`seed`, stream 0).
pub fn transmit_seeded(c: &Constellation, x: &[Symbol], nm: &NoiseModel, seed: u64) -> Vec<Complex64> {
    transmit(c, x, nm, &mut trial_rng(seed, 0))
}

/// Real-axis transmission for PAM over one dimension of the complex channel.
pub fn transmit_real(c: &Constellation, x: &[Symbol], nm: &NoiseModel, rng: &mut impl Rng) -> Vec<f64> {
    let normal = Normal::new(0.0, nm.sigma2.sqrt()).expect("positive variance");
    x.iter().map(|&s| c.point(s).re + normal.sample(rng)).collect()
}

/// LR vector of one complex observation:
/// `l(x) = [(Re t_x - Re t_0)(Re y - (Re t_x + Re t_0)/2) + (same for Im)] / sigma2`.
pub fn init_llr(c: &Constellation, y: Complex64, nm: &NoiseModel, out: &mut [f64]) {
    let t0 = c.points[0];
    for (o, tx) in out.iter_mut().zip(&c.points[1..]) {
        let re = (tx.re - t0.re) * (y.re - 0.5 * (tx.re + t0.re));
        let im = (tx.im - t0.im) * (y.im - 0.5 * (tx.im + t0.im));
        *o = clamp_llr((re + im) / nm.sigma2);
    }
}

/// Real-signal LR vector: the imaginary term is dropped and `nm` is the
/// variance of the real axis.
pub fn init_llr_real(c: &Constellation, y: f64, nm: &NoiseModel, out: &mut [f64]) {
    let t0 = c.points[0].re;
    for (o, tx) in out.iter_mut().zip(&c.points[1..]) {
        *o = clamp_llr((tx.re - t0) * (y - 0.5 * (tx.re + t0)) / nm.sigma2);
    }
}

/// Uniform symbols through the AWGN channel, for construction.
#[derive(Debug, Clone)]
pub struct AwgnSampler {
    pub constellation: Constellation,
    pub noise: NoiseModel,
    /// Only the real axis is used (one PAM dimension).
    pub real_only: bool,
}

impl JointSampler for AwgnSampler {
    fn q(&self) -> usize {
        self.constellation.q()
    }

    fn sample_block(&self, rng: &mut ChaCha8Rng, x: &mut [Symbol], init: &mut [f64]) -> Result<()> {
        let q = self.q();
        for s in x.iter_mut() {
            *s = rng.random_range(0..q) as Symbol;
        }
        if self.real_only {
            let y = transmit_real(&self.constellation, x, &self.noise, rng);
            for (chunk, &yj) in init.chunks_exact_mut(q - 1).zip(&y) {
                init_llr_real(&self.constellation, yj, &self.noise, chunk);
            }
        } else {
            let y = transmit(&self.constellation, x, &self.noise, rng);
            for (chunk, &yj) in init.chunks_exact_mut(q - 1).zip(&y) {
                init_llr(&self.constellation, yj, &self.noise, chunk);
            }
        }
        Ok(())
    }

    fn describe(&self) -> String {
        format!(
            "awgn {:?} q={} es={:e} sigma2={:e}{}",
            self.constellation.kind(),
            self.q(),
            self.constellation.es(),
            self.noise.sigma2(),
            if self.real_only { " real" } else { "" }
        )
    }
}
