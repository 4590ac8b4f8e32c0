//! Discrete memoryless channels, stochastic degradation and the check that
//! degrading a channel never lowers any per-index Bhattacharyya parameter.

use crate::construction::{estimate_z_mc, exact_z_all, McConfig};
use crate::error::{Error, Result};
use crate::gfq::FieldSpec;
use crate::source::JointSource;

const ROW_TOL: f64 = 1e-9;

/// A DMC with input alphabet F_q: `rows[x][y] = P(y | x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DmcChannel {
    rows: Vec<Vec<f64>>,
}

fn check_stochastic(rows: &[Vec<f64>], what: &str) -> Result<usize> {
    let width = rows.first().map(Vec::len).unwrap_or(0);
    if rows.is_empty() || width == 0 {
        return Err(Error::ShapeMismatch(format!("{what} is empty")));
    }
    for (r, row) in rows.iter().enumerate() {
        if row.len() != width {
            return Err(Error::ShapeMismatch(format!("{what} row {r} has {} entries, expected {width}", row.len())));
        }
        if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (row.iter().sum::<f64>() - 1.0).abs() > ROW_TOL {
            return Err(Error::ShapeMismatch(format!("{what} row {r} is not a probability vector")));
        }
    }
    Ok(width)
}

impl DmcChannel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        check_stochastic(&rows, "channel")?;
        Ok(DmcChannel { rows })
    }

    /// q-ary symmetric channel: correct with probability `1 - eps`, otherwise
    /// uniform over the other q - 1 outputs.
    pub fn symmetric(q: usize, eps: f64) -> Self {
        let rows = (0..q)
            .map(|x| (0..q).map(|y| if x == y { 1.0 - eps } else { eps / (q - 1) as f64 }).collect())
            .collect();
        DmcChannel { rows }
    }

    pub fn q(&self) -> usize {
        self.rows.len()
    }

    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }

    pub fn prob(&self, x: usize, y: usize) -> f64 {
        self.rows[x][y]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }
}

/// `P1(y1 | x) = sum_{y2} P2(y2 | x) w(y1 | y2)`, with `w[y2][y1]`.
pub fn degrade_channel(better: &DmcChannel, w: &[Vec<f64>]) -> Result<DmcChannel> {
    let out = check_stochastic(w, "degrading matrix")?;
    if w.len() != better.outputs() {
        return Err(Error::ShapeMismatch(format!(
            "degrading matrix has {} rows, channel has {} outputs",
            w.len(),
            better.outputs()
        )));
    }
    let rows = better
        .rows
        .iter()
        .map(|row| (0..out).map(|y1| row.iter().zip(w).map(|(p, wr)| p * wr[y1]).sum()).collect())
        .collect();
    Ok(DmcChannel { rows })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DegradationMode {
    /// Exact enumeration; the ordering must hold with `1e-12` slack.
    Exact,
    /// Monte Carlo; a violation needs a gap beyond 3 combined standard errors.
    MonteCarlo(McConfig),
}

/// Per-index comparison of the better channel against its degraded version.
#[derive(Debug, Clone, PartialEq)]
pub struct DegradationReport {
    pub z_better: Vec<f64>,
    pub z_degraded: Vec<f64>,
    /// Allowed shortfall per index (1e-12 exact, 3 stderr in MC mode).
    pub slack: Vec<f64>,
}

impl DegradationReport {
    pub fn holds_at(&self, i: usize) -> bool {
        self.z_degraded[i] >= self.z_better[i] - self.slack[i]
    }

    pub fn holds(&self) -> bool {
        (0..self.z_better.len()).all(|i| self.holds_at(i))
    }

    /// Largest `|z_degraded - z_better|`.
    pub fn max_gap(&self) -> f64 {
        self.z_better.iter().zip(&self.z_degraded).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// Compares per-index Z of `better` and `degrade_channel(better, w)` under
/// uniform inputs, for a code of length `len`.
pub fn check_degradation_ordering(
    f: &FieldSpec,
    better: &DmcChannel,
    w: &[Vec<f64>],
    len: usize,
    mode: DegradationMode,
) -> Result<DegradationReport> {
    if better.q() != f.q() {
        return Err(Error::ShapeMismatch(format!("channel input is F_{}, field is F_{}", better.q(), f.q())));
    }
    let worse = degrade_channel(better, w)?;
    let (mb, mw) = (JointSource::from_dmc_uniform(better), JointSource::from_dmc_uniform(&worse));
    match mode {
        DegradationMode::Exact => {
            let z_better = exact_z_all(f, &mb, len)?;
            let z_degraded = exact_z_all(f, &mw, len)?;
            Ok(DegradationReport { slack: vec![1e-12; len], z_better, z_degraded })
        }
        DegradationMode::MonteCarlo(cfg) => {
            let zb = estimate_z_mc(f, &mb, len, &cfg)?;
            let zw = estimate_z_mc(f, &mw, len, &cfg)?;
            let slack = zb.stderr.iter().zip(&zw.stderr).map(|(a, b)| 3.0 * a.hypot(*b)).collect();
            Ok(DegradationReport { z_better: zb.z, z_degraded: zw.z, slack })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn identity(n: usize) -> Vec<Vec<f64>> {
        (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect()
    }

    #[test]
    fn identity_degradation_is_a_no_op() {
        let c = DmcChannel::symmetric(3, 0.2);
        assert_eq!(degrade_channel(&c, &identity(3)).unwrap(), c);
    }

    #[test]
    fn rank_one_degradation_is_useless() {
        let c = DmcChannel::symmetric(3, 0.1);
        let w = vec![vec![0.2, 0.5, 0.3]; 3];
        let d = degrade_channel(&c, &w).unwrap();
        for x in 0..3 {
            for y in 0..3 {
                assert!((d.prob(x, y) - w[0][y]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn symmetric_cascade_composes() {
        // Two q-ary symmetric channels compose into one with
        // 1 - e = (1 - a)(1 - b) + a b / (q - 1).
        let (q, a, b) = (3usize, 0.1, 0.05);
        let d = degrade_channel(&DmcChannel::symmetric(q, a), DmcChannel::symmetric(q, b).rows()).unwrap();
        let keep = (1.0 - a) * (1.0 - b) + a * b / (q - 1) as f64;
        let expect = DmcChannel::symmetric(q, 1.0 - keep);
        for x in 0..q {
            assert!((d.rows()[x].iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for y in 0..q {
                assert!((d.prob(x, y) - expect.prob(x, y)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn shape_errors() {
        let c = DmcChannel::symmetric(2, 0.1);
        assert!(matches!(degrade_channel(&c, &identity(3)), Err(Error::ShapeMismatch(_))));
        assert!(degrade_channel(&c, &[vec![0.5, 0.6], vec![1.0, 0.0]]).is_err());
        assert!(DmcChannel::new(vec![vec![0.5, 0.5], vec![0.5]]).is_err());
    }

    #[test]
    fn binary_symmetric_ordering_exact() {
        let f = FieldSpec::new(2).unwrap();
        let bsc = DmcChannel::symmetric(2, 0.1);
        let r = check_degradation_ordering(&f, &bsc, DmcChannel::symmetric(2, 0.05).rows(), 4, DegradationMode::Exact)
            .unwrap();
        assert!(r.holds());
        assert!((0..4).all(|i| r.z_degraded[i] > r.z_better[i]));
        let same = check_degradation_ordering(&f, &bsc, &identity(2), 4, DegradationMode::Exact).unwrap();
        assert!(same.max_gap() < 1e-12);
    }
}
