use qpolar::construction::{check_degradation_ordering, DegradationMode, DegradationReport, McConfig};
use qpolar::FieldSpec;

use super::{bad, base_table, sci, seed, workers};
use crate::config::Config;
use crate::models::dmc;
use crate::table::Table;
use crate::{CliError, Result};

pub const DEGRADATION_KEYS: &[&str] =
    &["channel", "degrade", "length", "method", "trials", "seed", "workers", "label", "out_results"];

/// Compares per-index Z of `channel` and of `channel` followed by `degrade`.
pub fn check_degradation(cfg: &Config) -> Result<(DegradationReport, Table)> {
    cfg.check_keys(DEGRADATION_KEYS)?;
    let better = dmc(cfg, "channel")?;
    let w = cfg.matrix("degrade")?.ok_or_else(|| bad("missing required key \"degrade\""))?;
    let len: usize = cfg.parse_req("length")?;
    if !len.is_power_of_two() {
        return Err(bad(format!("length = {len} is not a power of two")));
    }
    let field = FieldSpec::new(better.q()).map_err(|e| bad(format!("channel input alphabet: {e}")))?;
    let mode = match cfg.get("method").unwrap_or("exact") {
        "exact" => DegradationMode::Exact,
        "mc" => {
            let trials: u64 = cfg.parse_req("trials")?;
            if trials == 0 {
                return Err(bad("trials must be at least 1"));
            }
            DegradationMode::MonteCarlo(McConfig { workers: workers(cfg)?, ..McConfig::new(trials, seed(cfg)?) })
        }
        other => return Err(bad(format!("method = {other:?}: expected exact or mc"))),
    };
    let report = check_degradation_ordering(&field, &better, &w, len, mode).map_err(|e| match e {
        qpolar::Error::ShapeMismatch(m) | qpolar::Error::InvalidModel(m) => bad(m),
        other => other.into(),
    })?;
    let mut t = base_table(&["index", "z_better", "z_degraded", "slack", "holds"], "degradation", "check-degradation", cfg);
    t.add_meta("q", field.q());
    t.add_meta("n", len);
    t.add_meta("holds", report.holds());
    if let Some(l) = cfg.get("label") {
        t.add_meta("label", l);
    }
    for i in 0..len {
        t.push(vec![
            i.to_string(),
            sci(report.z_better[i]),
            sci(report.z_degraded[i]),
            sci(report.slack[i]),
            (report.holds_at(i) as u8).to_string(),
        ]);
    }
    Ok((report, t))
}

pub fn run_check_degradation(cfg: &Config) -> Result<String> {
    let (report, t) = check_degradation(cfg)?;
    let mut msg = String::new();
    if let Some(out) = cfg.path("out_results") {
        t.write(&out)?;
        msg = format!("\nwrote {}", out.display());
    }
    let bad_idx: Vec<usize> = (0..report.z_better.len()).filter(|&i| !report.holds_at(i)).collect();
    if bad_idx.is_empty() {
        Ok(format!("ordering holds at all {} indices (max |gap| {:.3e}){msg}", report.z_better.len(), report.max_gap()))
    } else {
        Err(CliError::CheckFailed(format!("degraded channel has smaller Z at indices {bad_idx:?}{msg}")))
    }
}
