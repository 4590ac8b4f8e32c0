//! Experiment commands. Each takes a resolved [`Config`], does the work,
//! writes its outputs and returns a one-line summary.

mod construct;
mod degrade;
mod simulate;

pub use construct::{construct, run_construct, ConstructOutput, CONSTRUCT_KEYS};
pub use degrade::{check_degradation, run_check_degradation, DEGRADATION_KEYS};
pub use simulate::{
    run_simulate_channel, run_simulate_source, simulate_channel, simulate_source, CHANNEL_KEYS, SOURCE_KEYS,
};

use std::ops::Range;

use qpolar::PolarCode;
use rayon::prelude::*;

use crate::config::Config;
use crate::table::Table;
use crate::{CliError, Result};

pub(crate) fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

pub(crate) fn workers(cfg: &Config) -> Result<usize> {
    let w: usize = cfg.parse_or("workers", 1)?;
    if w == 0 {
        return Err(bad("workers must be at least 1"));
    }
    Ok(w)
}

pub(crate) fn seed(cfg: &Config) -> Result<u64> {
    cfg.parse_req("seed")
}

pub(crate) fn load_code(cfg: &Config, key: &str) -> Result<PolarCode> {
    let path = cfg.require_path(key)?;
    PolarCode::load(&path).map_err(|e| bad(format!("{key} = {}: {e}", path.display())))
}

/// Runs `body` over consecutive ranges of `0..total` of at most `chunk`
/// items on `workers` threads. Each thread keeps its own state from `init`;
/// results come back in range order, whatever the thread count.
pub(crate) fn chunked<T, S>(
    workers: usize,
    total: u64,
    chunk: u64,
    init: impl Fn() -> S + Sync + Send,
    body: impl Fn(&mut S, Range<u64>) -> Result<T> + Sync + Send,
) -> Result<Vec<T>>
where
    T: Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {workers} workers: {e}")))?;
    let chunks = total.div_ceil(chunk);
    pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map_init(&init, |state, c| body(state, c * chunk..((c + 1) * chunk).min(total)))
            .collect()
    })
}

/// Metadata shared by every table: producing command and resolved config.
pub(crate) fn base_table(header: &[&str], kind: &str, command: &str, cfg: &Config) -> Table {
    let mut t = Table::new(header);
    t.add_meta("kind", kind);
    t.add_meta("tool", concat!("qpolar ", env!("CARGO_PKG_VERSION")));
    t.add_meta("command", command);
    t.extend_meta(cfg.metadata());
    t
}

/// Shortest round-trip scientific notation.
pub(crate) fn sci(v: f64) -> String {
    format!("{v:e}")
}
