use std::path::{Path, PathBuf};

use qpolar::construction::{estimate_z_mc, select_info_set, Criterion, McConfig, ZEstimate, ZMode};
use qpolar::{exact_z_all, FieldSpec, JointSource, PolarCode};

use super::{bad, base_table, sci, seed, workers};
use crate::config::Config;
use crate::models::{self, AwgnSetup};
use crate::table::Table;
use crate::Result;

pub const CONSTRUCT_KEYS: &[&str] = &[
    "model",
    "source",
    "constellation",
    "mode",
    "normalize",
    "snr_db",
    "channel",
    "length",
    "trials",
    "seed",
    "criterion",
    "z_mode",
    "method",
    "workers",
    "label",
    "out_code",
    "out_z",
    "out_z_sorted",
];

#[derive(Debug, Clone)]
pub struct ConstructOutput {
    pub code: PolarCode,
    /// One row per index: index, z, stderr, one_minus_z, info.
    pub by_index: Table,
    /// Rows in ascending z: rank, fraction, index, z, stderr, one_minus_z.
    pub sorted: Table,
    pub summary: String,
}

fn exact_model(cfg: &Config) -> Result<JointSource> {
    match cfg.require("model")? {
        "source" => Ok(models::load_source(cfg)?.0),
        "dmc" => Ok(JointSource::from_dmc_uniform(&models::dmc(cfg, "channel")?)),
        other => Err(bad(format!("method = exact needs model = source or dmc, not {other:?}"))),
    }
}

/// Builds the code described by `cfg` without writing anything.
pub fn construct(cfg: &Config) -> Result<ConstructOutput> {
    cfg.check_keys(CONSTRUCT_KEYS)?;
    let len: usize = cfg.parse_req("length")?;
    if !len.is_power_of_two() {
        return Err(bad(format!("length = {len} is not a power of two")));
    }
    let criterion = Criterion::parse(cfg.require("criterion")?).map_err(|e| bad(format!("criterion: {e}")))?;
    let (sampler, label) = models::sampler(cfg)?;
    let field = FieldSpec::new(sampler.q()).map_err(|e| bad(format!("model alphabet: {e}")))?;

    let z: ZEstimate = match cfg.get("method").unwrap_or("mc") {
        "mc" => {
            let trials: u64 = cfg.parse_req("trials")?;
            if trials == 0 {
                return Err(bad("trials must be at least 1"));
            }
            let mode = ZMode::parse(cfg.get("z_mode").unwrap_or("averaged")).map_err(|e| bad(e.to_string()))?;
            let mc = McConfig { trials, seed: seed(cfg)?, mode, workers: workers(cfg)? };
            estimate_z_mc(&field, sampler.as_ref(), len, &mc).map_err(|e| match e {
                qpolar::Error::InvalidModel(m) => bad(m),
                other => other.into(),
            })?
        }
        "exact" => ZEstimate::exact(exact_z_all(&field, &exact_model(cfg)?, len)?),
        other => return Err(bad(format!("method = {other:?}: expected mc or exact"))),
    };
    let code = select_info_set(&field, z, criterion)?.with_model(label);

    let q = field.q();
    let mut meta: Vec<(String, String)> = vec![
        ("code_id".into(), code.id().to_owned()),
        ("model".into(), code.model().to_owned()),
        ("q".into(), q.to_string()),
        ("n".into(), len.to_string()),
        ("trials".into(), code.z().trials.to_string()),
        ("z_mode".into(), code.z().mode.name()),
        ("criterion".into(), criterion.describe()),
        ("info_size".into(), code.info_set().len().to_string()),
        ("rate_channel".into(), code.channel_rate().to_string()),
        ("rate_source".into(), code.source_rate().to_string()),
        ("bound_pe".into(), sci(code.bound_pe())),
    ];
    if cfg.get("model") == Some("awgn") {
        let setup = AwgnSetup::from_config(cfg, cfg.parse_req("snr_db")?)?;
        meta.push(("rate_bits".into(), setup.rate_bits(code.channel_rate()).to_string()));
    }
    if let Some(l) = cfg.get("label") {
        meta.push(("label".into(), l.to_owned()));
    }

    let zs = code.z();
    let mut info = vec![false; len];
    for &i in code.info_set() {
        info[i] = true;
    }
    let mut by_index = base_table(&["index", "z", "stderr", "one_minus_z", "info"], "z-profile", "construct", cfg);
    by_index.extend_meta(meta.clone());
    for i in 0..len {
        by_index.push(vec![
            i.to_string(),
            sci(zs.z[i]),
            sci(zs.stderr[i]),
            sci(zs.deficit[i]),
            (info[i] as u8).to_string(),
        ]);
    }
    let mut order: Vec<usize> = (0..len).collect();
    // ties in z (values that round to 1) are broken by the resolved 1 - z
    order.sort_by(|&a, &b| zs.z[a].total_cmp(&zs.z[b]).then(zs.deficit[b].total_cmp(&zs.deficit[a])).then(a.cmp(&b)));
    let mut sorted = base_table(&["rank", "fraction", "index", "z", "stderr", "one_minus_z"], "z-sorted", "construct", cfg);
    sorted.extend_meta(meta);
    for (r, &i) in order.iter().enumerate() {
        let fraction = (r + 1) as f64 / len as f64;
        sorted.push(vec![
            r.to_string(),
            fraction.to_string(),
            i.to_string(),
            sci(zs.z[i]),
            sci(zs.stderr[i]),
            sci(zs.deficit[i]),
        ]);
    }
    let summary = format!(
        "code {}: q={q} N={len} |A|={} Rc={:.4} Rs={:.4} bound={:.3e} ({})",
        code.id(),
        code.info_set().len(),
        code.channel_rate(),
        code.source_rate(),
        code.bound_pe(),
        criterion.describe(),
    );
    Ok(ConstructOutput { code, by_index, sorted, summary })
}

fn sorted_path(z: &Path) -> PathBuf {
    let stem = z.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    z.with_file_name(format!("{stem}.sorted.csv"))
}

/// Builds the code and writes `out_code`, `out_z` and the z-sorted table.
pub fn run_construct(cfg: &Config) -> Result<String> {
    let out_code = cfg.require_path("out_code")?;
    let out = construct(cfg)?;
    if let Some(dir) = out_code.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| crate::CliError::io(dir, e))?;
    }
    out.code.save(&out_code)?;
    let mut written = vec![out_code.display().to_string()];
    if let Some(z) = cfg.path("out_z") {
        let s = cfg.path("out_z_sorted").unwrap_or_else(|| sorted_path(&z));
        out.by_index.write(&z)?;
        out.sorted.write(&s)?;
        written.push(z.display().to_string());
        written.push(s.display().to_string());
    }
    Ok(format!("{}\nwrote {}", out.summary, written.join(", ")))
}
