//! Turning config keys into models: sources, constellations, AWGN setups and
//! discrete channels.

use qpolar::construction::{DmcChannel, JointSampler};
use qpolar::modem::{circular67, load_circular, make_pam, make_rect_qam, AwgnSampler};
use qpolar::{Constellation, JointSource, NoiseModel};

use crate::config::Config;
use crate::{CliError, Result};

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// `source = tables` selects the built-in five-symbol source; anything else
/// is a path to a source file.
pub fn load_source(cfg: &Config) -> Result<(JointSource, String)> {
    match cfg.require("source")? {
        "tables" => Ok((JointSource::tables(), "source tables".into())),
        name => {
            let path = cfg.require_path("source")?;
            let src = JointSource::load(&path).map_err(|e| bad(format!("source {}: {e}", path.display())))?;
            Ok((src, format!("source file {name}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelMode {
    /// One code over all constellation points.
    Joint,
    /// Rectangular QAM as two independent PAM axes, each with its own code
    /// over F_{q_axis}.
    PamPair,
}

impl ChannelMode {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(ChannelMode::Joint),
            "pam-pair" => Ok(ChannelMode::PamPair),
            _ => Err(bad(format!("mode = {s:?}: expected joint or pam-pair"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ChannelMode::Joint => "joint",
            ChannelMode::PamPair => "pam-pair",
        }
    }
}

/// `pam:q`, `rqam:q_axis`, `circ` (bundled 67 points) or `circ:path`.
pub fn parse_constellation(cfg: &Config, text: &str) -> Result<Constellation> {
    let (kind, arg) = text.split_once(':').unwrap_or((text, ""));
    let size = || arg.parse::<usize>().map_err(|e| bad(format!("constellation {text:?}: {e}")));
    let c = match kind {
        "pam" => make_pam(size()?),
        "rqam" => make_rect_qam(size()?),
        "circ" if arg.is_empty() || arg == "builtin" => Ok(circular67()),
        "circ" => {
            let path = cfg.resolve("constellation", arg);
            load_circular(&path).map_err(|e| qpolar::Error::BadPackingFile(format!("{}: {e}", path.display())))
        }
        _ => return Err(bad(format!("constellation {text:?}: expected pam:q, rqam:q_axis or circ[:path]"))),
    };
    c.map_err(|e| bad(format!("constellation {text:?}: {e}")))
}

/// Everything needed to simulate or construct for an AWGN channel.
#[derive(Debug, Clone)]
pub struct AwgnSetup {
    pub mode: ChannelMode,
    /// Points driven by one code: the full constellation in joint mode, one
    /// PAM axis in pair mode.
    pub per_code: Constellation,
    pub noise: NoiseModel,
    /// Mean energy of the transmitted (complex) symbols.
    pub es: f64,
    pub snr_db: f64,
    pub label: String,
}

impl AwgnSetup {
    pub fn from_config(cfg: &Config, snr_db: f64) -> Result<Self> {
        let text = cfg.require("constellation")?;
        let mode = ChannelMode::parse(cfg.get("mode").unwrap_or("joint"))?;
        let normalize = cfg.flag("normalize", true)?;
        let c = parse_constellation(cfg, text)?;
        let (per_code, es) = match mode {
            ChannelMode::Joint => {
                let c = if normalize { c.normalized() } else { c };
                let es = c.es();
                (c, es)
            }
            ChannelMode::PamPair => {
                let q_axis = text
                    .strip_prefix("rqam:")
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(|| bad("mode = pam-pair needs constellation = rqam:q_axis"))?;
                let axis = make_pam(q_axis).map_err(|e| bad(e.to_string()))?;
                let axis = if normalize { axis.scaled_to(0.5) } else { axis };
                let es = 2.0 * axis.es();
                (axis, es)
            }
        };
        let noise = NoiseModel::from_snr_db(snr_db, es).map_err(|e| bad(format!("snr_db = {snr_db}: {e}")))?;
        let label = format!("awgn {text} mode={} normalize={normalize} snr_db={snr_db} es={es}", mode.name());
        Ok(AwgnSetup { mode, per_code, noise, es, snr_db, label })
    }

    pub fn sampler(&self) -> AwgnSampler {
        AwgnSampler {
            constellation: self.per_code.clone(),
            noise: self.noise,
            real_only: self.mode == ChannelMode::PamPair,
        }
    }

    /// Bits carried per channel use at code rate `rc`.
    pub fn rate_bits(&self, rc: f64) -> f64 {
        let per_axis = rc * (self.per_code.q() as f64).log2();
        match self.mode {
            ChannelMode::Joint => per_axis,
            ChannelMode::PamPair => 2.0 * per_axis,
        }
    }
}

/// A DMC given as `rows` of `P(y | x)`, e.g. `0.9 0.1; 0.1 0.9`.
pub fn dmc(cfg: &Config, key: &str) -> Result<DmcChannel> {
    let rows = cfg.matrix(key)?.ok_or_else(|| bad(format!("missing required key {key:?}")))?;
    DmcChannel::new(rows).map_err(|e| bad(format!("{key}: {e}")))
}

/// The sampler named by `model = source | awgn | dmc`, plus its description.
pub fn sampler(cfg: &Config) -> Result<(Box<dyn JointSampler>, String)> {
    match cfg.require("model")? {
        "source" => {
            let (s, label) = load_source(cfg)?;
            Ok((Box::new(s), label))
        }
        "awgn" => {
            let setup = AwgnSetup::from_config(cfg, cfg.parse_req("snr_db")?)?;
            Ok((Box::new(setup.sampler()), setup.label))
        }
        "dmc" => {
            let ch = dmc(cfg, "channel")?;
            let label = format!("dmc uniform-input channel = {}", cfg.require("channel")?);
            Ok((Box::new(JointSource::from_dmc_uniform(&ch)), label))
        }
        other => Err(bad(format!("model = {other:?}: expected source, awgn or dmc"))),
    }
}
