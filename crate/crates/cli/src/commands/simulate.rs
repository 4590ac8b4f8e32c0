use std::time::Instant;

use qpolar::channel::frame_to_hex;
use qpolar::construction::trial_rng;
use qpolar::modem::{init_llr, init_llr_real, transmit, transmit_real};
use qpolar::source::SourceDecoder;
use qpolar::{channel_decode, channel_encode, compress, FrozenStream, PolarCode, ScDecoder, Symbol};
use rand::Rng;

use super::{bad, base_table, chunked, load_code, sci, seed, workers};
use crate::config::Config;
use crate::models::{load_source, AwgnSetup, ChannelMode};
use crate::table::{Table, WALL_TIME};
use crate::{CliError, Result};

pub const SOURCE_KEYS: &[&str] = &["code", "source", "blocks", "seed", "workers", "label", "out_results"];

pub const CHANNEL_KEYS: &[&str] = &[
    "code",
    "code_q",
    "constellation",
    "mode",
    "normalize",
    "snr_db",
    "frames",
    "seed",
    "frozen_seed",
    "workers",
    "label",
    "out_results",
    "out_frames",
];

const CHUNK: u64 = 16;

#[derive(Debug, Clone, Copy, Default)]
struct Counts {
    symbols: u64,
    symbol_errors: u64,
    blocks: u64,
    block_errors: u64,
}

impl Counts {
    fn add(&mut self, sent: &[Symbol], got: &[Symbol]) {
        let errors = sent.iter().zip(got).filter(|(a, b)| a != b).count() as u64;
        self.symbols += sent.len() as u64;
        self.symbol_errors += errors;
        self.blocks += 1;
        self.block_errors += (errors > 0) as u64;
    }

    fn merge(mut self, o: Counts) -> Counts {
        self.symbols += o.symbols;
        self.symbol_errors += o.symbol_errors;
        self.blocks += o.blocks;
        self.block_errors += o.block_errors;
        self
    }

    fn ratios(&self) -> (f64, f64) {
        let r = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        (r(self.symbol_errors, self.symbols), r(self.block_errors, self.blocks))
    }
}

fn add_label(t: &mut Table, cfg: &Config) {
    if let Some(l) = cfg.get("label") {
        t.add_meta("label", l);
    }
}

/// Compresses and decompresses `blocks` source blocks; block `b` is drawn
/// from its own random stream, so results do not depend on `workers`.
pub fn simulate_source(cfg: &Config) -> Result<Table> {
    cfg.check_keys(SOURCE_KEYS)?;
    let code = load_code(cfg, "code")?;
    let (model, label) = load_source(cfg)?;
    if model.q() != code.field().q() {
        return Err(bad(format!("code is over F_{}, source over F_{}", code.field().q(), model.q())));
    }
    let blocks: u64 = cfg.parse_req("blocks")?;
    if blocks == 0 {
        return Err(bad("blocks must be at least 1"));
    }
    let seed = seed(cfg)?;
    let len = code.len();
    let start = Instant::now();
    let parts = chunked(
        workers(cfg)?,
        blocks,
        CHUNK,
        || SourceDecoder::new(&code, &model).expect("alphabets checked above"),
        |dec, range| {
            let mut counts = Counts::default();
            let (mut x, mut y) = (vec![0; len], vec![0; len]);
            for b in range {
                model.sample(&mut trial_rng(seed, b), &mut x, &mut y);
                let block = compress(&code, &x)?;
                counts.add(&x, &dec.decompress(&block, &y)?);
            }
            Ok(counts)
        },
    )?;
    let counts = parts.into_iter().fold(Counts::default(), Counts::merge);
    let (ser, wer) = counts.ratios();

    let header =
        ["model", "blocks", "symbols", "symbol_errors", "ser", "block_errors", "wer", "rate_source", WALL_TIME];
    let mut t = base_table(&header, "simulate-source", "simulate-source", cfg);
    t.add_meta("code_id", code.id());
    t.add_meta("code_model", code.model());
    t.add_meta("q", code.field().q());
    t.add_meta("n", len);
    t.add_meta("seed", seed);
    t.add_meta("rate_source", code.source_rate());
    t.add_meta("bound_pe", sci(code.bound_pe()));
    t.add_meta("h_x_given_y_bits", model.conditional_entropy_bits());
    add_label(&mut t, cfg);
    t.push(vec![
        label,
        counts.blocks.to_string(),
        counts.symbols.to_string(),
        counts.symbol_errors.to_string(),
        sci(ser),
        counts.block_errors.to_string(),
        sci(wer),
        code.source_rate().to_string(),
        format!("{:.3}", start.elapsed().as_secs_f64()),
    ]);
    Ok(t)
}

pub fn run_simulate_source(cfg: &Config) -> Result<String> {
    let out = cfg.require_path("out_results")?;
    let t = simulate_source(cfg)?;
    t.write(&out)?;
    let row = &t.rows[0];
    Ok(format!("ser {} over {} symbols ({} block errors)\nwrote {}", row[4], row[2], row[5], out.display()))
}

struct ChannelRun<'a> {
    setup: AwgnSetup,
    codes: Vec<&'a PolarCode>,
    frozen_seed: u64,
}

/// One frame; returns counts and, when asked, a hex dump line per code.
fn channel_frame(
    run: &ChannelRun<'_>,
    decs: &mut [ScDecoder],
    rng: &mut impl Rng,
    frame: u64,
    dump: bool,
) -> Result<(Counts, Vec<String>)> {
    let c = &run.setup.per_code;
    let q = c.q();
    let mut counts = Counts::default();
    let mut lines = Vec::new();
    let streams = run.codes.len() as u64;
    for (axis, (code, dec)) in run.codes.iter().zip(decs.iter_mut()).enumerate() {
        let k = code.info_set().len();
        let frozen = code.frozen_set().len();
        let stream = || FrozenStream::for_frame(run.frozen_seed, code.field(), frame * streams + axis as u64, frozen);
        let message: Vec<Symbol> = (0..k).map(|_| rng.random_range(0..q as Symbol)).collect();
        let x = channel_encode(code, &message, &mut stream())?;
        let mut init = vec![0.0; code.len() * (q - 1)];
        match run.setup.mode {
            ChannelMode::Joint => {
                let y = transmit(c, &x, &run.setup.noise, rng);
                for (chunk, &yj) in init.chunks_exact_mut(q - 1).zip(&y) {
                    init_llr(c, yj, &run.setup.noise, chunk);
                }
            }
            ChannelMode::PamPair => {
                let y = transmit_real(c, &x, &run.setup.noise, rng);
                for (chunk, &yj) in init.chunks_exact_mut(q - 1).zip(&y) {
                    init_llr_real(c, yj, &run.setup.noise, chunk);
                }
            }
        }
        let got = channel_decode(code, dec, &init, stream())?;
        counts.add(&message, &got);
        if dump {
            let f = code.field();
            let axis_name = match (run.setup.mode, axis) {
                (ChannelMode::Joint, _) => "all",
                (_, 0) => "i",
                _ => "q",
            };
            lines.push(format!(
                "snr_db={} frame={frame} axis={axis_name} msg={} cw={} dec={}",
                run.setup.snr_db,
                frame_to_hex(f, &message),
                frame_to_hex(f, &x),
                frame_to_hex(f, &got)
            ));
        }
    }
    // a frame is one channel block, whatever the number of codes in it
    counts.block_errors = (counts.block_errors > 0) as u64;
    counts.blocks = 1;
    Ok((counts, lines))
}

/// Channel-coding sweep over `snr_db`; frame `f` of sweep point `p` uses the
/// random stream `p * frames + f`, so results do not depend on `workers`.
pub fn simulate_channel(cfg: &Config) -> Result<(Table, Vec<String>)> {
    cfg.check_keys(CHANNEL_KEYS)?;
    let code = load_code(cfg, "code")?;
    let code_q = if cfg.contains("code_q") { Some(load_code(cfg, "code_q")?) } else { None };
    let snrs = cfg.list_f64("snr_db")?.ok_or_else(|| bad("missing required key \"snr_db\""))?;
    let frames: u64 = cfg.parse_req("frames")?;
    if frames == 0 {
        return Err(bad("frames must be at least 1"));
    }
    let seed = seed(cfg)?;
    let frozen_seed: u64 = cfg.parse_or("frozen_seed", seed)?;
    let workers = workers(cfg)?;
    let dump = cfg.contains("out_frames");

    let header = ["snr_db", "frames", "symbols", "symbol_errors", "ser", "block_errors", "wer", "rate_bits", WALL_TIME];
    let mut t = base_table(&header, "simulate-channel", "simulate-channel", cfg);
    let mut dump_lines = Vec::new();
    for (p, &snr) in snrs.iter().enumerate() {
        let setup = AwgnSetup::from_config(cfg, snr)?;
        let codes: Vec<&PolarCode> = match setup.mode {
            ChannelMode::Joint => {
                if code_q.is_some() {
                    return Err(bad("code_q only applies to mode = pam-pair"));
                }
                vec![&code]
            }
            ChannelMode::PamPair => vec![&code, code_q.as_ref().unwrap_or(&code)],
        };
        for c in &codes {
            if c.field().q() != setup.per_code.q() {
                return Err(bad(format!(
                    "code {} is over F_{}, the constellation needs F_{}",
                    c.id(),
                    c.field().q(),
                    setup.per_code.q()
                )));
            }
            if c.len() != code.len() {
                return Err(bad("code and code_q differ in length"));
            }
        }
        let rate_bits = match setup.mode {
            ChannelMode::Joint => setup.rate_bits(code.channel_rate()),
            ChannelMode::PamPair => {
                let log_q = (setup.per_code.q() as f64).log2();
                codes.iter().map(|c| c.channel_rate() * log_q).sum()
            }
        };
        if p == 0 {
            t.add_meta("code_id", code.id());
            if let Some(cq) = &code_q {
                t.add_meta("code_q_id", cq.id());
            }
            t.add_meta("code_model", code.model());
            t.add_meta("q", code.field().q());
            t.add_meta("n", code.len());
            t.add_meta("rate_channel", code.channel_rate());
            t.add_meta("rate_bits", rate_bits);
            t.add_meta("seed", seed);
            t.add_meta("frozen_seed", frozen_seed);
            t.add_meta("mode", setup.mode.name());
            t.add_meta("es", setup.es);
            add_label(&mut t, cfg);
        }
        let run = ChannelRun { setup, codes, frozen_seed };
        let start = Instant::now();
        let parts = chunked(
            workers,
            frames,
            CHUNK,
            || run.codes.iter().map(|c| ScDecoder::new(c.field(), c.len()).expect("valid code")).collect::<Vec<_>>(),
            |decs, range| {
                let mut counts = Counts::default();
                let mut lines = Vec::new();
                for f in range {
                    let mut rng = trial_rng(seed, p as u64 * frames + f);
                    let (c, l) = channel_frame(&run, decs, &mut rng, f, dump)?;
                    counts = counts.merge(c);
                    lines.extend(l);
                }
                Ok((counts, lines))
            },
        )?;
        let mut counts = Counts::default();
        for (c, l) in parts {
            counts = counts.merge(c);
            dump_lines.extend(l);
        }
        let (ser, wer) = counts.ratios();
        t.push(vec![
            snr.to_string(),
            counts.blocks.to_string(),
            counts.symbols.to_string(),
            counts.symbol_errors.to_string(),
            sci(ser),
            counts.block_errors.to_string(),
            sci(wer),
            rate_bits.to_string(),
            format!("{:.3}", start.elapsed().as_secs_f64()),
        ]);
    }
    Ok((t, dump_lines))
}

pub fn run_simulate_channel(cfg: &Config) -> Result<String> {
    let out = cfg.require_path("out_results")?;
    let (t, lines) = simulate_channel(cfg)?;
    t.write(&out)?;
    let mut msg = String::new();
    for row in &t.rows {
        msg.push_str(&format!("snr {} dB: ser {} wer {} over {} frames\n", row[0], row[4], row[6], row[1]));
    }
    msg.push_str(&format!("wrote {}", out.display()));
    if let Some(path) = cfg.path("out_frames") {
        let mut text = lines.join("\n");
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        msg.push_str(&format!(", {}", path.display()));
    }
    Ok(msg)
}
