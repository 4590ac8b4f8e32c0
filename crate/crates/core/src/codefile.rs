//! Line-oriented text format for constructed codes.
//!
//! ```text
//! qpolar-code 1
//! q 25
//! p 5
//! modulus 2 1 1            (only when q is not prime; coefficients low -> high)
//! alpha 5
//! n 8
//! criterion per-index 1e-4
//! z-mode averaged
//! trials 4000
//! seed 7                   (or: seed none)
//! model awgn ...           (free text to end of line, may be empty)
//! info 3 5 6 7             (ascending, possibly empty)
//! z 0 9.1e-1 2e-3 9e-2     (one line per index: index, z, stderr, 1 - z)
//! ...
//! end
//! ```
//!
//! Floats are written in shortest round-trip scientific notation, so
//! reloading a code reproduces every z value bit for bit. The code id is the
//! first 16 hex digits of the SHA-256 of this text.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::construction::{Criterion, PolarCode, ZEstimate, ZMode};
use crate::error::{parse_err, Error, Result};
use crate::gfq::FieldSpec;

const MAGIC: &str = "qpolar-code";
const VERSION: u32 = 1;

pub(crate) fn code_id(text: &str) -> String {
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}

impl PolarCode {
    pub fn to_text(&self) -> String {
        let f = self.field();
        let z = self.z();
        let mut s = format!("{MAGIC} {VERSION}\nq {}\np {}\n", f.q(), f.p());
        if f.m() > 1 {
            let coeffs: Vec<String> = f.modulus().iter().map(u16::to_string).collect();
            let _ = writeln!(s, "modulus {}", coeffs.join(" "));
        }
        let _ = writeln!(s, "alpha {}", f.alpha());
        let _ = writeln!(s, "n {}", self.len());
        let _ = writeln!(s, "criterion {}", self.criterion().describe());
        let _ = writeln!(s, "z-mode {}", z.mode.name());
        let _ = writeln!(s, "trials {}", z.trials);
        match z.seed {
            Some(seed) => {
                let _ = writeln!(s, "seed {seed}");
            }
            None => s.push_str("seed none\n"),
        }
        let _ = writeln!(s, "model {}", self.model().replace('\n', " "));
        let info: Vec<String> = self.info_set().iter().map(usize::to_string).collect();
        let _ = writeln!(s, "info {}", info.join(" "));
        for (i, ((zi, se), d)) in z.z.iter().zip(&z.stderr).zip(&z.deficit).enumerate() {
            let _ = writeln!(s, "z {i} {zi:e} {se:e} {d:e}");
        }
        s.push_str("end\n");
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l));
        let mut next = |want: &str| -> Result<(usize, String)> {
            let (no, line) = lines.next().ok_or_else(|| parse_err(0, format!("unexpected end of file, wanted {want:?}")))?;
            let rest = line.strip_prefix(want).ok_or_else(|| parse_err(no, format!("expected {want:?}")))?;
            if !rest.is_empty() && !rest.starts_with(' ') {
                return Err(parse_err(no, format!("expected {want:?}")));
            }
            Ok((no, rest.strip_prefix(' ').unwrap_or(rest).to_owned()))
        };
        fn num<T: std::str::FromStr>(no: usize, v: &str) -> Result<T>
        where
            T::Err: std::fmt::Display,
        {
            v.trim().parse().map_err(|e| parse_err(no, format!("{v:?}: {e}")))
        }

        let (no, version) = next(MAGIC)?;
        if num::<u32>(no, &version)? != VERSION {
            return Err(parse_err(no, format!("unsupported code file version {version}")));
        }
        let (no, q) = next("q")?;
        let q: usize = num(no, &q)?;
        let (no, p) = next("p")?;
        let p: usize = num(no, &p)?;
        let field = if q == p {
            FieldSpec::new(q)?
        } else {
            let (no, coeffs) = next("modulus")?;
            let coeffs = coeffs.split_whitespace().map(|c| num(no, c)).collect::<Result<Vec<u16>>>()?;
            let f = FieldSpec::with_modulus(p, &coeffs)?;
            if f.q() != q {
                return Err(parse_err(no, format!("modulus defines F_{}, header says F_{q}", f.q())));
            }
            f
        };
        let (no, alpha) = next("alpha")?;
        if num::<u16>(no, &alpha)? != field.alpha() {
            return Err(parse_err(no, format!("alpha {alpha} differs from the field's {}", field.alpha())));
        }
        let (no, n) = next("n")?;
        let len: usize = num(no, &n)?;
        let (no, crit) = next("criterion")?;
        let criterion = Criterion::parse(&crit).map_err(|e| parse_err(no, e.to_string()))?;
        let (no, mode) = next("z-mode")?;
        let mode = ZMode::parse(&mode).map_err(|e| parse_err(no, e.to_string()))?;
        let (no, trials) = next("trials")?;
        let trials: u64 = num(no, &trials)?;
        let (no, seed) = next("seed")?;
        let seed = if seed == "none" { None } else { Some(num(no, &seed)?) };
        let (_, model) = next("model")?;
        let (no, info) = next("info")?;
        let info = info.split_whitespace().map(|v| num(no, v)).collect::<Result<Vec<usize>>>()?;
        let (mut z, mut stderr, mut deficit) = (Vec::with_capacity(len), Vec::with_capacity(len), Vec::with_capacity(len));
        for i in 0..len {
            let (no, row) = next("z")?;
            let parts: Vec<&str> = row.split_whitespace().collect();
            if parts.len() != 4 || num::<usize>(no, parts[0])? != i {
                return Err(parse_err(no, format!("expected \"z {i} <z> <stderr> <1 - z>\"")));
            }
            z.push(num(no, parts[1])?);
            stderr.push(num(no, parts[2])?);
            deficit.push(num(no, parts[3])?);
        }
        next("end")?;
        let z = ZEstimate { z, stderr, deficit, trials, mode, seed };
        PolarCode::assemble(field, len, info, z, criterion, model)
            .map_err(|e| Error::Parse { line: 0, msg: e.to_string() })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}
