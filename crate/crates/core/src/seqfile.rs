//! Plain-text pitch sequence files.
//!
//! ```text
//! schema_version = 1
//! tonic_hz = 261.63
//! raga = yaman
//! reference = tonic
//! ---
//! 0
//! 204
//! MISSING
//! ```
//!
//! Header lines are `key = value`; `raga` and `reference` are optional. Values in an
//! `a440` file are cents above 440 Hz and are converted to tonic-relative cents by
//! [`SequenceFile::to_sequence`]. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scale::{ShrutiId, ShrutiScale};
use crate::sequence::{Observation, PitchSequence};

pub const SEQFILE_SCHEMA_VERSION: u32 = 1;
pub const MISSING_TOKEN: &str = "MISSING";
const SEPARATOR: &str = "---";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reference {
    /// Cents above the header tonic.
    #[default]
    Tonic,
    /// Cents above A4 = 440 Hz.
    A440,
}

impl Reference {
    fn as_str(self) -> &'static str {
        match self {
            Reference::Tonic => "tonic",
            Reference::A440 => "a440",
        }
    }
}

impl FromStr for Reference {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tonic" => Ok(Reference::Tonic),
            "a440" => Ok(Reference::A440),
            _ => Err(Error::InvalidInput(format!("unknown reference `{s}` (tonic|a440)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceFile {
    pub tonic_hz: f64,
    pub raga: Option<String>,
    pub reference: Reference,
    /// Values as written, in the file's reference frame.
    pub observations: Vec<Observation>,
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("line {line}: {msg}"))
}

impl SequenceFile {
    pub fn new(tonic_hz: f64, raga: Option<String>, observations: Vec<Observation>) -> Result<Self> {
        if !(tonic_hz.is_finite() && tonic_hz > 0.0) {
            return Err(Error::InvalidInput(format!("tonic_hz {tonic_hz} must be > 0")));
        }
        Ok(SequenceFile { tonic_hz, raga, reference: Reference::Tonic, observations })
    }

    /// Tonic-relative file holding the cent values of `ids`.
    pub fn from_ids(ids: &[ShrutiId], scale: &ShrutiScale, raga: Option<String>) -> Result<Self> {
        let obs = ids.iter().map(|&s| Observation::Cents(scale.cents_of(s))).collect();
        SequenceFile::new(scale.tonic_hz(), raga, obs)
    }

    pub fn from_sequence(seq: &PitchSequence, tonic_hz: f64, raga: Option<String>) -> Result<Self> {
        SequenceFile::new(tonic_hz, raga, seq.items().to_vec())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut schema = None;
        let mut tonic = None;
        let mut raga = None;
        let mut reference = Reference::Tonic;
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        let mut seen_separator = false;
        for (n, line) in lines.by_ref() {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == SEPARATOR {
                seen_separator = true;
                break;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| parse_err(n, format!("expected `key = value`, got `{line}`")))?;
            let value = value.trim();
            match key.trim() {
                "schema_version" => {
                    schema = Some(value.parse::<u32>().map_err(|e| parse_err(n, e))?);
                }
                "tonic_hz" => tonic = Some(value.parse::<f64>().map_err(|e| parse_err(n, e))?),
                "raga" => raga = Some(value.to_string()),
                "reference" => reference = value.parse().map_err(|e: Error| parse_err(n, e))?,
                other => return Err(parse_err(n, format!("unknown header key `{other}`"))),
            }
        }
        if !seen_separator {
            return Err(Error::InvalidInput(format!("missing `{SEPARATOR}` after header")));
        }
        match schema {
            Some(SEQFILE_SCHEMA_VERSION) => {}
            Some(v) => return Err(Error::InvalidInput(format!("unsupported schema_version {v}"))),
            None => return Err(Error::InvalidInput("header lacks schema_version".into())),
        }
        let tonic = tonic.ok_or_else(|| Error::InvalidInput("header lacks tonic_hz".into()))?;
        let mut obs = Vec::new();
        for (n, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line == MISSING_TOKEN {
                obs.push(Observation::Missing);
            } else {
                let c: f64 = line.parse().map_err(|_| parse_err(n, format!("bad value `{line}`")))?;
                if !c.is_finite() {
                    return Err(parse_err(n, "non-finite cent value"));
                }
                obs.push(Observation::Cents(c));
            }
        }
        let mut f = SequenceFile::new(tonic, raga, obs)?;
        f.reference = reference;
        Ok(f)
    }

    pub fn emit(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "schema_version = {SEQFILE_SCHEMA_VERSION}");
        let _ = writeln!(s, "tonic_hz = {}", self.tonic_hz);
        if let Some(r) = &self.raga {
            let _ = writeln!(s, "raga = {r}");
        }
        if self.reference != Reference::Tonic {
            let _ = writeln!(s, "reference = {}", self.reference.as_str());
        }
        s.push_str(SEPARATOR);
        s.push('\n');
        for o in &self.observations {
            match o {
                Observation::Cents(c) => {
                    let _ = writeln!(s, "{c}");
                }
                Observation::Missing => {
                    s.push_str(MISSING_TOKEN);
                    s.push('\n');
                }
            }
        }
        s
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        SequenceFile::parse(&text)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        fs::write(path, self.emit()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    /// Offset in cents from A4 to the tonic.
    fn a440_offset(&self) -> f64 {
        1200.0 * (440.0 / self.tonic_hz).log2()
    }

    /// The body as tonic-relative cents.
    pub fn to_sequence(&self) -> Result<PitchSequence> {
        if self.observations.is_empty() {
            return Err(Error::InvalidInput("sequence file has no observations".into()));
        }
        let shift = match self.reference {
            Reference::Tonic => 0.0,
            Reference::A440 => self.a440_offset(),
        };
        PitchSequence::new(
            self.observations
                .iter()
                .map(|o| match o {
                    Observation::Cents(c) => Observation::Cents(c + shift),
                    Observation::Missing => Observation::Missing,
                })
                .collect(),
        )
    }
}
