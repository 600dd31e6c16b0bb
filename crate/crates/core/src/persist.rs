//! Text formats: genome files and run configuration files.
//!
//! A genome file is two lines:
//!
//! ```text
//! CGP1 <n_input> <n_output> <C> <r>
//! <gene> <gene> ...
//! ```
//!
//! Genes are written with 17 significant digits so they parse back to the
//! identical `f64`.
//!
//! A run configuration is a flat `key = value` file. Blank lines and lines
//! starting with `#` are ignored; unknown or repeated keys are rejected.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use thiserror::Error;

use crate::ale::BridgeConfig;
use crate::env::{DEFAULT_FRAME_CAP, DEFAULT_P_FSKIP};
use crate::error::CgpError;
use crate::evolution::{EvalSettings, EvolutionConfig, PIXEL_INPUTS};
use crate::graph::{gene_count, Genome};

const GENOME_MAGIC: &str = "CGP1";

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("header declares {expected} genes but the file has {actual}")]
    GeneCount { expected: usize, actual: usize },
    #[error(transparent)]
    Genome(#[from] CgpError),
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("configuration key `{0}` given twice")]
    DuplicateKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue {
        key: String,
        value: String,
        reason: String,
    },
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

pub fn write_genome(genome: &Genome) -> String {
    let mut out = format!(
        "{GENOME_MAGIC} {} {} {} {}\n",
        genome.n_input(),
        genome.n_output(),
        genome.columns(),
        genome.recurrency()
    );
    for (i, g) in genome.genes().iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        write!(out, "{g:.16e}").unwrap();
    }
    out.push('\n');
    out
}

pub fn parse_genome(text: &str) -> Result<Genome, ParseError> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| syntax(1, "empty genome file"))?;
    let fields: Vec<&str> = header.split_ascii_whitespace().collect();
    if fields.len() != 5 || fields[0] != GENOME_MAGIC {
        return Err(syntax(
            1,
            format!("expected `{GENOME_MAGIC} <n_input> <n_output> <C> <r>`"),
        ));
    }
    let int = |s: &str, name: &str| {
        s.parse::<usize>()
            .map_err(|_| syntax(1, format!("bad {name} `{s}`")))
    };
    let n_input = int(fields[1], "n_input")?;
    let n_output = int(fields[2], "n_output")?;
    let columns = int(fields[3], "C")?;
    let recurrency: f64 = fields[4]
        .parse()
        .map_err(|_| syntax(1, format!("bad r `{}`", fields[4])))?;

    let body = lines.next().unwrap_or("");
    let genes = body
        .split_ascii_whitespace()
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| syntax(2, format!("bad gene `{t}`")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if let Some((i, extra)) = lines.enumerate().find(|(_, l)| !l.trim().is_empty()) {
        return Err(syntax(i + 3, format!("unexpected content `{extra}`")));
    }
    let expected = gene_count(n_output, columns);
    if genes.len() != expected {
        return Err(ParseError::GeneCount {
            expected,
            actual: genes.len(),
        });
    }
    Ok(Genome::new(n_input, n_output, columns, recurrency, genes)?)
}

/// Every setting of an evolution run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub env: String,
    pub lambda: usize,
    pub c: usize,
    pub r: f64,
    pub m_nodes: f64,
    pub m_output: f64,
    pub n_eval: usize,
    pub episodes: usize,
    pub p_fskip: f64,
    pub frame_cap: u64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub ale_server: Option<PathBuf>,
    pub rom_dir: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let evo = EvolutionConfig::default();
        RunConfig {
            env: "catch".into(),
            lambda: evo.lambda,
            c: evo.columns,
            r: evo.recurrency,
            m_nodes: evo.m_nodes,
            m_output: evo.m_output,
            n_eval: evo.n_eval,
            episodes: 1,
            p_fskip: DEFAULT_P_FSKIP,
            frame_cap: DEFAULT_FRAME_CAP,
            seed: 0,
            out_dir: PathBuf::from("."),
            ale_server: None,
            rom_dir: None,
        }
    }
}

pub const CONFIG_KEYS: [&str; 14] = [
    "env",
    "lambda",
    "c",
    "r",
    "m_nodes",
    "m_output",
    "n_eval",
    "episodes",
    "p_fskip",
    "frame_cap",
    "seed",
    "out_dir",
    "ale_server",
    "rom_dir",
];

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T, ParseError> {
    raw.parse().map_err(|_| ParseError::InvalidValue {
        key: key.into(),
        value: raw.into(),
        reason: "not parseable".into(),
    })
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<RunConfig, ParseError> {
        let mut config = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, raw) = line
                .split_once('=')
                .ok_or_else(|| syntax(i + 1, "expected `key = value`"))?;
            let (key, raw) = (key.trim(), raw.trim());
            if seen.iter().any(|k| k == key) {
                return Err(ParseError::DuplicateKey(key.into()));
            }
            config.set(key, raw)?;
            seen.push(key.into());
        }
        config.validate()?;
        Ok(config)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<(), ParseError> {
        match key {
            "env" => self.env = raw.to_string(),
            "lambda" => self.lambda = value(key, raw)?,
            "c" => self.c = value(key, raw)?,
            "r" => self.r = value(key, raw)?,
            "m_nodes" => self.m_nodes = value(key, raw)?,
            "m_output" => self.m_output = value(key, raw)?,
            "n_eval" => self.n_eval = value(key, raw)?,
            "episodes" => self.episodes = value(key, raw)?,
            "p_fskip" => self.p_fskip = value(key, raw)?,
            "frame_cap" => self.frame_cap = value(key, raw)?,
            "seed" => self.seed = value(key, raw)?,
            "out_dir" => self.out_dir = PathBuf::from(raw),
            "ale_server" => self.ale_server = Some(PathBuf::from(raw)),
            "rom_dir" => self.rom_dir = Some(PathBuf::from(raw)),
            _ => return Err(ParseError::UnknownKey(key.into())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ParseError> {
        let bad = |key: &str, value: String, reason: &str| {
            Err(ParseError::InvalidValue {
                key: key.into(),
                value,
                reason: reason.into(),
            })
        };
        let unit_open = |x: f64| x > 0.0 && x <= 1.0;
        if self.env.is_empty() {
            return bad("env", self.env.clone(), "must not be empty");
        }
        if self.lambda == 0 {
            return bad("lambda", "0".into(), "must be positive");
        }
        if self.c == 0 {
            return bad("c", "0".into(), "must be positive");
        }
        if !(0.0..=1.0).contains(&self.r) {
            return bad("r", self.r.to_string(), "must lie in [0, 1]");
        }
        if !unit_open(self.m_nodes) {
            return bad("m_nodes", self.m_nodes.to_string(), "must lie in (0, 1]");
        }
        if !unit_open(self.m_output) {
            return bad("m_output", self.m_output.to_string(), "must lie in (0, 1]");
        }
        if self.n_eval == 0 {
            return bad("n_eval", "0".into(), "must be positive");
        }
        if self.episodes == 0 {
            return bad("episodes", "0".into(), "must be positive");
        }
        if !(0.0..1.0).contains(&self.p_fskip) {
            return bad("p_fskip", self.p_fskip.to_string(), "must lie in [0, 1)");
        }
        if self.frame_cap == 0 {
            return bad("frame_cap", "0".into(), "must be positive");
        }
        Ok(())
    }

    /// All keys, one per line, in [`CONFIG_KEYS`] order. Unset optional keys
    /// are omitted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| writeln!(out, "{k} = {v}").unwrap();
        line("env", self.env.clone());
        line("lambda", self.lambda.to_string());
        line("c", self.c.to_string());
        line("r", self.r.to_string());
        line("m_nodes", self.m_nodes.to_string());
        line("m_output", self.m_output.to_string());
        line("n_eval", self.n_eval.to_string());
        line("episodes", self.episodes.to_string());
        line("p_fskip", self.p_fskip.to_string());
        line("frame_cap", self.frame_cap.to_string());
        line("seed", self.seed.to_string());
        line("out_dir", self.out_dir.display().to_string());
        if let Some(p) = &self.ale_server {
            line("ale_server", p.display().to_string());
        }
        if let Some(p) = &self.rom_dir {
            line("rom_dir", p.display().to_string());
        }
        out
    }

    pub fn eval_settings(&self) -> EvalSettings {
        EvalSettings {
            episodes: self.episodes,
            p_fskip: self.p_fskip,
            frame_cap: self.frame_cap,
        }
    }

    pub fn evolution_config(&self, n_output: usize) -> EvolutionConfig {
        EvolutionConfig {
            lambda: self.lambda,
            n_eval: self.n_eval,
            m_nodes: self.m_nodes,
            m_output: self.m_output,
            columns: self.c,
            recurrency: self.r,
            n_input: PIXEL_INPUTS,
            n_output,
            eval: self.eval_settings(),
            seed: self.seed,
        }
    }

    pub fn bridge_config(&self) -> Option<BridgeConfig> {
        match (&self.ale_server, &self.rom_dir) {
            (Some(server), Some(roms)) => Some(BridgeConfig::new(server, roms)),
            _ => None,
        }
    }
}
