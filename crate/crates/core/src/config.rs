//! Flat `key = value` configuration files and the built-in presets.
//!
//! Recognized keys: `m`, `n0`, `ka`, `kb`, `s`, `ni` (required) and
//! `max_iter`, `early_stop`, `design_ebno_db`, `interleaver_seed`, `conv_n`,
//! `conv_k` (optional). `#` starts a comment.

use std::path::Path;

use crate::bp::CheckRule;
use crate::coupled::CouplingParams;
use crate::error::{Error, Result};

pub const SETTING1: &str = "\
# M = 2 subblocks of length 1024
m = 2
n0 = 128
ka = 64
kb = 960
s = 64
ni = 1024
max_iter = 200
early_stop = true
design_ebno_db = 0.0
interleaver_seed = 1
";

pub const SETTING2: &str = "\
# M = 4 subblocks of length 1024
m = 4
n0 = 512
ka = 256
kb = 1792
s = 128
ni = 1024
max_iter = 200
early_stop = true
design_ebno_db = 0.0
interleaver_seed = 1
";

pub const SETTING3: &str = "\
# M = 4 subblocks of length 1024, shorter outer code
m = 4
n0 = 256
ka = 128
kb = 1920
s = 64
ni = 1024
max_iter = 200
early_stop = true
design_ebno_db = 0.0
interleaver_seed = 1
";

/// Looks up a built-in preset by name.
pub fn preset(name: &str) -> Option<&'static str> {
    match name {
        "setting1" => Some(SETTING1),
        "setting2" => Some(SETTING2),
        "setting3" => Some(SETTING3),
        _ => None,
    }
}

/// Parsed configuration: the coupled code plus the conventional baseline size.
#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    /// Label written to the `setting` CSV column.
    pub name: String,
    pub params: CouplingParams,
    /// Length of the conventional baseline code; defaults to `ni`.
    pub conv_n: usize,
    /// Information bits of the conventional baseline; defaults to the
    /// subblock payload `(ka + kb) / m`.
    pub conv_k: usize,
}

impl SimConfig {
    /// Parses `key = value` text.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut m = None;
        let mut n0 = None;
        let mut ka = None;
        let mut kb = None;
        let mut s = None;
        let mut ni = None;
        let mut conv_n = None;
        let mut conv_k = None;
        let mut max_iter = 200;
        let mut early_stop = true;
        let mut design_ebno_db = 0.0;
        let mut interleaver_seed = 1;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::Config(format!("line {}: invalid {what} `{value}` for `{key}`", lineno + 1));
            let int = || value.parse::<usize>().map_err(|_| bad("integer"));
            match key {
                "m" => m = Some(int()?),
                "n0" => n0 = Some(int()?),
                "ka" => ka = Some(int()?),
                "kb" => kb = Some(int()?),
                "s" => s = Some(int()?),
                "ni" => ni = Some(int()?),
                "conv_n" => conv_n = Some(int()?),
                "conv_k" => conv_k = Some(int()?),
                "max_iter" => max_iter = int()?,
                "early_stop" => {
                    early_stop = match value {
                        "true" | "1" | "yes" => true,
                        "false" | "0" | "no" => false,
                        _ => return Err(bad("boolean")),
                    }
                }
                "design_ebno_db" => design_ebno_db = value.parse::<f64>().map_err(|_| bad("number"))?,
                "interleaver_seed" => interleaver_seed = value.parse::<u64>().map_err(|_| bad("integer"))?,
                _ => return Err(Error::Config(format!("line {}: unknown key `{key}`", lineno + 1))),
            }
        }

        let need = |v: Option<usize>, key: &str| v.ok_or_else(|| Error::Config(format!("missing key `{key}`")));
        let params = CouplingParams {
            m: need(m, "m")?,
            n0: need(n0, "n0")?,
            ka: need(ka, "ka")?,
            kb: need(kb, "kb")?,
            s: need(s, "s")?,
            ni: need(ni, "ni")?,
            max_iterations: max_iter,
            early_stop,
            design_ebno_db,
            interleaver_seed,
            rule: CheckRule::BoxPlus,
        };
        params.validate()?;
        let conv_n = conv_n.unwrap_or(params.ni);
        let conv_k = conv_k.unwrap_or((params.ka + params.kb) / params.m);
        if conv_n < 2 || !conv_n.is_power_of_two() || conv_k == 0 || conv_k > conv_n {
            return Err(Error::Config(format!(
                "conventional code ({conv_n}, {conv_k}) needs a power-of-two length and 0 < k <= n"
            )));
        }
        Ok(Self {
            name: name.to_string(),
            params,
            conv_n,
            conv_k,
        })
    }

    /// Resolves a preset name or reads a config file.
    pub fn load(spec: &str) -> Result<Self> {
        if let Some(text) = preset(spec) {
            return Self::parse(spec, text);
        }
        let path = Path::new(spec);
        let text = std::fs::read_to_string(path)?;
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| spec.to_string());
        Self::parse(&name, &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for name in ["setting1", "setting2", "setting3"] {
            let cfg = SimConfig::load(name).unwrap();
            assert_eq!(cfg.name, name);
            assert_eq!(cfg.params.ni, 1024);
            assert_eq!(cfg.params.max_iterations, 200);
            assert!(cfg.params.early_stop);
            assert_eq!(cfg.conv_n, 1024);
        }
        assert_eq!(SimConfig::load("setting1").unwrap().conv_k, 512);
    }

    #[test]
    fn rejects_unknown_and_missing_keys() {
        assert!(matches!(SimConfig::parse("x", "m = 2\nfoo = 1"), Err(Error::Config(_))));
        assert!(matches!(SimConfig::parse("x", "m = 2"), Err(Error::Config(_))));
        assert!(matches!(SimConfig::parse("x", "m two"), Err(Error::Config(_))));
    }

    #[test]
    fn rejects_inconsistent_sizes() {
        let text = SETTING1.replace("s = 64", "s = 60");
        assert!(matches!(SimConfig::parse("x", &text), Err(Error::InvalidCoupling(_))));
    }

    #[test]
    fn optional_keys_override_defaults() {
        let text = format!("{SETTING1}\nearly_stop = false\nconv_n = 2048\nconv_k = 1024\n");
        let cfg = SimConfig::parse("big", &text).unwrap();
        assert!(!cfg.params.early_stop);
        assert_eq!((cfg.conv_n, cfg.conv_k), (2048, 1024));
    }

    #[test]
    fn missing_file_is_io_error() {
        assert!(matches!(SimConfig::load("/nonexistent/cfg.txt"), Err(Error::Io(_))));
    }
}
