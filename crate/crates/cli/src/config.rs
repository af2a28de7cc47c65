//! Config files and value parsers.
//!
//! A config file holds one `key = value` pair per line, keys being long flag
//! names (`tau`, `n`, `replicas`, `stub-cap` or `stub_cap`). Blank lines and
//! lines starting with `#` are skipped. `key = true` sets a switch. The pairs
//! are spliced in front of the command-line flags, and since every flag may
//! be repeated with the last one winning, the command line takes precedence.

use std::fs;

use hopcount_core::matching::Mode;
use hopcount_core::montecarlo::GiantsMode;

fn config_path(args: &[String]) -> Option<String> {
    let mut it = args.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

pub fn parse_file(text: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(format!("config line {}: expected key=value, got `{line}`", i + 1));
        };
        let key = key.trim().replace('_', "-");
        let value = value.trim();
        if key.is_empty() || key == "config" {
            return Err(format!("config line {}: invalid key `{key}`", i + 1));
        }
        match value {
            "true" => out.push(format!("--{key}")),
            "false" => {}
            v => {
                out.push(format!("--{key}"));
                out.push(v.to_string());
            }
        }
    }
    Ok(out)
}

/// Splice the contents of `--config FILE` right after the subcommand.
pub fn expand(raw: Vec<String>) -> Result<Vec<String>, String> {
    let Some(path) = config_path(&raw) else {
        return Ok(raw);
    };
    let text = fs::read_to_string(&path).map_err(|e| format!("cannot read config {path}: {e}"))?;
    let extra = parse_file(&text)?;
    if raw.len() < 2 {
        return Ok(raw);
    }
    let mut args = raw[..2].to_vec();
    args.extend(extra);
    args.extend_from_slice(&raw[2..]);
    Ok(args)
}

/// Node count, accepting `100000`, `1e5` or `2.5e4`.
pub fn parse_count(s: &str) -> Result<usize, String> {
    let s = s.trim();
    if let Ok(n) = s.parse::<usize>() {
        return Ok(n);
    }
    let x: f64 = s.parse().map_err(|_| format!("`{s}` is not a node count"))?;
    if !(x.is_finite() && x >= 0.0 && x.fract() == 0.0 && x <= 9.007_199_254_740_992e15) {
        return Err(format!("`{s}` is not a non-negative integer"));
    }
    Ok(x as usize)
}

pub fn parse_giants(s: &str) -> Result<GiantsMode, String> {
    match s.trim() {
        "beta" => Ok(GiantsMode::Beta),
        other => {
            let k = other
                .strip_prefix("topk:")
                .ok_or_else(|| format!("giants must be `topk:K` or `beta`, got `{other}`"))?;
            k.parse().map(GiantsMode::TopK).map_err(|_| format!("bad giant count `{k}`"))
        }
    }
}

pub fn parse_mode(s: &str) -> Result<Mode, String> {
    match s.trim() {
        "lazy" => Ok(Mode::Lazy),
        "eager" => Ok(Mode::Eager),
        other => Err(format!("mode must be `lazy` or `eager`, got `{other}`")),
    }
}
