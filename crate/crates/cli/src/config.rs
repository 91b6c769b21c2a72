//! Parsing of bandwidths, lists and the flat `key = value` config format.

use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use nusample::bench::{ExperimentConfig, Profile};
use nusample::{Family, WindowKind};

/// Parses `pi/2`, `5pi/6`, `2*pi/3`, `π/2`, `0.75pi` or a plain decimal.
pub fn parse_delta(text: &str) -> Result<f64> {
    let s: String =
        text.trim().to_ascii_lowercase().replace('π', "pi").chars().filter(|c| !c.is_whitespace()).collect();
    let value = match s.find("pi") {
        None => s.parse::<f64>().map_err(|_| anyhow!("cannot parse bandwidth '{text}'"))?,
        Some(at) => {
            let coeff = s[..at].trim_end_matches('*');
            let coeff = if coeff.is_empty() {
                1.0
            } else {
                coeff.parse::<f64>().map_err(|_| anyhow!("bad coefficient in '{text}'"))?
            };
            let rest = &s[at + 2..];
            let denom = match rest.strip_prefix('/') {
                Some(d) => d.parse::<f64>().map_err(|_| anyhow!("bad denominator in '{text}'"))?,
                None if rest.is_empty() => 1.0,
                None => bail!("cannot parse bandwidth '{text}'"),
            };
            // coefficient first so that e.g. 5pi/6 is (5π)/6, as in the literal
            coeff * PI / denom
        }
    };
    if !(value > 0.0 && value < PI) {
        bail!("bandwidth {text} = {value} must lie in (0, π)");
    }
    Ok(value)
}

pub fn parse_list<T>(text: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(item).collect()
}

/// Integers, with `a..=b` and `a..=b:step` ranges allowed as items.
pub fn parse_usize_list(text: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..=") {
            let (hi, step) = match hi.split_once(':') {
                Some((h, st)) => (h, st.trim().parse::<usize>()?),
                None => (hi, 1),
            };
            if step == 0 {
                bail!("zero step in range '{item}'");
            }
            out.extend((lo.trim().parse::<usize>()?..=hi.trim().parse::<usize>()?).step_by(step));
        } else {
            out.push(item.parse::<usize>().with_context(|| format!("bad integer '{item}'"))?);
        }
    }
    Ok(out)
}

fn parse_bool(text: &str) -> Result<bool> {
    match text.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        other => bail!("expected a boolean, got '{other}'"),
    }
}

/// Applies one `key = value` setting to `config`.
pub fn apply_setting(config: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    let value = value.trim();
    match key.trim() {
        "profile" => {
            let profile: Profile = value.parse()?;
            *config = ExperimentConfig::profile(profile);
        }
        "deltas" => config.deltas = parse_list(value, parse_delta)?,
        "n_values" => config.n_values = parse_usize_list(value)?,
        "periodic_n_values" => config.periodic_n_values = parse_usize_list(value)?,
        "m_period" => config.m_period = value.parse()?,
        "families" => config.families = parse_list(value, |s| Ok(s.parse::<Family>()?))?,
        "windows" => config.windows = parse_list(value, |s| Ok(s.parse::<WindowKind>()?))?,
        "trials" => config.trials = value.parse()?,
        "base_seed" | "seed" => config.base_seed = value.parse()?,
        "grid_points" => config.grid_points = value.parse()?,
        "min_sep" => config.min_sep = value.parse()?,
        "max_perturb" => config.max_perturb = value.parse()?,
        "min_gap" => config.min_gap = value.parse()?,
        "allow_out_of_theory" => config.allow_out_of_theory = parse_bool(value)?,
        other => bail!("unknown config key '{other}'"),
    }
    Ok(())
}

/// Reads a flat config: one `key = value` per line, `#` starts a comment. A
/// `profile` line resets every field, so it should come first.
pub fn load_config_file(path: &Path, config: &mut ExperimentConfig) -> Result<()> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) =
            line.split_once('=').ok_or_else(|| anyhow!("{}:{}: expected key = value", path.display(), no + 1))?;
        apply_setting(config, key, value).with_context(|| format!("{}:{}", path.display(), no + 1))?;
    }
    Ok(())
}
