//! Named experiment presets shipped with the binary.

use crate::config::RunConfig;
use anyhow::{bail, Result};

pub const PRESET_NAMES: &[&str] =
    &["verif1", "verif2", "shear-brick", "compress60", "twocell", "twocell-tension"];

/// Raw TOML of a named preset.
pub fn preset_toml(name: &str) -> Option<&'static str> {
    Some(match name {
        "verif1" => include_str!("../presets/verif1.toml"),
        "verif2" => include_str!("../presets/verif2.toml"),
        "shear-brick" => include_str!("../presets/shear-brick.toml"),
        "compress60" => include_str!("../presets/compress60.toml"),
        "twocell" => include_str!("../presets/twocell.toml"),
        "twocell-tension" => include_str!("../presets/twocell-tension.toml"),
        _ => return None,
    })
}

pub fn preset_config(name: &str) -> Result<RunConfig> {
    let Some(text) = preset_toml(name) else {
        bail!("unknown preset '{name}'; available: {}", PRESET_NAMES.join(", "));
    };
    RunConfig::from_toml(text)
}
