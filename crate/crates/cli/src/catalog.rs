//! Scenarios shipped with the binary.

use std::path::Path;

use crate::config::{ConfigError, ScenarioConfig};

pub struct Bundled {
    pub name: &'static str,
    pub source: &'static str,
}

pub const BUNDLED: &[Bundled] = &[
    Bundled {
        name: "tadpole_transfer",
        source: include_str!("../scenarios/tadpole_transfer.toml"),
    },
    Bundled {
        name: "star_audit",
        source: include_str!("../scenarios/star_audit.toml"),
    },
    Bundled {
        name: "tadpole_audit",
        source: include_str!("../scenarios/tadpole_audit.toml"),
    },
    Bundled {
        name: "moment_control",
        source: include_str!("../scenarios/moment_control.toml"),
    },
    Bundled {
        name: "perturbation_scan",
        source: include_str!("../scenarios/perturbation_scan.toml"),
    },
    Bundled {
        name: "lie_audit",
        source: include_str!("../scenarios/lie_audit.toml"),
    },
];

pub fn find(name: &str) -> Option<&'static Bundled> {
    BUNDLED.iter().find(|b| b.name == name)
}

/// A file path when one exists, otherwise the name of a bundled scenario.
pub fn resolve(arg: &str) -> Result<ScenarioConfig, ConfigError> {
    let path = Path::new(arg);
    if path.is_file() {
        return ScenarioConfig::load(path);
    }
    match find(arg) {
        Some(b) => ScenarioConfig::parse(b.source, Path::new(".")),
        None => Err(ConfigError::Invalid(format!(
            "`{arg}` is neither a file nor a bundled scenario (see `qgc list`)"
        ))),
    }
}
