//! Process-wide configuration, read once from the environment.
//!
//! | variable              | values                 | default                         |
//! |-----------------------|------------------------|---------------------------------|
//! | `PARASTORE_INDEX32`   | `1`/`true`/`yes`/`on`  | off (64-bit sizes)              |
//! | `PARASTORE_CONTRACTS` | `enforced`/`disabled`  | enforced in debug, disabled in release |

use std::sync::OnceLock;

use crate::contract::ContractMode;

pub const INDEX32_VAR: &str = "PARASTORE_INDEX32";
pub const CONTRACTS_VAR: &str = "PARASTORE_CONTRACTS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Config {
    /// Limit lengths and capacities to the 32-bit index range.
    pub index32: bool,
    pub contracts: ContractMode,
}

impl Config {
    /// Builds a configuration from variable lookups. `get` returns `None` for
    /// unset variables.
    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Config {
        let index32 = cfg!(feature = "index32")
            || get(INDEX32_VAR)
                .map(|v| parse_flag(&v))
                .unwrap_or(false);
        let contracts = get(CONTRACTS_VAR)
            .and_then(|v| v.parse().ok())
            .unwrap_or_else(ContractMode::build_default);
        Config { index32, contracts }
    }

    pub fn from_env() -> Config {
        Config::from_lookup(|name| std::env::var(name).ok())
    }
}

fn parse_flag(v: &str) -> bool {
    matches!(
        v.trim().to_ascii_lowercase().as_str(),
        "1" | "true" | "yes" | "on"
    )
}

static CONFIG: OnceLock<Config> = OnceLock::new();

/// The active configuration. The environment is read on first call only.
pub fn get() -> &'static Config {
    CONFIG.get_or_init(Config::from_env)
}
