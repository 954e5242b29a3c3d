//! Pre- and post-condition checks.
//!
//! [`expects`] and [`ensures`] follow the process-wide [`ContractMode`]. A
//! failed check in enforced mode panics with a [`ContractViolation`] payload,
//! so callers (and [`crate::launch`]) can tell contract failures apart from
//! other panics with `downcast_ref`.
//!
//! [`Contracts`] runs the same checks under an explicit mode and returns
//! them as `Result`s instead of panicking.

use std::fmt;
use std::panic::Location;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ContractMode {
    Enforced,
    Disabled,
}

impl ContractMode {
    /// Enforced in debug builds, disabled in release builds.
    pub const fn build_default() -> ContractMode {
        if cfg!(debug_assertions) {
            ContractMode::Enforced
        } else {
            ContractMode::Disabled
        }
    }
}

impl FromStr for ContractMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "enforced" | "on" => Ok(ContractMode::Enforced),
            "disabled" | "off" => Ok(ContractMode::Disabled),
            other => Err(format!("unknown contract mode `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConditionKind {
    Precondition,
    Postcondition,
}

impl fmt::Display for ConditionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConditionKind::Precondition => "precondition",
            ConditionKind::Postcondition => "postcondition",
        })
    }
}

/// A failed pre- or post-condition. Signals a caller bug, not bad data.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind} violated at {file}:{line}: {message}")]
pub struct ContractViolation {
    pub kind: ConditionKind,
    pub message: String,
    pub file: &'static str,
    pub line: u32,
}

impl ContractViolation {
    #[track_caller]
    pub fn here(kind: ConditionKind, message: impl Into<String>) -> ContractViolation {
        let loc = Location::caller();
        ContractViolation {
            kind,
            message: message.into(),
            file: loc.file(),
            line: loc.line(),
        }
    }
}

/// Checks under an explicit mode, reporting failures as values.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Contracts {
    pub mode: ContractMode,
}

impl Contracts {
    pub const fn new(mode: ContractMode) -> Contracts {
        Contracts { mode }
    }

    pub fn active() -> Contracts {
        Contracts::new(crate::config::get().contracts)
    }

    #[track_caller]
    pub fn check(
        self,
        kind: ConditionKind,
        condition: bool,
        message: &str,
    ) -> Result<(), ContractViolation> {
        if condition || self.mode == ContractMode::Disabled {
            Ok(())
        } else {
            Err(ContractViolation::here(kind, message))
        }
    }

    #[track_caller]
    pub fn expects(self, condition: bool, message: &str) -> Result<(), ContractViolation> {
        self.check(ConditionKind::Precondition, condition, message)
    }

    #[track_caller]
    pub fn ensures(self, condition: bool, message: &str) -> Result<(), ContractViolation> {
        self.check(ConditionKind::Postcondition, condition, message)
    }
}

/// Raises `violation` as a panic carrying the violation itself.
pub fn raise(violation: ContractViolation) -> ! {
    std::panic::panic_any(violation)
}

/// Precondition check under the process-wide mode.
#[track_caller]
#[inline]
pub fn expects(condition: bool, message: &str) {
    if !condition {
        if let Err(v) = Contracts::active().expects(false, message) {
            raise(v)
        }
    }
}

/// Postcondition check under the process-wide mode.
#[track_caller]
#[inline]
pub fn ensures(condition: bool, message: &str) {
    if !condition {
        if let Err(v) = Contracts::active().ensures(false, message) {
            raise(v)
        }
    }
}

/// Extracts a [`ContractViolation`] from a caught panic payload.
pub fn violation_from_panic(payload: &(dyn std::any::Any + Send)) -> Option<&ContractViolation> {
    payload.downcast_ref::<ContractViolation>()
}
