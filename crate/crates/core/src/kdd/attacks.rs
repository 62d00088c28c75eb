//! Attack-label dictionary: maps a connection label to its 5-way class and
//! binary decision.
//!
//! Lookups are case-insensitive and accept a few common misspellings seen in
//! the wild (`netune`, `lpsweep`, `httpunnel`) as aliases of the canonical
//! KDD names. `satan` is a Probe in the canonical taxonomy and is kept there.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Five-way traffic class. `Normal` is the only non-attack class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AttackClass {
    Normal,
    Probe,
    DoS,
    U2R,
    R2L,
}

impl AttackClass {
    /// Report row order.
    pub const ALL: [AttackClass; 5] = [
        AttackClass::Normal,
        AttackClass::Probe,
        AttackClass::DoS,
        AttackClass::U2R,
        AttackClass::R2L,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttackClass::Normal => "Normal",
            AttackClass::Probe => "Probe",
            AttackClass::DoS => "DoS",
            AttackClass::U2R => "U2R",
            AttackClass::R2L => "R2L",
        }
    }

    pub fn is_attack(self) -> bool {
        !matches!(self, AttackClass::Normal)
    }

    /// Position in [`Self::ALL`]; used to index per-class count arrays.
    pub fn index(self) -> usize {
        match self {
            AttackClass::Normal => 0,
            AttackClass::Probe => 1,
            AttackClass::DoS => 2,
            AttackClass::U2R => 3,
            AttackClass::R2L => 4,
        }
    }
}

impl fmt::Display for AttackClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AttackClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "normal" => Ok(AttackClass::Normal),
            "probe" => Ok(AttackClass::Probe),
            "dos" => Ok(AttackClass::DoS),
            "u2r" => Ok(AttackClass::U2R),
            "r2l" => Ok(AttackClass::R2L),
            other => Err(format!("unknown class `{other}`")),
        }
    }
}

/// Classifies an attack label (trailing period already stripped).
/// Returns `None` for labels outside the dictionary.
pub fn classify(label: &str) -> Option<AttackClass> {
    use AttackClass::*;
    let lower = label.to_ascii_lowercase();
    Some(match lower.as_str() {
        "normal" => Normal,

        "apache2" | "back" | "land" | "mailbomb" | "neptune" | "netune" | "pod"
        | "processtable" | "smurf" | "teardrop" | "udpstorm" => DoS,

        "buffer_overflow" | "httptunnel" | "httpunnel" | "loadmodule" | "perl" | "ps"
        | "rootkit" | "sqlattack" | "xterm" => U2R,

        "ftp_write" | "guess_passwd" | "imap" | "multihop" | "named" | "phf" | "sendmail"
        | "snmpgetattack" | "snmpguess" | "spy" | "warezclient" | "warezmaster" | "worm"
        | "xlock" | "xsnoop" => R2L,

        "ipsweep" | "lpsweep" | "mscan" | "nmap" | "portsweep" | "saint" | "satan" => Probe,

        _ => return None,
    })
}
