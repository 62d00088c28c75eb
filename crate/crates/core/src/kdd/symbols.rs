//! Symbolic-field code maps (protocol, flag, service).
//!
//! The default maps ship as an embedded key=value asset and can be replaced
//! by an edited copy of the same format. Tokens are matched
//! case-insensitively; codes are small positive integers. Code 0 is reserved
//! for "unknown token" in lenient transforms and never appears in a map.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use thiserror::Error;

const DEFAULT_MAPS: &str = include_str!("../assets/symbol_maps.txt");

#[derive(Debug, Error)]
pub enum SymbolMapError {
    #[error("line {line}: expected `kind.token=code`, got `{text}`")]
    Format { line: usize, text: String },
    #[error("line {line}: unknown map kind `{kind}`")]
    UnknownKind { line: usize, kind: String },
    #[error("line {line}: bad code `{code}` (must be a positive integer)")]
    BadCode { line: usize, code: String },
    #[error("duplicate {kind} token `{token}`")]
    DuplicateToken { kind: &'static str, token: String },
    #[error("service codes are not injective: code {code} assigned to `{first}` and `{second}`")]
    ServiceCollision {
        code: u32,
        first: String,
        second: String,
    },
    #[error("protocol map must contain exactly tcp, udp, icmp")]
    BadProtocolSet,
    #[error("flag map must contain exactly the 11 known flags")]
    BadFlagSet,
    #[error("service map must contain http=19")]
    MissingHttp,
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Token-to-code maps for the three symbolic record fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolMaps {
    protocol: BTreeMap<String, u32>,
    flag: BTreeMap<String, u32>,
    service: BTreeMap<String, u32>,
}

impl SymbolMaps {
    /// Parses the key=value format. `#` lines and blank lines are ignored.
    pub fn from_text(text: &str) -> Result<Self, SymbolMapError> {
        let mut protocol = BTreeMap::new();
        let mut flag = BTreeMap::new();
        let mut service = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| SymbolMapError::Format {
                line: line_no,
                text: line.to_string(),
            })?;
            let (kind, token) = key.split_once('.').ok_or_else(|| SymbolMapError::Format {
                line: line_no,
                text: line.to_string(),
            })?;
            let code: u32 = value
                .trim()
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| SymbolMapError::BadCode {
                    line: line_no,
                    code: value.trim().to_string(),
                })?;
            let token = token.trim().to_ascii_lowercase();
            let (map, kind_name) = match kind.trim() {
                "protocol" => (&mut protocol, "protocol"),
                "flag" => (&mut flag, "flag"),
                "service" => (&mut service, "service"),
                other => {
                    return Err(SymbolMapError::UnknownKind {
                        line: line_no,
                        kind: other.to_string(),
                    })
                }
            };
            if map.insert(token.clone(), code).is_some() {
                return Err(SymbolMapError::DuplicateToken {
                    kind: kind_name,
                    token,
                });
            }
        }
        let maps = SymbolMaps {
            protocol,
            flag,
            service,
        };
        maps.validate()?;
        Ok(maps)
    }

    pub fn load(path: &Path) -> Result<Self, SymbolMapError> {
        Self::from_text(&fs::read_to_string(path)?)
    }

    fn validate(&self) -> Result<(), SymbolMapError> {
        let protocols: Vec<&str> = self.protocol.keys().map(String::as_str).collect();
        if protocols != ["icmp", "tcp", "udp"] {
            return Err(SymbolMapError::BadProtocolSet);
        }
        let flags: Vec<&str> = self.flag.keys().map(String::as_str).collect();
        let expected = [
            "oth", "rej", "rsto", "rstos0", "rstr", "s0", "s1", "s2", "s3", "sf", "sh",
        ];
        if flags != expected {
            return Err(SymbolMapError::BadFlagSet);
        }
        if self.service.get("http") != Some(&19) {
            return Err(SymbolMapError::MissingHttp);
        }
        let mut seen: BTreeMap<u32, &str> = BTreeMap::new();
        for (token, &code) in &self.service {
            if let Some(first) = seen.insert(code, token) {
                return Err(SymbolMapError::ServiceCollision {
                    code,
                    first: first.to_string(),
                    second: token.clone(),
                });
            }
        }
        Ok(())
    }

    pub fn protocol_code(&self, token: &str) -> Option<u32> {
        self.protocol.get(&token.to_ascii_lowercase()).copied()
    }

    pub fn flag_code(&self, token: &str) -> Option<u32> {
        self.flag.get(&token.to_ascii_lowercase()).copied()
    }

    pub fn service_code(&self, token: &str) -> Option<u32> {
        self.service.get(&token.to_ascii_lowercase()).copied()
    }

    pub fn service_count(&self) -> usize {
        self.service.len()
    }

    /// The shipped default text, for writing an editable copy to disk.
    pub fn default_text() -> &'static str {
        DEFAULT_MAPS
    }
}

impl Default for SymbolMaps {
    fn default() -> Self {
        Self::from_text(DEFAULT_MAPS).expect("embedded symbol maps are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_maps_carry_fixed_codes() {
        let maps = SymbolMaps::default();
        assert_eq!(maps.protocol_code("tcp"), Some(3));
        assert_eq!(maps.protocol_code("UDP"), Some(7));
        assert_eq!(maps.protocol_code("icmp"), Some(9));
        assert_eq!(maps.flag_code("OTH"), Some(1));
        assert_eq!(maps.flag_code("SF"), Some(10));
        assert_eq!(maps.flag_code("SH"), Some(11));
        assert_eq!(maps.service_code("http"), Some(19));
    }

    #[test]
    fn default_service_map_is_injective_and_covers_known_services() {
        let maps = SymbolMaps::default();
        assert_eq!(maps.service_count(), 70);
        // alphabetical assignment skips 19, which stays pinned to http
        assert_eq!(maps.service_code("aol"), Some(1));
        assert_eq!(maps.service_code("ftp_data"), Some(18));
        assert_eq!(maps.service_code("gopher"), Some(20));
        assert_eq!(maps.service_code("z39_50"), Some(70));
        assert_eq!(maps.service_code("ecr_i"), Some(13));
    }

    #[test]
    fn unknown_tokens_return_none() {
        let maps = SymbolMaps::default();
        assert_eq!(maps.protocol_code("sctp"), None);
        assert_eq!(maps.service_code("gemini"), None);
    }

    #[test]
    fn validation_rejects_missing_http() {
        let err = SymbolMaps::from_text(
            "protocol.tcp=3\nprotocol.udp=7\nprotocol.icmp=9\n\
             flag.oth=1\nflag.rej=2\nflag.rsto=3\nflag.rstos0=4\nflag.rstr=5\n\
             flag.s0=6\nflag.s1=7\nflag.s2=8\nflag.s3=9\nflag.sf=10\nflag.sh=11\n\
             service.smtp=1\n",
        )
        .unwrap_err();
        assert!(matches!(err, SymbolMapError::MissingHttp));
    }

    #[test]
    fn validation_rejects_service_code_collision() {
        let err = SymbolMaps::from_text(
            "protocol.tcp=3\nprotocol.udp=7\nprotocol.icmp=9\n\
             flag.oth=1\nflag.rej=2\nflag.rsto=3\nflag.rstos0=4\nflag.rstr=5\n\
             flag.s0=6\nflag.s1=7\nflag.s2=8\nflag.s3=9\nflag.sf=10\nflag.sh=11\n\
             service.http=19\nservice.smtp=19\n",
        )
        .unwrap_err();
        assert!(matches!(
            err,
            SymbolMapError::ServiceCollision { code: 19, .. }
        ));
    }

    #[test]
    fn round_trip_of_default_text() {
        let maps = SymbolMaps::from_text(SymbolMaps::default_text()).unwrap();
        assert_eq!(maps, SymbolMaps::default());
    }
}
