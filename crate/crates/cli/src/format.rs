//! Instance files, report envelopes and atomic output.

use std::io::Write;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use cspoly::{Instance, Polynomial};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermFile {
    pub exps: Vec<u32>,
    pub coef: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyFile {
    pub terms: Vec<TermFile>,
}

/// `{n, d, polys: [{terms: [{exps, coef}]}]}`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub n: usize,
    pub d: usize,
    pub polys: Vec<PolyFile>,
}

impl InstanceFile {
    pub fn to_instance(&self) -> Result<Instance, String> {
        let polys = self
            .polys
            .iter()
            .enumerate()
            .map(|(i, p)| {
                Polynomial::from_terms(self.n, p.terms.iter().map(|t| (t.exps.clone(), t.coef)))
                    .map_err(|e| format!("polynomial {}: {e}", i + 1))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Instance::new(self.n, self.d, polys).map_err(|e| e.to_string())
    }

    /// Canonical form: terms in monomial order, zero coefficients and
    /// repeated monomials merged away.
    pub fn canonical(instance: &Instance) -> InstanceFile {
        InstanceFile {
            n: instance.n(),
            d: instance.d(),
            polys: instance
                .polys()
                .iter()
                .map(|p| PolyFile {
                    terms: p
                        .terms()
                        .map(|(m, c)| TermFile {
                            exps: m.exps().to_vec(),
                            coef: c,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

pub fn read_instance(path: &Path) -> Result<Instance, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let file: InstanceFile =
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    file.to_instance()
        .map_err(|e| format!("{}: {e}", path.display()))
}

/// SHA-256 of the canonical serialization.
pub fn digest(instance: &Instance) -> String {
    let bytes = serde_json::to_vec(&InstanceFile::canonical(instance)).expect("serializable");
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'a str,
    pub instance_digest: Option<String>,
    pub seed: Option<u64>,
    /// Unix seconds; `SOURCE_DATE_EPOCH` overrides the clock.
    pub timestamp: u64,
    pub payload: T,
}

impl<'a, T: Serialize> Envelope<'a, T> {
    pub fn new(
        command: &'a str,
        instance: Option<&Instance>,
        seed: Option<u64>,
        payload: T,
    ) -> Self {
        Envelope {
            tool: "cspoly",
            version: env!("CARGO_PKG_VERSION"),
            command,
            instance_digest: instance.map(digest),
            seed,
            timestamp: timestamp(),
            payload,
        }
    }
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
    {
        return t;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

/// Writes to `out` through a temporary file in the same directory, or to
/// stdout.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), String> {
    match out {
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .map_err(|e| format!("stdout: {e}"))
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(p) if !p.as_os_str().is_empty() => p,
                _ => Path::new("."),
            };
            let mut tmp = tempfile::NamedTempFile::new_in(dir)
                .map_err(|e| format!("{}: {e}", dir.display()))?;
            tmp.write_all(text.as_bytes())
                .map_err(|e| format!("{}: {e}", path.display()))?;
            tmp.persist(path)
                .map_err(|e| format!("{}: {e}", path.display()))?;
            Ok(())
        }
    }
}
