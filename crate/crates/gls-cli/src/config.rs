//! Run configuration: flat key-value text with a `[common]` section and one
//! section per subcommand. Flags override file values; the effective
//! configuration (defaults included) is echoed into every output header and
//! re-parses to an equivalent configuration.

use gls::error::{Error, Result};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    F64,
    /// f64 or the literal `inf`.
    F64OrInf,
    Usize,
    U64,
    U32,
    Bool,
    Str,
    /// Semicolon-separated `value:prob` pairs.
    Atoms,
    /// Comma-separated floats.
    F64List,
}

fn kind_check(kind: Kind, value: &str) -> bool {
    match kind {
        Kind::F64 => value.parse::<f64>().is_ok(),
        Kind::F64OrInf => value == "inf" || value.parse::<f64>().is_ok(),
        Kind::Usize => value.parse::<usize>().is_ok(),
        Kind::U64 => value.parse::<u64>().is_ok(),
        Kind::U32 => value.parse::<u32>().is_ok(),
        Kind::Bool => matches!(value, "true" | "false"),
        Kind::Str => true,
        Kind::Atoms => value.split(';').all(|a| {
            a.split_once(':')
                .map(|(v, p)| v.parse::<f64>().is_ok() && p.parse::<f64>().is_ok())
                .unwrap_or(false)
        }),
        Kind::F64List => value.split(',').all(|v| v.trim().parse::<f64>().is_ok()),
    }
}

const COMMON_KEYS: &[(&str, Kind)] = &[
    ("count", Kind::Usize),
    ("seed", Kind::U64),
    ("workers", Kind::Usize),
    ("out", Kind::Str),
];

const MODEL_KEYS: &[(&str, Kind)] = &[
    ("model", Kind::Str),
    ("sigma", Kind::F64),
    ("m", Kind::F64),
    ("scale", Kind::F64),
    ("atoms", Kind::Atoms),
    ("samples-file", Kind::Str),
];

const PGRID_KEYS: &[(&str, Kind)] = &[
    ("p-min", Kind::F64),
    ("p-max", Kind::F64),
    ("p-points", Kind::Usize),
];

const PSI_KEYS: &[(&str, Kind)] = &[
    ("psi", Kind::Str),
    ("psi-m", Kind::F64),
    ("psi-b", Kind::F64),
    ("psi-beta", Kind::F64),
    ("psi-r", Kind::F64),
    ("psi-file", Kind::Str),
];

fn allowed_keys(command: &str) -> Result<Vec<(&'static str, Kind)>> {
    let mut keys: Vec<(&str, Kind)> = COMMON_KEYS.to_vec();
    match command {
        "theta" => {
            keys.extend([("p", Kind::F64), ("q", Kind::F64), ("grid", Kind::Bool)]);
        }
        "moments" => {
            keys.extend(MODEL_KEYS);
            keys.extend(PGRID_KEYS);
            keys.extend([("n", Kind::U32), ("normalize", Kind::Str)]);
        }
        "glsnorm" | "antinorm" => {
            keys.extend(MODEL_KEYS);
            keys.extend(PGRID_KEYS);
            keys.extend(PSI_KEYS);
            if command == "antinorm" {
                keys.extend([("range-lo", Kind::F64), ("range-hi", Kind::F64)]);
            }
        }
        "bound" => {
            keys.extend([
                ("v", Kind::F64List),
                ("b", Kind::F64OrInf),
                ("p", Kind::F64OrInf),
            ]);
        }
        "tails" => {
            keys.extend(MODEL_KEYS);
            keys.extend([
                ("n", Kind::U32),
                ("normalize", Kind::Str),
                ("family", Kind::Str),
                ("family-m", Kind::F64),
                ("u-min", Kind::F64),
                ("u-max", Kind::F64),
                ("u-points", Kind::Usize),
                ("fit-count", Kind::Usize),
            ]);
        }
        "verify" => {}
        other => {
            return Err(Error::Parse(format!("unknown command {other:?}")));
        }
    }
    Ok(keys)
}

fn defaults(command: &str) -> Vec<(&'static str, &'static str)> {
    let mut d: Vec<(&'static str, &'static str)> = vec![("seed", "4672595"), ("workers", "0")];
    match command {
        "theta" => d.extend([("p", "2"), ("q", "4"), ("grid", "false")]),
        "moments" => d.extend([
            ("model", "exampleA"),
            ("p-min", "1"),
            ("p-max", "64"),
            ("p-points", "128"),
            ("n", "1"),
            ("normalize", "none"),
            ("count", "200000"),
        ]),
        "glsnorm" | "antinorm" => {
            d.extend([
                ("model", "exampleA"),
                ("psi", "natural"),
                ("p-min", "1"),
                ("p-max", "64"),
                ("p-points", "128"),
                ("count", "200000"),
            ]);
            if command == "antinorm" {
                // Naor-safe default range; widen with range-lo = 1 for the
                // literal Definition 2.1 form.
                d.push(("range-lo", "2"));
            }
        }
        "bound" => d.extend([("v", "1,1"), ("b", "inf"), ("p", "2")]),
        "tails" => d.extend([
            ("model", "exampleA"),
            ("n", "16"),
            ("normalize", "inv-sqrt-n"),
            ("family", "auto"),
            ("u-min", "1"),
            ("u-max", "3"),
            ("u-points", "9"),
            ("count", "1000000"),
        ]),
        "verify" => d.push(("count", "200000")),
        _ => {}
    }
    d
}

/// Validated, fully-merged configuration for one run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunConfig {
    pub command: String,
    map: BTreeMap<String, String>,
}

impl RunConfig {
    /// Merges defaults, the optional config file, and flag overrides (in
    /// that precedence order) and validates every key.
    pub fn build(
        command: &str,
        file_text: Option<&str>,
        overrides: &[(String, String)],
    ) -> Result<Self> {
        let allowed = allowed_keys(command)?;
        let mut map: BTreeMap<String, String> = defaults(command)
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        if let Some(text) = file_text {
            for (key, value, line) in parse_sections(text, command)? {
                check_key(&allowed, &key, &value, Some(line))?;
                map.insert(key, value);
            }
        }
        for (key, value) in overrides {
            check_key(&allowed, key, value, None)?;
            map.insert(key.clone(), value.clone());
        }
        Ok(Self {
            command: command.to_string(),
            map,
        })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.map.get(key).map(|s| s.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key)
            .ok_or_else(|| Error::Parse(format!("missing config key {key:?}")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.require(key)?;
        if v == "inf" {
            return Ok(f64::INFINITY);
        }
        v.parse()
            .map_err(|e| Error::Parse(format!("key {key}={v:?}: {e}")))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.require(key)?
            .parse()
            .map_err(|e| Error::Parse(format!("key {key}: {e}")))
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.require(key)?
            .parse()
            .map_err(|e| Error::Parse(format!("key {key}: {e}")))
    }

    pub fn u32(&self, key: &str) -> Result<u32> {
        self.require(key)?
            .parse()
            .map_err(|e| Error::Parse(format!("key {key}: {e}")))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.require(key)? {
            "true" => Ok(true),
            "false" => Ok(false),
            other => Err(Error::Parse(format!("key {key}: expected bool, got {other:?}"))),
        }
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.require(key)?
            .split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("key {key}: {e}")))
            })
            .collect()
    }

    /// Header block echoed into every output: one `# cfg` line per key.
    ///
    /// Execution-side keys (`workers`, `out`) are excluded: they cannot
    /// affect any computed byte, and leaving them out keeps outputs
    /// byte-identical across worker counts and destinations.
    pub fn header_lines(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# cfg command = {}", self.command);
        for (k, v) in &self.map {
            if k == "workers" || k == "out" {
                continue;
            }
            let _ = writeln!(out, "# cfg {k} = {v}");
        }
        out
    }

    /// Rebuilds the configuration from an output header (round trip).
    pub fn from_header(text: &str) -> Result<Self> {
        let mut command = None;
        let mut pairs = Vec::new();
        for line in text.lines() {
            let Some(rest) = line.trim().strip_prefix("# cfg ") else {
                continue;
            };
            let (key, value) = rest
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad cfg line {line:?}")))?;
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            if key == "command" {
                command = Some(value);
            } else {
                pairs.push((key, value));
            }
        }
        let command = command.ok_or_else(|| Error::Parse("no `# cfg command` line".into()))?;
        // Validate against the command's schema; the echoed map already
        // contains the effective defaults.
        let allowed = allowed_keys(&command)?;
        let mut map = BTreeMap::new();
        for (k, v) in pairs {
            check_key(&allowed, &k, &v, None)?;
            map.insert(k, v);
        }
        Ok(Self { command, map })
    }

    /// Applies flag overrides on top of an existing configuration.
    pub fn with_overrides(mut self, overrides: &[(String, String)]) -> Result<Self> {
        let allowed = allowed_keys(&self.command)?;
        for (key, value) in overrides {
            check_key(&allowed, key, value, None)?;
            self.map.insert(key.clone(), value.clone());
        }
        Ok(self)
    }

    /// True when `text` looks like an echoed output header rather than a
    /// plain config file.
    pub fn is_header(text: &str) -> bool {
        text.lines()
            .any(|l| l.trim().starts_with("# cfg command"))
    }
}

fn check_key(allowed: &[(&str, Kind)], key: &str, value: &str, line: Option<usize>) -> Result<()> {
    let at = |msg: String| match line {
        Some(l) => Error::Parse(format!("line {l}: {msg}")),
        None => Error::Parse(msg),
    };
    let Some((_, kind)) = allowed.iter().find(|(k, _)| *k == key) else {
        return Err(at(format!("unknown key {key:?}")));
    };
    if !kind_check(*kind, value) {
        return Err(at(format!("key {key}: invalid value {value:?}")));
    }
    Ok(())
}

/// Extracts (key, value, line) triples from the `[common]` section, the
/// `[<command>]` section, and any leading section-less header.
fn parse_sections(text: &str, command: &str) -> Result<Vec<(String, String, usize)>> {
    let mut active = true; // leading keys count as common
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name
                .strip_suffix(']')
                .ok_or_else(|| Error::Parse(format!("line {}: unterminated section", i + 1)))?
                .trim();
            if name != "common" && allowed_keys(name).is_err() {
                return Err(Error::Parse(format!(
                    "line {}: unknown section [{name}]",
                    i + 1
                )));
            }
            active = name == "common" || name == command;
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("line {}: expected key = value", i + 1)))?;
        if active {
            out.push((key.trim().to_string(), value.trim().to_string(), i + 1));
        }
    }
    Ok(out)
}
