//! Scenario parameters, unit conventions and validation.
//!
//! Everything downstream works in one unit system: meters, seconds,
//! milliwatts and linear power ratios. The only exceptions are the two
//! configuration-facing quantities that are conventionally given in decibels:
//! the noise floor (`noise_dbm`, kept in dBm, see [`NetworkConfig::noise_mw`])
//! and the SINR thresholds (entered in dB, stored linear).
//!
//! AP density appears in the literature under two symbols (λ_a and λ_b). This
//! crate stores a single field, [`NetworkConfig::lambda_b`], for both.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// How distances behave at the arena edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum BoundaryMode {
    /// Periodic boundaries, minimum-image distances.
    #[default]
    Torus,
    /// Plain square, Euclidean distances, walls reflect.
    Plane,
}

impl fmt::Display for BoundaryMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryMode::Torus => f.write_str("torus"),
            BoundaryMode::Plane => f.write_str("plane"),
        }
    }
}

impl FromStr for BoundaryMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "torus" => Ok(BoundaryMode::Torus),
            "plane" => Ok(BoundaryMode::Plane),
            other => Err(format!("unknown boundary mode `{other}` (expected torus or plane)")),
        }
    }
}

/// Converts a power ratio in dB to a linear ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Converts a linear power ratio to dB.
pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

/// An SINR threshold as it was written down.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Threshold {
    Db(f64),
    Linear(f64),
}

impl Threshold {
    pub fn linear(self) -> f64 {
        match self {
            Threshold::Db(db) => db_to_linear(db),
            Threshold::Linear(x) => x,
        }
    }
}

/// A validated scenario. Build one through [`ConfigCandidate::validate`] (or
/// [`NetworkConfig::baseline`]); code that edits fields directly should
/// re-run [`NetworkConfig::revalidate`].
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkConfig {
    /// Sensor density, per m².
    pub lambda_s: f64,
    /// MDC density, per m².
    pub lambda_m: f64,
    /// AP density, per m².
    pub lambda_b: f64,
    /// Sensor transmit power, mW.
    pub p_s: f64,
    /// MDC transmit power, mW.
    pub p_m: f64,
    /// Sensor sleep power, mW.
    pub p_sleep: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Thermal noise, dBm. `-inf` means a noiseless channel.
    pub noise_dbm: f64,
    /// Sensor contact radius, m.
    pub r_s: f64,
    /// AP aggregation radius, m.
    pub r_a: f64,
    /// MDC speed, m/s.
    pub v: f64,
    /// Walk duration, s.
    pub w: f64,
    /// Pause duration, s.
    pub p: f64,
    /// Sensor-to-MDC decode threshold, linear.
    pub t_s: f64,
    /// MDC-to-AP decode threshold, linear.
    pub t_a: f64,
    /// Aggregation trigger, packets.
    pub k: u32,
    /// Packet arrival rate per sensor, packets/s.
    pub xi: f64,
    /// Slot length, s.
    pub delta: f64,
    /// Simulation arena edge, m.
    pub arena_side: f64,
    pub boundary_mode: BoundaryMode,
}

impl NetworkConfig {
    /// The validation scenario: 1000 m arena, λ_s = λ_m = 10⁻³, λ_b = 10⁻⁴,
    /// R_s = 10 m, R_a = 20 m, v = 5 m/s, w = 10 s, p = 2 s, T_s = 10 dB,
    /// T_a = 0 dB, K = 64, ξ = 0.6 pkt/s, δ = 0.1 s.
    pub fn baseline() -> NetworkConfig {
        ConfigCandidate::baseline()
            .validate()
            .expect("baseline parameters are valid")
    }

    /// Noise power σ² in mW.
    pub fn noise_mw(&self) -> f64 {
        if self.noise_dbm == f64::NEG_INFINITY {
            0.0
        } else {
            db_to_linear(self.noise_dbm)
        }
    }

    pub fn t_s_db(&self) -> f64 {
        linear_to_db(self.t_s)
    }

    pub fn t_a_db(&self) -> f64 {
        linear_to_db(self.t_a)
    }

    pub fn to_candidate(&self) -> ConfigCandidate {
        ConfigCandidate {
            lambda_s: self.lambda_s,
            lambda_m: self.lambda_m,
            lambda_b: self.lambda_b,
            p_s: self.p_s,
            p_m: self.p_m,
            p_sleep: self.p_sleep,
            alpha: self.alpha,
            noise_dbm: self.noise_dbm,
            r_s: self.r_s,
            r_a: self.r_a,
            v: self.v,
            w: self.w,
            p: self.p,
            t_s: Threshold::Linear(self.t_s),
            t_a: Threshold::Linear(self.t_a),
            k: f64::from(self.k),
            xi: self.xi,
            delta: self.delta,
            arena_side: self.arena_side,
            boundary_mode: self.boundary_mode,
        }
    }

    pub fn revalidate(&self) -> Result<NetworkConfig, ConfigError> {
        self.to_candidate().validate()
    }

    /// Soft problems that do not block the model.
    pub fn warnings(&self) -> Vec<ConfigWarning> {
        let mut out = Vec::new();
        if self.lambda_m <= self.lambda_b {
            out.push(ConfigWarning::FewerMdcsThanAps {
                lambda_m: self.lambda_m,
                lambda_b: self.lambda_b,
            });
        }
        out
    }

    /// The configuration as `key = value` lines, parseable by [`parse_config`].
    pub fn to_config_string(&self) -> String {
        let mut s = String::new();
        for key in CONFIG_KEYS {
            let value = match key.name {
                "boundary_mode" => self.boundary_mode.to_string(),
                name => format_number(self.get(name).expect("known key")),
            };
            s.push_str(&format!("{} = {}\n", key.name, value));
        }
        s
    }

    /// Reads a numeric parameter by config key or field alias.
    pub fn get(&self, name: &str) -> Option<f64> {
        let key = resolve_key(name)?;
        Some(match key {
            "lambda_s_per_m2" => self.lambda_s,
            "lambda_m_per_m2" => self.lambda_m,
            "lambda_b_per_m2" => self.lambda_b,
            "p_s_mw" => self.p_s,
            "p_m_mw" => self.p_m,
            "p_sleep_mw" => self.p_sleep,
            "alpha" => self.alpha,
            "noise_dbm" => self.noise_dbm,
            "r_s_m" => self.r_s,
            "r_a_m" => self.r_a,
            "v_mps" => self.v,
            "walk_s" => self.w,
            "pause_s" => self.p,
            "t_s_db" => self.t_s_db(),
            "t_a_db" => self.t_a_db(),
            "k_packets" => f64::from(self.k),
            "xi_pps" => self.xi,
            "delta_s" => self.delta,
            "arena_side_m" => self.arena_side,
            _ => return None,
        })
    }

    /// Returns a copy with one numeric parameter replaced and revalidated.
    pub fn with_param(&self, name: &str, value: f64) -> Result<NetworkConfig, ParamError> {
        let mut c = self.to_candidate();
        c.set(name, value)?;
        c.validate().map_err(ParamError::Invalid)
    }
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig::baseline()
    }
}

fn format_number(x: f64) -> String {
    if x == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        // `{}` on f64 is the shortest representation that round-trips.
        format!("{x}")
    }
}

/// Unvalidated parameters, as read from a file or assembled by hand.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigCandidate {
    pub lambda_s: f64,
    pub lambda_m: f64,
    pub lambda_b: f64,
    pub p_s: f64,
    pub p_m: f64,
    pub p_sleep: f64,
    pub alpha: f64,
    pub noise_dbm: f64,
    pub r_s: f64,
    pub r_a: f64,
    pub v: f64,
    pub w: f64,
    pub p: f64,
    pub t_s: Threshold,
    pub t_a: Threshold,
    /// Kept as a float so that a fractional or negative K is reported rather
    /// than silently truncated.
    pub k: f64,
    pub xi: f64,
    pub delta: f64,
    pub arena_side: f64,
    pub boundary_mode: BoundaryMode,
}

impl ConfigCandidate {
    pub fn baseline() -> ConfigCandidate {
        ConfigCandidate {
            lambda_s: 1e-3,
            lambda_m: 1e-3,
            lambda_b: 1e-4,
            p_s: 5.0,
            p_m: 10.0,
            p_sleep: 0.01,
            alpha: 3.0,
            noise_dbm: -121.0,
            r_s: 10.0,
            r_a: 20.0,
            v: 5.0,
            w: 10.0,
            p: 2.0,
            t_s: Threshold::Db(10.0),
            t_a: Threshold::Db(0.0),
            k: 64.0,
            xi: 0.6,
            delta: 0.1,
            arena_side: 1000.0,
            boundary_mode: BoundaryMode::Torus,
        }
    }

    /// Sets a numeric parameter by config key or field alias. Thresholds are
    /// taken in dB.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), ParamError> {
        let key = resolve_key(name).ok_or_else(|| ParamError::Unknown(name.to_string()))?;
        match key {
            "lambda_s_per_m2" => self.lambda_s = value,
            "lambda_m_per_m2" => self.lambda_m = value,
            "lambda_b_per_m2" => self.lambda_b = value,
            "p_s_mw" => self.p_s = value,
            "p_m_mw" => self.p_m = value,
            "p_sleep_mw" => self.p_sleep = value,
            "alpha" => self.alpha = value,
            "noise_dbm" => self.noise_dbm = value,
            "r_s_m" => self.r_s = value,
            "r_a_m" => self.r_a = value,
            "v_mps" => self.v = value,
            "walk_s" => self.w = value,
            "pause_s" => self.p = value,
            "t_s_db" => self.t_s = Threshold::Db(value),
            "t_a_db" => self.t_a = Threshold::Db(value),
            "k_packets" => self.k = value,
            "xi_pps" => self.xi = value,
            "delta_s" => self.delta = value,
            "arena_side_m" => self.arena_side = value,
            _ => return Err(ParamError::NotNumeric(name.to_string())),
        }
        Ok(())
    }

    /// Checks every invariant and converts thresholds to linear. All
    /// violations are reported, not just the first.
    pub fn validate(&self) -> Result<NetworkConfig, ConfigError> {
        let mut v = Vec::new();
        let t_s = self.t_s.linear();
        let t_a = self.t_a.linear();

        let positive: [(&'static str, f64); 18] = [
            ("lambda_s", self.lambda_s),
            ("lambda_m", self.lambda_m),
            ("lambda_b", self.lambda_b),
            ("p_s", self.p_s),
            ("p_m", self.p_m),
            ("p_sleep", self.p_sleep),
            ("alpha", self.alpha),
            ("r_s", self.r_s),
            ("r_a", self.r_a),
            ("v", self.v),
            ("w", self.w),
            ("p", self.p),
            ("t_s", t_s),
            ("t_a", t_a),
            ("k", self.k),
            ("xi", self.xi),
            ("delta", self.delta),
            ("arena_side", self.arena_side),
        ];
        for (name, x) in positive {
            if x.is_nan() || x.is_infinite() {
                v.push(ConfigViolation::NotFinite(name));
            } else if x <= 0.0 {
                v.push(ConfigViolation::NonPositiveParameter(name));
            }
        }
        if self.noise_dbm.is_nan() || self.noise_dbm == f64::INFINITY {
            v.push(ConfigViolation::NotFinite("noise_dbm"));
        }
        if self.k.is_finite() && self.k > 0.0 && (self.k.fract() != 0.0 || self.k > f64::from(u32::MAX)) {
            v.push(ConfigViolation::NotAnInteger { name: "k", value: self.k });
        }
        if self.alpha.is_finite() && self.alpha > 0.0 && self.alpha <= 2.0 {
            v.push(ConfigViolation::PathLossTooSmall(self.alpha));
        }
        if self.r_s > 0.0 && self.v > 0.0 && self.w > 0.0 {
            let min = 2.0 * self.r_s / self.v;
            if self.w <= min {
                v.push(ConfigViolation::WalkTooShort { w: self.w, min });
            }
        }
        if self.boundary_mode == BoundaryMode::Torus && self.arena_side > 0.0 {
            let max = self.arena_side / 4.0;
            for (name, r) in [("r_s", self.r_s), ("r_a", self.r_a)] {
                if r > max {
                    v.push(ConfigViolation::ArenaTooSmall { radius_name: name, radius: r, arena_side: self.arena_side });
                }
            }
        }

        if !v.is_empty() {
            return Err(ConfigError { violations: v });
        }
        Ok(NetworkConfig {
            lambda_s: self.lambda_s,
            lambda_m: self.lambda_m,
            lambda_b: self.lambda_b,
            p_s: self.p_s,
            p_m: self.p_m,
            p_sleep: self.p_sleep,
            alpha: self.alpha,
            noise_dbm: self.noise_dbm,
            r_s: self.r_s,
            r_a: self.r_a,
            v: self.v,
            w: self.w,
            p: self.p,
            t_s,
            t_a,
            k: self.k as u32,
            xi: self.xi,
            delta: self.delta,
            arena_side: self.arena_side,
            boundary_mode: self.boundary_mode,
        })
    }
}

impl Default for ConfigCandidate {
    fn default() -> Self {
        ConfigCandidate::baseline()
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConfigViolation {
    #[error("{0} must be strictly positive")]
    NonPositiveParameter(&'static str),
    #[error("{0} must be finite")]
    NotFinite(&'static str),
    #[error("{name} must be a positive integer, got {value}")]
    NotAnInteger { name: &'static str, value: f64 },
    #[error("walk duration w = {w} s must exceed 2 R_s / v = {min} s")]
    WalkTooShort { w: f64, min: f64 },
    #[error("path-loss exponent alpha = {0} must exceed 2")]
    PathLossTooSmall(f64),
    #[error("{radius_name} = {radius} m exceeds a quarter of the arena side {arena_side} m under torus wrap")]
    ArenaTooSmall { radius_name: &'static str, radius: f64, arena_side: f64 },
}

/// Every invariant violated by a candidate.
#[derive(Clone, Debug, PartialEq, Error)]
pub struct ConfigError {
    pub violations: Vec<ConfigViolation>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid configuration: ")?;
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ConfigWarning {
    /// The AP activity model assumes more MDCs than APs.
    FewerMdcsThanAps { lambda_m: f64, lambda_b: f64 },
}

impl fmt::Display for ConfigWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigWarning::FewerMdcsThanAps { lambda_m, lambda_b } => write!(
                f,
                "lambda_m = {lambda_m:e} does not exceed lambda_b = {lambda_b:e}; AP association model assumes lambda_m > lambda_b"
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParamError {
    #[error("unknown parameter `{0}`")]
    Unknown(String),
    #[error("parameter `{0}` is not numeric")]
    NotNumeric(String),
    #[error(transparent)]
    Invalid(ConfigError),
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ConfigParseError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`: {reason}")]
    BadValue { line: usize, key: String, value: String, reason: String },
    #[error(transparent)]
    Invalid(#[from] ConfigError),
}

/// One entry of the config file schema.
#[derive(Clone, Copy, Debug)]
pub struct ConfigKey {
    /// Key as written in config files, unit suffix included.
    pub name: &'static str,
    /// Short field name accepted as an alias (e.g. on the sweep command line).
    pub field: &'static str,
    pub doc: &'static str,
}

pub const CONFIG_KEYS: &[ConfigKey] = &[
    ConfigKey { name: "lambda_s_per_m2", field: "lambda_s", doc: "sensor density" },
    ConfigKey { name: "lambda_m_per_m2", field: "lambda_m", doc: "MDC density" },
    ConfigKey { name: "lambda_b_per_m2", field: "lambda_b", doc: "AP density (also written lambda_a)" },
    ConfigKey { name: "p_s_mw", field: "P_s", doc: "sensor transmit power" },
    ConfigKey { name: "p_m_mw", field: "P_m", doc: "MDC transmit power" },
    ConfigKey { name: "p_sleep_mw", field: "P_sleep", doc: "sensor sleep power" },
    ConfigKey { name: "alpha", field: "alpha", doc: "path-loss exponent" },
    ConfigKey { name: "noise_dbm", field: "noise", doc: "thermal noise power" },
    ConfigKey { name: "r_s_m", field: "R_s", doc: "sensor contact radius" },
    ConfigKey { name: "r_a_m", field: "R_a", doc: "AP aggregation radius" },
    ConfigKey { name: "v_mps", field: "v", doc: "MDC speed" },
    ConfigKey { name: "walk_s", field: "w", doc: "walk duration" },
    ConfigKey { name: "pause_s", field: "p", doc: "pause duration" },
    ConfigKey { name: "t_s_db", field: "T_s", doc: "MDC decode threshold" },
    ConfigKey { name: "t_a_db", field: "T_a", doc: "AP decode threshold" },
    ConfigKey { name: "k_packets", field: "K", doc: "aggregation trigger" },
    ConfigKey { name: "xi_pps", field: "xi", doc: "packet arrival rate" },
    ConfigKey { name: "delta_s", field: "delta", doc: "slot length" },
    ConfigKey { name: "arena_side_m", field: "arena_side", doc: "arena edge length" },
    ConfigKey { name: "boundary_mode", field: "boundary_mode", doc: "torus or plane" },
];

/// Maps a config key, a field alias (case-insensitive) or `lambda_a` to the
/// canonical config key.
pub fn resolve_key(name: &str) -> Option<&'static str> {
    let n = name.trim();
    if n.eq_ignore_ascii_case("lambda_a") || n.eq_ignore_ascii_case("lambda_a_per_m2") {
        return Some("lambda_b_per_m2");
    }
    CONFIG_KEYS
        .iter()
        .find(|k| k.name == n || k.field.eq_ignore_ascii_case(n))
        .map(|k| k.name)
}

/// Parses a flat `key = value` config. `#` starts a comment. Keys that are
/// not given keep their baseline value; unknown or repeated keys are errors.
pub fn parse_config(text: &str) -> Result<NetworkConfig, ConfigParseError> {
    parse_candidate(text)?.validate().map_err(ConfigParseError::from)
}

pub fn parse_candidate(text: &str) -> Result<ConfigCandidate, ConfigParseError> {
    let mut cand = ConfigCandidate::baseline();
    let mut seen: Vec<&'static str> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| ConfigParseError::Syntax {
            line,
            text: raw.to_string(),
        })?;
        let (key, value) = (key.trim(), value.trim());
        // File keys must be spelled exactly; aliases are a command-line convenience.
        let canonical = CONFIG_KEYS
            .iter()
            .find(|k| k.name == key)
            .map(|k| k.name)
            .ok_or_else(|| ConfigParseError::UnknownKey { line, key: key.to_string() })?;
        if seen.contains(&canonical) {
            return Err(ConfigParseError::DuplicateKey { line, key: key.to_string() });
        }
        seen.push(canonical);
        let bad = |reason: String| ConfigParseError::BadValue {
            line,
            key: key.to_string(),
            value: value.to_string(),
            reason,
        };
        if canonical == "boundary_mode" {
            cand.boundary_mode = value.parse().map_err(bad)?;
        } else {
            let x: f64 = value.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?;
            cand.set(canonical, x).map_err(|e| bad(e.to_string()))?;
        }
    }
    Ok(cand)
}
