//! Flat `key = value` run configuration.
//!
//! Grammar: UTF-8 lines, `#` starts a comment, blank lines ignored,
//! `key = value` with whitespace trimmed. Unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use jpm_core::circuit::DeviceConfig;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridScale {
    Linear,
    Log,
}

/// Time sampling grid (seconds).
#[derive(Debug, Clone, Copy)]
pub struct TimeGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    pub scale: GridScale,
}

impl TimeGrid {
    pub fn samples(&self) -> Vec<f64> {
        let n = self.points;
        match self.scale {
            GridScale::Linear => (0..n)
                .map(|k| self.start + (self.stop - self.start) * k as f64 / (n - 1) as f64)
                .collect(),
            GridScale::Log => {
                let (l0, l1) = (self.start.ln(), self.stop.ln());
                (0..n)
                    .map(|k| (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp())
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub device: DeviceConfig,
    /// Optional tunneling-rate overrides (ordinary Hz); WKB rates are used
    /// where absent.
    pub gamma0_hz: Option<f64>,
    pub gamma1_hz: Option<f64>,
    pub gamma2_hz: Option<f64>,
    /// Tunneling rate of the first excited state at the one-photon bias.
    pub gamma1_two_level_hz: f64,
    pub n_fock: usize,
    pub t_grid: TimeGrid,
    pub margin: f64,
    pub mleq_factor: f64,
    /// Temperature for the thermal-activation validity check, K.
    pub temperature_k: Option<f64>,
    /// Initial state of `simulate`: junction level (0..2) and photon number.
    pub initial_jpm: usize,
    pub initial_fock: usize,
    /// Include the first-order dressed correction in `simulate`.
    pub dressed: bool,
}

const REQUIRED_KEYS: &[&str] = &[
    "c_farad",
    "i0_ampere",
    "beta",
    "c_res_farad",
    "l_res_henry",
    "lambda2",
    "gamma10_hz",
    "gamma22_hz",
    "gamma11_hz",
    "gap_hz",
];

const OPTIONAL_KEYS: &[&str] = &[
    "c_coup_farad",
    "gamma0_hz",
    "gamma1_hz",
    "gamma2_hz",
    "gamma1_two_level_hz",
    "n_fock",
    "t_start_s",
    "t_stop_s",
    "t_points",
    "t_scale",
    "margin",
    "mleq_factor",
    "temperature_k",
    "initial_jpm",
    "initial_fock",
    "dressed",
];

pub fn parse_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut kv: BTreeMap<String, (String, usize)> = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError(format!(
                "{}:{}: expected `key = value`, got `{line}`",
                path.display(),
                lineno + 1
            )));
        };
        let key = k.trim().to_string();
        if !REQUIRED_KEYS.contains(&key.as_str()) && !OPTIONAL_KEYS.contains(&key.as_str()) {
            return Err(ConfigError(format!(
                "{}:{}: unknown key `{key}`",
                path.display(),
                lineno + 1
            )));
        }
        if kv.insert(key.clone(), (v.trim().to_string(), lineno + 1)).is_some() {
            return Err(ConfigError(format!(
                "{}:{}: duplicate key `{key}`",
                path.display(),
                lineno + 1
            )));
        }
    }
    let missing: Vec<&str> = REQUIRED_KEYS
        .iter()
        .filter(|k| !kv.contains_key(**k))
        .copied()
        .collect();
    if !missing.is_empty() {
        return Err(ConfigError(format!(
            "{}: missing required keys: {}",
            path.display(),
            missing.join(", ")
        )));
    }

    let f64_of = |key: &str| -> Result<f64, ConfigError> {
        let (v, line) = &kv[key];
        v.parse::<f64>()
            .map_err(|_| ConfigError(format!("{}:{line}: `{key}` is not a number: `{v}`", path.display())))
    };
    let opt_f64 = |key: &str| -> Result<Option<f64>, ConfigError> {
        match kv.get(key) {
            None => Ok(None),
            Some((v, line)) => v
                .parse::<f64>()
                .map(Some)
                .map_err(|_| ConfigError(format!("{}:{line}: `{key}` is not a number: `{v}`", path.display()))),
        }
    };
    let opt_usize = |key: &str, default: usize| -> Result<usize, ConfigError> {
        match kv.get(key) {
            None => Ok(default),
            Some((v, line)) => v
                .parse::<usize>()
                .map_err(|_| ConfigError(format!("{}:{line}: `{key}` is not an integer: `{v}`", path.display()))),
        }
    };

    let device = DeviceConfig {
        c: f64_of("c_farad")?,
        i0: f64_of("i0_ampere")?,
        beta: f64_of("beta")?,
        c_res: f64_of("c_res_farad")?,
        l_res: f64_of("l_res_henry")?,
        c_coup: opt_f64("c_coup_farad")?,
        lambda2: f64_of("lambda2")?,
        gamma10: f64_of("gamma10_hz")?,
        gamma22: f64_of("gamma22_hz")?,
        gamma11: f64_of("gamma11_hz")?,
        gap_frequency: f64_of("gap_hz")?,
    };
    device
        .validate()
        .map_err(|e| ConfigError(format!("{}: invalid configuration: {e}", path.display())))?;

    let scale = match kv.get("t_scale").map(|(v, _)| v.as_str()).unwrap_or("linear") {
        "linear" => GridScale::Linear,
        "log" => GridScale::Log,
        other => {
            return Err(ConfigError(format!(
                "{}: `t_scale` must be `linear` or `log`, got `{other}`",
                path.display()
            )))
        }
    };
    let t_grid = TimeGrid {
        start: opt_f64("t_start_s")?.unwrap_or(0.0),
        stop: opt_f64("t_stop_s")?.unwrap_or(10e-6),
        points: opt_usize("t_points", 201)?,
        scale,
    };
    if t_grid.points < 2 {
        return Err(ConfigError(format!(
            "{}: `t_points` must be at least 2",
            path.display()
        )));
    }
    if !(t_grid.stop > t_grid.start) {
        return Err(ConfigError(format!(
            "{}: time grid must be ordered (t_start_s < t_stop_s)",
            path.display()
        )));
    }
    if scale == GridScale::Log && t_grid.start <= 0.0 {
        return Err(ConfigError(format!(
            "{}: log grid requires `t_start_s` > 0",
            path.display()
        )));
    }

    let dressed = match kv.get("dressed").map(|(v, _)| v.as_str()) {
        None => false,
        Some("true") => true,
        Some("false") => false,
        Some(other) => {
            return Err(ConfigError(format!(
                "{}: `dressed` must be true or false, got `{other}`",
                path.display()
            )))
        }
    };

    Ok(RunConfig {
        device,
        gamma0_hz: opt_f64("gamma0_hz")?,
        gamma1_hz: opt_f64("gamma1_hz")?,
        gamma2_hz: opt_f64("gamma2_hz")?,
        gamma1_two_level_hz: opt_f64("gamma1_two_level_hz")?.unwrap_or(19e6),
        n_fock: opt_usize("n_fock", 6)?,
        t_grid,
        margin: opt_f64("margin")?.unwrap_or(jpm_core::circuit::DEFAULT_N_MAX_MARGIN),
        mleq_factor: opt_f64("mleq_factor")?.unwrap_or(10.0),
        temperature_k: opt_f64("temperature_k")?,
        initial_jpm: opt_usize("initial_jpm", 0)?,
        initial_fock: opt_usize("initial_fock", 2)?,
        dressed,
    })
}

/// Set a sweepable numeric field by name (used by `sweep`).
pub fn set_field(cfg: &mut RunConfig, field: &str, value: f64) -> Result<(), ConfigError> {
    match field {
        "c_farad" => cfg.device.c = value,
        "i0_ampere" => cfg.device.i0 = value,
        "beta" => cfg.device.beta = value,
        "c_res_farad" => cfg.device.c_res = value,
        "l_res_henry" => cfg.device.l_res = value,
        "lambda2" => cfg.device.lambda2 = value,
        "gamma10_hz" => cfg.device.gamma10 = value,
        "gamma22_hz" => cfg.device.gamma22 = value,
        "gamma11_hz" => cfg.device.gamma11 = value,
        "gamma0_hz" => cfg.gamma0_hz = Some(value),
        "gamma1_hz" => cfg.gamma1_hz = Some(value),
        "gamma2_hz" => cfg.gamma2_hz = Some(value),
        other => {
            return Err(ConfigError(format!("field `{other}` is not sweepable")));
        }
    }
    Ok(())
}
