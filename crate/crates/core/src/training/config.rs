//! Training hyperparameters, named presets and `key = value` config files.
//!
//! Resolution order, lowest to highest precedence: built-in defaults, the
//! named preset, entries of a config file, then explicit overrides (CLI flags).

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::str::FromStr;

use crate::model::{DistanceNorm, ModelKind};
use crate::{Error, Result};

/// Open phase interval used for initialization and constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseInterval {
    pub lo: f64,
    pub hi: f64,
}

impl PhaseInterval {
    pub const PI: PhaseInterval = PhaseInterval { lo: -PI, hi: PI };
    pub const HALF_PI: PhaseInterval = PhaseInterval {
        lo: -FRAC_PI_2,
        hi: FRAC_PI_2,
    };

    pub fn new(lo: f64, hi: f64) -> std::result::Result<Self, String> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(format!("invalid interval ({lo}, {hi})"));
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

impl fmt::Display for PhaseInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self == Self::PI {
            f.write_str("pi")
        } else if *self == Self::HALF_PI {
            f.write_str("half-pi")
        } else {
            write!(f, "{},{}", self.lo, self.hi)
        }
    }
}

impl FromStr for PhaseInterval {
    type Err = String;

    /// Accepts `pi`, `half-pi` or `lo,hi`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "pi" => Ok(Self::PI),
            "half-pi" | "pi/2" => Ok(Self::HALF_PI),
            other => {
                let (lo, hi) = parse_pair(other)?;
                PhaseInterval::new(lo, hi)
            }
        }
    }
}

fn parse_pair(s: &str) -> std::result::Result<(f64, f64), String> {
    let s = s.trim().trim_start_matches('(').trim_end_matches(')');
    let (lo, hi) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("`{lo}`: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("`{hi}`: {e}"))?;
    Ok((lo, hi))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintMode {
    None,
    Clamp,
    Wrap,
}

impl fmt::Display for ConstraintMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintMode::None => "none",
            ConstraintMode::Clamp => "clamp",
            ConstraintMode::Wrap => "wrap",
        })
    }
}

impl FromStr for ConstraintMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(ConstraintMode::None),
            "clamp" => Ok(ConstraintMode::Clamp),
            "wrap" => Ok(ConstraintMode::Wrap),
            other => Err(format!(
                "unknown constraint mode `{other}` (expected none, clamp, wrap)"
            )),
        }
    }
}

/// How the projection-penalty gate measures closeness to {0, 1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateMode {
    /// `|(v − 1)·v| < γm`.
    Absolute,
    /// `(v − 1)·v < γm`, which always holds for `v ∈ (0, 1)`.
    Signed,
}

impl fmt::Display for GateMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateMode::Absolute => "abs",
            GateMode::Signed => "signed",
        })
    }
}

impl FromStr for GateMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "abs" | "absolute" => Ok(GateMode::Absolute),
            "signed" => Ok(GateMode::Signed),
            other => Err(format!("unknown gate `{other}` (expected abs, signed)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub model: ModelKind,
    pub norm: DistanceNorm,
    pub dim: usize,
    pub batch_size: usize,
    /// Negatives per positive.
    pub negatives: usize,
    /// Fixed margin γ.
    pub gamma: f64,
    /// Projection-penalty weight α.
    pub alpha: f64,
    /// Gate threshold γm.
    pub gamma_m: f64,
    /// Gate multiplier β applied away from {0, 1}.
    pub beta: f64,
    pub gate: GateMode,
    pub adversarial_temperature: f64,
    pub learning_rate: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_epsilon: f64,
    /// Multiply the learning rate by `lr_decay_factor` every this many steps (0 disables).
    pub lr_decay_every: usize,
    pub lr_decay_factor: f64,
    pub max_steps: usize,
    pub phase_init: PhaseInterval,
    pub phase_constraint: ConstraintMode,
    pub constraint_interval: PhaseInterval,
    /// Entity coordinates start in `(−entity_init, entity_init)`.
    pub entity_init: f64,
    pub ab_init: (f64, f64),
    pub filter_negatives: bool,
    /// Validation MRR every this many steps (0 disables).
    pub valid_every: usize,
    pub log_every: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            model: ModelKind::RotPro,
            norm: DistanceNorm::Modulus,
            dim: 100,
            batch_size: 256,
            negatives: 64,
            gamma: 6.0,
            alpha: 0.0005,
            gamma_m: 1e-6,
            beta: 1.5,
            gate: GateMode::Absolute,
            adversarial_temperature: 1.0,
            learning_rate: 1e-4,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_epsilon: 1e-8,
            lr_decay_every: 0,
            lr_decay_factor: 0.1,
            max_steps: 1000,
            phase_init: PhaseInterval::PI,
            phase_constraint: ConstraintMode::Clamp,
            constraint_interval: PhaseInterval::PI,
            entity_init: 1.0,
            ab_init: (0.5, 1.0),
            filter_negatives: false,
            valid_every: 0,
            log_every: 100,
            seed: 0,
        }
    }
}

pub const PRESETS: [&str; 6] = [
    "fb15k-237",
    "wn18rr",
    "yago3-10",
    "countries-s1",
    "countries-s2",
    "countries-s3",
];

/// Key order used for echoes and config files.
pub const KEYS: [&str; 28] = [
    "model",
    "norm",
    "dim",
    "batch_size",
    "negatives",
    "gamma",
    "alpha",
    "gamma_m",
    "beta",
    "gate",
    "adversarial_temperature",
    "learning_rate",
    "adam_beta1",
    "adam_beta2",
    "adam_epsilon",
    "lr_decay_every",
    "lr_decay_factor",
    "max_steps",
    "phase_init",
    "phase_constraint",
    "constraint_interval",
    "entity_init",
    "ab_init",
    "filter_negatives",
    "valid_every",
    "log_every",
    "seed",
    "preset",
];

impl TrainConfig {
    /// Defaults overlaid with a named preset.
    ///
    /// The loss hyperparameters, dimension and batch size are the published
    /// best settings; step budgets and learning rates are sized for a single
    /// CPU.
    pub fn preset(name: &str) -> Result<Self> {
        let mut c = TrainConfig::default();
        let (dim, batch, gamma, gamma_m, beta, alpha) = match name {
            "fb15k-237" => (1000, 1024, 9.0, 1e-6, 1.5, 0.001),
            "wn18rr" => (500, 512, 4.0, 1e-6, 1.3, 0.0003),
            "yago3-10" => (500, 1024, 16.0, 1e-6, 1.5, 0.0005),
            "countries-s1" | "countries-s2" | "countries-s3" => (500, 512, 0.1, 1e-6, 1.5, 0.0005),
            other => {
                return Err(Error::Config {
                    key: "preset".into(),
                    reason: format!(
                        "unknown preset `{other}`; available: {}",
                        PRESETS.join(", ")
                    ),
                })
            }
        };
        c.dim = dim;
        c.batch_size = batch;
        c.gamma = gamma;
        c.gamma_m = gamma_m;
        c.beta = beta;
        c.alpha = alpha;
        // Entities start inside the margin-scaled range used by the rotation baseline.
        c.entity_init = (gamma + 2.0) / dim as f64;
        match name {
            "fb15k-237" => {
                c.negatives = 256;
                c.learning_rate = 5e-5;
                c.max_steps = 100_000;
            }
            "wn18rr" => {
                c.negatives = 1024;
                c.learning_rate = 5e-5;
                c.max_steps = 80_000;
            }
            "yago3-10" => {
                c.negatives = 400;
                c.learning_rate = 2e-3;
                c.max_steps = 100_000;
            }
            _ => {
                c.negatives = 16;
                c.learning_rate = 2e-3;
                c.max_steps = 1500;
                c.adversarial_temperature = 1.0;
                c.phase_init = PhaseInterval::HALF_PI;
                c.phase_constraint = ConstraintMode::Clamp;
                c.constraint_interval = PhaseInterval::HALF_PI;
            }
        }
        Ok(c)
    }

    /// Sets one field from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let err = |reason: String| Error::Config {
            key: key.to_string(),
            reason,
        };
        fn num<T: FromStr>(v: &str) -> std::result::Result<T, String>
        where
            T::Err: fmt::Display,
        {
            v.parse::<T>().map_err(|e| format!("`{v}`: {e}"))
        }
        match key {
            "model" => self.model = value.parse().map_err(err)?,
            "norm" => self.norm = value.parse().map_err(err)?,
            "dim" => self.dim = num(value).map_err(err)?,
            "batch_size" => self.batch_size = num(value).map_err(err)?,
            "negatives" => self.negatives = num(value).map_err(err)?,
            "gamma" => self.gamma = num(value).map_err(err)?,
            "alpha" => self.alpha = num(value).map_err(err)?,
            "gamma_m" => self.gamma_m = num(value).map_err(err)?,
            "beta" => self.beta = num(value).map_err(err)?,
            "gate" => self.gate = value.parse().map_err(err)?,
            "adversarial_temperature" => self.adversarial_temperature = num(value).map_err(err)?,
            "learning_rate" => self.learning_rate = num(value).map_err(err)?,
            "adam_beta1" => self.adam_beta1 = num(value).map_err(err)?,
            "adam_beta2" => self.adam_beta2 = num(value).map_err(err)?,
            "adam_epsilon" => self.adam_epsilon = num(value).map_err(err)?,
            "lr_decay_every" => self.lr_decay_every = num(value).map_err(err)?,
            "lr_decay_factor" => self.lr_decay_factor = num(value).map_err(err)?,
            "max_steps" => self.max_steps = num(value).map_err(err)?,
            "phase_init" => self.phase_init = value.parse().map_err(err)?,
            "phase_constraint" => self.phase_constraint = value.parse().map_err(err)?,
            "constraint_interval" => self.constraint_interval = value.parse().map_err(err)?,
            "entity_init" => self.entity_init = num(value).map_err(err)?,
            "ab_init" => self.ab_init = parse_pair(value).map_err(err)?,
            "filter_negatives" => self.filter_negatives = num(value).map_err(err)?,
            "valid_every" => self.valid_every = num(value).map_err(err)?,
            "log_every" => self.log_every = num(value).map_err(err)?,
            "seed" => self.seed = num(value).map_err(err)?,
            _ => return Err(err("unknown key".into())),
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<String> {
        Some(match key {
            "model" => self.model.to_string(),
            "norm" => self.norm.to_string(),
            "dim" => self.dim.to_string(),
            "batch_size" => self.batch_size.to_string(),
            "negatives" => self.negatives.to_string(),
            "gamma" => self.gamma.to_string(),
            "alpha" => self.alpha.to_string(),
            "gamma_m" => self.gamma_m.to_string(),
            "beta" => self.beta.to_string(),
            "gate" => self.gate.to_string(),
            "adversarial_temperature" => self.adversarial_temperature.to_string(),
            "learning_rate" => self.learning_rate.to_string(),
            "adam_beta1" => self.adam_beta1.to_string(),
            "adam_beta2" => self.adam_beta2.to_string(),
            "adam_epsilon" => self.adam_epsilon.to_string(),
            "lr_decay_every" => self.lr_decay_every.to_string(),
            "lr_decay_factor" => self.lr_decay_factor.to_string(),
            "max_steps" => self.max_steps.to_string(),
            "phase_init" => self.phase_init.to_string(),
            "phase_constraint" => self.phase_constraint.to_string(),
            "constraint_interval" => self.constraint_interval.to_string(),
            "entity_init" => self.entity_init.to_string(),
            "ab_init" => format!("{},{}", self.ab_init.0, self.ab_init.1),
            "filter_negatives" => self.filter_negatives.to_string(),
            "valid_every" => self.valid_every.to_string(),
            "log_every" => self.log_every.to_string(),
            "seed" => self.seed.to_string(),
            _ => return None,
        })
    }

    /// Every field as text, keyed by config key.
    pub fn to_map(&self) -> BTreeMap<String, String> {
        KEYS.iter()
            .filter_map(|k| self.get(k).map(|v| (k.to_string(), v)))
            .collect()
    }

    /// Rebuilds a config from a [`TrainConfig::to_map`] echo.
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self> {
        let mut c = TrainConfig::default();
        for (k, v) in map {
            c.set(k, v)?;
        }
        c.validate()?;
        Ok(c)
    }

    /// Config-file text that reproduces this config exactly.
    pub fn to_file_string(&self) -> String {
        let mut s = String::new();
        for k in KEYS {
            if let Some(v) = self.get(k) {
                s.push_str(&format!("{k} = {v}\n"));
            }
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, reason: &str| {
            Err(Error::Config {
                key: key.to_string(),
                reason: reason.to_string(),
            })
        };
        if !(self.gamma > 0.0) {
            return bad("gamma", "must be > 0");
        }
        if !(self.alpha >= 0.0) {
            return bad("alpha", "must be >= 0");
        }
        if !(self.gamma_m > 0.0) {
            return bad("gamma_m", "must be > 0");
        }
        if !(self.beta > 1.0) {
            return bad("beta", "must be > 1");
        }
        if self.negatives < 1 {
            return bad("negatives", "must be >= 1");
        }
        if self.dim < 1 {
            return bad("dim", "must be >= 1");
        }
        if self.batch_size < 1 {
            return bad("batch_size", "must be >= 1");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate", "must be > 0");
        }
        if !(self.entity_init > 0.0) {
            return bad("entity_init", "must be > 0");
        }
        if !(self.ab_init.0 <= self.ab_init.1) {
            return bad("ab_init", "lower bound exceeds upper bound");
        }
        if !(self.adversarial_temperature >= 0.0) {
            return bad("adversarial_temperature", "must be >= 0");
        }
        Ok(())
    }
}

impl fmt::Display for TrainConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_file_string())
    }
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| Error::Config {
            key: line.to_string(),
            reason: format!("line {}: expected `key = value`", i + 1),
        })?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Applies defaults, preset, config-file entries and overrides in that order.
///
/// A `preset` entry in the file is honoured unless `preset` is given
/// explicitly.
pub fn resolve_config(
    preset: Option<&str>,
    file_text: Option<&str>,
    overrides: &[(String, String)],
) -> Result<TrainConfig> {
    let file = match file_text {
        Some(t) => parse_config_text(t)?,
        None => Vec::new(),
    };
    let file_preset = file
        .iter()
        .find(|(k, _)| k == "preset")
        .map(|(_, v)| v.as_str());
    let mut cfg = match preset.or(file_preset) {
        Some(p) => TrainConfig::preset(p)?,
        None => TrainConfig::default(),
    };
    for (k, v) in file.iter().chain(overrides) {
        if k == "preset" {
            continue;
        }
        cfg.set(k, v)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn countries_preset_matches_published_row() {
        let c = TrainConfig::preset("countries-s1").unwrap();
        assert_eq!((c.dim, c.batch_size), (500, 512));
        assert_eq!(
            (c.gamma, c.gamma_m, c.beta, c.alpha),
            (0.1, 0.000001, 1.5, 0.0005)
        );
        let f = TrainConfig::preset("fb15k-237").unwrap();
        assert_eq!(
            (f.dim, f.batch_size, f.gamma, f.beta, f.alpha),
            (1000, 1024, 9.0, 1.5, 0.001)
        );
        let w = TrainConfig::preset("wn18rr").unwrap();
        assert_eq!(
            (w.dim, w.batch_size, w.gamma, w.beta, w.alpha),
            (500, 512, 4.0, 1.3, 0.0003)
        );
        let y = TrainConfig::preset("yago3-10").unwrap();
        assert_eq!(
            (y.dim, y.batch_size, y.gamma, y.beta, y.alpha),
            (500, 1024, 16.0, 1.5, 0.0005)
        );
    }

    #[test]
    fn unknown_preset_lists_presets() {
        let e = TrainConfig::preset("nope").unwrap_err().to_string();
        for p in PRESETS {
            assert!(e.contains(p), "{e}");
        }
    }

    #[test]
    fn unknown_key_is_named() {
        let e = resolve_config(None, Some("gamma = 1\nbogus = 3\n"), &[]).unwrap_err();
        assert!(matches!(e, Error::Config { ref key, .. } if key == "bogus"));
    }

    #[test]
    fn invariants_are_enforced() {
        for (k, v) in [
            ("gamma", "0"),
            ("alpha", "-1"),
            ("gamma_m", "0"),
            ("beta", "1.0"),
            ("negatives", "0"),
        ] {
            assert!(
                resolve_config(None, None, &[(k.into(), v.into())]).is_err(),
                "{k}"
            );
        }
    }

    #[test]
    fn precedence_matrix() {
        // (preset?, file?, flag?) → which layer wins for `gamma`.
        let file = "gamma = 2.5\n";
        let flag = vec![("gamma".to_string(), "7.5".to_string())];
        let cases = [
            (None, None, false, TrainConfig::default().gamma),
            (Some("wn18rr"), None, false, 4.0),
            (None, Some(file), false, 2.5),
            (Some("wn18rr"), Some(file), false, 2.5),
            (None, None, true, 7.5),
            (Some("wn18rr"), None, true, 7.5),
            (None, Some(file), true, 7.5),
            (Some("wn18rr"), Some(file), true, 7.5),
        ];
        for (preset, file, use_flag, want) in cases {
            let overrides = if use_flag { flag.clone() } else { vec![] };
            let c = resolve_config(preset, file, &overrides).unwrap();
            assert_eq!(c.gamma, want, "{preset:?} {file:?} {use_flag}");
            if preset.is_some() {
                // Untouched keys still come from the preset.
                assert_eq!(c.beta, 1.3);
            }
        }
        let c = resolve_config(None, Some("preset = wn18rr\n"), &[]).unwrap();
        assert_eq!(c.dim, 500);
        let c = resolve_config(Some("fb15k-237"), Some("preset = wn18rr\n"), &[]).unwrap();
        assert_eq!(c.dim, 1000);
    }

    #[test]
    fn file_text_round_trips() {
        let mut c = TrainConfig::preset("countries-s2").unwrap();
        c.ab_init = (0.25, 0.75);
        c.phase_init = PhaseInterval::new(-1.0, 2.0).unwrap();
        let again = resolve_config(None, Some(&c.to_file_string()), &[]).unwrap();
        assert_eq!(again, c);
        assert_eq!(TrainConfig::from_map(&c.to_map()).unwrap(), c);
    }

    #[test]
    fn intervals_parse() {
        assert_eq!("pi".parse::<PhaseInterval>().unwrap(), PhaseInterval::PI);
        assert_eq!(
            "half-pi".parse::<PhaseInterval>().unwrap(),
            PhaseInterval::HALF_PI
        );
        assert_eq!(
            "(-1, 1)".parse::<PhaseInterval>().unwrap(),
            PhaseInterval { lo: -1.0, hi: 1.0 }
        );
        assert!("1,-1".parse::<PhaseInterval>().is_err());
    }
}
