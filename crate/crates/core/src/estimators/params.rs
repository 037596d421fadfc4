use std::collections::BTreeMap;
use std::fmt;

use crate::base::Activation;
use crate::blocks::FanIn;
use crate::error::{RcnError, Result};
use crate::estimators::{Projection, SequenceMode};

/// A single hyperparameter value.
#[derive(Clone, Debug, PartialEq)]
pub enum ParamValue {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
}

/// Hyperparameters by name, iterated in sorted key order.
pub type Params = BTreeMap<String, ParamValue>;

impl ParamValue {
    /// Parses `true`/`false`, then integers, then floats; anything else is text.
    pub fn parse(s: &str) -> ParamValue {
        let s = s.trim();
        match s {
            "true" => return ParamValue::Bool(true),
            "false" => return ParamValue::Bool(false),
            _ => {}
        }
        if let Ok(i) = s.parse::<i64>() {
            return ParamValue::Int(i);
        }
        match s.parse::<f64>() {
            Ok(f) if f.is_finite() => ParamValue::Float(f),
            _ => ParamValue::Text(s.to_string()),
        }
    }

    pub fn as_f64(&self, name: &str) -> Result<f64> {
        match self {
            ParamValue::Float(f) => Ok(*f),
            ParamValue::Int(i) => Ok(*i as f64),
            _ => Err(type_error(name, "a number", self)),
        }
    }

    pub fn as_usize(&self, name: &str) -> Result<usize> {
        match self {
            ParamValue::Int(i) if *i >= 0 => Ok(*i as usize),
            ParamValue::Float(f) if *f >= 0.0 && f.fract() == 0.0 && *f < 9.0e15 => Ok(*f as usize),
            _ => Err(type_error(name, "a non-negative integer", self)),
        }
    }

    pub fn as_u64(&self, name: &str) -> Result<u64> {
        match self {
            ParamValue::Int(i) if *i >= 0 => Ok(*i as u64),
            _ => Err(type_error(name, "a non-negative integer", self)),
        }
    }

    pub fn as_bool(&self, name: &str) -> Result<bool> {
        match self {
            ParamValue::Bool(b) => Ok(*b),
            _ => Err(type_error(name, "true or false", self)),
        }
    }

    pub fn as_text(&self, name: &str) -> Result<&str> {
        match self {
            ParamValue::Text(s) => Ok(s),
            _ => Err(type_error(name, "a string", self)),
        }
    }

    fn as_fan_in(&self, name: &str) -> Result<FanIn> {
        let fan = match self {
            ParamValue::Text(s) => s.parse().map_err(|_| type_error(name, "a count or `dense`", self))?,
            other => FanIn::Count(other.as_usize(name)?),
        };
        fan.validate(name)?;
        Ok(fan)
    }

    fn as_parsed<T: std::str::FromStr<Err = RcnError>>(&self, name: &str) -> Result<T> {
        self.as_text(name)?.parse().map_err(|e| match e {
            RcnError::InvalidParameter { reason, .. } => RcnError::param(name, reason),
            other => other,
        })
    }
}

fn type_error(name: &str, expected: &str, got: &ParamValue) -> RcnError {
    RcnError::param(name, format!("expected {expected}, got `{got}`"))
}

impl fmt::Display for ParamValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamValue::Float(v) => write!(f, "{v:?}"),
            ParamValue::Int(v) => write!(f, "{v}"),
            ParamValue::Bool(v) => write!(f, "{v}"),
            ParamValue::Text(v) => f.write_str(v),
        }
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Float(v)
    }
}

impl From<i64> for ParamValue {
    fn from(v: i64) -> Self {
        ParamValue::Int(v)
    }
}

impl From<bool> for ParamValue {
    fn from(v: bool) -> Self {
        ParamValue::Bool(v)
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_string())
    }
}

fn fan_value(f: FanIn) -> ParamValue {
    match f {
        FanIn::Dense => ParamValue::Text("dense".into()),
        FanIn::Count(k) => ParamValue::Int(k as i64),
    }
}

/// Echo state network hyperparameters.
///
/// The input weights use `seed`; the reservoir uses `seed + 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct EsnParams {
    pub hidden_layer_size: usize,
    pub k_in: FanIn,
    pub input_scaling: f64,
    pub input_activation: Activation,
    pub bias_scaling: f64,
    pub k_rec: FanIn,
    pub spectral_radius: f64,
    pub leakage: f64,
    pub reservoir_activation: Activation,
    pub bidirectional: bool,
    pub alpha: f64,
    pub decision_strategy: Projection,
    pub sequence_mode: SequenceMode,
    pub seed: u64,
}

impl Default for EsnParams {
    fn default() -> Self {
        Self {
            hidden_layer_size: 500,
            k_in: FanIn::Count(10),
            input_scaling: 1.0,
            input_activation: Activation::Identity,
            bias_scaling: 1.0,
            k_rec: FanIn::Count(10),
            spectral_radius: 1.0,
            leakage: 1.0,
            reservoir_activation: Activation::Tanh,
            bidirectional: false,
            alpha: 1e-5,
            decision_strategy: Projection::WinnerTakesAll,
            sequence_mode: SequenceMode::Auto,
            seed: 42,
        }
    }
}

impl EsnParams {
    pub const NAMES: [&'static str; 14] = [
        "alpha",
        "bias_scaling",
        "bidirectional",
        "decision_strategy",
        "hidden_layer_size",
        "input_activation",
        "input_scaling",
        "k_in",
        "k_rec",
        "leakage",
        "reservoir_activation",
        "seed",
        "sequence_mode",
        "spectral_radius",
    ];

    pub fn set(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        match name {
            "hidden_layer_size" => self.hidden_layer_size = value.as_usize(name)?,
            "k_in" => self.k_in = value.as_fan_in(name)?,
            "input_scaling" => self.input_scaling = value.as_f64(name)?,
            "input_activation" => self.input_activation = value.as_parsed(name)?,
            "bias_scaling" => self.bias_scaling = value.as_f64(name)?,
            "k_rec" => self.k_rec = value.as_fan_in(name)?,
            "spectral_radius" => self.spectral_radius = value.as_f64(name)?,
            "leakage" => self.leakage = value.as_f64(name)?,
            "reservoir_activation" => self.reservoir_activation = value.as_parsed(name)?,
            "bidirectional" => self.bidirectional = value.as_bool(name)?,
            "alpha" => self.alpha = value.as_f64(name)?,
            "decision_strategy" => self.decision_strategy = value.as_parsed(name)?,
            "sequence_mode" => self.sequence_mode = value.as_parsed(name)?,
            "seed" => self.seed = value.as_u64(name)?,
            other => return Err(RcnError::UnknownParameter(other.to_string())),
        }
        Ok(())
    }

    /// Defaults overridden by `params`; unknown names are rejected.
    pub fn from_params(params: &Params) -> Result<Self> {
        let mut p = Self::default();
        for (k, v) in params {
            p.set(k, v)?;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn to_params(&self) -> Params {
        let mut m = Params::new();
        let mut put = |k: &str, v: ParamValue| {
            m.insert(k.to_string(), v);
        };
        put("hidden_layer_size", ParamValue::Int(self.hidden_layer_size as i64));
        put("k_in", fan_value(self.k_in));
        put("input_scaling", self.input_scaling.into());
        put("input_activation", self.input_activation.name().into());
        put("bias_scaling", self.bias_scaling.into());
        put("k_rec", fan_value(self.k_rec));
        put("spectral_radius", self.spectral_radius.into());
        put("leakage", self.leakage.into());
        put("reservoir_activation", self.reservoir_activation.name().into());
        put("bidirectional", self.bidirectional.into());
        put("alpha", self.alpha.into());
        put("decision_strategy", self.decision_strategy.name().into());
        put("sequence_mode", self.sequence_mode.name().into());
        put("seed", ParamValue::Int(self.seed as i64));
        m
    }

    pub fn validate(&self) -> Result<()> {
        self.input_config().validate()?;
        self.reservoir_config().validate()?;
        check_alpha(self.alpha)
    }

    pub fn input_config(&self) -> crate::blocks::InputToNodeConfig {
        crate::blocks::InputToNodeConfig {
            hidden_layer_size: self.hidden_layer_size,
            k_in: self.k_in,
            input_activation: self.input_activation,
            input_scaling: self.input_scaling,
            bias_scaling: self.bias_scaling,
            seed: self.seed,
        }
    }

    pub fn reservoir_config(&self) -> crate::blocks::NodeToNodeConfig {
        crate::blocks::NodeToNodeConfig {
            hidden_layer_size: self.hidden_layer_size,
            k_rec: self.k_rec,
            spectral_radius: self.spectral_radius,
            leakage: self.leakage,
            reservoir_activation: self.reservoir_activation,
            bidirectional: self.bidirectional,
            seed: self.seed.wrapping_add(1),
        }
    }
}

/// Extreme learning machine hyperparameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ElmParams {
    pub hidden_layer_size: usize,
    pub k_in: FanIn,
    pub input_scaling: f64,
    pub input_activation: Activation,
    pub bias_scaling: f64,
    pub alpha: f64,
    pub decision_strategy: Projection,
    pub seed: u64,
}

impl Default for ElmParams {
    fn default() -> Self {
        Self {
            hidden_layer_size: 500,
            k_in: FanIn::Count(10),
            input_scaling: 1.0,
            input_activation: Activation::Tanh,
            bias_scaling: 1.0,
            alpha: 1e-5,
            decision_strategy: Projection::WinnerTakesAll,
            seed: 42,
        }
    }
}

impl ElmParams {
    pub fn set(&mut self, name: &str, value: &ParamValue) -> Result<()> {
        match name {
            "hidden_layer_size" => self.hidden_layer_size = value.as_usize(name)?,
            "k_in" => self.k_in = value.as_fan_in(name)?,
            "input_scaling" => self.input_scaling = value.as_f64(name)?,
            "input_activation" => self.input_activation = value.as_parsed(name)?,
            "bias_scaling" => self.bias_scaling = value.as_f64(name)?,
            "alpha" => self.alpha = value.as_f64(name)?,
            "decision_strategy" => self.decision_strategy = value.as_parsed(name)?,
            "seed" => self.seed = value.as_u64(name)?,
            other => return Err(RcnError::UnknownParameter(other.to_string())),
        }
        Ok(())
    }

    pub fn from_params(params: &Params) -> Result<Self> {
        let mut p = Self::default();
        for (k, v) in params {
            p.set(k, v)?;
        }
        p.validate()?;
        Ok(p)
    }

    pub fn to_params(&self) -> Params {
        let mut m = Params::new();
        m.insert("hidden_layer_size".into(), ParamValue::Int(self.hidden_layer_size as i64));
        m.insert("k_in".into(), fan_value(self.k_in));
        m.insert("input_scaling".into(), self.input_scaling.into());
        m.insert("input_activation".into(), self.input_activation.name().into());
        m.insert("bias_scaling".into(), self.bias_scaling.into());
        m.insert("alpha".into(), self.alpha.into());
        m.insert("decision_strategy".into(), self.decision_strategy.name().into());
        m.insert("seed".into(), ParamValue::Int(self.seed as i64));
        m
    }

    pub fn validate(&self) -> Result<()> {
        self.input_config().validate()?;
        check_alpha(self.alpha)
    }

    pub fn input_config(&self) -> crate::blocks::InputToNodeConfig {
        crate::blocks::InputToNodeConfig {
            hidden_layer_size: self.hidden_layer_size,
            k_in: self.k_in,
            input_activation: self.input_activation,
            input_scaling: self.input_scaling,
            bias_scaling: self.bias_scaling,
            seed: self.seed,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha >= 0.0 {
        Ok(())
    } else {
        Err(RcnError::param("alpha", format!("must be finite and >= 0, got {alpha}")))
    }
}
