use std::fmt;
use std::str::FromStr;

use crate::base::Matrix;
use crate::error::RcnError;

/// Largest double below one. Saturated outputs are clamped here so that the
/// open ranges of tanh and logistic also hold in floating point.
const BELOW_ONE: f64 = 1.0 - f64::EPSILON / 2.0;
/// Smallest positive double.
const ABOVE_ZERO: f64 = 4.9406564584124654e-324;

/// Pointwise activation functions for input and reservoir neurons.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Activation {
    Identity,
    Tanh,
    Logistic,
}

impl Activation {
    #[inline]
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Identity => x,
            Activation::Tanh => x.tanh().clamp(-BELOW_ONE, BELOW_ONE),
            Activation::Logistic => (1.0 / (1.0 + (-x).exp())).clamp(ABOVE_ZERO, BELOW_ONE),
        }
    }

    pub fn apply_in_place(self, values: &mut [f64]) {
        if self != Activation::Identity {
            values.iter_mut().for_each(|v| *v = self.apply(*v));
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Identity => "identity",
            Activation::Tanh => "tanh",
            Activation::Logistic => "logistic",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Activation::Identity => 0,
            Activation::Tanh => 1,
            Activation::Logistic => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(Activation::Identity),
            1 => Some(Activation::Tanh),
            2 => Some(Activation::Logistic),
            _ => None,
        }
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = RcnError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "identity" => Ok(Activation::Identity),
            "tanh" => Ok(Activation::Tanh),
            "logistic" => Ok(Activation::Logistic),
            other => Err(RcnError::param(
                "activation",
                format!("unknown activation `{other}` (identity, tanh, logistic)"),
            )),
        }
    }
}

/// Applies `activation` to every entry of `m`.
pub fn apply_activation(m: &Matrix, activation: Activation) -> Matrix {
    m.map(|v| activation.apply(v))
}
