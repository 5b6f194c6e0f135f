use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    TransE,
    Mde,
}

impl ModelKind {
    pub const ALL: [ModelKind; 2] = [ModelKind::TransE, ModelKind::Mde];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::TransE => "transe",
            ModelKind::Mde => "mde",
        }
    }

    /// Number of independent embedding sets.
    pub fn sets(self) -> usize {
        match self {
            ModelKind::TransE => 1,
            ModelKind::Mde => 3,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "transe" => Ok(ModelKind::TransE),
            "mde" => Ok(ModelKind::Mde),
            other => Err(Error::InvalidArgument(format!("unknown model {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// `max(0, margin + f(pos) - f(neg))`
    Margin,
    /// `beta1 [f(pos) - gamma1]_+ + beta2 [gamma2 - f(neg)]_+`
    Limit,
}

impl LossKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Margin => "margin",
            LossKind::Limit => "limit",
        }
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "margin" => Ok(LossKind::Margin),
            "limit" => Ok(LossKind::Limit),
            other => Err(Error::InvalidArgument(format!("unknown loss {other:?}"))),
        }
    }
}

/// Hyperparameters of one model. [`ModelConfig::new`] gives the defaults
/// for each model kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model: ModelKind,
    pub loss: LossKind,
    pub dim: usize,
    pub norm_p: u8,
    pub psi: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub margin: f64,
    pub weights: [f64; 3],
    pub learning_rate: f64,
    pub iterations: usize,
    pub negatives_per_positive: usize,
    /// Resample negatives that are training positives.
    pub filtered_negatives: bool,
    pub seed: u64,
}

impl ModelConfig {
    pub fn new(model: ModelKind) -> Self {
        let (dim, loss) = match model {
            ModelKind::TransE => (20, LossKind::Margin),
            ModelKind::Mde => (10, LossKind::Limit),
        };
        ModelConfig {
            model,
            loss,
            dim,
            norm_p: 2,
            psi: 1.2,
            gamma1: 3.0,
            gamma2: 3.0,
            beta1: 1.0,
            beta2: 1.0,
            margin: 1.0,
            weights: [1.0; 3],
            learning_rate: 0.01,
            iterations: 700,
            negatives_per_positive: 1,
            filtered_negatives: true,
            seed: 0,
        }
    }

    pub fn transe() -> Self {
        Self::new(ModelKind::TransE)
    }

    pub fn mde() -> Self {
        Self::new(ModelKind::Mde)
    }

    // negated comparisons so that NaN is rejected as well
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(m.to_owned()));
        if self.dim == 0 {
            return bad("dim must be at least 1");
        }
        if !matches!(self.norm_p, 1 | 2) {
            return bad("norm_p must be 1 or 2");
        }
        if !(self.gamma1 > 0.0 && self.gamma2 > 0.0) {
            return bad("gamma1 and gamma2 must be positive");
        }
        if !(self.beta1 > 0.0 && self.beta2 > 0.0) {
            return bad("beta1 and beta2 must be positive");
        }
        if !(self.psi >= 0.0) {
            return bad("psi must be non-negative");
        }
        if !(self.margin > 0.0) {
            return bad("margin must be positive");
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be a non-negative finite number");
        }
        if self.iterations == 0 || self.negatives_per_positive == 0 {
            return bad("iterations and negatives_per_positive must be positive");
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return bad("weights must be finite");
        }
        Ok(())
    }

    /// Applies one `key=value` setting. Keys may carry a model prefix
    /// (`mde.dim`); prefixed keys for the other model are ignored.
    /// Returns whether the key was applied.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<bool> {
        let key = match key.split_once('.') {
            Some((prefix, rest)) => match prefix.parse::<ModelKind>() {
                Ok(m) if m == self.model => rest,
                Ok(_) => return Ok(false),
                Err(_) => key,
            },
            None => key,
        };
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.trim()
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad value {v:?} for {key}")))
        }
        match key {
            "loss" => self.loss = value.trim().parse()?,
            "dim" => self.dim = num(key, value)?,
            "norm_p" | "norm" => self.norm_p = num(key, value)?,
            "psi" => self.psi = num(key, value)?,
            "gamma1" => self.gamma1 = num(key, value)?,
            "gamma2" => self.gamma2 = num(key, value)?,
            "beta1" => self.beta1 = num(key, value)?,
            "beta2" => self.beta2 = num(key, value)?,
            "margin" => self.margin = num(key, value)?,
            "w1" => self.weights[0] = num(key, value)?,
            "w2" => self.weights[1] = num(key, value)?,
            "w3" => self.weights[2] = num(key, value)?,
            "learning_rate" | "lr" => self.learning_rate = num(key, value)?,
            "iterations" | "epochs" => self.iterations = num(key, value)?,
            "negatives_per_positive" | "negatives" => self.negatives_per_positive = num(key, value)?,
            "filtered_negatives" => self.filtered_negatives = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            _ => return Ok(false),
        }
        Ok(true)
    }

    /// Every setting as `key=value` pairs, in a fixed order.
    pub fn to_pairs(&self) -> Vec<(&'static str, String)> {
        vec![
            ("model", self.model.to_string()),
            ("loss", self.loss.as_str().to_owned()),
            ("dim", self.dim.to_string()),
            ("norm_p", self.norm_p.to_string()),
            ("psi", self.psi.to_string()),
            ("gamma1", self.gamma1.to_string()),
            ("gamma2", self.gamma2.to_string()),
            ("beta1", self.beta1.to_string()),
            ("beta2", self.beta2.to_string()),
            ("margin", self.margin.to_string()),
            ("w1", self.weights[0].to_string()),
            ("w2", self.weights[1].to_string()),
            ("w3", self.weights[2].to_string()),
            ("learning_rate", self.learning_rate.to_string()),
            ("iterations", self.iterations.to_string()),
            ("negatives_per_positive", self.negatives_per_positive.to_string()),
            ("filtered_negatives", self.filtered_negatives.to_string()),
            ("seed", self.seed.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_per_model() {
        let t = ModelConfig::transe();
        let m = ModelConfig::mde();
        assert_eq!((t.dim, t.loss), (20, LossKind::Margin));
        assert_eq!((m.dim, m.loss), (10, LossKind::Limit));
        assert_eq!((m.gamma1, m.gamma2, m.psi), (3.0, 3.0, 1.2));
        assert_eq!((m.iterations, m.norm_p), (700, 2));
        t.validate().unwrap();
        m.validate().unwrap();
    }

    #[test]
    fn prefixed_keys_target_one_model() {
        let mut m = ModelConfig::mde();
        assert!(m.apply("mde.dim", "16").unwrap());
        assert!(!m.apply("transe.dim", "50").unwrap());
        assert!(m.apply("lr", "0.05").unwrap());
        assert!(!m.apply("nonsense", "1").unwrap());
        assert_eq!((m.dim, m.learning_rate), (16, 0.05));
        assert!(m.apply("dim", "x").is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        let mut c = ModelConfig::mde();
        c.dim = 0;
        assert!(c.validate().is_err());
        let mut c = ModelConfig::mde();
        c.psi = -1.0;
        assert!(c.validate().is_err());
        let mut c = ModelConfig::mde();
        c.norm_p = 3;
        assert!(c.validate().is_err());
    }

    #[test]
    fn pairs_round_trip_through_apply() {
        let mut c = ModelConfig::mde();
        c.psi = 0.7;
        c.weights = [1.0, 0.5, 2.0];
        let mut d = ModelConfig::mde();
        for (k, v) in c.to_pairs().into_iter().skip(1) {
            assert!(d.apply(k, &v).unwrap(), "{k}");
        }
        assert_eq!(c, d);
    }
}
