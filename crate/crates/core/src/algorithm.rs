//! Algorithm selection by configuration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::AgentFactory;
use crate::gls::{DglsConfig, GdbaConfig};
use crate::local_search::{DsaConfig, Mgm2Config, MgmConfig};
use crate::maxsum::MaxsumConfig;
use crate::scalar::Scalar;

/// One algorithm with its parameters, tagged by `algo`:
///
/// ```json
/// {"algo": "dgls", "manner": "M", "gamma": 0.5, "scope": "col"}
/// {"algo": "gdba", "manner": "M", "violation": "NM", "scope": "tab"}
/// {"algo": "dsa", "p": 0.8}
/// {"algo": "dms", "lambda": 0.9}
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algo", rename_all = "lowercase")]
pub enum AlgorithmConfig {
    Dsa(DsaConfig),
    Mgm(MgmConfig),
    Mgm2(Mgm2Config),
    Dgls(DglsConfig),
    Gdba(GdbaConfig),
    Dms(MaxsumConfig),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid {algo} configuration: {reason}")]
pub struct ConfigError {
    pub algo: &'static str,
    pub reason: String,
}

impl AlgorithmConfig {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Dsa(_) => "dsa",
            Self::Mgm(_) => "mgm",
            Self::Mgm2(_) => "mgm2",
            Self::Dgls(_) => "dgls",
            Self::Gdba(_) => "gdba",
            Self::Dms(_) => "dms",
        }
    }

    /// Short parameter string such as `M,0.5,col`; empty for MGM.
    pub fn config_id(&self) -> String {
        match self {
            Self::Dsa(c) if c.allow_sideways => format!("p={},sideways", c.p),
            Self::Dsa(c) => format!("p={}", c.p),
            Self::Mgm(_) => String::new(),
            Self::Mgm2(c) => format!("offer_p={}", c.offer_p),
            Self::Dgls(c) if c.evaporate_on_qlm_only => format!("{},{},{},qlm_evap", c.manner, c.gamma, c.scope),
            Self::Dgls(c) => format!("{},{},{}", c.manner, c.gamma, c.scope),
            Self::Gdba(c) => format!("{},{},{}", c.manner, c.violation, c.scope),
            Self::Dms(c) => format!("lambda={}", c.lambda),
        }
    }

    /// `name(config_id)`, e.g. `dgls(M,0.5,col)`.
    pub fn label(&self) -> String {
        format!("{}({})", self.name(), self.config_id())
    }

    /// Whether runs carry cost modifiers whose statistics can be diagnosed.
    pub fn has_penalties(&self) -> bool {
        matches!(self, Self::Dgls(_) | Self::Gdba(_))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fail = |reason: &str| Err(ConfigError { algo: self.name(), reason: reason.to_string() });
        match self {
            Self::Dsa(c) if !c.is_valid() => fail("p must lie in (0, 1]"),
            Self::Mgm2(c) if !c.is_valid() => fail("offer_p must lie in [0, 1]"),
            Self::Dgls(c) if !c.is_valid() => fail("gamma must lie in (0, 1)"),
            Self::Gdba(c) if !c.is_valid() => fail("the adaptive violation rule belongs to DGLS"),
            Self::Dms(c) if !c.is_valid() => fail("lambda must lie in [0, 1) and noise must be finite and nonnegative"),
            _ => Ok(()),
        }
    }

    pub fn factory<S: Scalar>(&self) -> &dyn AgentFactory<S> {
        match self {
            Self::Dsa(c) => c,
            Self::Mgm(c) => c,
            Self::Mgm2(c) => c,
            Self::Dgls(c) => c,
            Self::Gdba(c) => c,
            Self::Dms(c) => c,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gls::{Manner, Scope, ViolationRule};

    #[test]
    fn parses_tagged_configs() {
        let c: AlgorithmConfig = serde_json::from_str(r#"{"algo":"dgls","manner":"M","gamma":0.5,"scope":"col"}"#).unwrap();
        assert_eq!(c, AlgorithmConfig::Dgls(DglsConfig::new(Manner::Multiplicative, 0.5, Scope::Column)));
        assert_eq!(c.label(), "dgls(M,0.5,col)");
        let g: AlgorithmConfig = serde_json::from_str(r#"{"algo":"gdba","manner":"M","violation":"NM","scope":"T"}"#).unwrap();
        assert_eq!(g, AlgorithmConfig::Gdba(GdbaConfig::new(Manner::Multiplicative, ViolationRule::NonMinimum, Scope::Table)));
        assert_eq!(g.config_id(), "M,NM,tab");
        let m: AlgorithmConfig = serde_json::from_str(r#"{"algo":"mgm"}"#).unwrap();
        assert_eq!(m.label(), "mgm()");
        let d: AlgorithmConfig = serde_json::from_str(r#"{"algo":"dms","lambda":0.9}"#).unwrap();
        assert_eq!(d, AlgorithmConfig::Dms(MaxsumConfig::new(0.9)));
        let back: AlgorithmConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn validation() {
        assert!(AlgorithmConfig::Dsa(DsaConfig::new(0.8)).validate().is_ok());
        assert!(AlgorithmConfig::Dsa(DsaConfig::new(0.0)).validate().is_err());
        assert!(AlgorithmConfig::Dgls(DglsConfig::new(Manner::Additive, 1.0, Scope::Cell)).validate().is_err());
        let adaptive = GdbaConfig::new(Manner::Additive, ViolationRule::Adaptive, Scope::Cell);
        assert!(AlgorithmConfig::Gdba(adaptive).validate().is_err());
        assert!(serde_json::from_str::<AlgorithmConfig>(r#"{"algo":"sa"}"#).is_err());
    }
}
