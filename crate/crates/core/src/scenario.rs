//! Named evidence sets with query targets, the exchange format between the
//! CLI, the test suite, and scenario files on disk.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Evidence, Network, Role};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    /// Variable name → observed label.
    pub evidence: BTreeMap<String, String>,
    pub targets: Vec<String>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("evidence variable `{0}` does not exist in the network")]
    UnknownVariable(String),
    #[error("evidence variable `{variable}` has no label `{label}`")]
    UnknownLabel { variable: String, label: String },
    #[error("evidence variable `{variable}` has role {role} and is not observable")]
    UnobservableEvidence { variable: String, role: Role },
    #[error("target variable `{0}` does not exist in the network")]
    UnknownTarget(String),
}

impl Scenario {
    pub fn new(name: impl Into<String>) -> Self {
        Scenario {
            name: name.into(),
            evidence: BTreeMap::new(),
            targets: Vec::new(),
        }
    }

    pub fn observe(mut self, variable: impl Into<String>, label: impl Into<String>) -> Self {
        self.evidence.insert(variable.into(), label.into());
        self
    }

    pub fn target(mut self, variable: impl Into<String>) -> Self {
        self.targets.push(variable.into());
        self
    }

    pub fn evidence(&self) -> Evidence {
        self.evidence.iter().collect()
    }

    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// Check every referenced variable and label against the network, and
    /// that evidence touches only observable variables.
    pub fn validate(&self, net: &Network) -> Result<(), ScenarioError> {
        for (name, label) in &self.evidence {
            let id = net
                .var_id(name)
                .ok_or_else(|| ScenarioError::UnknownVariable(name.clone()))?;
            let var = net.variable(id);
            if var.domain.index_of(label).is_none() {
                return Err(ScenarioError::UnknownLabel {
                    variable: name.clone(),
                    label: label.clone(),
                });
            }
            if !var.observable {
                return Err(ScenarioError::UnobservableEvidence {
                    variable: name.clone(),
                    role: var.role,
                });
            }
        }
        for target in &self.targets {
            if net.var_id(target).is_none() {
                return Err(ScenarioError::UnknownTarget(target.clone()));
            }
        }
        Ok(())
    }
}
