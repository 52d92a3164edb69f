//! JSON interchange for networks.
//!
//! The document layout is normative: variables and CPTs are arrays in
//! declaration order, and CPT rows enumerate parent assignments with the
//! last parent varying fastest. Export → import → export reproduces the
//! original bytes exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Domain, Network, NetworkError, Role, TimeIndex};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariableRecord {
    pub id: String,
    pub labels: Vec<String>,
    pub role: Role,
    pub time: TimeIndex,
    pub observable: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CptRecord {
    pub child: String,
    pub parents: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Serializable image of a [`Network`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkDocument {
    pub variables: Vec<VariableRecord>,
    pub cpts: Vec<CptRecord>,
}

#[derive(Debug, Error)]
pub enum CodecError {
    #[error("{0}")]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Network(#[from] NetworkError),
    #[error("document declares CPT for unknown variable `{0}`")]
    UnknownCptChild(String),
}

impl NetworkDocument {
    pub fn from_network(net: &Network) -> Self {
        let variables = net
            .variables()
            .map(|(_, v)| VariableRecord {
                id: v.id.clone(),
                labels: v.domain.labels().to_vec(),
                role: v.role,
                time: v.time,
                observable: v.observable,
            })
            .collect();
        let cpts = net
            .variables()
            .filter_map(|(id, v)| {
                net.cpt(id).map(|cpt| CptRecord {
                    child: v.id.clone(),
                    parents: cpt
                        .parents()
                        .iter()
                        .map(|&p| net.variable(p).id.clone())
                        .collect(),
                    rows: cpt.rows().to_vec(),
                })
            })
            .collect();
        NetworkDocument { variables, cpts }
    }

    pub fn from_json(text: &str) -> Result<Self, CodecError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        // Infallible for this type; no non-string keys, no non-finite floats
        // survive validation before export.
        serde_json::to_string_pretty(self).expect("network document serializes")
    }

    /// Build a network without enforcing invariants, so that
    /// [`Network::validate`] can report problems in foreign documents.
    /// Unknown duplicate ids and malformed domains still fail here because
    /// they leave nothing coherent to validate.
    pub fn instantiate_unchecked(&self) -> Result<Network, CodecError> {
        let mut net = Network::new();
        for rec in &self.variables {
            let domain = Domain::new(rec.labels.iter().cloned())?;
            net.add_variable(rec.id.clone(), domain, rec.role, rec.time, rec.observable)?;
        }
        // Variables without a CPT record keep no CPT at all, so validation
        // can flag them as missing rather than silently defaulting.
        let mut seen = vec![false; net.len()];
        for rec in &self.cpts {
            let child = net
                .var_id(&rec.child)
                .ok_or_else(|| CodecError::UnknownCptChild(rec.child.clone()))?;
            seen[child.index()] = true;
        }
        for (i, flag) in seen.iter().enumerate() {
            if !flag {
                net.clear_cpt_by_index(i);
            }
        }
        for rec in &self.cpts {
            let parents: Vec<&str> = rec.parents.iter().map(String::as_str).collect();
            net.set_cpt_unchecked(&rec.child, &parents, rec.rows.clone())?;
        }
        Ok(net)
    }

    /// Build a network and require it to be fully valid.
    pub fn instantiate(&self) -> Result<Network, CodecError> {
        let net = self.instantiate_unchecked()?;
        let violations = net.validate();
        if let Some(v) = violations.first() {
            return Err(CodecError::Network(NetworkError::InvalidDocument {
                violation: v.to_string(),
                count: violations.len(),
            }));
        }
        Ok(net)
    }
}

impl Network {
    pub fn to_document(&self) -> NetworkDocument {
        NetworkDocument::from_network(self)
    }

    pub fn to_json(&self) -> String {
        self.to_document().to_json()
    }

    /// Parse and fully validate a network document.
    pub fn from_json(text: &str) -> Result<Network, CodecError> {
        NetworkDocument::from_json(text)?.instantiate()
    }
}
