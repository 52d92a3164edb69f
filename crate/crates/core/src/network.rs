//! Discrete Bayesian networks: categorical variables, CPTs, and the DAG
//! structure implied by CPT parent lists.
//!
//! A [`Network`] is built incrementally with [`Network::add_variable`] and
//! [`Network::set_cpt`], both of which reject invalid input. Networks read
//! from external documents may hold broken data; [`Network::validate`]
//! reports every problem as a [`Violation`] instead of failing fast.
//!
//! CPT rows enumerate parent assignments with the **last parent varying
//! fastest**. The same convention applies to factor tables and to the JSON
//! interchange format, and round trips are bit-exact.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Normalization tolerance applied to every probability vector.
pub const PROB_TOLERANCE: f64 = 1e-9;

/// Subnetwork role of a variable in the plan-recognition causal story.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Role {
    Context,
    MentalState,
    Plan,
    Communication,
    Activity,
    Effect,
}

impl Role {
    pub const ALL: [Role; 6] = [
        Role::Context,
        Role::MentalState,
        Role::Plan,
        Role::Communication,
        Role::Activity,
        Role::Effect,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Role::Context => "Context",
            Role::MentalState => "MentalState",
            Role::Plan => "Plan",
            Role::Communication => "Communication",
            Role::Activity => "Activity",
            Role::Effect => "Effect",
        }
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Stage tag for a variable. `m0`/`m1` are the two maneuver stages between
/// the observation instants `t0`, `t1`, `t2`. Atemporal variables (mental
/// state and plans) sit between `t0` and `m0` in causal order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TimeIndex {
    #[serde(rename = "t0")]
    T0,
    #[serde(rename = "m0")]
    M0,
    #[serde(rename = "m1")]
    M1,
    #[serde(rename = "t1")]
    T1,
    #[serde(rename = "t2")]
    T2,
    #[serde(rename = "atemporal")]
    Atemporal,
}

impl TimeIndex {
    /// Causal rank used by the no-backward-links rule.
    pub fn rank(self) -> u8 {
        match self {
            TimeIndex::T0 => 0,
            TimeIndex::Atemporal => 1,
            TimeIndex::M0 => 2,
            TimeIndex::M1 => 3,
            TimeIndex::T1 => 4,
            TimeIndex::T2 => 5,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            TimeIndex::T0 => "t0",
            TimeIndex::M0 => "m0",
            TimeIndex::M1 => "m1",
            TimeIndex::T1 => "t1",
            TimeIndex::T2 => "t2",
            TimeIndex::Atemporal => "atemporal",
        }
    }
}

impl fmt::Display for TimeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Ordered set of category labels. Order is significant: the label index is
/// the canonical encoding everywhere; labels appear only at interfaces.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Domain {
    labels: Vec<String>,
}

impl Domain {
    pub fn new<I, S>(labels: I) -> Result<Self, NetworkError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() < 2 {
            return Err(NetworkError::DomainTooSmall { len: labels.len() });
        }
        for (i, label) in labels.iter().enumerate() {
            if labels[..i].contains(label) {
                return Err(NetworkError::DuplicateLabel {
                    label: label.clone(),
                });
            }
        }
        Ok(Domain { labels })
    }

    /// Boolean domain with the fixed label order `false`, `true`.
    pub fn boolean() -> Self {
        Domain {
            labels: vec!["false".to_string(), "true".to_string()],
        }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }
}

/// Handle to a variable inside one specific [`Network`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub(crate) usize);

impl VarId {
    pub fn index(self) -> usize {
        self.0
    }

    /// Detached handle for factors built outside a network (tests, ad-hoc
    /// tables). Handles from [`Network::var_id`] are the normal source.
    pub fn from_index(index: usize) -> VarId {
        VarId(index)
    }
}

/// A categorical random variable with its role, stage, and observability.
#[derive(Debug, Clone)]
pub struct Variable {
    pub id: String,
    pub domain: Domain,
    pub role: Role,
    pub time: TimeIndex,
    pub observable: bool,
}

/// Conditional probability table: one probability vector over the child's
/// domain per full parent assignment, last parent varying fastest.
#[derive(Debug, Clone)]
pub struct Cpt {
    pub(crate) child: VarId,
    pub(crate) parents: Vec<VarId>,
    pub(crate) rows: Vec<Vec<f64>>,
}

impl Cpt {
    pub fn child(&self) -> VarId {
        self.child
    }

    pub fn parents(&self) -> &[VarId] {
        &self.parents
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Row index for the given parent values (in declared parent order).
    pub fn row_index(&self, parent_values: &[usize], parent_cards: &[usize]) -> usize {
        debug_assert_eq!(parent_values.len(), parent_cards.len());
        let mut idx = 0;
        for (v, card) in parent_values.iter().zip(parent_cards) {
            idx = idx * card + v;
        }
        idx
    }
}

/// One broken network invariant, reported as data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Variable or CPT the violation is about.
    pub subject: String,
    pub kind: ViolationKind,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    MissingCpt,
    UnknownParent,
    RowCount,
    RowShape,
    NegativeEntry,
    RowSum,
    Cycle,
    Domain,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:?}] {}: {}", self.kind, self.subject, self.message)
    }
}

#[derive(Debug, Error)]
pub enum NetworkError {
    #[error("variable `{0}` already exists")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("domain must have at least 2 labels, got {len}")]
    DomainTooSmall { len: usize },
    #[error("duplicate domain label `{label}`")]
    DuplicateLabel { label: String },
    #[error("duplicate parent `{parent}` for `{child}`")]
    DuplicateParent { child: String, parent: String },
    #[error("edge {parent} -> {child} would close a cycle")]
    CycleIntroduced { child: String, parent: String },
    #[error("network contains a cycle")]
    CycleDetected,
    #[error("CPT for `{child}` expects {expected} rows, got {got}")]
    RowCountMismatch {
        child: String,
        expected: usize,
        got: usize,
    },
    #[error("CPT row {row} for `{child}` expects {expected} entries, got {got}")]
    RowLengthMismatch {
        child: String,
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("CPT row {row} for `{child}` has negative entry {value}")]
    NegativeEntry { child: String, row: usize, value: f64 },
    #[error("CPT row {row} for `{child}` sums to {sum}, expected 1")]
    RowSumMismatch { child: String, row: usize, sum: f64 },
    #[error("variable `{variable}` has no label `{label}`")]
    UnknownLabel { variable: String, label: String },
    #[error("assignment is missing a value for `{0}`")]
    PartialAssignment(String),
    #[error("variable `{0}` has no CPT")]
    MissingCpt(String),
    #[error("invalid network document ({count} violation(s)); first: {violation}")]
    InvalidDocument { violation: String, count: usize },
}

/// A total assignment of labels to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment {
    bindings: BTreeMap<String, String>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, variable: impl Into<String>, label: impl Into<String>) {
        self.bindings.insert(variable.into(), label.into());
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.bindings.get(variable).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        let mut a = Assignment::new();
        for (k, v) in iter {
            a.set(k, v);
        }
        a
    }
}

/// A partial assignment of observed values, keyed by variable name.
///
/// Construction does not reference a network; [`Evidence::compile`] resolves
/// names and labels against one and rejects anything unknown. Observability
/// is a recognition-layer concern and is checked there, not here.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Evidence {
    bindings: BTreeMap<String, String>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, variable: impl Into<String>, label: impl Into<String>) {
        self.bindings.insert(variable.into(), label.into());
    }

    pub fn get(&self, variable: &str) -> Option<&str> {
        self.bindings.get(variable).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    /// Resolve to `(variable, label index)` pairs, sorted by variable id.
    pub fn compile(&self, net: &Network) -> Result<Vec<(VarId, usize)>, NetworkError> {
        let mut out = Vec::with_capacity(self.bindings.len());
        for (name, label) in &self.bindings {
            let id = net
                .var_id(name)
                .ok_or_else(|| NetworkError::UnknownVariable(name.clone()))?;
            let idx = net.variable(id).domain.index_of(label).ok_or_else(|| {
                NetworkError::UnknownLabel {
                    variable: name.clone(),
                    label: label.clone(),
                }
            })?;
            out.push((id, idx));
        }
        out.sort_by_key(|(id, _)| *id);
        Ok(out)
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Evidence {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        let mut e = Evidence::new();
        for (k, v) in iter {
            e.set(k, v);
        }
        e
    }
}

/// A directed network of categorical variables, one CPT per variable.
///
/// Immutable after construction-and-validation: queries and samplers may
/// share a `&Network` freely across threads.
#[derive(Debug, Clone, Default)]
pub struct Network {
    variables: Vec<Variable>,
    cpts: Vec<Option<Cpt>>,
    index: HashMap<String, usize>,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.index.get(name).copied().map(VarId)
    }

    pub fn require(&self, name: &str) -> Result<VarId, NetworkError> {
        self.var_id(name)
            .ok_or_else(|| NetworkError::UnknownVariable(name.to_string()))
    }

    pub fn variable(&self, id: VarId) -> &Variable {
        &self.variables[id.0]
    }

    pub fn variables(&self) -> impl Iterator<Item = (VarId, &Variable)> {
        self.variables.iter().enumerate().map(|(i, v)| (VarId(i), v))
    }

    pub fn var_ids(&self) -> impl Iterator<Item = VarId> {
        (0..self.variables.len()).map(VarId)
    }

    pub fn cardinality(&self, id: VarId) -> usize {
        self.variables[id.0].domain.len()
    }

    pub fn cpt(&self, id: VarId) -> Option<&Cpt> {
        self.cpts[id.0].as_ref()
    }

    pub fn require_cpt(&self, id: VarId) -> Result<&Cpt, NetworkError> {
        self.cpts[id.0]
            .as_ref()
            .ok_or_else(|| NetworkError::MissingCpt(self.variable(id).id.clone()))
    }

    /// Parent list of a variable (empty for roots or missing CPTs).
    pub fn parents(&self, id: VarId) -> &[VarId] {
        self.cpts[id.0].as_ref().map_or(&[], |c| &c.parents)
    }

    /// All edges as `(parent, child)` pairs, in child insertion order.
    pub fn edges(&self) -> impl Iterator<Item = (VarId, VarId)> + '_ {
        self.cpts.iter().enumerate().flat_map(|(i, cpt)| {
            cpt.iter()
                .flat_map(move |c| c.parents.iter().map(move |&p| (p, VarId(i))))
        })
    }

    /// Add a variable with a uniform prior CPT. Roots keep that prior;
    /// anything else is replaced by a later [`Network::set_cpt`] call.
    pub fn add_variable(
        &mut self,
        id: impl Into<String>,
        domain: Domain,
        role: Role,
        time: TimeIndex,
        observable: bool,
    ) -> Result<VarId, NetworkError> {
        let id = id.into();
        if self.index.contains_key(&id) {
            return Err(NetworkError::DuplicateVariable(id));
        }
        let card = domain.len();
        let var_id = VarId(self.variables.len());
        self.index.insert(id.clone(), var_id.0);
        self.variables.push(Variable {
            id,
            domain,
            role,
            time,
            observable,
        });
        self.cpts.push(Some(Cpt {
            child: var_id,
            parents: Vec::new(),
            rows: vec![vec![1.0 / card as f64; card]],
        }));
        Ok(var_id)
    }

    /// Replace the CPT of `child`. Rejects unknown names, shape mismatches,
    /// invalid rows, and any parent set that would close a cycle.
    pub fn set_cpt(
        &mut self,
        child: &str,
        parents: &[&str],
        rows: Vec<Vec<f64>>,
    ) -> Result<(), NetworkError> {
        let child_id = self.require(child)?;
        let mut parent_ids = Vec::with_capacity(parents.len());
        for p in parents {
            let pid = self.require(p)?;
            if parent_ids.contains(&pid) {
                return Err(NetworkError::DuplicateParent {
                    child: child.to_string(),
                    parent: p.to_string(),
                });
            }
            parent_ids.push(pid);
        }
        for &pid in &parent_ids {
            if self.reaches(child_id, pid) {
                return Err(NetworkError::CycleIntroduced {
                    child: child.to_string(),
                    parent: self.variable(pid).id.clone(),
                });
            }
        }
        let expected_rows: usize = parent_ids.iter().map(|&p| self.cardinality(p)).product();
        if rows.len() != expected_rows {
            return Err(NetworkError::RowCountMismatch {
                child: child.to_string(),
                expected: expected_rows,
                got: rows.len(),
            });
        }
        let card = self.cardinality(child_id);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != card {
                return Err(NetworkError::RowLengthMismatch {
                    child: child.to_string(),
                    row: i,
                    expected: card,
                    got: row.len(),
                });
            }
            if let Some(&v) = row.iter().find(|&&v| v < 0.0) {
                return Err(NetworkError::NegativeEntry {
                    child: child.to_string(),
                    row: i,
                    value: v,
                });
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > PROB_TOLERANCE {
                return Err(NetworkError::RowSumMismatch {
                    child: child.to_string(),
                    row: i,
                    sum,
                });
            }
        }
        self.cpts[child_id.0] = Some(Cpt {
            child: child_id,
            parents: parent_ids,
            rows,
        });
        Ok(())
    }

    /// Install a CPT without shape, row, or acyclicity checks. Used when
    /// instantiating external documents whose problems should surface
    /// through [`Network::validate`] rather than abort the load.
    pub(crate) fn set_cpt_unchecked(
        &mut self,
        child: &str,
        parents: &[&str],
        rows: Vec<Vec<f64>>,
    ) -> Result<(), NetworkError> {
        let child_id = self.require(child)?;
        let mut parent_ids = Vec::with_capacity(parents.len());
        for p in parents {
            parent_ids.push(self.require(p)?);
        }
        self.cpts[child_id.0] = Some(Cpt {
            child: child_id,
            parents: parent_ids,
            rows,
        });
        Ok(())
    }

    pub(crate) fn clear_cpt_by_index(&mut self, index: usize) {
        self.cpts[index] = None;
    }

    /// True if `to` is reachable from `from` along directed edges.
    fn reaches(&self, from: VarId, to: VarId) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.variables.len()];
        let mut stack = vec![from];
        seen[from.0] = true;
        while let Some(v) = stack.pop() {
            for (i, cpt) in self.cpts.iter().enumerate() {
                let Some(cpt) = cpt else { continue };
                if cpt.parents.contains(&v) && !seen[i] {
                    if VarId(i) == to {
                        return true;
                    }
                    seen[i] = true;
                    stack.push(VarId(i));
                }
            }
        }
        false
    }

    /// Check every structural invariant and return the violations found.
    /// An empty list means the network is well-formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (id, var) in self.variables() {
            if var.domain.len() < 2 {
                out.push(Violation {
                    subject: var.id.clone(),
                    kind: ViolationKind::Domain,
                    message: format!("domain has {} labels, need at least 2", var.domain.len()),
                });
            }
            let Some(cpt) = self.cpt(id) else {
                out.push(Violation {
                    subject: var.id.clone(),
                    kind: ViolationKind::MissingCpt,
                    message: "variable has no CPT".to_string(),
                });
                continue;
            };
            let mut parents_ok = true;
            for &p in &cpt.parents {
                if p.0 >= self.variables.len() {
                    out.push(Violation {
                        subject: var.id.clone(),
                        kind: ViolationKind::UnknownParent,
                        message: format!("parent #{} does not exist", p.0),
                    });
                    parents_ok = false;
                }
            }
            if !parents_ok {
                continue;
            }
            let expected_rows: usize = cpt.parents.iter().map(|&p| self.cardinality(p)).product();
            if cpt.rows.len() != expected_rows {
                out.push(Violation {
                    subject: var.id.clone(),
                    kind: ViolationKind::RowCount,
                    message: format!("expected {} rows, found {}", expected_rows, cpt.rows.len()),
                });
                continue;
            }
            let card = var.domain.len();
            for (i, row) in cpt.rows.iter().enumerate() {
                if row.len() != card {
                    out.push(Violation {
                        subject: var.id.clone(),
                        kind: ViolationKind::RowShape,
                        message: format!("row {} has {} entries, expected {}", i, row.len(), card),
                    });
                    continue;
                }
                if let Some(&v) = row.iter().find(|&&v| v < 0.0) {
                    out.push(Violation {
                        subject: var.id.clone(),
                        kind: ViolationKind::NegativeEntry,
                        message: format!("row {} has negative entry {}", i, v),
                    });
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > PROB_TOLERANCE {
                    out.push(Violation {
                        subject: var.id.clone(),
                        kind: ViolationKind::RowSum,
                        message: format!("row {} sums to {}", i, sum),
                    });
                }
            }
        }
        if let Some((parent, child)) = self.find_cycle_edge() {
            out.push(Violation {
                subject: self.variables[child.0].id.clone(),
                kind: ViolationKind::Cycle,
                message: format!(
                    "edge {} -> {} lies on a cycle",
                    self.variables[parent.0].id, self.variables[child.0].id
                ),
            });
        }
        out
    }

    /// Some edge on a directed cycle, if any exists.
    fn find_cycle_edge(&self) -> Option<(VarId, VarId)> {
        // Kahn's algorithm; any edge among the leftover nodes is cyclic.
        let n = self.variables.len();
        let mut indegree = vec![0usize; n];
        for (_, child) in self.edges() {
            indegree[child.0] += 1;
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut removed = 0;
        while let Some(v) = queue.pop() {
            removed += 1;
            for (p, c) in self.edges() {
                if p.0 == v {
                    indegree[c.0] -= 1;
                    if indegree[c.0] == 0 {
                        queue.push(c.0);
                    }
                }
            }
        }
        if removed == n {
            return None;
        }
        // Every leftover node has an incoming edge from another leftover node.
        let leftover: Vec<usize> = (0..n).filter(|&i| indegree[i] > 0).collect();
        for &c in &leftover {
            if let Some(cpt) = self.cpt(VarId(c)) {
                for &p in &cpt.parents {
                    if leftover.contains(&p.0) {
                        return Some((p, VarId(c)));
                    }
                }
            }
        }
        None
    }

    /// Parents-before-children order. Ties among ready variables break by
    /// stage rank first, then lexicographically by id, so time-tagged
    /// networks come out stage by stage (all `t1` before any `t2`) and
    /// untagged ones purely lexicographically. Deterministic either way.
    pub fn topological_order(&self) -> Result<Vec<VarId>, NetworkError> {
        let n = self.variables.len();
        let mut indegree = vec![0usize; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (p, c) in self.edges() {
            indegree[c.0] += 1;
            children[p.0].push(c.0);
        }
        let key = |i: usize| (self.variables[i].time.rank(), self.variables[i].id.as_str());
        let mut ready: BTreeMap<(u8, &str), usize> = (0..n)
            .filter(|&i| indegree[i] == 0)
            .map(|i| (key(i), i))
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some((&k, &i)) = ready.iter().next() {
            ready.remove(&k);
            order.push(VarId(i));
            for &c in &children[i] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(key(c), c);
                }
            }
        }
        if order.len() != n {
            return Err(NetworkError::CycleDetected);
        }
        Ok(order)
    }

    /// Chain-rule probability of a total assignment.
    pub fn joint_probability(&self, a: &Assignment) -> Result<f64, NetworkError> {
        let mut values = vec![0usize; self.variables.len()];
        for (id, var) in self.variables() {
            let label = a
                .get(&var.id)
                .ok_or_else(|| NetworkError::PartialAssignment(var.id.clone()))?;
            values[id.0] = var.domain.index_of(label).ok_or_else(|| {
                NetworkError::UnknownLabel {
                    variable: var.id.clone(),
                    label: label.to_string(),
                }
            })?;
        }
        self.joint_probability_indices(&values)
    }

    /// Chain-rule probability from label indices, ordered by `VarId`.
    pub fn joint_probability_indices(&self, values: &[usize]) -> Result<f64, NetworkError> {
        let mut product = 1.0;
        for id in self.var_ids() {
            let cpt = self.require_cpt(id)?;
            let cards: Vec<usize> = cpt.parents.iter().map(|&p| self.cardinality(p)).collect();
            let pv: Vec<usize> = cpt.parents.iter().map(|&p| values[p.0]).collect();
            let row = cpt.row_index(&pv, &cards);
            product *= cpt.rows[row][values[id.0]];
            if product == 0.0 {
                return Ok(0.0);
            }
        }
        Ok(product)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_var_net() -> Network {
        let mut net = Network::new();
        net.add_variable(
            "A",
            Domain::new(["0", "1"]).unwrap(),
            Role::Context,
            TimeIndex::Atemporal,
            true,
        )
        .unwrap();
        net.add_variable(
            "B",
            Domain::new(["0", "1"]).unwrap(),
            Role::Context,
            TimeIndex::Atemporal,
            true,
        )
        .unwrap();
        net.set_cpt("A", &[], vec![vec![0.3, 0.7]]).unwrap();
        net.set_cpt("B", &["A"], vec![vec![0.5, 0.5], vec![0.2, 0.8]])
            .unwrap();
        net
    }

    #[test]
    fn add_variable_uniform_prior() {
        let mut net = Network::new();
        let id = net
            .add_variable(
                "x position t0",
                Domain::new(["off", "right", "middle", "left"]).unwrap(),
                Role::Context,
                TimeIndex::T0,
                true,
            )
            .unwrap();
        let cpt = net.cpt(id).unwrap();
        assert!(cpt.parents().is_empty());
        assert_eq!(cpt.rows(), &[vec![0.25, 0.25, 0.25, 0.25]]);
    }

    #[test]
    fn duplicate_variable_rejected() {
        let mut net = Network::new();
        net.add_variable(
            "a",
            Domain::boolean(),
            Role::Context,
            TimeIndex::T0,
            true,
        )
        .unwrap();
        let err = net.add_variable(
            "a",
            Domain::boolean(),
            Role::Context,
            TimeIndex::T0,
            true,
        );
        assert!(matches!(err, Err(NetworkError::DuplicateVariable(_))));
    }

    #[test]
    fn variable_count_increments() {
        let mut net = Network::new();
        assert_eq!(net.len(), 0);
        net.add_variable(
            "gen maneuver",
            Domain::new(["stay", "left1", "right1", "left2", "right2", "enter", "exit", "pass"])
                .unwrap(),
            Role::Plan,
            TimeIndex::Atemporal,
            false,
        )
        .unwrap();
        assert_eq!(net.len(), 1);
    }

    #[test]
    fn short_domain_rejected() {
        assert!(matches!(
            Domain::new(["only"]),
            Err(NetworkError::DomainTooSmall { len: 1 })
        ));
        assert!(matches!(
            Domain::new(["a", "a"]),
            Err(NetworkError::DuplicateLabel { .. })
        ));
    }

    #[test]
    fn two_cycle_rejected() {
        let mut net = two_var_net();
        let err = net.set_cpt("A", &["B"], vec![vec![0.5, 0.5], vec![0.5, 0.5]]);
        assert!(matches!(err, Err(NetworkError::CycleIntroduced { .. })));
    }

    #[test]
    fn bad_row_sum_rejected() {
        let mut net = two_var_net();
        let err = net.set_cpt("B", &["A"], vec![vec![0.5, 0.6], vec![0.5, 0.5]]);
        match err {
            Err(NetworkError::RowSumMismatch { row, sum, .. }) => {
                assert_eq!(row, 0);
                assert!((sum - 1.1).abs() < 1e-12);
            }
            other => panic!("expected row-sum error, got {other:?}"),
        }
    }

    #[test]
    fn negative_entry_rejected() {
        let mut net = two_var_net();
        let err = net.set_cpt("B", &["A"], vec![vec![1.2, -0.2], vec![0.5, 0.5]]);
        assert!(matches!(err, Err(NetworkError::NegativeEntry { .. })));
    }

    #[test]
    fn shape_mismatch_rejected() {
        let mut net = two_var_net();
        let err = net.set_cpt("B", &["A"], vec![vec![1.0]]);
        assert!(matches!(err, Err(NetworkError::RowCountMismatch { .. })));
        let err = net.set_cpt("B", &["A"], vec![vec![0.5, 0.25, 0.25], vec![1.0, 0.0]]);
        assert!(matches!(err, Err(NetworkError::RowLengthMismatch { .. })));
    }

    #[test]
    fn topological_chain() {
        let mut net = Network::new();
        for name in ["A", "B", "C"] {
            net.add_variable(name, Domain::boolean(), Role::Context, TimeIndex::T0, true)
                .unwrap();
        }
        net.set_cpt("B", &["A"], vec![vec![0.5, 0.5]; 2]).unwrap();
        net.set_cpt("C", &["B"], vec![vec![0.5, 0.5]; 2]).unwrap();
        let order = net.topological_order().unwrap();
        let names: Vec<&str> = order.iter().map(|&v| net.variable(v).id.as_str()).collect();
        assert_eq!(names, ["A", "B", "C"]);
    }

    #[test]
    fn topological_ties_lexicographic() {
        let mut net = Network::new();
        net.add_variable("b", Domain::boolean(), Role::Context, TimeIndex::T0, true)
            .unwrap();
        net.add_variable("a", Domain::boolean(), Role::Context, TimeIndex::T0, true)
            .unwrap();
        let order = net.topological_order().unwrap();
        let names: Vec<&str> = order.iter().map(|&v| net.variable(v).id.as_str()).collect();
        assert_eq!(names, ["a", "b"]);
    }

    #[test]
    fn joint_probability_matches_hand_arithmetic() {
        let net = two_var_net();
        let a: Assignment = [("A", "0"), ("B", "1")].into_iter().collect();
        assert!((net.joint_probability(&a).unwrap() - 0.15).abs() < 1e-12);
    }

    #[test]
    fn joint_probability_zero_annihilates() {
        let mut net = two_var_net();
        net.set_cpt("B", &["A"], vec![vec![0.0, 1.0], vec![1.0, 0.0]])
            .unwrap();
        let a: Assignment = [("A", "0"), ("B", "0")].into_iter().collect();
        assert_eq!(net.joint_probability(&a).unwrap(), 0.0);
    }

    #[test]
    fn joint_probability_requires_total_assignment() {
        let net = two_var_net();
        let a: Assignment = [("A", "0")].into_iter().collect();
        assert!(matches!(
            net.joint_probability(&a),
            Err(NetworkError::PartialAssignment(_))
        ));
    }

    #[test]
    fn joint_sums_to_one_over_all_assignments() {
        let mut net = two_var_net();
        net.add_variable(
            "C",
            Domain::new(["x", "y", "z"]).unwrap(),
            Role::Context,
            TimeIndex::Atemporal,
            true,
        )
        .unwrap();
        net.set_cpt(
            "C",
            &["B"],
            vec![vec![0.2, 0.3, 0.5], vec![0.6, 0.1, 0.3]],
        )
        .unwrap();
        let mut total = 0.0;
        for a in ["0", "1"] {
            for b in ["0", "1"] {
                for c in ["x", "y", "z"] {
                    let assn: Assignment =
                        [("A", a), ("B", b), ("C", c)].into_iter().collect();
                    total += net.joint_probability(&assn).unwrap();
                }
            }
        }
        assert!((total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn joint_multiplicative_over_disjoint_union() {
        // P_combined(a ∪ b) = P_1(a) · P_2(b) when the components share nothing.
        let binary = || Domain::new(["0", "1"]).unwrap();
        let mut combined = Network::new();
        for name in ["A", "B"] {
            combined
                .add_variable(name, binary(), Role::Context, TimeIndex::T0, true)
                .unwrap();
        }
        combined.set_cpt("A", &[], vec![vec![0.3, 0.7]]).unwrap();
        combined
            .set_cpt("B", &["A"], vec![vec![0.5, 0.5], vec![0.2, 0.8]])
            .unwrap();
        for name in ["C", "D"] {
            combined
                .add_variable(name, binary(), Role::Context, TimeIndex::T0, true)
                .unwrap();
        }
        combined.set_cpt("C", &[], vec![vec![0.9, 0.1]]).unwrap();
        combined
            .set_cpt("D", &["C"], vec![vec![0.4, 0.6], vec![1.0, 0.0]])
            .unwrap();

        let first = two_var_net();
        let mut second = Network::new();
        for name in ["C", "D"] {
            second
                .add_variable(name, binary(), Role::Context, TimeIndex::T0, true)
                .unwrap();
        }
        second.set_cpt("C", &[], vec![vec![0.9, 0.1]]).unwrap();
        second
            .set_cpt("D", &["C"], vec![vec![0.4, 0.6], vec![1.0, 0.0]])
            .unwrap();

        for a in ["0", "1"] {
            for b in ["0", "1"] {
                for c in ["0", "1"] {
                    for d in ["0", "1"] {
                        let whole: Assignment = [("A", a), ("B", b), ("C", c), ("D", d)]
                            .into_iter()
                            .collect();
                        let left: Assignment = [("A", a), ("B", b)].into_iter().collect();
                        let right: Assignment = [("C", c), ("D", d)].into_iter().collect();
                        let p = combined.joint_probability(&whole).unwrap();
                        let q = first.joint_probability(&left).unwrap()
                            * second.joint_probability(&right).unwrap();
                        assert!((p - q).abs() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn validate_clean_network() {
        assert!(two_var_net().validate().is_empty());
    }

    #[test]
    fn evidence_compile_rejects_unknown() {
        let net = two_var_net();
        let e: Evidence = [("A", "2")].into_iter().collect();
        assert!(matches!(
            e.compile(&net),
            Err(NetworkError::UnknownLabel { .. })
        ));
        let e: Evidence = [("missing", "0")].into_iter().collect();
        assert!(matches!(
            e.compile(&net),
            Err(NetworkError::UnknownVariable(_))
        ));
    }
}
