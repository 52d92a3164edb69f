//! Plan-recognition scaffolding: structural role rules and query wrappers.
//!
//! The causal story runs Context → MentalState → Plan → Activity/
//! Communication → Effect, and never backward in time. Each rule below is
//! decidable from network structure alone and can be toggled off for
//! planning models that reverse some links.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::inference::{posterior, InferenceError, Posterior};
use crate::network::{Evidence, Network, Role, TimeIndex};

/// Which structural rules to enforce. All on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RoleRuleSet {
    /// R1: Context variables have only Context parents.
    pub context_closure: bool,
    /// R2: MentalState parents are Context or MentalState.
    pub mental_sources: bool,
    /// R3: Plan parents are MentalState, Context, or Plan.
    pub plan_sources: bool,
    /// R4: Activity and Communication parents are Plan, Activity, or
    /// Communication (the plan is a sufficient specification of activity).
    pub activity_sources: bool,
    /// R5: Effect parents are Context, Activity, or Effect.
    pub effect_sources: bool,
    /// R6: no edge from a later time tag to a strictly earlier one.
    pub time_ordering: bool,
}

impl Default for RoleRuleSet {
    fn default() -> Self {
        RoleRuleSet {
            context_closure: true,
            mental_sources: true,
            plan_sources: true,
            activity_sources: true,
            effect_sources: true,
            time_ordering: true,
        }
    }
}

/// One structural rule broken by one concrete edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoleViolation {
    /// Rule identifier: `R1` through `R6`.
    pub rule: &'static str,
    pub parent: String,
    pub child: String,
    pub message: String,
}

impl std::fmt::Display for RoleViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] edge {} -> {}: {}",
            self.rule, self.parent, self.child, self.message
        )
    }
}

#[derive(Debug, Error)]
pub enum RecognitionError {
    #[error("evidence variable `{variable}` has role {role} and is not observable")]
    UnobservableEvidence { variable: String, role: Role },
    #[error("prediction time must be t1 or t2, got {0}")]
    InvalidPredictionTime(TimeIndex),
    #[error("{0}")]
    Inference(#[from] InferenceError),
}

/// Check a bare structure: `(id, role, time)` per variable plus a list of
/// `(parent, child)` edges. Used directly by fault-injection tests, which
/// need to probe edges a valid network could never hold.
pub fn validate_structure(
    variables: &[(String, Role, TimeIndex)],
    edges: &[(String, String)],
    rules: &RoleRuleSet,
) -> Vec<RoleViolation> {
    let lookup: BTreeMap<&str, (Role, TimeIndex)> = variables
        .iter()
        .map(|(id, role, time)| (id.as_str(), (*role, *time)))
        .collect();
    let mut out = Vec::new();
    for (parent, child) in edges {
        let Some(&(p_role, p_time)) = lookup.get(parent.as_str()) else {
            continue;
        };
        let Some(&(c_role, c_time)) = lookup.get(child.as_str()) else {
            continue;
        };
        let allowed: (&'static str, bool, &[Role]) = match c_role {
            Role::Context => ("R1", rules.context_closure, &[Role::Context]),
            Role::MentalState => (
                "R2",
                rules.mental_sources,
                &[Role::Context, Role::MentalState],
            ),
            Role::Plan => (
                "R3",
                rules.plan_sources,
                &[Role::MentalState, Role::Context, Role::Plan],
            ),
            Role::Activity | Role::Communication => (
                "R4",
                rules.activity_sources,
                &[Role::Plan, Role::Activity, Role::Communication],
            ),
            Role::Effect => (
                "R5",
                rules.effect_sources,
                &[Role::Context, Role::Activity, Role::Effect],
            ),
        };
        let (rule, enabled, roles) = allowed;
        if enabled && !roles.contains(&p_role) {
            out.push(RoleViolation {
                rule,
                parent: parent.clone(),
                child: child.clone(),
                message: format!(
                    "{} variable may not have a {} parent",
                    c_role.name(),
                    p_role.name()
                ),
            });
        }
        if rules.time_ordering && p_time.rank() > c_time.rank() {
            out.push(RoleViolation {
                rule: "R6",
                parent: parent.clone(),
                child: child.clone(),
                message: format!("edge points backward in time ({} -> {})", p_time, c_time),
            });
        }
    }
    out
}

/// Check every edge of a network against the default rule set.
pub fn validate_roles(net: &Network) -> Vec<RoleViolation> {
    validate_roles_with(net, &RoleRuleSet::default())
}

pub fn validate_roles_with(net: &Network, rules: &RoleRuleSet) -> Vec<RoleViolation> {
    let variables: Vec<(String, Role, TimeIndex)> = net
        .variables()
        .map(|(_, v)| (v.id.clone(), v.role, v.time))
        .collect();
    let edges: Vec<(String, String)> = net
        .edges()
        .map(|(p, c)| (net.variable(p).id.clone(), net.variable(c).id.clone()))
        .collect();
    validate_structure(&variables, &edges, rules)
}

fn check_observable(net: &Network, e: &Evidence) -> Result<(), RecognitionError> {
    for (name, _) in e.iter() {
        if let Some(id) = net.var_id(name) {
            let var = net.variable(id);
            if !var.observable {
                return Err(RecognitionError::UnobservableEvidence {
                    variable: var.id.clone(),
                    role: var.role,
                });
            }
        }
    }
    Ok(())
}

/// Posterior for every Plan variable under the evidence.
pub fn recognize(
    net: &Network,
    e: &Evidence,
) -> Result<BTreeMap<String, Posterior>, RecognitionError> {
    check_observable(net, e)?;
    let targets: Vec<String> = net
        .variables()
        .filter(|(_, v)| v.role == Role::Plan)
        .map(|(_, v)| v.id.clone())
        .collect();
    query_many(net, e, targets)
}

/// Posterior for every Effect variable at the given stage.
pub fn predict(
    net: &Network,
    e: &Evidence,
    time: TimeIndex,
) -> Result<BTreeMap<String, Posterior>, RecognitionError> {
    if !matches!(time, TimeIndex::T1 | TimeIndex::T2) {
        return Err(RecognitionError::InvalidPredictionTime(time));
    }
    check_observable(net, e)?;
    let targets: Vec<String> = net
        .variables()
        .filter(|(_, v)| v.role == Role::Effect && v.time == time)
        .map(|(_, v)| v.id.clone())
        .collect();
    query_many(net, e, targets)
}

fn query_many(
    net: &Network,
    e: &Evidence,
    targets: Vec<String>,
) -> Result<BTreeMap<String, Posterior>, RecognitionError> {
    #[cfg(feature = "parallel")]
    let results: Vec<Result<(String, Posterior), InferenceError>> = {
        use rayon::prelude::*;
        targets
            .into_par_iter()
            .map(|t| posterior(net, e, &t).map(|p| (t, p)))
            .collect()
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<(String, Posterior), InferenceError>> = targets
        .into_iter()
        .map(|t| posterior(net, e, &t).map(|p| (t, p)))
        .collect();
    let mut out = BTreeMap::new();
    for r in results {
        let (name, p) = r?;
        out.insert(name, p);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Domain;

    fn tagged(id: &str, role: Role, time: TimeIndex) -> (String, Role, TimeIndex) {
        (id.to_string(), role, time)
    }

    fn edge(p: &str, c: &str) -> (String, String) {
        (p.to_string(), c.to_string())
    }

    #[test]
    fn plan_parent_of_context_violates_r1() {
        let vars = vec![
            tagged("left clr t0", Role::Context, TimeIndex::T0),
            tagged("gen maneuver", Role::Plan, TimeIndex::Atemporal),
        ];
        let edges = vec![edge("gen maneuver", "left clr t0")];
        let violations = validate_structure(&vars, &edges, &RoleRuleSet::default());
        // The same edge also runs backward in time (atemporal after t0).
        assert!(violations.iter().any(|v| v.rule == "R1"));
        assert!(violations
            .iter()
            .all(|v| v.parent == "gen maneuver" && v.child == "left clr t0"));
    }

    #[test]
    fn backward_time_edge_violates_r6() {
        let vars = vec![
            tagged("x position t2", Role::Effect, TimeIndex::T2),
            tagged("lat act m0", Role::Activity, TimeIndex::M0),
        ];
        let edges = vec![edge("x position t2", "lat act m0")];
        let violations = validate_structure(&vars, &edges, &RoleRuleSet::default());
        assert!(violations.iter().any(|v| v.rule == "R6"));
    }

    #[test]
    fn disabled_rule_stays_silent() {
        let vars = vec![
            tagged("c", Role::Context, TimeIndex::T0),
            tagged("p", Role::Plan, TimeIndex::Atemporal),
        ];
        let edges = vec![edge("p", "c")];
        let rules = RoleRuleSet {
            context_closure: false,
            time_ordering: false,
            ..RoleRuleSet::default()
        };
        assert!(validate_structure(&vars, &edges, &rules).is_empty());
    }

    #[test]
    fn recognize_rejects_unobservable_evidence() {
        let mut net = Network::new();
        net.add_variable(
            "lat act m0",
            Domain::new(["left", "same", "right"]).unwrap(),
            Role::Activity,
            TimeIndex::M0,
            false,
        )
        .unwrap();
        net.add_variable(
            "gen maneuver",
            Domain::new(["stay", "pass"]).unwrap(),
            Role::Plan,
            TimeIndex::Atemporal,
            false,
        )
        .unwrap();
        let e: Evidence = [("lat act m0", "left")].into_iter().collect();
        match recognize(&net, &e) {
            Err(RecognitionError::UnobservableEvidence { variable, role }) => {
                assert_eq!(variable, "lat act m0");
                assert_eq!(role, Role::Activity);
            }
            other => panic!("expected unobservable-evidence error, got {other:?}"),
        }
    }

    #[test]
    fn recognize_with_empty_evidence_returns_priors() {
        let mut net = Network::new();
        net.add_variable(
            "ctx",
            Domain::boolean(),
            Role::Context,
            TimeIndex::T0,
            true,
        )
        .unwrap();
        net.add_variable(
            "plan",
            Domain::new(["a", "b", "c"]).unwrap(),
            Role::Plan,
            TimeIndex::Atemporal,
            false,
        )
        .unwrap();
        net.set_cpt("ctx", &[], vec![vec![0.4, 0.6]]).unwrap();
        net.set_cpt(
            "plan",
            &["ctx"],
            vec![vec![0.5, 0.25, 0.25], vec![0.1, 0.2, 0.7]],
        )
        .unwrap();
        let result = recognize(&net, &Evidence::new()).unwrap();
        assert_eq!(result.len(), 1);
        let p = &result["plan"];
        assert!((p.probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        // Prior marginal: 0.4 · row0 + 0.6 · row1.
        assert!((p.probs[0] - (0.4 * 0.5 + 0.6 * 0.1)).abs() < 1e-12);
    }

    #[test]
    fn predict_requires_t1_or_t2() {
        let net = Network::new();
        assert!(matches!(
            predict(&net, &Evidence::new(), TimeIndex::T0),
            Err(RecognitionError::InvalidPredictionTime(_))
        ));
    }
}
