//! Exact posterior computation.
//!
//! Two independent routes answer the same query: [`posterior`] runs variable
//! elimination with a greedy min-fill ordering, and [`enumerate_posterior`]
//! sums the chain rule over every completion of the evidence. The second is
//! the verification oracle for the first and shares none of its factor
//! machinery.
//!
//! Inconsistent evidence (total mass below `1e-300`) is a distinguished
//! error rather than a mid-computation panic, so front ends can render it.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::factor::{Factor, FactorError};
use crate::network::{Evidence, Network, NetworkError, VarId};

/// Default cap on the number of joint states the enumeration oracle will
/// visit (nominal count, before zero-probability pruning).
pub const DEFAULT_STATE_CAP: u128 = 100_000_000;

/// Total evidence mass at or below this threshold is reported as
/// inconsistent evidence.
pub const INCONSISTENT_MASS: f64 = 1e-300;

#[cfg(feature = "parallel")]
const PAR_SPLIT_THRESHOLD: u128 = 1 << 14;

#[derive(Debug, Error)]
pub enum InferenceError {
    #[error("evidence has zero probability under the network")]
    InconsistentEvidence,
    #[error("enumeration needs {states} states, above the cap of {cap}")]
    StateSpaceExceeded { states: u128, cap: u128 },
    #[error("joint queries support at most 3 targets, got {0}")]
    TooManyTargets(usize),
    #[error("{0}")]
    Network(#[from] NetworkError),
    #[error("{0}")]
    Factor(#[from] FactorError),
}

/// Exact conditional distribution over one variable.
#[derive(Debug, Clone)]
pub struct Posterior {
    pub target: String,
    pub labels: Vec<String>,
    pub probs: Vec<f64>,
    /// Unnormalized evidence likelihood P(e), the normalizer of `probs`.
    pub evidence_mass: f64,
}

impl Posterior {
    /// Label with maximal probability; ties break to the lowest index.
    pub fn argmax(&self) -> &str {
        let mut best = 0;
        for (i, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = i;
            }
        }
        &self.labels[best]
    }

    pub fn prob(&self, label: &str) -> Option<f64> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.probs[i])
    }
}

/// Greedy min-fill elimination order over the moralized graph, covering
/// every variable outside `keep`. Ties break lexicographically by id.
pub fn min_fill_order(net: &Network, keep: &BTreeSet<VarId>) -> Vec<VarId> {
    let n = net.len();
    let mut adjacent = vec![vec![false; n]; n];
    let connect = |a: VarId, b: VarId, adjacent: &mut Vec<Vec<bool>>| {
        if a != b {
            adjacent[a.index()][b.index()] = true;
            adjacent[b.index()][a.index()] = true;
        }
    };
    for id in net.var_ids() {
        let parents = net.parents(id);
        for &p in parents {
            connect(p, id, &mut adjacent);
        }
        for (i, &p) in parents.iter().enumerate() {
            for &q in &parents[i + 1..] {
                connect(p, q, &mut adjacent);
            }
        }
    }
    let mut remaining: Vec<VarId> = net.var_ids().filter(|v| !keep.contains(v)).collect();
    // Lexicographic candidate order makes the min_by_key tie-break stable.
    remaining.sort_by(|&a, &b| net.variable(a).id.cmp(&net.variable(b).id));
    let mut alive: Vec<bool> = vec![true; n];
    let mut order = Vec::with_capacity(remaining.len());
    while !remaining.is_empty() {
        let (pick, _) = remaining
            .iter()
            .enumerate()
            .map(|(i, &v)| (i, fill_in_count(&adjacent, &alive, v)))
            .min_by_key(|&(_, fill)| fill)
            .expect("remaining is non-empty");
        let v = remaining.remove(pick);
        let neighbors: Vec<usize> = (0..n)
            .filter(|&i| alive[i] && adjacent[v.index()][i])
            .collect();
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                adjacent[a][b] = true;
                adjacent[b][a] = true;
            }
        }
        alive[v.index()] = false;
        order.push(v);
    }
    order
}

fn fill_in_count(adjacent: &[Vec<bool>], alive: &[bool], v: VarId) -> usize {
    let neighbors: Vec<usize> = (0..alive.len())
        .filter(|&i| alive[i] && adjacent[v.index()][i])
        .collect();
    let mut fill = 0;
    for (i, &a) in neighbors.iter().enumerate() {
        for &b in &neighbors[i + 1..] {
            if !adjacent[a][b] {
                fill += 1;
            }
        }
    }
    fill
}

/// Multiply out all CPT factors reduced by `evidence`, eliminating the
/// variables in `order` as they appear. Variables already removed by the
/// reduction eliminate as no-ops.
fn run_elimination(
    net: &Network,
    evidence: &[(VarId, usize)],
    order: &[VarId],
) -> Result<Factor, InferenceError> {
    let mut factors: Vec<Factor> = Vec::with_capacity(net.len());
    for id in net.var_ids() {
        factors.push(Factor::from_cpt(net, id)?.reduce(evidence));
    }
    for &v in order {
        let (mentioning, rest): (Vec<Factor>, Vec<Factor>) = factors
            .into_iter()
            .partition(|f| f.scope().contains(&v));
        factors = rest;
        if mentioning.is_empty() {
            continue;
        }
        let mut product = mentioning[0].clone();
        for f in &mentioning[1..] {
            product = product.product(f)?;
        }
        factors.push(product.marginalize(v)?);
    }
    let mut result = Factor::scalar(1.0);
    for f in &factors {
        result = result.product(f)?;
    }
    Ok(result)
}

/// Exact P(target | evidence) by variable elimination under min-fill.
pub fn posterior(net: &Network, e: &Evidence, target: &str) -> Result<Posterior, InferenceError> {
    let target_id = net.require(target)?;
    let order = min_fill_order(net, &BTreeSet::from([target_id]));
    posterior_impl(net, e, target_id, &order)
}

/// Exact P(target | evidence) with a caller-chosen elimination order, which
/// must cover every variable except the target.
pub fn posterior_with_order(
    net: &Network,
    e: &Evidence,
    target: &str,
    order: &[VarId],
) -> Result<Posterior, InferenceError> {
    let target_id = net.require(target)?;
    posterior_impl(net, e, target_id, order)
}

fn posterior_impl(
    net: &Network,
    e: &Evidence,
    target_id: VarId,
    order: &[VarId],
) -> Result<Posterior, InferenceError> {
    let compiled = e.compile(net)?;
    let target_binding = compiled
        .iter()
        .find(|(v, _)| *v == target_id)
        .map(|&(_, val)| val);
    let reduced: Vec<(VarId, usize)> = compiled
        .into_iter()
        .filter(|(v, _)| *v != target_id)
        .collect();
    let result = run_elimination(net, &reduced, order)?;
    debug_assert_eq!(result.scope(), &[target_id]);
    let masses = result.values().to_vec();
    finish_posterior(net, target_id, masses, target_binding)
}

fn finish_posterior(
    net: &Network,
    target_id: VarId,
    masses: Vec<f64>,
    target_binding: Option<usize>,
) -> Result<Posterior, InferenceError> {
    let var = net.variable(target_id);
    let (mass, probs) = match target_binding {
        Some(observed) => {
            let mass = masses[observed];
            let mut probs = vec![0.0; masses.len()];
            probs[observed] = 1.0;
            (mass, probs)
        }
        None => {
            let mass: f64 = masses.iter().sum();
            (mass, masses.iter().map(|m| m / mass).collect())
        }
    };
    if mass <= INCONSISTENT_MASS {
        return Err(InferenceError::InconsistentEvidence);
    }
    Ok(Posterior {
        target: var.id.clone(),
        labels: var.domain.labels().to_vec(),
        probs,
        evidence_mass: mass,
    })
}

/// Exact normalized joint over up to three target variables given evidence.
/// The result factor's scope follows the order of `targets`.
pub fn joint_posterior(
    net: &Network,
    e: &Evidence,
    targets: &[&str],
) -> Result<Factor, InferenceError> {
    if targets.len() > 3 {
        return Err(InferenceError::TooManyTargets(targets.len()));
    }
    let mut target_ids = Vec::with_capacity(targets.len());
    for t in targets {
        target_ids.push(net.require(t)?);
    }
    let keep: BTreeSet<VarId> = target_ids.iter().copied().collect();
    let compiled = e.compile(net)?;
    let reduced: Vec<(VarId, usize)> = compiled
        .iter()
        .copied()
        .filter(|(v, _)| !keep.contains(v))
        .collect();
    let order = min_fill_order(net, &keep);
    let mut result = run_elimination(net, &reduced, &order)?;
    // Targets bound in the evidence become indicator slices.
    for &(v, val) in compiled.iter().filter(|(v, _)| keep.contains(v)) {
        let card = net.cardinality(v);
        let mut one_hot = vec![0.0; card];
        one_hot[val] = 1.0;
        result = result.product(&Factor::new(vec![v], vec![card], one_hot))?;
    }
    let mass = result.total_mass();
    if mass <= INCONSISTENT_MASS {
        return Err(InferenceError::InconsistentEvidence);
    }
    Ok(result.normalized().aligned_to(&target_ids)?)
}

/// Exact P(target | evidence) by summing the chain rule over every
/// completion of the evidence, with the default state cap.
pub fn enumerate_posterior(
    net: &Network,
    e: &Evidence,
    target: &str,
) -> Result<Posterior, InferenceError> {
    enumerate_posterior_capped(net, e, target, DEFAULT_STATE_CAP)
}

/// [`enumerate_posterior`] with an explicit state cap.
pub fn enumerate_posterior_capped(
    net: &Network,
    e: &Evidence,
    target: &str,
    cap: u128,
) -> Result<Posterior, InferenceError> {
    let plan = EnumerationPlan::prepare(net, e, target, cap)?;
    let masses = {
        #[cfg(feature = "parallel")]
        {
            plan.run_parallel()
        }
        #[cfg(not(feature = "parallel"))]
        {
            plan.run_sequential()
        }
    };
    finish_posterior(net, plan.target, masses, plan.target_binding)
}

/// Always-sequential enumeration, kept callable alongside the parallel
/// default so the two can be compared directly.
pub fn enumerate_posterior_seq(
    net: &Network,
    e: &Evidence,
    target: &str,
    cap: u128,
) -> Result<Posterior, InferenceError> {
    let plan = EnumerationPlan::prepare(net, e, target, cap)?;
    let masses = plan.run_sequential();
    finish_posterior(net, plan.target, masses, plan.target_binding)
}

/// Per-variable CPT data flattened for fast row lookup during enumeration.
struct PackedCpt {
    parents: Vec<usize>,
    parent_cards: Vec<usize>,
    child_card: usize,
    values: Vec<f64>,
}

struct EnumerationPlan<'a> {
    net: &'a Network,
    topo: Vec<VarId>,
    packed: Vec<PackedCpt>,
    bound: Vec<Option<usize>>,
    /// Nominal joint states below each topo depth, for split decisions.
    suffix_states: Vec<u128>,
    target: VarId,
    target_binding: Option<usize>,
}

impl<'a> EnumerationPlan<'a> {
    fn prepare(
        net: &'a Network,
        e: &Evidence,
        target: &str,
        cap: u128,
    ) -> Result<Self, InferenceError> {
        let target_id = net.require(target)?;
        let compiled = e.compile(net)?;
        let mut bound = vec![None; net.len()];
        for (v, val) in &compiled {
            bound[v.index()] = Some(*val);
        }
        let states: u128 = net
            .var_ids()
            .filter(|v| bound[v.index()].is_none())
            .map(|v| net.cardinality(v) as u128)
            .try_fold(1u128, u128::checked_mul)
            .unwrap_or(u128::MAX);
        if states > cap {
            return Err(InferenceError::StateSpaceExceeded { states, cap });
        }
        let topo = net.topological_order()?;
        let mut packed = Vec::with_capacity(net.len());
        for id in net.var_ids() {
            let cpt = net.require_cpt(id)?;
            packed.push(PackedCpt {
                parents: cpt.parents().iter().map(|p| p.index()).collect(),
                parent_cards: cpt
                    .parents()
                    .iter()
                    .map(|&p| net.cardinality(p))
                    .collect(),
                child_card: net.cardinality(id),
                values: cpt.rows().iter().flatten().copied().collect(),
            });
        }
        let mut suffix_states = vec![1u128; topo.len() + 1];
        for depth in (0..topo.len()).rev() {
            let v = topo[depth];
            let here = if bound[v.index()].is_none() {
                net.cardinality(v) as u128
            } else {
                1
            };
            suffix_states[depth] = suffix_states[depth + 1].saturating_mul(here);
        }
        Ok(EnumerationPlan {
            net,
            topo,
            packed,
            bound,
            suffix_states,
            target: target_id,
            target_binding: compiled
                .iter()
                .find(|(v, _)| *v == target_id)
                .map(|&(_, val)| val),
        })
    }

    fn row_slice(&self, var: usize, values: &[usize]) -> &[f64] {
        let p = &self.packed[var];
        let mut row = 0;
        for (&parent, &card) in p.parents.iter().zip(&p.parent_cards) {
            row = row * card + values[parent];
        }
        &p.values[row * p.child_card..(row + 1) * p.child_card]
    }

    fn run_sequential(&self) -> Vec<f64> {
        let mut acc = vec![0.0; self.net.cardinality(self.target)];
        let mut values = vec![0usize; self.net.len()];
        self.dfs(0, &mut values, 1.0, &mut acc);
        acc
    }

    /// Depth-first sum over completions; zero-probability branches prune.
    fn dfs(&self, depth: usize, values: &mut [usize], product: f64, acc: &mut [f64]) {
        if depth == self.topo.len() {
            acc[values[self.target.index()]] += product;
            return;
        }
        let var = self.topo[depth].index();
        let row = self.row_slice(var, values);
        match self.bound[var] {
            Some(val) => {
                let p = row[val];
                if p > 0.0 {
                    values[var] = val;
                    self.dfs(depth + 1, values, product * p, acc);
                }
            }
            None => {
                for val in 0..row.len() {
                    let p = row[val];
                    if p > 0.0 {
                        values[var] = val;
                        self.dfs(depth + 1, values, product * p, acc);
                    }
                }
            }
        }
    }

    #[cfg(feature = "parallel")]
    fn run_parallel(&self) -> Vec<f64> {
        let values = vec![0usize; self.net.len()];
        self.dfs_split(0, values, 1.0)
    }

    /// Parallel variant: branch the first deep-enough levels across the
    /// rayon pool, then fold per-branch subtotals in branch order so the
    /// result does not depend on scheduling.
    #[cfg(feature = "parallel")]
    fn dfs_split(&self, depth: usize, mut values: Vec<usize>, product: f64) -> Vec<f64> {
        use rayon::prelude::*;

        let card = self.net.cardinality(self.target);
        if depth == self.topo.len() || self.suffix_states[depth] <= PAR_SPLIT_THRESHOLD {
            let mut acc = vec![0.0; card];
            self.dfs(depth, &mut values, product, &mut acc);
            return acc;
        }
        let var = self.topo[depth].index();
        let row = self.row_slice(var, &values);
        let candidates: Vec<usize> = match self.bound[var] {
            Some(val) => vec![val],
            None => (0..row.len()).collect(),
        };
        let branches: Vec<(usize, f64)> = candidates
            .into_iter()
            .filter_map(|val| {
                let p = row[val];
                (p > 0.0).then_some((val, product * p))
            })
            .collect();
        let partials: Vec<Vec<f64>> = branches
            .par_iter()
            .map(|&(val, branch_product)| {
                let mut branch_values = values.clone();
                branch_values[var] = val;
                self.dfs_split(depth + 1, branch_values, branch_product)
            })
            .collect();
        let mut acc = vec![0.0; card];
        for partial in partials {
            for (a, p) in acc.iter_mut().zip(partial) {
                *a += p;
            }
        }
        acc
    }
}
