//! Factor algebra: the computational carrier for exact inference.
//!
//! A factor is a nonnegative table over the joint assignments of its scope,
//! laid out with the last scope variable varying fastest (the same
//! convention as CPT rows). An empty scope is a single scalar.

use thiserror::Error;

use crate::network::{Network, NetworkError, VarId};

#[derive(Debug, Error)]
pub enum FactorError {
    #[error("shared variable #{0} has mismatched cardinalities {1} vs {2}")]
    DomainMismatch(usize, usize, usize),
    #[error("variable #{0} is not in the factor scope")]
    NotInScope(usize),
    #[error("{0}")]
    Network(#[from] NetworkError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Factor {
    scope: Vec<VarId>,
    cards: Vec<usize>,
    values: Vec<f64>,
}

impl Factor {
    /// Factor over `scope` with the given table. Panics on size mismatch;
    /// callers construct these from validated networks or literal tables.
    pub fn new(scope: Vec<VarId>, cards: Vec<usize>, values: Vec<f64>) -> Self {
        assert_eq!(scope.len(), cards.len());
        let size: usize = cards.iter().product();
        assert_eq!(values.len(), size.max(1));
        Factor {
            scope,
            cards,
            values,
        }
    }

    /// Scalar factor with empty scope.
    pub fn scalar(value: f64) -> Self {
        Factor {
            scope: Vec::new(),
            cards: Vec::new(),
            values: vec![value],
        }
    }

    /// The CPT of `child` as a factor with scope `parents + child`.
    pub fn from_cpt(net: &Network, child: VarId) -> Result<Self, FactorError> {
        let cpt = net.require_cpt(child)?;
        let mut scope: Vec<VarId> = cpt.parents().to_vec();
        scope.push(child);
        let cards: Vec<usize> = scope.iter().map(|&v| net.cardinality(v)).collect();
        let values: Vec<f64> = cpt.rows().iter().flatten().copied().collect();
        Ok(Factor::new(scope, cards, values))
    }

    pub fn scope(&self) -> &[VarId] {
        &self.scope
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total_mass(&self) -> f64 {
        self.values.iter().sum()
    }

    /// Value at the given per-scope-variable indices.
    pub fn get(&self, indices: &[usize]) -> f64 {
        self.values[self.linear_index(indices)]
    }

    fn linear_index(&self, indices: &[usize]) -> usize {
        debug_assert_eq!(indices.len(), self.scope.len());
        let mut idx = 0;
        for (i, card) in indices.iter().zip(&self.cards) {
            debug_assert!(i < card);
            idx = idx * card + i;
        }
        idx
    }

    /// Decompose a linear index into per-variable indices.
    fn unravel(&self, mut linear: usize, out: &mut [usize]) {
        for pos in (0..self.cards.len()).rev() {
            out[pos] = linear % self.cards[pos];
            linear /= self.cards[pos];
        }
    }

    /// Pointwise product; the result scope is this factor's scope followed
    /// by the other's remaining variables.
    pub fn product(&self, other: &Factor) -> Result<Factor, FactorError> {
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        for (pos, &v) in other.scope.iter().enumerate() {
            match self.scope.iter().position(|&s| s == v) {
                Some(mine) => {
                    if self.cards[mine] != other.cards[pos] {
                        return Err(FactorError::DomainMismatch(
                            v.index(),
                            self.cards[mine],
                            other.cards[pos],
                        ));
                    }
                }
                None => {
                    scope.push(v);
                    cards.push(other.cards[pos]);
                }
            }
        }
        // For each operand, where its scope variables sit in the output
        // scope. Linear indices must accumulate in the operand's own scope
        // order, whatever the output order is.
        let left_at: Vec<usize> = self
            .scope
            .iter()
            .map(|v| scope.iter().position(|s| s == v).expect("left var in union"))
            .collect();
        let right_at: Vec<usize> = other
            .scope
            .iter()
            .map(|v| scope.iter().position(|s| s == v).expect("right var in union"))
            .collect();
        let size: usize = cards.iter().product::<usize>().max(1);
        let mut values = Vec::with_capacity(size);
        let mut idx = vec![0usize; scope.len()];
        for linear in 0..size {
            let mut rem = linear;
            for pos in (0..cards.len()).rev() {
                idx[pos] = rem % cards[pos];
                rem /= cards[pos];
            }
            let mut li = 0;
            for (spos, &out_pos) in left_at.iter().enumerate() {
                li = li * self.cards[spos] + idx[out_pos];
            }
            let mut ri = 0;
            for (opos, &out_pos) in right_at.iter().enumerate() {
                ri = ri * other.cards[opos] + idx[out_pos];
            }
            values.push(self.values[li] * other.values[ri]);
        }
        Ok(Factor {
            scope,
            cards,
            values,
        })
    }

    /// Sum out one variable.
    pub fn marginalize(&self, var: VarId) -> Result<Factor, FactorError> {
        let pos = self
            .scope
            .iter()
            .position(|&v| v == var)
            .ok_or(FactorError::NotInScope(var.index()))?;
        let mut scope = self.scope.clone();
        let mut cards = self.cards.clone();
        scope.remove(pos);
        let removed_card = cards.remove(pos);
        let size: usize = cards.iter().product::<usize>().max(1);
        let mut values = vec![0.0; size];
        let mut idx = vec![0usize; self.scope.len()];
        for (linear, &v) in self.values.iter().enumerate() {
            self.unravel(linear, &mut idx);
            let mut out = 0;
            for (pos2, &i) in idx.iter().enumerate() {
                if pos2 != pos {
                    out = out * self.cards[pos2] + i;
                }
            }
            values[out] += v;
        }
        let _ = removed_card;
        Ok(Factor {
            scope,
            cards,
            values,
        })
    }

    /// Restrict to the slice consistent with the evidence pairs; variables
    /// absent from the scope are ignored. Evidence variables leave the scope.
    pub fn reduce(&self, evidence: &[(VarId, usize)]) -> Factor {
        let fixed: Vec<Option<usize>> = self
            .scope
            .iter()
            .map(|v| evidence.iter().find(|(ev, _)| ev == v).map(|&(_, val)| val))
            .collect();
        if fixed.iter().all(Option::is_none) {
            return self.clone();
        }
        let mut scope = Vec::new();
        let mut cards = Vec::new();
        for (pos, f) in fixed.iter().enumerate() {
            if f.is_none() {
                scope.push(self.scope[pos]);
                cards.push(self.cards[pos]);
            }
        }
        let size: usize = cards.iter().product::<usize>().max(1);
        let mut values = Vec::with_capacity(size);
        let mut idx = vec![0usize; self.scope.len()];
        for linear in 0..size {
            let mut rem = linear;
            for pos in (0..self.scope.len()).rev() {
                idx[pos] = match fixed[pos] {
                    Some(v) => v,
                    None => {
                        let i = rem % self.cards[pos];
                        rem /= self.cards[pos];
                        i
                    }
                };
            }
            values.push(self.values[self.linear_index(&idx)]);
        }
        Factor {
            scope,
            cards,
            values,
        }
    }

    /// Reorder the scope to `order`, which must be a permutation of it.
    pub fn aligned_to(&self, order: &[VarId]) -> Result<Factor, FactorError> {
        if order == self.scope {
            return Ok(self.clone());
        }
        let positions: Vec<usize> = order
            .iter()
            .map(|v| {
                self.scope
                    .iter()
                    .position(|s| s == v)
                    .ok_or(FactorError::NotInScope(v.index()))
            })
            .collect::<Result<_, _>>()?;
        if positions.len() != self.scope.len() {
            return Err(FactorError::NotInScope(
                self.scope[positions.len().min(self.scope.len() - 1)].index(),
            ));
        }
        let cards: Vec<usize> = positions.iter().map(|&p| self.cards[p]).collect();
        let size = self.values.len();
        let mut values = Vec::with_capacity(size);
        let mut idx = vec![0usize; cards.len()];
        let mut src = vec![0usize; cards.len()];
        for linear in 0..size {
            let mut rem = linear;
            for pos in (0..cards.len()).rev() {
                idx[pos] = rem % cards[pos];
                rem /= cards[pos];
            }
            for (out_pos, &src_pos) in positions.iter().enumerate() {
                src[src_pos] = idx[out_pos];
            }
            values.push(self.values[self.linear_index(&src)]);
        }
        Ok(Factor {
            scope: order.to_vec(),
            cards,
            values,
        })
    }

    /// Scale all values so they sum to 1. No-op on zero mass.
    pub fn normalized(&self) -> Factor {
        let mass = self.total_mass();
        if mass <= 0.0 {
            return self.clone();
        }
        Factor {
            scope: self.scope.clone(),
            cards: self.cards.clone(),
            values: self.values.iter().map(|v| v / mass).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Domain, Role, TimeIndex};

    fn v(i: usize) -> VarId {
        VarId(i)
    }

    fn net_ab() -> Network {
        let mut net = Network::new();
        net.add_variable(
            "A",
            Domain::new(["0", "1"]).unwrap(),
            Role::Context,
            TimeIndex::T0,
            true,
        )
        .unwrap();
        net.add_variable(
            "B",
            Domain::new(["0", "1"]).unwrap(),
            Role::Context,
            TimeIndex::T0,
            true,
        )
        .unwrap();
        net.set_cpt("A", &[], vec![vec![0.3, 0.7]]).unwrap();
        net.set_cpt("B", &["A"], vec![vec![0.5, 0.5], vec![0.2, 0.8]])
            .unwrap();
        net
    }

    #[test]
    fn from_cpt_prior_is_copied() {
        let net = net_ab();
        let f = Factor::from_cpt(&net, net.var_id("A").unwrap()).unwrap();
        assert_eq!(f.scope(), &[v(0)]);
        assert_eq!(f.values(), &[0.3, 0.7]);
    }

    #[test]
    fn from_cpt_layout_is_row_major() {
        let net = net_ab();
        let f = Factor::from_cpt(&net, net.var_id("B").unwrap()).unwrap();
        assert_eq!(f.scope(), &[v(0), v(1)]);
        assert_eq!(f.values(), &[0.5, 0.5, 0.2, 0.8]);
    }

    #[test]
    fn cpt_factor_rows_sum_to_one_per_parent_assignment() {
        let net = net_ab();
        let f = Factor::from_cpt(&net, net.var_id("B").unwrap()).unwrap();
        let summed = f.marginalize(v(1)).unwrap();
        for &x in summed.values() {
            assert!((x - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn product_with_ones_is_identity() {
        let net = net_ab();
        let f = Factor::from_cpt(&net, net.var_id("B").unwrap()).unwrap();
        let ones = Factor::new(vec![v(0), v(1)], vec![2, 2], vec![1.0; 4]);
        let g = f.product(&ones).unwrap();
        assert_eq!(g.scope(), f.scope());
        assert_eq!(g.values(), f.values());
    }

    #[test]
    fn product_of_disjoint_scopes_is_outer() {
        let f = Factor::new(vec![v(0)], vec![2], vec![0.4, 0.6]);
        let g = Factor::new(vec![v(1)], vec![3], vec![1.0, 2.0, 3.0]);
        let h = f.product(&g).unwrap();
        assert_eq!(h.scope(), &[v(0), v(1)]);
        assert_eq!(h.len(), 6);
        assert_eq!(
            h.values(),
            &[0.4, 0.8, 1.2000000000000002, 0.6, 1.2, 1.7999999999999998]
        );
    }

    #[test]
    fn product_matches_nested_loop_oracle() {
        // ψ(a, b, c) = f(a, b) · g(b, c), checked entry by entry.
        let fv: Vec<f64> = (0..6).map(|i| (i as f64 + 1.0) * 0.01).collect();
        let gv: Vec<f64> = (0..6).map(|i| (i as f64 + 2.0) * 0.1).collect();
        let f = Factor::new(vec![v(0), v(1)], vec![3, 2], fv.clone());
        let g = Factor::new(vec![v(1), v(2)], vec![2, 3], gv.clone());
        let h = f.product(&g).unwrap();
        assert_eq!(h.scope(), &[v(0), v(1), v(2)]);
        for a in 0..3 {
            for b in 0..2 {
                for c in 0..3 {
                    let expected = fv[a * 2 + b] * gv[b * 3 + c];
                    assert!((h.get(&[a, b, c]) - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn product_handles_misordered_shared_scopes() {
        // f over [A, B], g over [B, A] with distinct cardinalities: the
        // result must pair entries by variable, not by position.
        let fv: Vec<f64> = (0..6).map(|i| i as f64 + 1.0).collect();
        let gv: Vec<f64> = (0..6).map(|i| (i as f64 + 1.0) * 10.0).collect();
        let f = Factor::new(vec![v(0), v(1)], vec![3, 2], fv.clone());
        let g = Factor::new(vec![v(1), v(0)], vec![2, 3], gv.clone());
        let h = f.product(&g).unwrap();
        assert_eq!(h.scope(), &[v(0), v(1)]);
        for a in 0..3 {
            for b in 0..2 {
                let expected = fv[a * 2 + b] * gv[b * 3 + a];
                assert_eq!(h.get(&[a, b]), expected);
            }
        }
    }

    #[test]
    fn product_rejects_domain_mismatch() {
        let f = Factor::new(vec![v(0)], vec![2], vec![0.5, 0.5]);
        let g = Factor::new(vec![v(0)], vec![3], vec![0.2, 0.3, 0.5]);
        assert!(matches!(
            f.product(&g),
            Err(FactorError::DomainMismatch(0, 2, 3))
        ));
    }

    #[test]
    fn marginalize_sums_rows() {
        let f = Factor::new(vec![v(0), v(1)], vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let g = f.marginalize(v(1)).unwrap();
        assert_eq!(g.scope(), &[v(0)]);
        assert_eq!(g.values(), &[6.0, 15.0]);
        assert!((g.total_mass() - f.total_mass()).abs() < 1e-12);
    }

    #[test]
    fn marginalize_everything_leaves_scalar() {
        let f = Factor::new(vec![v(0), v(1)], vec![2, 2], vec![0.1, 0.2, 0.3, 0.4]);
        let g = f.marginalize(v(0)).unwrap().marginalize(v(1)).unwrap();
        assert!(g.scope().is_empty());
        assert_eq!(g.len(), 1);
        assert!((g.values()[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn marginalize_missing_var_fails() {
        let f = Factor::new(vec![v(0)], vec![2], vec![0.5, 0.5]);
        assert!(matches!(
            f.marginalize(v(9)),
            Err(FactorError::NotInScope(9))
        ));
    }

    #[test]
    fn reduce_takes_the_consistent_slice() {
        let f = Factor::new(vec![v(0), v(1)], vec![2, 3], vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        let g = f.reduce(&[(v(0), 0)]);
        assert_eq!(g.scope(), &[v(1)]);
        assert_eq!(g.values(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn reduce_ignores_out_of_scope_evidence() {
        let f = Factor::new(vec![v(0)], vec![2], vec![0.5, 0.5]);
        let g = f.reduce(&[(v(7), 1)]);
        assert_eq!(g, f);
    }

    #[test]
    fn reduce_then_marginalize_commutes() {
        let f = Factor::new(
            vec![v(0), v(1), v(2)],
            vec![2, 2, 2],
            vec![0.1, 0.9, 0.3, 0.7, 0.25, 0.75, 0.6, 0.4],
        );
        let a = f.reduce(&[(v(0), 1)]).marginalize(v(2)).unwrap();
        let b = f.marginalize(v(2)).unwrap().reduce(&[(v(0), 1)]);
        assert_eq!(a.scope(), b.scope());
        for (x, y) in a.values().iter().zip(b.values()) {
            assert!((x - y).abs() < 1e-12);
        }
    }
}
