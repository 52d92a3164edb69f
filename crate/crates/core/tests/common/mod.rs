//! Shared generators for the integration suites.

#![allow(dead_code)]

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use planrec_core::network::{Domain, Evidence, Network, Role, TimeIndex};

/// Deterministic RNG for a test stream.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random DAG of 4–12 categorical variables (domains 2–4, up to three
/// parents each) with random CPTs. Rows are normalized random entries with
/// occasional hard zeros so zero-probability paths get exercised.
pub fn random_network(seed: u64) -> Network {
    let mut rng = rng(seed);
    let n = rng.random_range(4..=12);
    let mut net = Network::new();
    let mut cards = Vec::with_capacity(n);
    for i in 0..n {
        let card = rng.random_range(2..=4usize);
        cards.push(card);
        let labels: Vec<String> = (0..card).map(|j| format!("v{j}")).collect();
        net.add_variable(
            name(i),
            Domain::new(labels).unwrap(),
            Role::Context,
            TimeIndex::Atemporal,
            true,
        )
        .unwrap();
    }
    for i in 0..n {
        let max_parents = i.min(3);
        let k = if max_parents == 0 {
            0
        } else {
            rng.random_range(0..=max_parents)
        };
        let mut earlier: Vec<usize> = (0..i).collect();
        earlier.shuffle(&mut rng);
        let parent_names: Vec<String> = earlier[..k].iter().map(|&j| name(j)).collect();
        let parent_refs: Vec<&str> = parent_names.iter().map(String::as_str).collect();
        let row_count: usize = earlier[..k].iter().map(|&j| cards[j]).product();
        let rows: Vec<Vec<f64>> = (0..row_count)
            .map(|_| random_row(&mut rng, cards[i]))
            .collect();
        net.set_cpt(&name(i), &parent_refs, rows).unwrap();
    }
    net
}

fn name(i: usize) -> String {
    format!("x{i:02}")
}

pub fn random_row(rng: &mut ChaCha8Rng, card: usize) -> Vec<f64> {
    loop {
        let mut row: Vec<f64> = (0..card)
            .map(|_| {
                if rng.random_bool(0.15) {
                    0.0
                } else {
                    rng.random::<f64>()
                }
            })
            .collect();
        let sum: f64 = row.iter().sum();
        if sum > 1e-6 {
            for x in &mut row {
                *x /= sum;
            }
            return row;
        }
    }
}

/// Random evidence over observable variables, binding each with probability
/// `bind_prob` and then binding more (in random order) until the product of
/// unbound domain sizes drops to `max_free_states`.
pub fn random_evidence(
    net: &Network,
    rng: &mut ChaCha8Rng,
    bind_prob: f64,
    max_free_states: u128,
) -> Evidence {
    let mut e = Evidence::new();
    let mut bindable = Vec::new();
    let mut free: u128 = 1;
    for (id, var) in net.variables() {
        if var.observable && rng.random_bool(bind_prob) {
            let label = var.domain.label(rng.random_range(0..var.domain.len()));
            e.set(var.id.clone(), label);
        } else {
            // Unobservable variables stay free; they set the floor.
            free = free.saturating_mul(var.domain.len() as u128);
            if var.observable {
                bindable.push(id);
            }
        }
    }
    bindable.shuffle(rng);
    while free > max_free_states {
        let Some(v) = bindable.pop() else { break };
        let var = net.variable(v);
        free /= var.domain.len() as u128;
        let label = var.domain.label(rng.random_range(0..var.domain.len()));
        e.set(var.id.clone(), label);
    }
    e
}

/// Largest absolute difference between two distributions.
pub fn linf(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}
