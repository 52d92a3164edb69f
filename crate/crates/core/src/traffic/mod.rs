//! The traffic-monitoring network.
//!
//! Thirty variables model a single car over two maneuver stages: the
//! observable highway context at `t0` (lane, position, speed, eight
//! neighbor clearances), the driver's mental state (intended exit, target
//! speed, and the derived `at exit?` / `at target?` beliefs), the plan
//! layer (`gen maneuver`, `acc maneuver`, `spec pass`), turn signals,
//! unobservable lateral/forward actions at each stage, and the observable
//! effects at `t1` and `t2`.
//!
//! Every CPT is generated from [`TrafficParams`] by the rule functions in
//! [`rules`]; nothing is hand-edited per row. `defaults.json` next to this
//! crate mirrors [`TrafficParams::default`] so the shipped calibration is
//! reviewable and overridable as a whole or field by field.

pub mod rules;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::{Domain, Network, NetworkError, Role, TimeIndex};
use crate::recognition::validate_roles;
use crate::scenario::Scenario;
use rules::{
    acc_maneuver_row, at_exit_value, at_target_value, gen_maneuver_rule, intended_signals,
    lane_transition, plan_action_profile, signal_m0_row, signal_m1_row, spec_pass_rule,
    speed_transition, y_advance_row, AtTarget, Clearances, FwdAct, Lane, LatAct, Maneuver, Signal,
    SpecPass,
};

/// Variable names of the fixed roster.
pub mod names {
    pub const X_POSITION_T0: &str = "x position t0";
    pub const Y_POSITION_T0: &str = "y position t0";
    pub const Y_SPEED_T0: &str = "y speed t0";
    pub const EXIT_POSITION: &str = "exit position";
    pub const TARGET_Y_SPEED: &str = "target y speed";
    pub const AT_EXIT: &str = "at exit?";
    pub const AT_TARGET: &str = "at target?";
    pub const GEN_MANEUVER: &str = "gen maneuver";
    pub const ACC_MANEUVER: &str = "acc maneuver";
    pub const SPEC_PASS: &str = "spec pass";
    pub const SIGNAL_M0: &str = "signal m0";
    pub const SIGNAL_M1: &str = "signal m1";
    pub const LAT_ACT_M0: &str = "lat act m0";
    pub const LAT_ACT_M1: &str = "lat act m1";
    pub const FWD_ACT_M0: &str = "fwd act m0";
    pub const FWD_ACT_M1: &str = "fwd act m1";
    pub const X_POSITION_T1: &str = "x position t1";
    pub const X_POSITION_T2: &str = "x position t2";
    pub const Y_POSITION_T1: &str = "y position t1";
    pub const Y_POSITION_T2: &str = "y position t2";
    pub const Y_SPEED_T1: &str = "y speed t1";
    pub const Y_SPEED_T2: &str = "y speed t2";
}

/// The eight neighbor slots, with their variable names.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClearanceSlot {
    Front,
    Back,
    Left,
    Right,
    FrontLeft,
    FrontRight,
    BackLeft,
    BackRight,
}

impl ClearanceSlot {
    pub const ALL: [ClearanceSlot; 8] = [
        ClearanceSlot::Front,
        ClearanceSlot::Back,
        ClearanceSlot::Left,
        ClearanceSlot::Right,
        ClearanceSlot::FrontLeft,
        ClearanceSlot::FrontRight,
        ClearanceSlot::BackLeft,
        ClearanceSlot::BackRight,
    ];

    pub fn var_name(self) -> &'static str {
        match self {
            ClearanceSlot::Front => "front clr t0",
            ClearanceSlot::Back => "back clr t0",
            ClearanceSlot::Left => "left clr t0",
            ClearanceSlot::Right => "right clr t0",
            ClearanceSlot::FrontLeft => "frontL clr t0",
            ClearanceSlot::FrontRight => "frontR clr t0",
            ClearanceSlot::BackLeft => "backL clr t0",
            ClearanceSlot::BackRight => "backR clr t0",
        }
    }

    fn set(self, clr: &mut Clearances, value: bool) {
        match self {
            ClearanceSlot::Front => clr.front = value,
            ClearanceSlot::Back => clr.back = value,
            ClearanceSlot::Left => clr.left = value,
            ClearanceSlot::Right => clr.right = value,
            ClearanceSlot::FrontLeft => clr.front_left = value,
            ClearanceSlot::FrontRight => clr.front_right = value,
            ClearanceSlot::BackLeft => clr.back_left = value,
            ClearanceSlot::BackRight => clr.back_right = value,
        }
    }
}

/// Clearance slots feeding `gen maneuver`, in parent order. The two front
/// diagonals feed `spec pass` instead.
const GEN_CLEARANCES: [ClearanceSlot; 6] = [
    ClearanceSlot::Front,
    ClearanceSlot::Back,
    ClearanceSlot::Left,
    ClearanceSlot::Right,
    ClearanceSlot::BackLeft,
    ClearanceSlot::BackRight,
];

/// Clearance slots feeding `spec pass`, in parent order.
const PASS_CLEARANCES: [ClearanceSlot; 4] = [
    ClearanceSlot::Left,
    ClearanceSlot::FrontLeft,
    ClearanceSlot::Right,
    ClearanceSlot::FrontRight,
];

#[derive(Debug, Error)]
pub enum TrafficError {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },
    #[error("plan pair (gen={gen}, spec={spec}) breaks the subsumption constraint")]
    InconsistentPlanPair {
        gen: &'static str,
        spec: &'static str,
    },
    #[error("{0}")]
    Network(#[from] NetworkError),
    #[error("generated network is invalid ({count} violation(s)); first: {first}")]
    BuildPostcondition { first: String, count: usize },
    #[error("{0}")]
    Json(#[from] serde_json::Error),
}

/// Fixed mass values used by the plan-selection and passing rules.
/// Overridable through the parameters file like everything else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleMasses {
    /// Exit mass when the intended exit is imminent.
    pub exit_commit: f64,
    /// Pass mass when too slow behind a blocked front.
    pub pass_when_blocked: f64,
    /// Rightward-shift mass alongside a blocked-front pass.
    pub shift_when_blocked: f64,
    /// Stay mass when too slow with a clear front (acceleration handles it).
    pub stay_when_slow_clear: f64,
    pub stay_at_target: f64,
    pub shift_at_target: f64,
    pub stay_too_fast: f64,
    pub shift_too_fast: f64,
    /// Chosen-side mass when exactly one passing side is open.
    pub pass_side_open: f64,
    pub pass_side_open_blocked: f64,
    pub pass_wrong_side: f64,
    pub pass_both_blocked: f64,
    /// Blocked mass when both sides are open.
    pub pass_blocked_epsilon: f64,
    /// Probability of signaling the wrong direction.
    pub signal_error: f64,
}

impl Default for RuleMasses {
    fn default() -> Self {
        RuleMasses {
            exit_commit: 0.85,
            pass_when_blocked: 0.60,
            shift_when_blocked: 0.15,
            stay_when_slow_clear: 0.85,
            stay_at_target: 0.80,
            shift_at_target: 0.10,
            stay_too_fast: 0.75,
            shift_too_fast: 0.15,
            pass_side_open: 0.93,
            pass_side_open_blocked: 0.05,
            pass_wrong_side: 0.02,
            pass_both_blocked: 0.96,
            pass_blocked_epsilon: 0.02,
            signal_error: 0.02,
        }
    }
}

/// Every knob of the traffic model. The shipped defaults live in
/// `defaults.json` and reproduce the reference recognition behavior; any
/// field may be overridden from a JSON parameters file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficParams {
    /// Lane labels in the fixed order (off, right, middle, left).
    pub lane_labels: Vec<String>,
    /// Position bins along the highway, nearest first.
    pub y_positions: Vec<String>,
    /// Speed bins, slowest first.
    pub speed_bins: Vec<String>,
    /// Exit labels; exit `i` sits immediately after position bin `i`.
    pub exit_labels: Vec<String>,
    pub x_position_prior: Vec<f64>,
    pub y_position_prior: Vec<f64>,
    /// Probability that each neighbor slot is clear.
    pub clearance_prior: f64,
    pub target_speed_prior: Vec<f64>,
    pub exit_prior: Vec<f64>,
    /// Speed distribution per lane (off, right, middle, left): the farther
    /// left the lane, the faster the traffic.
    pub speed_given_lane: Vec<Vec<f64>>,
    /// Smoothing floor for feasible but unpreferred maneuvers.
    pub plan_noise: f64,
    /// Preference for passing on the left when both sides are open.
    pub pass_left_bias: f64,
    /// Probability that a pass's return shift is delayed past stage 1.
    pub pass_completion_delay: f64,
    pub signal_compliance: f64,
    pub signal_consistency: f64,
    pub accel_effect_noise: f64,
    pub rule_masses: RuleMasses,
}

impl Default for TrafficParams {
    fn default() -> Self {
        TrafficParams {
            lane_labels: strings(&["off", "right", "middle", "left"]),
            y_positions: strings(&["p1", "p2", "p3", "p4"]),
            speed_bins: strings(&["s1", "s2", "s3", "s4"]),
            exit_labels: strings(&["e1", "e2", "e3", "e4"]),
            x_position_prior: vec![0.08, 0.27, 0.40, 0.25],
            // The monitored car has just entered this stretch while its
            // intended exit overwhelmingly lies far ahead, so an imminent
            // exit is rare a priori.
            y_position_prior: vec![0.985, 0.007, 0.005, 0.003],
            clearance_prior: 0.7,
            target_speed_prior: vec![0.05, 0.20, 0.55, 0.20],
            exit_prior: vec![0.002, 0.003, 0.005, 0.990],
            speed_given_lane: vec![
                vec![0.60, 0.30, 0.08, 0.02],
                vec![0.25, 0.50, 0.20, 0.05],
                vec![0.05, 0.30, 0.50, 0.15],
                vec![0.02, 0.08, 0.40, 0.50],
            ],
            plan_noise: 0.01,
            pass_left_bias: 0.85,
            pass_completion_delay: 0.05,
            signal_compliance: 0.60,
            signal_consistency: 0.90,
            accel_effect_noise: 0.05,
            rule_masses: RuleMasses::default(),
        }
    }
}

fn strings(items: &[&str]) -> Vec<String> {
    items.iter().map(|s| s.to_string()).collect()
}

impl TrafficParams {
    pub fn from_json_str(text: &str) -> Result<Self, TrafficError> {
        let params: TrafficParams = serde_json::from_str(text)?;
        params.validate()?;
        Ok(params)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("params serialize")
    }

    pub fn validate(&self) -> Result<(), TrafficError> {
        fn err(field: &'static str, reason: impl Into<String>) -> TrafficError {
            TrafficError::InvalidParams {
                field,
                reason: reason.into(),
            }
        }
        fn check_dist(field: &'static str, v: &[f64], len: usize) -> Result<(), TrafficError> {
            if v.len() != len {
                return Err(err(field, format!("expected {len} entries, got {}", v.len())));
            }
            if v.iter().any(|&x| x < 0.0) {
                return Err(err(field, "negative entry"));
            }
            let sum: f64 = v.iter().sum();
            if (sum - 1.0).abs() > crate::network::PROB_TOLERANCE {
                return Err(err(field, format!("sums to {sum}, expected 1")));
            }
            Ok(())
        }
        fn unit(field: &'static str, x: f64, lo: f64, hi: f64) -> Result<(), TrafficError> {
            if !(lo..=hi).contains(&x) {
                return Err(err(field, format!("{x} outside [{lo}, {hi}]")));
            }
            Ok(())
        }

        if self.lane_labels.len() != 4 {
            return Err(err("lane_labels", "exactly 4 lanes are supported"));
        }
        if self.y_positions.len() < 2 {
            return Err(err("y_positions", "need at least 2 bins"));
        }
        if self.speed_bins.len() < 2 {
            return Err(err("speed_bins", "need at least 2 bins"));
        }
        if self.exit_labels.len() != self.y_positions.len() {
            return Err(err(
                "exit_labels",
                "must pair one exit with each position bin",
            ));
        }
        check_dist("x_position_prior", &self.x_position_prior, 4)?;
        check_dist(
            "y_position_prior",
            &self.y_position_prior,
            self.y_positions.len(),
        )?;
        check_dist(
            "target_speed_prior",
            &self.target_speed_prior,
            self.speed_bins.len(),
        )?;
        check_dist("exit_prior", &self.exit_prior, self.exit_labels.len())?;
        if self.speed_given_lane.len() != 4 {
            return Err(err("speed_given_lane", "expected one row per lane"));
        }
        for row in &self.speed_given_lane {
            check_dist("speed_given_lane", row, self.speed_bins.len())?;
        }
        if self.clearance_prior <= 0.0 || self.clearance_prior >= 1.0 {
            return Err(err("clearance_prior", "must lie strictly inside (0, 1)"));
        }
        if self.plan_noise <= 0.0 || self.plan_noise > 0.1 {
            return Err(err("plan_noise", "must lie in (0, 0.1]"));
        }
        let m = &self.rule_masses;
        unit("pass_left_bias", self.pass_left_bias, 0.0, 1.0 - m.pass_blocked_epsilon)?;
        unit("pass_completion_delay", self.pass_completion_delay, 0.0, 0.5)?;
        unit("accel_effect_noise", self.accel_effect_noise, 0.0, 0.5)?;
        if self.signal_compliance <= 0.0
            || self.signal_compliance + m.signal_error > 1.0
            || self.signal_consistency <= 0.0
            || self.signal_consistency + m.signal_error > 1.0
        {
            return Err(err(
                "signal_compliance",
                "compliance and consistency must lie in (0, 1 - signal_error]",
            ));
        }
        for (field, value) in [
            ("exit_commit", m.exit_commit),
            ("stay_when_slow_clear", m.stay_when_slow_clear),
            ("stay_at_target", m.stay_at_target),
            ("stay_too_fast", m.stay_too_fast),
        ] {
            if value <= 0.0 || value > 1.0 {
                return Err(err("rule_masses", format!("{field} must lie in (0, 1]")));
            }
        }
        if m.pass_when_blocked <= 0.0 || m.pass_when_blocked + m.shift_when_blocked > 1.0 {
            return Err(err(
                "rule_masses",
                "pass_when_blocked + shift_when_blocked must lie in (0, 1]",
            ));
        }
        if m.stay_at_target + m.shift_at_target > 1.0 || m.stay_too_fast + m.shift_too_fast > 1.0 {
            return Err(err("rule_masses", "stay + shift masses exceed 1"));
        }
        let one_side = m.pass_side_open + m.pass_side_open_blocked + m.pass_wrong_side;
        if (one_side - 1.0).abs() > crate::network::PROB_TOLERANCE {
            return Err(err(
                "rule_masses",
                format!("one-side-open passing masses sum to {one_side}, expected 1"),
            ));
        }
        let both_blocked = m.pass_both_blocked + 2.0 * m.pass_wrong_side;
        if (both_blocked - 1.0).abs() > crate::network::PROB_TOLERANCE {
            return Err(err(
                "rule_masses",
                format!("both-blocked passing masses sum to {both_blocked}, expected 1"),
            ));
        }
        if m.signal_error < 0.0 || m.signal_error >= 1.0 {
            return Err(err("rule_masses", "signal_error must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Shrink the bin counts for the oracle-sized build, renormalizing the
    /// affected priors over the kept prefix.
    fn reduced(&self, n_y: usize, n_speed: usize) -> TrafficParams {
        let mut p = self.clone();
        p.y_positions.truncate(n_y);
        p.exit_labels.truncate(n_y);
        p.speed_bins.truncate(n_speed);
        p.y_position_prior = renorm_prefix(&self.y_position_prior, n_y);
        p.exit_prior = renorm_prefix(&self.exit_prior, n_y);
        p.target_speed_prior = renorm_prefix(&self.target_speed_prior, n_speed);
        p.speed_given_lane = self
            .speed_given_lane
            .iter()
            .map(|row| renorm_prefix(row, n_speed))
            .collect();
        p
    }
}

fn renorm_prefix(v: &[f64], n: usize) -> Vec<f64> {
    let prefix = &v[..n];
    let sum: f64 = prefix.iter().sum();
    prefix.iter().map(|x| x / sum).collect()
}

/// Mixed-radix decode, last position fastest.
fn decompose(mut linear: usize, cards: &[usize], out: &mut [usize]) {
    for i in (0..cards.len()).rev() {
        out[i] = linear % cards[i];
        linear /= cards[i];
    }
}

/// Build the full 30-variable network.
pub fn build_traffic_network(params: &TrafficParams) -> Result<Network, TrafficError> {
    params.validate()?;
    build(params, &ClearanceSlot::ALL)
}

/// Oracle-sized build: two position bins, two speed bins, two exits, and
/// only the front/left/right/front-left clearances kept as variables; the
/// other four slots are pinned clear inside the generated CPTs.
pub fn traffic_mini(params: &TrafficParams) -> Result<Network, TrafficError> {
    params.validate()?;
    let reduced = params.reduced(2, 2);
    build(
        &reduced,
        &[
            ClearanceSlot::Front,
            ClearanceSlot::Left,
            ClearanceSlot::Right,
            ClearanceSlot::FrontLeft,
        ],
    )
}

fn build(p: &TrafficParams, free_clearances: &[ClearanceSlot]) -> Result<Network, TrafficError> {
    let mut net = Network::new();
    let n_y = p.y_positions.len();
    let n_speed = p.speed_bins.len();
    let lanes = Domain::new(p.lane_labels.clone())?;
    let positions = Domain::new(p.y_positions.clone())?;
    let speeds = Domain::new(p.speed_bins.clone())?;
    let lat_acts = Domain::new(rules::LatAct::LABELS)?;
    let fwd_acts = Domain::new(FwdAct::LABELS)?;
    let signals = Domain::new(Signal::LABELS)?;

    // --- context ---
    net.add_variable(
        names::X_POSITION_T0,
        lanes.clone(),
        Role::Context,
        TimeIndex::T0,
        true,
    )?;
    net.add_variable(
        names::Y_POSITION_T0,
        positions.clone(),
        Role::Context,
        TimeIndex::T0,
        true,
    )?;
    net.add_variable(
        names::Y_SPEED_T0,
        speeds.clone(),
        Role::Context,
        TimeIndex::T0,
        true,
    )?;
    for slot in free_clearances {
        net.add_variable(
            slot.var_name(),
            Domain::boolean(),
            Role::Context,
            TimeIndex::T0,
            true,
        )?;
    }

    // --- mental state ---
    net.add_variable(
        names::EXIT_POSITION,
        Domain::new(p.exit_labels.clone())?,
        Role::MentalState,
        TimeIndex::Atemporal,
        false,
    )?;
    net.add_variable(
        names::TARGET_Y_SPEED,
        speeds.clone(),
        Role::MentalState,
        TimeIndex::Atemporal,
        false,
    )?;
    net.add_variable(
        names::AT_EXIT,
        Domain::boolean(),
        Role::MentalState,
        TimeIndex::Atemporal,
        false,
    )?;
    net.add_variable(
        names::AT_TARGET,
        Domain::new(AtTarget::LABELS)?,
        Role::MentalState,
        TimeIndex::Atemporal,
        false,
    )?;

    // --- plan ---
    net.add_variable(
        names::GEN_MANEUVER,
        Domain::new(Maneuver::LABELS)?,
        Role::Plan,
        TimeIndex::Atemporal,
        false,
    )?;
    net.add_variable(
        names::ACC_MANEUVER,
        fwd_acts.clone(),
        Role::Plan,
        TimeIndex::Atemporal,
        false,
    )?;
    net.add_variable(
        names::SPEC_PASS,
        Domain::new(SpecPass::LABELS)?,
        Role::Plan,
        TimeIndex::Atemporal,
        false,
    )?;

    // --- communication ---
    net.add_variable(
        names::SIGNAL_M0,
        signals.clone(),
        Role::Communication,
        TimeIndex::M0,
        true,
    )?;
    net.add_variable(
        names::SIGNAL_M1,
        signals,
        Role::Communication,
        TimeIndex::M1,
        true,
    )?;

    // --- activity ---
    net.add_variable(
        names::LAT_ACT_M0,
        lat_acts.clone(),
        Role::Activity,
        TimeIndex::M0,
        false,
    )?;
    net.add_variable(
        names::LAT_ACT_M1,
        lat_acts,
        Role::Activity,
        TimeIndex::M1,
        false,
    )?;
    net.add_variable(
        names::FWD_ACT_M0,
        fwd_acts.clone(),
        Role::Activity,
        TimeIndex::M0,
        false,
    )?;
    net.add_variable(
        names::FWD_ACT_M1,
        fwd_acts,
        Role::Activity,
        TimeIndex::M1,
        false,
    )?;

    // --- effects ---
    net.add_variable(
        names::X_POSITION_T1,
        lanes.clone(),
        Role::Effect,
        TimeIndex::T1,
        true,
    )?;
    net.add_variable(names::X_POSITION_T2, lanes, Role::Effect, TimeIndex::T2, true)?;
    net.add_variable(
        names::Y_POSITION_T1,
        positions.clone(),
        Role::Effect,
        TimeIndex::T1,
        true,
    )?;
    net.add_variable(
        names::Y_POSITION_T2,
        positions,
        Role::Effect,
        TimeIndex::T2,
        true,
    )?;
    net.add_variable(
        names::Y_SPEED_T1,
        speeds.clone(),
        Role::Effect,
        TimeIndex::T1,
        true,
    )?;
    net.add_variable(names::Y_SPEED_T2, speeds, Role::Effect, TimeIndex::T2, true)?;

    // --- priors ---
    net.set_cpt(names::X_POSITION_T0, &[], vec![p.x_position_prior.clone()])?;
    net.set_cpt(names::Y_POSITION_T0, &[], vec![p.y_position_prior.clone()])?;
    let q = p.clearance_prior;
    for slot in free_clearances {
        net.set_cpt(slot.var_name(), &[], vec![vec![1.0 - q, q]])?;
    }
    net.set_cpt(names::EXIT_POSITION, &[], vec![p.exit_prior.clone()])?;
    net.set_cpt(names::TARGET_Y_SPEED, &[], vec![p.target_speed_prior.clone()])?;

    // --- context coupling: speed depends on lane ---
    net.set_cpt(
        names::Y_SPEED_T0,
        &[names::X_POSITION_T0],
        p.speed_given_lane.clone(),
    )?;

    // --- mental state ---
    let mut at_exit_rows = Vec::with_capacity(n_y * n_y);
    for y in 0..n_y {
        for e in 0..n_y {
            at_exit_rows.push(if at_exit_value(y, e) {
                vec![0.0, 1.0]
            } else {
                vec![1.0, 0.0]
            });
        }
    }
    net.set_cpt(
        names::AT_EXIT,
        &[names::Y_POSITION_T0, names::EXIT_POSITION],
        at_exit_rows,
    )?;

    let mut at_target_rows = Vec::with_capacity(n_speed * n_speed);
    for s in 0..n_speed {
        for t in 0..n_speed {
            let mut row = vec![0.0; 3];
            row[at_target_value(s, t).index()] = 1.0;
            at_target_rows.push(row);
        }
    }
    net.set_cpt(
        names::AT_TARGET,
        &[names::Y_SPEED_T0, names::TARGET_Y_SPEED],
        at_target_rows,
    )?;

    // --- plan selection ---
    let gen_slots: Vec<ClearanceSlot> = GEN_CLEARANCES
        .iter()
        .copied()
        .filter(|s| free_clearances.contains(s))
        .collect();
    let mut gen_parents = vec![names::AT_TARGET, names::AT_EXIT, names::X_POSITION_T0];
    gen_parents.extend(gen_slots.iter().map(|s| s.var_name()));
    let mut gen_cards = vec![3, 2, 4];
    gen_cards.extend(std::iter::repeat(2).take(gen_slots.len()));
    let total: usize = gen_cards.iter().product();
    let mut gen_rows = Vec::with_capacity(total);
    let mut vals = vec![0usize; gen_cards.len()];
    for linear in 0..total {
        decompose(linear, &gen_cards, &mut vals);
        let mut clr = Clearances::all_clear();
        for (i, slot) in gen_slots.iter().enumerate() {
            slot.set(&mut clr, vals[3 + i] == 1);
        }
        let row = gen_maneuver_rule(
            AtTarget::from_index(vals[0]),
            vals[1] == 1,
            Lane::from_index(vals[2]),
            &clr,
            &p.rule_masses,
            p.plan_noise,
        );
        gen_rows.push(row.to_vec());
    }
    net.set_cpt(names::GEN_MANEUVER, &gen_parents, gen_rows)?;

    let acc_rows: Vec<Vec<f64>> = AtTarget::ALL
        .iter()
        .map(|&at| acc_maneuver_row(at).to_vec())
        .collect();
    net.set_cpt(names::ACC_MANEUVER, &[names::AT_TARGET], acc_rows)?;

    let pass_slots: Vec<ClearanceSlot> = PASS_CLEARANCES
        .iter()
        .copied()
        .filter(|s| free_clearances.contains(s))
        .collect();
    let mut pass_parents = vec![names::GEN_MANEUVER];
    pass_parents.extend(pass_slots.iter().map(|s| s.var_name()));
    let mut pass_cards = vec![8];
    pass_cards.extend(std::iter::repeat(2).take(pass_slots.len()));
    let total: usize = pass_cards.iter().product();
    let mut pass_rows = Vec::with_capacity(total);
    let mut vals = vec![0usize; pass_cards.len()];
    for linear in 0..total {
        decompose(linear, &pass_cards, &mut vals);
        let mut clr = Clearances::all_clear();
        for (i, slot) in pass_slots.iter().enumerate() {
            slot.set(&mut clr, vals[1 + i] == 1);
        }
        let row = spec_pass_rule(
            Maneuver::from_index(vals[0]),
            clr.left,
            clr.front_left,
            clr.right,
            clr.front_right,
            &p.rule_masses,
            p.pass_left_bias,
        );
        pass_rows.push(row.to_vec());
    }
    net.set_cpt(names::SPEC_PASS, &pass_parents, pass_rows)?;

    // --- signals ---
    let mut m0_rows = Vec::with_capacity(8 * 4);
    for gen in Maneuver::ALL {
        for spec in SpecPass::ALL {
            let intended = intended_signals(gen, spec);
            m0_rows.push(
                signal_m0_row(intended.0, p.signal_compliance, p.rule_masses.signal_error)
                    .to_vec(),
            );
        }
    }
    net.set_cpt(
        names::SIGNAL_M0,
        &[names::GEN_MANEUVER, names::SPEC_PASS],
        m0_rows,
    )?;

    let mut m1_rows = Vec::with_capacity(8 * 4 * 3);
    for gen in Maneuver::ALL {
        for spec in SpecPass::ALL {
            for m0 in Signal::ALL {
                let intended = intended_signals(gen, spec);
                m1_rows.push(
                    signal_m1_row(
                        intended,
                        m0,
                        p.signal_compliance,
                        p.signal_consistency,
                        p.rule_masses.signal_error,
                    )
                    .to_vec(),
                );
            }
        }
    }
    net.set_cpt(
        names::SIGNAL_M1,
        &[names::GEN_MANEUVER, names::SPEC_PASS, names::SIGNAL_M0],
        m1_rows,
    )?;

    // --- activity ---
    // Parent combinations that break the subsumption constraint carry zero
    // upstream probability; their rows just hold the lane.
    let hold = {
        let mut d = [0.0; 3];
        d[LatAct::Same.index()] = 1.0;
        d
    };
    let mut lat0_rows = Vec::with_capacity(8 * 4);
    let mut lat1_rows = Vec::with_capacity(8 * 4);
    for gen in Maneuver::ALL {
        for spec in SpecPass::ALL {
            match plan_action_profile(gen, spec, p.pass_completion_delay) {
                Ok((m0, m1)) => {
                    lat0_rows.push(m0.to_vec());
                    lat1_rows.push(m1.to_vec());
                }
                Err(_) => {
                    lat0_rows.push(hold.to_vec());
                    lat1_rows.push(hold.to_vec());
                }
            }
        }
    }
    net.set_cpt(
        names::LAT_ACT_M0,
        &[names::GEN_MANEUVER, names::SPEC_PASS],
        lat0_rows,
    )?;
    net.set_cpt(
        names::LAT_ACT_M1,
        &[names::GEN_MANEUVER, names::SPEC_PASS],
        lat1_rows,
    )?;

    let follow_plan: Vec<Vec<f64>> = (0..3)
        .map(|i| {
            let mut row = vec![0.0; 3];
            row[i] = 1.0;
            row
        })
        .collect();
    net.set_cpt(names::FWD_ACT_M0, &[names::ACC_MANEUVER], follow_plan.clone())?;
    net.set_cpt(names::FWD_ACT_M1, &[names::ACC_MANEUVER], follow_plan)?;

    // --- world dynamics ---
    let lane_rows = |_net: &Network| -> Vec<Vec<f64>> {
        let mut rows = Vec::with_capacity(4 * 3);
        for lane in Lane::ALL {
            for act in LatAct::ALL {
                let mut row = vec![0.0; 4];
                row[lane_transition(lane, act).index()] = 1.0;
                rows.push(row);
            }
        }
        rows
    };
    net.set_cpt(
        names::X_POSITION_T1,
        &[names::X_POSITION_T0, names::LAT_ACT_M0],
        lane_rows(&net),
    )?;
    net.set_cpt(
        names::X_POSITION_T2,
        &[names::X_POSITION_T1, names::LAT_ACT_M1],
        lane_rows(&net),
    )?;

    let speed_rows = || -> Vec<Vec<f64>> {
        let mut rows = Vec::with_capacity(n_speed * 3);
        for bin in 0..n_speed {
            for act in FwdAct::ALL {
                rows.push(speed_transition(bin, act, n_speed, p.accel_effect_noise));
            }
        }
        rows
    };
    net.set_cpt(
        names::Y_SPEED_T1,
        &[names::Y_SPEED_T0, names::FWD_ACT_M0],
        speed_rows(),
    )?;
    net.set_cpt(
        names::Y_SPEED_T2,
        &[names::Y_SPEED_T1, names::FWD_ACT_M1],
        speed_rows(),
    )?;

    let advance_rows = || -> Vec<Vec<f64>> {
        let mut rows = Vec::with_capacity(n_y * n_speed);
        for pos in 0..n_y {
            for s in 0..n_speed {
                rows.push(y_advance_row(pos, s, n_y, n_speed));
            }
        }
        rows
    };
    net.set_cpt(
        names::Y_POSITION_T1,
        &[names::Y_POSITION_T0, names::Y_SPEED_T0],
        advance_rows(),
    )?;
    net.set_cpt(
        names::Y_POSITION_T2,
        &[names::Y_POSITION_T1, names::Y_SPEED_T1],
        advance_rows(),
    )?;

    let violations = net.validate();
    if !violations.is_empty() {
        return Err(TrafficError::BuildPostcondition {
            first: violations[0].to_string(),
            count: violations.len(),
        });
    }
    let role_violations = validate_roles(&net);
    if !role_violations.is_empty() {
        return Err(TrafficError::BuildPostcondition {
            first: role_violations[0].to_string(),
            count: role_violations.len(),
        });
    }
    Ok(net)
}

/// The three reference evidence sets: a car ahead moves from the middle to
/// the right lane behind a blocked front (A); additionally the front-left
/// is blocked (B); additionally every other neighbor slot is known clear
/// (C). Targets are the driver's maneuver and the lane two stages out.
pub fn paper_scenarios() -> Vec<Scenario> {
    let base = Scenario::new("A")
        .observe(ClearanceSlot::Front.var_name(), "false")
        .observe(names::X_POSITION_T0, "middle")
        .observe(names::X_POSITION_T1, "right")
        .target(names::GEN_MANEUVER)
        .target(names::X_POSITION_T2);
    let mut b = base.clone();
    b.name = "B".to_string();
    let b = b.observe(ClearanceSlot::FrontLeft.var_name(), "false");
    let mut c = b.clone();
    c.name = "C".to_string();
    let c = c
        .observe(ClearanceSlot::Back.var_name(), "true")
        .observe(ClearanceSlot::Left.var_name(), "true")
        .observe(ClearanceSlot::Right.var_name(), "true")
        .observe(ClearanceSlot::BackLeft.var_name(), "true")
        .observe(ClearanceSlot::BackRight.var_name(), "true")
        .observe(ClearanceSlot::FrontRight.var_name(), "true");
    vec![base, b, c]
}
