//! Rule-based CPT content for the traffic model.
//!
//! Everything here is a pure function from parent values and parameters to
//! a probability row. The builder in the parent module enumerates parent
//! assignments and assembles these rows into CPTs.
//!
//! Lane order is `(off, right, middle, left)`: moving "left" steps up the
//! index, moving "right" steps down, both clamped at the ends. A driver in
//! the right lane who moves right leaves the highway.

use super::{RuleMasses, TrafficError};

/// Lane position, including off-highway.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lane {
    Off,
    Right,
    Middle,
    Left,
}

impl Lane {
    pub const ALL: [Lane; 4] = [Lane::Off, Lane::Right, Lane::Middle, Lane::Left];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Lane {
        Self::ALL[i]
    }
}

/// General lane maneuver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Maneuver {
    Stay,
    Left1,
    Right1,
    Left2,
    Right2,
    Enter,
    Exit,
    Pass,
}

impl Maneuver {
    pub const ALL: [Maneuver; 8] = [
        Maneuver::Stay,
        Maneuver::Left1,
        Maneuver::Right1,
        Maneuver::Left2,
        Maneuver::Right2,
        Maneuver::Enter,
        Maneuver::Exit,
        Maneuver::Pass,
    ];

    pub const LABELS: [&'static str; 8] = [
        "stay", "left1", "right1", "left2", "right2", "enter", "exit", "pass",
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Maneuver {
        Self::ALL[i]
    }

    pub fn label(self) -> &'static str {
        Self::LABELS[self.index()]
    }
}

/// Direction of a passing maneuver, when one is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecPass {
    PassLeft,
    PassRight,
    Blocked,
    None,
}

impl SpecPass {
    pub const ALL: [SpecPass; 4] = [
        SpecPass::PassLeft,
        SpecPass::PassRight,
        SpecPass::Blocked,
        SpecPass::None,
    ];

    pub const LABELS: [&'static str; 4] = ["pass-left", "pass-right", "blocked", "none"];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> SpecPass {
        Self::ALL[i]
    }
}

/// Single-stage lateral action.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatAct {
    Left,
    Same,
    Right,
}

impl LatAct {
    pub const ALL: [LatAct; 3] = [LatAct::Left, LatAct::Same, LatAct::Right];
    pub const LABELS: [&'static str; 3] = ["left", "same", "right"];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> LatAct {
        Self::ALL[i]
    }
}

/// Speed preference relative to the target.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtTarget {
    TooSlow,
    AtTarget,
    TooFast,
}

impl AtTarget {
    pub const ALL: [AtTarget; 3] = [AtTarget::TooSlow, AtTarget::AtTarget, AtTarget::TooFast];
    pub const LABELS: [&'static str; 3] = ["too-slow", "at-target", "too-fast"];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> AtTarget {
        Self::ALL[i]
    }
}

/// Forward action / acceleration maneuver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FwdAct {
    Accel,
    Maintain,
    Decel,
}

impl FwdAct {
    pub const ALL: [FwdAct; 3] = [FwdAct::Accel, FwdAct::Maintain, FwdAct::Decel];
    pub const LABELS: [&'static str; 3] = ["accel", "maintain", "decel"];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> FwdAct {
        Self::ALL[i]
    }
}

/// Turn indicator state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Left,
    Right,
    Off,
}

impl Signal {
    pub const ALL: [Signal; 3] = [Signal::Left, Signal::Right, Signal::Off];
    pub const LABELS: [&'static str; 3] = ["Left", "Right", "Off"];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Signal {
        Self::ALL[i]
    }
}

/// The eight neighbor slots around the driver. `true` means clear.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Clearances {
    pub front: bool,
    pub back: bool,
    pub left: bool,
    pub right: bool,
    pub front_left: bool,
    pub front_right: bool,
    pub back_left: bool,
    pub back_right: bool,
}

impl Clearances {
    /// Everything clear; pinned slots in reduced rosters stay this way.
    pub fn all_clear() -> Self {
        Clearances {
            front: true,
            back: true,
            left: true,
            right: true,
            front_left: true,
            front_right: true,
            back_left: true,
            back_right: true,
        }
    }
}

/// Deterministic lane update: `left` steps toward the left lane, `right`
/// steps toward off-highway, both clamped.
pub fn lane_transition(lane: Lane, act: LatAct) -> Lane {
    let i = lane.index();
    match act {
        LatAct::Left => Lane::from_index((i + 1).min(3)),
        LatAct::Same => lane,
        LatAct::Right => Lane::from_index(i.saturating_sub(1)),
    }
}

/// Which maneuvers are physically available from a lane. Labels stay
/// mutually exclusive: the off-highway shifts are `enter`/`exit`, never
/// `left1`/`right2`, so those get no mass where the motion overlaps.
pub fn feasible_maneuvers(lane: Lane) -> [bool; 8] {
    let mut f = [false; 8];
    if lane == Lane::Off {
        f[Maneuver::Enter.index()] = true;
        return f;
    }
    f[Maneuver::Stay.index()] = true;
    f[Maneuver::Pass.index()] = true;
    f[Maneuver::Left1.index()] = matches!(lane, Lane::Right | Lane::Middle);
    f[Maneuver::Left2.index()] = lane == Lane::Right;
    f[Maneuver::Right1.index()] = matches!(lane, Lane::Left | Lane::Middle);
    f[Maneuver::Right2.index()] = lane == Lane::Left;
    f[Maneuver::Exit.index()] = matches!(lane, Lane::Right | Lane::Middle);
    f
}

/// Two-stage lateral action profile of a plan. Non-pass plans are point
/// masses; a pass may delay its return shift with probability `delay`.
/// Rejects pairs that break the subsumption constraint.
pub fn plan_action_profile(
    gen: Maneuver,
    spec: SpecPass,
    delay: f64,
) -> Result<([f64; 3], [f64; 3]), TrafficError> {
    let point = |a: LatAct| {
        let mut d = [0.0; 3];
        d[a.index()] = 1.0;
        d
    };
    if gen == Maneuver::Pass {
        return match spec {
            SpecPass::PassLeft => {
                let mut m1 = [0.0; 3];
                m1[LatAct::Right.index()] = 1.0 - delay;
                m1[LatAct::Same.index()] = delay;
                Ok((point(LatAct::Left), m1))
            }
            SpecPass::PassRight => {
                let mut m1 = [0.0; 3];
                m1[LatAct::Left.index()] = 1.0 - delay;
                m1[LatAct::Same.index()] = delay;
                Ok((point(LatAct::Right), m1))
            }
            SpecPass::Blocked => Ok((point(LatAct::Same), point(LatAct::Same))),
            SpecPass::None => Err(TrafficError::InconsistentPlanPair {
                gen: gen.label(),
                spec: "none",
            }),
        };
    }
    if spec != SpecPass::None {
        return Err(TrafficError::InconsistentPlanPair {
            gen: gen.label(),
            spec: SpecPass::LABELS[spec.index()],
        });
    }
    let (m0, m1) = match gen {
        Maneuver::Stay => (LatAct::Same, LatAct::Same),
        Maneuver::Left1 => (LatAct::Left, LatAct::Same),
        Maneuver::Right1 => (LatAct::Right, LatAct::Same),
        Maneuver::Left2 => (LatAct::Left, LatAct::Left),
        Maneuver::Right2 => (LatAct::Right, LatAct::Right),
        Maneuver::Enter => (LatAct::Left, LatAct::Same),
        Maneuver::Exit => (LatAct::Right, LatAct::Right),
        Maneuver::Pass => unreachable!(),
    };
    Ok((point(m0), point(m1)))
}

/// Plan-selection distribution over the eight maneuvers.
///
/// Priority rules, applied top-down: an imminent exit dominates; otherwise
/// the speed preference picks between passing (when the front is blocked),
/// plain cruising, and drifting back to the right. A lane change whose
/// direction is blocked or unavailable hands its mass to `stay`. Feasible
/// maneuvers the rules leave unnamed get `eps`; named masses scale to fill
/// the remainder. Infeasible maneuvers are exactly zero.
pub fn gen_maneuver_rule(
    at_target: AtTarget,
    at_exit: bool,
    lane: Lane,
    clr: &Clearances,
    masses: &RuleMasses,
    eps: f64,
) -> [f64; 8] {
    let feasible = feasible_maneuvers(lane);
    let mut out = [0.0; 8];
    if lane == Lane::Off {
        out[Maneuver::Enter.index()] = 1.0;
        return out;
    }
    let mut named = [0.0; 8];
    let name_shift = |m: Maneuver, mass: f64, direction_clear: bool, named: &mut [f64; 8]| {
        if feasible[m.index()] && direction_clear {
            named[m.index()] += mass;
        } else {
            named[Maneuver::Stay.index()] += mass;
        }
    };
    if at_exit && feasible[Maneuver::Exit.index()] {
        name_shift(
            Maneuver::Exit,
            masses.exit_commit,
            clr.right && clr.back_right,
            &mut named,
        );
    } else {
        match at_target {
            AtTarget::TooSlow if !clr.front => {
                named[Maneuver::Pass.index()] += masses.pass_when_blocked;
                name_shift(
                    Maneuver::Right1,
                    masses.shift_when_blocked,
                    clr.right,
                    &mut named,
                );
                named[Maneuver::Stay.index()] +=
                    1.0 - masses.pass_when_blocked - masses.shift_when_blocked;
            }
            AtTarget::TooSlow => {
                named[Maneuver::Stay.index()] += masses.stay_when_slow_clear;
            }
            AtTarget::AtTarget => {
                named[Maneuver::Stay.index()] += masses.stay_at_target;
                name_shift(
                    Maneuver::Right1,
                    masses.shift_at_target,
                    clr.right && clr.back_right,
                    &mut named,
                );
            }
            AtTarget::TooFast => {
                named[Maneuver::Stay.index()] += masses.stay_too_fast;
                name_shift(
                    Maneuver::Right1,
                    masses.shift_too_fast,
                    clr.right,
                    &mut named,
                );
            }
        }
    }
    let unnamed = (0..8).filter(|&m| feasible[m] && named[m] == 0.0).count();
    let named_total: f64 = named.iter().sum();
    let scale = (1.0 - eps * unnamed as f64) / named_total;
    for m in 0..8 {
        if !feasible[m] {
            continue;
        }
        out[m] = if named[m] > 0.0 { named[m] * scale } else { eps };
    }
    out
}

/// Passing-direction distribution. Anything but a pass puts all mass on
/// `none` (the subsumption zero); a pass chooses a side from what the
/// adjacent and diagonal clearances leave open.
pub fn spec_pass_rule(
    gen: Maneuver,
    left_clr: bool,
    front_left_clr: bool,
    right_clr: bool,
    front_right_clr: bool,
    masses: &RuleMasses,
    pass_left_bias: f64,
) -> [f64; 4] {
    let mut out = [0.0; 4];
    if gen != Maneuver::Pass {
        out[SpecPass::None.index()] = 1.0;
        return out;
    }
    let left_open = left_clr && front_left_clr;
    let right_open = right_clr && front_right_clr;
    match (left_open, right_open) {
        (true, true) => {
            out[SpecPass::PassLeft.index()] = pass_left_bias;
            out[SpecPass::PassRight.index()] =
                1.0 - pass_left_bias - masses.pass_blocked_epsilon;
            out[SpecPass::Blocked.index()] = masses.pass_blocked_epsilon;
        }
        (true, false) => {
            out[SpecPass::PassLeft.index()] = masses.pass_side_open;
            out[SpecPass::PassRight.index()] = masses.pass_wrong_side;
            out[SpecPass::Blocked.index()] = masses.pass_side_open_blocked;
        }
        (false, true) => {
            out[SpecPass::PassRight.index()] = masses.pass_side_open;
            out[SpecPass::PassLeft.index()] = masses.pass_wrong_side;
            out[SpecPass::Blocked.index()] = masses.pass_side_open_blocked;
        }
        (false, false) => {
            out[SpecPass::Blocked.index()] = masses.pass_both_blocked;
            out[SpecPass::PassLeft.index()] = masses.pass_wrong_side;
            out[SpecPass::PassRight.index()] = masses.pass_wrong_side;
        }
    }
    out
}

/// `at exit?` is true exactly when the current position bin sits
/// immediately before the intended exit.
pub fn at_exit_value(y_bin: usize, exit_bin: usize) -> bool {
    y_bin == exit_bin
}

/// Sign of current speed against the target speed.
pub fn at_target_value(speed_bin: usize, target_bin: usize) -> AtTarget {
    match speed_bin.cmp(&target_bin) {
        std::cmp::Ordering::Less => AtTarget::TooSlow,
        std::cmp::Ordering::Equal => AtTarget::AtTarget,
        std::cmp::Ordering::Greater => AtTarget::TooFast,
    }
}

/// Acceleration plan given the speed preference.
pub fn acc_maneuver_row(at_target: AtTarget) -> [f64; 3] {
    match at_target {
        AtTarget::TooSlow => [0.90, 0.09, 0.01],
        AtTarget::AtTarget => [0.05, 0.90, 0.05],
        AtTarget::TooFast => [0.01, 0.09, 0.90],
    }
}

/// Next-speed distribution: acceleration shifts one bin up (clamped at the
/// top), deceleration mirrors downward, maintaining drifts symmetrically.
pub fn speed_transition(bin: usize, act: FwdAct, n_bins: usize, noise: f64) -> Vec<f64> {
    let mut row = vec![0.0; n_bins];
    let top = n_bins - 1;
    match act {
        FwdAct::Accel => {
            if bin == top {
                row[bin] = 1.0;
            } else {
                row[bin + 1] = 1.0 - noise;
                row[bin] = noise;
            }
        }
        FwdAct::Decel => {
            if bin == 0 {
                row[bin] = 1.0;
            } else {
                row[bin - 1] = 1.0 - noise;
                row[bin] = noise;
            }
        }
        FwdAct::Maintain => {
            row[bin] = 1.0 - noise;
            if bin == 0 {
                row[bin] += noise / 2.0;
            } else {
                row[bin - 1] += noise / 2.0;
            }
            if bin == top {
                row[bin] += noise / 2.0;
            } else {
                row[bin + 1] += noise / 2.0;
            }
        }
    }
    row
}

/// Next-position distribution: faster bins advance more reliably; the last
/// bin absorbs.
pub fn y_advance_row(pos: usize, speed_bin: usize, n_pos: usize, n_speed: usize) -> Vec<f64> {
    let mut row = vec![0.0; n_pos];
    let advance = (speed_bin + 1) as f64 / n_speed as f64;
    if pos == n_pos - 1 {
        row[pos] = 1.0;
    } else {
        row[pos + 1] = advance;
        row[pos] = 1.0 - advance;
    }
    row
}

/// Nominal signal intent per stage: the direction of that stage's lateral
/// shift, `Off` when the stage holds the lane. A delayed pass return does
/// not change the intent.
pub fn intended_signals(gen: Maneuver, spec: SpecPass) -> (Signal, Signal) {
    if gen == Maneuver::Pass {
        return match spec {
            SpecPass::PassLeft => (Signal::Left, Signal::Right),
            SpecPass::PassRight => (Signal::Right, Signal::Left),
            SpecPass::Blocked | SpecPass::None => (Signal::Off, Signal::Off),
        };
    }
    if spec != SpecPass::None {
        // Subsumption-violating row; zero upstream probability anyway.
        return (Signal::Off, Signal::Off);
    }
    match gen {
        Maneuver::Stay => (Signal::Off, Signal::Off),
        Maneuver::Left1 | Maneuver::Enter => (Signal::Left, Signal::Off),
        Maneuver::Right1 => (Signal::Right, Signal::Off),
        Maneuver::Left2 => (Signal::Left, Signal::Left),
        Maneuver::Right2 | Maneuver::Exit => (Signal::Right, Signal::Right),
        Maneuver::Pass => unreachable!(),
    }
}

/// Signal distribution concentrated on `primary` with mass `weight`;
/// leftover goes to `Off` except a small erroneous-direction residue.
fn biased_signal_row(primary: Signal, weight: f64, error: f64) -> [f64; 3] {
    let mut row = [0.0; 3];
    if primary == Signal::Off {
        row[Signal::Off.index()] = 1.0 - error;
        row[Signal::Left.index()] = error / 2.0;
        row[Signal::Right.index()] = error / 2.0;
    } else {
        row[primary.index()] = weight;
        row[Signal::Off.index()] = 1.0 - weight - error;
        let wrong = if primary == Signal::Left {
            Signal::Right
        } else {
            Signal::Left
        };
        row[wrong.index()] = error;
    }
    row
}

/// First-stage signal: intended direction with probability `compliance`.
pub fn signal_m0_row(intended: Signal, compliance: f64, error: f64) -> [f64; 3] {
    biased_signal_row(intended, compliance, error)
}

/// Second-stage signal, conditioned on what the driver did at stage 0.
/// Correct signalers stay consistent; a driver who skipped the first
/// signal is unlikely to produce the second.
pub fn signal_m1_row(
    intended: (Signal, Signal),
    m0: Signal,
    compliance: f64,
    consistency: f64,
    error: f64,
) -> [f64; 3] {
    let (intended0, intended1) = intended;
    if m0 == intended0 {
        biased_signal_row(intended1, consistency, error)
    } else if m0 == Signal::Off {
        // Failed to signal the first shift: habitual non-signaler.
        if intended1 == Signal::Off {
            biased_signal_row(Signal::Off, consistency, error)
        } else {
            let mut row = [0.0; 3];
            row[Signal::Off.index()] = consistency;
            row[intended1.index()] = 1.0 - consistency - error;
            let wrong = if intended1 == Signal::Left {
                Signal::Right
            } else {
                Signal::Left
            };
            row[wrong.index()] = error;
            row
        }
    } else {
        // Signaled the wrong way at stage 0; fall back to base compliance.
        biased_signal_row(intended1, compliance, error)
    }
}
