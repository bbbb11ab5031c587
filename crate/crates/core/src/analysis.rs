//! Orbits, periodicity checks and phase portraits.

use std::f64::consts::FRAC_PI_2;
use std::fmt;

use rayon::prelude::*;

use crate::dynamics::{step_f, BounceRecord, SimConfig};
use crate::error::{BilliardError, Result};
use crate::geometry::BirkhoffState;

/// How an orbit computation ended.
#[derive(Clone, Debug, PartialEq)]
pub enum Termination {
    Completed,
    CornerHit { step: usize },
    TangentGraze { step: usize },
    /// Any other failure of the map; not expected for valid input.
    Failed { step: usize, error: BilliardError },
}

impl Termination {
    fn from_error(step: usize, error: BilliardError) -> Self {
        match error {
            BilliardError::CornerHit { .. } | BilliardError::CornerState { .. } => {
                Termination::CornerHit { step }
            }
            BilliardError::TangentGraze { .. } => Termination::TangentGraze { step },
            error => Termination::Failed { step, error },
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }

    /// Index of the step that failed, if any.
    pub fn step(&self) -> Option<usize> {
        match self {
            Termination::Completed => None,
            Termination::CornerHit { step }
            | Termination::TangentGraze { step }
            | Termination::Failed { step, .. } => Some(*step),
        }
    }
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Completed => write!(f, "completed"),
            Termination::CornerHit { step } => write!(f, "corner hit at step {step}"),
            Termination::TangentGraze { step } => write!(f, "tangential graze at step {step}"),
            Termination::Failed { step, error } => write!(f, "failed at step {step}: {error}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitTrace {
    pub initial: BirkhoffState,
    pub cfg: SimConfig,
    pub records: Vec<BounceRecord>,
    pub termination: Termination,
}

impl OrbitTrace {
    /// The initial state followed by every entry state.
    pub fn states(&self) -> impl Iterator<Item = BirkhoffState> + '_ {
        std::iter::once(self.initial).chain(self.records.iter().map(|r| r.entry))
    }

    pub fn final_state(&self) -> BirkhoffState {
        self.records.last().map_or(self.initial, |r| r.entry)
    }

    pub fn corner_turns(&self) -> u32 {
        self.records.iter().map(|r| r.corners_turned).sum()
    }
}

/// Applies the map up to `n_steps` times, stopping at the first error.
pub fn iterate(initial: BirkhoffState, n_steps: usize, cfg: &SimConfig) -> OrbitTrace {
    let mut records = Vec::with_capacity(n_steps.min(1 << 20));
    let mut state = initial;
    let mut termination = Termination::Completed;
    for n in 0..n_steps {
        match step_f(&state, cfg) {
            Ok((next, mut record)) => {
                record.n = n;
                records.push(record);
                state = next;
            }
            Err(e) => {
                termination = Termination::from_error(n, e);
                break;
            }
        }
    }
    OrbitTrace {
        initial,
        cfg: *cfg,
        records,
        termination,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Period {
    pub period: usize,
    /// Deviation of the returning state from the initial one.
    pub deviation: f64,
}

/// Smallest `k >= 1` with `F^k(x0)` within `tol` of `x0`.
pub fn detect_period(trace: &OrbitTrace, tol: f64) -> Option<Period> {
    let x0 = trace.initial;
    trace
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| (i + 1, r.entry.distance(&x0)))
        .find(|&(_, dev)| dev <= tol)
        .map(|(period, deviation)| Period { period, deviation })
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Distance from `x` to the nearest integer.
fn frac_dist(x: f64) -> f64 {
    (x - x.round()).abs()
}

/// Outcome of the rational-slope gate for a launch from the Bottom side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaVerdict {
    pub p: u64,
    pub q: u64,
    pub s0: f64,
    pub field: f64,
    /// Launch angle `atan(p/q)`.
    pub theta0: f64,
    /// `min_k { |s0 - k/q|, |s0 p/q - k/p| }`.
    pub lattice_distance: f64,
    /// `lattice_distance - 2/B`.
    pub margin: f64,
    /// Distance from the vertices to the crossings of the unperturbed
    /// chord with the unfolded grid, `min_k { |s0 - k/p|, |s0 p/q - k/q| }`,
    /// minus `2/B`. Reported for comparison, not used by `passes`.
    pub crossing_margin: f64,
    pub predicted_period: usize,
    /// Whether the side shifts of one unperturbed period sum to zero.
    /// They do when `p = q` or `p + q` is odd; otherwise the orbit drifts
    /// by `O(1/B)` per period.
    pub shifts_cancel: bool,
    pub passes: bool,
}

pub fn lemma_gate(s0: f64, p: u64, q: u64, b: f64) -> Result<LemmaVerdict> {
    if p == 0 || q == 0 || gcd(p, q) != 1 {
        return Err(BilliardError::InvalidSlope { p, q });
    }
    if !(s0 > 0.0 && s0 < 1.0) {
        return Err(BilliardError::Precondition(format!(
            "s0 = {s0} must lie in (0, 1)"
        )));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(BilliardError::InvalidConfig(format!("field {b} must be positive")));
    }
    let (pf, qf) = (p as f64, q as f64);
    let lattice_distance = (frac_dist(s0 * qf) / qf).min(frac_dist(s0 * pf / qf * pf) / pf);
    let crossing_distance = (frac_dist(s0 * pf) / pf).min(frac_dist(s0 * pf / qf * qf) / qf);
    let diameter = 2.0 / b;
    let margin = lattice_distance - diameter;
    Ok(LemmaVerdict {
        p,
        q,
        s0,
        field: b,
        theta0: pf.atan2(qf),
        lattice_distance,
        margin,
        crossing_margin: crossing_distance - diameter,
        predicted_period: 2 * (p + q) as usize,
        shifts_cancel: p == q || (p + q) % 2 == 1,
        passes: margin > 0.0,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct LemmaCheck {
    /// Returned to the launch state within `period_tol` after the predicted
    /// number of steps.
    pub periodic: bool,
    pub deviation: f64,
    pub minimal_period: Option<usize>,
    pub corner_turns: u32,
    pub termination: Termination,
}

/// Simulates `2(p+q)` steps of a gate-passing launch.
pub fn verify_lemma(verdict: &LemmaVerdict) -> Result<LemmaCheck> {
    if !verdict.passes {
        return Err(BilliardError::Precondition(format!(
            "lemma gate fails (margin {:e})",
            verdict.margin
        )));
    }
    let cfg = SimConfig::from_field(verdict.field)?;
    let initial = BirkhoffState::new(verdict.s0, verdict.theta0)?;
    let trace = iterate(initial, verdict.predicted_period, &cfg);
    let completed = trace.termination.is_completed();
    let deviation = if completed {
        trace.final_state().distance(&initial)
    } else {
        f64::INFINITY
    };
    Ok(LemmaCheck {
        periodic: completed && deviation <= cfg.period_tol,
        deviation,
        minimal_period: detect_period(&trace, cfg.period_tol).map(|p| p.period),
        corner_turns: trace.corner_turns(),
        termination: trace.termination,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StrongFieldCheck {
    pub periodic: bool,
    pub period: Option<Period>,
    pub termination: Termination,
}

/// Longest period searched for the `(r, pi/2)` launch.
pub const STRONG_FIELD_MAX_PERIOD: usize = 8;

/// Launches perpendicular to the Bottom side at `s = r` and looks for a
/// return within [`STRONG_FIELD_MAX_PERIOD`] steps.
pub fn check_b_gt_1(r: f64) -> Result<StrongFieldCheck> {
    if !(r > 0.0 && r < 1.0) {
        return Err(BilliardError::Precondition(format!(
            "radius {r} must lie in (0, 1)"
        )));
    }
    let cfg = SimConfig::from_radius(r)?;
    let trace = iterate(BirkhoffState::new(r, FRAC_PI_2)?, STRONG_FIELD_MAX_PERIOD, &cfg);
    let period = detect_period(&trace, cfg.period_tol);
    Ok(StrongFieldCheck {
        periodic: period.is_some(),
        period,
        termination: trace.termination,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CornerHunt {
    /// Step index of the first bounce that turns a corner.
    pub first_turn: Option<usize>,
    pub steps_run: usize,
    pub termination: Termination,
}

/// Runs the orbit until a bounce turns a corner, without keeping records.
pub fn first_corner_turn(initial: BirkhoffState, cfg: &SimConfig, max_steps: usize) -> CornerHunt {
    let mut state = initial;
    for n in 0..max_steps {
        match step_f(&state, cfg) {
            Ok((next, record)) => {
                if record.corners_turned > 0 {
                    return CornerHunt {
                        first_turn: Some(n),
                        steps_run: n + 1,
                        termination: Termination::Completed,
                    };
                }
                state = next;
            }
            Err(e) => {
                return CornerHunt {
                    first_turn: None,
                    steps_run: n,
                    termination: Termination::from_error(n, e),
                }
            }
        }
    }
    CornerHunt {
        first_turn: None,
        steps_run: max_steps,
        termination: Termination::Completed,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PortraitPoint {
    pub orbit_id: usize,
    pub n: usize,
    pub s: f64,
    /// `cos(theta)`.
    pub u: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Portrait {
    /// Ordered by `(orbit_id, n)`.
    pub points: Vec<PortraitPoint>,
    /// One entry per orbit; anything but `Completed` means the orbit was truncated.
    pub terminations: Vec<Termination>,
}

/// Entry states (including the launch, `n = 0`) of every orbit.
pub fn phase_portrait(initials: &[BirkhoffState], n_steps: usize, cfg: &SimConfig) -> Portrait {
    let orbits: Vec<(Vec<PortraitPoint>, Termination)> = initials
        .par_iter()
        .enumerate()
        .map(|(orbit_id, x0)| {
            let trace = iterate(*x0, n_steps, cfg);
            let points = trace
                .states()
                .enumerate()
                .map(|(n, st)| PortraitPoint {
                    orbit_id,
                    n,
                    s: st.s,
                    u: st.u(),
                })
                .collect();
            (points, trace.termination)
        })
        .collect();
    let mut portrait = Portrait {
        points: Vec::new(),
        terminations: Vec::with_capacity(orbits.len()),
    };
    for (points, termination) in orbits {
        portrait.points.extend(points);
        portrait.terminations.push(termination);
    }
    portrait
}
