//! The boundary map of the inverse magnetic billiard.
//!
//! One application of [`step_f`] takes an entry state, flies the straight
//! chord across the square, follows the counterclockwise Larmor circle of
//! radius `r = 1/B` outside, and returns the state at re-entry.

pub mod closed_form;

use crate::error::{BilliardError, Result};
use crate::geometry::{
    birkhoff_to_ray, circle_boundary_reentry, magnetic_circle, ray_boundary_exit,
    ray_to_birkhoff, BirkhoffState, BoundaryHit, MagneticArc, Ray, Rotation, Side, Tolerances,
    Vec2,
};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimConfig {
    field: f64,
    radius: f64,
    pub tol: Tolerances,
    /// Maximal state deviation accepted when matching a return.
    pub period_tol: f64,
    pub max_steps: usize,
}

impl SimConfig {
    pub const DEFAULT_MAX_STEPS: usize = 100_000;

    pub fn from_field(b: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(BilliardError::InvalidConfig(format!(
                "field strength must be positive and finite, got {b}"
            )));
        }
        Ok(Self {
            field: b,
            radius: 1.0 / b,
            tol: Tolerances::default(),
            period_tol: 1e-6,
            max_steps: Self::DEFAULT_MAX_STEPS,
        })
    }

    pub fn from_radius(r: f64) -> Result<Self> {
        if !(r.is_finite() && r > 0.0) {
            return Err(BilliardError::InvalidConfig(format!(
                "radius must be positive and finite, got {r}"
            )));
        }
        let mut cfg = Self::from_field(1.0 / r)?;
        cfg.radius = r;
        Ok(cfg)
    }

    pub fn field(&self) -> f64 {
        self.field
    }

    /// Larmor radius `1/B`.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn with_max_steps(mut self, max_steps: usize) -> Self {
        self.max_steps = max_steps;
        self
    }

    pub fn with_period_tol(mut self, period_tol: f64) -> Self {
        self.period_tol = period_tol;
        self
    }
}

/// One application of the map: the chord, the exit, the arc and the entry.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BounceRecord {
    pub n: usize,
    /// Exit state. `theta` is the unsigned angle between the counterclockwise
    /// tangent and the outgoing velocity, so for a same-side bounce it equals
    /// the entry angle.
    pub exit: BirkhoffState,
    pub entry: BirkhoffState,
    pub exit_point: Vec2,
    pub entry_point: Vec2,
    pub exit_side: Side,
    pub entry_side: Side,
    pub corners_turned: u32,
    pub arc: MagneticArc,
    pub chord_length: f64,
}

fn exit_state(hit: &BoundaryHit, direction: Vec2) -> BirkhoffState {
    let tangent = hit.side.tangent();
    let theta = tangent.cross(direction).abs().atan2(tangent.dot(direction));
    BirkhoffState {
        s: hit.s(),
        theta,
    }
}

/// Applies the map once, entry state to entry state.
pub fn step_f(state: &BirkhoffState, cfg: &SimConfig) -> Result<(BirkhoffState, BounceRecord)> {
    let tol = &cfg.tol;
    let ray = birkhoff_to_ray(state, tol)?;
    let (exit, chord_length) = ray_boundary_exit(&ray, tol)?;
    let mut arc = magnetic_circle(exit.point, ray.direction, cfg.radius, Rotation::Ccw);
    let re = circle_boundary_reentry(&arc, exit.point, tol)?;
    arc.sweep = re.sweep;
    let entry = ray_to_birkhoff(re.hit.point, re.direction, tol)?;
    let record = BounceRecord {
        n: 0,
        exit: exit_state(&exit, ray.direction),
        entry,
        exit_point: exit.point,
        entry_point: re.hit.point,
        exit_side: exit.side,
        entry_side: re.hit.side,
        corners_turned: re.corners_turned,
        arc,
        chord_length,
    };
    Ok((entry, record))
}

/// Time reversal of [`step_f`]: the particle is sent backwards along the
/// clockwise arc into the previous exit point, then backwards along the chord.
pub fn inverse_f(state: &BirkhoffState, cfg: &SimConfig) -> Result<BirkhoffState> {
    let tol = &cfg.tol;
    let ray = birkhoff_to_ray(state, tol)?;
    let arc = magnetic_circle(ray.origin, -ray.direction, cfg.radius, Rotation::Cw);
    let re = circle_boundary_reentry(&arc, ray.origin, tol)?;
    let (start, _) = ray_boundary_exit(&Ray::new(re.hit.point, re.direction), tol)?;
    ray_to_birkhoff(start.point, -re.direction, tol)
}

/// Specular reflection at the next wall: the `B -> infinity` limit.
pub fn classical_step(state: &BirkhoffState, tol: &Tolerances) -> Result<BirkhoffState> {
    let ray = birkhoff_to_ray(state, tol)?;
    let (hit, _) = ray_boundary_exit(&ray, tol)?;
    let n = hit.side.outward_normal();
    let d = ray.direction;
    let reflected = d - (2.0 * d.dot(n)) * n;
    ray_to_birkhoff(hit.point, reflected, tol)
}

/// Exit point of the chord leaving from `state`, used to compare against
/// classical reflection points.
pub fn chord_exit(state: &BirkhoffState, tol: &Tolerances) -> Result<BoundaryHit> {
    let ray = birkhoff_to_ray(state, tol)?;
    Ok(ray_boundary_exit(&ray, tol)?.0)
}
