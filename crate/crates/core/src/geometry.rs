//! Boundary parametrization of the unit square and first-hit queries.
//!
//! Arc length `s` runs counterclockwise from the origin corner, so the
//! sides occupy `[0,1)`, `[1,2)`, `[2,3)` and `[3,4)` in the order
//! Bottom, Right, Top, Left. An inward direction at `s` is stored as the
//! angle `theta` in `(0, pi)` from the side's counterclockwise tangent.
//!
//! All intersection queries are closed form: the ray exit solves one
//! linear equation per axis, the circle re-entry solves one quadratic per
//! side line and clips the roots to the segment.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{BilliardError, Result};

/// Perimeter of the unit square.
pub const PERIMETER: f64 = 4.0;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(phi: f64) -> Self {
        let (sin, cos) = phi.sin_cos();
        Self::new(cos, sin)
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3d cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n)
    }

    pub fn rot90_ccw(self) -> Self {
        Self::new(-self.y, self.x)
    }

    pub fn rot90_cw(self) -> Self {
        Self::new(self.y, -self.x)
    }

    pub fn rotated(self, angle: f64) -> Self {
        let (sin, cos) = angle.sin_cos();
        Self::new(self.x * cos - self.y * sin, self.x * sin + self.y * cos)
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self * rhs.x, self * rhs.y)
    }
}

/// Numerical thresholds shared by every boundary query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Arc-length distance to a vertex below which a hit counts as a corner hit.
    pub corner: f64,
    /// Distance from the boundary accepted as "on the boundary".
    pub boundary: f64,
    /// Minimal sweep of an exterior arc, excludes re-finding the exit point.
    pub arc_eps: f64,
    /// Discriminant `1 - (offset/r)^2` at or below which a circle-line hit is tangential.
    pub graze: f64,
    /// Minimal flight distance along a ray.
    pub flight_eps: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            corner: 1e-9,
            boundary: 1e-9,
            arc_eps: 1e-10,
            graze: 1e-12,
            flight_eps: 1e-12,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Bottom,
    Right,
    Top,
    Left,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::Bottom, Side::Right, Side::Top, Side::Left];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Side {
        Self::ALL[i % 4]
    }

    /// Unit tangent pointing counterclockwise around the square.
    pub fn tangent(self) -> Vec2 {
        match self {
            Side::Bottom => Vec2::new(1.0, 0.0),
            Side::Right => Vec2::new(0.0, 1.0),
            Side::Top => Vec2::new(-1.0, 0.0),
            Side::Left => Vec2::new(0.0, -1.0),
        }
    }

    pub fn outward_normal(self) -> Vec2 {
        -self.inward_normal()
    }

    pub fn inward_normal(self) -> Vec2 {
        self.tangent().rot90_ccw()
    }

    /// Arc length at the side's starting (clockwise-most) vertex.
    pub fn arc_offset(self) -> f64 {
        self.index() as f64
    }

    /// Starting vertex of the side; the local coordinate runs from here along the tangent.
    pub fn start_vertex(self) -> Vec2 {
        match self {
            Side::Bottom => Vec2::new(0.0, 0.0),
            Side::Right => Vec2::new(1.0, 0.0),
            Side::Top => Vec2::new(1.0, 1.0),
            Side::Left => Vec2::new(0.0, 1.0),
        }
    }

    /// Point at local coordinate `t` along the side. Coordinates that are
    /// constant on the side are set exactly.
    pub fn point_at(self, t: f64) -> Vec2 {
        match self {
            Side::Bottom => Vec2::new(t, 0.0),
            Side::Right => Vec2::new(1.0, t),
            Side::Top => Vec2::new(1.0 - t, 1.0),
            Side::Left => Vec2::new(0.0, 1.0 - t),
        }
    }

    /// Local coordinate of `p` projected onto the side.
    pub fn local_of(self, p: Vec2) -> f64 {
        match self {
            Side::Bottom => p.x,
            Side::Right => p.y,
            Side::Top => 1.0 - p.x,
            Side::Left => 1.0 - p.y,
        }
    }

    /// Distance from `p` to the infinite line carrying the side.
    fn line_distance(self, p: Vec2) -> f64 {
        match self {
            Side::Bottom => p.y.abs(),
            Side::Right => (p.x - 1.0).abs(),
            Side::Top => (p.y - 1.0).abs(),
            Side::Left => p.x.abs(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Bottom => "Bottom",
            Side::Right => "Right",
            Side::Top => "Top",
            Side::Left => "Left",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Side {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "Bottom" => Ok(Side::Bottom),
            "Right" => Ok(Side::Right),
            "Top" => Ok(Side::Top),
            "Left" => Ok(Side::Left),
            other => Err(format!("unknown side {other:?}")),
        }
    }
}

/// A point of the phase space: arc length plus inward angle.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BirkhoffState {
    pub s: f64,
    pub theta: f64,
}

impl BirkhoffState {
    /// Checks the coordinate ranges. Corner proximity is checked by the
    /// queries that need a well-defined side.
    pub fn new(s: f64, theta: f64) -> Result<Self> {
        if !(0.0..PERIMETER).contains(&s) || !(theta > 0.0 && theta < PI) {
            return Err(BilliardError::InvalidState { s, theta });
        }
        Ok(Self { s, theta })
    }

    pub fn side(&self) -> Side {
        Side::from_index(self.s.floor() as usize)
    }

    /// Local coordinate along the containing side, in `[0,1)`.
    pub fn local(&self) -> f64 {
        self.s - self.s.floor()
    }

    /// `u = cos(theta)`, the portrait ordinate.
    pub fn u(&self) -> f64 {
        self.theta.cos()
    }

    /// Max of the wrap-aware arc-length gap and the angle gap.
    pub fn distance(&self, other: &BirkhoffState) -> f64 {
        let ds = (self.s - other.s).rem_euclid(PERIMETER);
        let ds = ds.min(PERIMETER - ds);
        ds.max((self.theta - other.theta).abs())
    }
}

/// Arc-length distance from `s` to the nearest vertex.
pub fn corner_distance(s: f64) -> f64 {
    let f = s.rem_euclid(1.0);
    f.min(1.0 - f)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray {
    pub origin: Vec2,
    pub direction: Vec2,
}

impl Ray {
    pub fn new(origin: Vec2, direction: Vec2) -> Self {
        Self { origin, direction }
    }

    pub fn at(&self, t: f64) -> Vec2 {
        self.origin + t * self.direction
    }
}

/// Sense of rotation on an exterior arc. Forward dynamics always uses
/// [`Rotation::Ccw`]; the time-reversed map runs clockwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Rotation {
    Ccw,
    Cw,
}

impl Rotation {
    fn sign(self) -> f64 {
        match self {
            Rotation::Ccw => 1.0,
            Rotation::Cw => -1.0,
        }
    }
}

/// A circular arc traversed outside the square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MagneticArc {
    pub center: Vec2,
    pub radius: f64,
    /// Polar angle of the exit point around `center`.
    pub phi_exit: f64,
    /// Swept angle until re-entry, in `(0, 2pi]`. Zero until the re-entry is known.
    pub sweep: f64,
    pub rotation: Rotation,
}

impl MagneticArc {
    pub fn point_at(&self, phi: f64) -> Vec2 {
        self.center + self.radius * Vec2::from_angle(phi)
    }

    /// Unit velocity at polar angle `phi`.
    pub fn direction_at(&self, phi: f64) -> Vec2 {
        let d = Vec2::new(-phi.sin(), phi.cos());
        self.rotation.sign() * d
    }

    /// Polar angle reached after sweeping `delta` from the exit point.
    pub fn phi_after(&self, delta: f64) -> f64 {
        self.phi_exit + self.rotation.sign() * delta
    }

    pub fn exit_point(&self) -> Vec2 {
        self.point_at(self.phi_exit)
    }

    pub fn entry_point(&self) -> Vec2 {
        self.point_at(self.phi_after(self.sweep))
    }
}

/// Boundary point at arc length `s` and the side containing it.
pub fn arc_to_point(s: f64) -> (Vec2, Side) {
    let s = s.rem_euclid(PERIMETER);
    let side = Side::from_index(s.floor() as usize);
    (side.point_at(s - s.floor()), side)
}

/// Arc length of a boundary point. Vertices map to their integer arc length.
pub fn point_to_arc(p: Vec2, tol: &Tolerances) -> Result<f64> {
    let (side, dist) = nearest_side(p);
    let t = side.local_of(p);
    if dist > tol.boundary || t < -tol.boundary || t > 1.0 + tol.boundary {
        return Err(BilliardError::NotOnBoundary { x: p.x, y: p.y });
    }
    Ok(wrap_arc(side.arc_offset() + t.clamp(0.0, 1.0)))
}

fn nearest_side(p: Vec2) -> (Side, f64) {
    let mut best = (Side::Bottom, f64::INFINITY);
    for side in Side::ALL {
        let t = side.local_of(p);
        // Distance to the segment, not the line.
        let along = if t < 0.0 {
            -t
        } else if t > 1.0 {
            t - 1.0
        } else {
            0.0
        };
        let d = side.line_distance(p).hypot(along);
        if d < best.1 {
            best = (side, d);
        }
    }
    best
}

fn wrap_arc(s: f64) -> f64 {
    let s = s.rem_euclid(PERIMETER);
    if s >= PERIMETER {
        0.0
    } else {
        s
    }
}

pub fn birkhoff_to_ray(state: &BirkhoffState, tol: &Tolerances) -> Result<Ray> {
    if corner_distance(state.s) < tol.corner {
        return Err(BilliardError::CornerState { s: state.s });
    }
    let (origin, side) = arc_to_point(state.s);
    Ok(Ray::new(origin, side.tangent().rotated(state.theta)))
}

pub fn ray_to_birkhoff(point: Vec2, direction: Vec2, tol: &Tolerances) -> Result<BirkhoffState> {
    let s = point_to_arc(point, tol)?;
    if corner_distance(s) < tol.corner {
        return Err(BilliardError::CornerState { s });
    }
    state_on_side(Side::from_index(s.floor() as usize), s - s.floor(), direction)
}

/// Birkhoff state for an inward `direction` at local coordinate `t` of `side`.
fn state_on_side(side: Side, t: f64, direction: Vec2) -> Result<BirkhoffState> {
    let tangent = side.tangent();
    let sin = tangent.cross(direction);
    let cos = tangent.dot(direction);
    let theta = sin.atan2(cos);
    if sin <= 0.0 || !(theta > 0.0 && theta < PI) {
        return Err(BilliardError::NotInward {
            dx: direction.x,
            dy: direction.y,
        });
    }
    BirkhoffState::new(wrap_arc(side.arc_offset() + t), theta)
}

/// A boundary crossing together with the side it lies on.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryHit {
    pub point: Vec2,
    pub side: Side,
    /// Local coordinate along `side`.
    pub local: f64,
}

impl BoundaryHit {
    pub fn s(&self) -> f64 {
        wrap_arc(self.side.arc_offset() + self.local)
    }

    fn new(side: Side, local: f64, tol: &Tolerances) -> Result<Self> {
        let point = side.point_at(local);
        if local.min(1.0 - local) < tol.corner {
            return Err(BilliardError::CornerHit {
                x: point.x,
                y: point.y,
            });
        }
        Ok(Self { point, side, local })
    }
}

/// First boundary crossing of a ray started inside (or on) the square.
/// Returns the hit and the flight distance.
pub fn ray_boundary_exit(ray: &Ray, tol: &Tolerances) -> Result<(BoundaryHit, f64)> {
    let Ray { origin: o, direction: d } = *ray;
    let leave = |pos: f64, vel: f64, hi: Side, lo: Side| -> (f64, Side) {
        if vel > 0.0 {
            ((1.0 - pos) / vel, hi)
        } else if vel < 0.0 {
            (-pos / vel, lo)
        } else {
            (f64::INFINITY, hi)
        }
    };
    let (tx, side_x) = leave(o.x, d.x, Side::Right, Side::Left);
    let (ty, side_y) = leave(o.y, d.y, Side::Top, Side::Bottom);
    let (t, side) = if tx <= ty { (tx, side_x) } else { (ty, side_y) };
    if !t.is_finite() || t <= tol.flight_eps {
        return Err(BilliardError::NoExit);
    }
    let hit = ray.at(t);
    let hit = BoundaryHit::new(side, side.local_of(hit), tol)?;
    Ok((hit, t))
}

/// Circle of radius `r` tangent to `direction` at `point`, oriented so the
/// particle moves along `direction` with the given rotation sense.
pub fn magnetic_circle(point: Vec2, direction: Vec2, r: f64, rotation: Rotation) -> MagneticArc {
    let to_center = match rotation {
        Rotation::Ccw => direction.rot90_ccw(),
        Rotation::Cw => direction.rot90_cw(),
    };
    let center = point + r * to_center;
    MagneticArc {
        center,
        radius: r,
        phi_exit: (point - center).angle(),
        sweep: 0.0,
        rotation,
    }
}

/// Where an exterior arc comes back into the square.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Reentry {
    pub hit: BoundaryHit,
    /// Unit velocity at the entry point, pointing into the square.
    pub direction: Vec2,
    pub sweep: f64,
    pub corners_turned: u32,
}

#[derive(Clone, Copy, Debug)]
struct ArcCandidate {
    side: Side,
    local: f64,
    sweep: f64,
    discriminant: f64,
}

/// All crossings of the arc's circle with the four side segments, with
/// their sweep from the exit point. The exit point itself is excluded.
fn arc_candidates(arc: &MagneticArc, tol: &Tolerances) -> Vec<ArcCandidate> {
    let c = arc.center;
    let r = arc.radius;
    let mut out = Vec::with_capacity(8);
    for side in Side::ALL {
        // Offset from the center to the side line, and the center's
        // coordinate along the line direction.
        let (offset, center_along, vertical) = match side {
            Side::Bottom => (-c.y, c.x, false),
            Side::Top => (1.0 - c.y, c.x, false),
            Side::Left => (-c.x, c.y, true),
            Side::Right => (1.0 - c.x, c.y, true),
        };
        // Normalized by r^2 so the graze threshold does not depend on the field.
        let ratio = offset / r;
        let discriminant = (1.0 - ratio) * (1.0 + ratio);
        if discriminant < 0.0 {
            continue;
        }
        let half = r * discriminant.sqrt();
        for along in [center_along - half, center_along + half] {
            let p = if vertical {
                Vec2::new(c.x + offset, along)
            } else {
                Vec2::new(along, c.y + offset)
            };
            let local = side.local_of(p);
            if local < -tol.corner || local > 1.0 + tol.corner {
                continue;
            }
            let phi = (p - c).angle();
            let sweep = (arc.rotation.sign() * (phi - arc.phi_exit)).rem_euclid(TAU);
            if sweep <= tol.arc_eps || sweep >= TAU - tol.arc_eps {
                continue;
            }
            out.push(ArcCandidate {
                side,
                local,
                sweep,
                discriminant,
            });
            if half == 0.0 {
                break;
            }
        }
    }
    out
}

/// First return of an exterior arc to the boundary.
///
/// `exit` must lie on the arc's circle at `arc.phi_exit` and on the boundary.
pub fn circle_boundary_reentry(arc: &MagneticArc, exit: Vec2, tol: &Tolerances) -> Result<Reentry> {
    debug_assert!((exit.distance(arc.center) - arc.radius).abs() <= 1e-9);
    let exit_s = point_to_arc(exit, tol)?;
    let exit_side = Side::from_index(exit_s.floor() as usize);

    let first = arc_candidates(arc, tol)
        .into_iter()
        .min_by(|a, b| a.sweep.total_cmp(&b.sweep))
        // The arc closes on the exit point at a full turn and must cross
        // into the square before that.
        .expect("exterior arc never re-enters the square");

    if first.discriminant <= tol.graze {
        return Err(BilliardError::TangentGraze {
            discriminant: first.discriminant,
        });
    }
    let hit = BoundaryHit::new(first.side, first.local, tol)?;
    let direction = arc.direction_at(arc.phi_after(first.sweep));
    let gap = match arc.rotation {
        Rotation::Ccw => (4 + first.side.index() - exit_side.index()) % 4,
        Rotation::Cw => (4 + exit_side.index() - first.side.index()) % 4,
    };
    Ok(Reentry {
        hit,
        direction,
        sweep: first.sweep,
        corners_turned: gap as u32,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn close(a: f64, b: f64, eps: f64) -> bool {
        (a - b).abs() <= eps
    }

    #[test]
    fn side_frames() {
        assert_eq!(Side::Bottom.tangent(), Vec2::new(1.0, 0.0));
        assert_eq!(Side::Right.tangent(), Vec2::new(0.0, 1.0));
        assert_eq!(Side::Top.tangent(), Vec2::new(-1.0, 0.0));
        assert_eq!(Side::Left.tangent(), Vec2::new(0.0, -1.0));
        for side in Side::ALL {
            assert_eq!(side.inward_normal(), -side.outward_normal());
            // Inward normal points at the square's center.
            let mid = side.point_at(0.5);
            assert!(side.inward_normal().dot(Vec2::new(0.5, 0.5) - mid) > 0.0);
        }
        assert_eq!(
            Side::ALL.map(Side::arc_offset),
            [0.0, 1.0, 2.0, 3.0]
        );
    }

    #[test]
    fn arc_to_point_examples() {
        assert_eq!(arc_to_point(0.5), (Vec2::new(0.5, 0.0), Side::Bottom));
        assert_eq!(arc_to_point(1.25), (Vec2::new(1.0, 0.25), Side::Right));
        assert_eq!(arc_to_point(3.5), (Vec2::new(0.0, 0.5), Side::Left));
    }

    #[test]
    fn point_to_arc_examples() {
        let t = tol();
        assert_eq!(point_to_arc(Vec2::new(0.9, 0.0), &t).unwrap(), 0.9);
        assert_eq!(point_to_arc(Vec2::new(1.0, 1.0), &t).unwrap(), 2.0);
        assert_eq!(point_to_arc(Vec2::new(0.0, 0.25), &t).unwrap(), 3.75);
        assert_eq!(point_to_arc(Vec2::new(0.0, 0.0), &t).unwrap(), 0.0);
        assert_eq!(point_to_arc(Vec2::new(1.0, 0.0), &t).unwrap(), 1.0);
        assert_eq!(point_to_arc(Vec2::new(0.0, 1.0), &t).unwrap(), 3.0);
    }

    #[test]
    fn point_to_arc_rejects_interior_and_far_points() {
        let t = tol();
        for p in [Vec2::new(0.5, 0.5), Vec2::new(0.5, 1e-6), Vec2::new(1.5, 0.0)] {
            assert!(matches!(
                point_to_arc(p, &t),
                Err(BilliardError::NotOnBoundary { .. })
            ));
        }
        // Within tolerance is accepted.
        assert!(close(point_to_arc(Vec2::new(0.5, 5e-10), &t).unwrap(), 0.5, 1e-12));
    }

    #[test]
    fn birkhoff_to_ray_examples() {
        let t = tol();
        let r = birkhoff_to_ray(&BirkhoffState::new(0.5, FRAC_PI_2).unwrap(), &t).unwrap();
        assert_eq!(r.origin, Vec2::new(0.5, 0.0));
        assert!(close(r.direction.x, 0.0, 1e-15) && close(r.direction.y, 1.0, 1e-15));

        let r = birkhoff_to_ray(&BirkhoffState::new(1.25, FRAC_PI_2).unwrap(), &t).unwrap();
        assert_eq!(r.origin, Vec2::new(1.0, 0.25));
        assert!(close(r.direction.x, -1.0, 1e-15) && close(r.direction.y, 0.0, 1e-15));

        let r = birkhoff_to_ray(&BirkhoffState::new(0.9, FRAC_PI_4).unwrap(), &t).unwrap();
        assert_eq!(r.origin, Vec2::new(0.9, 0.0));
        assert!(close(r.direction.x, FRAC_1_SQRT_2, 1e-15));
        assert!(close(r.direction.y, FRAC_1_SQRT_2, 1e-15));
    }

    #[test]
    fn birkhoff_to_ray_rejects_corners() {
        let t = tol();
        for s in [0.0, 1.0, 2.0 + 5e-10, 3.0 - 5e-10] {
            let state = BirkhoffState::new(s, 1.0).unwrap();
            assert!(matches!(
                birkhoff_to_ray(&state, &t),
                Err(BilliardError::CornerState { .. })
            ));
        }
    }

    #[test]
    fn state_ranges_are_enforced() {
        assert!(BirkhoffState::new(4.0, 1.0).is_err());
        assert!(BirkhoffState::new(-0.1, 1.0).is_err());
        assert!(BirkhoffState::new(0.5, 0.0).is_err());
        assert!(BirkhoffState::new(0.5, PI).is_err());
        assert!(BirkhoffState::new(0.5, f64::NAN).is_err());
    }

    #[test]
    fn ray_to_birkhoff_examples() {
        let t = tol();
        let st = ray_to_birkhoff(Vec2::new(0.5, 0.0), Vec2::new(0.0, 1.0), &t).unwrap();
        assert!(close(st.s, 0.5, 1e-15) && close(st.theta, FRAC_PI_2, 1e-15));

        let st = ray_to_birkhoff(
            Vec2::new(1.0, 0.5),
            Vec2::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2),
            &t,
        )
        .unwrap();
        assert!(close(st.s, 1.5, 1e-15) && close(st.theta, FRAC_PI_4, 1e-15));

        let st = ray_to_birkhoff(Vec2::new(0.0, 0.5), Vec2::new(1.0, 0.0), &t).unwrap();
        assert!(close(st.s, 3.5, 1e-15) && close(st.theta, FRAC_PI_2, 1e-15));
    }

    #[test]
    fn ray_to_birkhoff_angle_matches_brute_force_rotation() {
        // Scan rotations of the Right tangent; the best match for the target
        // direction must sit at pi/4.
        let target = Vec2::new(-FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let n = 100_000;
        let best = (1..n)
            .map(|k| PI * k as f64 / n as f64)
            .min_by(|a, b| {
                let da = Side::Right.tangent().rotated(*a).distance(target);
                let db = Side::Right.tangent().rotated(*b).distance(target);
                da.total_cmp(&db)
            })
            .unwrap();
        let st = ray_to_birkhoff(Vec2::new(1.0, 0.5), target, &tol()).unwrap();
        assert!(close(st.theta, best, PI / n as f64));
    }

    #[test]
    fn ray_to_birkhoff_errors() {
        let t = tol();
        assert!(matches!(
            ray_to_birkhoff(Vec2::new(0.5, 0.0), Vec2::new(0.0, -1.0), &t),
            Err(BilliardError::NotInward { .. })
        ));
        assert!(matches!(
            ray_to_birkhoff(Vec2::new(0.5, 0.0), Vec2::new(1.0, 0.0), &t),
            Err(BilliardError::NotInward { .. })
        ));
        assert!(matches!(
            ray_to_birkhoff(Vec2::new(1.0, 1.0), Vec2::new(-FRAC_1_SQRT_2, -FRAC_1_SQRT_2), &t),
            Err(BilliardError::CornerState { .. })
        ));
    }

    #[test]
    fn ray_exit_examples() {
        let t = tol();
        let (hit, dist) =
            ray_boundary_exit(&Ray::new(Vec2::new(0.5, 0.0), Vec2::new(0.0, 1.0)), &t).unwrap();
        assert_eq!(hit.point, Vec2::new(0.5, 1.0));
        assert_eq!(hit.side, Side::Top);
        assert_eq!(dist, 1.0);

        let ray = Ray::new(Vec2::new(0.5, 0.0), Vec2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2));
        let (hit, dist) = ray_boundary_exit(&ray, &t).unwrap();
        assert_eq!(hit.side, Side::Right);
        assert_eq!(hit.point.x, 1.0);
        // Height from (1 - s) tan(theta) with s = 0.5, theta = pi/4.
        assert!(close(hit.point.y, (1.0 - 0.5) * FRAC_PI_4.tan(), 1e-12));
        assert!(close(dist, 0.5f64.sqrt(), 1e-12));
    }

    #[test]
    fn ray_exit_through_corner() {
        let d = Vec2::new(-1.0, 2.0).normalized();
        let ray = Ray::new(Vec2::new(0.5, 0.0), d);
        // Brute force: march the line and record where it meets x = 0.
        let t_left = 0.5 / -d.x;
        let y_left = t_left * d.y;
        assert!(close(y_left, 1.0, 1e-12));
        assert!(matches!(
            ray_boundary_exit(&ray, &tol()),
            Err(BilliardError::CornerHit { .. })
        ));
    }

    #[test]
    fn ray_exit_requires_forward_crossing() {
        let ray = Ray::new(Vec2::new(1.0, 0.5), Vec2::new(1.0, 0.0));
        assert_eq!(ray_boundary_exit(&ray, &tol()), Err(BilliardError::NoExit));
    }

    #[test]
    fn magnetic_circle_examples() {
        let d = Vec2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let p = Vec2::new(1.0, 0.5);
        let arc = magnetic_circle(p, d, 0.02, Rotation::Ccw);
        assert!(close(arc.center.x, 1.0 - 0.02 * FRAC_1_SQRT_2, 1e-15));
        assert!(close(arc.center.y, 0.5 + 0.02 * FRAC_1_SQRT_2, 1e-15));
        assert!(close(arc.center.distance(p), 0.02, 1e-15));
        assert!(close(arc.direction_at(arc.phi_exit).dot(d), 1.0, 1e-12));
        assert!(arc.exit_point().distance(p) <= 1e-9);

        let arc = magnetic_circle(Vec2::new(0.5, 1.0), Vec2::new(0.0, 1.0), 1.0, Rotation::Ccw);
        assert_eq!(arc.center, Vec2::new(-0.5, 1.0));

        let arc = magnetic_circle(Vec2::new(0.5, 0.0), Vec2::new(1.0, 0.0), 0.25, Rotation::Ccw);
        assert_eq!(arc.center, Vec2::new(0.5, 0.25));
    }

    #[test]
    fn clockwise_circle_sits_on_the_other_side() {
        let d = Vec2::new(0.0, 1.0);
        let arc = magnetic_circle(Vec2::new(0.5, 1.0), d, 0.2, Rotation::Cw);
        assert_eq!(arc.center, Vec2::new(0.7, 1.0));
        assert!(close(arc.direction_at(arc.phi_exit).dot(d), 1.0, 1e-12));
    }

    #[test]
    fn reentry_on_right_side() {
        let t = tol();
        let p = Vec2::new(1.0, 0.5);
        let d = Vec2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let arc = magnetic_circle(p, d, 0.02, Rotation::Ccw);
        let re = circle_boundary_reentry(&arc, p, &t).unwrap();
        assert_eq!(re.hit.side, Side::Right);
        assert_eq!(re.hit.point.x, 1.0);
        assert!(close(re.hit.point.y, 0.5 + 0.04 * FRAC_1_SQRT_2, 1e-12));
        assert!(close(re.hit.point.y, 0.5282843, 1e-7));
        assert!(close(re.direction.x, -FRAC_1_SQRT_2, 1e-12));
        assert!(close(re.direction.y, FRAC_1_SQRT_2, 1e-12));
        assert_eq!(re.corners_turned, 0);
    }

    #[test]
    fn reentry_through_corner() {
        let p = Vec2::new(0.5, 1.0);
        let arc = magnetic_circle(p, Vec2::new(0.0, 1.0), 0.25, Rotation::Ccw);
        assert_eq!(arc.center, Vec2::new(0.25, 1.0));
        assert!(close(arc.center.distance(Vec2::new(0.0, 1.0)), 0.25, 1e-15));
        assert!(matches!(
            circle_boundary_reentry(&arc, p, &tol()),
            Err(BilliardError::CornerHit { .. })
        ));
    }

    #[test]
    fn reentry_half_turn_on_top() {
        let p = Vec2::new(0.5, 1.0);
        let arc = magnetic_circle(p, Vec2::new(0.0, 1.0), 0.2, Rotation::Ccw);
        assert!(close(arc.center.x, 0.3, 1e-15) && arc.center.y == 1.0);
        let re = circle_boundary_reentry(&arc, p, &tol()).unwrap();
        assert_eq!(re.hit.side, Side::Top);
        assert!(close(re.hit.point.x, 0.1, 1e-12));
        assert!(close(re.direction.x, 0.0, 1e-12) && close(re.direction.y, -1.0, 1e-12));
        assert!(close(re.sweep, PI, 1e-12));
        assert_eq!(re.corners_turned, 0);
    }

    #[test]
    fn reentry_grazing_is_reported() {
        // Exit almost tangent to the Bottom side: the second crossing of the
        // Bottom line is half a micron from the exit point.
        let p = Vec2::new(0.5, 0.0);
        let d = Vec2::from_angle(-5e-7);
        let arc = magnetic_circle(p, d, 0.5, Rotation::Ccw);
        assert!(matches!(
            circle_boundary_reentry(&arc, p, &tol()),
            Err(BilliardError::TangentGraze { .. })
        ));
    }

    #[test]
    fn reentry_around_a_corner_counts_turns() {
        // Exit near the top of the Right side; the arc wraps (1,1) onto Top.
        let p = Vec2::new(1.0, 0.99);
        let d = Vec2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2);
        let arc = magnetic_circle(p, d, 0.02, Rotation::Ccw);
        let re = circle_boundary_reentry(&arc, p, &tol()).unwrap();
        assert_eq!(re.hit.side, Side::Top);
        assert_eq!(re.corners_turned, 1);
    }

    #[test]
    fn reentry_brute_force_minimality() {
        let t = tol();
        let cases = [
            (Vec2::new(1.0, 0.5), Vec2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2), 0.02),
            (Vec2::new(1.0, 0.99), Vec2::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2), 0.02),
            (Vec2::new(0.5, 1.0), Vec2::new(0.0, 1.0), 0.2),
            (Vec2::new(0.3, 0.0), Vec2::from_angle(-1.2), 0.85),
            (Vec2::new(0.0, 0.4), Vec2::from_angle(2.5), 0.49),
        ];
        for (p, d, r) in cases {
            let arc = magnetic_circle(p, d, r, Rotation::Ccw);
            let re = circle_boundary_reentry(&arc, p, &t).unwrap();
            assert!((re.hit.point.distance(arc.center) - r).abs() <= 1e-9);
            assert!(point_to_arc(re.hit.point, &t).is_ok());
            assert!((re.direction.norm() - 1.0).abs() <= 1e-12);
            // No sample strictly before the found sweep lies inside the closed square.
            let n = 10_000;
            for k in 1..n {
                let delta = re.sweep * k as f64 / n as f64;
                if delta <= 1e-6 || delta >= re.sweep - 1e-6 {
                    continue;
                }
                let q = arc.point_at(arc.phi_after(delta));
                let inside = (0.0..=1.0).contains(&q.x) && (0.0..=1.0).contains(&q.y);
                assert!(!inside, "sample {q:?} at sweep {delta} is inside");
            }
        }
    }

    #[test]
    fn state_distance_wraps() {
        let a = BirkhoffState::new(0.001, 1.0).unwrap();
        let b = BirkhoffState::new(3.999, 1.0).unwrap();
        assert!(close(a.distance(&b), 0.002, 1e-12));
    }
}
