//! Closed-form same-side bounces for a chord launched from the Bottom side.
//!
//! These are test oracles for the geometric engine, which never dispatches
//! on them. Every coordinate is local to the side it lies on: the distance
//! from that side's starting vertex measured counterclockwise (Right from
//! `(1,0)`, Top from `(1,1)`, Left from `(0,1)`).

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{BilliardError, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SameSideBounce {
    /// Local coordinate of the exit point.
    pub exit: f64,
    /// Local coordinate of the re-entry point.
    pub entry: f64,
    /// Angle of the re-entry state.
    pub theta: f64,
}

/// Which sign convention to evaluate for the Left side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LeftFormula {
    /// Signs matching the geometry for `theta` in `(pi/2, pi)`:
    /// exit `1 + s tan(theta)`, shift `-(2/B) cos(theta)`.
    #[default]
    Geometric,
    /// The formulas as commonly written, `1 - s tan(theta)` and
    /// `+(2/B) cos(theta)`. Always lands outside the side for this
    /// angle range; kept for comparison only.
    AsPublished,
}

fn in_unit(quantity: &'static str, value: f64) -> Result<f64> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(BilliardError::OutOfRange { quantity, value })
    }
}

fn check_start(s: f64, b: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(BilliardError::Precondition(format!(
            "launch coordinate {s} must lie in (0, 1)"
        )));
    }
    if !(b.is_finite() && b > 0.0) {
        return Err(BilliardError::InvalidConfig(format!("field {b} must be positive")));
    }
    Ok(())
}

pub fn closed_form_right(s: f64, theta: f64, b: f64) -> Result<SameSideBounce> {
    check_start(s, b)?;
    if !(theta > 0.0 && theta < FRAC_PI_2) {
        return Err(BilliardError::Precondition(format!(
            "right-side bounce needs theta in (0, pi/2), got {theta}"
        )));
    }
    let exit = in_unit("s_exit", (1.0 - s) * theta.tan())?;
    let entry = in_unit("s_entry", exit + 2.0 / b * theta.cos())?;
    Ok(SameSideBounce {
        exit,
        entry,
        theta: FRAC_PI_2 - theta,
    })
}

pub fn closed_form_top(s: f64, theta: f64, b: f64) -> Result<SameSideBounce> {
    check_start(s, b)?;
    if !(theta > 0.0 && theta < PI) {
        return Err(BilliardError::Precondition(format!(
            "theta must lie in (0, pi), got {theta}"
        )));
    }
    let exit = in_unit("s_exit", 1.0 - s - 1.0 / theta.tan())?;
    let entry = in_unit("s_entry", exit + 2.0 / b * theta.sin())?;
    Ok(SameSideBounce {
        exit,
        entry,
        theta: PI - theta,
    })
}

pub fn closed_form_left(s: f64, theta: f64, b: f64, formula: LeftFormula) -> Result<SameSideBounce> {
    check_start(s, b)?;
    if !(theta > FRAC_PI_2 && theta < PI) {
        return Err(BilliardError::Precondition(format!(
            "left-side bounce needs theta in (pi/2, pi), got {theta}"
        )));
    }
    let shift = 2.0 / b * theta.cos();
    let (exit, entry) = match formula {
        LeftFormula::Geometric => {
            let exit = 1.0 + s * theta.tan();
            (exit, exit - shift)
        }
        LeftFormula::AsPublished => {
            let exit = 1.0 - s * theta.tan();
            (exit, exit + shift)
        }
    };
    Ok(SameSideBounce {
        exit: in_unit("s_exit", exit)?,
        entry: in_unit("s_entry", entry)?,
        theta: 3.0 * FRAC_PI_2 - theta,
    })
}
