//! One-dimensional potentials used throughout the toolkit.

use crate::error::{require, Result};

/// Heaviside step with the midpoint convention Θ(0) = 1/2.
pub fn heaviside(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    Free,
    /// `-depth·Θ(x - center)`.
    RectStep {
        depth: f64,
        center: f64,
    },
    /// `-(depth/2)·(1 + tanh((x - center)/width))`.
    SoftStep {
        depth: f64,
        width: f64,
        center: f64,
    },
    /// `-depth·(Θ(x - a) + Θ(-x - a))`, flat top on `[-a, a]`.
    Plateau {
        depth: f64,
        half_width: f64,
    },
    /// `-curvature·(x - center)²`.
    Parabola {
        curvature: f64,
        center: f64,
    },
    /// Infinite walls outside `[lo, hi]`, `inner` between them.
    HardBox {
        lo: f64,
        hi: f64,
        inner: Box<Potential>,
    },
    /// `inner(2·axis - x)`.
    Mirror {
        axis: f64,
        inner: Box<Potential>,
    },
}

impl Potential {
    pub fn rect_step(depth: f64) -> Self {
        Potential::RectStep { depth, center: 0.0 }
    }

    pub fn soft_step(depth: f64, width: f64) -> Self {
        Potential::SoftStep {
            depth,
            width,
            center: 0.0,
        }
    }

    pub fn plateau(depth: f64, half_width: f64) -> Self {
        Potential::Plateau { depth, half_width }
    }

    pub fn hard_box(self, lo: f64, hi: f64) -> Self {
        Potential::HardBox {
            lo,
            hi,
            inner: Box::new(self),
        }
    }

    pub fn mirrored(self, axis: f64) -> Self {
        Potential::Mirror {
            axis,
            inner: Box::new(self),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Potential::Free => Ok(()),
            Potential::RectStep { depth, center } => {
                require(*depth >= 0.0, || format!("step depth must be >= 0, got {depth}"))?;
                require(center.is_finite(), || "step center must be finite".into())
            }
            Potential::SoftStep { depth, width, center } => {
                require(*depth >= 0.0, || format!("step depth must be >= 0, got {depth}"))?;
                require(*width > 0.0, || format!("step width must be > 0, got {width}"))?;
                require(center.is_finite(), || "step center must be finite".into())
            }
            Potential::Plateau { depth, half_width } => {
                require(*depth >= 0.0, || format!("plateau depth must be >= 0, got {depth}"))?;
                require(*half_width > 0.0, || {
                    format!("plateau half-width must be > 0, got {half_width}")
                })
            }
            Potential::Parabola { curvature, center } => require(curvature.is_finite() && center.is_finite(), || {
                "parabola parameters must be finite".into()
            }),
            Potential::HardBox { lo, hi, inner } => {
                require(lo < hi, || format!("box needs lo < hi, got [{lo}, {hi}]"))?;
                inner.validate()
            }
            Potential::Mirror { inner, .. } => inner.validate(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Free => 0.0,
            Potential::RectStep { depth, center } => -depth * heaviside(x - center),
            Potential::SoftStep { depth, width, center } => -0.5 * depth * (1.0 + ((x - center) / width).tanh()),
            Potential::Plateau { depth, half_width } => {
                -depth * (heaviside(x - half_width) + heaviside(-x - half_width))
            }
            Potential::Parabola { curvature, center } => -curvature * (x - center).powi(2),
            Potential::HardBox { lo, hi, inner } => {
                if x < *lo || x > *hi {
                    f64::INFINITY
                } else {
                    inner.eval(x)
                }
            }
            Potential::Mirror { axis, inner } => inner.eval(2.0 * axis - x),
        }
    }

    /// Limits `(V(-∞), V(+∞))` where they exist.
    pub fn asymptotes(&self) -> Option<(f64, f64)> {
        match self {
            Potential::Free => Some((0.0, 0.0)),
            Potential::RectStep { depth, .. } | Potential::SoftStep { depth, .. } => Some((0.0, -depth)),
            Potential::Plateau { depth, .. } => Some((-depth, -depth)),
            Potential::Parabola { .. } | Potential::HardBox { .. } => None,
            Potential::Mirror { inner, .. } => inner.asymptotes().map(|(l, r)| (r, l)),
        }
    }

    /// The innermost step (rect or soft), seen through boxes and mirrors.
    pub fn step(&self) -> Option<&Potential> {
        match self {
            Potential::RectStep { .. } | Potential::SoftStep { .. } => Some(self),
            Potential::HardBox { inner, .. } => inner.step(),
            Potential::Mirror { inner, .. } => inner.step(),
            _ => None,
        }
    }

    /// Position of the drop, in the coordinates of `self`.
    pub fn step_center(&self) -> Option<f64> {
        match self {
            Potential::RectStep { center, .. } | Potential::SoftStep { center, .. } => Some(*center),
            Potential::HardBox { inner, .. } => inner.step_center(),
            Potential::Mirror { axis, inner } => inner.step_center().map(|c| 2.0 * axis - c),
            _ => None,
        }
    }

    /// Width over which the step drops; zero for the rectangular step.
    pub fn step_width(&self) -> Option<f64> {
        match self.step()? {
            Potential::RectStep { .. } => Some(0.0),
            Potential::SoftStep { width, .. } => Some(*width),
            _ => None,
        }
    }

    pub fn step_depth(&self) -> Option<f64> {
        match self.step()? {
            Potential::RectStep { depth, .. } | Potential::SoftStep { depth, .. } => Some(*depth),
            _ => None,
        }
    }

    pub fn sample(&self, xs: impl Iterator<Item = f64>) -> Vec<f64> {
        xs.map(|x| self.eval(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let rect = Potential::rect_step(2.0);
        assert_eq!(rect.eval(-1.0), 0.0);
        assert_eq!(rect.eval(1.0), -2.0);
        assert_eq!(rect.eval(0.0), -1.0);

        let soft = Potential::soft_step(2.0, 0.5);
        assert!((soft.eval(0.0) + 1.0).abs() < 1e-15);
        assert!((soft.eval(0.5) + (1.0 + 1f64.tanh())).abs() < 1e-15);

        let plateau = Potential::plateau(3.0, 1.0);
        assert_eq!(plateau.eval(0.0), 0.0);
        assert_eq!(plateau.eval(1.5), -3.0);
        assert_eq!(plateau.eval(-1.5), -3.0);

        let parabola = Potential::Parabola {
            curvature: 50.0,
            center: 0.3,
        };
        assert!((parabola.eval(0.5) + 50.0 * 0.04).abs() < 1e-12);
    }

    #[test]
    fn soft_step_approaches_rect_step() {
        let rect = Potential::rect_step(5.0);
        for x in [-2.0, -0.3, 1e-3, 0.7, 4.0] {
            let soft = Potential::soft_step(5.0, 1e-6 * f64::abs(x));
            assert!((soft.eval(x) - rect.eval(x)).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn box_and_mirror() {
        let boxed = Potential::soft_step(1.0, 0.1).hard_box(-1.0, 1.0);
        assert!(boxed.eval(1.5).is_infinite());
        assert_eq!(boxed.step_center(), Some(0.0));

        let m = Potential::SoftStep {
            depth: 1.0,
            width: 0.1,
            center: 0.3,
        }
        .mirrored(0.5);
        assert!((m.eval(0.7) + 0.5).abs() < 1e-12);
        assert!((m.eval(0.6) - Potential::soft_step(1.0, 0.1).eval(0.1)).abs() < 1e-12);
        assert_eq!(m.step_center(), Some(0.7));
        assert_eq!(m.asymptotes(), Some((-1.0, 0.0)));
    }

    #[test]
    fn validation() {
        assert!(Potential::rect_step(-1.0).validate().is_err());
        assert!(Potential::soft_step(1.0, 0.0).validate().is_err());
        assert!(Potential::plateau(1.0, -1.0).validate().is_err());
        assert!(Potential::Free.hard_box(1.0, 0.0).validate().is_err());
    }
}
