use crate::error::{require, Error, Result};

/// Uniform spatial mesh `x_i = x_min + i·dx`, `i = 0 … n_points-1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        require(x_min.is_finite() && x_max.is_finite(), || {
            "grid bounds must be finite".to_string()
        })?;
        require(x_min < x_max, || format!("need x_min < x_max, got [{x_min}, {x_max}]"))?;
        require(n_points >= 3, || format!("need at least 3 grid points, got {n_points}"))?;
        Ok(Self { x_min, x_max, n_points })
    }

    /// Symmetric grid `[-half_width, half_width]` with the given spacing
    /// (rounded so that the end points are exact).
    pub fn symmetric(half_width: f64, dx: f64) -> Result<Self> {
        require(half_width > 0.0 && dx > 0.0, || {
            format!("need positive half-width and spacing, got {half_width}, {dx}")
        })?;
        let cells = (2.0 * half_width / dx).round().max(2.0) as usize;
        Self::new(-half_width, half_width, cells + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        if i + 1 == self.n_points {
            self.x_max
        } else {
            self.x_min + i as f64 * self.dx()
        }
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_min && x <= self.x_max
    }

    /// Integral over `[lo, hi]` of the piecewise-linear interpolant of
    /// `values` (trapezoid rule, with partial cells at the ends).
    pub fn integrate(&self, values: &[f64], lo: f64, hi: f64) -> Result<f64> {
        debug_assert_eq!(values.len(), self.n_points);
        if !(lo < hi) || lo < self.x_min - 1e-12 * self.dx() || hi > self.x_max + 1e-12 * self.dx() {
            return Err(Error::RegionOutOfGrid {
                lo,
                hi,
                grid_lo: self.x_min,
                grid_hi: self.x_max,
            });
        }
        let lo = lo.max(self.x_min);
        let hi = hi.min(self.x_max);
        let dx = self.dx();
        let last = self.n_points - 1;
        let pos = |x: f64| ((x - self.x_min) / dx).clamp(0.0, last as f64);
        let (p_lo, p_hi) = (pos(lo), pos(hi));
        let i_lo = (p_lo.floor() as usize).min(last - 1);
        let i_hi = (p_hi.floor() as usize).min(last - 1);

        // Exact integral of the linear interpolant on cell i between local
        // coordinates s0 and s1 in [0, 1].
        let cell = |i: usize, s0: f64, s1: f64| {
            let (f0, f1) = (values[i], values[i + 1]);
            let g = |s: f64| f0 * s + 0.5 * (f1 - f0) * s * s;
            (g(s1) - g(s0)) * dx
        };

        if i_lo == i_hi {
            return Ok(cell(i_lo, p_lo - i_lo as f64, p_hi - i_lo as f64));
        }
        let mut total = cell(i_lo, p_lo - i_lo as f64, 1.0);
        for i in i_lo + 1..i_hi {
            total += 0.5 * (values[i] + values[i + 1]) * dx;
        }
        total += cell(i_hi, 0.0, p_hi - i_hi as f64);
        Ok(total)
    }

    /// Trapezoid rule over the full grid.
    pub fn trapezoid(&self, values: &[f64]) -> f64 {
        debug_assert_eq!(values.len(), self.n_points);
        let inner: f64 = values[1..self.n_points - 1].iter().sum();
        (inner + 0.5 * (values[0] + values[self.n_points - 1])) * self.dx()
    }

    /// Index range of nodes lying in `[lo, hi]`.
    pub fn index_range(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let dx = self.dx();
        let eps = 1e-9 * dx;
        let first = (((lo - self.x_min) - eps) / dx).ceil().max(0.0) as usize;
        let last = (((hi - self.x_min) + eps) / dx).floor();
        if last < 0.0 {
            return 0..0;
        }
        let end = (last as usize + 1).min(self.n_points);
        first.min(end)..end
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(1.0, 0.0, 10).is_err());
        assert!(Grid::new(0.0, 1.0, 2).is_err());
        assert!(Grid::new(0.0, f64::INFINITY, 10).is_err());
    }

    #[test]
    fn spacing_and_endpoints() {
        let g = Grid::new(0.0, 1.0, 1001).unwrap();
        assert!((g.dx() - 1e-3).abs() < 1e-15);
        assert_eq!(g.x(1000), 1.0);
        assert_eq!(g.x(0), 0.0);
    }

    #[test]
    fn linear_integrand_is_exact_on_partial_cells() {
        let g = Grid::new(-1.0, 2.0, 31).unwrap();
        let f: Vec<f64> = g.points().map(|x| 3.0 * x + 1.0).collect();
        let exact = |a: f64, b: f64| 1.5 * (b * b - a * a) + (b - a);
        for (a, b) in [(-1.0, 2.0), (-0.95, 0.333), (0.01, 0.02), (1.55, 2.0)] {
            let got = g.integrate(&f, a, b).unwrap();
            assert!((got - exact(a, b)).abs() < 1e-12, "{a} {b} {got}");
        }
        assert!(g.integrate(&f, -2.0, 0.0).is_err());
        assert!(g.integrate(&f, 0.5, 0.5).is_err());
    }

    #[test]
    fn index_range_is_inclusive() {
        let g = Grid::new(-1.0, 1.0, 201).unwrap();
        let r = g.index_range(-0.5, 0.5);
        assert_eq!(g.x(r.start), -0.5);
        assert!((g.x(r.end - 1) - 0.5).abs() < 1e-12);
        assert_eq!(r.len(), 101);
    }
}
