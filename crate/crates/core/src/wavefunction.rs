use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::units::PhysicalParams;

/// Complex amplitudes sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    grid: Grid,
    amplitudes: Vec<Complex64>,
}

impl WaveFunction {
    pub fn new(grid: Grid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "{} amplitudes for a grid of {} points",
                amplitudes.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let amplitudes = grid.points().map(f).collect();
        Self { grid, amplitudes }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn density(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    /// ‖ψ‖² by the trapezoid rule.
    pub fn norm_sqr(&self) -> f64 {
        self.grid.trapezoid(&self.density())
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n2 = self.norm_sqr();
        if !(n2 > 0.0) || !n2.is_finite() {
            return Err(Error::ZeroNorm);
        }
        let scale = 1.0 / n2.sqrt();
        self.amplitudes.iter_mut().for_each(|c| *c *= scale);
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.amplitudes.iter_mut().for_each(|c| *c *= factor);
    }

    /// ∫_{x_lo}^{x_hi} |ψ|² dx.
    pub fn region_probability(&self, x_lo: f64, x_hi: f64) -> Result<f64> {
        self.grid.integrate(&self.density(), x_lo, x_hi)
    }

    /// ⟨x⟩ = ∫ x|ψ|² / ‖ψ‖².
    pub fn mean_position(&self) -> f64 {
        let w: Vec<f64> = self
            .grid
            .points()
            .zip(&self.amplitudes)
            .map(|(x, c)| x * c.norm_sqr())
            .collect();
        self.grid.trapezoid(&w) / self.norm_sqr()
    }

    pub fn position_variance(&self) -> f64 {
        let mean = self.mean_position();
        let w: Vec<f64> = self
            .grid
            .points()
            .zip(&self.amplitudes)
            .map(|(x, c)| (x - mean).powi(2) * c.norm_sqr())
            .collect();
        self.grid.trapezoid(&w) / self.norm_sqr()
    }

    /// Probability current j = (ħ/m)·Im(ψ*ψ′) by second-order central
    /// differences. Entry `i` belongs to grid point `i + 1`; the two end
    /// points are excluded.
    pub fn probability_current(&self, params: &PhysicalParams) -> Vec<f64> {
        let scale = params.hbar / params.mass / (2.0 * self.grid.dx());
        self.amplitudes
            .windows(3)
            .map(|w| scale * (w[1].conj() * (w[2] - w[0])).im)
            .collect()
    }

    /// ∫ j dx over the interior nodes in `[lo, hi]` (node sum times dx).
    pub fn integrated_current(&self, params: &PhysicalParams, lo: f64, hi: f64) -> f64 {
        let j = self.probability_current(params);
        let range = self.grid.index_range(lo, hi);
        let start = range.start.max(1);
        let end = range.end.min(self.grid.len() - 1);
        if start >= end {
            return 0.0;
        }
        j[start - 1..end - 1].iter().sum::<f64>() * self.grid.dx()
    }

    /// ⟨ψ|φ⟩ by the trapezoid rule.
    pub fn inner(&self, other: &WaveFunction) -> Complex64 {
        let n = self.amplitudes.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for (i, (a, b)) in self.amplitudes.iter().zip(&other.amplitudes).enumerate() {
            let w = if i == 0 || i + 1 == n { 0.5 } else { 1.0 };
            acc += a.conj() * b * w;
        }
        acc * self.grid.dx()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn grid() -> Grid {
        Grid::new(-5.0, 5.0, 2001).unwrap()
    }

    #[test]
    fn plane_wave_current() {
        let k = 3.0;
        let params = PhysicalParams::new(1.3, 0.7).unwrap();
        let psi = WaveFunction::from_fn(grid(), |x| Complex64::new(0.0, k * x).exp());
        let dx = psi.grid().dx();
        // Central differences see sin(k dx)/dx instead of k.
        let expected = params.hbar / params.mass * (k * dx).sin() / dx;
        for j in psi.probability_current(&params) {
            assert!((j - expected).abs() < 1e-10);
        }
        assert!((expected - params.hbar * k / params.mass).abs() / expected < 1e-4);
    }

    #[test]
    fn real_function_has_no_current() {
        let psi = WaveFunction::from_fn(grid(), |x| Complex64::new((-x * x).exp() * x.cos(), 0.0));
        assert!(psi
            .probability_current(&PhysicalParams::default())
            .iter()
            .all(|&j| j == 0.0));
    }

    #[test]
    fn region_probability_edges() {
        let psi = WaveFunction::from_fn(grid(), |x| Complex64::new((-(x + 3.0).powi(2) * 20.0).exp(), 0.0))
            .normalized()
            .unwrap();
        assert!((psi.region_probability(-5.0, 5.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(psi.region_probability(1.0, 5.0).unwrap() < 1e-12);
        assert!(matches!(
            psi.region_probability(-6.0, 0.0),
            Err(Error::RegionOutOfGrid { .. })
        ));
    }

    #[test]
    fn zero_norm_is_an_error() {
        let mut psi = WaveFunction::from_fn(grid(), |_| Complex64::new(0.0, 0.0));
        assert_eq!(psi.normalize(), Err(Error::ZeroNorm));
    }

    proptest! {
        #[test]
        fn normalize_gives_unit_norm(
            scale in 1e-6f64..1e6,
            center in -2.0f64..2.0,
            width in 0.1f64..2.0,
            k in -20.0f64..20.0,
        ) {
            let psi = WaveFunction::from_fn(grid(), |x| {
                Complex64::from_polar(scale * (-(x - center).powi(2) / width).exp(), k * x)
            });
            let psi = psi.normalized().unwrap();
            prop_assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn stationary_real_shapes_carry_no_current(a in 0.1f64..3.0, b in -3.0f64..3.0) {
            let psi = WaveFunction::from_fn(grid(), |x| {
                Complex64::new((-a * x * x).exp() * (b * x).cos(), 0.0) * Complex64::from_polar(1.0, 0.7)
            });
            let j = psi.probability_current(&PhysicalParams::default());
            prop_assert!(j.iter().all(|v| v.abs() < 1e-12));
        }
    }
}
