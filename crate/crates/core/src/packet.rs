use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::wavefunction::WaveFunction;

/// Gaussian packet whose density is the normal density with mean `mu`
/// and standard deviation `sigma`, carrying plane wave `e^{i k0 x}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPacketSpec {
    pub mu: f64,
    pub sigma: f64,
    pub k0: f64,
}

impl GaussianPacketSpec {
    pub fn new(mu: f64, sigma: f64, k0: f64) -> Result<Self> {
        if !(sigma > 0.0) || !mu.is_finite() || !k0.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "packet needs finite mu, k0 and sigma > 0, got mu={mu}, sigma={sigma}, k0={k0}"
            )));
        }
        Ok(Self { mu, sigma, k0 })
    }

    /// Analytic amplitude (2πσ²)^{-1/4} e^{-(x-μ)²/4σ²} e^{i k0 x}.
    pub fn amplitude(&self, x: f64) -> Complex64 {
        let g = (2.0 * PI * self.sigma * self.sigma).powf(-0.25)
            * (-(x - self.mu).powi(2) / (4.0 * self.sigma * self.sigma)).exp();
        Complex64::from_polar(g, self.k0 * x)
    }

    /// Check that `grid` samples the envelope and the carrier.
    pub fn check_resolution(&self, grid: &Grid) -> Result<()> {
        let dx = grid.dx();
        if dx >= self.sigma / 5.0 {
            return Err(Error::UnresolvedPacket(format!(
                "dx = {dx:e} is not below sigma/5 = {:e}",
                self.sigma / 5.0
            )));
        }
        if self.k0 != 0.0 && dx >= PI / (4.0 * self.k0.abs()) {
            return Err(Error::UnresolvedPacket(format!(
                "dx = {dx:e} is not below pi/(4|k0|) = {:e}",
                PI / (4.0 * self.k0.abs())
            )));
        }
        Ok(())
    }
}

/// Sample the packet on `grid` and normalize it there.
pub fn build_gaussian(spec: &GaussianPacketSpec, grid: &Grid) -> Result<WaveFunction> {
    spec.check_resolution(grid)?;
    WaveFunction::from_fn(*grid, |x| spec.amplitude(x)).normalized()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centred_real_packet() {
        let grid = Grid::new(-10.0, 10.0, 2001).unwrap();
        let spec = GaussianPacketSpec::new(0.0, 1.0, 0.0).unwrap();
        let psi = build_gaussian(&spec, &grid).unwrap();
        assert!(psi.amplitudes().iter().all(|c| c.im == 0.0 && c.re > 0.0));
        assert!(psi.mean_position().abs() < 1e-12);
        assert!((psi.position_variance() - 1.0).abs() < 1e-2);
    }

    #[test]
    fn moments_of_a_moving_packet() {
        let grid = Grid::new(0.0, 1.0, 4001).unwrap();
        let spec = GaussianPacketSpec::new(0.1, 0.01, 200.0 * PI).unwrap();
        let psi = build_gaussian(&spec, &grid).unwrap();
        assert!((psi.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((psi.mean_position() - 0.1).abs() < 1e-6 * 0.01);
        assert!((psi.position_variance() / 1e-4 - 1.0).abs() < 1e-2);
        assert!((psi.region_probability(0.0, 0.5).unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn unresolved_packets_are_rejected() {
        let grid = Grid::new(0.0, 1.0, 1001).unwrap();
        let narrow = GaussianPacketSpec::new(0.5, 0.004, 0.0).unwrap();
        assert!(matches!(
            build_gaussian(&narrow, &grid),
            Err(Error::UnresolvedPacket(_))
        ));
        let fast = GaussianPacketSpec::new(0.5, 0.1, 1000.0).unwrap();
        assert!(matches!(build_gaussian(&fast, &grid), Err(Error::UnresolvedPacket(_))));
        assert!(GaussianPacketSpec::new(0.0, 0.0, 1.0).is_err());
    }
}
